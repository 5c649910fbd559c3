//! Deterministic dynamic programming problems.
//!
//! A problem is a finite state set, a successor correspondence with nonempty
//! values and a payoff in `[0, 1]` attached to every state. A *play* is a
//! sequence of states in which every state is a successor of the previous one;
//! the payoff of stage `m` is the payoff of the `m`-th state, so the first
//! stage already pays `f(start)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Errors raised while building or loading a [`DpModel`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model has no states")]
    Empty,
    #[error("duplicate state id `{0}`")]
    DuplicateId(String),
    #[error("state `{state}`: successor `{successor}` does not exist")]
    DanglingSuccessor { state: String, successor: String },
    #[error("state `{state}`: successor index {index} out of range")]
    SuccessorOutOfRange { state: String, index: usize },
    #[error("state `{0}` has no successors")]
    NoSuccessors(String),
    #[error("state `{state}`: payoff {payoff} outside [0, 1]")]
    PayoffOutOfRange { state: String, payoff: f64 },
    #[error("expected model type `{expected}`, found `{found}`")]
    WrongType { expected: &'static str, found: String },
    #[error("malformed model JSON: {0}")]
    Json(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

/// One state of a [`DpModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateRecord {
    pub id: String,
    pub payoff: f64,
    pub successors: Vec<usize>,
}

/// A finite deterministic dynamic programming problem.
///
/// Immutable once built; construction checks that every successor list is
/// nonempty and in range and that every payoff lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpModel {
    states: Vec<StateRecord>,
}

impl DpModel {
    pub fn new(states: Vec<StateRecord>) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = HashMap::with_capacity(states.len());
        for (index, state) in states.iter().enumerate() {
            if seen.insert(state.id.as_str(), index).is_some() {
                return Err(ModelError::DuplicateId(state.id.clone()));
            }
            if !(0.0..=1.0).contains(&state.payoff) {
                return Err(ModelError::PayoffOutOfRange {
                    state: state.id.clone(),
                    payoff: state.payoff,
                });
            }
            if state.successors.is_empty() {
                return Err(ModelError::NoSuccessors(state.id.clone()));
            }
            if let Some(&bad) = state.successors.iter().find(|&&s| s >= states.len()) {
                return Err(ModelError::SuccessorOutOfRange {
                    state: state.id.clone(),
                    index: bad,
                });
            }
        }
        Ok(Self { states })
    }

    /// Builds a model from `(id, payoff, successor ids)` triples.
    pub fn from_labels<S: AsRef<str>>(
        states: &[(S, f64, Vec<S>)],
    ) -> Result<Self, ModelError> {
        let index: HashMap<&str, usize> = states
            .iter()
            .enumerate()
            .map(|(i, (id, _, _))| (id.as_ref(), i))
            .collect();
        let mut records = Vec::with_capacity(states.len());
        for (id, payoff, succ) in states {
            let successors = succ
                .iter()
                .map(|s| {
                    index.get(s.as_ref()).copied().ok_or_else(|| {
                        ModelError::DanglingSuccessor {
                            state: id.as_ref().to_owned(),
                            successor: s.as_ref().to_owned(),
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            records.push(StateRecord {
                id: id.as_ref().to_owned(),
                payoff: *payoff,
                successors,
            });
        }
        Self::new(records)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateRecord] {
        &self.states
    }

    pub fn payoff(&self, s: usize) -> f64 {
        self.states[s].payoff
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.states[s].successors
    }

    pub fn id(&self, s: usize) -> &str {
        &self.states[s].id
    }

    pub fn index_of(&self, id: &str) -> Result<usize, ModelError> {
        self.states
            .iter()
            .position(|st| st.id == id)
            .ok_or_else(|| ModelError::UnknownState(id.to_owned()))
    }

    pub fn payoffs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.payoff).collect()
    }

    pub fn is_successor(&self, from: usize, to: usize) -> bool {
        self.states[from].successors.contains(&to)
    }

    pub fn to_json(&self) -> DpModelJson {
        DpModelJson {
            kind: "dp".to_owned(),
            states: self
                .states
                .iter()
                .map(|s| DpStateJson {
                    id: s.id.clone(),
                    payoff: s.payoff,
                    successors: s
                        .successors
                        .iter()
                        .map(|&t| self.states[t].id.clone())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("model serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let raw: DpModelJson =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::try_from(raw)
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.to_json()).expect("model serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

/// On-disk form: `{"type":"dp","states":[{"id","payoff","successors"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DpModelJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub states: Vec<DpStateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DpStateJson {
    pub id: String,
    pub payoff: f64,
    pub successors: Vec<String>,
}

impl TryFrom<DpModelJson> for DpModel {
    type Error = ModelError;

    fn try_from(raw: DpModelJson) -> Result<Self, Self::Error> {
        if raw.kind != "dp" {
            return Err(ModelError::WrongType {
                expected: "dp",
                found: raw.kind,
            });
        }
        let triples: Vec<(String, f64, Vec<String>)> = raw
            .states
            .into_iter()
            .map(|s| (s.id, s.payoff, s.successors))
            .collect();
        DpModel::from_labels(&triples)
    }
}

/// A feasible play together with its payoff stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Play {
    pub sequence: Vec<usize>,
    pub payoffs: Vec<f64>,
}

impl Play {
    /// Checks feasibility against `model` and records the payoffs.
    pub fn new(model: &DpModel, sequence: Vec<usize>) -> Result<Self, PlayError> {
        let Some(&first) = sequence.first() else {
            return Err(PlayError::Empty);
        };
        if first >= model.len() {
            return Err(PlayError::UnknownIndex(first));
        }
        for (m, pair) in sequence.windows(2).enumerate() {
            if pair[1] >= model.len() {
                return Err(PlayError::UnknownIndex(pair[1]));
            }
            if !model.is_successor(pair[0], pair[1]) {
                return Err(PlayError::Infeasible { stage: m + 1 });
            }
        }
        let payoffs = sequence.iter().map(|&s| model.payoff(s)).collect();
        Ok(Self { sequence, payoffs })
    }

    pub fn start(&self) -> usize {
        self.sequence[0]
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Left-to-right sum of the payoff stream.
    pub fn total(&self) -> f64 {
        self.payoffs.iter().sum()
    }

    /// `cumulative[k]` is the sum of the first `k` payoffs (`cumulative[0] = 0`).
    pub fn cumulative(&self) -> Vec<f64> {
        cumulative_sums(&self.payoffs)
    }

    pub fn labels<'a>(&self, model: &'a DpModel) -> Vec<&'a str> {
        self.sequence.iter().map(|&s| model.id(s)).collect()
    }
}

pub(crate) fn cumulative_sums(payoffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(payoffs.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for &f in payoffs {
        acc += f;
        out.push(acc);
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlayError {
    #[error("empty play")]
    Empty,
    #[error("state index {0} out of range")]
    UnknownIndex(usize),
    #[error("transition into stage {} is not allowed", stage + 1)]
    Infeasible { stage: usize },
}

impl fmt::Display for DpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            let succ: Vec<&str> = s.successors.iter().map(|&t| self.id(t)).collect();
            writeln!(f, "{} [{}] -> {}", s.id, s.payoff, succ.join(", "))?;
        }
        Ok(())
    }
}
