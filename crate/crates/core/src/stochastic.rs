//! Zero-sum stochastic games with absorbing states.
//!
//! Player 1 picks rows and maximizes, player 2 picks columns. An absorbing
//! state pays its `rho` at every stage once reached, including the stage in
//! which it was entered through a starred cell, which is modelled as a cell
//! paying `rho` and moving to an absorbing state with the same `rho`.
//!
//! Finite-horizon values follow the Shapley recursion on averages,
//! `v_n(s) = val[(g(s) + (n-1) E v_{n-1}) / n]`, with `v_n = rho` on
//! absorbing states; discounted values iterate
//! `v = val[lambda g + (1 - lambda) E v]` from zero.

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dp::sup_distance;
use crate::matrix::{solve_matrix_game, MatrixError, MatrixGame};
use crate::trajectory::DeviationProfile;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game has no states")]
    Empty,
    #[error("duplicate state id `{0}`")]
    DuplicateId(String),
    #[error("state `{state}`: transition target `{target}` does not exist")]
    UnknownTarget { state: String, target: String },
    #[error("state `{state}`: {detail}")]
    Shape { state: String, detail: String },
    #[error("state `{state}`: transition ({row}, {col}) is not a probability distribution")]
    Distribution { state: String, row: usize, col: usize },
    #[error("state `{state}`: payoff {value} outside [-1, 1]")]
    Payoff { state: String, value: f64 },
    #[error("state `{state}`: missing field `{field}`")]
    MissingField { state: String, field: &'static str },
    #[error("expected model type `{expected}`, found `{found}`")]
    WrongType { expected: &'static str, found: String },
    #[error("malformed game JSON: {0}")]
    Json(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("stage game at horizon {horizon}, state `{state}`: {source}")]
    StageGame {
        horizon: usize,
        state: String,
        source: MatrixError,
    },
    #[error("profile: {0}")]
    Profile(String),
}

/// One transition outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub target: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameState {
    Absorbing {
        id: String,
        rho: f64,
    },
    Active {
        id: String,
        /// `payoff[i][j]`
        payoff: Vec<Vec<f64>>,
        /// `next[i][j]` is the distribution of the next state.
        next: Vec<Vec<Vec<Outcome>>>,
    },
}

impl GameState {
    pub fn id(&self) -> &str {
        match self {
            GameState::Absorbing { id, .. } | GameState::Active { id, .. } => id,
        }
    }

    pub fn is_absorbing(&self) -> bool {
        matches!(self, GameState::Absorbing { .. })
    }

    /// `(rows, cols)` of the stage game, `(0, 0)` when absorbing.
    pub fn actions(&self) -> (usize, usize) {
        match self {
            GameState::Absorbing { .. } => (0, 0),
            GameState::Active { payoff, .. } => (payoff.len(), payoff[0].len()),
        }
    }
}

/// A validated stochastic game.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    states: Vec<GameState>,
}

impl StochasticGame {
    pub fn new(states: Vec<GameState>) -> Result<Self, GameError> {
        if states.is_empty() {
            return Err(GameError::Empty);
        }
        let mut seen = HashMap::new();
        for st in &states {
            if seen.insert(st.id().to_owned(), ()).is_some() {
                return Err(GameError::DuplicateId(st.id().to_owned()));
            }
        }
        for st in &states {
            match st {
                GameState::Absorbing { id, rho } => {
                    if !(-1.0..=1.0).contains(rho) {
                        return Err(GameError::Payoff {
                            state: id.clone(),
                            value: *rho,
                        });
                    }
                }
                GameState::Active { id, payoff, next } => {
                    let shape = |detail: &str| GameError::Shape {
                        state: id.clone(),
                        detail: detail.to_owned(),
                    };
                    let rows = payoff.len();
                    let cols = payoff.first().map_or(0, Vec::len);
                    if rows == 0 || cols == 0 {
                        return Err(shape("empty payoff matrix"));
                    }
                    if payoff.iter().any(|r| r.len() != cols) {
                        return Err(shape("ragged payoff matrix"));
                    }
                    if next.len() != rows || next.iter().any(|r| r.len() != cols) {
                        return Err(shape("transition table does not match payoff shape"));
                    }
                    for row in payoff {
                        if let Some(&bad) = row.iter().find(|a| !(-1.0..=1.0).contains(*a)) {
                            return Err(GameError::Payoff {
                                state: id.clone(),
                                value: bad,
                            });
                        }
                    }
                    for (i, row) in next.iter().enumerate() {
                        for (j, dist) in row.iter().enumerate() {
                            let bad = GameError::Distribution {
                                state: id.clone(),
                                row: i,
                                col: j,
                            };
                            if dist.iter().any(|o| !(o.prob >= 0.0) || o.target >= states.len()) {
                                return Err(bad);
                            }
                            let total: f64 = dist.iter().map(|o| o.prob).sum();
                            if (total - 1.0).abs() > PROB_TOL {
                                return Err(bad);
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[GameState] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &GameState {
        &self.states[s]
    }

    pub fn id(&self, s: usize) -> &str {
        self.states[s].id()
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GameError> {
        self.states
            .iter()
            .position(|st| st.id() == id)
            .ok_or_else(|| GameError::UnknownState(id.to_owned()))
    }

    /// Stage matrix `scale_g * g_ij + scale_c * E[cont]` at an active state.
    fn stage_matrix(&self, s: usize, scale_g: f64, scale_c: f64, cont: &[f64]) -> Vec<Vec<f64>> {
        let GameState::Active { payoff, next, .. } = &self.states[s] else {
            unreachable!("stage matrix of an absorbing state")
        };
        payoff
            .iter()
            .zip(next)
            .map(|(prow, nrow)| {
                prow.iter()
                    .zip(nrow)
                    .map(|(&g, dist)| {
                        let e: f64 = dist.iter().map(|o| o.prob * cont[o.target]).sum();
                        scale_g * g + scale_c * e
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> GameJson {
        GameJson {
            kind: "zsg".to_owned(),
            states: self
                .states
                .iter()
                .map(|st| match st {
                    GameState::Absorbing { id, rho } => GameStateJson {
                        id: id.clone(),
                        absorbing: true,
                        rho: Some(*rho),
                        payoff: None,
                        next: None,
                    },
                    GameState::Active { id, payoff, next } => GameStateJson {
                        id: id.clone(),
                        absorbing: false,
                        rho: None,
                        payoff: Some(payoff.clone()),
                        next: Some(
                            next.iter()
                                .map(|row| {
                                    row.iter()
                                        .map(|dist| {
                                            dist.iter()
                                                .map(|o| OutcomeJson {
                                                    s: self.id(o.target).to_owned(),
                                                    p: o.prob,
                                                })
                                                .collect()
                                        })
                                        .collect()
                                })
                                .collect(),
                        ),
                    },
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("game serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, GameError> {
        let raw: GameJson =
            serde_json::from_str(text).map_err(|e| GameError::Json(e.to_string()))?;
        Self::try_from(raw)
    }

    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.to_json()).expect("game serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

/// On-disk form of a game (`"type": "zsg"`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub states: Vec<GameStateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameStateJson {
    pub id: String,
    pub absorbing: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payoff: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub next: Option<Vec<Vec<Vec<OutcomeJson>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutcomeJson {
    pub s: String,
    pub p: f64,
}

impl TryFrom<GameJson> for StochasticGame {
    type Error = GameError;

    fn try_from(raw: GameJson) -> Result<Self, Self::Error> {
        if raw.kind != "zsg" {
            return Err(GameError::WrongType {
                expected: "zsg",
                found: raw.kind,
            });
        }
        let index: HashMap<String, usize> = raw
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();
        let mut states = Vec::with_capacity(raw.states.len());
        for st in raw.states {
            let missing = |field| GameError::MissingField {
                state: st.id.clone(),
                field,
            };
            if st.absorbing {
                let rho = st.rho.ok_or_else(|| missing("rho"))?;
                states.push(GameState::Absorbing { id: st.id, rho });
                continue;
            }
            let payoff = st.payoff.clone().ok_or_else(|| missing("payoff"))?;
            let raw_next = st.next.clone().ok_or_else(|| missing("next"))?;
            let mut next = Vec::with_capacity(raw_next.len());
            for row in raw_next {
                let mut out_row = Vec::with_capacity(row.len());
                for dist in row {
                    let mut out = Vec::with_capacity(dist.len());
                    for o in dist {
                        let target = *index.get(&o.s).ok_or_else(|| GameError::UnknownTarget {
                            state: st.id.clone(),
                            target: o.s.clone(),
                        })?;
                        out.push(Outcome {
                            target,
                            prob: o.p,
                        });
                    }
                    out_row.push(out);
                }
                next.push(out_row);
            }
            states.push(GameState::Active {
                id: st.id,
                payoff,
                next,
            });
        }
        StochasticGame::new(states)
    }
}

/// `v_n(s)` for `n = 1..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameValueTable {
    horizon: usize,
    /// `values[n][s]`; row 0 is zero.
    values: Vec<Vec<f64>>,
}

impl GameValueTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn value(&self, n: usize, s: usize) -> f64 {
        assert!(n >= 1);
        self.values[n][s]
    }

    pub fn values(&self, n: usize) -> &[f64] {
        &self.values[n]
    }
}

/// Shapley recursion up to `horizon`.
pub fn shapley_finite(game: &StochasticGame, horizon: usize) -> Result<GameValueTable, GameError> {
    assert!(horizon >= 1, "horizon must be positive");
    let k = game.len();
    let mut values = vec![vec![0.0; k]];
    for n in 1..=horizon {
        let prev = &values[n - 1];
        let nf = n as f64;
        let mut row = vec![0.0; k];
        for s in 0..k {
            row[s] = match game.state(s) {
                GameState::Absorbing { rho, .. } => *rho,
                GameState::Active { .. } => {
                    let m = game.stage_matrix(s, 1.0 / nf, (nf - 1.0) / nf, prev);
                    solve_stage(game, s, n, m)?
                }
            };
        }
        values.push(row);
    }
    Ok(GameValueTable { horizon, values })
}

fn solve_stage(
    game: &StochasticGame,
    s: usize,
    horizon: usize,
    m: Vec<Vec<f64>>,
) -> Result<f64, GameError> {
    let wrap = |source| GameError::StageGame {
        horizon,
        state: game.id(s).to_owned(),
        source,
    };
    let mg = MatrixGame::new(m).map_err(wrap)?;
    Ok(solve_matrix_game(&mg).map_err(wrap)?.value)
}

/// Discounted values with convergence data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameDiscountedValues {
    pub lambda: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// One application of the discounted Shapley operator.
pub fn shapley_operator(
    game: &StochasticGame,
    lambda: f64,
    v: &[f64],
) -> Result<Vec<f64>, GameError> {
    (0..game.len())
        .map(|s| match game.state(s) {
            GameState::Absorbing { rho, .. } => Ok(*rho),
            GameState::Active { .. } => {
                let m = game.stage_matrix(s, lambda, 1.0 - lambda, v);
                solve_stage(game, s, 0, m)
            }
        })
        .collect()
}

pub fn shapley_discounted(
    game: &StochasticGame,
    lambda: f64,
    tol: f64,
) -> Result<GameDiscountedValues, GameError> {
    assert!(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0, 1)");
    assert!(tol > 0.0);
    let mut v: Vec<f64> = game
        .states()
        .iter()
        .map(|st| match st {
            GameState::Absorbing { rho, .. } => *rho,
            GameState::Active { .. } => 0.0,
        })
        .collect();
    let mut iterations = 0;
    loop {
        let next = shapley_operator(game, lambda, &v)?;
        let residual = sup_distance(&next, &v);
        if residual <= tol {
            return Ok(GameDiscountedValues {
                lambda,
                values: v,
                iterations,
                residual,
            });
        }
        v = next;
        iterations += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

/// A Markov strategy of one player: a mixed action per stage and state.
/// Absorbing states carry an empty action vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovProfile {
    pub player: Player,
    /// `stages[m][s]` for stage `m + 1`.
    pub stages: Vec<Vec<Vec<f64>>>,
}

impl MarkovProfile {
    /// The same state-dependent mixed action at every stage.
    pub fn stationary(
        game: &StochasticGame,
        player: Player,
        horizon: usize,
        mut action: impl FnMut(usize) -> Vec<f64>,
    ) -> Self {
        let per_state: Vec<Vec<f64>> = (0..game.len())
            .map(|s| {
                if game.state(s).is_absorbing() {
                    Vec::new()
                } else {
                    action(s)
                }
            })
            .collect();
        Self {
            player,
            stages: vec![per_state; horizon],
        }
    }

    /// Stage-dependent profile from `action(stage, state)`, stages from 1.
    pub fn markov(
        game: &StochasticGame,
        player: Player,
        horizon: usize,
        mut action: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Self {
        let stages = (1..=horizon)
            .map(|m| {
                (0..game.len())
                    .map(|s| {
                        if game.state(s).is_absorbing() {
                            Vec::new()
                        } else {
                            action(m, s)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { player, stages }
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    fn action(&self, stage: usize, s: usize) -> &[f64] {
        &self.stages[stage - 1][s]
    }

    pub fn validate(&self, game: &StochasticGame, horizon: usize) -> Result<(), GameError> {
        if self.stages.len() < horizon {
            return Err(GameError::Profile(format!(
                "profile covers {} stages, {horizon} required",
                self.stages.len()
            )));
        }
        for (m, stage) in self.stages.iter().enumerate().take(horizon) {
            if stage.len() != game.len() {
                return Err(GameError::Profile(format!(
                    "stage {} lists {} states, game has {}",
                    m + 1,
                    stage.len(),
                    game.len()
                )));
            }
            for (s, mix) in stage.iter().enumerate() {
                let (rows, cols) = game.state(s).actions();
                let want = match self.player {
                    Player::One => rows,
                    Player::Two => cols,
                };
                if game.state(s).is_absorbing() {
                    continue;
                }
                if mix.len() != want {
                    return Err(GameError::Profile(format!(
                        "stage {}, state `{}`: {} actions given, {want} expected",
                        m + 1,
                        game.id(s),
                        mix.len()
                    )));
                }
                let total: f64 = mix.iter().sum();
                if mix.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > PROB_TOL {
                    return Err(GameError::Profile(format!(
                        "stage {}, state `{}`: not a probability vector",
                        m + 1,
                        game.id(s)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Arithmetic needed to propagate a state distribution, so that profiles
/// can be evaluated in floating point or exactly.
pub trait Scalar: Clone + Zero + Add<Output = Self> + Mul<Output = Self> {
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite input")
    }
}

/// Expected cumulative payoffs and the mass of the propagated distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEvaluation<T> {
    /// `cumulative[k] = E[sum_{m <= k} f_m]`, `cumulative[0] = 0`.
    pub cumulative: Vec<T>,
    /// Total probability mass at each stage `1..=n`.
    pub mass: Vec<T>,
}

/// Exact forward propagation of the state distribution under `(sigma, tau)`.
pub fn eval_profile_in<T: Scalar>(
    game: &StochasticGame,
    sigma: &MarkovProfile,
    tau: &MarkovProfile,
    s: usize,
    horizon: usize,
) -> Result<ProfileEvaluation<T>, GameError> {
    if sigma.player != Player::One || tau.player != Player::Two {
        return Err(GameError::Profile("expected (player 1, player 2) profiles".into()));
    }
    if s >= game.len() {
        return Err(GameError::Profile(format!("start index {s} out of range")));
    }
    sigma.validate(game, horizon)?;
    tau.validate(game, horizon)?;

    let k = game.len();
    let mut dist = vec![T::zero(); k];
    dist[s] = T::from_f64(1.0);
    let mut cumulative = vec![T::zero()];
    let mut mass = Vec::with_capacity(horizon);
    for m in 1..=horizon {
        let mut stage_pay = T::zero();
        let mut next = vec![T::zero(); k];
        let mut total = T::zero();
        for (st, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            total = total + p.clone();
            match game.state(st) {
                GameState::Absorbing { rho, .. } => {
                    stage_pay = stage_pay + p.clone() * T::from_f64(*rho);
                    next[st] = next[st].clone() + p.clone();
                }
                GameState::Active { payoff, next: trans, .. } => {
                    let x = sigma.action(m, st);
                    let y = tau.action(m, st);
                    for (i, &xi) in x.iter().enumerate() {
                        if xi == 0.0 {
                            continue;
                        }
                        for (j, &yj) in y.iter().enumerate() {
                            if yj == 0.0 {
                                continue;
                            }
                            let w = p.clone() * T::from_f64(xi) * T::from_f64(yj);
                            stage_pay = stage_pay + w.clone() * T::from_f64(payoff[i][j]);
                            for o in &trans[i][j] {
                                next[o.target] =
                                    next[o.target].clone() + w.clone() * T::from_f64(o.prob);
                            }
                        }
                    }
                }
            }
        }
        mass.push(total);
        let last = cumulative.last().unwrap().clone();
        cumulative.push(last + stage_pay);
        dist = next;
    }
    Ok(ProfileEvaluation { cumulative, mass })
}

/// Floating-point [`eval_profile_in`]; returns the cumulative expectations.
pub fn eval_profile(
    game: &StochasticGame,
    sigma: &MarkovProfile,
    tau: &MarkovProfile,
    s: usize,
    horizon: usize,
) -> Result<Vec<f64>, GameError> {
    Ok(eval_profile_in::<f64>(game, sigma, tau, s, horizon)?.cumulative)
}

/// Deviation profile of the expected payoff stream.
pub fn expected_deviation_profile(
    game: &StochasticGame,
    sigma: &MarkovProfile,
    tau: &MarkovProfile,
    s: usize,
    horizon: usize,
    reference: f64,
    grid: &[f64],
) -> Result<DeviationProfile, GameError> {
    let cumulative = eval_profile(game, sigma, tau, s, horizon)?;
    let mut p = DeviationProfile::from_cumulative(cumulative, reference, grid);
    p.start = Some(s);
    Ok(p)
}

/// Average payoff of the best reply to a fixed Markov profile over
/// `horizon` stages: player 1's best total against `tau`, or player 2's
/// best (smallest) total against `sigma`, divided by `horizon`.
pub fn best_reply_value(
    game: &StochasticGame,
    fixed: &MarkovProfile,
    s: usize,
    horizon: usize,
) -> Result<f64, GameError> {
    fixed.validate(game, horizon)?;
    let k = game.len();
    let mut cont = vec![0.0; k];
    for m in (1..=horizon).rev() {
        let remaining = (horizon - m) as f64;
        let mut now = vec![0.0; k];
        for (st, slot) in now.iter_mut().enumerate() {
            *slot = match game.state(st) {
                GameState::Absorbing { rho, .. } => (remaining + 1.0) * rho,
                GameState::Active { payoff, next, .. } => {
                    let mix = fixed.action(m, st);
                    let cell = |i: usize, j: usize| {
                        payoff[i][j] + next[i][j].iter().map(|o| o.prob * cont[o.target]).sum::<f64>()
                    };
                    match fixed.player {
                        Player::Two => (0..payoff.len())
                            .map(|i| mix.iter().enumerate().map(|(j, &yj)| yj * cell(i, j)).sum::<f64>())
                            .fold(f64::NEG_INFINITY, f64::max),
                        Player::One => (0..payoff[0].len())
                            .map(|j| mix.iter().enumerate().map(|(i, &xi)| xi * cell(i, j)).sum::<f64>())
                            .fold(f64::INFINITY, f64::min),
                    }
                }
            };
        }
        cont = now;
    }
    Ok(cont[s] / horizon as f64)
}
