//! Parametric example models with their known reference values.
//!
//! | name            | kind | parameters | limit                    |
//! |-----------------|------|------------|--------------------------|
//! | `ls-nonregular` | dp   | `K >= 2`   | 1/2 on the `a` chain     |
//! | `big-match`     | game | none       | 1/2                      |
//! | `gamma`         | game | `n_max`    | 0 at the root            |
//! | `two-state`     | dp   | none       | 1                        |
//! | `all-absorbing` | dp   | none       | payoff                   |
//! | `three-cycle`   | dp   | none       | 2/3                      |
//! | `two-cycles`    | dp   | none       | 2/3 (hub), 1/2, 2/3      |

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cycle::max_mean_cycle_values;
use crate::dp::finite_values;
use crate::model::{DpModel, ModelError, StateRecord};
use crate::stochastic::{
    shapley_finite, GameError, GameState, MarkovProfile, Outcome, Player, StochasticGame,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("unknown corpus entry `{0}`")]
    UnknownName(String),
    #[error("parameter `{name}`: {detail}")]
    Param { name: String, detail: String },
    #[error("reference check failed for `{entry}`: {detail}")]
    Reference { entry: String, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusModel {
    Dp(DpModel),
    Game(StochasticGame),
}

impl CorpusModel {
    pub fn to_json_string(&self) -> String {
        match self {
            CorpusModel::Dp(m) => m.to_json_string(),
            CorpusModel::Game(g) => g.to_json_string(),
        }
    }

    pub fn content_hash(&self) -> String {
        match self {
            CorpusModel::Dp(m) => m.content_hash(),
            CorpusModel::Game(g) => g.content_hash(),
        }
    }
}

/// Verdict the finite-horizon checker is expected to reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpectedVerdict {
    Holds,
    Violated,
}

/// A known exact `v_n(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpotValue {
    pub state: usize,
    pub horizon: usize,
    pub value: Rational64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub params: BTreeMap<String, i64>,
    pub model: CorpusModel,
    /// Exact `lim v_n(s)` per state, when known.
    pub limit: Option<Vec<Rational64>>,
    pub spot_values: Vec<SpotValue>,
    /// States the checkers start from by default.
    pub default_starts: Vec<usize>,
    pub expected_p: Option<ExpectedVerdict>,
}

impl CorpusEntry {
    pub fn dp(&self) -> Option<&DpModel> {
        match &self.model {
            CorpusModel::Dp(m) => Some(m),
            CorpusModel::Game(_) => None,
        }
    }

    pub fn game(&self) -> Option<&StochasticGame> {
        match &self.model {
            CorpusModel::Game(g) => Some(g),
            CorpusModel::Dp(_) => None,
        }
    }

    pub fn limit_f64(&self) -> Option<Vec<f64>> {
        self.limit
            .as_ref()
            .map(|v| v.iter().map(|r| r.to_f64().unwrap()).collect())
    }

    /// Re-derives the spot values (and limits of deterministic models) with
    /// the solvers.
    pub fn verify(&self) -> Result<(), CorpusError> {
        let fail = |detail: String| CorpusError::Reference {
            entry: self.name.clone(),
            detail,
        };
        let max_h = self.spot_values.iter().map(|sv| sv.horizon).max().unwrap_or(0);
        match &self.model {
            CorpusModel::Dp(m) => {
                if max_h > 0 {
                    let table = finite_values(m, max_h);
                    for sv in &self.spot_values {
                        let want = sv.value.to_f64().unwrap();
                        let got = table.value(sv.horizon, sv.state);
                        if (got - want).abs() > 1e-12 {
                            return Err(fail(format!(
                                "v_{}({}) = {got}, expected {want}",
                                sv.horizon,
                                m.id(sv.state)
                            )));
                        }
                    }
                }
            }
            CorpusModel::Game(g) => {
                if max_h > 0 {
                    let table = shapley_finite(g, max_h)?;
                    for sv in &self.spot_values {
                        let want = sv.value.to_f64().unwrap();
                        let got = table.value(sv.horizon, sv.state);
                        if (got - want).abs() > 1e-9 {
                            return Err(fail(format!(
                                "v_{}({}) = {got}, expected {want}",
                                sv.horizon,
                                g.id(sv.state)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn dp_states(states: Vec<(String, f64, Vec<String>)>) -> Result<DpModel, ModelError> {
    DpModel::from_labels(&states)
}

/// Threshold below which constructors re-run the solvers on themselves.
const SELF_CHECK_SIZE: i64 = 8;

/// A deterministic problem whose `2n`-stage optimum waits `n` stages at
/// payoff 0 and then collects `n` stages at payoff 1.
///
/// States `a1..aK` pay 0; from `ak` the play either moves on to `a(k+1)` or
/// enters a chain `bk.1 .. bk.k` of payoff-1 states that ends in a payoff-0
/// sink. `aK` can only enter its chain.
pub fn ls_nonregular(k: usize) -> Result<CorpusEntry, CorpusError> {
    if k < 2 {
        return Err(CorpusError::Param {
            name: "K".into(),
            detail: format!("must be at least 2, got {k}"),
        });
    }
    let a = |i: usize| format!("a{i}");
    let b = |i: usize, j: usize| format!("b{i}.{j}");
    let mut states = Vec::new();
    for i in 1..=k {
        let mut succ = Vec::new();
        if i < k {
            succ.push(a(i + 1));
        }
        succ.push(b(i, 1));
        states.push((a(i), 0.0, succ));
    }
    for i in 1..=k {
        for j in 1..=i {
            let next = if j < i { b(i, j + 1) } else { "sink".to_owned() };
            states.push((b(i, j), 1.0, vec![next]));
        }
    }
    states.push(("sink".to_owned(), 0.0, vec!["sink".to_owned()]));
    let model = dp_states(states)?;

    let mut limit = vec![Rational64::zero(); model.len()];
    for v in limit.iter_mut().take(k) {
        *v = rat(1, 2);
    }
    // best jump after k' zeros pays min(k', h - k') ones, k' <= K
    let spot_values = (1..=2 * k)
        .map(|h| SpotValue {
            state: 0,
            horizon: h,
            value: rat((h / 2) as i64, h as i64),
        })
        .collect();
    let entry = CorpusEntry {
        name: "ls-nonregular".into(),
        params: BTreeMap::from([("K".to_owned(), k as i64)]),
        model: CorpusModel::Dp(model),
        limit: Some(limit),
        spot_values,
        default_starts: vec![0],
        expected_p: Some(ExpectedVerdict::Violated),
    };
    if (k as i64) <= SELF_CHECK_SIZE {
        entry.verify()?;
    }
    Ok(entry)
}

fn absorbing(id: &str, rho: f64) -> GameState {
    GameState::Absorbing {
        id: id.to_owned(),
        rho,
    }
}

fn to(target: usize) -> Vec<Outcome> {
    vec![Outcome { target, prob: 1.0 }]
}

/// The Big Match: row `a` absorbs (payoff 1 against `alpha`, 0 against
/// `beta`), row `b` pays 0 / 1 and stays.
pub fn big_match() -> Result<CorpusEntry, CorpusError> {
    let game = StochasticGame::new(vec![
        GameState::Active {
            id: "play".into(),
            payoff: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            next: vec![vec![to(1), to(2)], vec![to(0), to(0)]],
        },
        absorbing("win", 1.0),
        absorbing("lose", 0.0),
    ])?;
    let spot_values = (1..=20)
        .map(|h| SpotValue {
            state: 0,
            horizon: h,
            value: rat(1, 2),
        })
        .collect();
    let entry = CorpusEntry {
        name: "big-match".into(),
        params: BTreeMap::new(),
        model: CorpusModel::Game(game),
        limit: Some(vec![rat(1, 2), rat(1, 1), rat(0, 1)]),
        spot_values,
        default_starts: vec![0],
        expected_p: None,
    };
    entry.verify()?;
    Ok(entry)
}

/// Player 2 mixing (1/2, 1/2) at every stage.
pub fn big_match_half_column(game: &StochasticGame, horizon: usize) -> MarkovProfile {
    MarkovProfile::stationary(game, Player::Two, horizon, |_| vec![0.5, 0.5])
}

/// Absorbing payoff `x_{2n,m} = -(m-1) / (2n-(m-1))`, exactly.
pub fn gamma_absorbing_payoff(n: usize, m: usize) -> Rational64 {
    let done = m as i64 - 1;
    rat(-done, 2 * n as i64 - done)
}

/// State index of `(2n, m)` in [`gamma_game`]'s layout.
pub fn gamma_stage_index(n: usize, m: usize) -> usize {
    // root, then for every n' < n: n' stage states and n' absorbing states
    1 + (n - 1) * n + (m - 1)
}

/// Index of the absorbing state entered by stopping at `(2n, m)`.
pub fn gamma_absorbing_index(n: usize, m: usize) -> usize {
    gamma_stage_index(n, 1) + n + (m - 1)
}

/// Root state index of [`gamma_game`].
pub const GAMMA_ROOT: usize = 0;

/// The game in which player 1 first picks a subgame `2n` (`n <= n_max`)
/// at payoff 0; in subgame `2n` stage `(2n, m)` pays 1 and moves on when
/// both play `C`, and otherwise absorbs at `x_{2n,m}`. Cooperation at
/// `(2n, n)` leads to a state paying `-1` forever, so every `2n`-stage path
/// inside the subgame totals 0.
pub fn gamma_game(n_max: usize) -> Result<CorpusEntry, CorpusError> {
    if n_max < 1 {
        return Err(CorpusError::Param {
            name: "n_max".into(),
            detail: "must be at least 1".into(),
        });
    }
    let minus_one = gamma_absorbing_index(n_max, n_max) + 1;
    let mut states = Vec::new();
    states.push(GameState::Active {
        id: "s".into(),
        payoff: vec![vec![0.0]; n_max],
        next: (1..=n_max).map(|n| vec![to(gamma_stage_index(n, 1))]).collect(),
    });
    for n in 1..=n_max {
        for m in 1..=n {
            let x = gamma_absorbing_payoff(n, m);
            let identity = Rational64::from_integer(m as i64 - 1)
                + Rational64::from_integer(2 * n as i64 - (m as i64 - 1)) * x;
            if !identity.is_zero() {
                return Err(CorpusError::Reference {
                    entry: "gamma".into(),
                    detail: format!("path identity fails at ({}, {m})", 2 * n),
                });
            }
            let x = x.to_f64().unwrap();
            let stop = gamma_absorbing_index(n, m);
            let go = if m < n { gamma_stage_index(n, m + 1) } else { minus_one };
            states.push(GameState::Active {
                id: format!("({},{m})", 2 * n),
                payoff: vec![vec![1.0, x], vec![x, x]],
                next: vec![vec![to(go), to(stop)], vec![to(stop), to(stop)]],
            });
        }
        for m in 1..=n {
            let x = gamma_absorbing_payoff(n, m).to_f64().unwrap();
            states.push(absorbing(&format!("x({},{m})", 2 * n), x));
        }
    }
    states.push(absorbing("minus-one", -1.0));
    let game = StochasticGame::new(states)?;
    debug_assert_eq!(game.len(), minus_one + 1);

    let spot_values = (1..=2 * n_max + 1)
        .map(|h| SpotValue {
            state: GAMMA_ROOT,
            horizon: h,
            value: rat(0, 1),
        })
        .collect();
    let entry = CorpusEntry {
        name: "gamma".into(),
        params: BTreeMap::from([("n_max".to_owned(), n_max as i64)]),
        model: CorpusModel::Game(game),
        limit: None,
        spot_values,
        default_starts: vec![GAMMA_ROOT],
        expected_p: None,
    };
    if (n_max as i64) <= SELF_CHECK_SIZE / 2 {
        entry.verify()?;
    }
    Ok(entry)
}

/// Profiles in which player 1 enters subgame `2n` and both players then
/// cooperate; player 2 stops immediately in every other subgame.
///
/// In the `(2n + 1)`-stage game this pair is optimal for both players yet
/// yields `n` ones followed by `n` times `-1`.
pub fn gamma_cooperate_profiles(
    entry: &CorpusEntry,
    n: usize,
    horizon: usize,
) -> Result<(MarkovProfile, MarkovProfile), CorpusError> {
    let game = entry.game().ok_or_else(|| CorpusError::Param {
        name: "entry".into(),
        detail: "not a game".into(),
    })?;
    let n_max = *entry.params.get("n_max").unwrap_or(&0) as usize;
    if n == 0 || n > n_max {
        return Err(CorpusError::Param {
            name: "n".into(),
            detail: format!("subgame index must lie in 1..={n_max}"),
        });
    }
    let lo = gamma_stage_index(n, 1);
    let in_chosen = |s: usize| (lo..lo + n).contains(&s);
    let sigma = MarkovProfile::stationary(game, Player::One, horizon, |s| {
        if s == GAMMA_ROOT {
            let mut pick = vec![0.0; n_max];
            pick[n - 1] = 1.0;
            pick
        } else {
            vec![1.0, 0.0]
        }
    });
    let tau = MarkovProfile::stationary(game, Player::Two, horizon, |s| {
        if s == GAMMA_ROOT {
            vec![1.0]
        } else if in_chosen(s) {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        }
    });
    Ok((sigma, tau))
}

fn limit_from_cycles(model: &DpModel, exact: Vec<Rational64>, name: &str) -> Result<Vec<Rational64>, CorpusError> {
    let oracle = max_mean_cycle_values(model);
    for (s, (r, o)) in exact.iter().zip(&oracle).enumerate() {
        if (r.to_f64().unwrap() - o).abs() > 1e-12 {
            return Err(CorpusError::Reference {
                entry: name.to_owned(),
                detail: format!("limit at {} is {o}, expected {r}", model.id(s)),
            });
        }
    }
    Ok(exact)
}

fn regular(name: &str, model: DpModel, limit: Vec<Rational64>) -> Result<CorpusEntry, CorpusError> {
    let limit = limit_from_cycles(&model, limit, name)?;
    let starts = (0..model.len()).collect();
    Ok(CorpusEntry {
        name: name.to_owned(),
        params: BTreeMap::new(),
        model: CorpusModel::Dp(model),
        limit: Some(limit),
        spot_values: Vec::new(),
        default_starts: starts,
        expected_p: Some(ExpectedVerdict::Holds),
    })
}

/// `s0` (payoff 0) may wait or move to the payoff-1 trap `s1`.
pub fn two_state() -> Result<CorpusEntry, CorpusError> {
    let model = DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])?;
    let mut e = regular("two-state", model, vec![rat(1, 1), rat(1, 1)])?;
    e.spot_values = vec![
        SpotValue { state: 0, horizon: 1, value: rat(0, 1) },
        SpotValue { state: 0, horizon: 2, value: rat(1, 2) },
        SpotValue { state: 0, horizon: 3, value: rat(2, 3) },
    ];
    e.verify()?;
    Ok(e)
}

/// Self-loops with payoffs 0, 1/4, 1/2, 3/4, 1.
pub fn all_absorbing() -> Result<CorpusEntry, CorpusError> {
    let payoffs = [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)];
    let states = payoffs
        .iter()
        .enumerate()
        .map(|(i, p)| StateRecord {
            id: format!("z{i}"),
            payoff: p.to_f64().unwrap(),
            successors: vec![i],
        })
        .collect();
    let model = DpModel::new(states)?;
    regular("all-absorbing", model, payoffs.to_vec())
}

/// A forced cycle paying 0, 1, 1.
pub fn three_cycle() -> Result<CorpusEntry, CorpusError> {
    let model = DpModel::from_labels(&[
        ("c0", 0.0, vec!["c1"]),
        ("c1", 1.0, vec!["c2"]),
        ("c2", 1.0, vec!["c0"]),
    ])?;
    regular("three-cycle", model, vec![rat(2, 3); 3])
}

/// A payoff-0 hub choosing once between a 2-cycle of mean 1/2 and a
/// 3-cycle of mean 2/3.
pub fn two_cycles() -> Result<CorpusEntry, CorpusError> {
    let model = DpModel::from_labels(&[
        ("hub", 0.0, vec!["p0", "c0"]),
        ("p0", 1.0, vec!["p1"]),
        ("p1", 0.0, vec!["p0"]),
        ("c0", 0.0, vec!["c1"]),
        ("c1", 1.0, vec!["c2"]),
        ("c2", 1.0, vec!["c0"]),
    ])?;
    regular(
        "two-cycles",
        model,
        vec![rat(2, 3), rat(1, 2), rat(1, 2), rat(2, 3), rat(2, 3), rat(2, 3)],
    )
}

/// Positive controls on which the checkers must report that the property holds.
pub fn simple_regulars() -> Result<Vec<CorpusEntry>, CorpusError> {
    Ok(vec![two_state()?, all_absorbing()?, three_cycle()?, two_cycles()?])
}

/// `(name, parameters with defaults, description)` of every entry.
pub fn catalog() -> Vec<(&'static str, Vec<(&'static str, i64)>, &'static str)> {
    vec![
        ("ls-nonregular", vec![("K", 50)], "optimal play waits n stages at 0 then collects n stages at 1"),
        ("big-match", vec![], "absorbing 2x2 game with value 1/2"),
        ("gamma", vec![("n_max", 10)], "subgames whose optimal play pays n ones then n minus ones"),
        ("two-state", vec![], "wait at 0 or move to a payoff-1 trap"),
        ("all-absorbing", vec![], "self-loops with payoffs 0, 1/4, 1/2, 3/4, 1"),
        ("three-cycle", vec![], "forced cycle paying 0, 1, 1"),
        ("two-cycles", vec![], "one-time choice between cycles of mean 1/2 and 2/3"),
    ]
}

/// Builds an entry by name; missing parameters take their catalog default.
pub fn by_name(name: &str, params: &BTreeMap<String, i64>) -> Result<CorpusEntry, CorpusError> {
    let (_, defaults, _) = catalog()
        .into_iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| CorpusError::UnknownName(name.to_owned()))?;
    for key in params.keys() {
        if !defaults.iter().any(|(d, _)| d == key) {
            return Err(CorpusError::Param {
                name: key.clone(),
                detail: format!("not a parameter of `{name}`"),
            });
        }
    }
    let get = |key: &str| -> Result<usize, CorpusError> {
        let default = defaults.iter().find(|(d, _)| *d == key).unwrap().1;
        let v = *params.get(key).unwrap_or(&default);
        usize::try_from(v).map_err(|_| CorpusError::Param {
            name: key.to_owned(),
            detail: format!("must be nonnegative, got {v}"),
        })
    };
    match name {
        "ls-nonregular" => ls_nonregular(get("K")?),
        "big-match" => big_match(),
        "gamma" => gamma_game(get("n_max")?),
        "two-state" => two_state(),
        "all-absorbing" => all_absorbing(),
        "three-cycle" => three_cycle(),
        "two-cycles" => two_cycles(),
        _ => unreachable!("catalog and constructors agree"),
    }
}
