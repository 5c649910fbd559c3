//! Checkers for the constant-average-payoff property.
//!
//! For each tested horizon `n` (or discount `lambda`) and start state `s`,
//! every ε-optimal play is enumerated and its deviation profile compared to
//! the band `[-3ε, 3ε]`. The reported threshold is the smallest tested
//! horizon (largest tested `lambda`) from which every larger horizon
//! (smaller `lambda`) stays in the band; nothing is extrapolated.

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::deviation::{deviation_profile, uniform_grid, Extremes};
use super::discounted::{
    discounted_partial_sums, discounted_stage, discounted_weight, effective_horizon,
    enumerate_discounted_prefixes, extend_greedy, DISCOUNT_SLACK,
};
use super::enumerate::{enumerate_eps_optimal_plays, is_eps_optimal};
use crate::dp::{discounted_value, finite_values, ValueTable};
use crate::model::{DpModel, Play};

/// Rounding allowance when comparing a deviation to `3ε`.
const BAND_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("no horizons or discount factors given")]
    NoScales,
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("discount factor {0} outside (0, 1)")]
    Lambda(f64),
    #[error("grid value {0} outside [0, 1]")]
    Grid(f64),
    #[error("start state index {0} out of range")]
    Start(usize),
    #[error("reference has {got} entries, model has {want} states")]
    Reference { got: usize, want: usize },
    #[error("witness failed re-validation: {0}")]
    Witness(String),
}

/// One tested horizon or discount factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Horizon(usize),
    Discount(f64),
}

impl Scale {
    /// Ordering key: larger means a longer effective duration.
    fn duration_key(&self) -> f64 {
        match *self {
            Scale::Horizon(n) => n as f64,
            Scale::Discount(l) => 1.0 / l,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Scale::Horizon(n) => n as f64,
            Scale::Discount(l) => l,
        }
    }
}

/// Parameters shared by both checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub epsilon: f64,
    /// Report resolution only; the verdict always scans every breakpoint.
    /// Empty means every breakpoint is reported.
    pub grid: Vec<f64>,
    /// Maximum number of plays enumerated per (scale, state).
    pub limit: usize,
    /// Start states; `None` means every state.
    pub starts: Option<Vec<usize>>,
}

impl CheckConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            grid: uniform_grid(20),
            limit: 100_000,
            starts: None,
        }
    }
}

/// Outcome of one (scale, start state) check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub scale: Scale,
    pub state: usize,
    pub state_id: String,
    pub reference: f64,
    pub plays_examined: usize,
    pub limit_reached: bool,
    /// Largest and smallest attained deviations over all examined plays.
    pub extremes: Extremes,
    /// Supremum / infimum including one-sided limits between breakpoints.
    pub envelope_upper: f64,
    pub envelope_lower: f64,
    /// Allowance added before comparing to the band (discounted truncation).
    pub margin: f64,
    pub within_band: bool,
    /// The play with the largest attained deviation.
    pub worst_play: Vec<usize>,
    /// `(t, D(t))` of the worst play on the report grid.
    pub grid_rows: Vec<(f64, f64)>,
    /// The best-paying examined play that leaves the band, if any.
    pub band_exit: Option<BandExit>,
}

/// A play leaving the band, with its payoff and worst deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandExit {
    pub play: Vec<usize>,
    /// Total payoff (finite horizon) or discounted value of the play.
    pub payoff: f64,
    pub t: f64,
    pub deviation: f64,
}

/// Keeps the first play with the highest payoff among those leaving the band.
fn keep_best_exit(slot: &mut Option<BandExit>, play: &Play, payoff: f64, ex: &Extremes) {
    if slot.as_ref().map_or(true, |b| payoff > b.payoff) {
        let (t, deviation) = ex.worst();
        *slot = Some(BandExit {
            play: play.sequence.clone(),
            payoff,
            t,
            deviation,
        });
    }
}

impl CheckEntry {
    fn deviation_magnitude(&self) -> f64 {
        self.extremes.worst_abs()
    }
}

/// A play on which the deviation leaves the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub scale: Scale,
    pub state: usize,
    pub play: Vec<usize>,
    pub play_ids: Vec<String>,
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Every tested scale from `threshold` on stays in the band.
    Holds { threshold: Scale },
    Violated { witness: Witness },
    /// Out of band only once the truncation margin is added.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    #[serde(rename = "P")]
    Average,
    #[serde(rename = "P'")]
    Discounted,
}

/// Per-state empirical threshold; `None` when the longest scale fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateThreshold {
    pub state: usize,
    pub threshold: Option<Scale>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PReport {
    pub property: Property,
    pub epsilon: f64,
    pub band: f64,
    pub scales: Vec<Scale>,
    pub entries: Vec<CheckEntry>,
    pub state_thresholds: Vec<StateThreshold>,
    pub verdict: Verdict,
    pub partial_coverage: bool,
    pub effective_horizon_too_short: bool,
}

impl PReport {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds { .. })
    }

    /// Largest attained `|D|` over every entry.
    pub fn worst_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(CheckEntry::deviation_magnitude)
            .fold(0.0, f64::max)
    }

    /// Largest attained `|D|` at one scale.
    pub fn worst_deviation_at(&self, scale: Scale) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.scale == scale)
            .map(CheckEntry::deviation_magnitude)
            .fold(0.0, f64::max)
    }
}

fn validate_common(
    model: &DpModel,
    config: &CheckConfig,
    reference: &[f64],
) -> Result<Vec<usize>, CheckError> {
    if !(config.epsilon > 0.0) {
        return Err(CheckError::Epsilon(config.epsilon));
    }
    if let Some(&t) = config.grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(CheckError::Grid(t));
    }
    if reference.len() != model.len() {
        return Err(CheckError::Reference {
            got: reference.len(),
            want: model.len(),
        });
    }
    let starts = match &config.starts {
        Some(s) => s.clone(),
        None => (0..model.len()).collect(),
    };
    if let Some(&bad) = starts.iter().find(|&&s| s >= model.len()) {
        return Err(CheckError::Start(bad));
    }
    Ok(starts)
}

/// Checks the finite-horizon property on every start state and horizon.
///
/// `reference[s]` is the limit value `v(s)` the running average is compared to.
pub fn check_property_p(
    model: &DpModel,
    horizons: &[usize],
    config: &CheckConfig,
    reference: &[f64],
) -> Result<PReport, CheckError> {
    let starts = validate_common(model, config, reference)?;
    if horizons.is_empty() {
        return Err(CheckError::NoScales);
    }
    if horizons.contains(&0) {
        return Err(CheckError::ZeroHorizon);
    }
    let table = finite_values(model, *horizons.iter().max().unwrap());
    let tasks: Vec<(usize, usize)> = horizons
        .iter()
        .flat_map(|&n| starts.iter().map(move |&s| (n, s)))
        .collect();
    let entries: Vec<CheckEntry> = tasks
        .par_iter()
        .map(|&(n, s)| check_finite_entry(model, &table, n, s, config, reference[s]))
        .collect();

    let scales: Vec<Scale> = horizons.iter().map(|&n| Scale::Horizon(n)).collect();
    let mut report = assemble(Property::Average, config, scales, &starts, entries, false);
    if let Verdict::Violated { witness } = &report.verdict {
        revalidate_finite(model, &table, config.epsilon, reference, witness)?;
    }
    report.label_witness(model);
    Ok(report)
}

fn check_finite_entry(
    model: &DpModel,
    table: &ValueTable,
    n: usize,
    s: usize,
    config: &CheckConfig,
    reference: f64,
) -> CheckEntry {
    let plays = enumerate_eps_optimal_plays(model, table, s, n, config.epsilon, config.limit);
    let band = 3.0 * config.epsilon;
    let mut best: Option<(Extremes, &Play)> = None;
    let mut band_exit = None;
    let mut env_hi = f64::NEG_INFINITY;
    let mut env_lo = f64::INFINITY;
    for play in &plays.plays {
        let profile = deviation_profile(play, reference, &[]);
        let ex = profile.breakpoint_extremes();
        if ex.worst_abs() > band + BAND_SLACK {
            keep_best_exit(&mut band_exit, play, play.total(), &ex);
        }
        let (hi, lo) = profile.envelope();
        env_hi = env_hi.max(hi);
        env_lo = env_lo.min(lo);
        if best.map_or(true, |(b, _)| ex.worst_abs() > b.worst_abs()) {
            best = Some((ex, play));
        }
    }
    let (extremes, worst) = best.expect("an optimal play always exists");
    let worst_profile = deviation_profile(worst, reference, &config.grid);
    let grid_rows = if config.grid.is_empty() {
        worst_profile.breakpoints().collect()
    } else {
        worst_profile
            .grid
            .iter()
            .copied()
            .zip(worst_profile.deviations.iter().copied())
            .collect()
    };
    CheckEntry {
        scale: Scale::Horizon(n),
        state: s,
        state_id: model.id(s).to_owned(),
        reference,
        plays_examined: plays.plays.len(),
        limit_reached: plays.limit_reached,
        within_band: extremes.worst_abs() <= band + BAND_SLACK,
        extremes,
        envelope_upper: env_hi,
        envelope_lower: env_lo,
        margin: 0.0,
        worst_play: worst.sequence.clone(),
        grid_rows,
        band_exit,
    }
}

fn revalidate_finite(
    model: &DpModel,
    table: &ValueTable,
    eps: f64,
    reference: &[f64],
    w: &Witness,
) -> Result<(), CheckError> {
    let Scale::Horizon(n) = w.scale else {
        return Err(CheckError::Witness("finite witness without horizon".into()));
    };
    let play = Play::new(model, w.play.clone()).map_err(|e| CheckError::Witness(e.to_string()))?;
    if play.len() != n || play.start() != w.state {
        return Err(CheckError::Witness("length or start mismatch".into()));
    }
    if !is_eps_optimal(table, w.state, n, eps, play.total()) {
        return Err(CheckError::Witness("play is not ε-optimal".into()));
    }
    let d = deviation_profile(&play, reference[w.state], &[]).at(w.t);
    if !(d.abs() > 3.0 * eps) || (d - w.deviation).abs() > 1e-12 {
        return Err(CheckError::Witness(format!(
            "deviation {d} at t = {} does not leave the band",
            w.t
        )));
    }
    Ok(())
}

/// Settings specific to the discounted checker.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedCheck {
    pub lambdas: Vec<f64>,
    /// Cap on the enumeration depth; the natural depth is the smallest `p`
    /// with `(1 - lambda)^p <= ε / 10`.
    pub max_depth: usize,
    /// Tolerance for the discounted fixed point.
    pub value_tol: f64,
}

impl DiscountedCheck {
    pub fn new(lambdas: Vec<f64>) -> Self {
        Self {
            lambdas,
            max_depth: 20_000,
            value_tol: 1e-12,
        }
    }
}

/// Checks the discounted property with the time change `n(t; lambda)`.
pub fn check_property_pprime(
    model: &DpModel,
    discounted: &DiscountedCheck,
    config: &CheckConfig,
    reference: &[f64],
) -> Result<PReport, CheckError> {
    let starts = validate_common(model, config, reference)?;
    if discounted.lambdas.is_empty() {
        return Err(CheckError::NoScales);
    }
    if let Some(&l) = discounted.lambdas.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(CheckError::Lambda(l));
    }
    let mut entries = Vec::new();
    let mut too_short = false;
    for &lambda in &discounted.lambdas {
        let values = discounted_value(model, lambda, discounted.value_tol);
        let natural = effective_horizon(lambda, config.epsilon / 10.0);
        let depth = natural.min(discounted.max_depth).max(1);
        let margin = (1.0 - lambda).powi(depth as i32);
        if margin > config.epsilon / 10.0 {
            too_short = true;
        }
        let mut batch: Vec<CheckEntry> = starts
            .par_iter()
            .map(|&s| {
                let (prefixes, truncated) = enumerate_discounted_prefixes(
                    model,
                    &values,
                    s,
                    depth,
                    config.epsilon,
                    config.limit,
                );
                discounted_entry(
                    model, &values, lambda, s, depth, margin, &prefixes, truncated, config,
                    reference[s],
                )
            })
            .collect();
        entries.append(&mut batch);
    }
    let scales = discounted
        .lambdas
        .iter()
        .map(|&l| Scale::Discount(l))
        .collect();
    let mut report = assemble(Property::Discounted, config, scales, &starts, entries, too_short);
    if let Verdict::Violated { witness } = &report.verdict {
        let Scale::Discount(lambda) = witness.scale else {
            unreachable!()
        };
        let values = discounted_value(model, lambda, discounted.value_tol);
        let play = Play::new(model, witness.play.clone())
            .map_err(|e| CheckError::Witness(e.to_string()))?;
        let continued = extend_greedy(model, &values, &play, play.len());
        let value = discounted_deviation(&continued, lambda, 0.0, 1.0, &values, model);
        if value < values.values[witness.state] - config.epsilon - DISCOUNT_SLACK {
            return Err(CheckError::Witness("play is not ε-optimal".into()));
        }
        let d = discounted_deviation(&play, lambda, reference[witness.state], witness.t, &values, model);
        if !(d.abs() > 3.0 * config.epsilon) {
            return Err(CheckError::Witness(format!("deviation {d} inside the band")));
        }
    }
    report.label_witness(model);
    Ok(report)
}

/// `sum_{m <= n(t; lambda)} lambda (1 - lambda)^(m-1) f_m - t v`; at
/// `t = 1` the full discounted value of the optimally continued play.
pub fn discounted_deviation(
    play: &Play,
    lambda: f64,
    reference: f64,
    t: f64,
    values: &crate::dp::DiscountedValues,
    model: &DpModel,
) -> f64 {
    match discounted_stage(t, lambda) {
        Some(p) => {
            let extended = extend_greedy(model, values, play, p.max(1));
            let sums = discounted_partial_sums(&extended.payoffs[..p], lambda);
            sums[p] - t * reference
        }
        None => {
            let sums = discounted_partial_sums(&play.payoffs, lambda);
            let last = *play.sequence.last().unwrap();
            let w = (1.0 - lambda).powi(play.len() as i32 - 1);
            let tail = w * values.values[last] - w * lambda * model.payoff(last);
            sums[play.len()] + tail - reference
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn discounted_entry(
    model: &DpModel,
    values: &crate::dp::DiscountedValues,
    lambda: f64,
    s: usize,
    depth: usize,
    margin: f64,
    prefixes: &[super::discounted::DiscountedPlay],
    truncated: bool,
    config: &CheckConfig,
    reference: f64,
) -> CheckEntry {
    let band = 3.0 * config.epsilon;
    let mut best: Option<(Extremes, &Play)> = None;
    let mut band_exit = None;
    let mut env_hi = f64::NEG_INFINITY;
    let mut env_lo = f64::INFINITY;
    for dp in prefixes {
        let sums = discounted_partial_sums(&dp.prefix.payoffs, lambda);
        let mut ex = Extremes {
            upper: 0.0,
            upper_t: 0.0,
            lower: 0.0,
            lower_t: 0.0,
        };
        let consider = |t: f64, d: f64, ex: &mut Extremes| {
            if d > ex.upper {
                ex.upper = d;
                ex.upper_t = t;
            }
            if d < ex.lower {
                ex.lower = d;
                ex.lower_t = t;
            }
        };
        for p in 1..=depth {
            let t = discounted_weight(p, lambda);
            let d = sums[p] - t * reference;
            consider(t, d, &mut ex);
            // just after the previous breakpoint the partial sum already
            // includes stage p
            let left = sums[p] - discounted_weight(p - 1, lambda) * reference;
            env_hi = env_hi.max(left).max(d);
            env_lo = env_lo.min(left).min(d);
        }
        let full = dp.value - reference;
        consider(1.0, full, &mut ex);
        env_hi = env_hi.max(full);
        env_lo = env_lo.min(full);
        if ex.worst_abs() > band + BAND_SLACK + DISCOUNT_SLACK {
            keep_best_exit(&mut band_exit, &dp.prefix, dp.value, &ex);
        }
        if best.map_or(true, |(b, _)| ex.worst_abs() > b.worst_abs()) {
            best = Some((ex, &dp.prefix));
        }
    }
    let (extremes, worst) = best.expect("an optimal prefix always exists");
    let grid_rows = if config.grid.is_empty() {
        let sums = discounted_partial_sums(&worst.payoffs, lambda);
        (0..=depth)
            .map(|p| {
                let t = discounted_weight(p, lambda);
                (t, sums[p] - t * reference)
            })
            .chain(std::iter::once((
                1.0,
                discounted_deviation(worst, lambda, reference, 1.0, values, model),
            )))
            .collect()
    } else {
        config
            .grid
            .iter()
            .map(|&t| (t, discounted_deviation(worst, lambda, reference, t, values, model)))
            .collect()
    };
    CheckEntry {
        scale: Scale::Discount(lambda),
        state: s,
        state_id: model.id(s).to_owned(),
        reference,
        plays_examined: prefixes.len(),
        limit_reached: truncated,
        within_band: extremes.worst_abs() + margin <= band + BAND_SLACK + DISCOUNT_SLACK,
        extremes,
        envelope_upper: env_hi,
        envelope_lower: env_lo,
        margin,
        worst_play: worst.sequence.clone(),
        grid_rows,
        band_exit,
    }
}

fn assemble(
    property: Property,
    config: &CheckConfig,
    scales: Vec<Scale>,
    starts: &[usize],
    entries: Vec<CheckEntry>,
    effective_horizon_too_short: bool,
) -> PReport {
    let mut order: Vec<Scale> = scales.clone();
    order.sort_by(|a, b| a.duration_key().total_cmp(&b.duration_key()));
    order.dedup();

    let threshold_for = |ok: &dyn Fn(Scale) -> bool| -> Option<Scale> {
        let mut threshold = None;
        for &sc in order.iter().rev() {
            if ok(sc) {
                threshold = Some(sc);
            } else {
                break;
            }
        }
        threshold
    };
    let overall = threshold_for(&|sc| entries.iter().filter(|e| e.scale == sc).all(|e| e.within_band));
    let state_thresholds = starts
        .iter()
        .map(|&s| StateThreshold {
            state: s,
            threshold: threshold_for(&|sc| {
                entries
                    .iter()
                    .filter(|e| e.scale == sc && e.state == s)
                    .all(|e| e.within_band)
            }),
        })
        .collect();

    let verdict = match overall {
        Some(threshold) => Verdict::Holds { threshold },
        None => {
            // longest failing scale; first entry wins ties
            let mut chosen: Option<(&CheckEntry, &BandExit)> = None;
            for e in &entries {
                if let Some(x) = &e.band_exit {
                    if chosen.map_or(true, |(c, _)| e.scale.duration_key() > c.scale.duration_key()) {
                        chosen = Some((e, x));
                    }
                }
            }
            match chosen {
                Some((e, x)) => Verdict::Violated {
                    witness: Witness {
                        scale: e.scale,
                        state: e.state,
                        play: x.play.clone(),
                        play_ids: Vec::new(),
                        t: x.t,
                        deviation: x.deviation,
                    },
                },
                None => Verdict::Inconclusive,
            }
        }
    };
    PReport {
        property,
        epsilon: config.epsilon,
        band: 3.0 * config.epsilon,
        partial_coverage: entries.iter().any(|e| e.limit_reached),
        scales,
        entries,
        state_thresholds,
        verdict,
        effective_horizon_too_short,
    }
}

impl PReport {
    /// Fills in the witness play's state labels. The checkers already do.
    pub fn label_witness(&mut self, model: &DpModel) {
        if let Verdict::Violated { witness } = &mut self.verdict {
            witness.play_ids = witness.play.iter().map(|&s| model.id(s).to_owned()).collect();
        }
    }
}

/// How the slack `e` of the tail bound is chosen at breakpoint `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailSlack {
    /// `e = sup_s |v_n(s) - v(s)|`.
    Horizon,
    /// `e = max(sup_s |v_n - v|, sup_s |v_{n-k} - v|)`.
    Remaining,
}

/// Breakpoints of a 0-optimal play at which the tail bound
/// `sum_{m <= k} f_m + (n - k)(v(s) + e) >= n (v_n(s) - e)` fails, every
/// quantity converted to an exact rational.
///
/// With [`TailSlack::Remaining`] the bound follows from
/// `v_{n-k}(s_{k+1}) <= v(s_{k+1}) + e <= v(s) + e`, so a nonempty result
/// means `limit` does not decrease along the play. With
/// [`TailSlack::Horizon`] it can fail on a regular problem whenever `v_n`
/// hits the limit exactly while `v_{n-k}` does not (a forced cycle at
/// horizons divisible by its length).
pub fn tail_bound_violations(
    table: &ValueTable,
    play: &Play,
    limit: &[BigRational],
    slack: TailSlack,
) -> Vec<usize> {
    let n = play.len();
    let exact = |x: f64| BigRational::from_f64(x).expect("finite value");
    let sup_gap = |h: usize| -> BigRational {
        let mut best = BigRational::from_integer(0.into());
        if h == 0 {
            return best;
        }
        for (s, v) in limit.iter().enumerate() {
            let vh = exact(table.total(h, s)) / BigRational::from_integer((h as i64).into());
            let gap = if vh > *v { &vh - v } else { v - &vh };
            if gap > best {
                best = gap;
            }
        }
        best
    };
    let s = play.start();
    let gap_n = sup_gap(n);
    let n_big = BigRational::from_integer((n as i64).into());
    let vn = exact(table.total(n, s)) / &n_big;
    let mut prefix = BigRational::from_integer(0.into());
    let mut out = Vec::new();
    for k in 0..=n {
        if k > 0 {
            prefix += exact(play.payoffs[k - 1]);
        }
        let e = match slack {
            TailSlack::Horizon => gap_n.clone(),
            TailSlack::Remaining => {
                let gap_tail = sup_gap(n - k);
                if gap_tail > gap_n {
                    gap_tail
                } else {
                    gap_n.clone()
                }
            }
        };
        let rest = BigRational::from_integer(((n - k) as i64).into());
        let lhs = &prefix + rest * (&limit[s] + &e);
        let rhs = &n_big * (&vn - &e);
        if lhs < rhs {
            out.push(k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn two_state() -> DpModel {
        DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])]).unwrap()
    }

    fn waiting_chain(k: usize) -> DpModel {
        // a1..ak pay 0, from ai jump into i ones then a zero sink
        let mut states = Vec::new();
        for i in 1..=k {
            let mut succ = vec![format!("b{i}.1")];
            if i < k {
                succ.insert(0, format!("a{}", i + 1));
            }
            states.push((format!("a{i}"), 0.0, succ));
            for j in 1..=i {
                let next = if j < i { format!("b{i}.{}", j + 1) } else { "z".into() };
                states.push((format!("b{i}.{j}"), 1.0, vec![next]));
            }
        }
        states.push(("z".into(), 0.0, vec!["z".into()]));
        DpModel::from_labels(&states).unwrap()
    }

    #[test]
    fn two_state_holds() {
        let m = two_state();
        let r = check_property_p(&m, &[100, 200], &CheckConfig::new(0.05), &[1.0, 1.0]).unwrap();
        assert_eq!(r.verdict, Verdict::Holds { threshold: Scale::Horizon(100) });
        assert!(r.worst_deviation() <= 0.05 + 1.0 / 100.0 + 1e-12);
        assert!(!r.partial_coverage);
    }

    #[test]
    fn waiting_chain_violates_with_valid_witness() {
        let m = waiting_chain(10);
        let mut reference = vec![0.0; m.len()];
        for s in 0..m.len() {
            if m.id(s).starts_with('a') {
                reference[s] = 0.5;
            }
        }
        let mut cfg = CheckConfig::new(0.05);
        cfg.starts = Some(vec![0]);
        let mut r = check_property_p(&m, &[20], &cfg, &reference).unwrap();
        r.label_witness(&m);
        let Verdict::Violated { witness } = &r.verdict else {
            panic!("expected a violation, got {:?}", r.verdict)
        };
        assert!((witness.deviation + 0.25).abs() < 1e-12);
        assert_eq!(witness.t, 0.5);
        assert_eq!(witness.play_ids[0], "a1");
    }

    #[test]
    fn rejects_bad_config() {
        let m = two_state();
        let r = [1.0, 1.0];
        assert_eq!(
            check_property_p(&m, &[], &CheckConfig::new(0.1), &r).unwrap_err(),
            CheckError::NoScales
        );
        assert_eq!(
            check_property_p(&m, &[3], &CheckConfig::new(0.0), &r).unwrap_err(),
            CheckError::Epsilon(0.0)
        );
        assert!(matches!(
            check_property_p(&m, &[3], &CheckConfig::new(0.1), &[1.0]),
            Err(CheckError::Reference { .. })
        ));
        let d = DiscountedCheck::new(vec![1.5]);
        assert_eq!(
            check_property_pprime(&m, &d, &CheckConfig::new(0.1), &r).unwrap_err(),
            CheckError::Lambda(1.5)
        );
    }

    #[test]
    fn discounted_two_state_holds() {
        let m = two_state();
        let d = DiscountedCheck::new(vec![0.05, 0.02]);
        let r = check_property_pprime(&m, &d, &CheckConfig::new(0.05), &[1.0, 1.0]).unwrap();
        assert!(r.holds(), "{:?}", r.verdict);
        assert!(!r.effective_horizon_too_short);
    }

    #[test]
    fn capped_depth_is_flagged() {
        let m = two_state();
        let mut d = DiscountedCheck::new(vec![0.01]);
        d.max_depth = 10;
        let r = check_property_pprime(&m, &d, &CheckConfig::new(0.05), &[1.0, 1.0]).unwrap();
        assert!(r.effective_horizon_too_short);
    }

    #[test]
    fn tail_bound_on_forced_cycle() {
        let m = DpModel::from_labels(&[
            ("c0", 0.0, vec!["c1"]),
            ("c1", 1.0, vec!["c2"]),
            ("c2", 1.0, vec!["c0"]),
        ])
        .unwrap();
        let table = finite_values(&m, 12);
        let limit = vec![BigRational::new(2.into(), 3.into()); 3];
        let play = Play::new(&m, vec![0, 1, 2, 0, 1, 2, 0, 1, 2]).unwrap();
        // v_9 equals the limit exactly, so the single-horizon slack is zero
        assert_eq!(tail_bound_violations(&table, &play, &limit, TailSlack::Horizon), vec![1, 2, 4, 5, 7, 8]);
        assert!(tail_bound_violations(&table, &play, &limit, TailSlack::Remaining).is_empty());
        let play = Play::new(&m, vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0]).unwrap();
        assert!(tail_bound_violations(&table, &play, &limit, TailSlack::Horizon).is_empty());
        assert!(!limit[0].is_zero());
    }
}
