//! Optimal and near-optimal trajectories and the payoff profile along them.

pub mod deviation;
pub mod discounted;
pub mod enumerate;
pub mod probe;
pub mod property;

pub use deviation::{deviation_profile, stage_index, uniform_grid, DeviationProfile, Extremes};
pub use discounted::{discounted_stage, effective_horizon};
pub use enumerate::{
    enumerate_eps_optimal_plays, is_eps_optimal, optimal_play, Enumeration, EpsOptimalPlays,
};
pub use probe::{uniform_value_probe, UniformProbe};
pub use property::{
    check_property_p, check_property_pprime, tail_bound_violations, CheckConfig, TailSlack, CheckEntry,
    CheckError, DiscountedCheck, PReport, Property, Scale, Verdict, Witness,
};
