//! Finite-horizon and discounted dynamic programming, the trajectories of
//! ε-optimal plays, and zero-sum stochastic games with absorbing states.
//!
//! Most entry points take a [`DpModel`] or a [`StochasticGame`] built in
//! code, loaded from JSON, or taken from [`corpus`].

pub mod cli;
pub mod corpus;
pub mod cycle;
pub mod dp;
pub mod matrix;
pub mod model;
pub mod report;
pub mod stochastic;
pub mod trajectory;

pub use dp::{discounted_value, finite_values, DiscountedValues, ValueTable};
pub use matrix::{solve_matrix_game, GameSolution, MatrixGame};
pub use model::{DpModel, Play};
pub use stochastic::{shapley_discounted, shapley_finite, StochasticGame};
