//! Risk-adaptive affine decision rules for parameterized binary search
//! problems.
//!
//! The crate trains rules `y = H(B xi + b)` for a moving-target search model
//! from exact per-point solves and L1-minimal separations, evaluates them with
//! expectation, worst-case, quantile or superquantile risk, and certifies
//! them with Lipschitz-based lower bounds and suboptimality bounds.

pub mod bounds;
pub mod datagen;
pub mod error;
pub mod lpformat;
pub mod probspace;
pub mod rng;
pub mod rules;
pub mod search;
pub mod simplex;
pub mod solver;
pub mod train;

pub use error::{Error, Result};
pub use probspace::{evaluate_risk, DiscreteRv, FiniteProbSpace, RiskSpec};
pub use rules::{heaviside, AffineRule, ConstantRule, MarginSpec, TabularRule};
pub use search::{Grid, Parameterization, ProblemKind, SearchInstance, SearchPath};
pub use solver::{brute_force, solve_exact, SolveResult, SolveStatus};
pub use train::{decompose, DecompResult, TrainingConfig};

