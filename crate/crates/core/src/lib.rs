//! Accelerated primal-dual gradient methods for bilinearly coupled
//! saddle-point problems, centralized and over gossip networks.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod apdg;
pub mod complexity;
pub mod decentralized;
pub mod error;
pub mod linalg;
pub mod network;
pub mod problem;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Quadratic = problem::QuadraticFunction<f64>;
pub type Problem = problem::SaddlePointProblem<f64>;
pub type Truth = problem::GroundTruth<f64>;
pub type Spectral = problem::SpectralConstants<f64>;
pub type OracleSpec = problem::StochasticOracleSpec<f64>;

pub type Parameters = apdg::ApdgParameters<f64>;
pub type State = apdg::SolverState<f64>;
pub type Schedule = network::MixingSchedule<f64>;
pub type DecentralizedState = decentralized::DecentralizedState<f64>;
pub type Budget = decentralized::InexactnessBudget<f64>;
