//! Exact prime-exponent simulation of multiplicative perturbed random walks
//! `Π_k = ξ_1⋯ξ_k`, `Θ_k = Π_{k-1}η_k`, and Monte Carlo checks of the limit
//! laws of their prime counts and of `log LCM(Θ_1, …, Θ_n)`.

// `!(x > 0.0)` comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod dist;
pub mod error;
pub mod extreme;
pub mod lab;
pub mod rng;
pub mod special;
pub mod stats;
pub mod walk;

pub use arith::{factorize_into, gcd_of, is_prime, lcm_of, sieve_primes, PrimeExponentVector};
pub use dist::{JointLawSpec, JointStepLaw, JointTable, LawSpec, StepLaw, StepValue};
pub use error::{Error, Result};
pub use extreme::{frechet_cdf, simulate_extreme, ExtremeProcessSample};
pub use lab::{ExperimentConfig, ExperimentReport, Status, Theorem};
pub use stats::{ks_one_sample, ks_two_sample, KsResult};
pub use walk::{run_trajectory, Snapshot, Trajectory, WalkState};
