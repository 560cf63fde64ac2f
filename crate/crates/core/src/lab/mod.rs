//! Monte Carlo experiments checking the finite-dimensional limit laws of the
//! walk statistics against analytic and simulated oracles.

mod config;
mod engine;
mod experiments;
mod report;

pub use config::{ExperimentConfig, OracleOptions, Theorem, Tolerances, MIN_REPLICAS};
pub use engine::{oracle_floor, simulate, simulate_oracle, OracleSet, ReplicaSet, ORACLE_EMPTY_PROB};
pub use experiments::{
    run_battery, run_experiment, run_iid_lcm_corollary, run_logpi_clt, run_main1, run_main11, run_main2,
    run_main21, run_mclt_s, run_mclt_t, RegularVariation, CONDITION_GRID,
};
pub use report::{
    CheckResult, CovarianceResult, ExperimentReport, HypothesisCheck, MarginalResult, PlotRow, RawSeries,
    Status,
};
