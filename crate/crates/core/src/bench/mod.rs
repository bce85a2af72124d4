//! Simulation studies: the bivariate Gaussian example, the uniform example
//! with a missing-at-random mechanism, their estimators and oracles, and
//! the experiment runners built on them.

mod estimators;
mod experiments;
mod generators;
mod oracle;
pub mod stratified;

pub use estimators::{quantile_est, slope_est};
pub use experiments::{
    run_coverage_bench, run_gaussian_bench, run_quantile_bench, CoverageBenchConfig, EstimateRow, EstimateSummary,
    EstimateTable, GaussianBench, GaussianBenchConfig, QuantileBenchConfig, COMPLETE_CASE, FULL_DATA,
};
pub use generators::{
    gen_gaussian_example, gen_uniform_example, GaussianExampleConfig, Propensity, Simulated, UniformExampleConfig,
};
pub use oracle::{complete_case_oracle, OracleEstimate};
