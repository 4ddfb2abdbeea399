//! Jump-diffusion market simulation: drivers, primary accounts, the growth
//! optimal portfolio, self-financing portfolios and benchmarked paths, plus
//! streaming path generators for the long Monte Carlo runs.

mod engine;
mod grid;
mod market;
pub mod models;
mod pricing;

pub use engine::{evolve_portfolio, simulate_accounts, simulate_drivers, simulate_gop, Drivers, PathBundle, Strategy};
pub use grid::TimeGrid;
pub use market::{
    gop_exposures, market_prices_of_risk, validate_config, Coefficients, MarketConfig, MatrixFn, ProbePoint, RateFn,
    ValidationReport, VectorFn,
};
pub use models::{
    besq_on_grid, gap_variance, par_paths, BesselStream, Control, CrossingSink, GbmStream, MmmStream, PathSink,
    Recorder, RunningStats, Snapshot, StreamingModel,
};
pub use pricing::{
    benchmark, real_world_price, simulate_mmm_benchmarked, simulate_mmm_path, BenchmarkedPath, MmmParams, Price,
};
