// Price and delta hedge of the put on the global maximum under GBM, with
// the tracking error shrinking as rebalancing gets finer.

use htlab::hedging::{hedge_backtest, put_on_max_value};
use htlab::sde::{par_paths, BenchmarkedPath, TimeGrid};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn run() -> htlab::Result<()> {
    let (k, sigma) = (2.5, 0.2);
    println!("V_0 = {:.10} = (K - 1) - ln K", put_on_max_value(k, 1.0, 1.0)?);
    let fine = TimeGrid::uniform(40.0, 5e-3)?;
    let paths: Vec<Vec<f64>> = par_paths(400, 2, 0, |_, rng| {
        let mut log_n = 0.0;
        let mut n = vec![1.0];
        for i in 0..fine.steps() {
            let z: f64 = rng.sample(StandardNormal);
            log_n += 2.0 * sigma * fine.dt(i).sqrt() * z - 2.0 * sigma * sigma * fine.dt(i);
            n.push(f64::exp(log_n));
        }
        n
    });
    for every in [8, 4, 2, 1] {
        let grid = fine.coarsen(every)?;
        let mut sq = 0.0;
        for n in &paths {
            let path = BenchmarkedPath::from_values(fine.clone(), n.clone())?;
            let e = hedge_backtest(k, &path, &grid)?.terminal_tracking_error();
            sq += e * e;
        }
        println!(
            "rebalance dt = {:.3}: RMS tracking error {:.3e}",
            5e-3 * every as f64,
            (sq / paths.len() as f64).sqrt()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
