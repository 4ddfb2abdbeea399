// Benchmarked savings account under the minimal market model: running
// maximum, Azéma process and the protective put on the maximum.

use htlab::hedging::protected_portfolio;
use htlab::numerics::RngStream;
use htlab::path_stats::extract_honest_time;
use htlab::sde::{simulate_mmm_path, MmmParams, TimeGrid};

pub fn run() -> htlab::Result<()> {
    let params = MmmParams::default();
    let grid = TimeGrid::uniform(100.0, 0.01)?;
    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>8} {:>10}",
        "path", "N_T", "Sigma_T", "Z_T", "g_hat", "min U"
    );
    for i in 0..5 {
        let path = simulate_mmm_path(&params, &grid, &mut RngStream::new(3, i).rng())?;
        let last = grid.len() - 1;
        let g = extract_honest_time(grid.times(), &path.n, &path.sigma, 0.01)
            .map(|h| format!("{:.2}", h.time))
            .unwrap_or_else(|_| "-".into());
        let u = protected_portfolio(&path, 2.5)?;
        println!(
            "{i:>4} {:>10.4} {:>10.4} {:>10.4} {g:>8} {:>10.4}",
            path.n[last], path.sigma[last], path.z[last], u.min_u
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
