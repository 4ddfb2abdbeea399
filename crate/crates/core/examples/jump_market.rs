// A two-asset jump-diffusion market: accounts, growth optimal portfolio and
// the benchmarked savings account.

use htlab::numerics::RngStream;
use htlab::sde::{benchmark, evolve_portfolio, gop_exposures, MarketConfig, PathBundle, Strategy, TimeGrid};
use nalgebra::DMatrix;

pub fn run() -> htlab::Result<()> {
    // one Wiener driver and one jump driver with intensity 0.5
    let b = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.05, -0.3]);
    let market = MarketConfig::constant(1, 2, 0.03, vec![0.09, 0.02], b, vec![0.5], vec![1.0, 1.0, 1.0])?;
    let c = market.coefficients(0.0, &market.x0)?;
    let pi = gop_exposures(market.m, &c);
    println!("GOP exposures to the drivers: {:.4?}", pi.as_slice());

    let grid = TimeGrid::uniform(10.0, 1e-3)?;
    let mut rng = RngStream::new(7, 0).rng();
    let bundle = PathBundle::simulate(&market, &grid, &mut rng)?;
    let jumps = bundle.jumps[0].last().copied().unwrap_or(0);
    println!("jumps on [0, 10]: {jumps}");
    println!("GOP at T: {:.4}", bundle.gop.last().unwrap());

    let savings = benchmark(&grid, &bundle.accounts[0], &bundle.gop)?;
    let last = grid.len() - 1;
    println!(
        "benchmarked savings account: N_T = {:.4}, Sigma_T = {:.4}, Z_T = {:.4}",
        savings.n[last], savings.sigma[last], savings.z[last]
    );

    // a self-financing portfolio holding only the first stock
    let stock = evolve_portfolio(&market, &bundle.drivers, &Strategy::single(2, 1), 1.0)?;
    let gop = evolve_portfolio(&market, &bundle.drivers, &Strategy::gop_replicating(&market), 1.0)?;
    println!(
        "stock-only portfolio at T: {:.4}, replicated GOP at T: {:.4}",
        stock[last], gop[last]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
