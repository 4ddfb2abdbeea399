// `1/Σ∞` is uniform on (0, 1) for a benchmarked price started at 1.

use htlab::numerics::{ks_critical_1pct, ks_statistic};
use htlab::sde::{par_paths, BesselStream, GbmStream, MmmParams, MmmStream, RunningStats, StreamingModel};

pub fn run() -> htlab::Result<()> {
    let n = 4000;
    let models: [(&str, Box<dyn StreamingModel>); 3] = [
        ("gbm sigma=0.2", Box::new(GbmStream::new(0.2, 1e-3)?.with_gap_steps())),
        (
            "bessel delta=4",
            Box::new(BesselStream::new(4.0, 1.0, 2e-4)?.with_gap_steps()),
        ),
        (
            "mmm",
            Box::new(MmmStream::new(MmmParams::default(), 2e-4, 0.05)?.with_gap_steps()),
        ),
    ];
    for (label, model) in &models {
        let u: Vec<f64> = par_paths(n, 1, 0, |_, rng| {
            let mut s = RunningStats::new(Some(0.01), Vec::new());
            model.run(1e5, rng, &mut s);
            1.0 / s.sigma
        });
        let d = ks_statistic(&u, |x| x.clamp(0.0, 1.0))?;
        println!("{label:<16} KS = {d:.4} (1% critical {:.4})", ks_critical_1pct(n));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
