// Law of the last time a GBM benchmarked price sits at its maximum: closed
// form, hitting-time chain, exact sampler and Talbot inversion.

use htlab::laws::{
    empirical_laplace, gbm_hitting_laplace, gbm_laplace, honest_time_cdf, law_via_hitting, sample_gbm_honest_times,
    GbmParams, LawModel,
};
use htlab::numerics::{ks_critical_1pct, ks_statistic};

pub fn run() -> htlab::Result<()> {
    let p = GbmParams::new(0.2)?;
    let samples = sample_gbm_honest_times(&p, 20_000, 5);
    println!("{:>6} {:>12} {:>12} {:>18}", "lambda", "closed", "chain", "sampler");
    for lambda in [0.02, 0.06, 0.16] {
        let closed = gbm_laplace(&p, lambda)?;
        let chain = law_via_hitting(|a, l| gbm_hitting_laplace(&p, a, l), lambda)?;
        let e = empirical_laplace(&samples, lambda);
        println!(
            "{lambda:>6} {closed:>12.10} {chain:>12.10} {:>10.5} +/- {:.5}",
            e.mean, e.std_error
        );
    }
    let model = LawModel::Gbm(p);
    for t in [1.0, 5.0, 25.0] {
        println!("P(g <= {t}) = {:.6}", honest_time_cdf(&model, t)?);
    }
    let d = ks_statistic(&samples, |t| honest_time_cdf(&model, t).unwrap_or(f64::NAN))?;
    println!(
        "KS(sampler, inverted CDF) = {d:.4} (1% critical {:.4})",
        ks_critical_1pct(samples.len())
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
