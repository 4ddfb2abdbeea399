// Honest-time laws for squared Bessel models, including the closed-form
// density in dimension three.

use htlab::laws::{bessel3_cdf, bessel3_density, bessel_laplace, honest_time_cdf, BesselParams, LawModel};

pub fn run() -> htlab::Result<()> {
    for delta in [2.5, 3.0, 4.0, 5.0] {
        let p = BesselParams::new(delta, 1.0)?;
        let values: Vec<String> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&l| bessel_laplace(&p, l).map(|v| format!("{v:.8}")))
            .collect::<htlab::Result<_>>()?;
        println!(
            "delta = {delta}: E exp(-lambda g) at 0.1, 1, 10 = {}",
            values.join(", ")
        );
    }
    let model = LawModel::Bessel(BesselParams::new(3.0, 1.0)?);
    for t in [0.25, 1.0, 4.0] {
        println!(
            "delta = 3, t = {t}: density {:.8}, closed CDF {:.8}, inverted CDF {:.8}",
            bessel3_density(1.0, t)?,
            bessel3_cdf(1.0, t)?,
            honest_time_cdf(&model, t)?
        );
    }
    // the law moves with the starting level
    println!(
        "P(g <= 1) for x = 1, 2: {:.6}, {:.6}",
        bessel3_cdf(1.0, 1.0)?,
        bessel3_cdf(2.0, 1.0)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
