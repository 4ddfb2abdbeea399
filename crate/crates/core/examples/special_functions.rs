// Numerical building blocks: Bessel K, tanh-sinh quadrature on improper
// integrals and Talbot inversion of a Laplace transform.

use htlab::numerics::{bessel_k, integrate, invert_laplace_with, InversionTarget, LaplaceTransform, TalbotOptions};

pub fn run() -> htlab::Result<()> {
    for nu in [0.25, 0.5, 1.0, 1.5] {
        println!("K_{nu}(1) = {:.15}", bessel_k(nu, 1.0)?);
    }
    // ∫₀^∞ e^{-t}/√t dt = √π
    let q = integrate(|t| (-t).exp() / t.sqrt(), 0.0, f64::INFINITY, 1e-12)?;
    println!(
        "integral of e^-t/sqrt(t) = {:.15} (sqrt(pi) = {:.15})",
        q.value,
        std::f64::consts::PI.sqrt()
    );

    // exponential law with rate 2: transform 2/(2+s)
    let f = LaplaceTransform::new(|s| Ok(2.0 / (s + 2.0)), "exponential(2)");
    for t in [0.1, 1.0, 3.0] {
        let density = invert_laplace_with(&f, t, TalbotOptions::default())?;
        let cdf = invert_laplace_with(
            &f,
            t,
            TalbotOptions {
                target: InversionTarget::Cdf,
                ..TalbotOptions::default()
            },
        )?;
        println!(
            "t = {t}: density {:.10} (exact {:.10}), CDF {:.10} (exact {:.10})",
            density.value,
            2.0 * (-2.0 * t).exp(),
            cdf.value,
            1.0 - (-2.0 * t).exp()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
