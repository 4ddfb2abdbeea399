// General transient diffusion: the decreasing solution of `Gφ = λφ` and the
// resulting honest-time transform, checked against the Bessel closed form.

use htlab::laws::{bessel_laplace, diffusion_laplace, solve_phi_lambda, BesselParams, ScaleDiffusion};

pub fn run() -> htlab::Result<()> {
    for delta in [2.5, 3.0, 4.0, 5.0] {
        let diff = ScaleDiffusion::squared_bessel(delta, 1.0)?;
        let p = BesselParams::new(delta, 1.0)?;
        for lambda in [0.1, 1.0] {
            let a = diffusion_laplace(&diff, lambda)?;
            let b = bessel_laplace(&p, lambda)?;
            println!("delta = {delta}, lambda = {lambda}: eigenfunction route {a:.10}, closed form {b:.10}");
        }
    }
    let diff = ScaleDiffusion::squared_bessel(3.0, 1.0)?;
    let probes = [0.2, 0.5, 1.0, 2.0, 5.0];
    let phi = solve_phi_lambda(&diff, 1.0, &probes)?;
    println!(
        "residual of G phi - lambda phi on probes: {:.2e}",
        phi.residual(&diff, &probes)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
