// Conditional expectations of payoffs on the global maximum in closed and
// sum form, next to the Azéma–Yor martingale `F(Σ) − f(Σ)(Σ − N)`.

use htlab::maxima::{
    azema_yor_value, conditional_max_expectation, conditional_max_expectation_sum_form, unconditional_max_expectation,
    MaxPayoffSpec,
};

pub fn run() -> htlab::Result<()> {
    let specs = [
        MaxPayoffSpec::put(2.5)?,
        MaxPayoffSpec::indicator(2.0)?,
        MaxPayoffSpec::log(),
        MaxPayoffSpec::power(1.0, 0.5)?,
        MaxPayoffSpec::custom("min(y, 3)", |y| y.min(3.0), vec![3.0]),
    ];
    let (n_t, sigma_t) = (0.6, 1.5);
    println!("state N_t = {n_t}, Sigma_t = {sigma_t}");
    for spec in &specs {
        let closed = conditional_max_expectation(spec, n_t, sigma_t)?;
        let sum = conditional_max_expectation_sum_form(spec, n_t, sigma_t)?;
        let ay = azema_yor_value(spec, n_t, sigma_t)?;
        let v0 = unconditional_max_expectation(spec, 1.0)?;
        println!(
            "{:<14} E[f | F_t] = {closed:.10} (sum form {sum:.10}); E f(Sigma_inf) = {v0:.6}; AY martingale {ay:.6}",
            spec.label
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
