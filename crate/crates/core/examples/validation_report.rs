// Runs a quick subset of the acceptance suite and prints each check.

use htlab::validation::{run_criterion, ValidationOptions};

pub fn run() -> htlab::Result<()> {
    let opts = ValidationOptions::default();
    for id in [4, 5, 9] {
        let report = run_criterion(id, &opts)?;
        println!("{}", report.summary_line());
        for c in &report.checks {
            println!("    {:<60} {:>14.6e}  {}", c.name, c.observed, c.tolerance);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
