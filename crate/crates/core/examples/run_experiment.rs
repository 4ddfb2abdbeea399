// Drives an experiment from an in-memory configuration, as the `htlab`
// binary does from a file.

use htlab::cli::{run_config, scratch_dir, ExperimentConfig};

const CONFIG: &str = r#"
experiment = "invert"

[model]
kind = "gbm"
sigma = 0.2

[grid]
T = 10.0
dt = 0.01

[mc]
n_paths = 500
seed = 11

[law]
times = [1.0, 5.0, 25.0]
"#;

pub fn run() -> htlab::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let dir = scratch_dir("example")?;
    let outcome = run_config(&cfg, &dir)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    print!("{}", std::fs::read_to_string(dir.join("law_cdf.csv"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> htlab::Result<()> {
    run()
}
