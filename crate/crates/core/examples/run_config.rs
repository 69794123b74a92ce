//! Runs every check listed in a config file, as the `suite` subcommand does
//! for a single file.
//!
//! cargo run --example run_config -- configs/reference/disk_linear.toml

use std::path::PathBuf;

use l2lab::runner::{run_config, ExperimentConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/reference/disk_linear.toml".into());
    let cfg = match ExperimentConfig::load(path.as_ref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let out = std::env::temp_dir().join("l2lab-example");
    match run_config(&cfg, &cfg.checks, &out) {
        Ok(report) => {
            for c in &report.checks {
                println!("{:<20} {}", c.check, if c.pass { "pass" } else { "FAIL" });
            }
            println!("artifacts in {}", PathBuf::from(&out).join(&cfg.name).display());
        }
        Err(e) => eprintln!("{e}"),
    }
}
