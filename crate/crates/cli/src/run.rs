use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lpweak::verify::{run_scenario, VerifyReport};
use lpweak::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;

#[derive(Debug)]
pub enum RunError {
    Io(std::io::Error),
    Config(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Outcome of one scenario.
enum Outcome {
    Report(VerifyReport),
    /// The scenario could not produce a report.
    Failed(String),
}

/// Runs the configured scenarios, writes one CSV per report and
/// `manifest.json`, and returns whether everything passed.
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<bool, RunError> {
    fs::create_dir_all(out)?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| RunError::Config(e.to_string()))?;
    let outcomes: Vec<(String, Result<Outcome, RunError>, f64)> = pool.install(|| {
        cfg.scenarios
            .par_iter()
            .map(|name| {
                let t = Instant::now();
                let outcome = match run_scenario(name, &cfg.params) {
                    Ok(r) => Ok(Outcome::Report(r)),
                    Err(Error::InvalidParameter(msg)) => Err(RunError::Config(format!("{name}: {msg}"))),
                    Err(Error::Io(e)) => Err(RunError::Io(e)),
                    Err(e) => Ok(Outcome::Failed(e.to_string())),
                };
                (name.clone(), outcome, t.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut all_passed = true;
    let mut entries = Vec::new();
    for (name, outcome, secs) in outcomes {
        match outcome? {
            Outcome::Report(report) => {
                let mut w = BufWriter::new(fs::File::create(out.join(format!("{name}.csv")))?);
                report.write_csv(&mut w).map_err(|e| match e {
                    Error::Io(e) => RunError::Io(e),
                    other => RunError::Io(std::io::Error::other(other.to_string())),
                })?;
                w.flush()?;
                eprint!("{name}: {}\n{}", if report.passed() { "pass" } else { "FAIL" }, report.describe());
                all_passed &= report.passed();
                let mut entry = report.summary();
                entry["seconds"] = json!(secs);
                entries.push(entry);
            }
            Outcome::Failed(msg) => {
                eprintln!("{name}: FAIL ({msg})");
                all_passed = false;
                entries.push(json!({ "scenario": name, "passed": false, "error": msg, "seconds": secs }));
            }
        }
    }
    let manifest = json!({
        "lpweak_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "workers": cfg.workers,
        "started_unix": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "wall_seconds": clock.elapsed().as_secs_f64(),
        "passed": all_passed,
        "scenarios": entries,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(all_passed)
}
