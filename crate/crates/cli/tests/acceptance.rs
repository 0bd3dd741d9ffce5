//! One PASS/FAIL line per acceptance criterion, with its runtime budget.

use std::process::{Command, ExitCode};
use std::time::Instant;

use stepforce_cli::config::RunConfig;
use stepforce_cli::output::fmt_f64;
use stepforce_cli::suite::{CriterionOutcome, CRITERIA};

fn summary(outcome: &CriterionOutcome) -> String {
    if let Some(e) = &outcome.error {
        return format!("error: {e}");
    }
    outcome
        .checks
        .iter()
        .map(|c| {
            let mark = if c.passed { "" } else { " [failed]" };
            format!("{} = {}{mark}", c.name, fmt_f64(c.value))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn report_bytes(dir: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_stepforce"))
        .args(["report", "--seed", "0", "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "report exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    std::fs::read(dir.join("report.json")).map_err(|e| e.to_string())
}

fn determinism() -> Result<String, String> {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (ra, rb) = (report_bytes(a.path())?, report_bytes(b.path())?);
    if ra == rb {
        Ok(format!("{} bytes identical", ra.len()))
    } else {
        Err("report.json differs between runs".to_string())
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut failed = 0;
    for criterion in &CRITERIA {
        let start = Instant::now();
        let outcome = criterion.evaluate(&cfg, 0);
        let secs = start.elapsed().as_secs_f64();
        let in_budget = criterion.runtime_budget_s.map_or(true, |b| secs <= b);
        let passed = outcome.passed && in_budget;
        if !passed {
            failed += 1;
        }
        let budget = criterion
            .runtime_budget_s
            .map_or(String::new(), |b| format!(" / {b:.0} s"));
        println!(
            "criterion {:>2} {}: {} ({:.2} s{budget}) {}",
            criterion.id,
            criterion.name,
            if passed { "PASS" } else { "FAIL" },
            secs,
            summary(&outcome)
        );
    }
    let start = Instant::now();
    let det = determinism();
    let secs = start.elapsed().as_secs_f64();
    match &det {
        Ok(msg) => println!("criterion 11 determinism: PASS ({secs:.2} s) {msg}"),
        Err(msg) => {
            failed += 1;
            println!("criterion 11 determinism: FAIL ({secs:.2} s) {msg}");
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
