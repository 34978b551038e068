//! Drive the scenario runner programmatically: build a config, run a
//! suite, and read the structured report. The `wmlab` binary wraps the
//! same entry point; the configs in scenarios/ document every suite.
//!
//! Run with: cargo run --example run_suite

use weyl_moyal::scenario::{run_scenario, ScenarioConfig};

fn main() -> weyl_moyal::Result<()> {
    let config = ScenarioConfig::from_toml_str(
        r#"
suite = "covariant"
output_dir = "out/example-covariant"
"#,
    )?;
    let report = run_scenario(&config)?;
    println!("suite {}: all_passed = {}", report.suite, report.all_passed);
    for check in &report.checks {
        let bounds = match (check.lower, check.upper) {
            (Some(lo), Some(hi)) => format!("in [{lo:.1e}, {hi:.1e}]"),
            (None, Some(hi)) => format!("<= {hi:.1e}"),
            (Some(lo), None) => format!(">= {lo:.1e}"),
            (None, None) => String::from("unbounded"),
        };
        println!(
            "  {}  {:<32} measured {:.3e}  {bounds}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.measured
        );
    }
    println!("report written to {}/summary.json", config.output_dir.display());
    Ok(())
}
