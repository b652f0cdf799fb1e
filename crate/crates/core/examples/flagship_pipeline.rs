//! Runs the default scenario and prints the criteria.
use std::time::Instant;

use alkit::pipeline::{run_pipeline, ScenarioConfig};

fn main() -> alkit::Result<()> {
    let cfg = ScenarioConfig::default();
    let start = Instant::now();
    let out = run_pipeline(&cfg)?;
    let r = &out.report;
    println!(
        "word: {} shears in {:.1} s",
        r.shear_count,
        start.elapsed().as_secs_f64()
    );
    println!(
        "window  max |word − φ₁|_{{k,x}} = {:.3e} (ε ratio {:.3})",
        r.window_max_error, r.window.value
    );
    println!(
        "outside max deviation = {:.3e} (budget {:.3e})",
        r.outside.value, r.outside.bound
    );
    println!(
        "K       max error = {:.3e} (μ = {:.1e})",
        r.k_set.value, r.k_set.bound
    );
    println!(
        "injectivity min separation = {:.3e} (≥ {:.1e})",
        r.injectivity.value, r.injectivity.bound
    );
    println!("cutoff constant T = {:.3e}", r.cutoff_constant);
    println!("overall: {}", if r.pass { "pass" } else { "fail" });
    Ok(())
}
