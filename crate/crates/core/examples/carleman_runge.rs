//! Approximates tanh on [−6, 6] in C¹ by an entire function with a tolerance
//! that shrinks away from the origin, then evaluates it off the real axis.
use std::sync::Arc;

use alkit::calculus::SmoothMapSample;
use alkit::carleman::{
    acceptance_grid, approximant_seminorm_report, carleman_1d, cauchy_riemann_defect,
    CarlemanOptions, ToleranceProfile,
};
use num_complex::Complex64 as C;

fn main() -> alkit::Result<()> {
    let f = SmoothMapSample::new(1, 1, Arc::new(|x: &[f64]| vec![C::new(x[0].tanh(), 0.0)]));
    let tol = ToleranceProfile::new(6.0, Arc::new(|x: f64| 1e-2 * (-0.3 * x.abs()).exp()))?;
    let opts = CarlemanOptions::default();
    let g = carleman_1d(&f, 1, &tol, &opts)?;
    let rep = approximant_seminorm_report(
        &g,
        &f,
        1,
        &acceptance_grid(6.0, opts.acceptance_spacing),
        &tol,
    )?;
    println!("{} stages, leak {:.2e}", g.stages().len(), g.leak_total());
    println!(
        "max |g − f|_{{1,x}} / ε(x) = {:.3} ({})",
        rep.max_ratio(),
        if rep.pass() { "pass" } else { "fail" }
    );
    for z in [C::new(0.5, 0.3), C::new(-2.0, 1.0), C::new(4.0, -0.5)] {
        println!(
            "g({z:.2}) = {:.6}   CR defect {:.1e}",
            g.eval(z),
            cauchy_riemann_defect(&g, z, 1e-3)
        );
    }
    Ok(())
}
