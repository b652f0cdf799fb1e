//! Almost-analytic extension of the 3-jet of sin on ℝ into ℂ: ∂̄F vanishes on ℝ
//! and decays like |Im z|³ off it.
use std::sync::Arc;

use alkit::calculus::{
    almost_analytic_extend, dbar_flat_order, vanishing_slope, JetOnRs, SlopeOptions,
};
use num_complex::Complex64 as C;

fn main() -> alkit::Result<()> {
    let k = 3;
    let jet = JetOnRs::new(
        1,
        k,
        1,
        Arc::new(|beta: &[u32], x: &[f64]| {
            let v = match beta[0] % 4 {
                0 => x[0].sin(),
                1 => x[0].cos(),
                2 => -x[0].sin(),
                _ => -x[0].cos(),
            };
            vec![C::new(v, 0.0)]
        }),
    );
    let f = almost_analytic_extend(&jet, 1, k)?;
    let base: Vec<Vec<f64>> = [-1.0, -0.2, 0.5, 1.3]
        .iter()
        .map(|&x| vec![x, 0.0])
        .collect();

    let flat = dbar_flat_order(&f, &base, k, 1e-6)?;
    println!(
        "∂̄ of partials of order < {k} on ℝ: max {:.2e}",
        flat.max_residual()
    );
    let slope = vanishing_slope(&f, &base, &[0.0, 1.0], k, &SlopeOptions::default())?;
    for (y, r) in slope.offsets.iter().zip(&slope.residuals) {
        println!("  Im z = {y:.4}  |∂̄F| = {r:.3e}");
    }
    println!(
        "fitted order {:.3} (threshold {:.1})",
        slope.slope.unwrap_or(f64::NAN),
        slope.threshold
    );
    Ok(())
}
