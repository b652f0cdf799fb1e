//! Small dense least-squares helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, RealField};

/// Minimum-norm least-squares solution of `a x ≈ b` via SVD after column
/// equilibration. Singular values below `rcond · σ_max` are discarded.
pub fn lstsq<T>(a: &DMatrix<T>, b: &DMatrix<T>, rcond: f64) -> DMatrix<T>
where
    T: ComplexField,
    T::RealField: RealField + Copy,
{
    let ncols = a.ncols();
    let mut scaled = a.clone();
    let mut scales = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let nrm = scaled.column(j).norm();
        let s = if nrm > nalgebra::zero::<T::RealField>() {
            nrm
        } else {
            nalgebra::one::<T::RealField>()
        };
        scaled.column_mut(j).unscale_mut(s);
        scales.push(s);
    }
    let svd = scaled.svd(true, true);
    let smax =
        svd.singular_values
            .iter()
            .copied()
            .fold(
                nalgebra::zero::<T::RealField>(),
                |m, v| if v > m { v } else { m },
            );
    let eps = smax * nalgebra::convert::<f64, T::RealField>(rcond);
    let mut x = svd.solve(b, eps).expect("SVD computed with both factors");
    for (j, s) in scales.into_iter().enumerate() {
        x.row_mut(j).unscale_mut(s);
    }
    x
}

/// Ratio of extreme singular values.
pub fn condition_number<T>(a: &DMatrix<T>) -> f64
where
    T: ComplexField,
    T::RealField: RealField + Copy + Into<f64>,
{
    let sv = a.singular_values();
    let max: f64 = sv.iter().map(|&v| v.into()).fold(0.0, f64::max);
    let min: f64 = sv.iter().map(|&v| v.into()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
