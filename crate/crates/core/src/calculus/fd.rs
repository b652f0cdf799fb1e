//! Tensor-product central finite differences with one Richardson level.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Second-order central stencils (offset, weight) for derivative orders 0..=5,
/// normalised for unit step.
fn stencil(order: u32) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[
            (-3, -0.5),
            (-2, 2.0),
            (-1, -2.5),
            (1, 2.5),
            (2, -2.0),
            (3, 0.5),
        ],
        _ => &[],
    }
}

pub const MAX_FD_ORDER: u32 = 5;

/// Base step for a derivative of total order `total`; higher orders use wider
/// steps to keep round-off in check.
pub fn step_for_order(h: f64, total: u32) -> f64 {
    const GROWTH: [f64; 5] = [1.0, 10.0, 100.0, 200.0, 300.0];
    match total {
        0 => h,
        t => h * GROWTH[(t as usize).min(GROWTH.len()) - 1],
    }
}

fn raw(f: &dyn Fn(&[f64]) -> Vec<C>, x: &[f64], alpha: &[u32], h: f64) -> Result<Vec<C>> {
    let stencils: Vec<&[(i32, f64)]> = alpha.iter().map(|&a| stencil(a)).collect();
    let mut idx = vec![0usize; alpha.len()];
    let mut acc: Option<Vec<C>> = None;
    let mut pt = x.to_vec();
    loop {
        let mut w = 1.0;
        for (d, st) in stencils.iter().enumerate() {
            let (off, wt) = st[idx[d]];
            pt[d] = x[d] + off as f64 * h;
            w *= wt;
        }
        let v = f(&pt);
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::FiniteDifference(format!(
                "non-finite value at {:?}",
                pt
            )));
        }
        match acc.as_mut() {
            None => acc = Some(v.into_iter().map(|c| c * w).collect()),
            Some(a) => {
                for (ai, vi) in a.iter_mut().zip(v) {
                    *ai += vi * w;
                }
            }
        }
        // odometer over stencil indices
        let mut d = 0;
        loop {
            if d == idx.len() {
                let total: u32 = alpha.iter().sum();
                let scale = h.powi(total as i32);
                return Ok(acc.unwrap().into_iter().map(|c| c / scale).collect());
            }
            idx[d] += 1;
            if idx[d] < stencils[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Richardson-extrapolated derivative `d^alpha f(x)` and an error estimate.
pub fn derivative(
    f: &dyn Fn(&[f64]) -> Vec<C>,
    x: &[f64],
    alpha: &[u32],
    h: f64,
) -> Result<(Vec<C>, f64)> {
    let total: u32 = alpha.iter().sum();
    if alpha.iter().any(|&a| a > MAX_FD_ORDER) {
        return Err(Error::FiniteDifference(format!(
            "per-coordinate order above {MAX_FD_ORDER} unsupported"
        )));
    }
    if total == 0 {
        let v = f(x);
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::FiniteDifference(format!(
                "non-finite value at {:?}",
                x
            )));
        }
        return Ok((v, 0.0));
    }
    let hs = step_for_order(h, total);
    let d1 = raw(f, x, alpha, hs)?;
    let d2 = raw(f, x, alpha, hs / 2.0)?;
    let mut err = 0.0f64;
    let out = d1
        .iter()
        .zip(&d2)
        .map(|(&a, &b)| {
            err = err.max((b - a).norm() / 3.0);
            (b * 4.0 - a) / 3.0
        })
        .collect();
    Ok((out, err))
}
