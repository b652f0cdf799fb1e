use std::sync::Arc;

use crate::calculus::SmoothMapSample;

pub type CutoffFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `φ̃ = φ + (1 − χ)(s∘ψ − φ)`, evaluated as `χ·φ + (1 − χ)·s∘ψ` so that both
/// extremes of `χ` reproduce the corresponding map exactly.
///
/// `psi` maps ℝ^s to itself; imaginary parts of its output are ignored.
/// `section` is defined on ℝ^s when it has dimension `s`, and on ℂ^s (real
/// coordinates interleaved) when it has dimension `2s`.
pub fn blend_maps(
    phi: &SmoothMapSample,
    psi: &SmoothMapSample,
    section: &SmoothMapSample,
    chi: CutoffFn,
) -> SmoothMapSample {
    let (phi, psi, section) = (phi.clone(), psi.clone(), section.clone());
    let (dim, m, step) = (phi.dim(), phi.m(), phi.step());
    SmoothMapSample::new(
        dim,
        m,
        Arc::new(move |x: &[f64]| {
            let c = chi(x);
            let moved = || {
                let y = psi.value(x).expect("blend: ψ dimension");
                let arg: Vec<f64> = if section.dim() == y.len() {
                    y.iter().map(|v| v.re).collect()
                } else {
                    y.iter().flat_map(|v| [v.re, 0.0]).collect()
                };
                section.value(&arg).expect("blend: section dimension")
            };
            if c == 1.0 {
                return phi.value(x).expect("blend: φ dimension");
            }
            if c == 0.0 {
                return moved();
            }
            let a = phi.value(x).expect("blend: φ dimension");
            a.iter()
                .zip(moved())
                .map(|(p, q)| p * c + q * (1.0 - c))
                .collect()
        }),
    )
    .with_step(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn maps() -> (SmoothMapSample, SmoothMapSample, SmoothMapSample) {
        let phi = SmoothMapSample::new(
            1,
            2,
            Arc::new(|x: &[f64]| vec![C::new(x[0], 0.0), C::new(0.1 * x[0].sin(), 0.0)]),
        );
        let psi = SmoothMapSample::new(
            1,
            1,
            Arc::new(|x: &[f64]| vec![C::new(x[0] + 0.2 * x[0].cos(), 0.0)]),
        );
        let s = SmoothMapSample::new(
            1,
            2,
            Arc::new(|y: &[f64]| vec![C::new(y[0], 0.3), C::new(0.0, y[0] * y[0])]),
        );
        (phi, psi, s)
    }

    #[test]
    fn extremes_are_exact() {
        let (phi, psi, s) = maps();
        let one = blend_maps(&phi, &psi, &s, Arc::new(|_| 1.0));
        let zero = blend_maps(&phi, &psi, &s, Arc::new(|_| 0.0));
        for i in 0..50 {
            let x = [-3.0 + 0.123 * i as f64];
            assert_eq!(one.value(&x).unwrap(), phi.value(&x).unwrap());
            let y = psi.value(&x).unwrap()[0].re;
            assert_eq!(zero.value(&x).unwrap(), s.value(&[y]).unwrap());
        }
    }

    #[test]
    fn agreeing_maps_blend_to_themselves() {
        let psi = SmoothMapSample::new(1, 1, Arc::new(|x: &[f64]| vec![C::new(2.0 * x[0], 0.0)]));
        let s = SmoothMapSample::new(1, 1, Arc::new(|y: &[f64]| vec![C::new(y[0].exp(), -y[0])]));
        let phi = SmoothMapSample::new(
            1,
            1,
            Arc::new(|x: &[f64]| vec![C::new((2.0 * x[0]).exp(), -2.0 * x[0])]),
        );
        let b = blend_maps(&phi, &psi, &s, Arc::new(|x: &[f64]| 0.5 + 0.4 * x[0].sin()));
        for i in 0..40 {
            let x = [-1.0 + 0.05 * i as f64];
            let (p, q) = (b.value(&x).unwrap(), phi.value(&x).unwrap());
            assert!((p[0] - q[0]).norm() <= 1e-14 * (1.0 + q[0].norm()));
        }
    }

    #[test]
    fn intermediate_values_interpolate() {
        let (phi, psi, s) = maps();
        let b = blend_maps(&phi, &psi, &s, Arc::new(|_| 0.25));
        let x = [0.7];
        let y = psi.value(&x).unwrap()[0].re;
        let expect: Vec<C> = phi
            .value(&x)
            .unwrap()
            .iter()
            .zip(s.value(&[y]).unwrap())
            .map(|(p, q)| p + (q - p) * 0.75)
            .collect();
        for (a, e) in b.value(&x).unwrap().iter().zip(&expect) {
            assert!((a - e).norm() < 1e-14);
        }
    }
}
