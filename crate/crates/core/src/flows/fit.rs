use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::polyalg::{monomials_up_to, CPolynomial, Monomial, PolyVectorField};

type C = Complex64;

#[derive(Clone, Debug)]
pub struct FieldFit {
    pub field: PolyVectorField,
    /// Largest `‖X̂(z_i) − F(z_i)‖_∞` over the samples.
    pub max_residual: f64,
}

fn monomial_value(m: &Monomial, z: &[C]) -> C {
    m.0.iter()
        .zip(z)
        .fold(C::new(1.0, 0.0), |acc, (&e, &zi)| acc * zi.powu(e))
}

/// Ridge-regularized least-squares polynomial field of degree `≤ degree`
/// through the given values.
pub fn fit_polynomial_samples(
    points: &[Vec<C>],
    values: &[Vec<C>],
    degree: u32,
    ridge: f64,
) -> Result<FieldFit> {
    let n = points
        .first()
        .map(|p| p.len())
        .ok_or(Error::Underdetermined {
            samples: 0,
            unknowns: 1,
        })?;
    let monos = monomials_up_to(n, degree);
    let m = monos.len();
    if points.len() < m {
        return Err(Error::Underdetermined {
            samples: points.len(),
            unknowns: m,
        });
    }
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    let extra = if ridge > 0.0 { m } else { 0 };
    let rows = points.len() + extra;
    let mut a = DMatrix::<C>::zeros(rows, m);
    let mut b = DMatrix::<C>::zeros(rows, n);
    for (i, (z, val)) in points.iter().zip(values).enumerate() {
        if z.len() != n || val.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len().min(val.len()),
            });
        }
        for (j, mono) in monos.iter().enumerate() {
            a[(i, j)] = monomial_value(mono, z);
        }
        for (j, &v) in val.iter().enumerate() {
            b[(i, j)] = v;
        }
    }
    for j in 0..extra {
        a[(points.len() + j, j)] = C::new(ridge.sqrt(), 0.0);
    }
    let coef = lstsq(&a, &b, 1e-14);
    let comps: Vec<CPolynomial> = (0..n)
        .map(|c| {
            CPolynomial::from_terms(n, monos.iter().cloned().zip((0..m).map(|j| coef[(j, c)])))
                .expect("monomials match n")
        })
        .collect();
    let field = PolyVectorField::new(comps)?;
    let mut max_residual: f64 = 0.0;
    for (z, val) in points.iter().zip(values) {
        let got = field.eval(z)?;
        for (g, v) in got.iter().zip(val) {
            max_residual = max_residual.max((g - v).norm());
        }
    }
    Ok(FieldFit {
        field,
        max_residual,
    })
}

/// [`fit_polynomial_samples`] with values taken from an evaluator.
pub fn fit_polynomial_field<F>(
    f: F,
    degree: u32,
    samples: &[Vec<C>],
    ridge: f64,
) -> Result<FieldFit>
where
    F: Fn(&[C]) -> Vec<C>,
{
    let values: Vec<Vec<C>> = samples.iter().map(|z| f(z)).collect();
    fit_polynomial_samples(samples, &values, degree, ridge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::ball_samples;

    #[test]
    fn polynomial_field_is_recovered() {
        let x = PolyVectorField::new(vec![
            CPolynomial::from_terms(2, vec![(Monomial(vec![1, 1]), C::new(0.5, -1.0))]).unwrap(),
            CPolynomial::from_terms(
                2,
                vec![
                    (Monomial(vec![0, 0]), C::new(2.0, 0.0)),
                    (Monomial(vec![2, 0]), C::new(0.0, 1.0)),
                ],
            )
            .unwrap(),
        ])
        .unwrap();
        let samples = ball_samples(2, 1.0, 40, 1);
        let fit = fit_polynomial_field(|z| x.eval(z).unwrap(), 3, &samples, 0.0).unwrap();
        assert!(fit.max_residual <= 1e-10);
        assert!(fit.field.sub(&x).max_abs_coeff() <= 1e-10);
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let samples = ball_samples(3, 1.0, 30, 2);
        let fit = fit_polynomial_field(|_| vec![C::new(0.0, 0.0); 3], 2, &samples, 1e-3).unwrap();
        assert!(fit.field.is_zero());
    }

    #[test]
    fn sine_on_small_ball() {
        let samples = ball_samples(2, 0.5, 120, 3);
        let fit =
            fit_polynomial_field(|z| vec![z[1].sin(), C::new(0.0, 0.0)], 7, &samples, 0.0).unwrap();
        assert!(fit.max_residual <= 1e-6, "{}", fit.max_residual);
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = ball_samples(2, 1.0, 5, 4);
        assert!(matches!(
            fit_polynomial_field(|z| z.to_vec(), 2, &samples, 0.0),
            Err(Error::Underdetermined {
                samples: 5,
                unknowns: 6
            })
        ));
    }

    #[test]
    fn ridge_shrinks_coefficients() {
        let samples = ball_samples(2, 1.0, 40, 5);
        let f = |z: &[C]| vec![z[0] * 3.0, z[1]];
        let plain = fit_polynomial_field(f, 1, &samples, 0.0).unwrap();
        let ridged = fit_polynomial_field(f, 1, &samples, 10.0).unwrap();
        assert!(ridged.field.max_abs_coeff() < plain.field.max_abs_coeff());
    }
}
