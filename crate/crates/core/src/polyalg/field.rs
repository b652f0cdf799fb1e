use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CPolynomial;
use crate::error::{Error, Result};

type C = Complex64;

/// Holomorphic polynomial vector field `Σ X_j ∂/∂z_j` on ℂⁿ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyVectorField {
    n_vars: usize,
    components: Vec<CPolynomial>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRepr {
    n_vars: usize,
    components: Vec<CPolynomial>,
}

impl<'de> Deserialize<'de> for PolyVectorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FieldRepr::deserialize(d)?;
        PolyVectorField::new(r.components)
            .and_then(|f| {
                if f.n_vars == r.n_vars {
                    Ok(f)
                } else {
                    Err(Error::DimensionMismatch {
                        expected: r.n_vars,
                        got: f.n_vars,
                    })
                }
            })
            .map_err(serde::de::Error::custom)
    }
}

impl PolyVectorField {
    /// Requires exactly `n` components, each in `n` variables.
    pub fn new(components: Vec<CPolynomial>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "vector field needs at least one component".into(),
            ));
        }
        for p in &components {
            if p.n_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.n_vars(),
                });
            }
        }
        Ok(PolyVectorField {
            n_vars: n,
            components,
        })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            n_vars: n,
            components: vec![CPolynomial::zero(n); n],
        }
    }

    /// `p(z)·v`.
    pub fn along(p: &CPolynomial, v: &[C]) -> Self {
        PolyVectorField {
            n_vars: p.n_vars(),
            components: v.iter().map(|&c| p.scale(c)).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn components(&self) -> &[CPolynomial] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &CPolynomial {
        &self.components[j]
    }

    pub fn degree(&self) -> i64 {
        self.components
            .iter()
            .map(|p| p.degree())
            .max()
            .unwrap_or(-1)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|p| p.is_zero())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .map(|p| p.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &[C]) -> Result<Vec<C>> {
        if z.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: z.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|p| p.eval_unchecked(z))
            .collect())
    }

    /// Holomorphic divergence `Σ ∂X_j/∂z_j`.
    pub fn divergence(&self) -> CPolynomial {
        self.components
            .iter()
            .enumerate()
            .fold(CPolynomial::zero(self.n_vars), |acc, (j, p)| {
                &acc + &p.partial(j)
            })
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        PolyVectorField {
            n_vars: self.n_vars,
            components: self
                .components
                .iter()
                .map(|p| p.homogeneous_part(k))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "n_vars mismatch");
        PolyVectorField {
            n_vars: self.n_vars,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C) -> Self {
        PolyVectorField {
            n_vars: self.n_vars,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Applies a constant matrix to the field values: `(M X)(z)`.
    pub fn map_values(&self, m: &[Vec<C>]) -> Self {
        let n = self.n_vars;
        let components = (0..n)
            .map(|i| {
                (0..n).fold(CPolynomial::zero(n), |acc, j| {
                    &acc + &self.components[j].scale(m[i][j])
                })
            })
            .collect();
        PolyVectorField {
            n_vars: n,
            components,
        }
    }

    /// Substitutes linear forms for the variables in every component.
    pub fn substitute_linear(&self, forms: &[Vec<C>]) -> Self {
        PolyVectorField {
            n_vars: forms[0].len(),
            components: self
                .components
                .iter()
                .map(|p| p.substitute_linear(forms))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::Monomial;

    fn z(i: usize) -> CPolynomial {
        CPolynomial::variable(2, i)
    }

    #[test]
    fn divergence_examples() {
        let shear = PolyVectorField::new(vec![z(1), CPolynomial::zero(2)]).unwrap();
        assert!(shear.divergence().is_zero());

        let euler = PolyVectorField::new(vec![z(0), z(1)]).unwrap();
        assert_eq!(
            euler.divergence(),
            CPolynomial::constant(2, C::new(2.0, 0.0))
        );

        let x = PolyVectorField::new(vec![
            &z(0).pow(2) * &z(1),
            (&z(0) * &z(1).pow(2)).scale(C::new(-1.0, 0.0)),
        ])
        .unwrap();
        assert!(x.divergence().is_zero());
    }

    #[test]
    fn homogeneous_part_filters_degree() {
        let p = &(&z(0) + &z(1).pow(2)) + &CPolynomial::constant(2, C::new(1.0, 0.0));
        let f = PolyVectorField::new(vec![p.clone(), p]).unwrap();
        let h = f.homogeneous_part(2);
        for comp in h.components() {
            for (a, _) in comp.terms() {
                assert_eq!(a.degree(), 2);
            }
        }
        assert_eq!(
            h.component(0).coeff(&Monomial(vec![0, 2])),
            C::new(1.0, 0.0)
        );
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let r = PolyVectorField::new(vec![z(0), CPolynomial::zero(3)]);
        assert!(r.is_err());
    }

    #[test]
    fn divergence_is_linear() {
        let x = PolyVectorField::new(vec![&z(0) * &z(1), z(0).pow(3)]).unwrap();
        let y = PolyVectorField::new(vec![z(1).pow(2), &z(0) * &z(1)]).unwrap();
        let a = C::new(0.5, 1.0);
        let b = C::new(-2.0, 0.25);
        let lhs = x.scale(a).add(&y.scale(b)).divergence();
        let rhs = &x.divergence().scale(a) + &y.divergence().scale(b);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_round_trip() {
        let x = PolyVectorField::new(vec![&z(0) * &z(1), z(0).pow(3)]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: PolyVectorField = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
