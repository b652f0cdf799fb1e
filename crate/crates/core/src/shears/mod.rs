//! Shear and overshear generators, their exact flows, and words of time-t maps.
//!
//! Inner products are Hermitian and conjugate-linear in the second slot:
//! `⟨z, w⟩ = Σ z_l · conj(w_l)`.

mod word;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::carleman::EntireApproximant;
use crate::error::{Error, Result};
use crate::polyalg::{CPolynomial, PolyVectorField};

pub use word::{AutomorphismWord, WordEntry};

type C = Complex64;

pub fn inner(z: &[C], w: &[C]) -> C {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(z: &[C]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1(z: C) -> C {
    let (a, b) = (z.re, z.im);
    let s = (b / 2.0).sin();
    C::new(a.exp_m1() * b.cos() - 2.0 * s * s, a.exp() * b.sin())
}

/// A unit vector `v` with a fixed orthonormal basis of `v^⊥`.
///
/// The basis comes from Gram–Schmidt on the standard basis vectors, skipping
/// the coordinate where `|v_i|` is largest (lowest index on ties).
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    v: Vec<C>,
    basis: Vec<Vec<C>>,
}

impl Direction {
    /// Normalizes `v`; fails on the zero vector or non-finite entries.
    pub fn new(v: Vec<C>) -> Result<Self> {
        let n = v.len();
        if n < 2 {
            return Err(Error::InvalidInput("direction needs n >= 2".into()));
        }
        let r = norm(&v);
        if !r.is_finite() || r == 0.0 {
            return Err(Error::InvalidInput(
                "direction must be a finite nonzero vector".into(),
            ));
        }
        let v: Vec<C> = if (r - 1.0).abs() > 1e-15 {
            v.iter().map(|c| c / r).collect()
        } else {
            v
        };
        let pivot = (0..n).fold(0, |p, i| if v[i].norm() > v[p].norm() { i } else { p });
        let mut frame = vec![v.clone()];
        for i in (0..n).filter(|&i| i != pivot) {
            let mut u = vec![C::new(0.0, 0.0); n];
            u[i] = C::new(1.0, 0.0);
            // Two passes keep orthogonality at rounding level.
            for _ in 0..2 {
                for b in &frame {
                    let c = inner(&u, b);
                    for (x, y) in u.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
            }
            let r = norm(&u);
            frame.push(u.iter().map(|c| c / r).collect());
        }
        let basis = frame.split_off(1);
        Ok(Direction { v, basis })
    }

    /// The standard basis vector `e_i`.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![C::new(0.0, 0.0); n];
        v[i] = C::new(1.0, 0.0);
        Self::new(v).expect("axis direction")
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn v(&self) -> &[C] {
        &self.v
    }

    /// Orthonormal basis `B_v` of `v^⊥`, one row per vector.
    pub fn basis(&self) -> &[Vec<C>] {
        &self.basis
    }

    /// Coordinates `w_l = ⟨z, B_l⟩` of the projection of `z` along `v`.
    pub fn project(&self, z: &[C]) -> Vec<C> {
        self.basis.iter().map(|b| inner(z, b)).collect()
    }

    /// Linear forms giving [`Direction::project`] as polynomials in `z`.
    pub fn projection_forms(&self) -> Vec<Vec<C>> {
        self.basis
            .iter()
            .map(|b| b.iter().map(|c| c.conj()).collect())
            .collect()
    }

    pub fn distance(&self, other: &[C]) -> f64 {
        self.v
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<C>::deserialize(d)?;
        Direction::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Shear,
    Overshear,
}

/// An entire one-variable profile `w ↦ g(scale·w + shift)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntireProfile {
    pub approximant: EntireApproximant,
    pub scale: C,
    pub shift: C,
}

impl EntireProfile {
    pub fn eval(&self, w: C) -> C {
        self.approximant.eval(self.scale * w + self.shift)
    }
}

/// Profile function on the `n − 1` coordinates of `v^⊥`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Polynomial(CPolynomial),
    Entire(EntireProfile),
}

impl Profile {
    pub fn eval(&self, w: &[C]) -> C {
        match self {
            Profile::Polynomial(p) => p.eval_unchecked(w),
            Profile::Entire(e) => e.eval(w[0]),
        }
    }

    fn n_vars(&self) -> usize {
        match self {
            Profile::Polynomial(p) => p.n_vars(),
            Profile::Entire(_) => 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Polynomial(p) => p.is_zero(),
            Profile::Entire(e) => e.approximant.is_zero(),
        }
    }

    pub fn scaled(&self, c: C) -> Profile {
        match self {
            Profile::Polynomial(p) => Profile::Polynomial(p.scale(c)),
            Profile::Entire(e) => Profile::Entire(EntireProfile {
                approximant: e.approximant.scaled(c),
                ..e.clone()
            }),
        }
    }
}

/// A shear field `f(π_v z)·v` or an overshear field `g(π_v z)·⟨z,v⟩·v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearGenerator {
    kind: Kind,
    #[serde(rename = "v")]
    direction: Direction,
    profile: Profile,
}

impl ShearGenerator {
    /// The profile must take `n − 1` variables.
    pub fn new(kind: Kind, direction: Direction, profile: Profile) -> Result<Self> {
        let need = direction.n() - 1;
        if profile.n_vars() != need {
            return Err(Error::DimensionMismatch {
                expected: need,
                got: profile.n_vars(),
            });
        }
        Ok(ShearGenerator {
            kind,
            direction,
            profile,
        })
    }

    pub fn shear(direction: Direction, f: CPolynomial) -> Result<Self> {
        Self::new(Kind::Shear, direction, Profile::Polynomial(f))
    }

    pub fn overshear(direction: Direction, g: CPolynomial) -> Result<Self> {
        Self::new(Kind::Overshear, direction, Profile::Polynomial(g))
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn n(&self) -> usize {
        self.direction.n()
    }

    pub fn scaled(&self, c: C) -> Self {
        ShearGenerator {
            profile: self.profile.scaled(c),
            ..self.clone()
        }
    }

    pub fn with_profile(&self, profile: Profile) -> Result<Self> {
        Self::new(self.kind, self.direction.clone(), profile)
    }

    /// Profile value at `π_v(z)`.
    pub fn profile_at(&self, z: &[C]) -> C {
        self.profile.eval(&self.direction.project(z))
    }

    /// The exact time-`t` map.
    pub fn flow(&self, t: f64, z: &[C]) -> Vec<C> {
        let p = self.profile_at(z);
        let v = self.direction.v();
        let s = match self.kind {
            Kind::Shear => p * t,
            Kind::Overshear => expm1(p * t) * inner(z, v),
        };
        z.iter().zip(v).map(|(z, v)| z + s * v).collect()
    }

    /// The generating vector field at `z`.
    pub fn field(&self, z: &[C]) -> Vec<C> {
        let p = self.profile_at(z);
        let s = match self.kind {
            Kind::Shear => p,
            Kind::Overshear => p * inner(z, self.direction.v()),
        };
        self.direction.v().iter().map(|v| s * v).collect()
    }

    /// The field as a polynomial vector field on ℂⁿ, if the profile is polynomial.
    pub fn field_poly(&self) -> Option<PolyVectorField> {
        let Profile::Polynomial(p) = &self.profile else {
            return None;
        };
        let mut s = p.substitute_linear(&self.direction.projection_forms());
        if self.kind == Kind::Overshear {
            let conj_v: Vec<C> = self.direction.v().iter().map(|c| c.conj()).collect();
            s = &s * &CPolynomial::linear_form(&conj_v);
        }
        Some(PolyVectorField::along(&s, self.direction.v()))
    }

    /// Complex Jacobian determinant of the time-`t` map, in closed form.
    pub fn jacobian_det(&self, t: f64, z: &[C]) -> C {
        match self.kind {
            Kind::Shear => C::new(1.0, 0.0),
            Kind::Overshear => (self.profile_at(z) * t).exp(),
        }
    }
}
