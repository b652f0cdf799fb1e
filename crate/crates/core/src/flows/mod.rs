//! Time-dependent fields from isotopies, polynomial field fitting, and
//! splitting of flows into words of exactly integrated generators.

mod fit;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{field_from_coefficients, DecompOptions, Decomposer};
use crate::error::{Error, Result};
use crate::ode::rk4_to_tolerance;
use crate::polyalg::{monomials_up_to, PolyVectorField};
use crate::shears::{norm, AutomorphismWord, Direction};

pub use fit::{fit_polynomial_field, fit_polynomial_samples, FieldFit};

type C = Complex64;

pub type MapFn = Arc<dyn Fn(f64, &[C]) -> Vec<C> + Send + Sync>;
pub type InverseFn = Arc<dyn Fn(f64, &[C]) -> Option<Vec<C>> + Send + Sync>;

/// Step of the t-differences in [`field_from_isotopy`].
pub const DT_STEP: f64 = 1e-3;

/// An isotopy `ψ_t` sampled on a t-grid, with inverses.
#[derive(Clone)]
pub struct IsotopySpec {
    t_grid: Vec<f64>,
    map: MapFn,
    inverse: InverseFn,
    order: u32,
}

impl IsotopySpec {
    pub fn new(t_grid: Vec<f64>, map: MapFn, inverse: InverseFn, order: u32) -> Result<Self> {
        if t_grid.len() < 2 {
            return Err(Error::InvalidInput(
                "t-grid needs at least two nodes".into(),
            ));
        }
        if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "t-grid must be strictly increasing".into(),
            ));
        }
        Ok(IsotopySpec {
            t_grid,
            map,
            inverse,
            order,
        })
    }

    /// Uniform grid `0, 1/m, …, 1`.
    pub fn uniform_grid(m: usize) -> Vec<f64> {
        (0..=m).map(|i| i as f64 / m as f64).collect()
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eval(&self, t: f64, z: &[C]) -> Vec<C> {
        (self.map)(t, z)
    }

    pub fn inverse(&self, t: f64, z: &[C]) -> Option<Vec<C>> {
        (self.inverse)(t, z)
    }

    /// Largest deviation of `ψ_{t₀}` from the identity on `samples`.
    pub fn start_defect(&self, samples: &[Vec<C>]) -> f64 {
        samples
            .iter()
            .map(|z| max_diff(&self.eval(self.t_grid[0], z), z))
            .fold(0.0, f64::max)
    }
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Field values at one t-node: a fitted polynomial field or raw samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeField {
    Polynomial(PolyVectorField),
    Sampled {
        points: Vec<Vec<C>>,
        values: Vec<Vec<C>>,
    },
}

/// Vector field `X(t, z)` given at t-nodes and linearly interpolated in `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeDependentField {
    times: Vec<f64>,
    nodes: Vec<NodeField>,
    radius: f64,
}

impl TimeDependentField {
    pub fn new(times: Vec<f64>, nodes: Vec<NodeField>, radius: f64) -> Result<Self> {
        if times.len() != nodes.len() || times.is_empty() {
            return Err(Error::InvalidInput(
                "one node field per time is required".into(),
            ));
        }
        Ok(TimeDependentField {
            times,
            nodes,
            radius,
        })
    }

    /// The same polynomial field at every time in `[0, 1]`.
    pub fn constant(x: PolyVectorField, radius: f64) -> Self {
        TimeDependentField {
            times: vec![0.0, 1.0],
            nodes: vec![NodeField::Polynomial(x.clone()), NodeField::Polynomial(x)],
            radius,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[NodeField] {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Replaces sampled nodes by least-squares polynomial fits.
    /// Returns the field and the largest sample residual.
    pub fn fit(&self, degree: u32, ridge: f64) -> Result<(Self, f64)> {
        let fits: Vec<Result<(NodeField, f64)>> = self
            .nodes
            .par_iter()
            .map(|node| match node {
                NodeField::Polynomial(p) => Ok((NodeField::Polynomial(p.clone()), 0.0)),
                NodeField::Sampled { points, values } => {
                    let f = fit_polynomial_samples(points, values, degree, ridge)?;
                    Ok((NodeField::Polynomial(f.field), f.max_residual))
                }
            })
            .collect();
        let mut nodes = Vec::with_capacity(fits.len());
        let mut worst: f64 = 0.0;
        for f in fits {
            let (n, r) = f?;
            nodes.push(n);
            worst = worst.max(r);
        }
        Ok((
            TimeDependentField {
                times: self.times.clone(),
                nodes,
                radius: self.radius,
            },
            worst,
        ))
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let m = self.times.len();
        if m == 1 || t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[m - 1] {
            return (m - 2, 1.0);
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        (i, w)
    }

    fn poly(&self, i: usize) -> Result<&PolyVectorField> {
        match &self.nodes[i] {
            NodeField::Polynomial(p) => Ok(p),
            NodeField::Sampled { .. } => Err(Error::InvalidInput(
                "node field is sampled; fit a polynomial field first".into(),
            )),
        }
    }

    /// Polynomial field frozen at time `t`.
    pub fn poly_at(&self, t: f64) -> Result<PolyVectorField> {
        let (i, w) = self.bracket(t);
        if self.times.len() == 1 {
            return self.poly(0).cloned();
        }
        let a = self.poly(i)?;
        let b = self.poly(i + 1)?;
        Ok(a.scale(C::new(1.0 - w, 0.0)).add(&b.scale(C::new(w, 0.0))))
    }

    /// `X(t, z)` for polynomial nodes.
    pub fn eval(&self, t: f64, z: &[C]) -> Result<Vec<C>> {
        let (i, w) = self.bracket(t);
        let a = self.poly(i)?.eval(z)?;
        if self.times.len() == 1 || w == 0.0 {
            return Ok(a);
        }
        let b = self.poly(i + 1)?.eval(z)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect())
    }

    /// Reference time-`[t0, t1]` flow by RK4 at tolerance `tol`.
    pub fn reference_flow(&self, z: &[C], t0: f64, t1: f64, tol: f64) -> Result<Vec<C>> {
        self.poly(0)?;
        let f = |t: f64, z: &[C]| self.eval(t, z).expect("polynomial nodes checked");
        // Integrate node interval by node interval so the kinks in t are resolved.
        let mut cuts: Vec<f64> = vec![t0];
        cuts.extend(self.times.iter().copied().filter(|&s| s > t0 && s < t1));
        cuts.push(t1);
        let mut z = z.to_vec();
        for w in cuts.windows(2) {
            z = rk4_to_tolerance(&f, &z, w[0], w[1], tol).0;
        }
        Ok(z)
    }
}

/// Derivative of `s ↦ ψ_s(y)` at `t`, fourth order, one-sided near the ends of `[lo, hi]`.
fn time_derivative(iso: &IsotopySpec, t: f64, y: &[C], lo: f64, hi: f64) -> Vec<C> {
    let h = DT_STEP;
    let f = |s: f64| iso.eval(s, y);
    // Weights sum to zero, so differences against the base value are exact
    // for a map that does not move.
    let base = f(t);
    let combine = |pts: &[(f64, f64)], denom: f64| -> Vec<C> {
        let mut acc = vec![C::new(0.0, 0.0); y.len()];
        for &(off, w) in pts {
            if off == 0.0 {
                continue;
            }
            for ((a, v), b) in acc.iter_mut().zip(f(t + off * h)).zip(&base) {
                *a += (v - b) * w;
            }
        }
        acc.iter().map(|a| a / (denom * h)).collect()
    };
    if t - 2.0 * h >= lo && t + 2.0 * h <= hi {
        combine(&[(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)], 12.0)
    } else if t - 2.0 * h < lo {
        combine(
            &[
                (0.0, -25.0),
                (1.0, 48.0),
                (2.0, -36.0),
                (3.0, 16.0),
                (4.0, -3.0),
            ],
            12.0,
        )
    } else {
        combine(
            &[
                (0.0, 25.0),
                (-1.0, -48.0),
                (-2.0, 36.0),
                (-3.0, -16.0),
                (-4.0, 3.0),
            ],
            12.0,
        )
    }
}

/// `X(t_m, z) = d/dt ψ_t(ψ_{t_m}⁻¹(z))` at every t-node and sample point.
pub fn field_from_isotopy(iso: &IsotopySpec, samples: &[Vec<C>]) -> Result<TimeDependentField> {
    let radius = samples.iter().map(|z| norm(z)).fold(0.0, f64::max);
    let nodes = iso
        .t_grid
        .par_iter()
        .map(|&t| {
            Ok(NodeField::Sampled {
                points: samples.to_vec(),
                values: field_at(iso, t, samples)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TimeDependentField::new(iso.t_grid.clone(), nodes, radius)
}

/// The velocity `X(t, z) = (∂_t ψ)(t, ψ_t^{-1}(z))` at each sample.
pub fn field_at(iso: &IsotopySpec, t: f64, samples: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let lo = iso.t_grid[0];
    let hi = *iso.t_grid.last().expect("nonempty grid");
    samples
        .par_iter()
        .map(|z| {
            let y = iso.inverse(t, z).ok_or(Error::InverseFailure { t })?;
            Ok(time_derivative(iso, t, &y, lo, hi))
        })
        .collect()
}

/// Deterministic uniform samples from the closed ball of radius `r` in ℂⁿ.
pub fn ball_samples(n: usize, r: f64, count: usize, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r)))
            .collect();
        if norm(&z) <= r {
            out.push(z);
        }
    }
    out
}

/// Field of degree ≤ `degree` on ℂⁿ with real and imaginary parts of every
/// coefficient uniform in `[−scale, scale]`.
pub fn random_polynomial_field(n: usize, degree: u32, scale: f64, seed: u64) -> PolyVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monos = monomials_up_to(n, degree);
    let coefs: Vec<C> = (0..n * monos.len())
        .map(|_| C::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect();
    field_from_coefficients(n, &monos, &coefs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScheme {
    /// First order; the field is frozen at the left end of each slice.
    #[default]
    Lie,
    /// Second order; frozen at the midpoint and applied forward then backward.
    Strang,
}

/// Approximates the time-1 flow of `x` on `[0, 1]` by `steps` slices, each
/// the composition of the exact flows of a shear/overshear decomposition of
/// the frozen field.
pub fn split_compose(
    x: &TimeDependentField,
    v: &Direction,
    eps: f64,
    steps: usize,
    scheme: SplitScheme,
    opts: &DecompOptions,
) -> Result<AutomorphismWord> {
    split_compose_on(x, v, eps, steps, scheme, opts, 0.0, 1.0)
}

/// [`split_compose`] on the time interval `[t0, t1]`.
#[allow(clippy::too_many_arguments)]
pub fn split_compose_on(
    x: &TimeDependentField,
    v: &Direction,
    eps: f64,
    steps: usize,
    scheme: SplitScheme,
    opts: &DecompOptions,
    t0: f64,
    t1: f64,
) -> Result<AutomorphismWord> {
    if steps == 0 {
        return Err(Error::InvalidInput(
            "splitting needs at least one step".into(),
        ));
    }
    let dt = (t1 - t0) / steps as f64;
    let frozen: Vec<PolyVectorField> = (0..steps)
        .map(|j| {
            let t = t0 + j as f64 * dt;
            match scheme {
                SplitScheme::Lie => x.poly_at(t),
                SplitScheme::Strang => x.poly_at(t + dt / 2.0),
            }
        })
        .collect::<Result<_>>()?;
    let max_deg = frozen.iter().map(|f| f.degree()).max().unwrap_or(-1).max(0) as usize;
    let decomposer = Decomposer::new(v, eps, *opts, max_deg)?;
    let slices = frozen
        .par_iter()
        .map(|f| {
            let gens: Vec<_> = decomposer
                .decompose(f)?
                .iter()
                .flat_map(|d| d.scaled_generators())
                .collect();
            Ok(gens)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut word = AutomorphismWord::empty();
    for gens in slices {
        match scheme {
            SplitScheme::Lie => {
                for g in gens {
                    word.push(g, dt);
                }
            }
            SplitScheme::Strang => {
                for g in &gens {
                    word.push(g.clone(), dt / 2.0);
                }
                for g in gens.into_iter().rev() {
                    word.push(g, dt / 2.0);
                }
            }
        }
    }
    Ok(word)
}

/// Sup over `samples` of the distance between the word and the RK4 flow of `x`.
pub fn sup_error(
    x: &TimeDependentField,
    word: &AutomorphismWord,
    samples: &[Vec<C>],
    tol: f64,
) -> Result<f64> {
    let errs = samples
        .par_iter()
        .map(|z| {
            let a = word.eval(z)?;
            let b = x.reference_flow(z, 0.0, 1.0, tol)?;
            Ok(max_diff(&a, &b))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// One row of a splitting convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub sup_error: f64,
    /// `sup_error` of the previous row divided by this one.
    pub ratio: Option<f64>,
}

/// Splitting error against the RK4 reference for each step count.
pub fn convergence_study(
    x: &TimeDependentField,
    v: &Direction,
    eps: f64,
    steps: &[usize],
    samples: &[Vec<C>],
    opts: &DecompOptions,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in steps {
        let word = split_compose(x, v, eps, n, SplitScheme::Lie, opts)?;
        let e = sup_error(x, &word, samples, 1e-10)?;
        let ratio = rows.last().map(|r| r.sup_error / e);
        rows.push(ConvergenceRow {
            steps: n,
            sup_error: e,
            ratio,
        });
    }
    Ok(rows)
}
