//! Decomposition of polynomial vector fields into shear and overshear fields
//! whose directions stay close to a prescribed vector.

mod basis;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::polyalg::{monomials_of_degree, PolyVectorField};
use crate::shears::{Direction, Kind, ShearGenerator};

pub use basis::{
    build_basis, dim_vk, field_coefficients, field_from_coefficients, shear_span_dim,
    BasisCandidate, Descriptor, DEFAULT_RETRIES, DEFAULT_SEED,
};

type C = Complex64;

/// Coefficients at or below this size are dropped from a decomposition.
pub const DROP_TOL: f64 = 1e-13;
/// Acceptance ladder for the relative reconstruction residual.
pub const TOL_LADDER: [f64; 2] = [1e-10, 1e-8];
/// Fresh-draw retries for the divergence-free solve.
const DIV_FREE_REDRAWS: u64 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub generator: ShearGenerator,
    pub coefficient: C,
}

/// `X ≈ Σ coefficient·field(generator)` for one homogeneous degree.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub degree: usize,
    pub terms: Vec<Term>,
    /// Max-norm of the coefficient table of the reconstruction error.
    pub residual: f64,
    /// Rung of [`TOL_LADDER`] the residual met, relative to `1 + ‖X‖`.
    pub tolerance: f64,
    pub divergence_free: bool,
    pub condition: f64,
    pub shear_count: usize,
    pub overshear_count: usize,
}

impl Decomposition {
    pub fn reconstruct(&self, n: usize) -> PolyVectorField {
        self.terms.iter().fold(PolyVectorField::zero(n), |acc, t| {
            acc.add(
                &t.generator
                    .field_poly()
                    .expect("polynomial profile")
                    .scale(t.coefficient),
            )
        })
    }

    /// Generators with the coefficient folded into the profile.
    pub fn scaled_generators(&self) -> Vec<ShearGenerator> {
        self.terms
            .iter()
            .map(|t| t.generator.scaled(t.coefficient))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivFreeMode {
    /// Shear-only when the divergence vanishes identically.
    #[default]
    Auto,
    /// Always shear-only; fails if the field is not divergence-free.
    Force,
    Off,
}

#[derive(Clone, Copy, Debug)]
pub struct DecompOptions {
    pub seed: u64,
    pub retries: usize,
    pub div_free: DivFreeMode,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions {
            seed: DEFAULT_SEED,
            retries: DEFAULT_RETRIES,
            div_free: DivFreeMode::Auto,
        }
    }
}

fn check_homogeneous(x: &PolyVectorField, k: usize) -> Result<()> {
    if x.sub(&x.homogeneous_part(k as u32)).is_zero() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "field is not homogeneous of degree {k}"
        )))
    }
}

fn residual_of(x: &PolyVectorField, terms: &[Term]) -> f64 {
    let n = x.n_vars();
    let rec = terms.iter().fold(PolyVectorField::zero(n), |acc, t| {
        acc.add(
            &t.generator
                .field_poly()
                .expect("polynomial profile")
                .scale(t.coefficient),
        )
    });
    rec.sub(x).max_abs_coeff()
}

fn ladder_rung(residual: f64, xnorm: f64) -> Option<f64> {
    TOL_LADDER
        .into_iter()
        .find(|&t| residual <= t * (1.0 + xnorm))
}

fn collect_terms(gens: &[ShearGenerator], coef: &DVector<C>) -> Vec<Term> {
    gens.iter()
        .zip(coef.iter())
        .filter(|(_, c)| c.norm() > DROP_TOL)
        .map(|(g, &c)| Term {
            generator: g.clone(),
            coefficient: c,
        })
        .collect()
}

fn counts(terms: &[Term]) -> (usize, usize) {
    let s = terms
        .iter()
        .filter(|t| t.generator.kind() == Kind::Shear)
        .count();
    (s, terms.len() - s)
}

/// Solves for the coefficients of homogeneous `x` in `basis` with
/// column-pivoted QR and two refinement sweeps.
pub fn decompose(x: &PolyVectorField, basis: &BasisCandidate) -> Result<Decomposition> {
    let k = basis.k;
    if x.n_vars() != basis.n {
        return Err(Error::DimensionMismatch {
            expected: basis.n,
            got: x.n_vars(),
        });
    }
    check_homogeneous(x, k)?;
    let empty = |residual| Decomposition {
        degree: k,
        terms: Vec::new(),
        residual,
        tolerance: TOL_LADDER[0],
        divergence_free: true,
        condition: basis.condition,
        shear_count: 0,
        overshear_count: 0,
    };
    if x.is_zero() {
        return Ok(empty(0.0));
    }
    let monos = monomials_of_degree(basis.n, k as u32);
    let b = DVector::from_vec(field_coefficients(x, &monos));
    let qr = basis.matrix.clone().col_piv_qr();
    let mut coef = qr.solve(&b).ok_or(Error::SingularSystem {
        residual: f64::INFINITY,
    })?;
    for _ in 0..2 {
        let r = &b - &basis.matrix * &coef;
        match qr.solve(&r) {
            Some(d) => coef += d,
            None => break,
        }
    }
    let terms = collect_terms(&basis.generators, &coef);
    let residual = residual_of(x, &terms);
    let tolerance =
        ladder_rung(residual, x.max_abs_coeff()).ok_or(Error::SingularSystem { residual })?;
    let (shear_count, overshear_count) = counts(&terms);
    Ok(Decomposition {
        degree: k,
        terms,
        residual,
        tolerance,
        divergence_free: overshear_count == 0,
        condition: basis.condition,
        shear_count,
        overshear_count,
    })
}

/// Least-squares fit of homogeneous `x` by the shear columns of `basis` alone.
pub fn decompose_shear_only(x: &PolyVectorField, basis: &BasisCandidate) -> Result<Decomposition> {
    let k = basis.k;
    check_homogeneous(x, k)?;
    let monos = monomials_of_degree(basis.n, k as u32);
    let cols: Vec<usize> = (0..basis.len())
        .filter(|&j| basis.generators[j].kind() == Kind::Shear)
        .collect();
    let gens: Vec<ShearGenerator> = cols.iter().map(|&j| basis.generators[j].clone()).collect();
    let a = DMatrix::from_fn(basis.matrix.nrows(), cols.len(), |r, c| {
        basis.matrix[(r, cols[c])]
    });
    let b = DMatrix::from_column_slice(a.nrows(), 1, &field_coefficients(x, &monos));
    let mut coef = lstsq(&a, &b, 1e-13);
    let r = &b - &a * &coef;
    coef += lstsq(&a, &r, 1e-13);
    let coef = DVector::from_column_slice(coef.as_slice());
    let terms = collect_terms(&gens, &coef);
    let residual = residual_of(x, &terms);
    let Some(tolerance) = ladder_rung(residual, x.max_abs_coeff()) else {
        return Err(Error::DegenerateBasis(format!(
            "divergence-free decomposition infeasible in degree {k}: best shear-only residual {residual:e}"
        )));
    };
    Ok(Decomposition {
        degree: k,
        shear_count: terms.len(),
        overshear_count: 0,
        terms,
        residual,
        tolerance,
        divergence_free: true,
        condition: basis.condition,
    })
}

/// Decomposes every nonzero homogeneous part of `x`, lowest degree first.
///
/// Divergence-free fields (or all fields under [`DivFreeMode::Force`]) are
/// solved with shear columns only; an infeasible shear-only solve is retried
/// with fresh draws before failing.
pub fn decompose_full(
    x: &PolyVectorField,
    v: &Direction,
    eps: f64,
    opts: &DecompOptions,
) -> Result<Vec<Decomposition>> {
    let max_deg = x.degree().max(0) as usize;
    Decomposer::new(v, eps, *opts, max_deg)?.decompose(x)
}

/// Reusable [`decompose_full`] with one basis per degree built up front.
#[derive(Clone, Debug)]
pub struct Decomposer {
    v: Direction,
    eps: f64,
    opts: DecompOptions,
    bases: Vec<BasisCandidate>,
}

impl Decomposer {
    pub fn new(v: &Direction, eps: f64, opts: DecompOptions, max_degree: usize) -> Result<Self> {
        let bases = (0..=max_degree)
            .map(|k| build_basis(v, k, eps, opts.seed, opts.retries))
            .collect::<Result<_>>()?;
        Ok(Decomposer {
            v: v.clone(),
            eps,
            opts,
            bases,
        })
    }

    pub fn bases(&self) -> &[BasisCandidate] {
        &self.bases
    }

    fn basis(&self, k: usize, redraw: u64) -> Result<std::borrow::Cow<'_, BasisCandidate>> {
        if redraw == 0 && k < self.bases.len() {
            return Ok(std::borrow::Cow::Borrowed(&self.bases[k]));
        }
        let seed = self
            .opts
            .seed
            .wrapping_add(redraw.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        build_basis(&self.v, k, self.eps, seed, self.opts.retries).map(std::borrow::Cow::Owned)
    }

    pub fn decompose(&self, x: &PolyVectorField) -> Result<Vec<Decomposition>> {
        let shear_only = match self.opts.div_free {
            DivFreeMode::Auto => x.divergence().is_zero(),
            DivFreeMode::Force => true,
            DivFreeMode::Off => false,
        };
        let mut out = Vec::new();
        for k in 0..=x.degree().max(-1) {
            let part = x.homogeneous_part(k as u32);
            if part.is_zero() {
                continue;
            }
            let k = k as usize;
            if !shear_only {
                out.push(decompose(&part, &*self.basis(k, 0)?)?);
                continue;
            }
            let mut last = None;
            for redraw in 0..DIV_FREE_REDRAWS {
                let r = decompose_shear_only(&part, &*self.basis(k, redraw)?);
                let ok = r.is_ok();
                last = Some(r);
                if ok {
                    break;
                }
            }
            out.push(last.expect("at least one draw")?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{CPolynomial, Monomial};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn v_near_e1() -> Direction {
        Direction::new(vec![c(1.0, 0.0), c(0.02, -0.01)]).unwrap()
    }

    fn mono(n: usize, e: &[u32], a: C) -> CPolynomial {
        CPolynomial::monomial(n, Monomial(e.to_vec()), a)
    }

    fn random_homogeneous(rng: &mut ChaCha8Rng, n: usize, k: usize) -> PolyVectorField {
        let monos = monomials_of_degree(n, k as u32);
        let coefs: Vec<C> = (0..n * monos.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        field_from_coefficients(n, &monos, &coefs)
    }

    /// Sum over pairs of `(∂h/∂z_j) e_i − (∂h/∂z_i) e_j`, which is divergence-free.
    fn random_div_free(rng: &mut ChaCha8Rng, n: usize, k: usize) -> PolyVectorField {
        let mut x = PolyVectorField::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                let monos = monomials_of_degree(n, k as u32 + 1);
                let hp = CPolynomial::from_terms(
                    n,
                    monos
                        .into_iter()
                        .map(|m| (m, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
                )
                .unwrap();
                let mut comps = vec![CPolynomial::zero(n); n];
                comps[i] = hp.partial(j);
                comps[j] = hp.partial(i).scale(c(-1.0, 0.0));
                x = x.add(&PolyVectorField::new(comps).unwrap());
            }
        }
        x
    }

    #[test]
    fn shear_type_field_reconstructs() {
        let x = PolyVectorField::new(vec![mono(2, &[0, 1], c(1.0, 0.0)), CPolynomial::zero(2)])
            .unwrap();
        let basis = build_basis(&v_near_e1(), 1, 0.05, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        let d = decompose(&x, &basis).unwrap();
        assert!(d.residual <= 1e-10);
        assert!((d.reconstruct(2).sub(&x)).max_abs_coeff() <= 1e-10);
    }

    #[test]
    fn euler_field_needs_overshears() {
        let x = PolyVectorField::new(vec![
            mono(2, &[1, 0], c(1.0, 0.0)),
            mono(2, &[0, 1], c(1.0, 0.0)),
        ])
        .unwrap();
        let basis = build_basis(&v_near_e1(), 1, 0.05, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        let d = decompose(&x, &basis).unwrap();
        assert!(d.residual <= 1e-10);
        assert!(d.overshear_count > 0);
    }

    #[test]
    fn zero_field_gives_empty_decomposition() {
        let basis = build_basis(&v_near_e1(), 2, 0.1, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        let d = decompose(&PolyVectorField::zero(2), &basis).unwrap();
        assert!(d.terms.is_empty());
        assert_eq!(d.residual, 0.0);
        assert!(decompose_full(
            &PolyVectorField::zero(2),
            &v_near_e1(),
            0.1,
            &DecompOptions::default()
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn inhomogeneous_input_rejected() {
        let x = PolyVectorField::new(vec![
            mono(2, &[0, 2], c(1.0, 0.0)),
            CPolynomial::constant(2, c(1.0, 0.0)),
        ])
        .unwrap();
        let basis = build_basis(&v_near_e1(), 2, 0.1, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        assert!(decompose(&x, &basis).is_err());
    }

    #[test]
    fn full_decomposition_splits_by_degree() {
        let x = PolyVectorField::new(vec![
            &mono(2, &[0, 2], c(1.0, 0.0)) + &CPolynomial::constant(2, c(0.5, 0.5)),
            CPolynomial::zero(2),
        ])
        .unwrap();
        let ds = decompose_full(&x, &v_near_e1(), 0.1, &DecompOptions::default()).unwrap();
        assert_eq!(ds.iter().map(|d| d.degree).collect::<Vec<_>>(), vec![0, 2]);
        let rec = ds
            .iter()
            .fold(PolyVectorField::zero(2), |a, d| a.add(&d.reconstruct(2)));
        assert!(rec.sub(&x).max_abs_coeff() <= 1e-10);
    }

    #[test]
    fn divergence_free_field_uses_shears_only() {
        let x = PolyVectorField::new(vec![
            mono(2, &[1, 0], c(1.0, 0.0)),
            mono(2, &[0, 1], c(-1.0, 0.0)),
        ])
        .unwrap();
        let ds = decompose_full(&x, &v_near_e1(), 0.1, &DecompOptions::default()).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(ds[0].divergence_free);
        assert_eq!(ds[0].overshear_count, 0);
        assert!(ds[0].residual <= 1e-10);
    }

    #[test]
    fn forced_divergence_free_mode_rejects_euler_field() {
        let x = PolyVectorField::new(vec![
            mono(2, &[1, 0], c(1.0, 0.0)),
            mono(2, &[0, 1], c(1.0, 0.0)),
        ])
        .unwrap();
        let opts = DecompOptions {
            div_free: DivFreeMode::Force,
            ..DecompOptions::default()
        };
        let err = decompose_full(&x, &v_near_e1(), 0.1, &opts).unwrap_err();
        assert!(err.to_string().starts_with("DEGENERATE_BASIS"), "{err}");
        // The best shear-only fit stays far from the field.
        let basis = build_basis(&v_near_e1(), 1, 0.1, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        let a = DMatrix::from_fn(4, basis.shear_count(), |r, c| basis.matrix[(r, c)]);
        let b =
            DMatrix::from_column_slice(4, 1, &field_coefficients(&x, &monomials_of_degree(2, 1)));
        let coef = lstsq(&a, &b, 1e-13);
        assert!((&b - &a * coef).norm() > 0.1);
    }

    #[test]
    fn random_fields_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, k) in [(2, 2), (3, 3)] {
            let v = Direction::new(
                (0..n)
                    .map(|i| c(if i == 0 { 1.0 } else { 0.1 }, 0.0))
                    .collect(),
            )
            .unwrap();
            let basis = build_basis(&v, k, 0.3, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
            for _ in 0..10 {
                let x = random_homogeneous(&mut rng, n, k);
                let d = decompose(&x, &basis).unwrap();
                assert!(d.residual <= 1e-10 * (1.0 + x.max_abs_coeff()));
                let x = random_div_free(&mut rng, n, k);
                assert!(x.divergence().max_abs_coeff() < 1e-14);
                let d = decompose_shear_only(&x, &basis).unwrap();
                assert!(d.residual <= 1e-10 * (1.0 + x.max_abs_coeff()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn directions_stay_in_ball(seed in any::<u64>(), n in 2usize..4, k in 0usize..3, eps in 0.02f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = Direction::new((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap();
            let basis = build_basis(&v, k, eps, seed, DEFAULT_RETRIES).unwrap();
            prop_assert_eq!(basis.len(), dim_vk(n, k));
            for g in &basis.generators {
                prop_assert!(v.distance(g.direction().v()) < eps);
            }
        }
    }
}
