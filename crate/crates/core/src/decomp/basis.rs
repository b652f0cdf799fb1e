use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::polyalg::{monomials_of_degree, CPolynomial, Monomial, PolyVectorField};
use crate::shears::{inner, norm, Direction, Kind, ShearGenerator};

type C = Complex64;

/// Default seed for basis draws.
pub const DEFAULT_SEED: u64 = 0x5EED_0001;
pub const DEFAULT_RETRIES: usize = 50;

/// Relative size below which a candidate is treated as already in the span.
const RANK_TOL: f64 = 1e-9;

/// `dim V_k = n·C(n+k−1, n−1)`.
pub fn dim_vk(n: usize, k: usize) -> usize {
    n * binomial(n + k - 1, n - 1)
}

/// Dimension of the divergence-free part of `V_k`, i.e. the span of shear fields.
pub fn shear_span_dim(n: usize, k: usize) -> usize {
    if k == 0 {
        n
    } else {
        dim_vk(n, k) - binomial(n + k - 2, n - 1)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// One basis element. `lambda` holds the coefficients of the linear form
/// in the ambient coordinates `z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    /// `λ(z)^k · v` with `λ(v) = 0`.
    Shear { lambda: Vec<C>, v: Vec<C> },
    /// `λ̃(z)^(k−1) · ⟨z, w⟩ · w` with `λ̃(w) = 0`.
    Overshear { lambda: Vec<C>, w: Vec<C> },
}

/// A basis of `V_k` made of shear and overshear monomial fields whose
/// directions lie within `eps` of `v`.
#[derive(Clone, Debug)]
pub struct BasisCandidate {
    pub n: usize,
    pub k: usize,
    pub v: Direction,
    pub eps: f64,
    pub descriptors: Vec<Descriptor>,
    pub generators: Vec<ShearGenerator>,
    /// Columns are basis fields over the monomial basis of `V_k`.
    pub matrix: DMatrix<C>,
    pub condition: f64,
    pub attempts: usize,
}

impl BasisCandidate {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn shear_count(&self) -> usize {
        self.count(Kind::Shear)
    }

    pub fn overshear_count(&self) -> usize {
        self.count(Kind::Overshear)
    }

    fn count(&self, kind: Kind) -> usize {
        self.generators.iter().filter(|g| g.kind() == kind).count()
    }

    /// Largest `‖v_i − v‖` over the basis directions.
    pub fn max_direction_offset(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| self.v.distance(g.direction().v()))
            .fold(0.0, f64::max)
    }

    /// Largest `|λ(v_i)|` over the descriptors.
    pub fn max_kernel_defect(&self) -> f64 {
        self.descriptors
            .iter()
            .map(|d| match d {
                Descriptor::Shear { lambda, v } => apply_form(lambda, v).norm(),
                Descriptor::Overshear { lambda, w } => apply_form(lambda, w).norm(),
            })
            .fold(0.0, f64::max)
    }
}

fn apply_form(lambda: &[C], z: &[C]) -> C {
    lambda.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// Coefficient vector of a homogeneous degree-`k` field, component-major
/// over the graded-lex monomials of degree `k`.
pub fn field_coefficients(x: &PolyVectorField, monos: &[Monomial]) -> Vec<C> {
    x.components()
        .iter()
        .flat_map(|p| monos.iter().map(move |m| p.coeff(m)))
        .collect()
}

/// Inverse of [`field_coefficients`].
pub fn field_from_coefficients(n: usize, monos: &[Monomial], c: &[C]) -> PolyVectorField {
    let m = monos.len();
    let comps = (0..n)
        .map(|i| {
            CPolynomial::from_terms(
                n,
                monos
                    .iter()
                    .cloned()
                    .zip(c[i * m..(i + 1) * m].iter().copied()),
            )
            .expect("monomials match n")
        })
        .collect();
    PolyVectorField::new(comps).expect("n components in n variables")
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    loop {
        let z: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let r = norm(&z);
        if r > 0.1 && r <= 1.0 {
            return z.iter().map(|c| c / r).collect();
        }
    }
}

/// A direction strictly inside the `eps`-ball around `v`, perturbed along
/// `v^⊥` towards the outer part of the ball where the spread is largest.
fn random_direction(rng: &mut ChaCha8Rng, v: &Direction, eps: f64) -> Direction {
    loop {
        let a = random_unit(rng, v.n() - 1);
        let r = eps * rng.gen_range(0.6..0.95);
        let mut cand = v.v().to_vec();
        for (al, b) in a.iter().zip(v.basis()) {
            for (c, bi) in cand.iter_mut().zip(b) {
                *c += al * bi * r;
            }
        }
        if let Ok(d) = Direction::new(cand) {
            if v.distance(d.v()) < eps {
                return d;
            }
        }
    }
}

struct Candidate {
    descriptor: Descriptor,
    generator: ShearGenerator,
    column: Vec<C>,
}

/// Builds the candidate field with a random linear form vanishing on `u`.
fn make_candidate(
    rng: &mut ChaCha8Rng,
    kind: Kind,
    u: Direction,
    k: usize,
    monos: &[Monomial],
) -> Candidate {
    let n = u.n();
    let a = random_unit(rng, n - 1);
    let w_form = CPolynomial::linear_form(&a);
    let power = match kind {
        Kind::Shear => k,
        Kind::Overshear => k - 1,
    } as u32;
    let profile = w_form.pow(power);
    let generator =
        ShearGenerator::new(kind, u.clone(), crate::shears::Profile::Polynomial(profile))
            .expect("profile has n - 1 variables");
    // λ(z) = Σ_l a_l ⟨z, B_l⟩.
    let forms = u.projection_forms();
    let lambda: Vec<C> = (0..n)
        .map(|i| (0..n - 1).map(|l| a[l] * forms[l][i]).sum())
        .collect();
    let descriptor = match kind {
        Kind::Shear => Descriptor::Shear {
            lambda,
            v: u.v().to_vec(),
        },
        Kind::Overshear => Descriptor::Overshear {
            lambda,
            w: u.v().to_vec(),
        },
    };
    let column = field_coefficients(&generator.field_poly().expect("polynomial profile"), monos);
    Candidate {
        descriptor,
        generator,
        column,
    }
}

/// Greedy pivoted Gram–Schmidt: repeatedly takes the candidate with the
/// largest component outside the current span, up to `limit` picks.
fn greedy_select(
    pool: &[Candidate],
    basis: &mut Vec<Vec<C>>,
    chosen: &mut Vec<usize>,
    offset: usize,
    limit: usize,
) {
    let mut resid: Vec<Vec<C>> = pool.iter().map(|c| c.column.clone()).collect();
    let scale: Vec<f64> = pool.iter().map(|c| norm(&c.column)).collect();
    for q in basis.iter() {
        for r in resid.iter_mut() {
            project_out(r, q);
        }
    }
    let mut taken = vec![false; pool.len()];
    for _ in 0..limit {
        let best = (0..pool.len())
            .filter(|&i| !taken[i] && scale[i] > 0.0)
            .map(|i| (i, norm(&resid[i]) / scale[i]))
            .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
                Some((_, br)) if br >= r => acc,
                _ => Some((i, r)),
            });
        let Some((i, rel)) = best else { break };
        if rel <= RANK_TOL {
            break;
        }
        taken[i] = true;
        // Re-orthogonalize the chosen residual before normalizing.
        let mut q = resid[i].clone();
        for b in basis.iter() {
            project_out(&mut q, b);
        }
        let r = norm(&q);
        let q: Vec<C> = q.iter().map(|c| c / r).collect();
        for (j, rj) in resid.iter_mut().enumerate() {
            if !taken[j] {
                project_out(rj, &q);
            }
        }
        basis.push(q);
        chosen.push(offset + i);
    }
}

fn project_out(x: &mut [C], q: &[C]) {
    let c = inner(x, q);
    for (a, b) in x.iter_mut().zip(q) {
        *a -= c * b;
    }
}

/// Builds a full-rank basis of `V_k` from shear and overshear monomial fields
/// with directions inside the open `eps`-ball around `v`.
///
/// Directions and linear forms are drawn from separate streams of a seeded
/// generator. The first shear candidate uses `v` itself. Shear candidates are
/// selected first; overshears only fill the remaining rank.
pub fn build_basis(
    v: &Direction,
    k: usize,
    eps: f64,
    seed: u64,
    retries: usize,
) -> Result<BasisCandidate> {
    let n = v.n();
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(
            "direction radius must be positive".into(),
        ));
    }
    let dim = dim_vk(n, k);
    let n_shear = shear_span_dim(n, k);
    let monos = monomials_of_degree(n, k as u32);
    let mut best_rank = 0;
    for attempt in 0..retries.max(1) {
        let mut dir_rng = ChaCha8Rng::seed_from_u64(seed);
        dir_rng.set_stream(2 * attempt as u64);
        let mut form_rng = ChaCha8Rng::seed_from_u64(seed);
        form_rng.set_stream(2 * attempt as u64 + 1);

        let shear_pool: Vec<Candidate> = (0..2 * n_shear + 2)
            .map(|i| {
                let u = if i == 0 && attempt == 0 {
                    v.clone()
                } else {
                    random_direction(&mut dir_rng, v, eps)
                };
                make_candidate(&mut form_rng, Kind::Shear, u, k, &monos)
            })
            .collect();
        let n_over = dim - n_shear;
        let over_pool: Vec<Candidate> = (0..if n_over > 0 { 2 * n_over + 2 } else { 0 })
            .map(|_| {
                let u = random_direction(&mut dir_rng, v, eps);
                make_candidate(&mut form_rng, Kind::Overshear, u, k, &monos)
            })
            .collect();

        let mut q = Vec::with_capacity(dim);
        let mut chosen = Vec::with_capacity(dim);
        greedy_select(&shear_pool, &mut q, &mut chosen, 0, n_shear);
        let rest = dim - chosen.len();
        greedy_select(&over_pool, &mut q, &mut chosen, shear_pool.len(), rest);
        best_rank = best_rank.max(chosen.len());
        if chosen.len() < dim {
            continue;
        }
        let pick = |i: usize| -> &Candidate {
            if i < shear_pool.len() {
                &shear_pool[i]
            } else {
                &over_pool[i - shear_pool.len()]
            }
        };
        let matrix = DMatrix::from_fn(dim, dim, |r, c| pick(chosen[c]).column[r]);
        let condition = condition_number(&matrix);
        if !condition.is_finite() {
            continue;
        }
        return Ok(BasisCandidate {
            n,
            k,
            v: v.clone(),
            eps,
            descriptors: chosen.iter().map(|&i| pick(i).descriptor.clone()).collect(),
            generators: chosen.iter().map(|&i| pick(i).generator.clone()).collect(),
            matrix,
            condition,
            attempts: attempt + 1,
        });
    }
    Err(Error::BasisFailure {
        n,
        k,
        attempts: retries.max(1),
        best_rank,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near_e1(n: usize) -> Direction {
        let mut v = vec![C::new(0.0, 0.0); n];
        v[0] = C::new(1.0, 0.0);
        v[1] = C::new(0.05, 0.02);
        Direction::new(v).unwrap()
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(dim_vk(2, 0), 2);
        assert_eq!(dim_vk(2, 1), 4);
        assert_eq!(dim_vk(3, 2), 18);
        assert_eq!(shear_span_dim(2, 1), 3);
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn constant_basis_uses_shears() {
        let b = build_basis(&near_e1(2), 0, 0.3, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.shear_count(), 2);
        assert!(b.max_direction_offset() < 0.3);
    }

    #[test]
    fn small_bases_are_full_rank() {
        for (n, k) in [(2, 1), (3, 2), (2, 3)] {
            let b = build_basis(&near_e1(n), k, 0.3, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
            assert_eq!(b.len(), dim_vk(n, k));
            // Independent rank check via the SVD of the column matrix.
            let sv = b.matrix.singular_values();
            let smax = sv.max();
            assert!(sv.iter().all(|&s| s > 1e-12 * smax));
            assert!(b.condition.is_finite());
            assert!(b.max_kernel_defect() <= 1e-12);
            assert!(b.max_direction_offset() < 0.3);
            assert_eq!(b.shear_count(), shear_span_dim(n, k));
        }
    }

    #[test]
    fn shear_elements_are_divergence_free() {
        let b = build_basis(&near_e1(3), 2, 0.3, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        for g in &b.generators {
            let div = g.field_poly().unwrap().divergence();
            match g.kind() {
                Kind::Shear => assert!(div.max_abs_coeff() < 1e-14),
                Kind::Overshear => assert!(div.max_abs_coeff() > 1e-6),
            }
        }
    }

    #[test]
    fn same_seed_same_basis() {
        let a = build_basis(&near_e1(3), 2, 0.1, 17, 5).unwrap();
        let b = build_basis(&near_e1(3), 2, 0.1, 17, 5).unwrap();
        assert_eq!(a.generators, b.generators);
    }

    #[test]
    fn shrinking_radius_still_succeeds() {
        let v = near_e1(2);
        let a = build_basis(&v, 2, 0.3, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        let b = build_basis(&v, 2, 0.03, DEFAULT_SEED, DEFAULT_RETRIES).unwrap();
        assert!(b.max_direction_offset() < 0.03);
        assert!(b.condition >= a.condition * 0.1);
    }
}
