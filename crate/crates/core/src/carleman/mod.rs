//! Constructive Carleman approximation of smooth functions on ℝ by entire functions.
//!
//! The approximant is a telescoping sum: a global Chebyshev polynomial followed
//! by local corrections on the annuli `m−1 ≤ |x| ≤ m`, each a short sum of
//! Gaussian atoms centred in the annulus.

mod approximant;

pub use approximant::{EntireApproximant, Stage};

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::calculus::SmoothMapSample;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::lstsq;

type C = Complex64;

/// Pointwise tolerance `ε(x) > 0` with the window `[−W, W]` on which it is enforced.
#[derive(Clone)]
pub struct ToleranceProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    window: f64,
}

impl ToleranceProfile {
    pub fn new(window: f64, eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        let t = ToleranceProfile { eval, window };
        let n = (window / 1e-2).ceil() as i64;
        for i in -n..=n {
            let x = i as f64 * 1e-2;
            let e = t.eps(x);
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "tolerance must be positive on the window (ε({x}) = {e})"
                )));
            }
        }
        Ok(t)
    }

    pub fn constant(eps: f64, window: f64) -> Result<Self> {
        Self::new(window, Arc::new(move |_| eps))
    }

    pub fn eps(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn window(&self) -> f64 {
        self.window
    }
}

/// `1 − exp(−(x/a)^{2q})`.
pub fn bump_profile(a: f64, q: u32, x: f64) -> f64 {
    -(-(x / a).powi(2 * q as i32)).exp_m1()
}

#[derive(Clone, Debug)]
pub struct CarlemanOptions {
    /// Degree of the global Chebyshev stage.
    pub base_degree: usize,
    /// Fraction of ε a local stage may leave on its fit region.
    pub theta: f64,
    /// Atom spacings tried in order; the atom width equals the spacing.
    pub spacing_ladder: Vec<f64>,
    /// Spacing of the internal fitting/check grid.
    pub spacing: f64,
    /// Spacing of the final acceptance grid.
    pub acceptance_spacing: f64,
}

impl Default for CarlemanOptions {
    fn default() -> Self {
        CarlemanOptions {
            base_degree: 12,
            theta: 0.5,
            spacing_ladder: vec![0.5, 0.35, 0.25, 0.18],
            spacing: 5e-3,
            acceptance_spacing: 1e-2,
        }
    }
}

/// Leak budget of local stage `m` on `[0, m−2]`.
pub fn leak_budget(m: usize, min_eps: f64) -> f64 {
    0.5f64.powi(m as i32 + 2) * min_eps
}

fn target_jets(f: &SmoothMapSample, xs: &[f64], k: usize) -> Result<Vec<Vec<C>>> {
    if f.dim() != 1 || f.m() != 1 {
        return Err(Error::InvalidInput(
            "carleman approximation needs a scalar function on ℝ".into(),
        ));
    }
    xs.iter()
        .map(|&x| {
            (0..=k)
                .map(|j| Ok(f.derivative(&[j as u32], &[x])?.value[0]))
                .collect()
        })
        .collect()
}

fn seminorm_of(d: &[C]) -> f64 {
    d.iter().map(|c| c.norm()).sum()
}

/// Builds an entire `g` with `|g − f|_{k,x} ≤ ε(x)` on the acceptance grid of the window.
pub fn carleman_1d(
    f: &SmoothMapSample,
    k: u32,
    tol: &ToleranceProfile,
    opts: &CarlemanOptions,
) -> Result<EntireApproximant> {
    let k = k as usize;
    let w = tol.window();
    let big_m = w.ceil().max(1.0) as usize;
    let half = (big_m as f64 / opts.spacing).round() as i64;
    let xs: Vec<f64> = (-half..=half).map(|i| i as f64 * opts.spacing).collect();
    let centre = half as usize;
    let target = target_jets(f, &xs, k)?;
    let eps: Vec<f64> = xs.iter().map(|&x| tol.eps(x)).collect();
    let min_eps = eps.iter().copied().fold(f64::INFINITY, f64::min);

    let mut stages = Vec::new();

    // Global polynomial stage on the whole grid.
    let scale = big_m as f64;
    let deg0 = opts.base_degree;
    let a = DMatrix::from_fn(xs.len(), deg0 + 1, |i, j| {
        let t = xs[i] / scale;
        (j as f64 * t.acos()).cos()
    });
    let b = DMatrix::from_fn(xs.len(), 2, |i, c| {
        if c == 0 {
            target[i][0].re
        } else {
            target[i][0].im
        }
    });
    let sol = lstsq(&a, &b, 1e-15);
    let cheb: Vec<C> = (0..=deg0)
        .map(|j| C::new(sol[(j, 0)], sol[(j, 1)]))
        .collect();
    let base = Stage::Polynomial { scale, cheb };
    if !base.is_zero() {
        stages.push(base);
    }

    let mut residual: Vec<Vec<C>> = target.clone();
    let apply = |residual: &mut Vec<Vec<C>>, st: &Stage| {
        for (r, &x) in residual.iter_mut().zip(&xs) {
            let j = st.jet(C::new(x, 0.0), k);
            for (ri, d) in r.iter_mut().zip(j.derivatives()) {
                *ri -= d;
            }
        }
    };
    if let Some(st) = stages.first() {
        apply(&mut residual, st);
    }

    for m in 1..=big_m {
        let lo = (m as f64 - 2.0).max(0.0);
        let hi = m as f64;
        let within = |res: &Vec<Vec<C>>| {
            (0..xs.len())
                .filter(|&i| xs[i].abs() >= lo - 1e-12 && xs[i].abs() <= hi + 1e-12)
                .map(|i| seminorm_of(&res[i]) / eps[i])
                .fold(0.0, f64::max)
        };
        let before = within(&residual);
        if before <= opts.theta {
            continue;
        }
        let budget = leak_budget(m, min_eps);
        let mut best: Option<(f64, f64)> = None;
        let mut accepted = None;
        for &h in &opts.spacing_ladder {
            let st = fit_stage(m, lo, hi, h, k, &xs, centre, &residual, &eps, budget)?;
            let mut trial = residual.clone();
            apply(&mut trial, &st);
            let fit = within(&trial);
            let leak = (0..xs.len())
                .filter(|&i| xs[i].abs() < lo - 1e-12)
                .map(|i| seminorm_of(&st.jet(C::new(xs[i], 0.0), k).derivatives()))
                .fold(0.0, f64::max);
            if fit <= opts.theta && leak <= budget {
                accepted = Some((st.with_record(fit, leak), trial));
                break;
            }
            if best.map_or(true, |(bf, _)| fit < bf) {
                best = Some((fit, leak));
            }
        }
        match accepted {
            Some((st, trial)) => {
                residual = trial;
                stages.push(st);
            }
            None => {
                let (fit, leak) = best.unwrap_or((f64::NAN, f64::NAN));
                return Err(Error::CarlemanStage {
                    annulus: m,
                    detail: format!(
                        "best relative fit {fit:.3e} (target {}), leak {leak:.3e} (budget {budget:.3e})",
                        opts.theta
                    ),
                });
            }
        }
    }

    let g = EntireApproximant::new(stages);
    let grid = acceptance_grid(w, opts.acceptance_spacing);
    let rep = approximant_seminorm_report(&g, f, k as u32, &grid, tol)?;
    if let Some(bad) = rep.rows.iter().find(|r| !r.pass) {
        return Err(Error::CarlemanStage {
            annulus: bad.x.abs().ceil() as usize,
            detail: format!(
                "acceptance failed at x = {}: error {:.3e} > ε {:.3e}",
                bad.x, bad.err, bad.eps
            ),
        });
    }
    Ok(g)
}

pub fn acceptance_grid(window: f64, spacing: f64) -> Vec<f64> {
    let n = (window / spacing).round() as i64;
    (-n..=n).map(|i| i as f64 * spacing).collect()
}

#[allow(clippy::too_many_arguments)]
fn fit_stage(
    m: usize,
    lo: f64,
    hi: f64,
    h: f64,
    k: usize,
    xs: &[f64],
    centre: usize,
    residual: &[Vec<C>],
    eps: &[f64],
    leak: f64,
) -> Result<Stage> {
    // Atoms reach one unit past the annulus; rows stop half-way so the outermost
    // atoms are free to absorb the truncation.
    let start = if lo > 0.0 { lo + ATOM_INSET } else { 0.0 };
    let n_in = ((hi + 1.0 - start) / h).ceil() as i64;
    let centers: Vec<f64> = (0..n_in).map(|j| start + (j as f64 + 0.5) * h).collect();
    let width = WIDTH_RATIO * h;
    let reach = hi + 0.5;
    let idx: Vec<usize> = (centre..xs.len()).filter(|&i| xs[i] <= reach).collect();
    let rows = idx.len() * (k + 1);
    let na = centers.len();
    let mut ae = DMatrix::<f64>::zeros(rows, na);
    let mut ao = DMatrix::<f64>::zeros(rows, na);
    let mut be = DMatrix::<f64>::zeros(rows, 2);
    let mut bo = DMatrix::<f64>::zeros(rows, 2);
    for (r, &i) in idx.iter().enumerate() {
        let x = xs[i];
        let mirror = 2 * centre - i;
        let e_min = eps[i].min(eps[mirror]);
        let (wt, fit) = if x < lo - 1e-12 {
            (1.0 / leak, false)
        } else if x <= hi + 1e-12 {
            (1.0 / e_min, true)
        } else {
            (OUTER_WEIGHT / e_min, true)
        };
        let z = Jet::variable(C::new(x, 0.0), k);
        let (ej, oj) = Stage::atom_jets(width, &centers, &z);
        for a in 0..na {
            let e = ej[a].derivatives();
            let o = oj[a].derivatives();
            for d in 0..=k {
                ae[(r * (k + 1) + d, a)] = e[d].re * wt;
                ao[(r * (k + 1) + d, a)] = o[d].re * wt;
            }
        }
        for d in 0..=k {
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let (re, ro) = if fit {
                let p = residual[i][d];
                let q = residual[mirror][d] * sign;
                ((p + q) * 0.5, (p - q) * 0.5)
            } else {
                (C::new(0.0, 0.0), C::new(0.0, 0.0))
            };
            be[(r * (k + 1) + d, 0)] = re.re * wt;
            be[(r * (k + 1) + d, 1)] = re.im * wt;
            bo[(r * (k + 1) + d, 0)] = ro.re * wt;
            bo[(r * (k + 1) + d, 1)] = ro.im * wt;
        }
    }
    let se = lstsq(&ae, &be, 1e-12);
    let so = lstsq(&ao, &bo, 1e-12);
    Ok(Stage::Atoms {
        annulus: m,
        width,
        centers,
        even: (0..na).map(|j| C::new(se[(j, 0)], se[(j, 1)])).collect(),
        odd: (0..na).map(|j| C::new(so[(j, 0)], so[(j, 1)])).collect(),
        fit_error: 0.0,
        leak: 0.0,
    })
}

/// Relative weight of rows past a stage's annulus; the next stage owns them.
const OUTER_WEIGHT: f64 = 0.1;
const WIDTH_RATIO: f64 = 1.5;
/// Gap between the leak region and the innermost atom.
const ATOM_INSET: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SeminormRow {
    pub x: f64,
    pub err: f64,
    pub eps: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct SeminormReport {
    pub k: u32,
    pub rows: Vec<SeminormRow>,
}

impl SeminormReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_err(&self) -> f64 {
        self.rows.iter().map(|r| r.err).fold(0.0, f64::max)
    }

    /// Largest `err / ε` over the grid.
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.err / r.eps).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,error,eps,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{}",
                r.x,
                r.err,
                r.eps,
                if r.pass { "pass" } else { "fail" }
            );
        }
        s
    }
}

/// Per-point `|g − f|_{k,x}` against `ε(x)`.
pub fn approximant_seminorm_report(
    g: &EntireApproximant,
    f: &SmoothMapSample,
    k: u32,
    grid: &[f64],
    tol: &ToleranceProfile,
) -> Result<SeminormReport> {
    let target = target_jets(f, grid, k as usize)?;
    let rows = grid
        .iter()
        .zip(target)
        .map(|(&x, t)| {
            let d = g.jet(C::new(x, 0.0), k as usize).derivatives();
            let err: f64 = d.iter().zip(&t).map(|(a, b)| (a - b).norm()).sum();
            let eps = tol.eps(x);
            SeminormRow {
                x,
                err,
                eps,
                pass: err <= eps,
            }
        })
        .collect();
    Ok(SeminormReport { k, rows })
}

/// Relative Cauchy–Riemann defect `|∂_y g − i ∂_x g| / (|∂_x g| + |∂_y g|)` by
/// Richardson-extrapolated central differences.
pub fn cauchy_riemann_defect(g: &EntireApproximant, z: C, h: f64) -> f64 {
    let d = |dir: C, h: f64| (g.eval(z + dir * h) - g.eval(z - dir * h)) / (2.0 * h);
    let rich = |dir: C| (d(dir, h / 2.0) * 4.0 - d(dir, h)) / 3.0;
    let gx = rich(C::new(1.0, 0.0));
    let gy = rich(C::new(0.0, 1.0));
    let scale = gx.norm() + gy.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (gy - C::new(0.0, 1.0) * gx).norm() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::CPolynomial;

    fn real_fn(f: fn(f64) -> f64) -> SmoothMapSample {
        SmoothMapSample::new(1, 1, Arc::new(move |x: &[f64]| vec![C::new(f(x[0]), 0.0)]))
    }

    #[test]
    fn bump_values() {
        assert_eq!(bump_profile(1.0, 1, 0.0), 0.0);
        assert!((bump_profile(2.0, 3, 2.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let w = bump_profile(3.0, 8, 2.0);
        let oracle = 1.0 - (-(2.0f64 / 3.0).powi(16)).exp();
        assert!((w - oracle).abs() < 1e-12 * oracle);
        assert!(w <= 1.6e-3);
        assert!(bump_profile(1.0, 2, 3.0) > bump_profile(1.0, 2, 1.5));
    }

    #[test]
    fn zero_input_gives_zero_stages() {
        let f = real_fn(|_| 0.0);
        let tol = ToleranceProfile::constant(1e-3, 3.0).unwrap();
        let g = carleman_1d(&f, 1, &tol, &CarlemanOptions::default()).unwrap();
        assert!(g.stages().is_empty());
        assert_eq!(g.eval(C::new(1.3, 0.7)), C::new(0.0, 0.0));
    }

    #[test]
    fn polynomial_input_is_reproduced() {
        let p = CPolynomial::from_terms(
            1,
            vec![
                (crate::polyalg::Monomial(vec![3]), C::new(0.02, 0.0)),
                (crate::polyalg::Monomial(vec![1]), C::new(-1.0, 0.5)),
                (crate::polyalg::Monomial(vec![0]), C::new(0.25, 0.0)),
            ],
        )
        .unwrap();
        let f = SmoothMapSample::new(
            1,
            1,
            Arc::new({
                let p = p.clone();
                move |x: &[f64]| vec![p.eval_real(x).unwrap()]
            }),
        );
        let tol = ToleranceProfile::constant(1e-3, 4.0).unwrap();
        let g = carleman_1d(&f, 1, &tol, &CarlemanOptions::default()).unwrap();
        assert_eq!(g.stages().len(), 1);
        for &x in &[-3.7, -1.0, 0.0, 0.4, 2.2, 3.9] {
            let a = g.eval(C::new(x, 0.3));
            let b = p.eval(&[C::new(x, 0.3)]).unwrap();
            assert!(
                (a - b).norm() <= 1e-12 * (1.0 + b.norm()),
                "{x}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn lorentzian_within_tolerance() {
        let f = real_fn(|x| 1.0 / (1.0 + x * x));
        let tol = ToleranceProfile::constant(1e-3, 6.0).unwrap();
        let g = carleman_1d(&f, 1, &tol, &CarlemanOptions::default()).unwrap();
        let grid = acceptance_grid(6.0, 1e-2);
        let rep = approximant_seminorm_report(&g, &f, 1, &grid, &tol).unwrap();
        assert!(rep.pass(), "max err {}", rep.max_err());
        for i in 0..20 {
            let z = C::new(-5.5 + 0.55 * i as f64, 0.9 * ((i as f64) * 0.7).sin());
            assert!(cauchy_riemann_defect(&g, z, 1e-3) < 1e-6, "{z}");
        }
    }

    #[test]
    fn shifted_approximant_fails_everywhere() {
        let f = real_fn(|x| x.sin());
        let tol = ToleranceProfile::constant(1e-3, 3.0).unwrap();
        let g = carleman_1d(&f, 0, &tol, &CarlemanOptions::default()).unwrap();
        let shifted = g.plus_constant(C::new(2e-3, 0.0));
        let grid = acceptance_grid(3.0, 1e-2);
        let rep = approximant_seminorm_report(&shifted, &f, 0, &grid, &tol).unwrap();
        assert!(rep.rows.iter().all(|r| !r.pass));
    }

    #[test]
    fn refined_grid_stays_close() {
        let f = real_fn(|x| x.tanh());
        let tol = ToleranceProfile::constant(1e-3, 4.0).unwrap();
        let g = carleman_1d(&f, 1, &tol, &CarlemanOptions::default()).unwrap();
        let coarse =
            approximant_seminorm_report(&g, &f, 1, &acceptance_grid(4.0, 1e-2), &tol).unwrap();
        let fine =
            approximant_seminorm_report(&g, &f, 1, &acceptance_grid(4.0, 1e-3), &tol).unwrap();
        assert!(fine.max_err() <= 2.0 * coarse.max_err());
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        assert!(ToleranceProfile::new(2.0, Arc::new(|x| x)).is_err());
    }
}
