//! Pointwise C^k seminorms, ∂̄-flatness diagnostics and almost-analytic extension.

pub mod fd;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polyalg::{monomials_up_to, CPolynomial, Monomial};

type C = Complex64;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<C> + Send + Sync>;
/// Exact derivative oracle: `(point, multi-index)`; `None` falls back to finite differences.
pub type DerivEvaluator = Arc<dyn Fn(&[f64], &[u32]) -> Option<Vec<C>> + Send + Sync>;

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_FLAT_TOL: f64 = 1e-6;

/// A map from ℝ^dim (for maps on ℂⁿ, dim = 2n with `z_j = x_{2j} + i x_{2j+1}`) into ℂ^m.
#[derive(Clone)]
pub struct SmoothMapSample {
    dim: usize,
    m: usize,
    eval: Evaluator,
    deriv: Option<DerivEvaluator>,
    h: f64,
}

/// A derivative value with an absolute error estimate (zero when exact).
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub err: f64,
}

impl SmoothMapSample {
    pub fn new(dim: usize, m: usize, eval: Evaluator) -> Self {
        SmoothMapSample {
            dim,
            m,
            eval,
            deriv: None,
            h: DEFAULT_FD_STEP,
        }
    }

    /// Map on ℂⁿ given in complex coordinates.
    pub fn from_complex<F>(n: usize, m: usize, f: F) -> Self
    where
        F: Fn(&[C]) -> Vec<C> + Send + Sync + 'static,
    {
        Self::new(2 * n, m, Arc::new(move |x: &[f64]| f(&real_to_complex(x))))
    }

    /// Holomorphic polynomial map with exact derivatives.
    pub fn from_polynomials(polys: Vec<CPolynomial>) -> Result<Self> {
        let n = polys
            .first()
            .map(|p| p.n_vars())
            .ok_or_else(|| Error::InvalidInput("at least one component required".into()))?;
        if polys.iter().any(|p| p.n_vars() != n) {
            return Err(Error::InvalidInput("components must share n_vars".into()));
        }
        let real: Arc<Vec<CPolynomial>> = Arc::new(polys.iter().map(|p| p.to_real()).collect());
        let m = polys.len();
        let r1 = real.clone();
        let eval: Evaluator = Arc::new(move |x: &[f64]| {
            r1.iter()
                .map(|p| p.eval_real(x).expect("dimension checked"))
                .collect()
        });
        let deriv: DerivEvaluator = Arc::new(move |x: &[f64], a: &[u32]| {
            Some(
                real.iter()
                    .map(|p| p.partial_multi(a).eval_real(x).expect("dimension checked"))
                    .collect(),
            )
        });
        Ok(SmoothMapSample {
            dim: 2 * n,
            m,
            eval,
            deriv: Some(deriv),
            h: DEFAULT_FD_STEP,
        })
    }

    pub fn with_derivatives(mut self, d: DerivEvaluator) -> Self {
        self.deriv = Some(d);
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        assert!(h > 0.0, "step must be positive");
        self.h = h;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<C>> {
        self.check_dim(x)?;
        Ok((self.eval)(x))
    }

    /// `d^alpha f(x)` over the real coordinates.
    pub fn derivative(&self, alpha: &[u32], x: &[f64]) -> Result<Estimate<Vec<C>>> {
        self.check_dim(x)?;
        if alpha.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.len(),
            });
        }
        if let Some(d) = &self.deriv {
            if let Some(v) = d(x, alpha) {
                if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::FiniteDifference(format!(
                        "non-finite derivative at {:?}",
                        x
                    )));
                }
                return Ok(Estimate { value: v, err: 0.0 });
            }
        }
        let (value, err) = fd::derivative(&*self.eval, x, alpha, self.h)?;
        Ok(Estimate { value, err })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub fn real_to_complex(x: &[f64]) -> Vec<C> {
    x.chunks(2)
        .map(|c| C::new(c[0], c.get(1).copied().unwrap_or(0.0)))
        .collect()
}

pub fn complex_to_real(z: &[C]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// `|f|_{k,x} = Σ_components Σ_{|α|≤k} |d^α f / dx^α (x)|`.
pub fn seminorm_k(f: &SmoothMapSample, k: u32, x: &[f64]) -> Result<Estimate<f64>> {
    let mut value = 0.0;
    let mut err = 0.0;
    for alpha in monomials_up_to(f.dim, k) {
        let d = f.derivative(&alpha.0, x)?;
        value += d.value.iter().map(|c| c.norm()).sum::<f64>();
        err += d.err * f.m as f64;
    }
    Ok(Estimate { value, err })
}

/// `∂̄_j g = ½(∂g/∂x_{2j} + i ∂g/∂x_{2j+1})` applied to `d^α f`, maximised over components.
fn dbar_of_partial(f: &SmoothMapSample, alpha: &[u32], j: usize, x: &[f64]) -> Result<f64> {
    let mut a = alpha.to_vec();
    a[2 * j] += 1;
    let dx = f.derivative(&a, x)?;
    a[2 * j] -= 1;
    a[2 * j + 1] += 1;
    let dy = f.derivative(&a, x)?;
    Ok(dx
        .value
        .iter()
        .zip(&dy.value)
        .map(|(&p, &q)| ((p + C::new(0.0, 1.0) * q) * 0.5).norm())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct DbarRow {
    pub point: Vec<f64>,
    /// Per ∂̄-operator, the max over |α| < k and components.
    pub residuals: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DbarReport {
    pub k: u32,
    pub tol: f64,
    pub rows: Vec<DbarRow>,
}

impl DbarReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.residuals.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(r0) = self.rows.first() {
            let cols: Vec<String> = (1..=r0.point.len())
                .map(|i| format!("x{i}"))
                .chain((1..=r0.residuals.len()).map(|j| format!("dbar_{j}")))
                .chain(std::iter::once("verdict".to_string()))
                .collect();
            s.push_str(&cols.join(","));
            s.push('\n');
        }
        for r in &self.rows {
            for v in r.point.iter().chain(&r.residuals) {
                let _ = write!(s, "{:.16e},", v);
            }
            s.push_str(if r.pass { "pass\n" } else { "fail\n" });
        }
        s
    }
}

/// Checks that ∂̄ of every real partial of order < k vanishes at the sample points.
pub fn dbar_flat_order(
    f: &SmoothMapSample,
    samples: &[Vec<f64>],
    k: u32,
    tol: f64,
) -> Result<DbarReport> {
    if k < 1 {
        return Err(Error::InvalidInput(
            "flatness order k must be at least 1".into(),
        ));
    }
    if f.dim % 2 != 0 {
        return Err(Error::InvalidInput(
            "map domain must be ℂⁿ (even real dimension)".into(),
        ));
    }
    let n = f.dim / 2;
    let alphas = monomials_up_to(f.dim, k - 1);
    let rows = samples
        .par_iter()
        .map(|x| {
            let mut residuals = vec![0.0f64; n];
            for alpha in &alphas {
                for (j, r) in residuals.iter_mut().enumerate() {
                    *r = r.max(dbar_of_partial(f, &alpha.0, j, x)?);
                }
            }
            let pass = residuals.iter().all(|&r| r <= tol);
            Ok(DbarRow {
                point: x.clone(),
                residuals,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DbarReport { k, tol, rows })
}

#[derive(Clone, Debug)]
pub struct SlopeOptions {
    pub offsets: Vec<f64>,
    pub noise_floor: f64,
}

impl Default for SlopeOptions {
    fn default() -> Self {
        SlopeOptions {
            offsets: (0..5).map(|j| 0.1 * 0.5f64.powi(j)).collect(),
            noise_floor: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub offsets: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Fitted log-log slope; `None` when residuals sit at the noise floor.
    pub slope: Option<f64>,
    pub threshold: f64,
}

impl SlopeReport {
    /// Residuals below the noise floor count as exact vanishing.
    pub fn pass(&self) -> bool {
        match self.slope {
            None => true,
            Some(s) => s >= self.threshold,
        }
    }
}

/// Empirical order of vanishing of ∂̄f along normal offsets `base + y·normal`,
/// compared against the threshold `k − 0.2`.
pub fn vanishing_slope(
    f: &SmoothMapSample,
    base: &[Vec<f64>],
    normal: &[f64],
    k: u32,
    opts: &SlopeOptions,
) -> Result<SlopeReport> {
    let n = f.dim / 2;
    let zero = vec![0u32; f.dim];
    let mut residuals = Vec::with_capacity(opts.offsets.len());
    for &y in &opts.offsets {
        let mut worst = 0.0f64;
        for b in base {
            let x: Vec<f64> = b.iter().zip(normal).map(|(p, d)| p + y * d).collect();
            for j in 0..n {
                worst = worst.max(dbar_of_partial(f, &zero, j, &x)?);
            }
        }
        residuals.push(worst);
    }
    let pts: Vec<(f64, f64)> = opts
        .offsets
        .iter()
        .zip(&residuals)
        .filter(|(_, &r)| r > opts.noise_floor)
        .map(|(&y, &r)| (y.ln(), r.ln()))
        .collect();
    let slope = if pts.len() < 2 {
        None
    } else {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    };
    Ok(SlopeReport {
        offsets: opts.offsets.clone(),
        residuals,
        slope,
        threshold: k as f64 - 0.2,
    })
}

pub type JetEvaluator = Arc<dyn Fn(&[u32], &[f64]) -> Vec<C> + Send + Sync>;

/// The k-jet of a map ℝ^s → ℂ^m: `eval(β, x) = ∂^β f(x)` for |β| ≤ order.
#[derive(Clone)]
pub struct JetOnRs {
    s: usize,
    order: u32,
    m: usize,
    eval: JetEvaluator,
}

impl JetOnRs {
    pub fn new(s: usize, order: u32, m: usize, eval: JetEvaluator) -> Self {
        JetOnRs { s, order, m, eval }
    }

    /// The jet of a polynomial map in `s` real variables (complex coefficients).
    pub fn from_polynomials(polys: Vec<CPolynomial>, order: u32) -> Result<Self> {
        let s = polys
            .first()
            .map(|p| p.n_vars())
            .ok_or_else(|| Error::InvalidInput("at least one component required".into()))?;
        let m = polys.len();
        let polys = Arc::new(polys);
        Ok(JetOnRs::new(
            s,
            order,
            m,
            Arc::new(move |beta: &[u32], x: &[f64]| {
                polys
                    .iter()
                    .map(|p| {
                        p.partial_multi(beta)
                            .eval_real(x)
                            .expect("dimension checked")
                    })
                    .collect()
            }),
        ))
    }

    pub fn zero(s: usize, order: u32, m: usize) -> Self {
        JetOnRs::new(s, order, m, Arc::new(move |_, _| vec![C::new(0.0, 0.0); m]))
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eval(&self, beta: &[u32], x: &[f64]) -> Vec<C> {
        (self.eval)(beta, x)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C, other: &JetOnRs, b: C) -> Result<JetOnRs> {
        if self.s != other.s || self.m != other.m {
            return Err(Error::InvalidInput("jets must share s and m".into()));
        }
        let (e1, e2) = (self.eval.clone(), other.eval.clone());
        Ok(JetOnRs::new(
            self.s,
            self.order.min(other.order),
            self.m,
            Arc::new(move |beta: &[u32], x: &[f64]| {
                e1(beta, x)
                    .into_iter()
                    .zip(e2(beta, x))
                    .map(|(p, q)| a * p + b * q)
                    .collect()
            }),
        ))
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Truncated Taylor extension
/// `F(z) = Σ_{|β|≤k} ∂^β f(Re z') (i Im z')^β / β!` with `z' = (z_1, …, z_s)`,
/// constant in the remaining complex coordinates.
pub fn almost_analytic_extend(jet: &JetOnRs, n: usize, k: u32) -> Result<SmoothMapSample> {
    if jet.order < k {
        return Err(Error::JetOrder {
            have: jet.order as usize,
            need: k as usize,
        });
    }
    if jet.s == 0 || jet.s > n {
        return Err(Error::InvalidInput(format!(
            "cannot embed ℝ^{} into ℂ^{}",
            jet.s, n
        )));
    }
    let s = jet.s;
    let betas: Vec<(Monomial, f64)> = monomials_up_to(s, k)
        .into_iter()
        .map(|b| {
            let w = b.0.iter().map(|&e| factorial(e)).product::<f64>();
            (b, w)
        })
        .collect();
    let e = jet.eval.clone();
    let m = jet.m;
    let eval: Evaluator = Arc::new(move |x: &[f64]| {
        let re: Vec<f64> = (0..s).map(|j| x[2 * j]).collect();
        let iy: Vec<C> = (0..s).map(|j| C::new(0.0, x[2 * j + 1])).collect();
        let mut out = vec![C::new(0.0, 0.0); m];
        for (beta, w) in &betas {
            let mut mono = C::new(1.0, 0.0);
            for (j, &bj) in beta.0.iter().enumerate() {
                mono *= iy[j].powu(bj);
            }
            if mono == C::new(0.0, 0.0) {
                continue;
            }
            let d = e(&beta.0, &re);
            for (o, v) in out.iter_mut().zip(d) {
                *o += v * mono / *w;
            }
        }
        out
    });
    Ok(SmoothMapSample::new(2 * n, m, eval))
}
