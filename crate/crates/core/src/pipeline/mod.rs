//! Desk-scale approximation of a compactly supported isotopy of `ℝ ⊂ ℂ²` by a
//! word of shears with entire profiles.
//!
//! Each time slice moves the current image curve by `Δt·χ·X`, split into two
//! shears along directions near `v`. A shear profile is known only along the
//! projected curve, so it is fitted there by [`carleman_1d`] in a linear chart.

mod blend;
mod config;
mod nice;
mod spline;

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    almost_analytic_extend, complex_to_real, dbar_flat_order, fd, seminorm_k, JetOnRs,
    SmoothMapSample, DEFAULT_FD_STEP, DEFAULT_FLAT_TOL,
};
use crate::carleman::{acceptance_grid, carleman_1d, CarlemanOptions, EntireApproximant};
use crate::decomp::{build_basis, DEFAULT_RETRIES};
use crate::error::{Error, Result};
use crate::flows::{ball_samples, field_at, IsotopySpec};
use crate::polyalg::CPolynomial;
use crate::shears::{
    norm, AutomorphismWord, Direction, EntireProfile, Kind, Profile, ShearGenerator,
};

pub use blend::{blend_maps, CutoffFn};
pub use config::{
    BallConfig, IsotopyConfig, ResolutionConfig, ScenarioConfig, ToleranceSpec, CONFIG_VERSION,
};
pub use nice::{
    nice_projection_diagnostics, DirectionDiagnostics, NiceProjectionReport, BOUNDED_HULLS_NOTE,
};

type C = Complex64;

/// Residual-to-tolerance ratio above which a profile gets a correction fit.
const CORRECTION_RATIO: f64 = 0.5;
const MAX_CORRECTIONS: usize = 2;
/// Smallest admissible slope of the real part of a profile chart.
const CHART_SLOPE_MIN: f64 = 0.5;

/// `b(x) = (1 − u²)^q` on `|u| < 1`, `u = (x − center)/radius`, times `a·d`.
#[derive(Clone, Debug)]
pub struct BumpIsotopy {
    center: f64,
    radius: f64,
    magnitude: f64,
    d: Vec<C>,
    derivs: Vec<CPolynomial>,
}

impl BumpIsotopy {
    pub fn new(cfg: &IsotopyConfig, max_order: u32) -> Self {
        let IsotopyConfig::Bump {
            center,
            radius,
            power,
            displacement,
            magnitude,
        } = cfg;
        let r = norm(displacement);
        let u = CPolynomial::variable(1, 0);
        let one = CPolynomial::constant(1, C::new(1.0, 0.0));
        let p = (&one - &(&u * &u)).pow(*power);
        let derivs = (0..=max_order).map(|j| p.partial_multi(&[j])).collect();
        BumpIsotopy {
            center: *center,
            radius: *radius,
            magnitude: *magnitude,
            d: displacement.iter().map(|c| c / r).collect(),
            derivs,
        }
    }

    /// `b^{(j)}(x)`.
    pub fn bump(&self, j: u32, x: f64) -> f64 {
        let u = (x - self.center) / self.radius;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        self.derivs[j as usize]
            .eval_real(&[u])
            .expect("one variable")
            .re
            / self.radius.powi(j as i32)
    }

    /// `∂^j` of the displacement `a·b(x)·d`.
    pub fn displacement(&self, j: u32, x: f64) -> Vec<C> {
        let s = self.magnitude * self.bump(j, x);
        self.d.iter().map(|c| c * s).collect()
    }

    /// `φ_t(x) = x + t·a·b(x)·d`.
    pub fn curve(&self, t: f64, x: f64) -> Vec<C> {
        let mut z = self.displacement(0, x);
        for c in z.iter_mut() {
            *c *= t;
        }
        z[0] += x;
        z
    }

    pub fn jet(&self, order: u32) -> JetOnRs {
        let me = self.clone();
        JetOnRs::new(
            1,
            order,
            2,
            Arc::new(move |beta: &[u32], x: &[f64]| me.displacement(beta[0], x[0])),
        )
    }
}

/// `ψ_t(z) = z + t·E(z)` for an extension `E` of the displacement, inverted by
/// fixed-point iteration.
pub fn extended_isotopy(ext: SmoothMapSample, t_grid: Vec<f64>, order: u32) -> Result<IsotopySpec> {
    let e1 = ext.clone();
    let map = Arc::new(move |t: f64, z: &[C]| {
        let e = e1.value(&complex_to_real(z)).expect("ℂ² extension");
        z.iter().zip(e).map(|(a, b)| a + b * t).collect::<Vec<C>>()
    });
    let inverse = Arc::new(move |t: f64, z: &[C]| {
        let mut y = z.to_vec();
        for _ in 0..200 {
            let e = ext.value(&complex_to_real(&y)).ok()?;
            let next: Vec<C> = z.iter().zip(e).map(|(a, b)| a - b * t).collect();
            let step = next
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            y = next;
            if step <= 1e-15 * (1.0 + norm(z)) {
                return Some(y);
            }
        }
        None
    });
    IsotopySpec::new(t_grid, map, inverse, order)
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// `χ ≡ 1` on `|x| ≤ r₂`, `χ ≡ 0` on `|x| ≥ r₃`, C^∞ in between.
pub fn cutoff(r2: f64, r3: f64, x: f64) -> f64 {
    smooth_step((r3 - x.abs()) / (r3 - r2))
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowRow {
    pub x: f64,
    pub error: f64,
    pub eps: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutsideRow {
    pub x: f64,
    pub deviation: f64,
    pub budget: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KRow {
    pub z: Vec<C>,
    pub error: f64,
    pub mu: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub value: f64,
    pub bound: f64,
    pub points: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub pass: bool,
    pub k: u32,
    pub steps: usize,
    pub word_len: usize,
    pub shear_count: usize,
    pub overshear_count: usize,
    pub directions: Vec<Direction>,
    /// `|word − φ₁|_{k,x}` against `ε(x)` on the window grid; value is the max ratio.
    pub window: Criterion,
    pub window_max_error: f64,
    /// `‖word(x) − x‖` for `|x| ≥ r₃ + 1` against the profile tail budget.
    pub outside: Criterion,
    pub k_set: Criterion,
    /// Smallest distance between images of distinct grid points.
    pub injectivity: Criterion,
    pub cutoff_constant: f64,
    pub annulus_increment: f64,
    pub eps2: f64,
    pub extension_dbar_residual: f64,
    pub extension_flat: bool,
    pub profile_corrections: usize,
    pub polynomial_convexity_assumed: bool,
    pub nice_projection: NiceProjectionReport,
    #[serde(skip)]
    pub window_rows: Vec<WindowRow>,
    #[serde(skip)]
    pub outside_rows: Vec<OutsideRow>,
    #[serde(skip)]
    pub k_rows: Vec<KRow>,
}

fn verdict(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "fail"
    }
}

impl PipelineReport {
    pub fn window_csv(&self) -> String {
        let mut s = String::from("x,error,eps,verdict\n");
        for r in &self.window_rows {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{}",
                r.x,
                r.error,
                r.eps,
                verdict(r.pass)
            );
        }
        s
    }

    pub fn outside_csv(&self) -> String {
        let mut s = String::from("x,deviation,budget,verdict\n");
        for r in &self.outside_rows {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{}",
                r.x,
                r.deviation,
                r.budget,
                verdict(r.pass)
            );
        }
        s
    }

    pub fn k_csv(&self) -> String {
        let mut s = String::from("re_z1,im_z1,re_z2,im_z2,error,mu,verdict\n");
        for r in &self.k_rows {
            for c in &r.z {
                let _ = write!(s, "{:.16e},{:.16e},", c.re, c.im);
            }
            let _ = writeln!(s, "{:.16e},{:.16e},{}", r.error, r.mu, verdict(r.pass));
        }
        s
    }
}

pub struct PipelineOutput {
    pub word: AutomorphismWord,
    pub report: PipelineReport,
}

/// Parameter grid `x_i` on which the image curve is tracked.
struct ParamGrid {
    x0: f64,
    h: f64,
    xs: Vec<f64>,
}

impl ParamGrid {
    fn new(half: f64, h: f64) -> Self {
        let m = (2.0 * half / h).round() as usize;
        let x0 = -(m as f64) * h / 2.0;
        ParamGrid {
            x0,
            h,
            xs: (0..=m).map(|i| x0 + i as f64 * h).collect(),
        }
    }
}

/// Fits an entire `g` with `g(ζ(x)) ≈ F(x)` along the chart `ζ = π_u(p(x))/c`.
///
/// `ζ = x + e(x)` with `e` small, so the target on ℝ is shifted to `F − e·F'`
/// and any remaining residual on the curve is fitted again.
#[allow(clippy::too_many_arguments)]
fn fit_profile(
    grid: &ParamGrid,
    zeta: &[C],
    target: &[C],
    k: u32,
    fit_window: f64,
    tol: &ToleranceSpec,
    opts: &CarlemanOptions,
    corrections: &mut usize,
) -> Result<EntireApproximant> {
    let h = grid.h;
    let slope = zeta
        .windows(2)
        .map(|w| (w[1].re - w[0].re) / h)
        .fold(f64::INFINITY, f64::min);
    if !(slope >= CHART_SLOPE_MIN) {
        return Err(Error::GraphChart(format!(
            "projected curve is not a graph over ℝ (min slope {slope:.3e})"
        )));
    }
    if target.iter().all(|c| *c == C::new(0.0, 0.0)) {
        return Ok(EntireApproximant::zero());
    }
    let tol_p = tol.profile(fit_window)?;
    let e: Vec<C> = zeta.iter().zip(&grid.xs).map(|(z, &x)| z - x).collect();
    let e_spline = Arc::new(spline::UniformSpline::new(grid.x0, h, e));

    let mut stages = Vec::new();
    let mut residual = target.to_vec();
    for round in 0..=MAX_CORRECTIONS {
        let f_spline = Arc::new(spline::UniformSpline::new(grid.x0, h, residual.clone()));
        let (fs, es) = (f_spline.clone(), e_spline.clone());
        let shifted = move |x: f64| {
            let [f, f1, f2] = fs.eval(x);
            let [e, e1, _] = es.eval(x);
            [f - e * f1, f1 - e1 * f1 - e * f2]
        };
        let sh = shifted.clone();
        let sample = SmoothMapSample::new(1, 1, Arc::new(move |x: &[f64]| vec![sh(x[0])[0]]))
            .with_derivatives(Arc::new(move |x: &[f64], a: &[u32]| {
                (a[0] <= 1).then(|| vec![shifted(x[0])[a[0] as usize]])
            }));
        let g = carleman_1d(&sample, k, &tol_p, opts)?;
        stages.extend(g.stages().iter().cloned());
        let total = EntireApproximant::new(stages.clone());
        residual = target
            .iter()
            .zip(zeta)
            .map(|(f, z)| f - total.eval(*z))
            .collect();
        let r_spline = spline::UniformSpline::new(grid.x0, h, residual.clone());
        let ratio = acceptance_grid(fit_window, opts.acceptance_spacing)
            .iter()
            .map(|&x| {
                let d = r_spline.eval(x);
                d[..=(k as usize).min(2)]
                    .iter()
                    .map(|c| c.norm())
                    .sum::<f64>()
                    / tol.eps(x)
            })
            .fold(0.0, f64::max);
        if ratio <= CORRECTION_RATIO {
            return Ok(total);
        }
        if round == MAX_CORRECTIONS {
            if ratio <= 1.0 {
                return Ok(total);
            }
            return Err(Error::CarlemanStage {
                annulus: 0,
                detail: format!("profile residual on the curve is {ratio:.3e} × tolerance"),
            });
        }
        *corrections += 1;
    }
    unreachable!("loop returns on its last round")
}

/// Runs extension, field sampling, curve splitting with cutoff, Carleman
/// profile fits and the report.
pub fn run_pipeline(cfg: &ScenarioConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let k = cfg.k;
    let [_, r2, r3] = cfg.radii;
    let res = &cfg.resolution;
    let bump = BumpIsotopy::new(&cfg.isotopy, k + 2);

    // Extension of the displacement and the induced isotopy of ℂ².
    let ext = almost_analytic_extend(&bump.jet(k), 2, k).map_err(|e| e.at_stage("extension"))?;
    let t_grid = IsotopySpec::uniform_grid(cfg.steps);
    let iso =
        extended_isotopy(ext.clone(), t_grid.clone(), k).map_err(|e| e.at_stage("extension"))?;
    let flat_pts: Vec<Vec<f64>> = acceptance_grid(cfg.window, 0.1)
        .into_iter()
        .map(|x| vec![x, 0.0, 0.0, 0.0])
        .collect();
    let flat = if k >= 1 {
        Some(
            dbar_flat_order(&ext, &flat_pts, k, DEFAULT_FLAT_TOL)
                .map_err(|e| e.at_stage("extension"))?,
        )
    } else {
        None
    };

    // Cutoff and its constant on the annulus.
    let chi_jet = JetOnRs::new(
        1,
        cfg.cutoff_order,
        1,
        Arc::new(move |beta: &[u32], x: &[f64]| {
            let f = move |y: &[f64]| vec![C::new(cutoff(r2, r3, y[0]), 0.0)];
            fd::derivative(&f, x, beta, DEFAULT_FD_STEP)
                .map(|(v, _)| v)
                .unwrap_or_else(|_| vec![C::new(f64::NAN, 0.0)])
        }),
    );
    let chi_ext =
        almost_analytic_extend(&chi_jet, 2, cfg.cutoff_order).map_err(|e| e.at_stage("cutoff"))?;
    let annulus: Vec<f64> = acceptance_grid(r3, 0.05)
        .into_iter()
        .filter(|x| x.abs() >= r2 && x.abs() <= r3)
        .collect();
    let cutoff_constant = annulus
        .par_iter()
        .map(|&x| seminorm_k(&chi_ext, cfg.cutoff_order, &[x, 0.0, 0.0, 0.0]).map(|e| e.value))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("cutoff"))?
        .into_iter()
        .fold(0.0, f64::max);

    // Two shear directions near v.
    let basis = build_basis(&cfg.v, 0, cfg.eps_dir, cfg.seed, DEFAULT_RETRIES)
        .map_err(|e| e.at_stage("directions"))?;
    let dirs: Vec<Direction> = basis
        .generators
        .iter()
        .map(|g| g.direction().clone())
        .collect();
    let frame = Matrix2::new(
        dirs[0].v()[0],
        dirs[1].v()[0],
        dirs[0].v()[1],
        dirs[1].v()[1],
    );
    let lu = frame.lu();
    let charts: Vec<C> = dirs.iter().map(|d| d.basis()[0][0].conj()).collect();

    // Curve splitting with entire profiles.
    let fit_window = (cfg.window + res.fit_margin).ceil();
    let grid = ParamGrid::new(fit_window + 0.25, res.fit_spacing);
    let tol_p = cfg.tolerance.scaled(res.profile_fraction);
    let opts = CarlemanOptions::default();
    let dt = 1.0 / cfg.steps as f64;
    let mut curve: Vec<Vec<C>> = grid
        .xs
        .iter()
        .map(|&x| vec![C::new(x, 0.0), C::new(0.0, 0.0)])
        .collect();
    let chi: Vec<f64> = grid.xs.iter().map(|&x| cutoff(r2, r3, x)).collect();
    let mut word = AutomorphismWord::empty();
    let mut annulus_increment = 0.0f64;
    let mut corrections = 0;
    for &t in &t_grid[..cfg.steps] {
        let x_field = field_at(&iso, t, &curve).map_err(|e| e.at_stage("field"))?;
        for (x, v) in grid.xs.iter().zip(&x_field) {
            if x.abs() >= r2 && x.abs() <= r3 {
                annulus_increment = annulus_increment.max(dt * norm(v));
            }
        }
        if annulus_increment > cfg.eps2 {
            return Err(Error::InvalidInput(format!(
                "slice increment {annulus_increment:.3e} on the annulus exceeds eps2 = {:.3e}",
                cfg.eps2
            ))
            .at_stage("cutoff"));
        }
        let coeffs: Vec<Vector2<C>> = x_field
            .iter()
            .zip(&chi)
            .map(|(v, &c)| {
                lu.solve(&Vector2::new(v[0] * c, v[1] * c))
                    .ok_or(Error::SingularSystem { residual: f64::NAN })
            })
            .collect::<Result<_>>()
            .map_err(|e| e.at_stage("splitting"))?;
        for (j, dir) in dirs.iter().enumerate() {
            let zeta: Vec<C> = curve
                .iter()
                .map(|p| dir.project(p)[0] / charts[j])
                .collect();
            let target: Vec<C> = coeffs.iter().map(|c| c[j]).collect();
            let g = fit_profile(
                &grid,
                &zeta,
                &target,
                k,
                fit_window,
                &tol_p,
                &opts,
                &mut corrections,
            )
            .map_err(|e| e.at_stage("carleman"))?;
            if g.is_zero() {
                continue;
            }
            let gen = ShearGenerator::new(
                Kind::Shear,
                dir.clone(),
                Profile::Entire(EntireProfile {
                    approximant: g,
                    scale: charts[j].inv(),
                    shift: C::new(0.0, 0.0),
                }),
            )
            .map_err(|e| e.at_stage("carleman"))?;
            curve.par_iter_mut().for_each(|p| *p = gen.flow(dt, p));
            word.push(gen, dt);
        }
    }

    let report = build_report(cfg, &bump, &iso, &word, &dirs, &tol_p, fit_window)
        .map_err(|e| e.at_stage("report"))?;
    let report = PipelineReport {
        cutoff_constant,
        annulus_increment,
        extension_dbar_residual: flat.as_ref().map_or(0.0, |f| f.max_residual()),
        extension_flat: flat.as_ref().map_or(true, |f| f.pass()),
        profile_corrections: corrections,
        ..report
    };
    Ok(PipelineOutput { word, report })
}

fn k_samples(cfg: &ScenarioConfig) -> Vec<Vec<C>> {
    cfg.compacts
        .iter()
        .enumerate()
        .flat_map(|(i, b)| {
            let mut pts = vec![b.center.clone()];
            pts.extend(
                ball_samples(
                    2,
                    b.radius,
                    cfg.resolution.k_samples,
                    cfg.seed.wrapping_add(i as u64),
                )
                .into_iter()
                .map(|z| z.iter().zip(&b.center).map(|(a, c)| a + c).collect()),
            );
            pts
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    cfg: &ScenarioConfig,
    bump: &BumpIsotopy,
    iso: &IsotopySpec,
    word: &AutomorphismWord,
    dirs: &[Direction],
    tol_p: &ToleranceSpec,
    fit_window: f64,
) -> Result<PipelineReport> {
    let k = cfg.k;
    let r3 = cfg.radii[2];
    let res = &cfg.resolution;
    let xs = acceptance_grid(cfg.window, res.report_spacing);

    let images: Vec<Vec<C>> = xs
        .par_iter()
        .map(|&x| word.eval(&[C::new(x, 0.0), C::new(0.0, 0.0)]))
        .collect::<Result<_>>()?;

    let (w, b) = (word.clone(), bump.clone());
    let diff = SmoothMapSample::new(
        1,
        2,
        Arc::new(move |x: &[f64]| {
            let target = b.curve(1.0, x[0]);
            match w.eval(&[C::new(x[0], 0.0), C::new(0.0, 0.0)]) {
                Ok(z) => z.iter().zip(target).map(|(a, t)| a - t).collect(),
                Err(_) => vec![C::new(f64::NAN, 0.0); 2],
            }
        }),
    );
    let window_rows: Vec<WindowRow> = xs
        .par_iter()
        .map(|&x| {
            let error = seminorm_k(&diff, k, &[x])?.value;
            let eps = cfg.tolerance.eps(x);
            Ok(WindowRow {
                x,
                error,
                eps,
                pass: error <= eps,
            })
        })
        .collect::<Result<_>>()?;
    let window = Criterion {
        value: window_rows
            .iter()
            .map(|r| r.error / r.eps)
            .fold(0.0, f64::max),
        bound: 1.0,
        points: window_rows.len(),
        pass: window_rows.iter().all(|r| r.pass),
    };
    let window_max_error = window_rows.iter().map(|r| r.error).fold(0.0, f64::max);

    // Each profile is within its tolerance of zero where the target vanishes.
    let far: Vec<f64> = acceptance_grid(fit_window, 0.01)
        .into_iter()
        .filter(|x| x.abs() >= r3 + 1.0)
        .collect();
    let tail = far.iter().map(|&x| tol_p.eps(x)).fold(0.0, f64::max);
    let budget: f64 = word.entries().iter().map(|e| e.time.abs() * tail).sum();
    let outside_rows: Vec<OutsideRow> = xs
        .iter()
        .zip(&images)
        .filter(|(x, _)| x.abs() >= r3 + 1.0)
        .map(|(&x, z)| {
            let deviation = ((z[0] - x).norm_sqr() + z[1].norm_sqr()).sqrt();
            OutsideRow {
                x,
                deviation,
                budget,
                pass: deviation <= budget,
            }
        })
        .collect();
    let outside = Criterion {
        value: outside_rows.iter().map(|r| r.deviation).fold(0.0, f64::max),
        bound: budget,
        points: outside_rows.len(),
        pass: outside_rows.iter().all(|r| r.pass),
    };

    let ks = k_samples(cfg);
    let k_rows: Vec<KRow> = ks
        .par_iter()
        .map(|z| {
            let got = word.eval(z)?;
            let want = iso.eval(1.0, z);
            let error = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok(KRow {
                z: z.clone(),
                error,
                mu: cfg.mu,
                pass: error <= cfg.mu,
            })
        })
        .collect::<Result<_>>()?;
    let k_set = Criterion {
        value: k_rows.iter().map(|r| r.error).fold(0.0, f64::max),
        bound: cfg.mu,
        points: k_rows.len(),
        pass: k_rows.iter().all(|r| r.pass),
    };

    let threshold = res.report_spacing / 2.0;
    let min_sep = (0..images.len())
        .into_par_iter()
        .map(|i| {
            images[i + 1..]
                .iter()
                .map(|z| {
                    z.iter()
                        .zip(&images[i])
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let injectivity = Criterion {
        value: min_sep,
        bound: threshold,
        points: images.len(),
        pass: min_sep >= threshold,
    };

    let IsotopyConfig::Bump { center, radius, .. } = &cfg.isotopy;
    let params = acceptance_grid(cfg.window, 0.05);
    let target_curve: Vec<Vec<C>> = params.iter().map(|&x| bump.curve(1.0, x)).collect();
    let nice_projection = nice_projection_diagnostics(
        &target_curve,
        &params,
        (center - radius, center + radius),
        &ks,
        &cfg.v,
        cfg.eps_dir,
        res.projection_directions,
        cfg.seed,
    );

    Ok(PipelineReport {
        pass: window.pass && outside.pass && k_set.pass && injectivity.pass,
        k,
        steps: cfg.steps,
        word_len: word.len(),
        shear_count: word.count_kind(Kind::Shear),
        overshear_count: word.count_kind(Kind::Overshear),
        directions: dirs.to_vec(),
        window,
        window_max_error,
        outside,
        k_set,
        injectivity,
        cutoff_constant: 0.0,
        annulus_increment: 0.0,
        eps2: cfg.eps2,
        extension_dbar_residual: 0.0,
        extension_flat: true,
        profile_corrections: 0,
        polynomial_convexity_assumed: cfg.polynomial_convexity_assumed,
        nice_projection,
        window_rows,
        outside_rows,
        k_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cutoff_regions() {
        for x in [0.0, 3.0, -5.0, 5.0] {
            assert_eq!(cutoff(5.0, 6.5, x), 1.0);
        }
        for x in [6.5, -6.5, 7.0, -100.0] {
            assert_eq!(cutoff(5.0, 6.5, x), 0.0);
        }
        assert!((cutoff(5.0, 6.5, 5.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_support_and_derivatives() {
        let iso = BumpIsotopy::new(&ScenarioConfig::default().isotopy, 2);
        assert_eq!(iso.bump(0, 0.5), 0.0);
        assert_eq!(iso.bump(0, 4.5), 0.0);
        assert_eq!(iso.bump(0, 2.5), 1.0);
        let h = 1e-5;
        for x in [1.0, 2.0, 3.3, 4.1] {
            let d1 = (iso.bump(0, x + h) - iso.bump(0, x - h)) / (2.0 * h);
            assert!((d1 - iso.bump(1, x)).abs() < 1e-8, "{x}");
            let d2 = (iso.bump(1, x + h) - iso.bump(1, x - h)) / (2.0 * h);
            assert!((d2 - iso.bump(2, x)).abs() < 1e-6, "{x}");
        }
        let z = iso.curve(1.0, 2.5);
        assert!((z[0] - C::new(2.5 + 0.05 * 0.6, 0.0)).norm() < 1e-15);
        assert!((z[1] - C::new(0.0, 0.05 * 0.8)).norm() < 1e-15);
        assert_eq!(
            iso.curve(0.3, 7.0),
            vec![C::new(7.0, 0.0), C::new(0.0, 0.0)]
        );
    }

    proptest! {
        #[test]
        fn cutoff_is_even_monotone_and_bounded(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let f = |x| cutoff(5.0, 6.5, x);
            prop_assert_eq!(f(a), f(-a));
            prop_assert!(f(lo) >= f(hi));
            prop_assert!((0.0..=1.0).contains(&f(a)));
        }
    }
}
