use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Failure, Outcome};
use crate::calculus::{
    almost_analytic_extend, dbar_flat_order, vanishing_slope, JetOnRs, SlopeOptions,
    SmoothMapSample,
};
use crate::carleman::{acceptance_grid, approximant_seminorm_report, carleman_1d, CarlemanOptions};
use crate::decomp::{decompose_full, dim_vk, DecompOptions, DivFreeMode};
use crate::flows::{
    ball_samples, convergence_study, field_from_isotopy, random_polynomial_field, split_compose,
    IsotopySpec, SplitScheme,
};
use crate::ode::rk4_to_tolerance;
use crate::pipeline::{
    run_pipeline, BumpIsotopy, IsotopyConfig, ScenarioConfig, ToleranceSpec, CONFIG_VERSION,
};
use crate::polyalg::{CPolynomial, PolyVectorField};
use crate::shears::{Direction, ShearGenerator};

type C = Complex64;

/// Accepted range of successive error ratios for first-order splitting.
const LIE_RATIO: (f64, f64) = (1.7, 2.3);
const FLOW_TOL: f64 = 1e-12;

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::Config(e.to_string()))
}

fn check_version(v: u32) -> Result<(), Failure> {
    if v == CONFIG_VERSION {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "unsupported version {v} (expected {CONFIG_VERSION})"
        )))
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("artifact serializes");
    b.push(b'\n');
    b
}

fn stage(name: &'static str) -> impl Fn(crate::Error) -> Failure {
    move |e| Failure::Stage(e.at_stage(name))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub version: u32,
    pub field: PolyVectorField,
    pub v: Direction,
    pub eps: f64,
    pub div_free: DivFreeMode,
    pub seed: u64,
    pub retries: usize,
}

#[derive(Serialize)]
struct DecomposeArtifact<'a> {
    n: usize,
    decompositions: &'a [crate::decomp::Decomposition],
    residual_field: PolyVectorField,
    max_residual: f64,
}

pub(super) fn decompose(bytes: &[u8], seed: Option<u64>) -> Result<Outcome, Failure> {
    let cfg: DecomposeConfig = parse(bytes)?;
    check_version(cfg.version)?;
    let n = cfg.field.n_vars();
    if cfg.v.n() != n {
        return Err(Failure::Config(format!(
            "v has {} entries, field has n = {n}",
            cfg.v.n()
        )));
    }
    if !(cfg.eps > 0.0) || cfg.retries == 0 {
        return Err(Failure::Config("eps and retries must be positive".into()));
    }
    let seed = seed.unwrap_or(cfg.seed);
    let opts = DecompOptions {
        seed,
        retries: cfg.retries,
        div_free: cfg.div_free,
    };
    let decs = decompose_full(&cfg.field, &cfg.v, cfg.eps, &opts).map_err(stage("decompose"))?;
    let rec = decs.iter().fold(PolyVectorField::zero(n), |acc, d| {
        acc.add(&d.reconstruct(n))
    });
    let residual_field = cfg.field.sub(&rec);
    let max_residual = residual_field.max_abs_coeff();
    let bound = crate::decomp::TOL_LADDER[1] * (1.0 + cfg.field.max_abs_coeff());
    let pass = max_residual <= bound;

    let mut csv = String::from(
        "degree,dim,shear_count,overshear_count,terms,condition,residual,tolerance,divergence_free\n",
    );
    for d in &decs {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{}",
            d.degree,
            dim_vk(n, d.degree),
            d.shear_count,
            d.overshear_count,
            d.terms.len(),
            d.condition,
            d.residual,
            d.tolerance,
            d.divergence_free
        );
    }
    let artifact = DecomposeArtifact {
        n,
        decompositions: &decs,
        residual_field,
        max_residual,
    };
    let terms: usize = decs.iter().map(|d| d.terms.len()).sum();
    Ok(Outcome {
        pass,
        seed: Some(seed),
        files: vec![
            ("decomposition.json".into(), json(&artifact)),
            ("conditioning.csv".into(), csv.into_bytes()),
        ],
        summary: vec![format!(
            "decompose: {} degrees, {terms} terms, max residual {max_residual:.3e} (bound {bound:.3e})",
            decs.len()
        )],
    })
}

/// Built-in isotopy families for `flow`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowIsotopy {
    /// The flow of an autonomous polynomial field.
    FieldFlow { field: PolyVectorField },
    /// The exact flow of one generator.
    GeneratorFlow { generator: ShearGenerator },
    /// The flow of a random field (seeded by the config seed).
    RandomField { n: usize, degree: u32, scale: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub version: u32,
    pub isotopy: FlowIsotopy,
    pub v: Direction,
    pub eps: f64,
    /// Radius of the sample ball.
    pub radius: f64,
    pub samples: usize,
    pub t_nodes: usize,
    pub fit_degree: u32,
    pub ridge: f64,
    pub steps: usize,
    pub scheme: SplitScheme,
    pub convergence_steps: Vec<usize>,
    pub seed: u64,
}

fn field_flow_isotopy(x: PolyVectorField, nodes: usize) -> crate::Result<IsotopySpec> {
    let (x1, x2) = (x.clone(), x);
    IsotopySpec::new(
        IsotopySpec::uniform_grid(nodes),
        Arc::new(move |t, z| {
            let f = |_: f64, z: &[C]| x1.eval(z).expect("dimension checked");
            rk4_to_tolerance(&f, z, 0.0, t, FLOW_TOL).0
        }),
        Arc::new(move |t, z| {
            let f = |_: f64, z: &[C]| x2.eval(z).expect("dimension checked");
            Some(rk4_to_tolerance(&f, z, t, 0.0, FLOW_TOL).0)
        }),
        1,
    )
}

#[derive(Serialize)]
struct FlowSummary<'a> {
    fit_residual: f64,
    word_len: usize,
    convergence: &'a [crate::flows::ConvergenceRow],
    ratio_range: (f64, f64),
    pass: bool,
}

pub(super) fn flow(bytes: &[u8], seed: Option<u64>) -> Result<Outcome, Failure> {
    let cfg: FlowConfig = parse(bytes)?;
    check_version(cfg.version)?;
    let seed = seed.unwrap_or(cfg.seed);
    if cfg.t_nodes < 1
        || cfg.samples == 0
        || cfg.steps == 0
        || !(cfg.radius > 0.0)
        || !(cfg.eps > 0.0)
    {
        return Err(Failure::Config(
            "t_nodes, samples, steps, radius and eps must be positive".into(),
        ));
    }
    if cfg.convergence_steps.windows(2).any(|w| w[1] != 2 * w[0])
        || cfg.convergence_steps.contains(&0)
    {
        return Err(Failure::Config(
            "convergence_steps must be positive and doubling".into(),
        ));
    }
    let (iso, n) = match &cfg.isotopy {
        FlowIsotopy::FieldFlow { field } => (
            field_flow_isotopy(field.clone(), cfg.t_nodes),
            field.n_vars(),
        ),
        FlowIsotopy::RandomField { n, degree, scale } => {
            if *n < 2 {
                return Err(Failure::Config("random field needs n >= 2".into()));
            }
            let x = random_polynomial_field(*n, *degree, *scale, seed);
            (field_flow_isotopy(x, cfg.t_nodes), *n)
        }
        FlowIsotopy::GeneratorFlow { generator } => {
            let (g1, g2) = (generator.clone(), generator.clone());
            (
                IsotopySpec::new(
                    IsotopySpec::uniform_grid(cfg.t_nodes),
                    Arc::new(move |t, z| g1.flow(t, z)),
                    Arc::new(move |t, z| Some(g2.flow(-t, z))),
                    1,
                ),
                generator.n(),
            )
        }
    };
    if cfg.v.n() != n {
        return Err(Failure::Config(format!(
            "v has {} entries, isotopy lives on ℂ^{n}",
            cfg.v.n()
        )));
    }
    let iso = iso.map_err(stage("isotopy"))?;
    let samples = ball_samples(n, cfg.radius, cfg.samples, seed);
    let sampled = field_from_isotopy(&iso, &samples).map_err(stage("field"))?;
    let (field, fit_residual) = sampled
        .fit(cfg.fit_degree, cfg.ridge)
        .map_err(stage("fit"))?;
    let opts = DecompOptions {
        seed,
        ..DecompOptions::default()
    };
    let word = split_compose(&field, &cfg.v, cfg.eps, cfg.steps, cfg.scheme, &opts)
        .map_err(stage("splitting"))?;
    let rows = convergence_study(
        &field,
        &cfg.v,
        cfg.eps,
        &cfg.convergence_steps,
        &samples,
        &opts,
    )
    .map_err(stage("convergence"))?;
    let pass = rows
        .iter()
        .filter_map(|r| r.ratio)
        .all(|q| (LIE_RATIO.0..=LIE_RATIO.1).contains(&q));

    let mut csv = String::from("steps,sup_error,ratio\n");
    for r in &rows {
        let ratio = r.ratio.map(|q| format!("{q:.16e}")).unwrap_or_default();
        let _ = writeln!(csv, "{},{:.16e},{}", r.steps, r.sup_error, ratio);
    }
    let mut summary: Vec<String> = rows
        .iter()
        .map(|r| match r.ratio {
            Some(q) => format!(
                "N = {:>5}  sup error {:.3e}  ratio {q:.3}",
                r.steps, r.sup_error
            ),
            None => format!("N = {:>5}  sup error {:.3e}", r.steps, r.sup_error),
        })
        .collect();
    summary.insert(
        0,
        format!(
            "flow: fit residual {fit_residual:.3e}, word of {} entries",
            word.len()
        ),
    );
    let s = FlowSummary {
        fit_residual,
        word_len: word.len(),
        convergence: &rows,
        ratio_range: LIE_RATIO,
        pass,
    };
    Ok(Outcome {
        pass,
        seed: Some(seed),
        files: vec![
            ("word.json".into(), json(&word)),
            ("convergence.csv".into(), csv.into_bytes()),
            ("summary.json".into(), json(&s)),
        ],
        summary,
    })
}

/// Functions on ℝ offered by `carleman`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFunction {
    Zero,
    /// `Σ c_j x^j`.
    Polynomial {
        coefficients: Vec<C>,
    },
    /// `1 / (1 + (x/width)²)`.
    Lorentzian {
        width: f64,
    },
    /// `sin(frequency·x)`.
    Sine {
        frequency: f64,
    },
}

impl TargetFunction {
    pub fn sample(&self) -> SmoothMapSample {
        match self.clone() {
            TargetFunction::Zero => {
                SmoothMapSample::new(1, 1, Arc::new(|_: &[f64]| vec![C::new(0.0, 0.0)]))
                    .with_derivatives(Arc::new(|_: &[f64], _: &[u32]| {
                        Some(vec![C::new(0.0, 0.0)])
                    }))
            }
            TargetFunction::Polynomial { coefficients } => {
                let p = CPolynomial::from_terms(
                    1,
                    coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, &c)| (crate::polyalg::Monomial(vec![j as u32]), c)),
                )
                .expect("one variable");
                let q = p.clone();
                SmoothMapSample::new(
                    1,
                    1,
                    Arc::new(move |x: &[f64]| vec![p.eval_real(x).expect("one variable")]),
                )
                .with_derivatives(Arc::new(move |x: &[f64], a: &[u32]| {
                    Some(vec![q.partial_multi(a).eval_real(x).expect("one variable")])
                }))
            }
            TargetFunction::Lorentzian { width } => SmoothMapSample::new(
                1,
                1,
                Arc::new(move |x: &[f64]| vec![C::new(1.0 / (1.0 + (x[0] / width).powi(2)), 0.0)]),
            ),
            TargetFunction::Sine { frequency } => SmoothMapSample::new(
                1,
                1,
                Arc::new(move |x: &[f64]| vec![C::new((frequency * x[0]).sin(), 0.0)]),
            ),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanConfig {
    pub version: u32,
    pub function: TargetFunction,
    pub k: u32,
    pub tolerance: ToleranceSpec,
    pub window: f64,
}

#[derive(Serialize)]
struct CarlemanSummary {
    stages: usize,
    leak_total: f64,
    max_error: f64,
    max_ratio: f64,
    pass: bool,
}

pub(super) fn carleman(bytes: &[u8]) -> Result<Outcome, Failure> {
    let cfg: CarlemanConfig = parse(bytes)?;
    check_version(cfg.version)?;
    cfg.tolerance.validate()?;
    let bad_param = match cfg.function {
        TargetFunction::Lorentzian { width } => !(width > 0.0),
        TargetFunction::Sine { frequency } => !frequency.is_finite(),
        _ => false,
    };
    if bad_param || !(cfg.window > 0.0) {
        return Err(Failure::Config(
            "window and function parameters must be positive and finite".into(),
        ));
    }
    let tol = cfg.tolerance.profile(cfg.window)?;
    let opts = CarlemanOptions::default();
    let f = cfg.function.sample();
    let g = carleman_1d(&f, cfg.k, &tol, &opts).map_err(stage("carleman"))?;
    let grid = acceptance_grid(cfg.window, opts.acceptance_spacing);
    let rep =
        approximant_seminorm_report(&g, &f, cfg.k, &grid, &tol).map_err(stage("acceptance"))?;
    let s = CarlemanSummary {
        stages: g.stages().len(),
        leak_total: g.leak_total(),
        max_error: rep.max_err(),
        max_ratio: rep.max_ratio(),
        pass: rep.pass(),
    };
    Ok(Outcome {
        pass: rep.pass(),
        seed: None,
        summary: vec![format!(
            "carleman: {} stages, max |g − f|_{{{},x}} = {:.3e} ({:.3} of ε)",
            s.stages, cfg.k, s.max_error, s.max_ratio
        )],
        files: vec![
            ("approximant.json".into(), json(&g)),
            ("acceptance.csv".into(), rep.to_csv().into_bytes()),
            ("summary.json".into(), json(&s)),
        ],
    })
}

/// Jets offered by `check`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckJet {
    /// Polynomial map ℝ^s → ℂ^m with `s` = number of variables.
    Polynomial { components: Vec<CPolynomial> },
    /// The displacement of the pipeline's bump isotopy (s = 1, m = 2).
    Bump { isotopy: IsotopyConfig },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub version: u32,
    pub jet: CheckJet,
    pub n: usize,
    pub k: u32,
    /// Sample points in ℝ^s.
    pub points: Vec<Vec<f64>>,
    pub tol: f64,
    /// Also estimate the order of vanishing along `Im z₁`.
    pub slope: bool,
}

#[derive(Serialize)]
struct CheckSummary {
    max_residual: f64,
    dbar_pass: bool,
    slope: Option<f64>,
    slope_threshold: Option<f64>,
    slope_residuals: Option<Vec<f64>>,
    pass: bool,
}

pub(super) fn check(bytes: &[u8]) -> Result<Outcome, Failure> {
    let cfg: CheckConfig = parse(bytes)?;
    check_version(cfg.version)?;
    let jet = match &cfg.jet {
        CheckJet::Polynomial { components } => {
            JetOnRs::from_polynomials(components.clone(), cfg.k)?
        }
        CheckJet::Bump { isotopy } => BumpIsotopy::new(isotopy, cfg.k + 1).jet(cfg.k),
    };
    let s = jet.s();
    if cfg.k == 0
        || !(cfg.tol > 0.0)
        || cfg.points.is_empty()
        || cfg.points.iter().any(|p| p.len() != s)
    {
        return Err(Failure::Config(format!(
            "k ≥ 1, tol > 0 and nonempty points in ℝ^{s} are required"
        )));
    }
    let ext = almost_analytic_extend(&jet, cfg.n, cfg.k).map_err(|e| match e {
        crate::Error::InvalidInput(m) => Failure::Config(m),
        other => Failure::Stage(other.at_stage("extension")),
    })?;
    let base: Vec<Vec<f64>> = cfg
        .points
        .iter()
        .map(|p| {
            let mut x = vec![0.0; 2 * cfg.n];
            for (j, &v) in p.iter().enumerate() {
                x[2 * j] = v;
            }
            x
        })
        .collect();
    let dbar = dbar_flat_order(&ext, &base, cfg.k, cfg.tol).map_err(stage("dbar"))?;
    let slope = if cfg.slope {
        let mut normal = vec![0.0; 2 * cfg.n];
        normal[1] = 1.0;
        Some(
            vanishing_slope(&ext, &base, &normal, cfg.k, &SlopeOptions::default())
                .map_err(stage("slope"))?,
        )
    } else {
        None
    };
    let pass = dbar.pass() && slope.as_ref().map_or(true, |r| r.pass());
    let s = CheckSummary {
        max_residual: dbar.max_residual(),
        dbar_pass: dbar.pass(),
        slope: slope.as_ref().and_then(|r| r.slope),
        slope_threshold: slope.as_ref().map(|r| r.threshold),
        slope_residuals: slope.as_ref().map(|r| r.residuals.clone()),
        pass,
    };
    let mut summary = vec![format!(
        "check: max ∂̄ residual {:.3e} over {} points (tol {:.1e})",
        s.max_residual,
        base.len(),
        cfg.tol
    )];
    if let Some(r) = &slope {
        summary.push(match r.slope {
            Some(q) => format!(
                "check: vanishing slope {q:.3} (threshold {:.1})",
                r.threshold
            ),
            None => "check: ∂̄ residuals at the noise floor".to_string(),
        });
    }
    Ok(Outcome {
        pass,
        seed: None,
        summary,
        files: vec![
            ("dbar.csv".into(), dbar.to_csv().into_bytes()),
            ("summary.json".into(), json(&s)),
        ],
    })
}

pub(super) fn default_pipeline_bytes() -> Vec<u8> {
    json(&ScenarioConfig::default())
}

pub(super) fn pipeline(bytes: Option<&[u8]>, seed: Option<u64>) -> Result<Outcome, Failure> {
    let mut cfg: ScenarioConfig = match bytes {
        Some(b) => parse(b)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out = run_pipeline(&cfg).map_err(Failure::from)?;
    let r = &out.report;
    let summary = vec![
        format!(
            "pipeline: word of {} shears over {} slices",
            r.shear_count, r.steps
        ),
        format!(
            "window  max |word − φ₁|_{{{},x}} = {:.3e} (max ratio to ε {:.3}) {}",
            r.k,
            r.window_max_error,
            r.window.value,
            verdict(r.window.pass)
        ),
        format!(
            "outside max deviation {:.3e} (budget {:.3e}) {}",
            r.outside.value,
            r.outside.bound,
            verdict(r.outside.pass)
        ),
        format!(
            "K       max error {:.3e} (μ {:.1e}) {}",
            r.k_set.value,
            r.k_set.bound,
            verdict(r.k_set.pass)
        ),
        format!(
            "injectivity min separation {:.3e} (≥ {:.1e}) {}",
            r.injectivity.value,
            r.injectivity.bound,
            verdict(r.injectivity.pass)
        ),
    ];
    Ok(Outcome {
        pass: r.pass,
        seed: Some(cfg.seed),
        summary,
        files: vec![
            ("word.json".into(), json(&out.word)),
            ("report.json".into(), json(r)),
            ("window_errors.csv".into(), r.window_csv().into_bytes()),
            ("outside_errors.csv".into(), r.outside_csv().into_bytes()),
            ("k_errors.csv".into(), r.k_csv().into_bytes()),
        ],
    })
}

fn verdict(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "FAIL"
    }
}
