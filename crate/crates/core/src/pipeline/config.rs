use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleman::ToleranceProfile;
use crate::error::{Error, Result};
use crate::shears::{norm, Direction};

type C = Complex64;

pub const CONFIG_VERSION: u32 = 1;

/// Tolerance `ε(x)` on ℝ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ToleranceSpec {
    Constant {
        value: f64,
    },
    /// `value · exp(−rate·|x|)`.
    Exponential {
        value: f64,
        rate: f64,
    },
}

impl ToleranceSpec {
    pub fn eps(&self, x: f64) -> f64 {
        match *self {
            ToleranceSpec::Constant { value } => value,
            ToleranceSpec::Exponential { value, rate } => value * (-rate * x.abs()).exp(),
        }
    }

    pub fn scaled(&self, c: f64) -> ToleranceSpec {
        match *self {
            ToleranceSpec::Constant { value } => ToleranceSpec::Constant { value: c * value },
            ToleranceSpec::Exponential { value, rate } => ToleranceSpec::Exponential {
                value: c * value,
                rate,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ToleranceSpec::Constant { value } => value > 0.0 && value.is_finite(),
            ToleranceSpec::Exponential { value, rate } => {
                value > 0.0 && value.is_finite() && rate >= 0.0 && rate.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid tolerance {self:?}")))
        }
    }

    pub fn profile(&self, window: f64) -> Result<ToleranceProfile> {
        let s = self.clone();
        ToleranceProfile::new(window, Arc::new(move |x| s.eps(x)))
    }
}

/// Displacement `φ_t(x) = x + t·a·b(x)·d` of `ℝ ⊂ ℂ²` with the bump
/// `b(x) = (1 − u²)^power`, `u = (x − center)/radius`, supported on `|u| < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsotopyConfig {
    Bump {
        center: f64,
        radius: f64,
        power: u32,
        displacement: Vec<C>,
        magnitude: f64,
    },
}

/// Closed ball in ℂ².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Vec<C>,
    pub radius: f64,
}

/// Sampling and fitting resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionConfig {
    /// Spacing of the parameter grid the profiles are fitted on.
    pub fit_spacing: f64,
    /// Spacing of the report grid on the window.
    pub report_spacing: f64,
    /// Samples per ball of K.
    pub k_samples: usize,
    /// Directions sampled for the nice-projection report.
    pub projection_directions: usize,
    /// Each profile is fitted to this fraction of ε.
    pub profile_fraction: f64,
    /// Extra half-width of the profile fitting window beyond the report window.
    pub fit_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub n: usize,
    pub s: usize,
    pub k: u32,
    pub isotopy: IsotopyConfig,
    pub compacts: Vec<BallConfig>,
    pub window: f64,
    pub tolerance: ToleranceSpec,
    pub mu: f64,
    pub v: Direction,
    pub eps_dir: f64,
    pub steps: usize,
    /// `r₁ < r₂ < r₃`.
    pub radii: [f64; 3],
    /// Order of the almost-analytic extension of the cutoff.
    pub cutoff_order: u32,
    /// Largest increment a slice may carry on the annulus before the cutoff.
    pub eps2: f64,
    pub polynomial_convexity_assumed: bool,
    pub seed: u64,
    pub resolution: ResolutionConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let c = |re: f64, im: f64| C::new(re, im);
        ScenarioConfig {
            version: CONFIG_VERSION,
            n: 2,
            s: 1,
            k: 1,
            isotopy: IsotopyConfig::Bump {
                center: 2.5,
                radius: 2.0,
                power: 4,
                displacement: vec![c(0.6, 0.0), c(0.0, 0.8)],
                magnitude: 0.05,
            },
            compacts: vec![BallConfig {
                center: vec![c(0.0, 0.0), c(0.0, 0.5)],
                radius: 0.2,
            }],
            window: 8.0,
            tolerance: ToleranceSpec::Constant { value: 1e-2 },
            mu: 1e-2,
            v: Direction::axis(2, 1),
            eps_dir: 0.3,
            steps: 64,
            radii: [5.0, 5.5, 6.5],
            cutoff_order: 1,
            eps2: 1e-6,
            polynomial_convexity_assumed: true,
            seed: 0x5EED_0007,
            resolution: ResolutionConfig {
                fit_spacing: 5e-3,
                report_spacing: 1e-2,
                k_samples: 200,
                projection_directions: 25,
                profile_fraction: 0.125,
                fit_margin: 1.0,
            },
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.n != 2 || self.s != 1 {
            return bad(format!(
                "only n = 2, s = 1 is supported (got n = {}, s = {})",
                self.n, self.s
            ));
        }
        if self.v.n() != 2 {
            return bad("v must lie in ℂ²".into());
        }
        if !(1..=2).contains(&self.k) {
            return bad(format!(
                "k must be 1 or 2 (got {}); profiles are C² splines",
                self.k
            ));
        }
        let [r1, r2, r3] = self.radii;
        if !(0.0 < r1 && r1 < r2 && r2 < r3) {
            return bad(format!(
                "radii must satisfy 0 < r1 < r2 < r3, got {:?}",
                self.radii
            ));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return bad("window must be positive".into());
        }
        if !(self.eps_dir > 0.0 && self.eps_dir < 1.0) {
            return bad("eps_dir must lie in (0, 1)".into());
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if !(self.mu > 0.0) || !(self.eps2 > 0.0) {
            return bad("mu and eps2 must be positive".into());
        }
        self.tolerance.validate()?;
        let IsotopyConfig::Bump {
            center,
            radius,
            power,
            displacement,
            magnitude,
        } = &self.isotopy;
        if !(*radius > 0.0) || !(*magnitude >= 0.0) || !magnitude.is_finite() {
            return bad("bump radius must be positive and magnitude non-negative".into());
        }
        if center - radius <= -r1 || center + radius >= r1 {
            return bad(format!(
                "bump support [{}, {}] must lie inside (−r1, r1)",
                center - radius,
                center + radius
            ));
        }
        if *power < self.k + 2 {
            return bad(format!(
                "bump power must be at least k + 2 = {}",
                self.k + 2
            ));
        }
        if displacement.len() != 2 || !(norm(displacement) > 0.0) {
            return bad("displacement must be a nonzero vector in ℂ²".into());
        }
        for b in &self.compacts {
            if b.center.len() != 2 || !(b.radius > 0.0) {
                return bad("balls of K need a centre in ℂ² and a positive radius".into());
            }
        }
        let r = &self.resolution;
        if !(r.fit_spacing > 0.0
            && r.report_spacing > 0.0
            && r.profile_fraction > 0.0
            && r.fit_margin >= 0.0)
        {
            return bad("resolution spacings and fractions must be positive".into());
        }
        if r.projection_directions < 25 {
            return bad("at least 25 projection directions are required".into());
        }
        Ok(())
    }
}
