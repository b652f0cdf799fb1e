use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::jet::Jet;

type C = Complex64;

/// One summand of an [`EntireApproximant`]. Every stage is entire in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stage {
    /// `Σ_j cheb[j] T_j(z / scale)`.
    Polynomial { scale: f64, cheb: Vec<C> },
    /// Symmetric Gaussian atoms `G(u) = exp(−u²/(2 width²))`:
    /// `Σ_i even[i]·(G(z−c_i) + G(z+c_i)) + odd[i]·(G(z−c_i) − G(z+c_i))`.
    Atoms {
        annulus: usize,
        width: f64,
        centers: Vec<f64>,
        even: Vec<C>,
        odd: Vec<C>,
        /// Largest `|residual|_{k,x} / ε(x)` left on the stage's fit region.
        fit_error: f64,
        /// C^k size of the stage on `[0, annulus − 2]`.
        leak: f64,
    },
}

impl Stage {
    /// Jets of the even and odd atom pairs at `z`.
    pub(crate) fn atom_jets(width: f64, centers: &[f64], z: &Jet) -> (Vec<Jet>, Vec<Jet>) {
        let inv = C::new(-0.5 / (width * width), 0.0);
        centers
            .iter()
            .map(|&c| {
                let a = z.add_const(C::new(-c, 0.0));
                let b = z.add_const(C::new(c, 0.0));
                let ga = a.mul(&a).scale(inv).exp();
                let gb = b.mul(&b).scale(inv).exp();
                (ga.add(&gb), ga.sub(&gb))
            })
            .unzip()
    }

    pub fn jet(&self, z0: C, order: usize) -> Jet {
        let z = Jet::variable(z0, order);
        match self {
            Stage::Polynomial { scale, cheb } => z.scale(C::new(1.0 / scale, 0.0)).chebyshev(cheb),
            Stage::Atoms {
                width,
                centers,
                even,
                odd,
                ..
            } => {
                let (e, o) = Self::atom_jets(*width, centers, &z);
                let mut acc = Jet::constant(C::new(0.0, 0.0), order);
                for i in 0..centers.len() {
                    acc = acc.add(&e[i].scale(even[i])).add(&o[i].scale(odd[i]));
                }
                acc
            }
        }
    }

    pub fn eval(&self, z: C) -> C {
        self.jet(z, 0).value()
    }

    pub(crate) fn is_zero(&self) -> bool {
        let zero = C::new(0.0, 0.0);
        match self {
            Stage::Polynomial { cheb, .. } => cheb.iter().all(|&c| c == zero),
            Stage::Atoms { even, odd, .. } => even.iter().chain(odd).all(|&c| c == zero),
        }
    }

    pub(crate) fn with_record(mut self, fit: f64, leak_value: f64) -> Self {
        if let Stage::Atoms {
            fit_error, leak, ..
        } = &mut self
        {
            *fit_error = fit;
            *leak = leak_value;
        }
        self
    }
}

/// An entire function represented as a finite sum of [`Stage`]s.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntireApproximant {
    stages: Vec<Stage>,
}

impl EntireApproximant {
    pub fn new(stages: Vec<Stage>) -> Self {
        EntireApproximant { stages }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_zero(&self) -> bool {
        self.stages.iter().all(|s| s.is_zero())
    }

    pub fn eval(&self, z: C) -> C {
        self.stages.iter().map(|s| s.eval(z)).sum()
    }

    /// Taylor jet of the approximant at `z0` up to `order`.
    pub fn jet(&self, z0: C, order: usize) -> Jet {
        self.stages
            .iter()
            .fold(Jet::constant(C::new(0.0, 0.0), order), |acc, s| {
                acc.add(&s.jet(z0, order))
            })
    }

    pub fn derivative(&self, z: C, j: usize) -> C {
        self.jet(z, j).derivative(j)
    }

    pub fn plus_constant(&self, c: C) -> Self {
        let mut stages = self.stages.clone();
        stages.push(Stage::Polynomial {
            scale: 1.0,
            cheb: vec![c],
        });
        EntireApproximant { stages }
    }

    pub fn scaled(&self, c: C) -> Self {
        let stages = self
            .stages
            .iter()
            .map(|s| match s.clone() {
                Stage::Polynomial { scale, cheb } => Stage::Polynomial {
                    scale,
                    cheb: cheb.into_iter().map(|a| a * c).collect(),
                },
                Stage::Atoms {
                    annulus,
                    width,
                    centers,
                    even,
                    odd,
                    fit_error,
                    leak,
                } => Stage::Atoms {
                    annulus,
                    width,
                    centers,
                    even: even.into_iter().map(|a| a * c).collect(),
                    odd: odd.into_iter().map(|a| a * c).collect(),
                    fit_error,
                    leak: leak * c.norm(),
                },
            })
            .collect();
        EntireApproximant { stages }
    }

    /// Sum of recorded leak sizes of the local stages.
    pub fn leak_total(&self) -> f64 {
        self.stages
            .iter()
            .map(|s| match s {
                Stage::Atoms { leak, .. } => *leak,
                _ => 0.0,
            })
            .sum()
    }
}
