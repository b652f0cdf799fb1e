use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::complex_to_real;
use crate::shears::{inner, norm, Direction};

type C = Complex64;

pub const BOUNDED_HULLS_NOTE: &str = "assumed (theory): uniformly bounded E-hulls";

/// Diagnostics of `π_u` restricted to the sampled curve for one direction `u`.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionDiagnostics {
    pub v: Direction,
    pub offset: f64,
    /// Largest `‖x‖` over samples with `‖π_u(x)‖ ≤ R`.
    pub max_fiber: f64,
    pub proper: bool,
    /// Smallest `‖π_u(x_{i+1}) − π_u(x_i)‖ / ‖x_{i+1} − x_i‖` outside `C`.
    pub min_stretch: f64,
    /// Smallest distance between non-adjacent image segments outside `C`.
    pub min_gap: f64,
    pub totally_real_embedding: bool,
    /// `min |⟨x, u⟩|` over the samples of K.
    pub inner_lower_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NiceProjectionReport {
    pub target_radius: f64,
    pub sample_extent: f64,
    pub directions: Vec<DirectionDiagnostics>,
    pub proper: bool,
    pub totally_real_embedding: bool,
    pub inner_lower_bound: Option<f64>,
    pub bounded_hulls: &'static str,
}

const STRETCH_MIN: f64 = 1e-3;
const GAP_MIN: f64 = 1e-9;

/// Samples `count` directions in the `eps_dir`-ball around `v` (the first is
/// `v`) and checks properness, embedding outside `C` and the lower bound on K.
///
/// `curve` is an ordered polyline with parameters `params`; `c_set` is the
/// parameter interval of the compact `C`.
pub fn nice_projection_diagnostics(
    curve: &[Vec<C>],
    params: &[f64],
    c_set: (f64, f64),
    k_samples: &[Vec<C>],
    v: &Direction,
    eps_dir: f64,
    count: usize,
    seed: u64,
) -> NiceProjectionReport {
    assert_eq!(curve.len(), params.len(), "one parameter per sample");
    let n = v.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = vec![v.clone()];
    while dirs.len() < count.max(1) {
        let a: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let r = rng.gen_range(0.0..eps_dir) / norm(&a).max(1e-12);
        let u: Vec<C> = v.v().iter().zip(&a).map(|(x, y)| x + y * r).collect();
        if let Ok(d) = Direction::new(u) {
            if d.distance(v.v()) < eps_dir {
                dirs.push(d);
            }
        }
    }
    let sample_extent = curve.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let target_radius = 0.5
        * curve
            .iter()
            .map(|x| norm(&v.project(x)))
            .fold(0.0, f64::max);
    let outside: Vec<bool> = params.iter().map(|&t| t < c_set.0 || t > c_set.1).collect();

    let directions: Vec<DirectionDiagnostics> = dirs
        .into_par_iter()
        .map(|u| {
            let images: Vec<Vec<f64>> = curve
                .iter()
                .map(|x| complex_to_real(&u.project(x)))
                .collect();
            let max_fiber = curve
                .iter()
                .zip(&images)
                .filter(|(_, w)| dist(w, &vec![0.0; w.len()]) <= target_radius)
                .map(|(x, _)| norm(x))
                .fold(0.0, f64::max);
            let segs: Vec<usize> = (0..curve.len().saturating_sub(1))
                .filter(|&i| outside[i] && outside[i + 1])
                .collect();
            let min_stretch = segs
                .iter()
                .map(|&i| {
                    let dx: Vec<C> = curve[i + 1]
                        .iter()
                        .zip(&curve[i])
                        .map(|(a, b)| a - b)
                        .collect();
                    dist(&images[i + 1], &images[i]) / norm(&dx).max(f64::MIN_POSITIVE)
                })
                .fold(f64::INFINITY, f64::min);
            let mut min_gap = f64::INFINITY;
            for (a, &i) in segs.iter().enumerate() {
                for &j in &segs[a + 1..] {
                    if j <= i + 1 {
                        continue;
                    }
                    let d =
                        segment_distance(&images[i], &images[i + 1], &images[j], &images[j + 1]);
                    min_gap = min_gap.min(d);
                }
            }
            let inner_lower_bound = (!k_samples.is_empty()).then(|| {
                k_samples
                    .iter()
                    .map(|z| inner(z, u.v()).norm())
                    .fold(f64::INFINITY, f64::min)
            });
            DirectionDiagnostics {
                offset: u.distance(v.v()),
                v: u,
                max_fiber,
                proper: max_fiber.is_finite() && max_fiber < 0.95 * sample_extent,
                min_stretch,
                min_gap,
                totally_real_embedding: min_stretch > STRETCH_MIN && min_gap > GAP_MIN,
                inner_lower_bound,
            }
        })
        .collect();
    let inner_lower_bound = directions
        .iter()
        .filter_map(|d| d.inner_lower_bound)
        .reduce(f64::min);
    NiceProjectionReport {
        target_radius,
        sample_extent,
        proper: directions.iter().all(|d| d.proper),
        totally_real_embedding: directions.iter().all(|d| d.totally_real_embedding),
        inner_lower_bound,
        directions,
        bounded_hulls: BOUNDED_HULLS_NOTE,
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Distance between the segments `[p0, p1]` and `[q0, q1]` in ℝ^d.
fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let d1: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = q1.iter().zip(q0).map(|(a, b)| a - b).collect();
    let r: Vec<f64> = p0.iter().zip(q0).map(|(a, b)| a - b).collect();
    let (a, e, f) = (dot(&d1, &d1), dot(&d2, &d2), dot(&d2, &r));
    let (s, t) = if a <= f64::EPSILON && e <= f64::EPSILON {
        (0.0, 0.0)
    } else if a <= f64::EPSILON {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = dot(&d1, &r);
        if e <= f64::EPSILON {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            let mut s = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let p: Vec<f64> = p0.iter().zip(&d1).map(|(x, d)| x + s * d).collect();
    let q: Vec<f64> = q0.iter().zip(&d2).map(|(x, d)| x + t * d).collect();
    dist(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::ball_samples;

    fn line(spacing: f64, w: f64) -> (Vec<Vec<C>>, Vec<f64>) {
        let m = (w / spacing).round() as i64;
        let params: Vec<f64> = (-m..=m).map(|i| i as f64 * spacing).collect();
        let curve = params
            .iter()
            .map(|&x| vec![C::new(x, 0.0), C::new(0.0, 0.0)])
            .collect();
        (curve, params)
    }

    fn k_ball() -> Vec<Vec<C>> {
        ball_samples(2, 0.2, 60, 3)
            .into_iter()
            .map(|z| vec![z[0], z[1] + C::new(0.0, 0.5)])
            .collect()
    }

    #[test]
    fn flat_line_passes() {
        let (curve, params) = line(0.05, 6.0);
        let k = k_ball();
        let v = Direction::axis(2, 1);
        let rep = nice_projection_diagnostics(&curve, &params, (-1.0, 1.0), &k, &v, 0.3, 25, 1);
        assert_eq!(rep.directions.len(), 25);
        assert!(rep.proper && rep.totally_real_embedding);
        assert!(rep.directions.iter().all(|d| d.offset < 0.3));
        for d in &rep.directions {
            let direct = k
                .iter()
                .map(|z| inner(z, d.v.v()).norm())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(d.inner_lower_bound, Some(direct));
        }
        assert_eq!(rep.bounded_hulls, BOUNDED_HULLS_NOTE);
    }

    #[test]
    fn loop_fails_embedding() {
        // x ↦ (x² − 1) + i x(x² − 1)·0.5 crosses itself at x = ±1.
        let params: Vec<f64> = (0..=200).map(|i| -2.0 + 0.02 * i as f64).collect();
        let curve: Vec<Vec<C>> = params
            .iter()
            .map(|&x| {
                vec![
                    C::new(x * x - 1.0, 0.5 * x * (x * x - 1.0)),
                    C::new(0.0, 0.0),
                ]
            })
            .collect();
        let v = Direction::axis(2, 1);
        let rep = nice_projection_diagnostics(&curve, &params, (5.0, 6.0), &[], &v, 0.05, 25, 2);
        assert!(!rep.directions[0].totally_real_embedding);
        assert!(rep.directions[0].min_gap < 1e-9);
        assert!(rep.inner_lower_bound.is_none());
    }

    #[test]
    fn perturbed_graph_has_finite_fibers() {
        let params: Vec<f64> = (0..=400).map(|i| -5.0 + 0.025 * i as f64).collect();
        let curve: Vec<Vec<C>> = params
            .iter()
            .map(|&x| {
                vec![
                    C::new(x, 0.05 * x.sin()),
                    C::new(0.1 * (-x * x).exp(), 0.02 * x.cos()),
                ]
            })
            .collect();
        let v = Direction::axis(2, 1);
        let rep = nice_projection_diagnostics(&curve, &params, (-1.0, 1.0), &[], &v, 0.1, 25, 3);
        for d in &rep.directions {
            assert!(d.max_fiber.is_finite() && d.proper);
            // Direct enumeration of the fiber over the target disc.
            let direct = curve
                .iter()
                .filter(|x| norm(&d.v.project(x)) <= rep.target_radius)
                .map(|x| norm(x))
                .fold(0.0, f64::max);
            assert!((direct - d.max_fiber).abs() <= 1e-12);
        }
    }

    #[test]
    fn segment_distance_cases() {
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[0.5, -1.0], &[0.5, 1.0]);
        assert_eq!(d, 0.0);
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[2.0, 1.0], &[3.0, 1.0]);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0], &[1.0, 2.0]);
        assert!((d - 2.0).abs() < 1e-15);
    }
}
