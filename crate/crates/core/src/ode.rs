//! Classical RK4 for holomorphic ODEs, used as the reference integrator.

use num_complex::Complex64;

type C = Complex64;

fn axpy(z: &[C], a: f64, k: &[C]) -> Vec<C> {
    z.iter().zip(k).map(|(z, k)| z + k * a).collect()
}

/// Fixed-step RK4 for `ż = F(t, z)` from `t0` to `t1`.
pub fn rk4<F>(field: &F, z0: &[C], t0: f64, t1: f64, steps: usize) -> Vec<C>
where
    F: Fn(f64, &[C]) -> Vec<C> + ?Sized,
{
    let dt = (t1 - t0) / steps as f64;
    let mut z = z0.to_vec();
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        let k1 = field(t, &z);
        let k2 = field(t + dt / 2.0, &axpy(&z, dt / 2.0, &k1));
        let k3 = field(t + dt / 2.0, &axpy(&z, dt / 2.0, &k2));
        let k4 = field(t + dt, &axpy(&z, dt, &k3));
        for i in 0..z.len() {
            z[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    z
}

/// RK4 with the step count doubled until two successive results agree to `tol`
/// (max-norm). Returns the finer result and the last observed difference.
pub fn rk4_to_tolerance<F>(field: &F, z0: &[C], t0: f64, t1: f64, tol: f64) -> (Vec<C>, f64)
where
    F: Fn(f64, &[C]) -> Vec<C> + ?Sized,
{
    let mut steps = 16;
    let mut prev = rk4(field, z0, t0, t1, steps);
    loop {
        steps *= 2;
        let next = rk4(field, z0, t0, t1, steps);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff <= tol || steps >= 1 << 16 {
            return (next, diff);
        }
        prev = next;
    }
}
