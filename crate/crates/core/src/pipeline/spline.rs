use num_complex::Complex64;

type C = Complex64;

/// Natural cubic spline through complex samples on a uniform grid.
#[derive(Clone, Debug)]
pub(crate) struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<C>,
    m: Vec<C>,
}

impl UniformSpline {
    pub(crate) fn new(x0: f64, h: f64, y: Vec<C>) -> Self {
        let n = y.len();
        assert!(n >= 3, "spline needs three samples");
        let mut m = vec![C::new(0.0, 0.0); n];
        // Thomas algorithm for m_{i−1} + 4 m_i + m_{i+1} = 6 δ²y_i / h².
        let inner = n - 2;
        let mut c = vec![0.0; inner];
        let mut d = vec![C::new(0.0, 0.0); inner];
        for i in 0..inner {
            let rhs = (y[i + 2] - y[i + 1] * 2.0 + y[i]) * (6.0 / (h * h));
            let (ci, di) = if i == 0 {
                (0.25, rhs / 4.0)
            } else {
                let w = 4.0 - c[i - 1];
                (1.0 / w, (rhs - d[i - 1]) / w)
            };
            c[i] = ci;
            d[i] = di;
        }
        for i in (0..inner).rev() {
            let next = if i + 1 < inner {
                m[i + 2]
            } else {
                C::new(0.0, 0.0)
            };
            m[i + 1] = d[i] - next * c[i];
        }
        UniformSpline { x0, h, y, m }
    }

    /// Value, first and second derivative; `x` is clamped to the grid.
    pub(crate) fn eval(&self, x: f64) -> [C; 3] {
        let n = self.y.len();
        let u = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let b = u - i as f64;
        let a = 1.0 - b;
        let h = self.h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let v = y0 * a + y1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let d1 = (y1 - y0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0);
        let d2 = m0 * a + m1 * b;
        [v, d1, d2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_functions() {
        let h = 0.01;
        let xs: Vec<f64> = (0..=400).map(|i| -2.0 + i as f64 * h).collect();
        let f = |x: f64| C::new((3.0 * x).sin(), (-x * x).exp());
        let s = UniformSpline::new(-2.0, h, xs.iter().map(|&x| f(x)).collect());
        for x in [-1.5, -0.333, 0.0, 0.777, 1.5] {
            let [v, d1, d2] = s.eval(x);
            assert!((v - f(x)).norm() < 1e-8);
            let df = C::new(3.0 * (3.0 * x).cos(), -2.0 * x * (-x * x).exp());
            assert!((d1 - df).norm() < 1e-5);
            let ddf = C::new(-9.0 * (3.0 * x).sin(), (4.0 * x * x - 2.0) * (-x * x).exp());
            assert!((d2 - ddf).norm() < 1e-2);
        }
    }

    #[test]
    fn interpolates_knots_and_lines() {
        let y: Vec<C> = (0..10).map(|i| C::new(2.0 * i as f64 - 1.0, 0.5)).collect();
        let s = UniformSpline::new(0.0, 1.0, y.clone());
        for (i, yi) in y.iter().enumerate() {
            assert!((s.eval(i as f64)[0] - yi).norm() < 1e-13);
        }
        let [v, d1, d2] = s.eval(3.3);
        assert!((v - C::new(5.6, 0.5)).norm() < 1e-12);
        assert!((d1 - C::new(2.0, 0.0)).norm() < 1e-12);
        assert!(d2.norm() < 1e-12);
    }
}
