//! Truncated Taylor arithmetic in one complex variable.
//!
//! A [`Jet`] stores normalised Taylor coefficients `c_j = f^{(j)}(z0) / j!`.

use num_complex::Complex64;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<C>,
}

impl Jet {
    pub fn constant(v: C, order: usize) -> Self {
        let mut c = vec![C::new(0.0, 0.0); order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at `z0`.
    pub fn variable(z0: C, order: usize) -> Self {
        let mut j = Self::constant(z0, order);
        if order >= 1 {
            j.c[1] = C::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> C {
        self.c[0]
    }

    /// `f^{(j)}(z0)`.
    pub fn derivative(&self, j: usize) -> C {
        let f: f64 = (1..=j).map(|i| i as f64).product();
        self.c[j] * f
    }

    /// All derivatives `f, f', …, f^{(order)}`.
    pub fn derivatives(&self) -> Vec<C> {
        (0..=self.order()).map(|j| self.derivative(j)).collect()
    }

    pub fn from_derivatives(d: &[C]) -> Self {
        let mut f = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if j > 0 {
                    f *= j as f64;
                }
                v / f
            })
            .collect();
        Jet { c }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_const(&self, s: C) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let c = (0..n)
            .map(|i| (0..=i).map(|j| self.c[j] * o.c[i - j]).sum())
            .collect();
        Jet { c }
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut b = vec![C::new(0.0, 0.0); n];
        b[0] = self.c[0].exp();
        for i in 1..n {
            let mut s = C::new(0.0, 0.0);
            for j in 1..=i {
                s += self.c[j] * b[i - j] * j as f64;
            }
            b[i] = s / i as f64;
        }
        Jet { c: b }
    }

    /// `Σ coeffs[j] T_j(self)` by Clenshaw's recurrence.
    pub fn chebyshev(&self, coeffs: &[C]) -> Jet {
        let order = self.order();
        let zero = Jet::constant(C::new(0.0, 0.0), order);
        if coeffs.is_empty() {
            return zero;
        }
        let two_t = self.scale(C::new(2.0, 0.0));
        let mut b1 = zero.clone();
        let mut b2 = zero;
        for &a in coeffs.iter().skip(1).rev() {
            let b0 = two_t.mul(&b1).sub(&b2).add_const(a);
            b2 = b1;
            b1 = b0;
        }
        self.mul(&b1).sub(&b2).add_const(coeffs[0])
    }

    /// `[T_0(self), …, T_deg(self)]`.
    pub fn chebyshev_basis(&self, deg: usize) -> Vec<Jet> {
        let order = self.order();
        let mut out = Vec::with_capacity(deg + 1);
        out.push(Jet::constant(C::new(1.0, 0.0), order));
        if deg >= 1 {
            out.push(self.clone());
        }
        let two_t = self.scale(C::new(2.0, 0.0));
        for j in 2..=deg {
            let next = two_t.mul(&out[j - 1]).sub(&out[j - 2]);
            out.push(next);
        }
        out
    }
}
