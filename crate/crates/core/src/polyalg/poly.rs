use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

type C = Complex64;

/// Exponent multi-index, ordered graded-lexicographically: total degree first,
/// then lexicographic with larger leading exponents first (so `z1` precedes `z2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn zero(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn unit(n: usize, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors in `n` variables with total degree exactly `k`, in graded-lex order.
pub fn monomials_of_degree(n: usize, k: u32) -> Vec<Monomial> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=k).rev() {
            prefix.push(a);
            rec(n, k - a, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return if k == 0 {
            vec![Monomial(vec![])]
        } else {
            vec![]
        };
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All exponent vectors with total degree at most `k`.
pub fn monomials_up_to(n: usize, k: u32) -> Vec<Monomial> {
    (0..=k).flat_map(|d| monomials_of_degree(n, d)).collect()
}

/// Multivariate polynomial with complex coefficients in canonical form
/// (no stored coefficient is exactly zero).
#[derive(Clone, Debug, PartialEq)]
pub struct CPolynomial {
    n_vars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl CPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        CPolynomial {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: C) -> Self {
        Self::monomial(n_vars, Monomial::zero(n_vars), c)
    }

    /// The coordinate function `z_var` (0-based).
    pub fn variable(n_vars: usize, var: usize) -> Self {
        assert!(var < n_vars, "variable index out of range");
        Self::monomial(n_vars, Monomial::unit(n_vars, var), C::new(1.0, 0.0))
    }

    pub fn monomial(n_vars: usize, alpha: Monomial, c: C) -> Self {
        assert_eq!(alpha.len(), n_vars, "exponent length must equal n_vars");
        let mut terms = BTreeMap::new();
        if c != C::new(0.0, 0.0) {
            terms.insert(alpha, c);
        }
        CPolynomial { n_vars, terms }
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, summing repeats.
    pub fn from_terms<I>(n_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut p = Self::zero(n_vars);
        for (alpha, c) in terms {
            if alpha.len() != n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars,
                    got: alpha.len(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// The linear form `Σ a_i z_i`.
    pub fn linear_form(a: &[C]) -> Self {
        let n = a.len();
        let mut p = Self::zero(n);
        for (i, &c) in a.iter().enumerate() {
            p.add_term(Monomial::unit(n, i), c);
        }
        p
    }

    fn add_term(&mut self, alpha: Monomial, c: C) {
        if c == C::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(alpha);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == C::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &Monomial) -> C {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, or −1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|a| a.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &[C]) -> Result<C> {
        if z.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C]) -> C {
        if self.terms.is_empty() {
            return C::new(0.0, 0.0);
        }
        let mut maxe = vec![0u32; self.n_vars];
        for a in self.terms.keys() {
            for (m, &e) in maxe.iter_mut().zip(&a.0) {
                *m = (*m).max(e);
            }
        }
        let powers: Vec<Vec<C>> = z
            .iter()
            .zip(&maxe)
            .map(|(&zi, &m)| {
                let mut v = Vec::with_capacity(m as usize + 1);
                let mut acc = C::new(1.0, 0.0);
                v.push(acc);
                for _ in 0..m {
                    acc *= zi;
                    v.push(acc);
                }
                v
            })
            .collect();
        let mut s = C::new(0.0, 0.0);
        for (a, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t *= powers[i][e as usize];
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<C> {
        let z: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
        self.eval(&z)
    }

    pub fn scale(&self, c: C) -> Self {
        let mut p = Self::zero(self.n_vars);
        for (a, &v) in &self.terms {
            p.add_term(a.clone(), v * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::constant(self.n_vars, C::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// ∂/∂z_var (equivalently ∂/∂x_var for a polynomial in real variables).
    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.n_vars, "variable index out of range");
        let mut p = Self::zero(self.n_vars);
        for (a, &c) in &self.terms {
            let e = a.0[var];
            if e == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[var] -= 1;
            p.add_term(b, c * e as f64);
        }
        p
    }

    /// Iterated partial derivative with multiplicities given by `beta`.
    pub fn partial_multi(&self, beta: &[u32]) -> Self {
        assert_eq!(
            beta.len(),
            self.n_vars,
            "multi-index length must equal n_vars"
        );
        let mut p = self.clone();
        for (var, &b) in beta.iter().enumerate() {
            for _ in 0..b {
                p = p.partial(var);
            }
        }
        p
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        CPolynomial {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == k)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Rewrites `p(z)` as a polynomial in the 2n real coordinates with
    /// `z_j = x_{2j} + i·x_{2j+1}` (0-based).
    pub fn to_real(&self) -> Self {
        let m = 2 * self.n_vars;
        let zs: Vec<CPolynomial> = (0..self.n_vars)
            .map(|j| {
                let mut row = vec![C::new(0.0, 0.0); m];
                row[2 * j] = C::new(1.0, 0.0);
                row[2 * j + 1] = C::new(0.0, 1.0);
                CPolynomial::linear_form(&row)
            })
            .collect();
        self.compose(&zs)
    }

    /// Real partial derivative over the 2n real coordinates.
    pub fn real_partial(&self, beta: &[u32]) -> Result<Self> {
        if beta.len() != 2 * self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_vars,
                got: beta.len(),
            });
        }
        Ok(self.to_real().partial_multi(beta))
    }

    /// Substitutes polynomial `subs[l]` for variable `z_l`.
    pub fn compose(&self, subs: &[CPolynomial]) -> Self {
        assert_eq!(subs.len(), self.n_vars, "one substitution per variable");
        let m = subs.first().map(|s| s.n_vars).unwrap_or(0);
        let mut cache: Vec<Vec<CPolynomial>> = subs
            .iter()
            .map(|s| vec![CPolynomial::constant(s.n_vars, C::new(1.0, 0.0))])
            .collect();
        let mut out = Self::zero(m);
        for (a, &c) in &self.terms {
            let mut t = CPolynomial::constant(m, c);
            for (var, &e) in a.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[var].len() <= e as usize {
                    let next = cache[var].last().unwrap() * &subs[var];
                    cache[var].push(next);
                }
                t = &t * &cache[var][e as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Substitutes the linear form `Σ_i forms[l][i]·y_i` for variable `z_l`.
    pub fn substitute_linear(&self, forms: &[Vec<C>]) -> Self {
        let subs: Vec<CPolynomial> = forms.iter().map(|f| CPolynomial::linear_form(f)).collect();
        self.compose(&subs)
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj_coeffs(&self) -> Self {
        CPolynomial {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), c.conj()))
                .collect(),
        }
    }
}

impl Add for &CPolynomial {
    type Output = CPolynomial;
    fn add(self, rhs: &CPolynomial) -> CPolynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "n_vars mismatch");
        let mut p = self.clone();
        for (a, &c) in &rhs.terms {
            p.add_term(a.clone(), c);
        }
        p
    }
}

impl Sub for &CPolynomial {
    type Output = CPolynomial;
    fn sub(self, rhs: &CPolynomial) -> CPolynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "n_vars mismatch");
        let mut p = self.clone();
        for (a, &c) in &rhs.terms {
            p.add_term(a.clone(), -c);
        }
        p
    }
}

impl Neg for &CPolynomial {
    type Output = CPolynomial;
    fn neg(self) -> CPolynomial {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Mul for &CPolynomial {
    type Output = CPolynomial;
    fn mul(self, rhs: &CPolynomial) -> CPolynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "n_vars mismatch");
        let mut p = CPolynomial::zero(self.n_vars);
        for (a, &c) in &self.terms {
            for (b, &d) in &rhs.terms {
                p.add_term(a.times(b), c * d);
            }
        }
        p
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for CPolynomial {
            type Output = CPolynomial;
            fn $m(self, rhs: CPolynomial) -> CPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl fmt::Display for CPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (i, &e) in a.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", i + 1)?,
                    _ => write!(f, "*z{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    alpha: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    n_vars: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for CPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermRepr {
                    alpha: a.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolyRepr::deserialize(d)?;
        if r.n_vars == 0 {
            return Err(serde::de::Error::custom("n_vars must be positive"));
        }
        CPolynomial::from_terms(
            r.n_vars,
            r.terms
                .into_iter()
                .map(|t| (Monomial(t.alpha), C::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
