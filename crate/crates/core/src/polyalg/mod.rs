//! Multivariate polynomials over exact rationals or `f64`, Taylor jets,
//! bump-polynomial jet interpolation and equivariant averaging/lifting.

mod action;
mod jets;
mod modular;

pub use action::{equivariant_average, equivariant_jet_lift, transport_jet, LinearAction, MatrixBackend};
pub use jets::{bump_poly, degree_bound, jet_interpolate, taylor_jet, Jet};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exponent vector.
pub type Monomial = Vec<u32>;

/// Coefficient field of a [`Polynomial`]. The multiplication and Taylor
/// hooks let the exact backend substitute faster integer kernels.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// `None` when `x` cannot be represented without rounding semantics.
    fn from_f64(x: f64) -> Option<Self>;
    /// Equality up to the backend's tolerance.
    fn close(&self, other: &Self) -> bool;

    fn from_i64(x: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(x)))
    }

    fn mul_poly(a: &Polynomial<Self>, b: &Polynomial<Self>) -> Polynomial<Self> {
        a.mul_naive(b)
    }

    /// Coefficients of `f(p + z)` in `z` of total degree below `k`.
    fn taylor(f: &Polynomial<Self>, p: &[Self], k: usize) -> Polynomial<Self> {
        f.taylor_generic(p, k)
    }

    /// `Σ_j reps[j] · (1 − (1 − bumps[j]^k)^k)`.
    fn interpolate(bumps: &[Polynomial<Self>], reps: &[Polynomial<Self>], k: usize) -> Polynomial<Self> {
        jets::interpolate_generic(bumps, reps, k)
    }

    /// `(1/|mats|) Σ_A f∘A`.
    fn average(f: &Polynomial<Self>, mats: &[Vec<Vec<Self>>]) -> Polynomial<Self> {
        action::average_generic(f, mats)
    }
}

impl Coefficient for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(_: f64) -> Option<Self> {
        None
    }
    fn close(&self, other: &Self) -> bool {
        self == other
    }
    fn mul_poly(a: &Polynomial<Self>, b: &Polynomial<Self>) -> Polynomial<Self> {
        modular::mul_exact(a, b)
    }
    fn taylor(f: &Polynomial<Self>, p: &[Self], k: usize) -> Polynomial<Self> {
        modular::taylor_exact(f, p, k)
    }
    fn interpolate(bumps: &[Polynomial<Self>], reps: &[Polynomial<Self>], k: usize) -> Polynomial<Self> {
        modular::interpolate_exact(bumps, reps, k).unwrap_or_else(|| jets::interpolate_generic(bumps, reps, k))
    }
    fn average(f: &Polynomial<Self>, mats: &[Vec<Vec<Self>>]) -> Polynomial<Self> {
        modular::average_exact(f, mats).unwrap_or_else(|| action::average_generic(f, mats))
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL * self.abs().max(other.abs()).max(1.0)
    }
}

/// Relative tolerance for float comparisons of points and jets.
pub const FLOAT_TOL: f64 = 1e-9;

pub type QPoly = Polynomial<BigRational>;
pub type FPoly = Polynomial<f64>;

/// Sparse polynomial in `nvars` variables; zero coefficients are never
/// stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<C: Coefficient> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, C::one())
    }

    pub fn monomial(exponents: Monomial, c: C) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add_term(&mut self, e: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let s = existing.add(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))))
    }

    pub fn mul_naive(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Monomial = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.nvars);
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

    pub fn eval(&self, x: &[C]) -> C {
        self.terms.iter().fold(C::zero(), |acc, (e, c)| {
            let m = e.iter().zip(x).fold(c.clone(), |m, (&k, xi)| (0..k).fold(m, |m, _| m.mul(xi)));
            acc.add(&m)
        })
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| e.iter().zip(x).fold(c.to_f64(), |m, (&k, xi)| m * xi.powi(k as i32))).sum()
    }

    /// Gradient evaluated in floating point.
    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nvars).map(|i| self.derivative(i).eval_f64(x)).collect()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c.mul(&C::from_i64(e[i] as i64)));
            }
        }
        out
    }

    /// Terms of total degree `< k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms
                .iter()
                .filter(|(e, _)| (e.iter().sum::<u32>() as usize) < k)
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// `x ↦ f(A x)` for a square matrix `A` (rows of coefficients).
    pub fn compose_linear(&self, a: &[Vec<C>]) -> Self {
        let n = self.nvars;
        assert_eq!(a.len(), n, "matrix size mismatch");
        if let Some(perm) = signed_permutation(a) {
            // x_i ↦ s_i x_{π(i)} sends monomials to monomials
            return Self::from_terms(
                n,
                self.terms.iter().map(|(e, c)| {
                    let mut f = vec![0; n];
                    let mut coeff = c.clone();
                    for (i, &k) in e.iter().enumerate() {
                        let (j, negate) = perm[i];
                        f[j] += k;
                        if negate && k % 2 == 1 {
                            coeff = coeff.neg();
                        }
                    }
                    (f, coeff)
                }),
            );
        }
        let forms: Vec<Self> = a
            .iter()
            .map(|row| Self::from_terms(n, row.iter().enumerate().map(|(j, c)| (unit(n, j), c.clone()))))
            .collect();
        let max_deg: Vec<u32> = (0..n).map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<Self>> = forms
            .iter()
            .zip(&max_deg)
            .map(|(l, &d)| {
                let mut v = vec![Self::one(n)];
                for k in 1..=d as usize {
                    let next = &v[k - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let mut m = Self::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            out = &out + &m;
        }
        out
    }

    /// `z ↦ f(z + p)`, the full re-expansion.
    pub fn shift(&self, p: &[C]) -> Self {
        let n = self.nvars;
        let forms: Vec<Self> = (0..n).map(|i| &Self::var(n, i) + &Self::constant(n, p[i].clone())).collect();
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let mut m = Self::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &forms[i].pow(k);
                }
            }
            out = &out + &m;
        }
        out
    }

    fn taylor_generic(&self, p: &[C], k: usize) -> Self {
        let n = self.nvars;
        let alphas = multi_indices(n, k);
        let max_deg: Vec<u32> = (0..n).map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<C>> = (0..n)
            .map(|i| {
                let mut v = vec![C::one()];
                for j in 1..=max_deg[i] as usize {
                    v.push(v[j - 1].mul(&p[i]));
                }
                v
            })
            .collect();
        let mut out = Self::zero(n);
        for alpha in alphas {
            let mut acc = C::zero();
            for (e, c) in &self.terms {
                if e.iter().zip(&alpha).any(|(a, b)| a < b) {
                    continue;
                }
                let mut t = c.clone();
                for i in 0..n {
                    let (b, a) = (e[i], alpha[i]);
                    if a > 0 {
                        t = t.mul(&C::from_rational(&BigRational::from_integer(binomial(b, a))));
                    }
                    t = t.mul(&powers[i][(b - a) as usize]);
                }
                acc = acc.add(&t);
            }
            out.add_term(alpha, acc);
        }
        out
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn to_f64(&self) -> FPoly {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Largest coefficient magnitude (in floating point).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl FPoly {
    /// Drops coefficients with magnitude below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().filter(|(_, c)| c.abs() > tol).map(|(e, c)| (e.clone(), *c)))
    }
}

impl QPoly {
    /// Polynomial from `(exponents, numerator, denominator)` records.
    pub fn from_records(nvars: usize, records: &[(Vec<u32>, i64, i64)]) -> crate::Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, num, den) in records {
            if e.len() != nvars {
                return Err(crate::Error::Shape(format!("monomial {e:?} is not in {nvars} variables")));
            }
            if *den == 0 {
                return Err(crate::Error::Shape("zero denominator".into()));
            }
            p.add_term(e.clone(), BigRational::new(BigInt::from(*num), BigInt::from(*den)));
        }
        Ok(p)
    }
}

fn unit(n: usize, j: usize) -> Monomial {
    let mut e = vec![0; n];
    e[j] = 1;
    e
}

/// `Some([(π(i), negate_i)])` when `a` is a signed permutation matrix:
/// each row has exactly one nonzero entry, `±1`, in distinct columns.
pub(crate) fn signed_permutation<C: Coefficient>(a: &[Vec<C>]) -> Option<Vec<(usize, bool)>> {
    let one = C::one();
    let minus = one.neg();
    let mut seen = vec![false; a.len()];
    a.iter()
        .map(|row| {
            let nz: Vec<usize> = (0..row.len()).filter(|&j| !row[j].is_zero()).collect();
            match nz.as_slice() {
                [j] if (row[*j] == one || row[*j] == minus) && !seen[*j] => {
                    seen[*j] = true;
                    Some((*j, row[*j] == minus))
                }
                _ => None,
            }
        })
        .collect()
}

/// All exponent vectors in `n` variables of total degree `< k`, graded.
pub fn multi_indices(n: usize, k: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..k as u32 {
        let mut level = Vec::new();
        fill(n, d, &mut vec![0; n], 0, &mut level);
        level.sort();
        out.extend(level);
    }
    out
}

fn fill(n: usize, remaining: u32, cur: &mut Monomial, i: usize, out: &mut Vec<Monomial>) {
    if i + 1 == n || n == 0 {
        if n > 0 {
            cur[i] = remaining;
        }
        if n > 0 || remaining == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for v in 0..=remaining {
        cur[i] = v;
        fill(n, remaining - v, cur, i + 1, out);
    }
    cur[i] = 0;
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

impl<C: Coefficient> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coefficient> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.neg());
        }
        out
    }
}

impl<C: Coefficient> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        C::mul_poly(self, rhs)
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.map_coeffs(|c| c.neg())
    }
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                    .collect();
                let c = format!("{c:?}");
                if vars.is_empty() {
                    c
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Rational helper: `num/den`.
pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests;
