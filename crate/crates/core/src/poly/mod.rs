//! Sparse multivariate polynomials.
//!
//! Coefficients are generic so that the same code handles exact rational
//! input and polynomials obtained after an irrational change of basis.
//! Exponent vectors of different lengths are padded with zeros on the fly;
//! `zero()` and `one()` have dimension 0 and adapt to whatever they meet.

mod compiled;
mod graded;
mod parser;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{factorial, Field, Rational, Scalar};
use crate::tensor::{MultiIndex, SymmetricTensor};

pub use compiled::CompiledPoly;
pub use graded::{graded_substitute, GradedExpansion};
pub use parser::{parse_poly, ParseError, ParseErrorKind};

/// An exponent vector.
pub type Exponents = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial does not vanish at the origin")]
    NonzeroConstant,
    #[error("substitution matrix is not orthogonal (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("exponent weight must lie in (0, 1/2], got {0}")]
    BadWeight(String),
}

/// Sparse polynomial in `dim` variables with no stored zero coefficients.
#[derive(Clone)]
pub struct SparsePoly<C = Rational> {
    dim: usize,
    terms: BTreeMap<Exponents, C>,
}

fn pad(e: &[u32], dim: usize) -> Exponents {
    let mut v = e.to_vec();
    v.resize(dim, 0);
    v
}

impl<C: Scalar> SparsePoly<C> {
    pub fn new(dim: usize) -> Self {
        SparsePoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::new(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::new(dim);
        p.add_term(e, C::one());
        p
    }

    pub fn monomial(exps: Exponents, c: C) -> Self {
        let mut p = Self::new(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, C)>>(dim: usize, terms: I) -> Self {
        let mut p = Self::new(dim);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(&pad(exps, self.dim)).cloned().unwrap_or_else(C::zero)
    }

    /// Accumulate `c * x^exps`, growing the dimension if needed.
    pub fn add_term(&mut self, exps: Exponents, c: C) {
        if c.is_zero() {
            return;
        }
        if exps.len() > self.dim {
            self.widen(exps.len());
        }
        let key = pad(&exps, self.dim);
        match self.terms.get_mut(&key) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Pad every exponent vector to `dim` variables.
    pub fn widen(&mut self, dim: usize) {
        if dim <= self.dim {
            return;
        }
        let old = std::mem::take(&mut self.terms);
        self.terms = old.into_iter().map(|(e, c)| (pad(&e, dim), c)).collect();
        self.dim = dim;
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.widen(dim);
        self
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Smallest total degree among the terms.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&[])
    }

    /// Degree-`k` slice.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        SparsePoly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == k).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut p = Self::new(self.dim);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c.clone() * s.clone());
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.dim, C::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, x: &[C]) -> Result<C, PolyError> {
        if x.len() < self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = m * xi.clone();
                }
            }
            acc = acc + m;
        }
        Ok(acc)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::new(self.dim);
        for (e, c) in &self.terms {
            if i < e.len() && e[i] > 0 {
                let mut e2 = e.clone();
                let k = e2[i];
                e2[i] -= 1;
                p.add_term(e2, c.clone() * times(k));
            }
        }
        p
    }

    /// Substitute every variable by a polynomial: `x_i -> subs[i]`.
    pub fn compose(&self, subs: &[SparsePoly<C>]) -> Result<Self, PolyError> {
        if subs.len() < self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: subs.len() });
        }
        let out_dim = subs.iter().map(|s| s.dim).max().unwrap_or(0);
        // cache powers of each substitution
        let mut powers: Vec<Vec<SparsePoly<C>>> =
            subs.iter().map(|s| vec![SparsePoly::constant(out_dim, C::one()), s.clone().with_dim(out_dim)]).collect();
        let mut out = SparsePoly::new(out_dim);
        for (e, c) in &self.terms {
            let mut m = SparsePoly::constant(out_dim, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &powers[i][1];
                    powers[i].push(next);
                }
                m = &m * &powers[i][k as usize];
            }
            out = out + m;
        }
        Ok(out)
    }

    /// `h -> f(x* + h)`, exactly.
    pub fn shift(&self, x_star: &[C]) -> Result<Self, PolyError> {
        if x_star.len() != self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: x_star.len() });
        }
        let subs: Vec<SparsePoly<C>> =
            (0..self.dim).map(|i| SparsePoly::var(self.dim, i) + SparsePoly::constant(self.dim, x_star[i].clone())).collect();
        self.compose(&subs)
    }

    /// `T_k = grad^k f(0)`: component at multi-index `m` is the coefficient of
    /// the matching monomial times the product of factorials of its exponents.
    pub fn derivative_tensor(&self, k: usize) -> SymmetricTensor<C> {
        let mut t = SymmetricTensor::zeros(self.dim, k);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() as usize != k {
                continue;
            }
            let w: C = e.iter().fold(C::one(), |acc, &ei| acc * big_times(&factorial(ei as usize)));
            let m = MultiIndex::from_exponents(e);
            t.set(m.indices(), c.clone() * w);
        }
        t
    }

    /// True if some term has a positive exponent in variable `i`.
    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e.get(i).is_some_and(|&k| k > 0))
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SparsePoly<D> {
        let mut p = SparsePoly::new(self.dim);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), f(c));
        }
        p
    }
}

/// `k` as an element of `C`.
fn times<C: Scalar>(k: u32) -> C {
    let mut acc = C::zero();
    for _ in 0..k {
        acc = acc + C::one();
    }
    acc
}

fn big_times<C: Scalar>(n: &num_bigint::BigInt) -> C {
    // factorials up to 10! only; repeated doubling keeps this generic
    let mut acc = C::zero();
    let mut base = C::one();
    let mut n = n.clone();
    let two = num_bigint::BigInt::from(2);
    while !n.is_zero() {
        if (&n % &two).is_one() {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        n /= &two;
    }
    acc
}

impl<C: Field> SparsePoly<C> {
    pub fn to_f64(&self) -> SparsePoly<f64> {
        self.map_coeffs(Field::to_f64)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.to_f64().eval(x).unwrap_or(f64::NAN)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(Field::abs_f64).fold(0.0, f64::max)
    }

    /// Drop coefficients with magnitude `<= tol` (exact zeros are never stored).
    pub fn prune(&self, tol: f64) -> Self {
        if C::EXACT {
            return self.clone();
        }
        SparsePoly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, c)| !c.is_negligible(tol)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Largest coefficient-wise difference, padding dimensions.
    pub fn max_coeff_diff(&self, other: &SparsePoly<C>) -> f64 {
        (self.clone() - other.clone()).max_abs_coeff()
    }
}

fn same_padded(a: &[u32], b: &[u32]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n] && a[n..].iter().all(|&k| k == 0) && b[n..].iter().all(|&k| k == 0)
}

impl<C: PartialEq> PartialEq for SparsePoly<C> {
    fn eq(&self, other: &Self) -> bool {
        // padding with trailing zeros preserves the key order
        self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|((ea, ca), (eb, cb))| same_padded(ea, eb) && ca == cb)
    }
}

impl<C: Scalar> Zero for SparsePoly<C> {
    fn zero() -> Self {
        SparsePoly::new(0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Scalar> One for SparsePoly<C> {
    fn one() -> Self {
        SparsePoly::constant(0, C::one())
    }
}

impl<C: Scalar> Add for SparsePoly<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl<C: Scalar> Sub for SparsePoly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Scalar> Neg for SparsePoly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        SparsePoly { dim: self.dim, terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl<C: Scalar> Mul for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn mul(self, rhs: Self) -> SparsePoly<C> {
        let dim = self.dim.max(rhs.dim);
        let mut out = SparsePoly::new(dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = pad(ea, dim);
                for (i, &k) in eb.iter().enumerate() {
                    e[i] += k;
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Scalar> Mul for SparsePoly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

/// Canonical term order: ascending total degree, then larger powers of
/// earlier variables first.
fn canonical_order(a: &Exponents, b: &Exponents) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

impl<C: Field> SparsePoly<C> {
    /// Terms in canonical (printing) order.
    pub fn canonical_terms(&self) -> Vec<(&Exponents, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| canonical_order(a.0, b.0));
        v
    }

    /// Print with the given variable names, e.g. `x^2 - 2*x*y^2 + y^4`.
    pub fn to_string_with(&self, vars: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.canonical_terms().into_iter().enumerate() {
            let (neg, mag) = c.signed_repr();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &p) in e.iter().enumerate() {
                let name = vars.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("x{}", i + 1));
                match p {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{p}")),
                }
            }
            if factors.is_empty() {
                out.push_str(&mag);
            } else {
                if mag != "1" {
                    out.push_str(&mag);
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

/// Default variable names: `x, y, z` for up to three variables,
/// `x1, x2, ...` otherwise.
pub fn default_vars(dim: usize) -> Vec<String> {
    if dim <= 3 {
        ["x", "y", "z"][..dim].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }
}

impl<C: Field> fmt::Display for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_vars(self.dim);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.to_string_with(&refs))
    }
}

impl<C: fmt::Debug> fmt::Debug for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly[{}]", self.dim)?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn p(s: &str) -> SparsePoly {
        parse_poly(s, &["x", "y"]).unwrap()
    }

    #[test]
    fn printer_uses_canonical_order() {
        assert_eq!(p("(x - y^2)^2 + x^6").to_string(), "x^2 - 2*x*y^2 + y^4 + x^6");
        assert_eq!(p("3/2*x^2 - 1").to_string(), "-1 + 3/2*x^2");
        assert_eq!(p("x*y + y^2 + x^2").to_string(), "x^2 + x*y + y^2");
        assert_eq!(SparsePoly::<Rational>::new(2).to_string(), "0");
    }

    #[test]
    fn shift_of_square() {
        let f = parse_poly("x^2", &["x"]).unwrap();
        assert_eq!(f.shift(&[int(1)]).unwrap(), parse_poly("1 + 2*x + x^2", &["x"]).unwrap());
        assert_eq!(f.shift(&[int(0)]).unwrap(), f);
        assert!(f.shift(&[int(0), int(1)]).is_err());
    }

    #[test]
    fn shift_to_quartic_well() {
        let f = parse_poly("x^2*(x-1)^4", &["x"]).unwrap().shift(&[int(1)]).unwrap();
        assert!(f.constant_term().is_zero());
        assert!(f.homogeneous_part(1).is_zero());
        assert!(f.homogeneous_part(2).is_zero());
        assert!(f.homogeneous_part(3).is_zero());
        assert_eq!(f.homogeneous_part(4), parse_poly("x^4", &["x"]).unwrap());
        assert_eq!(f.min_degree(), Some(4));
    }

    #[test]
    fn derivative_tensors_of_fixture() {
        let f = p("x^2 + y^4 + x*y^2");
        let t2 = f.derivative_tensor(2);
        assert_eq!(t2.get(&[0, 0]), &int(2));
        assert_eq!(t2.get(&[0, 1]), &int(0));
        assert_eq!(t2.get(&[1, 1]), &int(0));
        let t3 = f.derivative_tensor(3);
        let nonzero: Vec<_> = t3.entries().filter(|(_, c)| !c.is_zero()).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0.indices(), &[0, 1, 1]);
        assert_eq!(nonzero[0].1, &int(2));
        let t4 = parse_poly("y^4", &["x", "y"]).unwrap().derivative_tensor(4);
        assert_eq!(t4.get(&[1, 1, 1, 1]), &int(24));
    }

    #[test]
    fn homogeneous_slices() {
        let f = p("x^2 + y^4 + x*y^2");
        assert_eq!(f.homogeneous_part(3), p("x*y^2"));
        assert!(f.homogeneous_part(9).is_zero());
        assert_eq!(p("(x - y^2)^2 + x^6").homogeneous_part(2), p("x^2"));
    }

    #[test]
    fn derivatives_and_eval() {
        let f = p("x^3*y + 2*y^2");
        assert_eq!(f.derivative(0), p("3*x^2*y"));
        assert_eq!(f.derivative(1), p("x^3 + 4*y"));
        assert_eq!(f.eval(&[int(2), int(3)]).unwrap(), int(42));
        assert!(f.eval(&[int(2)]).is_err());
    }

    #[test]
    fn constants_pad_to_any_dimension() {
        let f = p("x + y");
        assert_eq!(f.clone() + SparsePoly::one(), p("x + y + 1"));
        assert_eq!(f.clone() * SparsePoly::zero(), SparsePoly::zero());
        assert_eq!(SparsePoly::<Rational>::one(), SparsePoly::constant(3, int(1)));
    }

    #[test]
    fn nonconstancy_flags() {
        let g = p("x^2");
        assert!(g.depends_on(0));
        assert!(!g.depends_on(1));
    }
}
