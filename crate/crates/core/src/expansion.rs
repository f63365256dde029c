//! Nested subspace chain, adapted basis, scaling exponents and the limit
//! polynomial `g` at a degenerate minimum.
//!
//! Starting from `F_0 = R^d`, each `F_k` is the part of `F_{k-1}` annihilated
//! by the order-`2k` derivative tensor restricted to `F_{k-1}`, and `E_k` is
//! its orthogonal complement in `F_{k-1}`. Coordinates in `E_j` scale like
//! `t^{1/(2j)}`, and `g` is the `t^1` coefficient of `f(x* + B(t^alpha * h))`.
//!
//! Everything runs over exact rationals first. When some orthonormal basis
//! needs an irrational normalization the whole computation is redone in `f64`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg;
use crate::poly::{graded_substitute, GradedExpansion, PolyError, SparsePoly};
use crate::scalar::{fraction_string, Field, Rational};
use crate::tensor::{Subspace, SymmetricTensor, TensorError};

/// Default cap on the number of chain steps.
pub const DEFAULT_P_MAX: usize = 6;
/// Float coefficients of a sub-unit grade above this count as nonzero.
pub const OFFENDING_TOL: f64 = 1e-9;
/// Relative threshold below which float coefficients of `g` are dropped.
pub const G_PRUNE_RTOL: f64 = 1e-12;
/// Relative tolerance for the positive semi-definiteness of the Hessian.
pub const PSD_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpansionError {
    #[error("p_max must be in 1..=8, got {0}")]
    InvalidPMax(usize),
    #[error("polynomial does not vanish at the expansion point after recentering")]
    NonzeroConstant,
    #[error("gradient does not vanish at the expansion point (norm {0:e})")]
    NonzeroGradient(f64),
    #[error("Hessian is indefinite (smallest eigenvalue {0:e}); not a minimum")]
    IndefiniteHessian(f64),
    #[error("grades below 1 survive with p = {p} (grades {grades:?}); the point is most likely not a minimum")]
    InternalConsistency { p: usize, grades: Vec<String> },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `F_0 ⊇ F_1 ⊇ ...` and the blocks `E_1, ..., E_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceChain<C = Rational> {
    /// `F_0, ..., F_p` (the last one is `{0}` unless `truncated`).
    pub f: Vec<Subspace<C>>,
    /// `E_1, ..., E_p`.
    pub e: Vec<Subspace<C>>,
    pub p_effective: usize,
    /// `F_{p_max}` was still nonzero; `E_p` is then all of `F_{p-1}`.
    pub truncated: bool,
}

impl<C: Field> SubspaceChain<C> {
    pub fn dim(&self) -> usize {
        self.f[0].dim_ambient()
    }

    /// `dim E_j` for `j = 1..=p`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.e.iter().map(Subspace::dim).collect()
    }

    /// For each column of the adapted basis, the (1-based) block index `j`.
    pub fn blocks(&self) -> Vec<usize> {
        self.e.iter().enumerate().flat_map(|(j, e)| std::iter::repeat_n(j + 1, e.dim())).collect()
    }
}

/// Recenter `f` at `x_star`: returns `h -> f(x* + h) - f(x*)` and `f(x*)`.
pub fn recenter(f: &SparsePoly, x_star: &[Rational]) -> Result<(SparsePoly, Rational), PolyError> {
    let g = f.shift(x_star)?;
    let c = g.constant_term();
    let g = g - SparsePoly::constant(f.dim(), c.clone());
    Ok((g, c))
}

/// Build the chain for `f` recentered at 0.
///
/// ```
/// use gibbsx::expansion::build_chain;
/// use gibbsx::poly::parse_poly;
/// let f = parse_poly("x^4 + y^10 + x^2*y^4", &["x", "y"]).unwrap();
/// let chain = build_chain(&f, 6).unwrap();
/// assert_eq!(chain.p_effective, 5);
/// assert_eq!(chain.block_dims(), [0, 1, 0, 0, 1]);
/// ```
pub fn build_chain<C: Field>(f: &SparsePoly<C>, p_max: usize) -> Result<SubspaceChain<C>, ExpansionError> {
    if !(1..=8).contains(&p_max) {
        return Err(ExpansionError::InvalidPMax(p_max));
    }
    let d = f.dim();
    if !f.constant_term().is_zero() {
        return Err(ExpansionError::NonzeroConstant);
    }
    let t1 = f.derivative_tensor(1);
    if !t1.is_zero() {
        let n = t1.components().iter().map(|c| c.to_f64().powi(2)).sum::<f64>().sqrt();
        return Err(ExpansionError::NonzeroGradient(n));
    }
    check_psd(&f.derivative_tensor(2))?;

    let mut fs = vec![Subspace::full(d)];
    let mut es = Vec::new();
    let mut truncated = false;
    for k in 1..=p_max {
        let prev = fs[k - 1].clone();
        let t = f.derivative_tensor(2 * k);
        let ker = t.restrict(&prev)?.kernel_map_nullspace_scaled(t.max_abs())?;
        let lifted: Vec<Vec<C>> = ker.basis().iter().map(|c| prev.lift(c)).collect();
        let fk = Subspace::span(d, &lifted)?;
        if fk.is_zero() {
            es.push(prev.canonicalize()?);
            fs.push(fk);
            break;
        }
        if k == p_max {
            truncated = true;
            es.push(prev.canonicalize()?);
            fs.push(fk);
            break;
        }
        es.push(fk.complement_in(&prev)?);
        fs.push(fk);
    }
    let p_effective = es.len();
    Ok(SubspaceChain { f: fs, e: es, p_effective, truncated })
}

fn check_psd<C: Field>(t2: &SymmetricTensor<C>) -> Result<(), ExpansionError> {
    let d = t2.dim();
    let m: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| t2.get(&[i, j]).to_f64()).collect()).collect();
    let ev = linalg::symmetric_eigenvalues(&m);
    if let (Some(&lo), Some(&hi)) = (ev.first(), ev.last()) {
        if lo < -PSD_RTOL * hi.abs().max(1.0) {
            return Err(ExpansionError::IndefiniteHessian(lo));
        }
    }
    Ok(())
}

/// `alpha_i = 1/(2j)` for column `i` in block `E_j`.
pub fn assign_alpha<C: Field>(chain: &SubspaceChain<C>) -> Vec<Rational> {
    chain.blocks().into_iter().map(|j| Rational::new(1.into(), (2 * j).into())).collect()
}

/// Columns are the bases of `E_1, ..., E_p` in order; `b[i][j]` is row `i`
/// of column `j`.
pub fn adapted_basis<C: Field>(chain: &SubspaceChain<C>) -> Vec<Vec<C>> {
    let cols: Vec<&Vec<C>> = chain.e.iter().flat_map(|e| e.basis().iter()).collect();
    let d = chain.dim();
    (0..d).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

/// Weight `sum_j i_j / (2j)` of a block-count tuple.
pub fn tuple_weight(tuple: &[u32]) -> Rational {
    tuple.iter().enumerate().fold(Rational::zero(), |acc, (j, &i)| acc + Rational::new(i.into(), (2 * (j + 1)).into()))
}

/// All `(i_1, ..., i_p)` with `sum_j i_j / (2j) = 1`, sorted by total order
/// `k = sum_j i_j` and then lexicographically (descending).
///
/// ```
/// use gibbsx::expansion::weight_one_tuples;
/// assert_eq!(weight_one_tuples(2), vec![vec![2, 0], vec![1, 2], vec![0, 4]]);
/// ```
pub fn weight_one_tuples(p: usize) -> Vec<Vec<u32>> {
    let l = (1..=p as u64).fold(1u64, |acc, j| acc.lcm(&(2 * j)));
    let mut out = Vec::new();
    fn go(j: usize, p: usize, l: u64, left: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j > p {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let unit = l / (2 * j as u64);
        let max = left / unit;
        for i in (0..=max).rev() {
            cur.push(i as u32);
            go(j + 1, p, l, left - i * unit, cur, out);
            cur.pop();
        }
    }
    go(1, p, l, l, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| {
        let ka: u32 = a.iter().sum();
        let kb: u32 = b.iter().sum();
        ka.cmp(&kb).then_with(|| b.cmp(a))
    });
    out
}

/// Block-count tuple of a monomial: `i_j = sum of exponents in block j`.
fn block_counts(exps: &[u32], blocks: &[usize], p: usize) -> Vec<u32> {
    let mut t = vec![0u32; p];
    for (&e, &j) in exps.iter().zip(blocks) {
        t[j - 1] += e;
    }
    t
}

/// `g` as the grade-1 part of `f(B(t^alpha * h))`, plus every sub-unit grade
/// that survives (exact zero test, or `|c| > OFFENDING_TOL` in floating point).
pub fn build_g_graded<C: Field>(
    f: &SparsePoly<C>,
    b: &[Vec<C>],
    alpha: &[Rational],
) -> Result<(SparsePoly<C>, Vec<(Rational, SparsePoly<C>)>, GradedExpansion<C>), ExpansionError> {
    let graded = graded_substitute(f, b, alpha)?;
    let tol = G_PRUNE_RTOL * f.max_abs_coeff().max(1.0);
    let g = graded.grade_or_zero(&Rational::one()).with_dim(f.dim()).prune(tol);
    let offending =
        graded.below(&Rational::one()).map(|(a, q)| (a.clone(), q.prune(OFFENDING_TOL))).filter(|(_, q)| !q.is_zero()).collect();
    Ok((g, offending, graded))
}

/// `g` assembled from the derivative tensors: the sum over weight-one tuples
/// of `T_k . u_1^{i_1} ... u_p^{i_p} / (i_1! ... i_p!)` where
/// `u_j = p_{E_j}(B h)` is the `E_j` part of `B h`, as a vector of linear forms.
pub fn build_g_tensor<C: Field>(chain: &SubspaceChain<C>, b: &[Vec<C>], tensors: &BTreeMap<usize, SymmetricTensor<C>>) -> SparsePoly<C> {
    let d = chain.dim();
    let p = chain.p_effective;
    let blocks = chain.blocks();
    // u_j[a] = sum_{i in block j} B_{a i} h_i
    let u: Vec<Vec<SparsePoly<C>>> = (1..=p)
        .map(|j| {
            (0..d)
                .map(|a| {
                    let mut l = SparsePoly::new(d);
                    for (i, &bj) in blocks.iter().enumerate() {
                        if bj == j {
                            let mut e = vec![0; d];
                            e[i] = 1;
                            l.add_term(e, b[a][i].clone());
                        }
                    }
                    l
                })
                .collect()
        })
        .collect();
    let mut g = SparsePoly::new(d);
    for tuple in weight_one_tuples(p) {
        // tuples using an empty block contribute nothing
        if tuple.iter().zip(chain.block_dims()).any(|(&i, dim)| i > 0 && dim == 0) {
            continue;
        }
        let k: u32 = tuple.iter().sum();
        let Some(t) = tensors.get(&(k as usize)) else { continue };
        if t.is_zero() {
            continue;
        }
        let mut acc: SymmetricTensor<SparsePoly<C>> = t.map(|c| SparsePoly::constant(d, c.clone()));
        for (j, &i) in tuple.iter().enumerate() {
            for _ in 0..i {
                acc = acc.contract_one(&u[j]).expect("dimensions agree");
            }
        }
        let denom = tuple.iter().fold(num_bigint::BigInt::one(), |a, &i| a * crate::scalar::factorial(i as usize));
        let w = C::from_rational(&Rational::new(1.into(), denom));
        let term = acc.get(&[]).clone().scale(&w);
        g = g + term;
    }
    let tol = G_PRUNE_RTOL * tensors.values().map(SymmetricTensor::max_abs).fold(1.0, f64::max);
    g.with_dim(d).prune(tol)
}

/// A surviving sub-unit grade split by block-count tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<C = Rational> {
    pub tuple: Vec<u32>,
    pub grade: Rational,
    pub poly: SparsePoly<C>,
}

/// Outcome of the even-cross-term hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck<C = Rational> {
    pub ok: bool,
    pub witnesses: Vec<Witness<C>>,
}

/// The hypothesis holds iff no sub-unit grade survives. For `p <= 4` such
/// grades cannot occur at a minimum, so a nonempty list is an error.
pub fn check_hypothesis<C: Field>(
    offending: &[(Rational, SparsePoly<C>)],
    chain: &SubspaceChain<C>,
) -> Result<HypothesisCheck<C>, ExpansionError> {
    let p = chain.p_effective;
    if !offending.is_empty() && p <= 4 {
        return Err(ExpansionError::InternalConsistency { p, grades: offending.iter().map(|(a, _)| fraction_string(a)).collect() });
    }
    let blocks = chain.blocks();
    let mut witnesses = Vec::new();
    for (a, q) in offending {
        let mut by_tuple: BTreeMap<Vec<u32>, SparsePoly<C>> = BTreeMap::new();
        for (e, c) in q.terms() {
            by_tuple.entry(block_counts(e, &blocks, p)).or_insert_with(|| SparsePoly::new(q.dim())).add_term(e.clone(), c.clone());
        }
        for (tuple, poly) in by_tuple {
            witnesses.push(Witness { tuple, grade: a.clone(), poly });
        }
    }
    Ok(HypothesisCheck { ok: offending.is_empty(), witnesses })
}

/// Flag `i` is true iff `g` depends on variable `i`.
pub fn check_nonconstancy<C: Field>(g: &SparsePoly<C>) -> Vec<bool> {
    (0..g.dim()).map(|i| g.depends_on(i)).collect()
}

/// Everything computed at one minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult<C = Rational> {
    pub chain: SubspaceChain<C>,
    pub b: Vec<Vec<C>>,
    pub alpha: Vec<Rational>,
    /// Block index `j` of every column of `b`.
    pub blocks: Vec<usize>,
    pub g: SparsePoly<C>,
    pub g_tensor: SparsePoly<C>,
    pub graded: GradedExpansion<C>,
    pub hypothesis: HypothesisCheck<C>,
    pub offending: Vec<(Rational, SparsePoly<C>)>,
    pub nonconstancy: Vec<bool>,
}

impl<C: Field> ExpansionResult<C> {
    pub fn hypothesis_ok(&self) -> bool {
        self.hypothesis.ok
    }

    /// Coefficient-wise gap between the two constructions of `g`.
    pub fn dual_gap(&self) -> f64 {
        self.g.max_coeff_diff(&self.g_tensor)
    }

    /// Smallest grade above 1, i.e. the leading correction.
    pub fn a_min(&self) -> Option<Rational> {
        self.graded.next_above(&Rational::one()).cloned()
    }

    pub fn alpha_sum(&self) -> Rational {
        self.alpha.iter().fold(Rational::zero(), |a, b| a + b)
    }
}

/// Run the full construction on `f` recentered at 0, in the field `C`.
pub fn expand_in<C: Field>(f: &SparsePoly<C>, p_max: usize) -> Result<ExpansionResult<C>, ExpansionError> {
    let chain = build_chain(f, p_max)?;
    let alpha = assign_alpha(&chain);
    let b = adapted_basis(&chain);
    let blocks = chain.blocks();
    let (g, offending, graded) = build_g_graded(f, &b, &alpha)?;
    let max_k = 2 * chain.p_effective;
    let tensors: BTreeMap<usize, SymmetricTensor<C>> = (2..=max_k).map(|k| (k, f.derivative_tensor(k))).collect();
    let g_tensor = build_g_tensor(&chain, &b, &tensors);
    let hypothesis = check_hypothesis(&offending, &chain)?;
    let nonconstancy = check_nonconstancy(&g);
    Ok(ExpansionResult { chain, b, alpha, blocks, g, g_tensor, graded, hypothesis, offending, nonconstancy })
}

/// Expansion over the rationals when possible, otherwise in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expansion {
    Exact(ExpansionResult<Rational>),
    Float(ExpansionResult<f64>),
}

/// Expand a recentered rational polynomial, falling back to `f64` only when
/// an orthonormal basis is not representable exactly.
///
/// ```
/// use gibbsx::expansion::expand;
/// use gibbsx::poly::parse_poly;
/// use gibbsx::scalar::rat;
/// let f = parse_poly("x^2 + y^4 + x*y^2", &["x", "y"]).unwrap();
/// let e = expand(&f, 6).unwrap();
/// assert_eq!(e.alpha(), &[rat(1, 2), rat(1, 4)]);
/// assert_eq!(e.g_string(&["x", "y"]), "x^2 + x*y^2 + y^4");
/// ```
pub fn expand(f: &SparsePoly, p_max: usize) -> Result<Expansion, ExpansionError> {
    match expand_in(f, p_max) {
        Ok(r) => Ok(Expansion::Exact(r)),
        Err(ExpansionError::Tensor(TensorError::NotRepresentable)) => Ok(Expansion::Float(expand_in(&f.to_f64(), p_max)?)),
        Err(e) => Err(e),
    }
}

impl Expansion {
    pub fn is_exact(&self) -> bool {
        matches!(self, Expansion::Exact(_))
    }

    pub fn alpha(&self) -> &[Rational] {
        match self {
            Expansion::Exact(r) => &r.alpha,
            Expansion::Float(r) => &r.alpha,
        }
    }

    pub fn blocks(&self) -> &[usize] {
        match self {
            Expansion::Exact(r) => &r.blocks,
            Expansion::Float(r) => &r.blocks,
        }
    }

    pub fn p_effective(&self) -> usize {
        match self {
            Expansion::Exact(r) => r.chain.p_effective,
            Expansion::Float(r) => r.chain.p_effective,
        }
    }

    pub fn truncated(&self) -> bool {
        match self {
            Expansion::Exact(r) => r.chain.truncated,
            Expansion::Float(r) => r.chain.truncated,
        }
    }

    pub fn block_dims(&self) -> Vec<usize> {
        match self {
            Expansion::Exact(r) => r.chain.block_dims(),
            Expansion::Float(r) => r.chain.block_dims(),
        }
    }

    /// `dim F_k` for `k = 0..=p`.
    pub fn chain_dims(&self) -> Vec<usize> {
        match self {
            Expansion::Exact(r) => r.chain.f.iter().map(Subspace::dim).collect(),
            Expansion::Float(r) => r.chain.f.iter().map(Subspace::dim).collect(),
        }
    }

    pub fn b_f64(&self) -> Vec<Vec<f64>> {
        match self {
            Expansion::Exact(r) => r.b.iter().map(|row| row.iter().map(Field::to_f64).collect()).collect(),
            Expansion::Float(r) => r.b.clone(),
        }
    }

    pub fn g_f64(&self) -> SparsePoly<f64> {
        match self {
            Expansion::Exact(r) => r.g.to_f64(),
            Expansion::Float(r) => r.g.clone(),
        }
    }

    pub fn g_string(&self, vars: &[&str]) -> String {
        match self {
            Expansion::Exact(r) => r.g.to_string_with(vars),
            Expansion::Float(r) => r.g.to_string_with(vars),
        }
    }

    pub fn graded_f64(&self) -> GradedExpansion<f64> {
        match self {
            Expansion::Exact(r) => {
                let all = r.graded.grades().values().fold(SparsePoly::new(r.alpha.len()), |acc, q| acc + q.to_f64());
                GradedExpansion::from_weights(&all, &r.alpha)
            }
            Expansion::Float(r) => r.graded.clone(),
        }
    }

    pub fn hypothesis_ok(&self) -> bool {
        match self {
            Expansion::Exact(r) => r.hypothesis_ok(),
            Expansion::Float(r) => r.hypothesis_ok(),
        }
    }

    /// Surviving sub-unit grades as `(grade, polynomial text)`.
    pub fn offending_strings(&self, vars: &[&str]) -> Vec<(Rational, String)> {
        match self {
            Expansion::Exact(r) => r.offending.iter().map(|(a, q)| (a.clone(), q.to_string_with(vars))).collect(),
            Expansion::Float(r) => r.offending.iter().map(|(a, q)| (a.clone(), q.to_string_with(vars))).collect(),
        }
    }

    /// Witness tuples as `(tuple, grade, polynomial text)`.
    pub fn witness_strings(&self, vars: &[&str]) -> Vec<(Vec<u32>, Rational, String)> {
        match self {
            Expansion::Exact(r) => {
                r.hypothesis.witnesses.iter().map(|w| (w.tuple.clone(), w.grade.clone(), w.poly.to_string_with(vars))).collect()
            }
            Expansion::Float(r) => {
                r.hypothesis.witnesses.iter().map(|w| (w.tuple.clone(), w.grade.clone(), w.poly.to_string_with(vars))).collect()
            }
        }
    }

    pub fn nonconstancy(&self) -> &[bool] {
        match self {
            Expansion::Exact(r) => &r.nonconstancy,
            Expansion::Float(r) => &r.nonconstancy,
        }
    }

    pub fn dual_gap(&self) -> f64 {
        match self {
            Expansion::Exact(r) => r.dual_gap(),
            Expansion::Float(r) => r.dual_gap(),
        }
    }

    pub fn a_min(&self) -> Option<Rational> {
        match self {
            Expansion::Exact(r) => r.a_min(),
            Expansion::Float(r) => r.a_min(),
        }
    }

    pub fn alpha_sum(&self) -> Rational {
        self.alpha().iter().fold(Rational::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::scalar::{int, rat};

    const XY: &[&str] = &["x", "y"];

    fn exact(s: &str) -> ExpansionResult {
        expand_in(&parse_poly(s, XY).unwrap(), DEFAULT_P_MAX).unwrap()
    }

    fn axis(i: usize) -> Vec<Rational> {
        (0..2).map(|j| int((i == j) as i64)).collect()
    }

    #[test]
    fn order_four_chain() {
        let r = exact("x^2 + y^4 + x*y^2");
        assert_eq!(r.chain.p_effective, 2);
        assert_eq!(r.chain.f[1].basis(), &[axis(1)]);
        assert!(r.chain.f[2].is_zero());
        assert_eq!(r.chain.e[0].basis(), &[axis(0)]);
        assert_eq!(r.chain.e[1].basis(), &[axis(1)]);
        assert_eq!(r.alpha, vec![rat(1, 2), rat(1, 4)]);
        assert_eq!(r.g, parse_poly("x^2 + x*y^2 + y^4", XY).unwrap());
        assert_eq!(r.g, r.g_tensor);
        assert!(r.hypothesis_ok());
        assert_eq!(r.nonconstancy, vec![true, true]);
    }

    #[test]
    fn order_six_chain() {
        let r = exact("x^4 + y^6 + x^2*y^3");
        assert_eq!(r.chain.block_dims(), vec![0, 1, 1]);
        assert_eq!(r.chain.e[1].basis(), &[axis(0)]);
        assert_eq!(r.chain.e[2].basis(), &[axis(1)]);
        assert_eq!(r.alpha, vec![rat(1, 4), rat(1, 6)]);
        assert_eq!(r.g, r.g_tensor);
    }

    #[test]
    fn counterexample_chain() {
        let r = exact("x^4 + y^10 + x^2*y^4");
        assert_eq!(r.chain.block_dims(), vec![0, 1, 0, 0, 1]);
        assert_eq!(r.alpha, vec![rat(1, 4), rat(1, 10)]);
        assert_eq!(r.g, parse_poly("x^4 + y^10", XY).unwrap());
        assert_eq!(r.offending, vec![(rat(9, 10), parse_poly("x^2*y^4", XY).unwrap())]);
        assert!(!r.hypothesis_ok());
        assert_eq!(r.hypothesis.witnesses[0].tuple, vec![0, 2, 0, 0, 4]);
        assert_eq!(r.g, r.g_tensor);
    }

    #[test]
    fn noncoercive_archetype_chain() {
        let r = exact("(x - y^2)^2 + x^6");
        assert_eq!(r.g, parse_poly("x^2 - 2*x*y^2 + y^4", XY).unwrap());
        assert!(r.offending.is_empty());
        assert_eq!(r.g, r.g_tensor);
        assert_eq!(r.nonconstancy, vec![true, true]);
    }

    #[test]
    fn nondegenerate_hessian() {
        let r = exact("x^2 + y^2");
        assert_eq!(r.alpha, vec![rat(1, 2), rat(1, 2)]);
        assert!(r.hypothesis_ok());
        assert_eq!(r.chain.p_effective, 1);
    }

    #[test]
    fn rotated_chain_needs_floats() {
        let f = parse_poly("(x+y)^2 + (x-y)^4", XY).unwrap();
        assert!(matches!(expand_in(&f, 6), Err(ExpansionError::Tensor(TensorError::NotRepresentable))));
        let e = expand(&f, 6).unwrap();
        assert!(!e.is_exact());
        let b = e.b_f64();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b[0][0] - s).abs() < 1e-12 && (b[1][0] - s).abs() < 1e-12);
        assert!((b[0][1] - s).abs() < 1e-12 && (b[1][1] + s).abs() < 1e-12);
        assert!(e.dual_gap() < 1e-9);
        let g = e.g_f64();
        assert!((g.coeff(&[2, 0]) - 2.0).abs() < 1e-9);
        assert!((g.coeff(&[0, 4]) - 4.0).abs() < 1e-9);
        assert_eq!(g.num_terms(), 2);
    }

    #[test]
    fn one_dimensional_basis() {
        let r = expand_in(&parse_poly("x^4", &["x"]).unwrap(), 6).unwrap();
        assert_eq!(r.b, vec![vec![int(1)]]);
        assert_eq!(r.alpha, vec![rat(1, 4)]);
    }

    #[test]
    fn rejects_non_minima() {
        let f = parse_poly("x + y^2", XY).unwrap();
        assert!(matches!(build_chain(&f, 6), Err(ExpansionError::NonzeroGradient(_))));
        let f = parse_poly("x^2 - y^2", XY).unwrap();
        assert!(matches!(build_chain(&f, 6), Err(ExpansionError::IndefiniteHessian(_))));
        let f = parse_poly("x^2 + y^3 + y^4", XY).unwrap();
        assert!(matches!(expand_in(&f, 6), Err(ExpansionError::InternalConsistency { p: 2, .. })));
        assert!(matches!(build_chain(&f, 0), Err(ExpansionError::InvalidPMax(0))));
    }

    #[test]
    fn flat_direction_truncates() {
        let f = parse_poly("x^2", XY).unwrap();
        let c = build_chain(&f, 3).unwrap();
        assert!(c.truncated);
        assert_eq!(c.p_effective, 3);
        assert_eq!(c.block_dims(), vec![1, 0, 1]);
    }

    #[test]
    fn tuple_tables() {
        let t3 = weight_one_tuples(3);
        let mut want3 = vec![vec![2, 0, 0], vec![1, 2, 0], vec![0, 4, 0], vec![1, 0, 3], vec![0, 2, 3], vec![0, 0, 6]];
        want3.sort();
        let mut got3 = t3.clone();
        got3.sort();
        assert_eq!(got3, want3);
        assert_eq!(weight_one_tuples(4).len(), 14);
        for t in weight_one_tuples(5) {
            assert_eq!(tuple_weight(&t), int(1));
        }
    }
}
