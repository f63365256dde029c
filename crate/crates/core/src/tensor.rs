//! Dense symmetric tensors stored by canonical (sorted) multi-index.
//!
//! An order-`k` symmetric tensor on `R^d` has `C(d+k-1, k)` independent
//! components, one per non-decreasing index tuple. Lookups with an unsorted
//! tuple sort it first, so permutation invariance holds by construction.

use std::fmt;

use thiserror::Error;

use crate::linalg;
use crate::scalar::{binomial, Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot contract {requested} slots of an order-{order} tensor")]
    TooManySlots { requested: usize, order: usize },
    #[error("kernel map needs an even order >= 2, got {0}")]
    OddOrder(usize),
    #[error("orthonormal basis is not representable exactly")]
    NotRepresentable,
    #[error("basis vectors are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
}

/// A non-decreasing tuple of 0-based coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Sorts `indices` into canonical order.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Exponent vector: how many times each coordinate appears.
    pub fn exponents(&self, dim: usize) -> Vec<u32> {
        let mut e = vec![0u32; dim];
        for &i in &self.0 {
            e[i] += 1;
        }
        e
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        let mut v = Vec::new();
        for (i, &e) in exps.iter().enumerate() {
            v.extend(std::iter::repeat_n(i, e as usize));
        }
        MultiIndex(v)
    }

    /// Number of distinct orderings of the tuple, `k! / prod(mult_i!)`.
    pub fn multiplicity(&self) -> u128 {
        let mut acc: u128 = 1;
        let mut placed = 0usize;
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            let run = j - i;
            placed += run;
            acc *= binomial(placed, run);
            i = j;
        }
        acc
    }
}

/// All canonical multi-indices of the given order on `R^dim`, in lex order.
pub fn canonical_indices(dim: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binomial(dim + order - 1, order).max(1) as usize);
    if dim == 0 {
        if order == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    let mut cur = vec![0usize; order];
    loop {
        out.push(MultiIndex(cur.clone()));
        // advance to the next non-decreasing tuple
        let mut pos = order;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] + 1 < dim {
                let v = cur[pos] + 1;
                for c in cur[pos..].iter_mut() {
                    *c = v;
                }
                break;
            }
        }
    }
}

/// Rank of a sorted tuple in the lex enumeration of `canonical_indices`.
fn rank(dim: usize, sorted: &[usize]) -> usize {
    let k = sorted.len();
    let mut r: u128 = 0;
    let mut prev = 0usize;
    for (j, &ij) in sorted.iter().enumerate() {
        let rest = k - j - 1;
        for v in prev..ij {
            // tuples of length `rest` drawn from {v..dim-1}
            r += binomial(dim - v + rest - 1, rest);
        }
        prev = ij;
    }
    r as usize
}

/// Dense symmetric tensor of order `order` on `R^dim`.
#[derive(Clone, PartialEq)]
pub struct SymmetricTensor<C> {
    dim: usize,
    order: usize,
    comps: Vec<C>,
}

impl<C: Scalar> SymmetricTensor<C> {
    pub fn zeros(dim: usize, order: usize) -> Self {
        let n = if dim == 0 { usize::from(order == 0) } else { binomial(dim + order - 1, order) as usize };
        SymmetricTensor { dim, order, comps: vec![C::zero(); n] }
    }

    /// Build from `(index tuple, value)` pairs; tuples may be unsorted, and
    /// later entries overwrite earlier ones for the same canonical tuple.
    pub fn from_entries<I>(dim: usize, order: usize, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, C)>,
    {
        let mut t = Self::zeros(dim, order);
        for (idx, value) in entries {
            if idx.len() != order {
                return Err(TensorError::DimensionMismatch { expected: order, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(TensorError::DimensionMismatch { expected: dim, got: bad + 1 });
            }
            t.set(&idx, value);
        }
        Ok(t)
    }

    pub fn scalar(value: C) -> Self {
        SymmetricTensor { dim: 0, order: 0, comps: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn slot(&self, idx: &[usize]) -> usize {
        let mut s = idx.to_vec();
        s.sort_unstable();
        if self.dim == 0 {
            0
        } else {
            rank(self.dim, &s)
        }
    }

    /// Component lookup; any permutation of `idx` gives the same value.
    pub fn get(&self, idx: &[usize]) -> &C {
        &self.comps[self.slot(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C) {
        let s = self.slot(idx);
        self.comps[s] = value;
    }

    /// Canonical components paired with their multi-indices, lex order.
    pub fn entries(&self) -> impl Iterator<Item = (MultiIndex, &C)> {
        canonical_indices(self.dim, self.order).into_iter().zip(self.comps.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SymmetricTensor<D> {
        SymmetricTensor { dim: self.dim, order: self.order, comps: self.comps.iter().map(f).collect() }
    }

    /// `T . h^{(x)k}`: sum over all index tuples of `T_i h_{i1}...h_{ik}`.
    pub fn apply_full(&self, h: &[C]) -> Result<C, TensorError> {
        self.check_vec(h)?;
        let mut acc = C::zero();
        for (m, c) in self.entries() {
            if c.is_zero() {
                continue;
            }
            let mult = scalar_from_u128::<C>(m.multiplicity());
            let prod = m.indices().iter().fold(C::one(), |p, &i| p * h[i].clone());
            acc = acc + mult * c.clone() * prod;
        }
        Ok(acc)
    }

    /// Contract the first `vs.len()` slots with the given vectors.
    pub fn apply_partial(&self, vs: &[Vec<C>]) -> Result<SymmetricTensor<C>, TensorError> {
        if vs.len() > self.order {
            return Err(TensorError::TooManySlots { requested: vs.len(), order: self.order });
        }
        let mut t = self.clone();
        for v in vs {
            t = t.contract_one(v)?;
        }
        Ok(t)
    }

    /// Contract one slot with `v`, giving an order `k-1` tensor.
    pub fn contract_one(&self, v: &[C]) -> Result<SymmetricTensor<C>, TensorError> {
        self.check_vec(v)?;
        if self.order == 0 {
            return Err(TensorError::TooManySlots { requested: 1, order: 0 });
        }
        let mut out = SymmetricTensor::zeros(self.dim, self.order - 1);
        let targets = canonical_indices(self.dim, self.order - 1);
        let mut buf = Vec::with_capacity(self.order);
        for (slot, m) in targets.iter().enumerate() {
            let mut acc = C::zero();
            for (a, va) in v.iter().enumerate() {
                if va.is_zero() {
                    continue;
                }
                buf.clear();
                buf.extend_from_slice(m.indices());
                buf.push(a);
                let c = self.get(&buf);
                if !c.is_zero() {
                    acc = acc + c.clone() * va.clone();
                }
            }
            out.comps[slot] = acc;
        }
        Ok(out)
    }

    fn check_vec(&self, h: &[C]) -> Result<(), TensorError> {
        if h.len() != self.dim {
            return Err(TensorError::DimensionMismatch { expected: self.dim, got: h.len() });
        }
        Ok(())
    }
}

fn scalar_from_u128<C: Scalar>(n: u128) -> C {
    // multiplicities are small; build by doubling to stay generic
    let mut acc = C::zero();
    let mut base = C::one();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        n >>= 1;
    }
    acc
}

impl<C: Scalar + fmt::Display> fmt::Debug for SymmetricTensor<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (idx, c) in self.entries() {
            if !c.is_zero() {
                m.entry(&idx.indices(), &format_args!("{c}"));
            }
        }
        m.finish()
    }
}

impl<C: Field> SymmetricTensor<C> {
    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(Field::abs_f64).fold(0.0, f64::max)
    }

    /// Restrict to a subspace: components `T . (v_{j1} (x) ... (x) v_{jk})`
    /// over the subspace's basis vectors, i.e. a tensor on `R^{dim V}`.
    pub fn restrict(&self, v: &Subspace<C>) -> Result<SymmetricTensor<C>, TensorError> {
        if v.dim_ambient() != self.dim {
            return Err(TensorError::DimensionMismatch { expected: self.dim, got: v.dim_ambient() });
        }
        let m = v.dim();
        let mut out = SymmetricTensor::zeros(m, self.order);
        if m == 0 {
            return Ok(out);
        }
        // Contract slot by slot, reusing partial contractions by prefix.
        fn go<C: Field>(
            t: &SymmetricTensor<C>,
            basis: &[Vec<C>],
            start: usize,
            prefix: &mut Vec<usize>,
            out: &mut SymmetricTensor<C>,
        ) -> Result<(), TensorError> {
            if t.order == 0 {
                out.set(prefix, t.comps[0].clone());
                return Ok(());
            }
            for j in start..basis.len() {
                let next = t.contract_one(&basis[j])?;
                prefix.push(j);
                go(&next, basis, j, prefix, out)?;
                prefix.pop();
            }
            Ok(())
        }
        go(self, v.basis(), 0, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    /// Kernel of `h -> T . h`, i.e. `{h : T . h (x) h'^{(x)k-1} = 0 for all h'}`.
    ///
    /// Exact for rational tensors; in floating point, singular values below
    /// `1e-9 * max(sigma_max, scale)` are treated as zero, where `scale`
    /// defaults to the largest component.
    pub fn kernel_map_nullspace(&self) -> Result<Subspace<C>, TensorError> {
        self.kernel_map_nullspace_scaled(self.max_abs())
    }

    pub fn kernel_map_nullspace_scaled(&self, scale: f64) -> Result<Subspace<C>, TensorError> {
        if self.order < 2 || self.order % 2 == 1 {
            return Err(TensorError::OddOrder(self.order));
        }
        let m = self.dim;
        let rows_idx = canonical_indices(m, self.order - 1);
        let mut rows = Vec::with_capacity(rows_idx.len());
        let mut buf = Vec::with_capacity(self.order);
        for r in &rows_idx {
            let row: Vec<C> = (0..m)
                .map(|a| {
                    buf.clear();
                    buf.extend_from_slice(r.indices());
                    buf.push(a);
                    self.get(&buf).clone()
                })
                .collect();
            rows.push(row);
        }
        let ker = linalg::nullspace(&rows, m, scale);
        Subspace::span(m, &ker)
    }

    /// Lift a tensor on `R^{dim V}` back to ambient coordinates is not needed;
    /// only vectors are lifted (see [`Subspace::lift`]).
    #[doc(hidden)]
    pub fn components(&self) -> &[C] {
        &self.comps
    }
}

/// Subspace of `R^d` with an orthonormal basis. An empty basis is `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<C = f64> {
    dim_ambient: usize,
    basis: Vec<Vec<C>>,
}

impl<C: Field> Subspace<C> {
    pub fn zero(d: usize) -> Self {
        Subspace { dim_ambient: d, basis: Vec::new() }
    }

    /// `R^d` with the canonical basis.
    pub fn full(d: usize) -> Self {
        let basis = (0..d).map(|i| (0..d).map(|j| if i == j { C::one() } else { C::zero() }).collect()).collect();
        Subspace { dim_ambient: d, basis }
    }

    /// Wrap an already orthonormal basis, checking it.
    pub fn from_orthonormal(d: usize, basis: Vec<Vec<C>>) -> Result<Self, TensorError> {
        for v in &basis {
            if v.len() != d {
                return Err(TensorError::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        let mut worst = 0.0f64;
        for (i, u) in basis.iter().enumerate() {
            for (j, w) in basis.iter().enumerate() {
                let e = linalg::dot(u, w) - if i == j { C::one() } else { C::zero() };
                if C::EXACT && !e.is_zero() {
                    return Err(TensorError::NotOrthonormal(e.abs_f64()));
                }
                worst = worst.max(e.abs_f64());
            }
        }
        if worst > 1e-12 {
            return Err(TensorError::NotOrthonormal(worst));
        }
        Ok(Subspace { dim_ambient: d, basis })
    }

    /// Span of linearly independent vectors, with the canonical orthonormal
    /// basis (projections of coordinate axes, pivoted Gram-Schmidt).
    pub fn span(d: usize, vectors: &[Vec<C>]) -> Result<Self, TensorError> {
        if vectors.is_empty() {
            return Ok(Self::zero(d));
        }
        let p = linalg::projector(vectors, d);
        let basis = linalg::canonical_basis(&p, vectors.len()).ok_or(TensorError::NotRepresentable)?;
        Ok(Subspace { dim_ambient: d, basis })
    }

    /// Orthogonal complement of `self` inside `outer` (`self` must lie in
    /// `outer`), with the canonical basis of the ambient projector difference.
    pub fn complement_in(&self, outer: &Subspace<C>) -> Result<Subspace<C>, TensorError> {
        if self.dim_ambient != outer.dim_ambient {
            return Err(TensorError::DimensionMismatch { expected: outer.dim_ambient, got: self.dim_ambient });
        }
        let po = outer.projector();
        let pi = self.projector();
        let diff: Vec<Vec<C>> =
            po.iter().zip(&pi).map(|(ro, ri)| ro.iter().zip(ri).map(|(a, b)| a.clone() - b.clone()).collect()).collect();
        let rank = outer.dim().saturating_sub(self.dim());
        let basis = linalg::canonical_basis(&diff, rank).ok_or(TensorError::NotRepresentable)?;
        Ok(Subspace { dim_ambient: self.dim_ambient, basis })
    }

    /// Re-express with the canonical basis of the same subspace.
    pub fn canonicalize(&self) -> Result<Subspace<C>, TensorError> {
        let basis = linalg::canonical_basis(&self.projector(), self.dim()).ok_or(TensorError::NotRepresentable)?;
        Ok(Subspace { dim_ambient: self.dim_ambient, basis })
    }

    /// Orthogonal projector `sum_i v_i v_i^T`.
    pub fn projector(&self) -> Vec<Vec<C>> {
        let d = self.dim_ambient;
        let mut p = vec![vec![C::zero(); d]; d];
        for v in &self.basis {
            for a in 0..d {
                if v[a].is_zero() {
                    continue;
                }
                for b in 0..d {
                    p[a][b] = p[a][b].clone() + v[a].clone() * v[b].clone();
                }
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn basis(&self) -> &[Vec<C>] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Map coordinates w.r.t. this basis to an ambient vector.
    pub fn lift(&self, coords: &[C]) -> Vec<C> {
        let mut v = vec![C::zero(); self.dim_ambient];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi = vi.clone() + c.clone() * bi.clone();
            }
        }
        v
    }

    /// Lift every basis vector of a subspace of `R^{dim self}`.
    pub fn lift_subspace(&self, inner: &Subspace<C>) -> Subspace<C> {
        Subspace { dim_ambient: self.dim_ambient, basis: inner.basis.iter().map(|c| self.lift(c)).collect() }
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &[C]) -> Vec<C> {
        let coords: Vec<C> = self.basis.iter().map(|b| linalg::dot(b, v)).collect();
        self.lift(&coords)
    }

    /// Norm of the component of `v` orthogonal to the subspace.
    pub fn residual(&self, v: &[C]) -> f64 {
        let p = self.project(v);
        v.iter()
            .zip(&p)
            .map(|(a, b)| {
                let d = (a.clone() - b.clone()).to_f64();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_f64(&self) -> Subspace<f64> {
        Subspace { dim_ambient: self.dim_ambient, basis: self.basis.iter().map(|v| v.iter().map(Field::to_f64).collect()).collect() }
    }
}
