//! Tensor-grid trapezoid quadrature of `exp(-E(u))` in the log domain.
//!
//! Energies are evaluated in parallel; every reduction walks the nodes in
//! index order, so results do not depend on the number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GibbsError;

/// Boundary nodes must carry less than this fraction of the peak density.
pub const LEAK_RATIO: f64 = 1e-12;
/// Nodes with `E - E_min` below this are counted as support when shrinking.
pub const SUPPORT_LOG: f64 = 32.236; // ln(1e14)
/// Hard cap on the number of grid nodes.
pub const MAX_TOTAL_NODES: usize = 1_000_000;
pub const DEFAULT_NODES: usize = 401;

/// Grid description; `bounds` is the starting box when `auto_box` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    /// Odd, so that the centre of a symmetric box is a node.
    pub nodes_per_axis: usize,
    pub auto_box: bool,
    pub scheme: String,
}

impl QuadratureSpec {
    pub fn new(dim: usize) -> Self {
        QuadratureSpec { dim, bounds: vec![(-4.0, 4.0); dim], nodes_per_axis: DEFAULT_NODES, auto_box: true, scheme: "trapezoid".into() }
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.nodes_per_axis = n;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn fixed(mut self) -> Self {
        self.auto_box = false;
        self
    }

    /// Nodes per axis after forcing oddness and the total-node cap.
    pub fn effective_nodes(&self) -> usize {
        effective_nodes(self.nodes_per_axis, self.dim)
    }
}

pub(crate) fn effective_nodes(n: usize, dim: usize) -> usize {
    let mut n = n.max(3) | 1;
    while n > 3 && n.checked_pow(dim as u32).is_none_or(|t| t > MAX_TOTAL_NODES) {
        n -= 2;
    }
    n
}

/// A rectangular grid with `n` nodes per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub bounds: Vec<(f64, f64)>,
    pub n: usize,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn total(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn step(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / (self.n - 1) as f64
    }

    pub fn node(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        if i == self.n - 1 {
            hi
        } else {
            lo + self.step(axis) * i as f64
        }
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.node(axis, i)).collect()
    }

    /// Multi-index of flat index `k`; axis 0 varies fastest.
    fn unravel(&self, mut k: usize, out: &mut [usize]) {
        for o in out.iter_mut() {
            *o = k % self.n;
            k /= self.n;
        }
    }

    fn point(&self, k: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(k, &mut idx);
        idx.iter().enumerate().map(|(a, &i)| self.node(a, i)).collect()
    }

    fn weight_1d(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5
        } else {
            1.0
        }
    }
}

/// Energies on a grid, shifted by their minimum.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub grid: Grid,
    /// `E - E_min` per node (`+inf` outside the domain).
    pub rel: Vec<f64>,
    pub emin: f64,
}

pub fn evaluate<E>(energy: &E, grid: Grid) -> Evaluated
where
    E: Fn(&[f64]) -> f64 + Sync,
{
    let total = grid.total();
    let raw: Vec<f64> =
        (0..total).into_par_iter().map(|k| energy(&grid.point(k))).map(|e| if e.is_nan() { f64::INFINITY } else { e }).collect();
    let emin = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let rel = if emin.is_finite() { raw.iter().map(|e| e - emin).collect() } else { raw };
    Evaluated { grid, rel, emin }
}

impl Evaluated {
    fn unravel(&self, k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.grid.dim()];
        self.grid.unravel(k, &mut idx);
        idx
    }

    fn node_weight(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.grid.weight_1d(i)).product()
    }

    fn cell_volume(&self) -> f64 {
        (0..self.grid.dim()).map(|a| self.grid.step(a)).product()
    }

    /// `ln of integral of exp(-E)` over the box.
    pub fn log_mass(&self) -> f64 {
        if !self.emin.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut s = 0.0;
        for k in 0..self.rel.len() {
            let r = self.rel[k];
            if r.is_finite() {
                s += self.node_weight(&self.unravel(k)) * (-r).exp();
            }
        }
        s.ln() + self.cell_volume().ln() - self.emin
    }

    /// Integral of `indicator * exp(-E)` divided by the total, in `[0, 1]`.
    pub fn mass_fraction<P>(&self, pred: P) -> f64
    where
        P: Fn(&[f64]) -> bool,
    {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..self.rel.len() {
            let r = self.rel[k];
            if !r.is_finite() {
                continue;
            }
            let w = self.node_weight(&self.unravel(k)) * (-r).exp();
            den += w;
            if pred(&self.grid.point(k)) {
                num += w;
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Largest density on the boundary relative to the peak, per face
    /// `(axis, upper side)`.
    fn face_ratios(&self) -> Vec<[f64; 2]> {
        let d = self.grid.dim();
        let n = self.grid.n;
        let mut out = vec![[0.0f64; 2]; d];
        for k in 0..self.rel.len() {
            let r = self.rel[k];
            if !r.is_finite() {
                continue;
            }
            let idx = self.unravel(k);
            for a in 0..d {
                if idx[a] == 0 {
                    out[a][0] = out[a][0].max((-r).exp());
                }
                if idx[a] == n - 1 {
                    out[a][1] = out[a][1].max((-r).exp());
                }
            }
        }
        out
    }

    pub fn boundary_ratio(&self) -> f64 {
        self.face_ratios().iter().flat_map(|f| f.iter().copied()).fold(0.0, f64::max)
    }

    /// Index range of support nodes per axis.
    fn support(&self) -> Vec<(usize, usize)> {
        let d = self.grid.dim();
        let mut out = vec![(usize::MAX, 0usize); d];
        for k in 0..self.rel.len() {
            if self.rel[k] <= SUPPORT_LOG {
                let idx = self.unravel(k);
                for a in 0..d {
                    out[a].0 = out[a].0.min(idx[a]);
                    out[a].1 = out[a].1.max(idx[a]);
                }
            }
        }
        out
    }

    /// Marginal density values at the nodes of `axis` (integrated over the
    /// other axes, unnormalized, relative to `exp(-E_min)`).
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.grid.n];
        let other: f64 = (0..self.grid.dim()).filter(|&a| a != axis).map(|a| self.grid.step(a)).product();
        for k in 0..self.rel.len() {
            let r = self.rel[k];
            if !r.is_finite() {
                continue;
            }
            let idx = self.unravel(k);
            let w: f64 = idx.iter().enumerate().filter(|&(a, _)| a != axis).map(|(_, &i)| self.grid.weight_1d(i)).product();
            m[idx[axis]] += w * (-r).exp();
        }
        m.iter_mut().for_each(|v| *v *= other);
        m
    }

    /// Marginal CDF at the nodes of `axis` (cumulative trapezoid, normalized).
    pub fn marginal_cdf(&self, axis: usize) -> Vec<f64> {
        cumulative(&self.marginal(axis), self.grid.step(axis))
    }
}

/// Normalized cumulative trapezoid of node values with spacing `h`.
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let mut c = vec![0.0; values.len()];
    for i in 1..values.len() {
        c[i] = c[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    }
    let total = *c.last().unwrap_or(&0.0);
    if total > 0.0 {
        c.iter_mut().for_each(|v| *v /= total);
    }
    c
}

/// Outcome of fitting a box and integrating.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub eval: Evaluated,
    /// Relative change of the mass when the node count is refined (or
    /// coarsened when refinement would exceed the node cap).
    pub refinement_rel_diff: f64,
}

impl Fitted {
    pub fn log_mass(&self) -> f64 {
        self.eval.log_mass()
    }
}

/// Integrate `exp(-E)` with the box either fixed or fitted automatically:
/// grow a side while its boundary density exceeds `LEAK_RATIO` of the peak,
/// then shrink to the support (plus two cells) until it stabilizes.
pub fn integrate<E>(energy: &E, spec: &QuadratureSpec) -> Result<Fitted, GibbsError>
where
    E: Fn(&[f64]) -> f64 + Sync,
{
    let n = spec.effective_nodes();
    let eval = if spec.auto_box {
        fit_box(energy, spec.bounds.clone(), n)?
    } else {
        let ev = evaluate(energy, Grid { bounds: spec.bounds.clone(), n });
        if !ev.emin.is_finite() {
            return Err(GibbsError::NoMass);
        }
        let leak = ev.boundary_ratio();
        if leak > LEAK_RATIO {
            return Err(GibbsError::MassLeakage(leak));
        }
        ev
    };
    let refinement_rel_diff = refinement(energy, &eval);
    Ok(Fitted { eval, refinement_rel_diff })
}

pub(crate) fn refinement<E>(energy: &E, eval: &Evaluated) -> f64
where
    E: Fn(&[f64]) -> f64 + Sync,
{
    let d = eval.grid.dim();
    let fine = 2 * eval.grid.n - 1;
    let other = if fine.checked_pow(d as u32).is_some_and(|t| t <= MAX_TOTAL_NODES) { fine } else { eval.grid.n.div_ceil(2) | 1 };
    let ev2 = evaluate(energy, Grid { bounds: eval.grid.bounds.clone(), n: other });
    let a = eval.log_mass();
    let b = ev2.log_mass();
    if a.is_finite() && b.is_finite() {
        (a - b).exp_m1().abs()
    } else {
        f64::INFINITY
    }
}

pub(crate) fn fit_box<E>(energy: &E, start: Vec<(f64, f64)>, n: usize) -> Result<Evaluated, GibbsError>
where
    E: Fn(&[f64]) -> f64 + Sync,
{
    let mut bounds = start;
    let mut last_leak = 0.0;
    for _ in 0..60 {
        let ev = evaluate(energy, Grid { bounds: bounds.clone(), n });
        if !ev.emin.is_finite() {
            // nothing visible yet: look wider
            bounds = bounds.iter().map(|&(lo, hi)| widen(lo, hi, 2.0)).collect();
            continue;
        }
        let faces = ev.face_ratios();
        let mut grown = false;
        for (a, f) in faces.iter().enumerate() {
            let (lo, hi) = bounds[a];
            let w = hi - lo;
            if f[0] > LEAK_RATIO {
                bounds[a].0 = lo - w;
                grown = true;
            }
            if f[1] > LEAK_RATIO {
                bounds[a].1 = hi + w;
                grown = true;
            }
        }
        last_leak = ev.boundary_ratio();
        if grown {
            continue;
        }
        let sup = ev.support();
        let mut shrunk = false;
        let mut next = bounds.clone();
        for a in 0..bounds.len() {
            let (i0, i1) = sup[a];
            let h = ev.grid.step(a);
            let lo = (ev.grid.node(a, i0) - 2.0 * h).max(bounds[a].0);
            let hi = (ev.grid.node(a, i1) + 2.0 * h).min(bounds[a].1);
            if hi - lo < 0.8 * (bounds[a].1 - bounds[a].0) {
                next[a] = (lo, hi);
                shrunk = true;
            }
        }
        if !shrunk {
            return Ok(ev);
        }
        bounds = next;
    }
    Err(GibbsError::MassLeakage(last_leak))
}

fn widen(lo: f64, hi: f64, f: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo) * f;
    (c - h, c + h)
}

/// Union of two boxes.
pub fn union_bounds(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    a.iter().zip(b).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect()
}

/// Sup over nodes of the largest marginal CDF gap between two evaluations on
/// the same grid; returns the sup and the per-axis values.
pub fn ks_between(a: &Evaluated, b: &Evaluated) -> (f64, Vec<f64>) {
    let per: Vec<f64> = (0..a.grid.dim())
        .map(|ax| {
            let ca = a.marginal_cdf(ax);
            let cb = b.marginal_cdf(ax);
            ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .collect();
    (per.iter().copied().fold(0.0, f64::max), per)
}
