//! The infinitely flat minimum `f(x) = exp(-1/x^2)` on `|x| < 1`, continued
//! by `x^2 + e^{-1} - 1` outside.
//!
//! With `L = ln(1/t)` the scaled variable `y = sqrt(L) x` has energy
//! `exp(L (1 - 1/y^2))` inside `|y| < sqrt(L)`, which tends to 0 on `|y| < 1`
//! and to infinity outside: the law becomes uniform on `(-1, 1)`.

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, QuadratureSpec};
use super::GibbsError;

pub const FLAT_KS_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatReport {
    pub t: f64,
    pub distance: f64,
    pub cdf_at_zero: f64,
    pub cdf_at_half: f64,
    /// `P(|Y| > 1)` for the scaled variable.
    pub mass_outside: f64,
    /// Nodes carrying density above `1e-12` of the peak.
    pub support: (f64, f64),
    pub refinement_rel_diff: f64,
    pub pass: bool,
}

/// The potential in original coordinates.
pub fn flat_potential(x: f64) -> f64 {
    if x.abs() < 1.0 {
        if x == 0.0 {
            0.0
        } else {
            (-1.0 / (x * x)).exp()
        }
    } else {
        x * x + (-1.0f64).exp() - 1.0
    }
}

fn scaled_energy(y: f64, t: f64) -> f64 {
    let l = -t.ln();
    let y2 = y * y;
    if y2 < l {
        if y2 == 0.0 {
            0.0
        } else {
            (l * (1.0 - 1.0 / y2)).exp()
        }
    } else {
        (y2 / l + (-1.0f64).exp() - 1.0) / t
    }
}

fn interp(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if x <= nodes[0] {
        return values[0];
    }
    if x >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = (nodes.partition_point(|&v| v <= x) - 1).min(n - 2);
    let r = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + r * (values[i + 1] - values[i])
}

/// KS distance between the law of `sqrt(ln(1/t)) X_t` and Uniform(-1, 1);
/// passes iff below `0.05`.
pub fn check_flat_minimum(t: f64, quad: &QuadratureSpec) -> Result<FlatReport, GibbsError> {
    let spec = if quad.dim == 1 { quad.clone() } else { QuadratureSpec::new(1).with_nodes(quad.nodes_per_axis) };
    let fit = integrate(&|u: &[f64]| scaled_energy(u[0], t), &spec)?;
    let ev = &fit.eval;
    let nodes = ev.grid.axis_nodes(0);
    let cdf = ev.marginal_cdf(0);
    let uniform = |y: f64| ((y + 1.0) / 2.0).clamp(0.0, 1.0);
    let distance = nodes.iter().zip(&cdf).map(|(&y, &c)| (c - uniform(y)).abs()).fold(0.0, f64::max);
    let live: Vec<f64> = nodes.iter().zip(&ev.rel).filter(|(_, &r)| r < -(1e-12f64).ln()).map(|(&y, _)| y).collect();
    let support = (live.first().copied().unwrap_or(0.0), live.last().copied().unwrap_or(0.0));
    let mass_outside = ev.mass_fraction(|u| u[0].abs() > 1.0);
    Ok(FlatReport {
        t,
        distance,
        cdf_at_zero: interp(&nodes, &cdf, 0.0),
        cdf_at_half: interp(&nodes, &cdf, 0.5),
        mass_outside,
        support,
        refinement_rel_diff: fit.refinement_rel_diff,
        pass: distance < FLAT_KS_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_matches_potential() {
        let t: f64 = 1e-3;
        let l = -t.ln();
        for y in [0.3, 0.9, 1.5, 3.0, 5.0] {
            let direct = flat_potential(y / l.sqrt()) / t;
            let e = scaled_energy(y, t);
            assert!((direct - e).abs() <= 1e-9 * direct.max(1.0), "{y}: {direct} {e}");
        }
        assert!(flat_potential(1.0) > (-1.0f64).exp() - 1e-15);
    }

    #[test]
    fn symmetric_and_approaching_uniform() {
        let q = QuadratureSpec::new(1);
        let a = check_flat_minimum(1e-2, &q).unwrap();
        let b = check_flat_minimum(1e-8, &q).unwrap();
        assert!((b.cdf_at_zero - 0.5).abs() < 1e-3);
        assert!(b.distance < a.distance);
        assert!(b.support.0 > -1.5 && b.support.1 < 1.5, "{:?}", b.support);
    }
}
