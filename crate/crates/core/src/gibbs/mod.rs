//! Quadrature checks on the Gibbs density `exp(-f/t) / Z_t` for `d <= 3`.
//!
//! Every scaled law is computed in the coordinates `u` with
//! `x = x* + B(t^alpha * u)`, where the density is `O(1)` in size and a fixed
//! number of grid nodes resolves it at every temperature.

mod archetype;
mod flat;
pub mod quadrature;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::check_coercive;
use crate::expansion::{recenter, Expansion, ExpansionError};
use crate::poly::{CompiledPoly, PolyError, SparsePoly};
use crate::scalar::{fraction_string, Field, Rational};

pub use archetype::{check_noncoercive_archetype, ArchetypeReport};
pub use flat::{check_flat_minimum, flat_potential, FlatReport};
pub use quadrature::QuadratureSpec;
use quadrature::{evaluate, integrate, ks_between, union_bounds, Grid};

pub const MAX_DIM: usize = 3;
pub const SCALED_KS_TOL: f64 = 0.02;
pub const WELL_WEIGHT_TOL: f64 = 0.02;
pub const CONCENTRATION_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GibbsError {
    #[error("density does not decay inside the quadrature box (boundary ratio {0:e})")]
    MassLeakage(f64),
    #[error("no finite energy on the quadrature grid")]
    NoMass,
    #[error("limit polynomial is not coercive (sphere minimum {0:e}); use the archetype check instead")]
    NonCoercive(f64),
    #[error("quadrature checks support d <= 3, got {0}")]
    DimensionTooLarge(usize),
    #[error("wells {0} and {1} are closer than 3 delta")]
    OverlappingWells(usize, usize),
    #[error("need one expansion per well ({0} minima, {1} expansions)")]
    WellCount(usize, usize),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Summary record for one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub t: f64,
    /// `C_t^{-1} = integral of exp(-f/t)`.
    pub normalizer: f64,
    pub concentration_mass: Option<f64>,
    pub scaled_distance: Option<f64>,
    pub well_weights: Option<Vec<f64>>,
}

/// Value of `C_t^{-1}` by quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerReport {
    pub t: f64,
    pub value: f64,
    pub log_value: f64,
    pub refinement_rel_diff: f64,
    pub bounds: Vec<(f64, f64)>,
    pub nodes_per_axis: usize,
}

fn check_dim(d: usize) -> Result<(), GibbsError> {
    if d == 0 || d > MAX_DIM {
        return Err(GibbsError::DimensionTooLarge(d));
    }
    Ok(())
}

/// `C_t^{-1} = integral of exp(-f(x)/t) dx` in the original coordinates.
///
/// ```
/// use gibbsx::gibbs::{gibbs_normalizer, QuadratureSpec};
/// use gibbsx::poly::parse_poly;
/// let f = parse_poly("x^2", &["x"]).unwrap();
/// let r = gibbs_normalizer(&f, 0.01, &QuadratureSpec::new(1)).unwrap();
/// assert!((r.value - (std::f64::consts::PI * 0.01).sqrt()).abs() < 1e-9);
/// ```
pub fn gibbs_normalizer(f: &SparsePoly, t: f64, quad: &QuadratureSpec) -> Result<NormalizerReport, GibbsError> {
    check_dim(f.dim())?;
    let cf = CompiledPoly::new(f);
    let energy = |x: &[f64]| cf.eval(x) / t;
    let fit = integrate(&energy, quad)?;
    let log_value = fit.log_mass();
    Ok(NormalizerReport {
        t,
        value: log_value.exp(),
        log_value,
        refinement_rel_diff: fit.refinement_rel_diff,
        bounds: fit.eval.grid.bounds.clone(),
        nodes_per_axis: fit.eval.grid.n,
    })
}

/// `pi_t({f >= f* + eps})` along a ladder of temperatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub eps: f64,
    pub f_star: String,
    pub t_ladder: Vec<f64>,
    pub masses: Vec<f64>,
    pub monotone: bool,
    pub final_mass: f64,
    pub pass: bool,
}

/// Mass of `{f >= f* + eps}` under `pi_t` for each `t` (decreasing).
/// Passes iff the masses do not increase and the last one is below `1e-3`.
pub fn check_concentration(
    f: &SparsePoly,
    f_star: &Rational,
    eps: f64,
    t_ladder: &[f64],
    quad: &QuadratureSpec,
) -> Result<ConcentrationReport, GibbsError> {
    check_dim(f.dim())?;
    let f0 = f.clone() - SparsePoly::constant(f.dim(), f_star.clone());
    let cf = CompiledPoly::new(&f0);
    let mut masses = Vec::with_capacity(t_ladder.len());
    for &t in t_ladder {
        let energy = |x: &[f64]| cf.eval(x) / t;
        let fit = integrate(&energy, quad)?;
        masses.push(fit.eval.mass_fraction(|x| cf.eval(x) >= eps));
    }
    let monotone = masses.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let final_mass = masses.last().copied().unwrap_or(0.0);
    Ok(ConcentrationReport {
        eps,
        f_star: fraction_string(f_star),
        t_ladder: t_ladder.to_vec(),
        masses,
        monotone,
        final_mass,
        pass: monotone && final_mass < CONCENTRATION_TOL,
    })
}

/// Energy of the scaled law `u -> f0(B(t^alpha * u)) / t`, optionally
/// restricted to the ball `|B(t^alpha * u)| < radius`.
struct ScaledEnergy {
    f0: CompiledPoly,
    b: Vec<Vec<f64>>,
    scale: Vec<f64>,
    t: f64,
    radius: Option<f64>,
}

impl ScaledEnergy {
    fn new(f0: &SparsePoly<f64>, b: Vec<Vec<f64>>, alpha: &[Rational], t: f64, radius: Option<f64>) -> Self {
        let scale = alpha.iter().map(|a| t.powf(Field::to_f64(a))).collect();
        ScaledEnergy { f0: CompiledPoly::new(f0), b, scale, t, radius }
    }

    fn x_of(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        (0..d).map(|i| (0..d).map(|j| self.b[i][j] * self.scale[j] * u[j]).sum()).collect()
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let x = self.x_of(u);
        if let Some(r) = self.radius {
            if x.iter().map(|v| v * v).sum::<f64>() >= r * r {
                return f64::INFINITY;
            }
        }
        self.f0.eval(&x) / self.t
    }

    fn log_jacobian(&self) -> f64 {
        // B is orthogonal
        self.scale.iter().map(|s| s.ln()).sum()
    }
}

/// Distance between the scaled law at temperature `t` and `exp(-g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledLimitReport {
    pub t: f64,
    /// Sup over axes of the marginal Kolmogorov-Smirnov distance.
    pub distance: f64,
    pub per_axis: Vec<f64>,
    /// `|Z_x / (jacobian * Z_u) - 1|`: the same mass in both coordinate systems.
    pub mass_conservation: f64,
    pub refinement_rel_diff: f64,
    pub nodes_per_axis: usize,
    pub pass: bool,
}

/// Law of `t^{-alpha} * B^T (X_t - x*)` against the density `exp(-g)`.
/// Passes iff the distance is below `0.02`.
pub fn check_scaled_limit(
    f: &SparsePoly,
    x_star: &[Rational],
    expansion: &Expansion,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<ScaledLimitReport, GibbsError> {
    let d = f.dim();
    check_dim(d)?;
    let g = expansion.g_f64();
    let verdict = check_coercive(&g, expansion.alpha());
    if !verdict.coercive {
        return Err(GibbsError::NonCoercive(verdict.sphere_min));
    }
    let (f0, _) = recenter(f, x_star)?;
    let f0 = f0.to_f64();
    let se = ScaledEnergy::new(&f0, expansion.b_f64(), expansion.alpha(), t, None);
    let e_t = |u: &[f64]| se.energy(u);
    let cg = CompiledPoly::new(&g.clone().with_dim(d));
    let e_g = |u: &[f64]| cg.eval(u);

    let fit_t = integrate(&e_t, quad)?;
    let fit_g = integrate(&e_g, quad)?;
    let bounds = union_bounds(&fit_t.eval.grid.bounds, &fit_g.eval.grid.bounds);
    let n = quad.effective_nodes();
    let ev_t = evaluate(&e_t, Grid { bounds: bounds.clone(), n });
    let ev_g = evaluate(&e_g, Grid { bounds, n });
    let (distance, per_axis) = ks_between(&ev_t, &ev_g);

    // the same integral in the original coordinates
    let cx = CompiledPoly::new(&f0);
    let e_x = |x: &[f64]| cx.eval(x) / t;
    let start: Vec<(f64, f64)> = fit_t
        .eval
        .grid
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            let r = lo.abs().max(hi.abs()) * se.scale.iter().copied().fold(0.0, f64::max);
            (-r, r)
        })
        .collect();
    let fit_x = integrate(&e_x, &QuadratureSpec { bounds: start, ..quad.clone() })?;
    let mass_conservation = (fit_x.log_mass() - se.log_jacobian() - ev_t.log_mass()).exp_m1().abs();

    Ok(ScaledLimitReport {
        t,
        distance,
        per_axis,
        mass_conservation,
        refinement_rel_diff: fit_t.refinement_rel_diff,
        nodes_per_axis: n,
        pass: distance < SCALED_KS_TOL,
    })
}

/// Limit and measured weights of several global minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellsReport {
    pub t: f64,
    pub delta: f64,
    /// `sum_i alpha_i` per well, as fractions.
    pub alpha_sums: Vec<String>,
    /// Wells with the smallest alpha sum (0-based).
    pub j_set: Vec<usize>,
    pub predicted: Vec<f64>,
    pub measured: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Default well radius: a quarter of the smallest pairwise distance.
pub fn default_delta(minima: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..minima.len() {
        for j in i + 1..minima.len() {
            best = best.min(dist(&minima[i], &minima[j]));
        }
    }
    if best.is_finite() {
        best / 4.0
    } else {
        1.0
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn softmax(logs: &[f64]) -> Vec<f64> {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Expected weights (zero outside the minimal-alpha-sum set `J`, otherwise
/// proportional to `integral of exp(-g_i)`) against the `pi_t` mass of the
/// `delta`-ball around each minimum. Passes iff the largest deviation is
/// below `0.02`.
pub fn check_multi_well(
    f: &SparsePoly,
    minima: &[Vec<Rational>],
    expansions: &[Expansion],
    t: f64,
    delta: Option<f64>,
    quad: &QuadratureSpec,
) -> Result<WellsReport, GibbsError> {
    let d = f.dim();
    check_dim(d)?;
    if minima.len() != expansions.len() {
        return Err(GibbsError::WellCount(minima.len(), expansions.len()));
    }
    let mf: Vec<Vec<f64>> = minima.iter().map(|m| m.iter().map(Field::to_f64).collect()).collect();
    let delta = delta.unwrap_or_else(|| default_delta(&mf));
    for i in 0..mf.len() {
        for j in i + 1..mf.len() {
            if dist(&mf[i], &mf[j]) <= 3.0 * delta {
                return Err(GibbsError::OverlappingWells(i, j));
            }
        }
    }
    let sums: Vec<Rational> = expansions.iter().map(Expansion::alpha_sum).collect();
    let best = sums.iter().min().cloned().unwrap_or_else(Rational::zero);
    let j_set: Vec<usize> = (0..sums.len()).filter(|&i| sums[i] == best).collect();

    let mut log_limit = vec![f64::NEG_INFINITY; minima.len()];
    let mut log_measured = Vec::with_capacity(minima.len());
    for (i, (m, e)) in minima.iter().zip(expansions).enumerate() {
        let g = e.g_f64();
        let verdict = check_coercive(&g, e.alpha());
        if !verdict.coercive {
            return Err(GibbsError::NonCoercive(verdict.sphere_min));
        }
        if j_set.contains(&i) {
            let cg = CompiledPoly::new(&g.clone().with_dim(d));
            log_limit[i] = integrate(&|u: &[f64]| cg.eval(u), quad)?.log_mass();
        }
        let (f0, _) = recenter(f, m)?;
        let se = ScaledEnergy::new(&f0.to_f64(), e.b_f64(), e.alpha(), t, Some(delta));
        let fit = integrate(&|u: &[f64]| se.energy(u), quad)?;
        log_measured.push(fit.log_mass() + se.log_jacobian());
    }
    let predicted = softmax(&log_limit);
    let measured = softmax(&log_measured);
    let max_deviation = predicted.iter().zip(&measured).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(WellsReport {
        t,
        delta,
        alpha_sums: sums.iter().map(fraction_string).collect(),
        j_set,
        predicted,
        measured,
        max_deviation,
        pass: max_deviation < WELL_WEIGHT_TOL,
    })
}
