//! The JSON report document (`"schema": "gibbsx/1"`).
//!
//! Exponents and grades are fraction strings, `B` is row-major with 17
//! significant digits per entry, everything else is plain JSON numbers.

use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analysis::{CoercivityVerdict, ConvergenceReport, UniformReport};
use crate::expansion::Expansion;
use crate::gibbs::{ConcentrationReport, NormalizerReport, ScaledLimitReport, WellsReport};
use crate::scalar::fraction_string;

pub const SCHEMA: &str = "gibbsx/1";

/// Everything needed to rerun an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub poly_text: String,
    pub vars: Vec<String>,
    /// Expansion point as fraction strings; all zeros when empty.
    pub x_star: Vec<String>,
    pub p_max: usize,
    /// Any of `limit`, `gibbs`, `uniform`.
    pub run_flags: Vec<String>,
    pub t_ladder: Option<Vec<f64>>,
    /// Lattice points per axis and radius for the pointwise check.
    pub grid: Option<(usize, f64)>,
    pub nodes_per_axis: usize,
    /// Temperature for the Gibbs and well checks.
    pub gibbs_t: f64,
    /// Threshold of the concentration check.
    pub eps: f64,
    /// Minima for the `wells` command (fraction strings).
    pub minima: Vec<Vec<String>>,
    pub delta: Option<f64>,
}

impl AnalysisRequest {
    pub fn new(poly_text: &str, vars: &[&str]) -> Self {
        AnalysisRequest {
            poly_text: poly_text.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            x_star: Vec::new(),
            p_max: crate::expansion::DEFAULT_P_MAX,
            run_flags: Vec::new(),
            t_ladder: None,
            grid: None,
            nodes_per_axis: crate::gibbs::quadrature::DEFAULT_NODES,
            gibbs_t: 1e-5,
            eps: 0.1,
            minima: Vec::new(),
            delta: None,
        }
    }

    pub fn wants(&self, flag: &str) -> bool {
        self.run_flags.iter().any(|f| f == flag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeEntry {
    pub grade: String,
    pub poly: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    /// Number of factors taken from each block.
    pub tuple: Vec<u32>,
    pub grade: String,
    pub poly: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSection {
    pub exact: bool,
    /// `dim F_0, dim F_1, ...`
    pub chain_dims: Vec<usize>,
    /// `dim E_1, ..., dim E_p`
    pub block_dims: Vec<usize>,
    pub p: usize,
    pub truncated: bool,
    pub alpha: Vec<String>,
    pub alpha_sum: String,
    /// Row-major; column `j` is the basis vector of variable `h_j`.
    pub b: Vec<Vec<String>>,
    pub g: String,
    pub hypothesis_ok: bool,
    pub offending: Vec<GradeEntry>,
    pub witnesses: Vec<WitnessEntry>,
    pub a_min: Option<String>,
    /// Largest coefficient difference between the two constructions of `g`.
    pub dual_gap: f64,
    /// Per block: does `g` depend on the block variables.
    pub nonconstancy: Vec<bool>,
}

/// Format with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExpansionSection {
    pub fn from_expansion(e: &Expansion) -> Self {
        let h: Vec<String> = (1..=e.alpha().len()).map(|i| format!("h{i}")).collect();
        let h: Vec<&str> = h.iter().map(String::as_str).collect();
        ExpansionSection {
            exact: e.is_exact(),
            chain_dims: e.chain_dims(),
            block_dims: e.block_dims(),
            p: e.p_effective(),
            truncated: e.truncated(),
            alpha: e.alpha().iter().map(fraction_string).collect(),
            alpha_sum: fraction_string(&e.alpha_sum()),
            b: e.b_f64().iter().map(|row| row.iter().map(|&v| format_f64(v)).collect()).collect(),
            g: e.g_string(&h),
            hypothesis_ok: e.hypothesis_ok(),
            offending: e.offending_strings(&h).into_iter().map(|(a, p)| GradeEntry { grade: fraction_string(&a), poly: p }).collect(),
            witnesses: e
                .witness_strings(&h)
                .into_iter()
                .map(|(tuple, a, p)| WitnessEntry { tuple, grade: fraction_string(&a), poly: p })
                .collect(),
            a_min: e.a_min().as_ref().map(fraction_string),
            dual_gap: e.dual_gap(),
            nonconstancy: e.nonconstancy().to_vec(),
        }
    }

    /// `B` parsed back to floats.
    pub fn b_f64(&self) -> Vec<Vec<f64>> {
        self.b.iter().map(|row| row.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSection {
    pub t: f64,
    pub normalizer: NormalizerReport,
    pub concentration: ConcentrationReport,
    /// Absent when `g` is not coercive.
    pub scaled: Option<ScaledLimitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellsSection {
    pub minima: Vec<Vec<String>>,
    pub f_value: String,
    pub expansions: Vec<ExpansionSection>,
    pub coercivity: Vec<CoercivityVerdict>,
    pub weights: Option<WellsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub request: AnalysisRequest,
    pub exit_code: i32,
    pub error: Option<String>,
    /// `f(x*)` as a fraction.
    pub f_star: Option<String>,
    pub expansion: Option<ExpansionSection>,
    pub coercivity: Option<CoercivityVerdict>,
    pub convergence: Option<ConvergenceReport>,
    pub uniform: Option<UniformReport>,
    pub gibbs: Option<GibbsSection>,
    pub wells: Option<WellsSection>,
}

impl ReportDocument {
    pub fn new(command: &str, request: AnalysisRequest) -> Self {
        ReportDocument {
            schema: SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
            command: command.to_string(),
            request,
            exit_code: 0,
            error: None,
            f_star: None,
            expansion: None,
            coercivity: None,
            convergence: None,
            uniform: None,
            gibbs: None,
            wells: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// RFC 3339 UTC time, taken from `SOURCE_DATE_EPOCH` when set so that reruns
/// are byte-identical.
pub fn timestamp() -> String {
    let now = match std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse::<u64>().ok()) {
        Some(secs) => UNIX_EPOCH + Duration::from_secs(secs),
        None => SystemTime::now(),
    };
    humantime::format_rfc3339_seconds(now).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_reload_exactly() {
        for x in [std::f64::consts::FRAC_1_SQRT_2, -1.0 / 3.0, 1e-300, 0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
    }
}
