//! `gibbsx analyze` and `gibbsx wells`.
//!
//! Exit codes: 0 success, 1 a requested numerical check failed or could not
//! run, 2 the even-cross-term hypothesis is violated, 3 `g` is not coercive,
//! 4 invalid input (parse errors, not a critical point, ...).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{check_coercive, default_grid, default_t_ladder, lattice, verify_pointwise_limit, verify_uniform_on_compact};
use crate::expansion::{expand, recenter, Expansion};
use crate::gibbs::{check_concentration, check_multi_well, check_scaled_limit, gibbs_normalizer, QuadratureSpec, MAX_DIM};
use crate::poly::{parse_poly, SparsePoly};
use crate::report::{AnalysisRequest, ExpansionSection, GibbsSection, ReportDocument, WellsSection};
use crate::scalar::{fraction_string, parse_fraction, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NONCOERCIVE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

/// Concentration ladder used by `--verify gibbs`.
pub const CONCENTRATION_LADDER: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Parser)]
#[command(name = "gibbsx", version, about = "Anisotropic expansions at degenerate polynomial minima")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a polynomial at a critical point and run optional checks.
    Analyze(AnalyzeArgs),
    /// Limit weights of several global minima.
    Wells(WellsArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub vars: Vec<String>,
    /// Expansion point, e.g. `1/2,0` (default: origin).
    #[arg(long = "min", value_delimiter = ',', allow_hyphen_values = true)]
    pub min: Vec<String>,
    #[arg(long, default_value_t = crate::expansion::DEFAULT_P_MAX)]
    pub pmax: usize,
    /// Any of limit, gibbs, uniform.
    #[arg(long, value_delimiter = ',', value_parser = ["limit", "gibbs", "uniform"])]
    pub verify: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decreasing temperatures for the pointwise check.
    #[arg(long, value_delimiter = ',')]
    pub t_ladder: Option<Vec<f64>>,
    /// Lattice points per axis for the pointwise check.
    #[arg(long, requires = "grid_radius")]
    pub grid_points: Option<usize>,
    #[arg(long, requires = "grid_points")]
    pub grid_radius: Option<f64>,
    #[arg(long, default_value_t = crate::gibbs::quadrature::DEFAULT_NODES)]
    pub nodes: usize,
    /// Temperature of the Gibbs checks.
    #[arg(long, default_value_t = 1e-5)]
    pub t: f64,
    /// Threshold of the concentration check.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct WellsArgs {
    #[arg(long)]
    pub poly: String,
    /// Defaults to x, y, z truncated to the dimension of the minima.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    /// Minima separated by `;`, coordinates by `,`.
    #[arg(long, allow_hyphen_values = true)]
    pub minima: String,
    #[arg(long, default_value_t = crate::expansion::DEFAULT_P_MAX)]
    pub pmax: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub t: f64,
    /// Radius of the ball around each minimum (default: a quarter of the
    /// smallest separation).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = crate::gibbs::quadrature::DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn request(&self) -> AnalysisRequest {
        AnalysisRequest {
            poly_text: self.poly.clone(),
            vars: self.vars.clone(),
            x_star: self.min.clone(),
            p_max: self.pmax,
            run_flags: self.verify.clone(),
            t_ladder: self.t_ladder.clone(),
            grid: self.grid_points.zip(self.grid_radius),
            nodes_per_axis: self.nodes,
            gibbs_t: self.t,
            eps: self.eps,
            minima: Vec::new(),
            delta: None,
        }
    }
}

impl WellsArgs {
    pub fn request(&self) -> AnalysisRequest {
        let minima: Vec<Vec<String>> = self.minima.split(';').map(|m| m.split(',').map(|c| c.trim().to_string()).collect()).collect();
        let vars = if self.vars.is_empty() {
            let d = minima.first().map_or(1, Vec::len);
            ["x", "y", "z"].iter().take(d).map(|v| v.to_string()).collect()
        } else {
            self.vars.clone()
        };
        AnalysisRequest {
            poly_text: self.poly.clone(),
            vars,
            x_star: Vec::new(),
            p_max: self.pmax,
            run_flags: Vec::new(),
            t_ladder: None,
            grid: None,
            nodes_per_axis: self.nodes,
            gibbs_t: self.t,
            eps: 0.1,
            minima,
            delta: self.delta,
        }
    }
}

fn fail(mut doc: ReportDocument, code: i32, msg: String) -> ReportDocument {
    doc.exit_code = code;
    doc.error = Some(msg);
    doc
}

/// Parse the polynomial and validate the shared request fields.
fn parse_request(req: &AnalysisRequest) -> Result<SparsePoly, String> {
    if req.vars.is_empty() {
        return Err("no variables given".into());
    }
    if !(1..=8).contains(&req.p_max) {
        return Err(format!("p_max must be in 1..=8, got {}", req.p_max));
    }
    let vars: Vec<&str> = req.vars.iter().map(String::as_str).collect();
    parse_poly(&req.poly_text, &vars).map_err(|e| e.to_string())
}

fn parse_point(coords: &[String], d: usize) -> Result<Vec<Rational>, String> {
    if coords.is_empty() {
        return Ok(vec![Rational::from_integer(0.into()); d]);
    }
    if coords.len() != d {
        return Err(format!("point has {} coordinates, expected {d}", coords.len()));
    }
    coords.iter().map(|c| parse_fraction(c).ok_or_else(|| format!("not a rational number: {c:?}"))).collect()
}

fn quad(d: usize, nodes: usize) -> QuadratureSpec {
    QuadratureSpec::new(d).with_nodes(nodes)
}

/// Run the expansion pipeline and the requested checks.
pub fn cmd_analyze(req: &AnalysisRequest) -> ReportDocument {
    let mut doc = ReportDocument::new("analyze", req.clone());
    let f = match parse_request(req) {
        Ok(f) => f,
        Err(m) => return fail(doc, EXIT_INPUT, m),
    };
    let d = f.dim();
    let x_star = match parse_point(&req.x_star, d) {
        Ok(x) => x,
        Err(m) => return fail(doc, EXIT_INPUT, m),
    };
    let (f0, f_star) = match recenter(&f, &x_star) {
        Ok(v) => v,
        Err(e) => return fail(doc, EXIT_INPUT, e.to_string()),
    };
    doc.f_star = Some(fraction_string(&f_star));
    let e = match expand(&f0, req.p_max) {
        Ok(e) => e,
        Err(err) => return fail(doc, EXIT_INPUT, err.to_string()),
    };
    doc.expansion = Some(ExpansionSection::from_expansion(&e));
    let verdict = check_coercive(&e.g_f64(), e.alpha());
    let coercive = verdict.coercive;
    doc.coercivity = Some(verdict);
    doc.exit_code = if !e.hypothesis_ok() {
        EXIT_HYPOTHESIS
    } else if !coercive {
        EXIT_NONCOERCIVE
    } else {
        EXIT_OK
    };

    let mut checks_ok = true;
    let mut errors = Vec::new();
    if req.wants("limit") {
        let grid = match req.grid {
            Some((n, r)) => lattice(d, n, r),
            None => default_grid(d),
        };
        let ladder = req.t_ladder.clone().unwrap_or_else(default_t_ladder);
        if ladder.windows(2).any(|w| w[1] >= w[0]) || ladder.iter().any(|&t| t <= 0.0) {
            return fail(doc, EXIT_INPUT, "t ladder must be positive and strictly decreasing".into());
        }
        match verify_pointwise_limit(&f, &x_star, &e, &grid, &ladder) {
            Ok(r) => {
                checks_ok &= r.pass;
                doc.convergence = Some(r);
            }
            Err(err) => errors.push(format!("limit: {err}")),
        }
    }
    if req.wants("uniform") {
        match verify_uniform_on_compact(&f, &x_star, &e, 1.0) {
            Ok(r) => {
                checks_ok &= r.pass;
                doc.uniform = Some(r);
            }
            Err(err) => errors.push(format!("uniform: {err}")),
        }
    }
    if req.wants("gibbs") {
        match run_gibbs(&f, &x_star, &f_star, &e, coercive, req) {
            Ok(g) => {
                checks_ok &= g.concentration.pass && g.scaled.as_ref().is_none_or(|s| s.pass);
                doc.gibbs = Some(g);
            }
            Err(err) => errors.push(format!("gibbs: {err}")),
        }
    }
    if !errors.is_empty() {
        doc.error = Some(errors.join("; "));
        checks_ok = false;
    }
    if doc.exit_code == EXIT_OK && !checks_ok {
        doc.exit_code = EXIT_CHECK_FAILED;
    }
    doc
}

fn run_gibbs(
    f: &SparsePoly,
    x_star: &[Rational],
    f_star: &Rational,
    e: &Expansion,
    coercive: bool,
    req: &AnalysisRequest,
) -> Result<GibbsSection, String> {
    let d = f.dim();
    if d > MAX_DIM {
        return Err(format!("quadrature checks support d <= {MAX_DIM}"));
    }
    let q = quad(d, req.nodes_per_axis);
    let normalizer = gibbs_normalizer(f, req.gibbs_t, &q).map_err(|e| e.to_string())?;
    let concentration = check_concentration(f, f_star, req.eps, &CONCENTRATION_LADDER, &q).map_err(|e| e.to_string())?;
    let scaled = if coercive { Some(check_scaled_limit(f, x_star, e, req.gibbs_t, &q).map_err(|e| e.to_string())?) } else { None };
    Ok(GibbsSection { t: req.gibbs_t, normalizer, concentration, scaled })
}

/// Expand at every minimum and compare the limit weights with quadrature.
pub fn cmd_wells(req: &AnalysisRequest) -> ReportDocument {
    let mut doc = ReportDocument::new("wells", req.clone());
    let f = match parse_request(req) {
        Ok(f) => f,
        Err(m) => return fail(doc, EXIT_INPUT, m),
    };
    let d = f.dim();
    if req.minima.is_empty() {
        return fail(doc, EXIT_INPUT, "no minima given".into());
    }
    let mut minima = Vec::new();
    for m in &req.minima {
        match parse_point(m, d) {
            Ok(x) if !m.is_empty() => minima.push(x),
            Ok(_) => return fail(doc, EXIT_INPUT, "empty minimum".into()),
            Err(msg) => return fail(doc, EXIT_INPUT, msg),
        }
    }
    let values: Vec<Rational> = match minima.iter().map(|m| f.eval(m)).collect() {
        Ok(v) => v,
        Err(e) => return fail(doc, EXIT_INPUT, e.to_string()),
    };
    if let Some(i) = values.iter().position(|v| *v != values[0]) {
        return fail(
            doc,
            EXIT_INPUT,
            format!(
                "unequal minimum values: f = {} at well 0 but {} at well {i}",
                fraction_string(&values[0]),
                fraction_string(&values[i])
            ),
        );
    }
    doc.f_star = Some(fraction_string(&values[0]));
    let mut expansions = Vec::new();
    for (i, m) in minima.iter().enumerate() {
        let f0 = match recenter(&f, m) {
            Ok((f0, _)) => f0,
            Err(e) => return fail(doc, EXIT_INPUT, format!("well {i}: {e}")),
        };
        match expand(&f0, req.p_max) {
            Ok(e) => expansions.push(e),
            Err(e) => return fail(doc, EXIT_INPUT, format!("well {i}: {e}")),
        }
    }
    let coercivity: Vec<_> = expansions.iter().map(|e| check_coercive(&e.g_f64(), e.alpha())).collect();
    let mut section = WellsSection {
        minima: minima.iter().map(|m| m.iter().map(fraction_string).collect()).collect(),
        f_value: fraction_string(&values[0]),
        expansions: expansions.iter().map(ExpansionSection::from_expansion).collect(),
        coercivity: coercivity.clone(),
        weights: None,
    };
    if expansions.iter().any(|e| !e.hypothesis_ok()) {
        doc.wells = Some(section);
        return fail(doc, EXIT_HYPOTHESIS, "hypothesis violated at a well".into());
    }
    if let Some(i) = coercivity.iter().position(|v| !v.coercive) {
        doc.wells = Some(section);
        return fail(doc, EXIT_NONCOERCIVE, format!("g is not coercive at well {i}"));
    }
    if d > MAX_DIM {
        doc.wells = Some(section);
        return fail(doc, EXIT_INPUT, format!("quadrature checks support d <= {MAX_DIM}"));
    }
    match check_multi_well(&f, &minima, &expansions, req.gibbs_t, req.delta, &quad(d, req.nodes_per_axis)) {
        Ok(w) => {
            doc.exit_code = if w.pass { EXIT_OK } else { EXIT_CHECK_FAILED };
            section.weights = Some(w);
            doc.wells = Some(section);
            doc
        }
        Err(e @ crate::gibbs::GibbsError::OverlappingWells(..)) => {
            doc.wells = Some(section);
            fail(doc, EXIT_INPUT, e.to_string())
        }
        Err(e) => {
            doc.wells = Some(section);
            fail(doc, EXIT_CHECK_FAILED, e.to_string())
        }
    }
}

fn join(v: &[String]) -> String {
    format!("({})", v.join(", "))
}

fn expansion_lines(out: &mut String, e: &ExpansionSection) {
    let kind = if e.exact { "exact" } else { "floating point" };
    let _ = writeln!(out, "expansion ({kind}): block dims {:?}, alpha = {}", e.block_dims, join(&e.alpha));
    if e.truncated {
        let _ = writeln!(out, "  chain truncated at p_max");
    }
    let _ = writeln!(out, "g = {}", e.g);
    if e.hypothesis_ok {
        let _ = writeln!(out, "hypothesis: ok");
    } else {
        let grades: Vec<String> = e.offending.iter().map(|o| o.grade.clone()).collect();
        let _ = writeln!(out, "hypothesis: violated, grades below 1: {}", grades.join(", "));
        for w in &e.witnesses {
            let _ = writeln!(out, "  witness {:?} at grade {}: {}", w.tuple, w.grade, w.poly);
        }
    }
}

/// Human-readable summary printed on stdout.
pub fn summary(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gibbsx {} {}: {}", doc.version, doc.command, doc.request.poly_text);
    if let Some(e) = &doc.expansion {
        expansion_lines(&mut out, e);
    }
    if let Some(c) = &doc.coercivity {
        if c.coercive {
            let _ = writeln!(out, "coercive: yes (sphere minimum {:.3e})", c.sphere_min);
        } else {
            let w = c
                .witness
                .as_ref()
                .map(|w| format!(" along {:?}", w.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()))
                .unwrap_or_default();
            let _ = writeln!(out, "coercive: no (sphere minimum {:.3e}{w})", c.sphere_min);
        }
    }
    if let Some(r) = &doc.convergence {
        let rate = r.fitted_rate.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            out,
            "limit: {} (error {:.3e} at t = {:.0e}, fitted rate {rate}{})",
            if r.pass { "pass" } else { "FAIL" },
            r.max_abs_err.last().copied().unwrap_or(0.0),
            r.t_ladder.last().copied().unwrap_or(0.0),
            if r.diverging { ", diverging" } else { "" }
        );
    }
    if let Some(u) = &doc.uniform {
        let _ = writeln!(out, "uniform: {} (sup error {:.3e} on {} points)", if u.pass { "pass" } else { "FAIL" }, u.sup_err, u.points);
    }
    if let Some(g) = &doc.gibbs {
        let _ = writeln!(out, "gibbs at t = {:e}: ln C_t^-1 = {:.6}", g.t, g.normalizer.log_value);
        let c = &g.concentration;
        let _ = writeln!(out, "  concentration: {} (masses {:?})", if c.pass { "pass" } else { "FAIL" }, c.masses);
        if let Some(s) = &g.scaled {
            let _ = writeln!(out, "  scaled law: {} (KS {:.3e})", if s.pass { "pass" } else { "FAIL" }, s.distance);
        }
    }
    if let Some(w) = &doc.wells {
        for (m, e) in w.minima.iter().zip(&w.expansions) {
            let _ = writeln!(out, "well {}: alpha = {}, g = {}", join(m), join(&e.alpha), e.g);
        }
        if let Some(r) = &w.weights {
            let _ = writeln!(out, "J = {:?}", r.j_set);
            let _ = writeln!(out, "predicted weights {:?}", r.predicted.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
            let _ =
                writeln!(out, "measured weights  {:?} at t = {:e}", r.measured.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(), r.t);
            let _ = writeln!(out, "weights: {} (max deviation {:.3e})", if r.pass { "pass" } else { "FAIL" }, r.max_deviation);
        }
    }
    if let Some(err) = &doc.error {
        let _ = writeln!(out, "error: {err}");
    }
    let _ = writeln!(out, "exit {}", doc.exit_code);
    out
}

/// Entry point behind `main`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let (doc, out) = match &cli.command {
        Command::Analyze(a) => (cmd_analyze(&a.request()), a.out.clone()),
        Command::Wells(w) => (cmd_wells(&w.request()), w.out.clone()),
    };
    print!("{}", summary(&doc));
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, doc.to_json()) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_CHECK_FAILED;
        }
    }
    doc.exit_code
}
