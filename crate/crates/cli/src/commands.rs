//! The four subcommands. Each returns its rendered stdout text and an exit
//! code; diagnostics go to the caller's error stream.

use std::fmt::Write as _;

use abflag_core::algebra::{check_reductive, jacobi_defect};
use abflag_core::berwald::{
    ad_skew_check, bracket_orthogonality_defect, is_perfect, obstruction_report, ObstructionReport,
};
use abflag_core::flagcurv::{FinslerSpace, ScanSummary};
use abflag_core::metrics::{
    check_ad_h_invariance, check_bi_invariance, check_naturally_reductive, check_split_orthogonality,
};
use abflag_core::{
    Convention, CurvatureReport, Error, FinslerData, Flag, FlagCurvatureOptions, InvariantMetric, Method, Vector,
};
use serde::Serialize;

use crate::config::ProblemConfig;
use crate::output::{fmt_real, json_document, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Dimension { .. } => EXIT_USAGE,
        Error::Validation(_) | Error::Flag(_) | Error::Domain(_) => EXIT_VALIDATION,
        Error::Precondition(_) | Error::Unsupported(_) => EXIT_PRECONDITION,
        Error::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
}

/// Command-line values that take precedence over `options` in the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub convention: Option<Convention>,
    pub method: Option<Method>,
    pub fd_step: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub force: bool,
}

impl Overrides {
    /// Folds the overrides into the config. `--force` is only accepted with
    /// the verbatim convention.
    pub fn apply(&self, cfg: &mut ProblemConfig) -> Result<(), Error> {
        let o = &mut cfg.options;
        if let Some(c) = self.convention {
            o.sign_convention = c;
        }
        if let Some(m) = self.method {
            o.method = m;
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::Input("--fd-step must be positive".into()));
            }
            o.fd_step = h;
        }
        if let Some(n) = self.samples {
            o.samples = n;
        }
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if self.force && o.sign_convention != Convention::Verbatim {
            return Err(Error::Input(
                "--force is only available with --convention paper-verbatim (diagnostic runs)".into(),
            ));
        }
        Ok(())
    }
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub notices: Vec<String>,
}

impl Outcome {
    fn error(e: &Error, notices: Vec<String>) -> Self {
        let mut notices = notices;
        notices.push(format!("error: {e}"));
        Self {
            code: exit_code(e),
            stdout: String::new(),
            notices,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Warn,
    NotChecked,
}

impl Status {
    fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Warn => "warn",
            Status::NotChecked => "not checked",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub status: Status,
    /// Hard checks decide the exit code; soft ones only gate some methods.
    pub hard: bool,
    pub max_defect: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub checks: Vec<CheckRow>,
    pub notices: Vec<String>,
}

/// The built problem, when the metric data are consistent.
pub struct Built {
    pub metric: InvariantMetric,
    pub x: Vector,
    pub flags: Vec<Flag>,
}

impl ValidationReport {
    fn push(&mut self, check: &'static str, hard: bool, passed: bool, max_defect: Option<f64>, detail: String) {
        let status = match (passed, hard) {
            (true, _) => Status::Pass,
            (false, true) => Status::Fail,
            (false, false) => Status::Warn,
        };
        self.checks.push(CheckRow {
            check,
            status,
            hard,
            max_defect,
            detail,
        });
    }

    fn not_checked(&mut self, check: &'static str, detail: &str) {
        self.checks.push(CheckRow {
            check,
            status: Status::NotChecked,
            hard: true,
            max_defect: None,
            detail: detail.into(),
        });
    }

    fn finish(mut self) -> Self {
        self.ok = !self.checks.iter().any(|c| c.status == Status::Fail);
        self
    }
}

/// Runs every check. Never fails on a check result; the second value is
/// present when the metric could be assembled.
pub fn validate(cfg: &ProblemConfig) -> (ValidationReport, Option<Built>) {
    let tol = cfg.options.tolerances;
    let mut rep = ValidationReport::default();

    let alg = match cfg.algebra() {
        Ok(a) => a,
        Err(e) => {
            rep.push("structure constants", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    if alg.input_asymmetry() > 0.0 {
        rep.notices.push(format!(
            "structure constants were antisymmetrized (largest |c_ij^k + c_ji^k| was {})",
            fmt_real(alg.input_asymmetry())
        ));
    }
    let jd = jacobi_defect(&alg);
    rep.push("Jacobi identity", true, jd <= tol.jacobi, Some(jd), String::new());

    let split = match cfg.split() {
        Ok(s) => s,
        Err(e) => {
            rep.push("decomposition", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    let red = match check_reductive(&alg, &split, tol.jacobi) {
        Ok(r) => r,
        Err(e) => {
            rep.push("reductive decomposition", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    let detail = match red.worst_pair {
        Some((i, j)) if !red.ok() => format!("worst basis pair ({}, {})", i + 1, j + 1),
        _ if split.h_dim() == 0 => "h = 0".into(),
        _ => String::new(),
    };
    rep.push("reductive decomposition", true, red.ok(), Some(red.max_defect), detail);

    let g0 = match cfg.g0() {
        Ok(g0) => g0,
        Err(e) => {
            rep.push("g0 symmetric positive-definite", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    rep.push("g0 symmetric positive-definite", true, true, None, String::new());
    let orth = check_split_orthogonality(&g0, &split, tol.metric);
    rep.push(
        "h and m g0-orthogonal",
        true,
        orth.ok,
        Some(orth.max_defect),
        String::new(),
    );
    if let Ok(bi) = check_bi_invariance(&alg, g0.matrix(), tol.metric) {
        rep.push(
            "g0 bi-invariant",
            false,
            bi.ok,
            Some(bi.max_defect),
            "required by the general method".into(),
        );
    }
    let phi = match cfg.phi(&g0, &split) {
        Ok(p) => p,
        Err(e) => {
            rep.push("phi self-adjoint and positive", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    rep.push("phi self-adjoint and positive", true, true, None, String::new());
    if !(orth.ok && red.ok()) {
        return (rep.finish(), None);
    }
    let metric = match InvariantMetric::new(alg, split, g0, phi, &tol) {
        Ok(m) => m,
        Err(e) => {
            rep.push("invariant metric", true, false, None, e.to_string());
            return (rep.finish(), None);
        }
    };
    let (alg, split, g) = (metric.algebra(), metric.split(), metric.inner());

    if split.h_dim() == 0 {
        rep.push("ad(h)-invariance of g", true, true, None, "h = 0".into());
    } else if let Ok(r) = check_ad_h_invariance(alg, split, g, tol.metric) {
        rep.push("ad(h)-invariance of g", true, r.ok, Some(r.max_defect), String::new());
    }
    if let Ok(r) = check_naturally_reductive(alg, split, g, tol.metric) {
        rep.push(
            "naturally reductive",
            false,
            r.ok,
            Some(r.max_defect),
            "required by the naturally-reductive method".into(),
        );
    }
    if split.h_dim() == 0 {
        if let Ok(r) = check_bi_invariance(alg, g.matrix(), tol.metric) {
            rep.push(
                "g bi-invariant",
                false,
                r.ok,
                Some(r.max_defect),
                "required by the bi-invariant method".into(),
            );
        }
    }

    let x = cfg.drift();
    let fr = FinslerData::unchecked(g.clone(), x.clone())
        .map(|d| d.validate(tol.boundary))
        .expect("X has m_dim entries after parsing");
    rep.push(
        "Finsler condition |X|_g < 1",
        true,
        fr.ok,
        None,
        format!("|X|_g = {}", fmt_real(fr.norm_x)),
    );

    let flags = match cfg.flags(g) {
        Ok((f, notes)) => {
            rep.notices.extend(notes);
            rep.push("flags independent", true, true, None, format!("{} flag(s)", f.len()));
            Some(f)
        }
        Err(e) => {
            rep.push("flags independent", true, false, None, e.to_string());
            None
        }
    };

    if split.h_dim() > 0 {
        rep.not_checked(
            "Berwald admissibility",
            "obstructions are implemented for Lie groups (h_dim = 0)",
        );
    } else {
        let scale = 1.0 + g.norm(&x);
        let bracket = bracket_orthogonality_defect(&metric, &x).expect("h_dim = 0");
        let skew = ad_skew_check(&metric, &x, tol.metric * scale).expect("h_dim = 0");
        let in_space = bracket <= tol.metric * scale;
        let ok = in_space && skew.ok;
        let detail = if ok && g.norm(&x) == 0.0 {
            "X = 0 (Riemannian)".to_string()
        } else if ok {
            "X is g-orthogonal to [g,g] and ad(X) is skew-adjoint".to_string()
        } else if is_perfect(alg, tol.rank) {
            "[g,g] = g: a perfect Lie algebra admits no left-invariant non-Riemannian metric of this type \
             (a parallel X must be g-orthogonal to [g,g], hence zero)"
                .to_string()
        } else if !in_space {
            format!(
                "X is not g-orthogonal to [g,g] (max |g(X,[e_i,e_j])| = {})",
                fmt_real(bracket)
            )
        } else {
            format!("ad(X) is not skew-adjoint (defect {})", fmt_real(skew.max_defect))
        };
        rep.push(
            "Berwald admissibility",
            true,
            ok,
            Some(bracket.max(skew.max_defect)),
            detail,
        );
    }

    let built = flags.map(|flags| Built { metric, x, flags });
    (rep.finish(), built)
}

fn render_validation(cfg: &ProblemConfig, rep: &ValidationReport, fmt: OutputFormat) -> String {
    match fmt {
        OutputFormat::Json => json_document("validate", &cfg.name, rep),
        OutputFormat::Table => {
            let mut t = Table::new(&[
                ("check", false),
                ("status", false),
                ("max defect", true),
                ("detail", false),
            ]);
            for c in &rep.checks {
                t.row(vec![
                    c.check.to_string(),
                    c.status.as_str().to_string(),
                    c.max_defect.map(fmt_real).unwrap_or_default(),
                    c.detail.clone(),
                ]);
            }
            let verdict = if rep.ok { "valid" } else { "INVALID" };
            format!("config: {}\n{}result: {verdict}\n", cfg.name, t.render())
        }
    }
}

pub fn cmd_validate(cfg: &ProblemConfig, fmt: OutputFormat) -> Outcome {
    let (rep, _) = validate(cfg);
    Outcome {
        code: if rep.ok { EXIT_OK } else { EXIT_VALIDATION },
        stdout: render_validation(cfg, &rep, fmt),
        notices: rep.notices.clone(),
    }
}

/// Shared gate for `curvature` and `scan`.
fn prepare(
    cfg: &ProblemConfig,
    force: bool,
) -> Result<(FinslerSpace, Vec<Flag>, FlagCurvatureOptions, Vec<String>), Outcome> {
    let (rep, built) = validate(cfg);
    let mut notices = rep.notices.clone();
    if !rep.ok && !force {
        for c in rep.checks.iter().filter(|c| c.status == Status::Fail) {
            notices.push(format!("validation failed: {}: {}", c.check, c.detail));
        }
        notices.push("run `validate` for the full report".into());
        return Err(Outcome {
            code: EXIT_VALIDATION,
            stdout: String::new(),
            notices,
        });
    }
    let Some(built) = built else {
        let e = Error::Validation("the metric data could not be assembled".into());
        return Err(Outcome::error(&e, notices));
    };
    if !rep.ok {
        notices.push("--force: validation failures ignored; results are diagnostic only".into());
    }
    let tol = cfg.options.tolerances;
    let space = if force {
        FinslerSpace::unchecked(built.metric, built.x)
    } else {
        FinslerSpace::new(built.metric, built.x, &tol)
    };
    let space = space.map_err(|e| Outcome::error(&e, notices.clone()))?;
    let opts = FlagCurvatureOptions {
        convention: cfg.options.sign_convention,
        gy_source: cfg.options.gy_source,
        fd_step: cfg.options.fd_step,
        enforce_preconditions: !force,
        tol,
        ..Default::default()
    };
    Ok((space, built.flags, opts, notices))
}

#[derive(Serialize)]
struct FlagResult<'a> {
    index: usize,
    #[serde(rename = "Y")]
    y: Vec<f64>,
    #[serde(rename = "U")]
    u: Vec<f64>,
    report: &'a CurvatureReport,
}

#[derive(Serialize)]
struct CurvatureDoc<'a> {
    method: Method,
    convention: Convention,
    flags: Vec<FlagResult<'a>>,
    notices: &'a [String],
}

pub fn cmd_curvature(cfg: &ProblemConfig, fmt: OutputFormat, force: bool) -> Outcome {
    let (space, flags, opts, mut notices) = match prepare(cfg, force) {
        Ok(p) => p,
        Err(o) => return o,
    };
    if flags.is_empty() {
        return Outcome::error(&Error::Input("the config lists no flags".into()), notices);
    }
    let method = cfg.options.method;
    let mut reports = Vec::with_capacity(flags.len());
    for (i, f) in flags.iter().enumerate() {
        match space.flag_curvature(f, method, &opts) {
            Ok(r) => {
                if let Some(a) = &r.sign_audit {
                    if !a.aligned_matches_oracle {
                        notices.push(format!(
                            "flag #{}: expansion disagrees with the curvature oracle (oracle <R(U,Y)Y,U> = {}, reported {})",
                            i + 1,
                            fmt_real(a.oracle_uryy),
                            fmt_real(r.contractions.uryy)
                        ));
                    }
                }
                reports.push(r);
            }
            Err(e) => {
                let e = match e {
                    Error::Precondition(m) => Error::Precondition(format!("flag #{}: {m}", i + 1)),
                    other => other,
                };
                return Outcome::error(&e, notices);
            }
        }
    }
    let stdout = match fmt {
        OutputFormat::Json => {
            let doc = CurvatureDoc {
                method,
                convention: opts.convention,
                flags: reports
                    .iter()
                    .zip(&flags)
                    .enumerate()
                    .map(|(i, (r, f))| FlagResult {
                        index: i + 1,
                        y: f.y().iter().cloned().collect(),
                        u: f.u().iter().cloned().collect(),
                        report: r,
                    })
                    .collect(),
                notices: &notices,
            };
            json_document("curvature", &cfg.name, &doc)
        }
        OutputFormat::Table => {
            let mut t = Table::new(&[
                ("flag", true),
                ("K", true),
                ("<X,R(U,Y)Y>", true),
                ("<R(U,Y)Y,U>", true),
                ("<R(U,Y)Y,Y>", true),
                ("numerator", true),
                ("denominator", true),
                ("<X,Y>", true),
                ("<X,U>", true),
                ("oracle", false),
            ]);
            for (i, r) in reports.iter().enumerate() {
                let oracle = match &r.sign_audit {
                    Some(a) if a.aligned_matches_oracle => "agrees",
                    Some(a) if a.sign_mismatch => "SIGN MISMATCH",
                    Some(_) => "DISAGREES",
                    None => "",
                };
                t.row(vec![
                    (i + 1).to_string(),
                    fmt_real(r.k),
                    fmt_real(r.contractions.xryy),
                    fmt_real(r.contractions.uryy),
                    fmt_real(r.contractions.ryyy),
                    fmt_real(r.numerator),
                    fmt_real(r.denominator),
                    fmt_real(r.xy),
                    fmt_real(r.xu),
                    oracle.to_string(),
                ]);
            }
            let mut s = format!(
                "config: {}\nmethod: {}\nconvention: {}\n",
                cfg.name,
                method.as_str(),
                opts.convention.as_str()
            );
            s += &t.render();
            s
        }
    };
    Outcome {
        code: EXIT_OK,
        stdout,
        notices,
    }
}

#[derive(Serialize)]
struct ScanDoc<'a> {
    #[serde(flatten)]
    summary: &'a ScanSummary,
    notices: &'a [String],
}

pub fn cmd_scan(cfg: &ProblemConfig, fmt: OutputFormat, force: bool) -> Outcome {
    let (space, _, opts, notices) = match prepare(cfg, force) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let o = &cfg.options;
    let summary = match space.scan_flags(o.samples, o.seed, o.method, &opts) {
        Ok(s) => s,
        Err(e) => return Outcome::error(&e, notices),
    };
    let stdout = match fmt {
        OutputFormat::Json => json_document(
            "scan",
            &cfg.name,
            &ScanDoc {
                summary: &summary,
                notices: &notices,
            },
        ),
        OutputFormat::Table => {
            let vec = |v: &[f64]| v.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(", ");
            let mut s = String::new();
            let _ = writeln!(s, "config: {}", cfg.name);
            let _ = writeln!(s, "method: {}", summary.method.as_str());
            let _ = writeln!(s, "convention: {}", summary.convention.as_str());
            let _ = writeln!(s, "samples: {} (seed {})", summary.samples, summary.seed);
            let _ = writeln!(
                s,
                "min K: {} at sample {}",
                fmt_real(summary.min_k),
                summary.argmin.index
            );
            let _ = writeln!(s, "  Y = [{}]", vec(&summary.argmin.y));
            let _ = writeln!(s, "  U = [{}]", vec(&summary.argmin.u));
            let _ = writeln!(
                s,
                "max K: {} at sample {}",
                fmt_real(summary.max_k),
                summary.argmax.index
            );
            let _ = writeln!(s, "  Y = [{}]", vec(&summary.argmax.y));
            let _ = writeln!(s, "  U = [{}]", vec(&summary.argmax.u));
            let _ = writeln!(s, "mean K: {}", fmt_real(summary.mean_k));
            s
        }
    };
    Outcome {
        code: EXIT_OK,
        stdout,
        notices,
    }
}

#[derive(Serialize)]
struct BerwaldDoc<'a> {
    checked: bool,
    #[serde(rename = "X")]
    x: Vec<f64>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    report: Option<&'a ObstructionReport>,
    notices: &'a [String],
}

pub fn cmd_berwald(cfg: &ProblemConfig, fmt: OutputFormat) -> Outcome {
    let (rep, built) = validate(cfg);
    let mut notices = rep.notices.clone();
    let Some(built) = built else {
        for c in rep.checks.iter().filter(|c| c.status == Status::Fail) {
            notices.push(format!("validation failed: {}: {}", c.check, c.detail));
        }
        return Outcome {
            code: EXIT_VALIDATION,
            stdout: String::new(),
            notices,
        };
    };
    let x: Vec<f64> = built.x.iter().cloned().collect();
    let tol = cfg.options.tolerances;
    let report = if built.metric.split().h_dim() > 0 {
        notices.push("Berwald admissibility: not checked (obstructions are implemented for h_dim = 0)".into());
        None
    } else {
        match obstruction_report(&built.metric, &built.x, cfg.options.samples, cfg.options.seed, &tol) {
            Ok(r) => Some(r),
            Err(e) => return Outcome::error(&e, notices),
        }
    };
    if let Some(r) = &report {
        if r.perfect && !r.berwald_admissible {
            notices.push(
                "perfect Lie algebra ([g,g] = g): no left-invariant non-Riemannian metric of this type exists".into(),
            );
        }
    }
    let code = match &report {
        Some(r) if !r.berwald_admissible => EXIT_VALIDATION,
        _ => EXIT_OK,
    };
    let stdout = match fmt {
        OutputFormat::Json => json_document(
            "berwald",
            &cfg.name,
            &BerwaldDoc {
                checked: report.is_some(),
                x,
                report: report.as_ref(),
                notices: &notices,
            },
        ),
        OutputFormat::Table => {
            let mut s = format!("config: {}\n", cfg.name);
            match &report {
                None => s += "Berwald admissibility: not checked (h_dim > 0)\n",
                Some(r) => {
                    let vec = |v: &[f64]| v.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(", ");
                    let yes = |b: bool| if b { "yes" } else { "no" };
                    let _ = writeln!(s, "perfect: {}", yes(r.perfect));
                    let _ = writeln!(s, "parallel space (dim {}):", r.parallel_space.len());
                    for v in &r.parallel_space {
                        let _ = writeln!(s, "  [{}]", vec(v));
                    }
                    let _ = writeln!(
                        s,
                        "X in parallel space: {} (defect {})",
                        yes(r.in_parallel_space),
                        fmt_real(r.bracket_defect)
                    );
                    let _ = writeln!(
                        s,
                        "ad(X) skew-adjoint: {} (defect {})",
                        yes(r.ad_skew.ok),
                        fmt_real(r.ad_skew.max_defect)
                    );
                    let _ = writeln!(s, "berwald admissible: {}", yes(r.berwald_admissible));
                    let _ = writeln!(
                        s,
                        "Koszul max |nabla_e_i X|: {} ({})",
                        fmt_real(r.koszul_parallel_defect),
                        if r.koszul_parallel_ok {
                            "parallel"
                        } else {
                            "not parallel"
                        }
                    );
                    if let Some(sx) = &r.sectional_along_x {
                        let _ = writeln!(
                            s,
                            "K(X,u) over {} samples: min {}, max {}",
                            sx.samples.len(),
                            fmt_real(sx.min_k),
                            fmt_real(sx.max_k)
                        );
                        for w in &sx.witnesses {
                            let _ = writeln!(
                                s,
                                "  witness [{}]: K = {}, u orthogonal to [X,g]: {}, X orthogonal to [u,g]: {}",
                                vec(&w.u),
                                fmt_real(w.k),
                                yes(w.u_orthogonal_to_image),
                                yes(w.x_orthogonal_to_bracket)
                            );
                        }
                    }
                }
            }
            s
        }
    };
    Outcome { code, stdout, notices }
}
