//! Flag curvature of `F = (alpha + beta)^2 / alpha` when the Chern connection
//! of `F` is the Levi-Civita connection of `g`:
//!
//! ```text
//!            6 <X,R(U,Y)Y> <X,U> + <R(U,Y)Y,U> (1 - <X,Y>^2)
//! K(P,Y) = ---------------------------------------------------
//!              (1 + <X,Y>)^4 (2 <X,U>^2 - <X,Y>^2 + 1)
//! ```
//!
//! for a `g`-orthonormal flag `{Y, U}`. The two curvature contractions come
//! from one of three routes: the general bracket expansion in terms of `g0`,
//! `phi` and `phi^-1` (valid for any invariant metric with bi-invariant
//! background), the naturally reductive formula, or the double-bracket
//! formula for bi-invariant metrics on groups.
//!
//! The bracket expansion as usually written evaluates to the negative of
//! `<R(U,Y)Y, .>` under the sign convention of [`crate::riemann_oracle`].
//! [`Convention::OracleAligned`] applies one global sign, calibrated against
//! the Koszul oracle on `su(2)`; [`Convention::Verbatim`] leaves the
//! expansion untouched.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::ReductivePair;
use crate::catalog;
use crate::error::{check_len, Error, Result};
use crate::finsler::{FinslerData, GySource, IdentityReport, DEFAULT_FD_STEP};
use crate::metrics::{check_ad_h_invariance, check_bi_invariance, check_naturally_reductive, InvariantMetric};
use crate::riemann_oracle::{curvature_oracle, koszul_connection, nat_reductive_r_unchecked, ConnectionTable};
use crate::sampling::SphereSampler;
use crate::{Tolerances, Vector};

pub use crate::metrics::{orthonormalize_flag, Flag};

/// Sign convention for the general bracket expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Convention {
    #[default]
    #[serde(rename = "oracle-aligned")]
    OracleAligned,
    #[serde(rename = "paper-verbatim")]
    Verbatim,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Convention::OracleAligned => "oracle-aligned",
            Convention::Verbatim => "paper-verbatim",
        }
    }
}

/// Route used for the curvature contractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    General,
    NaturallyReductive,
    BiInvariant,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::General => "general",
            Method::NaturallyReductive => "naturally-reductive",
            Method::BiInvariant => "bi-invariant",
        }
    }
}

/// Second argument of the first term of `<R(U,Y)Y, U>`.
///
/// `Bracket` pairs with `[Y,U]`. `Drift` pairs with `[Y,X]`, a variant that
/// does not reduce to the Riemannian sectional curvature at `X = 0`; it is
/// only useful for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UryyFirstTerm {
    #[default]
    Bracket,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlagCurvatureOptions {
    pub convention: Convention,
    pub uryy_first_term: UryyFirstTerm,
    pub gy_source: GySource,
    pub fd_step: f64,
    /// When false, metric checks and `|X| < 1` are not enforced
    /// (diagnostic runs only).
    pub enforce_preconditions: bool,
    pub tol: Tolerances,
}

impl Default for FlagCurvatureOptions {
    fn default() -> Self {
        Self {
            convention: Convention::OracleAligned,
            uryy_first_term: UryyFirstTerm::Bracket,
            gy_source: GySource::Closed,
            fd_step: DEFAULT_FD_STEP,
            enforce_preconditions: true,
            tol: Tolerances::default(),
        }
    }
}

/// The four terms of a bracket-expansion contraction, before any sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionTerms {
    pub terms: [f64; 4],
    /// Term two evaluated with `g0` instead of `g`.
    pub term2_background: f64,
}

impl ExpansionTerms {
    pub fn value(&self) -> f64 {
        self.terms.iter().sum()
    }

    pub fn value_with_background_term2(&self) -> f64 {
        self.terms[0] + self.term2_background + self.terms[2] + self.terms[3]
    }
}

/// `<X,R(U,Y)Y>`, `<R(U,Y)Y,U>` and `<R(U,Y)Y,Y>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contractions {
    pub xryy: f64,
    pub uryy: f64,
    pub ryyy: f64,
}

/// Expansion values next to an independent oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignAudit {
    pub verbatim_xryy: f64,
    pub verbatim_uryy: f64,
    pub oracle_xryy: f64,
    pub oracle_uryy: f64,
    /// The unsigned expansion equals the negated oracle value.
    pub sign_mismatch: bool,
    /// After applying the reported convention, the values match the oracle.
    pub aligned_matches_oracle: bool,
}

/// Values of the double-bracket formula for bi-invariant metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleBracket {
    /// `<X, [Y,[U,Y]]>`.
    pub x_dd: f64,
    /// `<U, [Y,[U,Y]]>`.
    pub u_dd: f64,
    pub numerator: f64,
    /// Includes the factor 4.
    pub denominator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub k: f64,
    pub contractions: Contractions,
    pub numerator: f64,
    pub denominator: f64,
    pub xy: f64,
    pub xu: f64,
    pub convention: Convention,
    pub method: Method,
    pub sign_audit: Option<SignAudit>,
    /// `(xryy, uryy)` with term two taken in `g0`, present when that differs.
    pub term2_background: Option<(f64, f64)>,
    pub double_bracket: Option<DoubleBracket>,
    /// `g_Y(R(U,Y)Y, U) / (g_Y(Y,Y) g_Y(U,U) - g_Y(Y,U)^2)` when the method
    /// yields the vector `R(U,Y)Y`.
    pub k_from_gy: Option<f64>,
}

/// Sign that maps the bracket expansion onto the oracle convention.
///
/// Computed once from `su(2)` with its bi-invariant metric, flag `(e1, e2)`.
pub fn calibrated_sign() -> f64 {
    static SIGN: OnceLock<f64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let metric = InvariantMetric::standard(catalog::su2(), ReductivePair::trivial(3))
            .expect("su(2) reference metric is valid");
        let e = |i: usize| Vector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        let (y, u) = (e(0), e(1));
        let expansion = uryy_expansion(&metric, &y, &u, &Vector::zeros(3), UryyFirstTerm::Bracket).value();
        let conn = koszul_connection(metric.algebra(), metric.split(), metric.inner()).expect("h is trivial");
        let oracle = metric
            .inner()
            .dot(&curvature_oracle(&conn, metric.algebra(), &u, &y, &y), &u);
        if expansion * oracle < 0.0 {
            -1.0
        } else {
            1.0
        }
    })
}

fn sign_for(c: Convention) -> f64 {
    match c {
        Convention::OracleAligned => calibrated_sign(),
        Convention::Verbatim => 1.0,
    }
}

/// Unsigned expansion of `<X, R(U,Y)Y>`; inputs in `m`-coordinates.
pub fn xryy_expansion(metric: &InvariantMetric, x: &Vector, y: &Vector, u: &Vector) -> ExpansionTerms {
    let (x, y, u) = (metric.embed(x), metric.embed(y), metric.embed(u));
    let b = |a: &Vector, c: &Vector| metric.br(a, c);
    let g0 = |a: &Vector, c: &Vector| metric.g0().dot(a, c);
    let (px, py, pu) = (metric.phi_full(&x), metric.phi_full(&y), metric.phi_full(&u));

    let t1 = 0.25 * (g0(&(b(&pu, &y) + b(&u, &py)), &b(&y, &x)) + g0(&b(&u, &y), &(b(&py, &x) + b(&y, &px))));
    let yu = b(&y, &u);
    let yx_m = metric.proj_m(&b(&y, &x));
    let t2 = 0.75 * metric.g_full(&yu, &yx_m);
    let t2_bg = 0.75 * g0(&yu, &yx_m);
    let t3 = 0.5 * g0(&(b(&u, &px) + b(&x, &pu)), &metric.phi_inv_full(&b(&y, &py)));
    let t4 = -0.25
        * g0(
            &(b(&u, &py) + b(&y, &pu)),
            &metric.phi_inv_full(&(b(&y, &px) + b(&x, &py))),
        );
    ExpansionTerms {
        terms: [t1, t2, t3, t4],
        term2_background: t2_bg,
    }
}

/// Unsigned expansion of `<R(U,Y)Y, U>`; `x` is only read by
/// [`UryyFirstTerm::Drift`].
pub fn uryy_expansion(
    metric: &InvariantMetric,
    y: &Vector,
    u: &Vector,
    x: &Vector,
    first: UryyFirstTerm,
) -> ExpansionTerms {
    let (x, y, u) = (metric.embed(x), metric.embed(y), metric.embed(u));
    let b = |a: &Vector, c: &Vector| metric.br(a, c);
    let g0 = |a: &Vector, c: &Vector| metric.g0().dot(a, c);
    let (py, pu) = (metric.phi_full(&y), metric.phi_full(&u));

    let partner = match first {
        UryyFirstTerm::Bracket => b(&y, &u),
        UryyFirstTerm::Drift => b(&y, &x),
    };
    let t1 = 0.5 * g0(&(b(&pu, &y) + b(&u, &py)), &partner);
    let yu = b(&y, &u);
    let yu_m = metric.proj_m(&yu);
    let t2 = 0.75 * metric.g_full(&yu, &yu_m);
    let t2_bg = 0.75 * g0(&yu, &yu_m);
    let t3 = g0(&b(&u, &pu), &metric.phi_inv_full(&b(&y, &py)));
    let s = b(&u, &py) + b(&y, &pu);
    let t4 = -0.25 * g0(&s, &metric.phi_inv_full(&(b(&y, &pu) + b(&u, &py))));
    ExpansionTerms {
        terms: [t1, t2, t3, t4],
        term2_background: t2_bg,
    }
}

/// `<X, R(U,Y)Y>` from the bracket expansion under `convention`.
pub fn bracket_xryy(metric: &InvariantMetric, x: &Vector, y: &Vector, u: &Vector, convention: Convention) -> f64 {
    sign_for(convention) * xryy_expansion(metric, x, y, u).value()
}

/// `<R(U,Y)Y, U>` from the bracket expansion under `convention`.
pub fn bracket_uryy(metric: &InvariantMetric, y: &Vector, u: &Vector, convention: Convention) -> f64 {
    let zero = Vector::zeros(metric.m_dim());
    sign_for(convention) * uryy_expansion(metric, y, u, &zero, UryyFirstTerm::Bracket).value()
}

/// An invariant metric together with a drift vector `X` in `m`.
#[derive(Debug, Clone)]
pub struct FinslerSpace {
    metric: InvariantMetric,
    data: FinslerData,
}

/// Precondition results shared by every flag of one evaluation.
struct Prepared {
    method: Method,
    opts: FlagCurvatureOptions,
    conn: Option<ConnectionTable>,
    naturally_reductive: bool,
}

impl FinslerSpace {
    /// Requires `|X|_g < 1 - tol.boundary`.
    pub fn new(metric: InvariantMetric, x: Vector, tol: &Tolerances) -> Result<Self> {
        let data = FinslerData::new(metric.inner().clone(), x, tol.boundary)?;
        Ok(Self { metric, data })
    }

    pub fn unchecked(metric: InvariantMetric, x: Vector) -> Result<Self> {
        let data = FinslerData::unchecked(metric.inner().clone(), x)?;
        Ok(Self { metric, data })
    }

    pub fn metric(&self) -> &InvariantMetric {
        &self.metric
    }

    pub fn finsler(&self) -> &FinslerData {
        &self.data
    }

    pub fn drift(&self) -> &Vector {
        self.data.drift()
    }

    fn prepare(&self, method: Method, opts: &FlagCurvatureOptions) -> Result<Prepared> {
        let tol = &opts.tol;
        let (alg, split, g) = (self.metric.algebra(), self.metric.split(), self.metric.inner());
        let nat = check_naturally_reductive(alg, split, g, tol.metric)?;
        if opts.enforce_preconditions {
            let fr = self.data.validate(tol.boundary);
            if !fr.ok {
                return Err(Error::Precondition(format!(
                    "|X|_g = {} is not below 1; F is not a Finsler metric",
                    fr.norm_x
                )));
            }
            let adh = check_ad_h_invariance(alg, split, g, tol.metric)?;
            if !adh.ok {
                return Err(Error::Precondition(format!(
                    "inner product on m is not ad(h)-invariant (defect {:e})",
                    adh.max_defect
                )));
            }
            match method {
                Method::General => {
                    let bi = check_bi_invariance(alg, self.metric.g0().matrix(), tol.metric)?;
                    if !bi.ok {
                        return Err(Error::Precondition(format!(
                            "the general expansion needs a bi-invariant g0 (defect {:e})",
                            bi.max_defect
                        )));
                    }
                }
                Method::NaturallyReductive => {
                    if !nat.ok {
                        return Err(Error::Precondition(format!(
                            "metric is not naturally reductive (defect {:e})",
                            nat.max_defect
                        )));
                    }
                }
                Method::BiInvariant => {
                    self.require_bi_invariant_g(tol)?;
                }
            }
        }
        let conn = if split.h_dim() == 0 {
            Some(koszul_connection(alg, split, g)?)
        } else {
            None
        };
        Ok(Prepared {
            method,
            opts: *opts,
            conn,
            naturally_reductive: nat.ok,
        })
    }

    fn require_bi_invariant_g(&self, tol: &Tolerances) -> Result<()> {
        if self.metric.split().h_dim() != 0 {
            return Err(Error::Precondition(
                "the bi-invariant formula applies to Lie groups only (h_dim must be 0)".into(),
            ));
        }
        let bi = check_bi_invariance(self.metric.algebra(), self.metric.inner().matrix(), tol.metric)?;
        if !bi.ok {
            return Err(Error::Precondition(format!(
                "g is not bi-invariant (defect {:e})",
                bi.max_defect
            )));
        }
        Ok(())
    }

    fn oracle_vector(&self, p: &Prepared, u: &Vector, y: &Vector) -> Option<Vector> {
        if let Some(conn) = &p.conn {
            return Some(curvature_oracle(conn, self.metric.algebra(), u, y, y));
        }
        if p.naturally_reductive {
            return nat_reductive_r_unchecked(self.metric.algebra(), self.metric.split(), u, y, p.opts.tol.jacobi).ok();
        }
        None
    }

    fn gy(&self, opts: &FlagCurvatureOptions, y: &Vector, a: &Vector, b: &Vector) -> Result<f64> {
        self.data.g_y_from(opts.gy_source, y, a, b, opts.fd_step)
    }

    /// `g_Y(R,U) / (g_Y(Y,Y) g_Y(U,U) - g_Y(Y,U)^2)`.
    fn k_from_gy(&self, opts: &FlagCurvatureOptions, flag: &Flag, r: &Vector) -> Result<f64> {
        let (y, u) = (flag.y(), flag.u());
        let num = self.gy(opts, y, r, u)?;
        let den = self.gy(opts, y, y, y)? * self.gy(opts, y, u, u)? - self.gy(opts, y, y, u)?.powi(2);
        Ok(num / den)
    }

    fn evaluate(&self, p: &Prepared, flag: &Flag) -> Result<CurvatureReport> {
        let opts = &p.opts;
        let tol = &opts.tol;
        if opts.enforce_preconditions {
            self.data.require_orthonormal(flag)?;
        } else {
            check_len(flag.y().len(), self.metric.m_dim(), "flag")?;
        }
        let g = self.metric.inner();
        let x = self.data.drift();
        let (y, u) = (flag.y(), flag.u());
        let xy = g.dot(x, y);
        let xu = g.dot(x, u);
        let denominator = (1.0 + xy).powi(4) * (2.0 * xu * xu - xy * xy + 1.0);

        let mut sign_audit = None;
        let mut term2_background = None;
        let mut double_bracket = None;
        let mut r_vec = None;

        let contractions = match p.method {
            Method::General => {
                let sign = sign_for(opts.convention);
                let xe = xryy_expansion(&self.metric, x, y, u);
                let ue = uryy_expansion(&self.metric, y, u, x, opts.uryy_first_term);
                let ye = xryy_expansion(&self.metric, y, y, u);
                let c = Contractions {
                    xryy: sign * xe.value(),
                    uryy: sign * ue.value(),
                    ryyy: sign * ye.value(),
                };
                let (xb, ub) = (
                    sign * xe.value_with_background_term2(),
                    sign * ue.value_with_background_term2(),
                );
                if (xb - c.xryy).abs() > tol.oracle || (ub - c.uryy).abs() > tol.oracle {
                    term2_background = Some((xb, ub));
                }
                if let Some(r) = self.oracle_vector(p, u, y) {
                    let (ox, ou) = (g.dot(x, &r), g.dot(&r, u));
                    let scale = 1.0 + ox.abs().max(ou.abs());
                    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * scale;
                    let significant = ox.abs().max(ou.abs()) > tol.oracle;
                    sign_audit = Some(SignAudit {
                        verbatim_xryy: xe.value(),
                        verbatim_uryy: ue.value(),
                        oracle_xryy: ox,
                        oracle_uryy: ou,
                        sign_mismatch: significant && close(xe.value(), -ox) && close(ue.value(), -ou),
                        aligned_matches_oracle: close(c.xryy, ox) && close(c.uryy, ou),
                    });
                }
                c
            }
            Method::NaturallyReductive => {
                let r = nat_reductive_r_unchecked(self.metric.algebra(), self.metric.split(), u, y, tol.jacobi)?;
                let c = Contractions {
                    xryy: g.dot(x, &r),
                    uryy: g.dot(&r, u),
                    ryyy: g.dot(&r, y),
                };
                r_vec = Some(r);
                c
            }
            Method::BiInvariant => {
                let alg = self.metric.algebra();
                let dd = alg.br(y, &alg.br(u, y));
                let (x_dd, u_dd, y_dd) = (g.dot(x, &dd), g.dot(u, &dd), g.dot(y, &dd));
                let numerator = 6.0 * x_dd * xu + u_dd * (1.0 - xy * xy);
                let den4 = 4.0 * denominator;
                double_bracket = Some(DoubleBracket {
                    x_dd,
                    u_dd,
                    numerator,
                    denominator: den4,
                });
                r_vec = Some(dd * 0.25);
                Contractions {
                    xryy: 0.25 * x_dd,
                    uryy: 0.25 * u_dd,
                    ryyy: 0.25 * y_dd,
                }
            }
        };

        let numerator = 6.0 * contractions.xryy * xu + contractions.uryy * (1.0 - xy * xy);
        if opts.enforce_preconditions && !(denominator > 0.0) {
            return Err(Error::Numeric(format!(
                "flag-curvature denominator {denominator:e} is not positive"
            )));
        }
        let k = match &double_bracket {
            Some(db) => db.numerator / db.denominator,
            None => numerator / denominator,
        };
        if !k.is_finite() {
            return Err(Error::Numeric("flag curvature is not finite".into()));
        }
        let k_from_gy = match &r_vec {
            Some(r) => Some(self.k_from_gy(opts, flag, r)?),
            None => None,
        };
        Ok(CurvatureReport {
            k,
            contractions,
            numerator,
            denominator,
            xy,
            xu,
            convention: opts.convention,
            method: p.method,
            sign_audit,
            term2_background,
            double_bracket,
            k_from_gy,
        })
    }

    /// Flag curvature of an orthonormal flag.
    pub fn flag_curvature(&self, flag: &Flag, method: Method, opts: &FlagCurvatureOptions) -> Result<CurvatureReport> {
        let p = self.prepare(method, opts)?;
        self.evaluate(&p, flag)
    }

    /// The double-bracket formula for a bi-invariant `g` on a group.
    pub fn flag_curvature_biinvariant(&self, flag: &Flag, opts: &FlagCurvatureOptions) -> Result<CurvatureReport> {
        self.flag_curvature(flag, Method::BiInvariant, opts)
    }

    /// `g_Y(R, U)` against its expansion
    /// `(1+<X,Y>)^2 { 2<X,U><Y,R>(1-2<X,Y>) + 6<X,R><X,U> + <R,U>(1-<X,Y>^2) }`.
    pub fn numerator_identity_check(&self, flag: &Flag, ruyy: &Vector) -> Result<IdentityReport> {
        self.data.require_orthonormal(flag)?;
        check_len(ruyy.len(), self.metric.m_dim(), "R(U,Y)Y")?;
        let g = self.metric.inner();
        let x = self.data.drift();
        let (y, u) = (flag.y(), flag.u());
        let (xy, xu) = (g.dot(x, y), g.dot(x, u));
        let lhs = self.data.g_y(y, ruyy, u)?;
        let rhs = (1.0 + xy).powi(2)
            * (2.0 * xu * g.dot(y, ruyy) * (1.0 - 2.0 * xy)
                + 6.0 * g.dot(x, ruyy) * xu
                + g.dot(ruyy, u) * (1.0 - xy * xy));
        Ok(IdentityReport::new(lhs, rhs))
    }

    /// Samples `n_samples` flags (seeded, uniform on the `g`-unit sphere and
    /// then on the unit sphere of `Y`'s complement) and summarizes `K`.
    pub fn scan_flags(
        &self,
        n_samples: usize,
        seed: u64,
        method: Method,
        opts: &FlagCurvatureOptions,
    ) -> Result<ScanSummary> {
        if self.metric.m_dim() < 2 {
            return Err(Error::Domain("m must be at least 2-dimensional to carry a flag".into()));
        }
        if n_samples == 0 {
            return Err(Error::Input("scan needs at least one sample".into()));
        }
        let p = self.prepare(method, opts)?;
        let flags = sample_flags(self.metric.inner(), n_samples, seed);
        let ks: Vec<f64> = flags
            .par_iter()
            .map(|f| self.evaluate(&p, f).map(|r| r.k))
            .collect::<Result<_>>()?;
        Ok(ScanSummary::from_samples(&flags, &ks, method, opts.convention, seed))
    }
}

/// Deterministic flag sample.
pub fn sample_flags(g: &crate::metrics::InnerProduct, n: usize, seed: u64) -> Vec<Flag> {
    let sampler = SphereSampler::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let y = sampler.unit(g, &mut rng);
            let u = sampler.unit_orthogonal(g, std::slice::from_ref(&y), &mut rng);
            Flag::new(g, y, u).expect("sampled pair is orthonormal")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub index: usize,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub seed: u64,
    pub method: Method,
    pub convention: Convention,
    pub min_k: f64,
    pub max_k: f64,
    pub mean_k: f64,
    pub argmin: ScanPoint,
    pub argmax: ScanPoint,
}

impl ScanSummary {
    fn from_samples(flags: &[Flag], ks: &[f64], method: Method, convention: Convention, seed: u64) -> Self {
        let (mut imin, mut imax) = (0, 0);
        for (i, &k) in ks.iter().enumerate() {
            if k < ks[imin] {
                imin = i;
            }
            if k > ks[imax] {
                imax = i;
            }
        }
        let point = |i: usize| ScanPoint {
            index: i,
            y: flags[i].y().iter().cloned().collect(),
            u: flags[i].u().iter().cloned().collect(),
            k: ks[i],
        };
        Self {
            samples: ks.len(),
            seed,
            method,
            convention,
            min_k: ks[imin],
            max_k: ks[imax],
            mean_k: ks.iter().sum::<f64>() / ks.len() as f64,
            argmin: point(imin),
            argmax: point(imax),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{BiInvariantForm, InnerProduct, MetricEndomorphism};
    use nalgebra::{DMatrix, DVector};

    fn v(xs: &[f64]) -> Vector {
        DVector::from_column_slice(xs)
    }

    fn space(alg: crate::LieAlgebraSpec, split: ReductivePair, x: &[f64]) -> FinslerSpace {
        let metric = InvariantMetric::standard(alg, split).unwrap();
        FinslerSpace::new(metric, v(x), &Tolerances::default()).unwrap()
    }

    fn flag(s: &FinslerSpace, y: &[f64], u: &[f64]) -> Flag {
        orthonormalize_flag(s.metric().inner(), &v(y), &v(u), 1e-12).unwrap()
    }

    #[test]
    fn sign_is_negative() {
        assert_eq!(calibrated_sign(), -1.0);
    }

    #[test]
    fn su2_expansion_values() {
        let s = space(catalog::su2(), ReductivePair::trivial(3), &[0., 0., 0.]);
        let m = s.metric();
        let (x, y, u) = (v(&[0., 0.5, 0.]), v(&[1., 0., 0.]), v(&[0., 1., 0.]));
        assert!((bracket_xryy(m, &x, &y, &u, Convention::Verbatim) + 0.125).abs() < 1e-15);
        assert!((bracket_xryy(m, &x, &y, &u, Convention::OracleAligned) - 0.125).abs() < 1e-15);
        assert!((bracket_uryy(m, &y, &u, Convention::Verbatim) + 0.25).abs() < 1e-15);
        assert!((bracket_uryy(m, &y, &u, Convention::OracleAligned) - 0.25).abs() < 1e-15);
        let zero = Vector::zeros(3);
        assert_eq!(bracket_xryy(m, &zero, &y, &u, Convention::Verbatim), 0.0);
        assert_eq!(bracket_xryy(m, &zero, &y, &u, Convention::OracleAligned), 0.0);
    }

    #[test]
    fn abelian_is_flat_everywhere() {
        let s = space(catalog::abelian(3), ReductivePair::trivial(3), &[0.1, 0.2, 0.3]);
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 1.]);
        for c in [Convention::OracleAligned, Convention::Verbatim] {
            assert_eq!(bracket_uryy(s.metric(), f.y(), f.u(), c), 0.0);
        }
        for m in [Method::General, Method::NaturallyReductive, Method::BiInvariant] {
            let r = s.flag_curvature(&f, m, &FlagCurvatureOptions::default()).unwrap();
            assert_eq!(r.k, 0.0);
        }
        let sc = s
            .scan_flags(50, 1, Method::General, &FlagCurvatureOptions::default())
            .unwrap();
        assert_eq!((sc.min_k, sc.max_k), (0.0, 0.0));
    }

    #[test]
    fn round_sphere_values() {
        let s = space(catalog::su2(), ReductivePair::trivial(3), &[0., 0., 0.]);
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 0.]);
        for m in [Method::General, Method::NaturallyReductive, Method::BiInvariant] {
            let r = s.flag_curvature(&f, m, &FlagCurvatureOptions::default()).unwrap();
            assert!((r.k - 0.25).abs() < 1e-14, "{m:?}: {}", r.k);
        }
        let (alg, split) = catalog::su2_over_u1();
        let s2 = space(alg, split, &[0., 0.]);
        let f = flag(&s2, &[1., 0.], &[0., 1.]);
        for m in [Method::General, Method::NaturallyReductive] {
            let r = s2.flag_curvature(&f, m, &FlagCurvatureOptions::default()).unwrap();
            assert!((r.k - 1.0).abs() < 1e-14, "{m:?}: {}", r.k);
        }
        // no bi-invariant route on a quotient
        assert!(matches!(
            s2.flag_curvature(&f, Method::BiInvariant, &FlagCurvatureOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn verbatim_flips_general_method() {
        let s = space(catalog::su2(), ReductivePair::trivial(3), &[0., 0., 0.]);
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 0.]);
        let opts = FlagCurvatureOptions {
            convention: Convention::Verbatim,
            ..Default::default()
        };
        let r = s.flag_curvature(&f, Method::General, &opts).unwrap();
        assert!((r.contractions.uryy + 0.25).abs() < 1e-15);
        let audit = r.sign_audit.unwrap();
        assert!(audit.sign_mismatch && !audit.aligned_matches_oracle);
        let r2 = s
            .flag_curvature(&f, Method::General, &FlagCurvatureOptions::default())
            .unwrap();
        assert_eq!(r2.k, -r.k);
        assert!(r2.sign_audit.unwrap().aligned_matches_oracle);
    }

    #[test]
    fn drift_first_term_breaks_riemannian_reduction() {
        let s = space(catalog::su2(), ReductivePair::trivial(3), &[0., 0., 0.]);
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 0.]);
        let opts = FlagCurvatureOptions {
            uryy_first_term: UryyFirstTerm::Drift,
            ..Default::default()
        };
        let r = s.flag_curvature(&f, Method::General, &opts).unwrap();
        assert!((r.k - 0.25).abs() > 0.1);
    }

    #[test]
    fn general_needs_bi_invariant_background() {
        let alg = catalog::heisenberg();
        let metric = InvariantMetric::standard(alg, ReductivePair::trivial(3)).unwrap();
        let s = FinslerSpace::new(metric, Vector::zeros(3), &Tolerances::default()).unwrap();
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 0.]);
        assert!(matches!(
            s.flag_curvature(&f, Method::General, &FlagCurvatureOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn term2_variant_reported_for_nontrivial_phi() {
        let alg = catalog::su2();
        let t = ReductivePair::trivial(3);
        let g0 = BiInvariantForm::identity(3);
        let phi = MetricEndomorphism::new(DMatrix::from_diagonal(&v(&[1., 2., 3.])), &g0, &t, 1e-9).unwrap();
        let metric = InvariantMetric::new(alg, t, g0, phi, &Tolerances::default()).unwrap();
        let s = FinslerSpace::new(metric, Vector::zeros(3), &Tolerances::default()).unwrap();
        let f = flag(&s, &[1., 0.3, 0.], &[0., 1., 0.2]);
        let r = s
            .flag_curvature(&f, Method::General, &FlagCurvatureOptions::default())
            .unwrap();
        assert!(r.term2_background.is_some());
        // the metric form of term two is the one that matches the oracle
        assert!(r.sign_audit.unwrap().aligned_matches_oracle);
    }

    #[test]
    fn scan_needs_a_plane() {
        let alg = catalog::abelian(2);
        let metric = InvariantMetric::standard(alg, ReductivePair::new(2, 1).unwrap()).unwrap();
        let s = FinslerSpace::new(metric, Vector::zeros(1), &Tolerances::default()).unwrap();
        assert!(matches!(
            s.scan_flags(10, 0, Method::General, &FlagCurvatureOptions::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn riemannian_numerator_identity() {
        let s = space(catalog::su2(), ReductivePair::trivial(3), &[0., 0., 0.]);
        let f = flag(&s, &[1., 0., 0.], &[0., 1., 0.]);
        let r = v(&[0.3, 0.7, -0.1]);
        let rep = s.numerator_identity_check(&f, &r).unwrap();
        assert!((rep.lhs - 0.7).abs() < 1e-14 && rep.defect < 1e-14);
        let _ = InnerProduct::identity(1);
    }
}
