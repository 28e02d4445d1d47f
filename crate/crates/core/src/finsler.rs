//! The Finsler function `F(y) = (alpha(y) + <X, y>)^2 / alpha(y)` with
//! `alpha(y) = sqrt(<y, y>)`, and its fundamental tensor
//! `g_Y(U, V) = 1/2 d^2/ds dt F^2(Y + sU + tV)` at `s = t = 0`.
//!
//! The closed form of `g_Y` is kept as four separate blocks so that a
//! disagreement with the finite-difference oracle can be traced to one of
//! them. The oracle evaluates `F^2` in double-double arithmetic, so its error
//! is the truncation error of the stencil rather than cancellation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{check_len, Error, Result};
use crate::metrics::{Flag, InnerProduct, FLAG_ORTHONORMAL_TOL};
use crate::{Matrix, Vector};

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Power of `<Y, Y>` in the denominator of the first block of the closed
/// form. `Two` is the symmetric, correct expansion. `FiveHalves` is kept
/// for audits: it agrees with `Two` only when `<Y, Y> = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeadPower {
    #[default]
    Two,
    FiveHalves,
}

/// Which evaluation of `g_Y` feeds downstream computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GySource {
    #[default]
    Closed,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdScheme {
    /// Four-point central stencil.
    #[default]
    Central,
    /// Central stencils at `h` and `h/2` combined as `(4 D(h/2) - D(h)) / 3`.
    Richardson,
}

/// Riemannian inner product `g` on `m` together with the drift vector `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinslerData {
    g: InnerProduct,
    x: Vector,
}

/// Outcome of [`FinslerData::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinslerReport {
    pub ok: bool,
    pub norm_x: f64,
    pub margin: f64,
}

/// Two sides of a scalar identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

impl IdentityReport {
    pub(crate) fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            defect: (lhs - rhs).abs(),
        }
    }
}

/// Closed form next to the oracle, with the per-block breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GyDiscrepancy {
    pub closed: f64,
    pub fd: f64,
    pub blocks: [f64; 4],
    /// `|closed - fd| / max(1, |fd|)`.
    pub relative_defect: f64,
}

/// `x / y` to double-double accuracy; the crate's own quotient is only
/// accurate to about one ulp of `f64`, so one residual correction is applied.
fn div_tf(x: TwoFloat, y: TwoFloat) -> TwoFloat {
    let q = x / y;
    let r = x - q * y;
    q + TwoFloat::from(f64::from(r) / f64::from(y))
}

impl FinslerData {
    /// Requires `|X|_g < 1 - tol_boundary`.
    pub fn new(g: InnerProduct, x: Vector, tol_boundary: f64) -> Result<Self> {
        let d = Self::unchecked(g, x)?;
        let r = d.validate(tol_boundary);
        if !r.ok {
            return Err(Error::Domain(format!(
                "|X|_g = {} is not below 1; F is not a Finsler metric",
                r.norm_x
            )));
        }
        Ok(d)
    }

    /// Skips the norm check; use [`Self::validate`] to inspect the data.
    pub fn unchecked(g: InnerProduct, x: Vector) -> Result<Self> {
        check_len(x.len(), g.dim(), "drift vector")?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("drift vector has non-finite entries".into()));
        }
        Ok(Self { g, x })
    }

    /// The Riemannian case `X = 0`.
    pub fn riemannian(g: InnerProduct) -> Self {
        let n = g.dim();
        Self { g, x: Vector::zeros(n) }
    }

    pub fn inner(&self) -> &InnerProduct {
        &self.g
    }

    pub fn drift(&self) -> &Vector {
        &self.x
    }

    pub fn validate(&self, tol_boundary: f64) -> FinslerReport {
        let norm_x = self.g.norm(&self.x);
        FinslerReport {
            ok: norm_x < 1.0 - tol_boundary,
            norm_x,
            margin: 1.0 - norm_x,
        }
    }

    fn nonzero(&self, y: &Vector, what: &str) -> Result<f64> {
        check_len(y.len(), self.g.dim(), "tangent vector")?;
        let yy = self.g.dot(y, y);
        if !(yy > 0.0) {
            return Err(Error::Domain(format!("{what} must be nonzero")));
        }
        Ok(yy)
    }

    /// `F(y) = (alpha + beta)^2 / alpha`.
    pub fn f_eval(&self, y: &Vector) -> Result<f64> {
        let yy = self.nonzero(y, "F argument")?;
        let a = yy.sqrt();
        let s = a + self.g.dot(&self.x, y);
        Ok(s * s / a)
    }

    /// The four blocks of the closed-form `g_Y(U, V)`; their sum is the value.
    pub fn gy_blocks(&self, y: &Vector, u: &Vector, v: &Vector, lead: LeadPower) -> Result<[f64; 4]> {
        let yy = self.nonzero(y, "flagpole")?;
        check_len(u.len(), self.g.dim(), "U")?;
        check_len(v.len(), self.g.dim(), "V")?;
        let g = |a: &Vector, b: &Vector| self.g.dot(a, b);
        let x = &self.x;
        let a = yy.sqrt();
        let xy = g(x, y);
        let s = a + xy;
        let (xu, xv, yu, yv, uv) = (g(x, u), g(x, v), g(y, u), g(y, v), g(u, v));

        let lead_den = match lead {
            LeadPower::Two => yy * yy,
            LeadPower::FiveHalves => yy * yy * a,
        };
        let b1 = 4.0 * s.powi(3) / lead_den * (xv * yu - yv * xu);
        let b2 = 2.0 * s * s / yy * (uv + xu * xv - xy * yv * yu / (yy * a) + (xu * yv + xy * uv + xv * yu) / a);
        let b3 = s.powi(4) / yy.powi(3) * (4.0 * yu * yv - uv * yy);
        let b4 = 4.0 * s * s / yy * (yv / a + xv) * (yu / a + xu - 2.0 * yu / a - 2.0 * xy * yu / yy);
        Ok([b1, b2, b3, b4])
    }

    /// Closed-form `g_Y(U, V)`.
    pub fn g_y(&self, y: &Vector, u: &Vector, v: &Vector) -> Result<f64> {
        Ok(self.gy_blocks(y, u, v, LeadPower::Two)?.iter().sum())
    }

    /// `g_Y` as a matrix in the coordinate basis of `m`.
    pub fn g_y_matrix(&self, y: &Vector) -> Result<Matrix> {
        let n = self.g.dim();
        let e = |i: usize| Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let val = self.g_y(y, &e(i), &e(j))?;
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
        }
        Ok(m)
    }

    /// `g_Y(U, V)` from the selected source.
    pub fn g_y_from(&self, source: GySource, y: &Vector, u: &Vector, v: &Vector, step: f64) -> Result<f64> {
        match source {
            GySource::Closed => self.g_y(y, u, v),
            GySource::Fd => self.g_y_fd(y, u, v, step, FdScheme::Central),
        }
    }

    fn dot_tf(&self, a: &[TwoFloat], b: &[TwoFloat]) -> TwoFloat {
        let gm = self.g.matrix();
        let n = a.len();
        let mut acc = TwoFloat::from(0.0);
        for i in 0..n {
            let mut row = TwoFloat::from(0.0);
            for j in 0..n {
                row += TwoFloat::from(gm[(i, j)]) * b[j];
            }
            acc += a[i] * row;
        }
        acc
    }

    /// `F^2 / 2` at `y + s u + t v`, in double-double arithmetic.
    fn half_f2_tf(&self, y: &Vector, u: &Vector, v: &Vector, s: f64, t: f64) -> Result<TwoFloat> {
        let (s, t) = (TwoFloat::from(s), TwoFloat::from(t));
        let w: Vec<TwoFloat> = (0..y.len())
            .map(|i| TwoFloat::from(y[i]) + s * TwoFloat::from(u[i]) + t * TwoFloat::from(v[i]))
            .collect();
        let xs: Vec<TwoFloat> = self.x.iter().map(|&c| TwoFloat::from(c)).collect();
        let q = self.dot_tf(&w, &w);
        let qf = f64::from(q);
        if !(qf > 0.0) || !qf.is_finite() {
            return Err(Error::Numeric(format!(
                "finite-difference stencil left the domain (alpha^2 = {qf:e})"
            )));
        }
        let a = q.sqrt();
        let sum = a + self.dot_tf(&xs, &w);
        let sum2 = sum * sum;
        Ok(div_tf(sum2 * sum2, q * TwoFloat::from(2.0)))
    }

    fn mixed_central(&self, y: &Vector, u: &Vector, v: &Vector, h: f64) -> Result<f64> {
        let f = |s: f64, t: f64| self.half_f2_tf(y, u, v, s, t);
        let num = f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?;
        let hh = TwoFloat::from(h);
        Ok(f64::from(num / (TwoFloat::from(4.0) * hh * hh)))
    }

    /// Finite-difference `g_Y(U, V)`: the mixed second derivative of `F^2/2`.
    pub fn g_y_fd(&self, y: &Vector, u: &Vector, v: &Vector, step: f64, scheme: FdScheme) -> Result<f64> {
        self.nonzero(y, "flagpole")?;
        check_len(u.len(), self.g.dim(), "U")?;
        check_len(v.len(), self.g.dim(), "V")?;
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Input(format!(
                "finite-difference step must be positive, got {step}"
            )));
        }
        match scheme {
            FdScheme::Central => self.mixed_central(y, u, v, step),
            FdScheme::Richardson => {
                let coarse = self.mixed_central(y, u, v, step)?;
                let fine = self.mixed_central(y, u, v, 0.5 * step)?;
                Ok((4.0 * fine - coarse) / 3.0)
            }
        }
    }

    /// Central-difference directional derivative `dF(y)[v]`.
    pub fn df_fd(&self, y: &Vector, v: &Vector, step: f64) -> Result<f64> {
        self.nonzero(y, "F argument")?;
        let zero = Vector::zeros(y.len());
        let f =
            |t: f64| -> Result<TwoFloat> { Ok((self.half_f2_tf(y, v, &zero, t, 0.0)? * TwoFloat::from(2.0)).sqrt()) };
        let d = (f(step)? - f(-step)?) / (TwoFloat::from(2.0) * TwoFloat::from(step));
        Ok(f64::from(d))
    }

    /// Closed form against the oracle, with the block breakdown.
    pub fn gy_discrepancy(
        &self,
        y: &Vector,
        u: &Vector,
        v: &Vector,
        lead: LeadPower,
        step: f64,
    ) -> Result<GyDiscrepancy> {
        let blocks = self.gy_blocks(y, u, v, lead)?;
        let closed: f64 = blocks.iter().sum();
        let fd = self.g_y_fd(y, u, v, step, FdScheme::Central)?;
        Ok(GyDiscrepancy {
            closed,
            fd,
            blocks,
            relative_defect: (closed - fd).abs() / fd.abs().max(1.0),
        })
    }

    pub(crate) fn require_orthonormal(&self, flag: &Flag) -> Result<()> {
        let g = &self.g;
        check_len(flag.y().len(), g.dim(), "flag")?;
        let d = (g.dot(flag.y(), flag.y()) - 1.0)
            .abs()
            .max((g.dot(flag.u(), flag.u()) - 1.0).abs())
            .max(g.dot(flag.y(), flag.u()).abs());
        if d > FLAG_ORTHONORMAL_TOL {
            return Err(Error::Precondition(format!(
                "flag is not orthonormal for this metric (defect {d:e})"
            )));
        }
        Ok(())
    }

    /// `g_Y(Y,Y) g_Y(U,U) - g_Y(U,Y)^2` against
    /// `(1 + <X,Y>)^6 (2<X,U>^2 - <X,Y>^2 + 1)` for an orthonormal flag.
    pub fn denominator_identity(&self, flag: &Flag) -> Result<IdentityReport> {
        self.require_orthonormal(flag)?;
        let (y, u) = (flag.y(), flag.u());
        let lhs = self.g_y(y, y, y)? * self.g_y(y, u, u)? - self.g_y(y, u, y)?.powi(2);
        let xy = self.g.dot(&self.x, y);
        let xu = self.g.dot(&self.x, u);
        let rhs = (1.0 + xy).powi(6) * (2.0 * xu * xu - xy * xy + 1.0);
        Ok(IdentityReport::new(lhs, rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::orthonormalize_flag;
    use nalgebra::DVector;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_column_slice(xs)
    }

    fn data(gdiag: &[f64], x: &[f64]) -> FinslerData {
        let g = InnerProduct::new(DMatrix::from_diagonal(&v(gdiag)), 1e-9).unwrap();
        FinslerData::unchecked(g, v(x)).unwrap()
    }

    #[test]
    fn validate_examples() {
        let r = data(&[1., 1.], &[0., 0.5]).validate(1e-12);
        assert!(r.ok && r.norm_x == 0.5);
        assert!(!data(&[1., 1.], &[0., 1.]).validate(1e-12).ok);
        let r = data(&[1., 4.], &[0., 0.4]).validate(1e-12);
        assert!(r.ok && (r.norm_x - 0.8).abs() < 1e-15);
        let g = InnerProduct::identity(2);
        assert!(matches!(
            FinslerData::new(g, v(&[1.2, 0.]), 1e-12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn f_examples() {
        let d = data(&[1., 1., 1.], &[0., 0., 0.]);
        assert_eq!(d.f_eval(&v(&[3., 4., 0.])).unwrap(), 5.0);
        let d = data(&[1., 1., 1.], &[0., 0.5, 0.]);
        assert_eq!(d.f_eval(&v(&[0., 1., 0.])).unwrap(), 2.25);
        assert_eq!(d.f_eval(&v(&[0., 2., 0.])).unwrap(), 4.5);
        assert!(matches!(d.f_eval(&v(&[0., 0., 0.])), Err(Error::Domain(_))));
    }

    #[test]
    fn riemannian_gy_is_g() {
        let d = data(&[1., 2., 3.], &[0., 0., 0.]);
        let m = d.g_y_matrix(&v(&[0.3, -1., 2.])).unwrap();
        assert!((m - DMatrix::from_diagonal(&v(&[1., 2., 3.]))).amax() < 1e-14);
        let fd = d
            .g_y_fd(
                &v(&[1., 0., 0.]),
                &v(&[0., 1., 0.]),
                &v(&[0., 1., 0.]),
                1e-5,
                FdScheme::Central,
            )
            .unwrap();
        assert!((fd - 2.0).abs() < 1e-9, "{fd}");
    }

    #[test]
    fn euler_identity_value() {
        let d = data(&[1., 1., 1.], &[0., 0.5, 0.]);
        let y = v(&[0., 1., 0.]);
        assert!((d.g_y(&y, &y, &y).unwrap() - 5.0625).abs() < 1e-13);
        let fd = d.g_y_fd(&y, &y, &y, 1e-5, FdScheme::Central).unwrap();
        assert!((fd - 5.0625).abs() < 1e-8, "{fd}");
    }

    #[test]
    fn closed_matches_fd_at_example() {
        let d = data(&[1., 1., 1.], &[0., 0.5, 0.]);
        let e1 = v(&[1., 0., 0.]);
        let rep = d.gy_discrepancy(&e1, &e1, &e1, LeadPower::Two, 1e-5).unwrap();
        assert!(rep.relative_defect < 1e-6, "{rep:?}");
        let scaled = d.g_y_matrix(&(e1.clone() * 2.0)).unwrap();
        assert!((scaled - d.g_y_matrix(&e1).unwrap()).amax() < 1e-13);
    }

    #[test]
    fn five_halves_lead_breaks_symmetry_off_the_unit_sphere() {
        let d = data(&[1., 1., 1.], &[0.2, 0.3, -0.1]);
        let (y, u, w) = (v(&[1.5, 0.2, -0.3]), v(&[0.1, 1., 0.4]), v(&[-0.7, 0.2, 1.]));
        let sum =
            |a: &Vector, b: &Vector| -> f64 { d.gy_blocks(&y, a, b, LeadPower::FiveHalves).unwrap().iter().sum() };
        assert!((sum(&u, &w) - sum(&w, &u)).abs() > 1e-3);
        let fd = d.g_y_fd(&y, &u, &w, 1e-5, FdScheme::Central).unwrap();
        assert!((d.g_y(&y, &u, &w).unwrap() - fd).abs() < 1e-8);
        assert!((sum(&u, &w) - fd).abs() > 1e-3);
        // on the unit sphere the two leads coincide
        let yu = &y / d.inner().norm(&y);
        let a: f64 = d.gy_blocks(&yu, &u, &w, LeadPower::FiveHalves).unwrap().iter().sum();
        assert!((a - d.g_y(&yu, &u, &w).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn richardson_is_at_least_as_accurate() {
        let d = data(&[1., 2., 0.5], &[0.3, -0.2, 0.4]);
        let (y, u, w) = (v(&[0.4, 0.9, -0.3]), v(&[1., 0.2, 0.1]), v(&[0.3, -1., 0.8]));
        let exact = d.g_y(&y, &u, &w).unwrap();
        let c = d.g_y_fd(&y, &u, &w, 1e-3, FdScheme::Central).unwrap();
        let r = d.g_y_fd(&y, &u, &w, 1e-3, FdScheme::Richardson).unwrap();
        assert!((r - exact).abs() <= (c - exact).abs());
        assert!((r - exact).abs() < 1e-9);
    }

    #[test]
    fn bad_step_is_rejected() {
        let d = data(&[1., 1.], &[0., 0.]);
        let e = v(&[1., 0.]);
        assert!(d.g_y_fd(&e, &e, &e, 0.0, FdScheme::Central).is_err());
        // a step that crosses the origin leaves the domain
        assert!(matches!(
            d.g_y_fd(&e, &e, &e, 0.5, FdScheme::Central),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn denominator_identity_examples() {
        let d = FinslerData::riemannian(InnerProduct::identity(4));
        let f = orthonormalize_flag(d.inner(), &v(&[1., 0., 0., 0.]), &v(&[0., 1., 0., 0.]), 1e-12).unwrap();
        let r = d.denominator_identity(&f).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-14);

        let d = data(&[1., 1., 1., 1.], &[0., 0., 0., 0.5]);
        let r = d.denominator_identity(&f).unwrap();
        assert!((r.rhs - 1.0).abs() < 1e-15 && r.defect < 1e-12);
        let s = 0.5f64.sqrt();
        let f = orthonormalize_flag(d.inner(), &v(&[1., 0., 0., 0.]), &v(&[0., s, 0., s]), 1e-12).unwrap();
        let r = d.denominator_identity(&f).unwrap();
        assert!((r.rhs - 1.25).abs() < 1e-14 && r.defect < 1e-12, "{r:?}");
    }

    #[test]
    fn denominator_identity_needs_orthonormal_flag() {
        let d = data(&[1., 4.], &[0.1, 0.]);
        let f = orthonormalize_flag(&InnerProduct::identity(2), &v(&[1., 0.]), &v(&[0., 1.]), 1e-12).unwrap();
        assert!(matches!(d.denominator_identity(&f), Err(Error::Precondition(_))));
    }
}
