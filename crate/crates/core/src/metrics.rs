//! Background bi-invariant form `g0`, the metric endomorphism `phi` with
//! `<x, y> = <phi x, y>_0`, the induced inner product on `m`, the structural
//! checks on them, and flag orthonormalization.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::algebra::{check_reductive, LieAlgebraSpec, Part, ReductivePair};
use crate::error::{check_len, Error, Result};
use crate::{Matrix, Tolerances, Vector};

fn asymmetry(m: &Matrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    worst
}

fn symmetrized(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

fn min_eigenvalue(sym: &Matrix) -> f64 {
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn require_square(m: &Matrix, n: usize, context: &'static str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: if m.nrows() != n { m.nrows() } else { m.ncols() },
            context,
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{context} has non-finite entries")));
    }
    Ok(())
}

/// Symmetric positive-definite form on the whole algebra.
///
/// Bi-invariance is not enforced here; see [`check_bi_invariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct BiInvariantForm {
    g0: Matrix,
}

impl BiInvariantForm {
    pub fn new(g0: Matrix, tol: f64) -> Result<Self> {
        let n = g0.nrows();
        require_square(&g0, n, "g0")?;
        let (d, i, j) = asymmetry(&g0);
        if d > tol {
            return Err(Error::Validation(format!(
                "g0 is not symmetric: |g0[{i}][{j}] - g0[{j}][{i}]| = {d:e}"
            )));
        }
        let g0 = symmetrized(&g0);
        let lmin = min_eigenvalue(&g0);
        if lmin <= 0.0 {
            return Err(Error::Validation(format!(
                "g0 is not positive-definite (smallest eigenvalue {lmin:e})"
            )));
        }
        Ok(Self { g0 })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            g0: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.g0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g0
    }

    pub fn dot(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.g0 * y))
    }

    fn m_block(&self, split: &ReductivePair) -> Matrix {
        let h = split.h_dim();
        self.g0.view((h, h), (split.m_dim(), split.m_dim())).into_owned()
    }
}

/// The endomorphism `phi` on `m`, self-adjoint and positive with respect to
/// `g0`. It acts as the identity on `h`. Its inverse is computed once here.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEndomorphism {
    phi: Matrix,
    phi_inv: Matrix,
}

impl MetricEndomorphism {
    pub fn new(phi: Matrix, g0: &BiInvariantForm, split: &ReductivePair, tol: f64) -> Result<Self> {
        check_len(g0.dim(), split.dim(), "g0 versus algebra")?;
        require_square(&phi, split.m_dim(), "phi")?;
        let gp = g0.m_block(split) * &phi;
        let (d, i, j) = asymmetry(&gp);
        if d > tol {
            return Err(Error::Validation(format!(
                "phi is not self-adjoint for g0: <phi e{i}, e{j}>_0 and <e{i}, phi e{j}>_0 differ by {d:e}"
            )));
        }
        let lmin = min_eigenvalue(&symmetrized(&gp));
        if lmin <= 0.0 {
            return Err(Error::Validation(format!(
                "phi is not positive (smallest eigenvalue of <phi x, y>_0 is {lmin:e})"
            )));
        }
        let phi_inv = phi
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("phi is singular".into()))?;
        Ok(Self { phi, phi_inv })
    }

    pub fn identity(m_dim: usize) -> Self {
        Self {
            phi: DMatrix::identity(m_dim, m_dim),
            phi_inv: DMatrix::identity(m_dim, m_dim),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.phi
    }

    pub fn inverse(&self) -> &Matrix {
        &self.phi_inv
    }
}

/// Positive-definite inner product on `m`, in `m`-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProduct {
    g: Matrix,
}

impl InnerProduct {
    pub fn new(g: Matrix, tol: f64) -> Result<Self> {
        let n = g.nrows();
        require_square(&g, n, "inner product")?;
        let (d, i, j) = asymmetry(&g);
        if d > tol {
            return Err(Error::Validation(format!(
                "inner product is not symmetric at ({i}, {j}): defect {d:e}"
            )));
        }
        let g = symmetrized(&g);
        let lmin = min_eigenvalue(&g);
        if lmin <= 0.0 {
            return Err(Error::Validation(format!(
                "inner product is not positive-definite (smallest eigenvalue {lmin:e})"
            )));
        }
        Ok(Self { g })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            g: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    #[inline]
    pub fn dot(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.g * y))
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.dot(x, x).sqrt()
    }

    /// Lower Cholesky factor `L` with `g = L L^T`.
    pub fn cholesky_factor(&self) -> Matrix {
        self.g
            .clone()
            .cholesky()
            .expect("inner product is positive-definite by construction")
            .l()
    }
}

/// The matrix of `<x, y> = <phi x, y>_0` on `m`.
pub fn inner_from_phi(g0: &BiInvariantForm, phi: &MetricEndomorphism, split: &ReductivePair) -> Result<InnerProduct> {
    check_len(g0.dim(), split.dim(), "g0 versus algebra")?;
    check_len(phi.matrix().nrows(), split.m_dim(), "phi versus m")?;
    // g_ij = <phi e_i, e_j>_0 = (Phi^T G0)_ij
    let g = phi.matrix().transpose() * g0.m_block(split);
    InnerProduct::new(g, f64::INFINITY)
}

/// Report shared by the metric checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub max_defect: f64,
    /// Basis triple `(z, x, y)` (0-based, full-algebra indices) realizing the
    /// largest defect, when one is nonzero.
    pub witness: Option<(usize, usize, usize)>,
}

impl CheckReport {
    pub(crate) fn from_defects(tol: f64, it: impl Iterator<Item = (f64, (usize, usize, usize))>) -> Self {
        let mut worst = 0.0_f64;
        let mut witness = None;
        for (d, w) in it {
            if d > worst {
                worst = d;
                witness = Some(w);
            }
        }
        Self {
            ok: worst <= tol,
            max_defect: worst,
            witness,
        }
    }
}

/// Checks `<[z,x],y>_0 + <x,[z,y]>_0 = 0` on all basis triples.
pub fn check_bi_invariance(alg: &LieAlgebraSpec, g0: &Matrix, tol: f64) -> Result<CheckReport> {
    let n = alg.dim();
    require_square(g0, n, "g0")?;
    let mut defects = Vec::with_capacity(n * n * n);
    for z in 0..n {
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += alg.c(z, x, k) * g0[(k, y)] + g0[(x, k)] * alg.c(z, y, k);
                }
                defects.push((s.abs(), (z, x, y)));
            }
        }
    }
    Ok(CheckReport::from_defects(tol, defects.into_iter()))
}

/// `m`-block of `[e_a, e_b]` in `m`-coordinates.
fn bracket_m(alg: &LieAlgebraSpec, split: &ReductivePair, a: usize, b: usize) -> Vector {
    split.restrict(&alg.basis_bracket(a, b))
}

/// Checks `<[z,x]_m, y> + <x, [z,y]_m> = 0` for `z` in `h` and `x, y` in `m`.
pub fn check_ad_h_invariance(
    alg: &LieAlgebraSpec,
    split: &ReductivePair,
    g: &InnerProduct,
    tol: f64,
) -> Result<CheckReport> {
    check_len(g.dim(), split.m_dim(), "inner product versus m")?;
    let h = split.h_dim();
    let m = split.m_dim();
    let mut defects = Vec::new();
    for z in 0..h {
        for x in 0..m {
            for y in 0..m {
                let zx = bracket_m(alg, split, z, h + x);
                let zy = bracket_m(alg, split, z, h + y);
                let d = g.matrix().column(y).dot(&zx) + g.matrix().column(x).dot(&zy);
                defects.push((d.abs(), (z, h + x, h + y)));
            }
        }
    }
    Ok(CheckReport::from_defects(tol, defects.into_iter()))
}

/// Checks `B(x, [z,y]_m) + B([z,x]_m, y) = 0` over basis triples of `m`.
pub fn check_naturally_reductive(
    alg: &LieAlgebraSpec,
    split: &ReductivePair,
    g: &InnerProduct,
    tol: f64,
) -> Result<CheckReport> {
    check_len(g.dim(), split.m_dim(), "inner product versus m")?;
    let h = split.h_dim();
    let m = split.m_dim();
    let mut defects = Vec::new();
    for z in 0..m {
        for x in 0..m {
            let zx = bracket_m(alg, split, h + z, h + x);
            for y in 0..m {
                let zy = bracket_m(alg, split, h + z, h + y);
                let d = g.matrix().column(x).dot(&zy) + g.matrix().column(y).dot(&zx);
                defects.push((d.abs(), (h + z, h + x, h + y)));
            }
        }
    }
    Ok(CheckReport::from_defects(tol, defects.into_iter()))
}

/// Largest `|g0(h_i, m_j)|`; `m` must be the `g0`-orthogonal complement of `h`.
pub fn check_split_orthogonality(g0: &BiInvariantForm, split: &ReductivePair, tol: f64) -> CheckReport {
    let h = split.h_dim();
    let n = split.dim();
    CheckReport::from_defects(
        tol,
        (0..h)
            .flat_map(|a| (h..n).map(move |b| (a, b)))
            .map(|(a, b)| (g0.matrix()[(a, b)].abs(), (a, a, b))),
    )
}

/// A `g`-orthonormal pair `(Y, U)` in `m`: flagpole `Y`, transverse edge `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    y: Vector,
    u: Vector,
}

/// Orthonormality tolerance accepted by [`Flag::new`].
pub const FLAG_ORTHONORMAL_TOL: f64 = 1e-10;

impl Flag {
    /// Accepts an already-orthonormal pair.
    pub fn new(g: &InnerProduct, y: Vector, u: Vector) -> Result<Self> {
        check_len(y.len(), g.dim(), "flagpole")?;
        check_len(u.len(), g.dim(), "flag edge")?;
        let defect = (g.dot(&y, &y) - 1.0)
            .abs()
            .max((g.dot(&u, &u) - 1.0).abs())
            .max(g.dot(&y, &u).abs());
        if defect > FLAG_ORTHONORMAL_TOL {
            return Err(Error::Flag(format!(
                "pair is not orthonormal (defect {defect:e}); orthonormalize it first"
            )));
        }
        Ok(Self { y, u })
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn u(&self) -> &Vector {
        &self.u
    }

    /// The same plane with the edge reversed.
    pub fn flipped(&self) -> Self {
        Self {
            y: self.y.clone(),
            u: -&self.u,
        }
    }
}

/// Gram-Schmidt `(y, u)` into a `g`-orthonormal flag spanning the same plane.
///
/// The pair is rejected when the Gram determinant of the normalized inputs
/// is not above `tol_dep`.
pub fn orthonormalize_flag(g: &InnerProduct, y: &Vector, u: &Vector, tol_dep: f64) -> Result<Flag> {
    check_len(y.len(), g.dim(), "flagpole")?;
    check_len(u.len(), g.dim(), "flag edge")?;
    let ny = g.norm(y);
    let nu = g.norm(u);
    if !(ny > 0.0) || !ny.is_finite() {
        return Err(Error::Flag("flagpole is zero".into()));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Flag("flag edge is zero".into()));
    }
    let cos = g.dot(y, u) / (ny * nu);
    let gram = 1.0 - cos * cos;
    if gram <= tol_dep {
        return Err(Error::Flag(format!(
            "flag vectors are linearly dependent (normalized Gram determinant {gram:e})"
        )));
    }
    let yy = y / ny;
    let mut w = u - &yy * g.dot(u, &yy);
    w -= &yy * g.dot(&w, &yy);
    let nw = g.norm(&w);
    Ok(Flag { y: yy, u: w / nw })
}

/// Everything needed to evaluate curvature at the origin of `G/H`.
#[derive(Debug, Clone)]
pub struct InvariantMetric {
    algebra: LieAlgebraSpec,
    split: ReductivePair,
    g0: BiInvariantForm,
    phi: MetricEndomorphism,
    g: InnerProduct,
}

impl InvariantMetric {
    /// Assembles the metric. Fails when `m` is not `g0`-orthogonal to `h`
    /// or when the splitting is not reductive.
    pub fn new(
        algebra: LieAlgebraSpec,
        split: ReductivePair,
        g0: BiInvariantForm,
        phi: MetricEndomorphism,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_len(split.dim(), algebra.dim(), "split versus algebra")?;
        check_len(g0.dim(), algebra.dim(), "g0 versus algebra")?;
        let orth = check_split_orthogonality(&g0, &split, tol.metric);
        if !orth.ok {
            return Err(Error::Validation(format!(
                "h and m are not g0-orthogonal (max |g0(h, m)| = {:e})",
                orth.max_defect
            )));
        }
        let red = check_reductive(&algebra, &split, tol.jacobi)?;
        if !red.ok() {
            return Err(Error::Validation(format!(
                "decomposition is not reductive (defect {:e})",
                red.max_defect
            )));
        }
        let g = inner_from_phi(&g0, &phi, &split)?;
        Ok(Self {
            algebra,
            split,
            g0,
            phi,
            g,
        })
    }

    /// Identity `g0` and `phi`.
    pub fn standard(algebra: LieAlgebraSpec, split: ReductivePair) -> Result<Self> {
        let g0 = BiInvariantForm::identity(algebra.dim());
        let phi = MetricEndomorphism::identity(split.m_dim());
        Self::new(algebra, split, g0, phi, &Tolerances::default())
    }

    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.algebra
    }

    pub fn split(&self) -> &ReductivePair {
        &self.split
    }

    pub fn g0(&self) -> &BiInvariantForm {
        &self.g0
    }

    pub fn phi(&self) -> &MetricEndomorphism {
        &self.phi
    }

    pub fn inner(&self) -> &InnerProduct {
        &self.g
    }

    pub fn m_dim(&self) -> usize {
        self.split.m_dim()
    }

    /// `phi` on full coordinates (identity on `h`).
    pub(crate) fn phi_full(&self, x: &Vector) -> Vector {
        let h = self.split.h_dim();
        let mut out = x.clone();
        let m = self.phi.matrix() * self.split.restrict(x);
        out.rows_mut(h, self.m_dim()).copy_from(&m);
        out
    }

    pub(crate) fn phi_inv_full(&self, x: &Vector) -> Vector {
        let h = self.split.h_dim();
        let mut out = x.clone();
        let m = self.phi.inverse() * self.split.restrict(x);
        out.rows_mut(h, self.m_dim()).copy_from(&m);
        out
    }

    /// `g` applied to the `m`-parts of two full vectors.
    pub(crate) fn g_full(&self, a: &Vector, b: &Vector) -> f64 {
        self.g.dot(&self.split.restrict(a), &self.split.restrict(b))
    }

    pub(crate) fn proj_m(&self, x: &Vector) -> Vector {
        self.split.project(x, Part::M)
    }

    pub(crate) fn embed(&self, m: &Vector) -> Vector {
        self.split.embed(m)
    }

    pub(crate) fn br(&self, a: &Vector, b: &Vector) -> Vector {
        self.algebra.br(a, b)
    }
}
