//! Algebraic obstructions to a parallel left-invariant drift `X` on a Lie
//! group, which is what `Chern = Levi-Civita` forces.
//!
//! Two necessary conditions are checked directly: `g(X, [g,g]) = 0` and
//! `ad(X)` skew-adjoint. Together they are reported as `berwald_admissible`.
//! The Koszul check `max_i |nabla_{e_i} X|` is run alongside as ground truth.
//!
//! For such `X` the Riemannian sectional curvature satisfies
//! `K(X,u) |X ^ u|^2 = |ad(u)^* X|^2 / 4 >= 0`, vanishing iff `X` is
//! orthogonal to `[u, g]`. Since `X` is orthogonal to all of `[g,g]`, every
//! `K(X,u)` is zero. The stronger characterization "zero iff `u` is
//! orthogonal to `[X, g]`" is evaluated on witnesses and reported, not
//! assumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{column_space, derived_subalgebra, LieAlgebraSpec};
use crate::error::{check_len, Error, Result};
use crate::metrics::{CheckReport, InnerProduct, InvariantMetric};
use crate::riemann_oracle::{koszul_connection, sectional};
use crate::sampling::SphereSampler;
use crate::{Matrix, Tolerances, Vector};

/// `[g, g] = g`, decided with the rank tolerance.
pub fn is_perfect(alg: &LieAlgebraSpec, tol_rank: f64) -> bool {
    derived_subalgebra(alg, tol_rank).len() == alg.dim()
}

fn require_group(metric: &InvariantMetric) -> Result<()> {
    if metric.split().h_dim() != 0 {
        return Err(Error::Unsupported(
            "Berwald obstructions are implemented for Lie groups (h_dim = 0) only".into(),
        ));
    }
    Ok(())
}

/// Maps between standard coordinates and `g`-isometric ones, `z = L^T x`.
struct Isometric {
    lt: Matrix,
    lt_inv: Matrix,
}

impl Isometric {
    fn new(g: &InnerProduct) -> Self {
        let lt = g.cholesky_factor().transpose();
        let lt_inv = lt.clone().try_inverse().expect("Cholesky factor is invertible");
        Self { lt, lt_inv }
    }

    /// `g`-orthonormal basis of the `g`-orthogonal complement of `span(vs)`.
    fn complement(&self, vs: &[Vector], tol_rank: f64) -> Vec<Vector> {
        let n = self.lt.nrows();
        let mut p = Matrix::identity(n, n);
        if !vs.is_empty() {
            let cols: Vec<Vector> = vs.iter().map(|v| &self.lt * v).collect();
            for q in column_space(&Matrix::from_columns(&cols), tol_rank) {
                p -= &q * q.transpose();
            }
        }
        column_space(&p, tol_rank)
            .into_iter()
            .map(|z| {
                let mut x = &self.lt_inv * z;
                let cut = 1e-14 * x.amax();
                x.iter_mut().filter(|c| c.abs() < cut).for_each(|c| *c = 0.0);
                x
            })
            .collect()
    }
}

/// `g`-orthonormal basis of `{x : g(x, [g,g]) = 0}`.
pub fn parallel_obstruction_space(metric: &InvariantMetric, tol_rank: f64) -> Result<Vec<Vector>> {
    require_group(metric)?;
    let derived = derived_subalgebra(metric.algebra(), tol_rank);
    Ok(Isometric::new(metric.inner()).complement(&derived, tol_rank))
}

/// `<[X,e_i],e_j> + <e_i,[X,e_j]>` over all basis pairs; the witness is
/// `(i, j, j)` for the worst pair.
pub fn ad_skew_check(metric: &InvariantMetric, x: &Vector, tol: f64) -> Result<CheckReport> {
    require_group(metric)?;
    let alg = metric.algebra();
    check_len(x.len(), alg.dim(), "X")?;
    let g = metric.inner().matrix();
    let ad = alg.ad(x)?;
    let s = g * &ad;
    let n = alg.dim();
    let defects = (0..n).flat_map(|i| {
        let s = &s;
        (0..n).map(move |j| ((s[(j, i)] + s[(i, j)]).abs(), (i, j, j)))
    });
    Ok(CheckReport::from_defects(tol, defects))
}

/// Largest `|g(X, [e_i, e_j])|`.
pub fn bracket_orthogonality_defect(metric: &InvariantMetric, x: &Vector) -> Result<f64> {
    require_group(metric)?;
    let alg = metric.algebra();
    check_len(x.len(), alg.dim(), "X")?;
    let g = metric.inner();
    let n = alg.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(g.dot(x, &alg.basis_bracket(i, j)).abs());
        }
    }
    Ok(worst)
}

/// `max_i |nabla_{e_i} X|_g` for the Levi-Civita connection of `g`.
pub fn koszul_parallel_defect(metric: &InvariantMetric, x: &Vector) -> Result<f64> {
    require_group(metric)?;
    check_len(x.len(), metric.algebra().dim(), "X")?;
    let conn = koszul_connection(metric.algebra(), metric.split(), metric.inner())?;
    let n = metric.algebra().dim();
    let g = metric.inner();
    Ok((0..n)
        .map(|i| {
            let e = Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
            g.norm(&conn.nabla(&e, x))
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionalSample {
    pub u: Vec<f64>,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionalWitness {
    pub u: Vec<f64>,
    pub k: f64,
    /// `g(u, [X, g]) = 0`.
    pub u_orthogonal_to_image: bool,
    /// `g(X, [u, g]) = 0`.
    pub x_orthogonal_to_bracket: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionalReport {
    pub samples: Vec<SectionalSample>,
    pub min_k: f64,
    pub max_k: f64,
    /// Every sample has `K >= -tol`.
    pub nonnegative: bool,
    pub witnesses: Vec<SectionalWitness>,
    /// On every witness, `K ~ 0` exactly when `u` is orthogonal to `[X, g]`.
    pub image_clause_holds: bool,
    /// On every witness, `K ~ 0` exactly when `X` is orthogonal to `[u, g]`.
    pub bracket_clause_holds: bool,
}

fn max_pairing(metric: &InvariantMetric, a: &Vector, b: &Vector) -> f64 {
    // max_i |g(a, [b, e_i])|
    let alg = metric.algebra();
    let n = alg.dim();
    (0..n)
        .map(|i| {
            let e = Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
            metric.inner().dot(a, &alg.br(b, &e)).abs()
        })
        .fold(0.0, f64::max)
}

/// Samples `K(X,u)` for `u` on the `g`-unit sphere orthogonal to `X`, and
/// evaluates two witnesses: one orthogonal to `[X, g]`, one inside it.
pub fn sectional_along_x_sign(
    metric: &InvariantMetric,
    x: &Vector,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SectionalReport> {
    require_group(metric)?;
    let alg = metric.algebra();
    let g = metric.inner();
    check_len(x.len(), alg.dim(), "X")?;
    let nx = g.norm(x);
    if nx <= tol.boundary {
        return Err(Error::Domain("X must be nonzero".into()));
    }
    if !admissible(metric, x, tol)? {
        return Err(Error::Precondition(
            "X is not admissible: it must be g-orthogonal to [g,g] with ad(X) skew-adjoint".into(),
        ));
    }
    let xn = x / nx;
    let conn = koszul_connection(alg, metric.split(), g)?;
    let sampler = SphereSampler::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = sampler.unit_orthogonal(g, std::slice::from_ref(&xn), &mut rng);
        let k = sectional(alg, g, &conn, x, &u, tol.dependence)?;
        samples.push(SectionalSample {
            u: u.iter().cloned().collect(),
            k,
        });
    }

    let n = alg.dim();
    let image: Vec<Vector> = (0..n)
        .map(|i| alg.br(x, &Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })))
        .collect();
    let iso = Isometric::new(g);
    let mut candidates = Vec::new();
    let mut against = image.clone();
    against.push(xn.clone());
    if let Some(u) = iso.complement(&against, tol.rank).into_iter().next() {
        candidates.push(u);
    }
    // the part of [X, g] orthogonal to X
    if let Some(w) = column_space(&Matrix::from_columns(&image), tol.rank)
        .into_iter()
        .map(|z| &z - &xn * g.dot(&z, &xn))
        .find(|w| g.norm(w) > 1e-6)
    {
        let nw = g.norm(&w);
        candidates.push(w / nw);
    }
    let scale = 1.0 + nx;
    let mut witnesses = Vec::new();
    for u in candidates {
        let k = sectional(alg, g, &conn, x, &u, tol.dependence)?;
        let u_orth = image.iter().all(|w| g.dot(&u, w).abs() <= tol.metric * scale);
        let x_orth = max_pairing(metric, x, &u) <= tol.metric * scale;
        witnesses.push(SectionalWitness {
            u: u.iter().cloned().collect(),
            k,
            u_orthogonal_to_image: u_orth,
            x_orthogonal_to_bracket: x_orth,
        });
    }
    let zero = |k: f64| k.abs() <= tol.oracle;
    let min_k = samples.iter().map(|s| s.k).fold(f64::INFINITY, f64::min);
    let max_k = samples.iter().map(|s| s.k).fold(f64::NEG_INFINITY, f64::max);
    Ok(SectionalReport {
        nonnegative: samples.iter().all(|s| s.k >= -tol.oracle),
        image_clause_holds: witnesses.iter().all(|w| zero(w.k) == w.u_orthogonal_to_image),
        bracket_clause_holds: witnesses.iter().all(|w| zero(w.k) == w.x_orthogonal_to_bracket),
        samples,
        min_k,
        max_k,
        witnesses,
    })
}

fn admissible(metric: &InvariantMetric, x: &Vector, tol: &Tolerances) -> Result<bool> {
    let scale = 1.0 + metric.inner().norm(x);
    Ok(bracket_orthogonality_defect(metric, x)? <= tol.metric * scale
        && ad_skew_check(metric, x, tol.metric * scale)?.ok)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub perfect: bool,
    /// `g`-orthonormal basis of `{x : g(x, [g,g]) = 0}`.
    pub parallel_space: Vec<Vec<f64>>,
    pub in_parallel_space: bool,
    pub bracket_defect: f64,
    pub ad_skew: CheckReport,
    pub berwald_admissible: bool,
    pub koszul_parallel_defect: f64,
    pub koszul_parallel_ok: bool,
    /// Present for admissible nonzero `X`.
    pub sectional_along_x: Option<SectionalReport>,
}

/// All obstruction checks for drift `x`.
pub fn obstruction_report(
    metric: &InvariantMetric,
    x: &Vector,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ObstructionReport> {
    require_group(metric)?;
    check_len(x.len(), metric.algebra().dim(), "X")?;
    let scale = 1.0 + metric.inner().norm(x);
    let perfect = is_perfect(metric.algebra(), tol.rank);
    let space = parallel_obstruction_space(metric, tol.rank)?;
    let bracket_defect = bracket_orthogonality_defect(metric, x)?;
    let in_space = bracket_defect <= tol.metric * scale;
    let ad_skew = ad_skew_check(metric, x, tol.metric * scale)?;
    let admissible = in_space && ad_skew.ok;
    let kd = koszul_parallel_defect(metric, x)?;
    let sect = if admissible && metric.inner().norm(x) > tol.boundary && n_samples > 0 {
        Some(sectional_along_x_sign(metric, x, n_samples, seed, tol)?)
    } else {
        None
    };
    Ok(ObstructionReport {
        perfect,
        parallel_space: space.iter().map(|v| v.iter().cloned().collect()).collect(),
        in_parallel_space: in_space,
        bracket_defect,
        ad_skew,
        berwald_admissible: admissible,
        koszul_parallel_defect: kd,
        koszul_parallel_ok: kd <= tol.oracle,
        sectional_along_x: sect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ReductivePair;
    use crate::catalog;
    use nalgebra::DVector;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_column_slice(xs)
    }

    fn std_metric(alg: LieAlgebraSpec) -> InvariantMetric {
        let n = alg.dim();
        InvariantMetric::standard(alg, ReductivePair::trivial(n)).unwrap()
    }

    #[test]
    fn perfectness() {
        assert!(is_perfect(&catalog::su2(), 1e-10));
        assert!(!is_perfect(&catalog::heisenberg(), 1e-10));
        assert!(!is_perfect(&catalog::abelian(3), 1e-10));
    }

    #[test]
    fn parallel_space_examples() {
        let tol = 1e-10;
        assert!(parallel_obstruction_space(&std_metric(catalog::su2()), tol)
            .unwrap()
            .is_empty());
        let h = parallel_obstruction_space(&std_metric(catalog::heisenberg()), tol).unwrap();
        assert_eq!(h.len(), 2);
        for w in &h {
            assert!(w[2].abs() < 1e-14);
        }
        assert_eq!(
            parallel_obstruction_space(&std_metric(catalog::abelian(3)), tol)
                .unwrap()
                .len(),
            3
        );
    }

    #[test]
    fn ad_skew_examples() {
        let m = std_metric(catalog::heisenberg());
        let r = ad_skew_check(&m, &v(&[1., 0., 0.]), 1e-9).unwrap();
        assert!(!r.ok && (r.max_defect - 1.0).abs() < 1e-15);
        let m = std_metric(catalog::su2());
        assert!(ad_skew_check(&m, &v(&[0., 0., 1.]), 1e-9).unwrap().ok);
        let m = std_metric(catalog::su2_plus_r());
        assert!(ad_skew_check(&m, &v(&[0., 0., 0., 0.5]), 1e-9).unwrap().ok);
    }

    #[test]
    fn central_drift_is_parallel_and_flat() {
        let m = std_metric(catalog::su2_plus_r());
        let r = obstruction_report(&m, &v(&[0., 0., 0., 0.5]), 200, 3, &Tolerances::default()).unwrap();
        assert!(r.berwald_admissible && r.koszul_parallel_ok);
        let s = r.sectional_along_x.unwrap();
        assert!(s.min_k.abs() < 1e-12 && s.max_k.abs() < 1e-12);
        assert!(s.image_clause_holds && s.bracket_clause_holds);
    }

    #[test]
    fn image_clause_fails_on_plane_motions() {
        let m = std_metric(catalog::euclidean_plane());
        let x = v(&[0., 0., 0.5]);
        let r = obstruction_report(&m, &x, 100, 1, &Tolerances::default()).unwrap();
        assert!(r.berwald_admissible && r.koszul_parallel_ok);
        let s = r.sectional_along_x.unwrap();
        assert!(s.max_k.abs() < 1e-12);
        // u = e1 lies in [X, g] yet K(X, e1) = 0
        assert!(s
            .witnesses
            .iter()
            .any(|w| !w.u_orthogonal_to_image && w.k.abs() < 1e-12));
        assert!(!s.image_clause_holds && s.bracket_clause_holds);
    }

    #[test]
    fn zero_drift_is_a_domain_error() {
        let m = std_metric(catalog::abelian(2));
        assert!(matches!(
            sectional_along_x_sign(&m, &v(&[0., 0.]), 10, 0, &Tolerances::default()),
            Err(Error::Domain(_))
        ));
    }
}
