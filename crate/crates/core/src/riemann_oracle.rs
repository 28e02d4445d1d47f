//! Brute-force Riemannian curvature used to validate the closed forms.
//!
//! Sign convention: `R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w`,
//! so a bi-invariant metric on a compact group has `<R(u,y)y, u> >= 0`.
//! For left-invariant fields and a bi-invariant metric this gives
//! `nabla_x y = [x,y]/2` and `R(u,v)w = -[[u,v],w]/4`.

use nalgebra::DVector;

use crate::algebra::{LieAlgebraSpec, Part, ReductivePair};
use crate::error::{check_len, Error, Result};
use crate::metrics::{check_naturally_reductive, CheckReport, InnerProduct, InvariantMetric};
use crate::{Tolerances, Vector};

/// Levi-Civita connection of a left-invariant metric on basis vectors:
/// entry `(i, j)` is `nabla_{e_i} e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    dim: usize,
    gamma: Vec<f64>,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `e_k` in `nabla_{e_i} e_j`.
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.dim + j) * self.dim + k]
    }

    /// `nabla_x y` for left-invariant fields with values `x`, `y`.
    pub fn nabla(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s = x[i] * y[j];
                if s == 0.0 {
                    continue;
                }
                let off = (i * n + j) * n;
                for k in 0..n {
                    out[k] += s * self.gamma[off + k];
                }
            }
        }
        out
    }

    /// `<nabla_x y, z> + <y, nabla_x z>` over basis triples.
    pub fn check_metric_compatibility(&self, g: &InnerProduct, tol: f64) -> CheckReport {
        let n = self.dim;
        let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let mut defects = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let d = g.dot(&self.nabla(&e(x), &e(y)), &e(z)) + g.dot(&e(y), &self.nabla(&e(x), &e(z)));
                    defects.push((d.abs(), (x, y, z)));
                }
            }
        }
        CheckReport::from_defects(tol, defects.into_iter())
    }

    /// `nabla_x y - nabla_y x - [x,y]` over basis pairs.
    pub fn check_torsion_free(&self, alg: &LieAlgebraSpec, tol: f64) -> CheckReport {
        let n = self.dim;
        let mut defects = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = self.gamma(i, j, k) - self.gamma(j, i, k) - alg.c(i, j, k);
                    defects.push((d.abs(), (i, j, k)));
                }
            }
        }
        CheckReport::from_defects(tol, defects.into_iter())
    }
}

/// Solves `2<nabla_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y>` on basis vectors.
///
/// Only the Lie-group case (`h_dim = 0`) is supported.
pub fn koszul_connection(alg: &LieAlgebraSpec, split: &ReductivePair, g: &InnerProduct) -> Result<ConnectionTable> {
    if split.h_dim() != 0 {
        return Err(Error::Unsupported(
            "the Koszul oracle needs a trivial isotropy algebra (h_dim = 0); use the naturally reductive formula instead"
                .into(),
        ));
    }
    let n = alg.dim();
    check_len(g.dim(), n, "inner product versus algebra")?;
    let gm = g.matrix();
    let ginv = gm
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("inner product is not positive-definite".into()))?
        .inverse();
    // lowered[a][b][l] = <[e_a, e_b], e_l>
    let mut lowered = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            let br = alg.basis_bracket(a, b);
            for l in 0..n {
                lowered[(a * n + b) * n + l] = br.dot(&gm.column(l));
            }
        }
    }
    let low = |a: usize, b: usize, l: usize| lowered[(a * n + b) * n + l];
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let rhs = DVector::from_fn(n, |l, _| 0.5 * (low(i, j, l) - low(j, l, i) + low(l, i, j)));
            let sol = &ginv * rhs;
            for k in 0..n {
                gamma[(i * n + j) * n + k] = sol[k];
            }
        }
    }
    Ok(ConnectionTable { dim: n, gamma })
}

/// `R(u,v)w` from a connection table.
pub fn curvature_oracle(conn: &ConnectionTable, alg: &LieAlgebraSpec, u: &Vector, v: &Vector, w: &Vector) -> Vector {
    conn.nabla(u, &conn.nabla(v, w)) - conn.nabla(v, &conn.nabla(u, w)) - conn.nabla(&alg.br(u, v), w)
}

/// `R(U,Y)Y = [Y,[U,Y]_m]_m / 4 + [Y,[U,Y]_h]` for a naturally reductive
/// metric. Inputs and output are in `m`-coordinates.
pub fn nat_reductive_r(
    alg: &LieAlgebraSpec,
    split: &ReductivePair,
    g: &InnerProduct,
    u: &Vector,
    y: &Vector,
    tol: &Tolerances,
) -> Result<Vector> {
    let nr = check_naturally_reductive(alg, split, g, tol.metric)?;
    if !nr.ok {
        return Err(Error::Precondition(format!(
            "metric is not naturally reductive (defect {:e})",
            nr.max_defect
        )));
    }
    nat_reductive_r_unchecked(alg, split, u, y, tol.jacobi)
}

pub(crate) fn nat_reductive_r_unchecked(
    alg: &LieAlgebraSpec,
    split: &ReductivePair,
    u: &Vector,
    y: &Vector,
    tol_h: f64,
) -> Result<Vector> {
    check_len(u.len(), split.m_dim(), "U")?;
    check_len(y.len(), split.m_dim(), "Y")?;
    let (uf, yf) = (split.embed(u), split.embed(y));
    let uy = alg.br(&uf, &yf);
    let m_term = split.project(&alg.br(&yf, &split.project(&uy, Part::M)), Part::M) * 0.25;
    let h_term = alg.br(&yf, &split.project(&uy, Part::H));
    let leak = split.project(&h_term, Part::H).amax();
    if leak > tol_h {
        return Err(Error::Precondition(format!(
            "[Y, [U,Y]_h] leaves m (h-component {leak:e}); the splitting is not reductive"
        )));
    }
    Ok(split.restrict(&(m_term + split.project(&h_term, Part::M))))
}

/// Sectional curvature `<R(u,x)x,u> / (<x,x><u,u> - <x,u>^2)`.
pub fn sectional(
    alg: &LieAlgebraSpec,
    g: &InnerProduct,
    conn: &ConnectionTable,
    x: &Vector,
    u: &Vector,
    tol_dep: f64,
) -> Result<f64> {
    check_len(x.len(), conn.dim(), "x")?;
    check_len(u.len(), conn.dim(), "u")?;
    let (xx, uu, xu) = (g.dot(x, x), g.dot(u, u), g.dot(x, u));
    let gram = xx * uu - xu * xu;
    if !(xx > 0.0 && uu > 0.0) || gram <= tol_dep * xx * uu {
        return Err(Error::Flag(format!(
            "sectional curvature needs independent vectors (Gram determinant {gram:e})"
        )));
    }
    let r = curvature_oracle(conn, alg, u, x, x);
    Ok(g.dot(&r, u) / gram)
}

/// `R(U,Y)Y` in `m`-coordinates from whichever brute-force route applies:
/// the Koszul connection when `h` is trivial, otherwise the naturally
/// reductive formula when that metric condition holds.
pub fn oracle_ruyy(metric: &InvariantMetric, u: &Vector, y: &Vector, tol: &Tolerances) -> Option<Vector> {
    let (alg, split, g) = (metric.algebra(), metric.split(), metric.inner());
    if split.h_dim() == 0 {
        let conn = koszul_connection(alg, split, g).ok()?;
        return Some(curvature_oracle(&conn, alg, u, y, y));
    }
    nat_reductive_r(alg, split, g, u, y, tol).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::metrics::check_bi_invariance;
    use crate::Matrix;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_column_slice(xs)
    }

    fn e(n: usize, i: usize) -> Vector {
        DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    fn su2_conn() -> (LieAlgebraSpec, InnerProduct, ConnectionTable) {
        let alg = catalog::su2();
        let g = InnerProduct::identity(3);
        let conn = koszul_connection(&alg, &ReductivePair::trivial(3), &g).unwrap();
        (alg, g, conn)
    }

    #[test]
    fn abelian_is_flat() {
        let alg = catalog::abelian(3);
        let g = InnerProduct::identity(3);
        let conn = koszul_connection(&alg, &ReductivePair::trivial(3), &g).unwrap();
        assert!(conn.gamma.iter().all(|&x| x == 0.0));
        let r = curvature_oracle(&conn, &alg, &e(3, 0), &e(3, 1), &e(3, 2));
        assert_eq!(r.amax(), 0.0);
        assert_eq!(sectional(&alg, &g, &conn, &e(3, 0), &e(3, 1), 1e-12).unwrap(), 0.0);
        let nr = nat_reductive_r(
            &alg,
            &ReductivePair::trivial(3),
            &g,
            &e(3, 1),
            &e(3, 0),
            &Tolerances::default(),
        );
        assert_eq!(nr.unwrap().amax(), 0.0);
    }

    #[test]
    fn su2_connection_values() {
        let (_, _, conn) = su2_conn();
        assert!((conn.nabla(&e(3, 0), &e(3, 1)) - v(&[0., 0., 0.5])).amax() < 1e-15);
        assert_eq!(conn.nabla(&e(3, 0), &e(3, 0)).amax(), 0.0);
    }

    #[test]
    fn su2_curvature_values() {
        let (alg, g, conn) = su2_conn();
        let r = curvature_oracle(&conn, &alg, &e(3, 1), &e(3, 0), &e(3, 0));
        assert!((r - v(&[0., 0.25, 0.])).amax() < 1e-15);
        let k = sectional(&alg, &g, &conn, &e(3, 0), &e(3, 1), 1e-12).unwrap();
        assert!((k - 0.25).abs() < 1e-15);
    }

    #[test]
    fn central_direction_is_flat() {
        let alg = catalog::su2_plus_r();
        let g = InnerProduct::identity(4);
        let conn = koszul_connection(&alg, &ReductivePair::trivial(4), &g).unwrap();
        assert_eq!(sectional(&alg, &g, &conn, &e(4, 3), &e(4, 0), 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn koszul_rejects_isotropy() {
        let (alg, split) = catalog::su2_over_u1();
        let err = koszul_connection(&alg, &split, &InnerProduct::identity(2)).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn sphere_quotient_curvature() {
        let (alg, split) = catalog::su2_over_u1();
        let g = InnerProduct::identity(2);
        let r = nat_reductive_r(&alg, &split, &g, &v(&[0., 1.]), &v(&[1., 0.]), &Tolerances::default()).unwrap();
        assert!((r - v(&[0., 1.])).amax() < 1e-15);
    }

    #[test]
    fn nat_reductive_requires_condition() {
        let alg = catalog::su2();
        let g = InnerProduct::new(DMatrix::from_diagonal(&v(&[1., 1., 4.])), 1e-9).unwrap();
        let err = nat_reductive_r(
            &alg,
            &ReductivePair::trivial(3),
            &g,
            &e(3, 1),
            &e(3, 0),
            &Tolerances::default(),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn sectional_rejects_dependent() {
        let (alg, g, conn) = su2_conn();
        assert!(matches!(
            sectional(&alg, &g, &conn, &e(3, 0), &(e(3, 0) * 3.0), 1e-12),
            Err(Error::Flag(_))
        ));
    }

    fn spd(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |xs| {
            let a = DMatrix::from_vec(n, n, xs);
            &a * a.transpose() + DMatrix::identity(n, n) * 0.3
        })
    }

    fn vecs(n: usize, k: usize) -> impl Strategy<Value = Vec<Vector>> {
        prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n).prop_map(DVector::from_vec), k)
    }

    fn algebras() -> impl Strategy<Value = LieAlgebraSpec> {
        prop_oneof![
            Just(catalog::su2()),
            Just(catalog::heisenberg()),
            Just(catalog::su2_plus_r().permuted(&[0, 1, 2, 3]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn koszul_identities(alg in algebras(), m in spd(4), ws in vecs(4, 4)) {
            let n = alg.dim();
            let g = InnerProduct::new(m.view((0, 0), (n, n)).into_owned(), 1e-9).unwrap();
            let conn = koszul_connection(&alg, &ReductivePair::trivial(n), &g).unwrap();
            prop_assert!(conn.check_metric_compatibility(&g, 1e-10).ok);
            prop_assert!(conn.check_torsion_free(&alg, 1e-10).ok);

            let (u, vv, w) = (ws[0].rows(0, n).into_owned(), ws[1].rows(0, n).into_owned(), ws[2].rows(0, n).into_owned());
            let r = |a: &Vector, b: &Vector, c: &Vector| curvature_oracle(&conn, &alg, a, b, c);
            // antisymmetry in the first pair
            prop_assert!((r(&u, &vv, &w) + r(&vv, &u, &w)).amax() < 1e-10);
            // first Bianchi identity
            prop_assert!((r(&u, &vv, &w) + r(&vv, &w, &u) + r(&w, &u, &vv)).amax() < 1e-10);
            // <R(u,y)y, y> = 0
            prop_assert!(g.dot(&r(&u, &vv, &vv), &vv).abs() < 1e-10);
        }

        #[test]
        fn bi_invariant_curvature_is_double_bracket(ws in vecs(4, 3), scale in 0.2..5.0f64) {
            let alg = catalog::su2_plus_r();
            let gm = DMatrix::identity(4, 4) * scale;
            prop_assume!(check_bi_invariance(&alg, &gm, 1e-12).unwrap().ok);
            let g = InnerProduct::new(gm, 1e-9).unwrap();
            let conn = koszul_connection(&alg, &ReductivePair::trivial(4), &g).unwrap();
            let (u, vv, w) = (&ws[0], &ws[1], &ws[2]);
            let expect = alg.br(&alg.br(u, vv), w) * -0.25;
            prop_assert!((curvature_oracle(&conn, &alg, u, vv, w) - expect).amax() < 1e-10);
            // the naturally reductive formula agrees with the connection
            let nr = nat_reductive_r(&alg, &ReductivePair::trivial(4), &g, u, vv, &Tolerances::default()).unwrap();
            prop_assert!((nr - curvature_oracle(&conn, &alg, u, vv, vv)).amax() < 1e-9);
        }
    }
}
