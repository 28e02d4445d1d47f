//! Finite-dimensional real Lie algebras given by structure constants, and
//! basis-adapted reductive splittings `g = h + m`.
//!
//! A [`LieAlgebraSpec`] stores the dense tensor `c[i][j][k]`, the coefficient
//! of `e_k` in `[e_i, e_j]`. A [`ReductivePair`] marks the first `h_dim` basis
//! vectors as spanning `h`; the rest span `m`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::{Matrix, Vector};

/// Structure constants of a real Lie algebra, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraSpec {
    dim: usize,
    c: Vec<f64>,
    labels: Option<Vec<String>>,
    asymmetry: f64,
}

impl LieAlgebraSpec {
    /// Builds an algebra from a raw `dim^3` tensor in `[i][j][k]` order.
    ///
    /// A tensor that is not antisymmetric in `(i, j)` is replaced by its
    /// antisymmetrization `(c[i][j][k] - c[j][i][k]) / 2`; the largest
    /// removed asymmetry is kept and available via [`Self::input_asymmetry`].
    pub fn from_tensor(dim: usize, raw: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("algebra dimension must be positive".into()));
        }
        check_len(raw.len(), dim * dim * dim, "structure-constant tensor")?;
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("structure constants must be finite".into()));
        }
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        let mut asymmetry = 0.0_f64;
        let mut c = vec![0.0; raw.len()];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let a = raw[idx(i, j, k)];
                    let b = raw[idx(j, i, k)];
                    asymmetry = asymmetry.max((a + b).abs());
                    c[idx(i, j, k)] = 0.5 * (a - b);
                }
            }
        }
        if asymmetry > 0.0 {
            warn!("structure constants were not antisymmetric (max |c_ijk + c_jik| = {asymmetry:e}); stored the antisymmetrization");
        }
        Ok(Self {
            dim,
            c,
            labels: None,
            asymmetry,
        })
    }

    /// Builds an algebra from sparse `(i, j, k, value)` entries with 0-based
    /// indices. An entry for `(i, j)` also sets `(j, i)` to the negated value
    /// unless that slot is given explicitly.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("algebra dimension must be positive".into()));
        }
        let n3 = dim * dim * dim;
        let mut raw = vec![0.0; n3];
        let mut explicit = vec![false; n3];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for (n, &(i, j, k, v)) in entries.iter().enumerate() {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Input(format!(
                    "structure-constant entry #{n} ({i}, {j}, {k}) is out of range for dimension {dim}"
                )));
            }
            raw[idx(i, j, k)] += v;
            explicit[idx(i, j, k)] = true;
        }
        let mut filled = raw.clone();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if explicit[idx(i, j, k)] && !explicit[idx(j, i, k)] {
                        filled[idx(j, i, k)] = -raw[idx(i, j, k)];
                    }
                }
            }
        }
        Self::from_tensor(dim, filled)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_len(labels.len(), self.dim, "basis labels")?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Largest `|c[i][j][k] + c[j][i][k]|` seen in the raw input (zero when
    /// the input was already antisymmetric).
    pub fn input_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Coefficient of `e_k` in `[e_i, e_j]` as a vector.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vector {
        let off = (i * self.dim + j) * self.dim;
        DVector::from_column_slice(&self.c[off..off + self.dim])
    }

    /// The dense tensor in `[i][j][k]` order.
    pub fn tensor(&self) -> &[f64] {
        &self.c
    }

    /// `[x, y] = sum_{i,j} x_i y_j c[i][j][.]`.
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        check_len(x.len(), self.dim, "bracket left operand")?;
        check_len(y.len(), self.dim, "bracket right operand")?;
        Ok(self.br(x, y))
    }

    pub(crate) fn br(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..n {
                let s = xi * y[j];
                if s == 0.0 {
                    continue;
                }
                let off = (i * n + j) * n;
                for k in 0..n {
                    out[k] += s * self.c[off + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad(x)`, so that `ad(x) * y = [x, y]`.
    pub fn ad(&self, x: &Vector) -> Result<Matrix> {
        check_len(x.len(), self.dim, "ad operand")?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let ej = DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 });
            m.set_column(j, &self.br(x, &ej));
        }
        Ok(m)
    }

    /// Re-expresses the algebra in a new basis. Column `a` of `basis` holds
    /// the new vector `f_a` in old coordinates.
    pub fn change_basis(&self, basis: &Matrix) -> Result<Self> {
        let n = self.dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: basis.nrows().max(basis.ncols()),
                context: "change-of-basis matrix",
            });
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("change-of-basis matrix is singular".into()))?;
        let mut raw = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let coords = &inv * self.br(&basis.column(a).into_owned(), &basis.column(b).into_owned());
                for k in 0..n {
                    raw[(a * n + b) * n + k] = coords[k];
                }
            }
        }
        Self::from_tensor(n, raw)
    }

    /// Reorders the basis: new basis vector `a` is old basis vector `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim;
        check_len(perm.len(), n, "basis permutation")?;
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Input(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            seen[p] = true;
        }
        let mut raw = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    raw[(a * n + b) * n + k] = self.c(perm[a], perm[b], perm[k]);
                }
            }
        }
        let mut out = Self::from_tensor(n, raw)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(perm.iter().map(|&p| labels[p].clone()).collect());
        }
        Ok(out)
    }

    /// Direct sum `self + other`, with `self`'s basis first.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (p, q) = (self.dim, other.dim);
        let n = p + q;
        let mut raw = vec![0.0; n * n * n];
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    raw[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        for i in 0..q {
            for j in 0..q {
                for k in 0..q {
                    raw[((p + i) * n + p + j) * n + p + k] = other.c(i, j, k);
                }
            }
        }
        Self {
            dim: n,
            c: raw,
            labels: None,
            asymmetry: 0.0,
        }
    }
}

/// Max over basis triples `i < j < k` of the sup-norm of the Jacobiator
/// `[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]`.
pub fn jacobi_defect(alg: &LieAlgebraSpec) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += alg.c(j, k, m) * alg.c(i, m, l)
                            + alg.c(k, i, m) * alg.c(j, m, l)
                            + alg.c(i, j, m) * alg.c(k, m, l);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Orthonormal (standard coordinate form) basis of `span{[e_i, e_j]}`.
///
/// Rank is decided by singular values above `tol_rank * max(1, sigma_max)`.
pub fn derived_subalgebra(alg: &LieAlgebraSpec, tol_rank: f64) -> Vec<Vector> {
    let n = alg.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut m = DMatrix::zeros(n, pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        m.set_column(col, &alg.basis_bracket(i, j));
    }
    column_space(&m, tol_rank)
}

/// Orthonormal basis of the column space of `m`.
pub(crate) fn column_space(m: &Matrix, tol_rank: f64) -> Vec<Vector> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol_rank * smax.max(1.0);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > cut)
        .map(|i| u.column(i).into_owned())
        .collect()
}

/// Which summand of `g = h + m` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    H,
    M,
}

/// Basis-adapted reductive split: `h` is spanned by the first `h_dim`
/// basis vectors, `m` by the remaining ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductivePair {
    dim: usize,
    h_dim: usize,
}

impl ReductivePair {
    pub fn new(dim: usize, h_dim: usize) -> Result<Self> {
        if h_dim >= dim {
            return Err(Error::Input(format!(
                "h_dim = {h_dim} leaves no complement in a {dim}-dimensional algebra"
            )));
        }
        Ok(Self { dim, h_dim })
    }

    /// The split with trivial `h` (Lie-group case).
    pub fn trivial(dim: usize) -> Self {
        Self { dim, h_dim: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_dim(&self) -> usize {
        self.h_dim
    }

    pub fn m_dim(&self) -> usize {
        self.dim - self.h_dim
    }

    /// Full-dimensional projection onto `h` or `m` (the other block zeroed).
    pub fn project(&self, x: &Vector, part: Part) -> Vector {
        let h = self.h_dim;
        DVector::from_fn(self.dim, |i, _| match part {
            Part::H if i < h => x[i],
            Part::M if i >= h => x[i],
            _ => 0.0,
        })
    }

    /// Lifts `m`-coordinates to full coordinates (zero `h` block).
    pub fn embed(&self, m: &Vector) -> Vector {
        let h = self.h_dim;
        DVector::from_fn(self.dim, |i, _| if i < h { 0.0 } else { m[i - h] })
    }

    /// The `m`-coordinates of a full vector.
    pub fn restrict(&self, x: &Vector) -> Vector {
        x.rows(self.h_dim, self.m_dim()).into_owned()
    }
}

/// Outcome of [`check_reductive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductiveReport {
    pub subalgebra_ok: bool,
    pub ad_invariant_ok: bool,
    /// Largest offending component over both checks.
    pub max_defect: f64,
    /// Basis pair `(a, b)` (0-based) realizing `max_defect`, if nonzero.
    pub worst_pair: Option<(usize, usize)>,
}

impl ReductiveReport {
    pub fn ok(&self) -> bool {
        self.subalgebra_ok && self.ad_invariant_ok
    }
}

/// Checks `[h, h] in h` and `[h, m] in m` on basis vectors.
pub fn check_reductive(alg: &LieAlgebraSpec, split: &ReductivePair, tol: f64) -> Result<ReductiveReport> {
    check_len(split.dim(), alg.dim(), "reductive split")?;
    let (n, h) = (alg.dim(), split.h_dim());
    let mut sub = 0.0_f64;
    let mut inv = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut worst_pair = None;
    for a in 0..h {
        for b in 0..n {
            let range = if b < h { h..n } else { 0..h };
            let d = range.map(|k| alg.c(a, b, k).abs()).fold(0.0, f64::max);
            if b < h {
                sub = sub.max(d);
            } else {
                inv = inv.max(d);
            }
            if d > worst {
                worst = d;
                worst_pair = Some((a, b));
            }
        }
    }
    Ok(ReductiveReport {
        subalgebra_ok: sub <= tol,
        ad_invariant_ok: inv <= tol,
        max_defect: worst,
        worst_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn v(xs: &[f64]) -> Vector {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn abelian_bracket_vanishes() {
        let a = catalog::abelian(3);
        assert_eq!(
            a.bracket(&v(&[1., 0., 0.]), &v(&[0., 1., 0.])).unwrap(),
            v(&[0., 0., 0.])
        );
    }

    #[test]
    fn su2_brackets() {
        let s = catalog::su2();
        assert_eq!(
            s.bracket(&v(&[1., 0., 0.]), &v(&[0., 1., 0.])).unwrap(),
            v(&[0., 0., 1.])
        );
        // 2[e1,e3] + [e2,e3] = -2 e2 + e1
        let r = s.bracket(&v(&[2., 1., 0.]), &v(&[0., 0., 1.])).unwrap();
        assert_eq!(r, v(&[1., -2., 0.]));
    }

    #[test]
    fn bracket_rejects_wrong_length() {
        let s = catalog::su2();
        assert!(matches!(
            s.bracket(&v(&[1., 0.]), &v(&[0., 1., 0.])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_defect(&catalog::abelian(3)), 0.0);
        assert_eq!(jacobi_defect(&catalog::su2()), 0.0);
        let bad = LieAlgebraSpec::from_entries(3, &[(0, 1, 2, 1.0), (0, 2, 0, 1.0)]).unwrap();
        assert!((jacobi_defect(&bad) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_antisymmetric_input_is_normalized() {
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        let mut raw = vec![0.0; 27];
        raw[idx(0, 1, 2)] = 1.0;
        raw[idx(1, 0, 2)] = 0.0;
        let a = LieAlgebraSpec::from_tensor(3, raw).unwrap();
        assert_eq!(a.c(0, 1, 2), 0.5);
        assert_eq!(a.c(1, 0, 2), -0.5);
        assert_eq!(a.input_asymmetry(), 1.0);
        assert_eq!(catalog::su2().input_asymmetry(), 0.0);
    }

    #[test]
    fn entries_out_of_range() {
        let err = LieAlgebraSpec::from_entries(3, &[(0, 3, 1, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn derived_subalgebras() {
        assert_eq!(derived_subalgebra(&catalog::su2(), 1e-10).len(), 3);
        let h = derived_subalgebra(&catalog::heisenberg(), 1e-10);
        assert_eq!(h.len(), 1);
        assert!((h[0][2].abs() - 1.0).abs() < 1e-14);
        assert!(derived_subalgebra(&catalog::abelian(3), 1e-10).is_empty());
        assert!(derived_subalgebra(&catalog::abelian(1), 1e-10).is_empty());
    }

    #[test]
    fn projections() {
        let (alg, split) = catalog::su2_over_u1();
        // old [e1, e2] = e3 is new [f1, f2] = f0, which lies in h
        let b = alg.bracket(&v(&[0., 1., 0.]), &v(&[0., 0., 1.])).unwrap();
        assert_eq!(split.project(&b, Part::H), v(&[1., 0., 0.]));
        assert_eq!(split.project(&b, Part::M), v(&[0., 0., 0.]));
        let x = v(&[0., 0.3, -2.]);
        assert_eq!(split.project(&x, Part::M), x);
        let t = ReductivePair::trivial(3);
        assert_eq!(t.project(&x, Part::H), v(&[0., 0., 0.]));
        assert_eq!(split.restrict(&split.embed(&v(&[4., 5.]))), v(&[4., 5.]));
    }

    #[test]
    fn reductive_checks() {
        let (alg, split) = catalog::su2_over_u1();
        let r = check_reductive(&alg, &split, 1e-9).unwrap();
        assert!(r.ok());
        let r = check_reductive(&catalog::su2(), &ReductivePair::trivial(3), 1e-9).unwrap();
        assert!(r.ok() && r.max_defect == 0.0);

        // h = span{e1 + e2}, m = span{e2, e3}: [f0, f2] = e1 - e2 = f0 - 2 f1
        let basis = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 1., 1., 0., 0., 0., 1.]);
        let skew = catalog::su2().change_basis(&basis).unwrap();
        let r = check_reductive(&skew, &ReductivePair::new(3, 1).unwrap(), 1e-9).unwrap();
        assert!(r.subalgebra_ok);
        assert!(!r.ad_invariant_ok);
        assert!((r.max_defect - 1.0).abs() < 1e-14);
        assert_eq!(r.worst_pair, Some((0, 2)));
    }

    #[test]
    fn split_requires_nonempty_m() {
        assert!(ReductivePair::new(3, 3).is_err());
    }
}
