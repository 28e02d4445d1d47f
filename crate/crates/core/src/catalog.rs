//! Small reference algebras and splittings.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{LieAlgebraSpec, ReductivePair};
use crate::metrics::{BiInvariantForm, InvariantMetric, MetricEndomorphism};
use crate::{Matrix, Tolerances, Vector};

/// `su(2)` with `[e1,e2] = e3`, `[e2,e3] = e1`, `[e3,e1] = e2`.
pub fn su2() -> LieAlgebraSpec {
    LieAlgebraSpec::from_entries(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
        .expect("su(2) constants are valid")
}

/// Heisenberg algebra, `[e1,e2] = e3`.
pub fn heisenberg() -> LieAlgebraSpec {
    LieAlgebraSpec::from_entries(3, &[(0, 1, 2, 1.0)]).expect("Heisenberg constants are valid")
}

pub fn abelian(dim: usize) -> LieAlgebraSpec {
    LieAlgebraSpec::from_tensor(dim, vec![0.0; dim * dim * dim]).expect("positive dimension")
}

/// `su(2) + R`, with the central direction as the fourth basis vector.
pub fn su2_plus_r() -> LieAlgebraSpec {
    su2().direct_sum(&abelian(1))
}

/// `su(2)` reordered as `(e3, e1, e2)` with `h = span{e3}`, the tangent
/// algebra of the round 2-sphere `SU(2)/U(1)`.
pub fn su2_over_u1() -> (LieAlgebraSpec, ReductivePair) {
    let alg = su2().permuted(&[2, 0, 1]).expect("valid permutation");
    (alg, ReductivePair::new(3, 1).expect("h_dim < dim"))
}

/// Euclidean motions of the plane, `[e3,e1] = e2`, `[e3,e2] = -e1`.
pub fn euclidean_plane() -> LieAlgebraSpec {
    LieAlgebraSpec::from_entries(3, &[(2, 0, 1, 1.0), (2, 1, 0, -1.0)]).expect("e(2) constants are valid")
}

/// A seeded Lie-group configuration for randomized cross-checks.
#[derive(Debug, Clone)]
pub struct RandomGroupConfig {
    pub name: &'static str,
    pub metric: InvariantMetric,
    pub x: Vector,
    /// The identity background form is bi-invariant for this algebra.
    pub bi_invariant_background: bool,
}

/// Draws an algebra of dimension at most 6 from a fixed pool, a random
/// positive `phi` (so `g = phi` with `g0 = I`), and a drift with
/// `|X|_g <= x_max`.
pub fn random_group_config<R: Rng>(rng: &mut R, x_max: f64) -> RandomGroupConfig {
    type Entry = (&'static str, fn() -> LieAlgebraSpec, bool);
    let pool: [Entry; 9] = [
        ("su2", su2, true),
        ("su2+r", su2_plus_r, true),
        ("su2+r2", || su2().direct_sum(&abelian(2)), true),
        ("su2+su2", || su2().direct_sum(&su2()), true),
        ("r4", || abelian(4), true),
        ("heisenberg", heisenberg, false),
        ("heisenberg+r", || heisenberg().direct_sum(&abelian(1)), false),
        ("e2", euclidean_plane, false),
        ("e2+su2", || euclidean_plane().direct_sum(&su2()), false),
    ];
    let (name, make, bi) = pool[rng.random_range(0..pool.len())];
    let alg = make();
    let n = alg.dim();
    let b = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let phi = b.transpose() * &b / n as f64 + Matrix::identity(n, n) * 0.2;
    let split = ReductivePair::trivial(n);
    let g0 = BiInvariantForm::identity(n);
    let phi = MetricEndomorphism::new(phi, &g0, &split, 1e-9).expect("random phi is symmetric positive");
    let metric = InvariantMetric::new(alg, split, g0, phi, &Tolerances::default()).expect("trivial split is valid");
    let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = &dir * (x_max * rng.random::<f64>() / metric.inner().norm(&dir));
    RandomGroupConfig {
        name,
        metric,
        x,
        bi_invariant_background: bi,
    }
}
