use abflag_core::catalog::random_group_config;
use abflag_core::finsler::{FdScheme, LeadPower, DEFAULT_FD_STEP};
use abflag_core::flagcurv::{orthonormalize_flag, FinslerSpace};
use abflag_core::riemann_oracle::oracle_ruyy;
use abflag_core::{FinslerData, InnerProduct, Tolerances, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian<R: Rng>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

#[test]
fn closed_gy_matches_finite_differences_on_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let cfg = random_group_config(&mut rng, 0.8);
        let n = cfg.metric.m_dim();
        let d = FinslerData::new(cfg.metric.inner().clone(), cfg.x, 1e-12).unwrap();
        let y = gaussian(&mut rng, n);
        let (u, v) = (gaussian(&mut rng, n), gaussian(&mut rng, n));
        let rep = d.gy_discrepancy(&y, &u, &v, LeadPower::Two, DEFAULT_FD_STEP).unwrap();
        worst = worst.max(rep.relative_defect);
        let f = d.f_eval(&y).unwrap();
        assert!((d.g_y(&y, &y, &y).unwrap() - f * f).abs() <= 1e-10 * f * f);
    }
    assert!(worst <= 1e-7, "worst relative defect {worst:e}");
}

#[test]
fn printed_lead_power_fails_the_oracle_off_the_unit_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0;
    for _ in 0..50 {
        let cfg = random_group_config(&mut rng, 0.8);
        let n = cfg.metric.m_dim();
        let d = FinslerData::new(cfg.metric.inner().clone(), cfg.x, 1e-12).unwrap();
        let y = gaussian(&mut rng, n) * 3.0;
        let (u, v) = (gaussian(&mut rng, n), gaussian(&mut rng, n));
        if d.gy_discrepancy(&y, &u, &v, LeadPower::FiveHalves, DEFAULT_FD_STEP)
            .unwrap()
            .relative_defect
            > 1e-4
        {
            failures += 1;
        }
    }
    assert!(failures > 25);
}

#[test]
fn richardson_tightens_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let cfg = random_group_config(&mut rng, 0.8);
        let n = cfg.metric.m_dim();
        let d = FinslerData::new(cfg.metric.inner().clone(), cfg.x, 1e-12).unwrap();
        let (y, u, v) = (gaussian(&mut rng, n), gaussian(&mut rng, n), gaussian(&mut rng, n));
        let exact = d.g_y(&y, &u, &v).unwrap();
        let r = d.g_y_fd(&y, &u, &v, 1e-3, FdScheme::Richardson).unwrap();
        assert!((r - exact).abs() <= 1e-8 * exact.abs().max(1.0));
    }
}

#[test]
fn numerator_and_denominator_identities_with_oracle_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let tol = Tolerances::default();
    for _ in 0..200 {
        let cfg = random_group_config(&mut rng, 0.8);
        let n = cfg.metric.m_dim();
        let g: InnerProduct = cfg.metric.inner().clone();
        let flag = orthonormalize_flag(&g, &gaussian(&mut rng, n), &gaussian(&mut rng, n), 1e-6).unwrap();
        let r = oracle_ruyy(&cfg.metric, flag.u(), flag.y(), &tol).unwrap();
        assert!(g.dot(&r, flag.y()).abs() <= 1e-10);
        let s = FinslerSpace::new(cfg.metric, cfg.x, &tol).unwrap();
        let num = s.numerator_identity_check(&flag, &r).unwrap();
        assert!(num.defect <= 1e-9, "{num:?}");
        let den = s.finsler().denominator_identity(&flag).unwrap();
        assert!(den.defect <= 1e-9, "{den:?}");
    }
}

proptest! {
    #[test]
    fn gy_is_symmetric_and_scale_invariant(seed in any::<u64>(), scale in 0.1..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_group_config(&mut rng, 0.9);
        let n = cfg.metric.m_dim();
        let d = FinslerData::new(cfg.metric.inner().clone(), cfg.x, 1e-12).unwrap();
        let (y, u, v) = (gaussian(&mut rng, n), gaussian(&mut rng, n), gaussian(&mut rng, n));
        let a = d.g_y(&y, &u, &v).unwrap();
        prop_assert!((a - d.g_y(&y, &v, &u).unwrap()).abs() <= 1e-11 * (1.0 + a.abs()));
        prop_assert!((a - d.g_y(&(&y * scale), &u, &v).unwrap()).abs() <= 1e-10 * (1.0 + a.abs()));
        // positive definite inside the unit ball of X
        let m = d.g_y_matrix(&y).unwrap();
        prop_assert!(m.symmetric_eigenvalues().min() > 0.0);
    }
}
