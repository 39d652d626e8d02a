#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use proptest::prelude::*;

use mbgk::kinetic::brinkman::brinkman_solve;
use mbgk::kinetic::gk::relax_cell_gk;
use mbgk::kinetic::transport::{advect_coupled, advect_coupled_with, Boundary, Limiter};
use mbgk::macro_ms::solve_velocities;
use mbgk::maxwellian::{cell_moments, reduced_maxwellian_pair};
use mbgk::mixture::{alphas_betas, mix_temperature, mix_velocity, ms_coefficients};
use mbgk::{Grid1D, MixtureParams, VelocityGrid1D};

fn unit() -> impl Strategy<Value = f64> {
    0.5f64..2.0
}

fn pair() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(unit(), 2..=3)
}

fn square(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(unit(), k), k)
}

fn mixture() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..=3).prop_flat_map(|k| {
        (
            prop::collection::vec(unit(), k),
            square(k),
            prop::collection::vec(unit(), k),
            prop::collection::vec(-1.0f64..1.0, k),
            prop::collection::vec(unit(), k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_pair_round_trips_moments(n in unit(), v in -0.5f64..0.5, theta in unit(), m in unit()) {
        let vg = VelocityGrid1D::for_mixture(theta, &[m], v.abs(), 64).unwrap();
        let (g, h) = reduced_maxwellian_pair(n, v, theta, m, &vg).unwrap();
        let c = cell_moments(&g, &h, &vg.nodes, vg.weight, m).unwrap();
        prop_assert!((c.n - n).abs() <= 1e-10 * n);
        prop_assert!((c.u - v).abs() <= 1e-10);
        prop_assert!((c.theta - theta).abs() <= 1e-10 * theta);
    }

    #[test]
    fn pair_weights_sum_to_one((m, nu, n, _, _) in mixture()) {
        let rho: Vec<f64> = n.iter().zip(&m).map(|(a, b)| a * b).collect();
        let (al, be) = alphas_betas(&nu, &rho, &n);
        for i in 0..m.len() {
            for j in 0..m.len() {
                if i != j {
                    prop_assert!((al[i][j] + al[j][i] - 1.0).abs() < 1e-14);
                    prop_assert!((be[i][j] + be[j][i] - 1.0).abs() < 1e-14);
                    prop_assert!(al[i][j] > 0.0 && be[i][j] > 0.0);
                }
            }
        }
    }

    #[test]
    fn mixture_temperatures_are_positive((m, nu, n, v, theta) in mixture(), eps in 0.05f64..1.0) {
        let rho: Vec<f64> = n.iter().zip(&m).map(|(a, b)| a * b).collect();
        let (al, be) = alphas_betas(&nu, &rho, &n);
        let t = mix_temperature(&al, &be, &m, &theta, &v, eps).unwrap();
        let vm = mix_velocity(&al, &v);
        for i in 0..m.len() {
            prop_assert_eq!(t[i][i], theta[i]);
            for j in 0..m.len() {
                prop_assert!(t[i][j] > 0.0);
                prop_assert_eq!(t[i][j], t[j][i]);
                prop_assert_eq!(vm[i][j], vm[j][i]);
            }
        }
    }

    #[test]
    fn ms_coefficients_are_symmetric((m, nu, n, _, _) in mixture()) {
        let d = ms_coefficients(&nu, &m, &n);
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert!((d[i][j] - d[j][i]).abs() <= 1e-14 * d[i][j]);
                prop_assert!(d[i][j] > 0.0);
            }
        }
    }

    #[test]
    fn ms_velocities_carry_no_momentum((m, nu, n, _, _) in mixture(), grad in pair()) {
        let k = m.len();
        let mut p = MixtureParams::uniform(k, 0.1);
        p.m = m.clone();
        p.nu_matrix = nu;
        let g: Vec<f64> = (0..k).map(|i| grad[i % grad.len()] - 1.0).collect();
        let v = solve_velocities(&p, &n, &g).unwrap();
        let mom: f64 = (0..k).map(|i| m[i] * n[i] * v[i]).sum();
        prop_assert!(mom.abs() < 1e-12);
    }

    #[test]
    fn relaxation_conserves_mixture_totals((m, nu, n, v, theta) in mixture(), eps in 0.05f64..1.0, dt in 1e-3f64..10.0) {
        let k = m.len();
        let mut p = MixtureParams::uniform(k, eps);
        p.m = m.clone();
        p.nu_matrix = nu;
        let (v1, t1) = relax_cell_gk(&p, &n, &v, &theta, eps, dt).unwrap();
        let mom0: f64 = (0..k).map(|i| m[i] * n[i] * v[i]).sum();
        let mom1: f64 = (0..k).map(|i| m[i] * n[i] * v1[i]).sum();
        let e = |vv: &[f64], tt: &[f64]| -> f64 { (0..k).map(|i| 1.5 * n[i] * tt[i] + 0.5 * eps * eps * m[i] * n[i] * vv[i] * vv[i]).sum() };
        prop_assert!((mom0 - mom1).abs() < 1e-12 * (1.0 + mom0.abs()));
        prop_assert!((e(&v, &theta) - e(&v1, &t1)).abs() < 1e-12 * e(&v, &theta));
        prop_assert!(t1.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn transport_conserves_and_stays_positive(
        g in prop::collection::vec(0.0f64..1.0, 16),
        ratio in prop::collection::vec(0.1f64..10.0, 16),
        c in -1.0f64..1.0,
    ) {
        let mut g1 = g.clone();
        let mut h1: Vec<f64> = g.iter().zip(&ratio).map(|(a, r)| a * r).collect();
        let h0: f64 = h1.iter().sum();
        let (mut ch, mut fl) = (Vec::new(), Vec::new());
        advect_coupled(&mut g1, &mut [&mut h1], c, Boundary::Periodic, &mut ch, &mut fl);
        prop_assert!((g1.iter().sum::<f64>() - g.iter().sum::<f64>()).abs() < 1e-13);
        prop_assert!((h1.iter().sum::<f64>() - h0).abs() < 1e-12 * (1.0 + h0));
        prop_assert!(g1.iter().chain(&h1).all(|&x| x >= 0.0));
    }

    #[test]
    fn positive_limiter_keeps_both_fields_nonnegative(
        g in prop::collection::vec(0.0f64..1.0, 12),
        ratio in prop::collection::vec(0.01f64..100.0, 12),
        c in -1.0f64..1.0,
    ) {
        let mut g1 = g.clone();
        let mut h1: Vec<f64> = g.iter().zip(&ratio).map(|(a, r)| a * r).collect();
        let (mut ch, mut fl) = (Vec::new(), Vec::new());
        let before = g.iter().sum::<f64>();
        let out = advect_coupled_with(&mut g1, &mut [&mut h1], c, Boundary::ZeroInflow, Limiter::Positive, &mut ch, &mut fl);
        prop_assert!(g1.iter().chain(&h1).all(|&x| x >= 0.0));
        prop_assert!((g1.iter().sum::<f64>() + out - before).abs() < 1e-13);
    }

    #[test]
    fn positive_limiter_is_exact_on_linear_data(a in 1.0f64..2.0, b in -0.05f64..0.05, c in 0.0f64..1.0) {
        let mut q: Vec<f64> = (0..12).map(|k| a + b * k as f64).collect();
        let (mut ch, mut fl) = (Vec::new(), Vec::new());
        advect_coupled_with(&mut q, &mut [], c, Boundary::ZeroInflow, Limiter::Positive, &mut ch, &mut fl);
        // Away from the inflow edge a linear profile shifts by exactly c cells.
        for (k, x) in q.iter().enumerate().skip(2).take(8) {
            prop_assert!((x - (a + b * (k as f64 - c))).abs() < 1e-13);
        }
    }

    #[test]
    fn brinkman_potential_obeys_maximum_principle(rhs in prop::collection::vec(-2.0f64..2.0, 32), eps in 0.0f64..1.0) {
        let grid = Grid1D::new(1.0, 32).unwrap();
        let phi = brinkman_solve(&rhs, eps, &grid).unwrap();
        let lo = rhs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rhs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(phi.iter().all(|&p| p >= lo - 1e-12 && p <= hi + 1e-12));
    }
}
