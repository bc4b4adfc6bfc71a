use std::f64::consts::PI;

use proptest::prelude::*;
use ringbump::balance::{
    balance_residuals, finite_residuals, lambda_closed_form, lattice_sum, solve_balance, solve_balance_from,
    solve_finite,
};
use ringbump::bubbles::{gamma_constants, GammaConstants};
use ringbump::ProblemParams;

fn gammas() -> GammaConstants {
    gamma_constants(5, 2.5, 1e-10).unwrap()
}

fn params(k: usize) -> ProblemParams {
    ProblemParams {
        k,
        ..ProblemParams::default()
    }
}

#[test]
fn lattice_sum_cosecant_square_identity() {
    for k in [2usize, 3, 7, 16, 100] {
        let kf = k as f64;
        assert!(
            (lattice_sum(k, 2.0) / ((kf * kf - 1.0) / 3.0) - 1.0).abs() < 1e-13,
            "k={k}"
        );
    }
    assert_eq!(lattice_sum(1, 3.0), 0.0);
}

#[test]
fn closed_form_lambda_solves_second_equation() {
    let g = gammas();
    for k in [8, 16, 40] {
        let p = params(k);
        let (n, m) = (p.n as f64, p.m);
        let r = p.mu() * p.r0;
        let s: f64 = (1..k).map(|l| (PI * l as f64 / k as f64).sin().powf(2.0 - n)).sum();
        let a = p.c0 * p.mu().powf(-m);
        // γ1 Λ^{2-n} (2R)^{2-n} S = 2 a γ3 Λ^{-m}
        let expected = (2.0 * a * g.g3 / (g.g1 * (2.0 * r).powf(2.0 - n) * s)).powf(1.0 / (m + 2.0 - n));
        let got = lambda_closed_form(&p, &g, r);
        assert!((got / expected - 1.0).abs() < 1e-12, "k={k}: {got} vs {expected}");
        assert!(balance_residuals(&p, &g, got, 0.0)[1].abs() < 1e-12);
    }
}

#[test]
fn newton_root_is_unique_across_starts() {
    let g = gammas();
    let p = params(24);
    let base = solve_balance(&p, &g).unwrap();
    for lam_scale in [0.7, 0.9, 1.1, 1.4] {
        for shift_scale in [-1.0, 0.0, 0.5, 2.0] {
            let sol = solve_balance_from(&p, &g, (base.lambda * lam_scale, base.r0_shift * shift_scale)).unwrap();
            assert!(
                (sol.lambda / base.lambda - 1.0).abs() < 1e-12,
                "{lam_scale} {shift_scale}"
            );
            assert!(
                (sol.r0_shift / base.r0_shift - 1.0).abs() < 1e-9,
                "{lam_scale} {shift_scale}"
            );
        }
    }
}

#[test]
fn finite_system_shares_the_root() {
    let g = gammas();
    for k in [8, 32] {
        let p = params(k);
        let fin = solve_finite(&p, &g).unwrap();
        let [a, b] = finite_residuals(&p, &g, fin.lambda0, fin.r_offset);
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12, "k={k}: {a} {b}");
        assert!((fin.r - p.mu() * p.r0 - fin.r_offset).abs() <= f64::EPSILON * fin.r);
    }
}

#[test]
fn invalid_parameters_rejected() {
    let bad = ProblemParams { m: 0.5, ..params(8) };
    assert!(solve_balance(&bad, &gammas()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residuals_small_for_any_k(k in 6usize..80) {
        let g = gammas();
        let p = params(k);
        let sol = solve_balance(&p, &g).unwrap();
        let [a, b] = balance_residuals(&p, &g, sol.lambda, sol.r0_shift);
        prop_assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        prop_assert!(sol.lambda > 0.0);
        // the radial correction stays of order 1/μ
        let scaled = p.mu() * sol.r0_shift.abs();
        prop_assert!(scaled > 1e-3 && scaled < 1e3);
    }
}
