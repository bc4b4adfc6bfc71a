use std::f64::consts::PI;

use proptest::prelude::*;
use ringbump::model::{bubble_centers, derive_scales, frame, tangential_lipschitz, tau_exponent, xi_norm};
use ringbump::{Configuration, ProblemParams};

fn params(n: usize, m: f64, k: usize) -> ProblemParams {
    ProblemParams {
        n,
        m,
        k,
        ..ProblemParams::default()
    }
}

#[test]
fn mu_examples() {
    // k^{(n-2)/(n-2-m)}
    let cases = [
        (5, 2.5, 16, 16f64.powi(6)),
        (6, 3.0, 8, 8f64.powi(4)),
        (7, 4.0, 10, 10f64.powi(5)),
    ];
    for (n, m, k, mu) in cases {
        let s = derive_scales(&params(n, m, k), 0.0).unwrap();
        assert!((s.mu / mu - 1.0).abs() < 1e-14, "n={n}");
    }
}

#[test]
fn tau_skips_nonpositive_bounds() {
    // n=5, m=2.5, theta=3: bounds 1, 0.25, 1.2
    assert!((tau_exponent(&params(5, 2.5, 16)) - 0.225).abs() < 1e-15);
    // m < 2 leaves (m-2)/2 out
    let p = ProblemParams {
        m: 1.8,
        ..params(5, 1.8, 16)
    };
    assert!((tau_exponent(&p) - 0.9 * (5.6 - 5.0) / 1.8).abs() < 1e-15);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(derive_scales(&params(4, 1.5, 16), 0.0).is_err());
    assert!(derive_scales(&params(5, 3.0, 16), 0.0).is_err());
    let bad_theta = ProblemParams {
        theta_k: 2.0,
        ..ProblemParams::default()
    };
    assert!(derive_scales(&bad_theta, 0.0).is_err());
}

#[test]
fn centers_lie_on_ring() {
    let p = params(5, 2.5, 12);
    let s = derive_scales(&p, -3.5).unwrap();
    let q = Configuration::zeros(12, 0.3);
    let c = bubble_centers(&q, &s).unwrap();
    for (j, x) in c.iter().enumerate() {
        let r = x[0].hypot(x[1]);
        assert!((r / s.ring_radius - 1.0).abs() < 1e-15);
        let theta = x[1].atan2(x[0]);
        let expected = 2.0 * PI * j as f64 / 12.0 + 0.3;
        assert!(((theta - expected).rem_euclid(2.0 * PI)).min((expected - theta).rem_euclid(2.0 * PI)) < 1e-12);
        assert!(x[2..].iter().all(|&v| v == 0.0));
    }
    let nearest = ((c[0][0] - c[1][0]).powi(2) + (c[0][1] - c[1][1]).powi(2)).sqrt();
    assert!((nearest / s.chord - 1.0).abs() < 1e-12);
    assert!((s.chord_between(0, 1) / s.chord - 1.0).abs() < 1e-15);
}

#[test]
fn wrong_length_configuration_rejected() {
    let s = derive_scales(&params(5, 2.5, 12), 0.0).unwrap();
    assert!(bubble_centers(&Configuration::zeros(11, 0.0), &s).is_err());
    assert!(Configuration::from_vec(&[0.0; 7], 0.0).is_err());
}

proptest! {
    #[test]
    fn frame_is_orthonormal(j in 0usize..64, k in 3usize..64, alpha in -PI..PI) {
        let (nj, tj) = frame(j % k, k, alpha);
        prop_assert!((nj[0] * nj[0] + nj[1] * nj[1] - 1.0).abs() < 1e-15);
        prop_assert!((nj[0] * tj[0] + nj[1] * tj[1]).abs() < 1e-15);
    }

    #[test]
    fn vec_round_trip(v in proptest::collection::vec(-1e3f64..1e3, 24)) {
        let q = Configuration::from_vec(&v, 0.1).unwrap();
        prop_assert_eq!(q.to_vec(), v);
    }

    #[test]
    fn xi_norm_is_a_seminorm(
        a in proptest::collection::vec(-1.0f64..1.0, 24),
        b in proptest::collection::vec(-1.0f64..1.0, 24),
        t in -5.0f64..5.0,
        n in 5usize..8,
    ) {
        let m = n as f64 - 2.5;
        let s = derive_scales(&params(n, m, 8), 0.0).unwrap();
        let qa = Configuration::from_vec(&a, 0.0).unwrap();
        let qb = Configuration::from_vec(&b, 0.0).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let scaled: Vec<f64> = a.iter().map(|x| t * x).collect();
        let na = xi_norm(&qa, &s);
        let nb = xi_norm(&qb, &s);
        let nsum = xi_norm(&Configuration::from_vec(&sum, 0.0).unwrap(), &s);
        let nscaled = xi_norm(&Configuration::from_vec(&scaled, 0.0).unwrap(), &s);
        prop_assert!(nsum <= (na + nb) * (1.0 + 1e-14));
        prop_assert!((nscaled - t.abs() * na).abs() <= 1e-12 * na.max(1.0));
        prop_assert!(xi_norm(&Configuration::zeros(8, 0.0), &s) == 0.0);
    }

    #[test]
    fn lipschitz_invariant_under_cyclic_shift(g in proptest::collection::vec(-1.0f64..1.0, 9), r in 0usize..9) {
        let mut shifted = g.clone();
        shifted.rotate_left(r);
        prop_assert!((tangential_lipschitz(&g) - tangential_lipschitz(&shifted)).abs() < 1e-12);
    }
}
