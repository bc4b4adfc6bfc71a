mod common;

use common::{dense_circulant, dense_eigenvalues, multiset_distance, rng, sup, uniform_vec};
use num_complex::Complex64;
use proptest::prelude::*;
use ringbump::balance::solve_balance;
use ringbump::bubbles::gamma_constants;
use ringbump::circulant::{build_t, eigen_dft, eigen_dft_direct, solve_t, solve_tprime, Circulant, ReducedMatrixT};
use ringbump::ProblemParams;

fn complex_vec() -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..48)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn reduced_t(k: usize) -> ReducedMatrixT {
    let p = ProblemParams {
        k,
        ..ProblemParams::default()
    };
    let g = gamma_constants(5, 2.5, 1e-10).unwrap();
    let sol = solve_balance(&p, &g).unwrap();
    build_t(&p, &g, sol.lambda, sol.ring_radius(&p)).unwrap()
}

#[test]
fn spectrum_matches_dense_schur() {
    let mut r = rng(7);
    for k in [5usize, 12, 31] {
        let row: Vec<Complex64> = uniform_vec(&mut r, 2 * k)
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let c = Circulant::new(row.clone());
        let d = multiset_distance(&eigen_dft(&c), &dense_eigenvalues(dense_circulant(&row)));
        assert!(d < 1e-12, "k={k}: {d}");
    }
}

#[test]
fn symmetric_real_rows_have_real_spectra() {
    let t = reduced_t(16);
    for (c, stored) in [(&t.a1, &t.lambda1), (&t.a3, &t.lambda3)] {
        let eta = eigen_dft(c);
        let scale = eta.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        for (z, s) in eta.iter().zip(stored.iter()) {
            assert!(z.im.abs() <= 1e-13 * scale);
            assert!((z.re - s).abs() <= 1e-13 * scale);
        }
    }
    // A2 is antisymmetric: purely imaginary spectrum
    let eta = eigen_dft(&t.a2);
    let scale = eta.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    for (z, s) in eta.iter().zip(&t.lambda2) {
        assert!(z.re.abs() <= 1e-13 * scale);
        assert!((z.im - s).abs() <= 1e-13 * scale);
    }
}

#[test]
fn full_solve_middle_block_is_diagonal() {
    let k = 16;
    let t = reduced_t(k);
    let mut r = rng(11);
    let b = uniform_vec(&mut r, 3 * k);
    let mut p_hat = uniform_vec(&mut r, 3 * k);
    for x in &mut p_hat[2 * k..] {
        *x += 2.0;
    }
    let sol = solve_t(&t, &b, &p_hat).unwrap();
    for j in 0..k {
        let expected = (b[k + j] + sol.gamma * p_hat[k + j]) / t.c4;
        assert!((sol.v[k + j] - expected).abs() <= 1e-15 * expected.abs().max(1e-300) * 4.0);
    }
    assert!(sol.orthogonality <= 1e-12 * sup(&sol.v));
    // last block of b + γ p̂ sums to zero
    let total: f64 = (0..k).map(|j| b[2 * k + j] + sol.gamma * p_hat[2 * k + j]).sum();
    assert!(total.abs() <= 1e-13 * sup(&b));
}

#[test]
fn constrained_solve_recovers_a_known_solution() {
    let k = 8;
    let t = reduced_t(k);
    let mut r = rng(3);
    let mut v = uniform_vec(&mut r, 2 * k);
    let mean = v[k..].iter().sum::<f64>() / k as f64;
    v[k..].iter_mut().for_each(|x| *x -= mean);
    let b = t.apply_prime(&v);
    let sol = solve_tprime(&t, &b).unwrap();
    assert!(sol.gamma.abs() <= 1e-6 * sup(&b), "{}", sol.gamma);
    let err = sol.v.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6 * sup(&v), "{err}");
}

#[test]
fn shape_errors() {
    let t = reduced_t(8);
    assert!(solve_tprime(&t, &[0.0; 15]).is_err());
    assert!(solve_t(&t, &[0.0; 24], &[0.0; 24]).is_err());
}

proptest! {
    #[test]
    fn dft_matvec_matches_dense(row in complex_vec(), seed in 0u64..1000) {
        let k = row.len();
        let mut r = rng(seed);
        let x: Vec<Complex64> = uniform_vec(&mut r, 2 * k).chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let c = Circulant::new(row);
        let a = c.matvec_dense(&x);
        let b = c.matvec_dft(&x);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).norm() < 1e-12 * k as f64);
        }
    }

    #[test]
    fn fft_spectrum_matches_direct(row in complex_vec()) {
        let c = Circulant::new(row);
        let a = eigen_dft(&c);
        let b = eigen_dft_direct(&c);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).norm() < 1e-12 * c.len() as f64);
        }
    }

    #[test]
    fn cyclic_relabeling_commutes(row in proptest::collection::vec(-1.0f64..1.0, 2..40), shift in 0usize..40, seed in 0u64..1000) {
        let k = row.len();
        let s = shift % k;
        let c = Circulant::from_real(&row);
        let mut r = rng(seed);
        let x = uniform_vec(&mut r, k);
        let mut xs = x.clone();
        xs.rotate_left(s);
        let mut ax = c.matvec_real(&x);
        ax.rotate_left(s);
        let axs = c.matvec_real(&xs);
        for (p, q) in ax.iter().zip(&axs) {
            prop_assert!((p - q).abs() < 1e-13 * k as f64);
        }
    }
}
