use nalgebra::{Complex, Matrix3};
use proptest::prelude::*;
use ringbump::balance::solve_finite;
use ringbump::bubbles::gamma_constants;
use ringbump::nondegen::{
    assemble_dense, build_blocks, circulant_action, det3_hat, eigen_asymptotic, eigen_blocks, inverse_diagonal,
    kernel_decomposition_weights, scaled_det, FrequencyTriple, NondegenBlocks,
};
use ringbump::ProblemParams;

fn blocks(k: usize) -> NondegenBlocks {
    let p = ProblemParams {
        k,
        ..ProblemParams::default()
    };
    let g = gamma_constants(5, 2.5, 1e-10).unwrap();
    build_blocks(&p, &g, &solve_finite(&p, &g).unwrap()).unwrap()
}

fn hermitian(a: f64, b: f64, c: f64, e: f64, f: f64, g: f64) -> Matrix3<Complex<f64>> {
    let r = |x: f64| Complex::new(x, 0.0);
    let i = |x: f64| Complex::new(0.0, x);
    Matrix3::new(r(a), r(b), i(c), r(b), r(f), i(e), i(-c), i(-e), r(g))
}

fn block_of(t: &FrequencyTriple) -> Matrix3<Complex<f64>> {
    hermitian(t.a, t.b, t.c, t.e, t.f, t.g_eig)
}

#[test]
fn assembled_matrix_is_symmetric() {
    let m = assemble_dense(&blocks(12), false);
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate().take(i) {
            assert!((x - m[j][i]).abs() <= 1e-14 * scale, "({i}, {j})");
        }
    }
}

#[test]
fn rotation_fields_are_annihilated() {
    for k in [12, 24] {
        let b = blocks(k);
        let weights = kernel_decomposition_weights(k, b.n);
        assert_eq!(weights.len(), 2 * b.n - 3);
        let scale = b.h[0].first_row.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        for (block, w) in &weights {
            let c = match block {
                2 => &b.g,
                i if *i >= 3 => &b.h[0],
                _ => continue,
            };
            let out = circulant_action(c, w);
            let worst = out.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let row_scale = c.first_row.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(scale);
            assert!(worst <= 1e-12 * row_scale * k as f64, "k={k} block {block}: {worst}");
        }
    }
}

#[test]
fn inverse_diagonal_matches_dense_inverse() {
    let b = blocks(16);
    for t in eigen_blocks(&b).iter().skip(1) {
        let inv = block_of(t).try_inverse().expect("nonsingular frequency block");
        let (a, g) = inverse_diagonal(t);
        assert!((inv[(0, 0)].re - a).abs() <= 1e-8 * a.abs(), "nu={}", t.nu);
        assert!((inv[(2, 2)].re - g).abs() <= 1e-8 * g.abs(), "nu={}", t.nu);
    }
}

#[test]
fn nonzero_frequencies_are_nondegenerate() {
    for k in [16, 32] {
        let b = blocks(k);
        for t in eigen_blocks(&b).iter().skip(1) {
            assert!(scaled_det(&b, t) > 0.0, "k={k} nu={}", t.nu);
        }
    }
}

#[test]
fn interaction_eigenvalues_follow_lattice_asymptotics() {
    let b = blocks(64);
    let tr = eigen_blocks(&b);
    for nu in [8, 16, 24] {
        let a = eigen_asymptotic(&b, nu).unwrap();
        let t = &tr[nu];
        for (got, want) in [(t.g_eig, a.g_eig), (t.c, a.c), (t.e, a.e)] {
            assert!(((got - want) / want).abs() < 5e-2, "nu={nu}: {got} vs {want}");
        }
    }
}

proptest! {
    #[test]
    fn determinant_matches_complex_lu(
        a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
        e in -5.0f64..5.0, f in -5.0f64..5.0, g in -5.0f64..5.0,
    ) {
        let d = hermitian(a, b, c, e, f, g).determinant();
        let ours = det3_hat(a, b, c, e, f, g);
        prop_assert!(d.im.abs() < 1e-10);
        prop_assert!((d.re - ours).abs() < 1e-10 * (1.0 + ours.abs()));
    }
}
