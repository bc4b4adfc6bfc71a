#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Partial sums of `Σ_{j≥1} w(j) / j^s` for the `(1 - cos)`, `sin` and `cos` series,
/// summed from the tail forward.
pub fn direct_series(x: f64, n: usize, terms: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    for j in (1..=terms).rev() {
        let jf = j as f64;
        let (s, c) = (jf * x).sin_cos();
        out[0] += (1.0 - c) / jf.powi(n as i32);
        out[1] += s / jf.powi(n as i32 - 1);
        out[2] += c / jf.powi(n as i32 - 2);
    }
    out
}

pub fn zeta_direct(s: f64) -> f64 {
    // Euler-Maclaurin tail after N terms
    let n = 1000usize;
    let nf = n as f64;
    let head: f64 = (1..n).rev().map(|j| (j as f64).powf(-s)).sum();
    head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0)
}

pub fn bubble_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

/// `∫_{R^n} |y_1|^a (1+|y|^2)^{-b} dy` through the product of a one-dimensional and an
/// `(n-1)`-dimensional Beta integral.
pub fn beta_axis_moment(n: usize, a: f64, b: f64) -> f64 {
    let beta = |x: f64, y: f64| gamma(x) * gamma(y) / gamma(x + y);
    let nf = n as f64;
    let m = nf - 1.0;
    // |y'| integral at fixed y_1 scales (1+y_1^2)^{(n-1)/2 - b}
    let inner = PI.powf(m / 2.0) / gamma(m / 2.0) * beta(m / 2.0, b - m / 2.0);
    let outer = beta((a + 1.0) / 2.0, b - m / 2.0 - (a + 1.0) / 2.0);
    inner * outer
}

pub struct GammaOracle {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
}

pub fn gamma_beta_oracle(n: usize, m: f64) -> GammaOracle {
    let nf = n as f64;
    let p = (nf + 2.0) / (nf - 2.0);
    let cp = bubble_constant(n).powf(p + 1.0);
    let ball = beta_axis_moment(n, 0.0, (nf + 2.0) / 2.0);
    let split = beta_axis_moment(n, m, nf) - beta_axis_moment(n, m, nf + 1.0) - beta_axis_moment(n, m + 2.0, nf + 1.0);
    GammaOracle {
        g1: (nf - 2.0) * cp * ball,
        g2: (nf - 2.0) * m * cp * beta_axis_moment(n, m, nf + 1.0),
        g3: m / (p + 1.0) * cp * beta_axis_moment(n, m, nf),
        g4: (nf - 2.0) / 2.0 * m * cp * split,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Dense circulant with entry `(i, j) = row[(j - i) mod k]`.
pub fn dense_circulant(row: &[Complex64]) -> DMatrix<Complex64> {
    let k = row.len();
    DMatrix::from_fn(k, k, |i, j| row[(j + k - i) % k])
}

pub fn dense_eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    Schur::new(m)
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

/// Greedy matching distance between two multisets; an upper bound of the optimal one.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `Σ a_i b_i` with error-free products and a compensated running sum.
pub fn exact_dot(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (x, y) in a.into_iter().zip(b) {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let (t, te) = two_sum(s, p);
        s = t;
        c += te + pe;
    }
    s + c
}

/// Running sum of exact products, each product kept as a double-double pair.
#[derive(Default)]
pub struct ExactSum {
    hi: f64,
    lo: f64,
}

impl ExactSum {
    pub fn add(&mut self, x: f64) {
        let (t, te) = two_sum(self.hi, x);
        self.hi = t;
        self.lo += te;
    }

    /// Adds `a * b * c` with both roundings captured.
    pub fn add_prod3(&mut self, a: f64, b: f64, c: f64) {
        let ab = a * b;
        let ab_err = a.mul_add(b, -ab);
        let p = ab * c;
        self.add(p);
        self.lo += ab.mul_add(c, -p) + ab_err * c;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// `‖M v - rhs‖_∞` with each row formed by `exact_dot`.
pub fn exact_residual(m: &[Vec<f64>], v: &[f64], rhs: &[f64]) -> f64 {
    m.iter()
        .zip(rhs)
        .map(|(row, r)| exact_dot(row.iter().copied().chain([-1.0]), v.iter().copied().chain([*r])).abs())
        .fold(0.0, f64::max)
}

/// Central-difference errors at `h` and `h/10` and their ratio.
pub struct FdRatio {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
}

pub fn fd_ratio(f: impl Fn(f64) -> f64, derivative: f64, h: f64) -> FdRatio {
    let cd = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let coarse = (cd(h) - derivative).abs();
    let fine = (cd(h / 10.0) - derivative).abs();
    FdRatio {
        coarse,
        fine,
        ratio: coarse / fine,
    }
}

/// `fd_ratio` for a vector-valued map, measured in the sup norm.
pub fn fd_ratio_vec(f: impl Fn(f64) -> Vec<f64>, derivative: &[f64], h: f64) -> FdRatio {
    let err = |h: f64| {
        let (a, b) = (f(h), f(-h));
        a.iter()
            .zip(&b)
            .zip(derivative)
            .map(|((x, y), d)| ((x - y) / (2.0 * h) - d).abs())
            .fold(0.0, f64::max)
    };
    let coarse = err(h);
    let fine = err(h / 10.0);
    FdRatio {
        coarse,
        fine,
        ratio: coarse / fine,
    }
}

pub fn to_real_dense(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}
