//! Circulant matrices, the reduced block matrix `T`, and its constrained solves.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bubbles::{kernel_self_products, GammaConstants};
use crate::error::{domain, Error, Result};
use crate::model::{frame, half_angle_sine, Configuration, DerivedScales, ProblemParams};
use crate::specfun::{eval_all, zeta};

/// `k × k` circulant matrix stored by its first row: entry `(i, j)` is `row[(j - i) mod k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    pub first_row: Vec<Complex64>,
}

impl Circulant {
    pub fn new(first_row: Vec<Complex64>) -> Self {
        Self { first_row }
    }

    pub fn from_real(row: &[f64]) -> Self {
        Self {
            first_row: row.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.first_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_row.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let k = self.len();
        self.first_row[(j + k - i % k) % k]
    }

    pub fn dense(&self) -> Vec<Vec<Complex64>> {
        let k = self.len();
        (0..k).map(|i| (0..k).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Real part of the first row.
    pub fn real_row(&self) -> Vec<f64> {
        self.first_row.iter().map(|z| z.re).collect()
    }

    /// `A x` by direct summation.
    pub fn matvec_dense(&self, x: &[Complex64]) -> Vec<Complex64> {
        let k = self.len();
        (0..k).map(|i| (0..k).map(|j| self.entry(i, j) * x[j]).sum()).collect()
    }

    /// `A x` for real data with a real first row, by direct summation.
    pub fn matvec_real(&self, x: &[f64]) -> Vec<f64> {
        let k = self.len();
        let row = self.real_row();
        (0..k)
            .map(|i| (0..k).map(|j| row[(j + k - i) % k] * x[j]).sum())
            .collect()
    }

    /// `A x` through the spectrum.
    pub fn matvec_dft(&self, x: &[Complex64]) -> Vec<Complex64> {
        let k = self.len();
        let eta = eigen_dft(self);
        let mut hat = x.to_vec();
        fft(&mut hat, false);
        for (h, e) in hat.iter_mut().zip(&eta) {
            *h *= e;
        }
        fft(&mut hat, true);
        hat.iter().map(|z| z / k as f64).collect()
    }
}

/// In-place transform: `inverse = false` gives `Σ x_l e^{-2πiνl/k}`, `true` the `+` sign, unnormalised.
pub(crate) fn fft(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

/// Eigenvalues `η_ν = Σ_l y_l e^{2πiνl/k}` by FFT.
pub fn eigen_dft(c: &Circulant) -> Vec<Complex64> {
    let mut data = c.first_row.clone();
    if !data.is_empty() {
        fft(&mut data, true);
    }
    data
}

/// Eigenvalues by the `O(k^2)` defining sum.
pub fn eigen_dft_direct(c: &Circulant) -> Vec<Complex64> {
    let k = c.len();
    (0..k)
        .map(|nu| {
            c.first_row
                .iter()
                .enumerate()
                .map(|(l, y)| y * Complex64::from_polar(1.0, 2.0 * PI * ((nu * l) % k) as f64 / k as f64))
                .sum()
        })
        .collect()
}

/// Block matrix `[[c1 A1 + c2 I, 0, A2], [0, c4 I, 0], [A2/2, 0, c3 A3]]`.
#[derive(Debug, Clone)]
pub struct ReducedMatrixT {
    pub n: usize,
    pub m: f64,
    pub k: usize,
    pub a1: Circulant,
    pub a2: Circulant,
    pub a3: Circulant,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Real spectrum of `A1`.
    pub lambda1: Vec<f64>,
    /// Imaginary parts of the spectrum of `A2`.
    pub lambda2: Vec<f64>,
    /// Real spectrum of `A3`.
    pub lambda3: Vec<f64>,
}

pub fn build_t(
    params: &ProblemParams,
    gammas: &GammaConstants,
    lambda: f64,
    ring_radius: f64,
) -> Result<ReducedMatrixT> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    let nf = n as f64;
    let m = params.m;
    let mut r1 = vec![0.0; k];
    let mut r2 = vec![0.0; k];
    let mut r3 = vec![0.0; k];
    for l in 1..k {
        let s = half_angle_sine(k, l);
        let s2 = (2.0 * PI * l as f64 / k as f64).sin();
        r1[l] = s.powf(2.0 - nf);
        r2[l] = s2 * s.powf(-nf);
        r3[l] = (1.0 - (nf - 2.0) / (nf - 1.0) * s * s) * s.powf(-nf);
    }
    r3[0] = -r3[1..].iter().sum::<f64>();
    let sum: f64 = r1.iter().sum();
    let two_r = 2.0 * ring_radius;
    let c1 = two_r;
    let c2 = (nf - 2.0 - 2.0 * m) / (nf - 2.0) * two_r * sum;
    let c3 = (nf - 1.0) / (nf - 2.0) / ring_radius;
    let c4 = 2.0 * params.c0 * params.mu().powf(-m) * gammas.g2 * lambda.powf(nf - m)
        / ((nf - 2.0) * gammas.g1 * two_r.powf(1.0 - nf));
    let (a1, a2, a3) = (
        Circulant::from_real(&r1),
        Circulant::from_real(&r2),
        Circulant::from_real(&r3),
    );
    let lambda1 = eigen_dft(&a1).iter().map(|z| z.re).collect();
    let lambda2 = eigen_dft(&a2).iter().map(|z| z.im).collect();
    let lambda3 = eigen_dft(&a3).iter().map(|z| z.re).collect();
    Ok(ReducedMatrixT {
        n,
        m,
        k,
        a1,
        a2,
        a3,
        c1,
        c2,
        c3,
        c4,
        lambda1,
        lambda2,
        lambda3,
    })
}

impl ReducedMatrixT {
    /// `T v` for `v = (v0, v1, v2)` by direct circulant products.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let k = self.k;
        let (v0, v1, v2) = (&v[..k], &v[k..2 * k], &v[2 * k..]);
        let a1v0 = self.a1.matvec_real(v0);
        let a2v0 = self.a2.matvec_real(v0);
        let a2v2 = self.a2.matvec_real(v2);
        let a3v2 = self.a3.matvec_real(v2);
        let mut out = vec![0.0; 3 * k];
        for j in 0..k {
            out[j] = self.c1 * a1v0[j] + self.c2 * v0[j] + a2v2[j];
            out[k + j] = self.c4 * v1[j];
            out[2 * k + j] = 0.5 * a2v0[j] + self.c3 * a3v2[j];
        }
        out
    }

    /// `T' v` on the `(0, 2)` blocks.
    pub fn apply_prime(&self, v: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut full = vec![0.0; 3 * k];
        full[..k].copy_from_slice(&v[..k]);
        full[2 * k..].copy_from_slice(&v[k..]);
        let t = self.apply(&full);
        let mut out = t[..k].to_vec();
        out.extend_from_slice(&t[2 * k..]);
        out
    }

    /// `T v - rhs` with compensated accumulation, on the full `3k` system.
    pub fn residual(&self, v: &[f64], rhs: &[f64]) -> Vec<f64> {
        let k = self.k;
        let (r1, r2, r3) = (self.a1.real_row(), self.a2.real_row(), self.a3.real_row());
        let mut out = vec![0.0; 3 * k];
        for i in 0..k {
            let mut top = Dot2::default();
            let mut bottom = Dot2::default();
            top.add_prod(self.c2, v[i]);
            top.add_prod(-1.0, rhs[i]);
            bottom.add_prod(-1.0, rhs[2 * k + i]);
            for j in 0..k {
                let l = (j + k - i) % k;
                top.add_prod3(self.c1, r1[l], v[j]);
                top.add_prod(r2[l], v[2 * k + j]);
                bottom.add_prod(0.5 * r2[l], v[j]);
                bottom.add_prod3(self.c3, r3[l], v[2 * k + j]);
            }
            out[i] = top.value();
            let mut mid = Dot2::default();
            mid.add_prod(self.c4, v[k + i]);
            mid.add_prod(-1.0, rhs[k + i]);
            out[k + i] = mid.value();
            out[2 * k + i] = bottom.value();
        }
        out
    }

    /// `T' v - rhs` on the `(0, 2)` blocks.
    pub fn residual_prime(&self, v: &[f64], rhs: &[f64]) -> Vec<f64> {
        let k = self.k;
        let lift = |x: &[f64]| {
            let mut full = vec![0.0; 3 * k];
            full[..k].copy_from_slice(&x[..k]);
            full[2 * k..].copy_from_slice(&x[k..]);
            full
        };
        let r = self.residual(&lift(v), &lift(rhs));
        let mut out = r[..k].to_vec();
        out.extend_from_slice(&r[2 * k..]);
        out
    }

    /// Dense `3k × 3k` matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let k = self.k;
        let mut out = vec![vec![0.0; 3 * k]; 3 * k];
        for i in 0..k {
            for j in 0..k {
                out[i][j] = self.c1 * self.a1.entry(i, j).re + if i == j { self.c2 } else { 0.0 };
                out[i][2 * k + j] = self.a2.entry(i, j).re;
                out[2 * k + i][j] = 0.5 * self.a2.entry(i, j).re;
                out[2 * k + i][2 * k + j] = self.c3 * self.a3.entry(i, j).re;
            }
            out[k + i][k + i] = self.c4;
        }
        out
    }

    /// Per-frequency `2 × 2` block of `T'`.
    pub fn block(&self, nu: usize) -> [[Complex64; 2]; 2] {
        let l2 = Complex64::new(0.0, self.lambda2[nu]);
        [
            [Complex64::new(self.c1 * self.lambda1[nu] + self.c2, 0.0), l2],
            [0.5 * l2, Complex64::new(self.c3 * self.lambda3[nu], 0.0)],
        ]
    }
}

/// `D_ν = (c1 λ1 + c2) c3 λ3 - λ2^2 / 2` with `λ2` purely imaginary.
pub fn det_dnu(t: &ReducedMatrixT, nu: usize) -> f64 {
    (t.c1 * t.lambda1[nu] + t.c2) * t.c3 * t.lambda3[nu] + 0.5 * t.lambda2[nu] * t.lambda2[nu]
}

/// Leading-order prediction of `D_ν`, with `g''(0) = ζ(n-2)` in the `c2` contribution.
pub fn det_dnu_asymptotic(t: &ReducedMatrixT, nu: usize) -> Result<f64> {
    let nf = t.n as f64;
    let x = 2.0 * PI * nu as f64 / t.k as f64;
    let [g, g1, g2] = eval_all(x, t.n, 1e-13)?.map(|e| e.value);
    let scale = 8.0 * (t.k as f64 / PI).powf(2.0 * nf - 2.0);
    Ok(scale
        * (g1 * g1 - (nf - 1.0) / (nf - 2.0) * g * g2
            + (2.0 * t.m + 2.0 - nf) * (nf - 1.0) / (nf - 2.0).powi(2) * zeta(nf - 2.0) * g))
}

/// Leading-order `(λ1, Im λ2, λ3)` at frequency `ν`.
pub fn t_eigen_asymptotic(n: usize, k: usize, nu: usize) -> Result<[f64; 3]> {
    let nf = n as f64;
    let x = 2.0 * PI * nu as f64 / k as f64;
    let [g, g1, g2] = eval_all(x, n, 1e-13)?.map(|e| e.value);
    let kp = k as f64 / PI;
    Ok([
        2.0 * kp.powf(nf - 2.0) * g2,
        4.0 * kp.powf(nf - 1.0) * g1,
        -2.0 * kp.powf(nf) * g,
    ])
}

/// Solution of a constrained system `M v = b + γ p`, `v ⟂ p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedSolution {
    pub v: Vec<f64>,
    pub gamma: f64,
    /// `‖M v - b - γ p‖_∞`.
    pub residual: f64,
    /// `|v · p|`.
    pub orthogonality: f64,
}

/// Error-free transformations for compensated dot products.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Sum of `Σ a_i b_i` in twice the working precision.
#[derive(Default, Clone, Copy)]
struct Dot2 {
    sum: f64,
    err: f64,
}

impl Dot2 {
    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, pe) = two_prod(a, b);
        let (s, se) = two_sum(self.sum, p);
        self.sum = s;
        self.err += pe + se;
    }

    /// `a * b * c` without rounding the partial product.
    fn add_prod3(&mut self, a: f64, b: f64, c: f64) {
        let (ab, ab_err) = two_prod(a, b);
        self.add_prod(ab, c);
        self.err += ab_err * c;
    }

    fn value(self) -> f64 {
        self.sum + self.err
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// One pass of the per-frequency solve; returns `(v, γ)`.
fn tprime_pass(t: &ReducedMatrixT, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = t.k;
    let mut r0: Vec<Complex64> = b[..k].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut r2: Vec<Complex64> = b[k..].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft(&mut r0, false);
    fft(&mut r2, false);
    let mut y0 = vec![Complex64::new(0.0, 0.0); k];
    let mut y2 = vec![Complex64::new(0.0, 0.0); k];
    // ν = 0: only the first row is invertible, the second fixes γ
    let gamma = -r2[0].re / k as f64;
    let d0 = t.c1 * t.lambda1[0] + t.c2;
    if d0 == 0.0 {
        return Err(Error::SingularFrequency { nu: 0 });
    }
    y0[0] = r0[0] / d0;
    for nu in 1..k {
        let [[a, bb], [c, d]] = t.block(nu);
        let det = a * d - bb * c;
        if det.norm() == 0.0 || !det.norm().is_finite() {
            return Err(Error::SingularFrequency { nu });
        }
        y0[nu] = (d * r0[nu] - bb * r2[nu]) / det;
        y2[nu] = (a * r2[nu] - c * r0[nu]) / det;
    }
    fft(&mut y0, true);
    fft(&mut y2, true);
    let mut v: Vec<f64> = y0.iter().map(|z| z.re / k as f64).collect();
    let mut v2: Vec<f64> = y2.iter().map(|z| z.re / k as f64).collect();
    let mean = v2.iter().sum::<f64>() / k as f64;
    v2.iter_mut().for_each(|x| *x -= mean);
    v.extend_from_slice(&v2);
    Ok((v, gamma))
}

/// Refinement sweeps applied after the first solve.
const REFINE_STEPS: usize = 3;

/// Solve `T' v = b + γ p'` with `p' = (0, 1)` and `v ⟂ p'`, one frequency at a time.
///
/// The first pass is followed by iterative refinement against a compensated residual.
pub fn solve_tprime(t: &ReducedMatrixT, b: &[f64]) -> Result<ConstrainedSolution> {
    let k = t.k;
    if b.len() != 2 * k {
        return Err(Error::Shape {
            expected: 2 * k,
            got: b.len(),
        });
    }
    let (mut v, mut gamma) = tprime_pass(t, b)?;
    let target = |gamma: f64| -> Vec<f64> { (0..2 * k).map(|i| b[i] + if i >= k { gamma } else { 0.0 }).collect() };
    let mut res = t.residual_prime(&v, &target(gamma));
    let mut best = sup(&res);
    for _ in 0..REFINE_STEPS {
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let (dv, dg) = tprime_pass(t, &neg)?;
        let trial: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + b).collect();
        let trial_res = t.residual_prime(&trial, &target(gamma + dg));
        let size = sup(&trial_res);
        if size >= best {
            break;
        }
        v = trial;
        gamma += dg;
        res = trial_res;
        best = size;
    }
    let orthogonality = v[k..].iter().sum::<f64>().abs();
    Ok(ConstrainedSolution {
        v,
        gamma,
        residual: best,
        orthogonality,
    })
}

/// Solve `T v = b + γ p̂` with `v ⟂ p = (0, 0, 1)`.
pub fn solve_t(t: &ReducedMatrixT, b: &[f64], p_hat: &[f64]) -> Result<ConstrainedSolution> {
    let k = t.k;
    for x in [b, p_hat] {
        if x.len() != 3 * k {
            return Err(Error::Shape {
                expected: 3 * k,
                got: x.len(),
            });
        }
    }
    let pp: f64 = p_hat[2 * k..].iter().sum();
    if pp == 0.0 {
        return Err(domain("p_hat", "has no component along the rotation direction"));
    }
    // columns of T sum to zero in the last block, so p·(b + γ p̂) = 0
    let gamma = -b[2 * k..].iter().sum::<f64>() / pp;
    let rhs: Vec<f64> = b.iter().zip(p_hat).map(|(x, y)| x + gamma * y).collect();
    let mut reduced = rhs[..k].to_vec();
    reduced.extend_from_slice(&rhs[2 * k..]);
    let inner = solve_tprime(t, &reduced)?;
    let mut v = inner.v[..k].to_vec();
    v.extend(rhs[k..2 * k].iter().map(|x| x / t.c4));
    v.extend_from_slice(&inner.v[k..]);
    let residual = sup(&t.residual(&v, &rhs));
    let orthogonality = v[2 * k..].iter().sum::<f64>().abs();
    Ok(ConstrainedSolution {
        v,
        gamma,
        residual,
        orthogonality,
    })
}

/// Largest `|T v - b - γ p|` relative to `‖b‖_∞`.
pub fn relative_residual(sol: &ConstrainedSolution, b: &[f64]) -> f64 {
    sol.residual / sup(b).max(f64::MIN_POSITIVE)
}

/// Gram matrix of the kernel directions `∂W/∂q` against `U^{p-1} ∂W/∂q`, at leading order.
///
/// Diagonal blocks come from the closed-form self products; cross-bubble entries keep the
/// `Z0`-`Z0` and `Z0`-gradient interactions and drop gradient-gradient ones, which are of
/// lower order. Rows and columns are ordered `(λ, f, g)`.
pub fn kernel_gram(
    scales: &DerivedScales,
    lambda: f64,
    gammas: &GammaConstants,
    q: &Configuration,
) -> Result<Vec<Vec<f64>>> {
    q.check_len(scales.k)?;
    let (n, k) = (scales.n, scales.k);
    let nf = n as f64;
    let p = scales.p;
    let g1 = gammas.g1;
    let lam: Vec<f64> = q.lambda.iter().map(|x| lambda + x).collect();
    let mut out = vec![vec![0.0; 3 * k]; 3 * k];
    let planar = planar_centers(scales, q);
    for j in 0..k {
        let (z0, z1) = kernel_self_products(n, lam[j]);
        out[j][j] = z0;
        out[k + j][k + j] = z1;
        out[2 * k + j][2 * k + j] = z1;
    }
    for j in 0..k {
        let (nj, tj) = frame(j, k, q.alpha);
        for l in 0..k {
            if l == j {
                continue;
            }
            let dx = [planar[j][0] - planar[l][0], planar[j][1] - planar[l][1]];
            let rho = dx[0].hypot(dx[1]);
            if rho == 0.0 {
                return Err(Error::CoincidentCenters(j, l));
            }
            // ∫ U_j^{p-1} Z_{j,0} Z_{l,0}
            out[l][j] = (nf - 2.0) / (4.0 * p) * g1 * (lam[j] * lam[l]).powf(-nf / 2.0) * rho.powf(2.0 - nf);
            // ∫ U_j^{p-1} (-∇U_j · e) Z_{l,0}, e ∈ {n_j, t_j}
            let s =
                -(nf - 2.0) / (2.0 * p) * g1 * lam[j].powf(-(nf - 2.0) / 2.0) * lam[l].powf(-nf / 2.0) * rho.powf(-nf);
            out[l][k + j] = s * (dx[0] * nj[0] + dx[1] * nj[1]);
            out[l][2 * k + j] = s * (dx[0] * tj[0] + dx[1] * tj[1]);
            // ∫ U_j^{p-1} Z_{j,0} (-∇U_l · e), e ∈ {n_l, t_l}, by symmetry of the linearised operator
            let (nl, tl) = frame(l, k, q.alpha);
            let s2 =
                -(nf - 2.0) / (2.0 * p) * g1 * lam[l].powf(-(nf - 2.0) / 2.0) * lam[j].powf(-nf / 2.0) * rho.powf(-nf);
            out[k + l][j] = -s2 * (dx[0] * nl[0] + dx[1] * nl[1]);
            out[2 * k + l][j] = -s2 * (dx[0] * tl[0] + dx[1] * tl[1]);
        }
    }
    Ok(out)
}

/// Planar centers relative to the origin, `(R + f_j) n_j + g_j t_j`.
pub(crate) fn planar_centers(scales: &DerivedScales, q: &Configuration) -> Vec<[f64; 2]> {
    (0..scales.k)
        .map(|j| {
            let (nj, tj) = frame(j, scales.k, q.alpha);
            let a = scales.ring_radius + q.f[j];
            [a * nj[0] + q.g[j] * tj[0], a * nj[1] + q.g[j] * tj[1]]
        })
        .collect()
}

/// Rotation direction `p̂ = M0 (R p + q^⊥)` with `q^⊥ = (0, -g, f)`.
pub fn p_hat(scales: &DerivedScales, lambda: f64, gammas: &GammaConstants, q: &Configuration) -> Result<Vec<f64>> {
    let k = scales.k;
    let gram = kernel_gram(scales, lambda, gammas, q)?;
    let mut dir = vec![0.0; 3 * k];
    for j in 0..k {
        dir[k + j] = -q.g[j];
        dir[2 * k + j] = scales.ring_radius + q.f[j];
    }
    Ok(gram
        .iter()
        .map(|row| row.iter().zip(&dir).map(|(a, b)| a * b).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_shift_spectra() {
        let mut row = vec![0.0; 8];
        row[0] = 1.0;
        for e in eigen_dft(&Circulant::from_real(&row)) {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let mut row = vec![0.0; 8];
        row[1] = 1.0;
        let eta = eigen_dft(&Circulant::from_real(&row));
        for (nu, e) in eta.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, 2.0 * PI * nu as f64 / 8.0);
            assert!((e - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn entry_convention() {
        let c = Circulant::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(c.entry(1, 0).re, 3.0);
        assert_eq!(c.entry(2, 0).re, 2.0);
        assert_eq!(c.entry(1, 2).re, 2.0);
    }

    #[test]
    fn direct_and_fft_spectra_agree() {
        let row: Vec<f64> = (0..13).map(|i| ((i * 7 % 5) as f64).sin()).collect();
        let c = Circulant::from_real(&row);
        for (a, b) in eigen_dft(&c).iter().zip(eigen_dft_direct(&c)) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
