//! Circulant blocks of the linearised operator at a symmetric `k`-bump solution, their
//! spectra, and the per-frequency determinants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::balance::FiniteSolution;
use crate::bubbles::{zeta_constant, GammaConstants};
use crate::circulant::{eigen_dft, Circulant};
use crate::error::{domain, Result};
use crate::model::{half_angle_sine, ProblemParams};
use crate::specfun::eval_all;

/// Circulant blocks `A, B, C, E, F, G` of the `(Z^0, Z^1, Z^2)` part and `H_α`, `α = 3..=n`.
#[derive(Debug, Clone)]
pub struct NondegenBlocks {
    pub n: usize,
    pub m: f64,
    pub k: usize,
    pub mu: f64,
    pub r: f64,
    pub lambda: f64,
    pub a: Circulant,
    pub b: Circulant,
    pub c: Circulant,
    pub e: Circulant,
    pub f: Circulant,
    pub g: Circulant,
    pub h: Vec<Circulant>,
    pub zeta: f64,
    gamma1: f64,
    /// `c0 μ^{-m} γ3 Λ^{-m-2}`.
    window_a: f64,
}

pub fn build_blocks(params: &ProblemParams, gammas: &GammaConstants, sol: &FiniteSolution) -> Result<NondegenBlocks> {
    params.validate()?;
    let (n, k, m) = (params.n, params.k, params.m);
    let nf = n as f64;
    let mu = params.mu();
    let (r, lam) = (sol.r, sol.lambda0);
    if !(r > 0.0 && lam > 0.0) {
        return Err(domain("finite solution", format!("need r, Λ0 > 0, got ({r}, {lam})")));
    }
    let wmu = params.c0 * mu.powf(-m);
    let g1 = gammas.g1;
    let two_r = 2.0 * r;
    let zeta = zeta_constant(n, m, params.c0)?;
    // interaction prefactors
    let xa = (nf - 2.0) / 4.0 * g1 * lam.powf(-nf) * two_r.powf(2.0 - nf);
    let xb = (nf - 2.0) / 4.0 * g1 * lam.powf(1.0 - nf) * two_r.powf(1.0 - nf);
    let y = g1 * lam.powf(2.0 - nf) * two_r.powf(-nf);

    let mut ra = vec![0.0; k];
    let mut rb = vec![0.0; k];
    let mut rc = vec![0.0; k];
    let mut re = vec![0.0; k];
    let mut rf = vec![0.0; k];
    let mut rg = vec![0.0; k];
    let mut rh = vec![0.0; k];
    for l in 1..k {
        let s = half_angle_sine(k, l);
        let theta = 2.0 * PI * l as f64 / k as f64;
        let (sn, sn2) = (s.powf(-nf), s.powf(2.0 - nf));
        ra[l] = xa * sn2;
        rb[l] = -xb * sn2;
        rc[l] = -xb * theta.sin() * sn;
        re[l] = 2.0 * (nf - 2.0) / 4.0 * y * theta.sin() * sn;
        rf[l] = y * (sn + (nf - 2.0) * sn2);
        rg[l] = y * ((1.0 - nf) * sn + (nf - 2.0) * sn2);
        rh[l] = 2.0 * y * sn;
    }
    let sum_sn2: f64 = (1..k).map(|l| half_angle_sine(k, l).powf(2.0 - nf)).sum();
    let window_a = wmu * gammas.g3 * lam.powf(-m - 2.0);
    ra[0] = (nf - 2.0 * m - 2.0) / 2.0 * window_a;
    rb[0] = -(m - 2.0) * wmu * sol.r_offset * gammas.g2 * lam.powf(1.0 - m)
        - m * wmu * gammas.g4 * lam.powf(-1.0 - m) / r
        + 2.0 * xb * sum_sn2;
    rf[0] = mu.powf(-m) * zeta;
    rg[0] = -rg[1..].iter().sum::<f64>();
    rh[0] = -(1..k)
        .map(|l| (2.0 * PI * l as f64 / k as f64).cos() * rh[l])
        .sum::<f64>();
    let h = Circulant::from_real(&rh);
    Ok(NondegenBlocks {
        n,
        m,
        k,
        mu,
        r,
        lambda: lam,
        a: Circulant::from_real(&ra),
        b: Circulant::from_real(&rb),
        c: Circulant::from_real(&rc),
        e: Circulant::from_real(&re),
        f: Circulant::from_real(&rf),
        g: Circulant::from_real(&rg),
        h: vec![h; n - 2],
        zeta,
        gamma1: g1,
        window_a,
    })
}

/// Eigenvalues of every block at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyTriple {
    pub nu: usize,
    pub a: f64,
    pub b: f64,
    /// Imaginary part of the eigenvalue of `C`.
    pub c: f64,
    /// Imaginary part of the eigenvalue of `E`.
    pub e: f64,
    pub f: f64,
    pub g_eig: f64,
    /// Eigenvalue shared by all `H_α`.
    pub h: f64,
    pub det_hat: f64,
}

/// Determinant of `[[a, b, ic], [b, f, ie], [-ic, -ie, g]]`.
pub fn det3_hat(a: f64, b: f64, c: f64, e: f64, f: f64, g: f64) -> f64 {
    a * f * g - a * e * e - b * b * g + 2.0 * b * c * e - f * c * c
}

pub fn eigen_blocks(blocks: &NondegenBlocks) -> Vec<FrequencyTriple> {
    let re = |c: &Circulant| eigen_dft(c).into_iter().map(|z| z.re).collect::<Vec<_>>();
    let im = |c: &Circulant| eigen_dft(c).into_iter().map(|z| z.im).collect::<Vec<_>>();
    let (a, b, f, g) = (re(&blocks.a), re(&blocks.b), re(&blocks.f), re(&blocks.g));
    let (c, e) = (im(&blocks.c), im(&blocks.e));
    let h = re(&blocks.h[0]);
    (0..blocks.k)
        .map(|nu| FrequencyTriple {
            nu,
            a: a[nu],
            b: b[nu],
            c: c[nu],
            e: e[nu],
            f: f[nu],
            g_eig: g[nu],
            h: h[nu],
            det_hat: det3_hat(a[nu], b[nu], c[nu], e[nu], f[nu], g[nu]),
        })
        .collect()
}

/// Leading-order eigenvalue predictions at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticEigen {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub g_eig: f64,
    pub h: f64,
}

pub fn eigen_asymptotic(blocks: &NondegenBlocks, nu: usize) -> Result<AsymptoticEigen> {
    let n = blocks.n;
    let nf = n as f64;
    let kp = blocks.k as f64 / PI;
    let x = 2.0 * PI * nu as f64 / blocks.k as f64;
    let [g, g1, g2] = eval_all(x, n, 1e-13)?.map(|s| s.value);
    let g_first = eval_all(2.0 * PI / blocks.k as f64, n, 1e-13)?[0].value;
    let (lam, two_r, gm1) = (blocks.lambda, 2.0 * blocks.r, blocks.gamma1);
    let y = gm1 * lam.powf(2.0 - nf) * two_r.powf(-nf);
    let xb = gm1 * lam.powf(1.0 - nf) * two_r.powf(1.0 - nf);
    Ok(AsymptoticEigen {
        a: blocks.a.first_row[0].re
            + (nf - 2.0) / 2.0 * gm1 * lam.powf(-nf) * two_r.powf(2.0 - nf) * kp.powf(nf - 2.0) * g2,
        b: blocks.b.first_row[0].re - (nf - 2.0) / 2.0 * xb * kp.powf(nf - 2.0) * g2,
        c: -(nf - 2.0) * xb * kp.powf(nf - 1.0) * g1,
        e: 2.0 * (nf - 2.0) * y * kp.powf(nf - 1.0) * g1,
        g_eig: 2.0 * (nf - 1.0) * y * kp.powf(nf) * g,
        h: 4.0 * y * kp.powf(nf) * (g_first - g),
    })
}

/// Diagonal entries `(ã_ν, g̃_ν)` of the inverse of the frequency block.
pub fn inverse_diagonal(t: &FrequencyTriple) -> (f64, f64) {
    let cof_a = t.f * t.g_eig - t.e * t.e;
    let cof_g = t.a * t.f - t.b * t.b;
    (cof_a / t.det_hat, cof_g / t.det_hat)
}

/// `μ^{-3m-2}`, the size of `|D̂_ν| / ν²`.
pub fn det_scale(blocks: &NondegenBlocks) -> f64 {
    blocks.mu.powf(-3.0 * blocks.m - 2.0)
}

/// `-D̂_ν / (μ^{-3m-2} ν̄²)` with `ν̄ = min(ν, k-ν)`.
pub fn scaled_det(blocks: &NondegenBlocks, t: &FrequencyTriple) -> f64 {
    let nb = t.nu.min(blocks.k - t.nu) as f64;
    -t.det_hat / (det_scale(blocks) * nb * nb)
}

/// Assembled `3k × 3k` matrix `[[A, B, C], [B^T, F, E], [C^T, E^T, G]]`.
///
/// With `deflate`, `σ w w^T` for `w = (0, 0, 1/√k)` and `σ = deflation_shift` is added to
/// lift the rotation kernel.
pub fn assemble_dense(blocks: &NondegenBlocks, deflate: bool) -> Vec<Vec<f64>> {
    let k = blocks.k;
    let grid = [
        [&blocks.a, &blocks.b, &blocks.c],
        [&blocks.b, &blocks.f, &blocks.e],
        [&blocks.c, &blocks.e, &blocks.g],
    ];
    let mut out = vec![vec![0.0; 3 * k]; 3 * k];
    for (bi, row) in grid.iter().enumerate() {
        for (bj, block) in row.iter().enumerate() {
            for i in 0..k {
                for j in 0..k {
                    out[bi * k + i][bj * k + j] = if bi > bj {
                        block.entry(j, i).re
                    } else {
                        block.entry(i, j).re
                    };
                }
            }
        }
    }
    if deflate {
        let shift = deflation_shift(blocks) / k as f64;
        for i in 0..k {
            for j in 0..k {
                out[2 * k + i][2 * k + j] += shift;
            }
        }
    }
    out
}

/// Size of the lift applied to the zero mode of `G`: its diagonal entry.
pub fn deflation_shift(blocks: &NondegenBlocks) -> f64 {
    blocks.g.first_row[0].re.abs()
}

/// `(sign, log|det|)` of the deflated assembled matrix from the frequency blocks.
pub fn log_det_frequency(blocks: &NondegenBlocks, triples: &[FrequencyTriple]) -> (f64, f64) {
    let shift = deflation_shift(blocks);
    let mut sign = 1.0;
    let mut log = 0.0;
    for t in triples {
        let d = if t.nu == 0 {
            det3_hat(t.a, t.b, t.c, t.e, t.f, t.g_eig + shift)
        } else {
            t.det_hat
        };
        sign *= d.signum();
        log += d.abs().ln();
    }
    (sign, log)
}

/// Weight vectors expressing each rotation field `z_α`, `α = 1..=2n-3`, in the
/// `Z_j^i` basis: `(block index i, weights over j)`.
pub fn kernel_decomposition_weights(k: usize, n: usize) -> Vec<(usize, Vec<f64>)> {
    let theta = |j: usize| 2.0 * PI * j as f64 / k as f64;
    let mut out = Vec::with_capacity(2 * n - 3);
    for alpha in 1..=(2 * n - 3) {
        let entry = if alpha <= n - 2 {
            (alpha + 2, (0..k).map(|j| theta(j).cos()).collect())
        } else if alpha <= 2 * n - 4 {
            (alpha + 4 - n, (0..k).map(|j| theta(j).sin()).collect())
        } else {
            (2, vec![1.0; k])
        };
        out.push(entry);
    }
    out
}

/// `Σ_l H_{0l} w_l`-style action of a circulant on a weight vector.
pub fn circulant_action(c: &Circulant, w: &[f64]) -> Vec<f64> {
    let x: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    c.matvec_dense(&x).into_iter().map(|z| z.re).collect()
}

impl NondegenBlocks {
    /// Window contribution `c0 μ^{-m} γ3 Λ^{-m-2}` to the `A` diagonal.
    pub fn window_scale(&self) -> f64 {
        self.window_a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_real_diagonal() {
        assert_eq!(det3_hat(2.0, 0.0, 0.0, 0.0, 3.0, 4.0), 24.0);
    }

    #[test]
    fn imaginary_couplings_enter_with_sign() {
        // [[1, 0, i], [0, 1, 0], [-i, 0, 1]] has determinant 1 - 1 = 0
        assert_eq!(det3_hat(1.0, 0.0, 1.0, 0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn kernel_weights_cover_all_fields() {
        let w = kernel_decomposition_weights(8, 5);
        assert_eq!(w.len(), 7);
        assert_eq!(w[0].0, 3);
        assert_eq!(w[3].0, 3);
        assert_eq!(w[6], (2, vec![1.0; 8]));
    }
}
