//! Problem parameters, derived scales, ring geometry and the configuration norm.
//!
//! Bubble indices are zero-based: bubble `j` sits at angle `2πj/k + α`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Physical inputs of the ring construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Space dimension, at least 5.
    pub n: usize,
    /// Exponent of the curvature profile near `r0`.
    pub m: f64,
    /// Remainder exponent of the curvature profile.
    pub theta_k: f64,
    pub c0: f64,
    pub r0: f64,
    /// Half-width of the window where the profile expansion holds.
    pub delta: f64,
    /// Number of bubbles.
    pub k: usize,
    /// Initial guess for the concentration rate.
    pub lambda_init: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            n: 5,
            m: 2.5,
            theta_k: 3.0,
            c0: 1.0,
            r0: 1.0,
            delta: 0.5,
            k: 16,
            lambda_init: 1.0,
        }
    }
}

impl ProblemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(domain("n", format!("need n >= 5, got {}", self.n)));
        }
        let nf = self.n as f64;
        let lower = ((nf - 2.0) / 2.0).min(2.0);
        if !(self.m > lower && self.m < nf - 2.0) {
            return Err(domain("m", format!("need {lower} < m < {}, got {}", nf - 2.0, self.m)));
        }
        if !(self.theta_k > 2.0) {
            return Err(domain("theta_k", format!("need theta_k > 2, got {}", self.theta_k)));
        }
        for (name, v) in [
            ("c0", self.c0),
            ("r0", self.r0),
            ("delta", self.delta),
            ("lambda_init", self.lambda_init),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.k < 3 {
            return Err(domain("k", format!("need k >= 3, got {}", self.k)));
        }
        Ok(())
    }

    /// Critical exponent `(n+2)/(n-2)`.
    pub fn p(&self) -> f64 {
        critical_exponent(self.n)
    }

    /// `k^{(n-2)/(n-2-m)}`.
    pub fn mu(&self) -> f64 {
        let nf = self.n as f64;
        (self.k as f64).powf((nf - 2.0) / (nf - 2.0 - self.m))
    }
}

pub fn critical_exponent(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 2.0) / (nf - 2.0)
}

/// Quantities fixed by the parameters and the radial correction `R0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub p: f64,
    /// Angular step `2π/k`.
    pub angle: f64,
    /// Correction `R0` with `R = mu·r0 + R0`.
    pub r0_shift: f64,
    /// Ring radius `R`.
    pub ring_radius: f64,
    /// Nearest-neighbour chord `2R sin(π/k)`.
    pub chord: f64,
    pub tau: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl DerivedScales {
    /// Chord between bubbles `j` and `l` of the unperturbed ring.
    pub fn chord_between(&self, j: usize, l: usize) -> f64 {
        let diff = j.abs_diff(l);
        2.0 * self.ring_radius * half_angle_sine(self.k, diff)
    }
}

/// Small exponent `tau = 0.9·min` of the admissible upper bounds.
///
/// Bounds that are not positive for the given `(n, m)` are skipped; `theta_k - 2`
/// is always positive for valid parameters.
pub fn tau_exponent(params: &ProblemParams) -> f64 {
    let nf = params.n as f64;
    let m = params.m;
    [params.theta_k - 2.0, (m - 2.0) / 2.0, (2.0 * m + 2.0 - nf) / m]
        .into_iter()
        .filter(|b| *b > 0.0)
        .fold(f64::INFINITY, f64::min)
        * 0.9
}

pub fn derive_scales(params: &ProblemParams, r0_shift: f64) -> Result<DerivedScales> {
    params.validate()?;
    if !r0_shift.is_finite() {
        return Err(domain("R0", "must be finite"));
    }
    let mu = params.mu();
    let ring_radius = mu * params.r0 + r0_shift;
    if ring_radius <= 0.0 {
        return Err(domain("R0", format!("ring radius {ring_radius} is not positive")));
    }
    let tau = tau_exponent(params);
    let tau1 = tau / 4.0;
    Ok(DerivedScales {
        n: params.n,
        k: params.k,
        mu,
        p: params.p(),
        angle: 2.0 * PI / params.k as f64,
        r0_shift,
        ring_radius,
        chord: 2.0 * ring_radius * (PI / params.k as f64).sin(),
        tau,
        tau1,
        tau2: tau1 / 4.0,
    })
}

/// `sin(π·l/k)`, the half-angle sine entering every chord and lattice sum.
pub fn half_angle_sine(k: usize, l: usize) -> f64 {
    (PI * l as f64 / k as f64).sin()
}

/// Perturbation `q = (λ, f, g)` of the ring plus the rotation `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub lambda: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub alpha: f64,
}

impl Configuration {
    pub fn zeros(k: usize, alpha: f64) -> Self {
        Self {
            lambda: vec![0.0; k],
            f: vec![0.0; k],
            g: vec![0.0; k],
            alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn check_len(&self, k: usize) -> Result<()> {
        for v in [&self.lambda, &self.f, &self.g] {
            if v.len() != k {
                return Err(Error::Shape {
                    expected: k,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Concatenation `(λ, f, g)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.len());
        out.extend_from_slice(&self.lambda);
        out.extend_from_slice(&self.f);
        out.extend_from_slice(&self.g);
        out
    }

    pub fn from_vec(v: &[f64], alpha: f64) -> Result<Self> {
        if !v.len().is_multiple_of(3) {
            return Err(Error::Shape {
                expected: 3 * (v.len() / 3),
                got: v.len(),
            });
        }
        let k = v.len() / 3;
        Ok(Self {
            lambda: v[..k].to_vec(),
            f: v[k..2 * k].to_vec(),
            g: v[2 * k..].to_vec(),
            alpha,
        })
    }
}

/// Unit normal `n_j` and tangent `t_j` (first two coordinates) of bubble `j`.
pub fn frame(j: usize, k: usize, alpha: f64) -> ([f64; 2], [f64; 2]) {
    let theta = 2.0 * PI * j as f64 / k as f64 + alpha;
    let (s, c) = theta.sin_cos();
    ([c, s], [-s, c])
}

/// Centers `Q_j = (R + f_j) n_j + g_j t_j`, embedded in `R^n`.
pub fn bubble_centers(q: &Configuration, s: &DerivedScales) -> Result<Vec<Vec<f64>>> {
    q.check_len(s.k)?;
    Ok((0..s.k)
        .map(|j| {
            let (nj, tj) = frame(j, s.k, q.alpha);
            let radial = s.ring_radius + q.f[j];
            let mut x = vec![0.0; s.n];
            x[0] = radial * nj[0] + q.g[j] * tj[0];
            x[1] = radial * nj[1] + q.g[j] * tj[1];
            x
        })
        .collect())
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Largest difference quotient `|g_j - g_l| / |sin(π(j-l)/k)|` over `j ≠ l`.
pub fn tangential_lipschitz(g: &[f64]) -> f64 {
    let k = g.len();
    let mut best = 0.0_f64;
    for j in 0..k {
        for l in (j + 1)..k {
            let s = half_angle_sine(k, l - j).abs();
            best = best.max((g[j] - g[l]).abs() / s);
        }
    }
    best
}

/// Anisotropic configuration norm.
pub fn xi_norm(q: &Configuration, s: &DerivedScales) -> f64 {
    let d = s.chord;
    if s.n == 5 {
        s.mu * (sup_abs(&q.lambda) + sup_abs(&q.f)) + d.powf(s.tau1) * sup_abs(&q.g)
    } else {
        s.mu * (d.powf(s.tau1) * sup_abs(&q.lambda) + d.powf(1.5 * s.tau1) * sup_abs(&q.f))
            + d.powf(s.tau1) * (sup_abs(&q.g) + tangential_lipschitz(&q.g))
    }
}
