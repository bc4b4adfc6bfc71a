//! Error density of the approximate solution, the zone partition around the
//! ring, the weights of the two weighted sup norms, and sampled norm estimates.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bubbles::bubble_constant;
use crate::error::{domain, Result};
use crate::model::{bubble_centers, Configuration, DerivedScales, ProblemParams};
use crate::reduced::ReducedSystem;

/// Exponent margin `σ` in the outer-zone weights.
pub const SIGMA: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Inner,
    Middle,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionLabel {
    pub j: usize,
    pub zone: Zone,
}

fn dist(x: &[f64], q: &[f64]) -> f64 {
    x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn bubble_at(n: usize, lambda: f64, r: f64) -> f64 {
    let nf = n as f64;
    bubble_constant(n) * lambda.powf((nf - 2.0) / 2.0) * (1.0 + lambda * lambda * r * r).powf(-(nf - 2.0) / 2.0)
}

/// `E = (K̂ - 1) W^p + (W^p - Σ U_j^p)` at `x`, with `K̂ - 1 = deficit(|x|)`.
///
/// `W^p - U_i^p` is formed around the largest bubble as `U_i^p expm1(p ln1p(s/U_i))`.
pub fn eval_e_at(x: &[f64], centers: &[Vec<f64>], lambdas: &[f64], n: usize, deficit: impl Fn(f64) -> f64) -> f64 {
    let p = (n as f64 + 2.0) / (n as f64 - 2.0);
    let values: Vec<f64> = centers
        .iter()
        .zip(lambdas)
        .map(|(c, &l)| bubble_at(n, l, dist(x, c)))
        .collect();
    let (i, &top) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one bubble");
    let rest: f64 = values.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
    let rest_p: f64 = values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, v)| v.powf(p))
        .sum();
    let top_p = top.powf(p);
    let w_p = top_p + top_p * (p * (rest / top).ln_1p()).exp_m1();
    let interaction = top_p * (p * (rest / top).ln_1p()).exp_m1() - rest_p;
    let norm_x = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    deficit(norm_x) * w_p + interaction
}

/// Bubble configuration with its zone geometry.
#[derive(Debug, Clone)]
pub struct ErrorField {
    pub params: ProblemParams,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub mu: f64,
    pub chord: f64,
    pub alpha: f64,
    pub ring_radius: f64,
    pub centers: Vec<Vec<f64>>,
    pub rest_centers: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    /// Replace `K̂` by `1`.
    pub flat_profile: bool,
}

impl ErrorField {
    pub fn new(params: &ProblemParams, scales: &DerivedScales, lambda: f64, q: &Configuration) -> Result<Self> {
        q.check_len(scales.k)?;
        if !(lambda > 0.0) {
            return Err(domain("lambda", format!("must be positive, got {lambda}")));
        }
        let lambdas: Vec<f64> = q.lambda.iter().map(|l| lambda + l).collect();
        if lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(domain("lambda", "a perturbed concentration is not positive"));
        }
        Ok(Self {
            params: *params,
            n: scales.n,
            k: scales.k,
            p: scales.p,
            mu: scales.mu,
            chord: scales.chord,
            alpha: q.alpha,
            ring_radius: scales.ring_radius,
            centers: bubble_centers(q, scales)?,
            rest_centers: bubble_centers(&Configuration::zeros(scales.k, q.alpha), scales)?,
            lambdas,
            flat_profile: false,
        })
    }

    pub fn from_system(sys: &ReducedSystem, q: &Configuration) -> Result<Self> {
        Self::new(&sys.params, &sys.scales, sys.lambda(), q)
    }

    /// `K̂(x) - 1` with `K̂(x) = K(|x|/μ)`, formed without subtracting from one.
    pub fn profile_deficit(&self, norm_x: f64) -> f64 {
        if self.flat_profile {
            return 0.0;
        }
        let pr = &self.params;
        let offset = (norm_x - self.mu * pr.r0) / self.mu;
        -pr.c0 * offset.abs().min(pr.delta).powf(pr.m)
    }

    pub fn eval_e(&self, x: &[f64]) -> f64 {
        eval_e_at(x, &self.centers, &self.lambdas, self.n, |r| self.profile_deficit(r))
    }

    /// `((K̂ - 1) W^p, W^p - Σ U_j^p)` evaluated separately.
    pub fn error_parts(&self, x: &[f64]) -> (f64, f64) {
        let interaction = eval_e_at(x, &self.centers, &self.lambdas, self.n, |_| 0.0);
        let w: f64 = self
            .centers
            .iter()
            .zip(&self.lambdas)
            .map(|(c, &l)| bubble_at(self.n, l, dist(x, c)))
            .sum();
        let norm_x = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        (self.profile_deficit(norm_x) * w.powf(self.p), interaction)
    }

    /// Nearest unperturbed center and the zone around it.
    pub fn partition(&self, x: &[f64]) -> RegionLabel {
        let step = 2.0 * PI / self.k as f64;
        let phi = x[1].atan2(x[0]) - self.alpha;
        let j = ((phi / step).round().rem_euclid(self.k as f64) as usize) % self.k;
        let r = dist(x, &self.rest_centers[j]);
        let zone = if r <= 0.5 * self.chord {
            Zone::Inner
        } else if r < 0.5 * self.params.delta * self.mu {
            Zone::Middle
        } else {
            Zone::Outer
        };
        RegionLabel { j, zone }
    }

    fn outer_exponent(&self) -> f64 {
        self.p.max(2.0) * SIGMA
    }

    fn weight(&self, x: &[f64], inner_power: i32, outer_decay: f64) -> f64 {
        let label = self.partition(x);
        let r = dist(x, &self.centers[label.j]);
        let nf = self.n as f64;
        match label.zone {
            Zone::Inner => self.chord.powf(2.0 - nf) / (1.0 + r.powi(inner_power)),
            _ => {
                let s = self.outer_exponent();
                self.chord.powf(-s) / (1.0 + r.powf(outer_decay - s))
            }
        }
    }

    /// Weight of the `‖·‖_*` norm.
    pub fn weight_v(&self, x: &[f64]) -> f64 {
        self.weight(x, 4, self.n as f64 + 2.0)
    }

    /// Weight of the `‖·‖_**` norm.
    pub fn weight_w(&self, x: &[f64]) -> f64 {
        self.weight(x, 2, self.n as f64)
    }

    /// Inner and outer branches of a weight at distance `r` from a center.
    pub fn weight_branches(&self, r: f64, which: WeightKind) -> (f64, f64) {
        let nf = self.n as f64;
        let s = self.outer_exponent();
        let (power, decay) = match which {
            WeightKind::V => (4, nf + 2.0),
            WeightKind::W => (2, nf),
        };
        (
            self.chord.powf(2.0 - nf) / (1.0 + r.powi(power)),
            self.chord.powf(-s) / (1.0 + r.powf(decay - s)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    V,
    W,
}

/// Fractions of samples near a center, in the ring band and in the far field.
pub const STRATA: [f64; 3] = [0.4, 0.4, 0.2];

/// Radius of the bubble core in units of `1/Λ`, sampled uniformly inside the inner zone.
pub const CORE_RADIUS: f64 = 8.0;

/// Inner-zone samples split evenly between log-uniform radii over the whole ball and
/// uniform radii in the core; half of the core samples lie in the ring plane.
///
/// Deterministic sample stream: the first `N` points do not depend on the total count.
pub fn sample_points(field: &ErrorField, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = field.n;
    let inner_lo = 1e-4 / field.lambdas[0];
    let core = CORE_RADIUS / field.lambdas[0];
    let half_d = 0.5 * field.chord;
    let half_window = 0.5 * field.params.delta * field.mu;
    let far_lo = field.ring_radius + half_window;
    let far_hi = 100.0 * field.ring_radius;
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp();
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
            dir.iter_mut().for_each(|a| *a /= len);
            if u < STRATA[0] + STRATA[1] {
                let j = rng.random_range(0..field.k);
                let r = if u < STRATA[0] {
                    let split: f64 = rng.random();
                    if split < 0.5 {
                        log_uniform(&mut rng, inner_lo, half_d)
                    } else {
                        if split < 0.75 {
                            let phi = rng.random::<f64>() * 2.0 * PI;
                            dir.iter_mut().for_each(|a| *a = 0.0);
                            dir[0] = phi.cos();
                            dir[1] = phi.sin();
                        }
                        (rng.random::<f64>() * core).min(half_d)
                    }
                } else {
                    log_uniform(&mut rng, half_d, half_window)
                };
                field.centers[j].iter().zip(&dir).map(|(c, e)| c + r * e).collect()
            } else {
                let r = log_uniform(&mut rng, far_lo, far_hi);
                dir.iter().map(|e| r * e).collect()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Largest sampled `|h| / weight`; a lower bound for the supremum.
    pub value: f64,
    pub argmax_point: Vec<f64>,
    pub samples: usize,
}

pub fn sup_norm_sampled(
    points: &[Vec<f64>],
    field: impl Fn(&[f64]) -> f64 + Sync,
    weight: impl Fn(&[f64]) -> f64 + Sync,
) -> NormEstimate {
    let ratios: Vec<f64> = points.par_iter().map(|x| field(x).abs() / weight(x)).collect();
    let (idx, value) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    NormEstimate {
        value,
        argmax_point: points.get(idx).cloned().unwrap_or_default(),
        samples: points.len(),
    }
}

/// Sampled `‖E‖_**` over `count` points.
pub fn error_norm(field: &ErrorField, count: usize, seed: u64) -> NormEstimate {
    let points = sample_points(field, count, seed);
    sup_norm_sampled(&points, |x| field.eval_e(x), |x| field.weight_w(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exact_bubble_has_no_error() {
        let c = vec![vec![3.0, -1.0, 0.0, 0.0, 0.0]];
        for x in [[0.0; 5], [3.0, -1.0, 0.0, 0.0, 0.0], [10.0, 2.0, -4.0, 1.0, 0.5]] {
            assert_eq!(eval_e_at(&x, &c, &[0.7], 5, |_| 0.0), 0.0);
        }
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let pts = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        let est = sup_norm_sampled(&pts, |_| 0.0, |_| 1.0);
        assert_eq!(est.value, 0.0);
        assert_eq!(est.samples, 2);
    }
}
