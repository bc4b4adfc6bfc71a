//! Balancing conditions for the concentration rate `Λ` and the radial correction `R0`.
//!
//! The two equations are
//!
//! ```text
//! c0 μ^{-m} (γ2 Λ^{2-m} R0 + γ4 Λ^{-m} / R) + γ1 Λ^{2-n} (2R)^{1-n} S = 0
//! γ1 Λ^{2-n} (2R)^{2-n} S - 2 c0 μ^{-m} γ3 Λ^{-m} = 0
//! ```
//!
//! with `R = μ r0 + R0` and `S = Σ_{l=1}^{k-1} sin^{2-n}(πl/k)`. Since `R0 ~ 1/μ` lies far
//! below the resolution of `R` itself, the radial unknown is always carried as the offset
//! from `μ r0`.

use serde::Serialize;

use crate::bubbles::GammaConstants;
use crate::error::{Error, Result};
use crate::model::{half_angle_sine, ProblemParams};

/// `Σ_{l=1}^{k-1} sin^{-s}(πl/k)`.
pub fn lattice_sum(k: usize, s: f64) -> f64 {
    (1..k).map(|l| half_angle_sine(k, l).powf(-s)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceSolution {
    pub lambda: f64,
    /// Offset `R0` of the ring radius from `μ r0`.
    pub r0_shift: f64,
    /// Relative residuals of the two equations.
    pub residual_1: f64,
    pub residual_2: f64,
    pub iterations: usize,
}

impl BalanceSolution {
    pub fn ring_radius(&self, params: &ProblemParams) -> f64 {
        params.mu() * params.r0 + self.r0_shift
    }
}

/// Fixed inputs shared by both equations.
#[derive(Debug, Clone, Copy)]
struct System {
    n: f64,
    m: f64,
    c0: f64,
    mu_m: f64,
    ring_base: f64,
    sum: f64,
    g: GammaConstants,
}

impl System {
    fn new(params: &ProblemParams, g: &GammaConstants) -> Self {
        Self {
            n: params.n as f64,
            m: params.m,
            c0: params.c0,
            mu_m: params.mu().powf(-params.m),
            ring_base: params.mu() * params.r0,
            sum: lattice_sum(params.k, params.n as f64 - 2.0),
            g: *g,
        }
    }

    /// Summands of the first equation.
    fn terms_1(&self, lam: f64, shift: f64) -> [f64; 3] {
        let r = self.ring_base + shift;
        [
            self.c0 * self.mu_m * self.g.g2 * lam.powf(2.0 - self.m) * shift,
            self.c0 * self.mu_m * self.g.g4 * lam.powf(-self.m) / r,
            self.g.g1 * lam.powf(2.0 - self.n) * (2.0 * r).powf(1.0 - self.n) * self.sum,
        ]
    }

    fn terms_2(&self, lam: f64, shift: f64) -> [f64; 2] {
        let r = self.ring_base + shift;
        [
            self.g.g1 * lam.powf(2.0 - self.n) * (2.0 * r).powf(2.0 - self.n) * self.sum,
            -2.0 * self.c0 * self.mu_m * self.g.g3 * lam.powf(-self.m),
        ]
    }

    /// Relative residuals and the row scales used to form them.
    fn residuals(&self, lam: f64, shift: f64) -> ([f64; 2], [f64; 2]) {
        let t1 = self.terms_1(lam, shift);
        let t2 = self.terms_2(lam, shift);
        let s1 = t1.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
        let s2 = t2.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
        ([t1.iter().sum::<f64>() / s1, t2.iter().sum::<f64>() / s2], [s1, s2])
    }

    /// Normalised equations in `(ln Λ, R0)`: the first divided by its `R0` coefficient,
    /// the second as a log ratio, which is affine in `ln Λ` and `ln R`.
    fn normalised(&self, lam: f64, shift: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let (n, m) = (self.n, self.m);
        let r = self.ring_base + shift;
        let a = self.c0 * self.mu_m;
        let self_term = self.g.g4 / self.g.g2 * lam.powi(-2) / r;
        let inter = self.g.g1 / (a * self.g.g2) * lam.powf(m - n) * (2.0 * r).powf(1.0 - n) * self.sum;
        let f1 = shift + self_term + inter;
        let f2 =
            (m + 2.0 - n) * lam.ln() + (2.0 - n) * (2.0 * r).ln() + (self.g.g1 * self.sum / (2.0 * a * self.g.g3)).ln();
        let jac = [
            [
                -2.0 * self_term + (m - n) * inter,
                1.0 - self_term / r + (1.0 - n) * inter / r,
            ],
            [m + 2.0 - n, (2.0 - n) / r],
        ];
        ([f1, f2], jac)
    }

    /// `Λ` from the second equation alone at ring radius `r`.
    fn lambda_for_radius(&self, r: f64) -> f64 {
        let rhs = self.g.g1 * (2.0 * r).powf(2.0 - self.n) * self.sum / (2.0 * self.c0 * self.mu_m * self.g.g3);
        rhs.powf(1.0 / (self.n - 2.0 - self.m))
    }
}

const MAX_ITER: usize = 100;
const TARGET: f64 = 1e-14;

fn newton(sys: &System, start: (f64, f64), what: &'static str) -> Result<BalanceSolution> {
    let (mut lam, mut shift) = start;
    if !(lam > 0.0 && lam.is_finite() && shift.is_finite()) {
        return Err(crate::error::domain(
            "start",
            format!("need finite Λ > 0, got ({lam}, {shift})"),
        ));
    }
    let mut res = sys.residuals(lam, shift).0;
    let mut trace = vec![res[0].hypot(res[1])];
    let done = |res: [f64; 2], it: usize, lam: f64, shift: f64| BalanceSolution {
        lambda: lam,
        r0_shift: shift,
        residual_1: res[0],
        residual_2: res[1],
        iterations: it,
    };
    for it in 0..MAX_ITER {
        if res[0].abs().max(res[1].abs()) <= TARGET {
            return Ok(done(res, it, lam, shift));
        }
        let ([f1, f2], [[a, b], [c, d]]) = sys.normalised(lam, shift);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = (d * f1 - b * f2) / det;
        let ds = (a * f2 - c * f1) / det;
        // cap the log step so Λ changes by at most a factor e per iteration
        let damp = 1.0 / du.abs().max(1.0);
        lam *= (-damp * du).exp();
        shift -= damp * ds;
        res = sys.residuals(lam, shift).0;
        trace.push(res[0].hypot(res[1]));
        if damp == 1.0 && du.abs() <= 4.0 * f64::EPSILON && ds.abs() <= 4.0 * f64::EPSILON * shift.abs() {
            break;
        }
    }
    let final_res = res[0].abs().max(res[1].abs());
    if final_res <= 1e-12 {
        // stalled at rounding level
        return Ok(done(res, trace.len() - 1, lam, shift));
    }
    Err(Error::NoConvergence {
        what,
        iterations: trace.len() - 1,
        residual: final_res,
        trace,
    })
}

fn initial_guess(sys: &System) -> (f64, f64) {
    let lam = sys.lambda_for_radius(sys.ring_base);
    let shift = substitution_shift(&sys.g, lam, sys.ring_base);
    (lam, shift)
}

/// `R0` from `γ2 Λ^2 R R0 + γ3 + γ4 = 0` at ring radius `r`.
fn substitution_shift(g: &GammaConstants, lam: f64, r: f64) -> f64 {
    -(g.g3 + g.g4) / (g.g2 * lam * lam * r)
}

/// Solve the balancing conditions by damped Newton from the closed-form starting point.
pub fn solve_balance(params: &ProblemParams, gammas: &GammaConstants) -> Result<BalanceSolution> {
    params.validate()?;
    let sys = System::new(params, gammas);
    newton(&sys, initial_guess(&sys), "balance Newton")
}

/// As [`solve_balance`] from a caller-supplied `(Λ, R0)`.
pub fn solve_balance_from(
    params: &ProblemParams,
    gammas: &GammaConstants,
    start: (f64, f64),
) -> Result<BalanceSolution> {
    params.validate()?;
    newton(&System::new(params, gammas), start, "balance Newton")
}

/// Relative residuals of both equations at `(Λ, R0)`.
pub fn balance_residuals(params: &ProblemParams, gammas: &GammaConstants, lambda: f64, r0_shift: f64) -> [f64; 2] {
    System::new(params, gammas).residuals(lambda, r0_shift).0
}

/// `Λ` solving the second equation alone for the given ring radius.
pub fn lambda_closed_form(params: &ProblemParams, gammas: &GammaConstants, ring_radius: f64) -> f64 {
    System::new(params, gammas).lambda_for_radius(ring_radius)
}

/// `γ2 Λ^2 R R0 + γ3 + γ4`, relative to `γ3 + γ4`.
pub fn substitution_defect(params: &ProblemParams, gammas: &GammaConstants, sol: &BalanceSolution) -> f64 {
    let r = sol.ring_radius(params);
    let g = gammas;
    (g.g2 * sol.lambda * sol.lambda * r * sol.r0_shift + g.g3 + g.g4) / (g.g3 + g.g4)
}

/// Finite-`k` radial configuration `(r, Λ0)` with the remainder orders dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSolution {
    /// Ring radius `r`, rounded to working precision.
    pub r: f64,
    /// `r - μ r0`, carried exactly.
    pub r_offset: f64,
    pub lambda0: f64,
    pub residual_0: f64,
    pub residual_1: f64,
    pub iterations: usize,
}

/// Solve the finite-`k` radial system for `(r, Λ0)`.
///
/// Its second equation is half of the balancing second equation, so both systems share
/// their root; the residuals reported here are those of the finite-`k` form.
pub fn solve_finite(params: &ProblemParams, gammas: &GammaConstants) -> Result<FiniteSolution> {
    params.validate()?;
    let sys = System::new(params, gammas);
    let sol = newton(&sys, initial_guess(&sys), "finite-k Newton")?;
    let [r0_res, r1_res] = finite_residuals(params, gammas, sol.lambda, sol.r0_shift);
    Ok(FiniteSolution {
        r: sys.ring_base + sol.r0_shift,
        r_offset: sol.r0_shift,
        lambda0: sol.lambda,
        residual_0: r0_res,
        residual_1: r1_res,
        iterations: sol.iterations,
    })
}

/// Relative residuals of the finite-`k` equations at `(Λ0, r - μ r0)`.
pub fn finite_residuals(params: &ProblemParams, gammas: &GammaConstants, lambda0: f64, r_offset: f64) -> [f64; 2] {
    let n = params.n as f64;
    let m = params.m;
    let mu = params.mu();
    let r = mu * params.r0 + r_offset;
    let a = params.c0 * mu.powf(-m);
    let sum = lattice_sum(params.k, n - 2.0);
    let e0 = [
        a * gammas.g2 * lambda0.powf(2.0 - m) * r_offset,
        a * gammas.g4 * lambda0.powf(-m) / r,
        gammas.g1 * lambda0.powf(2.0 - n) * (2.0 * r).powf(1.0 - n) * sum,
    ];
    let e1 = [
        0.5 * gammas.g1 * lambda0.powf(2.0 - n) * (2.0 * r).powf(2.0 - n) * sum,
        -a * gammas.g3 * lambda0.powf(-m),
    ];
    let rel = |t: &[f64]| t.iter().sum::<f64>() / t.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
    [rel(&e0), rel(&e1)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::gamma_oracle;

    #[test]
    fn lattice_sum_small_k() {
        // k = 4: sin(π/4), sin(π/2), sin(3π/4)
        let s = lattice_sum(4, 2.0);
        assert!((s - (2.0 + 1.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn default_parameters_balance() {
        let p = ProblemParams::default();
        let g = gamma_oracle(p.n, p.m);
        let sol = solve_balance(&p, &g).unwrap();
        assert!(sol.residual_1.abs() <= 1e-12 && sol.residual_2.abs() <= 1e-12);
        assert!(substitution_defect(&p, &g, &sol).abs() <= 1e-10);
        let direct = lambda_closed_form(&p, &g, sol.ring_radius(&p));
        assert!((direct - sol.lambda).abs() <= 1e-10 * sol.lambda);
    }
}
