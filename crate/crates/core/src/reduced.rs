//! Leading-order projections of the error onto the kernel directions, the
//! remainder map `Φ`, and the fixed-point iteration for the configuration `q`.
//!
//! Projections are evaluated in each bubble's own frame: for `φ = θ_l - θ_j`,
//!
//! ```text
//! (Q_j - Q_l)·n_j = 2R sin²(φ/2) + f_j - f_l cos φ + g_l sin φ
//! (Q_j - Q_l)·t_j = g_j - (R + f_l) sin φ - g_l cos φ
//! ```
//!
//! so no large coordinates are subtracted. In matrix units a projection vector
//! `P = (∫E Z_0, -∫E Z_1, -∫E Z_2)` is mapped to `(-2Λ P_0, P_1, P_2) / s` with
//! `s = -(n-2)/2 · γ1 Λ^{2-n} (2R)^{1-n}`, and configurations enter `T` as
//! `(λ/Λ, f, g)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::balance::{solve_balance, BalanceSolution};
use crate::bubbles::{bubble_constant, gamma_constants, sphere_area, GammaConstants};
use crate::circulant::{build_t, p_hat, solve_t, ReducedMatrixT};
use crate::error::{domain, Error, Result};
use crate::model::{derive_scales, xi_norm, Configuration, DerivedScales, ProblemParams};
use crate::quad::Composite;

/// Radial profile `K(r) = 1 - c0 min(|r - r0|, δ)^m`.
pub fn radial_profile(params: &ProblemParams, r: f64) -> f64 {
    1.0 - params.c0 * (r - params.r0).abs().min(params.delta).powf(params.m)
}

/// Everything the projections need, fixed at the balanced parameters.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub params: ProblemParams,
    pub gammas: GammaConstants,
    pub balance: BalanceSolution,
    pub scales: DerivedScales,
    pub t: ReducedMatrixT,
    /// Factor `s` between projection and matrix units.
    pub unit: f64,
}

impl ReducedSystem {
    /// Gammas by quadrature, balanced `(Λ, R0)`, scales and `T`.
    pub fn new(params: &ProblemParams) -> Result<Self> {
        let gammas = gamma_constants(params.n, params.m, 1e-10)?;
        Self::with_gammas(params, gammas)
    }

    pub fn with_gammas(params: &ProblemParams, gammas: GammaConstants) -> Result<Self> {
        let balance = solve_balance(params, &gammas)?;
        let scales = derive_scales(params, balance.r0_shift)?;
        let t = build_t(params, &gammas, balance.lambda, scales.ring_radius)?;
        let nf = params.n as f64;
        let unit =
            -(nf - 2.0) / 2.0 * gammas.g1 * balance.lambda.powf(2.0 - nf) * (2.0 * scales.ring_radius).powf(1.0 - nf);
        Ok(Self {
            params: *params,
            gammas,
            balance,
            scales,
            t,
            unit,
        })
    }

    pub fn k(&self) -> usize {
        self.scales.k
    }

    pub fn lambda(&self) -> f64 {
        self.balance.lambda
    }

    /// `c0 μ^{-m}`.
    fn window_weight(&self) -> f64 {
        self.params.c0 * self.scales.mu.powf(-self.params.m)
    }

    /// Matrix-unit vector `(λ/Λ, f, g)`.
    pub fn to_matrix_units(&self, q: &Configuration) -> Vec<f64> {
        let mut v = q.to_vec();
        let k = self.k();
        v[..k].iter_mut().for_each(|x| *x /= self.lambda());
        v
    }

    pub fn from_matrix_units(&self, v: &[f64], alpha: f64) -> Result<Configuration> {
        let mut q = Configuration::from_vec(v, alpha)?;
        q.lambda.iter_mut().for_each(|x| *x *= self.lambda());
        Ok(q)
    }
}

/// Projections of the error onto `Z_{j,0}`, `Z_{j,1}` and `Z_{j,2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionVector {
    pub proj0: Vec<f64>,
    pub proj1: Vec<f64>,
    pub proj2: Vec<f64>,
}

impl ProjectionVector {
    pub fn zeros(k: usize) -> Self {
        Self {
            proj0: vec![0.0; k],
            proj1: vec![0.0; k],
            proj2: vec![0.0; k],
        }
    }

    /// `(-2Λ P_0, P_1, P_2) / s` with `P = (proj0, -proj1, -proj2)`.
    pub fn to_matrix_units(&self, sys: &ReducedSystem) -> Vec<f64> {
        let lam = sys.lambda();
        let mut out: Vec<f64> = self.proj0.iter().map(|x| -2.0 * lam * x / sys.unit).collect();
        out.extend(self.proj1.iter().map(|x| -x / sys.unit));
        out.extend(self.proj2.iter().map(|x| -x / sys.unit));
        out
    }

    pub fn from_matrix_units(sys: &ReducedSystem, v: &[f64]) -> Self {
        let k = sys.k();
        let lam = sys.lambda();
        Self {
            proj0: v[..k].iter().map(|x| -x * sys.unit / (2.0 * lam)).collect(),
            proj1: v[k..2 * k].iter().map(|x| -x * sys.unit).collect(),
            proj2: v[2 * k..].iter().map(|x| -x * sys.unit).collect(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.proj0
            .iter()
            .chain(&self.proj1)
            .chain(&self.proj2)
            .fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// Frame-local difference `((Q_j - Q_l)·n_j, (Q_j - Q_l)·t_j)` and `sin φ`, `cos φ`.
fn local_difference(sys: &ReducedSystem, q: &Configuration, j: usize, l: usize) -> ([f64; 2], f64, f64) {
    let k = sys.k();
    let phi = 2.0 * PI * (l as f64 - j as f64) / k as f64;
    let (sp, cp) = phi.sin_cos();
    let half = (0.5 * phi).sin();
    let r = sys.scales.ring_radius;
    let x = 2.0 * r * half * half + q.f[j] - q.f[l] * cp + q.g[l] * sp;
    let y = q.g[j] - (r + q.f[l]) * sp - q.g[l] * cp;
    ([x, y], sp, cp)
}

/// `|Q_j|` and `|Q_j| - μ r0` without cancellation.
fn radial_position(sys: &ReducedSystem, q: &Configuration, j: usize) -> (f64, f64, f64) {
    let a = sys.scales.ring_radius + q.f[j];
    let norm = a.hypot(q.g[j]);
    let excess = sys.scales.r0_shift + q.f[j] + q.g[j] * q.g[j] / (norm + a);
    (a, norm, excess)
}

/// Projections together with the size of the summands of each entry.
pub fn projection_e_with_scale(sys: &ReducedSystem, q: &Configuration) -> Result<(ProjectionVector, ProjectionVector)> {
    q.check_len(sys.k())?;
    let k = sys.k();
    let nf = sys.params.n as f64;
    let a = (nf - 2.0) / 2.0;
    let g = &sys.gammas;
    let m = sys.params.m;
    let w = sys.window_weight();
    let lam: Vec<f64> = q.lambda.iter().map(|x| sys.lambda() + x).collect();
    if let Some(j) = lam.iter().position(|x| !(*x > 0.0)) {
        return Err(domain("lambda", format!("concentration of bubble {j} is not positive")));
    }
    let mut value = ProjectionVector::zeros(k);
    let mut scale = ProjectionVector::zeros(k);
    for j in 0..k {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let (mut a1, mut a2) = (0.0, 0.0);
        for l in (0..k).filter(|&l| l != j) {
            let ([x, y], _, _) = local_difference(sys, q, j, l);
            let rho = x.hypot(y);
            if rho == 0.0 {
                return Err(Error::CoincidentCenters(j, l));
            }
            let wl = lam[l].powf(-a);
            s0 += wl * rho.powf(2.0 - nf);
            s1 += wl * x * rho.powf(-nf);
            s2 += wl * y * rho.powf(-nf);
            a1 += (wl * x * rho.powf(-nf)).abs();
            a2 += (wl * y * rho.powf(-nf)).abs();
        }
        let (aj, norm, excess) = radial_position(sys, q, j);
        let lj = lam[j];
        let inter0 = -0.5 * g.g1 * lj.powf(-nf / 2.0) * s0;
        let win0 = w * g.g3 * lj.powf(-1.0 - m);
        let inter1 = g.g1 * lj.powf(-a) * s1;
        let inter2 = g.g1 * lj.powf(-a) * s2;
        let shift = w * g.g2 * lj.powf(2.0 - m) * excess;
        let curv = w * g.g4 * lj.powf(-m) / (norm * norm);
        let (c1, c2) = (aj / norm, q.g[j] / norm);
        value.proj0[j] = inter0 + win0;
        value.proj1[j] = inter1 + shift * c1 + curv * aj;
        value.proj2[j] = inter2 + shift * c2 + curv * q.g[j];
        scale.proj0[j] = inter0.abs().max(win0.abs());
        let pair = g.g1 * lj.powf(-a);
        scale.proj1[j] = (pair * a1).abs().max((shift * c1).abs()).max((curv * aj).abs());
        scale.proj2[j] = (pair * a2).abs().max((shift * c2).abs()).max((curv * q.g[j]).abs());
    }
    Ok((value, scale))
}

/// Leading-order projections `∫E Z_{j,l}` at configuration `q`.
pub fn projection_e(sys: &ReducedSystem, q: &Configuration) -> Result<ProjectionVector> {
    projection_e_with_scale(sys, q).map(|(v, _)| v)
}

/// Analytic Jacobian of `projection_e`: rows `(proj0, proj1, proj2)`, columns `(λ, f, g)`.
pub fn projection_jacobian(sys: &ReducedSystem, q: &Configuration) -> Result<Vec<Vec<f64>>> {
    q.check_len(sys.k())?;
    let k = sys.k();
    let nf = sys.params.n as f64;
    let a = (nf - 2.0) / 2.0;
    let g = &sys.gammas;
    let m = sys.params.m;
    let w = sys.window_weight();
    let lam: Vec<f64> = q.lambda.iter().map(|x| sys.lambda() + x).collect();
    let mut jac = vec![vec![0.0; 3 * k]; 3 * k];
    for j in 0..k {
        let lj = lam[j];
        let (r0, r1, r2) = (j, k + j, 2 * k + j);
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for l in (0..k).filter(|&l| l != j) {
            let ([x, y], sp, cp) = local_difference(sys, q, j, l);
            let rho2 = x * x + y * y;
            let rho = rho2.sqrt();
            if rho == 0.0 {
                return Err(Error::CoincidentCenters(j, l));
            }
            let wl = lam[l].powf(-a);
            let dwl = -a * lam[l].powf(-a - 1.0);
            let rn = rho.powf(-nf);
            let (f0, f1, f2) = (rho.powf(2.0 - nf), x * rn, y * rn);
            s0 += wl * f0;
            s1 += wl * f1;
            s2 += wl * f2;
            let c0 = -0.5 * g.g1 * lj.powf(-nf / 2.0);
            let c12 = g.g1 * lj.powf(-a);
            jac[r0][l] += c0 * dwl * f0;
            jac[r1][l] += c12 * dwl * f1;
            jac[r2][l] += c12 * dwl * f2;
            // partials of (x, y) in (f_j, g_j, f_l, g_l)
            let dirs = [
                (k + j, 1.0, 0.0),
                (2 * k + j, 0.0, 1.0),
                (k + l, -cp, -sp),
                (2 * k + l, sp, -cp),
            ];
            for (col, dx, dy) in dirs {
                let dot = x * dx + y * dy;
                let d0 = (2.0 - nf) * rn * dot;
                let d1 = rn * dx - nf * x * rn / rho2 * dot;
                let d2 = rn * dy - nf * y * rn / rho2 * dot;
                jac[r0][col] += c0 * wl * d0;
                jac[r1][col] += c12 * wl * d1;
                jac[r2][col] += c12 * wl * d2;
            }
        }
        let (aj, norm, excess) = radial_position(sys, q, j);
        let gj = q.g[j];
        let n3 = norm.powi(3);
        let n4 = norm.powi(4);
        // own-concentration derivatives
        jac[r0][j] += 0.25 * nf * g.g1 * lj.powf(-nf / 2.0 - 1.0) * s0 - (1.0 + m) * w * g.g3 * lj.powf(-2.0 - m);
        let dshift = (2.0 - m) * w * g.g2 * lj.powf(1.0 - m) * excess;
        let dcurv = -m * w * g.g4 * lj.powf(-m - 1.0) / (norm * norm);
        jac[r1][j] += -a * g.g1 * lj.powf(-a - 1.0) * s1 + dshift * aj / norm + dcurv * aj;
        jac[r2][j] += -a * g.g1 * lj.powf(-a - 1.0) * s2 + dshift * gj / norm + dcurv * gj;
        // window terms in (f_j, g_j)
        let shift = w * g.g2 * lj.powf(2.0 - m);
        let curv = w * g.g4 * lj.powf(-m);
        let (hf, hg) = (aj / norm, gj / norm);
        let (uf, ug) = (gj * gj / n3, -aj * gj / n3);
        let (tf, tg) = (-gj * aj / n3, aj * aj / n3);
        let (vf, vg) = (1.0 / (norm * norm) - 2.0 * aj * aj / n4, -2.0 * aj * gj / n4);
        let (zf, zg) = (-2.0 * gj * aj / n4, 1.0 / (norm * norm) - 2.0 * gj * gj / n4);
        jac[r1][k + j] += shift * (hf * aj / norm + excess * uf) + curv * vf;
        jac[r1][2 * k + j] += shift * (hg * aj / norm + excess * ug) + curv * vg;
        jac[r2][k + j] += shift * (hf * gj / norm + excess * tf) + curv * zf;
        jac[r2][2 * k + j] += shift * (hg * gj / norm + excess * tg) + curv * zg;
    }
    Ok(jac)
}

/// Principal linear part `s·(T (λ/Λ, f, g))` mapped back to projection units.
pub fn projection_linearized(sys: &ReducedSystem, q: &Configuration) -> Result<ProjectionVector> {
    q.check_len(sys.k())?;
    let tv = sys.t.apply(&sys.to_matrix_units(q));
    Ok(ProjectionVector::from_matrix_units(sys, &tv))
}

/// `Φ(q) = P(q)` in matrix units minus `T (λ/Λ, f, g)`.
pub fn phi_remainder(sys: &ReducedSystem, q: &Configuration) -> Result<Vec<f64>> {
    let proj = projection_e(sys, q)?.to_matrix_units(sys);
    let tv = sys.t.apply(&sys.to_matrix_units(q));
    Ok(proj.iter().zip(&tv).map(|(a, b)| a - b).collect())
}

/// Chord `|Q_j - Q_l|^{-s}` and its expansion to first order in `q`.
pub fn distance_power(sys: &ReducedSystem, q: &Configuration, j: usize, l: usize, s: f64) -> Result<(f64, f64)> {
    q.check_len(sys.k())?;
    if j == l {
        return Err(Error::CoincidentCenters(j, l));
    }
    let ([x, y], _, _) = local_difference(sys, q, j, l);
    let exact = x.hypot(y).powf(-s);
    let r = sys.scales.ring_radius;
    let d = sys.scales.chord_between(j, l);
    let theta = 2.0 * PI * (j as f64 - l as f64) / sys.k() as f64;
    let expansion = d.powf(-s) * (1.0 - s * (q.f[j] + q.f[l]) / (2.0 * r))
        + s * r * d.powf(-s - 2.0) * (q.g[l] - q.g[j]) * theta.sin();
    Ok((exact, expansion))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointStep {
    pub iteration: usize,
    pub xi_norm: f64,
    /// `‖q_{t+1} - q_t‖_Ξ`.
    pub step: f64,
    /// `step_t / step_{t-1}`.
    pub ratio: Option<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub q: Configuration,
    pub trace: Vec<FixedPointStep>,
    pub converged: bool,
    pub final_xi_norm: f64,
    /// `d^{-τ2}`.
    pub bound: f64,
}

impl FixedPointReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.trace.iter().filter_map(|s| s.ratio).collect()
    }
}

/// Start configuration of size `amplitude · d^{-τ2}` in the Ξ-norm scaling.
///
/// `pattern(block, j)` with values in `[-1, 1]` fills blocks `0 = λ`, `1 = f`, `2 = g`; the
/// `g` block carries `amplitude` and the `λ`, `f` blocks a third of it.
pub fn start_configuration(
    sys: &ReducedSystem,
    amplitude: f64,
    pattern: impl Fn(usize, usize) -> f64,
) -> Configuration {
    let k = sys.k();
    let s = &sys.scales;
    let bound = s.chord.powf(-s.tau2);
    let mut q = Configuration::zeros(k, 0.0);
    for j in 0..k {
        q.lambda[j] = amplitude / 3.0 * bound / s.mu * pattern(0, j);
        q.f[j] = amplitude / 3.0 * bound / s.mu * pattern(1, j);
        q.g[j] = amplitude * bound / s.chord.powf(s.tau1) * pattern(2, j);
    }
    q
}

/// Consecutive ratios `>= 1` that count as divergence.
const DIVERGENCE_RUN: usize = 3;

/// `q_{t+1} = -T^{-1} Φ(q_t)` with the rotation multiplier chosen each step.
pub fn fixed_point(sys: &ReducedSystem, q0: &Configuration, max_iter: usize, tol: f64) -> Result<FixedPointReport> {
    fixed_point_with(sys, q0, max_iter, tol, |q| phi_remainder(sys, q))
}

/// `fixed_point` with a caller-supplied remainder map in matrix units.
pub fn fixed_point_with(
    sys: &ReducedSystem,
    q0: &Configuration,
    max_iter: usize,
    tol: f64,
    phi: impl Fn(&Configuration) -> Result<Vec<f64>>,
) -> Result<FixedPointReport> {
    q0.check_len(sys.k())?;
    if !(tol > 0.0) {
        return Err(domain("tol", format!("must be positive, got {tol}")));
    }
    let k = sys.k();
    let mut q = q0.clone();
    let mut trace = Vec::new();
    let mut last_step: Option<f64> = None;
    let mut run = 0;
    let mut converged = false;
    for iteration in 0..max_iter {
        let rhs: Vec<f64> = phi(&q)?.iter().map(|x| -x).collect();
        let hat = p_hat(&sys.scales, sys.lambda(), &sys.gammas, &q)?;
        let mut hat_units = hat;
        hat_units[..k].iter_mut().for_each(|x| *x *= -2.0 * sys.lambda());
        let sol = solve_t(&sys.t, &rhs, &hat_units)?;
        let next = sys.from_matrix_units(&sol.v, q.alpha)?;
        let diff = Configuration::from_vec(
            &next
                .to_vec()
                .iter()
                .zip(q.to_vec())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
            q.alpha,
        )?;
        let step = xi_norm(&diff, &sys.scales);
        let ratio = last_step.filter(|s| *s > 0.0).map(|s| step / s);
        q = next;
        trace.push(FixedPointStep {
            iteration,
            xi_norm: xi_norm(&q, &sys.scales),
            step,
            ratio,
            gamma: sol.gamma * sys.unit,
        });
        if step <= tol {
            converged = true;
            break;
        }
        run = if ratio.is_some_and(|r| r >= 1.0) { run + 1 } else { 0 };
        if run >= DIVERGENCE_RUN {
            return Err(Error::Divergence {
                ratios: trace.iter().filter_map(|s| s.ratio).collect(),
            });
        }
        last_step = Some(step);
    }
    Ok(FixedPointReport {
        final_xi_norm: xi_norm(&q, &sys.scales),
        bound: sys.scales.chord.powf(-sys.scales.tau2),
        q,
        trace,
        converged,
    })
}

/// `∫_{B_{d/2}(Q_j)} ||x| - μ r0|^m U_j^p Z_{j,l} dx` in coordinates along `Q_j/|Q_j|` and
/// the distance from that axis.
///
/// `l = 0` uses `Z_{j,0}`; `l = 1, 2` use `∇U_j·n_j` and `∇U_j·t_j`, whose off-axis parts
/// integrate to zero. `tol` bounds the relative gap between two rule sizes.
pub fn quad_projection_k(sys: &ReducedSystem, j: usize, l: usize, q: &Configuration, tol: f64) -> Result<f64> {
    q.check_len(sys.k())?;
    if j >= sys.k() || l > 2 {
        return Err(domain(
            "index",
            format!("need j < {} and l <= 2, got ({j}, {l})", sys.k()),
        ));
    }
    let (aj, norm, excess) = radial_position(sys, q, j);
    let axis_weight = match l {
        0 => 1.0,
        1 => aj / norm,
        _ => q.g[j] / norm,
    };
    if axis_weight == 0.0 {
        return Ok(0.0);
    }
    let fine = k_window_integral(sys, q, j, l == 0, norm, excess, 40);
    let coarse = k_window_integral(sys, q, j, l == 0, norm, excess, 28);
    let gap = ((fine - coarse) / fine).abs();
    if !(gap <= tol) {
        return Err(Error::NoConvergence {
            what: "window projection quadrature",
            iterations: 40,
            residual: gap,
            trace: vec![fine, coarse],
        });
    }
    Ok(axis_weight * fine)
}

fn k_window_integral(
    sys: &ReducedSystem,
    q: &Configuration,
    j: usize,
    radial_kernel: bool,
    norm: f64,
    excess: f64,
    deg: usize,
) -> f64 {
    let n = sys.params.n;
    let nf = n as f64;
    let p = sys.scales.p;
    let m = sys.params.m;
    let lam = sys.lambda() + q.lambda[j];
    let cn = bubble_constant(n);
    let ball = 0.5 * sys.scales.chord;
    let window = sys.params.delta * sys.scales.mu;
    let surface = sphere_area(n - 1);
    // polar coordinates (r, ψ) in the (axial, off-axis) half plane
    let lo = (1e-8 / lam).ln();
    let hi = ball.ln();
    let radial = Composite::half_line(lo, hi, deg);
    let angles: Vec<(f64, f64)> = Composite::new(0.0, 0.5 * PI, 4, deg)
        .points
        .into_iter()
        .chain(Composite::new(0.5 * PI, PI, 4, deg).points)
        .collect();
    radial.integrate(|r| {
        let t = lam * lam * r * r;
        let base = cn * lam.powf(a_half(nf)) * (1.0 + t).powf(-(nf - 2.0) / 2.0);
        let up = base.powf(p);
        let mut acc = 0.0;
        for &(psi, wpsi) in &angles {
            let (sp, cp) = psi.sin_cos();
            let y1 = r * cp;
            let off = r * sp;
            // |x| - |Q_j| = (2|Q_j| y1 + r^2) / (|x| + |Q_j|)
            let xnorm = (norm + y1).hypot(off);
            let dist = excess + (2.0 * norm * y1 + r * r) / (xnorm + norm);
            let weight = dist.abs().min(window).powf(m);
            let kernel = if radial_kernel {
                cn * (nf - 2.0) / 2.0 * lam.powf((nf - 4.0) / 2.0) * (1.0 + t).powf(-nf / 2.0) * (1.0 - t)
            } else {
                -(nf - 2.0) * cn * lam.powf((nf + 2.0) / 2.0) * (1.0 + t).powf(-nf / 2.0) * y1
            };
            acc += wpsi * weight * kernel * off.powf(nf - 2.0);
        }
        surface * up * acc * r
    })
}

fn a_half(nf: f64) -> f64 {
    (nf - 2.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::gamma_oracle;

    fn system(k: usize) -> ReducedSystem {
        let params = ProblemParams {
            k,
            ..Default::default()
        };
        ReducedSystem::with_gammas(&params, gamma_oracle(params.n, params.m)).unwrap()
    }

    #[test]
    fn radial_profile_is_flat_outside_window() {
        let p = ProblemParams::default();
        assert_eq!(radial_profile(&p, p.r0), 1.0);
        assert_eq!(radial_profile(&p, p.r0 + 2.0), radial_profile(&p, p.r0 + 5.0));
    }

    #[test]
    fn tangential_projection_vanishes_at_rest() {
        let sys = system(16);
        let (proj, scale) = projection_e_with_scale(&sys, &Configuration::zeros(16, 0.3)).unwrap();
        for (v, sc) in proj.proj2.iter().zip(&scale.proj2) {
            assert!(v.abs() <= 1e-12 * sc, "{v} vs {sc}");
        }
    }

    #[test]
    fn zero_remainder_fixes_origin() {
        let sys = system(16);
        let mut q0 = Configuration::zeros(16, 0.0);
        q0.g[3] = 0.1;
        let report = fixed_point_with(&sys, &q0, 5, 1e-300, |_| Ok(vec![0.0; 48])).unwrap();
        assert!(report.q.to_vec().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn axial_kernel_projection_vanishes_without_tangential_shift() {
        let sys = system(16);
        let q = Configuration::zeros(16, 0.0);
        assert_eq!(quad_projection_k(&sys, 0, 2, &q, 1e-6).unwrap(), 0.0);
    }
}
