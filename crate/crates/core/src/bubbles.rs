//! Aubin–Talenti bubbles, their kernels, the interaction constants and the
//! leading terms of pairwise interaction integrals.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::model::critical_exponent;
use crate::quad::{log_window, Composite, PANEL_DEGREE};

/// Normalisation `c_n = (n(n-2))^{(n-2)/4}`.
pub fn bubble_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

/// Surface area of the unit sphere in `R^dim`.
pub fn sphere_area(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub center: Vec<f64>,
    pub lambda: f64,
}

/// Unit normal and tangent of a ring position, in the first two coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
}

fn offset(x: &[f64], q: &[f64]) -> Vec<f64> {
    x.iter().zip(q).map(|(a, b)| a - b).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

pub fn eval_bubble(x: &[f64], b: &Bubble, n: usize) -> f64 {
    let nf = n as f64;
    let r2 = norm2(&offset(x, &b.center));
    bubble_constant(n) * b.lambda.powf((nf - 2.0) / 2.0) * (1.0 + b.lambda * b.lambda * r2).powf(-(nf - 2.0) / 2.0)
}

/// `∇_x U`.
pub fn bubble_gradient(x: &[f64], b: &Bubble, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let y = offset(x, &b.center);
    let l2 = b.lambda * b.lambda;
    let s = -(nf - 2.0) * bubble_constant(n) * b.lambda.powf((nf + 2.0) / 2.0) * (1.0 + l2 * norm2(&y)).powf(-nf / 2.0);
    y.into_iter().map(|c| s * c).collect()
}

/// `∂U/∂Λ`.
pub fn eval_z0(x: &[f64], b: &Bubble, n: usize) -> f64 {
    let nf = n as f64;
    let t = b.lambda * b.lambda * norm2(&offset(x, &b.center));
    bubble_constant(n) * (nf - 2.0) / 2.0 * b.lambda.powf((nf - 4.0) / 2.0) * (1.0 + t).powf(-nf / 2.0) * (1.0 - t)
}

fn directional(x: &[f64], b: &Bubble, n: usize, dir: [f64; 2]) -> f64 {
    let g = bubble_gradient(x, b, n);
    g[0] * dir[0] + g[1] * dir[1]
}

/// `∇U · n_j`.
pub fn eval_z1(x: &[f64], b: &Bubble, n: usize, frame: &Frame) -> f64 {
    directional(x, b, n, frame.normal)
}

/// `∇U · t_j`.
pub fn eval_z2(x: &[f64], b: &Bubble, n: usize, frame: &Frame) -> f64 {
    directional(x, b, n, frame.tangent)
}

/// Interaction constants `γ1..γ4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaConstants {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
}

fn check_exponent(n: usize, m: f64) -> Result<()> {
    if n < 5 {
        return Err(domain("n", format!("need n >= 5, got {n}")));
    }
    let nf = n as f64;
    let lower = ((nf - 2.0) / 2.0).min(2.0);
    if !(m > lower && m < nf - 2.0) {
        return Err(domain("m", format!("need {lower} < m < {}, got {m}", nf - 2.0)));
    }
    Ok(())
}

/// Closed form of `∫_{R^n} |y_1|^a (1+|y|^2)^{-b} dy`.
pub fn axis_moment(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    PI.powf((nf - 1.0) / 2.0) * gamma((a + 1.0) / 2.0) * gamma(b - (nf + a) / 2.0) / gamma(b)
}

/// Closed form of `∫_{R^n} |y|^a (1+|y|^2)^{-b} dy`.
pub fn radial_moment(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    let s = (nf + a) / 2.0;
    PI.powf(nf / 2.0) / gamma(nf / 2.0) * gamma(s) * gamma(b - s) / gamma(b)
}

/// `∫_{R^n} |y_1|^a |y'|^c (1+|y|^2)^{-b} dy` by tensor quadrature in `(|y_1|, |y'|)`.
fn split_moment_quadrature(n: usize, a: f64, c: f64, b: f64, deg: usize) -> f64 {
    let nf = n as f64;
    let decay = 2.0 * b - a - c - nf;
    let (ulo, uhi) = log_window(a + 1.0, decay);
    let (vlo, vhi) = log_window(c + nf - 1.0, decay);
    let us = Composite::half_line(ulo, uhi, deg);
    let vs = Composite::half_line(vlo, vhi, deg);
    let upow: Vec<(f64, f64)> = us.points.iter().map(|&(u, w)| (u * u, w * u.powf(a))).collect();
    let vpow: Vec<(f64, f64)> = vs
        .points
        .iter()
        .map(|&(v, w)| (v * v, w * v.powf(c + nf - 2.0)))
        .collect();
    let mut total = 0.0;
    for &(u2, wu) in &upow {
        let mut row = 0.0;
        for &(v2, wv) in &vpow {
            row += wv * (1.0 + u2 + v2).powf(-b);
        }
        total += wu * row;
    }
    // both signs of y_1, and the sphere of directions of y'
    2.0 * sphere_area(n - 1) * total
}

/// `∫_{R^n} |y|^a (1+|y|^2)^{-b} dy` by radial quadrature.
fn radial_moment_quadrature(n: usize, a: f64, b: f64, deg: usize) -> f64 {
    let nf = n as f64;
    let (lo, hi) = log_window(nf + a, 2.0 * b - a - nf);
    let r = Composite::half_line(lo, hi, deg);
    sphere_area(n) * r.integrate(|t| t.powf(nf - 1.0 + a) * (1.0 + t * t).powf(-b))
}

const FINE_DEGREE: usize = PANEL_DEGREE;
const COARSE_DEGREE: usize = 14;

fn gammas_at_degree(n: usize, m: f64, deg: usize) -> GammaConstants {
    let nf = n as f64;
    let cp = bubble_constant(n).powf(critical_exponent(n) + 1.0);
    let p = critical_exponent(n);
    GammaConstants {
        g1: (nf - 2.0) * cp * radial_moment_quadrature(n, 0.0, (nf + 2.0) / 2.0, deg),
        g2: (nf - 2.0) * m * cp * split_moment_quadrature(n, m, 0.0, nf + 1.0, deg),
        g3: m / (p + 1.0) * cp * split_moment_quadrature(n, m, 0.0, nf, deg),
        g4: (nf - 2.0) / 2.0 * m * cp * split_moment_quadrature(n, m, 2.0, nf + 1.0, deg),
    }
}

/// Interaction constants by quadrature.
///
/// The `γ4` integrand `|y_1|^m |y|^2 - |y_1|^{m+2}` equals `|y_1|^m |y'|^2`, so it is
/// evaluated in that pointwise-nonnegative form. `tol` bounds the relative gap between a
/// fine and a coarse rule.
pub fn gamma_constants(n: usize, m: f64, tol: f64) -> Result<GammaConstants> {
    check_exponent(n, m)?;
    if !(tol > 0.0) {
        return Err(domain("tol", format!("must be positive, got {tol}")));
    }
    let fine = gammas_at_degree(n, m, FINE_DEGREE);
    let coarse = gammas_at_degree(n, m, COARSE_DEGREE);
    let pairs = [
        (fine.g1, coarse.g1),
        (fine.g2, coarse.g2),
        (fine.g3, coarse.g3),
        (fine.g4, coarse.g4),
    ];
    let worst = pairs.iter().map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::NoConvergence {
            what: "gamma quadrature",
            iterations: FINE_DEGREE,
            residual: worst,
            trace: pairs.iter().map(|(a, _)| *a).collect(),
        });
    }
    Ok(fine)
}

/// Interaction constants from Gamma-function closed forms.
pub fn gamma_oracle(n: usize, m: f64) -> GammaConstants {
    let nf = n as f64;
    let p = critical_exponent(n);
    let cp = bubble_constant(n).powf(p + 1.0);
    // |y'|^2 = (1+|y|^2) - 1 - y_1^2
    let split = axis_moment(n, m, nf) - axis_moment(n, m, nf + 1.0) - axis_moment(n, m + 2.0, nf + 1.0);
    GammaConstants {
        g1: (nf - 2.0) * cp * radial_moment(n, 0.0, (nf + 2.0) / 2.0),
        g2: (nf - 2.0) * m * cp * axis_moment(n, m, nf + 1.0),
        g3: m / (p + 1.0) * cp * axis_moment(n, m, nf),
        g4: (nf - 2.0) / 2.0 * m * cp * split,
    }
}

/// `c0·m(m-1)/(p+1) · ∫ |y|^{m-2} U^{p+1}` by radial quadrature.
pub fn zeta_constant(n: usize, m: f64, c0: f64) -> Result<f64> {
    check_exponent(n, m)?;
    let nf = n as f64;
    let p = critical_exponent(n);
    let cp = bubble_constant(n).powf(p + 1.0);
    Ok(c0 * m * (m - 1.0) / (p + 1.0) * cp * radial_moment_quadrature(n, m - 2.0, nf, FINE_DEGREE))
}

pub fn zeta_constant_oracle(n: usize, m: f64, c0: f64) -> f64 {
    let nf = n as f64;
    let p = critical_exponent(n);
    let cp = bubble_constant(n).powf(p + 1.0);
    c0 * m * (m - 1.0) / (p + 1.0) * cp * radial_moment(n, m - 2.0, nf)
}

/// Self products `∫ U^{p-1} Z_l^2` for `l = 0` and `l = 1, 2` (equal by symmetry).
pub fn kernel_self_products(n: usize, lambda: f64) -> (f64, f64) {
    let nf = n as f64;
    let cp = bubble_constant(n).powf(critical_exponent(n) + 1.0);
    let b = nf + 2.0;
    let z0 = lambda.powi(-2) * cp * (nf - 2.0).powi(2) / 4.0
        * (radial_moment(n, 0.0, b) - 2.0 * radial_moment(n, 2.0, b) + radial_moment(n, 4.0, b));
    let z1 = lambda * lambda * (nf - 2.0).powi(2) * cp * axis_moment(n, 2.0, b);
    (z0, z1)
}

fn separation(bj: &Bubble, bl: &Bubble, j: usize, l: usize) -> Result<(Vec<f64>, f64)> {
    let diff = offset(&bj.center, &bl.center);
    let r = norm2(&diff).sqrt();
    if r == 0.0 {
        return Err(Error::CoincidentCenters(j, l));
    }
    Ok((diff, r))
}

/// Leading term of `∫ p U_j^{p-1} ∇U_j U_l`.
pub fn pair_gradient(bj: &Bubble, bl: &Bubble, n: usize, gamma1: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let (diff, r) = separation(bj, bl, 0, 1)?;
    let s = gamma1 * (bj.lambda * bl.lambda).powf(-(nf - 2.0) / 2.0) * r.powf(-nf);
    Ok(diff.into_iter().map(|c| s * c).collect())
}

/// Leading term of `∫ p U_j^{p-1} Z_{j,0} U_l`.
pub fn pair_z0(bj: &Bubble, bl: &Bubble, n: usize, gamma1: f64) -> Result<f64> {
    let nf = n as f64;
    let (_, r) = separation(bj, bl, 0, 1)?;
    Ok(-0.5 * gamma1 * bj.lambda.powf(-nf / 2.0) * bl.lambda.powf(-(nf - 2.0) / 2.0) * r.powf(2.0 - nf))
}

/// Leading term of `∫ p U_j^{p-1} ∇U_j Z_{l,0}`.
pub fn pair_grad_z0(bj: &Bubble, bl: &Bubble, n: usize, gamma1: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let (diff, r) = separation(bj, bl, 0, 1)?;
    let s = (nf - 2.0) / 2.0 * gamma1 * bj.lambda.powf(-(nf - 2.0) / 2.0) * bl.lambda.powf(-nf / 2.0) * r.powf(-nf);
    Ok(diff.into_iter().map(|c| s * c).collect())
}

/// Leading term of `∫ p(p-1) U_j^{p-2} ∇U_j Z_{j,0} U_l`.
pub fn pair_grad_z0_self(bj: &Bubble, bl: &Bubble, n: usize, gamma1: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let (diff, r) = separation(bj, bl, 0, 1)?;
    let s = (nf - 2.0) / 2.0 * gamma1 * bj.lambda.powf(-nf / 2.0) * bl.lambda.powf(-(nf - 2.0) / 2.0) * r.powf(-nf);
    Ok(diff.into_iter().map(|c| s * c).collect())
}

/// Leading term of `∫ p U_j^{p-1} Z_{j,0} Z_{l,0}`.
pub fn pair_z0_z0(bj: &Bubble, bl: &Bubble, n: usize, gamma1: f64) -> Result<f64> {
    let nf = n as f64;
    let (_, r) = separation(bj, bl, 0, 1)?;
    Ok((nf - 2.0) / 4.0 * gamma1 * (bj.lambda * bl.lambda).powf(-nf / 2.0) * r.powf(2.0 - nf))
}

/// Quadrature of `∫ p U_j^{p-1} ∂_1 U_j U_l` for unit bubbles at `0` and `ρ e_1`,
/// restricted to the ball `|y| < ρ/2`. Returns the value and a bound on the discarded
/// exterior part.
pub fn pair_gradient_quadrature(rho: f64, n: usize) -> Result<(f64, f64)> {
    if n < 5 {
        return Err(domain("n", format!("need n >= 5, got {n}")));
    }
    if !(rho > 2.0) {
        return Err(domain("rho", format!("need rho > 2, got {rho}")));
    }
    let nf = n as f64;
    let p = critical_exponent(n);
    let c = bubble_constant(n);
    let unit = Bubble {
        center: vec![0.0; n],
        lambda: 1.0,
    };
    let far = |y1: f64, v: f64| c * (1.0 + (y1 - rho).powi(2) + v * v).powf(-(nf - 2.0) / 2.0);
    let radius = 0.5 * rho;
    let lo = radius.ln() - 40.0 / (nf + 1.0);
    let radial = {
        let panels = ((radius.ln() - lo) / 1.0).ceil() as usize;
        let mut r = Composite::new(lo, radius.ln(), panels, FINE_DEGREE);
        for (t, w) in r.points.iter_mut() {
            let u = t.exp();
            *w *= u;
            *t = u;
        }
        r
    };
    let angular = Composite::new(0.0, PI / 2.0, 8, FINE_DEGREE);
    let mut total = 0.0;
    for &(r, wr) in &radial.points {
        let mut y = vec![0.0; n];
        y[0] = r;
        let u = eval_bubble(&y, &unit, n);
        // p U^{p-1} ∂_1 U at radius r, per unit of y_1
        let du = -(nf - 2.0) * c * (1.0 + r * r).powf(-nf / 2.0);
        let core = p * u.powf(p - 1.0) * du;
        let mut ang = 0.0;
        for &(phi, wp) in &angular.points {
            let (s, co) = phi.sin_cos();
            let (y1, v) = (r * co, r * s);
            ang += wp * y1 * s.powf(nf - 2.0) * (far(y1, v) - far(-y1, v));
        }
        total += wr * core * r.powf(nf - 1.0) * ang;
    }
    let value = sphere_area(n - 1) * total;
    let tail = 5.0 / 6.0 * p * (nf - 2.0) * c.powf(p + 1.0) * sphere_area(n) * radius.powf(-nf - 1.0);
    Ok((value, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Bubble {
        Bubble {
            center: vec![0.0; n],
            lambda: 1.0,
        }
    }

    #[test]
    fn center_values() {
        let b = Bubble {
            center: vec![1.0, 2.0, 0.0, 0.0, 0.0],
            lambda: 2.0,
        };
        let u = eval_bubble(&b.center, &b, 5);
        assert!((u - bubble_constant(5) * 2f64.powf(1.5)).abs() < 1e-12);
        let fr = Frame {
            normal: [1.0, 0.0],
            tangent: [0.0, 1.0],
        };
        assert_eq!(eval_z1(&b.center, &b, 5, &fr), 0.0);
        assert_eq!(eval_z2(&b.center, &b, 5, &fr), 0.0);
    }

    #[test]
    fn base_integral() {
        let v = radial_moment(5, 0.0, 3.5);
        assert!((v - PI.powf(2.5) / gamma(3.5)).abs() < 1e-13);
        assert!((radial_moment_quadrature(5, 0.0, 3.5, FINE_DEGREE) - v).abs() < 1e-10 * v);
        assert!((axis_moment(5, 0.0, 3.5) - v).abs() < 1e-12 * v);
    }

    #[test]
    fn gamma1_closed_form_n5() {
        let g = gamma_oracle(5, 2.5);
        let expect = 3.0 * 15f64.powf(2.5) * PI.powf(2.5) / gamma(3.5);
        assert!((g.g1 - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn gamma_rejects_bad_exponent() {
        assert!(gamma_constants(5, 3.5, 1e-8).is_err());
        assert!(gamma_constants(6, 1.9, 1e-8).is_err());
    }

    #[test]
    fn pair_terms_are_antisymmetric_and_homogeneous() {
        let g1 = 1.0;
        let a = unit(5);
        let mut b = unit(5);
        b.center[0] = 10.0;
        let ab = pair_gradient(&a, &b, 5, g1).unwrap();
        let ba = pair_gradient(&b, &a, 5, g1).unwrap();
        assert!((ab[0] + ba[0]).abs() < 1e-18);
        let mut c = unit(5);
        c.center[0] = 20.0;
        let ac = pair_gradient(&a, &c, 5, g1).unwrap();
        assert!((ab[0] / ac[0] - 16.0).abs() < 1e-12);
        assert!(matches!(pair_z0(&a, &a, 5, g1), Err(Error::CoincidentCenters(..))));
    }
}
