//! The lattice series `g(x) = Σ_{j≥1} (1 - cos jx) / j^n`, its first two
//! derivatives, and the spectral condition
//! `g'' < (n-2)/(n-1) · g'^2 / g` on `(0, π)`.
//!
//! All three series are summed directly up to an explicit cutoff `N`. The
//! reported `tail_bound` is the smaller of the integral bound and, for the
//! oscillatory members, the summation-by-parts bound `(N+1)^{-s} / |sin(x/2)|`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};

/// A truncated series value with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEval {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Which member of the series family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Value,
    First,
    Second,
}

impl Order {
    /// Power of `j` in the denominator.
    fn power(self, n: usize) -> f64 {
        match self {
            Order::Value => n as f64,
            Order::First => n as f64 - 1.0,
            Order::Second => n as f64 - 2.0,
        }
    }

    /// Numerator bound: `|1 - cos| ≤ 2`, `|sin|, |cos| ≤ 1`.
    fn amplitude(self) -> f64 {
        match self {
            Order::Value => 2.0,
            _ => 1.0,
        }
    }

    /// `|sin(x/2)|` when summation by parts applies to this member, else `None`.
    fn abel_factor(self, x: f64) -> Option<f64> {
        let s = (0.5 * x).sin().abs();
        (self != Order::Value && s > 0.0).then_some(s)
    }

    fn cutoff(self, n: usize, tol: f64, x: f64) -> usize {
        let s = self.power(n);
        let a = self.amplitude();
        // a·N^{1-s}/(s-1) ≤ tol
        let integral = ((a / ((s - 1.0) * tol)).powf(1.0 / (s - 1.0)).ceil() as usize).max(1);
        // (N+1)^{-s}/|sin(x/2)| ≤ tol
        let abel = self
            .abel_factor(x)
            .map_or(usize::MAX, |f| (1.0 / (tol * f)).powf(1.0 / s).ceil() as usize);
        integral.min(abel).max(1)
    }

    fn tail(self, n: usize, terms: usize, x: f64) -> f64 {
        let s = self.power(n);
        let integral = self.amplitude() * (terms as f64).powf(1.0 - s) / (s - 1.0);
        let abel = self
            .abel_factor(x)
            .map_or(f64::INFINITY, |f| (terms as f64 + 1.0).powf(-s) / f);
        integral.min(abel)
    }
}

/// Neumaier compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

const RESYNC: usize = 64;

/// Sum the requested members up to their own cutoffs in one sweep over `j`.
fn sum_series(x: f64, n: usize, cutoffs: [usize; 3]) -> [f64; 3] {
    let last = cutoffs.iter().copied().max().unwrap_or(0);
    let (ws, wc) = x.sin_cos();
    let (mut s, mut c) = (ws, wc);
    let mut acc = [Compensated::default(); 3];
    let pv = n as i32;
    for j in 1..=last {
        if j % RESYNC == 0 {
            let (a, b) = (j as f64 * x).sin_cos();
            s = a;
            c = b;
        }
        let jf = j as f64;
        let inv_pow = 1.0 / jf.powi(pv - 2);
        let inv_j = 1.0 / jf;
        if j <= cutoffs[2] {
            acc[2].add(c * inv_pow);
        }
        if j <= cutoffs[1] {
            acc[1].add(s * inv_pow * inv_j);
        }
        if j <= cutoffs[0] {
            acc[0].add((1.0 - c) * inv_pow * inv_j * inv_j);
        }
        let ns = s * wc + c * ws;
        let nc = c * wc - s * ws;
        s = ns;
        c = nc;
    }
    [acc[0].value(), acc[1].value(), acc[2].value()]
}

fn check(n: usize, tol: f64, min_n: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(domain("tol", format!("must be positive, got {tol}")));
    }
    if n < min_n {
        return Err(domain("n", format!("need n >= {min_n}, got {n}")));
    }
    Ok(())
}

fn eval_one(x: f64, n: usize, tol: f64, order: Order) -> SeriesEval {
    let terms = order.cutoff(n, tol, x);
    let mut cut = [0; 3];
    let slot = match order {
        Order::Value => 0,
        Order::First => 1,
        Order::Second => 2,
    };
    cut[slot] = terms;
    let v = sum_series(x, n, cut)[slot];
    SeriesEval {
        value: v,
        tail_bound: order.tail(n, terms, x),
        terms_used: terms,
    }
}

/// `g(x)` with truncation error at most `tol`.
pub fn eval_g(x: f64, n: usize, tol: f64) -> Result<SeriesEval> {
    check(n, tol, 4)?;
    Ok(eval_one(x, n, tol, Order::Value))
}

/// `g'(x) = Σ sin(jx) / j^{n-1}`.
pub fn eval_g1(x: f64, n: usize, tol: f64) -> Result<SeriesEval> {
    check(n, tol, 5)?;
    Ok(eval_one(x, n, tol, Order::First))
}

/// `g''(x) = Σ cos(jx) / j^{n-2}`.
pub fn eval_g2(x: f64, n: usize, tol: f64) -> Result<SeriesEval> {
    check(n, tol, 5)?;
    Ok(eval_one(x, n, tol, Order::Second))
}

/// `(g, g', g'')` from a single sweep.
pub fn eval_all(x: f64, n: usize, tol: f64) -> Result<[SeriesEval; 3]> {
    check(n, tol, 5)?;
    let orders = [Order::Value, Order::First, Order::Second];
    let cut = orders.map(|o| o.cutoff(n, tol, x));
    let v = sum_series(x, n, cut);
    Ok([0, 1, 2].map(|i| SeriesEval {
        value: v[i],
        tail_bound: orders[i].tail(n, cut[i], x),
        terms_used: cut[i],
    }))
}

/// Riemann zeta `ζ(s)` for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 16;
    // B_{2i} / (2i)!
    const COEF: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|j| (j as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)...(s+2i-2) times N^{-s-2i+1}
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (i, c) in COEF.iter().enumerate() {
        sum += c * rising * power;
        let a = s + (2 * i + 1) as f64;
        rising *= a * (a + 1.0);
        power /= nf * nf;
    }
    sum
}

/// Pointwise margin of the spectral condition on an open grid of `(0, π)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub grid: Vec<f64>,
    /// `g''(x)`.
    pub lhs: Vec<f64>,
    /// `(n-2)/(n-1) · g'(x)^2 / g(x)`.
    pub rhs: Vec<f64>,
    pub margin: Vec<f64>,
    /// Limit of the margin as `x → 0+`: `(n-3)/(n-1) · ζ(n-2)`.
    pub limit_at_zero: f64,
    /// Margin at `x = π`: `-g''(π)`.
    pub value_at_pi: f64,
    pub min_margin: f64,
    pub holds: bool,
}

/// Truncation tolerance used for grid evaluations of the condition.
pub const CONDITION_TOL: f64 = 1e-12;

pub fn condition_margin(n: usize, grid_size: usize) -> Result<ConditionReport> {
    check(n, CONDITION_TOL, 5)?;
    if grid_size < 100 {
        return Err(domain("grid", format!("need at least 100 points, got {grid_size}")));
    }
    let a = (n as f64 - 2.0) / (n as f64 - 1.0);
    let h = PI / (grid_size as f64 + 1.0);
    let grid: Vec<f64> = (1..=grid_size).map(|i| i as f64 * h).collect();
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let [g0, g1, g2] = eval_all(x, n, CONDITION_TOL).expect("validated above");
            let (g, gp, gpp) = (g0.value, g1.value, g2.value);
            // rearranged numerator avoids subtracting two large quotients
            let margin = (a * gp * gp - g * gpp) / g;
            (gpp, a * gp * gp / g, margin)
        })
        .collect();
    let limit_at_zero = (n as f64 - 3.0) / (n as f64 - 1.0) * zeta(n as f64 - 2.0);
    let value_at_pi = -eval_g2(PI, n, CONDITION_TOL)?.value;
    let min_margin = rows
        .iter()
        .map(|r| r.2)
        .chain([limit_at_zero, value_at_pi])
        .fold(f64::INFINITY, f64::min);
    Ok(ConditionReport {
        n,
        lhs: rows.iter().map(|r| r.0).collect(),
        rhs: rows.iter().map(|r| r.1).collect(),
        margin: rows.iter().map(|r| r.2).collect(),
        grid,
        limit_at_zero,
        value_at_pi,
        min_margin,
        holds: min_margin > 0.0,
    })
}

/// `condition_margin` for every dimension in `n_min..=n_max`.
pub fn verify_condition(n_min: usize, n_max: usize, grid_size: usize) -> Result<Vec<ConditionReport>> {
    (n_min..=n_max).map(|n| condition_margin(n, grid_size)).collect()
}
