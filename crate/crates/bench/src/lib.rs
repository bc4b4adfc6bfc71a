//! Fixtures shared by the benchmarks.

use ringbump::balance::solve_balance;
use ringbump::bubbles::{gamma_constants, GammaConstants};
use ringbump::circulant::{build_t, ReducedMatrixT};
use ringbump::{ProblemParams, Result};

pub fn params(k: usize) -> ProblemParams {
    ProblemParams {
        k,
        ..ProblemParams::default()
    }
}

pub fn gammas() -> Result<GammaConstants> {
    gamma_constants(5, 2.5, 1e-10)
}

/// Reduced matrix at the balanced ring for `k` bubbles.
pub fn reduced_matrix(k: usize) -> Result<ReducedMatrixT> {
    let p = params(k);
    let g = gammas()?;
    let sol = solve_balance(&p, &g)?;
    build_t(&p, &g, sol.lambda, sol.ring_radius(&p))
}

/// Smooth deterministic right-hand side for the `2k` constrained system.
pub fn rhs(k: usize) -> Vec<f64> {
    (0..2 * k).map(|i| (0.37 * i as f64).sin() + 0.1).collect()
}
