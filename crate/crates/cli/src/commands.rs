//! Drivers for each subcommand. Each one returns its artifacts and checks; nothing is
//! written here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ringbump::balance::{solve_balance, solve_finite, substitution_defect};
use ringbump::bubbles::{gamma_constants, gamma_oracle, zeta_constant, zeta_constant_oracle};
use ringbump::circulant::{build_t, det_dnu, det_dnu_asymptotic, t_eigen_asymptotic};
use ringbump::errfield::{sample_points, sup_norm_sampled, ErrorField, Zone};
use ringbump::nondegen::{build_blocks, eigen_blocks, scaled_det};
use ringbump::reduced::{fixed_point, start_configuration, ReducedSystem};
use ringbump::specfun::verify_condition;
use ringbump::{Configuration, Result};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::output::{Artifact, Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    /// Human-readable summary printed to stdout.
    pub lines: Vec<String>,
}

pub fn dispatch(cfg: &RunConfig) -> Result<CommandOutput> {
    match cfg.command {
        Command::VerifyG => verify_g(cfg),
        Command::Gammas => gammas(cfg),
        Command::Balance => balance(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Reduce => reduce(cfg),
        Command::Nondegen => nondegen(cfg),
        Command::ErrorNorm => error_norm(cfg),
    }
}

/// Run `f` for every `k` of the sweep concurrently, keeping sweep order.
fn per_k<T: Send>(cfg: &RunConfig, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<(usize, T)>> {
    cfg.ks().into_par_iter().map(|k| f(k).map(|t| (k, t))).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn bracket(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn verify_g(cfg: &RunConfig) -> Result<CommandOutput> {
    let reports = verify_condition(cfg.n_min, cfg.n_max, cfg.grid)?;
    let mut table = Table::new(&["n", "x", "lhs", "rhs", "margin"]);
    let mut out = CommandOutput::default();
    out.lines.push(format!(
        "{:>4} {:>24} {:>24} {:>24}  holds",
        "n", "min margin", "limit at 0+", "value at pi"
    ));
    let mut rows = Vec::new();
    for r in &reports {
        for i in 0..r.grid.len() {
            table.push(vec![
                r.n.into(),
                r.grid[i].into(),
                r.lhs[i].into(),
                r.rhs[i].into(),
                r.margin[i].into(),
            ]);
        }
        out.lines.push(format!(
            "{:>4} {:>24.16e} {:>24.16e} {:>24.16e}  {}",
            r.n, r.min_margin, r.limit_at_zero, r.value_at_pi, r.holds
        ));
        rows.push(json!({
            "n": r.n,
            "min_margin": r.min_margin,
            "limit_at_zero": r.limit_at_zero,
            "value_at_pi": r.value_at_pi,
            "holds": r.holds,
        }));
    }
    let failing: Vec<usize> = reports.iter().filter(|r| !r.holds).map(|r| r.n).collect();
    out.checks.push(Check::new(
        "condition holds",
        failing.is_empty(),
        format!(
            "n={}..{} on {} points, failing n: {failing:?}",
            cfg.n_min, cfg.n_max, cfg.grid
        ),
    ));
    out.artifacts.push(Artifact::csv("condition.csv", &table));
    out.artifacts.push(Artifact::json(
        "verify_g.json",
        &json!({"grid": cfg.grid, "n_min": cfg.n_min, "n_max": cfg.n_max, "results": rows}),
    ));
    Ok(out)
}

fn gammas(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = &cfg.params;
    let q = gamma_constants(p.n, p.m, cfg.tol)?;
    let o = gamma_oracle(p.n, p.m);
    let zq = zeta_constant(p.n, p.m, p.c0)?;
    let zo = zeta_constant_oracle(p.n, p.m, p.c0);
    let entries = [
        ("gamma1", q.g1, o.g1),
        ("gamma2", q.g2, o.g2),
        ("gamma3", q.g3, o.g3),
        ("gamma4", q.g4, o.g4),
        ("zeta", zq, zo),
    ];
    let mut table = Table::new(&["name", "quadrature", "closed_form", "rel_err"]);
    let mut out = CommandOutput::default();
    let mut worst: f64 = 0.0;
    let mut rows = serde_json::Map::new();
    for (name, a, b) in entries {
        let e = rel(a, b);
        worst = worst.max(e);
        table.push(vec![name.into(), a.into(), b.into(), e.into()]);
        out.lines.push(format!("{name:>7} {a:>24.16e} {b:>24.16e} {e:.2e}"));
        rows.insert(name.into(), json!({"quadrature": a, "closed_form": b, "rel_err": e}));
    }
    out.checks.push(Check::new(
        "quadrature agrees with closed form",
        worst <= 1e-8,
        format!("worst relative error {worst:.3e} (limit 1e-8)"),
    ));
    out.artifacts.push(Artifact::csv("gammas.csv", &table));
    out.artifacts.push(Artifact::json(
        "gammas.json",
        &json!({"n": p.n, "m": p.m, "tol": cfg.tol, "constants": rows, "worst_rel_err": worst}),
    ));
    Ok(out)
}

fn balance(cfg: &RunConfig) -> Result<CommandOutput> {
    let g = gamma_constants(cfg.params.n, cfg.params.m, 1e-10)?;
    let results = per_k(cfg, |k| {
        let p = cfg.params_for(k);
        let sol = solve_balance(&p, &g)?;
        let fin = solve_finite(&p, &g)?;
        Ok((p.mu(), sol, substitution_defect(&p, &g, &sol), fin))
    })?;
    let mut table = Table::new(&[
        "k",
        "lambda",
        "r0_shift",
        "residual_1",
        "residual_2",
        "mu_r0_shift",
        "substitution_defect",
        "finite_r_offset",
        "iterations",
    ]);
    let mut out = CommandOutput::default();
    let mut rows = Vec::new();
    let (mut res, mut subst): (f64, f64) = (0.0, 0.0);
    for (k, (mu, sol, defect, fin)) in &results {
        table.push(vec![
            (*k).into(),
            sol.lambda.into(),
            sol.r0_shift.into(),
            sol.residual_1.into(),
            sol.residual_2.into(),
            (mu * sol.r0_shift).into(),
            (*defect).into(),
            fin.r_offset.into(),
            sol.iterations.into(),
        ]);
        res = res.max(sol.residual_1.abs()).max(sol.residual_2.abs());
        subst = subst.max(defect.abs());
        out.lines
            .push(format!("k={k:<4} Λ={:.16e} R0={:.16e}", sol.lambda, sol.r0_shift));
        rows.push(json!({
            "k": k, "lambda": sol.lambda, "r0_shift": sol.r0_shift,
            "residual_1": sol.residual_1, "residual_2": sol.residual_2,
            "substitution_defect": defect, "iterations": sol.iterations,
        }));
    }
    out.checks.push(Check::new(
        "balance residuals",
        res <= cfg.tol,
        format!("{res:.3e} (limit {:.0e})", cfg.tol),
    ));
    out.checks.push(Check::new(
        "substitution identity",
        subst <= 1e-10,
        format!("{subst:.3e} (limit 1e-10)"),
    ));
    out.artifacts.push(Artifact::csv("balance.csv", &table));
    out.artifacts
        .push(Artifact::json("balance.json", &json!({"results": rows})));
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

struct SpectrumRun {
    rows: Vec<[f64; 9]>,
    zero_modes: f64,
    scaled: Vec<f64>,
    quarter: Option<[f64; 4]>,
}

fn spectrum(cfg: &RunConfig) -> Result<CommandOutput> {
    let g = gamma_constants(cfg.params.n, cfg.params.m, 1e-10)?;
    let nf = cfg.params.n as f64;
    let results = per_k(cfg, |k| {
        let p = cfg.params_for(k);
        let sol = solve_balance(&p, &g)?;
        let t = build_t(&p, &g, sol.lambda, sol.ring_radius(&p))?;
        let mut rows = Vec::with_capacity(k);
        let mut scaled = Vec::new();
        let mut quarter = None;
        for nu in 0..k {
            let [a1, a2, a3] = t_eigen_asymptotic(p.n, k, nu)?;
            let d = det_dnu(&t, nu);
            let da = det_dnu_asymptotic(&t, nu)?;
            let errs = [
                rel(t.lambda1[nu], a1),
                rel(t.lambda2[nu], a2),
                rel(t.lambda3[nu], a3),
                rel(d, da),
            ];
            if nu > 0 {
                let nb = nu.min(k - nu) as f64;
                scaled.push(d / (nb * nb * (k as f64).powf(2.0 * nf - 4.0)));
            }
            if 4 * nu == k {
                quarter = Some(errs);
            }
            rows.push([
                nu as f64,
                t.lambda1[nu],
                t.lambda2[nu],
                t.lambda3[nu],
                d,
                errs[0],
                errs[1],
                errs[2],
                errs[3],
            ]);
        }
        let s2 = sup(t.lambda2.iter().copied());
        let s3 = sup(t.lambda3.iter().copied());
        let zero_modes = (t.lambda2[0].abs() / s2).max(t.lambda3[0].abs() / s3);
        Ok(SpectrumRun {
            rows,
            zero_modes,
            scaled,
            quarter,
        })
    })?;
    let mut out = CommandOutput::default();
    let mut per_k_json = Vec::new();
    for (k, run) in &results {
        let mut table = Table::new(&[
            "nu",
            "lambda1",
            "lambda2_imag",
            "lambda3",
            "d_nu",
            "asym_rel_err_lambda1",
            "asym_rel_err_lambda2",
            "asym_rel_err_lambda3",
            "asym_rel_err_d_nu",
        ]);
        for r in &run.rows {
            let mut row: Vec<Cell> = vec![(r[0] as usize).into()];
            row.extend(r[1..].iter().map(|x| Cell::Num(*x)));
            table.push(row);
        }
        out.artifacts.push(Artifact::csv(format!("spectrum_k{k}.csv"), &table));
        let (lo, hi) = bracket(run.scaled.iter().copied());
        out.lines.push(format!(
            "k={k:<4} D_ν/(ν̄²k^(2n-4)) in [{lo:.6e}, {hi:.6e}], zero modes {:.2e}",
            run.zero_modes
        ));
        per_k_json.push(json!({
            "k": k,
            "scaled_det_min": lo,
            "scaled_det_max": hi,
            "zero_modes": run.zero_modes,
            "quarter_frequency_rel_err": run.quarter.map(|q| json!({
                "lambda1": q[0], "lambda2": q[1], "lambda3": q[2], "d_nu": q[3],
            })),
        }));
    }
    let (lo, hi) = bracket(results.iter().flat_map(|(_, r)| r.scaled.iter().copied()));
    let zero = results.iter().fold(0.0_f64, |a, (_, r)| a.max(r.zero_modes));
    let names = ["lambda1", "lambda2", "lambda3", "d_nu"];
    let mut slopes = serde_json::Map::new();
    for (i, name) in names.iter().enumerate() {
        let pts: Vec<(f64, f64)> = results
            .iter()
            .filter_map(|(k, r)| r.quarter.map(|q| (*k as f64, q[i])))
            .collect();
        slopes.insert((*name).into(), log_slope(&pts).map_or(Value::Null, |s| json!(s)));
    }
    out.checks.push(Check::new(
        "zero modes vanish",
        zero <= 1e-12,
        format!("{zero:.3e}·scale (limit 1e-12)"),
    ));
    out.checks.push(Check::new(
        "scaled determinants bracketed",
        lo > 0.0 && hi / lo <= 10.0,
        format!("[{lo:.4e}, {hi:.4e}], ratio {:.3} (limit 10)", hi / lo),
    ));
    out.artifacts.push(Artifact::json(
        "spectrum_fit.json",
        &json!({
            "ks": cfg.ks(),
            "per_k": per_k_json,
            "scaled_det_bracket": [lo, hi],
            "scaled_det_ratio": hi / lo,
            "quarter_frequency_log_slopes": slopes,
        }),
    ));
    Ok(out)
}

fn seeded_pattern(seed: u64, k: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).rotate_left(32));
    (0..3 * k).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn reduce(cfg: &RunConfig) -> Result<CommandOutput> {
    let results = per_k(cfg, |k| {
        let sys = ReducedSystem::new(&cfg.params_for(k))?;
        let w = seeded_pattern(cfg.seed, k);
        let q0 = start_configuration(&sys, cfg.start_amplitude, |block, j| w[block * k + j]);
        let bound = sys.scales.chord.powf(-sys.scales.tau2);
        let start_norm = ringbump::model::xi_norm(&q0, &sys.scales);
        let report = fixed_point(&sys, &q0, cfg.max_iter, cfg.tol * bound)?;
        Ok((start_norm, report))
    })?;
    let mut out = CommandOutput::default();
    let mut all_converged = true;
    let mut within = true;
    let mut worst_ratio: f64 = 0.0;
    for (k, (start_norm, r)) in &results {
        let iterates: Vec<Value> = r
            .trace
            .iter()
            .map(
                |s| json!({"t": s.iteration, "xi_norm": s.xi_norm, "step": s.step, "ratio": s.ratio, "gamma": s.gamma}),
            )
            .collect();
        let ratio = r.ratios().iter().fold(0.0_f64, |a, x| a.max(*x));
        worst_ratio = worst_ratio.max(ratio);
        all_converged &= r.converged;
        within &= r.final_xi_norm <= r.bound;
        out.lines.push(format!(
            "k={k:<4} {} after {} iterates, ‖q‖_Ξ {:.6e} (bound {:.6e}), max ratio {ratio:.3e}",
            if r.converged { "converged" } else { "not converged" },
            r.trace.len(),
            r.final_xi_norm,
            r.bound
        ));
        out.artifacts.push(Artifact::json(
            format!("reduce_k{k}.json"),
            &json!({
                "k": k,
                "bound": r.bound,
                "step_tolerance": cfg.tol * r.bound,
                "start_xi_norm": start_norm,
                "converged": r.converged,
                "final_xi_norm": r.final_xi_norm,
                "iterates": iterates,
                "q": {"lambda": r.q.lambda, "f": r.q.f, "g": r.q.g, "alpha": r.q.alpha},
            }),
        ));
    }
    out.checks.push(Check::new(
        "converged",
        all_converged,
        format!("max_iter {}", cfg.max_iter),
    ));
    out.checks.push(Check::new("within bound", within, "‖q*‖_Ξ ≤ d^(-τ2)"));
    out.checks.push(Check::new(
        "contraction",
        worst_ratio <= 0.5,
        format!("max ratio {worst_ratio:.3e} (limit 0.5)"),
    ));
    Ok(out)
}

fn nondegen(cfg: &RunConfig) -> Result<CommandOutput> {
    let g = gamma_constants(cfg.params.n, cfg.params.m, 1e-10)?;
    let results = per_k(cfg, |k| {
        let p = cfg.params_for(k);
        let fin = solve_finite(&p, &g)?;
        let blocks = build_blocks(&p, &g, &fin)?;
        let tr = eigen_blocks(&blocks);
        let scaled: Vec<f64> = tr.iter().skip(1).map(|t| scaled_det(&blocks, t)).collect();
        Ok((tr, scaled))
    })?;
    let mut out = CommandOutput::default();
    let mut zero_det: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    let mut summary = Vec::new();
    for (k, (tr, scaled)) in &results {
        let mut table = Table::new(&[
            "nu",
            "a",
            "b",
            "abs_c",
            "f",
            "abs_e",
            "g",
            "h",
            "det_hat",
            "scaled_neg_det",
        ]);
        for (t, s) in tr.iter().zip(std::iter::once(f64::NAN).chain(scaled.iter().copied())) {
            table.push(vec![
                t.nu.into(),
                t.a.into(),
                t.b.into(),
                t.c.abs().into(),
                t.f.into(),
                t.e.abs().into(),
                t.g_eig.into(),
                t.h.into(),
                t.det_hat.into(),
                s.into(),
            ]);
        }
        out.artifacts.push(Artifact::csv(format!("nondegen_k{k}.csv"), &table));
        let m = |f: fn(&ringbump::nondegen::FrequencyTriple) -> f64| sup(tr.iter().map(f));
        let (sa, sb, sf, sg) = (m(|t| t.a), m(|t| t.b), m(|t| t.f), m(|t| t.g_eig));
        let z = tr[0].det_hat.abs() / ((sa + sb) * (sf + sb) * sg);
        let kern = (tr[0].c.abs() / m(|t| t.c))
            .max(tr[0].e.abs() / m(|t| t.e))
            .max(tr[0].g_eig.abs() / sg)
            .max(tr[1].h.abs() / m(|t| t.h))
            .max(tr[k - 1].h.abs() / m(|t| t.h));
        zero_det = zero_det.max(z);
        kernel = kernel.max(kern);
        let (lo, hi) = bracket(scaled.iter().copied());
        out.lines.push(format!(
            "k={k:<4} -D̂_ν/(μ^(-3m-2)ν̄²) in [{lo:.6e}, {hi:.6e}], |D̂0| {z:.2e}·scale"
        ));
        summary.push(json!({"k": k, "zero_det": z, "kernel": kern, "scaled_min": lo, "scaled_max": hi}));
    }
    let (lo, hi) = bracket(results.iter().flat_map(|(_, (_, s))| s.iter().copied()));
    out.checks.push(Check::new(
        "zero frequency determinant",
        zero_det <= 1e-10,
        format!("{zero_det:.3e}·scale (limit 1e-10)"),
    ));
    out.checks.push(Check::new(
        "kernel structure",
        kernel <= 1e-12,
        format!("{kernel:.3e}·scale (limit 1e-12)"),
    ));
    out.checks.push(Check::new(
        "nonzero frequencies nondegenerate",
        lo > 0.0 && hi / lo <= 10.0,
        format!("[{lo:.4e}, {hi:.4e}], ratio {:.3} (limit 10)", hi / lo),
    ));
    out.artifacts.push(Artifact::json(
        "nondegen.json",
        &json!({"per_k": summary, "bracket": [lo, hi]}),
    ));
    Ok(out)
}

fn zone_name(z: Zone) -> &'static str {
    match z {
        Zone::Inner => "inner",
        Zone::Middle => "middle",
        Zone::Outer => "outer",
    }
}

fn error_norm(cfg: &RunConfig) -> Result<CommandOutput> {
    let results = per_k(cfg, |k| {
        let sys = ReducedSystem::new(&cfg.params_for(k))?;
        let field = ErrorField::from_system(&sys, &Configuration::zeros(k, 0.0))?;
        let points = sample_points(&field, cfg.samples, cfg.seed);
        let est = sup_norm_sampled(&points, |x| field.eval_e(x), |x| field.weight_w(x));
        let cloud = cfg.points.then(|| {
            let mut table = Table::new(&["zone", "j", "distance", "e", "weight", "ratio"]);
            for x in &points {
                let label = field.partition(x);
                let r: f64 = x
                    .iter()
                    .zip(&field.centers[label.j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let (e, w) = (field.eval_e(x), field.weight_w(x));
                table.push(vec![
                    zone_name(label.zone).into(),
                    label.j.into(),
                    r.into(),
                    e.into(),
                    w.into(),
                    (e.abs() / w).into(),
                ]);
            }
            table
        });
        let label = field.partition(&est.argmax_point);
        Ok((est, label, cloud))
    })?;
    let mut out = CommandOutput::default();
    let mut rows = Vec::new();
    let mut finite = true;
    for (k, (est, label, cloud)) in &results {
        finite &= est.value.is_finite() && est.value > 0.0;
        out.lines.push(format!(
            "k={k:<4} ‖E‖** ≈ {:.6e} over {} samples, argmax in {} zone of bubble {}",
            est.value,
            est.samples,
            zone_name(label.zone),
            label.j
        ));
        rows.push(json!({
            "k": k,
            "estimate": est.value,
            "argmax_zone": zone_name(label.zone),
            "argmax_bubble": label.j,
            "argmax_point": est.argmax_point,
            "samples": est.samples,
        }));
        if let Some(t) = cloud {
            out.artifacts.push(Artifact::csv(format!("error_points_k{k}.csv"), t));
        }
    }
    let (lo, hi) = bracket(results.iter().map(|(_, (e, _, _))| e.value));
    out.checks
        .push(Check::new("estimate finite", finite, "positive and finite for every k"));
    if results.len() > 1 {
        out.checks.push(Check::new(
            "bounded across k",
            hi / lo <= 2.0,
            format!("max/min {:.4} (limit 2)", hi / lo),
        ));
    }
    out.artifacts.push(Artifact::json(
        "error_norm.json",
        &json!({"seed": cfg.seed, "results": rows, "ratio": hi / lo}),
    ));
    Ok(out)
}
