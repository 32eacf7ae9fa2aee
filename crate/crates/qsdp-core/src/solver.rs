//! Limited-memory quasi-Newton maximization of the dual: two-loop-recursion
//! directions, strong-Wolfe line search with cubic interpolation, divergence
//! detection for instances whose dual has no maximizer, and warm-started
//! ε-sweeps.
//!
//! The maximizer runs in minimization form on −D. Accepted Wolfe steps
//! strictly decrease −D, so the recorded dual values ascend monotonically.
//! Divergence (sup-norm of the iterate beyond `divergence_norm`) is checked
//! before the gradient tolerance on every iteration: maximizing sequences
//! that escape to infinity drive the gradient to zero along the way and would
//! otherwise masquerade as converged.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::Error;
use crate::herm::HermOp;
use crate::problem::ProblemInstance;
use crate::reg::Regularizer;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Gradient 2-norm threshold for convergence.
    pub tol: f64,
    pub max_iters: usize,
    /// Number of curvature pairs retained by the two-loop recursion.
    pub memory: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    /// Initial dual vector; zeros when absent.
    pub alpha0: Option<Vec<f64>>,
    /// Sup-norm bound beyond which the iterate counts as escaping.
    pub divergence_norm: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 10_000,
            memory: 10,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            alpha0: None,
            divergence_norm: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tol > 0.0) {
            return Err(Error::BadConfig("tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::BadConfig("max_iters must be at least 1"));
        }
        if self.memory == 0 {
            return Err(Error::BadConfig("memory must be at least 1"));
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::BadConfig("need 0 < wolfe_c1 < wolfe_c2 < 1"));
        }
        if !(self.divergence_norm > 0.0) {
            return Err(Error::BadConfig("divergence_norm must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Diverged,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Diverged => "diverged",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// One accepted iterate: the objective value and gradient norm actually
/// evaluated there, plus the cumulative wall-clock seconds of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub dual_value: f64,
    pub grad_norm: f64,
    pub seconds: f64,
}

/// Output of the raw maximizer.
#[derive(Debug, Clone)]
pub struct OptimReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub status: SolveStatus,
    pub trace: Vec<TraceRow>,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Full solve output: dual maximizer, recovered primal and diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub alpha_star: Vec<f64>,
    pub pi_star: HermOp,
    pub status: SolveStatus,
    pub trace: Vec<TraceRow>,
    pub final_grad_norm: f64,
    pub dual_value: f64,
    /// primal_value(pi_star) − dual_value(alpha_star).
    pub duality_gap: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

const MAX_BRACKET: usize = 60;
const MAX_ZOOM: usize = 50;
const STEP_MAX: f64 = 1e20;

struct Probe {
    t: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

/// Maximizes a concave objective by L-BFGS with a strong-Wolfe line search.
///
/// The callable returns the objective value and gradient jointly. Non-finite
/// values at trial points make the line search back off; a non-finite value
/// at `x0` fails immediately.
pub fn lbfgs_maximize<F>(
    mut objective: F,
    x0: &[f64],
    cfg: &SolverConfig,
    clock: &mut dyn FnMut() -> f64,
) -> Result<OptimReport, Error>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    cfg.validate()?;
    let mut evals = 0usize;
    // minimization form: track f = -objective, g = -grad
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let (v, g) = objective(x);
        debug_assert_eq!(g.len(), x.len());
        (-v, g.iter().map(|c| -c).collect::<Vec<f64>>())
    };

    let mut x = x0.to_vec();
    let (mut f, mut g) = eval(&x, &mut evals);
    let mut grad_norm = norm2(&g);
    let mut trace = alloc::vec![TraceRow {
        iter: 0,
        dual_value: -f,
        grad_norm,
        seconds: clock(),
    }];

    if !f.is_finite() {
        return Ok(OptimReport {
            x,
            value: -f,
            status: SolveStatus::NumericalFailure,
            trace,
            final_grad_norm: grad_norm,
            iterations: 0,
            evaluations: evals,
        });
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0usize;

    let status = loop {
        if norm_inf(&x) > cfg.divergence_norm {
            break SolveStatus::Diverged;
        }
        if grad_norm <= cfg.tol {
            break SolveStatus::Converged;
        }
        if iterations >= cfg.max_iters {
            break SolveStatus::MaxIters;
        }
        iterations += 1;

        let mut dir = two_loop(&history, &g);
        for v in dir.iter_mut() {
            *v = -*v;
        }
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) || !slope.is_finite() {
            history.clear();
            dir = g.iter().map(|c| -c).collect();
            slope = -grad_norm * grad_norm;
        }

        match strong_wolfe(&mut eval, &mut evals, &x, f, &g, &dir, slope, cfg) {
            Ok(step) => {
                let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-10 * norm2(&s) * norm2(&y) {
                    if history.len() == cfg.memory {
                        history.pop_front();
                    }
                    history.push_back((s, y, 1.0 / sy));
                }
                x = step.x;
                f = step.f;
                g = step.g;
                grad_norm = norm2(&g);
                trace.push(TraceRow {
                    iter: iterations,
                    dual_value: -f,
                    grad_norm,
                    seconds: clock(),
                });
            }
            Err(best) => {
                if let Some(b) = best {
                    if b.f < f {
                        x = b.x;
                        f = b.f;
                        g = b.g;
                        grad_norm = norm2(&g);
                        trace.push(TraceRow {
                            iter: iterations,
                            dual_value: -f,
                            grad_norm,
                            seconds: clock(),
                        });
                    }
                }
                break SolveStatus::NumericalFailure;
            }
        }
    };

    Ok(OptimReport {
        x,
        value: -f,
        status,
        trace,
        final_grad_norm: grad_norm,
        iterations,
        evaluations: evals,
    })
}

/// Two-loop recursion returning H·g with γ-scaled initial Hessian.
fn two_loop(history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut coeffs = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        coeffs.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(coeffs.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

type EvalFn<'a> = &'a mut dyn FnMut(&[f64], &mut usize) -> (f64, Vec<f64>);

/// Bracketing phase of the strong-Wolfe search (initial step 1, doubling).
#[allow(clippy::too_many_arguments)]
fn strong_wolfe(
    eval: EvalFn,
    evals: &mut usize,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
    slope0: f64,
    cfg: &SolverConfig,
) -> Result<Probe, Option<Probe>> {
    let probe_at = |t: f64, eval: EvalFn, evals: &mut usize| -> Probe {
        let xt: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (f, g) = eval(&xt, evals);
        Probe { t, x: xt, f, g }
    };

    let mut best: Option<Probe> = None;
    let consider = |p: &Probe, best: &mut Option<Probe>| {
        if p.f.is_finite() && best.as_ref().is_none_or(|b| p.f < b.f) {
            *best = Some(Probe {
                t: p.t,
                x: p.x.clone(),
                f: p.f,
                g: p.g.clone(),
            });
        }
    };

    // Objective differences below the f64 noise floor cannot veto a step;
    // without this slack the search stalls near tight tolerances.
    let slack = 1e2 * f64::EPSILON * (1.0 + f0.abs());

    let mut prev = Probe {
        t: 0.0,
        x: x.to_vec(),
        f: f0,
        g: g0.to_vec(),
    };
    let mut dphi_prev = slope0;
    let mut t = 1.0f64;

    for i in 0..MAX_BRACKET {
        let p = probe_at(t, eval, evals);
        consider(&p, &mut best);
        let armijo_fail = !p.f.is_finite() || p.f > f0 + cfg.wolfe_c1 * t * slope0 + slack;
        if armijo_fail || (i > 0 && p.f >= prev.f) {
            return zoom(
                eval, evals, x, f0, slope0, dir, cfg, slack, prev, dphi_prev, p, best,
            );
        }
        let dphi = dot(&p.g, dir);
        if dphi.abs() <= -cfg.wolfe_c2 * slope0 {
            return Ok(p);
        }
        if dphi >= 0.0 {
            return zoom(
                eval, evals, x, f0, slope0, dir, cfg, slack, p, dphi, prev, best,
            );
        }
        prev = p;
        dphi_prev = dphi;
        t = (2.0 * t).min(STEP_MAX);
        if prev.t >= STEP_MAX {
            break;
        }
    }
    // Bracket exhausted: the objective kept improving along ever-longer
    // steps. Take the best probe so divergence detection sees the escape.
    match best {
        Some(b) if b.f < f0 => Ok(b),
        other => Err(other),
    }
}

/// Sectioning phase (cubic interpolation, bisection fallback).
#[allow(clippy::too_many_arguments)]
fn zoom(
    eval: EvalFn,
    evals: &mut usize,
    x: &[f64],
    f0: f64,
    slope0: f64,
    dir: &[f64],
    cfg: &SolverConfig,
    slack: f64,
    mut lo: Probe,
    mut dphi_lo: f64,
    mut hi: Probe,
    mut best: Option<Probe>,
) -> Result<Probe, Option<Probe>> {
    let mut dphi_hi = if hi.f.is_finite() {
        dot(&hi.g, dir)
    } else {
        f64::NAN
    };

    for _ in 0..MAX_ZOOM {
        let span = (hi.t - lo.t).abs();
        if span < 1e-16 * (1.0 + lo.t.abs()) {
            break;
        }
        let mut t = cubic_minimizer(lo.t, lo.f, dphi_lo, hi.t, hi.f, dphi_hi);
        let (a, b) = if lo.t < hi.t {
            (lo.t, hi.t)
        } else {
            (hi.t, lo.t)
        };
        let margin = 0.1 * span;
        if !t.is_finite() || t < a + margin || t > b - margin {
            t = 0.5 * (lo.t + hi.t);
        }

        let xt: Vec<f64> = x.iter().zip(dir).map(|(xi, d)| xi + t * d).collect();
        let (f, g) = eval(&xt, evals);
        let p = Probe { t, x: xt, f, g };
        if p.f.is_finite() && best.as_ref().is_none_or(|bst| p.f < bst.f) {
            best = Some(Probe {
                t: p.t,
                x: p.x.clone(),
                f: p.f,
                g: p.g.clone(),
            });
        }

        if !p.f.is_finite() || p.f > f0 + cfg.wolfe_c1 * t * slope0 + slack || p.f >= lo.f + slack {
            dphi_hi = if p.f.is_finite() {
                dot(&p.g, dir)
            } else {
                f64::NAN
            };
            hi = p;
        } else {
            let dphi = dot(&p.g, dir);
            if dphi.abs() <= -cfg.wolfe_c2 * slope0 {
                return Ok(p);
            }
            if dphi * (hi.t - lo.t) >= 0.0 {
                dphi_hi = dphi_lo;
                hi = Probe {
                    t: lo.t,
                    x: lo.x.clone(),
                    f: lo.f,
                    g: lo.g.clone(),
                };
            }
            dphi_lo = dphi;
            lo = p;
        }
    }
    Err(best)
}

/// Minimizer of the cubic interpolant through (a, fa, da) and (b, fb, db);
/// NaN when the data does not determine one.
fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    if !(fa.is_finite() && fb.is_finite() && da.is_finite() && db.is_finite()) {
        return f64::NAN;
    }
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if disc < 0.0 {
        return f64::NAN;
    }
    let d2 = libm::sqrt(disc) * if b > a { 1.0 } else { -1.0 };
    b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
}

/// Maximizes the dual of a validated instance and recovers the primal.
pub fn solve_with_clock(
    inst: &ProblemInstance,
    reg: Regularizer,
    cfg: &SolverConfig,
    clock: &mut dyn FnMut() -> f64,
) -> Result<SolveReport, Error> {
    cfg.validate()?;
    if let Err(issues) = inst.validate() {
        let mut msg = alloc::string::String::new();
        for (k, issue) in issues.iter().enumerate() {
            if k > 0 {
                msg.push_str("; ");
            }
            msg.push_str(&alloc::format!("{issue}"));
        }
        return Err(Error::InvalidInstance(msg));
    }
    let n = inst.observables().len();
    let x0 = match &cfg.alpha0 {
        Some(a) => {
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    left: a.len(),
                    right: n,
                });
            }
            a.clone()
        }
        None => alloc::vec![0.0; n],
    };

    let objective = |alpha: &[f64]| {
        inst.dual_value_and_gradient(reg, alpha)
            .expect("dimensions are fixed for the whole solve")
    };
    let opt = lbfgs_maximize(objective, &x0, cfg, clock)?;

    let pi_star = inst.recover_primal(reg, &opt.x)?;
    let residuals = inst.constraint_residuals(&pi_star)?;
    let duality_gap = match inst.primal_value(reg, &pi_star) {
        Ok(p) if opt.value.is_finite() => p - opt.value,
        _ => f64::INFINITY,
    };

    Ok(SolveReport {
        alpha_star: opt.x,
        pi_star,
        status: opt.status,
        trace: opt.trace,
        final_grad_norm: opt.final_grad_norm,
        dual_value: opt.value,
        duality_gap,
        residuals,
        iterations: opt.iterations,
        evaluations: opt.evaluations,
    })
}

pub fn solve(
    inst: &ProblemInstance,
    reg: Regularizer,
    cfg: &SolverConfig,
) -> Result<SolveReport, Error> {
    solve_with_clock(inst, reg, cfg, &mut || 0.0)
}

/// Per-ε result of a warm-started sweep.
#[derive(Debug, Clone)]
pub struct EpsRung {
    pub epsilon: f64,
    pub outcome: RungOutcome,
}

#[derive(Debug, Clone)]
pub enum RungOutcome {
    Solved {
        report: SolveReport,
        slackness: f64,
        zero_temp_margin: f64,
    },
    Failed(Error),
}

impl EpsRung {
    pub fn report(&self) -> Option<&SolveReport> {
        match &self.outcome {
            RungOutcome::Solved { report, .. } => Some(report),
            RungOutcome::Failed(_) => None,
        }
    }
}

/// Solves the instance at each ε of a strictly descending ladder, warm
/// starting every rung from the last usable maximizer. Per-rung failures are
/// recorded and the sweep continues from the last success.
pub fn eps_sweep(
    inst: &ProblemInstance,
    reg: Regularizer,
    ladder: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<EpsRung>, Error> {
    if ladder.is_empty() || ladder.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::BadLadder);
    }
    for pair in ladder.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::BadLadder);
        }
    }
    let mut warm = cfg.alpha0.clone();
    let mut rungs = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let inst_eps = inst.with_epsilon(eps);
        let mut cfg_eps = cfg.clone();
        cfg_eps.alpha0 = warm.clone();
        let outcome = match solve(&inst_eps, reg, &cfg_eps) {
            Ok(report) => {
                let slackness = inst_eps
                    .slackness_residual(&report.pi_star, &report.alpha_star)
                    .expect("recovered primal is PSD by construction");
                let zero_temp_margin = inst_eps
                    .zero_temp_dual_feasible(&report.alpha_star, 0.0)
                    .expect("alpha dimension fixed")
                    .margin;
                if matches!(
                    report.status,
                    SolveStatus::Converged | SolveStatus::MaxIters
                ) {
                    warm = Some(report.alpha_star.clone());
                }
                RungOutcome::Solved {
                    report,
                    slackness,
                    zero_temp_margin,
                }
            }
            Err(e) => RungOutcome::Failed(e),
        };
        rungs.push(EpsRung {
            epsilon: eps,
            outcome,
        });
    }
    Ok(rungs)
}
