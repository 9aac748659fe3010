//! Constrained minimization `λ0 = inf { J1(u) : J2(u) = 1 }` on a box, and the
//! recovery of the equation `-Δu + ã u^{p-1} - b̃ u^{q-1} = 0` from its
//! minimizer through the Lagrange multiplier, `b̃ = λ q β`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::functionals::{j1, j2, ProblemParams};
use crate::lattice::{
    gradient_norm_sq, laplacian, power_sum, scaled_lp_norm, signed_pow, translate, LatticeBox, LatticeFunction, Site,
};
use crate::sum::pairwise_sum;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Stop once the Euler-Lagrange residual drops to this level.
    pub tol: f64,
    pub max_iter: usize,
    /// Recenter on the maximum every this many iterations (0 disables).
    pub recenter_every: usize,
    /// Sufficient-decrease constant of the backtracking search.
    pub armijo: f64,
    /// Step contraction factor of the backtracking search.
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Admissible `|J2(u) - 1|`.
    pub constraint_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 200_000,
            recenter_every: 25,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            constraint_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The line search could not find an admissible step.
    Stagnated,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    /// Nonnegative minimizer with `J2(u0) = 1`.
    pub u0: LatticeFunction,
    /// `J1(u0)`.
    pub lambda0: f64,
    /// Lagrange multiplier.
    pub lambda: f64,
    /// `λ q β`.
    pub b_tilde: f64,
    /// Residual of the equation with `b ≡ b̃`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// `|J2(u0) - 1|`.
    pub constraint_defect: f64,
}

/// What the solver reports after each iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub j1: f64,
    pub j2: f64,
    pub residual: f64,
    pub step: f64,
    /// The iterate was translated to the origin since the previous record,
    /// so `j1` may have risen.
    pub recentered: bool,
}

/// `u / (β^{1/q} |u|_q)`, the rescaling onto `J2 = 1`.
pub fn normalize_to_constraint(u: &LatticeFunction, params: &ProblemParams) -> Result<LatticeFunction> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let q = params.q();
    let scale = libm::pow(params.beta(), 1.0 / q) * scaled_lp_norm(u.values(), q);
    Ok(u.map(|v| v / scale))
}

/// Translate `u` so its maximum of `|u|` sits at the origin. Returns the
/// translated function and the site the maximum was found at (ties go to the
/// lexicographically smallest site).
pub fn recenter(u: &LatticeFunction) -> Result<(LatticeFunction, Site)> {
    let i = u.argmax_abs().ok_or(Error::ZeroFunction)?;
    let center = u.domain().site(i).clone();
    Ok((translate(u, &center)?, center))
}

/// `λ = (|∇u0|_2^2 + ã|u0|_p^p) / q` for `u0` on the constraint.
pub fn lagrange_multiplier(u0: &LatticeFunction, params: &ProblemParams) -> Result<f64> {
    let a = params.constant_a()?;
    let j2 = j2(u0, params);
    if !(libm::fabs(j2 - 1.0) <= SolverOptions::default().constraint_tol) {
        return Err(Error::ConstraintViolated { j2 });
    }
    Ok(multiplier(u0, a, params))
}

fn multiplier(u: &LatticeFunction, a: f64, params: &ProblemParams) -> f64 {
    (gradient_norm_sq(u) + a * power_sum(u.values(), params.p())) / params.q()
}

/// Exact bracket for the multiplier of any constrained minimizer:
/// `[(ã/q) β^{-p/q}, N β^{-2/q} + (ã/p) β^{-p/q}]`. The upper end is `J1` of
/// the unit spike `v0`.
pub fn lambda_bounds(params: &ProblemParams) -> Result<(f64, f64)> {
    let a = params.constant_a()?;
    let (p, q, beta) = (params.p(), params.q(), params.beta());
    let beta_p = libm::pow(beta, -p / q);
    let lower = a / q * beta_p;
    let upper = params.dim() as f64 * libm::pow(beta, -2.0 / q) + a / p * beta_p;
    Ok((lower, upper))
}

/// The unit-`J2` spike `β^{-1/q} δ0`, the default starting point.
pub fn unit_spike(params: &ProblemParams, domain: &LatticeBox) -> Result<LatticeFunction> {
    let height = libm::pow(params.beta(), -1.0 / params.q());
    LatticeFunction::spike(domain, &Site::origin(domain.dim()), height)
}

pub fn minimize_constrained(
    params: &ProblemParams,
    domain: &LatticeBox,
    init: Option<&LatticeFunction>,
    opts: &SolverOptions,
) -> Result<MinimizeResult> {
    minimize_constrained_observed(params, domain, init, opts, |_| {})
}

/// Projected descent on the constraint surface.
///
/// Each step moves along `-∇J1` with its component along `∇J2` removed,
/// takes `|·|` and rescales onto `J2 = 1`. Step lengths start from the
/// Barzilai-Borwein estimate and are halved until `J1` decreases
/// sufficiently. Once the required decrease falls below the rounding level
/// of `J1`, a step is accepted if it does not increase `J1` beyond that
/// level. Every `recenter_every` iterations the iterate is translated so its
/// maximum sits at the origin.
pub fn minimize_constrained_observed(
    params: &ProblemParams,
    domain: &LatticeBox,
    init: Option<&LatticeFunction>,
    opts: &SolverOptions,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<MinimizeResult> {
    let a = params.constant_a()?;
    if domain.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: domain.dim(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(String::from("tolerance must be positive")));
    }
    let (p, q, beta) = (params.p(), params.q(), params.beta());

    let start = match init {
        Some(u) => u.resized(domain)?,
        None => unit_spike(params, domain)?,
    };
    let mut u = normalize_to_constraint(&start.abs(), params)?;
    let mut f = j1(&u, params)?;

    // Previous iterate and projected gradient, for the step estimate.
    let mut memory: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut step = 1.0;
    let mut iteration = 0;
    let mut recentered = false;
    // One translation that raises J1 is allowed: a bump pinned away from the
    // origin is a local minimizer on the lattice and descent alone keeps it
    // there.
    let mut uphill_recenter_left = true;
    let stop;
    let mut residual;

    loop {
        let lap = laplacian(&u);
        let g1: Vec<f64> = lap
            .values()
            .iter()
            .zip(u.values())
            .map(|(&l, &v)| -l + a * signed_pow(v, p))
            .collect();
        let g2: Vec<f64> = u.values().iter().map(|&v| q * beta * signed_pow(v, q)).collect();
        let lambda = multiplier(&u, a, params);
        let r: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| x - lambda * y).collect();
        residual = scaled_lp_norm(&r, 2.0);

        observe(&IterationRecord {
            iteration,
            j1: f,
            j2: j2(&u, params),
            residual,
            step,
            recentered,
        });
        recentered = false;

        if residual <= opts.tol {
            stop = StopReason::Converged;
            break;
        }
        if iteration >= opts.max_iter {
            stop = StopReason::MaxIterations;
            break;
        }

        let mu = dot(&g1, &g2) / dot(&g2, &g2);
        let grad: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| x - mu * y).collect();
        let dd = dot(&grad, &grad);
        if !(dd > 0.0) {
            stop = StopReason::Stagnated;
            break;
        }

        if let Some((u_prev, grad_prev)) = &memory {
            let s: Vec<f64> = u.values().iter().zip(u_prev).map(|(x, y)| x - y).collect();
            let y: Vec<f64> = grad.iter().zip(grad_prev).map(|(x, y)| x - y).collect();
            let sy = dot(&s, &y);
            if sy > 0.0 {
                step = dot(&s, &s) / sy;
            }
        }
        step = step.clamp(1e-12, 1e6);

        let slack = 8.0 * f64::EPSILON * libm::fabs(f);
        let mut accepted = None;
        let mut t = step;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = u
                .values()
                .iter()
                .zip(&grad)
                .map(|(x, g)| libm::fabs(x - t * g))
                .collect();
            let trial = LatticeFunction::from_values(domain, trial)?;
            if !trial.is_zero() {
                let trial = normalize_to_constraint(&trial, params)?;
                let ft = j1(&trial, params)?;
                let wanted = opts.armijo * t * dd;
                if ft <= f - wanted || (wanted <= slack && ft <= f + slack) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= opts.backtrack;
        }
        let Some((next, f_next)) = accepted else {
            stop = StopReason::Stagnated;
            break;
        };
        memory = Some((u.into_values(), grad));
        step = t;
        u = next;
        f = f_next;
        iteration += 1;

        if opts.recenter_every > 0 && iteration % opts.recenter_every == 0 {
            if let Ok((moved, center)) = recenter(&u) {
                if !center.is_origin() {
                    let moved = normalize_to_constraint(&moved, params)?;
                    let fm = j1(&moved, params)?;
                    let uphill = fm > f;
                    if !uphill || uphill_recenter_left {
                        uphill_recenter_left &= !uphill;
                        u = moved;
                        f = fm;
                        memory = None;
                        recentered = true;
                    }
                }
            }
        }
    }

    let lambda = multiplier(&u, a, params);
    Ok(MinimizeResult {
        constraint_defect: libm::fabs(j2(&u, params) - 1.0),
        lambda0: f,
        lambda,
        b_tilde: lambda * q * beta,
        residual,
        iterations: iteration,
        converged: stop == StopReason::Converged,
        stop,
        u0: u,
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let terms: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    pairwise_sum(&terms)
}

/// The equation recovered from a minimizer: same `a`, and `b ≡ b̃`.
pub fn equation_params(params: &ProblemParams, b_tilde: f64) -> Result<ProblemParams> {
    Ok(params.with_b(CoefficientField::constant(b_tilde)?))
}

/// `u(x) > 0` at every site of the box.
pub fn positivity_check(u: &LatticeFunction) -> bool {
    !u.values().is_empty() && u.values().iter().all(|&v| v > 0.0)
}

#[derive(Debug)]
pub struct SweepRow {
    pub beta: f64,
    pub outcome: Result<MinimizeResult>,
    /// Bracket for `b̃`: the multiplier bounds times `qβ`.
    pub b_tilde_bracket: (f64, f64),
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.converged)
    }

    pub fn b_tilde_in_bracket(&self) -> bool {
        match &self.outcome {
            Ok(r) => self.b_tilde_bracket.0 <= r.b_tilde && r.b_tilde <= self.b_tilde_bracket.1,
            Err(_) => false,
        }
    }
}

/// One constrained solve per `β`, in the order given. A failing entry is
/// recorded in its row and the sweep continues.
pub fn beta_sweep(
    base: &ProblemParams,
    betas: &[f64],
    domain: &LatticeBox,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>> {
    if betas.is_empty() {
        return Err(Error::InvalidParams(String::from("empty beta grid")));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
        return Err(Error::InvalidParams(alloc::format!("beta {b} is not positive")));
    }
    betas
        .iter()
        .map(|&beta| {
            let params = base.with_beta(beta)?;
            let (lo, hi) = lambda_bounds(&params)?;
            let scale = params.q() * beta;
            Ok(SweepRow {
                beta,
                outcome: minimize_constrained(&params, domain, None, opts),
                b_tilde_bracket: (lo * scale, hi * scale),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BoxConvergence {
    pub radius: u32,
    pub lambda0: f64,
    pub larger_radius: u32,
    pub larger_lambda0: f64,
    /// `|λ0(R) - λ0(R + 4)| / λ0(R + 4)`, the truncation-error estimate.
    pub relative_difference: f64,
}

/// Re-solve on `B_{R+4}` and compare the two values of `λ0`.
pub fn box_convergence(
    params: &ProblemParams,
    radius: u32,
    lambda0: f64,
    opts: &SolverOptions,
) -> Result<BoxConvergence> {
    let larger_radius = radius + 4;
    let larger = minimize_constrained(params, &LatticeBox::new(params.dim(), larger_radius)?, None, opts)?;
    Ok(BoxConvergence {
        radius,
        lambda0,
        larger_radius,
        larger_lambda0: larger.lambda0,
        relative_difference: libm::fabs(lambda0 - larger.lambda0) / larger.lambda0,
    })
}
