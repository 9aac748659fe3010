//! Dispatch of a resolved [`RunConfig`] to the library, and report assembly.

use std::path::{Path, PathBuf};
use std::time::Instant;

use zn_elliptic::decompose::{energy_identity_check, extract_bubbles, separation_check, ExtractionStop};
use zn_elliptic::minimizer::{
    beta_sweep, box_convergence, lambda_bounds, minimize_constrained, positivity_check, StopReason,
};
use zn_elliptic::oracles::{run_verification_suite, SuiteSizes};
use zn_elliptic::{Decomposition, Error, ExtractOptions, LatticeBox, SolverOptions};

use crate::config::{Mode, RunConfig};
use crate::csv_io::emit_solution_csv;
use crate::error::{exit, CliError};
use crate::manifest::load_sequence;
use crate::report::{
    fingerprint, BoxConvergenceOut, BubbleOut, CheckOut, DecomposeResult, RunReport, RunResult, SolveResult, Status,
    SweepResult, SweepRowOut, VerifyResult, WeakLimitOut, TOOL,
};

/// A finished run whose report has been written.
#[derive(Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub exit_code: i32,
    /// One line for stdout.
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let (result, status, summary) = match cfg.mode {
        Mode::Solve => solve(cfg)?,
        Mode::Sweep => sweep(cfg)?,
        Mode::Decompose => decompose(cfg)?,
        Mode::Verify => verify(cfg)?,
    };
    let wall = started.elapsed().as_secs_f64();
    let echo = cfg.echo();
    let report = RunReport {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        library_version: zn_elliptic::VERSION.into(),
        subcommand: cfg.mode.name().into(),
        status,
        fingerprint: fingerprint(&echo),
        config: echo,
        result,
        wall_time_seconds: (!cfg.deterministic).then_some(wall),
    };
    report.write(&cfg.out)?;
    let exit_code = match status {
        Status::Ok => exit::OK,
        Status::NotConverged => exit::NOT_CONVERGED,
        Status::ChecksFailed => exit::CHECKS_FAILED,
    };
    Ok(Outcome {
        report,
        exit_code,
        summary: format!("{summary}; report {}", cfg.out.display()),
    })
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..SolverOptions::default()
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max_iterations",
        StopReason::Stagnated => "stagnated",
    }
}

type Dispatched = (RunResult, Status, String);

fn solve(cfg: &RunConfig) -> Result<Dispatched, CliError> {
    let params = cfg.params()?;
    let domain = LatticeBox::new(cfg.dim, cfg.radius).map_err(|e| CliError::Config(format!("`radius`: {e}")))?;
    let opts = solver_options(cfg);
    let res = minimize_constrained(&params, &domain, None, &opts)?;
    let (lo, hi) = lambda_bounds(&params)?;
    let csv = cfg.solution_csv.clone().expect("solve has a solution path");
    emit_solution_csv(&res.u0, &csv)?;
    let box_conv = if res.converged {
        let b = box_convergence(&params, cfg.radius, res.lambda0, &opts)?;
        Some(BoxConvergenceOut {
            larger_radius: b.larger_radius,
            larger_lambda0: b.larger_lambda0,
            relative_difference: b.relative_difference,
        })
    } else {
        None
    };
    let summary = format!(
        "solve: {} after {} iterations, lambda0 = {}, lambda = {}, b_tilde = {}, residual = {:.3e}",
        stop_name(res.stop),
        res.iterations,
        res.lambda0,
        res.lambda,
        res.b_tilde,
        res.residual
    );
    let status = if res.converged {
        Status::Ok
    } else {
        Status::NotConverged
    };
    let out = SolveResult {
        radius: cfg.radius,
        sites: domain.len(),
        lambda0: res.lambda0,
        lambda: res.lambda,
        b_tilde: res.b_tilde,
        residual: res.residual,
        constraint_defect: res.constraint_defect,
        iterations: res.iterations,
        converged: res.converged,
        stop: stop_name(res.stop).into(),
        lambda_bounds: [lo, hi],
        lambda_in_bounds: lo <= res.lambda && res.lambda <= hi,
        positive: positivity_check(&res.u0),
        positive_sites: res.u0.values().iter().filter(|&&v| v > 0.0).count(),
        solution_csv: csv,
        box_convergence: box_conv,
    };
    Ok((RunResult::Solve(out), status, summary))
}

fn sweep(cfg: &RunConfig) -> Result<Dispatched, CliError> {
    let params = cfg.params()?;
    let domain = LatticeBox::new(cfg.dim, cfg.radius).map_err(|e| CliError::Config(format!("`radius`: {e}")))?;
    let rows: Vec<SweepRowOut> = beta_sweep(&params, &cfg.betas, &domain, &solver_options(cfg))?
        .iter()
        .map(|row| {
            let bracket = [row.b_tilde_bracket.0, row.b_tilde_bracket.1];
            match &row.outcome {
                Ok(r) => SweepRowOut {
                    beta: row.beta,
                    converged: r.converged,
                    lambda0: Some(r.lambda0),
                    lambda: Some(r.lambda),
                    b_tilde: Some(r.b_tilde),
                    residual: Some(r.residual).filter(|x| x.is_finite()),
                    iterations: Some(r.iterations),
                    positive: Some(positivity_check(&r.u0)),
                    b_tilde_bracket: bracket,
                    b_tilde_in_bracket: row.b_tilde_in_bracket(),
                    error: None,
                },
                Err(e) => SweepRowOut {
                    beta: row.beta,
                    converged: false,
                    lambda0: None,
                    lambda: None,
                    b_tilde: None,
                    residual: None,
                    iterations: None,
                    positive: None,
                    b_tilde_bracket: bracket,
                    b_tilde_in_bracket: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let converged: Vec<f64> = rows.iter().filter(|r| r.converged).filter_map(|r| r.b_tilde).collect();
    let span = (!converged.is_empty()).then(|| {
        let max = converged.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = converged.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    });
    let n_conv = converged.len();
    let in_bracket = rows.iter().filter(|r| r.b_tilde_in_bracket).count();
    let status = if n_conv == rows.len() {
        Status::Ok
    } else {
        Status::NotConverged
    };
    let summary = format!(
        "sweep: {n_conv}/{} converged, {in_bracket} with b_tilde in bracket, span {}",
        rows.len(),
        span.map_or_else(|| "n/a".into(), |s| format!("{s:.4}"))
    );
    Ok((
        RunResult::Sweep(SweepResult {
            radius: cfg.radius,
            rows,
            b_tilde_span: span,
        }),
        status,
        summary,
    ))
}

/// `r.json` -> `r.<tag>.csv`.
fn sibling(out: &Path, tag: &str) -> PathBuf {
    out.with_extension(format!("{tag}.csv"))
}

fn decompose(cfg: &RunConfig) -> Result<Dispatched, CliError> {
    let d = cfg.decompose.as_ref().expect("decompose settings");
    let seq = load_sequence(&d.manifest)?;
    if seq.dim() != cfg.dim {
        return Err(CliError::Config(format!(
            "`dim`: {} but the manifest sequence lives in dimension {}",
            cfg.dim,
            seq.dim()
        )));
    }
    let params = cfg.params()?;
    let opts = ExtractOptions {
        sigma: d.sigma,
        max_bubbles: d.max_bubbles,
        energy_floor: d.energy_floor,
        lambda0: d.lambda0,
        ..ExtractOptions::new(d.window)
    };
    let (dec, stop, status): (Decomposition, &str, Status) = match extract_bubbles(&seq, &params, &opts) {
        Ok(dec) => {
            let stop = match dec.stop {
                ExtractionStop::Vanishing => "vanishing",
                ExtractionStop::EnergyFloor => "energy_floor",
            };
            (dec, stop, Status::Ok)
        }
        Err(Error::TooManyBubbles { partial, .. }) => (*partial, "bubble_budget", Status::NotConverged),
        Err(e) => return Err(e.into()),
    };
    let u0_csv = sibling(&cfg.out, "u0");
    emit_solution_csv(&dec.u0, &u0_csv)?;
    let mut bubbles = Vec::with_capacity(dec.k());
    for (i, b) in dec.bubbles.iter().enumerate() {
        let csv = sibling(&cfg.out, &format!("bubble_{:02}", i + 1));
        emit_solution_csv(&b.profile, &csv)?;
        bubbles.push(BubbleOut {
            center_track: b.track.iter().map(|y| y.coords().to_vec()).collect(),
            phi_bar: b.phi_bar,
            mass: b.mass,
            height: b.height,
            residual: b.residual,
            unstable_sites: b.unstable_sites,
            height_bound: b.height_bound,
            csv,
        });
    }
    let level = seq.level();
    let defect = level.map(|c| energy_identity_check(&dec, &params, c));
    let separation = separation_check(&dec);
    let summary = format!(
        "decompose: k = {} ({stop}), remainder sup {:.3e}, energy identity defect {}",
        dec.k(),
        dec.remainder_sup,
        defect.map_or_else(|| "n/a".into(), |x| format!("{x:.3e}"))
    );
    let out = DecomposeResult {
        terms: seq.len(),
        k: dec.k(),
        sigma: dec.sigma,
        remainder_sup: dec.remainder_sup,
        stop: stop.into(),
        weak_limit: WeakLimitOut {
            phi: dec.phi_u0,
            sup_norm: dec.u0.sup_norm(),
            support_size: dec.u0.support().count(),
            unstable_sites: dec.u0_unstable_sites,
            csv: u0_csv,
        },
        bubbles,
        level,
        energy_identity_defect: defect,
        separation,
    };
    Ok((RunResult::Decompose(out), status, summary))
}

fn verify(cfg: &RunConfig) -> Result<Dispatched, CliError> {
    let sizes = SuiteSizes {
        functions: cfg.functions,
        fd_trials: cfg.fd_trials,
    };
    let checks: Vec<CheckOut> = run_verification_suite(cfg.seed, sizes)?
        .iter()
        .map(CheckOut::from)
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    let mut summary = format!("verify: {passed}/{} checks passed", checks.len());
    for c in checks.iter().filter(|c| !c.passed) {
        summary.push_str(&format!(
            ", FAILED {} (defect {:e} > {:e})",
            c.name, c.defect, c.tolerance
        ));
    }
    let status = if failed == 0 { Status::Ok } else { Status::ChecksFailed };
    Ok((
        RunResult::Verify(VerifyResult {
            seed: cfg.seed,
            functions: cfg.functions,
            fd_trials: cfg.fd_trials,
            passed,
            failed,
            checks,
        }),
        status,
        summary,
    ))
}
