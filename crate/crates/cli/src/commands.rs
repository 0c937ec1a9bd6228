//! Implementations of the CLI commands, independent of argument
//! parsing so they can be driven from tests.

use std::path::Path;

use num_rational::BigRational;
use serde_json::json;

use asymcat::rational::{format_rational, parse_rational, rational_to_f64};
use asymcat::{
    available_coherences, bounded_catalyst_obstruction, budget_for_target, compose_params,
    conjectured_convertible, convertibility_verdict, covariance_violation, covariant_convertible,
    gibbs_violation, monotone_report, reachable_lattice, FeasibilityStatus, MonotoneReport,
    ProtocolParams, VerdictStatus, DEFAULT_FEASIBILITY_MAX_ITER, DEFAULT_FEASIBILITY_TOL,
};

use crate::file::{parse_problem_file, FileError, ProblemFile, Tolerances};
use crate::report::{fmt_f64, CommandOutput};

/// Default numerical tolerance when neither the `--tol` flag nor the
/// file overrides it; the feasibility solver uses its own default.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default inverse temperature when neither the flag nor the file
/// provides one.
pub const DEFAULT_BETA: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: FileError,
    },
    #[error(transparent)]
    Engine(#[from] asymcat::Error),
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

/// Global flags shared by every command.
#[derive(Debug, Clone, Copy, Default)]
pub struct GlobalOpts {
    pub tol: Option<f64>,
    pub beta: Option<f64>,
    pub lenient: bool,
}

fn load(path: &Path, lenient: bool) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_file(&text, lenient).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

fn in_file<T>(path: &Path, r: std::result::Result<T, FileError>) -> Result<T> {
    r.map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

fn resolve_tol(flag: Option<f64>, file_tol: Option<f64>, fallback: f64) -> Result<f64> {
    let tol = flag.or(file_tol).unwrap_or(fallback);
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(CliError::Usage(format!(
            "--tol must be a positive finite number, got {tol}"
        )));
    }
    Ok(tol)
}

fn resolve_beta(flag: Option<f64>, file_beta: Option<f64>) -> Result<f64> {
    let beta = flag.or(file_beta).unwrap_or(DEFAULT_BETA);
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(CliError::Usage(format!(
            "--beta must be a finite nonnegative number, got {beta}"
        )));
    }
    Ok(beta)
}

fn file_tolerances(file: &ProblemFile) -> Tolerances {
    file.tolerances.unwrap_or_default()
}

pub fn cmd_coherences(path: &Path, state: &str, opts: &GlobalOpts) -> Result<CommandOutput> {
    let file = load(path, opts.lenient)?;
    let rho = in_file(path, file.state(state))?;
    let tol = resolve_tol(opts.tol, file_tolerances(&file).coherence, DEFAULT_TOL)?;
    let coherences = available_coherences(&rho, tol);
    let lattice = reachable_lattice(&coherences);
    let deltas: Vec<String> = coherences.sorted().iter().map(format_rational).collect();
    let generator = format_rational(lattice.generator());
    let human = format!(
        "state: {state}\ntolerance: {}\ndeltas: [{}]\nlattice generator: {generator}",
        fmt_f64(tol),
        deltas.join(", "),
    );
    let payload = json!({
        "state": state,
        "tolerance": tol,
        "deltas": deltas,
        "generator": generator,
    });
    Ok(CommandOutput::new("coherences", 0, human, payload))
}

fn monotone_payload(report: &MonotoneReport) -> serde_json::Value {
    json!({
        "qfi": report.qfi,
        "relative_entropy": report.relative_entropy,
        "renyi": report.renyi_values,
    })
}

fn monotone_line(report: &MonotoneReport) -> String {
    format!(
        "qfi {}  relative entropy {}",
        fmt_f64(report.qfi),
        fmt_f64(report.relative_entropy)
    )
}

/// Orders at which the Rényi free energies are reported for states
/// that commute with their Hamiltonian.
const REPORT_ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

pub fn cmd_verdict(
    path: &Path,
    rho_name: &str,
    sigma_name: &str,
    opts: &GlobalOpts,
) -> Result<CommandOutput> {
    let file = load(path, opts.lenient)?;
    let rho = in_file(path, file.state(rho_name))?;
    let sigma = in_file(path, file.state(sigma_name))?;
    let tol = resolve_tol(opts.tol, file_tolerances(&file).coherence, DEFAULT_TOL)?;
    let beta = resolve_beta(opts.beta, file.beta)?;
    let verdict = convertibility_verdict(&rho, &sigma, tol);
    let conjecture = conjectured_convertible(&rho, &sigma, beta)?;
    let report_in = monotone_report(&rho, beta, &REPORT_ALPHAS)?;
    let report_out = monotone_report(&sigma, beta, &REPORT_ALPHAS)?;
    let exit_code = match verdict.status() {
        VerdictStatus::Convertible => 0,
        VerdictStatus::Forbidden => 1,
        VerdictStatus::Unknown => 3,
    };
    let human = format!(
        "verdict: {verdict}\nconjectured convertible [CONJECTURAL]: {conjecture}\nbeta: {}\n\
         input:  {}\ntarget: {}",
        fmt_f64(beta),
        monotone_line(&report_in),
        monotone_line(&report_out),
    );
    let payload = json!({
        "rho": rho_name,
        "sigma": sigma_name,
        "status": verdict.status().as_str(),
        "reason": verdict.reason().as_str(),
        "conjectured_convertible": conjecture,
        "conjecture_label": "CONJECTURAL",
        "beta": beta,
        "input": monotone_payload(&report_in),
        "target": monotone_payload(&report_out),
    });
    Ok(CommandOutput::new("verdict", exit_code, human, payload))
}

pub fn cmd_check_channel(path: &Path, channel: &str, opts: &GlobalOpts) -> Result<CommandOutput> {
    let file = load(path, opts.lenient)?;
    let ch = in_file(path, file.channel(channel))?;
    let tol = resolve_tol(opts.tol, file_tolerances(&file).channel, DEFAULT_TOL)?;
    let beta = resolve_beta(opts.beta, file.beta)?;
    let cov_violation = covariance_violation(&ch);
    let covariant = cov_violation <= tol;
    let gibbs_deviation = gibbs_violation(&ch, beta)?;
    let gibbs_preserving = gibbs_deviation < tol;
    let human = format!(
        "channel: {channel}\nbeta: {}\ntolerance: {}\ncovariant: {covariant} (violation {})\n\
         gibbs-preserving: {gibbs_preserving} (violation {})",
        fmt_f64(beta),
        fmt_f64(tol),
        fmt_f64(cov_violation),
        fmt_f64(gibbs_deviation),
    );
    let payload = json!({
        "channel": channel,
        "beta": beta,
        "tolerance": tol,
        "covariant": covariant,
        "covariance_violation": cov_violation,
        "gibbs_preserving": gibbs_preserving,
        "gibbs_violation": gibbs_deviation,
    });
    Ok(CommandOutput::new("check-channel", 0, human, payload))
}

pub fn cmd_feasible(
    path: &Path,
    rho_name: &str,
    sigma_name: &str,
    max_iter: Option<usize>,
    opts: &GlobalOpts,
) -> Result<CommandOutput> {
    let file = load(path, opts.lenient)?;
    let rho = in_file(path, file.state(rho_name))?;
    let sigma = in_file(path, file.state(sigma_name))?;
    let tol = resolve_tol(
        opts.tol,
        file_tolerances(&file).feasibility,
        DEFAULT_FEASIBILITY_TOL,
    )?;
    let max_iter = max_iter.unwrap_or(DEFAULT_FEASIBILITY_MAX_ITER);
    let verdict = covariant_convertible(&rho, &sigma, tol, max_iter);
    let exit_code = match verdict.status() {
        FeasibilityStatus::Feasible => 0,
        FeasibilityStatus::Infeasible => 1,
        FeasibilityStatus::Undetermined => 3,
    };
    let certificate = verdict.certificate().map(|c| c.as_str());
    let human = format!(
        "status: {}\ncertificate: {}\nresidual: {}\niterations: {}\ntolerance: {}",
        verdict.status().as_str(),
        certificate.unwrap_or("none"),
        fmt_f64(verdict.residual()),
        verdict.iterations(),
        fmt_f64(verdict.tol()),
    );
    let payload = json!({
        "rho": rho_name,
        "sigma": sigma_name,
        "status": verdict.status().as_str(),
        "certificate": certificate,
        "residual": verdict.residual(),
        "iterations": verdict.iterations(),
        "tolerance": verdict.tol(),
        "has_witness": verdict.witness().is_some(),
    });
    Ok(CommandOutput::new("feasible", exit_code, human, payload))
}

/// Flag values for `compose`; exactly one of the two groups must be
/// filled in.
#[derive(Debug, Default)]
pub struct ComposeArgs {
    pub eps1: Option<String>,
    pub delta1: Option<String>,
    pub n1: Option<u64>,
    pub m1: Option<u64>,
    pub eps2: Option<String>,
    pub delta2: Option<String>,
    pub n2: Option<u64>,
    pub m2: Option<u64>,
    pub target_eps: Option<String>,
    pub target_delta: Option<String>,
}

fn parse_flag_rational(name: &str, value: &str) -> Result<BigRational> {
    parse_rational(value).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn require<T>(value: Option<T>, name: &str, mode: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{name} is required in {mode} mode")))
}

fn rational_fields(label: &str, value: &BigRational) -> (String, String) {
    (
        format!("{label}: {} ({})", format_rational(value), fmt_f64(rational_to_f64(value))),
        format_rational(value),
    )
}

pub fn cmd_compose(args: &ComposeArgs) -> Result<CommandOutput> {
    let budget_mode = args.target_eps.is_some() || args.target_delta.is_some();
    if budget_mode {
        let stage_flags = [
            args.eps1.is_some(),
            args.delta1.is_some(),
            args.n1.is_some(),
            args.m1.is_some(),
            args.eps2.is_some(),
            args.delta2.is_some(),
            args.m2.is_some(),
        ];
        if stage_flags.iter().any(|&set| set) {
            return Err(CliError::Usage(
                "budget mode (--target-eps/--target-delta) cannot be mixed with per-stage flags"
                    .into(),
            ));
        }
        let eps = parse_flag_rational(
            "target-eps",
            &require(args.target_eps.clone(), "target-eps", "budget")?,
        )?;
        let delta = match &args.target_delta {
            Some(text) => parse_flag_rational("target-delta", text)?,
            None => BigRational::from_integer(0.into()),
        };
        let n2 = require(args.n2, "n2", "budget")?;
        let split = budget_for_target(&eps, &delta, n2)?;
        let (eps1_line, eps1) = rational_fields("eps1", &split.eps1);
        let (eps2_line, eps2) = rational_fields("eps2", &split.eps2);
        let (delta1_line, delta1) = rational_fields("delta1", &split.delta1);
        let (delta2_line, delta2) = rational_fields("delta2", &split.delta2);
        let human = format!(
            "budget split for eps {} delta {} with n2 {n2}:\n{eps1_line}\n{eps2_line}\n{delta1_line}\n{delta2_line}",
            format_rational(&eps),
            format_rational(&delta),
        );
        let payload = json!({
            "mode": "budget",
            "target_eps": format_rational(&eps),
            "target_delta": format_rational(&delta),
            "n2": n2,
            "eps1": eps1,
            "eps2": eps2,
            "delta1": delta1,
            "delta2": delta2,
        });
        return Ok(CommandOutput::new("compose", 0, human, payload));
    }

    let eps1 = parse_flag_rational("eps1", &require(args.eps1.clone(), "eps1", "composition")?)?;
    let delta1 =
        parse_flag_rational("delta1", &require(args.delta1.clone(), "delta1", "composition")?)?;
    let n1 = require(args.n1, "n1", "composition")?;
    let m1 = require(args.m1, "m1", "composition")?;
    let eps2 = parse_flag_rational("eps2", &require(args.eps2.clone(), "eps2", "composition")?)?;
    let delta2 =
        parse_flag_rational("delta2", &require(args.delta2.clone(), "delta2", "composition")?)?;
    let n2 = require(args.n2, "n2", "composition")?;
    let m2 = require(args.m2, "m2", "composition")?;
    let first = ProtocolParams::new(n1, m1, eps1, delta1)?;
    let second = ProtocolParams::new(n2, m2, eps2, delta2)?;
    let composed = compose_params(&first, &second)?;
    let (eps_line, eps) = rational_fields("eps", composed.eps());
    let (delta_line, delta) = rational_fields("delta", composed.delta());
    let rate = composed.rate();
    let (rate_line, rate_str) = rational_fields("rate", &rate);
    let human = format!(
        "composed protocol:\nn: {}\nm: {}\n{eps_line}\n{delta_line}\n{rate_line}",
        composed.n(),
        composed.m(),
    );
    let payload = json!({
        "mode": "composition",
        "n": composed.n(),
        "m": composed.m(),
        "eps": eps,
        "eps_f64": composed.eps_f64(),
        "delta": delta,
        "delta_f64": composed.delta_f64(),
        "rate": rate_str,
        "rate_f64": rational_to_f64(&rate),
    });
    Ok(CommandOutput::new("compose", 0, human, payload))
}

pub fn cmd_obstruction(
    path: &Path,
    rho_name: &str,
    sigma_name: &str,
    m_bound: f64,
    opts: &GlobalOpts,
) -> Result<CommandOutput> {
    let file = load(path, opts.lenient)?;
    let rho = in_file(path, file.state(rho_name))?;
    let sigma = in_file(path, file.state(sigma_name))?;
    let report = bounded_catalyst_obstruction(&rho, &sigma, m_bound)?;
    let eps_line = match report.eps_star {
        Some(eps) => format!("eps_star: {}", fmt_f64(eps)),
        None => "no obstruction from this criterion".to_string(),
    };
    let human = format!(
        "input qfi: {}\ntarget qfi: {}\nhamiltonian sup-norm: {}\ncatalyst bound: {}\n{eps_line}",
        fmt_f64(report.qfi_in),
        fmt_f64(report.qfi_out),
        fmt_f64(report.h_norm),
        fmt_f64(report.m_bound),
    );
    let payload = json!({
        "rho": rho_name,
        "sigma": sigma_name,
        "qfi_in": report.qfi_in,
        "qfi_out": report.qfi_out,
        "h_norm": report.h_norm,
        "m_bound": report.m_bound,
        "eps_star": report.eps_star,
    });
    Ok(CommandOutput::new("obstruction", 0, human, payload))
}
