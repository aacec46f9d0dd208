//! Implementations of the four subcommands.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::Serialize;

use edur::audit::{run_audit, AuditOptions, ALPHAS};
use edur::protocol::format_sig17;
use edur::{
    check_branciard, check_ozawa, check_tight_qubit, corrected_apparatus, error_disturbance,
    fidelity, mixing_channel, optimize_correction, solve_sigma_for_alpha, AxisObservable,
    BoundSet, NoiseDistribution, NoisyRotationSpec, QubitState, Sampling, ThreeStateRun,
};

use crate::config::{resolve, FileConfig};
use crate::options::{to_radians, CorrectionOpt, CountsOpt, Format};
use crate::{AuditArgs, CliError, CommonArgs, SurfaceArgs, SweepArgs, ThreeStateArgs};

const DEFAULT_THETA_B: f64 = FRAC_PI_2;
const DEFAULT_SURFACE_THETA_OA: f64 = 5.0 * PI / 18.0;
const DEFAULT_SURFACE_STEP: f64 = PI / 72.0;
const DEFAULT_SWEEP_STEP: f64 = PI / 18.0;

/// An angle from flag or config is user input and honors --degrees;
/// built-in defaults are already radians.
fn resolve_angle(
    flag: &Option<f64>,
    cfg: &FileConfig,
    key: &str,
    default: f64,
    degrees: bool,
) -> Result<f64, CliError> {
    let user: Option<f64> = match flag {
        Some(v) => Some(*v),
        None => cfg.parse::<f64>(key)?,
    };
    Ok(match user {
        Some(v) => to_radians(v, degrees),
        None => default,
    })
}

fn resolve_degrees(flag: bool, cfg: &FileConfig) -> Result<bool, CliError> {
    if flag {
        return Ok(true);
    }
    Ok(cfg.parse::<bool>("degrees")?.unwrap_or(false))
}

fn resolve_format(common: &CommonArgs, cfg: &FileConfig) -> Result<Format, CliError> {
    resolve(&common.format, cfg, "format", Format::Csv).map_err(CliError::Usage)
}

fn resolve_out(common: &CommonArgs, cfg: &FileConfig) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| cfg.raw("out").map(PathBuf::from))
}

fn validate_alpha(alpha: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CliError::Usage(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(alpha)
}

fn parse_alpha_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("alpha {part:?}: {e}")))?;
        out.push(validate_alpha(v)?);
    }
    if out.is_empty() {
        return Err(CliError::Usage("alpha list is empty".into()));
    }
    Ok(out)
}

/// The detuning grid for sweeps; a single --theta-oa collapses it to one
/// point. An empty or ill-posed grid is a usage error.
fn resolve_theta_grid(
    theta_oa: &Option<f64>,
    cfg: &FileConfig,
    step_flag: &Option<f64>,
    degrees: bool,
) -> Result<Vec<f64>, CliError> {
    if let Some(v) = theta_oa {
        return Ok(vec![to_radians(*v, degrees)]);
    }
    if let Some(v) = cfg.parse::<f64>("theta_oa")? {
        return Ok(vec![to_radians(v, degrees)]);
    }
    let start = resolve_angle(&None, cfg, "theta_oa_start", 0.0, degrees)?;
    let stop = resolve_angle(&None, cfg, "theta_oa_stop", PI, degrees)?;
    let step = resolve_angle(step_flag, cfg, "step", DEFAULT_SWEEP_STEP, degrees)?;
    grid(start, stop, step)
}

fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !step.is_finite() || step <= 0.0 {
        return Err(CliError::Usage(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(CliError::Usage(format!(
            "empty grid: start {start}, stop {stop}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        // A closed pipe (e.g. `edur ... | head`) is not a failure.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Usage(format!("cannot write {}: {e}", path.display()))
        }),
        None => print_stdout(text),
    }
}

fn write_path(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------- surface

#[derive(Serialize)]
struct SurfaceRow {
    kind: &'static str,
    vartheta: f64,
    phi: f64,
    eta: f64,
}

pub fn surface(args: &SurfaceArgs) -> Result<(), CliError> {
    let cfg = crate::load_config(&args.common)?;
    let degrees = resolve_degrees(args.common.degrees, &cfg)?;
    let theta_oa = resolve_angle(
        &args.theta_oa,
        &cfg,
        "theta_oa",
        DEFAULT_SURFACE_THETA_OA,
        degrees,
    )?;
    let theta_b = resolve_angle(&args.theta_b, &cfg, "theta_b", DEFAULT_THETA_B, degrees)?;
    let alpha = validate_alpha(resolve(&args.alpha, &cfg, "alpha", 1.0)?)?;
    let step = resolve_angle(&args.step, &cfg, "step", DEFAULT_SURFACE_STEP, degrees)?;
    if !step.is_finite() || step <= 0.0 {
        return Err(CliError::Usage(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let format = resolve_format(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg);

    let b = AxisObservable::new(theta_b)?;
    let state = QubitState::rho_x(alpha)?;
    let search = optimize_correction(theta_oa, &b, &state, step)?;

    let mut rows: Vec<SurfaceRow> = search
        .surface
        .iter()
        .map(|&(vartheta, phi, eta)| SurfaceRow {
            kind: "grid",
            vartheta,
            phi,
            eta,
        })
        .collect();
    rows.push(SurfaceRow {
        kind: "min",
        vartheta: search.min_point.0.vartheta(),
        phi: search.min_point.0.phi(),
        eta: search.min_point.1,
    });
    rows.push(SurfaceRow {
        kind: "max",
        vartheta: search.max_point.0.vartheta(),
        phi: search.max_point.0.phi(),
        eta: search.max_point.1,
    });

    let text = match format {
        Format::Csv => {
            let mut s = String::from("kind,vartheta,phi,eta\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.kind,
                    format_sig17(r.vartheta),
                    format_sig17(r.phi),
                    format_sig17(r.eta)
                ));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows).expect("serializable rows") + "\n",
    };
    write_output(&out, &text)
}

// ------------------------------------------------------------------ sweep

#[derive(Serialize)]
struct SweepRow {
    theta_oa: f64,
    theta_b: f64,
    alpha: f64,
    branch: &'static str,
    error: f64,
    disturbance: f64,
    error_sq: f64,
    disturbance_sq: f64,
    c_ab: f64,
    c_prime_ab: f64,
    d_ab: f64,
    ozawa_lhs: f64,
    ozawa_rhs: f64,
    branciard_d_lhs: f64,
    branciard_d_rhs: f64,
    branciard_c_lhs: f64,
    branciard_c_rhs: f64,
    tight_lhs: f64,
    tight_rhs: f64,
    saturation_residual: f64,
    sigma_error_sq: f64,
    sigma_disturbance_sq: f64,
}

const SWEEP_HEADER: &str = "theta_oa,theta_b,alpha,branch,error,disturbance,error_sq,\
disturbance_sq,c_ab,c_prime_ab,d_ab,ozawa_lhs,ozawa_rhs,branciard_d_lhs,branciard_d_rhs,\
branciard_c_lhs,branciard_c_rhs,tight_lhs,tight_rhs,saturation_residual,sigma_error_sq,\
sigma_disturbance_sq";

impl SweepRow {
    fn to_csv_line(&self) -> String {
        let nums = [
            self.theta_oa,
            self.theta_b,
            self.alpha,
        ];
        let tail = [
            self.error,
            self.disturbance,
            self.error_sq,
            self.disturbance_sq,
            self.c_ab,
            self.c_prime_ab,
            self.d_ab,
            self.ozawa_lhs,
            self.ozawa_rhs,
            self.branciard_d_lhs,
            self.branciard_d_rhs,
            self.branciard_c_lhs,
            self.branciard_c_rhs,
            self.tight_lhs,
            self.tight_rhs,
            self.saturation_residual,
            self.sigma_error_sq,
            self.sigma_disturbance_sq,
        ];
        let mut line = nums
            .iter()
            .map(|v| format_sig17(*v))
            .collect::<Vec<_>>()
            .join(",");
        line.push(',');
        line.push_str(self.branch);
        for v in tail {
            line.push(',');
            line.push_str(&format_sig17(v));
        }
        line
    }
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = crate::load_config(&args.common)?;
    let degrees = resolve_degrees(args.common.degrees, &cfg)?;
    let theta_b = resolve_angle(&args.theta_b, &cfg, "theta_b", DEFAULT_THETA_B, degrees)?;
    let thetas = resolve_theta_grid(&args.theta_oa, &cfg, &args.step, degrees)?;
    let alphas = match args
        .alpha
        .clone()
        .or_else(|| cfg.raw("alpha").map(str::to_string))
    {
        Some(text) => parse_alpha_list(&text)?,
        None => ALPHAS.to_vec(),
    };
    let correction_text = args
        .correction
        .clone()
        .or_else(|| cfg.raw("correction").map(str::to_string))
        .unwrap_or_else(|| "both".to_string());
    let correction = CorrectionOpt::parse(&correction_text, degrees).map_err(CliError::Usage)?;
    let counts: CountsOpt = resolve(&args.counts, &cfg, "counts", "exact".to_string())
        .map_err(CliError::Usage)?
        .parse()
        .map_err(CliError::Usage)?;
    let seed = resolve(&args.seed, &cfg, "seed", 1u64)?;
    let format = resolve_format(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg);

    let a = AxisObservable::new(0.0)?;
    let b = AxisObservable::new(theta_b)?;
    let mut rows = Vec::new();
    let mut row_index = 0u64;
    for &theta in &thetas {
        let oa = AxisObservable::new(theta)?;
        for (branch, target) in correction.targets(&oa, &b).map_err(CliError::Usage)? {
            let app = corrected_apparatus(&oa, &target);
            for &alpha in &alphas {
                let state = QubitState::rho_x(alpha)?;
                let (point, sig_e, sig_h) = match counts {
                    CountsOpt::Exact => (error_disturbance(&app, &a, &b, &state)?, 0.0, 0.0),
                    CountsOpt::Poisson { mean_counts } => {
                        let run = ThreeStateRun::simulate(
                            &app,
                            &a,
                            &b,
                            &state,
                            mean_counts,
                            Sampling::Poisson {
                                seed: seed.wrapping_add(row_index),
                            },
                        )?;
                        let rec = run.reconstruct()?;
                        (rec.point, rec.sigma_error_sq, rec.sigma_disturbance_sq)
                    }
                };
                row_index += 1;
                let bounds = BoundSet::compute(&a, &b, &state)?;
                let ozawa = check_ozawa(&point, &a, &b, &state);
                let br_d = check_branciard(&point, &a, &b, &state, bounds.d_ab)?;
                let br_c = check_branciard(&point, &a, &b, &state, bounds.c_prime_ab)?;
                let tight = check_tight_qubit(&point);
                rows.push(SweepRow {
                    theta_oa: theta,
                    theta_b,
                    alpha,
                    branch,
                    error: point.error,
                    disturbance: point.disturbance,
                    error_sq: point.error_sq,
                    disturbance_sq: point.disturbance_sq,
                    c_ab: bounds.c_ab,
                    c_prime_ab: bounds.c_prime_ab,
                    d_ab: bounds.d_ab,
                    ozawa_lhs: ozawa.lhs,
                    ozawa_rhs: ozawa.rhs,
                    branciard_d_lhs: br_d.lhs,
                    branciard_d_rhs: br_d.rhs,
                    branciard_c_lhs: br_c.lhs,
                    branciard_c_rhs: br_c.rhs,
                    tight_lhs: tight.lhs,
                    tight_rhs: tight.rhs,
                    saturation_residual: (tight.lhs - tight.rhs).abs(),
                    sigma_error_sq: sig_e,
                    sigma_disturbance_sq: sig_h,
                });
            }
        }
    }

    let text = match format {
        Format::Csv => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&r.to_csv_line());
                s.push('\n');
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows).expect("serializable rows") + "\n",
    };
    write_output(&out, &text)
}

// ------------------------------------------------------------- three-state

const STATE_LABELS: [&str; 5] = ["rho", "A_rho_A", "rho_given_A", "B_rho_B", "rho_given_B"];

#[derive(Serialize)]
struct PreparationReport {
    /// Gaussian noise width that produces the requested mixture.
    sigma: f64,
    /// Fidelity between the noisy-rotation output and the ideal
    /// contracted target state.
    fidelity: f64,
}

#[derive(Serialize)]
struct ThreeStateReport {
    theta_oa: f64,
    theta_b: f64,
    alpha: f64,
    branch: &'static str,
    seed: Option<u64>,
    error: f64,
    disturbance: f64,
    error_sq: f64,
    disturbance_sq: f64,
    sigma_error_sq: f64,
    sigma_disturbance_sq: f64,
    preparation: PreparationReport,
    run: ThreeStateRun,
}

fn preparation_report(alpha: f64) -> Result<PreparationReport, CliError> {
    let sigma = solve_sigma_for_alpha(alpha, NoiseDistribution::Gaussian)?;
    let plus_z = QubitState::from_bloch([0.0, 0.0, 1.0])?;
    let noisy = NoisyRotationSpec::new(FRAC_PI_2, sigma, NoiseDistribution::Gaussian, 20)?;
    let prepared = mixing_channel(&noisy, &plus_z)?;
    let ideal = NoisyRotationSpec::new(FRAC_PI_2, 0.0, NoiseDistribution::Gaussian, 20)?;
    let axis = mixing_channel(&ideal, &plus_z)?.bloch();
    let target = QubitState::from_bloch([alpha * axis[0], alpha * axis[1], alpha * axis[2]])?;
    Ok(PreparationReport {
        sigma,
        fidelity: fidelity(&prepared, &target)?,
    })
}

pub fn three_state(args: &ThreeStateArgs) -> Result<(), CliError> {
    let cfg = crate::load_config(&args.common)?;
    let degrees = resolve_degrees(args.common.degrees, &cfg)?;
    let theta_oa = resolve_angle(&args.theta_oa, &cfg, "theta_oa", 0.0, degrees)?;
    let theta_b = resolve_angle(&args.theta_b, &cfg, "theta_b", DEFAULT_THETA_B, degrees)?;
    let alpha = validate_alpha(resolve(&args.alpha, &cfg, "alpha", 1.0)?)?;
    let correction_text = args
        .correction
        .clone()
        .or_else(|| cfg.raw("correction").map(str::to_string))
        .unwrap_or_else(|| "optimal".to_string());
    let correction = CorrectionOpt::parse(&correction_text, degrees).map_err(CliError::Usage)?;
    let counts: CountsOpt = resolve(&args.counts, &cfg, "counts", "exact".to_string())
        .map_err(CliError::Usage)?
        .parse()
        .map_err(CliError::Usage)?;
    let seed = resolve(&args.seed, &cfg, "seed", 1u64)?;
    let format = resolve_format(&args.common, &cfg)?;
    let out = resolve_out(&args.common, &cfg);

    let a = AxisObservable::new(0.0)?;
    let b = AxisObservable::new(theta_b)?;
    let oa = AxisObservable::new(theta_oa)?;
    let targets = correction.targets(&oa, &b).map_err(CliError::Usage)?;
    if targets.len() != 1 {
        return Err(CliError::Usage(
            "three-state needs a single correction branch (optimal, anti-optimal, none, or explicit)"
                .into(),
        ));
    }
    let (branch, target) = targets.into_iter().next().expect("one branch");
    let app = corrected_apparatus(&oa, &target);
    let state = QubitState::rho_x(alpha)?;
    let (mean_counts, sampling) = match counts {
        CountsOpt::Exact => (crate::options::DEFAULT_MEAN_COUNTS, Sampling::Exact),
        CountsOpt::Poisson { mean_counts } => (mean_counts, Sampling::Poisson { seed }),
    };
    let run = ThreeStateRun::simulate(&app, &a, &b, &state, mean_counts, sampling)?;
    let rec = run.reconstruct()?;
    let report = ThreeStateReport {
        theta_oa,
        theta_b,
        alpha,
        branch,
        seed: run.seed,
        error: rec.point.error,
        disturbance: rec.point.disturbance,
        error_sq: rec.point.error_sq,
        disturbance_sq: rec.point.disturbance_sq,
        sigma_error_sq: rec.sigma_error_sq,
        sigma_disturbance_sq: rec.sigma_disturbance_sq,
        preparation: preparation_report(alpha)?,
        run,
    };

    match format {
        Format::Json => {
            let text =
                serde_json::to_string_pretty(&report).expect("serializable report") + "\n";
            write_output(&out, &text)
        }
        Format::Csv => {
            let mut counts_csv = String::from("state,m,b,intensity\n");
            let tables = [
                &report.run.rho,
                &report.run.a_rho_a,
                &report.run.rho_given_a,
                &report.run.b_rho_b,
                &report.run.rho_given_b,
            ];
            for (label, table) in STATE_LABELS.iter().zip(tables) {
                table.append_csv_rows(label, &mut counts_csv);
            }
            let mut summary = String::from(
                "theta_oa,theta_b,alpha,branch,seed,error,disturbance,error_sq,\
                 disturbance_sq,sigma_error_sq,sigma_disturbance_sq,prep_sigma,prep_fidelity\n",
            );
            let seed_field = report
                .seed
                .map(|s| s.to_string())
                .unwrap_or_default();
            summary.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                format_sig17(report.theta_oa),
                format_sig17(report.theta_b),
                format_sig17(report.alpha),
                report.branch,
                seed_field,
                format_sig17(report.error),
                format_sig17(report.disturbance),
                format_sig17(report.error_sq),
                format_sig17(report.disturbance_sq),
                format_sig17(report.sigma_error_sq),
                format_sig17(report.sigma_disturbance_sq),
                format_sig17(report.preparation.sigma),
                format_sig17(report.preparation.fidelity),
            ));
            match &out {
                Some(path) => {
                    write_path(path, &counts_csv)?;
                    write_path(&path.with_extension("summary.csv"), &summary)
                }
                None => print_stdout(&format!("{counts_csv}\n{summary}")),
            }
        }
    }
}

// ------------------------------------------------------------------ audit

pub fn audit(args: &AuditArgs) -> Result<(), CliError> {
    let cfg = crate::load_config(&args.common)?;
    let degrees = resolve_degrees(args.common.degrees, &cfg)?;
    // Validate any sweep-grid keys so a broken config is rejected here
    // with a usage error instead of silently ignored.
    resolve_theta_grid(&None, &cfg, &args.step, degrees)?;
    let seed = resolve(&args.seed, &cfg, "seed", 1u64)?;
    let out = resolve_out(&args.common, &cfg);

    let opts = AuditOptions {
        seed,
        inject_sign_fault: args.inject_reconstruction_fault,
    };
    let results = run_audit(&opts)?;
    let mut text = String::new();
    let mut passed = 0usize;
    for r in &results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "criterion {} [{}] {}: {}\n",
            r.id, verdict, r.name, r.detail
        ));
        if r.passed {
            passed += 1;
        }
    }
    text.push_str(&format!("audit: {passed}/{} criteria passed\n", results.len()));
    print_stdout(&text)?;
    if let Some(path) = &out {
        write_path(path, &text)?;
    }
    if passed != results.len() {
        return Err(CliError::AuditFailed);
    }
    Ok(())
}
