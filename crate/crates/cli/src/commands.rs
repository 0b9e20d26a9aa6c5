use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use dephtomo::channel::{
    apply_channel, basis_residuals, evaluate, extract_basis, refit_signals, validate_channel, Violation,
    DECOMPOSITION_TOL,
};
use dephtomo::io::{format_f64, json_complex, json_f64, json_matrix, read_record_csv, report_to_json, write_record_csv};
use dephtomo::operator::{frobenius_distance, identity, pauli_x, pauli_y, pauli_z, trace_pair, RANK_TOL};
use dephtomo::tomography::{
    check_solvability, dephasing_closed_form, lambda_matrix, select_time_grid, simulate_measurements,
    solve_projections, DEFAULT_GRID_CANDIDATES, LAMBDA_CONDITION_WARNING,
};
use dephtomo::{ComplexMatrix, DampingModel, DensityMatrix, MeasurementRecord, Observable, TimeGrid};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{CliError, StageExt};
use crate::scenario::{GridMode, Scenario};

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: Vec<String>,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: Vec::new(), exit_code: 0 }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn violation(v: &Violation) -> Value {
    json!({ "magnitude": json_f64(v.magnitude), "time": json_f64(v.time) })
}

fn times_json(times: &[f64]) -> Value {
    Value::Array(times.iter().map(|&t| json_f64(t)).collect())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn validate(scenario_path: &Path) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(scenario_path)?;
    let model = scenario.channel()?;
    let grid = scenario.probe_times(&model)?;
    let report = validate_channel(&model, &grid).stage("validate")?;
    let out = json!({
        "scenario": scenario.name,
        "grid_points": grid.len(),
        "all_ok": report.all_ok(),
        "psd_ok": report.psd_ok,
        "diag_ok": report.diag_ok,
        "init_ok": report.init_ok,
        "psd": violation(&report.psd),
        "diag": violation(&report.diag),
        "init": violation(&report.init),
    });
    let mut outcome = Outcome::ok(pretty(&out));
    if !report.all_ok() {
        outcome.exit_code = 1;
        outcome.stderr.push(format!("channel `{}` failed validation", scenario.name));
    }
    Ok(outcome)
}

pub fn decompose(scenario_path: &Path) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(scenario_path)?;
    let model = scenario.channel()?;
    let candidates = scenario.candidate_times(&model)?;
    let decomp = extract_basis(&model, &candidates, RANK_TOL).stage("decompose")?;
    let probes = scenario.probe_times(&model)?;
    let residuals = basis_residuals(&model, decomp.basis(), &probes).stage("decompose")?;
    let worst = residuals.iter().map(|&(_, r)| r).fold(0.0_f64, f64::max);
    let failure = residuals.iter().find(|&&(_, r)| r > DECOMPOSITION_TOL);

    let out = json!({
        "scenario": scenario.name,
        "mu": decomp.mu(),
        "declared_mu": model.decomposition().map(|d| d.mu()),
        "candidate_times": candidates.len(),
        "basis": decomp.basis().iter().map(json_matrix).collect::<Vec<_>>(),
        "residuals": residuals.iter().map(|&(t, r)| json!({ "t": json_f64(t), "residual": json_f64(r) })).collect::<Vec<_>>(),
        "max_residual": json_f64(worst),
        "tolerance": json_f64(DECOMPOSITION_TOL),
        "ok": failure.is_none(),
    });
    let mut outcome = Outcome::ok(pretty(&out));
    if let Some(&(t, r)) = failure {
        outcome.exit_code = 1;
        outcome.stderr.push(format!(
            "decompose: basis of {} elements does not reproduce D(t) at t = {}: residual {} exceeds {}; add candidate times",
            decomp.mu(),
            format_f64(t),
            format_f64(r),
            format_f64(DECOMPOSITION_TOL)
        ));
    }
    Ok(outcome)
}

pub fn run(scenario_path: &Path, record_out: Option<&Path>, report_out: Option<&Path>) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(scenario_path)?;
    let model = scenario.channel()?;
    let observables = scenario.observables()?;
    let truth = scenario.true_state()?;
    if truth.is_none() && scenario.record.is_none() {
        return Err(CliError::Scenario("need `true_state` to simulate or `record` to read measurements".into()));
    }

    let extracted = match model.decomposition() {
        Some(d) => d.clone(),
        None => extract_basis(&model, &scenario.candidate_times(&model)?, RANK_TOL).stage("decompose")?,
    };

    let record = match (&scenario.record, &truth) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            read_record_csv(file, &observables).map_err(|e| CliError::Parse { path: path.clone(), message: e.to_string() })?
        }
        (None, Some(rho)) => {
            let grid = match scenario.grid_mode()? {
                GridMode::Explicit(times) => TimeGrid::new(times).stage("grid")?,
                GridMode::Auto { .. } => {
                    let horizon = scenario.horizon(&model)?;
                    select_time_grid(&extracted, horizon, extracted.mu(), DEFAULT_GRID_CANDIDATES, scenario.seed)
                        .stage("grid")?
                }
            };
            simulate_measurements(&model, rho, &observables, &grid, scenario.noise_sigma, scenario.seed)
                .stage("simulate")?
        }
        (None, None) => unreachable!("checked above"),
    };

    // tabulated signals are exact only at their sample times
    let decomp = match model.decomposition() {
        Some(d) => d.clone(),
        None => refit_signals(&model, extracted.basis().to_vec(), record.grid().instants()).stage("decompose")?,
    };
    let report =
        dephtomo::tomography::reconstruct_from_record(&record, &decomp, scenario.options.into()).stage("reconstruct")?;
    let error = truth.as_ref().map(|rho| frobenius_distance(&report.state, rho.matrix()));

    if let Some(path) = record_out {
        write_record_csv(&record, create(path)?).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    let full = json!({
        "scenario": scenario.name,
        "mu": decomp.mu(),
        "grid": times_json(record.grid().instants()),
        "observables": record.observables().iter().map(|q| q.label.clone()).collect::<Vec<_>>(),
        "noise_sigma": json_f64(scenario.noise_sigma),
        "seed": scenario.seed,
        "frobenius_error": error.map_or(Value::Null, json_f64),
        "reconstruction": report_to_json(&report),
    });

    let stderr: Vec<String> = report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    let stdout = match report_out {
        Some(path) => {
            std::fs::write(path, pretty(&full)).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            let mut s = format!("scenario: {}\nmu: {}\ngrid:", scenario.name, decomp.mu());
            for &t in record.grid().instants() {
                s.push(' ');
                s.push_str(&format_f64(t));
            }
            s.push_str(&format!("\nphysical: {}\n", report.physical));
            if let Some(e) = error {
                s.push_str(&format!("frobenius_error: {}\n", format_f64(e)));
            }
            s
        }
        None => pretty(&full),
    };
    Ok(Outcome { stdout, stderr, exit_code: 0 })
}

/// Fixed qubit state used by the dephasing walkthrough.
pub fn demo_state() -> DensityMatrix {
    use dephtomo::Complex64 as C;
    DensityMatrix::new(ComplexMatrix::from_row_slice(
        2,
        2,
        &[C::new(0.6, 0.0), C::new(0.1, -0.2), C::new(0.1, 0.2), C::new(0.4, 0.0)],
    ))
    .expect("demo state is a density matrix")
}

fn text_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        s.push_str("  [");
        for j in 0..m.ncols() {
            if j > 0 {
                s.push_str(", ");
            }
            let z = m[(i, j)];
            s.push_str(&format!("{} {} {}i", format_f64(z.re), if z.im < 0.0 { '-' } else { '+' }, format_f64(z.im.abs())));
        }
        s.push_str("]\n");
    }
    s
}

pub fn demo_dephasing(gamma: f64, t: f64, as_json: bool) -> Result<Outcome, CliError> {
    let rho = demo_state();
    let model = DampingModel::dephasing(gamma);
    let q1 = Observable::new("Q1", pauli_x()).stage("demo")?;
    let q2 = Observable::new("Q2", pauli_y() + pauli_z()).stage("demo")?;

    let rho_t = apply_channel(&model, t, &rho).stage("demo")?;
    let m1_0 = trace_pair(q1.matrix(), &rho).stage("demo")?.re;
    let m2_0 = trace_pair(q2.matrix(), &rho).stage("demo")?.re;
    let m2_t = trace_pair(q2.matrix(), &rho_t).stage("demo")?.re;
    let estimate = dephasing_closed_form(m1_0, m2_0, m2_t, gamma, t).stage("demo")?;

    let grid = TimeGrid::new(vec![0.0, t]).stage("demo")?;
    let decomp = model.decomposition().expect("dephasing is decomposed").clone();
    let lm = lambda_matrix(&decomp, &grid).stage("demo")?;
    let solvability = check_solvability(&lm);
    let record = MeasurementRecord::new(
        vec![q1, q2],
        grid,
        DMatrix::from_row_slice(2, 2, &[m1_0, m1_0, m2_0, m2_t]),
    )
    .stage("demo")?;
    let projections = solve_projections(&record, &lm).stage("projections")?;
    let (tr_s3, tr_s2) = (projections[(1, 0)].re, projections[(1, 1)].re);

    let decay = (-gamma * t).exp();
    let mut warnings = Vec::new();
    if decay < f64::EPSILON {
        warnings.push(format!(
            "e^(-gamma t) = {} is below machine epsilon: the later sample no longer resolves the decaying coherence, lambda matrix condition {}",
            format_f64(decay),
            format_f64(solvability.condition)
        ));
    } else if solvability.condition > LAMBDA_CONDITION_WARNING {
        warnings.push(format!("ill-conditioned lambda matrix (condition {})", format_f64(solvability.condition)));
    }
    let d_t = evaluate(&model, t).stage("demo")?;

    let stdout = if as_json {
        pretty(&json!({
            "gamma": json_f64(gamma),
            "t": json_f64(t),
            "d_t": json_matrix(&d_t),
            "decomposition": {
                "basis": [json_matrix(&identity(2)), json_matrix(&pauli_x())],
                "lambda_t": [json_complex(lm[(1, 0)]), json_complex(lm[(1, 1)])],
            },
            "observables": { "Q1": json_matrix(&pauli_x()), "Q2": json_matrix(&(pauli_y() + pauli_z())) },
            "true_state": json_matrix(rho.matrix()),
            "measurements": { "m1_0": json_f64(m1_0), "m2_0": json_f64(m2_0), "m2_t": json_f64(m2_t) },
            "projections": { "tr_sigma3_rho": json_f64(tr_s3), "tr_sigma2_rho": json_f64(tr_s2) },
            "lambda_condition": json_f64(solvability.condition),
            "closed_form": {
                "sigma1": json_f64(estimate.sigma1),
                "sigma2": json_f64(estimate.sigma2),
                "sigma3": json_f64(estimate.sigma3),
            },
            "state": json_matrix(&estimate.state),
            "physical": estimate.physical,
            "warnings": warnings,
        }))
    } else {
        let mut s = format!("dephasing walkthrough, gamma = {}, t = {}\n\n", format_f64(gamma), format_f64(t));
        s.push_str("D(t) = I + e^(-gamma t) sigma_1:\n");
        s.push_str(&text_matrix(&d_t));
        s.push_str(&format!(
            "\nconstant basis A1 = I, A2 = sigma_1; lambda_1(t) = 1, lambda_2(t) = {}\n",
            format_f64(decay)
        ));
        s.push_str("observables Q1 = sigma_1, Q2 = sigma_2 + sigma_3\n\ninitial state:\n");
        s.push_str(&text_matrix(rho.matrix()));
        s.push_str(&format!(
            "\nmeasurements\n  m1(0) = {}\n  m2(0) = {}\n  m2(t) = {}\n",
            format_f64(m1_0),
            format_f64(m2_0),
            format_f64(m2_t)
        ));
        s.push_str(&format!(
            "\nprojections from the lambda system (condition {})\n  Tr(sigma_3 rho) = {}\n  Tr(sigma_2 rho) = {}\n",
            format_f64(solvability.condition),
            format_f64(tr_s3),
            format_f64(tr_s2)
        ));
        s.push_str("\nreconstructed state:\n");
        s.push_str(&text_matrix(&estimate.state));
        if !estimate.physical {
            s.push_str("(not a valid density matrix)\n");
        }
        s
    };
    let stderr = warnings.iter().map(|w| format!("warning: {w}")).collect();
    Ok(Outcome { stdout, stderr, exit_code: 0 })
}
