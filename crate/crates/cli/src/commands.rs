use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bellprobe::bell_protocol::{run_ideal_identification, BellCoefficients, StepId};
use bellprobe::cavity_qed::{
    effective_gate_fidelity, fig2_initial_state, first_realizing_time, full_gate_fidelity,
    simulate_comparison, tune_delta1, CavityParams, FieldFormula, GateReport,
};
use bellprobe::checks;
use bellprobe::shot_sampler::{estimate, ShotPlan};
use serde::Serialize;
use serde_json::{json, Value};

use crate::qed_config::QedConfig;
use crate::{CliError, Command, FieldArg, QedArgs, SeriesFormat, SCHEMA_VERSION};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Identify { coeffs, out } => {
            let c = parse_coefficients(&coeffs)?;
            emit_json(&run_ideal_identification(&c)?, out.as_deref())
        }
        Command::Sample {
            coeffs,
            shots,
            seed,
            recovery_shots,
            out,
        } => {
            let c = parse_coefficients(&coeffs)?;
            let plan = ShotPlan::new(shots, seed)?.with_recovery_shots(recovery_shots);
            emit_json(&estimate(&c, &plan)?, out.as_deref())
        }
        Command::Verify { samples, seed, out } => {
            let results = checks::run_all(samples, seed)?;
            let all_pass = results.iter().all(|r| r.pass);
            emit_json(
                &json!({ "checks": results, "pass": all_pass }),
                out.as_deref(),
            )?;
            if all_pass {
                Ok(())
            } else {
                let failed: Vec<&str> = results
                    .iter()
                    .filter(|r| !r.pass)
                    .map(|r| r.check_name.as_str())
                    .collect();
                Err(CliError::check_failed(format!(
                    "failed checks: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::QedSim {
            qed,
            t_max,
            n_samples,
            format,
            out,
            summary,
        } => qed_sim(&qed, t_max, n_samples, format, &out, summary),
        Command::QedFidelity {
            qed,
            effective_only,
            out,
        } => qed_fidelity(&qed, effective_only, out.as_deref()),
    }
}

fn parse_coefficients(values: &[f64]) -> Result<BellCoefficients, CliError> {
    let arr: [f64; 4] = values
        .try_into()
        .map_err(|_| CliError::config(format!("expected 4 coefficients, got {}", values.len())))?;
    Ok(BellCoefficients::new(arr)?)
}

/// Serializes `value` with a leading `schema_version`, to `out` or stdout.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let body = serde_json::to_value(value)
        .map_err(|e| CliError::config(format!("serialization failed: {e}")))?;
    let mut doc = serde_json::Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    match body {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON value") + "\n";
    write_output(&text, out)
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Step parameters with `δ1` tuned (or kept) and the value used.
struct Prepared {
    step: StepId,
    params: CavityParams,
    delta1: f64,
    warnings: Vec<String>,
}

fn prepare(qed: &QedArgs) -> Result<Prepared, CliError> {
    let step = StepId::from_number(qed.step as usize)?;
    if !qed.dt.is_finite() || qed.dt <= 0.0 {
        return Err(CliError::config(format!(
            "dt must be positive, got {}",
            qed.dt
        )));
    }
    let config = QedConfig::load(&qed.params)?;
    let params = config.params_for_step(step)?;
    let (delta1, params) = if qed.no_tune {
        (params.frame_shift, params)
    } else {
        let formula = match qed.field {
            FieldArg::Published => FieldFormula::Published,
            FieldArg::SecondOrder => FieldFormula::SecondOrder,
        };
        tune_delta1(&params, step, formula)?
    };
    let warnings = params.warnings();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(Prepared {
        step,
        params,
        delta1,
        warnings,
    })
}

fn qed_sim(
    qed: &QedArgs,
    t_max: f64,
    n_samples: usize,
    format: SeriesFormat,
    out: &Path,
    summary: Option<PathBuf>,
) -> Result<(), CliError> {
    let summary_path = summary.unwrap_or_else(|| out.with_extension("json"));
    if summary_path == out {
        return Err(CliError::config(
            "summary path must differ from the series path",
        ));
    }
    let prep = prepare(qed)?;
    let init = fig2_initial_state(prep.step);
    let cmp = simulate_comparison(&prep.params, prep.step, &init, t_max, n_samples, qed.dt)?;
    let series = &cmp.series;
    match format {
        SeriesFormat::Csv => {
            let mut text = String::from("t,full,effective\n");
            for ((t, f), e) in series
                .times
                .iter()
                .zip(&series.full_values)
                .zip(&series.effective_values)
            {
                writeln!(text, "{t:.15e},{f:.15e},{e:.15e}").expect("write to string");
            }
            write_output(&text, Some(out))?;
        }
        SeriesFormat::Json => emit_json(series, Some(out))?,
    }
    let gate = if cmp.lambda != 0.0 {
        Some(first_realizing_time(cmp.lambda)?)
    } else {
        None
    };
    emit_json(
        &json!({
            "step": prep.step.number(),
            "lambda": cmp.lambda,
            "gate_time": gate,
            "delta1_tuned": prep.delta1,
            "g_b": prep.params.coupling_b,
            "omega_b": prep.params.rabi_b,
            "max_deviation": series.max_deviation(),
            "leakage": cmp.mean_leakage,
            "max_leakage": cmp.max_leakage,
            "max_drift": cmp.max_drift,
            "dt": cmp.dt,
            "warnings": prep.warnings,
        }),
        Some(&summary_path),
    )
}

fn qed_fidelity(qed: &QedArgs, effective_only: bool, out: Option<&Path>) -> Result<(), CliError> {
    let prep = prepare(qed)?;
    let report: GateReport = if effective_only {
        effective_gate_fidelity(&prep.params, prep.step)?
    } else {
        full_gate_fidelity(&prep.params, prep.step, qed.dt)?
    };
    if report.outside_validity {
        eprintln!(
            "warning: leakage {:.4} exceeds the validity threshold",
            report.leakage
        );
    }
    emit_json(
        &json!({
            "step": prep.step.number(),
            "mode": if effective_only { "effective" } else { "full" },
            "fidelity": report.fidelity,
            "leakage": report.leakage,
            "gate_time": report.gate_time,
            "lambda_used": report.lambda,
            "warning": report.outside_validity,
            "delta1_tuned": prep.delta1,
            "g_b": prep.params.coupling_b,
            "omega_b": prep.params.rabi_b,
            "max_drift": report.max_drift,
            "warnings": prep.warnings,
        }),
        out,
    )
}
