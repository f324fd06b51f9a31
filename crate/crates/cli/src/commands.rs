//! The `run`, `sweep` and `slice` commands.

use std::io::Write;
use std::path::{Path, PathBuf};

use qmeter::cycle::{crosscheck, CycleEngine};
use qmeter::sweep::{grid_sweep, locate_extrema_with, slice, symmetry_residual, Fixed, Objective};
use qmeter::Error;

use crate::config::{Fault, RunConfig};
use crate::error::{CliError, Result};
use crate::format::{number, slice_csv, summary_json, sweep_csv, Csv, Summary, SWEEP_HEADER};

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn engine(config: &RunConfig) -> Result<CycleEngine> {
    Ok(CycleEngine::new(&config.engine_params())?.with_fault(config.fault.measure_fault()))
}

fn no_fault(config: &RunConfig, command: &str) -> Result<()> {
    if config.fault != Fault::None {
        return Err(CliError::Config(format!(
            "fault injection is not supported by {command}"
        )));
    }
    Ok(())
}

/// Evaluates one cycle and prints it as `key=value` lines; optionally writes
/// the same record as a one-row CSV in the sweep layout.
pub fn run(config: &RunConfig, csv: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let (alpha, phi) = config.angles()?;
    let record = engine(config)?.run(alpha, phi)?;
    let report = crosscheck(&record);
    let e = config.hbar_omega_pev;
    let eta = record.eta.map_or("undefined".to_string(), number);
    let lines = [
        ("omega_tau", number(config.omega_tau())),
        ("beta_hbar_omega", number(config.beta_hbar_omega())),
        ("alpha", number(alpha)),
        ("phi", number(phi)),
        ("energy_unit", "peV".to_string()),
        ("w_ext", number(record.w_ext() * e)),
        ("q_m", number(record.q_m * e)),
        ("q_t", number(record.q_t * e)),
        ("w1", number(record.w1 * e)),
        ("w2", number(record.w2 * e)),
        ("eta", eta),
        ("ds", number(record.ds)),
        ("xi", number(record.probs.xi)),
        ("zeta", number(record.probs.zeta)),
        ("delta", number(record.probs.delta)),
        ("gamma", number(record.probs.gamma)),
        ("residual_first_law", number(report.first_law)),
        (
            "residual_energy",
            number(
                report
                    .work
                    .max(report.work_forms)
                    .max(report.fuel)
                    .max(report.heat)
                    .max(report.occupations),
            ),
        ),
        (
            "residual_entropy",
            number(
                report
                    .entropy_stroke_i
                    .max(report.entropy_stroke_iii)
                    .max(report.entropy_thermalization),
            ),
        ),
        (
            "residual_eta",
            report.eta.map_or("undefined".to_string(), number),
        ),
        (
            "residual_eta_forms",
            report.eta_forms.map_or("undefined".to_string(), number),
        ),
    ];
    let io = |e| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    for (k, v) in lines {
        writeln!(out, "{k}={v}").map_err(io)?;
    }
    if let Some(path) = csv {
        let mut table = Csv::new(&SWEEP_HEADER);
        table.push(vec![
            alpha,
            phi,
            record.w_ext() * e,
            record.q_m * e,
            record.q_t * e,
            record.eta.unwrap_or(f64::NAN),
            record.ds,
            record.probs.xi,
            record.probs.zeta,
            record.probs.delta,
            record.probs.gamma,
        ]);
        write_file(path, &table.to_text())?;
    }
    Ok(())
}

pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}

/// Sweeps the configured grid, writes the table and a summary, and reports
/// flagged nodes as an invariant violation once both files exist.
pub fn sweep(
    config: &RunConfig,
    objectives: &[Objective],
    output: &Path,
    summary: Option<&Path>,
) -> Result<Summary> {
    no_fault(config, "sweep")?;
    let table = grid_sweep(&config.grid())?;
    let engine = CycleEngine::new(&table.grid.base)?;
    let mut extrema = Vec::new();
    for &objective in objectives {
        match locate_extrema_with(&table, objective, &engine) {
            Ok(e) => extrema.push((objective, Some(e))),
            Err(Error::Objective(_)) => extrema.push((objective, None)),
            Err(e) => return Err(e.into()),
        }
    }
    let result = Summary {
        extrema,
        symmetry_residual: symmetry_residual(&table).ok(),
        violations: table.violations(),
    };
    write_file(output, &sweep_csv(&table, config.hbar_omega_pev).to_text())?;
    let summary = summary.map_or_else(|| summary_path(output), Path::to_path_buf);
    write_file(&summary, &summary_json(&result, config))?;
    if result.violations > 0 {
        let first = table
            .rows
            .iter()
            .find_map(|r| r.violation.clone())
            .unwrap_or_default();
        return Err(CliError::Invariant(format!(
            "{} grid nodes flagged; first: {first}",
            result.violations
        )));
    }
    Ok(result)
}

pub fn run_slice(config: &RunConfig, fixed: Fixed, points: usize, output: &Path) -> Result<()> {
    no_fault(config, "slice")?;
    let rows = slice(&config.engine_params(), fixed, points)?;
    write_file(output, &slice_csv(&rows, config.hbar_omega_pev).to_text())
}
