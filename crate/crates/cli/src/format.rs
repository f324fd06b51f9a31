//! Text serialization for sweep tables, slices and summaries.
//!
//! Every number is written with 17 significant digits (`{:.16e}`), which is
//! enough for any `f64` to survive a parse and re-serialization unchanged.
//! Undefined values are written as the lowercase token `nan`.

use std::fmt::Write as _;

use qmeter::sweep::{Extremum, Objective, SliceRow, SweepRow, SweepTable};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const SWEEP_HEADER: [&str; 11] = [
    "alpha", "phi", "w_ext", "q_m", "q_t", "eta", "ds", "xi", "zeta", "delta", "gamma",
];

pub const SLICE_HEADER: [&str; 11] = [
    "alpha", "phi", "w_ext", "q_m", "eta", "ds", "zeta", "delta", "gamma", "dp3", "dp4",
];

pub fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn optional(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// A numeric table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| number(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Config("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|cell| cell.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("CSV line {}: {e}", n + 2)))?;
            if row.len() != header.len() {
                return Err(CliError::Config(format!(
                    "CSV line {}: {} cells, header has {}",
                    n + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Energies in the table are in units of ħω; `energy_scale` converts them.
pub fn sweep_csv(table: &SweepTable, energy_scale: f64) -> Csv {
    let mut csv = Csv::new(&SWEEP_HEADER);
    for r in &table.rows {
        csv.push(sweep_row(r, energy_scale));
    }
    csv
}

pub fn sweep_row(r: &SweepRow, energy_scale: f64) -> Vec<f64> {
    vec![
        r.alpha,
        r.phi,
        r.w_ext * energy_scale,
        r.q_m * energy_scale,
        r.q_t * energy_scale,
        optional(r.eta),
        r.ds,
        r.xi,
        r.zeta,
        r.delta,
        r.gamma,
    ]
}

pub fn slice_csv(rows: &[SliceRow], energy_scale: f64) -> Csv {
    let mut csv = Csv::new(&SLICE_HEADER);
    for r in rows {
        csv.push(vec![
            r.alpha,
            r.phi,
            r.w_ext * energy_scale,
            r.q_m * energy_scale,
            optional(r.eta),
            r.ds,
            r.zeta,
            r.delta,
            r.gamma,
            r.dp3,
            r.dp4,
        ]);
    }
    csv
}

fn extremum_json(e: &Extremum, energy_scale: f64) -> String {
    let scale = match e.objective {
        Objective::MaxWorkExtracted => energy_scale,
        _ => 1.0,
    };
    format!(
        "{{\"alpha\": {}, \"phi\": {}, \"value\": {}}}",
        json_number(e.alpha_star),
        json_number(e.phi_star),
        json_number(e.value * scale)
    )
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        number(x)
    } else {
        "null".to_string()
    }
}

/// Extrema (`None` when the objective is undefined on every row), symmetry
/// residual and violation count of one sweep.
#[derive(Debug, Clone)]
pub struct Summary {
    pub extrema: Vec<(Objective, Option<Extremum>)>,
    pub symmetry_residual: Option<f64>,
    pub violations: usize,
}

/// Summary object with the requested extrema, the symmetry residual and an
/// echo of the parameters.
pub fn summary_json(summary: &Summary, config: &RunConfig) -> String {
    let scale = config.hbar_omega_pev;
    let mut out = String::from("{\n");
    for (objective, e) in &summary.extrema {
        let value = e
            .as_ref()
            .map_or("null".to_string(), |e| extremum_json(e, scale));
        let _ = writeln!(out, "  \"{}\": {value},", objective.key());
    }
    let residual = summary
        .symmetry_residual
        .map_or("null".to_string(), json_number);
    let _ = writeln!(out, "  \"symmetry_residual\": {residual},");
    let _ = writeln!(out, "  \"violations\": {},", summary.violations);
    let _ = writeln!(out, "  \"params\": {{");
    let params = [
        ("hbar_omega_peV", json_number(config.hbar_omega_pev)),
        ("tau_us", json_number(config.tau_us)),
        ("beta", format!("\"{}\"", config.beta)),
        ("omega_tau", json_number(config.omega_tau())),
        ("beta_hbar_omega", json_number(config.beta_hbar_omega())),
        ("steps", config.steps.to_string()),
        ("grid_alpha_points", config.grid_alpha_points.to_string()),
        ("grid_phi_points", config.grid_phi_points.to_string()),
    ];
    let n = params.len();
    for (k, (key, value)) in params.into_iter().enumerate() {
        let comma = if k + 1 < n { "," } else { "" };
        let _ = writeln!(out, "    \"{key}\": {value}{comma}");
    }
    out.push_str("  }\n}\n");
    out
}
