//! Scans of the measurement-basis angles, extremum search and symmetry checks.
//!
//! The α axis spans `[0, π]` and the φ axis spans `[0, 2π]` with both
//! endpoints included, so that every node `(α, φ)` has its partner
//! `(π − α, φ + π)` on the grid whenever the φ count is odd.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::cycle::{CycleEngine, CycleRecord, EngineParams};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 257;
pub const SLICE_POINTS: usize = 513;
pub const REFINEMENT_ROUNDS: usize = 3;
pub const REFINEMENT_POINTS: usize = 17;
pub const REFINEMENT_ZOOM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub alpha_points: usize,
    pub phi_points: usize,
    pub base: EngineParams,
}

impl GridSpec {
    pub fn new(base: EngineParams) -> Self {
        Self {
            alpha_points: DEFAULT_GRID_POINTS,
            phi_points: DEFAULT_GRID_POINTS,
            base,
        }
    }

    pub fn with_points(self, alpha_points: usize, phi_points: usize) -> Self {
        Self {
            alpha_points,
            phi_points,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_points < 3 || self.phi_points < 3 {
            return Err(Error::Config(format!(
                "grid needs at least 3 points per axis, got {}×{}",
                self.alpha_points, self.phi_points
            )));
        }
        self.base.validate()
    }

    pub fn alpha_at(&self, i: usize) -> f64 {
        PI * i as f64 / (self.alpha_points - 1) as f64
    }

    pub fn phi_at(&self, j: usize) -> f64 {
        TAU * j as f64 / (self.phi_points - 1) as f64
    }

    pub fn alpha_spacing(&self) -> f64 {
        PI / (self.alpha_points - 1) as f64
    }

    pub fn phi_spacing(&self) -> f64 {
        TAU / (self.phi_points - 1) as f64
    }

    pub fn is_symmetric(&self) -> bool {
        (self.phi_points - 1).is_multiple_of(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub phi: f64,
    pub w_ext: f64,
    pub q_m: f64,
    pub q_t: f64,
    pub eta: Option<f64>,
    pub ds: f64,
    pub xi: f64,
    pub zeta: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Set when the node failed a cycle invariant; numeric fields are then NaN.
    pub violation: Option<String>,
}

impl SweepRow {
    fn from_record(alpha: f64, phi: f64, r: &CycleRecord) -> Self {
        Self {
            alpha,
            phi,
            w_ext: r.w_ext(),
            q_m: r.q_m,
            q_t: r.q_t,
            eta: r.eta,
            ds: r.ds,
            xi: r.probs.xi,
            zeta: r.probs.zeta,
            delta: r.probs.delta,
            gamma: r.probs.gamma,
            violation: None,
        }
    }

    fn flagged(alpha: f64, phi: f64, err: &Error) -> Self {
        Self {
            alpha,
            phi,
            w_ext: f64::NAN,
            q_m: f64::NAN,
            q_t: f64::NAN,
            eta: None,
            ds: f64::NAN,
            xi: f64::NAN,
            zeta: f64::NAN,
            delta: f64::NAN,
            gamma: f64::NAN,
            violation: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub grid: GridSpec,
    /// Row-major by (α index, φ index).
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, i: usize, j: usize) -> &SweepRow {
        &self.rows[i * self.grid.phi_points + j]
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    Parallel,
}

pub fn grid_sweep(grid: &GridSpec) -> Result<SweepTable> {
    grid_sweep_with(grid, Schedule::Parallel)
}

/// Evaluates every node; any schedule yields the same table.
pub fn grid_sweep_with(grid: &GridSpec, schedule: Schedule) -> Result<SweepTable> {
    grid.validate()?;
    let engine = CycleEngine::new(&grid.base)?;
    let nphi = grid.phi_points;
    let eval = |k: usize| {
        let (alpha, phi) = (grid.alpha_at(k / nphi), grid.phi_at(k % nphi));
        match engine.run(alpha, phi) {
            Ok(r) => SweepRow::from_record(alpha, phi, &r),
            Err(e) => SweepRow::flagged(alpha, phi, &e),
        }
    };
    let n = grid.alpha_points * nphi;
    let rows = match schedule {
        Schedule::Sequential => (0..n).map(eval).collect(),
        Schedule::Parallel => (0..n).into_par_iter().map(eval).collect(),
    };
    Ok(SweepTable { grid: *grid, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    MaxWorkExtracted,
    MaxEfficiency,
    MinEntropyChange,
}

impl Objective {
    pub const ALL: [Objective; 3] = [
        Objective::MaxWorkExtracted,
        Objective::MaxEfficiency,
        Objective::MinEntropyChange,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Objective::MaxWorkExtracted => "max_w_ext",
            Objective::MaxEfficiency => "max_eta",
            Objective::MinEntropyChange => "min_ds",
        }
    }

    /// Objective value of a row, `None` when it is not a candidate.
    pub fn value(&self, row: &SweepRow) -> Option<f64> {
        if row.violation.is_some() {
            return None;
        }
        match self {
            Objective::MaxWorkExtracted => Some(row.w_ext),
            Objective::MaxEfficiency => row.eta,
            Objective::MinEntropyChange => Some(row.ds),
        }
    }

    fn record_value(&self, r: &CycleRecord) -> Option<f64> {
        match self {
            Objective::MaxWorkExtracted => Some(r.w_ext()),
            Objective::MaxEfficiency => r.eta,
            Objective::MinEntropyChange => Some(r.ds),
        }
    }

    /// Whether `a` improves strictly on `b`.
    fn better(&self, a: f64, b: f64) -> bool {
        match self {
            Objective::MinEntropyChange => a < b,
            _ => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub objective: Objective,
    /// Location folded into the half `φ ∈ [0, π]` of the symmetric pair.
    pub alpha_star: f64,
    pub phi_star: f64,
    pub value: f64,
    pub refinement_rounds: usize,
    /// Raw (unfolded) best grid node and its value.
    pub grid_alpha: f64,
    pub grid_phi: f64,
    pub grid_value: f64,
    /// Incumbent value after each round, starting with the grid value.
    pub history: Vec<f64>,
}

/// Maps `(α, φ)` to the equivalent measurement in the half `φ ∈ [0, π]`.
///
/// `(π − α, φ + π)` swaps `|χ₁⟩` and `|χ₂⟩` up to phases, so both
/// label the same projective measurement.
pub fn fold_to_upper_half(alpha: f64, phi: f64) -> (f64, f64) {
    let phi = crate::measurement::wrap_angle(phi);
    if phi > PI {
        (PI - alpha, phi - PI)
    } else {
        (alpha, phi)
    }
}

pub fn locate_extrema(table: &SweepTable, objective: Objective) -> Result<Extremum> {
    let engine = CycleEngine::new(&table.grid.base)?;
    locate_extrema_with(table, objective, &engine)
}

pub fn locate_extrema_with(
    table: &SweepTable,
    objective: Objective,
    engine: &CycleEngine,
) -> Result<Extremum> {
    let mut best: Option<(usize, f64)> = None;
    for (k, row) in table.rows.iter().enumerate() {
        if let Some(v) = objective.value(row) {
            if best.is_none_or(|(_, b)| objective.better(v, b)) {
                best = Some((k, v));
            }
        }
    }
    let (k, grid_value) = best.ok_or_else(|| {
        Error::Objective(format!("no row of the table defines {}", objective.key()))
    })?;
    let (grid_alpha, grid_phi) = (table.rows[k].alpha, table.rows[k].phi);

    let (mut a, mut p, mut value) = (grid_alpha, grid_phi, grid_value);
    let mut history = vec![value];
    let mut half_a = table.grid.alpha_spacing();
    let mut half_p = table.grid.phi_spacing();
    let mid = (REFINEMENT_POINTS / 2) as f64;
    for _ in 0..REFINEMENT_ROUNDS {
        let (ca, cp) = (a, p);
        for m in 0..REFINEMENT_POINTS {
            let la = (ca + half_a * (m as f64 - mid) / mid).clamp(0.0, PI);
            for n in 0..REFINEMENT_POINTS {
                let lp = cp + half_p * (n as f64 - mid) / mid;
                let Ok(r) = engine.run(la, lp) else { continue };
                if let Some(v) = objective.record_value(&r) {
                    if objective.better(v, value) {
                        (a, p, value) = (la, lp, v);
                    }
                }
            }
        }
        history.push(value);
        half_a /= REFINEMENT_ZOOM;
        half_p /= REFINEMENT_ZOOM;
    }
    debug_assert!(history.windows(2).all(|w| !objective.better(w[0], w[1])));

    let (alpha_star, phi_star) = fold_to_upper_half(a, p);
    Ok(Extremum {
        objective,
        alpha_star,
        phi_star,
        value,
        refinement_rounds: REFINEMENT_ROUNDS,
        grid_alpha,
        grid_phi,
        grid_value,
        history,
    })
}

/// Largest `|W_ext(α,φ) − W_ext(π−α, φ+π)|` and `|η(α,φ) − η(π−α, φ+π)|`
/// over node pairs; η pairs with an undefined member are skipped.
pub fn symmetry_residual(table: &SweepTable) -> Result<f64> {
    let g = &table.grid;
    if !g.is_symmetric() {
        return Err(Error::Config(format!(
            "φ grid with {} points has no node at φ + π; use an odd count",
            g.phi_points
        )));
    }
    let period = g.phi_points - 1;
    let shift = period / 2;
    let mut worst = 0.0f64;
    for i in 0..g.alpha_points {
        for j in 0..g.phi_points {
            let a = table.row(i, j);
            let b = table.row(g.alpha_points - 1 - i, (j + shift) % period);
            if a.violation.is_some() || b.violation.is_some() {
                continue;
            }
            worst = worst.max((a.w_ext - b.w_ext).abs());
            if let (Some(x), Some(y)) = (a.eta, b.eta) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}

/// True when the η-maximizing node lies in the lowest decile of ΔS.
pub fn efficiency_entropy_concordance(table: &SweepTable) -> Result<bool> {
    let k = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(k, r)| Objective::MaxEfficiency.value(r).map(|v| (k, v)))
        .fold(None, |acc: Option<(usize, f64)>, (k, v)| match acc {
            Some((_, b)) if b >= v => acc,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Objective("no row defines η".into()))?;
    let mut ds: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.violation.is_none())
        .map(|r| r.ds)
        .collect();
    ds.sort_by(f64::total_cmp);
    let decile = ds[(ds.len() - 1) / 10];
    Ok(table.rows[k].ds <= decile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixed {
    Alpha(f64),
    Phi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRow {
    pub alpha: f64,
    pub phi: f64,
    pub w_ext: f64,
    pub q_m: f64,
    pub eta: Option<f64>,
    pub ds: f64,
    pub zeta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub dp3: f64,
    pub dp4: f64,
}

impl SliceRow {
    pub fn free(&self, fixed: Fixed) -> f64 {
        match fixed {
            Fixed::Alpha(_) => self.phi,
            Fixed::Phi(_) => self.alpha,
        }
    }
}

/// One-dimensional profile along the free angle (α over `[0, π]` or φ over
/// `[0, 2π]`), freshly evaluated on `points` nodes.
pub fn slice(base: &EngineParams, fixed: Fixed, points: usize) -> Result<Vec<SliceRow>> {
    if points < 3 {
        return Err(Error::Config(format!(
            "slice needs at least 3 points, got {points}"
        )));
    }
    match fixed {
        Fixed::Alpha(a) if !(0.0..=PI).contains(&a) => {
            return Err(Error::Domain(format!(
                "fixed colatitude {a} outside [0, π]"
            )))
        }
        Fixed::Phi(p) if !p.is_finite() => {
            return Err(Error::Domain("fixed longitude is not finite".into()))
        }
        _ => {}
    }
    let engine = CycleEngine::new(base)?;
    let span = match fixed {
        Fixed::Alpha(_) => TAU,
        Fixed::Phi(_) => PI,
    };
    (0..points)
        .into_par_iter()
        .map(|k| {
            let x = span * k as f64 / (points - 1) as f64;
            let (alpha, phi) = match fixed {
                Fixed::Alpha(a) => (a, x),
                Fixed::Phi(p) => (x, p),
            };
            let r = engine.run(alpha, phi)?;
            Ok(SliceRow {
                alpha,
                phi,
                w_ext: r.w_ext(),
                q_m: r.q_m,
                eta: r.eta,
                ds: r.ds,
                zeta: r.probs.zeta,
                delta: r.probs.delta,
                gamma: r.probs.gamma,
                dp3: r.dp[2],
                dp4: r.dp[3],
            })
        })
        .collect()
}

/// Index of the largest value; NaNs never win.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |acc: Option<(usize, f64)>, (k, &v)| match acc {
            Some((_, b)) if b >= v => acc,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k)
}

/// Whether successive first differences never decrease by more than `tol`.
pub fn has_nondecreasing_derivative(values: &[f64], tol: f64) -> bool {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.windows(2).all(|d| d[1] >= d[0] - tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub max_w_ext: Extremum,
    pub max_eta: Extremum,
    pub min_ds: Extremum,
    pub symmetry_residual: Option<f64>,
    pub violations: usize,
}

impl SweepSummary {
    pub fn extremum(&self, objective: Objective) -> &Extremum {
        match objective {
            Objective::MaxWorkExtracted => &self.max_w_ext,
            Objective::MaxEfficiency => &self.max_eta,
            Objective::MinEntropyChange => &self.min_ds,
        }
    }
}

pub fn summarize(table: &SweepTable) -> Result<SweepSummary> {
    let engine = CycleEngine::new(&table.grid.base)?;
    Ok(SweepSummary {
        max_w_ext: locate_extrema_with(table, Objective::MaxWorkExtracted, &engine)?,
        max_eta: locate_extrema_with(table, Objective::MaxEfficiency, &engine)?,
        min_ds: locate_extrema_with(table, Objective::MinEntropyChange, &engine)?,
        symmetry_residual: symmetry_residual(table).ok(),
        violations: table.violations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn small(base: EngineParams) -> GridSpec {
        GridSpec::new(base).with_points(9, 17)
    }

    #[test]
    fn grid_validation() {
        let g = GridSpec::new(EngineParams::reference(0.0, 0.0)).with_points(2, 9);
        assert!(matches!(grid_sweep(&g), Err(Error::Config(_))));
    }

    #[test]
    fn axes_include_endpoints() {
        let g = small(EngineParams::reference(0.0, 0.0));
        assert_eq!(g.alpha_at(0), 0.0);
        assert_eq!(g.alpha_at(8), PI);
        assert_eq!(g.phi_at(16), TAU);
        assert!(g.is_symmetric());
    }

    #[test]
    fn infinite_temperature_grid() {
        let base = EngineParams {
            beta_hbar_omega: 0.0,
            ..EngineParams::reference(0.0, 0.0)
        };
        let t = grid_sweep(&GridSpec::new(base).with_points(3, 3)).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert!(t.rows.iter().all(|r| r.w_ext.abs() <= 1e-12));
        assert!(symmetry_residual(&t).unwrap() <= 1e-12);
        assert!(matches!(
            locate_extrema(&t, Objective::MaxEfficiency),
            Err(Error::Objective(_))
        ));
    }

    #[test]
    fn row_order_is_alpha_major() {
        let t = grid_sweep(&small(EngineParams::reference(0.0, 0.0))).unwrap();
        let r = t.row(3, 5);
        assert_eq!((r.alpha, r.phi), (t.grid.alpha_at(3), t.grid.phi_at(5)));
    }

    #[test]
    fn schedules_agree() {
        let g = small(EngineParams::reference(0.0, 0.0));
        let a = grid_sweep_with(&g, Schedule::Sequential).unwrap();
        let b = grid_sweep_with(&g, Schedule::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn asymmetric_grid_is_rejected() {
        let t = grid_sweep(&GridSpec::new(EngineParams::reference(0.0, 0.0)).with_points(5, 8))
            .unwrap();
        assert!(matches!(symmetry_residual(&t), Err(Error::Config(_))));
    }

    #[test]
    fn refinement_never_loses_ground() {
        let base = EngineParams {
            omega_tau: 2.0,
            ..EngineParams::reference(0.0, 0.0)
        };
        let t = grid_sweep(&small(base)).unwrap();
        for obj in Objective::ALL {
            let e = locate_extrema(&t, obj).unwrap();
            assert_eq!(e.history.len(), REFINEMENT_ROUNDS + 1);
            for w in e.history.windows(2) {
                assert!(!obj.better(w[0], w[1]));
            }
            for row in &t.rows {
                if let Some(v) = obj.value(row) {
                    assert!(!obj.better(
                        v,
                        e.value
                            + if obj == Objective::MinEntropyChange {
                                -1e-12
                            } else {
                                1e-12
                            }
                    ));
                }
            }
        }
    }

    #[test]
    fn folding() {
        assert_eq!(fold_to_upper_half(0.4, 1.0), (0.4, 1.0));
        let (a, p) = fold_to_upper_half(0.4, 4.0);
        assert!((a - (PI - 0.4)).abs() < 1e-15 && (p - (4.0 - PI)).abs() < 1e-15);
    }

    #[test]
    fn slice_shape() {
        let base = EngineParams::reference(0.0, 0.0);
        let s = slice(&base, Fixed::Phi(2.53), 33).unwrap();
        assert_eq!(s.len(), 33);
        assert_eq!(s[0].alpha, 0.0);
        assert_eq!(s[32].alpha, PI);
        let s = slice(&base, Fixed::Alpha(FRAC_PI_2), 17).unwrap();
        assert_eq!(s[16].phi, TAU);
        assert!(slice(&base, Fixed::Alpha(4.0), 17).is_err());
    }

    #[test]
    fn derivative_monotonicity() {
        let convex: Vec<f64> = (0..20).map(|k| (k as f64 - 7.0).powi(2)).collect();
        assert!(has_nondecreasing_derivative(&convex, 0.0));
        let concave: Vec<f64> = convex.iter().map(|x| -x).collect();
        assert!(!has_nondecreasing_derivative(&concave, 0.0));
        assert_eq!(argmax(&[1.0, f64::NAN, 3.0, 2.0]), Some(2));
    }
}
