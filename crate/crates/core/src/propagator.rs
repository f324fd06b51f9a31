//! Driven Hamiltonians of the two unitary strokes and their time-ordered
//! propagators.
//!
//! The first stroke rotates the field from z to x over a phase `ωτ`:
//! `H_I(t) = ½(cos(πt/2τ) σ_z + sin(πt/2τ) σ_x)`, `t ∈ [0, τ]`.
//! The second stroke runs it back, `H_II(t) = H_I(2τ − t)`, `t ∈ [τ, 2τ]`.
//! Propagators are products of exact exponentials sampled at step midpoints,
//! so they are unitary to roundoff for any step count and second-order
//! accurate in the step size.

use std::f64::consts::FRAC_PI_2;

use crate::algebra::{expm_unchecked, pauli, Axis, Matrix2C};
use crate::error::{Error, Result};

pub const DEFAULT_STEPS: usize = 1024;
pub const REFERENCE_STEPS: usize = 65536;
/// Below this entrywise error a step-count ladder carries no convergence signal.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Roundoff floor of an `n`-factor reference product.
pub fn roundoff_floor(reference_steps: usize) -> f64 {
    ROUNDOFF_FLOOR.max(4.0 * f64::EPSILON * reference_steps as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    /// Drive duration as the dimensionless phase ωτ.
    pub omega_tau: f64,
    pub segment: Segment,
}

impl DriveSpec {
    pub fn new(omega_tau: f64, segment: Segment) -> Result<Self> {
        if !(omega_tau > 0.0) || !omega_tau.is_finite() {
            return Err(Error::Config(format!(
                "drive duration must be positive and finite, got {omega_tau}"
            )));
        }
        Ok(Self { omega_tau, segment })
    }

    /// `(start, end)` of the segment in phase units.
    pub fn window(&self) -> (f64, f64) {
        let tau = self.omega_tau;
        match self.segment {
            Segment::I => (0.0, tau),
            Segment::II => (tau, 2.0 * tau),
        }
    }

    fn hamiltonian_at(&self, t: f64) -> Matrix2C {
        let tau = self.omega_tau;
        let s = match self.segment {
            Segment::I => t,
            Segment::II => 2.0 * tau - t,
        };
        field(FRAC_PI_2 * s / tau)
    }
}

/// `½(cos θ σ_z + sin θ σ_x)`.
fn field(theta: f64) -> Matrix2C {
    let (s, c) = theta.sin_cos();
    (pauli(Axis::Z) * c + pauli(Axis::X) * s) * 0.5
}

pub fn driving_hamiltonian(spec: &DriveSpec, t: f64) -> Result<Matrix2C> {
    let (start, end) = spec.window();
    let slack = 1e-12 * spec.omega_tau;
    if !(t >= start - slack && t <= end + slack) {
        return Err(Error::Domain(format!(
            "t = {t} is outside segment {:?} window [{start}, {end}]",
            spec.segment
        )));
    }
    Ok(spec.hamiltonian_at(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorResult {
    pub unitary: Matrix2C,
    pub steps: usize,
    pub unitarity_residual: f64,
}

/// Running products are pulled back onto the unitary group this often.
const REUNITARIZE_EVERY: usize = 64;

/// Midpoint exponential product over `[start, end]`, latest factor leftmost.
///
/// `hamiltonian` is sampled only at interior midpoints. This is also the hook
/// for non-standard drives, e.g. a constant Hamiltonian. Long products drift
/// off the unitary group by O(N ε); a polar Newton step every
/// `REUNITARIZE_EVERY` factors and at the end removes the drift.
pub fn propagate<F>(hamiltonian: F, start: f64, end: f64, steps: usize) -> Result<PropagatorResult>
where
    F: Fn(f64) -> Matrix2C,
{
    if steps < 2 {
        return Err(Error::Config(format!(
            "at least 2 steps required, got {steps}"
        )));
    }
    if !(end > start) {
        return Err(Error::Config(format!("empty time window [{start}, {end}]")));
    }
    let dt = (end - start) / steps as f64;
    let mut u = Matrix2C::identity();
    for j in 0..steps {
        let mid = start + (j as f64 + 0.5) * dt;
        u = expm_unchecked(&hamiltonian(mid), dt) * u;
        if (j + 1) % REUNITARIZE_EVERY == 0 {
            u = u.reunitarize();
        }
    }
    let u = u.reunitarize();
    Ok(PropagatorResult {
        unitary: u,
        steps,
        unitarity_residual: u.unitarity_residual(),
    })
}

/// A-priori bound on the entrywise error of the `steps`-factor product for the
/// standard drive.
///
/// The drive is `½ n(t)·σ` with `n` turning at `θ' = π/(2ωτ)`, so each step
/// errs by at most `h³(‖H''‖/24 + ‖[H, H']‖/12) = h³(θ'²/48 + θ'/24)` to
/// leading order. The sum over steps is doubled to cover higher orders and
/// floored at the roundoff of the reference product.
pub fn midpoint_error_bound(spec: &DriveSpec, steps: usize) -> f64 {
    let t = spec.omega_tau;
    let rate = std::f64::consts::PI / (2.0 * t);
    let h = t / steps as f64;
    let leading = steps as f64 * h.powi(3) * (rate * rate / 48.0 + rate / 24.0);
    (2.0 * leading).min(2.0) + roundoff_floor(REFERENCE_STEPS)
}

pub fn time_ordered_propagator(spec: &DriveSpec, steps: usize) -> Result<PropagatorResult> {
    let (start, end) = spec.window();
    propagate(|t| spec.hamiltonian_at(t), start, end, steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEstimate {
    /// Least-squares slope of `-log(error)` against `log(N)`; `None` when fewer
    /// than two errors clear the roundoff floor.
    pub order: Option<f64>,
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    pub reference_steps: usize,
}

/// Empirical order of a propagator against a `reference_steps` reference.
pub fn convergence_order_with<F>(
    hamiltonian: F,
    start: f64,
    end: f64,
    ladder: &[usize],
    reference_steps: usize,
) -> Result<ConvergenceEstimate>
where
    F: Fn(f64) -> Matrix2C + Copy,
{
    if ladder.len() < 3 {
        return Err(Error::Config(format!(
            "convergence ladder needs at least 3 step counts, got {}",
            ladder.len()
        )));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "convergence ladder must be strictly ascending".into(),
        ));
    }
    if *ladder.last().unwrap() >= reference_steps {
        return Err(Error::Config(
            "convergence ladder must stay below the reference step count".into(),
        ));
    }
    let reference = propagate(hamiltonian, start, end, reference_steps)?.unitary;
    let mut errors = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let u = propagate(hamiltonian, start, end, n)?.unitary;
        errors.push(u.max_abs_diff(&reference));
    }

    let floor = roundoff_floor(reference_steps);
    let usable: Vec<(f64, f64)> = ladder
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let order = if usable.len() >= 2 {
        Some(-least_squares_slope(&usable))
    } else {
        None
    };
    Ok(ConvergenceEstimate {
        order,
        steps: ladder.to_vec(),
        errors,
        reference_steps,
    })
}

pub fn convergence_order(spec: &DriveSpec, ladder: &[usize]) -> Result<ConvergenceEstimate> {
    let (start, end) = spec.window();
    let s = *spec;
    convergence_order_with(
        move |t| s.hamiltonian_at(t),
        start,
        end,
        ladder,
        REFERENCE_STEPS,
    )
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
