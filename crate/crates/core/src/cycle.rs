//! The four-stroke cycle and its energetics.
//!
//! Strokes: thermal state of `H₁ = ½σ_z` → driven unitary `U` (field rotated
//! z→x) → projective measurement → driven unitary `V` (x→z) → thermalization.
//! Energies are in units of ħω. Two routes are computed for every cycle:
//!
//! * the trace route, from the states themselves (`W₁ = Tr(ρ₂H₂ − ρ₁H₁)`,
//!   `Q_M = Tr[H₂(ρ₃ − ρ₂)]`, `W₂ = Tr(ρ₄H₁ − ρ₃H₂)`, `Q_T = Tr[H₁(ρ₁ − ρ₄)]`),
//!   which is authoritative;
//! * the closed-form route through the transition probabilities ξ, ζ, δ, γ.
//!
//! The closed forms hold with `δ = |⟨χ₂|−⟩_x|²` (no propagator) and with the
//! occupation form of the work read as `W = +½(Δp₁ − Δp₂ + Δp₃ − Δp₄)`; both
//! choices are pinned by tests against the trace route.

use crate::algebra::{
    expectation, gibbs_state, pauli, transition_probability, von_neumann_entropy, Axis,
    DensityMatrix, Ket2, Matrix2C,
};
use crate::compensated::Dd;
use crate::error::{Error, Result};
use crate::measurement::{basis_kets, measure_with_fault, MeasureFault, MeasurementBasis};
use crate::propagator::{time_ordered_propagator, DriveSpec, Segment, DEFAULT_STEPS};
use crate::units;

/// Overall sign of the occupation-difference form of the net work that agrees
/// with the trace route. See `tests::occupation_work_sign_is_measured`.
pub const OCCUPATION_WORK_SIGN: f64 = 1.0;

/// Every numerical tolerance used by cycle checks, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Fuel at or below this (units of ħω) leaves η undefined.
    pub fuel_epsilon: f64,
    pub first_law: f64,
    /// Largest admissible positive `Q_T`.
    pub kelvin: f64,
    pub entropy_equality: f64,
    /// Largest admissible entropy decrease under measurement.
    pub entropy_decrease: f64,
    pub efficiency_forms: f64,
    pub probability_range: f64,
    pub unitary_input: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fuel_epsilon: 1e-12,
            first_law: 1e-10,
            kelvin: 1e-12,
            entropy_equality: 1e-10,
            entropy_decrease: 1e-12,
            efficiency_forms: 1e-12,
            probability_range: 1e-12,
            unitary_input: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    /// Drive duration ωτ of each unitary stroke.
    pub omega_tau: f64,
    /// βħω of the bath.
    pub beta_hbar_omega: f64,
    pub alpha: f64,
    pub phi: f64,
    /// Propagator step count per stroke.
    pub steps: usize,
}

impl EngineParams {
    /// ħω = 1 peV, τ = 10 μs, β = 1/ħω, default step count.
    pub fn reference(alpha: f64, phi: f64) -> Self {
        Self {
            omega_tau: units::reference_omega_tau(),
            beta_hbar_omega: 1.0,
            alpha,
            phi,
            steps: DEFAULT_STEPS,
        }
    }

    pub fn with_angles(self, alpha: f64, phi: f64) -> Self {
        Self { alpha, phi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_tau > 0.0) || !self.omega_tau.is_finite() {
            return Err(Error::Config(format!(
                "omega_tau must be positive, got {}",
                self.omega_tau
            )));
        }
        // β = 0 is admitted as the infinite-temperature limit
        if !(self.beta_hbar_omega >= 0.0) || !self.beta_hbar_omega.is_finite() {
            return Err(Error::Config(format!(
                "beta_hbar_omega must be non-negative, got {}",
                self.beta_hbar_omega
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !self.alpha.is_finite() || !self.phi.is_finite() {
            return Err(Error::Config("measurement angles must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs {
    /// `|_x⟨+|U|−⟩_z|²`
    pub xi: f64,
    /// `|⟨χ₂|U|−⟩_z|²`
    pub zeta: f64,
    /// `|⟨χ₂|−⟩_x|²`
    pub delta: f64,
    /// `|_z⟨+|V|χ₁⟩|²`
    pub gamma: f64,
}

impl TransitionProbs {
    pub fn as_array(&self) -> [f64; 4] {
        [self.xi, self.zeta, self.delta, self.gamma]
    }
}

pub fn transition_probabilities(
    u: &Matrix2C,
    v: &Matrix2C,
    basis: &MeasurementBasis,
) -> Result<TransitionProbs> {
    let tol = Tolerances::default().unitary_input;
    u.ensure_unitary(tol)?;
    v.ensure_unitary(tol)?;
    let id = Matrix2C::identity();
    Ok(TransitionProbs {
        xi: transition_probability(&Ket2::plus_x(), u, &Ket2::down()),
        zeta: transition_probability(&basis.chi2, u, &Ket2::down()),
        delta: transition_probability(&basis.chi2, &id, &Ket2::minus_x()),
        gamma: transition_probability(&Ket2::up(), v, &basis.chi1),
    })
}

/// Ground-minus-excited occupation differences of ρ₁..ρ₄ from the transition
/// probabilities.
pub fn occupation_deltas(probs: &TransitionProbs, beta_hbar_omega: f64) -> [f64; 4] {
    let dp1 = (0.5 * beta_hbar_omega).tanh();
    let c_zeta = 1.0 - 2.0 * probs.zeta;
    [
        dp1,
        dp1 * (1.0 - 2.0 * probs.xi),
        dp1 * (1.0 - 2.0 * probs.delta) * c_zeta,
        dp1 * (1.0 - 2.0 * probs.gamma) * c_zeta,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEnergetics {
    /// Net work on the working substance from the occupation differences.
    pub work: f64,
    /// Net work from the transition-probability bracket `[ξ − (δ−γ)(1−2ζ)]`.
    pub work_bracket: f64,
    pub fuel: f64,
    pub released_heat: f64,
    /// Efficiency from the transition-probability ratio.
    pub eta: Option<f64>,
    /// Efficiency from the occupation-difference ratio.
    pub eta_occupation: Option<f64>,
}

pub fn analytic_energetics(probs: &TransitionProbs, beta_hbar_omega: f64) -> AnalyticEnergetics {
    analytic_energetics_with(probs, beta_hbar_omega, &Tolerances::default())
}

pub fn analytic_energetics_with(
    probs: &TransitionProbs,
    beta_hbar_omega: f64,
    tol: &Tolerances,
) -> AnalyticEnergetics {
    let th = (0.5 * beta_hbar_omega).tanh();
    let [dp1, dp2, dp3, dp4] = occupation_deltas(probs, beta_hbar_omega);
    let TransitionProbs {
        xi,
        zeta,
        delta,
        gamma,
    } = *probs;
    let c_zeta = 1.0 - 2.0 * zeta;
    let c_gamma = 1.0 - 2.0 * gamma;
    let c_delta = 1.0 - 2.0 * delta;
    let c_xi = 1.0 - 2.0 * xi;

    let fuel = 0.5 * (c_xi - c_delta * c_zeta) * th;
    let released_heat = 0.5 * (c_gamma * c_zeta - 1.0) * th;
    let work = OCCUPATION_WORK_SIGN * 0.5 * (dp1 - dp2 + dp3 - dp4);
    let work_bracket = (xi - (delta - gamma) * c_zeta) * th;

    // Near the edge of the engine regime the fuel cancels to a few digits, so
    // both efficiency ratios are formed in double-double.
    let defined = fuel > tol.fuel_epsilon;
    let one = Dd::from(1.0);
    let dd_c = |p: f64| one - Dd::from(2.0) * Dd::from(p);
    let (dz, dg, dd_delta, dx) = (dd_c(zeta), dd_c(gamma), dd_c(delta), dd_c(xi));
    let eta = defined.then(|| (one - (dg * dz - one) / (dd_delta * dz - dx)).to_f64());
    let eta_occupation = (defined && dp2 - dp3 > tol.fuel_epsilon).then(|| {
        let t = Dd::from(th);
        let (p1, p2, p3, p4) = (t, t * dx, t * dd_delta * dz, t * dg * dz);
        (one - (p1 - p4) / (p2 - p3)).to_f64()
    });
    AnalyticEnergetics {
        work,
        work_bracket,
        fuel,
        released_heat,
        eta,
        eta_occupation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub params: EngineParams,
    pub rho: [DensityMatrix; 4],
    pub entropies: [f64; 4],
    pub w1: f64,
    pub w2: f64,
    pub q_m: f64,
    pub q_t: f64,
    /// Net work done on the working substance, `W₁ + W₂`.
    pub w: f64,
    /// `−W/Q_M`, undefined without positive fuel.
    pub eta: Option<f64>,
    /// `S(ρ₃) − S(ρ₂)`.
    pub ds: f64,
    /// Occupation differences from the transition probabilities.
    pub dp: [f64; 4],
    /// The same differences read off the states: `−⟨σ_z⟩₁, −⟨σ_x⟩₂, −⟨σ_x⟩₃, −⟨σ_z⟩₄`.
    pub dp_trace: [f64; 4],
    pub measurement_probabilities: [f64; 2],
    pub probs: TransitionProbs,
    pub analytic: AnalyticEnergetics,
}

impl CycleRecord {
    /// Work delivered to the agent, `−W`.
    pub fn w_ext(&self) -> f64 {
        -self.w
    }
}

/// Precomputed state for evaluating many measurement bases at fixed drive
/// and temperature.
#[derive(Debug, Clone)]
pub struct CycleEngine {
    pub omega_tau: f64,
    pub beta_hbar_omega: f64,
    pub steps: usize,
    pub u: Matrix2C,
    pub v: Matrix2C,
    pub tolerances: Tolerances,
    fault: MeasureFault,
    h1: Matrix2C,
    h2: Matrix2C,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    s1: f64,
    s2: f64,
}

impl CycleEngine {
    pub fn new(params: &EngineParams) -> Result<Self> {
        params.validate()?;
        let u =
            time_ordered_propagator(&DriveSpec::new(params.omega_tau, Segment::I)?, params.steps)?;
        let v = time_ordered_propagator(
            &DriveSpec::new(params.omega_tau, Segment::II)?,
            params.steps,
        )?;
        let h1 = pauli(Axis::Z) * 0.5;
        let h2 = pauli(Axis::X) * 0.5;
        let rho1 = gibbs_state(&h1, params.beta_hbar_omega)?;
        let rho2 = rho1.evolve(&u.unitary)?;
        Ok(Self {
            omega_tau: params.omega_tau,
            beta_hbar_omega: params.beta_hbar_omega,
            steps: params.steps,
            u: u.unitary,
            v: v.unitary,
            tolerances: Tolerances::default(),
            fault: MeasureFault::None,
            h1,
            h2,
            s1: von_neumann_entropy(&rho1)?,
            s2: von_neumann_entropy(&rho2)?,
            rho1,
            rho2,
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_fault(mut self, fault: MeasureFault) -> Self {
        self.fault = fault;
        self
    }

    pub fn params(&self, alpha: f64, phi: f64) -> EngineParams {
        EngineParams {
            omega_tau: self.omega_tau,
            beta_hbar_omega: self.beta_hbar_omega,
            alpha,
            phi,
            steps: self.steps,
        }
    }

    pub fn run(&self, alpha: f64, phi: f64) -> Result<CycleRecord> {
        let tol = &self.tolerances;
        let basis = basis_kets(alpha, phi)?;
        let (h1, h2) = (&self.h1, &self.h2);
        let (rho1, rho2) = (self.rho1, self.rho2);

        let measured = measure_with_fault(&rho2, &basis, self.fault)?;
        let rho3 = measured.state;
        let rho4 = rho3.evolve(&self.v)?;

        let e = |rho: &DensityMatrix, h: &Matrix2C| expectation(rho, h);
        let w1 = e(&rho2, h2)? - e(&rho1, h1)?;
        let q_m = e(&rho3, h2)? - e(&rho2, h2)?;
        let w2 = e(&rho4, h1)? - e(&rho3, h2)?;
        let q_t = e(&rho1, h1)? - e(&rho4, h1)?;
        let w = w1 + w2;
        let eta = (q_m > tol.fuel_epsilon).then(|| -w / q_m);

        let s3 = von_neumann_entropy(&rho3)?;
        let s4 = von_neumann_entropy(&rho4)?;
        let ds = s3 - self.s2;

        let probs = transition_probabilities(&self.u, &self.v, &basis)?;
        for p in probs.as_array() {
            if !(p >= -tol.probability_range && p <= 1.0 + tol.probability_range) {
                return Err(Error::Invariant {
                    name: "transition probability range",
                    residual: p,
                    tolerance: tol.probability_range,
                });
            }
        }
        let dp = occupation_deltas(&probs, self.beta_hbar_omega);
        let sx = pauli(Axis::X);
        let sz = pauli(Axis::Z);
        let dp_trace = [
            -e(&rho1, &sz)?,
            -e(&rho2, &sx)?,
            -e(&rho3, &sx)?,
            -e(&rho4, &sz)?,
        ];
        let analytic = analytic_energetics_with(&probs, self.beta_hbar_omega, tol);

        let record = CycleRecord {
            params: self.params(basis.alpha, basis.phi),
            rho: [rho1, rho2, rho3, rho4],
            entropies: [self.s1, self.s2, s3, s4],
            w1,
            w2,
            q_m,
            q_t,
            w,
            eta,
            ds,
            dp,
            dp_trace,
            measurement_probabilities: measured.probabilities,
            probs,
            analytic,
        };
        check_invariants(&record, tol)?;
        Ok(record)
    }
}

fn check(name: &'static str, residual: f64, tolerance: f64) -> Result<()> {
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::Invariant {
            name,
            residual,
            tolerance,
        })
    }
}

fn check_invariants(r: &CycleRecord, tol: &Tolerances) -> Result<()> {
    check(
        "first law",
        (r.w1 + r.w2 + r.q_m + r.q_t).abs(),
        tol.first_law,
    )?;
    check("released heat sign", r.q_t, tol.kelvin)?;
    check(
        "entropy non-decrease under measurement",
        -r.ds,
        tol.entropy_decrease,
    )?;
    let [s1, s2, s3, s4] = r.entropies;
    check(
        "entropy invariance in stroke I",
        (s1 - s2).abs(),
        tol.entropy_equality,
    )?;
    check(
        "entropy invariance in stroke III",
        (s3 - s4).abs(),
        tol.entropy_equality,
    )?;
    Ok(())
}

/// Runs one cycle from scratch.
pub fn run_cycle(params: &EngineParams) -> Result<CycleRecord> {
    CycleEngine::new(params)?.run(params.alpha, params.phi)
}

/// Absolute differences between the trace route and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub work: f64,
    /// `|W_occupation − W_bracket|`.
    pub work_forms: f64,
    pub fuel: f64,
    pub heat: f64,
    /// `None` when either route leaves η undefined.
    pub eta: Option<f64>,
    pub eta_forms: Option<f64>,
    pub occupations: f64,
    pub first_law: f64,
    pub entropy_stroke_i: f64,
    pub entropy_stroke_iii: f64,
    /// `|S(ρ₁) − S(ρ₄) + ΔS|`.
    pub entropy_thermalization: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [
            self.work,
            self.work_forms,
            self.fuel,
            self.heat,
            self.eta.unwrap_or(0.0),
            self.eta_forms.unwrap_or(0.0),
            self.occupations,
            self.first_law,
            self.entropy_stroke_i,
            self.entropy_stroke_iii,
            self.entropy_thermalization,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn crosscheck(r: &CycleRecord) -> ResidualReport {
    let a = &r.analytic;
    let both = |x: Option<f64>, y: Option<f64>| x.zip(y).map(|(x, y)| (x - y).abs());
    let [s1, s2, s3, s4] = r.entropies;
    ResidualReport {
        work: (r.w - a.work).abs(),
        work_forms: (a.work - a.work_bracket).abs(),
        fuel: (r.q_m - a.fuel).abs(),
        heat: (r.q_t - a.released_heat).abs(),
        eta: both(r.eta, a.eta),
        eta_forms: both(a.eta, a.eta_occupation),
        occupations: r
            .dp
            .iter()
            .zip(&r.dp_trace)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
        first_law: (r.w1 + r.w2 + r.q_m + r.q_t).abs(),
        entropy_stroke_i: (s1 - s2).abs(),
        entropy_stroke_iii: (s3 - s4).abs(),
        entropy_thermalization: (s1 - s4 + r.ds).abs(),
    }
}
