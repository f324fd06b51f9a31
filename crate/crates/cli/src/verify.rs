//! The `verify` command: every invariant suite, one line each.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmeter::algebra::{hermitian_expm, von_neumann_entropy};
use qmeter::cycle::{crosscheck, CycleEngine, CycleRecord, EngineParams, Tolerances};
use qmeter::measurement::{basis_kets, measure_with_fault};
use qmeter::propagator::{
    convergence_order, midpoint_error_bound, time_ordered_propagator, DriveSpec, Segment,
    REFERENCE_STEPS,
};
use qmeter::sweep::{grid_sweep, symmetry_residual};
use qmeter::{DensityMatrix, Matrix2C};

use crate::config::RunConfig;

/// Steps for the convergence ladder, independent of the configured count.
pub const CONVERGENCE_LADDER: [usize; 5] = [8, 16, 32, 64, 128];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn check(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: residual <= tolerance,
            detail: format!("max residual {residual:.3e} (tolerance {tolerance:.0e})"),
        }
    }

    fn failed(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: false,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {}: {}", self.name, self.detail)
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng) -> Matrix2C {
    let c0 = rng.gen_range(-5.0..5.0);
    Matrix2C::from_bloch(c0, [(); 3].map(|_| rng.gen_range(-5.0..5.0)))
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let r = loop {
        let v = [(); 3].map(|_| rng.gen_range(-0.5..0.5));
        if v.iter().map(|x| x * x).sum::<f64>() <= 0.25 {
            break v;
        }
    };
    DensityMatrix::new(Matrix2C::from_bloch(0.5, r)).expect("Bloch ball")
}

fn unitarity(config: &RunConfig, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = 0.0f64;
    for _ in 0..config.samples {
        let h = random_hermitian(rng);
        let t = rng.gen_range(-10.0..10.0);
        match hermitian_expm(&h, t) {
            Ok(u) => worst = worst.max(u.unitarity_residual()),
            Err(e) => return SuiteResult::failed("unitarity", e.to_string()),
        }
    }
    for segment in [Segment::I, Segment::II] {
        let u = DriveSpec::new(config.omega_tau(), segment)
            .and_then(|s| time_ordered_propagator(&s, config.steps));
        match u {
            Ok(u) => {
                worst = worst
                    .max(u.unitarity_residual)
                    .max((u.unitary.det().norm() - 1.0).abs());
            }
            Err(e) => return SuiteResult::failed("unitarity", e.to_string()),
        }
    }
    SuiteResult::check("unitarity", worst, 1e-13)
}

fn propagator_accuracy(config: &RunConfig) -> SuiteResult {
    let mut detail = Vec::new();
    let mut passed = true;
    for segment in [Segment::I, Segment::II] {
        let outcome = DriveSpec::new(config.omega_tau(), segment).and_then(|spec| {
            let u = time_ordered_propagator(&spec, config.steps)?.unitary;
            let reference = time_ordered_propagator(&spec, REFERENCE_STEPS)?.unitary;
            Ok((
                u.max_abs_diff(&reference),
                midpoint_error_bound(&spec, config.steps),
            ))
        });
        match outcome {
            Ok((err, bound)) => {
                passed &= err <= bound;
                detail.push(format!("{segment:?} error {err:.3e} (bound {bound:.3e})"));
            }
            Err(e) => return SuiteResult::failed("propagator accuracy", e.to_string()),
        }
    }
    SuiteResult {
        name: "propagator accuracy",
        passed,
        detail: format!("N={}: {}", config.steps, detail.join(", ")),
    }
}

fn convergence(config: &RunConfig) -> SuiteResult {
    let mut detail = Vec::new();
    let mut passed = true;
    for segment in [Segment::I, Segment::II] {
        let est = DriveSpec::new(config.omega_tau(), segment)
            .and_then(|spec| convergence_order(&spec, &CONVERGENCE_LADDER));
        match est {
            Ok(est) => {
                let ok = est.order.is_some_and(|p| (p - 2.0).abs() <= 0.2);
                passed &= ok;
                let order = est.order.map_or("none".to_string(), |p| format!("{p:.4}"));
                detail.push(format!("{segment:?} order {order}"));
            }
            Err(e) => return SuiteResult::failed("convergence order", e.to_string()),
        }
    }
    SuiteResult {
        name: "convergence order",
        passed,
        detail: format!(
            "{} (ladder {:?}, expected 2 ± 0.2)",
            detail.join(", "),
            CONVERGENCE_LADDER
        ),
    }
}

fn measurement(config: &RunConfig, rng: &mut ChaCha8Rng) -> SuiteResult {
    let fault = config.fault.measure_fault();
    let mut worst = 0.0f64;
    for _ in 0..config.samples {
        let rho = random_state(rng);
        let outcome =
            basis_kets(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).and_then(|b| {
                let once = measure_with_fault(&rho, &b, fault)?.state;
                let twice = measure_with_fault(&once, &b, fault)?.state;
                let m = once.matrix();
                let s_gain = von_neumann_entropy(&rho)? - von_neumann_entropy(&once)?;
                Ok(m.max_abs_diff(twice.matrix())
                    .max(m.hermitian_deviation())
                    .max((m.trace() - 1.0).norm())
                    .max(s_gain))
            });
        match outcome {
            Ok(r) => worst = worst.max(r),
            Err(e) => return SuiteResult::failed("measurement channel", format!("violated: {e}")),
        }
    }
    SuiteResult::check("measurement channel", worst, 1e-12)
}

fn sample_records(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<CycleRecord>, String> {
    let fault = config.fault.measure_fault();
    (0..config.samples)
        .map(|_| {
            let params = EngineParams {
                omega_tau: rng.gen_range(0.001..10.0),
                beta_hbar_omega: rng.gen_range(0.1..10.0),
                alpha: rng.gen_range(0.0..PI),
                phi: rng.gen_range(0.0..2.0 * PI),
                steps: config.steps,
            };
            CycleEngine::new(&params)
                .map(|e| e.with_fault(fault))
                .and_then(|e| e.run(params.alpha, params.phi))
                .map_err(|e| format!("violated: {e}"))
        })
        .collect()
}

fn record_suites(records: &[CycleRecord]) -> Vec<SuiteResult> {
    let tol = Tolerances::default();
    let reports: Vec<_> = records.iter().map(crosscheck).collect();
    let rmax = |f: &dyn Fn(&qmeter::cycle::ResidualReport) -> f64| {
        reports.iter().map(f).fold(0.0f64, f64::max)
    };

    let kelvin = records
        .iter()
        .map(|r| r.q_t)
        .fold(f64::NEG_INFINITY, f64::max);
    let inequality = records
        .iter()
        .filter(|r| r.probs.zeta > 1e-6 && r.probs.gamma > 1e-6)
        .map(|r| 1.0 / r.probs.zeta + 1.0 / r.probs.gamma)
        .fold(f64::INFINITY, f64::min);
    let mut kelvin_suite = SuiteResult::check("Kelvin", kelvin, tol.kelvin);
    kelvin_suite.passed &= inequality >= 2.0 - 1e-9;
    kelvin_suite.detail = format!(
        "max Q_T {kelvin:.3e} (tolerance {:.0e}); min 1/ζ+1/γ {inequality:.6}",
        tol.kelvin
    );

    let equalities = rmax(&|r| {
        r.entropy_stroke_i
            .max(r.entropy_stroke_iii)
            .max(r.entropy_thermalization)
    });
    let min_ds = records.iter().map(|r| r.ds).fold(f64::INFINITY, f64::min);
    let mut entropy = SuiteResult::check("entropy", equalities, tol.entropy_equality);
    entropy.passed &= min_ds >= -tol.entropy_decrease;
    entropy.detail = format!(
        "{}; min ΔS {min_ds:.3e} (floor -{:.0e})",
        entropy.detail, tol.entropy_decrease
    );

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in records.iter().filter(|r| r.q_m > 0.0 && r.w < 0.0) {
        if let Some(e) = r.eta {
            lo = lo.min(e);
            hi = hi.max(e);
        }
    }
    let bounds = SuiteResult {
        name: "efficiency bounds",
        passed: !(lo < 0.0 || hi > 1.0 + 1e-12),
        detail: format!("η ∈ [{lo:.6}, {hi:.12}] in the engine regime"),
    };

    vec![
        SuiteResult::check("first law", rmax(&|r| r.first_law), tol.first_law),
        kelvin_suite,
        SuiteResult::check(
            "efficiency forms",
            rmax(&|r| r.eta_forms.unwrap_or(0.0)),
            tol.efficiency_forms,
        ),
        SuiteResult::check(
            "analytic vs trace",
            rmax(&|r| r.work.max(r.fuel).max(r.heat)),
            1e-8,
        ),
        entropy,
        bounds,
    ]
}

fn symmetry(config: &RunConfig) -> SuiteResult {
    match grid_sweep(&config.grid()).and_then(|t| symmetry_residual(&t)) {
        Ok(res) => SuiteResult::check("symmetry", res, 1e-10),
        Err(e) => SuiteResult::failed("symmetry", e.to_string()),
    }
}

/// Runs every suite with a generator seeded from the configuration.
pub fn verify(config: &RunConfig) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut results = vec![
        unitarity(config, &mut rng),
        propagator_accuracy(config),
        convergence(config),
        measurement(config, &mut rng),
    ];
    match sample_records(config, &mut rng) {
        Ok(records) => results.extend(record_suites(&records)),
        Err(e) => {
            for name in [
                "first law",
                "Kelvin",
                "efficiency forms",
                "analytic vs trace",
                "entropy",
                "efficiency bounds",
            ] {
                results.push(SuiteResult::failed(name, e.clone()));
            }
        }
    }
    results.push(symmetry(config));
    results
}
