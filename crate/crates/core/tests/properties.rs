use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmeter::algebra::{
    gibbs_state, hermitian_expm, pauli, transition_probability, von_neumann_entropy, Axis,
};
use qmeter::cycle::{crosscheck, CycleEngine, EngineParams};
use qmeter::measurement::{basis_kets, measure};
use qmeter::propagator::{time_ordered_propagator, DriveSpec, Segment};
use qmeter::sweep::{efficiency_entropy_concordance, grid_sweep, symmetry_residual, GridSpec};
use qmeter::{DensityMatrix, Ket2, Matrix2C};

const SEED: u64 = 0x716d_6574_6572;
const SAMPLES: usize = 10_000;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

fn random_hermitian(rng: &mut impl Rng, scale: f64) -> Matrix2C {
    let c0 = rng.gen_range(-scale..scale);
    let r = [(); 3].map(|_| rng.gen_range(-scale..scale));
    Matrix2C::from_bloch(c0, r)
}

fn random_unitary(rng: &mut impl Rng) -> Matrix2C {
    let h = random_hermitian(rng, 3.0);
    hermitian_expm(&h, rng.gen_range(-5.0..5.0)).unwrap()
}

fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    let radius = rng.gen_range(0.0f64..1.0).cbrt();
    let cos_t: f64 = rng.gen_range(-1.0..1.0);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let az = rng.gen_range(0.0..2.0 * PI);
    let r = [sin_t * az.cos(), sin_t * az.sin(), cos_t].map(|x| 0.5 * radius * x);
    DensityMatrix::new(Matrix2C::from_bloch(0.5, r)).unwrap()
}

fn random_ket(rng: &mut impl Rng) -> Ket2 {
    let b = basis_kets(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
    b.chi2
}

#[test]
fn exponentials_are_unitary() {
    let mut rng = rng();
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let h = random_hermitian(&mut rng, 5.0);
        let t = rng.gen_range(-10.0..10.0);
        worst = worst.max(hermitian_expm(&h, t).unwrap().unitarity_residual());
    }
    assert!(worst <= 1e-13, "worst unitarity residual {worst:e}");
}

#[test]
fn gibbs_states_are_valid_and_stationary() {
    let mut rng = rng();
    for _ in 0..SAMPLES {
        let h = random_hermitian(&mut rng, 3.0);
        let beta = rng.gen_range(0.0..10.0);
        let rho = gibbs_state(&h, beta).unwrap();
        let m = rho.matrix();
        assert!(m.hermitian_deviation() <= 1e-12);
        assert!((m.trace().re - 1.0).abs() <= 1e-12);
        assert!(rho.eigenvalues()[0] >= -1e-12);
        assert!(m.commutator(&h).max_abs() <= 1e-12);
        assert!(DensityMatrix::new(*m).is_ok());
    }
}

#[test]
fn entropy_is_unitarily_invariant() {
    let mut rng = rng();
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let rho = random_state(&mut rng);
        let u = random_unitary(&mut rng);
        let s0 = von_neumann_entropy(&rho).unwrap();
        let s1 = von_neumann_entropy(&rho.evolve(&u).unwrap()).unwrap();
        worst = worst.max((s0 - s1).abs());
    }
    assert!(worst <= 1e-10, "worst entropy drift {worst:e}");
}

#[test]
fn eigenvalues_solve_the_characteristic_polynomial() {
    let mut rng = rng();
    for _ in 0..SAMPLES {
        let rho = random_state(&mut rng);
        let m = rho.matrix();
        let (tr, det) = (m.trace().re, m.det().re);
        let [l0, l1] = rho.eigenvalues();
        assert!(l0 <= l1);
        for l in [l0, l1] {
            assert!((l * l - tr * l + det).abs() <= 1e-12);
        }
        assert!((l0 + l1 - tr).abs() <= 1e-12);
        assert!((l0 * l1 - det).abs() <= 1e-12);
    }
}

#[test]
fn measurement_is_idempotent_and_dephasing() {
    let mut rng = rng();
    for _ in 0..SAMPLES {
        let rho = random_state(&mut rng);
        let basis = basis_kets(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
        let once = measure(&rho, &basis).unwrap().state;
        let twice = measure(&once, &basis).unwrap().state;
        assert!(once.matrix().max_abs_diff(twice.matrix()) <= 1e-12);
        assert!((once.matrix().trace().re - 1.0).abs() <= 1e-12);
        assert!(once.matrix().hermitian_deviation() <= 1e-12);
        let s0 = von_neumann_entropy(&rho).unwrap();
        let s1 = von_neumann_entropy(&once).unwrap();
        assert!(s1 >= s0 - 1e-12, "entropy fell from {s0} to {s1}");
    }
}

#[test]
fn transition_probabilities_are_microreversible() {
    let mut rng = rng();
    let spec = DriveSpec::new(rng.gen_range(0.01..5.0), Segment::I).unwrap();
    let u = time_ordered_propagator(&spec, 256).unwrap().unitary;
    for _ in 0..SAMPLES {
        let w = random_unitary(&mut rng);
        let (a, b) = (random_ket(&mut rng), random_ket(&mut rng));
        let forward = transition_probability(&a, &w, &b);
        let backward = transition_probability(&b, &w.dagger(), &a);
        assert_eq!(forward, backward);
        let chi2 = random_ket(&mut rng);
        let total = transition_probability(&chi2, &u, &Ket2::down())
            + transition_probability(&chi2, &u, &Ket2::up());
        assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn analytic_forms_track_the_trace_route_on_a_grid() {
    let mut rng = rng();
    for _ in 0..3 {
        let base = EngineParams {
            omega_tau: rng.gen_range(0.001..10.0),
            beta_hbar_omega: rng.gen_range(0.1..10.0),
            ..EngineParams::reference(0.0, 0.0)
        };
        let engine = CycleEngine::new(&base).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                let r = engine
                    .run(PI * i as f64 / 16.0, 2.0 * PI * j as f64 / 16.0)
                    .unwrap();
                let report = crosscheck(&r);
                assert!(report.max() <= 1e-8, "{report:?}");
            }
        }
    }
}

#[test]
fn symmetry_holds_away_from_reference_parameters() {
    let mut rng = rng();
    for _ in 0..5 {
        let base = EngineParams {
            omega_tau: rng.gen_range(0.001..10.0),
            beta_hbar_omega: rng.gen_range(0.1..10.0),
            ..EngineParams::reference(0.0, 0.0)
        };
        let grid = GridSpec::new(base).with_points(65, 65);
        let table = grid_sweep(&grid).unwrap();
        let res = symmetry_residual(&table).unwrap();
        let w_res = (0..65)
            .flat_map(|i| (0..65).map(move |j| (i, j)))
            .map(|(i, j)| (table.row(i, j).w_ext - table.row(64 - i, (j + 32) % 64).w_ext).abs())
            .fold(0.0f64, f64::max);
        assert!(
            res <= 1e-10,
            "ωτ={} βħω={} residual {res:e} (W_ext alone {w_res:e})",
            base.omega_tau,
            base.beta_hbar_omega
        );
    }
}

#[test]
fn large_efficiency_sits_where_entropy_change_is_small() {
    let grid = GridSpec::new(EngineParams::reference(0.0, 0.0)).with_points(65, 65);
    let table = grid_sweep(&grid).unwrap();
    assert!(efficiency_entropy_concordance(&table).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn commuting_measurement_keeps_drive_energy(x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5) {
        let r = [x, y, z].map(|v| v / 3f64.sqrt());
        let rho = DensityMatrix::new(Matrix2C::from_bloch(0.5, r)).unwrap();
        let basis = basis_kets(PI / 2.0, 0.0).unwrap();
        let h2 = pauli(Axis::X) * 0.5;
        let post = measure(&rho, &basis).unwrap().state;
        let before = (h2 * *rho.matrix()).trace().re;
        let after = (h2 * *post.matrix()).trace().re;
        prop_assert!((before - after).abs() <= 1e-12);
    }

    #[test]
    fn basis_kets_are_orthonormal(alpha in 0.0f64..PI, phi in -10.0f64..10.0) {
        let b = basis_kets(alpha, phi).unwrap();
        prop_assert!((b.chi1.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!((b.chi2.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!(b.chi1.inner(&b.chi2).norm() <= 1e-12);
        let [p1, p2] = b.projectors();
        prop_assert!((p1 + p2).max_abs_diff(&Matrix2C::identity()) <= 1e-12);
    }

    #[test]
    fn cycle_obeys_first_law_and_kelvin(
        alpha in 0.0f64..PI,
        phi in 0.0f64..(2.0 * PI),
        omega_tau in 0.001f64..10.0,
        beta in 0.1f64..10.0,
    ) {
        let params = EngineParams {
            omega_tau,
            beta_hbar_omega: beta,
            steps: 256,
            ..EngineParams::reference(alpha, phi)
        };
        let r = CycleEngine::new(&params).unwrap().run(alpha, phi).unwrap();
        prop_assert!((r.w1 + r.w2 + r.q_m + r.q_t).abs() <= 1e-10);
        prop_assert!(r.q_t <= 1e-12);
        prop_assert!(r.ds >= -1e-12);
    }
}
