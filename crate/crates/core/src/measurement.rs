//! Projective measurement in a basis on the Bloch sphere.
//!
//! `|χ₁⟩ = e^{−iφ} sin(α/2)|↑⟩ − cos(α/2)|↓⟩`,
//! `|χ₂⟩ = cos(α/2)|↑⟩ + e^{iφ} sin(α/2)|↓⟩`,
//! with α the colatitude from z and φ the longitude from x. `|χ₂⟩` points
//! along `(sin α cos φ, sin α sin φ, cos α)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::algebra::{DensityMatrix, Ket2, Matrix2C};
use crate::error::{Error, Result};

/// Slack when deciding whether a reduced colatitude lies in `[0, π]`.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    pub alpha: f64,
    pub phi: f64,
    pub chi1: Ket2,
    pub chi2: Ket2,
}

impl MeasurementBasis {
    pub fn projectors(&self) -> [Matrix2C; 2] {
        [self.chi1.projector(), self.chi2.projector()]
    }

    /// Bloch direction of `|χ₂⟩`.
    pub fn axis(&self) -> [f64; 3] {
        let (sa, ca) = self.alpha.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [sa * cp, sa * sp, ca]
    }
}

/// Reduces `x` into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn basis_kets(alpha: f64, phi: f64) -> Result<MeasurementBasis> {
    if !alpha.is_finite() || !phi.is_finite() {
        return Err(Error::validation(
            "measurement angle is not finite",
            f64::NAN,
        ));
    }
    let mut a = wrap_angle(alpha);
    if a > PI {
        if a <= PI + ANGLE_SLACK {
            a = PI;
        } else if a >= TAU - ANGLE_SLACK {
            a = 0.0;
        } else {
            return Err(Error::Domain(format!(
                "colatitude {alpha} reduces to {a}, outside [0, π]"
            )));
        }
    }
    let p = wrap_angle(phi);
    let (s, c) = (0.5 * a).sin_cos();
    let chi1 = Ket2::new(Complex64::from_polar(s, -p), Complex64::new(-c, 0.0))?;
    let chi2 = Ket2::new(Complex64::new(c, 0.0), Complex64::from_polar(s, p))?;
    Ok(MeasurementBasis {
        alpha: a,
        phi: p,
        chi1,
        chi2,
    })
}

/// Which bookkeeping step of the channel to corrupt, for negative tests.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MeasureFault {
    #[default]
    None,
    /// Adds an anti-Hermitian drift `ε(|↑⟩⟨↓| − |↓⟩⟨↑|)` to the raw channel
    /// output and skips the `(M + M†)/2` step that would remove it.
    SkipRehermitization { drift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub state: DensityMatrix,
    /// `p_k = ⟨χ_k|ρ|χ_k⟩`.
    pub probabilities: [f64; 2],
}

/// Non-selective measurement `ρ → Σ_k π_k ρ π_k`.
pub fn measure(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<MeasurementOutcome> {
    measure_with_fault(rho, basis, MeasureFault::None)
}

pub fn measure_with_fault(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    fault: MeasureFault,
) -> Result<MeasurementOutcome> {
    let [p1, p2] = basis.projectors();
    let r = *rho.matrix();
    let raw = p1 * r * p1 + p2 * r * p2;
    let post = match fault {
        MeasureFault::None => raw.hermitian_part(),
        MeasureFault::SkipRehermitization { drift } => {
            raw + Matrix2C::from_real(0.0, drift, -drift, 0.0)
        }
    };
    let state = DensityMatrix::new(post)?;
    Ok(MeasurementOutcome {
        state,
        probabilities: [rho.population(&basis.chi1), rho.population(&basis.chi2)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli, von_neumann_entropy, Axis};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn ket_close(a: &Ket2, b: &Ket2) -> bool {
        (a.amps[0] - b.amps[0]).norm() < 1e-15 && (a.amps[1] - b.amps[1]).norm() < 1e-15
    }

    #[test]
    fn north_pole_basis() {
        let b = basis_kets(0.0, 0.0).unwrap();
        assert!(ket_close(
            &b.chi1,
            &Ket2::new_unchecked(0.0.into(), (-1.0).into())
        ));
        assert!(ket_close(&b.chi2, &Ket2::up()));
    }

    #[test]
    fn equator_basis_is_x() {
        let b = basis_kets(FRAC_PI_2, 0.0).unwrap();
        assert!(ket_close(&b.chi2, &Ket2::plus_x()));
        let expected = Ket2::new_unchecked(FRAC_1_SQRT_2.into(), (-FRAC_1_SQRT_2).into());
        assert!(ket_close(&b.chi1, &expected));
    }

    #[test]
    fn south_pole_basis() {
        let phi = 0.83;
        let b = basis_kets(PI, phi).unwrap();
        assert!((b.chi1.amps[0] - Complex64::from_polar(1.0, -phi)).norm() < 1e-15);
        assert!(b.chi1.amps[1].norm() < 1e-15);
        assert!(b.chi2.amps[0].norm() < 1e-15);
        assert!((b.chi2.amps[1] - Complex64::from_polar(1.0, phi)).norm() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal_and_complete() {
        for &(a, p) in &[(0.3, 1.0), (1.39, 2.05), (2.9, 5.5), (PI, 0.0)] {
            let b = basis_kets(a, p).unwrap();
            assert!(b.chi1.inner(&b.chi2).norm() < 1e-14);
            let [p1, p2] = b.projectors();
            assert!((p1 + p2).max_abs_diff(&Matrix2C::identity()) < 1e-14);
            // χ₂ Bloch vector matches the stated axis
            let r = DensityMatrix::pure(&b.chi2).bloch();
            let n = b.axis();
            for k in 0..3 {
                assert!((r[k] - n[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn angle_reduction() {
        let b = basis_kets(0.5, 0.3 + TAU).unwrap();
        assert!((b.phi - 0.3).abs() < 1e-14);
        let b = basis_kets(0.5, -0.3).unwrap();
        assert!((b.phi - (TAU - 0.3)).abs() < 1e-14);
        assert!(basis_kets(0.5 + TAU, 0.0).is_ok());
        assert!(matches!(basis_kets(4.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            basis_kets(f64::NAN, 0.0),
            Err(Error::Validation { .. })
        ));
        assert!(basis_kets(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn diagonal_state_is_fixed() {
        let b = basis_kets(1.1, 2.2).unwrap();
        let m = b.chi1.projector() * 0.3 + b.chi2.projector() * 0.7;
        let rho = DensityMatrix::new(m).unwrap();
        let out = measure(&rho, &b).unwrap();
        assert!(out.state.matrix().max_abs_diff(&m) < 1e-13);
    }

    #[test]
    fn eigenstate_of_channel() {
        let b = basis_kets(0.7, 4.0).unwrap();
        let rho = DensityMatrix::pure(&b.chi1);
        let out = measure(&rho, &b).unwrap();
        assert!(out.state.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!((out.probabilities[0] - 1.0).abs() < 1e-15);
        assert!(out.probabilities[1].abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_invariant() {
        let b = basis_kets(2.0, 1.0).unwrap();
        let out = measure(&DensityMatrix::maximally_mixed(), &b).unwrap();
        assert!(out.state.matrix().max_abs_diff(&Matrix2C::diag(0.5, 0.5)) < 1e-15);
        assert!((out.probabilities[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commuting_basis_delivers_no_energy() {
        let h2 = pauli(Axis::X) * 0.5;
        let b = basis_kets(FRAC_PI_2, 0.0).unwrap();
        let rho = DensityMatrix::new(Matrix2C::from_bloch(0.5, [0.2, -0.1, 0.3])).unwrap();
        let out = measure(&rho, &b).unwrap();
        let before = (*rho.matrix() * h2).trace().re;
        let after = (*out.state.matrix() * h2).trace().re;
        assert!((before - after).abs() < 1e-12);
        assert!(von_neumann_entropy(&out.state).unwrap() >= von_neumann_entropy(&rho).unwrap());
    }

    #[test]
    fn injected_drift_is_caught() {
        let b = basis_kets(1.0, 1.0).unwrap();
        let rho = DensityMatrix::new(Matrix2C::from_bloch(0.5, [0.2, 0.0, 0.3])).unwrap();
        let fault = MeasureFault::SkipRehermitization { drift: 1e-9 };
        assert!(matches!(
            measure_with_fault(&rho, &b, fault),
            Err(Error::Validation { .. })
        ));
    }
}
