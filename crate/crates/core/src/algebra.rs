//! Exact 2×2 complex linear algebra for a single qubit.
//!
//! Energies are carried in units of ħω and times as the phase ωt, so the
//! propagator of a constant Hamiltonian `H` over a phase `t` is `exp(-i H t)`.
//! Every routine here is closed form; nothing iterates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when a routine requires Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the trace and positivity of a density matrix.
pub const STATE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A 2×2 complex matrix, entries stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix2C {
    pub entries: [Complex64; 4],
}

impl fmt::Debug for Matrix2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl Matrix2C {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            entries: [a, b, c, d],
        }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::from_real(a, 0.0, 0.0, d)
    }

    /// Builds `c0·I + r·σ` from real Pauli coefficients.
    pub fn from_bloch(c0: f64, r: [f64; 3]) -> Self {
        let [x, y, z] = r;
        Self::new(
            Complex64::new(c0 + z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(c0 - z, 0.0),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[2 * row + col]
    }

    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.entries;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0] + self.entries[3]
    }

    pub fn det(&self) -> Complex64 {
        let [a, b, c, d] = self.entries;
        a * d - b * c
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let [a, b, c, d] = self.entries;
        Self::new(a * s, b * s, c * s, d * s)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `M - M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Largest entrywise modulus of `M†M - I`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(0.5.into())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if !self.is_finite() || dev > HERMITIAN_TOL {
            return Err(Error::validation("matrix is not Hermitian", dev));
        }
        Ok(())
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let res = self.unitarity_residual();
        if !self.is_finite() || res > tol {
            return Err(Error::validation("matrix is not unitary", res));
        }
        Ok(())
    }

    /// Decomposes a Hermitian matrix as `c0·I + r·σ` with real coefficients.
    ///
    /// Assumes Hermiticity; the anti-Hermitian part is discarded.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let [a, b, c, d] = self.entries;
        let c0 = 0.5 * (a.re + d.re);
        let x = 0.5 * (b.re + c.re);
        let y = 0.5 * (c.im - b.im);
        let z = 0.5 * (a.re - d.re);
        (c0, [x, y, z])
    }

    /// Eigenvalues of a Hermitian matrix in ascending order, from the trace and
    /// the half-splitting `sqrt(((a-d)/2)^2 + |b|^2)`.
    pub fn hermitian_eigenvalues(&self) -> Result<[f64; 2]> {
        self.ensure_hermitian()?;
        let (c0, r) = self.pauli_coefficients();
        let split = r[0].hypot(r[1]).hypot(r[2]);
        Ok([c0 - split, c0 + split])
    }

    /// Inverse via the adjugate; `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == ZERO {
            return None;
        }
        let [a, b, c, d] = self.entries;
        Some(Self::new(d, -b, -c, a).scale(det.inv()))
    }

    /// One Newton step towards the unitary polar factor, `(M + M^{-†})/2`.
    ///
    /// Squares the unitarity residual of a nearly unitary matrix.
    pub fn reunitarize(&self) -> Self {
        match self.inverse() {
            Some(inv) => (*self + inv.dagger()).scale(0.5.into()),
            None => *self,
        }
    }

    pub fn apply(&self, ket: &Ket2) -> Ket2 {
        let [a, b, c, d] = self.entries;
        let [u, v] = ket.amps;
        Ket2::new_unchecked(a * u + b * v, c * u + d * v)
    }
}

impl Add for Matrix2C {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, r) in out.entries.iter_mut().zip(rhs.entries) {
            *o += r;
        }
        out
    }
}

impl Sub for Matrix2C {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, r) in out.entries.iter_mut().zip(rhs.entries) {
            *o -= r;
        }
        out
    }
}

impl Neg for Matrix2C {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale((-1.0).into())
    }
}

impl Mul for Matrix2C {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = rhs.entries;
        Self::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Mul<f64> for Matrix2C {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs.into())
    }
}

/// A normalized two-component state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket2 {
    pub amps: [Complex64; 2],
}

impl Ket2 {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let ket = Self::new_unchecked(up, down);
        let dev = (ket.norm_sqr() - 1.0).abs();
        if !dev.is_finite() || dev > Self::NORM_TOL {
            return Err(Error::validation("ket is not normalized", dev));
        }
        Ok(ket)
    }

    pub(crate) const fn new_unchecked(up: Complex64, down: Complex64) -> Self {
        Self { amps: [up, down] }
    }

    /// |↑⟩ = |+⟩_z, the excited state of σ_z.
    pub fn up() -> Self {
        Self::new_unchecked(ONE, ZERO)
    }

    /// |↓⟩ = |−⟩_z.
    pub fn down() -> Self {
        Self::new_unchecked(ZERO, ONE)
    }

    /// |+⟩_x = (|↑⟩ + |↓⟩)/√2.
    pub fn plus_x() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new_unchecked(s, s)
    }

    /// |−⟩_x = (|↑⟩ − |↓⟩)/√2.
    pub fn minus_x() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new_unchecked(s, -s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps[0].norm_sqr() + self.amps[1].norm_sqr()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket2) -> Complex64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// |self⟩⟨self|.
    pub fn projector(&self) -> Matrix2C {
        let [u, v] = self.amps;
        Matrix2C::new(u * u.conj(), u * v.conj(), v * u.conj(), v * v.conj())
    }

    /// ⟨self|op|ket⟩.
    ///
    /// Summed as `Σ (conj(bra_i) ket_j) op_ij` with diagonal and off-diagonal
    /// terms paired, so `⟨b|op†|a⟩` is bitwise the conjugate of `⟨a|op|b⟩`.
    pub fn sandwich(&self, op: &Matrix2C, ket: &Ket2) -> Complex64 {
        let term = |i: usize, j: usize| (self.amps[i].conj() * ket.amps[j]) * op.get(i, j);
        (term(0, 0) + term(1, 1)) + (term(0, 1) + term(1, 0))
    }
}

/// |⟨bra|op|ket⟩|².
pub fn transition_probability(bra: &Ket2, op: &Matrix2C, ket: &Ket2) -> f64 {
    bra.sandwich(op, ket).norm_sqr()
}

pub fn pauli(axis: Axis) -> Matrix2C {
    match axis {
        Axis::X => Matrix2C::new(ZERO, ONE, ONE, ZERO),
        Axis::Y => Matrix2C::new(ZERO, -I, I, ZERO),
        Axis::Z => Matrix2C::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// `exp(-i H t)` for Hermitian `H` (units of ħω) and phase `t`.
///
/// With `H = c0·I + |r| n·σ`, this is `e^{-i c0 t} (cos(|r|t) I − i sin(|r|t) n·σ)`.
pub fn hermitian_expm(h: &Matrix2C, t: f64) -> Result<Matrix2C> {
    h.ensure_hermitian()?;
    Ok(expm_unchecked(h, t))
}

pub(crate) fn expm_unchecked(h: &Matrix2C, t: f64) -> Matrix2C {
    let (c0, r) = h.pauli_coefficients();
    let len = r[0].hypot(r[1]).hypot(r[2]);
    let phase = Complex64::from_polar(1.0, -c0 * t);
    let theta = len * t;
    let (s, c) = theta.sin_cos();
    // sin(|r|t)/|r| times r, well defined as |r| -> 0
    let k = if len > 0.0 { s / len } else { t };
    let [x, y, z] = r;
    let m = Matrix2C::new(
        Complex64::new(c, -k * z),
        Complex64::new(-k * y, -k * x),
        Complex64::new(k * y, -k * x),
        Complex64::new(c, k * z),
    );
    m.scale(phase)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite, each to
/// within `STATE_TOL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix2C);

impl DensityMatrix {
    pub fn new(m: Matrix2C) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::validation(
                "density matrix has non-finite entries",
                f64::NAN,
            ));
        }
        m.ensure_hermitian()?;
        let tr = m.trace();
        let dev = (tr - ONE).norm();
        if dev > STATE_TOL {
            return Err(Error::validation("density matrix trace is not 1", dev));
        }
        let [low, _] = m.hermitian_eigenvalues()?;
        if low < -STATE_TOL {
            return Err(Error::validation(
                "density matrix has a negative eigenvalue",
                -low,
            ));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix2C::diag(0.5, 0.5))
    }

    pub fn pure(ket: &Ket2) -> Self {
        Self(ket.projector())
    }

    pub fn matrix(&self) -> &Matrix2C {
        &self.0
    }

    /// Bloch vector `r` with `ρ = (I + r·σ)/2`.
    pub fn bloch(&self) -> [f64; 3] {
        let (_, r) = self.0.pauli_coefficients();
        [2.0 * r[0], 2.0 * r[1], 2.0 * r[2]]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let (c0, r) = self.0.pauli_coefficients();
        let split = r[0].hypot(r[1]).hypot(r[2]);
        [c0 - split, c0 + split]
    }

    /// `U ρ U†`, re-Hermitized.
    pub fn evolve(&self, u: &Matrix2C) -> Result<Self> {
        Self::new((*u * self.0 * u.dagger()).hermitian_part())
    }

    /// ⟨ket|ρ|ket⟩.
    pub fn population(&self, ket: &Ket2) -> f64 {
        ket.sandwich(&self.0, ket).re
    }
}

/// Thermal state `e^{-βH}/Tr e^{-βH}`.
///
/// Evaluated as `(I − tanh(β|r|) n·σ)/2` for `H = c0·I + |r| n·σ`, which stays
/// finite for arbitrarily large `β`.
pub fn gibbs_state(h: &Matrix2C, beta: f64) -> Result<DensityMatrix> {
    h.ensure_hermitian()?;
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!(
            "inverse temperature must be >= 0, got {beta}"
        )));
    }
    let (_, r) = h.pauli_coefficients();
    let len = r[0].hypot(r[1]).hypot(r[2]);
    if len == 0.0 || beta == 0.0 {
        return Ok(DensityMatrix::maximally_mixed());
    }
    let pol = -(beta * len).tanh() / len;
    let m = Matrix2C::from_bloch(0.5, [0.5 * pol * r[0], 0.5 * pol * r[1], 0.5 * pol * r[2]]);
    DensityMatrix::new(m)
}

/// Eigenvalues in `[-STATE_TOL, 0]` count as zero.
fn plogp(p: f64) -> Result<f64> {
    if p < -STATE_TOL {
        return Err(Error::validation("negative eigenvalue in entropy", -p));
    }
    Ok(if p <= 0.0 { 0.0 } else { p * p.ln() })
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let [a, b] = rho.eigenvalues();
    Ok(-(plogp(a)? + plogp(b)?))
}

/// `Re Tr(ρA)` for Hermitian `A`.
pub fn expectation(rho: &DensityMatrix, a: &Matrix2C) -> Result<f64> {
    a.ensure_hermitian()?;
    let tr = (*rho.matrix() * *a).trace();
    // Tr of a product of two Hermitian matrices is real up to roundoff
    if tr.im.abs() > 1e-12 {
        return Err(Error::validation(
            "expectation has an imaginary part",
            tr.im.abs(),
        ));
    }
    Ok(tr.re)
}
