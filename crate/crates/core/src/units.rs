//! Physical-unit conversion. Everything past this module works in units of ħω
//! (energies) and ωt (times).

/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582119569e-16;

pub const DEFAULT_HBAR_OMEGA_PEV: f64 = 1.0;
pub const DEFAULT_TAU_US: f64 = 10.0;

/// `ωτ` for a level splitting `ħω` in peV driven for `τ` microseconds.
pub fn omega_tau(hbar_omega_pev: f64, tau_us: f64) -> f64 {
    (hbar_omega_pev * 1e-12 / HBAR_EV_S) * (tau_us * 1e-6)
}

/// Drive phase for ħω = 1 peV and τ = 10 μs, about 0.015193.
pub fn reference_omega_tau() -> f64 {
    omega_tau(DEFAULT_HBAR_OMEGA_PEV, DEFAULT_TAU_US)
}

/// `βħω` from an inverse temperature in 1/peV.
pub fn beta_hbar_omega(beta_per_pev: f64, hbar_omega_pev: f64) -> f64 {
    beta_per_pev * hbar_omega_pev
}
