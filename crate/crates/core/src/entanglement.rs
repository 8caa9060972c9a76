//! Spontaneous entanglement of two emitters sharing the ring, in the
//! one-excitation sector.

use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SystemParams;
use crate::single_excitation::{self, Basis, SingleExcitationError, SingleExcitationMatrix};
use crate::C64;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EntanglementError {
    #[error("closed form needs phi = 0 (mod 2pi), got phi = {0}")]
    PhaseOutOfDomain(f64),
    #[error("closed form needs omega_0 = omega_c and gamma = 0")]
    OffResonance,
    #[error(transparent)]
    Evolution(#[from] SingleExcitationError),
}

/// Amplitudes of `|eg00⟩, |ge00⟩, |gg10⟩, |gg01⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitAmplitudes {
    pub c_eg: C64,
    pub c_ge: C64,
    pub c_10: C64,
    pub c_01: C64,
}

impl TwoQubitAmplitudes {
    pub fn first_excited() -> Self {
        let z = C64::new(0.0, 0.0);
        Self { c_eg: C64::new(1.0, 0.0), c_ge: z, c_10: z, c_01: z }
    }

    pub fn as_array(&self) -> [C64; 4] {
        [self.c_eg, self.c_ge, self.c_10, self.c_01]
    }

    fn from_slice(v: &[C64]) -> Self {
        Self { c_eg: v[0], c_ge: v[1], c_10: v[2], c_01: v[3] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Non-Hermitian generator of the four amplitudes.
pub fn two_qubit_matrix(p: &SystemParams) -> SingleExcitationMatrix {
    let z = C64::new(0.0, 0.0);
    let g = C64::new(p.g, 0.0);
    let q = C64::new(p.omega_0, -p.gamma / 2.0);
    let cav = C64::new(p.omega_c, -p.kappa / 2.0);
    let chiral = C64::new(0.0, -p.kappa) * C64::from_polar(1.0, p.phi);
    let rows = [[q, z, g, g], [z, q, g, g], [g, g, cav, z], [g, g, chiral, cav]];
    SingleExcitationMatrix::new(Mat::from_fn(4, 4, |i, j| rows[i][j]), Basis::TwoQubit)
}

/// Evolution from one excited emitter.
pub fn evolve_two_qubit(p: &SystemParams, times: &[f64]) -> Result<Vec<TwoQubitAmplitudes>, EntanglementError> {
    evolve_two_qubit_from(p, TwoQubitAmplitudes::first_excited(), times)
}

pub fn evolve_two_qubit_from(
    p: &SystemParams,
    initial: TwoQubitAmplitudes,
    times: &[f64],
) -> Result<Vec<TwoQubitAmplitudes>, EntanglementError> {
    let traj = single_excitation::evolve(&two_qubit_matrix(p), &initial.as_array(), times)?;
    Ok(traj.iter().map(|v| TwoQubitAmplitudes::from_slice(v)).collect())
}

/// Closed-form `(C_eg, C_ge)` at φ ≡ 0 on resonance, without emitter loss.
pub fn analytic_coefficients(p: &SystemParams, t: f64) -> Result<(C64, C64), EntanglementError> {
    if !p.is_phase_trivial(1e-12) {
        return Err(EntanglementError::PhaseOutOfDomain(p.phi));
    }
    if p.omega_0 != p.omega_c || p.gamma != 0.0 {
        return Err(EntanglementError::OffResonance);
    }
    let (g, k) = (p.g, p.kappa);
    let den = 16.0 * g * g + k * k;
    let decay = (-k * t / 2.0).exp();
    let osc = 4.0 * g * (2.0 * g * t).cos() + k * (2.0 * g * t).sin();
    let c_eg = (8.0 * g * g + k * k + 2.0 * g * decay * osc) / den;
    let c_ge = 2.0 * g * (decay * osc - 4.0 * g) / den;
    let phase = C64::from_polar(1.0, -p.omega_c * t);
    Ok((phase * c_eg, phase * c_ge))
}

/// `2 |C_eg C_ge*|`, exact for this one-excitation pure-state family.
pub fn concurrence(a: &TwoQubitAmplitudes) -> f64 {
    2.0 * (a.c_eg * a.c_ge.conj()).norm()
}

/// Long-time concurrence `2(8x + 1)8x/(16x + 1)²` with `x = g²/κ²`.
pub fn steady_concurrence(g: f64, kappa: f64) -> f64 {
    let x = g * g / (kappa * kappa);
    2.0 * (8.0 * x + 1.0) * 8.0 * x / (16.0 * x + 1.0).powi(2)
}
