//! Non-Hermitian generators of the one-excitation amplitude dynamics and the
//! two kinds of dressed bound states they support.
//!
//! Amplitudes are ordered `(⟨σ₋⟩, ⟨c_ccw⟩, ⟨c_cw⟩)` in the traveling basis and
//! `(⟨σ₋⟩, ⟨c₁⟩, ⟨c₂⟩)` in the standing basis, where `c_cw = (c₁+c₂)/√2` and
//! `c_ccw = (c₁−c₂)/√2`. All evolve as `dp/dt = −i M p`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};

use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, EigenSystem, LinalgError};
use crate::model::{self, SystemParams};
use crate::C64;

/// Phase tolerance for the vacancy condition φ ≡ 0 (mod 2π).
pub const VACANCY_PHASE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SingleExcitationError {
    #[error("matrix is already in the standing-wave basis")]
    WrongBasis,
    #[error("time grid must be ascending and start at t >= 0")]
    InvalidTimeGrid,
    #[error("initial vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `(σ, c_ccw, c_cw)`
    Traveling,
    /// `(σ, c₁, c₂)`
    Standing,
    /// `(eg, ge, 10, 01)` for two emitters sharing the ring
    TwoQubit,
}

#[derive(Clone, Debug)]
pub struct SingleExcitationMatrix {
    entries: Mat<C64>,
    basis: Basis,
}

impl SingleExcitationMatrix {
    pub fn new(entries: Mat<C64>, basis: Basis) -> Self {
        assert_eq!(entries.nrows(), entries.ncols());
        Self { entries, basis }
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Traveling-basis generator. The emitter diagonal carries `ω₀ − iγ/2`.
pub fn build_mc(p: &SystemParams) -> SingleExcitationMatrix {
    let cav = c(p.omega_c, -p.kappa / 2.0);
    let chiral = c(0.0, -p.kappa) * C64::from_polar(1.0, p.phi);
    let g = c(p.g, 0.0);
    let z = c(0.0, 0.0);
    let rows = [[c(p.omega_0, -p.gamma / 2.0), g, g], [g, cav, z], [g, chiral, cav]];
    SingleExcitationMatrix::new(Mat::from_fn(3, 3, |i, j| rows[i][j]), Basis::Traveling)
}

/// Orthogonal map from standing to traveling amplitudes: `p = T s`.
fn standing_to_traveling() -> Mat<C64> {
    let h = FRAC_1_SQRT_2;
    let rows = [[1.0, 0.0, 0.0], [0.0, h, -h], [0.0, h, h]];
    Mat::from_fn(3, 3, |i, j| c(rows[i][j], 0.0))
}

/// Similarity transform `Mₛ = Tᵀ M_c T` into the standing-wave basis.
pub fn to_standing_basis(m: &SingleExcitationMatrix) -> Result<SingleExcitationMatrix, SingleExcitationError> {
    if m.basis != Basis::Traveling {
        return Err(SingleExcitationError::WrongBasis);
    }
    let t = standing_to_traveling();
    let tt = t.transpose().to_owned();
    let ms = &(&tt * &m.entries) * &t;
    Ok(SingleExcitationMatrix::new(ms, Basis::Standing))
}

/// Maps a traveling-basis amplitude vector to the standing basis.
pub fn traveling_to_standing_vector(p: &[C64]) -> [C64; 3] {
    [p[0], (p[1] + p[2]) * FRAC_1_SQRT_2, (p[2] - p[1]) * FRAC_1_SQRT_2]
}

/// Maps a standing-basis amplitude vector to the traveling basis.
pub fn standing_to_traveling_vector(s: &[C64]) -> [C64; 3] {
    [s[0], (s[1] - s[2]) * FRAC_1_SQRT_2, (s[1] + s[2]) * FRAC_1_SQRT_2]
}

pub fn eigensystem(m: &SingleExcitationMatrix) -> Result<EigenSystem, SingleExcitationError> {
    Ok(linalg::eigensystem(&m.entries)?)
}

/// Evolves `p₀` under `dp/dt = −i M p` and samples it on `times`.
///
/// Uses the biorthogonal expansion `p(t) = Σₖ Rₖ (Lₖ·p₀)/(Lₖ·Rₖ) e^{−iλₖt}`;
/// when the eigensystem is flagged defective the propagator is computed by
/// scaling and squaring instead.
pub fn evolve(m: &SingleExcitationMatrix, p0: &[C64], times: &[f64]) -> Result<Vec<Vec<C64>>, SingleExcitationError> {
    let n = m.dim();
    if p0.len() != n {
        return Err(SingleExcitationError::DimensionMismatch { expected: n, got: p0.len() });
    }
    if times.first().is_some_and(|t| *t < 0.0 || !t.is_finite()) || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(SingleExcitationError::InvalidTimeGrid);
    }
    let es = eigensystem(m)?;
    if es.defective {
        return Ok(evolve_expm(m, p0, times));
    }
    let coeffs: Vec<C64> = (0..n).map(|k| es.projection(k, p0)).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let mut p = vec![c(0.0, 0.0); n];
            for k in 0..n {
                let a = coeffs[k] * (c(0.0, -t) * es.eigenvalues[k]).exp();
                for (pi, ri) in p.iter_mut().zip(&es.right_vectors[k]) {
                    *pi += a * ri;
                }
            }
            p
        })
        .collect())
}

/// Propagator route, independent of any eigendecomposition.
pub fn evolve_expm(m: &SingleExcitationMatrix, p0: &[C64], times: &[f64]) -> Vec<Vec<C64>> {
    let n = m.dim();
    times
        .iter()
        .map(|&t| {
            let a = Mat::from_fn(n, n, |i, j| c(0.0, -t) * m.entries[(i, j)]);
            linalg::mat_vec(&linalg::expm(&a), p0)
        })
        .collect()
}

pub fn populations(p: &[C64]) -> Vec<f64> {
    p.iter().map(|x| x.norm_sqr()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VacancyState {
    pub is_vacancy: bool,
    /// Normalized standing-basis eigenvector `(−iκ, 0, 2√2 g)/√(8g²+κ²)`.
    pub eigenstate: [C64; 3],
    /// Energy of the dark state, equal to the cavity resonance.
    pub energy: f64,
}

/// Vacancy-like bound state: exists iff φ ≡ 0 (mod 2π), for any coupling.
pub fn vacancy_condition(p: &SystemParams) -> VacancyState {
    let norm = (8.0 * p.g * p.g + p.kappa * p.kappa).sqrt();
    VacancyState {
        is_vacancy: p.is_phase_trivial(VACANCY_PHASE_TOL),
        eigenstate: [c(0.0, -p.kappa / norm), c(0.0, 0.0), c(2.0 * SQRT_2 * p.g / norm, 0.0)],
        energy: p.omega_c,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FwError {
    #[error("no Friedrich-Wintgen bound state: 8g^2 = {eight_g2} < kappa^2 = {kappa2}")]
    NoBoundState { eight_g2: f64, kappa2: f64 },
    #[error("invalid input: g must be >= 0 and kappa > 0")]
    InvalidInput,
    #[error("bound-state check failed: smallest |Im| near omega_fw is {residual:e}")]
    PostconditionFailed { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Friedrich–Wintgen bound state of the resonant (`ω₀ = ω_c`, γ = 0) system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FwSolution {
    pub omega_fw: f64,
    pub phi_fw: f64,
    pub branch: Branch,
    /// `(α, −e^{−iφ}, 1)`, annihilated by the coupling row `D`.
    pub null_vector: [C64; 3],
    pub qe_amplitude_alpha: C64,
    /// True at `8g² = κ²`, where the condition collapses to φ = 0 and the
    /// state coincides with the vacancy-like one.
    pub coincides_with_vacancy: bool,
}

/// Energy and phase at which the emitter-mediated and waveguide-mediated
/// decay paths cancel.
pub fn fw_solve(g: f64, kappa: f64, omega_c: f64, branch: Branch) -> Result<FwSolution, FwError> {
    if !(g >= 0.0) || !(kappa > 0.0) || !g.is_finite() || !kappa.is_finite() {
        return Err(FwError::InvalidInput);
    }
    let mut disc = 8.0 * g * g - kappa * kappa;
    // absorb rounding at the threshold 8g² = κ²
    if disc < 0.0 && disc > -1e-12 * kappa * kappa {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Err(FwError::NoBoundState { eight_g2: 8.0 * g * g, kappa2: kappa * kappa });
    }
    let s = branch.sign();
    let root = disc.sqrt();
    let detuning = s * root / 2.0;
    let omega_fw = omega_c + detuning;
    let arg = -c(4.0 * g * g - kappa * kappa, s * kappa * root) / (4.0 * g * g);
    // principal log of a unit-modulus number: φ = −i ln z = arg z
    let phi_fw = model::wrap_phase(arg.arg());
    let alpha = c(detuning, -kappa / 2.0) / g;
    let e_minus = C64::from_polar(1.0, -phi_fw);
    let solution = FwSolution {
        omega_fw,
        phi_fw,
        branch,
        null_vector: [alpha, -e_minus, c(1.0, 0.0)],
        qe_amplitude_alpha: alpha,
        coincides_with_vacancy: model::phase_distance_to_zero(phi_fw) < 1e-12 || disc == 0.0,
    };

    let mc = build_mc(&SystemParams { omega_c, omega_0: omega_c, g, kappa, phi: phi_fw, gamma: 0.0 });
    let es = linalg::eigensystem(mc.entries())?;
    let scale = kappa.max(g);
    let residual = es
        .eigenvalues
        .iter()
        .filter(|l| (l.re - omega_fw).abs() < 1e-8 * scale.max(omega_fw.abs()))
        .map(|l| l.im.abs())
        .fold(f64::INFINITY, f64::min);
    if !(residual < 1e-10 * scale) {
        return Err(FwError::PostconditionFailed { residual });
    }
    Ok(solution)
}

/// Both FW solutions, or none when `8g² < κ²`.
pub fn fw_solutions(g: f64, kappa: f64, omega_c: f64) -> Result<Vec<FwSolution>, FwError> {
    match fw_solve(g, kappa, omega_c, Branch::Plus) {
        Err(FwError::NoBoundState { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
        Ok(plus) => Ok(vec![plus, fw_solve(g, kappa, omega_c, Branch::Minus)?]),
    }
}

/// Split `M_c = H_B − iΓ` with `Γ = D†D` for the resonant, γ = 0 system.
#[derive(Clone, Debug)]
pub struct HermitianSplit {
    pub h_b: Mat<C64>,
    pub gamma: Mat<C64>,
    /// Coupling row `D = (0, √(κ/2), √(κ/2) e^{−iφ})`.
    pub d: [C64; 3],
}

pub fn hermitian_split(p: &SystemParams) -> HermitianSplit {
    let w = p.omega_c;
    let g = c(p.g, 0.0);
    let e = C64::from_polar(1.0, p.phi);
    let half = p.kappa / 2.0;
    let rows = [[c(w, 0.0), g, g], [g, c(w, 0.0), c(0.0, half) * e.conj()], [g, c(0.0, -half) * e, c(w, 0.0)]];
    let h_b = Mat::from_fn(3, 3, |i, j| rows[i][j]);
    let r = half.sqrt();
    let d = [c(0.0, 0.0), c(r, 0.0), c(r, 0.0) * e.conj()];
    let gamma = Mat::from_fn(3, 3, |i, j| d[i].conj() * d[j]);
    HermitianSplit { h_b, gamma, d }
}

/// Eigen-systems along a parameter path, with modes kept in a consistent
/// order by maximal eigenvector overlap between neighbouring points.
pub fn track_modes<I>(path: I) -> Result<Vec<EigenSystem>, SingleExcitationError>
where
    I: IntoIterator<Item = SystemParams>,
{
    let mut out: Vec<EigenSystem> = Vec::new();
    for p in path {
        let es = eigensystem(&build_mc(&p))?;
        let es = match out.last() {
            Some(prev) => es.aligned_to(prev),
            None => es,
        };
        out.push(es);
    }
    Ok(out)
}

/// `φ` range helper: the FW phase lies in `[0, 2π)`.
pub const PHASE_PERIOD: f64 = TAU;
