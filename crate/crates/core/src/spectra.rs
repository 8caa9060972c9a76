//! Cavity response, emitter self-energy and the spontaneous-emission spectrum
//! in the weak-excitation (γ = 0) limit, plus peak extraction on sampled
//! traces.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SystemParams;
use crate::C64;

/// Peaks lower than this fraction of the trace maximum are discarded.
pub const PEAK_HEIGHT_FLOOR: f64 = 1e-3;
/// A resolved peak needs at least this many grid points across its FWHM.
pub const MIN_POINTS_PER_FWHM: f64 = 8.0;
/// Number of points in [`default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 4001;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("spectral density is only defined at phi = 0 (mod 2pi), got phi = {0}")]
    PhaseOutOfDomain(f64),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("frequency grid must be finite and strictly ascending")]
    InvalidGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    Response,
    SESpectrum,
    SpectralDensity,
    LambShift,
    LocalCoupling,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceValues {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl TraceValues {
    pub fn len(&self) -> usize {
        match self {
            TraceValues::Real(v) => v.len(),
            TraceValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTrace {
    pub omega_grid: Vec<f64>,
    pub values: TraceValues,
    pub kind: TraceKind,
}

impl SpectrumTrace {
    /// Real values, or the real part for a complex trace.
    pub fn real_values(&self) -> Vec<f64> {
        match &self.values {
            TraceValues::Real(v) => v.clone(),
            TraceValues::Complex(v) => v.iter().map(|z| z.re).collect(),
        }
    }

    /// Trapezoidal integral of the real values.
    pub fn integral(&self) -> f64 {
        let v = self.real_values();
        self.omega_grid.windows(2).zip(v.windows(2)).map(|(w, y)| 0.5 * (w[1] - w[0]) * (y[0] + y[1])).sum()
    }

    /// Writes `omega,value` rows, or `omega,re,im` for the response.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.values {
            TraceValues::Real(v) => {
                w.write_record(["omega", "value"])?;
                for (o, y) in self.omega_grid.iter().zip(v) {
                    w.write_record([o.to_string(), y.to_string()])?;
                }
            }
            TraceValues::Complex(v) => {
                w.write_record(["omega", "re", "im"])?;
                for (o, y) in self.omega_grid.iter().zip(v) {
                    w.write_record([o.to_string(), y.re.to_string(), y.im.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakDescriptor {
    pub center: f64,
    pub height: f64,
    pub fwhm: f64,
    pub is_resolved: bool,
}

/// `[ω_c − 5κ − 2g, ω_c + 5κ + 2g]` sampled at [`DEFAULT_GRID_POINTS`].
pub fn default_grid(params: &SystemParams) -> Vec<f64> {
    let half = 5.0 * params.kappa + 2.0 * params.g;
    linspace(params.omega_c - half, params.omega_c + half, DEFAULT_GRID_POINTS)
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + step * i as f64).collect()
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<(), SpectraError> {
    let finite = grid.iter().all(|w| w.is_finite());
    let ascending = grid.windows(2).all(|w| w[1] > w[0]);
    if finite && ascending {
        Ok(())
    } else {
        Err(SpectraError::InvalidGrid)
    }
}

/// Lorentzian part `2/(x + iκ/2)` of the response, `x = ω − ω_c`.
pub fn response_lorentz(omega: f64, p: &SystemParams) -> C64 {
    2.0 / C64::new(omega - p.omega_c, p.kappa / 2.0)
}

/// Chiral-feedback part `−iκe^{iφ}/(x + iκ/2)²`.
pub fn response_chiral(omega: f64, p: &SystemParams) -> C64 {
    let d = C64::new(omega - p.omega_c, p.kappa / 2.0);
    C64::new(0.0, -p.kappa) * C64::from_polar(1.0, p.phi) / (d * d)
}

/// Cavity response function seen by the emitter.
pub fn response_chi(omega: f64, p: &SystemParams) -> C64 {
    response_lorentz(omega, p) + response_chiral(omega, p)
}

/// Photon-induced Lamb shift `g² Re χ(ω)`.
pub fn lamb_shift(omega: f64, p: &SystemParams) -> f64 {
    p.g * p.g * response_chi(omega, p).re
}

/// Local coupling strength `−2g² Im χ(ω)`.
pub fn local_coupling(omega: f64, p: &SystemParams) -> f64 {
    -2.0 * p.g * p.g * response_chi(omega, p).im
}

/// Polynomial form of [`lamb_shift`], free of the cancellation between the
/// two response terms near resonance.
pub fn lamb_shift_closed(omega: f64, p: &SystemParams) -> f64 {
    let x = omega - p.omega_c;
    let k = p.kappa;
    let q = x * x + k * k / 4.0;
    let num = (x * x - k * k / 4.0) * (2.0 * x + k * p.phi.sin()) + k * k * x * (1.0 - p.phi.cos());
    p.g * p.g * num / (q * q)
}

/// Polynomial form of [`local_coupling`].
pub fn local_coupling_closed(omega: f64, p: &SystemParams) -> f64 {
    let x = omega - p.omega_c;
    let k = p.kappa;
    let q = x * x + k * k / 4.0;
    let num = (x * x - k * k / 4.0) * k * (1.0 - p.phi.cos()) - k * x * (2.0 * x + k * p.phi.sin());
    -2.0 * p.g * p.g * num / (q * q)
}

fn se_point(omega: f64, p: &SystemParams) -> (f64, f64) {
    let gamma = local_coupling_closed(omega, p);
    let shift = omega - p.omega_0 - lamb_shift_closed(omega, p);
    (gamma, shift)
}

fn se_value(omega: f64, p: &SystemParams) -> f64 {
    let (gamma, shift) = se_point(omega, p);
    gamma / (shift * shift + 0.25 * gamma * gamma) / std::f64::consts::PI
}

/// Emission spectrum of an initially excited emitter,
/// `S(ω) = (1/π) Γ(ω) / ([ω − ω₀ − Δ(ω)]² + [Γ(ω)/2]²)`.
///
/// Points where numerator and denominator vanish together (dark or bound
/// states on the grid) are replaced by the symmetric two-sided limit.
pub fn se_spectrum(omega_grid: &[f64], params: &SystemParams) -> Result<SpectrumTrace, SpectraError> {
    check_grid(omega_grid)?;
    let scale = params.kappa + params.g;
    let values = omega_grid
        .par_iter()
        .enumerate()
        .map(|(i, &w)| {
            let (gamma, shift) = se_point(w, params);
            if gamma.abs() > 1e-10 * scale || shift.abs() > 1e-10 * scale {
                return se_value(w, params);
            }
            let h = 1e-2 * local_step(omega_grid, i).unwrap_or(1e-2 * params.kappa);
            0.5 * (se_value(w - h, params) + se_value(w + h, params))
        })
        .collect();
    Ok(SpectrumTrace {
        omega_grid: omega_grid.to_vec(),
        values: TraceValues::Real(values),
        kind: TraceKind::SESpectrum,
    })
}

fn local_step(grid: &[f64], i: usize) -> Option<f64> {
    let left = i.checked_sub(1).map(|j| grid[i] - grid[j]);
    let right = grid.get(i + 1).map(|x| x - grid[i]);
    match (left, right) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Spectral density of the reservoir seen at φ ≡ 0,
/// `J(ω) = (2g²κ/π)[x/(x² + (κ/2)²)]²`.
pub fn spectral_density(omega_grid: &[f64], params: &SystemParams) -> Result<SpectrumTrace, SpectraError> {
    if !params.is_phase_trivial(1e-12) {
        return Err(SpectraError::PhaseOutOfDomain(params.phi));
    }
    check_grid(omega_grid)?;
    let k = params.kappa;
    let values = omega_grid
        .par_iter()
        .map(|&w| {
            let x = w - params.omega_c;
            let r = x / (x * x + k * k / 4.0);
            2.0 * params.g * params.g * k / std::f64::consts::PI * r * r
        })
        .collect();
    Ok(SpectrumTrace {
        omega_grid: omega_grid.to_vec(),
        values: TraceValues::Real(values),
        kind: TraceKind::SpectralDensity,
    })
}

/// Samples χ, Δ or Γ on a grid. Other kinds are routed to their dedicated
/// functions.
pub fn sample(kind: TraceKind, omega_grid: &[f64], params: &SystemParams) -> Result<SpectrumTrace, SpectraError> {
    check_grid(omega_grid)?;
    let values = match kind {
        TraceKind::SESpectrum => return se_spectrum(omega_grid, params),
        TraceKind::SpectralDensity => return spectral_density(omega_grid, params),
        TraceKind::Response => TraceValues::Complex(omega_grid.par_iter().map(|&w| response_chi(w, params)).collect()),
        TraceKind::LambShift => TraceValues::Real(omega_grid.par_iter().map(|&w| lamb_shift(w, params)).collect()),
        TraceKind::LocalCoupling => {
            TraceValues::Real(omega_grid.par_iter().map(|&w| local_coupling(w, params)).collect())
        }
    };
    Ok(SpectrumTrace { omega_grid: omega_grid.to_vec(), values, kind })
}

/// Local maxima above [`PEAK_HEIGHT_FLOOR`] of the trace maximum, refined by
/// a parabola through the three top samples. The FWHM comes from linear
/// interpolation of the half-height crossings; a peak is unresolved when a
/// crossing is missing (grid edge or a neighbouring peak intervenes) or the
/// FWHM spans fewer than [`MIN_POINTS_PER_FWHM`] grid steps.
pub fn find_peaks(trace: &SpectrumTrace) -> Result<Vec<PeakDescriptor>, SpectraError> {
    let x = &trace.omega_grid;
    let y = trace.real_values();
    let n = y.len();
    if n == 0 || x.len() != n {
        return Err(SpectraError::EmptyTrace);
    }
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if n < 3 || !(max > min) || !(max > 0.0) {
        return Ok(Vec::new());
    }
    let floor = PEAK_HEIGHT_FLOOR * max;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= floor) {
            continue;
        }
        let (center, height) = refine(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]);
        let half = 0.5 * height;
        let left = crossing(x, &y, i, half, Direction::Left);
        let right = crossing(x, &y, i, half, Direction::Right);
        let peak = match (left, right) {
            (Some(a), Some(b)) => {
                let fwhm = b - a;
                let step = 0.5 * (x[i + 1] - x[i - 1]);
                PeakDescriptor { center, height, fwhm, is_resolved: fwhm >= MIN_POINTS_PER_FWHM * step }
            }
            (a, b) => {
                let a = a.unwrap_or(x[0]);
                let b = b.unwrap_or(x[n - 1]);
                PeakDescriptor { center, height, fwhm: b - a, is_resolved: false }
            }
        };
        peaks.push(peak);
    }
    Ok(peaks)
}

fn refine(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let a = (d1 - d0) / (x2 - x0);
    if !(a < 0.0) {
        return (x1, y1);
    }
    let b = d0 - a * (x0 + x1);
    let c = y1 - a * x1 * x1 - b * x1;
    let xc = (-b / (2.0 * a)).clamp(x0, x2);
    (xc, a * xc * xc + b * xc + c)
}

#[derive(Clone, Copy)]
enum Direction {
    Left,
    Right,
}

/// Half-height crossing walking away from `start`, or `None` when the trace
/// rises again (overlapping neighbour) or runs off the grid first.
fn crossing(x: &[f64], y: &[f64], start: usize, half: f64, dir: Direction) -> Option<f64> {
    let mut i = start;
    loop {
        let j = match dir {
            Direction::Left => i.checked_sub(1)?,
            Direction::Right => Some(i + 1).filter(|&j| j < y.len())?,
        };
        if y[j] < half {
            let t = (y[i] - half) / (y[i] - y[j]);
            return Some(x[i] + t * (x[j] - x[i]));
        }
        if y[j] > y[i] {
            return None;
        }
        i = j;
    }
}
