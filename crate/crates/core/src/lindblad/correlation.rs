use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;

use super::integrate::{propagate, Tolerances};
use super::space::{build_operators, DensityMatrix, HilbertSpace};
use super::superop::{build_generator, Superoperator};
use super::LindbladError;
use crate::model::SystemParams;
use crate::spectra::{SpectrumTrace, TraceKind, TraceValues};
use crate::C64;

fn check_dim(l: &Superoperator, m: &Mat<C64>) -> Result<(), LindbladError> {
    if m.nrows() != l.dim() || m.ncols() != l.dim() {
        return Err(LindbladError::DimensionMismatch { expected: l.dim(), got: m.nrows() });
    }
    Ok(())
}

/// `vec(B ρ)`.
fn seed(rho: &DensityMatrix, b: &Mat<C64>) -> Vec<C64> {
    DensityMatrix::new_unchecked(b * rho.matrix()).to_vec()
}

/// `tr(A X)` for column-stacked `X`.
fn trace_against(a: &Mat<C64>, x: &[C64]) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            acc += a[(j, k)] * x[k + d * j];
        }
    }
    acc
}

/// `⟨A(τ) B(0)⟩ = tr[A e^{Lτ}(B ρ)]` by the quantum regression theorem.
pub fn correlation(
    l: &Superoperator,
    rho: &DensityMatrix,
    a: &Mat<C64>,
    b: &Mat<C64>,
    tau_grid: &[f64],
) -> Result<Vec<C64>, LindbladError> {
    check_dim(l, a)?;
    check_dim(l, b)?;
    let traj = propagate(l, &seed(rho, b), tau_grid, Tolerances::default())?;
    Ok(traj.iter().map(|x| trace_against(a, x)).collect())
}

/// One-sided transform `∫₀^∞ ⟨A(τ)B(0)⟩ e^{−iωτ} dτ = tr[A (iω − L)⁻¹ vec(Bρ)]`.
///
/// With this sign the emission line of an emitter at `ω₀` appears at `+ω₀`.
/// Frequencies that hit an undamped mode exactly are replaced by the
/// symmetric two-sided limit; such a mode contributes only to the imaginary
/// part away from its own frequency.
pub fn regression_spectrum(
    l: &Superoperator,
    rho: &DensityMatrix,
    a: &Mat<C64>,
    b: &Mat<C64>,
    omega_grid: &[f64],
) -> Result<Vec<C64>, LindbladError> {
    check_dim(l, a)?;
    check_dim(l, b)?;
    let v = seed(rho, b);
    let n = v.len();
    let rhs = Mat::from_fn(n, 1, |i, _| v[i]);
    let scale = l.max_abs_entry().max(1.0);
    let resolvent = |w: f64| -> Option<C64> {
        let m = Mat::from_fn(n, n, |i, j| {
            let diag = if i == j { C64::new(0.0, w) } else { C64::new(0.0, 0.0) };
            diag - l.matrix()[(i, j)]
        });
        let x = m.partial_piv_lu().solve(&rhs);
        let x: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
        let size = crate::linalg::norm2(&x);
        (size.is_finite() && size < 1e10 / scale).then(|| trace_against(a, &x))
    };
    let out = omega_grid
        .par_iter()
        .enumerate()
        .map(|(i, &w)| {
            resolvent(w).unwrap_or_else(|| {
                let step = neighbour_step(omega_grid, i).unwrap_or(1e-2);
                let h = 1e-2 * step;
                let (lo, hi) = (resolvent(w - h), resolvent(w + h));
                match (lo, hi) {
                    (Some(x), Some(y)) => 0.5 * (x + y),
                    _ => C64::new(f64::NAN, f64::NAN),
                }
            })
        })
        .collect();
    Ok(out)
}

fn neighbour_step(grid: &[f64], i: usize) -> Option<f64> {
    let left = i.checked_sub(1).map(|j| grid[i] - grid[j]);
    let right = grid.get(i + 1).map(|x| x - grid[i]);
    match (left, right) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Emission spectrum `(2/π) Re ∫₀^∞ ⟨σ₊(τ)σ₋(0)⟩ e^{−iωτ} dτ` of an initially
/// excited emitter, from the full master equation. One photon per mode is
/// exact here because the emitter holds a single excitation.
pub fn emission_spectrum(params: &SystemParams, omega_grid: &[f64]) -> Result<SpectrumTrace, LindbladError> {
    let space = HilbertSpace::new(1, 1)?;
    let ops = build_operators(&space);
    let l = build_generator(params, None, &space)?;
    let rho = DensityMatrix::basis_state(space.total_dim(), space.index(&[1], 0, 0));
    let sm = &ops.sigma_minus[0];
    let sp = sm.adjoint().to_owned();
    let spec = regression_spectrum(&l, &rho, &sp, sm, omega_grid)?;
    let values = spec.iter().map(|z| 2.0 / std::f64::consts::PI * z.re).collect();
    Ok(SpectrumTrace {
        omega_grid: omega_grid.to_vec(),
        values: TraceValues::Real(values),
        kind: TraceKind::SESpectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{linspace, se_spectrum};
    use std::f64::consts::FRAC_PI_2;

    fn excited(space: &HilbertSpace) -> DensityMatrix {
        DensityMatrix::basis_state(space.total_dim(), space.index(&[1], 0, 0))
    }

    #[test]
    fn equal_time_value_is_excited_population() {
        let s = HilbertSpace::new(1, 1).unwrap();
        let ops = build_operators(&s);
        let l = build_generator(&SystemParams::default(), None, &s).unwrap();
        let sm = &ops.sigma_minus[0];
        let c = correlation(&l, &excited(&s), &sm.adjoint().to_owned(), sm, &[0.0]).unwrap();
        assert!((c[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn uncoupled_emitter_rotates_freely() {
        let s = HilbertSpace::new(1, 1).unwrap();
        let ops = build_operators(&s);
        let w0 = 0.8;
        let p = SystemParams { omega_0: w0, g: 0.0, ..SystemParams::default() };
        let l = build_generator(&p, None, &s).unwrap();
        let sm = &ops.sigma_minus[0];
        let taus: Vec<f64> = (0..20).map(|i| i as f64 * 0.7).collect();
        let c = correlation(&l, &excited(&s), &sm.adjoint().to_owned(), sm, &taus).unwrap();
        for (t, z) in taus.iter().zip(c) {
            assert!((z - C64::from_polar(1.0, w0 * t)).norm() < 1e-8);
        }
    }

    #[test]
    fn correlation_is_conjugate_amplitude() {
        let s = HilbertSpace::new(1, 1).unwrap();
        let ops = build_operators(&s);
        let p = SystemParams { omega_0: 0.1, g: 0.6, phi: 2.0, ..SystemParams::default() };
        let l = build_generator(&p, None, &s).unwrap();
        let sm = &ops.sigma_minus[0];
        let taus: Vec<f64> = (0..30).map(|i| i as f64 * 0.4).collect();
        let c = correlation(&l, &excited(&s), &sm.adjoint().to_owned(), sm, &taus).unwrap();
        let amp = crate::single_excitation::evolve(
            &crate::single_excitation::build_mc(&p),
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            &taus,
        )
        .unwrap();
        for (z, a) in c.iter().zip(&amp) {
            assert!((z - a[0].conj()).norm() < 1e-8);
        }
    }

    #[test]
    fn numeric_spectrum_matches_analytic() {
        for &(g, phi) in &[(0.5, FRAC_PI_2), (1.0, 0.0), (1.0, std::f64::consts::PI)] {
            let p = SystemParams { g, phi, ..SystemParams::default() };
            let grid = linspace(-4.0, 4.0, 401);
            let a = se_spectrum(&grid, &p).unwrap().real_values();
            let b = emission_spectrum(&p, &grid).unwrap().real_values();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-12), "g={g} phi={phi}: {x} vs {y}");
            }
        }
    }
}
