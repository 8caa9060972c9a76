//! Weak-drive perturbation theory for the CW-mode photon statistics, with the
//! state truncated at two excitations.
//!
//! Steady-state amplitudes solve `A₁C¹ = −Ω e₁` on `(100, 010, 001)` and
//! `A₂C² = −Ω(0, C¹₀₁₀, C¹₀₀₁, 0, 0)` on `(011, 110, 101, 020, 002)`.

use std::f64::consts::SQRT_2;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::lindblad::{blockade_observables, BlockadeOptions, LindbladError};
use crate::model::{DriveParams, SystemParams};
use crate::C64;

const SINGULAR_TOL: f64 = 1e-14;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BlockadeAnalyticError {
    #[error("{which} vanishes (|det| = {det:e}): drive sits on an undamped state")]
    SingularSystem { which: &'static str, det: f64 },
    #[error("drive amplitude must be > 0")]
    NoDrive,
    #[error(transparent)]
    Numeric(#[from] LindbladError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeAmplitudes {
    pub c100_1: C64,
    pub c010_1: C64,
    pub c001_1: C64,
    pub c011_2: C64,
    pub c110_2: C64,
    pub c101_2: C64,
    pub c020_2: C64,
    pub c002_2: C64,
    /// `ω₀ − ω_L − iγ/2`.
    pub delta_0: C64,
    /// `ω_c − ω_L − iκ/2`.
    pub delta_c: C64,
    pub d1: C64,
    /// Zero until [`second_order`] has run.
    pub d2: C64,
    /// Largest relative deviation between the linear solves and the closed
    /// forms for `D₁`, `C¹₀₀₁`, `D₂` and `C²₀₀₂`.
    pub closed_form_deviation: f64,
}

fn detunings(p: &SystemParams, drive: &DriveParams) -> (C64, C64) {
    (C64::new(p.omega_0 - drive.omega_l, -p.gamma / 2.0), C64::new(p.omega_c - drive.omega_l, -p.kappa / 2.0))
}

fn chiral(p: &SystemParams) -> C64 {
    C64::new(0.0, -p.kappa) * C64::from_polar(1.0, p.phi)
}

pub fn first_order_matrix(p: &SystemParams, drive: &DriveParams) -> Mat<C64> {
    let (d0, dc) = detunings(p, drive);
    let g = C64::new(p.g, 0.0);
    let z = C64::new(0.0, 0.0);
    let rows = [[d0, g, g], [g, dc, z], [g, chiral(p), dc]];
    Mat::from_fn(3, 3, |i, j| rows[i][j])
}

pub fn second_order_matrix(p: &SystemParams, drive: &DriveParams) -> Mat<C64> {
    let (d0, dc) = detunings(p, drive);
    let g = C64::new(p.g, 0.0);
    let sg = g * SQRT_2;
    let ch = chiral(p);
    let z = C64::new(0.0, 0.0);
    let rows = [
        [2.0 * dc, g, g, ch * SQRT_2, z],
        [g, d0 + dc, z, sg, z],
        [g, ch, d0 + dc, z, sg],
        [z, sg, z, 2.0 * dc, z],
        [ch * SQRT_2, z, sg, z, 2.0 * dc],
    ];
    Mat::from_fn(5, 5, |i, j| rows[i][j])
}

/// `D₁ = Δ₀Δ_c² − 2g²Δ_c − iκe^{iφ}g²`.
pub fn d1_closed_form(p: &SystemParams, drive: &DriveParams) -> C64 {
    let (d0, dc) = detunings(p, drive);
    let g2 = p.g * p.g;
    d0 * dc * dc - 2.0 * g2 * dc + chiral(p) * g2
}

/// `D₂ = 4D₁[−2g² + Δ_c(3Δ_c + 2Δ₀)] + 4Δ_c⁴(2Δ_c + Δ₀)`.
pub fn d2_closed_form(p: &SystemParams, drive: &DriveParams) -> C64 {
    let (d0, dc) = detunings(p, drive);
    let d1 = d1_closed_form(p, drive);
    4.0 * d1 * (-2.0 * p.g * p.g + dc * (3.0 * dc + 2.0 * d0)) + 4.0 * dc.powi(4) * (2.0 * dc + d0)
}

/// `C¹₀₀₁ = Ωg(Δ_c + iκe^{iφ})/D₁`.
pub fn c001_closed_form(p: &SystemParams, drive: &DriveParams) -> C64 {
    let (_, dc) = detunings(p, drive);
    drive.amplitude * p.g * (dc - chiral(p)) / d1_closed_form(p, drive)
}

/// Closed form of `C²₀₀₂` in terms of the first-order amplitudes. The drive
/// amplitude enters as an explicit overall factor.
pub fn c002_closed_form(p: &SystemParams, drive: &DriveParams, c010: C64, c001: C64) -> C64 {
    let (d0, dc) = detunings(p, drive);
    let g2 = p.g * p.g;
    let ie = -chiral(p);
    let k2e2 = ie * ie;
    let a = dc * (2.0 * dc * (dc + d0) - 3.0 * g2) + ie * (dc * (dc + d0) - 2.0 * g2);
    let b = dc * g2 + ie * (dc * (3.0 * dc + d0) + g2) + k2e2 * (2.0 * dc + d0);
    drive.amplitude * 2.0 * SQRT_2 * p.g / d2_closed_form(p, drive) * (c001 * a + c010 * b)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn scale(p: &SystemParams, drive: &DriveParams) -> f64 {
    let (d0, dc) = detunings(p, drive);
    d0.norm() + dc.norm() + p.g + p.kappa
}

pub fn first_order(p: &SystemParams, drive: &DriveParams) -> Result<PerturbativeAmplitudes, BlockadeAnalyticError> {
    if !(drive.amplitude > 0.0) {
        return Err(BlockadeAnalyticError::NoDrive);
    }
    let (delta_0, delta_c) = detunings(p, drive);
    let a1 = first_order_matrix(p, drive);
    let d1 = linalg::determinant(&a1);
    if d1.norm() < SINGULAR_TOL * scale(p, drive).powi(3) {
        return Err(BlockadeAnalyticError::SingularSystem { which: "D1", det: d1.norm() });
    }
    let c = linalg::solve(&a1, &[C64::new(-drive.amplitude, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let z = C64::new(0.0, 0.0);
    let deviation = rel(d1, d1_closed_form(p, drive)).max(rel(c[2], c001_closed_form(p, drive)));
    Ok(PerturbativeAmplitudes {
        c100_1: c[0],
        c010_1: c[1],
        c001_1: c[2],
        c011_2: z,
        c110_2: z,
        c101_2: z,
        c020_2: z,
        c002_2: z,
        delta_0,
        delta_c,
        d1,
        d2: z,
        closed_form_deviation: deviation,
    })
}

pub fn second_order(
    p: &SystemParams,
    drive: &DriveParams,
    first: &PerturbativeAmplitudes,
) -> Result<PerturbativeAmplitudes, BlockadeAnalyticError> {
    let a2 = second_order_matrix(p, drive);
    let d2 = linalg::determinant(&a2);
    if d2.norm() < SINGULAR_TOL * scale(p, drive).powi(5) {
        return Err(BlockadeAnalyticError::SingularSystem { which: "D2", det: d2.norm() });
    }
    let om = -drive.amplitude;
    let z = C64::new(0.0, 0.0);
    let c = linalg::solve(&a2, &[z, om * first.c010_1, om * first.c001_1, z, z]);
    let closed = c002_closed_form(p, drive, first.c010_1, first.c001_1);
    let deviation = first.closed_form_deviation.max(rel(d2, d2_closed_form(p, drive))).max(rel(c[4], closed));
    Ok(PerturbativeAmplitudes {
        c011_2: c[0],
        c110_2: c[1],
        c101_2: c[2],
        c020_2: c[3],
        c002_2: c[4],
        d2,
        closed_form_deviation: deviation,
        ..*first
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticObservables {
    /// `|C¹₀₀₁|²`.
    pub i_c: f64,
    /// `|C²₀₀₂|² / I_c²`, the shorthand of the perturbative literature.
    pub g2: f64,
    /// `⟨c†²c²⟩ / I_c² = 2|C²₀₀₂|² / I_c²` for the truncated state.
    pub g2_normal_ordered: f64,
    pub amplitudes: PerturbativeAmplitudes,
}

pub fn analytic_observables(
    p: &SystemParams,
    drive: &DriveParams,
) -> Result<AnalyticObservables, BlockadeAnalyticError> {
    let first = first_order(p, drive)?;
    let amps = second_order(p, drive, &first)?;
    let i_c = amps.c001_1.norm_sqr();
    let g2 = amps.c002_2.norm_sqr() / (i_c * i_c);
    Ok(AnalyticObservables { i_c, g2, g2_normal_ordered: 2.0 * g2, amplitudes: amps })
}

/// One row of the perturbative-vs-numeric comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub omega_l: f64,
    pub i_c_analytic: f64,
    pub i_c_numeric: f64,
    pub g2_analytic: f64,
    pub g2_numeric: f64,
    /// `g2_numeric / g2_analytic`; a constant 2 reflects the bosonic factor
    /// of the two-photon component.
    pub g2_ratio: f64,
}

/// Evaluates both routes on a laser-frequency grid.
pub fn compare_with_numeric(
    p: &SystemParams,
    amplitude: f64,
    omega_l_grid: &[f64],
    options: &BlockadeOptions,
) -> Result<Vec<ComparisonRow>, BlockadeAnalyticError> {
    omega_l_grid
        .par_iter()
        .map(|&omega_l| {
            let drive = DriveParams { amplitude, omega_l };
            let a = analytic_observables(p, &drive)?;
            let n = blockade_observables(p, &drive, options)?;
            Ok(ComparisonRow {
                omega_l,
                i_c_analytic: a.i_c,
                i_c_numeric: n.i_c,
                g2_analytic: a.g2,
                g2_numeric: n.g2,
                g2_ratio: n.g2 / a.g2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::CavityModel;
    use crate::single_excitation::{build_mc, fw_solve, Branch};
    use proptest::prelude::*;

    fn fig_params() -> SystemParams {
        SystemParams { g: 0.5, kappa: 1.0, gamma: 0.05, phi: std::f64::consts::FRAC_PI_2, ..SystemParams::default() }
    }

    fn drive(omega_l: f64) -> DriveParams {
        DriveParams { amplitude: 5e-4, omega_l }
    }

    #[test]
    fn decoupled_emitter_leaves_cw_dark() {
        let p = SystemParams { g: 0.0, gamma: 0.05, ..SystemParams::default() };
        let a = first_order(&p, &drive(0.3)).unwrap();
        assert_eq!(a.c001_1, C64::new(0.0, 0.0));
    }

    #[test]
    fn lossless_fw_drive_is_singular() {
        let fw = fw_solve(0.5, 1.0, 0.0, Branch::Minus).unwrap();
        let p = SystemParams { g: 0.5, phi: fw.phi_fw, ..SystemParams::default() };
        assert!(matches!(
            first_order(&p, &drive(fw.omega_fw)),
            Err(BlockadeAnalyticError::SingularSystem { which: "D1", .. })
        ));
    }

    #[test]
    fn closed_forms_agree_across_scan() {
        let p = fig_params();
        for i in 0..=80 {
            let w = -2.0 + 0.05 * i as f64;
            let a = analytic_observables(&p, &drive(w)).unwrap();
            assert!(a.amplitudes.closed_form_deviation < 1e-10, "w={w}");
            assert!(a.i_c.is_finite() && a.g2.is_finite());
        }
    }

    #[test]
    fn second_order_scales_quadratically() {
        let p = fig_params();
        let big = analytic_observables(&p, &DriveParams { amplitude: 2e-3, omega_l: 0.0 }).unwrap();
        let small = analytic_observables(&p, &DriveParams { amplitude: 1e-3, omega_l: 0.0 }).unwrap();
        let r = big.amplitudes.c002_2 / small.amplitudes.c002_2;
        assert!((r - 4.0).norm() < 1e-12);
        // g²(0) is drive independent at this order
        assert!((big.g2 - small.g2).abs() < 1e-12 * big.g2);
    }

    #[test]
    fn d1_shares_eigenvalues_with_mc() {
        // det(A₁) = det(M_c − ω_L) with the emitter loss on the diagonal
        let p = SystemParams { omega_0: 0.2, phi: 1.1, ..fig_params() };
        for &w in &[-1.0, 0.0, 0.7] {
            let mc = build_mc(&p);
            let shifted =
                Mat::from_fn(3, 3, |i, j| mc.entry(i, j) - if i == j { C64::new(w, 0.0) } else { C64::new(0.0, 0.0) });
            let a = linalg::determinant(&shifted);
            assert!((a - d1_closed_form(&p, &drive(w))).norm() < 1e-13);
        }
    }

    #[test]
    fn far_detuned_drive_suppresses_flux() {
        let p = fig_params();
        let near = analytic_observables(&p, &drive(-0.5)).unwrap();
        let far = analytic_observables(&p, &drive(50.0)).unwrap();
        assert!(far.i_c < 1e-6 * near.i_c);
    }

    #[test]
    fn numeric_g2_carries_bosonic_factor_two() {
        let p = fig_params();
        let opts = BlockadeOptions { n_max: 2, model: CavityModel::Cep, check_convergence: false };
        let rows = compare_with_numeric(&p, 5e-4, &[-1.0, -0.5, 0.0, 0.8], &opts).unwrap();
        for r in rows {
            assert!((r.i_c_numeric - r.i_c_analytic).abs() < 1e-2 * r.i_c_numeric);
            assert!((r.g2_ratio - 2.0).abs() < 2e-2, "{r:?}");
        }
    }

    #[test]
    fn flux_deviation_shrinks_quadratically_with_drive() {
        let p = fig_params();
        let opts = BlockadeOptions { n_max: 3, model: CavityModel::Cep, check_convergence: false };
        let dev = |amplitude: f64| {
            let drive = DriveParams { amplitude, omega_l: -0.5 };
            let a = analytic_observables(&p, &drive).unwrap().i_c;
            let n = blockade_observables(&p, &drive, &opts).unwrap().i_c;
            (a - n).abs() / n
        };
        let r = dev(2e-2) / dev(1e-2);
        assert!((r - 4.0).abs() < 0.4, "ratio {r}");
    }

    proptest! {
        #[test]
        fn determinant_closed_forms(g in 0.05f64..3.0, k in 0.05f64..3.0, phi in 0.0f64..6.3,
                                    gam in 0.0f64..0.5, w0 in -1.0f64..1.0, wl in -3.0f64..3.0) {
            let p = SystemParams { omega_c: 0.0, omega_0: w0, g, kappa: k, phi, gamma: gam };
            let d = DriveParams { amplitude: 1e-3, omega_l: wl };
            let a = linalg::determinant(&second_order_matrix(&p, &d));
            prop_assert!(rel(a, d2_closed_form(&p, &d)) < 1e-9);
            let b = linalg::determinant(&first_order_matrix(&p, &d));
            prop_assert!(rel(b, d1_closed_form(&p, &d)) < 1e-9);
        }

        #[test]
        fn only_detunings_matter(s in -5.0f64..5.0, wl in -2.0f64..2.0) {
            let p = fig_params();
            let q = SystemParams { omega_c: p.omega_c + s, omega_0: p.omega_0 + s, ..p };
            let a = analytic_observables(&p, &drive(wl)).unwrap();
            let b = analytic_observables(&q, &drive(wl + s)).unwrap();
            prop_assert!((a.i_c - b.i_c).abs() <= 1e-9 * a.i_c);
            prop_assert!((a.g2 - b.g2).abs() <= 1e-9 * a.g2);
        }
    }
}
