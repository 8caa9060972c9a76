use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{build_operators, HilbertSpace};
use super::steady::steady_state;
use super::superop::{build_generator_with, CavityModel};
use super::LindbladError;
use crate::model::{DriveParams, SystemParams};

/// Largest relative change of `I_c` or `g²(0)` from `n_max` to `n_max + 1`
/// accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockadeOptions {
    pub n_max: usize,
    pub model: CavityModel,
    /// Repeat the solve at `n_max + 1` and compare.
    pub check_convergence: bool,
}

impl Default for BlockadeOptions {
    fn default() -> Self {
        Self { n_max: 3, model: CavityModel::Cep, check_convergence: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadeObservables {
    /// `⟨c_cw† c_cw⟩`.
    pub i_c: f64,
    /// `⟨c_cw†² c_cw²⟩ / I_c²`.
    pub g2: f64,
    pub n_max: usize,
    /// Relative change against `n_max + 1`, when checked.
    pub truncation_change: Option<f64>,
    pub truncation_warning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadePoint {
    pub omega_l: f64,
    pub observables: BlockadeObservables,
}

fn observables_at(
    params: &SystemParams,
    drive: &DriveParams,
    n_max: usize,
    model: CavityModel,
) -> Result<(f64, f64), LindbladError> {
    let space = HilbertSpace::new(1, n_max)?;
    let ops = build_operators(&space);
    let rho = steady_state(&build_generator_with(params, Some(drive), &space, model)?)?;
    let c = &ops.c_cw;
    let cd = c.adjoint().to_owned();
    let i_c = rho.expect(&(&cd * c)).re;
    let pairs = &(&cd * &cd) * &(c * c);
    let g2 = rho.expect(&pairs).re / (i_c * i_c);
    Ok((i_c, g2))
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Steady-state photon flux and zero-delay correlation of the CW mode under
/// a weak coherent drive of the emitter.
pub fn blockade_observables(
    params: &SystemParams,
    drive: &DriveParams,
    options: &BlockadeOptions,
) -> Result<BlockadeObservables, LindbladError> {
    if drive.amplitude == 0.0 {
        return Err(LindbladError::UniqueSteadyStateRequiresDrive);
    }
    let (i_c, g2) = observables_at(params, drive, options.n_max, options.model)?;
    let truncation_change = if options.check_convergence {
        let (i2, g22) = observables_at(params, drive, options.n_max + 1, options.model)?;
        Some(relative_change(i_c, i2).max(relative_change(g2, g22)))
    } else {
        None
    };
    Ok(BlockadeObservables {
        i_c,
        g2,
        n_max: options.n_max,
        truncation_change,
        truncation_warning: truncation_change.is_some_and(|c| !(c < CONVERGENCE_TOL)),
    })
}

/// [`blockade_observables`] across laser frequencies, evaluated in parallel.
pub fn blockade_scan(
    params: &SystemParams,
    amplitude: f64,
    omega_l_grid: &[f64],
    options: &BlockadeOptions,
) -> Result<Vec<BlockadePoint>, LindbladError> {
    omega_l_grid
        .par_iter()
        .map(|&omega_l| {
            let drive = DriveParams { amplitude, omega_l };
            blockade_observables(params, &drive, options).map(|observables| BlockadePoint { omega_l, observables })
        })
        .collect()
}
