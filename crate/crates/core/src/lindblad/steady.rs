use faer::linalg::solvers::Solve;
use faer::Mat;

use super::space::DensityMatrix;
use super::superop::Superoperator;
use super::LindbladError;
use crate::linalg::{norm2, LinalgError};
use crate::C64;

/// Relative size (against the largest generator entry) below which the
/// second-smallest singular value counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;
const POWER_STEPS: usize = 12;

fn finish(l: &Superoperator, x: &[C64]) -> Result<DensityMatrix, LindbladError> {
    let d = l.dim();
    let rho = DensityMatrix::from_vec_unchecked(x, d).cleaned();
    let v = rho.to_vec();
    let mut r = vec![C64::new(0.0, 0.0); v.len()];
    l.apply(&v, &mut r);
    let residual = norm2(&r);
    if !(residual < RESIDUAL_TOL * l.max_abs_entry().max(1.0)) {
        return Err(LindbladError::SteadyStateResidual { residual });
    }
    Ok(rho)
}

/// Unique stationary state of `L`.
///
/// The trace condition replaces the (redundant) equation for `ρ₀₀` and the
/// resulting bordered system is solved by LU. Uniqueness is checked with a
/// power iteration for the smallest singular value of the bordered matrix,
/// which vanishes exactly when `L` has more than one stationary state.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix, LindbladError> {
    let d = l.dim();
    let n = d * d;
    let mut b = l.matrix().clone();
    for k in 0..n {
        b[(0, k)] = if k % d == k / d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let lu = b.partial_piv_lu();

    let sigma_min = smallest_singular_value(&lu, n);
    let scale = l.max_abs_entry().max(1.0);
    if !(sigma_min > DEGENERACY_TOL * scale) {
        return Err(LindbladError::DegenerateSteadyState { sigma_min });
    }

    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    let x = lu.solve(&rhs);
    let x: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    finish(l, &x)
}

fn smallest_singular_value(lu: &faer::linalg::solvers::PartialPivLu<C64>, n: usize) -> f64 {
    let mut v = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
    let mut growth = 0.0;
    for _ in 0..POWER_STEPS {
        let nv = norm_col(&v);
        if !(nv.is_finite() && nv > 0.0) {
            return 0.0;
        }
        v = Mat::from_fn(n, 1, |i, _| v[(i, 0)] / nv);
        let w = lu.solve(lu.solve_adjoint(&v));
        growth = norm_col(&w);
        v = w;
    }
    if growth.is_finite() && growth > 0.0 {
        1.0 / growth.sqrt()
    } else {
        0.0
    }
}

fn norm_col(v: &Mat<C64>) -> f64 {
    (0..v.nrows()).map(|i| v[(i, 0)].norm_sqr()).sum::<f64>().sqrt()
}

/// Independent route: right singular vector of the smallest singular value
/// of `L` itself. Slower; used to cross-check [`steady_state`].
pub fn steady_state_svd(l: &Superoperator) -> Result<DensityMatrix, LindbladError> {
    let n = l.matrix().nrows();
    let svd = l.matrix().svd().map_err(|_| LindbladError::Linalg(LinalgError::NoConvergence))?;
    let s = svd.S();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let scale = l.max_abs_entry().max(1.0);
    if n > 1 && !(s[order[1]].re > DEGENERACY_TOL * scale) {
        return Err(LindbladError::DegenerateSteadyState { sigma_min: s[order[1]].re });
    }
    let v = svd.V();
    let x: Vec<C64> = (0..n).map(|i| v[(i, order[0])]).collect();
    let tr: C64 = (0..l.dim()).map(|i| x[i + l.dim() * i]).sum();
    let x: Vec<C64> = x.iter().map(|z| z / tr).collect();
    finish(l, &x)
}
