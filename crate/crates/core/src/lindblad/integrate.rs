use super::space::DensityMatrix;
use super::superop::Superoperator;
use super::LindbladError;
use crate::C64;

/// States with an eigenvalue below this are rejected.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

/// Mixed absolute/relative per-step error tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Hermitized, unit-trace output states.
    pub states: Vec<DensityMatrix>,
    /// Largest `|tr ρ − 1|` of the raw integrated states.
    pub max_trace_deviation: f64,
    /// Largest `‖ρ − ρ†‖_max` of the raw integrated states.
    pub max_hermiticity_defect: f64,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

struct Stepper<'a> {
    l: &'a Superoperator,
    tol: Tolerances,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    next: Vec<C64>,
    h: f64,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(l: &'a Superoperator, tol: Tolerances, n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        let scale = l.max_abs_entry().max(1e-300);
        Self { l, tol, k: std::array::from_fn(|_| z.clone()), stage: z.clone(), next: z, h: 1e-2 / scale, steps: 0 }
    }

    /// Advances `y` from `t` to `t_end` with adaptive steps.
    fn advance(&mut self, y: &mut Vec<C64>, mut t: f64, t_end: f64) -> Result<(), LindbladError> {
        self.l.apply(y, &mut self.k[0]);
        while t < t_end {
            let last = self.h >= t_end - t;
            let h = if last { t_end - t } else { self.h };
            for s in 1..7 {
                for (i, st) in self.stage.iter_mut().enumerate() {
                    let mut acc = y[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += self.k[j][i] * (h * a);
                        }
                    }
                    *st = acc;
                }
                self.l.apply(&self.stage, &mut self.k[s]);
            }
            // the last stage is evaluated at the fifth-order solution
            self.next.copy_from_slice(&self.stage);
            let mut err = 0.0;
            for i in 0..y.len() {
                let e: C64 = (0..7).filter(|&s| E[s] != 0.0).map(|s| self.k[s][i] * E[s]).sum::<C64>() * h;
                let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(self.next[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / y.len() as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                std::mem::swap(y, &mut self.next);
                self.k.swap(0, 6);
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
            }
            if self.h < 1e-14 * t.abs().max(1.0) {
                return Err(LindbladError::StepFailure { time: t });
            }
        }
        Ok(())
    }
}

fn check_times(times: &[f64]) -> Result<(), LindbladError> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LindbladError::InvalidTimeGrid);
    }
    Ok(())
}

/// Raw linear propagation of any vector `v(times[0]) = v0` under `L`.
pub fn propagate(
    l: &Superoperator,
    v0: &[C64],
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<Vec<C64>>, LindbladError> {
    let n = l.matrix().nrows();
    if v0.len() != n {
        return Err(LindbladError::DimensionMismatch { expected: n, got: v0.len() });
    }
    check_times(times)?;
    let mut out = Vec::with_capacity(times.len());
    let Some(&t0) = times.first() else { return Ok(out) };
    let mut stepper = Stepper::new(l, tol, n);
    let mut y = v0.to_vec();
    let mut t = t0;
    for &tn in times {
        if tn > t {
            stepper.advance(&mut y, t, tn)?;
            t = tn;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrates the master equation and re-validates every output state.
pub fn integrate(l: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory, LindbladError> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(LindbladError::DimensionMismatch { expected: d, got: rho0.dim() });
    }
    check_times(times)?;
    let n = d * d;
    let mut traj = Trajectory {
        times: times.to_vec(),
        states: Vec::with_capacity(times.len()),
        max_trace_deviation: 0.0,
        max_hermiticity_defect: 0.0,
        steps: 0,
    };
    let Some(&t0) = times.first() else { return Ok(traj) };
    let mut stepper = Stepper::new(l, Tolerances::default(), n);
    let mut y = rho0.to_vec();
    let mut t = t0;
    for &tn in times {
        if tn > t {
            stepper.advance(&mut y, t, tn)?;
            t = tn;
        }
        let raw = DensityMatrix::from_vec_unchecked(&y, d);
        traj.max_trace_deviation = traj.max_trace_deviation.max((raw.trace() - 1.0).norm());
        traj.max_hermiticity_defect = traj.max_hermiticity_defect.max(raw.hermiticity_defect());
        let clean = raw.cleaned();
        let min = clean.min_eigenvalue()?;
        if min < POSITIVITY_FLOOR {
            return Err(LindbladError::PositivityViolation { time: tn, min_eigenvalue: min });
        }
        traj.states.push(clean);
    }
    traj.steps = stepper.steps;
    Ok(traj)
}
