use faer::{Mat, Side};

use super::LindbladError;
use crate::C64;

/// Upper bound on the Hilbert-space dimension; the superoperator is its square.
pub const MAX_DIM: usize = 4096;

/// Emitters (two levels each) followed by the CCW and CW modes, each truncated
/// at `n_max` photons. Basis index `((q₁…q_k)·(n+1) + m)·(n+1) + p` for emitter
/// bits `q`, CCW count `m` and CW count `p`, the first emitter most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    n_qubits: usize,
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_qubits: usize, n_max: usize) -> Result<Self, LindbladError> {
        if n_qubits == 0 {
            return Err(LindbladError::InvalidSpace("at least one emitter is required"));
        }
        if n_max == 0 {
            return Err(LindbladError::InvalidSpace("n_max must be >= 1"));
        }
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .and_then(|q| q.checked_mul((n_max + 1).checked_mul(n_max + 1)?))
            .unwrap_or(usize::MAX);
        if dim > MAX_DIM {
            return Err(LindbladError::DimensionGuard { dim, max: MAX_DIM });
        }
        Ok(Self { n_qubits, n_max })
    }

    pub fn single_emitter(n_max: usize) -> Result<Self, LindbladError> {
        Self::new(1, n_max)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn qubit_dims(&self) -> Vec<usize> {
        vec![2; self.n_qubits]
    }

    pub fn total_dim(&self) -> usize {
        (1 << self.n_qubits) * (self.n_max + 1) * (self.n_max + 1)
    }

    /// Index of `|q₁…q_k⟩|m⟩_ccw|p⟩_cw` with `qubits[i] ∈ {0 (g), 1 (e)}`.
    pub fn index(&self, qubits: &[u8], m: usize, p: usize) -> usize {
        assert_eq!(qubits.len(), self.n_qubits);
        assert!(m <= self.n_max && p <= self.n_max);
        let q = qubits.iter().fold(0usize, |acc, &b| 2 * acc + usize::from(b));
        let n = self.n_max + 1;
        (q * n + m) * n + p
    }

    fn decode(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n_max + 1;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    pub fn ground_index(&self) -> usize {
        0
    }
}

/// Annihilation operators embedded in the full space.
#[derive(Clone, Debug)]
pub struct Operators {
    pub space: HilbertSpace,
    pub sigma_minus: Vec<Mat<C64>>,
    pub c_ccw: Mat<C64>,
    pub c_cw: Mat<C64>,
}

impl Operators {
    pub fn identity(&self) -> Mat<C64> {
        Mat::identity(self.space.total_dim(), self.space.total_dim())
    }
}

pub fn build_operators(space: &HilbertSpace) -> Operators {
    let d = space.total_dim();
    let nq = space.n_qubits;
    let mut sigma_minus = vec![Mat::<C64>::zeros(d, d); nq];
    let mut c_ccw = Mat::<C64>::zeros(d, d);
    let mut c_cw = Mat::<C64>::zeros(d, d);
    let n = space.n_max + 1;
    for col in 0..d {
        let (q, m, p) = space.decode(col);
        for (k, s) in sigma_minus.iter_mut().enumerate() {
            let bit = 1 << (nq - 1 - k);
            if q & bit != 0 {
                s[(((q ^ bit) * n + m) * n + p, col)] = C64::new(1.0, 0.0);
            }
        }
        if m > 0 {
            c_ccw[((q * n + m - 1) * n + p, col)] = C64::new((m as f64).sqrt(), 0.0);
        }
        if p > 0 {
            c_cw[((q * n + m) * n + p - 1, col)] = C64::new((p as f64).sqrt(), 0.0);
        }
    }
    Operators { space: *space, sigma_minus, c_ccw, c_cw }
}

/// Positive semidefinite, Hermitian, unit-trace operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Mat<C64>,
}

/// Validation thresholds for [`DensityMatrix::new`].
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-8;

impl DensityMatrix {
    pub fn new(matrix: Mat<C64>) -> Result<Self, LindbladError> {
        let rho = Self::new_unchecked(matrix);
        if rho.matrix.nrows() != rho.matrix.ncols() {
            return Err(LindbladError::InvalidState("matrix is not square".into()));
        }
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(LindbladError::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(LindbladError::InvalidState(format!("trace is {tr}")));
        }
        let min = rho.min_eigenvalue()?;
        if min < MIN_EIGENVALUE_TOL {
            return Err(LindbladError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(matrix: Mat<C64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self, LindbladError> {
        let n = psi.len();
        Self::new(Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = Mat::<C64>::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `tr(A ρ)`.
    pub fn expect(&self, op: &Mat<C64>) -> C64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                acc += op[(j, k)] * self.matrix[(k, j)];
            }
        }
        acc
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LindbladError> {
        let h = self.hermitized_matrix();
        let ev = h
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| LindbladError::Linalg(crate::linalg::LinalgError::NoConvergence))?;
        Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
    }

    fn hermitized_matrix(&self) -> Mat<C64> {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| 0.5 * (self.matrix[(i, j)] + self.matrix[(j, i)].conj()))
    }

    /// Column-stacked vector.
    pub fn to_vec(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d * d).map(|k| self.matrix[(k % d, k / d)]).collect()
    }

    pub(crate) fn from_vec_unchecked(v: &[C64], d: usize) -> Self {
        Self { matrix: Mat::from_fn(d, d, |i, j| v[i + d * j]) }
    }

    /// Hermitian part rescaled to unit trace.
    pub(crate) fn cleaned(&self) -> Self {
        let h = self.hermitized_matrix();
        let tr: f64 = (0..self.dim()).map(|i| h[(i, i)].re).sum();
        let d = self.dim();
        Self { matrix: Mat::from_fn(d, d, |i, j| h[(i, j)] / tr) }
    }
}
