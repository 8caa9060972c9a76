use faer::Mat;

use super::space::{build_operators, HilbertSpace, Operators};
use super::LindbladError;
use crate::model::{DriveParams, SystemParams};
use crate::C64;

/// Which cavity response the generator describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CavityModel {
    /// Mirror feedback from the CCW output into the CW mode.
    #[default]
    Cep,
    /// Same ring without the mirror: the chiral term is dropped.
    Lorentz,
}

/// Dense generator `L` with `d vec(ρ)/dt = L vec(ρ)`, plus a compressed copy
/// for fast products.
#[derive(Clone, Debug)]
pub struct Superoperator {
    matrix: Mat<C64>,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Superoperator {
    pub fn new(matrix: Mat<C64>, dim: usize) -> Self {
        assert_eq!(matrix.nrows(), dim * dim);
        assert_eq!(matrix.ncols(), dim * dim);
        let n = dim * dim;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = matrix[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { matrix, dim, row_ptr, cols, vals }
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    /// Hilbert-space dimension `d`; the matrix is `d² × d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *o = self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&j, x)| x * v[j]).sum();
        }
    }

    /// `vec(I)`, whose inner product with `vec(ρ)` is `tr ρ`.
    pub fn trace_vector(&self) -> Vec<C64> {
        let d = self.dim;
        (0..d * d).map(|k| if k % d == k / d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect()
    }

    /// Largest entry of `vec(I)ᵀ L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n).map(|j| (0..d).map(|i| self.matrix[(i + d * i, j)]).sum::<C64>().norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Accumulates terms of a superoperator without forming Kronecker products.
struct Builder {
    d: usize,
    m: Mat<C64>,
}

fn nonzeros(a: &Mat<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != C64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl Builder {
    fn new(d: usize) -> Self {
        Self { d, m: Mat::zeros(d * d, d * d) }
    }

    /// `ρ ↦ z A ρ`, i.e. `I ⊗ A`.
    fn pre(&mut self, z: C64, a: &Mat<C64>) {
        let d = self.d;
        for (i, k, v) in nonzeros(a) {
            for j in 0..d {
                self.m[(i + d * j, k + d * j)] += z * v;
            }
        }
    }

    /// `ρ ↦ z ρ B`, i.e. `Bᵀ ⊗ I`.
    fn post(&mut self, z: C64, b: &Mat<C64>) {
        let d = self.d;
        for (l, j, v) in nonzeros(b) {
            for i in 0..d {
                self.m[(i + d * j, i + d * l)] += z * v;
            }
        }
    }

    /// `ρ ↦ z A ρ B`, i.e. `Bᵀ ⊗ A`.
    fn sandwich(&mut self, z: C64, a: &Mat<C64>, b: &Mat<C64>) {
        let d = self.d;
        let bn = nonzeros(b);
        for (i, k, va) in nonzeros(a) {
            for &(l, j, vb) in &bn {
                self.m[(i + d * j, k + d * l)] += z * va * vb;
            }
        }
    }

    /// `−i[H, ρ]`.
    fn hamiltonian(&mut self, h: &Mat<C64>) {
        self.pre(C64::new(0.0, -1.0), h);
        self.post(C64::new(0.0, 1.0), h);
    }

    /// `rate · (cρc† − ½{c†c, ρ})`.
    fn dissipator(&mut self, rate: f64, c: &Mat<C64>) {
        if rate == 0.0 {
            return;
        }
        let cd = c.adjoint().to_owned();
        let cdc = &cd * c;
        let r = C64::new(rate, 0.0);
        self.sandwich(r, c, &cd);
        self.pre(-0.5 * r, &cdc);
        self.post(-0.5 * r, &cdc);
    }

    fn finish(self) -> Superoperator {
        Superoperator::new(self.m, self.d)
    }
}

fn dagger(m: &Mat<C64>) -> Mat<C64> {
    m.adjoint().to_owned()
}

fn scaled(z: C64, m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| z * m[(i, j)])
}

/// System Hamiltonian. Without a drive it is written in the lab frame; with a
/// drive `Ω(σ₊e^{−iω_L t} + h.c.)` on every emitter it is written in the frame
/// rotating at `ω_L`, where it is time independent.
pub fn hamiltonian(params: &SystemParams, drive: Option<&DriveParams>, ops: &Operators) -> Mat<C64> {
    let shift = drive.map_or(0.0, |d| d.omega_l);
    let mut h = Mat::<C64>::zeros(ops.space.total_dim(), ops.space.total_dim());
    let g = C64::new(params.g, 0.0);
    let modes = [&ops.c_ccw, &ops.c_cw];
    for c in modes {
        let cd = dagger(c);
        h += scaled(C64::new(params.omega_c - shift, 0.0), &(&cd * c));
    }
    for sm in &ops.sigma_minus {
        let sp = dagger(sm);
        h += scaled(C64::new(params.omega_0 - shift, 0.0), &(&sp * sm));
        for c in modes {
            let cd = dagger(c);
            h += scaled(g, &(&(&cd * sm) + &(&sp * c)));
        }
        if let Some(d) = drive {
            h += scaled(C64::new(d.amplitude, 0.0), &(&sp + sm));
        }
    }
    h
}

/// Cascaded master equation with independent decay of both modes and the
/// chiral feedback term `κ(e^{iφ}[c_ccw ρ, c_cw†] + e^{−iφ}[c_cw, ρ c_ccw†])`,
/// plus `γ 𝒟[σ₋]` per emitter.
pub fn build_generator(
    params: &SystemParams,
    drive: Option<&DriveParams>,
    space: &HilbertSpace,
) -> Result<Superoperator, LindbladError> {
    build_generator_with(params, drive, space, CavityModel::Cep)
}

pub fn build_generator_with(
    params: &SystemParams,
    drive: Option<&DriveParams>,
    space: &HilbertSpace,
    model: CavityModel,
) -> Result<Superoperator, LindbladError> {
    let space = HilbertSpace::new(space.n_qubits(), space.n_max())?;
    let ops = build_operators(&space);
    let mut b = Builder::new(space.total_dim());
    b.hamiltonian(&hamiltonian(params, drive, &ops));
    b.dissipator(params.kappa, &ops.c_ccw);
    b.dissipator(params.kappa, &ops.c_cw);
    for sm in &ops.sigma_minus {
        b.dissipator(params.gamma, sm);
    }
    if model == CavityModel::Cep {
        let e = C64::from_polar(params.kappa, params.phi);
        let cw_d = dagger(&ops.c_cw);
        let ccw_d = dagger(&ops.c_ccw);
        // e^{iφ}(c_ccw ρ c_cw† − c_cw† c_ccw ρ)
        b.sandwich(e, &ops.c_ccw, &cw_d);
        b.pre(-e, &(&cw_d * &ops.c_ccw));
        // e^{−iφ}(c_cw ρ c_ccw† − ρ c_ccw† c_cw)
        b.sandwich(e.conj(), &ops.c_cw, &ccw_d);
        b.post(-e.conj(), &(&ccw_d * &ops.c_cw));
    }
    Ok(b.finish())
}

/// The same dynamics written as a single collective jump
/// `κ𝒟[c_cw + e^{iφ}c_ccw]` with the coherent part
/// `H_casc = −(iκ/2)(e^{iφ} c_cw† c_ccw − h.c.)`. Manifestly of Lindblad form.
pub fn build_collective_generator(
    params: &SystemParams,
    drive: Option<&DriveParams>,
    space: &HilbertSpace,
) -> Result<Superoperator, LindbladError> {
    let space = HilbertSpace::new(space.n_qubits(), space.n_max())?;
    let ops = build_operators(&space);
    let e = C64::from_polar(1.0, params.phi);
    let x = &dagger(&ops.c_cw) * &ops.c_ccw;
    let casc = scaled(C64::new(0.0, -params.kappa / 2.0), &(&scaled(e, &x) - &scaled(e.conj(), &dagger(&x))));
    let h = &hamiltonian(params, drive, &ops) + &casc;
    let jump = &ops.c_cw + &scaled(e, &ops.c_ccw);
    let mut b = Builder::new(space.total_dim());
    b.hamiltonian(&h);
    b.dissipator(params.kappa, &jump);
    for sm in &ops.sigma_minus {
        b.dissipator(params.gamma, sm);
    }
    Ok(b.finish())
}
