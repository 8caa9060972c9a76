//! Small dense complex linear algebra: biorthogonal eigensystems and the
//! matrix exponential. Factorizations are delegated to `faer`.

use faer::linalg::solvers::Solve;
use faer::Mat;
use thiserror::Error;

use crate::C64;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("eigendecomposition did not converge")]
    NoConvergence,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
}

/// Relative eigenvalue gap below which the spectrum is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// `|L·R|` below which a pair is treated as a coalesced (defective) pair.
pub const BIORTHOGONAL_FLOOR: f64 = 1e-10;

/// Right and left eigenvectors of a non-Hermitian matrix.
///
/// Eigenvalues are sorted by real part (then imaginary part). Right vectors
/// have unit 2-norm with their largest component real and positive; left
/// vectors are row vectors of unit 2-norm, phased so that `Lₖ·Rₖ` (a plain
/// bilinear product, no conjugation) is real and non-negative.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: Vec<Vec<C64>>,
    pub left_vectors: Vec<Vec<C64>>,
    pub biorthogonal_norms: Vec<C64>,
    /// Set when two eigenvalues coalesce or some `|Lₖ·Rₖ|` underflows, i.e.
    /// when the spectral expansion cannot be trusted.
    pub defective: bool,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Coefficient of `v` along mode `k` in the biorthogonal expansion.
    pub fn projection(&self, k: usize, v: &[C64]) -> C64 {
        bilinear(&self.left_vectors[k], v) / self.biorthogonal_norms[k]
    }

    /// Smallest pairwise eigenvalue distance.
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                gap = gap.min((self.eigenvalues[i] - self.eigenvalues[j]).norm());
            }
        }
        gap
    }

    /// Reorders the modes to best match `previous`, by maximal right-vector
    /// overlap. Used for continuous band tracking across parameter sweeps.
    pub fn aligned_to(mut self, previous: &EigenSystem) -> EigenSystem {
        let n = self.dim();
        assert_eq!(n, previous.dim());
        let mut used = vec![false; n];
        let mut order = vec![0usize; n];
        for (k, slot) in order.iter_mut().enumerate() {
            let mut best = None;
            let mut best_overlap = -1.0;
            for (j, taken) in used.iter().enumerate() {
                if *taken {
                    continue;
                }
                let o = inner(&previous.right_vectors[k], &self.right_vectors[j]).norm();
                if o > best_overlap {
                    best_overlap = o;
                    best = Some(j);
                }
            }
            let j = best.expect("at least one unused mode");
            used[j] = true;
            *slot = j;
        }
        let take = |v: &mut Vec<Vec<C64>>| {
            let old = std::mem::take(v);
            *v = order.iter().map(|&j| old[j].clone()).collect();
        };
        take(&mut self.right_vectors);
        take(&mut self.left_vectors);
        self.eigenvalues = order.iter().map(|&j| self.eigenvalues[j]).collect();
        self.biorthogonal_norms = order.iter().map(|&j| self.biorthogonal_norms[j]).collect();
        self
    }
}

/// Plain bilinear product `Σ aᵢbᵢ`.
pub fn bilinear(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `Σ conj(aᵢ)bᵢ`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn mat_vec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    let y = m * faer::ColRef::from_slice(v);
    y.iter().copied().collect()
}

pub fn vec_mat(v: &[C64], m: &Mat<C64>) -> Vec<C64> {
    assert_eq!(m.nrows(), v.len());
    (0..m.ncols()).map(|j| v.iter().enumerate().map(|(i, vi)| vi * m[(i, j)]).sum()).collect()
}

pub fn solve(m: &Mat<C64>, b: &[C64]) -> Vec<C64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

pub fn determinant(m: &Mat<C64>) -> C64 {
    m.determinant()
}

fn normalize_right(v: &mut [C64]) {
    let n = norm2(v);
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    for x in v.iter_mut() {
        *x *= phase / n;
    }
}

fn columns(m: faer::MatRef<'_, C64>) -> Vec<Vec<C64>> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)]).collect()).collect()
}

/// Complete right/left eigendecomposition of a square complex matrix.
pub fn eigensystem(m: &Mat<C64>) -> Result<EigenSystem, LinalgError> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(LinalgError::NotSquare(n, m.ncols()));
    }
    let right = m.eigen().map_err(|_| LinalgError::NoConvergence)?;
    // left eigenvectors of M are right eigenvectors of Mᵀ
    let mt = m.transpose().to_owned();
    let left = mt.eigen().map_err(|_| LinalgError::NoConvergence)?;

    let r_vals: Vec<C64> = (0..n).map(|k| right.S()[k]).collect();
    let l_vals: Vec<C64> = (0..n).map(|k| left.S()[k]).collect();
    let r_vecs = columns(right.U());
    let l_vecs = columns(left.U());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| r_vals[a].re.total_cmp(&r_vals[b].re).then(r_vals[a].im.total_cmp(&r_vals[b].im)));

    let mut used = vec![false; n];
    let mut eigenvalues = Vec::with_capacity(n);
    let mut right_vectors = Vec::with_capacity(n);
    let mut left_vectors = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for &k in &order {
        let lam = r_vals[k];
        let mut rv = r_vecs[k].clone();
        normalize_right(&mut rv);
        // pair with the closest unused left eigenvalue; among near-ties take
        // the candidate with the largest biorthogonal overlap
        let best_dist = (0..n).filter(|&j| !used[j]).map(|j| (l_vals[j] - lam).norm()).fold(f64::INFINITY, f64::min);
        let scale = frobenius(m).max(1.0);
        let j = (0..n)
            .filter(|&j| !used[j] && (l_vals[j] - lam).norm() <= best_dist + DEGENERACY_GAP * scale)
            .max_by(|&a, &b| bilinear(&l_vecs[a], &rv).norm().total_cmp(&bilinear(&l_vecs[b], &rv).norm()))
            .expect("unused left eigenvector");
        used[j] = true;
        let mut lv = l_vecs[j].clone();
        let ln = norm2(&lv);
        lv.iter_mut().for_each(|x| *x /= ln);
        let overlap = bilinear(&lv, &rv);
        if overlap.norm() > 0.0 {
            let phase = overlap.conj() / overlap.norm();
            lv.iter_mut().for_each(|x| *x *= phase);
        }
        norms.push(bilinear(&lv, &rv));
        eigenvalues.push(lam);
        right_vectors.push(rv);
        left_vectors.push(lv);
    }

    let mut es = EigenSystem { eigenvalues, right_vectors, left_vectors, biorthogonal_norms: norms, defective: false };
    let scale = frobenius(m);
    es.defective = es.biorthogonal_norms.iter().any(|z| z.norm() < BIORTHOGONAL_FLOOR)
        || (n > 1 && es.min_gap() < DEGENERACY_GAP * scale);
    Ok(es)
}

fn one_norm(m: &Mat<C64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The scaled matrix has 1-norm ≤ 1/2, where 18 terms leave a truncation
/// error below 1e-22. Intended for small dense generators.
pub fn expm(a: &Mat<C64>) -> Mat<C64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let scaled = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    let mut result = Mat::<C64>::identity(n, n);
    let mut term = Mat::<C64>::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled;
        let inv = 1.0 / k as f64;
        for j in 0..n {
            for i in 0..n {
                term[(i, j)] *= inv;
            }
        }
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigensystem_satisfies_both_eigen_equations() {
        let m = Mat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 * 0.37 - 1.0, ((i + 2 * j) % 3) as f64 * 0.21 - 0.3));
        let es = eigensystem(&m).unwrap();
        let scale = frobenius(&m);
        for k in 0..3 {
            let mr = mat_vec(&m, &es.right_vectors[k]);
            let lm = vec_mat(&es.left_vectors[k], &m);
            for i in 0..3 {
                assert!((mr[i] - es.eigenvalues[k] * es.right_vectors[k][i]).norm() < 1e-10 * scale);
                assert!((lm[i] - es.eigenvalues[k] * es.left_vectors[k][i]).norm() < 1e-10 * scale);
            }
            for j in 0..3 {
                if j != k {
                    assert!(bilinear(&es.left_vectors[j], &es.right_vectors[k]).norm() < 1e-10);
                }
            }
        }
        assert!(!es.defective);
        assert!(es.eigenvalues.windows(2).all(|w| w[0].re <= w[1].re));
    }

    #[test]
    fn jordan_block_is_flagged() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c(0.0, -0.5),
            (1, 0) => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        let es = eigensystem(&m).unwrap();
        assert!(es.defective);
    }

    #[test]
    fn expm_matches_diagonal_and_nilpotent_cases() {
        let d = Mat::from_fn(2, 2, |i, j| if i == j { c(-(i as f64) - 0.3, 2.0) } else { c(0.0, 0.0) });
        let e = expm(&d);
        assert!((e[(0, 0)] - c(-0.3, 2.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-1.3, 2.0).exp()).norm() < 1e-14);
        // exp([[a,0],[b,a]]) = e^a [[1,0],[b,1]]
        let a = c(-0.5, 3.0);
        let b = c(0.0, -7.0);
        let j = Mat::from_fn(2, 2, |i, k| match (i, k) {
            (0, 0) | (1, 1) => a,
            (1, 0) => b,
            _ => c(0.0, 0.0),
        });
        let e = expm(&j);
        assert!((e[(0, 0)] - a.exp()).norm() < 1e-13);
        assert!((e[(1, 0)] - b * a.exp()).norm() < 1e-12);
        assert!(e[(0, 1)].norm() < 1e-13);
    }
}
