//! Dense complex linear algebra used throughout the crate.
//!
//! All matrices are row-major [`nalgebra`] dynamic matrices over
//! [`Complex64`]. Tensor factor indices are flattened row-major: for
//! factors of dimensions `(d0, d1, ...)` the composite index is
//! `(((i0 * d1) + i1) * d2 + i2) ...`.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

pub(crate) const ONE: Complex64 = Complex { re: 1.0, im: 0.0 };
pub(crate) const ZERO: Complex64 = Complex { re: 0.0, im: 0.0 };

/// Threshold below which a matrix is treated as Hermitian by
/// [`trace_norm`], and eigenvalue sums are skipped in spectral kernels.
pub(crate) const SPECTRAL_CUTOFF: f64 = 1e-12;

pub(crate) fn cplx(re: f64, im: f64) -> Complex64 {
    Complex { re, im }
}

/// Largest entrywise absolute value.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation from Hermiticity, max |M - M^dag|.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// (M + M^dag) / 2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized first; columns of the returned matrix are
/// the corresponding orthonormal eigenvectors.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(m);
    let decomp = sym.symmetric_eigen();
    let n = decomp.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| decomp.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Trace norm ‖M‖₁, the sum of singular values.
///
/// Hermitian inputs (within 1e-12 entrywise) go through a symmetric
/// eigendecomposition; general square inputs use the eigenvalues of
/// M^dag M, which is adequate for the tolerances used in this crate.
pub fn trace_norm(m: &CMatrix) -> f64 {
    assert!(m.is_square(), "trace norm requires a square matrix");
    if hermiticity_deviation(m) < SPECTRAL_CUTOFF {
        let (vals, _) = eigh(m);
        vals.iter().map(|v| v.abs()).sum()
    } else {
        let gram = m.adjoint() * m;
        let (vals, _) = eigh(&gram);
        vals.iter().map(|v| v.max(0.0).sqrt()).sum()
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of an operator on a tensor product with the given
/// factor dimensions, keeping the factors listed in `keep` (strictly
/// increasing). Panics on inconsistent inputs; callers validate.
pub fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "operator does not match factor dims");
    assert!(keep.windows(2).all(|w| w[0] < w[1]), "keep must be sorted");
    assert!(keep.iter().all(|&k| k < dims.len()), "keep out of range");

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();

    let offsets = |factors: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(out.len() * dims[f]);
            for &base in &out {
                for v in 0..dims[f] {
                    next.push(base + v * strides[f]);
                }
            }
            out = next;
        }
        out
    };
    let kept_offsets = offsets(keep);
    let traced_offsets = offsets(&traced);

    let kd = kept_offsets.len();
    let mut out = CMatrix::zeros(kd, kd);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Reorders tensor factors: output factor `j` is input factor `perm[j]`.
/// `dims` are the input factor dimensions; `perm` must be a permutation.
pub fn permute_factors(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "operator does not match factor dims");
    assert_eq!(perm.len(), dims.len(), "permutation length mismatch");
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        assert!(!seen[p], "perm is not a permutation");
        seen[p] = true;
    }

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();

    let mut map = vec![0usize; total];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        let mut rem = new_idx;
        let mut old_idx = 0usize;
        for (j, &nd) in new_dims.iter().enumerate() {
            let block: usize = new_dims[j + 1..].iter().product();
            let digit = rem / block;
            rem %= block;
            let _ = nd;
            old_idx += digit * strides[perm[j]];
        }
        *slot = old_idx;
    }

    let mut out = CMatrix::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            out[(r, c)] = m[(map[r], map[c])];
        }
    }
    out
}
