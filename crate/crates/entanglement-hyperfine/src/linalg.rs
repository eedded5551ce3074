//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Each eigenvector is rotated so that its largest-magnitude component is real
/// and positive (first index wins on ties), which makes downstream fields
/// reproducible across runs.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, z) in v.iter().enumerate() {
            let a = z.norm();
            if a > best_abs * (1.0 + 1e-12) {
                best = i;
                best_abs = a;
            }
        }
        let phase = if best_abs > 0.0 {
            v[best].conj() / best_abs
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, col)] = v[i] * phase;
        }
        vectors[(best, col)] = C64::new(vectors[(best, col)].norm(), 0.0);
    }
    (values, vectors)
}

/// Real symmetric eigendecomposition, ascending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `V diag(d) V^dagger`.
pub fn reassemble(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &d) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(d);
    }
    &scaled * vectors.adjoint()
}

/// Occupied-mode correlation matrix `M_ij = sum_occ conj(phi_i) phi_j` from the
/// columns `occ` of an eigenvector matrix.
pub fn slater_correlation(vectors: &CMatrix, occ: &[usize]) -> CMatrix {
    let n = vectors.nrows();
    let mut phi = CMatrix::zeros(n, occ.len());
    for (c, &o) in occ.iter().enumerate() {
        phi.set_column(c, &vectors.column(o));
    }
    phi.map(|z| z.conj()) * phi.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_orders_and_fixes_phase() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.5),
                C64::new(0.0, -0.5),
                C64::new(0.5, 0.0),
            ],
        );
        let (vals, vecs) = eigh(&m);
        assert!((vals[0]).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        for c in 0..2 {
            let col = vecs.column(c);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = col.iter().find(|z| z.norm() >= big * (1.0 - 1e-12)).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
        assert!(max_abs_diff(&reassemble(&vals, &vecs), &m) < 1e-14);
    }
}
