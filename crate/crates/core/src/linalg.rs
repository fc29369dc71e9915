//! Small dense helpers with deterministic ordering and sign conventions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const TIE: f64 = 1e-12;

/// Flips `v` so that its largest-magnitude component is positive.
/// Near-ties (within 1e-12) go to the lowest index.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, c) in v.iter().enumerate() {
        if c.abs() > best_abs + TIE {
            best = i;
            best_abs = c.abs();
        }
    }
    if best_abs > 0.0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending,
/// eigenvectors (columns) sign-fixed by [`fix_sign`].
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        fix_sign(&mut v);
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

/// Leading principal minors `det(m[..k,..k])`, k = 1..=n.
pub fn leading_minors(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).determinant()).collect()
}

/// Inner product with respect to the symmetric matrix `g`.
pub fn inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.transpose() * g * b)[0]
}

/// Gram–Schmidt with respect to `g`, then completion with coordinate
/// directions in index order. The first `vectors.len()` columns span the
/// same flags as the input.
pub fn orthonormal_completion(g: &DMatrix<f64>, vectors: &[DVector<f64>], tol: f64) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
    let push = |frame: &mut Vec<DVector<f64>>, v: &DVector<f64>| -> bool {
        let scale = inner(g, v, v).sqrt();
        let mut w = v.clone();
        // two passes for stability
        for _ in 0..2 {
            for e in frame.iter() {
                let c = inner(g, e, &w);
                w -= e * c;
            }
        }
        let norm = inner(g, &w, &w).max(0.0).sqrt();
        if norm <= tol * scale.max(1.0) {
            return false;
        }
        frame.push(w / norm);
        true
    };
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
        if !push(&mut frame, v) {
            return Err(Error::DependentInput);
        }
    }
    for i in 0..n {
        if frame.len() == n {
            break;
        }
        let mut axis = DVector::zeros(n);
        axis[i] = 1.0;
        push(&mut frame, &axis);
    }
    if frame.len() != n {
        return Err(Error::DependentInput);
    }
    Ok(DMatrix::from_columns(&frame))
}
