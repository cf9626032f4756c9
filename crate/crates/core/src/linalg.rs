//! Thin helpers over nalgebra for the small dense matrices used here.

use nalgebra::DMatrix;

pub(crate) type Mat = Vec<Vec<f64>>;

pub(crate) fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(r, c, |i, j| m[i][j])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn inverse(m: &[Vec<f64>]) -> Option<Mat> {
    to_dmatrix(m).try_inverse().map(|inv| from_dmatrix(&inv))
}

pub(crate) fn singular_values(m: &[Vec<f64>]) -> Vec<f64> {
    to_dmatrix(m).singular_values().iter().copied().collect()
}

/// Numerical rank with relative threshold `rel_tol * σ_max`.
pub(crate) fn rank(m: &[Vec<f64>], rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * max).count()
}

pub(crate) fn condition_number(m: &[Vec<f64>]) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    let min = sv.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    to_dmatrix(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

pub(crate) fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub(crate) fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

/// g-orthogonal projector onto the image of `op`, for a positive-definite
/// `g`. Returns `None` when `g` has no Cholesky factor.
pub(crate) fn metric_image_projector(op: &[Vec<f64>], g: &[Vec<f64>], rel_tol: f64) -> Option<Mat> {
    let chol = to_dmatrix(g).cholesky()?;
    let l = chol.l();
    let lt = l.transpose();
    let lt_inv = lt.clone().try_inverse()?;
    // components in a g-orthonormal basis: v' = Lᵀ v
    let op_on = &lt * to_dmatrix(op) * &lt_inv;
    let svd = op_on.svd(true, false);
    let u = svd.u?;
    let max = svd.singular_values.iter().fold(0.0_f64, |a, b| a.max(*b));
    let dim = g.len();
    let mut p = DMatrix::zeros(dim, dim);
    if max > 0.0 {
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > rel_tol * max {
                let col = u.column(k);
                p += col * col.transpose();
            }
        }
    }
    Some(from_dmatrix(&(lt_inv * p * lt)))
}
