//! Small dense helpers shared by the cone and multiplier code.
//!
//! Everything here works on `&[f64]` slices and `Vec<Vec<f64>>` column lists;
//! nalgebra is only used behind the scenes for SVD-based least squares.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Angle in radians between two nonzero vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

/// Flip the sign so the first entry with magnitude above `1e-12` is positive.
pub fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

fn columns_matrix(dim: usize, cols: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i])
}

/// Minimum-norm least-squares solution of `A s = b` where `A` has the given columns.
pub fn least_squares(dim: usize, cols: &[&[f64]], b: &[f64]) -> Vec<f64> {
    if cols.is_empty() {
        return Vec::new();
    }
    let a = columns_matrix(dim, cols);
    let rhs = DVector::from_column_slice(b);
    let svd = a.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    svd.solve(&rhs, eps)
        .map(|s| s.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; cols.len()])
}

/// Solution of a nonnegative least-squares problem.
#[derive(Debug, Clone)]
pub struct Nnls {
    pub coefficients: Vec<f64>,
    /// `sum coefficients[j] * cols[j]`, the projection of `b` onto the cone spanned by the columns.
    pub fitted: Vec<f64>,
    pub residual: f64,
}

/// Lawson–Hanson active-set NNLS: `min |sum a_j cols[j] - b|` over `a >= 0`.
///
/// With an empty column list the fitted vector is zero.
pub fn nnls(dim: usize, cols: &[Vec<f64>], b: &[f64]) -> Nnls {
    let k = cols.len();
    let zero = Nnls {
        coefficients: vec![0.0; k],
        fitted: vec![0.0; dim],
        residual: norm(b),
    };
    if k == 0 {
        return zero;
    }
    let scale_ref = norm(b).max(cols.iter().map(|c| norm(c)).fold(0.0, f64::max)).max(1e-300);
    let tol = 1e-13 * scale_ref * scale_ref;

    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];
    let fit = |x: &[f64]| {
        let mut r = vec![0.0; dim];
        for (j, c) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                axpy(&mut r, x[j], c);
            }
        }
        r
    };

    for _outer in 0..(3 * k + 10) {
        let r = sub(b, &fit(&x));
        let w: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &c| w[a].total_cmp(&w[c]));
        let Some(t) = candidate else { break };
        passive[t] = true;

        for _inner in 0..(3 * k + 10) {
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let sub_cols: Vec<&[f64]> = idx.iter().map(|&j| cols[j].as_slice()).collect();
            let s_p = least_squares(dim, &sub_cols, b);
            let mut s = vec![0.0; k];
            for (pos, &j) in idx.iter().enumerate() {
                s[j] = s_p[pos];
            }
            if idx.iter().all(|&j| s[j] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = 1.0f64;
            for &j in &idx {
                if s[j] <= 0.0 {
                    let denom = x[j] - s[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for j in 0..k {
                x[j] += alpha * (s[j] - x[j]);
            }
            for &j in &idx {
                if x[j] <= 1e-15 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    let fitted = fit(&x);
    let residual = dist(&fitted, b);
    Nnls {
        coefficients: x,
        fitted,
        residual,
    }
}

/// Orthonormal basis of the null space `{v : A v = 0}` for `A` given by rows.
pub fn null_space(dim: usize, rows: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    if dim == 0 {
        return Vec::new();
    }
    if rows.is_empty() {
        return (0..dim).map(|i| unit(dim, i)).collect();
    }
    let m = rows.len().max(dim);
    let a = DMatrix::from_fn(m, dim, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let thresh = rel_tol * smax.max(1e-300);
    let mut basis = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || *s <= thresh {
            basis.push(v_t.row(i).iter().copied().collect());
        }
    }
    basis
}

/// Numerical rank of the matrix with the given rows.
pub fn rank(dim: usize, rows: &[Vec<f64>], rel_tol: f64) -> usize {
    dim - null_space(dim, rows, rel_tol).len()
}

/// Gram–Schmidt orthonormal basis of the span of the given vectors.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let n = norm(&w);
        if n > tol {
            basis.push(scale(&w, 1.0 / n));
        }
    }
    basis
}
