//! Small dense linear algebra on row-major slices.
//!
//! Everything here works on matrices of a handful of rows (ambient dimension,
//! codimension, the 5×5 quadratic-fit system), so plain loops are enough.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Area of the parallelogram spanned by `u` and `v` in any dimension.
#[inline]
pub(crate) fn wedge_norm(u: &[f64], v: &[f64]) -> f64 {
    let uu = norm_sq(u);
    let vv = norm_sq(v);
    let uv = dot(u, v);
    (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the eigenvectors as rows of an
/// `n × n` row-major array.
pub(crate) fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (row, &col) in order.iter().enumerate() {
        values.push(m[col * n + col]);
        for k in 0..n {
            vectors[row * n + k] = v[k * n + col];
        }
    }
    (values, vectors)
}

/// Orthogonal polar factor of a square matrix, together with its smallest
/// singular value.
pub(crate) fn polar_factor(o: &[f64], m: usize) -> (Vec<f64>, f64) {
    if m == 1 {
        let s = if o[0] >= 0.0 { 1.0 } else { -1.0 };
        return (vec![s], o[0].abs());
    }
    // OᵀO = V S² Vᵀ, polar = O V S⁻¹ Vᵀ
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += o[k * m + i] * o[k * m + j];
            }
            gram[i * m + j] = s;
        }
    }
    let (vals, vecs) = sym_eigen(&gram, m);
    let min_sv = vals[m - 1].max(0.0).sqrt();
    if min_sv == 0.0 {
        return (vec![0.0; m * m], 0.0);
    }
    // inverse square root of the Gram matrix
    let mut inv_sqrt = vec![0.0; m * m];
    for (r, &lambda) in vals.iter().enumerate() {
        let w = 1.0 / lambda.sqrt();
        let e = &vecs[r * m..(r + 1) * m];
        for i in 0..m {
            for j in 0..m {
                inv_sqrt[i * m + j] += w * e[i] * e[j];
            }
        }
    }
    let mut p = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += o[i * m + k] * inv_sqrt[k * m + j];
            }
            p[i * m + j] = s;
        }
    }
    (p, min_sv)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_pivot_tol` times the largest
/// entry of `A`.
pub(crate) fn lu_solve(a: &[f64], n: usize, b: &[f64], rel_pivot_tol: f64) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let amax = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if amax == 0.0 {
        return None;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= rel_pivot_tol * amax {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

/// 2-norm condition number of a square matrix.
pub(crate) fn condition_number(a: &[f64], n: usize) -> f64 {
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[k * n + i] * a[k * n + j];
            }
            gram[i * n + j] = s;
        }
    }
    let (vals, _) = sym_eigen(&gram, n);
    let hi = vals[0].max(0.0);
    let lo = vals[n - 1].max(0.0);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}
