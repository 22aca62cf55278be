//! Small dense symmetric eigenproblems (cyclic Jacobi).

use crate::scalar::Real;

pub type Matrix<F> = Vec<Vec<F>>;

/// Eigen-decomposition of a symmetric matrix. Returns eigenvalues in
/// descending order and the matching unit eigenvectors as columns.
pub fn symmetric_eigen<F: Real>(a: &Matrix<F>) -> (Vec<F>, Matrix<F>) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity::<F>(n);
    let eps = F::epsilon();
    for _ in 0..100 {
        let off: F = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: F = (0..n).map(|i| m[i][i] * m[i][i]).sum::<F>() + off;
        if off <= eps * eps * scale || off == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == F::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (F::of(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (mkp, mkq) = (row[p], row[q]);
                    row[p] = c * mkp - s * mkq;
                    row[q] = s * mkp + c * mkq;
                }
                let (head, tail) = m.split_at_mut(q);
                for (mpk, mqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*mpk, *mqk);
                    *mpk = c * a - s * b;
                    *mqk = s * a + c * b;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j][j]
            .partial_cmp(&m[i][i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

pub fn identity<F: Real>(n: usize) -> Matrix<F> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { F::one() } else { F::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<F: Real>(a: &Matrix<F>) -> Matrix<F> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn matmul<F: Real>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
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

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff<F: Real>(a: &Matrix<F>, b: &Matrix<F>) -> F {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (*p - *q).abs()))
        .fold(F::zero(), F::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        let (vals, vecs) = symmetric_eigen::<f64>(&vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_abs_diff_eq!(vals[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            vecs[0][0].abs(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn reconstructs_matrix() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -0.2],
            vec![0.5, -0.2, 1.0],
        ];
        let (vals, vecs) = symmetric_eigen(&a);
        let d: Matrix<f64> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { vals[i] } else { 0.0 }).collect())
            .collect();
        let back = matmul(&matmul(&vecs, &d), &transpose(&vecs));
        assert!(max_abs_diff(&a, &back) < 1e-12);
        let vtv = matmul(&transpose(&vecs), &vecs);
        assert!(max_abs_diff(&vtv, &identity(3)) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }
}
