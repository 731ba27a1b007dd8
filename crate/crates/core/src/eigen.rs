//! Cyclic Jacobi diagonalization of small dense symmetric matrices.

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Convergence: off-diagonal Frobenius mass below this fraction of `||A||_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;

/// Eigen-decomposition of a symmetric matrix.
///
/// `vectors` is row-major `n x n`; column `j` is the eigenvector of `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

/// Diagonalizes the row-major symmetric `n x n` matrix `a`.
///
/// Eigenvalues come back ascending. Each eigenvector is normalized with its
/// largest-magnitude component positive (the lowest index wins a tie).
pub fn jacobi_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&m, n);
        if off <= OFF_DIAGONAL_TOLERANCE * scale {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_diagonal: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]).then(i.cmp(&j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        values.push(m[src * n + src]);
        let mut pivot = 0;
        for r in 1..n {
            if v[r * n + src].abs() > v[pivot * n + src].abs() {
                pivot = r;
            }
        }
        let sign = if v[pivot * n + src] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[r * n + col] = sign * v[r * n + src];
        }
    }
    Ok(SymmetricEigen { values, vectors, sweeps })
}

/// One Jacobi rotation annihilating `m[p][q]`, accumulated into `v`.
fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m[k * n + p] = new_kp;
        m[p * n + k] = new_kp;
        m[k * n + q] = new_kq;
        m[q * n + k] = new_kq;
    }
    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[i * n + j] * m[i * n + j];
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let e = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // column 1 = (1, 1)/sqrt(2); column 0 = (1, -1)/sqrt(2) with first entry winning the tie
        assert!((e.vectors[1] - r).abs() < 1e-15 && (e.vectors[3] - r).abs() < 1e-15);
        assert!((e.vectors[0] - r).abs() < 1e-15 && (e.vectors[2] + r).abs() < 1e-15);
    }

    #[test]
    fn diagonal_input_is_exact() {
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = (n - i) as f64 + 0.5;
        }
        let e = jacobi_eigen(&a, n).unwrap();
        assert_eq!(e.sweeps, 0);
        for (i, v) in e.values.iter().enumerate() {
            assert_eq!(*v, i as f64 + 1.5);
        }
    }

    #[test]
    fn reconstructs_random_matrix() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        let mut seed = 7u64;
        for i in 0..n {
            for j in 0..=i {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let e = jacobi_eigen(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k]).sum();
                assert!((r - a[i * n + j]).abs() < 1e-13);
                let o: f64 = (0..n).map(|k| e.vectors[k * n + i] * e.vectors[k * n + j]).sum();
                assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(matches!(jacobi_eigen(&[1.0; 5], 2), Err(Error::DimensionMismatch { .. })));
    }
}
