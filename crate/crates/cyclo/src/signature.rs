//! Signatures of symmetric rational forms by congruence diagonalization.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::KernelError;

/// Signature of an integer symmetric matrix.
pub fn sym_int_signature(b: &[Vec<i64>]) -> Result<i64, KernelError> {
    let m: Vec<Vec<BigRational>> =
        b.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    sym_rational_signature(&m)
}

/// Signature (#positive − #negative) of a rational symmetric matrix.
pub fn sym_rational_signature(b: &[Vec<BigRational>]) -> Result<i64, KernelError> {
    let n = b.len();
    if b.iter().any(|r| r.len() != n) {
        return Err(KernelError::ShapeMismatch(format!("signature of a non-square {n}-row matrix")));
    }
    for i in 0..n {
        for j in 0..i {
            if b[i][j] != b[j][i] {
                return Err(KernelError::NotSymmetric);
            }
        }
    }
    let mut a = b.to_vec();
    let mut sig = 0i64;
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // row_k += row_j and col_k += col_j gives a[k][k] = 2 a[k][j]
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else {
                continue;
            }
        }
        let p = a[k][k].clone();
        if p.is_zero() {
            continue;
        }
        sig += if p.is_positive() { 1 } else { -1 };
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for c in k..n {
                let v = &f * &a[k][c];
                a[i][c] -= v;
            }
            for r in k..n {
                let v = &f * &a[r][k];
                a[r][i] -= v;
            }
        }
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(sym_int_signature(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]]).unwrap(), 1);
        assert_eq!(sym_int_signature(&vec![vec![0; 3]; 3]).unwrap(), 0);
        assert_eq!(sym_int_signature(&[vec![0, 1], vec![1, 0]]).unwrap(), 0);
        assert_eq!(sym_int_signature(&[vec![0, 1], vec![2, 0]]), Err(KernelError::NotSymmetric));
        assert_eq!(sym_int_signature(&[vec![2, 1], vec![1, 2]]).unwrap(), 2);
        assert_eq!(sym_int_signature(&[vec![1, 2], vec![2, 1]]).unwrap(), 0);
    }
}
