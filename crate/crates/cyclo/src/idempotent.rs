//! Lifting idempotents modulo a nilpotent ideal.

use crate::matrix::MatrixS;
use crate::scalar::Scalar;
use crate::KernelError;

/// Lift `e0` (idempotent modulo an ideal with `I^nilpotency = 0`) to an exact idempotent
/// congruent to it, iterating e ← 3e² − 2e³.
///
/// Each step squares the defect e² − e, so ⌈log₂ nilpotency⌉ + 1 steps suffice for a
/// genuine nilpotent ideal; otherwise `NoConvergence`.
pub fn lift_idempotent(e0: &MatrixS, nilpotency: usize) -> Result<MatrixS, KernelError> {
    if !e0.is_square() {
        return Err(KernelError::ShapeMismatch(format!("idempotent of shape {:?}", e0.shape())));
    }
    let f = e0.field();
    let three = Scalar::from_int(f, 3);
    let two = Scalar::from_int(f, 2);
    let mut steps = 1;
    while (1usize << (steps - 1)) < nilpotency.max(1) {
        steps += 1;
    }
    let mut e = e0.clone();
    for _ in 0..=steps {
        let e2 = e.try_mul(&e)?;
        if e2 == e {
            return Ok(e);
        }
        let e3 = e2.try_mul(&e)?;
        e = e2.scale(&three).try_sub(&e3.scale(&two))?;
    }
    Err(KernelError::NoConvergence(steps + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field;

    #[test]
    fn fixed_points() {
        let f = field(4);
        let p = MatrixS::from_ints(f, &[vec![1, 0], vec![0, 0]]);
        assert_eq!(lift_idempotent(&p, 1).unwrap(), p);
        let z = MatrixS::zeros(f, 2, 2);
        assert_eq!(lift_idempotent(&z, 1).unwrap(), z);
    }

    #[test]
    fn upper_triangular_perturbation() {
        let f = field(4);
        // idempotent modulo the strictly upper triangular ideal (nilpotency 3)
        let e0 = MatrixS::from_ints(f, &[vec![1, 5, 7], vec![0, 0, 2], vec![0, 0, 1]]);
        let e = lift_idempotent(&e0, 3).unwrap();
        assert_eq!(&e * &e, e);
        for i in 0..3 {
            assert_eq!(e.get(i, i), e0.get(i, i));
            for j in 0..i {
                assert!(e.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn non_nilpotent_defect() {
        let f = field(4);
        let e0 = MatrixS::from_ints(f, &[vec![2, 0], vec![0, 0]]);
        assert!(matches!(lift_idempotent(&e0, 1), Err(KernelError::NoConvergence(_))));
    }
}
