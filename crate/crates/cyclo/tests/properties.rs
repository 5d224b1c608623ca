use cyclo::{field, sym_int_signature, MatrixS, Scalar};
use proptest::prelude::*;

fn scalar12() -> impl Strategy<Value = Scalar> {
    (prop::collection::vec(-50i64..50, 4), 1i64..20).prop_map(|(c, d)| {
        let f = field(12);
        let mut s = Scalar::zero(f);
        for (k, x) in c.iter().enumerate() {
            s += &(&Scalar::root_of_unity(f, k as i64) * &Scalar::from_frac(f, *x, d).unwrap());
        }
        s
    })
}

fn small_matrix() -> impl Strategy<Value = MatrixS> {
    (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(-2i64..3, r * c).prop_map(move |v| {
            let f = field(12);
            MatrixS::from_fn(f, r, c, |i, j| {
                // mix in ζ so that ranks are computed over the field, not Q
                let x = v[i * c + j];
                if (i + j) % 3 == 0 { &Scalar::root_of_unity(f, 1) * &Scalar::from_int(f, x) } else { Scalar::from_int(f, x) }
            })
        })
    })
}

proptest! {
    #[test]
    fn field_axioms(a in scalar12(), b in scalar12(), c in scalar12()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if !b.is_zero() {
            prop_assert_eq!((&a * &b).div(&b).unwrap(), a.clone());
        }
    }

    #[test]
    fn text_round_trip(a in scalar12()) {
        let s = a.to_string();
        prop_assert_eq!(Scalar::parse(field(12), &s).unwrap(), a);
    }

    #[test]
    fn rank_nullity(m in small_matrix()) {
        let n = m.nullspace();
        prop_assert_eq!(m.rank() + n.cols(), m.cols());
        prop_assert!((&m * &n).is_zero());
    }

    #[test]
    fn signature_congruence_invariant(
        diag in prop::collection::vec(-3i64..4, 3),
        off in prop::collection::vec(-3i64..4, 3),
        u in prop::collection::vec(-2i64..3, 3),
    ) {
        let b = vec![
            vec![diag[0], off[0], off[1]],
            vec![off[0], diag[1], off[2]],
            vec![off[1], off[2], diag[2]],
        ];
        // unit upper triangular, hence unimodular
        let um = [[1, u[0], u[1]], [0, 1, u[2]], [0, 0, 1]];
        let mut c = vec![vec![0i64; 3]; 3];
        for i in 0..3 { for j in 0..3 {
            c[i][j] = (0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| um[k][i] * b[k][l] * um[l][j]).sum();
        }}
        prop_assert_eq!(sym_int_signature(&b).unwrap(), sym_int_signature(&c).unwrap());
    }
}
