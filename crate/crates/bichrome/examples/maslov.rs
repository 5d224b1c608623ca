//! Maslov indices of Lagrangian triples and the signature defect of a
//! composite cobordism.

use std::collections::BTreeMap;

use bichrome::topology::{compose_defects, maslov, random_lagrangian, CobordismHomology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bichrome::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in 1..=3 {
        let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
        for _ in 0..50 {
            let l: Vec<_> = (0..3).map(|_| random_lagrangian(g, &mut rng)).collect();
            let m = maslov(&l[0], &l[1], &l[2], g)?;
            assert_eq!(maslov(&l[1], &l[0], &l[2], g)?, -m);
            *hist.entry(m).or_default() += 1;
        }
        println!("genus {g}: values of mu over 50 random triples {hist:?}");
    }
    // on the torus, glue a cylinder to the mapping cylinder of the quarter turn a -> b
    let phi = vec![vec![0, -1], vec![1, 0]];
    let a = vec![vec![1], vec![0]];
    let diag = vec![vec![1], vec![1]];
    let cyl = CobordismHomology::identity(1);
    let turn = CobordismHomology::mapping_cylinder(&phi);
    println!("mu(a, a+b, b) = {}", maslov(&a, &diag, &vec![vec![0], vec![1]], 1)?);
    println!("defect of the composite with n = n' = 0: {}", compose_defects(0, 0, &a, &diag, &a, &cyl, &turn)?);
    Ok(())
}
