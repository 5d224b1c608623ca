//! Solve for the modified trace on projectives and compare it with the
//! closed formula built from the integral.

use bichrome::backends;
use bichrome::eval::Session;

fn main() -> bichrome::Result<()> {
    let s = Session::new(backends::uqsl2())?;
    let sol = &s.trace.solution;
    println!("{} linear equations, solution space of dim {}", sol.equations, sol.nullity);
    let n = s.pd.eta1.matrix.try_mul(&s.pd.eps1.matrix)?;
    println!("t_P1(eta1 o eps1) = {}", s.trace(&s.pd.covers[0], &n)?);
    match s.oracle_mismatch()? {
        None => println!("agrees with the integral formula"),
        Some(m) => println!("disagrees: {m}"),
    }
    let bad = s.check_partial_traces(10, 3)?;
    println!("partial trace property: {} failures in 10 samples", bad.len());
    Ok(())
}
