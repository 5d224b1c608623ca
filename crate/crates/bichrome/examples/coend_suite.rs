//! The coend of the representation category, its Hopf structure, and the
//! projective coends with their idempotents.

use bichrome::backends;
use bichrome::coend::{projective_checks, CoendData, ProjectiveCoend};
use bichrome::eval::Session;

fn main() -> bichrome::Result<()> {
    let s = Session::new(backends::abelian_modular())?;
    let c = CoendData::build(&s)?;
    println!("coend of dim {}", c.dim());
    let mut checks = c.checks(&s, 1);
    for v in s.pd.covers.clone() {
        let pc = ProjectiveCoend::build(&s, &c, &v)?;
        checks.extend(projective_checks(&s, &c, &pc, 1)?);
    }
    for ch in &checks {
        println!("[{}] {} {}", if ch.pass { "pass" } else { "FAIL" }, ch.name, ch.detail);
    }
    Ok(())
}
