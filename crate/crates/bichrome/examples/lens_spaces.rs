//! Renormalized invariants of the lens spaces L(p,1) with a blue unknot.

use bichrome::backends;
use bichrome::diagrams::Diagram;
use bichrome::eval::Session;
use bichrome::topology::{l_prime, lens_space_fixture, oracles, SurgeryDatum};

fn main() -> bichrome::Result<()> {
    let ab = Session::new(backends::abelian_modular())?;
    let uq = Session::new(backends::uqsl2())?;
    for p in [-3i64, -2, 2, 3, 4, 5] {
        let m = SurgeryDatum::new(Diagram::parse(&lens_space_fixture(p))?, 0);
        let a = l_prime(&ab, &m)?;
        let want = oracles::abelian_lens(ab.field(), p);
        println!("L({p},1): abelian {a} (closed form {want}), uqsl2 {}", l_prime(&uq, &m)?);
    }
    Ok(())
}
