//! Parse a bichrome diagram, evaluate it and take its renormalized value.

use bichrome::backends;
use bichrome::corpus;
use bichrome::diagrams::Diagram;
use bichrome::eval::Session;

fn main() -> bichrome::Result<()> {
    let s = Session::new(backends::uqsl2())?;
    for name in ["blue_P1_unknot.bg", "blue_hopf_P1_P2.bg", "O_plus.bg", "L_2_1.bg"] {
        let d = Diagram::parse(corpus::fixture(name).expect("shipped fixture"))?;
        let f = s.lrt_evaluate(&d)?.scalar();
        if s.is_admissible(&d)? {
            println!("{name}: F = {f}, F' = {}", s.renormalized_evaluate(&d)?);
        } else {
            println!("{name}: F = {f} (not admissible)");
        }
    }
    // an open graph: the trace of its endomorphism
    let cut = Diagram::parse(corpus::fixture("cut_coupon.bg").expect("shipped fixture"))?;
    println!("cut_coupon: t = {}", s.renormalized_cut(&cut)?);
    Ok(())
}
