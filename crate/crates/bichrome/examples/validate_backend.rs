//! Check the Hopf, quasitriangular and ribbon axioms of the shipped backends
//! and of the non-factorizable Z/2 example.

use bichrome::backends;

fn main() {
    for (name, h) in [
        ("abelian_modular", backends::abelian_modular()),
        ("uqsl2", backends::uqsl2()),
        ("z2_transparent", backends::z2_transparent()),
    ] {
        let report = h.validate();
        let passed = report.checks.iter().filter(|c| c.pass).count();
        println!("{name}: {passed}/{} axioms, factorizable = {}", report.checks.len(), h.factorizability_check());
        if let Some(c) = report.first_failure() {
            println!("  first failure: {} at {:?}", c.name, c.witness);
        }
    }
}
