//! Ranks of the genus 0 pairing between families of bounding graphs.

use bichrome::backends;
use bichrome::diagrams::Point;
use bichrome::eval::Session;
use bichrome::topology::{sphere_pairing, state_space_rank};

fn main() -> bichrome::Result<()> {
    let s = Session::new(backends::uqsl2())?;
    let cases: [&[Point]; 3] = [
        &[Point::blue("P1", true), Point::blue("P1", false)],
        &[Point::blue("P1", true), Point::blue("V2", true), Point::blue("P2", false)],
        &[Point::blue("P2", true), Point::blue("V1", true), Point::blue("P2", false)],
    ];
    for labels in cases {
        let p = sphere_pairing(&s, labels, 1, 7, 1)?;
        let names: Vec<String> = labels.iter().map(|x| x.to_string()).collect();
        println!("S^2 with {}: {}x{} pairing, rank {}", names.join(" "), p.out_family.len(), p.in_family.len(), state_space_rank(&p));
    }
    Ok(())
}
