//! Simple modules, their projective covers, the projective generator and the
//! stabilization constants of small quantum sl2 at a cube root of unity.

use bichrome::backends;
use bichrome::eval::Session;

fn main() -> bichrome::Result<()> {
    let s = Session::new(backends::uqsl2())?;
    let pd = &s.pd;
    println!("semisimple: {}", pd.semisimple);
    for (v, p) in pd.simples.iter().zip(&pd.covers) {
        println!("{} (dim {}) is covered by {} (dim {})", v.name, v.dim, p.name, p.dim);
    }
    println!("G has dim {}, End(G) has dim {}", pd.generator.dim, s.cat.hom_dim(&pd.generator, &pd.generator));
    let st = &s.stab;
    println!("Delta+ = {}, Delta- = {}", st.delta_plus, st.delta_minus);
    println!("D = {}, delta = {}, zeta = {}", st.d, st.delta, st.zeta);
    Ok(())
}
