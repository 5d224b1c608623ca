//! Idempotent and additive completions of a finite linear category, and
//! dominating sets among the projective modules of uqsl2.

use bichrome::backends;
use bichrome::completion::{c_equivalence_check, CatPresentation};
use bichrome::eval::Session;

fn main() -> bichrome::Result<()> {
    let a = CatPresentation::idempotent_algebra();
    let k = a.default_karoubi()?;
    println!("k[t]/(t^2-t): Karoubi objects {}", k.objects.join(", "));
    let sums = a.additive_completion(&[vec![0], vec![0, 0]])?;
    println!("dim Hom(x, x+x) in the additive completion = {}", sums.dims[0][1]);

    let s = Session::new(backends::uqsl2())?;
    let mut objs = s.pd.covers.clone();
    objs.push(s.pd.generator.clone());
    let proj = CatPresentation::from_reps(&s.cat, &objs)?;
    let g = proj.len() - 1;
    println!("{{G}} dominates {}: {}", proj.objects.join(", "), proj.dominates(&[g]));
    let (sub, emb) = proj.full_subcategory(&[g])?;
    println!("{{G}} -> Proj is a c-equivalence: {}", c_equivalence_check(&sub, &proj, &emb));
    Ok(())
}
