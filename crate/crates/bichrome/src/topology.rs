//! Surgery presentations and the renormalized invariant L'_C, signature
//! defect bookkeeping with Maslov indices, and genus 0 state-space ranks
//! from the L'_C pairing of vacuum fillings.

use num_rational::BigRational;
use rayon::prelude::*;

use crate::diagrams::{CouponValue, Diagram, Point};
use crate::error::{Error, Result};
use crate::eval::{Session, O_MINUS, O_PLUS};
use crate::repcat::Rep;
use cyclo::{field, sym_int_signature, sym_rational_signature, MatrixS, Scalar};

/// (number of red components, signature of the linking matrix).
pub fn linking_signature(d: &Diagram) -> Result<(usize, i64)> {
    let m = d.red_linking_matrix().map_err(|e| match e {
        Error::OpenRedComponent => Error::NotALink("a red component reaches the boundary".into()),
        other => other,
    })?;
    if m.is_empty() {
        return Ok((0, 0));
    }
    Ok((m.len(), sym_int_signature(&m)?))
}

/// A closed 3-manifold with an admissible graph and a signature defect,
/// given as one closed bichrome diagram per connected component.
#[derive(Clone, Debug)]
pub struct SurgeryDatum {
    pub components: Vec<Diagram>,
    pub defect: i64,
}

impl SurgeryDatum {
    pub fn new(d: Diagram, defect: i64) -> SurgeryDatum {
        SurgeryDatum { components: vec![d], defect }
    }

    pub fn disjoint_union(&self, other: &SurgeryDatum) -> SurgeryDatum {
        SurgeryDatum {
            components: self.components.iter().chain(&other.components).cloned().collect(),
            defect: self.defect + other.defect,
        }
    }

    /// Add a distant ±1-framed red unknot to the first component, stacked
    /// below it so that the slice width does not grow.
    pub fn stabilized(&self, positive: bool) -> Result<SurgeryDatum> {
        let o = Diagram::parse(if positive { O_PLUS } else { O_MINUS })?;
        let mut out = self.clone();
        if let Some(first) = out.components.first_mut() {
            *first = o.compose(first)?;
        }
        Ok(out)
    }
}

/// L'_C(M) = δⁿ ∏ D^{-1-ℓ} δ^{-σ} F'_Λ over the components.
pub fn l_prime(sess: &Session, m: &SurgeryDatum) -> Result<Scalar> {
    let st = &sess.stab;
    let mut acc = st.delta.pow(m.defect)?;
    for (i, d) in m.components.iter().enumerate() {
        if !d.is_closed()? {
            return Err(Error::NotClosed);
        }
        if !sess.is_admissible(d)? {
            return Err(Error::NotAdmissible(format!(" (component {i})")));
        }
        let (l, sigma) = linking_signature(d)?;
        let fp = sess.renormalized_evaluate(d)?;
        acc = &acc * &(&(&st.d.pow(-1 - l as i64)? * &st.delta.pow(-sigma)?) * &fp);
    }
    Ok(acc)
}

/// L'_C is unchanged by a distant O₊, a distant O₋ and both.
pub fn stabilization_invariance_check(sess: &Session, m: &SurgeryDatum) -> Result<bool> {
    let base = l_prime(sess, m)?;
    let plus = m.stabilized(true)?;
    let minus = m.stabilized(false)?;
    let both = plus.stabilized(false)?;
    for v in [plus, minus, both] {
        if l_prime(sess, &v)? != base {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---- Lagrangians and Maslov indices ----

fn q() -> &'static cyclo::Field {
    field(1)
}

fn to_q(m: &[Vec<i64>]) -> MatrixS {
    let rows: Vec<Vec<i64>> = m.to_vec();
    MatrixS::from_ints(q(), &rows)
}

/// ω(x, y) on R^{2g} with coordinates (a₁..a_g, b₁..b_g).
fn omega_form(x: &[Scalar], y: &[Scalar], g: usize) -> Scalar {
    let mut s = Scalar::zero(q());
    for i in 0..g {
        s += &(&x[i] * &y[g + i]);
        s -= &(&x[g + i] * &y[i]);
    }
    s
}

/// Check that the columns of a 2g×k integer matrix span a Lagrangian subspace.
pub fn check_lagrangian(l: &[Vec<i64>], g: usize) -> Result<()> {
    if l.len() != 2 * g {
        return Err(Error::NotLagrangian(format!("expected {} rows, got {}", 2 * g, l.len())));
    }
    let m = to_q(l);
    if m.rank() != g {
        return Err(Error::NotLagrangian(format!("rank {} instead of {g}", m.rank())));
    }
    for i in 0..m.cols() {
        for j in 0..i {
            if !omega_form(&m.col(i), &m.col(j), g).is_zero() {
                return Err(Error::NotLagrangian(format!("columns {j} and {i} pair nontrivially")));
            }
        }
    }
    Ok(())
}

/// Maslov index in Wall's convention: the signature of ψ(x, y) = ω(x₁, y₂)
/// on {(x₁, x₂, x₃) ∈ λ₁⊕λ₂⊕λ₃ : x₁ + x₂ + x₃ = 0}.
pub fn maslov(l1: &[Vec<i64>], l2: &[Vec<i64>], l3: &[Vec<i64>], g: usize) -> Result<i64> {
    for l in [l1, l2, l3] {
        check_lagrangian(l, g)?;
    }
    let (a, b, c) = (to_q(l1), to_q(l2), to_q(l3));
    let all = a.hstack(&b)?.hstack(&c)?;
    let ns = all.nullspace();
    let k = ns.cols();
    let (ka, kb) = (a.cols(), b.cols());
    let x1: Vec<Vec<Scalar>> = (0..k).map(|i| a.apply(&ns.col(i)[..ka]).expect("shape")).collect();
    let x2: Vec<Vec<Scalar>> = (0..k).map(|i| b.apply(&ns.col(i)[ka..ka + kb]).expect("shape")).collect();
    let form: Vec<Vec<BigRational>> = (0..k)
        .map(|i| (0..k).map(|j| omega_form(&x1[i], &x2[j], g).as_rational().expect("rational")).collect())
        .collect();
    Ok(sym_rational_signature(&form)?)
}

/// Homology of a cobordism M : Σ → Σ' as the two maps H₁(Σ) → H₁(M) and
/// H₁(Σ') → H₁(M) (integer matrices with H₁(M) rows).
#[derive(Clone, Debug)]
pub struct CobordismHomology {
    pub incoming: Vec<Vec<i64>>,
    pub outgoing: Vec<Vec<i64>>,
}

impl CobordismHomology {
    /// The cylinder over a surface of genus g.
    pub fn identity(g: usize) -> CobordismHomology {
        let id: Vec<Vec<i64>> = (0..2 * g).map(|i| (0..2 * g).map(|j| (i == j) as i64).collect()).collect();
        CobordismHomology { incoming: id.clone(), outgoing: id }
    }

    /// Mapping cylinder of a homeomorphism with homology matrix `phi`.
    pub fn mapping_cylinder(phi: &[Vec<i64>]) -> CobordismHomology {
        let n = phi.len();
        let id: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
        CobordismHomology { incoming: phi.to_vec(), outgoing: id }
    }
}

/// A Lagrangian of R^{2g}: the image of span(a₁..a_g) under a few random
/// symplectic shears [[I, S], [0, I]] and [[I, 0], [S, I]], S symmetric.
pub fn random_lagrangian<R: rand::Rng>(g: usize, rng: &mut R) -> Vec<Vec<i64>> {
    let mut cols: Vec<Vec<i64>> = (0..g).map(|j| (0..2 * g).map(|i| (i == j) as i64).collect()).collect();
    for _ in 0..4 {
        let mut sym = vec![vec![0i64; g]; g];
        for i in 0..g {
            for j in i..g {
                let v = rng.gen_range(-1..=1);
                sym[i][j] = v;
                sym[j][i] = v;
            }
        }
        let upper = rng.gen_bool(0.5);
        for c in &mut cols {
            let (a, b) = c.split_at_mut(g);
            let (src, dst) = if upper { (&*b, a) } else { (&*a, b) };
            let add: Vec<i64> = (0..g).map(|i| (0..g).map(|j| sym[i][j] * src[j]).sum()).collect();
            for (d, x) in dst.iter_mut().zip(add) {
                *d += x;
            }
        }
    }
    (0..2 * g).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// {x : A x ∈ B(λ)}, as an integer basis.
fn preimage(a: &[Vec<i64>], b: &[Vec<i64>], lam: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let am = to_q(a);
    let bl = to_q(b).try_mul(&to_q(lam))?;
    let sys = am.hstack(&bl.scale(&Scalar::from_int(q(), -1)))?;
    let ns = sys.nullspace();
    let n = am.cols();
    let xs = MatrixS::from_fn(q(), n, ns.cols(), |i, j| ns.get(i, j).clone()).column_basis();
    let mut cols: Vec<Vec<i64>> = Vec::new();
    for j in 0..xs.cols() {
        let v: Vec<BigRational> = xs.col(j).iter().map(|s| s.as_rational().expect("rational")).collect();
        let mut den = num_bigint::BigInt::from(1);
        for r in &v {
            den = num_integer::Integer::lcm(&den, r.denom());
        }
        cols.push(
            v.iter()
                .map(|r| {
                    let x = r * BigRational::from_integer(den.clone());
                    i64::try_from(x.to_integer()).map_err(|_| Error::NotLagrangian("entries overflow".into()))
                })
                .collect::<Result<Vec<i64>>>()?,
        );
    }
    Ok((0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
}

/// n + n' − μ(M_*(λ), λ', (M')^*(λ'')) for M : Σ → Σ' and M' : Σ' → Σ''.
pub fn compose_defects(
    n: i64,
    n2: i64,
    lam: &[Vec<i64>],
    lam_mid: &[Vec<i64>],
    lam_out: &[Vec<i64>],
    m: &CobordismHomology,
    m2: &CobordismHomology,
) -> Result<i64> {
    let g = lam_mid.len() / 2;
    let push = preimage(&m.outgoing, &m.incoming, lam)?;
    let pull = preimage(&m2.incoming, &m2.outgoing, lam_out)?;
    check_lagrangian(&push, g)?;
    check_lagrangian(&pull, g)?;
    Ok(n + n2 - maslov(&push, lam_mid, &pull, g)?)
}

// ---- state spaces ----

/// A surface with signed labeled marked points and a Lagrangian.
#[derive(Clone, Debug)]
pub struct DecoratedSurface {
    pub genus: usize,
    pub points: Vec<Point>,
    /// 2g×g integer matrix whose columns span λ.
    pub lagrangian: Vec<Vec<i64>>,
}

impl DecoratedSurface {
    pub fn sphere(points: Vec<Point>) -> DecoratedSurface {
        DecoratedSurface { genus: 0, points, lagrangian: vec![] }
    }
}

/// The L'_C pairing between vacuum fillings of a surface.
#[derive(Clone, Debug)]
pub struct PairingProblem {
    pub surface: DecoratedSurface,
    pub in_family: Vec<SurgeryDatum>,
    pub out_family: Vec<SurgeryDatum>,
    /// matrix[i][j] = L'_C(out_j ∘ in_i)
    pub matrix: MatrixS,
}

impl PairingProblem {
    /// Fill the matrix from the given families; `jobs` bounds the parallelism.
    pub fn build(
        sess: &Session,
        surface: DecoratedSurface,
        in_family: Vec<SurgeryDatum>,
        out_family: Vec<SurgeryDatum>,
        jobs: usize,
    ) -> Result<PairingProblem> {
        let (r, c) = (in_family.len(), out_family.len());
        let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
        let eval = |&(i, j): &(usize, usize)| -> Result<Scalar> { l_prime(sess, &glue(&in_family[i], &out_family[j])?) };
        let vals: Vec<Scalar> = if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Usage(e.to_string()))?;
            pool.install(|| cells.par_iter().map(eval).collect::<Result<Vec<_>>>())?
        } else {
            cells.iter().map(eval).collect::<Result<Vec<_>>>()?
        };
        let matrix = MatrixS::from_vec(sess.field(), r, c, vals)?;
        Ok(PairingProblem { surface, in_family, out_family, matrix })
    }

    /// Pairing of the disjoint union of two surfaces with tensored families;
    /// every entry is recomputed from the two-component surgery datum.
    pub fn disjoint_union(&self, other: &PairingProblem, sess: &Session, jobs: usize) -> Result<PairingProblem> {
        let pairs = |a: &[SurgeryDatum], b: &[SurgeryDatum]| -> Vec<SurgeryDatum> {
            a.iter().flat_map(|x| b.iter().map(move |y| x.disjoint_union(y))).collect()
        };
        let surface = DecoratedSurface {
            genus: self.surface.genus + other.surface.genus,
            points: self.surface.points.iter().chain(&other.surface.points).cloned().collect(),
            lagrangian: vec![],
        };
        PairingProblem::build(
            sess,
            surface,
            pairs(&self.in_family, &other.in_family),
            pairs(&self.out_family, &other.out_family),
            jobs,
        )
    }
}

/// Glue an out-filling on top of an in-filling, component by component.
fn glue(a: &SurgeryDatum, b: &SurgeryDatum) -> Result<SurgeryDatum> {
    if a.components.len() != b.components.len() {
        return Err(Error::Usage("fillings have different numbers of components".into()));
    }
    let components = a.components.iter().zip(&b.components).map(|(x, y)| x.compose(y)).collect::<Result<Vec<_>>>()?;
    Ok(SurgeryDatum { components, defect: a.defect + b.defect })
}

/// Dimension of the image of the in-family in the state space.
pub fn state_space_rank(p: &PairingProblem) -> usize {
    p.matrix.rank()
}

fn basis_coeffs(k: usize, n: usize) -> Vec<String> {
    (0..n).map(|i| if i == k { "1".into() } else { "0".into() }).collect()
}

/// Default genus 0 fillings: one coupon 1 → points over a hom basis, and
/// its reflection, rebound over a basis of the reflected hom space.
/// `extra` adds that many random combinations to each family.
pub fn sphere_pairing(sess: &Session, labels: &[Point], extra: usize, seed: u64, jobs: usize) -> Result<PairingProblem> {
    if !labels.iter().any(|p| sess.label_is_projective(&Diagram::default(), &p.label)) {
        return Err(Error::NoProjectiveLabel);
    }
    let reps: Vec<Rep> = labels.iter().map(|p| sess.point_rep(&Diagram::default(), p)).collect::<Result<_>>()?;
    let target = sess.cat.tensor_all(&reps);
    let n_in = sess.cat.hom_dim(&sess.cat.trivial, &target);
    let n_out = sess.cat.hom_dim(&target, &sess.cat.trivial);
    let pts = labels.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
    let in_text = format!("# vacuum filling\ncoupon a : 1 -> {pts} = unbound\ncoupon(a)\n");
    let template = Diagram::parse(&in_text)?;
    let mirror = template.reflect()?;
    let mirror_name = mirror.coupons.first().map(|c| c.name.clone()).ok_or_else(|| Error::Parse("reflection lost its coupon".into()))?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut coeff_sets = |n: usize| -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> = (0..n).map(|k| basis_coeffs(k, n)).collect();
        for _ in 0..extra {
            v.push((0..n).map(|_| rand::Rng::gen_range(&mut rng, -3i64..=3).to_string()).collect());
        }
        v
    };
    let mut fam = |base: &Diagram, name: &str, n: usize| -> Result<Vec<SurgeryDatum>> {
        coeff_sets(n)
            .into_iter()
            .map(|c| {
                let mut d = base.clone();
                d.bind(name, CouponValue::Basis(c))?;
                Ok(SurgeryDatum::new(d, 0))
            })
            .collect()
    };
    let ins = fam(&template, "a", n_in)?;
    let outs = fam(&mirror, &mirror_name, n_out)?;
    PairingProblem::build(sess, DecoratedSurface::sphere(labels.to_vec()), ins, outs, jobs)
}

/// Rank of the Gram matrix D⁻¹ t_V(f'∘f) for f ∈ C(V, V'), f' ∈ C(V', V).
pub fn circle_hom_rank(sess: &Session, v: &Rep, w: &Rep) -> Result<(usize, MatrixS)> {
    for x in [v, w] {
        if !sess.is_projective_rep(x)? {
            return Err(Error::NotProjective(x.name.clone()));
        }
    }
    let fs = sess.cat.hom_basis(v, w);
    let gs = sess.cat.hom_basis(w, v);
    let dinv = sess.stab.d.inv()?;
    let mut vals = Vec::with_capacity(fs.len() * gs.len());
    for g in &gs {
        for f in &fs {
            vals.push(&dinv * &sess.trace(v, &g.matrix.try_mul(&f.matrix)?)?);
        }
    }
    let m = MatrixS::from_vec(sess.field(), gs.len(), fs.len(), vals)?;
    Ok((m.rank(), m))
}

/// The lens space L(p,1) as a p-framed red unknot next to a blue P_1 unknot
/// carrying η_1∘ε_1.
pub fn lens_space_fixture(p: i64) -> String {
    let mut s = format!("# L({p},1) with a blue P1 unknot\ncoupon n : P1+ -> P1+ = eta1eps1\nred:cup(+) cup(P1+)\n");
    let tw = if p > 0 { "tw+" } else { "tw-" };
    for k in 0..p.unsigned_abs() {
        if k == 0 {
            s.push_str(&format!("{tw} red:id(-) coupon(n) id(P1-)\n"));
        } else {
            s.push_str(&format!("{tw} red:id(-) id(P1+) id(P1-)\n"));
        }
    }
    if p == 0 {
        s.push_str("red:id(+) red:id(-) coupon(n) id(P1-)\n");
    }
    s.push_str("cap cap\n");
    s
}

/// Closed-form values the invariants are compared against.
pub mod oracles {
    use cyclo::{Field, Scalar};

    /// L'_C(L(p,1), blue P_1 unknot with η_1∘ε_1) for the pointed Z/3 theory
    /// with θ_j = ω^{j²}, D = √3, δ = i: D⁻² δ^{-sgn p} Σ_j θ_j^p.
    pub fn abelian_lens(f: &'static Field, p: i64) -> Scalar {
        let n = f.order() as i64;
        let w = n / 3;
        let mut gauss = Scalar::zero(f);
        for j in 0..3i64 {
            gauss += &Scalar::root_of_unity(f, (w * p * j * j).rem_euclid(n));
        }
        let d = Scalar::root_of_unity(f, 1) + Scalar::root_of_unity(f, -1);
        let delta = Scalar::root_of_unity(f, n / 4);
        let d2inv = (&d * &d).inv().expect("nonzero");
        &(&d2inv * &delta.pow(-p.signum()).expect("unit")) * &gauss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends;

    fn g1(a: i64, b: i64) -> Vec<Vec<i64>> {
        vec![vec![a], vec![b]]
    }

    #[test]
    fn linking_basics() {
        assert_eq!(linking_signature(&Diagram::parse(O_PLUS).unwrap()).unwrap(), (1, 1));
        assert_eq!(linking_signature(&Diagram::parse(O_MINUS).unwrap()).unwrap(), (1, -1));
        let unlink = Diagram::parse("red:cup(+) red:cup(+)\ncap cap\n").unwrap();
        assert_eq!(linking_signature(&unlink).unwrap(), (2, 0));
        let open = Diagram::parse("in: red+\nred:id(+)\n").unwrap();
        assert!(matches!(linking_signature(&open), Err(Error::NotALink(_))));
    }

    #[test]
    fn curl_matches_twist() {
        // a red unknot with one self-crossing curl, against the twist convention
        let s = Session::new(backends::uqsl2()).unwrap();
        for (tok, expect_pos) in [("x+", false), ("x-", true)] {
            let t = format!("red:cup(+) red:cup(+)\nred:id(+) {tok} red:id(-)\nred:id(+) cap red:id(-)\ncap\n");
            let d = Diagram::parse(&t).unwrap();
            let (l, sig) = linking_signature(&d).unwrap();
            assert_eq!((l, sig), (1, if expect_pos { 1 } else { -1 }));
            let v = s.lrt_evaluate(&d).unwrap().scalar();
            let want = if expect_pos { &s.stab.delta_plus } else { &s.stab.delta_minus };
            assert_eq!(&v, want, "{tok}");
        }
    }

    #[test]
    fn maslov_conventions() {
        let (a, b, c) = (g1(1, 0), g1(0, 1), g1(1, 1));
        assert_eq!(maslov(&a, &a, &a, 1).unwrap(), 0);
        let m = maslov(&a, &b, &c, 1).unwrap();
        assert_eq!(m.abs(), 1);
        assert_eq!(maslov(&b, &a, &c, 1).unwrap(), -m);
        assert!(matches!(maslov(&vec![vec![1], vec![0], vec![0], vec![0]], &a, &a, 1), Err(Error::NotLagrangian(_))));
    }

    #[test]
    fn defects_compose() {
        let a = g1(1, 0);
        let id = CobordismHomology::identity(1);
        assert_eq!(compose_defects(2, 3, &a, &a, &a, &id, &id).unwrap(), 5);
    }

    #[test]
    fn l_prime_normalization() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let d = Diagram::parse("coupon n : P1+ -> P1+ = eta1eps1\ncup(P1+)\ncoupon(n) id(P1-)\ncap\n").unwrap();
        let m = SurgeryDatum::new(d, 0);
        assert_eq!(l_prime(&s, &m).unwrap(), s.stab.d.inv().unwrap());
        let m1 = SurgeryDatum { defect: 1, ..m.clone() };
        assert_eq!(l_prime(&s, &m1).unwrap(), &s.stab.delta * &s.stab.d.inv().unwrap());
        assert!(stabilization_invariance_check(&s, &m).unwrap());
    }

    #[test]
    fn lens_spaces_match_gauss_sums() {
        let s = Session::new(backends::abelian_modular()).unwrap();
        for p in 2..=5 {
            let d = Diagram::parse(&lens_space_fixture(p)).unwrap();
            let v = l_prime(&s, &SurgeryDatum::new(d, 0)).unwrap();
            assert_eq!(v, oracles::abelian_lens(s.field(), p), "p = {p}");
        }
    }

    #[test]
    fn circle_gram() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let p1 = s.pd.covers[0].clone();
        let (r, _) = circle_hom_rank(&s, &p1, &p1).unwrap();
        assert_eq!(r, s.cat.hom_dim(&p1, &p1));
        let v2 = s.pd.simples[1].clone();
        assert!(matches!(circle_hom_rank(&s, &v2, &v2), Err(Error::NotProjective(_))));
    }

    #[test]
    fn sphere_two_points() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let labels = [Point::blue("P2", true), Point::blue("P1", false)];
        let p = sphere_pairing(&s, &labels, 0, 1, 1).unwrap();
        let (v, w) = (s.pd.covers[0].clone(), s.pd.covers[1].clone());
        assert_eq!(state_space_rank(&p), s.cat.hom_dim(&v, &w));
    }
}
