//! The acceptance battery: one entry per criterion, run on the shipped
//! manifests and fixture corpus. Shared by the `selftest` subcommand and the
//! acceptance test target.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::backends;
use crate::coend::{projective_checks, CoendData, ProjectiveCoend};
use crate::completion::{c_equivalence_check, CatPresentation};
use crate::corpus;
use crate::diagrams::{Diagram, Point};
use crate::error::{Error, Result};
use crate::eval::Session;
use crate::repcat::Rep;
use crate::topology::{
    circle_hom_rank, compose_defects, linking_signature, l_prime, maslov, oracles, random_lagrangian, sphere_pairing,
    stabilization_invariance_check, state_space_rank, CobordismHomology, SurgeryDatum,
};
use cyclo::{MatrixS, Scalar};

/// Result of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Outcome {
    /// One report line: `[PASS] 3 modified trace: ...`.
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {}", self.id, self.title, self.detail)
    }
}

pub const TITLES: [&str; 12] = [
    "backend validation",
    "modularity",
    "modified trace",
    "topological invariance",
    "semisimple cross-check",
    "non-semisimple vanishing",
    "genus 0 state spaces",
    "circle category",
    "projective coend suite",
    "meridian cutting identity",
    "completion machinery",
    "Maslov and defect bookkeeping",
];

/// Both shipped backends with their sessions.
pub struct Backends {
    pub abelian: Session,
    pub uq: Session,
}

impl Backends {
    pub fn load() -> Result<Backends> {
        let load = |n: &str| -> Result<Session> {
            let h = corpus::shipped(n).ok_or_else(|| Error::Usage(format!("no shipped backend {n}")))??;
            Session::new(h.validated()?)
        };
        Ok(Backends { abelian: load("abelian_modular")?, uq: load("uqsl2")? })
    }

    pub fn both(&self) -> [(&'static str, &Session); 2] {
        [("abelian_modular", &self.abelian), ("uqsl2", &self.uq)]
    }
}

type Verdict = Result<(bool, String)>;

fn timed(id: usize, f: impl FnOnce() -> Verdict) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome { id, title: TITLES[id - 1], pass, detail, elapsed: t.elapsed() }
}

/// Collects named sub-results and reports the failing ones.
#[derive(Default)]
struct Tally {
    total: usize,
    failed: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, name: impl Into<String>) {
        self.total += 1;
        if !ok {
            self.failed.push(name.into());
        }
    }

    fn verdict(self, summary: impl Into<String>) -> (bool, String) {
        let s = summary.into();
        if self.failed.is_empty() {
            (true, format!("{} checks; {s}", self.total))
        } else {
            (false, format!("{}/{} failed: {}; {s}", self.failed.len(), self.total, self.failed.join("; ")))
        }
    }
}

fn parse(name: &str) -> Result<Diagram> {
    Diagram::parse(corpus::fixture(name).ok_or_else(|| Error::Usage(format!("missing fixture {name}")))?)
}

/// Closed admissible fixtures of the corpus, for a given session.
pub fn admissible_corpus(s: &Session) -> Result<Vec<(&'static str, Diagram)>> {
    let mut out = Vec::new();
    for (name, text) in corpus::FIXTURES {
        let d = Diagram::parse(text)?;
        if d.is_closed()? && s.is_admissible(&d)? {
            out.push((*name, d));
        }
    }
    Ok(out)
}

pub fn criterion_1() -> Outcome {
    timed(1, || {
        let mut t = Tally::default();
        let mut notes = Vec::new();
        for name in ["abelian_modular", "uqsl2"] {
            let start = Instant::now();
            let h = corpus::shipped(name).ok_or_else(|| Error::Usage(name.into()))??;
            let report = h.validate();
            let secs = start.elapsed().as_secs_f64();
            t.check(report.all_pass(), format!("{name}: {:?}", report.first_failure().map(|c| &c.name)));
            t.check(secs < 10.0, format!("{name} validation took {secs:.1}s"));
            let s = Session::new(h)?;
            let e = s.pd.eps1.matrix.try_mul(&s.pd.eta1.matrix)?;
            let zero = e.get(0, 0).is_zero();
            t.check(zero != s.pd.semisimple, format!("{name}: ε_1∘η_1 = {}", e.get(0, 0)));
            t.check(s.pd.semisimple == (name == "abelian_modular"), format!("{name}: semisimplicity"));
            notes.push(format!("{name} {} axioms in {secs:.2}s, ε_1∘η_1 = {}", report.checks.len(), e.get(0, 0)));
        }
        let mut bad = backends::abelian_modular();
        let v = bad.mul_basis(1, 1).first().map(|(_, s)| s + &Scalar::one(bad.f)).expect("nonempty product");
        bad = bad.with_mult_entry(1, 1, 0, v);
        t.check(!bad.validate().all_pass(), "corrupted manifest accepted");
        Ok(t.verdict(notes.join(", ")))
    })
}

pub fn criterion_2(b: &Backends) -> Outcome {
    timed(2, || {
        let mut t = Tally::default();
        for (name, s) in b.both() {
            let st = &s.stab;
            t.check(s.cat.h.factorizability_check(), format!("{name} factorizable"));
            t.check(!st.delta_plus.is_zero() && !st.delta_minus.is_zero(), format!("{name} Δ± ≠ 0"));
            t.check(&st.d * &st.d == &st.delta_plus * &st.delta_minus, format!("{name} D² = Δ₊Δ₋"));
            t.check(&st.d * &st.delta == st.delta_plus && &st.delta * &st.delta_minus == st.d, format!("{name} δ = Δ₊/D = D/Δ₋"));
            let c = CoendData::build(s)?;
            t.check(c.s.rank() == c.dim(), format!("{name} S invertible"));
            let ss = c.s.try_mul(&c.s_prime)?;
            t.check(ss == MatrixS::identity(s.field(), c.dim()).scale(&c.zeta), format!("{name} S∘S' = ζ"));
        }
        t.check(!backends::z2_transparent().factorizability_check(), "Z/2 with trivial R reported factorizable");
        Ok(t.verdict(format!(
            "Δ± = ({}, {}) and ({}, {})",
            b.abelian.stab.delta_plus, b.abelian.stab.delta_minus, b.uq.stab.delta_plus, b.uq.stab.delta_minus
        )))
    })
}

/// The Gram matrix t_V(g∘f) of C(V, W) × C(W, V).
pub fn trace_gram(s: &Session, v: &Rep, w: &Rep) -> Result<MatrixS> {
    let fs = s.cat.hom_basis(v, w);
    let gs = s.cat.hom_basis(w, v);
    let mut vals = Vec::new();
    for g in &gs {
        for f in &fs {
            vals.push(s.trace(v, &g.matrix.try_mul(&f.matrix)?)?);
        }
    }
    Ok(MatrixS::from_vec(s.field(), gs.len(), fs.len(), vals)?)
}

pub fn criterion_3(b: &Backends) -> Outcome {
    timed(3, || {
        let mut t = Tally::default();
        let mut ranks = Vec::new();
        for (name, s) in b.both() {
            t.check(s.trace.solution.nullity == 1, format!("{name} nullity {}", s.trace.solution.nullity));
            let p1 = &s.pd.covers[0];
            let n = s.pd.eta1.matrix.try_mul(&s.pd.eps1.matrix)?;
            t.check(s.trace(p1, &n)?.is_one(), format!("{name} t_P1(η_1∘ε_1) ≠ 1"));
            t.check(s.renormalized_cut(&parse("cut_coupon.bg")?)?.is_one(), format!("{name} cut_coupon.bg ≠ 1"));
            t.check(s.oracle_mismatch()?.is_none(), format!("{name} differs from the integral oracle"));
            let c = &s.pd.covers;
            let g = &s.pd.generator;
            let k = c.len();
            let candidates = [(&c[0], &c[0]), (&c[0], &c[1 % k]), (&c[1 % k], &c[1 % k]), (&c[1 % k], &c[2 % k]), (&c[0], g), (&c[2 % k], g), (g, g)];
            let pairs: Vec<_> = candidates.into_iter().filter(|(v, w)| s.cat.hom_dim(v, w) > 0).take(5).collect();
            t.check(pairs.len() == 5, format!("{name}: only {} pairs with nonzero homs", pairs.len()));
            for (v, w) in pairs {
                let m = trace_gram(s, v, w)?;
                let full = m.rows() == m.cols() && m.rank() == m.rows() && m.rows() == s.cat.hom_dim(v, w);
                t.check(full, format!("{name} Gram({}, {}) rank {} of {:?}", v.name, w.name, m.rank(), m.shape()));
                ranks.push(m.rank().to_string());
            }
        }
        Ok(t.verdict(format!("Gram ranks {}", ranks.join(" "))))
    })
}

pub fn criterion_4(b: &Backends) -> Outcome {
    timed(4, || {
        let mut t = Tally::default();
        let mut cuts = 0;
        let mut stabs = 0;
        for (name, s) in b.both() {
            let corpus = admissible_corpus(s)?;
            for (fname, d) in &corpus {
                let edges = s.projective_edges(d)?;
                let vals = edges.iter().map(|&e| s.renormalized_at(d, e)).collect::<Result<Vec<_>>>()?;
                cuts += vals.len();
                t.check(vals.windows(2).all(|w| w[0] == w[1]), format!("{name} {fname}: cuts disagree"));
            }
            for (fname, d) in corpus.iter().take(10) {
                let m = SurgeryDatum::new(d.clone(), 0);
                stabs += 1;
                t.check(stabilization_invariance_check(s, &m)?, format!("{name} {fname}: stabilization"));
            }
            t.check(corpus.len() >= 10, format!("{name}: only {} admissible fixtures", corpus.len()));
            for w in corpus.windows(2).take(5) {
                let (a, bb) = (SurgeryDatum::new(w[0].1.clone(), 1), SurgeryDatum::new(w[1].1.clone(), -2));
                let la = l_prime(s, &a)?;
                let lb = l_prime(s, &bb)?;
                t.check(l_prime(s, &a.disjoint_union(&bb))? == &la * &lb, format!("{name} {} ⊔ {}", w[0].0, w[1].0));
                // linking data of the red parts adds up when the diagrams are stacked
                let (la_, sa) = linking_signature(&w[0].1)?;
                let (lb_, sb) = linking_signature(&w[1].1)?;
                t.check(linking_signature(&w[0].1.compose(&w[1].1)?)? == (la_ + lb_, sa + sb), format!("{name} linking additivity"));
            }
        }
        Ok(t.verdict(format!("{cuts} cuts compared, {stabs} fixtures stabilized with O₊, O₋ and both")))
    })
}

pub fn criterion_5(b: &Backends) -> Outcome {
    timed(5, || {
        let s = &b.abelian;
        let mut t = Tally::default();
        let mut vals = Vec::new();
        for p in 2..=5 {
            let d = parse(&format!("L_{p}_1.bg"))?;
            let v = l_prime(s, &SurgeryDatum::new(d, 0))?;
            let want = oracles::abelian_lens(s.field(), p);
            t.check(v == want, format!("L({p},1): {v} vs {want}"));
            vals.push(v.to_string());
        }
        Ok(t.verdict(vals.join(" | ")))
    })
}

pub fn criterion_6(b: &Backends) -> Outcome {
    timed(6, || {
        let d = parse("unknot0_red.bg")?;
        let v = b.uq.closed_value(&d)?;
        let w = b.abelian.closed_value(&d)?;
        let adm = b.uq.is_admissible(&parse("unknot0_red_plus_blueP1.bg")?)?;
        let lp = l_prime(&b.uq, &SurgeryDatum::new(parse("unknot0_red_plus_blueP1.bg")?, 0))?;
        Ok((v.is_zero() && !w.is_zero() && adm && lp.is_zero(), format!("uqsl2 F_Λ = {v}, L'(S¹×S² with P1 unknot) = {lp}; abelian F_Λ = {w}")))
    })
}

pub fn criterion_7(b: &Backends, jobs: usize) -> Outcome {
    timed(7, || {
        let mut t = Tally::default();
        let mut ranks = Vec::new();
        for (name, s) in b.both() {
            let covers = s.pd.covers.clone();
            for v in &covers {
                for w in &covers {
                    let labels = [Point::blue(&w.name, true), Point::blue(&v.name, false)];
                    let p = sphere_pairing(s, &labels, 0, 1, jobs)?;
                    let r = state_space_rank(&p);
                    t.check(r == s.cat.hom_dim(v, w), format!("{name} ({}, {}) rank {r}", v.name, w.name));
                    ranks.push(r.to_string());
                }
            }
        }
        let s = &b.uq;
        let triples = [("P1", "V2", "P2"), ("V2", "P2", "P1"), ("P3", "V2", "P2"), ("V2", "V2", "P3"), ("V2", "V3", "P2")];
        for (x, y, w) in triples {
            let labels = [Point::blue(x, true), Point::blue(y, true), Point::blue(w, false)];
            let p = sphere_pairing(s, &labels, 0, 2, jobs)?;
            let r = state_space_rank(&p);
            let rep = |n: &str| s.pd.lookup(n).cloned().ok_or_else(|| Error::UnknownLabel(n.into()));
            let want = s.cat.hom_dim(&rep(w)?, &s.cat.tensor(&rep(x)?, &rep(y)?));
            t.check(r == want, format!("uqsl2 ({x}⊗{y}, {w}) rank {r} vs {want}"));
            ranks.push(format!("{x}{y}{w}:{r}"));
        }
        for (name, s) in b.both() {
            let p3 = s.pd.covers.last().expect("covers").name.clone();
            let a = sphere_pairing(s, &[Point::blue("P1", true), Point::blue("P1", false)], 1, 3, jobs)?;
            let c = sphere_pairing(s, &[Point::blue(&p3, true), Point::blue(&p3, false)], 1, 4, jobs)?;
            let u = a.disjoint_union(&c, s, jobs)?;
            let (ra, rc, ru) = (state_space_rank(&a), state_space_rank(&c), state_space_rank(&u));
            t.check(ru == ra * rc, format!("{name} Kronecker {ru} vs {ra}·{rc}"));
            ranks.push(format!("⊔:{ru}"));
        }
        Ok(t.verdict(format!("ranks {}", ranks.join(" "))))
    })
}

pub fn criterion_8(b: &Backends) -> Outcome {
    timed(8, || {
        let mut t = Tally::default();
        let mut n = 0;
        for (name, s) in b.both() {
            let covers = s.pd.covers.clone();
            for v in &covers {
                for w in &covers {
                    let (r, _) = circle_hom_rank(s, v, w)?;
                    n += 1;
                    t.check(r == s.cat.hom_dim(v, w), format!("{name} ({}, {}) rank {r}", v.name, w.name));
                }
            }
        }
        Ok(t.verdict(format!("{n} cover pairs")))
    })
}

pub fn criterion_9(b: &Backends) -> Outcome {
    timed(9, || {
        let mut t = Tally::default();
        let mut parts = Vec::new();
        for (name, s) in b.both() {
            let c = CoendData::build(s)?;
            for ch in c.checks(s, 11) {
                t.check(ch.pass, format!("{name} {} {}", ch.name, ch.detail));
            }
            for v in s.pd.covers.clone() {
                let pc = ProjectiveCoend::build(s, &c, &v)?;
                for ch in projective_checks(s, &c, &pc, 5)? {
                    t.check(ch.pass, format!("{name} {} {}", ch.name, ch.detail));
                }
            }
            let pc = ProjectiveCoend::build(s, &c, &s.pd.covers[0])?;
            match pc.factor_boxtimes(&s.cat, &s.pd.generator) {
                Ok(f) => parts.push(format!("{name}: {} ⊠-terms", f.len())),
                Err(e) => t.check(false, format!("{name} ⊠-factorization: {e}")),
            }
            let x = s.pd.simples[1].clone();
            let diag = pc.i_xv_diagram(s, &x.name, &pc.v.name)?;
            t.check(diag == pc.i_xv(&s.cat, &x).to_dense(), format!("{name} i_X,V diagram vs closed form"));
        }
        Ok(t.verdict(parts.join(", ")))
    })
}

/// The two closed graphs compared by the meridian identity, with a coupon f
/// on G given by hom-basis coordinates.
pub fn meridian_pair(coeffs: &[String]) -> (String, String) {
    let head = format!("coupon f : G+ -> G+ = basis({})\n", coeffs.join(", "));
    let t1 = format!(
        "{head}cup(G+)\nred:cup(+) id(G+) id(G-)\nred:id(+) x+ id(G-)\nred:id(+) x+ id(G-)\ncap id(G+) id(G-)\ncoupon(f) id(G-)\ncap\n"
    );
    let t2 = format!(
        "{head}coupon p : G+ -> 1 = pi1\ncoupon i : 1 -> G+ = iota1\ncup(G+)\ncoupon(f) id(G-)\ncoupon(p) id(G-)\ncoupon(i) id(G-)\ncap\n"
    );
    (t1, t2)
}

pub fn criterion_10(b: &Backends) -> Outcome {
    timed(10, || {
        let mut t = Tally::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (name, s) in b.both() {
            let n = s.cat.hom_dim(&s.pd.generator, &s.pd.generator);
            for k in 0..5 {
                let coeffs: Vec<String> = (0..n).map(|_| rng.gen_range(-4i64..=4).to_string()).collect();
                let (t1, t2) = meridian_pair(&coeffs);
                let a = l_prime(s, &SurgeryDatum::new(Diagram::parse(&t1)?, 0))?;
                let c = l_prime(s, &SurgeryDatum::new(Diagram::parse(&t2)?, 0))?;
                t.check(a == &s.stab.d * &c, format!("{name} sample {k}: {a} vs D·{c}"));
            }
        }
        Ok(t.verdict("L'(meridian around G) = D·L'(π_1, ι_1 splitting)"))
    })
}

pub fn criterion_11(b: &Backends) -> Outcome {
    timed(11, || {
        let mut t = Tally::default();
        let a = CatPresentation::idempotent_algebra();
        let k = a.default_karoubi()?;
        let split: Vec<usize> = (0..k.len()).filter(|&i| k.objects[i] != a.objects[0]).collect();
        t.check(split.len() == 2, format!("{} split objects", split.len()));
        if split.len() == 2 {
            let (p, q) = (split[0], split[1]);
            t.check(k.dims[p][p] == 1 && k.dims[q][q] == 1 && k.dims[p][q] == 0 && k.dims[q][p] == 0, "summands not orthogonal and simple");
            t.check(k.dominates(&split) && !k.dominates(&[p]) && !k.dominates(&[q]), "domination of the split pair");
        }
        let sums = a.additive_completion(&[vec![0], vec![0, 0]])?;
        t.check(sums.dims[1][0] == 2 * a.dims[0][0] && sums.dims[1][1] == 4 * a.dims[0][0], "additive hom dimensions");
        let s = &b.uq;
        let mut objs = vec![s.cat.trivial.clone()];
        objs.extend(s.pd.covers.iter().cloned());
        objs.push(s.pd.generator.clone());
        let pres = CatPresentation::from_reps(&s.cat, &objs)?;
        let proj_objs: Vec<usize> = (1..objs.len()).collect();
        let (proj, _) = pres.full_subcategory(&proj_objs)?;
        let g = proj.len() - 1;
        t.check(proj.dominates(&[g]), "dominates({G}) false on Proj");
        t.check(!pres.dominates(&[0]), "dominates({1}) true");
        t.check(pres.dominates_objects(&[objs.len() - 1], &proj_objs), "{G} does not dominate the projectives inside {1} ∪ Proj");
        t.check(!pres.dominates_objects(&[0], &proj_objs), "{1} dominates the projectives");
        let (sub, emb) = proj.full_subcategory(&[g])?;
        t.check(c_equivalence_check(&sub, &proj, &emb), "embedding of {G} not a c-equivalence");
        let (sub1, emb1) = proj.full_subcategory(&[0])?;
        t.check(!c_equivalence_check(&sub1, &proj, &emb1), "embedding of {P1} accepted");
        Ok(t.verdict(format!("Karoubi objects {:?}", k.objects)))
    })
}

pub fn criterion_12() -> Outcome {
    timed(12, || {
        let mut t = Tally::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut nonzero = 0;
        for k in 0..100 {
            let g = 1 + k % 3;
            let l: Vec<Vec<Vec<i64>>> = (0..4).map(|_| random_lagrangian(g, &mut rng)).collect();
            let m = |a: usize, b: usize, c: usize| maslov(&l[a], &l[b], &l[c], g);
            let m012 = m(0, 1, 2)?;
            if m012 != 0 {
                nonzero += 1;
            }
            t.check(m(0, 0, 0)? == 0, format!("#{k} μ(λ,λ,λ)"));
            t.check(m(1, 0, 2)? == -m012 && m(0, 2, 1)? == -m012, format!("#{k} antisymmetry"));
            let cocycle = m(1, 2, 3)? - m(0, 2, 3)? + m(0, 1, 3)? - m012;
            t.check(cocycle == 0, format!("#{k} cocycle {cocycle}"));
            let id = CobordismHomology::identity(g);
            let (n, n2) = (rng.gen_range(-5..=5), rng.gen_range(-5..=5));
            t.check(compose_defects(n, n2, &l[0], &l[0], &l[0], &id, &id)? == n + n2, format!("#{k} identity gluing"));
        }
        t.check(nonzero > 0, "every sampled triple has μ = 0");
        Ok(t.verdict(format!("100 samples, g ≤ 3, {nonzero} with μ ≠ 0")))
    })
}

/// Every criterion in order.
pub fn run_all(jobs: usize) -> Vec<Outcome> {
    let mut out = Vec::new();
    run_each(jobs, |o| out.push(o.clone()));
    out
}

/// Run every criterion in order, reporting each outcome as soon as it is known.
pub fn run_each(jobs: usize, mut report: impl FnMut(&Outcome)) {
    report(&criterion_1());
    match Backends::load() {
        Ok(b) => {
            report(&criterion_2(&b));
            report(&criterion_3(&b));
            report(&criterion_4(&b));
            report(&criterion_5(&b));
            report(&criterion_6(&b));
            report(&criterion_7(&b, jobs));
            report(&criterion_8(&b));
            report(&criterion_9(&b));
            report(&criterion_10(&b));
            report(&criterion_11(&b));
        }
        Err(e) => {
            for id in 2..=11 {
                report(&Outcome { id, title: TITLES[id - 1], pass: false, detail: format!("backends failed to load: {e}"), elapsed: Duration::ZERO });
            }
        }
    }
    report(&criterion_12());
}
