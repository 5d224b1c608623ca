//! Built-in exact backends.
//!
//! * `abelian_modular`: the group algebra of Z/3 with R = (1/3) Σ ω^{-ab} K^a⊗K^b.
//!   Semisimple and factorizable, twists θ_j = ω^{j²}.
//! * `uqsl2`: small quantum sl2 at q = e^{2πi/3}, dimension 27, non-semisimple,
//!   unimodular and factorizable.
//! * `z2_transparent`: Z/2 with R = (1/2) Σ (-1)^{ab} K^a⊗K^b. Ribbon, but the
//!   nontrivial simple is transparent, so it is not factorizable.

use std::collections::HashMap;

use cyclo::{field, Field, MatrixS, Scalar};

use crate::hopf::{Elt, HopfPresentation, Tensor2};

/// Field used by every built-in backend.
pub const DEFAULT_ORDER: u32 = 12;

fn root(f: &'static Field, k: i64) -> Scalar {
    Scalar::root_of_unity(f, k)
}

fn sqrt3(f: &'static Field) -> Scalar {
    root(f, 1) + root(f, -1)
}

/// Group algebra of Z/n with R = (1/n) Σ ζ_n^{κab} K^a⊗K^b and ribbon v = u.
fn cyclic(name: &str, n: usize, kappa: i64) -> HopfPresentation {
    let f = field(DEFAULT_ORDER);
    let step = DEFAULT_ORDER as i64 / n as i64;
    let e = |i: usize| {
        let mut v = vec![Scalar::zero(f); n];
        v[i % n] = Scalar::one(f);
        v
    };
    let mult = |i: usize, j: usize| e(i + j);
    let comult = |i: usize| {
        let mut t = Tensor2::new();
        t.insert((i, i), Scalar::one(f));
        t
    };
    let antipode = MatrixS::from_fn(f, n, n, |i, j| if (i + j) % n == 0 { Scalar::one(f) } else { Scalar::zero(f) });
    let inv_n = Scalar::from_frac(f, 1, n as i64).expect("n > 0");
    let mut r = Tensor2::new();
    for a in 0..n {
        for b in 0..n {
            r.insert((a, b), &inv_n * &root(f, step * kappa * (a * b) as i64));
        }
    }
    // v = u = Σ S(R₂)R₁
    let mut u = vec![Scalar::zero(f); n];
    for ((a, b), c) in &r {
        u[(a + n - b) % n] += c;
    }
    let mut h = HopfPresentation::from_parts(name, f, n, mult, e(0), comult, vec![Scalar::one(f); n], antipode, r, u);
    h.basis_names = (0..n).map(|i| format!("K^{i}")).collect();
    h
}

/// Z/3 pointed modular backend.
pub fn abelian_modular() -> HopfPresentation {
    let mut h = cyclic("abelian_modular", 3, -1);
    let f = h.f;
    h.d_scalar = Some(sqrt3(f));
    h.delta = Some(root(f, 3));
    h
}

/// Z/2 with a transparent fermion: passes every ribbon axiom, fails factorizability.
pub fn z2_transparent() -> HopfPresentation {
    cyclic("z2_transparent", 2, 1)
}

const L: usize = 3;

fn idx(a: usize, b: usize, c: usize) -> usize {
    a * L * L + (b % L) * L + c
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Gen {
    F,
    K,
    E,
}

/// PBW normal ordering for u_q(sl2), q = ζ_3, in the basis F^a K^b E^c.
struct Normalizer {
    f: &'static Field,
    qm2: Scalar,
    inv_qq: Scalar,
    memo: HashMap<Vec<Gen>, HashMap<usize, Scalar>>,
}

impl Normalizer {
    fn new(f: &'static Field) -> Normalizer {
        let q = root(f, 4);
        let qinv = root(f, -4);
        let inv_qq = (&q - &qinv).inv().expect("q - q^-1 != 0");
        Normalizer { f, qm2: root(f, -8), inv_qq, memo: HashMap::new() }
    }

    fn normal(&mut self, word: &[Gen]) -> HashMap<usize, Scalar> {
        if let Some(r) = self.memo.get(word) {
            return r.clone();
        }
        let mut res: HashMap<usize, Scalar> = HashMap::new();
        let pos = (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1]);
        match pos {
            None => {
                let a = word.iter().filter(|g| **g == Gen::F).count();
                let b = word.iter().filter(|g| **g == Gen::K).count();
                let c = word.iter().filter(|g| **g == Gen::E).count();
                if a < L && c < L {
                    res.insert(idx(a, b, c), Scalar::one(self.f));
                }
            }
            Some(i) => {
                let (pre, post) = (&word[..i], &word[i + 2..]);
                let mut add = |this: &mut Normalizer, mid: &[Gen], c: Scalar| {
                    let w: Vec<Gen> = pre.iter().chain(mid).chain(post).copied().collect();
                    for (k, v) in this.normal(&w) {
                        let e = res.entry(k).or_insert_with(|| Scalar::zero(this.f));
                        *e += &(&v * &c);
                    }
                };
                match (word[i], word[i + 1]) {
                    // KF = q^{-2} FK
                    (Gen::K, Gen::F) => {
                        let c = self.qm2.clone();
                        add(self, &[Gen::F, Gen::K], c)
                    }
                    // EK = q^{-2} KE
                    (Gen::E, Gen::K) => {
                        let c = self.qm2.clone();
                        add(self, &[Gen::K, Gen::E], c)
                    }
                    // EF = FE + (K - K^{-1})/(q - q^{-1})
                    (Gen::E, Gen::F) => {
                        add(self, &[Gen::F, Gen::E], Scalar::one(self.f));
                        let c = self.inv_qq.clone();
                        add(self, &[Gen::K], c.clone());
                        add(self, &[Gen::K; L - 1], -c);
                    }
                    _ => unreachable!("only out-of-order pairs are rewritten"),
                }
                res.retain(|_, v| !v.is_zero());
            }
        }
        self.memo.insert(word.to_vec(), res.clone());
        res
    }
}

fn word(a: usize, b: usize, c: usize) -> Vec<Gen> {
    let mut w = vec![Gen::F; a];
    w.extend(std::iter::repeat(Gen::K).take(b));
    w.extend(std::iter::repeat(Gen::E).take(c));
    w
}

/// Small quantum group u_q(sl2) at q = ζ_3.
pub fn uqsl2() -> HopfPresentation {
    let f = field(DEFAULT_ORDER);
    let d = L * L * L;
    let mut nz = Normalizer::new(f);
    let triples: Vec<(usize, usize, usize)> =
        (0..L).flat_map(|a| (0..L).flat_map(move |b| (0..L).map(move |c| (a, b, c)))).collect();
    let mut table: Vec<Elt> = vec![vec![Scalar::zero(f); d]; d * d];
    for &(a1, b1, c1) in &triples {
        for &(a2, b2, c2) in &triples {
            let mut w = word(a1, b1, c1);
            w.extend(word(a2, b2, c2));
            let slot = &mut table[idx(a1, b1, c1) * d + idx(a2, b2, c2)];
            for (k, v) in nz.normal(&w) {
                slot[k] = v;
            }
        }
    }
    let mult = |i: usize, j: usize| table[i * d + j].clone();
    let e = |i: usize| {
        let mut v = vec![Scalar::zero(f); d];
        v[i] = Scalar::one(f);
        v
    };
    let unit = e(0);
    // a bare algebra with zero comultiplication, only used for products while building
    let base = HopfPresentation::from_parts(
        "uqsl2",
        f,
        d,
        mult,
        unit.clone(),
        |_| Tensor2::new(),
        vec![Scalar::zero(f); d],
        MatrixS::zeros(f, d, d),
        Tensor2::new(),
        unit.clone(),
    );
    let k = e(idx(0, 1, 0));
    let kinv = e(idx(0, L - 1, 0));
    let eg = e(idx(0, 0, 1));
    let fg = e(idx(1, 0, 0));
    let outer = |x: &Elt, y: &Elt| {
        let mut t = Tensor2::new();
        for (i, a) in x.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                let p = a * b;
                if !p.is_zero() {
                    t.insert((i, j), p);
                }
            }
        }
        t
    };
    let plus = |mut x: Tensor2, y: Tensor2| {
        for (kk, v) in y {
            let e = x.entry(kk).or_insert_with(|| Scalar::zero(f));
            *e += &v;
        }
        x.retain(|_, v| !v.is_zero());
        x
    };
    // Δ(E) = 1⊗E + E⊗K, Δ(F) = K⁻¹⊗F + F⊗1, Δ(K) = K⊗K
    let de = plus(outer(&unit, &eg), outer(&eg, &k));
    let df = plus(outer(&kinv, &fg), outer(&fg, &unit));
    let dk = outer(&k, &k);
    let gen_delta = |g: Gen| match g {
        Gen::F => &df,
        Gen::K => &dk,
        Gen::E => &de,
    };
    let mut comult_tab: Vec<Tensor2> = Vec::with_capacity(d);
    for &(a, b, c) in &triples {
        let mut t = outer(&unit, &unit);
        for g in word(a, b, c) {
            t = base.mul2(&t, gen_delta(g));
        }
        comult_tab.push(t);
    }
    let mut counit = vec![Scalar::zero(f); d];
    for b in 0..L {
        counit[idx(0, b, 0)] = Scalar::one(f);
    }
    // S(E) = -E K⁻¹, S(F) = -K F, S(K) = K⁻¹, extended as an anti-homomorphism
    let se = base.scale(&base.mul(&eg, &kinv), &Scalar::from_int(f, -1));
    let sf = base.scale(&base.mul(&k, &fg), &Scalar::from_int(f, -1));
    let mut antipode = MatrixS::zeros(f, d, d);
    for &(a, b, c) in &triples {
        let mut r = unit.clone();
        for g in word(a, b, c).into_iter().rev() {
            let sg = match g {
                Gen::F => &sf,
                Gen::K => &kinv,
                Gen::E => &se,
            };
            r = base.mul(&r, sg);
        }
        for (i, x) in r.into_iter().enumerate() {
            antipode.set(i, idx(a, b, c), x);
        }
    }
    // R = (1/3) Σ q^{-2ij} (q-q⁻¹)^n/[n]! q^{n(n-1)/2} K^iE^n ⊗ K^jF^n
    let q = root(f, 4);
    let qinv = root(f, -4);
    let qq = &q - &qinv;
    let qint = |n: i64| (&q.pow(n).unwrap() - &q.pow(-n).unwrap()).div(&qq).unwrap();
    let mut fact = vec![Scalar::one(f)];
    for n in 1..L as i64 {
        let last = fact.last().unwrap().clone();
        fact.push(&last * &qint(n));
    }
    let third = Scalar::from_frac(f, 1, L as i64).unwrap();
    let mut r = Tensor2::new();
    for i in 0..L {
        for j in 0..L {
            for n in 0..L {
                let ni = n as i64;
                let coef = &(&(&third * &q.pow(-2 * (i * j) as i64).unwrap()) * &qq.pow(ni).unwrap())
                    .div(&fact[n])
                    .unwrap()
                    * &q.pow(ni * (ni - 1) / 2).unwrap();
                let a = base.mul(&e(idx(0, i, 0)), &e(idx(0, 0, n)));
                let b = base.mul(&e(idx(0, j, 0)), &e(idx(n, 0, 0)));
                let mut t = outer(&a, &b);
                for v in t.values_mut() {
                    *v = &*v * &coef;
                }
                r = plus(r, t);
            }
        }
    }
    let mut u = vec![Scalar::zero(f); d];
    for ((i, j), c) in &r {
        let sj = antipode.col(*j);
        u = base.add(&u, &base.scale(&base.mul(&sj, &e(*i)), c));
    }
    let v = base.mul(&kinv, &u);
    let mut h = HopfPresentation::from_parts("uqsl2", f, d, mult, unit, |i| comult_tab[i].clone(), counit, antipode, r, v);
    h.basis_names = triples
        .iter()
        .map(|&(a, b, c)| {
            let mut s = String::new();
            for (g, p) in [("F", a), ("K", b), ("E", c)] {
                match p {
                    0 => {}
                    1 => s.push_str(g),
                    _ => s.push_str(&format!("{g}^{p}")),
                }
            }
            if s.is_empty() {
                "1".into()
            } else {
                s
            }
        })
        .collect();
    h.d_scalar = Some(&Scalar::from_int(f, 3) * &sqrt3(f));
    h.delta = Some(root(f, 3));
    h
}

/// Look up a built-in backend by name.
pub fn builtin(name: &str) -> Option<HopfPresentation> {
    match name {
        "abelian_modular" | "z3" => Some(abelian_modular()),
        "uqsl2" | "uq" => Some(uqsl2()),
        "z2_transparent" => Some(z2_transparent()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_validates() {
        let h = abelian_modular();
        let rep = h.validate();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        assert!(h.factorizability_check());
    }

    #[test]
    fn z2_is_not_factorizable() {
        let h = z2_transparent();
        assert!(h.validate().all_pass());
        assert!(!h.factorizability_check());
    }

    #[test]
    fn uq_validates() {
        let h = uqsl2();
        let rep = h.validate();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        assert!(h.factorizability_check());
        let s = crate::hopf::StructuralElements::compute(&h).unwrap();
        assert_eq!(s.pivot_g, h.basis(idx(0, 1, 0)));
    }

    #[test]
    fn uq_relations() {
        let h = uqsl2();
        let f = h.f;
        let k = h.basis(idx(0, 1, 0));
        let e = h.basis(idx(0, 0, 1));
        let k3 = h.mul(&h.mul(&k, &k), &k);
        assert_eq!(k3, h.unit);
        let e3 = h.mul(&h.mul(&e, &e), &e);
        assert!(e3.iter().all(Scalar::is_zero));
        // KE = q² EK
        let ke = h.mul(&k, &e);
        let ek = h.mul(&e, &k);
        assert_eq!(ke, h.scale(&ek, &Scalar::root_of_unity(f, 8)));
    }
}
