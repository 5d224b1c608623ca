//! Finite-dimensional ribbon Hopf algebras given by structure tensors.

use std::collections::HashMap;
use std::path::Path;

use cyclo::{field, Field, MatrixS, Scalar};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conventions shared by every module. Changing one of them changes the
/// numerical value of twists, Δ± and the modified trace, and the property
/// suite is what pins them.
pub mod conventions {
    /// u = Σ S(R₂) R₁.
    pub const DRINFELD_U: &str = "u = sum S(R2) R1";
    /// g = u v⁻¹ (grouplike, implements S² by conjugation).
    pub const PIVOT: &str = "g = u v^-1";
    /// θ_X acts by v⁻¹.
    pub const TWIST: &str = "theta_X = rho_X(v^-1)";
    /// c(x⊗y) = Σ R₂y ⊗ R₁x.
    pub const BRAIDING: &str = "c(x (x) y) = sum R2 y (x) R1 x";
    /// Left pair: ev f⊗x ↦ f(x), coev 1 ↦ Σ eᵢ⊗eⁱ.
    pub const LEFT_DUALITY: &str = "ev(f (x) x) = f(x); coev = sum e_i (x) e^i";
    /// Right pair: ev x⊗f ↦ f(gx), coev 1 ↦ Σ eⁱ⊗g⁻¹eᵢ.
    pub const RIGHT_DUALITY: &str = "ev(x (x) f) = f(g x); coev = sum e^i (x) g^-1 e_i";
}

/// Algebra element in the manifest basis.
pub type Elt = Vec<Scalar>;

/// Sparse element of H⊗H.
pub type Tensor2 = HashMap<(usize, usize), Scalar>;
type Tensor3 = HashMap<(usize, usize, usize), Scalar>;

fn acc<K: std::hash::Hash + Eq>(m: &mut HashMap<K, Scalar>, k: K, v: Scalar) {
    if v.is_zero() {
        return;
    }
    match m.entry(k) {
        std::collections::hash_map::Entry::Occupied(mut e) => {
            let s = e.get() + &v;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(v);
        }
    }
}

/// JSON backend manifest. Scalars are kernel strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub cyclotomic_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    /// mult[i][j][k]: coefficient of e_k in e_i e_j.
    pub mult: Vec<Vec<Vec<String>>>,
    pub unit: Vec<String>,
    /// comult[i][j][k]: coefficient of e_j ⊗ e_k in Δ(e_i).
    pub comult: Vec<Vec<Vec<String>>>,
    pub counit: Vec<String>,
    /// antipode[i][j]: coefficient of e_i in S(e_j).
    pub antipode: Vec<Vec<String>>,
    /// R = Σ R[i][j] e_i ⊗ e_j.
    #[serde(rename = "R")]
    pub r: Vec<Vec<String>>,
    pub ribbon: Vec<String>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d_scalar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

/// A ribbon Hopf algebra over Q(ζ_N).
#[derive(Clone)]
pub struct HopfPresentation {
    pub name: String,
    pub f: &'static Field,
    pub d: usize,
    pub basis_names: Vec<String>,
    mul_tab: Vec<Vec<(usize, Scalar)>>,
    com_tab: Vec<Vec<(usize, usize, Scalar)>>,
    pub unit: Elt,
    pub counit: Vec<Scalar>,
    /// Column j is S(e_j).
    pub antipode: MatrixS,
    pub r: Vec<(usize, usize, Scalar)>,
    pub ribbon: Elt,
    pub d_scalar: Option<Scalar>,
    pub delta: Option<Scalar>,
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn parse_vec(f: &'static Field, v: &[String], what: &str, len: usize) -> Result<Vec<Scalar>> {
    if v.len() != len {
        return Err(Error::Parse(format!("{what}: expected {len} entries, got {}", v.len())));
    }
    v.iter().map(|s| Scalar::parse(f, s).map_err(|e| Error::Parse(format!("{what}: {e}")))).collect()
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Manifest> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io { path: p.display().to_string(), msg: e.to_string() })?;
        Manifest::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Build the presentation without checking any axiom.
    pub fn to_presentation(&self) -> Result<HopfPresentation> {
        let d = self.dim;
        if d == 0 || self.cyclotomic_order == 0 {
            return Err(Error::Parse("dimension and cyclotomic order must be positive".into()));
        }
        let f = field(self.cyclotomic_order);
        let shape3 = |t: &Vec<Vec<Vec<String>>>, what: &str| -> Result<()> {
            if t.len() != d || t.iter().any(|m| m.len() != d || m.iter().any(|r| r.len() != d)) {
                return Err(Error::Parse(format!("{what} must be {d}x{d}x{d}")));
            }
            Ok(())
        };
        shape3(&self.mult, "mult")?;
        shape3(&self.comult, "comult")?;
        let mut mul_tab = vec![Vec::new(); d * d];
        for i in 0..d {
            for j in 0..d {
                for (k, s) in parse_vec(f, &self.mult[i][j], "mult", d)?.into_iter().enumerate() {
                    if !s.is_zero() {
                        mul_tab[i * d + j].push((k, s));
                    }
                }
            }
        }
        let mut com_tab = vec![Vec::new(); d];
        for i in 0..d {
            for j in 0..d {
                for (k, s) in parse_vec(f, &self.comult[i][j], "comult", d)?.into_iter().enumerate() {
                    if !s.is_zero() {
                        com_tab[i].push((j, k, s));
                    }
                }
            }
        }
        if self.antipode.len() != d || self.r.len() != d {
            return Err(Error::Parse(format!("antipode and R must be {d}x{d}")));
        }
        let mut sdata = Vec::with_capacity(d * d);
        for row in &self.antipode {
            sdata.extend(parse_vec(f, row, "antipode", d)?);
        }
        let antipode = MatrixS::from_vec(f, d, d, sdata)?;
        let mut r = Vec::new();
        for (i, row) in self.r.iter().enumerate() {
            for (j, s) in parse_vec(f, row, "R", d)?.into_iter().enumerate() {
                if !s.is_zero() {
                    r.push((i, j, s));
                }
            }
        }
        let opt = |s: &Option<String>, what: &str| -> Result<Option<Scalar>> {
            s.as_ref().map(|x| Scalar::parse(f, x).map_err(|e| Error::Parse(format!("{what}: {e}")))).transpose()
        };
        Ok(HopfPresentation {
            name: self.name.clone().unwrap_or_else(|| "backend".into()),
            f,
            d,
            basis_names: self.basis.clone().unwrap_or_else(|| (0..d).map(|i| format!("e{i}")).collect()),
            mul_tab,
            com_tab,
            unit: parse_vec(f, &self.unit, "unit", d)?,
            counit: parse_vec(f, &self.counit, "counit", d)?,
            antipode,
            r,
            ribbon: parse_vec(f, &self.ribbon, "ribbon", d)?,
            d_scalar: opt(&self.d_scalar, "D")?,
            delta: opt(&self.delta, "delta")?,
        })
    }
}

impl HopfPresentation {
    /// Assemble from sparse structure data (used by the backend builders).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        name: &str,
        f: &'static Field,
        d: usize,
        mult: impl Fn(usize, usize) -> Elt,
        unit: Elt,
        comult: impl Fn(usize) -> Tensor2,
        counit: Vec<Scalar>,
        antipode: MatrixS,
        r: Tensor2,
        ribbon: Elt,
    ) -> HopfPresentation {
        let mut mul_tab = vec![Vec::new(); d * d];
        for i in 0..d {
            for j in 0..d {
                for (k, s) in mult(i, j).into_iter().enumerate() {
                    if !s.is_zero() {
                        mul_tab[i * d + j].push((k, s));
                    }
                }
            }
        }
        let com_tab = (0..d)
            .map(|i| {
                let mut v: Vec<(usize, usize, Scalar)> = comult(i).into_iter().map(|((a, b), s)| (a, b, s)).collect();
                v.sort_by_key(|t| (t.0, t.1));
                v
            })
            .collect();
        let mut rv: Vec<(usize, usize, Scalar)> = r.into_iter().map(|((a, b), s)| (a, b, s)).collect();
        rv.sort_by_key(|t| (t.0, t.1));
        HopfPresentation {
            name: name.into(),
            f,
            d,
            basis_names: (0..d).map(|i| format!("e{i}")).collect(),
            mul_tab,
            com_tab,
            unit,
            counit,
            antipode,
            r: rv,
            ribbon,
            d_scalar: None,
            delta: None,
        }
    }

    pub fn to_manifest(&self) -> Manifest {
        let d = self.d;
        let z = "0".to_string();
        let mut mult = vec![vec![vec![z.clone(); d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                for (k, s) in &self.mul_tab[i * d + j] {
                    mult[i][j][*k] = s.to_string();
                }
            }
        }
        let mut comult = vec![vec![vec![z.clone(); d]; d]; d];
        for i in 0..d {
            for (a, b, s) in &self.com_tab[i] {
                comult[i][*a][*b] = s.to_string();
            }
        }
        let mut r = vec![vec![z.clone(); d]; d];
        for (a, b, s) in &self.r {
            r[*a][*b] = s.to_string();
        }
        let strs = |v: &[Scalar]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Manifest {
            name: Some(self.name.clone()),
            dim: d,
            cyclotomic_order: self.f.order(),
            basis: Some(self.basis_names.clone()),
            mult,
            unit: strs(&self.unit),
            comult,
            counit: strs(&self.counit),
            antipode: (0..d).map(|i| strs(self.antipode.row(i))).collect(),
            r,
            ribbon: strs(&self.ribbon),
            d_scalar: self.d_scalar.as_ref().map(|s| s.to_string()),
            delta: self.delta.as_ref().map(|s| s.to_string()),
        }
    }

    /// Relabel the basis by the permutation `perm` (new index of old basis vector i is perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> HopfPresentation {
        let d = self.d;
        let mut inv = vec![0; d];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let pv = |v: &Elt| -> Elt { (0..d).map(|k| v[inv[k]].clone()).collect() };
        let mut mul_tab = vec![Vec::new(); d * d];
        for i in 0..d {
            for j in 0..d {
                mul_tab[perm[i] * d + perm[j]] = self.mul_tab[i * d + j].iter().map(|(k, s)| (perm[*k], s.clone())).collect();
            }
        }
        let mut com_tab = vec![Vec::new(); d];
        for i in 0..d {
            com_tab[perm[i]] = self.com_tab[i].iter().map(|(a, b, s)| (perm[*a], perm[*b], s.clone())).collect();
        }
        let antipode = MatrixS::from_fn(self.f, d, d, |i, j| self.antipode.get(inv[i], inv[j]).clone());
        HopfPresentation {
            name: self.name.clone(),
            f: self.f,
            d,
            basis_names: (0..d).map(|k| self.basis_names[inv[k]].clone()).collect(),
            mul_tab,
            com_tab,
            unit: pv(&self.unit),
            counit: pv(&self.counit),
            antipode,
            r: self.r.iter().map(|(a, b, s)| (perm[*a], perm[*b], s.clone())).collect(),
            ribbon: pv(&self.ribbon),
            d_scalar: self.d_scalar.clone(),
            delta: self.delta.clone(),
        }
    }

    /// Corrupt one multiplication entry (for negative tests).
    pub fn with_mult_entry(&self, i: usize, j: usize, k: usize, v: Scalar) -> HopfPresentation {
        let mut h = self.clone();
        let row = &mut h.mul_tab[i * self.d + j];
        row.retain(|(kk, _)| *kk != k);
        if !v.is_zero() {
            row.push((k, v));
        }
        h
    }

    // ---- element arithmetic ----

    pub fn zero(&self) -> Elt {
        vec![Scalar::zero(self.f); self.d]
    }

    pub fn basis(&self, i: usize) -> Elt {
        let mut v = self.zero();
        v[i] = Scalar::one(self.f);
        v
    }

    /// Products of basis elements: (k, coefficient) of e_i e_j.
    pub fn mul_basis(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.mul_tab[i * self.d + j]
    }

    pub fn coproduct_basis(&self, i: usize) -> &[(usize, usize, Scalar)] {
        &self.com_tab[i]
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, c) in self.mul_basis(i, j) {
                    out[*k] += &(&xy * c);
                }
            }
        }
        out
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn scale(&self, a: &Elt, s: &Scalar) -> Elt {
        a.iter().map(|x| x * s).collect()
    }

    /// Matrix of left multiplication by a (column j = a e_j).
    pub fn lmat(&self, a: &Elt) -> MatrixS {
        let d = self.d;
        let mut m = MatrixS::zeros(self.f, d, d);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, c) in self.mul_basis(i, j) {
                    let v = m.get(*k, j) + &(x * c);
                    m.set(*k, j, v);
                }
            }
        }
        m
    }

    /// Matrix of right multiplication by a (column j = e_j a).
    pub fn rmat(&self, a: &Elt) -> MatrixS {
        let d = self.d;
        let mut m = MatrixS::zeros(self.f, d, d);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, c) in self.mul_basis(j, i) {
                    let v = m.get(*k, j) + &(x * c);
                    m.set(*k, j, v);
                }
            }
        }
        m
    }

    pub fn antipode_of(&self, a: &Elt) -> Elt {
        self.antipode.apply(a).expect("antipode shape")
    }

    pub fn counit_of(&self, a: &Elt) -> Scalar {
        let mut s = Scalar::zero(self.f);
        for (x, e) in a.iter().zip(&self.counit) {
            if !x.is_zero() && !e.is_zero() {
                s += &(x * e);
            }
        }
        s
    }

    pub fn coproduct(&self, a: &Elt) -> Tensor2 {
        let mut t = Tensor2::new();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (p, q, c) in self.coproduct_basis(i) {
                acc(&mut t, (*p, *q), x * c);
            }
        }
        t
    }

    /// Multiplicative inverse, if a is invertible.
    pub fn inverse(&self, a: &Elt) -> Option<Elt> {
        let l = self.lmat(a);
        let rhs = MatrixS::column(self.f, self.unit.clone());
        let (x, _) = l.solve(&rhs).ok()??;
        let inv = x.col(0);
        (self.mul(&inv, a) == self.unit).then_some(inv)
    }

    pub fn is_central(&self, a: &Elt) -> bool {
        (0..self.d).all(|i| {
            let e = self.basis(i);
            self.mul(a, &e) == self.mul(&e, a)
        })
    }

    pub fn r_tensor(&self) -> Tensor2 {
        let mut t = Tensor2::new();
        for (a, b, s) in &self.r {
            acc(&mut t, (*a, *b), s.clone());
        }
        t
    }

    /// Product in H⊗H.
    pub fn mul2(&self, x: &Tensor2, y: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::new();
        for ((a, b), s) in x {
            for ((c, d), t) in y {
                let st = s * t;
                for (k, u) in self.mul_basis(*a, *c) {
                    let su = &st * u;
                    for (l, w) in self.mul_basis(*b, *d) {
                        acc(&mut out, (*k, *l), &su * w);
                    }
                }
            }
        }
        out
    }

    pub fn flip2(&self, x: &Tensor2) -> Tensor2 {
        x.iter().map(|((a, b), s)| ((*b, *a), s.clone())).collect()
    }

    fn mul3(&self, x: &Tensor3, y: &Tensor3) -> Tensor3 {
        let mut out = Tensor3::new();
        for ((a, b, c), s) in x {
            for ((p, q, r), t) in y {
                let st = s * t;
                for (i, u) in self.mul_basis(*a, *p) {
                    let su = &st * u;
                    for (j, v) in self.mul_basis(*b, *q) {
                        let suv = &su * v;
                        for (k, w) in self.mul_basis(*c, *r) {
                            acc(&mut out, (*i, *j, *k), &suv * w);
                        }
                    }
                }
            }
        }
        out
    }

    /// (id ⊗ S) applied to the second leg, etc.: apply linear maps legwise.
    pub fn map2(&self, x: &Tensor2, f1: Option<&MatrixS>, f2: Option<&MatrixS>) -> Tensor2 {
        let mut out = Tensor2::new();
        let col = |m: Option<&MatrixS>, i: usize| -> Vec<(usize, Scalar)> {
            match m {
                None => vec![(i, Scalar::one(self.f))],
                Some(m) => (0..self.d).filter(|k| !m.get(*k, i).is_zero()).map(|k| (k, m.get(k, i).clone())).collect(),
            }
        };
        for ((a, b), s) in x {
            for (p, u) in col(f1, *a) {
                for (q, w) in col(f2, *b) {
                    acc(&mut out, (p, q), &(s * &u) * &w);
                }
            }
        }
        out
    }

    /// R₂₁R as an element of H⊗H (the double braiding).
    pub fn monodromy_element(&self) -> Tensor2 {
        let r = self.r_tensor();
        self.mul2(&self.flip2(&r), &r)
    }

    /// (R₂₁R)⁻¹ = R⁻¹ R₂₁⁻¹ with R⁻¹ = (S⊗id)R.
    pub fn monodromy_inverse(&self) -> Tensor2 {
        let r = self.r_tensor();
        let rinv = self.map2(&r, Some(&self.antipode), None);
        self.mul2(&rinv, &self.flip2(&rinv))
    }

    fn one2(&self) -> Tensor2 {
        let mut t = Tensor2::new();
        for (i, x) in self.unit.iter().enumerate() {
            for (j, y) in self.unit.iter().enumerate() {
                acc(&mut t, (i, j), x * y);
            }
        }
        t
    }

    fn basis2(&self, a: &Elt, b: &Elt) -> Tensor2 {
        let mut t = Tensor2::new();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                acc(&mut t, (i, j), x * y);
            }
        }
        t
    }

    // ---- validation ----

    /// Check every Hopf, quasitriangular and ribbon axiom.
    pub fn validate(&self) -> ValidationReport {
        let d = self.d;
        let mut checks = Vec::new();
        let mut push = |name: &str, w: Option<Vec<usize>>| {
            checks.push(AxiomCheck { name: name.into(), pass: w.is_none(), witness: w.unwrap_or_default() });
        };
        let e: Vec<Elt> = (0..d).map(|i| self.basis(i)).collect();

        // associativity
        let mut w = None;
        'outer: for i in 0..d {
            for j in 0..d {
                let ij = self.mul(&e[i], &e[j]);
                for k in 0..d {
                    let jk = self.mul(&e[j], &e[k]);
                    if self.mul(&ij, &e[k]) != self.mul(&e[i], &jk) {
                        w = Some(vec![i, j, k]);
                        break 'outer;
                    }
                }
            }
        }
        push("associativity", w);

        let w = (0..d).find(|&i| self.mul(&self.unit, &e[i]) != e[i] || self.mul(&e[i], &self.unit) != e[i]).map(|i| vec![i]);
        push("unit", w);

        // coassociativity: (Δ⊗id)Δ = (id⊗Δ)Δ
        let w = (0..d)
            .find(|&i| {
                let mut l = Tensor3::new();
                let mut r = Tensor3::new();
                for (a, b, s) in self.coproduct_basis(i) {
                    for (p, q, t) in self.coproduct_basis(*a) {
                        acc(&mut l, (*p, *q, *b), s * t);
                    }
                    for (p, q, t) in self.coproduct_basis(*b) {
                        acc(&mut r, (*a, *p, *q), s * t);
                    }
                }
                l != r
            })
            .map(|i| vec![i]);
        push("coassociativity", w);

        let w = (0..d)
            .find(|&i| {
                let mut l = self.zero();
                let mut r = self.zero();
                for (a, b, s) in self.coproduct_basis(i) {
                    l[*b] += &(s * &self.counit[*a]);
                    r[*a] += &(s * &self.counit[*b]);
                }
                l != e[i] || r != e[i]
            })
            .map(|i| vec![i]);
        push("counit", w);

        // Δ and ε are algebra maps
        let mut w = None;
        let deltas: Vec<Tensor2> = (0..d).map(|i| self.coproduct(&e[i])).collect();
        'outer2: for i in 0..d {
            for j in 0..d {
                let prod = self.mul(&e[i], &e[j]);
                if self.coproduct(&prod) != self.mul2(&deltas[i], &deltas[j])
                    || self.counit_of(&prod) != &self.counit[i] * &self.counit[j]
                {
                    w = Some(vec![i, j]);
                    break 'outer2;
                }
            }
        }
        if w.is_none() && (self.coproduct(&self.unit) != self.one2() || !self.counit_of(&self.unit).is_one()) {
            w = Some(vec![]);
        }
        push("bialgebra compatibility", w);

        let w = (0..d)
            .find(|&i| {
                let mut l = self.zero();
                let mut r = self.zero();
                for (a, b, s) in self.coproduct_basis(i) {
                    let sa = self.antipode_of(&e[*a]);
                    let sb = self.antipode_of(&e[*b]);
                    l = self.add(&l, &self.scale(&self.mul(&sa, &e[*b]), s));
                    r = self.add(&r, &self.scale(&self.mul(&e[*a], &sb), s));
                }
                let target = self.scale(&self.unit, &self.counit[i]);
                l != target || r != target
            })
            .map(|i| vec![i]);
        push("antipode", w);

        // quasitriangularity
        let r = self.r_tensor();
        let rinv = self.map2(&r, Some(&self.antipode), None);
        push("R invertible", (self.mul2(&r, &rinv) != self.one2()).then(Vec::new));
        let w = (0..d)
            .find(|&i| {
                let dx = &deltas[i];
                self.mul2(&self.flip2(dx), &r) != self.mul2(&r, dx)
            })
            .map(|i| vec![i]);
        push("R intertwines coproduct and opposite coproduct", w);
        let lift = |t: &Tensor2, pos: (usize, usize)| -> Tensor3 {
            let mut o = Tensor3::new();
            let one: Vec<(usize, Scalar)> =
                self.unit.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
            for ((a, b), s) in t {
                for (u, c) in &one {
                    let mut idx = [*u; 3];
                    idx[pos.0] = *a;
                    idx[pos.1] = *b;
                    acc(&mut o, (idx[0], idx[1], idx[2]), s * c);
                }
            }
            o
        };
        let r12 = lift(&r, (0, 1));
        let r13 = lift(&r, (0, 2));
        let r23 = lift(&r, (1, 2));
        let mut dl = Tensor3::new();
        let mut dr = Tensor3::new();
        for ((a, b), s) in &r {
            for (p, q, t) in self.coproduct_basis(*a) {
                acc(&mut dl, (*p, *q, *b), s * t);
            }
            for (p, q, t) in self.coproduct_basis(*b) {
                acc(&mut dr, (*a, *p, *q), s * t);
            }
        }
        push("hexagon (Delta x id)R = R13 R23", (dl != self.mul3(&r13, &r23)).then(Vec::new));
        push("hexagon (id x Delta)R = R13 R12", (dr != self.mul3(&r13, &r12)).then(Vec::new));

        // ribbon
        let v = &self.ribbon;
        push("ribbon central", (!self.is_central(v)).then(Vec::new));
        let u = self.drinfeld_u();
        let usu = self.mul(&u, &self.antipode_of(&u));
        push("ribbon v^2 = u S(u)", (self.mul(v, v) != usu).then(Vec::new));
        push("ribbon S(v) = v", (self.antipode_of(v) != *v).then(Vec::new));
        push("ribbon eps(v) = 1", (!self.counit_of(v).is_one()).then(Vec::new));
        let rr = self.monodromy_element();
        let lhs = self.mul2(&rr, &self.coproduct(v));
        push("ribbon Delta(v) = (R21 R)^-1 (v x v)", (lhs != self.basis2(v, v)).then(Vec::new));
        ValidationReport { checks }
    }

    /// Validate, failing on the first violated axiom.
    pub fn validated(self) -> Result<HopfPresentation> {
        let rep = self.validate();
        if let Some(c) = rep.first_failure() {
            return Err(Error::AxiomViolation { name: c.name.clone(), witness: c.witness.clone() });
        }
        Ok(self)
    }

    /// u = Σ S(R₂)R₁.
    pub fn drinfeld_u(&self) -> Elt {
        let mut u = self.zero();
        for (i, j, c) in &self.r {
            let sj = self.antipode_of(&self.basis(*j));
            u = self.add(&u, &self.scale(&self.mul(&sj, &self.basis(*i)), c));
        }
        u
    }

    /// Rank of the Drinfeld map f ↦ (f⊗id)(R₂₁R); factorizable iff it is d.
    pub fn drinfeld_rank(&self) -> usize {
        let rr = self.monodromy_element();
        let mut m = MatrixS::zeros(self.f, self.d, self.d);
        for ((a, b), s) in &rr {
            let v = m.get(*b, *a) + s;
            m.set(*b, *a, v);
        }
        m.rank()
    }

    pub fn factorizability_check(&self) -> bool {
        self.drinfeld_rank() == self.d
    }

    /// Algebra generators: greedy choice of basis elements until they generate H.
    pub fn algebra_generators(&self) -> Vec<usize> {
        let d = self.d;
        let mut gens: Vec<usize> = Vec::new();
        let mut span = MatrixS::column(self.f, self.unit.clone());
        let close = |gens: &[usize]| -> MatrixS {
            // span of all words in the generators, built by repeated right multiplication
            let mut basis: Vec<Elt> = vec![self.unit.clone()];
            let mut mat = MatrixS::column(self.f, self.unit.clone());
            let mut frontier = vec![self.unit.clone()];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for w in &frontier {
                    for &g in gens {
                        let p = self.mul(w, &self.basis(g));
                        let cand = mat.hstack(&MatrixS::column(self.f, p.clone())).expect("rows");
                        if cand.rank() > mat.rank() {
                            mat = cand;
                            basis.push(p.clone());
                            next.push(p);
                        }
                    }
                }
                frontier = next;
            }
            mat
        };
        for i in 0..d {
            if span.cols() == d {
                break;
            }
            let e = MatrixS::column(self.f, self.basis(i));
            if span.hstack(&e).expect("rows").rank() == span.rank() {
                continue;
            }
            gens.push(i);
            span = close(&gens).column_basis();
        }
        gens
    }
}

/// Derived elements of a validated backend.
#[derive(Clone, Debug)]
pub struct StructuralElements {
    pub drinfeld_u: Elt,
    pub pivot_g: Elt,
    pub pivot_g_inv: Elt,
    pub ribbon_inv: Elt,
    /// Left integral Λ_H; later rescaled so that λ(Λ_H) = 1.
    pub left_integral: Elt,
    /// Right cointegral λ with (λ⊗id)Δ(h) = λ(h)1.
    pub right_cointegral: Vec<Scalar>,
    pub unimodular: bool,
}

impl StructuralElements {
    pub fn compute(h: &HopfPresentation) -> Result<StructuralElements> {
        let f = h.f;
        let d = h.d;
        let u = h.drinfeld_u();
        let vinv = h.inverse(&h.ribbon).ok_or_else(|| Error::AxiomViolation { name: "ribbon invertible".into(), witness: vec![] })?;
        let g = h.mul(&u, &vinv);
        let ginv = h.inverse(&g).ok_or_else(|| Error::AxiomViolation { name: "pivot invertible".into(), witness: vec![] })?;
        let dg = h.coproduct(&g);
        if dg != h.basis2(&g, &g) || !h.counit_of(&g).is_one() {
            return Err(Error::AxiomViolation { name: "pivot grouplike".into(), witness: vec![] });
        }
        // left integral: h Λ = ε(h) Λ
        let mut rows = MatrixS::zeros(f, 0, d);
        for i in 0..d {
            let mut l = h.lmat(&h.basis(i));
            for k in 0..d {
                let v = l.get(k, k) - &h.counit[i];
                l.set(k, k, v);
            }
            rows = rows.vstack(&l)?;
        }
        let ns = rows.nullspace();
        if ns.cols() != 1 {
            return Err(Error::NotOneDimensional { what: "left integral".into(), dim: ns.cols() });
        }
        let lam_h = ns.col(0);
        let unimodular = (0..d).all(|i| h.mul(&lam_h, &h.basis(i)) == h.scale(&lam_h, &h.counit[i]));
        // right cointegral: Σ_a λ_a C[i][a][b] = λ_i 1_b
        let mut eqs = MatrixS::zeros(f, d * d, d);
        for i in 0..d {
            for (a, b, c) in h.coproduct_basis(i) {
                let v = eqs.get(i * d + b, *a) + c;
                eqs.set(i * d + b, *a, v);
            }
            for b in 0..d {
                let v = eqs.get(i * d + b, i) - &h.unit[b];
                eqs.set(i * d + b, i, v);
            }
        }
        let ns = eqs.nullspace();
        if ns.cols() != 1 {
            return Err(Error::NotOneDimensional { what: "right cointegral".into(), dim: ns.cols() });
        }
        let lam = ns.col(0);
        if !unimodular {
            return Err(Error::NonUnimodular);
        }
        Ok(StructuralElements {
            drinfeld_u: u,
            pivot_g: g,
            pivot_g_inv: ginv,
            ribbon_inv: vinv,
            left_integral: lam_h,
            right_cointegral: lam,
            unimodular,
        })
    }
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let f = a.first().map(|x| x.field()).unwrap_or_else(|| field(1));
    let mut s = Scalar::zero(f);
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += &(x * y);
        }
    }
    s
}
