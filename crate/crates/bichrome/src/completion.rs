//! Finite presentations of linear categories and their completions:
//! additive completion (formal sums, matrix morphisms), Karoubi envelope
//! (idempotent pairs), dominating sets and c-equivalence of functors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algebra::FinAlgebra;
use crate::error::{Error, Result};
use crate::repcat::{HomSpace, RepCat, Rep};
use cyclo::{field, Field, MatrixS, Scalar};

/// Objects, hom dimensions, identities and composition structure constants.
#[derive(Clone, Debug)]
pub struct CatPresentation {
    pub f: &'static Field,
    pub objects: Vec<String>,
    /// dims[x][y] = dim A(x, y)
    pub dims: Vec<Vec<usize>>,
    /// coordinates of id_x in A(x, x)
    pub ids: Vec<Vec<Scalar>>,
    /// (x, y, z) ↦ table indexed by b·dim A(x,y) + a holding the coordinates
    /// of g_b∘f_a in A(x, z)
    comp: HashMap<(usize, usize, usize), Vec<Vec<Scalar>>>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    field: u32,
    objects: Vec<String>,
    dims: Vec<Vec<usize>>,
    identities: Vec<Vec<String>>,
    compose: Vec<CompEntry>,
}

#[derive(Serialize, Deserialize)]
struct CompEntry {
    x: usize,
    y: usize,
    z: usize,
    g: usize,
    f: usize,
    value: Vec<String>,
}

impl CatPresentation {
    pub fn new(
        f: &'static Field,
        objects: Vec<String>,
        dims: Vec<Vec<usize>>,
        ids: Vec<Vec<Scalar>>,
        comp: HashMap<(usize, usize, usize), Vec<Vec<Scalar>>>,
    ) -> Result<CatPresentation> {
        let p = CatPresentation { f, objects, dims, ids, comp };
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn dim(&self, x: usize, y: usize) -> usize {
        self.dims[x][y]
    }

    fn zero(&self, n: usize) -> Vec<Scalar> {
        vec![Scalar::zero(self.f); n]
    }

    fn basis_vec(&self, n: usize, k: usize) -> Vec<Scalar> {
        let mut v = self.zero(n);
        v[k] = Scalar::one(self.f);
        v
    }

    /// g∘f for f ∈ A(x, y), g ∈ A(y, z) in coordinates.
    pub fn compose(&self, x: usize, y: usize, z: usize, g: &[Scalar], f: &[Scalar]) -> Vec<Scalar> {
        let nxz = self.dims[x][z];
        let nxy = self.dims[x][y];
        let mut out = self.zero(nxz);
        let Some(tab) = self.comp.get(&(x, y, z)) else {
            return out;
        };
        for (b, gb) in g.iter().enumerate() {
            if gb.is_zero() {
                continue;
            }
            for (a, fa) in f.iter().enumerate() {
                if fa.is_zero() {
                    continue;
                }
                let c = gb * fa;
                for (k, v) in tab[b * nxy + a].iter().enumerate() {
                    if !v.is_zero() {
                        out[k] += &(&c * v);
                    }
                }
            }
        }
        out
    }

    /// Unit laws and associativity on basis elements.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let bad = |what: &str, w: Vec<usize>| Error::AxiomViolation { name: format!("category {what}"), witness: w };
        for x in 0..n {
            if self.ids[x].len() != self.dims[x][x] {
                return Err(bad("identity shape", vec![x]));
            }
            for y in 0..n {
                for a in 0..self.dims[x][y] {
                    let f = self.basis_vec(self.dims[x][y], a);
                    if self.compose(x, y, y, &self.ids[y], &f) != f || self.compose(x, x, y, &f, &self.ids[x]) != f {
                        return Err(bad("unit law", vec![x, y, a]));
                    }
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        for a in 0..self.dims[x][y] {
                            let fa = self.basis_vec(self.dims[x][y], a);
                            for b in 0..self.dims[y][z] {
                                let gb = self.basis_vec(self.dims[y][z], b);
                                let gf = self.compose(x, y, z, &gb, &fa);
                                for c in 0..self.dims[z][w] {
                                    let hc = self.basis_vec(self.dims[z][w], c);
                                    let left = self.compose(x, z, w, &hc, &gf);
                                    let right = self.compose(x, y, w, &self.compose(y, z, w, &hc, &gb), &fa);
                                    if left != right {
                                        return Err(bad("associativity", vec![x, y, z, w, a, b, c]));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// One object whose endomorphism algebra has the given structure constants.
    pub fn one_object(f: &'static Field, name: &str, dim: usize, mult: impl Fn(usize, usize) -> Vec<Scalar>, unit: Vec<Scalar>) -> Result<CatPresentation> {
        let tab: Vec<Vec<Scalar>> = (0..dim * dim).map(|ba| mult(ba / dim, ba % dim)).collect();
        let mut comp = HashMap::new();
        comp.insert((0, 0, 0), tab);
        CatPresentation::new(f, vec![name.to_string()], vec![vec![dim]], vec![unit], comp)
    }

    /// The one-object category with End = k[t]/(t² − t), basis (1, t).
    pub fn idempotent_algebra() -> CatPresentation {
        let f = field(1);
        let one = Scalar::one(f);
        let zero = Scalar::zero(f);
        CatPresentation::one_object(
            f,
            "x",
            2,
            |b, a| if a == 0 && b == 0 { vec![one.clone(), zero.clone()] } else { vec![zero.clone(), one.clone()] },
            vec![one.clone(), zero.clone()],
        )
        .expect("k[t]/(t^2 - t) is a valid presentation")
    }

    /// Full subcategory of the module category on the given objects.
    pub fn from_reps(cat: &RepCat, objects: &[Rep]) -> Result<CatPresentation> {
        let f = cat.field();
        let n = objects.len();
        let mut spaces: Vec<Vec<HomSpace>> = Vec::with_capacity(n);
        for x in objects {
            let mut row = Vec::with_capacity(n);
            for y in objects {
                row.push(HomSpace::new(cat.hom_basis(x, y), f)?);
            }
            spaces.push(row);
        }
        let dims: Vec<Vec<usize>> = spaces.iter().map(|r| r.iter().map(HomSpace::dim).collect()).collect();
        let ids = (0..n)
            .map(|x| {
                spaces[x][x]
                    .coords(&MatrixS::identity(f, objects[x].dim))
                    .ok_or_else(|| Error::NoSolution(format!("identity of {} not in its hom basis", objects[x].name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut comp = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let (sxy, syz, sxz) = (&spaces[x][y], &spaces[y][z], &spaces[x][z]);
                    if sxy.dim() == 0 || syz.dim() == 0 {
                        continue;
                    }
                    let mut tab = Vec::with_capacity(sxy.dim() * syz.dim());
                    for g in &syz.basis {
                        for fm in &sxy.basis {
                            let gf = g.matrix.try_mul(&fm.matrix)?;
                            if sxz.dim() == 0 {
                                if gf.entries().iter().any(|e| !e.is_zero()) {
                                    return Err(Error::NoSolution("nonzero composite into a zero hom space".into()));
                                }
                                tab.push(vec![]);
                                continue;
                            }
                            tab.push(sxz.coords(&gf).ok_or_else(|| Error::NoSolution("composite outside the hom space".into()))?);
                        }
                    }
                    comp.insert((x, y, z), tab);
                }
            }
        }
        let names = objects.iter().map(|r| r.name.clone()).collect();
        CatPresentation::new(f, names, dims, ids, comp)
    }

    pub fn to_json(&self) -> String {
        let mut compose = Vec::new();
        let mut keys: Vec<_> = self.comp.keys().copied().collect();
        keys.sort();
        for (x, y, z) in keys {
            let nxy = self.dims[x][y];
            for (ba, v) in self.comp[&(x, y, z)].iter().enumerate() {
                if v.iter().all(Scalar::is_zero) {
                    continue;
                }
                compose.push(CompEntry { x, y, z, g: ba / nxy, f: ba % nxy, value: v.iter().map(|s| s.to_string()).collect() });
            }
        }
        let file = PresentationFile {
            field: self.f.order(),
            objects: self.objects.clone(),
            dims: self.dims.clone(),
            identities: self.ids.iter().map(|v| v.iter().map(|s| s.to_string()).collect()).collect(),
            compose,
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<CatPresentation> {
        let file: PresentationFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let f = field(file.field);
        let n = file.objects.len();
        if file.dims.len() != n || file.dims.iter().any(|r| r.len() != n) || file.identities.len() != n {
            return Err(Error::Parse("dims and identities must match the object list".into()));
        }
        let parse = |v: &[String]| v.iter().map(|s| Scalar::parse(f, s).map_err(Error::from)).collect::<Result<Vec<_>>>();
        let ids = file.identities.iter().map(|v| parse(v)).collect::<Result<Vec<_>>>()?;
        let mut comp: HashMap<(usize, usize, usize), Vec<Vec<Scalar>>> = HashMap::new();
        for e in &file.compose {
            if e.x >= n || e.y >= n || e.z >= n {
                return Err(Error::Parse(format!("object index out of range in ({}, {}, {})", e.x, e.y, e.z)));
            }
            let (nxy, nyz, nxz) = (file.dims[e.x][e.y], file.dims[e.y][e.z], file.dims[e.x][e.z]);
            if e.f >= nxy || e.g >= nyz || e.value.len() != nxz {
                return Err(Error::Parse(format!("bad composition entry at ({}, {}, {})", e.x, e.y, e.z)));
            }
            let tab = comp.entry((e.x, e.y, e.z)).or_insert_with(|| vec![vec![Scalar::zero(f); nxz]; nxy * nyz]);
            tab[e.g * nxy + e.f] = parse(&e.value)?;
        }
        CatPresentation::new(f, file.objects, file.dims, ids, comp)
    }

    /// The additive completion restricted to the given formal sums.
    pub fn additive_completion(&self, sums: &[Vec<usize>]) -> Result<CatPresentation> {
        let m = sums.len();
        // basis of M(X, Y): (i, j, a) with a a basis element of A(X_j, Y_i)
        let index = |xs: &[usize], ys: &[usize]| -> Vec<(usize, usize, usize)> {
            let mut v = Vec::new();
            for (i, &y) in ys.iter().enumerate() {
                for (j, &x) in xs.iter().enumerate() {
                    for a in 0..self.dims[x][y] {
                        v.push((i, j, a));
                    }
                }
            }
            v
        };
        let idx: Vec<Vec<Vec<(usize, usize, usize)>>> =
            sums.iter().map(|xs| sums.iter().map(|ys| index(xs, ys)).collect()).collect();
        let lookup: Vec<Vec<HashMap<(usize, usize, usize), usize>>> = idx
            .iter()
            .map(|r| r.iter().map(|v| v.iter().enumerate().map(|(k, t)| (*t, k)).collect()).collect())
            .collect();
        let dims: Vec<Vec<usize>> = idx.iter().map(|r| r.iter().map(Vec::len).collect()).collect();
        let ids = (0..m)
            .map(|p| {
                let xs = &sums[p];
                let mut v = vec![Scalar::zero(self.f); dims[p][p]];
                for (j, &x) in xs.iter().enumerate() {
                    for (a, c) in self.ids[x].iter().enumerate() {
                        v[lookup[p][p][&(j, j, a)]] = c.clone();
                    }
                }
                v
            })
            .collect();
        let mut comp = HashMap::new();
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    let (xs, ys, zs) = (&sums[p], &sums[q], &sums[r]);
                    let mut tab = Vec::with_capacity(dims[q][r] * dims[p][q]);
                    for &(k, i2, b) in &idx[q][r] {
                        for &(i, j, a) in &idx[p][q] {
                            let mut out = vec![Scalar::zero(self.f); dims[p][r]];
                            if i == i2 {
                                let (x, y, z) = (xs[j], ys[i], zs[k]);
                                let c = self.compose(x, y, z, &self.basis_vec(self.dims[y][z], b), &self.basis_vec(self.dims[x][y], a));
                                for (e, v) in c.into_iter().enumerate() {
                                    out[lookup[p][r][&(k, j, e)]] = v;
                                }
                            }
                            tab.push(out);
                        }
                    }
                    comp.insert((p, q, r), tab);
                }
            }
        }
        let names = sums
            .iter()
            .map(|xs| xs.iter().map(|&x| self.objects[x].as_str()).collect::<Vec<_>>().join("+"))
            .collect();
        CatPresentation::new(self.f, names, dims, ids, comp)
    }

    /// Singletons and all ordered pairs.
    pub fn default_sums(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut v: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
        for x in 0..n {
            for y in 0..n {
                v.push(vec![x, y]);
            }
        }
        v
    }

    fn end_algebra(&self, x: usize) -> FinAlgebra {
        let n = self.dims[x][x];
        FinAlgebra::from_structure(
            self.f,
            n,
            |i, j| self.compose(x, x, x, &self.basis_vec(n, i), &self.basis_vec(n, j)),
            self.ids[x].clone(),
        )
    }

    /// One primitive idempotent of End(x) per indecomposable summand type.
    pub fn primitive_idempotents(&self, x: usize) -> Result<Vec<Vec<Scalar>>> {
        if self.dims[x][x] == 0 {
            return Ok(vec![]);
        }
        Ok(self.end_algebra(x).simple_blocks(&[])?.into_iter().map(|b| b.idempotent).collect())
    }

    /// The Karoubi envelope restricted to the given idempotent pairs (x, p).
    pub fn karoubi(&self, pairs: &[(usize, Vec<Scalar>)]) -> Result<CatPresentation> {
        for (x, p) in pairs {
            if self.compose(*x, *x, *x, p, p) != *p {
                return Err(Error::NotIdempotent);
            }
        }
        let m = pairs.len();
        // K((x,p),(y,q)) = q∘A(x,y)∘p, stored by coordinates in A(x,y)
        let mut bases: Vec<Vec<MatrixS>> = Vec::with_capacity(m);
        for (x, p) in pairs {
            let mut row = Vec::with_capacity(m);
            for (y, q) in pairs {
                let n = self.dims[*x][*y];
                let cols: Vec<Vec<Scalar>> = (0..n)
                    .map(|a| self.compose(*x, *y, *y, q, &self.compose(*x, *x, *y, &self.basis_vec(n, a), p)))
                    .collect();
                let mat = MatrixS::from_fn(self.f, n, n, |i, j| cols[j][i].clone());
                row.push(mat.column_basis());
            }
            bases.push(row);
        }
        let coords = |b: &MatrixS, v: &[Scalar]| -> Result<Vec<Scalar>> {
            let (x, _) = b.solve(&MatrixS::column(self.f, v.to_vec()))?.ok_or_else(|| Error::NoSolution("morphism outside q A p".into()))?;
            Ok(x.col(0))
        };
        let dims: Vec<Vec<usize>> = bases.iter().map(|r| r.iter().map(MatrixS::cols).collect()).collect();
        let ids = (0..m).map(|i| coords(&bases[i][i], &pairs[i].1)).collect::<Result<Vec<_>>>()?;
        let mut comp = HashMap::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (x, y, z) = (pairs[i].0, pairs[j].0, pairs[k].0);
                    let mut tab = Vec::new();
                    for b in 0..dims[j][k] {
                        for a in 0..dims[i][j] {
                            let c = self.compose(x, y, z, &bases[j][k].col(b), &bases[i][j].col(a));
                            tab.push(coords(&bases[i][k], &c)?);
                        }
                    }
                    comp.insert((i, j, k), tab);
                }
            }
        }
        let names = pairs
            .iter()
            .map(|(x, p)| if *p == self.ids[*x] { self.objects[*x].clone() } else { format!("im({}, {})", self.objects[*x], fmt_vec(p)) })
            .collect();
        CatPresentation::new(self.f, names, dims, ids, comp)
    }

    /// (x, id_x) for every object and (x, e) for every non-identity primitive idempotent.
    pub fn default_karoubi(&self) -> Result<CatPresentation> {
        let mut pairs = Vec::new();
        for x in 0..self.len() {
            pairs.push((x, self.ids[x].clone()));
            for e in self.primitive_idempotents(x)? {
                if e != self.ids[x] {
                    pairs.push((x, e));
                }
            }
        }
        self.karoubi(&pairs)
    }

    /// Whether every identity is a finite sum of composites through objects of `d`.
    pub fn dominates(&self, d: &[usize]) -> bool {
        (0..self.len()).all(|x| self.factors_through(x, d))
    }

    /// Whether the identities of the `targets` objects factor through `d`.
    pub fn dominates_objects(&self, d: &[usize], targets: &[usize]) -> bool {
        targets.iter().all(|&x| self.factors_through(x, d))
    }

    fn factors_through(&self, x: usize, d: &[usize]) -> bool {
        let n = self.dims[x][x];
        let mut cols: Vec<Vec<Scalar>> = Vec::new();
        for &y in d {
            for a in 0..self.dims[x][y] {
                for b in 0..self.dims[y][x] {
                    cols.push(self.compose(x, y, x, &self.basis_vec(self.dims[y][x], b), &self.basis_vec(self.dims[x][y], a)));
                }
            }
        }
        if cols.is_empty() {
            return n == 0;
        }
        let m = MatrixS::from_fn(self.f, n, cols.len(), |i, j| cols[j][i].clone());
        matches!(m.solve(&MatrixS::column(self.f, self.ids[x].clone())), Ok(Some(_)))
    }

    /// The full subcategory on `objs` with its inclusion functor.
    pub fn full_subcategory(&self, objs: &[usize]) -> Result<(CatPresentation, Functor)> {
        let mut comp = HashMap::new();
        for (i, &x) in objs.iter().enumerate() {
            for (j, &y) in objs.iter().enumerate() {
                for (k, &z) in objs.iter().enumerate() {
                    if let Some(t) = self.comp.get(&(x, y, z)) {
                        comp.insert((i, j, k), t.clone());
                    }
                }
            }
        }
        let sub = CatPresentation::new(
            self.f,
            objs.iter().map(|&x| self.objects[x].clone()).collect(),
            objs.iter().map(|&x| objs.iter().map(|&y| self.dims[x][y]).collect()).collect(),
            objs.iter().map(|&x| self.ids[x].clone()).collect(),
            comp,
        )?;
        let mut hom_maps = HashMap::new();
        for (i, &x) in objs.iter().enumerate() {
            for (j, &y) in objs.iter().enumerate() {
                hom_maps.insert((i, j), MatrixS::identity(self.f, self.dims[x][y]));
            }
        }
        Ok((sub, Functor { object_map: objs.to_vec(), hom_maps }))
    }
}

fn fmt_vec(v: &[Scalar]) -> String {
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// A linear functor between presentations: objects and hom-space matrices.
#[derive(Clone, Debug)]
pub struct Functor {
    pub object_map: Vec<usize>,
    /// (x, y) ↦ matrix A(x, y) → B(Fx, Fy) in the hom bases
    pub hom_maps: HashMap<(usize, usize), MatrixS>,
}

/// Fully faithful and the image dominates the target.
pub fn c_equivalence_check(source: &CatPresentation, target: &CatPresentation, fun: &Functor) -> bool {
    let n = source.len();
    if fun.object_map.len() != n {
        return false;
    }
    for x in 0..n {
        for y in 0..n {
            let (fx, fy) = (fun.object_map[x], fun.object_map[y]);
            let (s, t) = (source.dims[x][y], target.dims[fx][fy]);
            match fun.hom_maps.get(&(x, y)) {
                Some(m) if m.shape() == (t, s) && s == t && m.rank() == s => {}
                None if s == 0 && t == 0 => {}
                _ => return false,
            }
        }
    }
    let mut image: Vec<usize> = fun.object_map.clone();
    image.sort();
    image.dedup();
    target.dominates(&image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends;
    use crate::eval::Session;

    #[test]
    fn idempotent_algebra_splits() {
        let a = CatPresentation::idempotent_algebra();
        let k = a.default_karoubi().unwrap();
        assert_eq!(k.len(), 3);
        assert_eq!(k.dims[1][1], 1);
        assert_eq!(k.dims[2][2], 1);
        assert_eq!(k.dims[1][2], 0);
        // the two images together dominate the original object
        assert!(k.dominates(&[1, 2]));
        assert!(!k.dominates(&[1]));
    }

    #[test]
    fn additive_dimensions() {
        let a = CatPresentation::idempotent_algebra();
        let m = a.additive_completion(&[vec![0], vec![0, 0]]).unwrap();
        assert_eq!(m.dims[1][0], 2 * a.dims[0][0]);
        assert_eq!(m.dims[1][1], 4 * a.dims[0][0]);
    }

    #[test]
    fn json_round_trip() {
        let a = CatPresentation::idempotent_algebra();
        let b = CatPresentation::from_json(&a.to_json()).unwrap();
        assert_eq!(b.to_json(), a.to_json());
    }

    #[test]
    fn projective_generator_dominates() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let mut objs = vec![s.cat.trivial.clone()];
        objs.extend(s.pd.covers.iter().cloned());
        objs.push(s.pd.generator.clone());
        let p = CatPresentation::from_reps(&s.cat, &objs).unwrap();
        let g = objs.len() - 1;
        let all: Vec<usize> = (1..objs.len()).collect();
        let (proj, _) = p.full_subcategory(&all).unwrap();
        let gp = proj.len() - 1;
        assert!(proj.dominates(&[gp]));
        assert!(!p.dominates(&[0]));
        assert!(!p.dominates(&[g]), "1 is not a retract of sums of G");
        let (sub, emb) = proj.full_subcategory(&[gp]).unwrap();
        assert!(c_equivalence_check(&sub, &proj, &emb));
        let (sub1, emb1) = proj.full_subcategory(&[0]).unwrap();
        assert!(!c_equivalence_check(&sub1, &proj, &emb1));
    }
}
