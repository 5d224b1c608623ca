//! Finite-dimensional associative algebras given by structure constants:
//! radical, semisimple quotient, central and primitive idempotents.
//!
//! Used on the backend algebra itself (simples and projective covers) and on
//! endomorphism algebras (Karoubi envelope).

use cyclo::{lift_idempotent, min_poly, roots_in_field, Field, MatrixS, Poly, Scalar};

use crate::error::{Error, Result};
use crate::hopf::HopfPresentation;

pub type Elt = Vec<Scalar>;

#[derive(Clone)]
pub struct FinAlgebra {
    pub f: &'static Field,
    pub dim: usize,
    mul_tab: Vec<Vec<(usize, Scalar)>>,
    pub unit: Elt,
}

/// One simple module of the algebra together with its lifted primitive idempotent.
#[derive(Clone, Debug)]
pub struct SimpleBlock {
    /// Primitive idempotent of the algebra (lifted from the semisimple quotient).
    pub idempotent: Elt,
    pub dim: usize,
    /// Action of each basis element on the simple module, in a fixed basis.
    pub action: Vec<MatrixS>,
    /// For a in the algebra: coordinates of the image of a·e in the simple module,
    /// as a matrix (dim × algebra dim) applied to the coordinates of a·e.
    pub cover_map: MatrixS,
}

/// Deterministic small coefficients for "generic" linear combinations.
fn generic_coeffs(n: usize, attempt: usize) -> Vec<i64> {
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15 ^ (attempt as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x % 11) as i64 - 5
        })
        .collect()
}

impl FinAlgebra {
    pub fn from_hopf(h: &HopfPresentation) -> FinAlgebra {
        let d = h.d;
        let mut mul_tab = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                mul_tab.push(h.mul_basis(i, j).to_vec());
            }
        }
        FinAlgebra { f: h.f, dim: d, mul_tab, unit: h.unit.clone() }
    }

    /// Algebra spanned by the given matrices, which must be closed under products
    /// and contain the identity in their span.
    pub fn from_matrices(f: &'static Field, basis: &[MatrixS]) -> Result<FinAlgebra> {
        let n = basis.len();
        if n == 0 {
            return Ok(FinAlgebra { f, dim: 0, mul_tab: vec![], unit: vec![] });
        }
        let (r, c) = basis[0].shape();
        let big = MatrixS::from_fn(f, r * c, n, |i, j| basis[j].entries()[i].clone());
        let coords = |m: &MatrixS| -> Result<Elt> {
            let rhs = MatrixS::column(f, m.entries().to_vec());
            match big.solve(&rhs)? {
                Some((x, _)) => Ok(x.col(0)),
                None => Err(Error::NoSolution("product leaves the spanned algebra".into())),
            }
        };
        let mut mul_tab = Vec::with_capacity(n * n);
        for a in basis {
            for b in basis {
                let p = a.try_mul(b)?;
                let x = coords(&p)?;
                mul_tab.push(x.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
            }
        }
        let unit = coords(&MatrixS::identity(f, r))?;
        Ok(FinAlgebra { f, dim: n, mul_tab, unit })
    }

    pub fn from_structure(f: &'static Field, dim: usize, mult: impl Fn(usize, usize) -> Elt, unit: Elt) -> FinAlgebra {
        let mut mul_tab = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                mul_tab.push(mult(i, j).into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
            }
        }
        FinAlgebra { f, dim, mul_tab, unit }
    }

    pub fn zero(&self) -> Elt {
        vec![Scalar::zero(self.f); self.dim]
    }

    pub fn basis(&self, i: usize) -> Elt {
        let mut v = self.zero();
        v[i] = Scalar::one(self.f);
        v
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
                for (k, c) in &self.mul_tab[i * self.dim + j] {
                    out[*k] += &(&xy * c);
                }
            }
        }
        out
    }

    fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn scale(&self, a: &Elt, s: &Scalar) -> Elt {
        a.iter().map(|x| x * s).collect()
    }

    /// Left multiplication matrix (column j = a e_j).
    pub fn lmat(&self, a: &Elt) -> MatrixS {
        let d = self.dim;
        let mut m = MatrixS::zeros(self.f, d, d);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, c) in &self.mul_tab[i * d + j] {
                    let v = m.get(*k, j) + &(x * c);
                    m.set(*k, j, v);
                }
            }
        }
        m
    }

    pub fn rmat(&self, a: &Elt) -> MatrixS {
        let d = self.dim;
        let mut m = MatrixS::zeros(self.f, d, d);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, c) in &self.mul_tab[j * d + i] {
                    let v = m.get(*k, j) + &(x * c);
                    m.set(*k, j, v);
                }
            }
        }
        m
    }

    /// Jacobson radical as the kernel of the trace form tr(L_a L_b) (characteristic zero).
    pub fn radical(&self) -> MatrixS {
        let d = self.dim;
        let ls: Vec<MatrixS> = (0..d).map(|i| self.lmat(&self.basis(i))).collect();
        let mut form = MatrixS::zeros(self.f, d, d);
        for i in 0..d {
            for j in i..d {
                let t = (&ls[i] * &ls[j]).trace();
                form.set(i, j, t.clone());
                form.set(j, i, t);
            }
        }
        form.nullspace()
    }

    /// Center as a column basis.
    pub fn center(&self) -> MatrixS {
        let d = self.dim;
        let mut rows = MatrixS::zeros(self.f, 0, d);
        for i in 0..d {
            let b = self.basis(i);
            let c = &self.rmat(&b) - &self.lmat(&b);
            rows = rows.vstack(&c).expect("shape");
        }
        rows.nullspace()
    }

    /// Minimal polynomial of x inside the corner algebra with unit p (x = p x p).
    fn corner_min_poly(&self, x: &Elt, p: &Elt) -> Result<Poly> {
        let mut powers = vec![p.clone()];
        loop {
            let k = powers.len();
            let next = self.mul(&powers[k - 1], x);
            let basis = MatrixS::from_fn(self.f, self.dim, k, |i, j| powers[j][i].clone());
            if let Some((c, _)) = basis.solve(&MatrixS::column(self.f, next.clone()))? {
                let mut coeffs: Vec<Scalar> = (0..k).map(|i| -c.get(i, 0)).collect();
                coeffs.push(Scalar::one(self.f));
                return Ok(Poly::new(self.f, coeffs));
            }
            powers.push(next);
        }
    }

    /// Spectral idempotents of x in the corner pAp: q_r = Π_{s≠r} (x - s p)/(r - s).
    /// Returns None if x is not split semisimple there.
    fn spectral(&self, x: &Elt, p: &Elt) -> Result<Option<Vec<Elt>>> {
        let mp = self.corner_min_poly(x, p)?;
        let deg = mp.degree().unwrap_or(0);
        if deg < 2 {
            return Ok(None);
        }
        let roots = roots_in_field(&mp);
        if roots.len() != deg {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(deg);
        for (i, r) in roots.iter().enumerate() {
            let mut q = p.clone();
            for (j, s) in roots.iter().enumerate() {
                if i == j {
                    continue;
                }
                let xs = self.sub(x, &self.scale(p, s));
                let inv = (r - s).inv()?;
                q = self.scale(&self.mul(&q, &xs), &inv);
            }
            out.push(q);
        }
        Ok(Some(out))
    }

    fn corner_dim(&self, p: &Elt) -> usize {
        let cols: Vec<Elt> = (0..self.dim).map(|i| self.mul(&self.mul(p, &self.basis(i)), p)).collect();
        MatrixS::from_fn(self.f, self.dim, self.dim, |i, j| cols[j][i].clone()).rank()
    }

    fn is_idempotent(&self, e: &Elt) -> bool {
        self.mul(e, e) == *e
    }

    /// Central primitive idempotents of a semisimple algebra.
    fn central_idempotents(&self) -> Result<Vec<Elt>> {
        let z = self.center();
        let nz = z.cols();
        if nz == 1 {
            return Ok(vec![self.unit.clone()]);
        }
        for attempt in 0..32 {
            let k = generic_coeffs(nz, attempt);
            let mut c = self.zero();
            for (j, kj) in k.iter().enumerate() {
                let s = Scalar::from_int(self.f, *kj);
                for i in 0..self.dim {
                    c[i] += &(z.get(i, j) * &s);
                }
            }
            let mp = min_poly(&self.lmat(&c))?;
            if mp.degree() != Some(nz) {
                continue;
            }
            let roots = roots_in_field(&mp);
            if roots.len() != nz {
                return Err(Error::FieldNotSplitting(format!(
                    "central element has minimal polynomial of degree {nz} with {} roots in the field",
                    roots.len()
                )));
            }
            return Ok(self.spectral(&c, &self.unit)?.expect("split central element"));
        }
        Err(Error::FieldNotSplitting("no separating central element found".into()))
    }

    /// Refine a central idempotent to a primitive one.
    fn primitive_in(&self, block: &Elt, hints: &[Elt]) -> Result<Elt> {
        let mut p = block.clone();
        loop {
            let cd = self.corner_dim(&p);
            if cd == 1 {
                return Ok(p);
            }
            let mut best: Option<(usize, Elt)> = None;
            let candidates = hints.iter().cloned().chain((0..self.dim).map(|i| self.basis(i)));
            for b in candidates {
                let x = self.mul(&self.mul(&p, &b), &p);
                if let Some(qs) = self.spectral(&x, &p)? {
                    for q in qs {
                        let d = self.corner_dim(&q);
                        if d > 0 && d < cd && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, q));
                        }
                    }
                    if best.is_some() {
                        break;
                    }
                }
            }
            match best {
                Some((_, q)) => p = q,
                None => {
                    return Err(Error::FieldNotSplitting(format!(
                        "corner algebra of dimension {cd} has no split element"
                    )))
                }
            }
        }
    }

    /// Simple modules, one per isomorphism class, with lifted primitive idempotents.
    /// `hints` are tried first when splitting blocks (e.g. grouplike elements).
    pub fn simple_blocks(&self, hints: &[Elt]) -> Result<Vec<SimpleBlock>> {
        let d = self.dim;
        let f = self.f;
        let jac = self.radical();
        let r = jac.cols();
        // complement of the radical by standard basis vectors
        let aug = jac.hstack(&MatrixS::identity(f, d))?;
        let piv = aug.rref().pivots;
        let comp: Vec<usize> = piv.iter().filter(|&&c| c >= r).map(|&c| c - r).collect();
        let q = comp.len();
        let change = jac.hstack(&MatrixS::identity(f, d).select_cols(&comp))?;
        let change_inv = change.inverse()?;
        // projection A -> Q in the complement coordinates
        let proj = change_inv.select_rows(&(r..d).collect::<Vec<_>>());
        let lift = |x: &Elt| -> Elt {
            let mut v = vec![Scalar::zero(f); d];
            for (k, c) in comp.iter().enumerate() {
                v[*c] = x[k].clone();
            }
            v
        };
        let project = |a: &Elt| -> Elt { proj.apply(a).expect("shape") };
        let quot = FinAlgebra::from_structure(
            f,
            q,
            |i, j| {
                let ei = lift(&(0..q).map(|k| if k == i { Scalar::one(f) } else { Scalar::zero(f) }).collect());
                let ej = lift(&(0..q).map(|k| if k == j { Scalar::one(f) } else { Scalar::zero(f) }).collect());
                project(&self.mul(&ei, &ej))
            },
            project(&self.unit),
        );
        let qhints: Vec<Elt> = hints.iter().map(|h| project(h)).collect();
        let mut out = Vec::new();
        for c in quot.central_idempotents()? {
            let bdim = quot.corner_dim(&c);
            let p = quot.primitive_in(&c, &qhints)?;
            // the simple module Q p
            let cols: Vec<Elt> = (0..q).map(|i| quot.mul(&quot.basis(i), &p)).collect();
            let qp = MatrixS::from_fn(f, q, q, |i, j| cols[j][i].clone()).column_basis();
            let n = qp.cols();
            if n * n != bdim {
                return Err(Error::FieldNotSplitting(format!("block of dimension {bdim} with simple of dimension {n}")));
            }
            let coords = |v: &Elt| -> Vec<Scalar> {
                let (x, _) = qp.solve(&MatrixS::column(f, v.clone())).expect("shape").expect("vector lies in Qp");
                x.col(0)
            };
            let action: Vec<MatrixS> = (0..d)
                .map(|i| {
                    let a = project(&self.basis(i));
                    let imgs: Vec<Vec<Scalar>> = (0..n).map(|j| coords(&quot.mul(&a, &qp.col(j)))).collect();
                    MatrixS::from_fn(f, n, n, |r, c| imgs[c][r].clone())
                })
                .collect();
            // cover map on A: a ↦ coordinates of the image of a in Q p (valid on A e)
            let cover_cols: Vec<Vec<Scalar>> = (0..d)
                .map(|i| {
                    let a = project(&self.basis(i));
                    coords(&quot.mul(&a, &p))
                })
                .collect();
            let cover_map = MatrixS::from_fn(f, n, d, |r, c| cover_cols[c][r].clone());
            // lift p to an idempotent of A
            let p0 = lift(&p);
            let nil = r + 1;
            let e_mat = lift_idempotent(&self.lmat(&p0), nil)?;
            let e = e_mat.apply(&self.unit)?;
            if !self.is_idempotent(&e) {
                return Err(Error::NotIdempotent);
            }
            out.push(SimpleBlock { idempotent: e, dim: n, action, cover_map });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyclo::field;

    #[test]
    fn upper_triangular_matrices() {
        // algebra of 2x2 upper triangular matrices: radical is 1-dim, two simples of dim 1
        let f = field(12);
        let e11 = MatrixS::from_ints(f, &[vec![1, 0], vec![0, 0]]);
        let e12 = MatrixS::from_ints(f, &[vec![0, 1], vec![0, 0]]);
        let e22 = MatrixS::from_ints(f, &[vec![0, 0], vec![0, 1]]);
        let a = FinAlgebra::from_matrices(f, &[e11, e12, e22]).unwrap();
        assert_eq!(a.radical().cols(), 1);
        let blocks = a.simple_blocks(&[]).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| b.dim == 1));
    }

    #[test]
    fn full_matrix_algebra_splits() {
        let f = field(12);
        let basis: Vec<MatrixS> = (0..4)
            .map(|k| MatrixS::from_fn(f, 2, 2, |i, j| if i * 2 + j == k { Scalar::one(f) } else { Scalar::zero(f) }))
            .collect();
        let a = FinAlgebra::from_matrices(f, &basis).unwrap();
        let blocks = a.simple_blocks(&[]).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].dim, 2);
    }
}
