//! Dense matrices over Q(ζ_N) with exact elimination.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::Field;
use crate::scalar::Scalar;
use crate::KernelError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatrixS {
    f: &'static Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Result of `rref`: the reduced matrix and its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: MatrixS,
    pub pivots: Vec<usize>,
}

fn shape(what: &str, a: (usize, usize), b: (usize, usize)) -> KernelError {
    KernelError::ShapeMismatch(format!("{what}: {}x{} vs {}x{}", a.0, a.1, b.0, b.1))
}

impl MatrixS {
    pub fn zeros(f: &'static Field, rows: usize, cols: usize) -> MatrixS {
        MatrixS { f, rows, cols, data: vec![Scalar::zero(f); rows * cols] }
    }

    pub fn identity(f: &'static Field, n: usize) -> MatrixS {
        let mut m = MatrixS::zeros(f, n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one(f));
        }
        m
    }

    pub fn from_fn(f: &'static Field, rows: usize, cols: usize, mut g: impl FnMut(usize, usize) -> Scalar) -> MatrixS {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(g(i, j));
            }
        }
        MatrixS { f, rows, cols, data }
    }

    /// Row-major entries; errors if the count is not rows·cols.
    pub fn from_vec(f: &'static Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<MatrixS, KernelError> {
        if data.len() != rows * cols {
            return Err(KernelError::ShapeMismatch(format!("{} entries for {rows}x{cols}", data.len())));
        }
        Ok(MatrixS { f, rows, cols, data })
    }

    pub fn from_ints(f: &'static Field, rows: &[Vec<i64>]) -> MatrixS {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        MatrixS::from_fn(f, r, c, |i, j| Scalar::from_int(f, rows[i][j]))
    }

    /// Column vector.
    pub fn column(f: &'static Field, v: Vec<Scalar>) -> MatrixS {
        let n = v.len();
        MatrixS { f, rows: n, cols: 1, data: v }
    }

    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> MatrixS {
        MatrixS::from_fn(self.f, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Scalar) -> MatrixS {
        MatrixS { f: self.f, rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn try_add(&self, o: &MatrixS) -> Result<MatrixS, KernelError> {
        if self.shape() != o.shape() {
            return Err(shape("add", self.shape(), o.shape()));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(MatrixS { f: self.f, rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, o: &MatrixS) -> Result<MatrixS, KernelError> {
        if self.shape() != o.shape() {
            return Err(shape("sub", self.shape(), o.shape()));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        Ok(MatrixS { f: self.f, rows: self.rows, cols: self.cols, data })
    }

    pub fn try_mul(&self, o: &MatrixS) -> Result<MatrixS, KernelError> {
        if self.cols != o.rows {
            return Err(shape("mul", self.shape(), o.shape()));
        }
        let mut out = MatrixS::zeros(self.f, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let orow = o.row(k);
                for (j, b) in orow.iter().enumerate() {
                    if !b.is_zero() {
                        let idx = i * o.cols + j;
                        out.data[idx] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix applied to a vector.
    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>, KernelError> {
        if v.len() != self.cols {
            return Err(shape("apply", self.shape(), (v.len(), 1)));
        }
        let mut out = vec![Scalar::zero(self.f); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            for (a, b) in self.row(i).iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    *o += &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; index of (i, k) is i·rows(o) + k.
    pub fn kron(&self, o: &MatrixS) -> MatrixS {
        let (r, c) = (self.rows * o.rows, self.cols * o.cols);
        let mut out = MatrixS::zeros(self.f, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        let b = o.get(k, l);
                        if !b.is_zero() {
                            out.set(i * o.rows + k, j * o.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hstack(&self, o: &MatrixS) -> Result<MatrixS, KernelError> {
        if self.rows != o.rows {
            return Err(shape("hstack", self.shape(), o.shape()));
        }
        Ok(MatrixS::from_fn(self.f, self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                o.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn vstack(&self, o: &MatrixS) -> Result<MatrixS, KernelError> {
        if self.cols != o.cols {
            return Err(shape("vstack", self.shape(), o.shape()));
        }
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Ok(MatrixS { f: self.f, rows: self.rows + o.rows, cols: self.cols, data })
    }

    pub fn select_cols(&self, cols: &[usize]) -> MatrixS {
        MatrixS::from_fn(self.f, self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> MatrixS {
        MatrixS::from_fn(self.f, rows.len(), self.cols, |i, j| self.get(rows[i], j).clone())
    }

    pub fn trace(&self) -> Scalar {
        let mut t = Scalar::zero(self.f);
        for i in 0..self.rows.min(self.cols) {
            t += self.get(i, i);
        }
        t
    }

    /// Reduced row echelon form by exact pivoted elimination.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        let cols = m.cols;
        for c in 0..cols {
            if r == m.rows {
                break;
            }
            // prefer a rational pivot: keeps coefficient growth down
            let mut p = None;
            for i in r..m.rows {
                let x = m.get(i, c);
                if !x.is_zero() {
                    if x.as_rational().is_some() {
                        p = Some(i);
                        break;
                    }
                    if p.is_none() {
                        p = Some(i);
                    }
                }
            }
            let Some(p) = p else { continue };
            if p != r {
                for j in 0..cols {
                    m.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..cols {
                let idx = r * cols + j;
                if !m.data[idx].is_zero() {
                    m.data[idx] = &m.data[idx] * &inv;
                }
            }
            let prow: Vec<(usize, Scalar)> =
                (c..cols).filter(|&j| !m.get(r, j).is_zero()).map(|j| (j, m.get(r, j).clone())).collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let fac = m.get(i, c).clone();
                if fac.is_zero() {
                    continue;
                }
                for (j, v) in &prow {
                    let idx = i * cols + j;
                    m.data[idx] -= &(&fac * v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the right kernel, as the columns of the returned matrix.
    pub fn nullspace(&self) -> MatrixS {
        let Rref { matrix: r, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = MatrixS::zeros(self.f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, Scalar::one(self.f));
            for (pi, &pc) in pivots.iter().enumerate() {
                let v = r.get(pi, fc);
                if !v.is_zero() {
                    out.set(pc, k, -v);
                }
            }
        }
        out
    }

    /// Solve A X = B. Returns a particular solution and a nullspace basis of A,
    /// or `None` if the system is inconsistent.
    pub fn solve(&self, b: &MatrixS) -> Result<Option<(MatrixS, MatrixS)>, KernelError> {
        if b.rows != self.rows {
            return Err(shape("solve", self.shape(), b.shape()));
        }
        let aug = self.hstack(b)?;
        let Rref { matrix: r, pivots } = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut x = MatrixS::zeros(self.f, self.cols, b.cols);
        for (pi, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(pi, self.cols + j).clone());
            }
        }
        Ok(Some((x, self.nullspace())))
    }

    pub fn inverse(&self) -> Result<MatrixS, KernelError> {
        if !self.is_square() {
            return Err(shape("inverse", self.shape(), self.shape()));
        }
        let n = self.rows;
        let aug = self.hstack(&MatrixS::identity(self.f, n))?;
        let Rref { matrix: r, pivots } = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(KernelError::DivisionByZero);
        }
        Ok(MatrixS::from_fn(self.f, n, n, |i, j| r.get(i, n + j).clone()))
    }

    /// Basis (as columns) of the column space, using pivot columns of self.
    pub fn column_basis(&self) -> MatrixS {
        let piv = self.rref().pivots;
        self.select_cols(&piv)
    }
}

impl fmt::Debug for MatrixS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixS {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mul for &MatrixS {
    type Output = MatrixS;
    fn mul(self, o: &MatrixS) -> MatrixS {
        self.try_mul(o).expect("matrix shapes")
    }
}
impl Add for &MatrixS {
    type Output = MatrixS;
    fn add(self, o: &MatrixS) -> MatrixS {
        self.try_add(o).expect("matrix shapes")
    }
}
impl Sub for &MatrixS {
    type Output = MatrixS;
    fn sub(self, o: &MatrixS) -> MatrixS {
        self.try_sub(o).expect("matrix shapes")
    }
}
impl Neg for &MatrixS {
    type Output = MatrixS;
    fn neg(self) -> MatrixS {
        MatrixS { f: self.f, rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field;

    #[test]
    fn ranks() {
        let f = field(12);
        assert_eq!(MatrixS::identity(f, 3).rank(), 3);
        assert_eq!(MatrixS::zeros(f, 2, 5).rank(), 0);
    }

    #[test]
    fn nullspace_of_ones() {
        let f = field(12);
        let a = MatrixS::from_ints(f, &[vec![1, 1], vec![1, 1]]);
        let n = a.nullspace();
        assert_eq!(n.cols(), 1);
        assert!((&a * &n).is_zero());
    }

    #[test]
    fn inverse_and_solve() {
        let f = field(12);
        let z = Scalar::root_of_unity(f, 1);
        let a = MatrixS::from_fn(f, 2, 2, |i, j| if i == j { z.clone() } else { Scalar::from_int(f, (i + 2 * j) as i64) });
        let ai = a.inverse().unwrap();
        assert_eq!(&a * &ai, MatrixS::identity(f, 2));
        let b = MatrixS::from_ints(f, &[vec![1], vec![2]]);
        let (x, n) = a.solve(&b).unwrap().unwrap();
        assert_eq!(&a * &x, b);
        assert_eq!(n.cols(), 0);
        let sing = MatrixS::from_ints(f, &[vec![1, 1], vec![1, 1]]);
        assert!(sing.solve(&b).unwrap().is_none());
        assert!(sing.inverse().is_err());
    }

    #[test]
    fn shape_errors() {
        let f = field(4);
        let a = MatrixS::zeros(f, 2, 3);
        assert!(matches!(a.try_mul(&a), Err(KernelError::ShapeMismatch(_))));
        assert!(MatrixS::from_vec(f, 2, 2, vec![Scalar::zero(f)]).is_err());
    }
}
