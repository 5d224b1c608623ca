//! Row-sparse exact matrices. Actions of the regular module and of tensor
//! products are mostly zeros, so representations store these.

use cyclo::{Field, MatrixS, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SpMat {
    f: &'static Field,
    rows: usize,
    cols: usize,
    /// Per row: (column, value), sorted by column, no zeros.
    data: Vec<Vec<(usize, Scalar)>>,
}

fn push_acc(row: &mut Vec<(usize, Scalar)>, c: usize, v: Scalar) {
    // rows are assembled through a scratch buffer, so this only merges equal neighbors
    if let Some(last) = row.last_mut() {
        if last.0 == c {
            last.1 += &v;
            return;
        }
    }
    row.push((c, v));
}

impl SpMat {
    pub fn zeros(f: &'static Field, rows: usize, cols: usize) -> SpMat {
        SpMat { f, rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(f: &'static Field, n: usize) -> SpMat {
        SpMat { f, rows: n, cols: n, data: (0..n).map(|i| vec![(i, Scalar::one(f))]).collect() }
    }

    pub fn from_dense(m: &MatrixS) -> SpMat {
        let data = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect())
            .collect();
        SpMat { f: m.field(), rows: m.rows(), cols: m.cols(), data }
    }

    pub fn from_rows(f: &'static Field, rows: usize, cols: usize, mut data: Vec<Vec<(usize, Scalar)>>) -> SpMat {
        for r in &mut data {
            r.sort_by_key(|e| e.0);
            let mut out: Vec<(usize, Scalar)> = Vec::with_capacity(r.len());
            for (c, v) in r.drain(..) {
                push_acc(&mut out, c, v);
            }
            out.retain(|e| !e.1.is_zero());
            *r = out;
        }
        SpMat { f, rows, cols, data }
    }

    pub fn to_dense(&self) -> MatrixS {
        let mut m = MatrixS::zeros(self.f, self.rows, self.cols);
        for (i, r) in self.data.iter().enumerate() {
            for (j, v) in r {
                m.set(i, *j, v.clone());
            }
        }
        m
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
    pub fn row(&self, i: usize) -> &[(usize, Scalar)] {
        &self.data[i]
    }
    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        match self.data[i].binary_search_by_key(&j, |e| e.0) {
            Ok(p) => self.data[i][p].1.clone(),
            Err(_) => Scalar::zero(self.f),
        }
    }

    pub fn scale(&self, s: &Scalar) -> SpMat {
        if s.is_zero() {
            return SpMat::zeros(self.f, self.rows, self.cols);
        }
        SpMat {
            f: self.f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|r| r.iter().map(|(j, v)| (*j, v * s)).collect()).collect(),
        }
    }

    /// self + s·o
    pub fn add_scaled(&self, o: &SpMat, s: &Scalar) -> SpMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "sparse add shape");
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                        out.push(a[i].clone());
                        i += 1;
                    } else if i == a.len() || b[j].0 < a[i].0 {
                        out.push((b[j].0, &b[j].1 * s));
                        j += 1;
                    } else {
                        let v = &a[i].1 + &(&b[j].1 * s);
                        if !v.is_zero() {
                            out.push((a[i].0, v));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                out
            })
            .collect();
        SpMat { f: self.f, rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, o: &SpMat) -> SpMat {
        assert_eq!(self.cols, o.rows, "sparse mul shape");
        let mut scratch: Vec<Option<Scalar>> = vec![None; o.cols];
        let mut touched: Vec<usize> = Vec::new();
        let data = self
            .data
            .iter()
            .map(|r| {
                for (k, a) in r {
                    for (j, b) in &o.data[*k] {
                        let p = a * b;
                        match &mut scratch[*j] {
                            Some(v) => *v += &p,
                            slot @ None => {
                                *slot = Some(p);
                                touched.push(*j);
                            }
                        }
                    }
                }
                touched.sort_unstable();
                let out: Vec<(usize, Scalar)> = touched
                    .drain(..)
                    .filter_map(|j| scratch[j].take().filter(|v| !v.is_zero()).map(|v| (j, v)))
                    .collect();
                out
            })
            .collect();
        SpMat { f: self.f, rows: self.rows, cols: o.cols, data }
    }

    pub fn mul_dense(&self, o: &MatrixS) -> MatrixS {
        assert_eq!(self.cols, o.rows(), "sparse-dense mul shape");
        let mut m = MatrixS::zeros(self.f, self.rows, o.cols());
        for (i, r) in self.data.iter().enumerate() {
            for (k, a) in r {
                for (j, b) in o.row(*k).iter().enumerate() {
                    if !b.is_zero() {
                        let v = m.get(i, j) + &(a * b);
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }

    /// Dense · sparse.
    pub fn dense_mul(a: &MatrixS, s: &SpMat) -> MatrixS {
        assert_eq!(a.cols(), s.rows, "dense-sparse mul shape");
        let mut m = MatrixS::zeros(s.f, a.rows(), s.cols);
        for i in 0..a.rows() {
            let mut acc: Vec<Scalar> = vec![Scalar::zero(s.f); s.cols];
            for (k, x) in a.row(i).iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in &s.data[k] {
                    acc[*j] += &(x * y);
                }
            }
            for (j, v) in acc.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.data
            .iter()
            .map(|r| {
                let mut s = Scalar::zero(self.f);
                for (j, a) in r {
                    if !v[*j].is_zero() {
                        s += &(a * &v[*j]);
                    }
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> SpMat {
        let mut data = vec![Vec::new(); self.cols];
        for (i, r) in self.data.iter().enumerate() {
            for (j, v) in r {
                data[*j].push((i, v.clone()));
            }
        }
        SpMat { f: self.f, rows: self.cols, cols: self.rows, data }
    }

    pub fn kron(&self, o: &SpMat) -> SpMat {
        let mut data = Vec::with_capacity(self.rows * o.rows);
        for ra in &self.data {
            for rb in &o.data {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for (ja, a) in ra {
                    for (jb, b) in rb {
                        row.push((ja * o.cols + jb, a * b));
                    }
                }
                data.push(row);
            }
        }
        SpMat { f: self.f, rows: self.rows * o.rows, cols: self.cols * o.cols, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyclo::field;

    #[test]
    fn sparse_matches_dense() {
        let f = field(12);
        let a = MatrixS::from_ints(f, &[vec![1, 0, 2], vec![0, 0, -1]]);
        let b = MatrixS::from_ints(f, &[vec![0, 1], vec![3, 0], vec![1, 1]]);
        let (sa, sb) = (SpMat::from_dense(&a), SpMat::from_dense(&b));
        assert_eq!(sa.mul(&sb).to_dense(), &a * &b);
        assert_eq!(sa.mul_dense(&b), &a * &b);
        assert_eq!(SpMat::dense_mul(&a, &sb), &a * &b);
        assert_eq!(sa.kron(&sb).to_dense(), a.kron(&b));
        assert_eq!(sa.transpose().to_dense(), a.transpose());
        let two = Scalar::from_int(f, 2);
        assert_eq!(sa.add_scaled(&sa, &two).to_dense(), a.scale(&Scalar::from_int(f, 3)));
    }
}
