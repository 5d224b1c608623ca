//! Univariate polynomials over Q(ζ_N): minimal polynomials and roots lying in the field.
//!
//! Root finding is float-guided: complex approximations under every embedding propose
//! candidate coordinates, and only candidates that are exact roots are returned.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::field::Field;
use crate::matrix::MatrixS;
use crate::scalar::Scalar;
use crate::KernelError;

/// Coefficients low degree first; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    f: &'static Field,
    pub coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(f: &'static Field, mut coeffs: Vec<Scalar>) -> Poly {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { f, coeffs }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(self.f);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    fn embed(&self, j: u32) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.embed(j)).collect()
    }
}

/// Minimal polynomial of a square matrix (monic), from the first linear dependency among its powers.
pub fn min_poly(a: &MatrixS) -> Result<Poly, KernelError> {
    if !a.is_square() {
        return Err(KernelError::ShapeMismatch("min_poly of non-square matrix".into()));
    }
    let f = a.field();
    let n = a.rows();
    let mut powers: Vec<MatrixS> = vec![MatrixS::identity(f, n)];
    loop {
        let k = powers.len();
        let next = powers[k - 1].try_mul(a)?;
        // columns = vectorized I, A, ..., A^{k-1}; solve for A^k
        let basis = MatrixS::from_fn(f, n * n, k, |i, j| powers[j].entries()[i].clone());
        let rhs = MatrixS::column(f, next.entries().to_vec());
        if let Some((x, _)) = basis.solve(&rhs)? {
            let mut coeffs: Vec<Scalar> = (0..k).map(|i| -x.get(i, 0)).collect();
            coeffs.push(Scalar::one(f));
            return Ok(Poly::new(f, coeffs));
        }
        powers.push(next);
    }
}

fn complex_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let q: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let radius = 1.0 + q[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius * 0.9, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    let eval = |x: Complex64| q.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Best rational approximation with denominator ≤ `max_den`, by continued fractions.
fn rational_guess(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-12 || ((h1 as f64) / (k1 as f64) - x).abs() < 1e-10 * x.abs().max(1.0) {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Solve the power-basis coordinates of x from its images under all embeddings.
fn coords_from_embeddings(f: &'static Field, vals: &[Complex64]) -> Option<Vec<BigRational>> {
    let exps = f.galois_exponents();
    let phi = f.degree();
    let n = f.order() as f64;
    // real least-squares is square here: φ complex equations in φ real unknowns, use real and
    // imaginary parts and solve the 2φ×φ normal equations
    let mut a = vec![vec![0.0f64; phi]; 2 * phi];
    let mut b = vec![0.0f64; 2 * phi];
    for (r, (&j, v)) in exps.iter().zip(vals).enumerate() {
        for (k, row) in [2 * r, 2 * r + 1].into_iter().enumerate() {
            for c in 0..phi {
                let ang = 2.0 * std::f64::consts::PI * (j as f64) * (c as f64) / n;
                a[row][c] = if k == 0 { ang.cos() } else { ang.sin() };
            }
            b[row] = if k == 0 { v.re } else { v.im };
        }
    }
    let mut ata = vec![vec![0.0f64; phi + 1]; phi];
    for i in 0..phi {
        for j in 0..phi {
            ata[i][j] = (0..2 * phi).map(|r| a[r][i] * a[r][j]).sum();
        }
        ata[i][phi] = (0..2 * phi).map(|r| a[r][i] * b[r]).sum();
    }
    for c in 0..phi {
        let p = (c..phi).max_by(|&x, &y| ata[x][c].abs().total_cmp(&ata[y][c].abs()))?;
        ata.swap(c, p);
        let pv = ata[c][c];
        if pv.abs() < 1e-12 {
            return None;
        }
        for r in 0..phi {
            if r != c {
                let fct = ata[r][c] / pv;
                for k in c..=phi {
                    ata[r][k] -= fct * ata[c][k];
                }
            }
        }
    }
    (0..phi).map(|i| rational_guess(ata[i][phi] / ata[i][i], 1_000_000)).collect()
}

/// Distinct roots of `p` lying in Q(ζ_N), each certified by exact evaluation.
pub fn roots_in_field(p: &Poly) -> Vec<Scalar> {
    let f = p.f;
    let Some(deg) = p.degree() else { return vec![] };
    if deg == 0 {
        return vec![];
    }
    let exps = f.galois_exponents();
    let per_embedding: Vec<Vec<Complex64>> = exps.iter().map(|&j| complex_roots(&p.embed(j))).collect();
    let mut found: Vec<Scalar> = Vec::new();
    // enumerate one root per embedding; the combinatorics are tiny for the degrees used here
    let mut choice = vec![0usize; exps.len()];
    loop {
        let vals: Vec<Complex64> = choice.iter().enumerate().map(|(e, &c)| per_embedding[e][c]).collect();
        if let Some(coords) = coords_from_embeddings(f, &vals) {
            let x = Scalar::from_coeffs(f, &coords);
            if !found.contains(&x) && p.eval(&x).is_zero() {
                found.push(x);
                if found.len() == deg {
                    break;
                }
            }
        }
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < deg {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field;

    #[test]
    fn min_poly_of_rotation() {
        let f = field(12);
        let a = MatrixS::from_ints(f, &[vec![0, -1], vec![1, 0]]);
        let p = min_poly(&a).unwrap();
        assert_eq!(p.coeffs, vec![Scalar::one(f), Scalar::zero(f), Scalar::one(f)]);
        let mut roots = roots_in_field(&p);
        roots.sort_by_key(|r| r.to_string());
        assert_eq!(roots.len(), 2);
        assert!(roots.contains(&Scalar::root_of_unity(f, 3)));
        assert!(roots.contains(&Scalar::root_of_unity(f, 9)));
    }

    #[test]
    fn roots_of_x2_minus_3() {
        let f = field(12);
        let p = Poly::new(f, vec![Scalar::from_int(f, -3), Scalar::zero(f), Scalar::one(f)]);
        let r = roots_in_field(&p);
        assert_eq!(r.len(), 2);
        for x in &r {
            assert_eq!(x * x, Scalar::from_int(f, 3));
        }
        // x^2 - 2 does not split over Q(ζ_12)
        let q = Poly::new(f, vec![Scalar::from_int(f, -2), Scalar::zero(f), Scalar::one(f)]);
        assert!(roots_in_field(&q).is_empty());
    }

    #[test]
    fn rational_roots_with_denominators() {
        let f = field(12);
        // (x - 1/3)(x + 5/2)
        let p = Poly::new(
            f,
            vec![Scalar::from_frac(f, -5, 6).unwrap(), Scalar::from_frac(f, 13, 6).unwrap(), Scalar::one(f)],
        );
        let r = roots_in_field(&p);
        assert!(r.contains(&Scalar::from_frac(f, 1, 3).unwrap()));
        assert!(r.contains(&Scalar::from_frac(f, -5, 2).unwrap()));
    }
}
