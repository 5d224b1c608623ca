//! Exact elements of Q(ζ_N).
//!
//! Values are stored as a common denominator over integer numerators in the
//! power basis. Machine integers are used while they fit; arithmetic falls
//! back to big integers on overflow and demotes again when possible, so the
//! stored form is canonical and `==` is structural.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::field::{field, Field};
use crate::KernelError;

type Small = SmallVec<[i64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    S { den: i64, num: Small },
    B { den: BigInt, num: Vec<BigInt> },
}

#[derive(Clone)]
pub struct Scalar {
    f: &'static Field,
    r: Repr,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Normalize a small candidate; `None` if the result leaves i64 range.
fn norm_small(den: i128, num: &mut [i128]) -> Option<(i64, Small)> {
    if num.iter().all(|&x| x == 0) {
        return Some((1, num.iter().map(|_| 0i64).collect()));
    }
    let mut g = den;
    for &x in num.iter() {
        g = gcd_i128(g, x);
        if g == 1 {
            break;
        }
    }
    let sign = if den < 0 { -1 } else { 1 };
    let g = g * sign;
    let den = den / g;
    let mut out = Small::with_capacity(num.len());
    for x in num.iter() {
        out.push(i64::try_from(*x / g).ok()?);
    }
    Some((i64::try_from(den).ok()?, out))
}

fn norm_big(f: &'static Field, mut den: BigInt, mut num: Vec<BigInt>) -> Repr {
    if num.iter().all(|x| x.is_zero()) {
        return Repr::S { den: 1, num: (0..f.degree()).map(|_| 0).collect() };
    }
    let mut g = den.clone();
    for x in &num {
        g = g.gcd(x);
        if g.is_one() {
            break;
        }
    }
    if den.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        den /= &g;
        for x in num.iter_mut() {
            *x /= &g;
        }
    }
    if let Some(d) = den.to_i64() {
        let small: Option<Small> = num.iter().map(|x| x.to_i64()).collect();
        if let Some(n) = small {
            return Repr::S { den: d, num: n };
        }
    }
    Repr::B { den, num }
}

impl Repr {
    fn to_big(&self) -> (BigInt, Vec<BigInt>) {
        match self {
            Repr::S { den, num } => (BigInt::from(*den), num.iter().map(|&x| BigInt::from(x)).collect()),
            Repr::B { den, num } => (den.clone(), num.clone()),
        }
    }
}

impl Scalar {
    pub fn zero(f: &'static Field) -> Scalar {
        Scalar { f, r: Repr::S { den: 1, num: (0..f.degree()).map(|_| 0).collect() } }
    }

    pub fn one(f: &'static Field) -> Scalar {
        Scalar::from_int(f, 1)
    }

    pub fn from_int(f: &'static Field, v: i64) -> Scalar {
        let mut s = Scalar::zero(f);
        if let Repr::S { num, .. } = &mut s.r {
            num[0] = v;
        }
        s
    }

    /// p/q as a field element; errors on q = 0.
    pub fn from_frac(f: &'static Field, p: i64, q: i64) -> Result<Scalar, KernelError> {
        if q == 0 {
            return Err(KernelError::DivisionByZero);
        }
        let mut num = vec![0i128; f.degree()];
        num[0] = p as i128;
        let (den, num) = norm_small(q as i128, &mut num).expect("i64 input fits");
        Ok(Scalar { f, r: Repr::S { den, num } })
    }

    pub fn from_rational(f: &'static Field, q: &BigRational) -> Scalar {
        let mut num = vec![BigInt::zero(); f.degree()];
        num[0] = q.numer().clone();
        Scalar { f, r: norm_big(f, q.denom().clone(), num) }
    }

    /// Element with the given power-basis rational coordinates.
    pub fn from_coeffs(f: &'static Field, coeffs: &[BigRational]) -> Scalar {
        assert_eq!(coeffs.len(), f.degree());
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Scalar { f, r: norm_big(f, den, num) }
    }

    /// Coefficients of ζ^k reduced into the power basis (k may be any integer).
    pub fn root_of_unity(f: &'static Field, k: i64) -> Scalar {
        let p = f.power(k);
        Scalar { f, r: Repr::S { den: 1, num: p.iter().copied().collect() } }
    }

    /// ζ_N^k in the field Q(ζ_N).
    pub fn root_of_unity_n(n: u32, k: i64) -> Scalar {
        Scalar::root_of_unity(field(n), k)
    }

    pub fn field(&self) -> &'static Field {
        self.f
    }

    pub fn is_zero(&self) -> bool {
        match &self.r {
            Repr::S { num, .. } => num.iter().all(|&x| x == 0),
            Repr::B { .. } => false,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.r {
            Repr::S { den, num } => *den == 1 && num[0] == 1 && num[1..].iter().all(|&x| x == 0),
            Repr::B { .. } => false,
        }
    }

    /// Rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        let (den, num) = self.r.to_big();
        if num[1..].iter().all(|x| x.is_zero()) {
            Some(BigRational::new(num[0].clone(), den))
        } else {
            None
        }
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        let (den, num) = self.r.to_big();
        num.into_iter().map(|x| BigRational::new(x, den.clone())).collect()
    }

    fn same_field(&self, o: &Scalar) {
        assert!(
            std::ptr::eq(self.f, o.f),
            "mixing Q(ζ_{}) and Q(ζ_{})",
            self.f.order(),
            o.f.order()
        );
    }

    fn add_impl(&self, o: &Scalar, sign: i64) -> Scalar {
        self.same_field(o);
        if let (Repr::S { den: da, num: na }, Repr::S { den: db, num: nb }) = (&self.r, &o.r) {
            let (da, db) = (*da as i128, *db as i128);
            let g = gcd_i128(da, db);
            let l = da / g * db;
            let (fa, fb) = (l / da, l / db);
            let mut buf = [0i128; 16];
            let phi = na.len();
            let mut ok = phi <= 16;
            if ok {
                for i in 0..phi {
                    match (na[i] as i128)
                        .checked_mul(fa)
                        .and_then(|x| (nb[i] as i128 * sign as i128).checked_mul(fb).and_then(|y| x.checked_add(y)))
                    {
                        Some(v) => buf[i] = v,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                if let Some((den, num)) = norm_small(l, &mut buf[..phi]) {
                    return Scalar { f: self.f, r: Repr::S { den, num } };
                }
            }
        }
        let (da, na) = self.r.to_big();
        let (db, nb) = o.r.to_big();
        let l = da.lcm(&db);
        let (fa, fb) = (&l / &da, &l / &db);
        let num = na
            .iter()
            .zip(nb.iter())
            .map(|(x, y)| if sign > 0 { x * &fa + y * &fb } else { x * &fa - y * &fb })
            .collect();
        Scalar { f: self.f, r: norm_big(self.f, l, num) }
    }

    fn mul_impl(&self, o: &Scalar) -> Scalar {
        self.same_field(o);
        let phi = self.f.degree();
        if let (Repr::S { den: da, num: na }, Repr::S { den: db, num: nb }) = (&self.r, &o.r) {
            if let Some(s) = self.mul_small(*da, na, *db, nb, phi) {
                return s;
            }
        }
        let (da, na) = self.r.to_big();
        let (db, nb) = o.r.to_big();
        let mut conv = vec![BigInt::zero(); 2 * phi - 1];
        for i in 0..phi {
            if na[i].is_zero() {
                continue;
            }
            for j in 0..phi {
                if !nb[j].is_zero() {
                    conv[i + j] += &na[i] * &nb[j];
                }
            }
        }
        let mut num = vec![BigInt::zero(); phi];
        for (k, c) in conv.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (m, r) in self.f.reduction(k).iter().enumerate() {
                if *r != 0 {
                    num[m] += c * BigInt::from(*r);
                }
            }
        }
        Scalar { f: self.f, r: norm_big(self.f, da * db, num) }
    }

    fn mul_small(&self, da: i64, na: &Small, db: i64, nb: &Small, phi: usize) -> Option<Scalar> {
        if phi > 16 {
            return None;
        }
        let mut conv = [0i128; 32];
        for i in 0..phi {
            let a = na[i] as i128;
            if a == 0 {
                continue;
            }
            for j in 0..phi {
                let b = nb[j] as i128;
                if b != 0 {
                    conv[i + j] = conv[i + j].checked_add(a.checked_mul(b)?)?;
                }
            }
        }
        let mut num = [0i128; 16];
        for (k, c) in conv.iter().enumerate().take(2 * phi - 1) {
            if *c == 0 {
                continue;
            }
            if k < phi {
                num[k] = num[k].checked_add(*c)?;
                continue;
            }
            for (m, r) in self.f.reduction(k).iter().enumerate() {
                if *r != 0 {
                    num[m] = num[m].checked_add(c.checked_mul(*r as i128)?)?;
                }
            }
        }
        let den = (da as i128).checked_mul(db as i128)?;
        let (den, num) = norm_small(den, &mut num[..phi])?;
        Some(Scalar { f: self.f, r: Repr::S { den, num } })
    }

    /// Multiplicative inverse; `DivisionByZero` on 0.
    pub fn inv(&self) -> Result<Scalar, KernelError> {
        if self.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Scalar::from_rational(self.f, &q.recip()));
        }
        // Solve (multiplication-by-self) c = e_0 over Q.
        let phi = self.f.degree();
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(phi);
        let mut basis = Scalar::one(self.f);
        let z = Scalar::root_of_unity(self.f, 1);
        for _ in 0..phi {
            cols.push((self * &basis).coeffs());
            basis = &basis * &z;
        }
        let mut m: Vec<Vec<BigRational>> = (0..phi)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..phi).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for c in 0..phi {
            let p = (c..phi).find(|&r| !m[r][c].is_zero()).expect("field element has full-rank multiplication map");
            m.swap(c, p);
            let piv = m[c][c].clone();
            for x in m[c].iter_mut() {
                *x = &*x / &piv;
            }
            for r in 0..phi {
                if r != c && !m[r][c].is_zero() {
                    let f = m[r][c].clone();
                    let pivot_row = m[c].clone();
                    for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                        *x = &*x - &f * y;
                    }
                }
            }
        }
        let sol: Vec<BigRational> = m.iter().map(|row| row[phi].clone()).collect();
        Ok(Scalar::from_coeffs(self.f, &sol))
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar, KernelError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Scalar, KernelError> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one(self.f);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Image under the complex embedding ζ ↦ exp(2πi j/N).
    pub fn embed(&self, j: u32) -> Complex64 {
        let n = self.f.order() as f64;
        let (den, num) = self.r.to_big();
        let den = den.to_f64().unwrap_or(f64::INFINITY);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ang = 2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / n;
            acc += Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN) / den, ang);
        }
        acc
    }

    /// Galois conjugate σ_j(x), ζ ↦ ζ^j with gcd(j, N) = 1.
    pub fn galois(&self, j: u32) -> Scalar {
        let mut acc = Scalar::zero(self.f);
        for (k, c) in self.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let t = Scalar::root_of_unity(self.f, (k as i64) * (j as i64));
                acc += &(&t * &Scalar::from_rational(self.f, c));
            }
        }
        acc
    }

    /// Parse the canonical text form "a0 + a1*z + a2*z^2 ..." (rationals as p/q).
    pub fn parse(f: &'static Field, s: &str) -> Result<Scalar, KernelError> {
        crate::text::parse_scalar(f, s)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Scalar) -> bool {
        std::ptr::eq(self.f, o.f) && self.r == o.r
    }
}
impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.f.order().hash(h);
        match &self.r {
            Repr::S { den, num } => {
                den.hash(h);
                num.hash(h);
            }
            Repr::B { den, num } => {
                den.hash(h);
                num.hash(h);
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (den, num) = self.r.to_big();
        let mut terms = Vec::new();
        for (k, c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let q = BigRational::new(c.clone(), den.clone());
            let coeff = if q.is_integer() { format!("{}", q.numer()) } else { format!("{}/{}", q.numer(), q.denom()) };
            terms.push(match k {
                0 => coeff,
                1 => format!("{}*z", coeff),
                _ => format!("{}*z^{}", coeff, k),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                $body(self, o)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                $body(&self, &o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                $body(&self, o)
            }
        }
    };
}

binop!(Add, add, |a: &Scalar, b: &Scalar| a.add_impl(b, 1));
binop!(Sub, sub, |a: &Scalar, b: &Scalar| a.add_impl(b, -1));
binop!(Mul, mul, |a: &Scalar, b: &Scalar| a.mul_impl(b));

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = self.add_impl(o, 1);
    }
}
impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = self.add_impl(o, -1);
    }
}
impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, o: &Scalar) {
        *self = self.mul_impl(o);
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let r = match &self.r {
            Repr::S { den, num } => Repr::S { den: *den, num: num.iter().map(|x| -x).collect() },
            Repr::B { den, num } => Repr::B { den: den.clone(), num: num.iter().map(|x| -x).collect() },
        };
        Scalar { f: self.f, r }
    }
}
impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta4_squared_is_minus_one() {
        let i = Scalar::root_of_unity_n(4, 1);
        assert_eq!(&i * &i, Scalar::from_int(field(4), -1));
    }

    #[test]
    fn inverse_of_two() {
        let f = field(7);
        let two = Scalar::from_int(f, 2);
        assert!((&two.inv().unwrap() * &two).is_one());
    }

    #[test]
    fn zeta5_sum_is_minus_one() {
        let f = field(5);
        let mut s = Scalar::zero(f);
        for k in 1..5 {
            s += &Scalar::root_of_unity(f, k);
        }
        assert_eq!(s, Scalar::from_int(f, -1));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let f = field(12);
        let big = Scalar::from_int(f, i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.r, Repr::B { .. }));
        let back = sq.div(&big).unwrap();
        assert_eq!(back, big);
        assert!(matches!(back.r, Repr::S { .. }));
    }

    #[test]
    fn inverse_irrational() {
        let f = field(12);
        let z = Scalar::root_of_unity(f, 1);
        let x = &(&z + &Scalar::from_int(f, 3)) * &Scalar::from_frac(f, 2, 7).unwrap();
        assert!((&x * &x.inv().unwrap()).is_one());
        assert_eq!(Scalar::zero(f).inv().unwrap_err(), KernelError::DivisionByZero);
    }

    #[test]
    fn sqrt3_lives_in_q_zeta12() {
        let f = field(12);
        let s = &Scalar::root_of_unity(f, 1) + &Scalar::root_of_unity(f, -1);
        assert_eq!(&s * &s, Scalar::from_int(f, 3));
    }

    #[test]
    fn galois_conjugation() {
        let f = field(12);
        let z = Scalar::root_of_unity(f, 1);
        assert_eq!(z.galois(5), Scalar::root_of_unity(f, 5));
        let e = z.embed(1);
        assert!((e.re - (3f64).sqrt() / 2.0).abs() < 1e-12);
    }
}
