//! Text form of scalars: "a0 + a1*z + a2*z^2", coefficients as integers or p/q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::Field;
use crate::scalar::Scalar;
use crate::KernelError;

fn err(text: &str, msg: impl Into<String>) -> KernelError {
    KernelError::Parse { text: text.to_string(), msg: msg.into() }
}

fn parse_rational(text: &str, s: &str) -> Result<BigRational, KernelError> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err(text, format!("bad numerator {p:?}")))?;
        let q: BigInt = q.trim().parse().map_err(|_| err(text, format!("bad denominator {q:?}")))?;
        if q.is_zero() {
            return Err(err(text, "zero denominator"));
        }
        Ok(BigRational::new(p, q))
    } else {
        let p: BigInt = s.parse().map_err(|_| err(text, format!("bad coefficient {s:?}")))?;
        Ok(BigRational::from_integer(p))
    }
}

/// Split into signed terms at top-level '+' / '-' (a '-' right after '/' or '^' belongs to the number).
fn terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut prev = '+';
    for ch in s.chars() {
        if ch.is_whitespace() {
            continue;
        }
        if (ch == '+' || ch == '-') && !matches!(prev, '/' | '^' | '*') {
            if !cur.is_empty() {
                out.push((neg, std::mem::take(&mut cur)));
                neg = false;
            }
            if ch == '-' {
                neg = !neg;
            }
            prev = ch;
            continue;
        }
        cur.push(ch);
        prev = ch;
    }
    if !cur.is_empty() || out.is_empty() {
        out.push((neg, cur));
    }
    out
}

pub(crate) fn parse_scalar(f: &'static Field, text: &str) -> Result<Scalar, KernelError> {
    if text.trim().is_empty() {
        return Err(err(text, "empty"));
    }
    let mut acc = Scalar::zero(f);
    for (neg, t) in terms(text) {
        if t.is_empty() {
            return Err(err(text, "dangling sign"));
        }
        let (coef, power) = match t.find('z') {
            None => (parse_rational(text, &t)?, 0i64),
            Some(pos) => {
                let head = t[..pos].trim_end_matches('*');
                let coef = if head.is_empty() { BigRational::one() } else { parse_rational(text, head)? };
                if !t[..pos].is_empty() && !t[..pos].ends_with('*') {
                    return Err(err(text, "expected '*' before z"));
                }
                let tail = &t[pos + 1..];
                let k = if tail.is_empty() {
                    1
                } else if let Some(e) = tail.strip_prefix('^') {
                    e.parse::<i64>().map_err(|_| err(text, format!("bad exponent {e:?}")))?
                } else {
                    return Err(err(text, format!("unexpected {tail:?} after z")));
                };
                (coef, k)
            }
        };
        let coef = if neg { -coef } else { coef };
        let term = &Scalar::root_of_unity(f, power) * &Scalar::from_rational(f, &coef);
        acc += &term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field;

    #[test]
    fn parse_forms() {
        let f = field(12);
        let z = Scalar::root_of_unity(f, 1);
        assert_eq!(Scalar::parse(f, "z").unwrap(), z);
        assert_eq!(Scalar::parse(f, "-z^2").unwrap(), -Scalar::root_of_unity(f, 2));
        assert_eq!(Scalar::parse(f, "0").unwrap(), Scalar::zero(f));
        assert_eq!(Scalar::parse(f, "1/2 + -3/4*z").unwrap().to_string(), "1/2 + -3/4*z");
        // powers beyond φ(N) are reduced
        assert_eq!(Scalar::parse(f, "z^6").unwrap(), Scalar::from_int(f, -1));
        assert_eq!(Scalar::parse(f, "2 - z^-1").unwrap(), &Scalar::from_int(f, 2) - &Scalar::root_of_unity(f, -1));
        assert!(Scalar::parse(f, "1/0").is_err());
        assert!(Scalar::parse(f, "zz").is_err());
        assert!(Scalar::parse(f, "").is_err());
        assert!(Scalar::parse(f, "3z").is_err());
    }
}
