//! Cyclotomic field contexts Q(ζ_N) and their reduction tables.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Arithmetic data for Q(ζ_N) in the power basis 1, ζ, ..., ζ^{φ(N)-1}.
#[derive(Debug)]
pub struct Field {
    n: u32,
    phi: usize,
    cyclo: Vec<i64>,
    /// `pow_red[k]` = ζ^k written in the power basis, for k < max(N, 2φ-1).
    pow_red: Vec<Vec<i64>>,
}

impl Field {
    fn build(n: u32) -> Field {
        assert!(n >= 1, "cyclotomic order must be positive");
        let cyclo = cyclotomic_poly(n);
        let phi = cyclo.len() - 1;
        let upto = (n as usize).max(2 * phi);
        let mut pow_red = Vec::with_capacity(upto);
        let mut cur = vec![0i64; phi];
        if phi > 0 {
            cur[0] = 1;
        }
        for _ in 0..upto {
            pow_red.push(cur.clone());
            // multiply by x and reduce the top coefficient with the monic Φ_N
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for i in 0..phi {
                    cur[i] -= top * cyclo[i];
                }
            }
        }
        Field { n, phi, cyclo, pow_red }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    /// Degree φ(N) of the field over Q.
    pub fn degree(&self) -> usize {
        self.phi
    }

    /// Coefficients of Φ_N, constant term first.
    pub fn cyclotomic(&self) -> &[i64] {
        &self.cyclo
    }

    /// ζ^k in the power basis, k taken mod N.
    pub fn power(&self, k: i64) -> &[i64] {
        let k = k.rem_euclid(self.n as i64) as usize;
        &self.pow_red[k]
    }

    pub(crate) fn reduction(&self, k: usize) -> &[i64] {
        &self.pow_red[k]
    }

    /// Exponents j in 1..=N coprime to N; σ_j : ζ ↦ ζ^j runs over the Galois group.
    pub fn galois_exponents(&self) -> Vec<u32> {
        (1..=self.n)
            .filter(|j| num_integer::gcd(*j, self.n) == 1)
            .collect()
    }
}

// One context per N exists, so the order identifies the field.
impl PartialEq for Field {
    fn eq(&self, o: &Field) -> bool {
        self.n == o.n
    }
}
impl Eq for Field {}
impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.n.hash(h);
    }
}

/// Shared context for Q(ζ_N); contexts are created once and never freed.
pub fn field(n: u32) -> &'static Field {
    static REG: OnceLock<Mutex<HashMap<u32, &'static Field>>> = OnceLock::new();
    let reg = REG.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = reg.lock().unwrap_or_else(|e| e.into_inner());
    *map.entry(n).or_insert_with(|| Box::leak(Box::new(Field::build(n))))
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let lead = *den.last().unwrap();
    let mut q = vec![0i64; num.len() + 1 - dl];
    for i in (0..q.len()).rev() {
        let c = rem[i + dl - 1] / lead;
        q[i] = c;
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Φ_N with integer coefficients (constant term first).
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    let mut acc = num;
    for d in 1..n {
        if n % d == 0 {
            acc = poly_div_exact(&acc, &cyclotomic_poly(d));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(5), vec![1, 1, 1, 1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn power_table_wraps() {
        let f = field(12);
        assert_eq!(f.degree(), 4);
        assert_eq!(f.power(12), f.power(0));
        // ζ_12^6 = -1
        assert_eq!(f.power(6), &[-1, 0, 0, 0]);
        assert_eq!(f.galois_exponents(), vec![1, 5, 7, 11]);
    }
}
