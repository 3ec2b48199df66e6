//! Exact integer and rational arithmetic: factorization, Kronecker and
//! Hilbert symbols, and quadratic orders with their norm forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Sign and sorted prime-power decomposition of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            v *= p.pow(*e);
        }
        v
    }

    pub fn primes(&self) -> Vec<BigInt> {
        self.factors.iter().map(|(p, _)| p.clone()).collect()
    }
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    // Schoolbook 128x128 mod via split; inputs already reduced mod m < 2^127.
    if let (Some(x), Some(y)) = (a.checked_mul(b), Some(m)) {
        return x % y;
    }
    let mut result = 0u128;
    let mut a = a % m;
    let mut b = b;
    while b > 0 {
        if b & 1 == 1 {
            result = (result + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    result
}

fn powmod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The fixed base set is proven complete for
/// n < 3.3e24; larger desk-scale inputs reuse the same bases, which is
/// ample for the magnitudes this crate handles.
pub fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u128) -> u128 {
    // Brent's variant with a deterministic parameter sweep.
    for c in 1u128..64 {
        let f = |x: u128| (mulmod(x, x, n) + c) % n;
        let mut x = 2u128;
        let mut y = 2u128;
        let mut d = 1u128;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = if x > y { x - y } else { y - x };
            d = gcd_u128(diff, n);
            count += 1;
            if count > 1 << 24 {
                break;
            }
        }
        if d != n && d > 1 {
            return d;
        }
    }
    // Trial fallback; unreachable for desk-scale inputs.
    let mut p = 3u128;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 2;
    }
    n
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn factor_u128(mut n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    let push = |out: &mut Vec<(u128, u32)>, p: u128, e: u32| {
        out.push((p, e));
    };
    let mut e = 0u32;
    while n % 2 == 0 {
        n /= 2;
        e += 1;
    }
    if e > 0 {
        push(&mut out, 2, e);
    }
    let mut p = 3u128;
    while p <= 1_000_000 && p * p <= n {
        if n % p == 0 {
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            push(&mut out, p, e);
        }
        p += 2;
    }
    // What remains has no factor below 1e6: split recursively with rho.
    let mut stack = vec![n];
    let mut big: Vec<u128> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u128(m) {
            big.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    big.sort_unstable();
    let mut i = 0;
    while i < big.len() {
        let p = big[i];
        let mut e = 0u32;
        while i < big.len() && big[i] == p {
            e += 1;
            i += 1;
        }
        push(&mut out, p, e);
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Exact prime factorization of a nonzero integer with |n| < 2^128.
pub fn factor(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::domain("factor(0) is undefined"));
    }
    let sign = if n.is_negative() { -1i8 } else { 1 };
    let mag = n
        .abs()
        .to_u128()
        .ok_or_else(|| Error::Overflow(format!("|{}| >= 2^128", n)))?;
    let factors = factor_u128(mag)
        .into_iter()
        .map(|(p, e)| (BigInt::from(p), e))
        .collect();
    Ok(Factorization { sign, factors })
}

/// The signed squarefree integer s with n = s * (nonzero rational square).
pub fn squarefree_part(n: &Rat) -> Result<BigInt> {
    if n.is_zero() {
        return Err(Error::domain("squarefree_part(0) is undefined"));
    }
    // n = num/den = (num*den)/den^2, so the squarefree part of n is
    // that of the integer num*den.
    let prod = n.numer() * n.denom();
    let f = factor(&prod)?;
    let mut s = BigInt::from(f.sign);
    for (p, e) in &f.factors {
        if e % 2 == 1 {
            s *= p;
        }
    }
    Ok(s)
}

/// Kronecker symbol (a | n) for n != 0.
pub fn kronecker(a: &BigInt, n: &BigInt) -> Result<i32> {
    if n.is_zero() {
        return Err(Error::domain("kronecker symbol with n = 0"));
    }
    let mut a = a.clone();
    let mut n = n.clone();
    let mut t = 1i32;
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            t = -t;
        }
    }
    if n.is_one() {
        return Ok(t);
    }
    // Strip factors of 2 from n; (a|2) = 0, +-1 by a mod 8.
    let two = BigInt::from(2);
    while n.is_even() {
        if a.is_even() {
            return Ok(0);
        }
        let r = a.mod_floor(&BigInt::from(8)).to_i32().unwrap();
        if r == 3 || r == 5 {
            t = -t;
        }
        n /= &two;
    }
    a = a.mod_floor(&n);
    while !a.is_zero() {
        while a.is_even() {
            a /= &two;
            let r = n.mod_floor(&BigInt::from(8)).to_i32().unwrap();
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&BigInt::from(4)).to_i32().unwrap() == 3
            && n.mod_floor(&BigInt::from(4)).to_i32().unwrap() == 3
        {
            t = -t;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        Ok(t)
    } else {
        Ok(0)
    }
}

/// A place of Q: the real place or a finite prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(BigInt),
    Infinity,
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{}", p),
            Place::Infinity => write!(f, "oo"),
        }
    }
}

fn val_p(x: &Rat, p: &BigInt) -> i64 {
    let mut v = 0i64;
    let mut n = x.numer().abs();
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    let mut d = x.denom().clone();
    while (&d % p).is_zero() {
        d /= p;
        v -= 1;
    }
    v
}

/// The p-adic unit part of x reduced mod p^k (k >= 1), as a nonneg integer.
fn unit_mod(x: &Rat, p: &BigInt, k: u32) -> BigInt {
    let v = val_p(x, p);
    let pk = p.pow(k);
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut vv = v;
    while vv > 0 {
        num /= p;
        vv -= 1;
    }
    while vv < 0 {
        den /= p;
        vv += 1;
    }
    let num = num.mod_floor(&pk);
    let den = den.mod_floor(&pk);
    let inv = modinv(&den, &pk);
    (num * inv).mod_floor(&pk)
}

fn modinv(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Hilbert symbol (a, b)_v over Q by the closed-form local formulas.
pub fn hilbert_symbol(a: &Rat, b: &Rat, v: &Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::domain("hilbert symbol with zero argument"));
    }
    match v {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                Ok(-1)
            } else {
                Ok(1)
            }
        }
        Place::Finite(p) => {
            if p < &BigInt::from(2) {
                return Err(Error::domain(format!("{} is not a prime", p)));
            }
            let alpha = val_p(a, p);
            let beta = val_p(b, p);
            if *p == BigInt::from(2) {
                let u = unit_mod(a, p, 3); // odd unit part mod 8
                let v8 = unit_mod(b, p, 3);
                let eps = |x: &BigInt| -> i64 {
                    // (x-1)/2 mod 2 for odd x: 1 iff x = 3 mod 4
                    let r = x.mod_floor(&BigInt::from(4)).to_i64().unwrap();
                    i64::from(r == 3)
                };
                let omg = |x: &BigInt| -> i64 {
                    // (x^2-1)/8 mod 2 for odd x: 1 iff x = 3, 5 mod 8
                    let r = x.mod_floor(&BigInt::from(8)).to_i64().unwrap();
                    i64::from(r == 3 || r == 5)
                };
                let exp = eps(&u) * eps(&v8) + alpha * omg(&v8) + beta * omg(&u);
                Ok(if exp % 2 == 0 { 1 } else { -1 })
            } else {
                let u = unit_mod(a, p, 1);
                let w = unit_mod(b, p, 1);
                let leg_u = kronecker(&u, p)?;
                let leg_w = kronecker(&w, p)?;
                let p_mod4 = p.mod_floor(&BigInt::from(4)).to_i64().unwrap();
                let mut s = 1i32;
                if alpha % 2 != 0 && beta % 2 != 0 && p_mod4 == 3 {
                    s = -s;
                }
                if beta % 2 != 0 {
                    s *= leg_u;
                }
                if alpha % 2 != 0 {
                    s *= leg_w;
                }
                Ok(s)
            }
        }
    }
}

/// The finite candidate places where (a, b)_v can be -1: 2 and the primes
/// of the numerators and denominators, plus infinity.
pub fn hilbert_candidate_places(a: &Rat, b: &Rat) -> Result<Vec<Place>> {
    let mut primes: Vec<BigInt> = vec![BigInt::from(2)];
    for x in [a, b] {
        for part in [x.numer().clone(), x.denom().clone()] {
            if !part.is_one() && !(-&part).is_one() {
                for p in factor(&part)?.primes() {
                    primes.push(p);
                }
            }
        }
    }
    primes.sort();
    primes.dedup();
    let mut out: Vec<Place> = primes.into_iter().map(Place::Finite).collect();
    out.push(Place::Infinity);
    Ok(out)
}

/// An order Z + f*O_K in the quadratic field K = Q(sqrt(d)), d squarefree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadOrder {
    pub d: BigInt,
    pub f: BigInt,
}

impl QuadOrder {
    pub fn new(d: BigInt, f: BigInt) -> Result<Self> {
        if d.is_zero() || d.is_one() {
            return Err(Error::domain(format!("d = {} is not a quadratic field", d)));
        }
        if squarefree_part(&Rat::from_integer(d.clone()))? != d {
            return Err(Error::domain(format!("d = {} is not squarefree", d)));
        }
        if f < BigInt::one() {
            return Err(Error::domain("conductor must be >= 1"));
        }
        Ok(QuadOrder { d, f })
    }

    /// (trace, norm) of the non-rational generator f*w of the order,
    /// where w = (1 + sqrt(d))/2 if d = 1 mod 4 and w = sqrt(d) otherwise.
    pub fn generator_trace_norm(&self) -> (BigInt, BigInt) {
        let one_mod4 = self.d.mod_floor(&BigInt::from(4)).is_one();
        if one_mod4 {
            let t = self.f.clone();
            let n = &self.f * &self.f * (BigInt::one() - &self.d) / BigInt::from(4);
            (t, n)
        } else {
            (BigInt::zero(), -(&self.f * &self.f * &self.d))
        }
    }

    /// Discriminant f^2 * d_K of the order.
    pub fn discriminant(&self) -> BigInt {
        let dk = if self.d.mod_floor(&BigInt::from(4)).is_one() {
            self.d.clone()
        } else {
            BigInt::from(4) * &self.d
        };
        &self.f * &self.f * dk
    }
}

/// Outcome of a bounded norm-form representation search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Representation {
    /// Coordinates (x, y) with N(x + y*g) = target, g the order generator.
    Found(BigInt, BigInt),
    /// Nothing found, but the positive-definite search was exhaustive.
    ProvablyNone,
    /// Nothing found within the coordinate bound; existence undecided.
    NoneWithinBound,
}

fn sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Search for (x, y) with x^2 + t*x*y + n0*y^2 = target, where (t, n0) are
/// the trace and norm of the order generator. Deterministic ordering on
/// (|y|, y sign, |x|, x sign) with positive signs first.
pub fn represent_by_norm_form(
    q: &QuadOrder,
    target: &BigInt,
    bound: i64,
) -> Result<Representation> {
    if bound <= 0 {
        return Err(Error::domain("bound must be positive"));
    }
    if target.is_zero() {
        return Err(Error::domain("target must be nonzero"));
    }
    let (t, n0) = q.generator_trace_norm();
    let definite = q.d.is_negative();
    // 4N = (2x + t y)^2 + |disc| y^2 in the definite case.
    let disc = &t * &t - BigInt::from(4) * &n0; // = discriminant, < 0 iff definite
    let four_target = BigInt::from(4) * target;
    let mut exhaustive = definite;
    if definite && target.is_negative() {
        return Ok(Representation::ProvablyNone);
    }
    let y_limit: i64 = if definite {
        // |disc| y^2 <= 4 target
        let lim = (four_target.clone() / (-&disc)).sqrt().to_i64().unwrap_or(i64::MAX);
        if lim > bound {
            exhaustive = false;
            bound
        } else {
            lim
        }
    } else {
        bound
    };
    for ay in 0..=y_limit {
        for sy in [1i64, -1] {
            if ay == 0 && sy < 0 {
                continue;
            }
            let y = BigInt::from(sy * ay);
            // Solve (2x + t y)^2 = 4 target - disc_term with disc_term = (4 n0 - t^2) y^2
            let rest = &four_target - (BigInt::from(4) * &n0 - &t * &t) * &y * &y;
            let mut xs: Vec<BigInt> = Vec::new();
            if let Some(r) = sqrt_exact(&rest) {
                for root in [r.clone(), -r] {
                    let num = &root - &t * &y;
                    if (&num % 2i32).is_zero() {
                        xs.push(num / 2i32);
                    }
                }
            }
            xs.sort_by_key(|x| (x.abs(), x.is_negative()));
            xs.dedup();
            for x in xs {
                if x.abs() <= BigInt::from(bound) {
                    return Ok(Representation::Found(x, y));
                } else if definite {
                    exhaustive = false;
                }
            }
        }
    }
    if exhaustive {
        Ok(Representation::ProvablyNone)
    } else {
        Ok(Representation::NoneWithinBound)
    }
}

/// Orders of the roots of unity present in the quadratic order.
pub fn roots_of_unity(q: &QuadOrder) -> Vec<u32> {
    if q.d.is_negative() {
        if q.d == BigInt::from(-1) && q.f.is_one() {
            return vec![1, 2, 4];
        }
        if q.d == BigInt::from(-3) && q.f.is_one() {
            return vec![1, 2, 3, 6];
        }
    }
    vec![1, 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn factor_basics() {
        let f = factor(&bi(12)).unwrap();
        assert_eq!(f.sign, 1);
        assert_eq!(f.factors, vec![(bi(2), 2), (bi(3), 1)]);
        assert_eq!(f.value(), bi(12));

        let f = factor(&bi(-6)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, vec![(bi(2), 1), (bi(3), 1)]);

        let f = factor(&bi(1)).unwrap();
        assert_eq!(f.sign, 1);
        assert!(f.factors.is_empty());
        assert_eq!(f.value(), bi(1));

        assert!(factor(&bi(0)).is_err());
    }

    #[test]
    fn factor_large_semiprime() {
        let n = BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64);
        let f = factor(&n).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert_eq!(f.value(), n);
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(&rat(12)).unwrap(), bi(3));
        assert_eq!(squarefree_part(&rat_frac(-8, 9)).unwrap(), bi(-2));
        assert_eq!(squarefree_part(&rat(1)).unwrap(), bi(1));
        assert!(squarefree_part(&rat(0)).is_err());
    }

    #[test]
    fn kronecker_examples() {
        // Frozen from the brute-force quadratic residue oracle:
        // squares mod 7 = {0,1,2,4}, so (2|7) = 1.
        assert_eq!(kronecker(&bi(2), &bi(7)).unwrap(), 1);
        // 7 = 1 mod 3 and 1 is a square mod 3.
        assert_eq!(kronecker(&bi(7), &bi(3)).unwrap(), 1);
        for a in -5i64..=5 {
            assert_eq!(kronecker(&bi(a), &bi(1)).unwrap(), 1);
        }
        assert!(kronecker(&bi(3), &bi(0)).is_err());
    }

    #[test]
    fn kronecker_matches_brute_force_over_odd_primes() {
        for p in [3i64, 5, 7, 11, 13, 17, 19, 23] {
            let squares: std::collections::HashSet<i64> =
                (1..p).map(|x| (x * x) % p).collect();
            for a in 0..p {
                let expect = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(&bi(a), &bi(p)).unwrap(), expect, "({}|{})", a, p);
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(
            hilbert_symbol(&rat(-1), &rat(-1), &Place::Infinity).unwrap(),
            -1
        );
        for b in [-7i64, -2, 1, 3, 10] {
            assert_eq!(
                hilbert_symbol(&rat(1), &rat(b), &Place::Finite(bi(5))).unwrap(),
                1
            );
            assert_eq!(hilbert_symbol(&rat(1), &rat(b), &Place::Infinity).unwrap(), 1);
        }
        // (-1,-1)_2 = -1: frozen from brute-force solubility of
        // z^2 = -x^2 - y^2 mod 32 (no primitive solution).
        assert_eq!(
            hilbert_symbol(&rat(-1), &rat(-1), &Place::Finite(bi(2))).unwrap(),
            -1
        );
        assert!(hilbert_symbol(&rat(0), &rat(1), &Place::Infinity).is_err());
    }

    #[test]
    fn hilbert_product_formula_spot() {
        for (a, b) in [(3i64, 5i64), (-2, 7), (6, -10), (15, 21)] {
            let (a, b) = (rat(a), rat(b));
            let mut prod = 1i32;
            for v in hilbert_candidate_places(&a, &b).unwrap() {
                prod *= hilbert_symbol(&a, &b, &v).unwrap();
            }
            assert_eq!(prod, 1);
        }
    }

    #[test]
    fn norm_form_representations() {
        let q = QuadOrder::new(bi(-6), bi(1)).unwrap();
        assert_eq!(
            represent_by_norm_form(&q, &bi(6), 10).unwrap(),
            Representation::Found(bi(0), bi(1))
        );
        // x^2 + 6 y^2 = 5 is insoluble; the definite search is exhaustive.
        assert_eq!(
            represent_by_norm_form(&q, &bi(5), 10).unwrap(),
            Representation::ProvablyNone
        );
        let q = QuadOrder::new(bi(-1), bi(1)).unwrap();
        assert_eq!(
            represent_by_norm_form(&q, &bi(2), 10).unwrap(),
            Representation::Found(bi(1), bi(1))
        );
        assert!(represent_by_norm_form(&q, &bi(2), 0).is_err());
    }

    #[test]
    fn norm_form_found_values_satisfy_equation() {
        for (d, f, tgt) in [(-6i64, 1i64, 10i64), (-1, 1, 13), (-3, 2, 12), (5, 1, 4)] {
            let q = QuadOrder::new(bi(d), bi(f)).unwrap();
            if let Representation::Found(x, y) = represent_by_norm_form(&q, &bi(tgt), 30).unwrap()
            {
                let (t, n0) = q.generator_trace_norm();
                assert_eq!(&x * &x + &t * &x * &y + &n0 * &y * &y, bi(tgt));
            }
        }
    }

    #[test]
    fn units_of_quadratic_orders() {
        assert_eq!(
            roots_of_unity(&QuadOrder::new(bi(-1), bi(1)).unwrap()),
            vec![1, 2, 4]
        );
        // disc -24 < -4 forces units +-1.
        assert_eq!(
            roots_of_unity(&QuadOrder::new(bi(-6), bi(1)).unwrap()),
            vec![1, 2]
        );
        // Z[sqrt(-3)] excludes the sixth roots of unity.
        assert_eq!(
            roots_of_unity(&QuadOrder::new(bi(-3), bi(2)).unwrap()),
            vec![1, 2]
        );
        assert_eq!(
            roots_of_unity(&QuadOrder::new(bi(-3), bi(1)).unwrap()),
            vec![1, 2, 3, 6]
        );
    }

    #[test]
    fn quad_order_validation() {
        assert!(QuadOrder::new(bi(12), bi(1)).is_err());
        assert!(QuadOrder::new(bi(1), bi(1)).is_err());
        assert!(QuadOrder::new(bi(0), bi(1)).is_err());
        assert!(QuadOrder::new(bi(5), bi(0)).is_err());
        assert!(QuadOrder::new(bi(5), bi(3)).is_ok());
    }
}
