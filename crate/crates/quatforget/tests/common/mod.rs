//! Shared test helpers: an independent brute-force Hilbert symbol oracle
//! and constructors for the shipped principal data.

#![allow(dead_code)]

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use quatforget::json::DatumJson;
use quatforget::lattice::{maximal_order, LeftIdeal};
use quatforget::polarization::{make_principal_datum, PrincipalDatum};
use quatforget::quaternion::find_presentation;

/// Brute-force local solubility oracle for the Hilbert symbol (a, b)_p.
///
/// Decides whether z^2 = a x^2 + b y^2 has a nontrivial Q_p-point by
/// exhausting primitive solutions modulo p^e, where e = 3 for odd p and
/// e = 5 for p = 2, after reducing v_p(a), v_p(b) into {0, 1}.  By
/// Hensel's lemma these moduli are large enough: a primitive solution
/// has a unit coordinate whose partial derivative (2z, 2ax or 2by) has
/// valuation at most 1 (odd p) or 2 (p = 2), and by homogeneity the
/// unit coordinate can be scaled to 1, so only the two affine charts
/// x = 1 and y = 1 need scanning (x and y both divisible by p forces
/// z^2 = 0 mod p^2 against z being a unit).
pub fn hilbert_oracle(a: &BigInt, b: &BigInt, p: u64) -> i32 {
    assert!(!a.is_zero() && !b.is_zero());
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    let mut a = a.clone();
    let mut b = b.clone();
    while (&a % &p2).is_zero() {
        a /= &p2;
    }
    while (&b % &p2).is_zero() {
        b /= &p2;
    }
    let e = if p == 2 { 5 } else { 3 };
    let m = p.pow(e) as i128;
    let am = modm(&a, m);
    let bm = modm(&b, m);
    let squares: HashSet<i128> = (0..m).map(|z| z * z % m).collect();
    let chart_x = (0..m).any(|y| squares.contains(&((am + bm * y % m * y) % m)));
    let chart_y = (0..m).any(|x| squares.contains(&((bm + am * x % m * x) % m)));
    if chart_x || chart_y {
        1
    } else {
        -1
    }
}

fn modm(v: &BigInt, m: i128) -> i128 {
    let r = (v % BigInt::from(m))
        .to_i128()
        .expect("reduced value fits in i128");
    (r % m + m) % m
}

/// Deterministic principal datum for a two-prime discriminant, built the
/// same way as the shipped data files.
pub fn datum_for_disc(d: u64, bound: i64) -> quatforget::error::Result<PrincipalDatum> {
    let alg = find_presentation(&BigInt::from(d), 1000)?;
    let order = maximal_order(&alg)?;
    let ideal = LeftIdeal::from_order(&order)?;
    make_principal_datum(&order, &ideal, bound)
}

/// Load one of the shipped datum files from data/.
pub fn shipped_datum(d: u64) -> PrincipalDatum {
    let path = format!("{}/data/datum_D{}.json", env!("CARGO_MANIFEST_DIR"), d);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    let dj: DatumJson = serde_json::from_str(&text).expect("datum JSON");
    let (order, ideal, mu) = dj.to_parts().expect("datum parts");
    PrincipalDatum::new(order, ideal, mu).expect("valid shipped datum")
}

/// Squarefree integers up to dmax with exactly `prime_count` prime factors.
pub fn squarefree_with_prime_count(dmax: u64, prime_count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    'n: for n in 2..=dmax {
        let mut m = n;
        let mut primes = 0usize;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                m /= p;
                primes += 1;
                if m % p == 0 {
                    continue 'n;
                }
            }
            p += 1;
        }
        if m > 1 {
            primes += 1;
        }
        if primes == prime_count {
            out.push(n);
        }
    }
    out
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}
