//! Quaternion algebras (a, b / Q) and their elements: trace, norm,
//! conjugation, ramification and the twisting-divisor decision procedure.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    factor, hilbert_candidate_places, hilbert_symbol, squarefree_part, Place, Rat,
};
use crate::error::{Error, Result};

/// Presentation (a, b) of the algebra Q + Qi + Qj + Qij with
/// i^2 = a, j^2 = b, ij = -ji.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuaternionAlgebra {
    a: Rat,
    b: Rat,
}

impl QuaternionAlgebra {
    pub fn new(a: Rat, b: Rat) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::domain("quaternion algebra requires a, b != 0"));
        }
        Ok(QuaternionAlgebra { a, b })
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn element(&self, coords: [Rat; 4]) -> Quaternion {
        Quaternion {
            alg: self.clone(),
            coords,
        }
    }

    pub fn zero(&self) -> Quaternion {
        self.element([Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()])
    }

    pub fn one(&self) -> Quaternion {
        self.element([Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()])
    }

    pub fn scalar(&self, c: Rat) -> Quaternion {
        self.element([c, Rat::zero(), Rat::zero(), Rat::zero()])
    }

    pub fn gen_i(&self) -> Quaternion {
        self.element([Rat::zero(), Rat::one(), Rat::zero(), Rat::zero()])
    }

    pub fn gen_j(&self) -> Quaternion {
        self.element([Rat::zero(), Rat::zero(), Rat::one(), Rat::zero()])
    }

    pub fn gen_ij(&self) -> Quaternion {
        self.element([Rat::zero(), Rat::zero(), Rat::zero(), Rat::one()])
    }

    pub fn basis(&self) -> [Quaternion; 4] {
        [self.one(), self.gen_i(), self.gen_j(), self.gen_ij()]
    }
}

/// Element x + y i + z j + t ij of a fixed algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quaternion {
    alg: QuaternionAlgebra,
    coords: [Rat; 4],
}

impl Quaternion {
    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.alg
    }

    pub fn coords(&self) -> &[Rat; 4] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn require_same_algebra(&self, other: &Quaternion) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::domain(
                "arithmetic between elements of different algebras",
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Quaternion) -> Result<Quaternion> {
        self.require_same_algebra(other)?;
        let mut c = self.coords.clone();
        for k in 0..4 {
            c[k] += &other.coords[k];
        }
        Ok(self.alg.element(c))
    }

    pub fn sub(&self, other: &Quaternion) -> Result<Quaternion> {
        self.require_same_algebra(other)?;
        let mut c = self.coords.clone();
        for k in 0..4 {
            c[k] -= &other.coords[k];
        }
        Ok(self.alg.element(c))
    }

    pub fn neg(&self) -> Quaternion {
        let c = self.coords.clone().map(|x| -x);
        self.alg.element(c)
    }

    pub fn scale(&self, c: &Rat) -> Quaternion {
        let cs = self.coords.clone().map(|x| x * c);
        self.alg.element(cs)
    }

    /// Product under i^2 = a, j^2 = b, ij = -ji.
    pub fn mul(&self, other: &Quaternion) -> Result<Quaternion> {
        self.require_same_algebra(other)?;
        let a = &self.alg.a;
        let b = &self.alg.b;
        let [x1, y1, z1, t1] = &self.coords;
        let [x2, y2, z2, t2] = &other.coords;
        let ab = a * b;
        let x = x1 * x2 + a * (y1 * y2) + b * (z1 * z2) - &ab * (t1 * t2);
        let y = x1 * y2 + y1 * x2 - b * (z1 * t2) + b * (t1 * z2);
        let z = x1 * z2 + z1 * x2 + a * (y1 * t2) - a * (t1 * y2);
        let t = x1 * t2 + t1 * x2 + y1 * z2 - z1 * y2;
        Ok(self.alg.element([x, y, z, t]))
    }

    pub fn trace(&self) -> Rat {
        &self.coords[0] + &self.coords[0]
    }

    pub fn conj(&self) -> Quaternion {
        let [x, y, z, t] = self.coords.clone();
        self.alg.element([x, -y, -z, -t])
    }

    /// Reduced norm x^2 - a y^2 - b z^2 + a b t^2.
    pub fn norm(&self) -> Rat {
        let a = &self.alg.a;
        let b = &self.alg.b;
        let [x, y, z, t] = &self.coords;
        x * x - a * (y * y) - b * (z * z) + a * b * (t * t)
    }

    pub fn pure_part(&self) -> Quaternion {
        let [_, y, z, t] = self.coords.clone();
        self.alg.element([Rat::zero(), y, z, t])
    }

    pub fn is_pure(&self) -> bool {
        self.coords[0].is_zero()
    }

    pub fn inverse(&self) -> Result<Quaternion> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::domain("inverse of a norm-zero quaternion"));
        }
        Ok(self.conj().scale(&(Rat::one() / n)))
    }

    /// Whether reduced trace and norm are both rational integers.
    pub fn is_integral(&self) -> bool {
        self.trace().is_integer() && self.norm().is_integer()
    }
}

/// The even-sized set of ramified places and the resulting discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamificationData {
    pub ramified_primes: Vec<BigInt>,
    pub infinite_ramified: bool,
    pub discriminant: BigInt,
}

impl RamificationData {
    pub fn ramified_places(&self) -> Vec<Place> {
        let mut v: Vec<Place> = self
            .ramified_primes
            .iter()
            .cloned()
            .map(Place::Finite)
            .collect();
        if self.infinite_ramified {
            v.push(Place::Infinity);
        }
        v
    }
}

/// Ramified places of (a, b / Q) by Hilbert symbols at the candidate places.
pub fn ramification(alg: &QuaternionAlgebra) -> Result<RamificationData> {
    let mut ramified_primes = Vec::new();
    let mut infinite_ramified = false;
    for v in hilbert_candidate_places(alg.a(), alg.b())? {
        if hilbert_symbol(alg.a(), alg.b(), &v)? == -1 {
            match v {
                Place::Finite(p) => ramified_primes.push(p),
                Place::Infinity => infinite_ramified = true,
            }
        }
    }
    ramified_primes.sort();
    let mut discriminant = BigInt::one();
    for p in &ramified_primes {
        discriminant *= p;
    }
    Ok(RamificationData {
        ramified_primes,
        infinite_ramified,
        discriminant,
    })
}

pub fn is_totally_indefinite(alg: &QuaternionAlgebra) -> Result<bool> {
    Ok(!ramification(alg)?.infinite_ramified)
}

pub fn is_division(alg: &QuaternionAlgebra) -> Result<bool> {
    let r = ramification(alg)?;
    Ok(!r.ramified_primes.is_empty() || r.infinite_ramified)
}

/// Quaternion algebras over Q are classified by their ramification sets.
pub fn isomorphic(alg1: &QuaternionAlgebra, alg2: &QuaternionAlgebra) -> Result<bool> {
    let r1 = ramification(alg1)?;
    let r2 = ramification(alg2)?;
    Ok(r1 == r2)
}

/// Positive squarefree divisors m of D with (-D, m / Q) isomorphic to alg.
/// Nonempty exactly when the algebra is twisting.
pub fn twisting_divisors(alg: &QuaternionAlgebra) -> Result<Vec<BigInt>> {
    let ram = ramification(alg)?;
    if ram.infinite_ramified {
        return Err(Error::domain("twisting test requires a totally indefinite algebra"));
    }
    if ram.ramified_primes.is_empty() {
        return Err(Error::domain("twisting test requires a division algebra"));
    }
    let d = ram.discriminant.clone();
    let mut result = Vec::new();
    for m in squarefree_divisors(&d)? {
        let cand = QuaternionAlgebra::new(
            Rat::from_integer(-d.clone()),
            Rat::from_integer(m.clone()),
        )?;
        if ramification(&cand)? == ram {
            result.push(m);
        }
    }
    Ok(result)
}

/// All positive divisors of a squarefree positive integer, sorted.
pub fn squarefree_divisors(d: &BigInt) -> Result<Vec<BigInt>> {
    let primes = factor(d)?.primes();
    let mut divs = vec![BigInt::one()];
    for p in primes {
        let mut next = Vec::with_capacity(divs.len() * 2);
        for m in &divs {
            next.push(m.clone());
            next.push(m * &p);
        }
        divs = next;
    }
    divs.sort();
    Ok(divs)
}

/// Deterministic search for a presentation (a, b / Q) that is totally
/// indefinite, division, and has reduced discriminant d.  Candidates are
/// scanned in shells max(|a|, |b|) = r for r = 1, 2, ..., bound, with (a, b)
/// lexicographic inside each shell, so the result is reproducible.
pub fn find_presentation(d: &BigInt, bound: i64) -> Result<QuaternionAlgebra> {
    if !d.is_positive() {
        return Err(Error::domain("discriminant must be positive"));
    }
    let primes = factor(d)?;
    if primes.factors.iter().any(|(_, e)| *e > 1) {
        return Err(Error::domain("discriminant must be squarefree"));
    }
    if primes.primes().len() % 2 != 0 {
        return Err(Error::domain(
            "a totally indefinite rational quaternion algebra has an even number of ramified primes",
        ));
    }
    for r in 1..=bound {
        for a in -r..=r {
            for b in -r..=r {
                if a == 0 || b == 0 || (a.abs() != r && b.abs() != r) {
                    continue;
                }
                let alg = QuaternionAlgebra::new(
                    Rat::from_integer(BigInt::from(a)),
                    Rat::from_integer(BigInt::from(b)),
                )?;
                let ram = ramification(&alg)?;
                if !ram.infinite_ramified && &ram.discriminant == d {
                    return Ok(alg);
                }
            }
        }
    }
    Err(Error::NotWithinBound(bound))
}

/// Squarefree part of the reduced norm of q; the Atkin-Lehner class map.
pub fn norm_class(q: &Quaternion) -> Result<BigInt> {
    let n = q.norm();
    if n.is_zero() {
        return Err(Error::domain("norm class of a norm-zero quaternion"));
    }
    squarefree_part(&n)
}
