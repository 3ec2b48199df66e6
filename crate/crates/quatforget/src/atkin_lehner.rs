//! Atkin-Lehner classes and subgroups for a maximal order of discriminant
//! D: classes are positive squarefree divisors of D under the law
//! m1 ∘ m2 = m1 m2 / gcd(m1, m2)^2. Builds the norm-class group U0, the
//! twisting group V0 (with witness searches), the stable group W0 = U0·V0,
//! omega_odd, and the degree formulas for the forgetful maps.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    roots_of_unity, squarefree_part, QuadOrder, Rat,
};
use crate::error::{Error, Result};
use crate::json::{quaternion_coords, RatJson};
use crate::lattice::{commutator_sublattice, normalizes, Lattice, Order};
use crate::linalg;
use crate::polarization::PrincipalDatum;
use crate::quaternion::{squarefree_divisors, twisting_divisors, Quaternion};
use crate::search::{primitive_in, NormSearcher};

/// An Atkin-Lehner class: a positive squarefree divisor m of D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ALClass {
    d: BigInt,
    m: BigInt,
}

impl ALClass {
    pub fn new(d: BigInt, m: BigInt) -> Result<Self> {
        if d < BigInt::one() || m < BigInt::one() {
            return Err(Error::domain("discriminant and class must be positive"));
        }
        if !(&d % &m).is_zero() {
            return Err(Error::domain(format!("{m} does not divide D = {d}")));
        }
        if squarefree_part(&Rat::from_integer(m.clone()))? != m {
            return Err(Error::domain(format!("class {m} is not squarefree")));
        }
        Ok(ALClass { d, m })
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }
}

/// The group law m1 ∘ m2 = m1 m2 / gcd^2.
pub fn al_compose(c1: &ALClass, c2: &ALClass) -> Result<ALClass> {
    if c1.d != c2.d {
        return Err(Error::domain("classes of different discriminants"));
    }
    let g = c1.m.gcd(&c2.m);
    ALClass::new(c1.d.clone(), &c1.m * &c2.m / (&g * &g))
}

/// A subgroup of the Atkin-Lehner group: a set of divisors containing 1
/// and closed under ∘.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ALSubgroup {
    d: BigInt,
    members: BTreeSet<BigInt>,
}

impl ALSubgroup {
    pub fn trivial(d: BigInt) -> Self {
        let mut members = BTreeSet::new();
        members.insert(BigInt::one());
        ALSubgroup { d, members }
    }

    /// Closure of a generator set.
    pub fn generate(d: &BigInt, gens: &[BigInt]) -> Result<Self> {
        let mut sub = ALSubgroup::trivial(d.clone());
        for g in gens {
            ALClass::new(d.clone(), g.clone())?;
            sub.members.insert(g.clone());
        }
        loop {
            let mut added = false;
            let snapshot: Vec<BigInt> = sub.members.iter().cloned().collect();
            for x in &snapshot {
                for y in &snapshot {
                    let g = x.gcd(y);
                    let z = x * y / (&g * &g);
                    if sub.members.insert(z) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        if !sub.members.len().is_power_of_two() {
            return Err(Error::InvariantViolation(format!(
                "subgroup size {} is not a power of 2",
                sub.members.len()
            )));
        }
        Ok(sub)
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn members(&self) -> Vec<BigInt> {
        self.members.iter().cloned().collect()
    }

    pub fn contains(&self, m: &BigInt) -> bool {
        self.members.contains(m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn join(&self, other: &ALSubgroup) -> Result<ALSubgroup> {
        if self.d != other.d {
            return Err(Error::domain("subgroups of different discriminants"));
        }
        let gens: Vec<BigInt> = self
            .members
            .iter()
            .chain(other.members.iter())
            .cloned()
            .collect();
        ALSubgroup::generate(&self.d, &gens)
    }
}

/// A twisting involution witness: a pure chi in O, anticommuting with mu,
/// normalizing O, with squarefree_part(-n(chi)) = m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistWitness {
    pub chi: Quaternion,
    pub m: BigInt,
}

impl TwistWitness {
    pub fn new(datum: &PrincipalDatum, chi: Quaternion) -> Result<Self> {
        match check_twist(datum, &chi)? {
            Some(w) => Ok(w),
            None => Err(Error::domain("element is not a twist of (O, mu)")),
        }
    }
}

/// Test the five twist invariants; returns the witness with its class on
/// success.
pub fn check_twist(datum: &PrincipalDatum, chi: &Quaternion) -> Result<Option<TwistWitness>> {
    if chi.is_zero() || !chi.trace().is_zero() || !datum.order().contains(chi) {
        return Ok(None);
    }
    let anti = datum
        .mu()
        .mul(chi)?
        .add(&chi.mul(datum.mu())?)?;
    if !anti.is_zero() {
        return Ok(None);
    }
    let n = chi.norm();
    if !n.is_negative() {
        return Ok(None);
    }
    let m = squarefree_part(&-n)?;
    if !(datum.disc() % &m).is_zero() {
        return Ok(None);
    }
    if !twisting_divisors(datum.algebra())?.contains(&m) {
        return Ok(None);
    }
    if !normalizes(datum.order(), chi)? {
        return Ok(None);
    }
    Ok(Some(TwistWitness {
        chi: chi.clone(),
        m,
    }))
}

/// Outcome of the twist witness search across all twisting divisors.
#[derive(Debug, Clone)]
pub struct TwistSearch {
    pub witnesses: Vec<TwistWitness>,
    /// Twisting divisors for which no witness was found within the bound.
    pub missing: Vec<BigInt>,
}

/// The rank-2 sublattice of O anticommuting with mu, the exact search
/// space for twists.
pub fn anticommuting_sublattice(datum: &PrincipalDatum) -> Result<Lattice> {
    let lat = commutator_sublattice(datum.order().lattice(), datum.mu(), 1)?;
    if lat.rank() != 2 {
        return Err(Error::InvariantViolation(format!(
            "anticommuting sublattice has rank {}",
            lat.rank()
        )));
    }
    Ok(lat)
}

/// Bounded deterministic search for one twist witness per twisting divisor.
pub fn twist_witnesses(datum: &PrincipalDatum, bound: i64) -> Result<TwistSearch> {
    let divisors = twisting_divisors(datum.algebra())?;
    let mut out = TwistSearch {
        witnesses: Vec::new(),
        missing: Vec::new(),
    };
    if divisors.is_empty() {
        return Ok(out);
    }
    let lat = anticommuting_sublattice(datum)?;
    let searcher = NormSearcher::new(&lat)?;
    for m in divisors {
        let mut found: Option<TwistWitness> = None;
        searcher.find_where(bound, |q, n| {
            if !n.is_negative() || squarefree_part(&-n.clone())? != m {
                return Ok(false);
            }
            match check_twist(datum, q)? {
                Some(w) => {
                    found = Some(w);
                    Ok(true)
                }
                None => Ok(false),
            }
        })?;
        match found {
            Some(w) => out.witnesses.push(w),
            None => out.missing.push(m),
        }
    }
    Ok(out)
}

/// Deterministic bounded search for omega in O with
/// squarefree_part(n(omega)) = sign*m, normalizing O.
pub fn find_norm_class_element(
    ord: &Order,
    m: &BigInt,
    sign: i8,
    bound: i64,
) -> Result<Option<Quaternion>> {
    let disc = ord.reduced_discriminant()?;
    ALClass::new(disc, m.clone())?;
    if sign != 1 && sign != -1 {
        return Err(Error::domain("sign must be +1 or -1"));
    }
    if m.is_one() && sign == 1 {
        return Ok(Some(ord.algebra().one()));
    }
    let target_class = BigInt::from(sign as i64) * m;
    let searcher = NormSearcher::new(ord.lattice())?;
    searcher.find_where(bound, |q, n| {
        if n.is_zero() || squarefree_part(n)? != target_class {
            return Ok(false);
        }
        normalizes(ord, q)
    })
}

/// Deterministic bounded search for a unit of reduced norm ±1 in O.
pub fn unit_of_norm(ord: &Order, sign: i8, bound: i64) -> Result<Option<Quaternion>> {
    match sign {
        1 => Ok(Some(ord.algebra().one())),
        -1 => {
            let searcher = NormSearcher::new(ord.lattice())?;
            searcher.find(&-Rat::one(), bound, |_| Ok(true))
        }
        _ => Err(Error::domain("sign must be +1 or -1")),
    }
}

/// The quadratic order S = Q(mu) ∩ O, identified abstractly by its
/// discriminant.
pub fn stable_suborder(datum: &PrincipalDatum) -> Result<(Lattice, QuadOrder)> {
    let span = [datum.algebra().one(), datum.mu().clone()];
    let s_lat = datum.order().lattice().intersect_span(&span)?;
    if s_lat.rank() != 2 {
        return Err(Error::InvariantViolation(
            "Q(mu) ∩ O does not have rank 2".into(),
        ));
    }
    let basis = s_lat.basis();
    let mut gram = vec![vec![Rat::zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            gram[r][c] = basis[r].mul(&basis[c])?.trace();
        }
    }
    let disc = linalg::det(&gram);
    if !disc.is_integer() || !disc.is_negative() {
        return Err(Error::InvariantViolation(format!(
            "discriminant of S is {disc}, expected a negative integer"
        )));
    }
    let disc = disc.to_integer();
    let d = squarefree_part(&Rat::from_integer(disc.clone()))?;
    let dk = if d.mod_floor(&BigInt::from(4)).is_one() {
        d.clone()
    } else {
        BigInt::from(4) * &d
    };
    let f2 = &disc / &dk;
    let f = f2.sqrt();
    if &f * &f != f2 {
        return Err(Error::InvariantViolation(
            "conductor of S is not integral".into(),
        ));
    }
    Ok((s_lat, QuadOrder::new(d, f)?))
}

/// U0: classes of norms of primitive elements s of S = Q(mu) ∩ O that
/// normalize O, found by exhaustive positive-definite representation
/// search with n(s) = m k^2, k up to the bound.
pub fn group_u0(datum: &PrincipalDatum, bound: i64) -> Result<ALSubgroup> {
    let (s_lat, _) = stable_suborder(datum)?;
    let basis = s_lat.basis();
    let qa = rat_to_int(&basis[0].norm())?;
    let qb = rat_to_int(&basis[0].mul(&basis[1].conj())?.trace())?;
    let qc = rat_to_int(&basis[1].norm())?;
    let disc = datum.disc().clone();
    let mut gens: Vec<BigInt> = Vec::new();
    for m in squarefree_divisors(&disc)? {
        if m.is_one() {
            continue;
        }
        'k: for k in 1..=bound.max(1) {
            let target = &m * BigInt::from(k) * BigInt::from(k);
            for (x, y) in primitive_solutions(&qa, &qb, &qc, &target)? {
                let s = basis[0].scale(&Rat::from_integer(x)).add(&basis[1].scale(&Rat::from_integer(y)))?;
                if normalizes(datum.order(), &s)? {
                    gens.push(m.clone());
                    break 'k;
                }
            }
        }
    }
    ALSubgroup::generate(&disc, &gens)
}

fn rat_to_int(r: &Rat) -> Result<BigInt> {
    if !r.is_integer() {
        return Err(Error::InvariantViolation(format!(
            "expected an integer, got {r}"
        )));
    }
    Ok(r.to_integer())
}

/// All primitive solutions (x, y), gcd(x, y) = 1, of the positive-definite
/// form A x^2 + B x y + C y^2 = target.
fn primitive_solutions(
    qa: &BigInt,
    qb: &BigInt,
    qc: &BigInt,
    target: &BigInt,
) -> Result<Vec<(BigInt, BigInt)>> {
    let form_disc = qb * qb - BigInt::from(4) * qa * qc;
    if !form_disc.is_negative() || !qa.is_positive() {
        return Err(Error::domain("primitive representation needs a definite form"));
    }
    let mut out = Vec::new();
    if !target.is_positive() {
        return Ok(out);
    }
    // 4A N = (2A x + B y)^2 + |disc| y^2, so |y| <= sqrt(4A N / |disc|).
    let four_a_target = BigInt::from(4) * qa * target;
    let y_max = (&four_a_target / (-&form_disc)).sqrt();
    let mut ay = BigInt::zero();
    while ay <= y_max {
        for sy in [1i32, -1] {
            if sy < 0 && ay.is_zero() {
                continue;
            }
            let y = BigInt::from(sy) * &ay;
            let rest = &four_a_target + &form_disc * &y * &y;
            if let Some(r) = exact_sqrt(&rest) {
                for root in [r.clone(), -r] {
                    let num = &root - qb * &y;
                    let two_a = BigInt::from(2) * qa;
                    if (&num % &two_a).is_zero() {
                        let x = num / &two_a;
                        if x.gcd(&y).is_one() {
                            out.push((x, y.clone()));
                        }
                    }
                }
            }
        }
        ay += 1;
    }
    Ok(out)
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
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

/// V0: subgroup generated by the classes of found twist witnesses.
pub fn group_v0(datum: &PrincipalDatum, bound: i64) -> Result<ALSubgroup> {
    let search = twist_witnesses(datum, bound)?;
    let gens: Vec<BigInt> = search.witnesses.iter().map(|w| w.m.clone()).collect();
    ALSubgroup::generate(datum.disc(), &gens)
}

/// V0(S): twists lying in a given rank-2 sublattice (the image of an
/// Eichler pair). Any pure element of Q + Qg is a multiple of a single
/// primitive generator, so the test is closed-form.
pub fn group_v0_restricted(datum: &PrincipalDatum, s_lattice: &Lattice) -> Result<ALSubgroup> {
    if s_lattice.rank() != 2 {
        return Err(Error::domain("V0(S) needs a rank-2 lattice"));
    }
    if !datum.order().lattice().contains_lattice(s_lattice) {
        return Err(Error::domain("V0(S) lattice must lie in the order"));
    }
    let pure = s_lattice.pure_sublattice()?;
    if pure.rank() != 1 {
        return Err(Error::domain("pure part of the pair lattice must have rank 1"));
    }
    let h = primitive_in(&pure, &pure.basis()[0])?;
    match check_twist(datum, &h)? {
        Some(w) => ALSubgroup::generate(datum.disc(), &[w.m]),
        None => Ok(ALSubgroup::trivial(datum.disc().clone())),
    }
}

/// W0 = U0 · V0.
pub fn group_w0(datum: &PrincipalDatum, bound: i64) -> Result<ALSubgroup> {
    group_u0(datum, bound)?.join(&group_v0(datum, bound)?)
}

/// Number of odd-order roots of unity in R_mu = Q(mu) ∩ O: the odd part
/// of the root-of-unity count.
pub fn omega_odd(datum: &PrincipalDatum) -> Result<u32> {
    let (_, quad) = stable_suborder(datum)?;
    let orders = roots_of_unity(&quad);
    let total = *orders.iter().max().unwrap_or(&2);
    let mut odd = total;
    while odd % 2 == 0 {
        odd /= 2;
    }
    Ok(odd)
}

/// The degree report for pi_F, with the group-theoretic cross-check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeReport {
    #[serde(rename = "D")]
    pub d: u64,
    pub omega_odd: u32,
    pub twisting: bool,
    pub twisting_divisors: Vec<u64>,
    #[serde(rename = "degree_piF")]
    pub degree_pi_f: u64,
    #[serde(rename = "W0")]
    pub w0: Vec<u64>,
    #[serde(rename = "U0")]
    pub u0: Vec<u64>,
    #[serde(rename = "V0")]
    pub v0: Vec<u64>,
    pub witnesses: Vec<[RatJson; 4]>,
    pub search_bound: i64,
    pub complete: bool,
}

impl DegreeReport {
    /// Cross-check: the closed-form degree equals |W0|.
    pub fn consistent(&self) -> bool {
        self.degree_pi_f == self.w0.len() as u64
    }
}

fn to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::Overflow(format!("{x} does not fit u64")))
}

fn to_u64s(v: &[BigInt]) -> Result<Vec<u64>> {
    v.iter().map(to_u64).collect()
}

/// deg(pi_F) = 2^omega_odd (non-twisting) or 2^(2 omega_odd) (twisting),
/// with the full group computation alongside.
pub fn degree_forgetful_f(datum: &PrincipalDatum, bound: i64) -> Result<DegreeReport> {
    let divisors = twisting_divisors(datum.algebra())?;
    let twisting = !divisors.is_empty();
    let omega = omega_odd(datum)?;
    let exponent = if twisting { 2 * omega } else { omega };
    if exponent > 62 {
        return Err(Error::Overflow("degree exceeds u64".into()));
    }
    let degree = 1u64 << exponent;
    let u0 = group_u0(datum, bound)?;
    let search = twist_witnesses(datum, bound)?;
    let v0 = ALSubgroup::generate(
        datum.disc(),
        &search
            .witnesses
            .iter()
            .map(|w| w.m.clone())
            .collect::<Vec<_>>(),
    )?;
    let w0 = u0.join(&v0)?;
    Ok(DegreeReport {
        d: to_u64(datum.disc())?,
        omega_odd: omega,
        twisting,
        twisting_divisors: to_u64s(&divisors)?,
        degree_pi_f: degree,
        w0: to_u64s(&w0.members())?,
        u0: to_u64s(&u0.members())?,
        v0: to_u64s(&v0.members())?,
        witnesses: search
            .witnesses
            .iter()
            .map(|w| quaternion_coords(&w.chi))
            .collect(),
        search_bound: bound,
        complete: search.missing.is_empty(),
    })
}

/// deg(pi_(S,phi)) = |V0(phi(S))| ∈ {1, 2}.
pub fn degree_forgetful_hilbert(datum: &PrincipalDatum, s_lattice: &Lattice) -> Result<u64> {
    Ok(group_v0_restricted(datum, s_lattice)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::lattice::{maximal_order, LeftIdeal};
    use crate::polarization::make_principal_datum;
    use crate::quaternion::QuaternionAlgebra;

    fn datum(a: i64, b: i64) -> PrincipalDatum {
        let alg = QuaternionAlgebra::new(rat(a), rat(b)).unwrap();
        let ord = maximal_order(&alg).unwrap();
        let ideal = LeftIdeal::from_order(&ord).unwrap();
        make_principal_datum(&ord, &ideal, 50).unwrap()
    }

    #[test]
    fn class_law() {
        let d = BigInt::from(6);
        let c = |m: i64| ALClass::new(d.clone(), BigInt::from(m)).unwrap();
        assert_eq!(al_compose(&c(2), &c(3)).unwrap().m(), &BigInt::from(6));
        assert_eq!(al_compose(&c(6), &c(2)).unwrap().m(), &BigInt::from(3));
        for m in [1i64, 2, 3, 6] {
            assert_eq!(al_compose(&c(m), &c(m)).unwrap().m(), &BigInt::one());
        }
        assert!(ALClass::new(BigInt::from(6), BigInt::from(4)).is_err());
        assert!(ALClass::new(BigInt::from(6), BigInt::from(5)).is_err());
    }

    #[test]
    fn full_group_is_klein_four_for_two_primes() {
        let d = BigInt::from(6);
        let all = ALSubgroup::generate(&d, &[BigInt::from(2), BigInt::from(3)]).unwrap();
        assert_eq!(all.len(), 4);
        for m in [1i64, 2, 3, 6] {
            assert!(all.contains(&BigInt::from(m)));
        }
    }

    #[test]
    fn u0_is_one_and_d() {
        let datum = datum(-1, 3);
        let u0 = group_u0(&datum, 20).unwrap();
        assert_eq!(u0.members(), vec![BigInt::one(), BigInt::from(6)]);
    }

    #[test]
    fn twist_witnesses_d6() {
        let datum = datum(-1, 3);
        let search = twist_witnesses(&datum, 50).unwrap();
        assert!(search.missing.is_empty());
        assert!(!search.witnesses.is_empty());
        for w in &search.witnesses {
            // All five invariants, re-checked through the constructor.
            TwistWitness::new(&datum, w.chi.clone()).unwrap();
            // chi^2 = -n(chi) as scalars.
            let sq = w.chi.mul(&w.chi).unwrap();
            assert_eq!(sq, datum.algebra().scalar(-w.chi.norm()));
        }
    }

    #[test]
    fn degree_d6_is_four() {
        let datum = datum(-1, 3);
        let report = degree_forgetful_f(&datum, 50).unwrap();
        assert_eq!(report.d, 6);
        assert_eq!(report.omega_odd, 1);
        assert!(report.twisting);
        assert_eq!(report.degree_pi_f, 4);
        assert_eq!(report.w0.len(), 4);
        assert!(report.consistent());
        assert!(report.complete);
    }

    #[test]
    fn norm_class_elements_d6() {
        let alg = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&alg).unwrap();
        assert_eq!(
            find_norm_class_element(&ord, &BigInt::one(), 1, 10)
                .unwrap()
                .unwrap(),
            alg.one()
        );
        for m in [2i64, 3, 6] {
            let w = find_norm_class_element(&ord, &BigInt::from(m), 1, 20)
                .unwrap()
                .expect("witness within bound");
            assert_eq!(squarefree_part(&w.norm()).unwrap(), BigInt::from(m));
            assert!(normalizes(&ord, &w).unwrap());
        }
    }

    #[test]
    fn unit_of_norm_minus_one() {
        let alg = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&alg).unwrap();
        let u = unit_of_norm(&ord, -1, 20).unwrap().expect("norm -1 unit");
        assert_eq!(u.norm(), rat(-1));
        // u * conj(u) = n(u) = -1 exactly; inverse stays in O.
        assert!(ord.contains(&u.inverse().unwrap()));
    }

    #[test]
    fn omega_odd_is_one_over_q() {
        for (a, b) in [(-1i64, 3i64), (-2, 5)] {
            assert_eq!(omega_odd(&datum(a, b)).unwrap(), 1);
        }
    }
}
