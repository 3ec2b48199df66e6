//! Totally real Eichler pairs (S, phi): the maximal-order embeddability
//! criterion, bounded optimal-embedding witness searches and the
//! twist-containment test driving the Hilbert-map degree.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{kronecker, squarefree_part, QuadOrder, Rat};
use crate::atkin_lehner::check_twist;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Order};
use crate::polarization::PrincipalDatum;
use crate::quaternion::{ramification, Quaternion, QuaternionAlgebra};
use crate::search::{primitive_in, NormSearcher};

/// An optimally embedded quadratic order: phi_image = Z + Z g with g ∈ O
/// realizing the order's generator, and phi(L) ∩ O = phi(S).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EichlerPair {
    pub quad: QuadOrder,
    pub g: Quaternion,
    pub phi_image: Lattice,
}

/// Embeddability of the ring of integers of Q(sqrt(d)) into a maximal
/// order: every prime ramified in B must be inert or ramified in the
/// field, i.e. the Kronecker symbol of the field discriminant is not +1.
/// `d` may be negative; used internally for Q(sqrt(-D)) as well.
pub fn field_embeds_maximal(alg: &QuaternionAlgebra, d: &BigInt) -> Result<bool> {
    if d.is_zero() || d.is_one() {
        return Err(Error::domain(format!("d = {d} is not a quadratic field")));
    }
    if squarefree_part(&Rat::from_integer(d.clone()))? != *d {
        return Err(Error::domain(format!("d = {d} is not squarefree")));
    }
    let ram = ramification(alg)?;
    if ram.infinite_ramified || ram.ramified_primes.is_empty() {
        return Err(Error::domain(
            "embeddability requires a totally indefinite division algebra",
        ));
    }
    let disc_field = if d.mod_floor(&BigInt::from(4)).is_one() {
        d.clone()
    } else {
        BigInt::from(4) * d
    };
    for p in &ram.ramified_primes {
        if kronecker(&disc_field, p)? == 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The embeddability criterion restricted to totally real fields (d > 0).
pub fn embeddable_maximal(alg: &QuaternionAlgebra, d: &BigInt) -> Result<bool> {
    if !d.is_positive() {
        return Err(Error::domain("embeddable_maximal requires d > 0"));
    }
    field_embeds_maximal(alg, d)
}

/// Bounded deterministic search for an optimal embedding of the given
/// totally real quadratic order into O.
pub fn find_embedding(ord: &Order, quad: &QuadOrder, bound: i64) -> Result<Option<EichlerPair>> {
    if !quad.d.is_positive() {
        return Err(Error::domain("Eichler pairs require a totally real order"));
    }
    let (t, n) = quad.generator_trace_norm();
    let t_rat = Rat::from_integer(t.clone());
    let n_rat = Rat::from_integer(n.clone());
    let alg = ord.algebra().clone();
    let searcher = NormSearcher::new(ord.lattice())?;
    let mut found: Option<EichlerPair> = None;
    searcher.find_where(bound, |g, norm| {
        if *norm != n_rat || g.trace() != t_rat {
            return Ok(false);
        }
        // Exclude rational g (degenerate, does not generate a rank-2 ring).
        if g.pure_part().is_zero() {
            return Ok(false);
        }
        let phi_image = Lattice::from_generators(&alg, &[alg.one(), g.clone()])?;
        let intersected = ord.lattice().intersect_span(&[alg.one(), g.clone()])?;
        if phi_image.index_in(&intersected)? != Rat::one() {
            return Ok(false); // embedding exists but is not optimal
        }
        found = Some(EichlerPair {
            quad: quad.clone(),
            g: g.clone(),
            phi_image,
        });
        Ok(true)
    })?;
    Ok(found)
}

/// Whether phi(S) contains a twist of (O, mu). Every pure element of
/// Q + Qg is a rational multiple of one primitive generator, so a single
/// exact check decides.
pub fn contains_twist(pair: &EichlerPair, datum: &PrincipalDatum) -> Result<bool> {
    if !datum.order().lattice().contains_lattice(&pair.phi_image) {
        return Err(Error::domain("pair does not live in the datum's order"));
    }
    let pure = pair.phi_image.pure_sublattice()?;
    if pure.rank() != 1 {
        return Err(Error::InvariantViolation(
            "pure part of an Eichler pair image must have rank 1".into(),
        ));
    }
    let h = primitive_in(&pure, &pure.basis()[0])?;
    Ok(check_twist(datum, &h)?.is_some())
}
