//! Property-based and seeded randomized tests for the exact-arithmetic
//! invariants: quaternion identities, Hilbert reciprocity, lattice
//! canonicity, ideal norms, and the Neron-Severi integrality criterion.

mod common;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quatforget::arith::{hilbert_candidate_places, hilbert_symbol, Rat};
use quatforget::atkin_lehner::{twist_witnesses, unit_of_norm};
use quatforget::lattice::{combine, Lattice, LeftIdeal};
use quatforget::polarization::{al_act, ns_lattice, riemann_form};
use quatforget::quaternion::QuaternionAlgebra;

use common::shipped_datum;

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    /// Cayley-Hamilton for quaternions: q^2 - tr(q) q + n(q) = 0.
    #[test]
    fn cayley_hamilton(
        a in -50i64..=50, b in -50i64..=50,
        c0 in -9i64..=9, c1 in -9i64..=9, c2 in -9i64..=9, c3 in -9i64..=9,
        den in 1i64..=6,
    ) {
        prop_assume!(a != 0 && b != 0);
        let alg = QuaternionAlgebra::new(rat(a), rat(b)).unwrap();
        let q = alg.element([
            rat_frac(c0, den), rat_frac(c1, den), rat_frac(c2, den), rat_frac(c3, den),
        ]);
        let lhs = q.mul(&q).unwrap()
            .sub(&q.scale(&q.trace())).unwrap()
            .add(&alg.scalar(q.norm())).unwrap();
        prop_assert!(lhs.is_zero());
    }

    /// Norm multiplicativity and conjugation anti-homomorphism.
    #[test]
    fn norm_and_conj_multiplicative(
        a in -50i64..=50, b in -50i64..=50,
        x0 in -5i64..=5, x1 in -5i64..=5, x2 in -5i64..=5, x3 in -5i64..=5,
        y0 in -5i64..=5, y1 in -5i64..=5, y2 in -5i64..=5, y3 in -5i64..=5,
    ) {
        prop_assume!(a != 0 && b != 0);
        let alg = QuaternionAlgebra::new(rat(a), rat(b)).unwrap();
        let x = alg.element([rat(x0), rat(x1), rat(x2), rat(x3)]);
        let y = alg.element([rat(y0), rat(y1), rat(y2), rat(y3)]);
        let xy = x.mul(&y).unwrap();
        prop_assert_eq!(xy.norm(), x.norm() * y.norm());
        prop_assert_eq!(xy.conj(), y.conj().mul(&x.conj()).unwrap());
    }

    /// Hilbert reciprocity: the symbol is -1 at an even number of places.
    #[test]
    fn hilbert_reciprocity(a in -3000i64..=3000, b in -3000i64..=3000) {
        prop_assume!(a != 0 && b != 0);
        let (a, b) = (rat(a), rat(b));
        let mut product = 1;
        for v in hilbert_candidate_places(&a, &b).unwrap() {
            product *= hilbert_symbol(&a, &b, &v).unwrap();
        }
        prop_assert_eq!(product, 1);
    }

    /// The canonical lattice form is invariant under unimodular shuffling
    /// of the generators.
    #[test]
    fn lattice_canonical_under_generator_mixing(
        seed in 0u64..1000,
        c0 in -6i64..=6, c1 in -6i64..=6, c2 in -6i64..=6, c3 in -6i64..=6,
    ) {
        let datum = shipped_datum(6);
        let basis = datum.order().basis();
        let alg = datum.algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Mix in a random integer combination and shuffle the order:
        // the generated lattice, hence its canonical form, is unchanged.
        let extra = combine(&basis, &[
            BigInt::from(c0), BigInt::from(c1), BigInt::from(c2), BigInt::from(c3),
        ]).unwrap();
        let mut gens = basis.clone();
        gens.push(extra);
        for k in (1..gens.len()).rev() {
            gens.swap(k, rng.gen_range(0..=k));
        }
        let mixed = Lattice::from_generators(&alg, &gens).unwrap();
        prop_assert_eq!(&mixed, datum.order().lattice());
    }
}

/// N(I) = I \bar{I} = n(I) O for principal left ideals I = O beta.
#[test]
fn norm_ideal_of_principal_ideals() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e4f524d);
    for d in [6u64, 10, 15] {
        let datum = shipped_datum(d);
        let basis = datum.order().basis();
        let mut done = 0;
        while done < 10 {
            let coeffs: Vec<BigInt> = (0..4)
                .map(|_| BigInt::from(rng.gen_range(-3i64..=3)))
                .collect();
            let beta = combine(&basis, &coeffs).unwrap();
            if beta.norm().is_zero() {
                continue;
            }
            let ideal = LeftIdeal::principal(datum.order(), &beta).unwrap();
            assert_eq!(ideal.reduced_norm().unwrap(), beta.norm().abs());
            let n_ideal = ideal.norm_ideal().unwrap();
            let scaled = datum
                .order()
                .lattice()
                .scale(&ideal.reduced_norm().unwrap())
                .unwrap();
            assert_eq!(n_ideal, scaled, "N(I) != n(I) O for D = {d}");
            done += 1;
        }
    }
}

/// E is Z-valued on I x I exactly when mu_pol lies in ns_lattice(datum),
/// checked on 30 random pure quaternions with bounded denominators.
#[test]
fn riemann_integrality_characterizes_ns() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e530f0f);
    let datum = shipped_datum(6);
    let ns = ns_lattice(&datum).unwrap();
    let ideal_basis = datum.ideal().lattice().basis();
    let alg = datum.algebra().clone();
    let mut in_ns = 0;
    let mut out_ns = 0;
    for _ in 0..30 {
        let den = [1i64, 2, 3, 6, 12][rng.gen_range(0..5)];
        let q = alg.element([
            rat(0),
            rat_frac(rng.gen_range(-8i64..=8), den),
            rat_frac(rng.gen_range(-8i64..=8), den),
            rat_frac(rng.gen_range(-8i64..=8), den),
        ]);
        let integral = ideal_basis.iter().all(|x| {
            ideal_basis
                .iter()
                .all(|y| riemann_form(&q, x, y).unwrap().is_integer())
        });
        assert_eq!(
            integral,
            ns.contains(&q),
            "integrality and NS membership disagree for {q:?}"
        );
        if ns.contains(&q) {
            in_ns += 1;
        } else {
            out_ns += 1;
        }
    }
    // The sample must exercise both sides of the equivalence.
    assert!(in_ns > 0 && out_ns > 0, "degenerate sample: {in_ns}/{out_ns}");
}

/// Atkin-Lehner transport preserves the polarization degree: the moved
/// Chern class has the same reduced norm delta.
#[test]
fn al_action_preserves_degree() {
    for d in [6u64, 10] {
        let datum = shipped_datum(d);
        let c1 = datum.principal_chern().mu_pol;
        let u = unit_of_norm(datum.order(), -1, 50).unwrap().expect("unit");
        for w in &twist_witnesses(&datum, 50).unwrap().witnesses {
            let omega = w.chi.mul(&u).unwrap();
            let action = al_act(&datum, &c1, &omega).unwrap();
            assert_eq!(
                action.chern.mu_pol.norm(),
                c1.norm(),
                "AL action changed delta for D = {d}"
            );
            assert!(action.chern.mu_pol.trace().is_zero());
        }
    }
}
