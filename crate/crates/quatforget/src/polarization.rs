//! Principal-type data (O, I, mu) with mu^2 + D = 0, the Neron-Severi
//! lattice, the Riemann form E(beta, gamma) = tr(mu gamma conj(beta)),
//! polarization degrees with a determinant oracle, pullbacks of first
//! Chern classes, a numeric positivity check and the Atkin-Lehner action
//! on polarized data.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{squarefree_part, Rat};
use crate::atkin_lehner::TwistWitness;
use crate::eichler::field_embeds_maximal;
use crate::error::{Error, Result};
use crate::lattice::{normalizes, LeftIdeal, Order};
use crate::lattice::Lattice;
use crate::linalg;
use crate::quaternion::{ramification, Quaternion, QuaternionAlgebra};
use crate::search::NormSearcher;

/// A principal-type datum: a maximal order O, a left O-ideal I and a pure
/// mu in O with mu^2 + D = 0 normalizing O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipalDatum {
    order: Order,
    ideal: LeftIdeal,
    mu: Quaternion,
    disc: BigInt,
}

impl PrincipalDatum {
    pub fn new(order: Order, ideal: LeftIdeal, mu: Quaternion) -> Result<Self> {
        if !order.is_maximal()? {
            return Err(Error::domain("principal datum requires a maximal order"));
        }
        if ideal.order() != &order {
            return Err(Error::domain("ideal belongs to a different order"));
        }
        let disc = ramification(order.algebra())?.discriminant;
        if !order.contains(&mu) {
            return Err(Error::domain("mu must lie in the order"));
        }
        if !mu.trace().is_zero() || mu.norm() != Rat::from_integer(disc.clone()) {
            return Err(Error::domain("mu must be pure with mu^2 + D = 0"));
        }
        if !normalizes(&order, &mu)? {
            return Err(Error::domain("mu must normalize the order"));
        }
        Ok(PrincipalDatum {
            order,
            ideal,
            mu,
            disc,
        })
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn ideal(&self) -> &LeftIdeal {
        &self.ideal
    }

    pub fn mu(&self) -> &Quaternion {
        &self.mu
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        self.order.algebra()
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    /// The degree-1 representative mu/D of the principal Chern class.
    pub fn principal_chern(&self) -> ChernClass {
        ChernClass {
            mu_pol: self
                .mu
                .scale(&Rat::new(BigInt::one(), self.disc.clone())),
        }
    }
}

/// A first Chern class, represented by a pure quaternion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChernClass {
    pub mu_pol: Quaternion,
}

/// Result of the Atkin-Lehner action on a polarized datum.
#[derive(Debug, Clone)]
pub struct ALAction {
    /// The conjugator, well defined up to Q*.
    pub omega: Quaternion,
    pub chern: ChernClass,
}

/// Construct a principal datum on the given order and ideal by a bounded
/// deterministic search for mu in the pure part of O with n(mu) = D.
/// Nonexistence (the field Q(sqrt(-D)) does not embed) is a domain error,
/// distinct from bound exhaustion.
pub fn make_principal_datum(order: &Order, ideal: &LeftIdeal, bound: i64) -> Result<PrincipalDatum> {
    if !order.is_maximal()? {
        return Err(Error::domain("make_principal_datum requires a maximal order"));
    }
    let disc = ramification(order.algebra())?.discriminant;
    let d_field = squarefree_part(&-Rat::from_integer(disc.clone()))?;
    if !field_embeds_maximal(order.algebra(), &d_field)? {
        return Err(Error::domain(
            "no mu with mu^2 + D = 0 exists: Q(sqrt(-D)) does not embed in B",
        ));
    }
    let pure = order.lattice().pure_sublattice()?;
    let searcher = NormSearcher::new(&pure)?;
    let target = Rat::from_integer(disc.clone());
    let hit = searcher.find(&target, bound, |q| normalizes(order, q))?;
    match hit {
        Some(mu) => PrincipalDatum::new(order.clone(), ideal.clone(), mu),
        None => Err(Error::NotWithinBound(bound)),
    }
}

/// The Neron-Severi lattice: the pure part of the codifferent of the norm
/// ideal N(I).
pub fn ns_lattice(datum: &PrincipalDatum) -> Result<Lattice> {
    datum
        .ideal()
        .norm_ideal()?
        .codifferent()?
        .pure_sublattice()
}

/// The Riemann form E(beta, gamma) = tr(mu_pol * gamma * conj(beta)).
pub fn riemann_form(
    mu_pol: &Quaternion,
    beta: &Quaternion,
    gamma: &Quaternion,
) -> Result<Rat> {
    Ok(mu_pol.mul(gamma)?.mul(&beta.conj())?.trace())
}

/// Rosati compatibility: E(u, beta v) = E(beta° u, v) with
/// beta° = mu_pol^-1 * conj(beta) * mu_pol.
pub fn rosati_compatibility(
    mu_pol: &Quaternion,
    beta: &Quaternion,
    u: &Quaternion,
    v: &Quaternion,
) -> Result<bool> {
    if mu_pol.norm().is_zero() {
        return Err(Error::domain("degenerate mu_pol"));
    }
    let rosati = mu_pol.inverse()?.mul(&beta.conj())?.mul(mu_pol)?;
    let lhs = riemann_form(mu_pol, u, &beta.mul(v)?)?;
    let rhs = riemann_form(mu_pol, &rosati.mul(u)?, v)?;
    Ok(lhs == rhs)
}

/// Pullback of the first Chern class: c1(alpha* L) = conj(alpha) * mu_pol * alpha.
pub fn pullback_c1(mu_pol: &Quaternion, alpha: &Quaternion) -> Result<Quaternion> {
    if alpha.is_zero() {
        return Err(Error::domain("pullback by zero"));
    }
    alpha.conj().mul(mu_pol)?.mul(alpha)
}

/// deg(phi_L) = (n(I)^2 * D * delta)^2 with delta = n(mu_pol), verified
/// against the independent oracle det(E(e_i, e_j)) over a Z-basis of I.
pub fn polarization_degree(datum: &PrincipalDatum, mu_pol: &Quaternion) -> Result<Rat> {
    let delta = mu_pol.norm();
    if !delta.is_positive() {
        return Err(Error::domain("polarization degree requires n(mu_pol) > 0"));
    }
    let n_i = datum.ideal().reduced_norm()?;
    let inner = &n_i * &n_i * Rat::from_integer(datum.disc.clone()) * &delta;
    let formula = &inner * &inner;
    let oracle = riemann_determinant(datum, mu_pol)?;
    if formula != oracle {
        return Err(Error::InvariantViolation(format!(
            "degree formula {} disagrees with Riemann form determinant {}",
            formula, oracle
        )));
    }
    Ok(formula)
}

/// The determinant oracle det(E(e_i, e_j)) over a Z-basis of I.
pub fn riemann_determinant(datum: &PrincipalDatum, mu_pol: &Quaternion) -> Result<Rat> {
    let basis = datum.ideal().lattice().basis();
    let mut m = vec![vec![Rat::zero(); 4]; 4];
    for (r, x) in basis.iter().enumerate() {
        for (c, y) in basis.iter().enumerate() {
            m[r][c] = riemann_form(mu_pol, x, y)?;
        }
    }
    Ok(linalg::det(&m))
}

/// Verify that a stable element s in S = Q(mu) ∩ O fixes the principal
/// Chern class: s^-1 (mu/D) s = mu/D.
pub fn verify_stable_fixes(datum: &PrincipalDatum, s: &Quaternion) -> Result<bool> {
    let span = [datum.algebra().one(), datum.mu.clone()];
    let in_span = {
        // s must be a Q-combination of 1 and mu.
        let rows: Vec<Vec<Rat>> = span.iter().map(|q| q.coords().to_vec()).collect();
        linalg::solve_left(&rows, &s.coords().to_vec()).is_some()
    };
    if !in_span || !datum.order.contains(s) {
        return Err(Error::domain("element is not in S = Q(mu) ∩ O"));
    }
    if s.norm().is_zero() {
        return Err(Error::domain("degenerate stable element"));
    }
    let c1 = datum.principal_chern().mu_pol;
    let moved = s.inverse()?.mul(&c1)?.mul(s)?;
    Ok(moved == c1)
}

/// Verify the twist transport identity: alpha = omega^-1 chi is a unit of
/// norm -1 in O and conj(alpha) (omega^-1 (mu/D) omega) alpha = mu/D.
/// Failures are reported as false, not as errors.
pub fn verify_twist_transport(
    datum: &PrincipalDatum,
    witness: &TwistWitness,
    omega: &Quaternion,
) -> Result<bool> {
    if !omega.norm().is_positive() || !normalizes(&datum.order, omega)? {
        return Err(Error::domain(
            "omega must be a positive-norm element normalizing O",
        ));
    }
    let alpha = omega.inverse()?.mul(&witness.chi)?;
    if !datum.order.contains(&alpha) || alpha.norm() != -Rat::one() {
        return Ok(false);
    }
    let c1 = datum.principal_chern().mu_pol;
    let moved = omega.inverse()?.mul(&c1)?.mul(omega)?;
    let transported = alpha.conj().mul(&moved)?.mul(&alpha)?;
    Ok(transported == c1)
}

/// The Atkin-Lehner action on a polarized datum: the new Chern class is
/// omega^-1 mu_pol omega (= conj(omega) mu_pol omega / n(omega)).
pub fn al_act(datum: &PrincipalDatum, mu_pol: &Quaternion, omega: &Quaternion) -> Result<ALAction> {
    if !omega.norm().is_positive() {
        return Err(Error::domain("al_act requires n(omega) > 0"));
    }
    if !normalizes(&datum.order, omega)? {
        return Err(Error::domain("al_act requires omega to normalize O"));
    }
    let chern = ChernClass {
        mu_pol: omega.inverse()?.mul(mu_pol)?.mul(omega)?,
    };
    Ok(ALAction {
        omega: omega.clone(),
        chern,
    })
}

// ---------------------------------------------------------------------------
// Numeric positivity check.

#[derive(Debug, Clone, Copy, PartialEq)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
    fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
}

/// A point tau in the upper half plane together with a numeric splitting
/// B -> M_2(R) determined by the presentation. Used only by the
/// positivity check.
#[derive(Debug, Clone)]
pub struct ComplexPoint {
    tau: C64,
    /// Splitting matrices of the standard basis 1, i, j, ij.
    mats: [[[f64; 2]; 2]; 4],
}

fn rat_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    m
}

impl ComplexPoint {
    /// Default evaluation point tau = i.
    pub fn at_i(alg: &QuaternionAlgebra) -> Result<Self> {
        ComplexPoint::new(alg, 0.0, 1.0)
    }

    pub fn new(alg: &QuaternionAlgebra, tau_re: f64, tau_im: f64) -> Result<Self> {
        if !(tau_im > 0.0) {
            return Err(Error::domain("tau must lie in the upper half plane"));
        }
        let a = rat_f64(alg.a());
        let b = rat_f64(alg.b());
        // Diagonalize the positive generator; at least one of a, b is
        // positive for a totally indefinite algebra.
        let (mi, mj) = if a > 0.0 {
            let s = a.sqrt();
            ([[s, 0.0], [0.0, -s]], [[0.0, b], [1.0, 0.0]])
        } else if b > 0.0 {
            let s = b.sqrt();
            ([[0.0, a], [1.0, 0.0]], [[s, 0.0], [0.0, -s]])
        } else {
            return Err(Error::domain("definite algebra has no real splitting"));
        };
        let mij = mat_mul(&mi, &mj);
        let mats = [[[1.0, 0.0], [0.0, 1.0]], mi, mj, mij];
        // Homomorphism sanity to 1e-12, scaled by the entry size.
        let scale = a.abs().max(b.abs()).max(1.0);
        let check = |m: &[[f64; 2]; 2], c: f64| -> bool {
            let sq = mat_mul(m, m);
            (sq[0][0] - c).abs() <= 1e-12 * scale
                && (sq[1][1] - c).abs() <= 1e-12 * scale
                && sq[0][1].abs() <= 1e-12 * scale
                && sq[1][0].abs() <= 1e-12 * scale
        };
        if !check(&mi, a) || !check(&mj, b) {
            return Err(Error::domain("splitting failed the homomorphism check"));
        }
        Ok(ComplexPoint {
            tau: C64::new(tau_re, tau_im),
            mats,
        })
    }
}

/// Numeric positivity of the Hermitian form H(u, v) = E(iu, v) + iE(u, v)
/// on C^2 at the given point: true/false on a clear verdict, an
/// Indeterminate error when any leading minor is within tolerance of zero.
pub fn positivity_check(
    datum: &PrincipalDatum,
    mu_pol: &Quaternion,
    point: &ComplexPoint,
    tol: f64,
) -> Result<bool> {
    if !mu_pol.norm().is_positive() {
        return Err(Error::domain("positivity requires n(mu_pol) > 0"));
    }
    let alg = datum.algebra();
    let std = alg.basis();
    // Riemann form on the standard basis of B, as floats.
    let mut e_mat = [[0.0f64; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            e_mat[r][c] = rat_f64(&riemann_form(mu_pol, &std[r], &std[c])?);
        }
    }
    // Real 4x4 matrix W: row k is the R^4 image of e_k v0, v0 = (tau, 1).
    let v0 = [point.tau, C64::new(1.0, 0.0)];
    let mut w = [[0.0f64; 4]; 4];
    for k in 0..4 {
        let m = &point.mats[k];
        let z0 = v0[0].scale(m[0][0]).add(v0[1].scale(m[0][1]));
        let z1 = v0[0].scale(m[1][0]).add(v0[1].scale(m[1][1]));
        w[k] = [z0.re, z0.im, z1.re, z1.im];
    }
    let winv = invert4(&w).ok_or_else(|| {
        Error::Indeterminate("lattice basis at tau is numerically singular".into())
    })?;
    // E in standard R^4 coordinates: F = W^-1 E (W^-1)^T.
    let mut f = [[0.0f64; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += winv[r][k] * e_mat[k][l] * winv[c][l];
                }
            }
            f[r][c] = s;
        }
    }
    let ebil = |x: &[f64; 4], y: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                s += x[r] * f[r][c] * y[c];
            }
        }
        s
    };
    // Complex structure on R^4 = C^2: (re0, im0, re1, im1).
    let jmul = |x: &[f64; 4]| -> [f64; 4] { [-x[1], x[0], -x[3], x[2]] };
    let eps: [[f64; 4]; 2] = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
    let mut h = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            h[r][c] = C64::new(ebil(&jmul(&eps[r]), &eps[c]), ebil(&eps[r], &eps[c]));
        }
    }
    let m1 = h[0][0].re;
    let det = h[0][0].mul(h[1][1]).add(h[0][1].mul(h[1][0]).scale(-1.0)).re;
    if m1.abs() < tol || det.abs() < tol {
        return Err(Error::Indeterminate(format!(
            "leading minors {m1:.3e}, {det:.3e} within tolerance of zero"
        )));
    }
    Ok(m1 > 0.0 && det > 0.0)
}

fn invert4(m: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[0.0f64; 4]; 4];
    for (r, row) in inv.iter_mut().enumerate() {
        row[r] = 1.0;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for c in 0..4 {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..4 {
                        a[r][c] -= f * a[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
    }
    Some(inv)
}
