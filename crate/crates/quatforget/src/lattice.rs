//! Full and partial rank Z-lattices in a quaternion algebra: orders,
//! maximality by reduced discriminant, left ideals, norm ideals, the
//! codifferent under the trace pairing and pure-part sublattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor, Rat};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quaternion::{ramification, Quaternion, QuaternionAlgebra};

const DEN_LIMIT_BITS: u64 = 64;

/// A Z-lattice of rank <= 4 in B, stored as `rows / den` with `rows` in
/// canonical Hermite normal form and gcd(den, content(rows)) = 1.
/// Equality of lattices is structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    alg: QuaternionAlgebra,
    den: BigInt,
    rows: Vec<[BigInt; 4]>,
}

impl Lattice {
    /// Canonical lattice spanned by integer rows over a common denominator.
    pub fn new(alg: QuaternionAlgebra, den: BigInt, rows: Vec<[BigInt; 4]>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::domain("lattice denominator must be nonzero"));
        }
        let den = den.abs();
        let h = linalg::hnf(rows.iter().map(|r| r.to_vec()).collect());
        let mut rows: Vec<[BigInt; 4]> = h
            .into_iter()
            .map(|r| {
                let mut a: [BigInt; 4] = Default::default();
                for (k, x) in r.into_iter().enumerate() {
                    a[k] = x;
                }
                a
            })
            .collect();
        // Reduce den against the content of the matrix.
        let mut g = den.clone();
        for r in &rows {
            for x in r {
                g = g.gcd(x);
            }
        }
        let mut den = den;
        if g > BigInt::one() {
            den /= &g;
            for r in rows.iter_mut() {
                for x in r.iter_mut() {
                    *x /= &g;
                }
            }
        }
        if den.bits() > DEN_LIMIT_BITS {
            return Err(Error::Overflow(format!(
                "lattice denominator exceeds 2^{}",
                DEN_LIMIT_BITS
            )));
        }
        Ok(Lattice { alg, den, rows })
    }

    /// Z-span of a list of quaternions of the same algebra.
    pub fn from_generators(alg: &QuaternionAlgebra, gens: &[Quaternion]) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::domain("lattice needs at least one generator"));
        }
        let mut den = BigInt::one();
        for g in gens {
            if g.algebra() != alg {
                return Err(Error::domain("generator from a different algebra"));
            }
            for c in g.coords() {
                den = den.lcm(c.denom());
            }
        }
        let rows: Vec<[BigInt; 4]> = gens
            .iter()
            .map(|g| {
                let mut r: [BigInt; 4] = Default::default();
                for (k, c) in g.coords().iter().enumerate() {
                    let scaled = c * Rat::from_integer(den.clone());
                    debug_assert!(scaled.is_integer());
                    r[k] = scaled.to_integer();
                }
                r
            })
            .collect();
        Lattice::new(alg.clone(), den, rows)
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.alg
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn rows(&self) -> &[[BigInt; 4]] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Basis vectors as quaternions.
    pub fn basis(&self) -> Vec<Quaternion> {
        let d = Rat::from_integer(self.den.clone());
        self.rows
            .iter()
            .map(|r| {
                self.alg.element([
                    Rat::from_integer(r[0].clone()) / &d,
                    Rat::from_integer(r[1].clone()) / &d,
                    Rat::from_integer(r[2].clone()) / &d,
                    Rat::from_integer(r[3].clone()) / &d,
                ])
            })
            .collect()
    }

    fn rational_rows(&self) -> Vec<Vec<Rat>> {
        let d = Rat::from_integer(self.den.clone());
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| Rat::from_integer(x.clone()) / &d).collect())
            .collect()
    }

    /// Rational coordinates of q with respect to the lattice basis, if q
    /// lies in the Q-span.
    pub fn coordinates(&self, q: &Quaternion) -> Option<Vec<Rat>> {
        let rows = self.rational_rows();
        let v: Vec<Rat> = q.coords().to_vec();
        linalg::solve_left(&rows, &v)
    }

    pub fn contains(&self, q: &Quaternion) -> bool {
        if q.algebra() != &self.alg {
            return false;
        }
        match self.coordinates(q) {
            Some(c) => c.iter().all(|x| x.is_integer()),
            None => false,
        }
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    /// Span of the union of two lattices.
    pub fn join(&self, other: &Lattice) -> Result<Lattice> {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Lattice::from_generators(&self.alg, &gens)
    }

    /// Lattice spanned by all pairwise products of the two bases.
    pub fn product(&self, other: &Lattice) -> Result<Lattice> {
        if self.alg != other.alg {
            return Err(Error::domain("product of lattices in different algebras"));
        }
        let mut gens = Vec::with_capacity(self.rank() * other.rank());
        for x in self.basis() {
            for y in other.basis() {
                gens.push(x.mul(&y)?);
            }
        }
        Lattice::from_generators(&self.alg, &gens)
    }

    pub fn scale(&self, c: &Rat) -> Result<Lattice> {
        if c.is_zero() {
            return Err(Error::domain("scaling a lattice by zero"));
        }
        let gens: Vec<Quaternion> = self.basis().iter().map(|b| b.scale(c)).collect();
        Lattice::from_generators(&self.alg, &gens)
    }

    pub fn conj(&self) -> Result<Lattice> {
        let gens: Vec<Quaternion> = self.basis().iter().map(|b| b.conj()).collect();
        Lattice::from_generators(&self.alg, &gens)
    }

    /// det of the basis matrix (rank 4 only), a nonzero rational.
    pub fn det(&self) -> Result<Rat> {
        if self.rank() != 4 {
            return Err(Error::domain("determinant requires a full-rank lattice"));
        }
        Ok(linalg::det(&self.rational_rows()))
    }

    /// Generalized index [other : self] for lattices of equal rank with the
    /// same Q-span: |det| of the coordinate matrix of self's basis in
    /// other's basis.
    pub fn index_in(&self, other: &Lattice) -> Result<Rat> {
        if self.rank() != other.rank() {
            return Err(Error::domain("index requires lattices of equal rank"));
        }
        let coords: Vec<Vec<Rat>> = self
            .basis()
            .iter()
            .map(|b| {
                other
                    .coordinates(b)
                    .ok_or_else(|| Error::domain("index requires lattices with equal Q-span"))
            })
            .collect::<Result<_>>()?;
        Ok(linalg::det(&coords).abs())
    }

    /// Dual lattice under the pairing (x, y) -> tr(x*y).
    pub fn codifferent(&self) -> Result<Lattice> {
        if self.rank() != 4 {
            return Err(Error::domain("codifferent requires a full-rank lattice"));
        }
        // tr(x*y) = coords(x)^T T coords(y) with T = diag(2, 2a, 2b, -2ab).
        let a = self.alg.a();
        let b = self.alg.b();
        let two = Rat::from_integer(BigInt::from(2));
        let tdiag = [
            two.clone(),
            &two * a,
            &two * b,
            -(&two * a * b),
        ];
        // Dual basis D solves D * (T * B^T) = I.
        let rows = self.rational_rows();
        let mut tbt = vec![vec![Rat::zero(); 4]; 4];
        for k in 0..4 {
            for l in 0..4 {
                // (T B^T)[k][l] = T[k][k] * B[l][k]
                tbt[k][l] = &tdiag[k] * &rows[l][k];
            }
        }
        let inv = linalg::inverse(&tbt)
            .ok_or_else(|| Error::domain("degenerate trace pairing"))?;
        let gens: Vec<Quaternion> = inv
            .iter()
            .map(|r| {
                self.alg
                    .element([r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()])
            })
            .collect();
        Lattice::from_generators(&self.alg, &gens)
    }

    /// The sublattice of trace-zero elements; rank 3 for full lattices.
    pub fn pure_sublattice(&self) -> Result<Lattice> {
        let basis = self.basis();
        // Trace is linear in the coordinates; kernel over Z.
        let mut den = BigInt::one();
        for b in &basis {
            den = den.lcm(b.trace().denom());
        }
        let col: Vec<Vec<BigInt>> = basis
            .iter()
            .map(|b| vec![(b.trace() * Rat::from_integer(den.clone())).to_integer()])
            .collect();
        let kernel = linalg::left_kernel(&col);
        let gens: Vec<Quaternion> = kernel
            .iter()
            .map(|c| combine(&basis, c))
            .collect::<Result<_>>()?;
        if gens.is_empty() {
            return Err(Error::domain("lattice has no trace-zero part"));
        }
        Lattice::from_generators(&self.alg, &gens)
    }

    /// Intersection of the lattice with the Q-span of the given quaternions.
    pub fn intersect_span(&self, span: &[Quaternion]) -> Result<Lattice> {
        // x in span(S) iff x is orthogonal (coordinate dot product) to the
        // kernel of the span's coordinate matrix.
        let mut sden = BigInt::one();
        for s in span {
            for c in s.coords() {
                sden = sden.lcm(c.denom());
            }
        }
        let smat: Vec<Vec<BigInt>> = span
            .iter()
            .map(|s| {
                s.coords()
                    .iter()
                    .map(|c| (c * Rat::from_integer(sden.clone())).to_integer())
                    .collect()
            })
            .collect();
        let complement = linalg::right_kernel(&smat); // vectors w with S w = 0
        let basis = self.basis();
        if complement.is_empty() {
            return Ok(self.clone());
        }
        // Conditions on coefficients c: (c . B) . w = 0 for each w.
        let mut den = BigInt::one();
        let mut cond: Vec<Vec<Rat>> = Vec::new();
        for bq in &basis {
            let mut row = Vec::new();
            for w in &complement {
                let mut s = Rat::zero();
                for k in 0..4 {
                    s += &bq.coords()[k] * Rat::from_integer(w[k].clone());
                }
                den = den.lcm(s.denom());
                row.push(s);
            }
            cond.push(row);
        }
        let cond_int: Vec<Vec<BigInt>> = cond
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| (x * Rat::from_integer(den.clone())).to_integer())
                    .collect()
            })
            .collect();
        let kernel = linalg::left_kernel(&cond_int);
        let gens: Vec<Quaternion> = kernel
            .iter()
            .map(|c| combine(&basis, c))
            .collect::<Result<_>>()?;
        if gens.is_empty() {
            return Err(Error::domain("intersection with span is trivial"));
        }
        Lattice::from_generators(&self.alg, &gens)
    }
}

/// The sublattice {x in lat : mu x + sign * x mu = 0}; with sign = +1 the
/// anticommutator, with sign = -1 the commutant of mu in lat.
pub fn commutator_sublattice(lat: &Lattice, mu: &Quaternion, sign: i8) -> Result<Lattice> {
    let basis = lat.basis();
    let s = Rat::from_integer(BigInt::from(sign as i64));
    // Row k: coordinates of mu*b_k + sign*b_k*mu; kernel of this 4x4 map.
    let mut den = BigInt::one();
    let imgs: Vec<Quaternion> = basis
        .iter()
        .map(|b| {
            let img = mu.mul(b)?.add(&b.mul(mu)?.scale(&s))?;
            for c in img.coords() {
                den = den.lcm(c.denom());
            }
            Ok(img)
        })
        .collect::<Result<_>>()?;
    let mat: Vec<Vec<BigInt>> = imgs
        .iter()
        .map(|img| {
            img.coords()
                .iter()
                .map(|c| (c * Rat::from_integer(den.clone())).to_integer())
                .collect()
        })
        .collect();
    let kernel = linalg::left_kernel(&mat);
    if kernel.is_empty() {
        return Err(Error::domain("commutator sublattice is trivial"));
    }
    let gens: Vec<Quaternion> = kernel
        .iter()
        .map(|c| combine(&basis, c))
        .collect::<Result<_>>()?;
    Lattice::from_generators(lat.algebra(), &gens)
}

/// Integer combination of lattice basis vectors.
pub fn combine(basis: &[Quaternion], coeffs: &[BigInt]) -> Result<Quaternion> {
    let mut acc = basis[0].algebra().zero();
    for (b, c) in basis.iter().zip(coeffs) {
        acc = acc.add(&b.scale(&Rat::from_integer(c.clone())))?;
    }
    Ok(acc)
}

/// Whether a full-rank lattice is an order: contains 1, closed under
/// multiplication (every element is then integral over Z).
pub fn is_order(lat: &Lattice) -> Result<bool> {
    if lat.rank() != 4 {
        return Ok(false);
    }
    if !lat.contains(&lat.algebra().one()) {
        return Ok(false);
    }
    let basis = lat.basis();
    for x in &basis {
        if !x.is_integral() {
            return Ok(false);
        }
        for y in &basis {
            if !lat.contains(&x.mul(y)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An order: a full lattice that is a ring of integral elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order(Lattice);

impl Order {
    pub fn new(lat: Lattice) -> Result<Self> {
        if !is_order(&lat)? {
            return Err(Error::domain("lattice is not an order"));
        }
        Ok(Order(lat))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.0
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        self.0.algebra()
    }

    pub fn basis(&self) -> Vec<Quaternion> {
        self.0.basis()
    }

    pub fn contains(&self, q: &Quaternion) -> bool {
        self.0.contains(q)
    }

    /// Reduced discriminant d(O): the positive integer with
    /// d(O)^2 = |det(tr(e_i e_j))|.
    pub fn reduced_discriminant(&self) -> Result<BigInt> {
        let basis = self.basis();
        let mut gram = vec![vec![Rat::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                gram[i][j] = basis[i].mul(&basis[j])?.trace();
            }
        }
        let d = linalg::det(&gram).abs();
        if !d.is_integer() {
            return Err(Error::InvariantViolation(
                "trace form determinant of an order is not integral".into(),
            ));
        }
        let d = d.to_integer();
        let r = d.sqrt();
        if &r * &r != d {
            return Err(Error::InvariantViolation(
                "trace form determinant is not a perfect square".into(),
            ));
        }
        Ok(r)
    }

    pub fn is_maximal(&self) -> Result<bool> {
        let disc_b = ramification(self.algebra())?.discriminant;
        Ok(self.reduced_discriminant()? == disc_b)
    }
}

/// True iff g^-1 O g = O as lattices.
pub fn normalizes(ord: &Order, g: &Quaternion) -> Result<bool> {
    if g.is_zero() || g.norm().is_zero() {
        return Err(Error::domain("normalizer test requires an invertible element"));
    }
    let ginv = g.inverse()?;
    let gens: Vec<Quaternion> = ord
        .basis()
        .iter()
        .map(|e| ginv.mul(e).and_then(|x| x.mul(g)))
        .collect::<Result<_>>()?;
    let conjugated = Lattice::from_generators(ord.algebra(), &gens)?;
    Ok(conjugated == *ord.lattice())
}

/// A left O-ideal: a full lattice I with O * I = I.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftIdeal {
    lattice: Lattice,
    order: Order,
}

impl LeftIdeal {
    pub fn new(lattice: Lattice, order: Order) -> Result<Self> {
        if lattice.rank() != 4 {
            return Err(Error::domain("a left ideal must have full rank"));
        }
        let prod = order.lattice().product(&lattice)?;
        if prod != lattice {
            return Err(Error::domain("lattice is not stable under the order"));
        }
        Ok(LeftIdeal { lattice, order })
    }

    /// The principal ideal O * beta.
    pub fn principal(order: &Order, beta: &Quaternion) -> Result<Self> {
        if beta.norm().is_zero() {
            return Err(Error::domain("principal ideal generator must be invertible"));
        }
        let gens: Vec<Quaternion> = order
            .basis()
            .iter()
            .map(|e| e.mul(beta))
            .collect::<Result<_>>()?;
        let lattice = Lattice::from_generators(order.algebra(), &gens)?;
        LeftIdeal::new(lattice, order.clone())
    }

    pub fn from_order(order: &Order) -> Result<Self> {
        LeftIdeal::new(order.lattice().clone(), order.clone())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    /// The reduced norm n(I): the positive generator of the fractional
    /// ideal spanned by the norms {n(x) : x in I}.
    pub fn reduced_norm(&self) -> Result<Rat> {
        let basis = self.lattice.basis();
        // Generated by n(e_i) and the polarizations tr(e_i conj(e_j)).
        let mut gens: Vec<Rat> = Vec::new();
        for (i, x) in basis.iter().enumerate() {
            gens.push(x.norm());
            for y in basis.iter().skip(i + 1) {
                gens.push(x.mul(&y.conj())?.trace());
            }
        }
        let mut den = BigInt::one();
        for g in &gens {
            den = den.lcm(g.denom());
        }
        let mut acc = BigInt::zero();
        for g in &gens {
            acc = acc.gcd(&(g * Rat::from_integer(den.clone())).to_integer());
        }
        if acc.is_zero() {
            return Err(Error::InvariantViolation("ideal with zero norm".into()));
        }
        Ok(Rat::new(acc, den))
    }

    /// The norm ideal N(I) = I * conj(I), verified to equal n(I) * O.
    pub fn norm_ideal(&self) -> Result<Lattice> {
        let prod = self.lattice.product(&self.lattice.conj()?)?;
        let n = self.reduced_norm()?;
        let expected = self.order.lattice().scale(&n)?;
        if prod != expected {
            return Err(Error::InvariantViolation(
                "I * conj(I) differs from n(I) * O".into(),
            ));
        }
        Ok(prod)
    }
}

/// Deterministic maximal order construction: start from the obvious order
/// on a rescaled integral basis and saturate at each prime dividing
/// d(O)/D until the reduced discriminant equals D.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Order> {
    let ram = ramification(alg)?;
    if ram.infinite_ramified {
        return Err(Error::domain("maximal_order requires a totally indefinite algebra"));
    }
    if ram.ramified_primes.is_empty() {
        return Err(Error::domain("maximal_order requires a division algebra"));
    }
    let disc_b = ram.discriminant.clone();

    // Rescale i, j so their squares are integers.
    let sa = Rat::from_integer(alg.a().denom().clone());
    let sb = Rat::from_integer(alg.b().denom().clone());
    let i1 = alg.gen_i().scale(&sa);
    let j1 = alg.gen_j().scale(&sb);
    let ij1 = i1.mul(&j1)?;
    let start = Lattice::from_generators(alg, &[alg.one(), i1, j1, ij1])?;
    let mut order = Order::new(start)?;

    loop {
        let d = order.reduced_discriminant()?;
        if d == disc_b {
            return Ok(order);
        }
        let index = &d / &disc_b;
        if (&d % &disc_b) != BigInt::zero() || index.is_one() {
            return Err(Error::SaturationFailed(format!(
                "reduced discriminant {} incompatible with algebra discriminant {}",
                d, disc_b
            )));
        }
        let mut enlarged = false;
        for p in factor(&index)?.primes() {
            if let Some(bigger) = saturate_at(&order, &p)? {
                order = bigger;
                enlarged = true;
                break;
            }
        }
        if !enlarged {
            return Err(Error::SaturationFailed(format!(
                "no index-p superorder found; stuck at discriminant {}",
                d
            )));
        }
    }
}

/// Find a strictly larger order at p, or None if there is none.
///
/// For odd p the radical idealizer step is used: O/pO is semisimple iff
/// the trace pairing tr(xy) is nondegenerate mod p, and when it is not,
/// the left idealizer of (the preimage of) its radical strictly contains
/// O. For p = 2 the trace pairing can degenerate for other reasons, so
/// the handful of index-2 superorders O + Zx, x in (1/2)O, is enumerated
/// exactly instead.
fn saturate_at(order: &Order, p: &BigInt) -> Result<Option<Order>> {
    let pi = p
        .to_i64()
        .ok_or_else(|| Error::Overflow("saturation prime exceeds i64".into()))?;
    if pi == 2 {
        return brute_saturate_2(order);
    }
    radical_idealizer_step(order, pi)
}

fn radical_idealizer_step(order: &Order, p: i64) -> Result<Option<Order>> {
    let basis = order.basis();
    // Gram matrix of the trace pairing mod p.
    let mut gram = [[0i128; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let v = basis[k].mul(&basis[l])?.trace();
            debug_assert!(v.is_integer());
            gram[k][l] = mod_i128(&v.to_integer(), p as i128);
        }
    }
    let kernel = kernel_mod_p(&gram, p as i128);
    if kernel.is_empty() {
        return Ok(None);
    }
    // J = preimage in O of the radical of O/pO.
    let mut gens: Vec<Quaternion> = basis
        .iter()
        .map(|e| e.scale(&Rat::from_integer(BigInt::from(p))))
        .collect();
    for c in &kernel {
        let coeffs: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
        gens.push(combine(&basis, &coeffs)?);
    }
    let j = Lattice::from_generators(order.algebra(), &gens)?;
    for left in [true, false] {
        let cand = idealizer(&j, left)?;
        if cand.contains_lattice(order.lattice()) && cand != *order.lattice() && is_order(&cand)? {
            return Ok(Some(Order::new(cand)?));
        }
    }
    // The idealizer stalls exactly when O_p is hereditary (an Eichler order
    // of level p). Its p+1 maximal overorders all lie in (1/p)J, so try
    // O + Z(w/p) for w ranging over the projective classes of J/pO.
    let lifts: Vec<Quaternion> = kernel
        .iter()
        .map(|c| {
            let coeffs: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            combine(&basis, &coeffs)
        })
        .collect::<Result<_>>()?;
    let r = lifts.len();
    let count: i64 = (0..r).map(|k| (p as i64).pow(k as u32)).sum();
    if count > 200_000 {
        return Ok(None);
    }
    let inv_p = Rat::new(BigInt::one(), BigInt::from(p));
    for lead in 0..r {
        let tail = r - lead - 1;
        let mut digits = vec![0i64; tail];
        loop {
            let mut w = lifts[lead].clone();
            for (t, &c) in digits.iter().enumerate() {
                w = w.add(&lifts[lead + 1 + t].scale(&Rat::from_integer(BigInt::from(c))))?;
            }
            let x = w.scale(&inv_p);
            let mut gens = basis.clone();
            gens.push(x);
            let cand = Lattice::from_generators(order.algebra(), &gens)?;
            if cand != *order.lattice() && is_order(&cand)? {
                return Ok(Some(Order::new(cand)?));
            }
            // Next digit vector in base p, or done with this leading slot.
            let mut t = 0;
            loop {
                if t == tail {
                    break;
                }
                digits[t] += 1;
                if digits[t] < p {
                    break;
                }
                digits[t] = 0;
                t += 1;
            }
            if tail == 0 || (t == tail && digits.iter().all(|&c| c == 0)) {
                break;
            }
        }
    }
    Ok(None)
}

/// The left (x J <= J) or right (J x <= J) idealizer of a full lattice.
fn idealizer(j: &Lattice, left: bool) -> Result<Lattice> {
    let alg = j.algebra().clone();
    let f_inv = linalg::inverse(
        &j.basis()
            .iter()
            .map(|b| b.coords().to_vec())
            .collect::<Vec<_>>(),
    )
    .ok_or_else(|| Error::domain("idealizer requires a full-rank lattice"))?;
    // x J <= J reads: coords(x) . R_f . F^-1 integral for every basis f of
    // J, with R_f the matrix of (left ? right : left) multiplication by f.
    // So x ranges over the dual, under the dot product, of the lattice
    // spanned by the columns of all matrices R_f F^-1.
    let std = alg.basis();
    let mut columns: Vec<Quaternion> = Vec::new();
    for f in j.basis() {
        let rf: Vec<Vec<Rat>> = std
            .iter()
            .map(|e| {
                let prod = if left { e.mul(&f) } else { f.mul(e) };
                prod.map(|q| q.coords().to_vec())
            })
            .collect::<Result<_>>()?;
        for c in 0..4 {
            let mut col = [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()];
            for (r, cc) in col.iter_mut().enumerate() {
                let mut s = Rat::zero();
                for k in 0..4 {
                    s += &rf[r][k] * &f_inv[k][c];
                }
                *cc = s;
            }
            columns.push(alg.element(col));
        }
    }
    let col_lattice = Lattice::from_generators(&alg, &columns)?;
    if col_lattice.rank() != 4 {
        return Err(Error::InvariantViolation(
            "idealizer conditions are rank deficient".into(),
        ));
    }
    // Dual of the column lattice: rows of the transposed inverse basis.
    let b = col_lattice.rational_rows();
    let binv = linalg::inverse(&b).expect("full-rank lattice basis");
    let gens: Vec<Quaternion> = (0..4)
        .map(|c| {
            alg.element([
                binv[0][c].clone(),
                binv[1][c].clone(),
                binv[2][c].clone(),
                binv[3][c].clone(),
            ])
        })
        .collect();
    Lattice::from_generators(&alg, &gens)
}

/// Exact enumeration of the index-2 superorders O + Zx with 2x in O.
fn brute_saturate_2(order: &Order) -> Result<Option<Order>> {
    let basis = order.basis();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    for mask in 1u32..16 {
        let coeffs: Vec<BigInt> = (0..4).map(|k| BigInt::from((mask >> k) & 1)).collect();
        let x = combine(&basis, &coeffs)?.scale(&half);
        if !x.is_integral() || order.contains(&x) {
            continue;
        }
        let mut gens = order.basis();
        gens.push(x);
        let cand = Lattice::from_generators(order.algebra(), &gens)?;
        if is_order(&cand)? {
            return Ok(Some(Order::new(cand)?));
        }
    }
    Ok(None)
}

/// Kernel vectors of a symmetric 4x4 matrix over F_p, as representatives
/// in 0..p.
fn kernel_mod_p(m: &[[i128; 4]; 4], p: i128) -> Vec<[i128; 4]> {
    let mut a: Vec<[i128; 8]> = (0..4)
        .map(|r| {
            let mut row = [0i128; 8];
            for c in 0..4 {
                row[c] = m[r][c].rem_euclid(p);
            }
            row[4 + r] = 1;
            row
        })
        .collect();
    let mut pivot = 0usize;
    for col in 0..4 {
        if let Some(r) = (pivot..4).find(|&r| a[r][col] % p != 0) {
            a.swap(pivot, r);
            let inv = inv_mod_p(a[pivot][col], p);
            for c in 0..8 {
                a[pivot][c] = a[pivot][c] * inv % p;
            }
            for r in 0..4 {
                if r != pivot && a[r][col] % p != 0 {
                    let f = a[r][col];
                    for c in 0..8 {
                        a[r][c] = (a[r][c] - f * a[pivot][c]).rem_euclid(p);
                    }
                }
            }
            pivot += 1;
        }
    }
    a[pivot..]
        .iter()
        .map(|row| {
            let mut v = [0i128; 4];
            for c in 0..4 {
                v[c] = row[4 + c].rem_euclid(p);
            }
            v
        })
        .collect()
}

fn inv_mod_p(a: i128, p: i128) -> i128 {
    // Extended Euclid; p is prime and a nonzero mod p.
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p)
}

fn mod_i128(x: &BigInt, m: i128) -> i128 {
    let r = x.mod_floor(&BigInt::from(m));
    r.to_i128().expect("reduced residue fits i128")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn alg(a: i64, b: i64) -> QuaternionAlgebra {
        QuaternionAlgebra::new(rat(a), rat(b)).unwrap()
    }

    fn standard_lattice(alg: &QuaternionAlgebra) -> Lattice {
        Lattice::from_generators(alg, &alg.basis()).unwrap()
    }

    #[test]
    fn generators_give_identity_basis() {
        let b = alg(-1, 3);
        let lat = standard_lattice(&b);
        assert_eq!(lat.rank(), 4);
        assert_eq!(lat.den(), &BigInt::one());
        for (k, row) in lat.rows().iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                assert_eq!(*x == BigInt::one(), k == l);
            }
        }
    }

    #[test]
    fn halved_generator_doubles_index() {
        let b = alg(-1, 3);
        let mut gens = b.basis().to_vec();
        gens.push(b.one().add(&b.gen_i()).unwrap().scale(&rat_frac_half()));
        let lat = Lattice::from_generators(&b, &gens).unwrap();
        let std = standard_lattice(&b);
        assert_eq!(lat.index_in(&std).unwrap(), rat_frac_half());
        // Duplicates change nothing.
        gens.push(b.gen_i());
        gens.push(b.gen_i());
        assert_eq!(Lattice::from_generators(&b, &gens).unwrap(), lat);
    }

    fn rat_frac_half() -> Rat {
        Rat::new(BigInt::one(), BigInt::from(2))
    }

    #[test]
    fn rank_deficient_generators_fail_ideal_uses() {
        let b = alg(-1, 3);
        let lat = Lattice::from_generators(&b, &[b.one(), b.gen_i()]).unwrap();
        assert_eq!(lat.rank(), 2);
        assert!(lat.det().is_err());
    }

    #[test]
    fn standard_order_discriminant() {
        let h = alg(-1, -1);
        let ord = Order::new(standard_lattice(&h)).unwrap();
        assert_eq!(ord.reduced_discriminant().unwrap(), BigInt::from(4));
        assert!(!ord.is_maximal().unwrap()); // D = 2
    }

    #[test]
    fn standard_order_discriminant_formula() {
        // d(O) = |4ab| for the standard basis with integral a, b.
        for (a, b) in [(-1i64, 3i64), (-2, 5), (3, 7)] {
            let alg_ab = alg(a, b);
            let ord = Order::new(standard_lattice(&alg_ab)).unwrap();
            assert_eq!(
                ord.reduced_discriminant().unwrap(),
                BigInt::from((4 * a * b).abs())
            );
        }
    }

    #[test]
    fn maximal_order_for_d6() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        assert_eq!(ord.reduced_discriminant().unwrap(), BigInt::from(6));
        assert!(ord.is_maximal().unwrap());
    }

    #[test]
    fn maximal_order_rejects_split() {
        assert!(maximal_order(&alg(1, 1)).is_err());
        assert!(maximal_order(&alg(-1, -1)).is_err());
    }

    #[test]
    fn normalizer_basics() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        assert!(normalizes(&ord, &b.one()).unwrap());
        assert!(normalizes(&ord, &b.scalar(rat(7))).unwrap());
        assert!(normalizes(&ord, &ord.basis()[1].scale(&rat(3))).is_ok());
        assert!(normalizes(&ord, &b.zero()).is_err());
    }

    #[test]
    fn ideal_norms_and_products() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        let i_o = LeftIdeal::from_order(&ord).unwrap();
        assert_eq!(i_o.reduced_norm().unwrap(), rat(1));
        assert_eq!(i_o.norm_ideal().unwrap(), *ord.lattice());

        let two_o = LeftIdeal::new(ord.lattice().scale(&rat(2)).unwrap(), ord.clone()).unwrap();
        assert_eq!(two_o.reduced_norm().unwrap(), rat(4));
        assert_eq!(
            two_o.norm_ideal().unwrap(),
            ord.lattice().scale(&rat(4)).unwrap()
        );
        // conj is an involution on lattices.
        assert_eq!(
            ord.lattice().conj().unwrap().conj().unwrap(),
            *ord.lattice()
        );
    }

    #[test]
    fn principal_ideal_norm_matches_generator() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        let beta = b.element([rat(1), rat(1), rat(1), rat(0)]);
        let ideal = LeftIdeal::principal(&ord, &beta).unwrap();
        // n(O beta) = |n(beta)| for a maximal order over Z.
        assert_eq!(ideal.reduced_norm().unwrap(), beta.norm().abs());
        ideal.norm_ideal().unwrap();
    }

    #[test]
    fn codifferent_properties() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        let dual = ord.lattice().codifferent().unwrap();
        assert_eq!(dual.codifferent().unwrap(), *ord.lattice());
        // Scaling inverts.
        let scaled = ord.lattice().scale(&rat(3)).unwrap();
        assert_eq!(
            scaled.codifferent().unwrap(),
            dual.scale(&Rat::new(BigInt::one(), BigInt::from(3))).unwrap()
        );
        // [O# : O] = D^2 for a maximal order.
        let idx = ord.lattice().index_in(&dual).unwrap();
        assert_eq!(idx, rat(36));
        // Duality element-wise: x in dual iff tr(x e) in Z for all basis e.
        for x in dual.basis() {
            for e in ord.basis() {
                assert!(x.mul(&e).unwrap().trace().is_integer());
            }
        }
    }

    #[test]
    fn pure_sublattice_of_standard_lattice() {
        let b = alg(-1, 3);
        let lat = standard_lattice(&b);
        let pure = lat.pure_sublattice().unwrap();
        assert_eq!(pure.rank(), 3);
        assert!(pure.contains(&b.gen_i()));
        assert!(pure.contains(&b.gen_j()));
        assert!(pure.contains(&b.gen_ij()));
        assert!(!pure.contains(&b.one()));
    }

    #[test]
    fn intersect_span_recovers_sublattice() {
        let b = alg(-1, 3);
        let ord = maximal_order(&b).unwrap();
        let g = b.gen_i();
        let sub = ord
            .lattice()
            .intersect_span(&[b.one(), g.clone()])
            .unwrap();
        assert_eq!(sub.rank(), 2);
        assert!(sub.contains(&b.one()));
        assert!(sub.contains(&g));
        for x in sub.basis() {
            assert!(ord.contains(&x));
        }
    }
}
