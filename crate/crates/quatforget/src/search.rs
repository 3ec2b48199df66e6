//! Deterministic bounded searches for lattice elements of prescribed
//! reduced norm. Coordinates are enumerated in shells of increasing
//! max-norm, lexicographically within a shell, so the first hit is
//! reproducible. The quadratic form is evaluated in i128 for speed and
//! every hit is re-verified exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::Rat;
use crate::error::{Error, Result};
use crate::lattice::{combine, Lattice};
use crate::quaternion::Quaternion;

pub struct NormSearcher {
    basis: Vec<Quaternion>,
    /// gram[k][l] = scale_num * tr(b_k conj(b_l)) as i128, with
    /// n(sum c b) = (c gram c^T) / (2 * scale_num).
    gram: Vec<Vec<i128>>,
    scale: BigInt,
}

impl NormSearcher {
    pub fn new(lat: &Lattice) -> Result<Self> {
        let basis = lat.basis();
        let mut scale = BigInt::one();
        let mut entries: Vec<Vec<Rat>> = Vec::with_capacity(basis.len());
        for x in &basis {
            let mut row = Vec::with_capacity(basis.len());
            for y in &basis {
                let t = x.mul(&y.conj())?.trace();
                scale = scale.lcm(t.denom());
                row.push(t);
            }
            entries.push(row);
        }
        let gram: Vec<Vec<i128>> = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| {
                        (t * Rat::from_integer(scale.clone()))
                            .to_integer()
                            .to_i128()
                            .ok_or_else(|| Error::Overflow("norm form exceeds i128".into()))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(NormSearcher { basis, gram, scale })
    }

    pub fn basis(&self) -> &[Quaternion] {
        &self.basis
    }

    fn eval(&self, c: &[i128]) -> Option<i128> {
        let n = c.len();
        let mut s: i128 = 0;
        for k in 0..n {
            for l in 0..n {
                s = s.checked_add(c[k].checked_mul(self.gram[k][l])?.checked_mul(c[l])?)?;
            }
        }
        Some(s)
    }

    /// First element (in shell order) whose exact reduced norm and value
    /// satisfy `pred`.
    pub fn find_where(
        &self,
        bound: i64,
        mut pred: impl FnMut(&Quaternion, &Rat) -> Result<bool>,
    ) -> Result<Option<Quaternion>> {
        if bound <= 0 {
            return Err(Error::domain("search bound must be positive"));
        }
        let two_scale = Rat::from_integer(&self.scale * BigInt::from(2));
        let rank = self.basis.len();
        let mut c = vec![0i128; rank];
        for r in 0..=bound as i128 {
            let hit = self.shell_where(&mut c, 0, r, false, &two_scale, &mut pred)?;
            if hit.is_some() {
                return Ok(hit);
            }
        }
        Ok(None)
    }

    fn shell_where(
        &self,
        c: &mut Vec<i128>,
        k: usize,
        r: i128,
        touched: bool,
        two_scale: &Rat,
        pred: &mut impl FnMut(&Quaternion, &Rat) -> Result<bool>,
    ) -> Result<Option<Quaternion>> {
        if k == c.len() {
            if (!touched && r > 0) || c.iter().all(|x| *x == 0) {
                return Ok(None);
            }
            let Some(s) = self.eval(c) else {
                return Err(Error::Overflow("norm evaluation exceeds i128".into()));
            };
            let n = Rat::from_integer(BigInt::from(s)) / two_scale;
            let coeffs: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            let q = combine(&self.basis, &coeffs)?;
            if pred(&q, &n)? {
                return Ok(Some(q));
            }
            return Ok(None);
        }
        for v in -r..=r {
            c[k] = v;
            let hit = self.shell_where(c, k + 1, r, touched || v.abs() == r, two_scale, pred)?;
            if hit.is_some() {
                return Ok(hit);
            }
        }
        c[k] = 0;
        Ok(None)
    }

    /// First element with reduced norm exactly `target` passing `pred`,
    /// searching coordinate shells up to `bound`.
    pub fn find(
        &self,
        target: &Rat,
        bound: i64,
        mut pred: impl FnMut(&Quaternion) -> Result<bool>,
    ) -> Result<Option<Quaternion>> {
        if bound <= 0 {
            return Err(Error::domain("search bound must be positive"));
        }
        // 2 * scale * n(x) must be the integer c G c^T.
        let t2 = target * Rat::from_integer(&self.scale * BigInt::from(2));
        if !t2.is_integer() {
            return Ok(None);
        }
        let Some(t2) = t2.to_integer().to_i128() else {
            return Err(Error::Overflow("search target exceeds i128".into()));
        };
        let rank = self.basis.len();
        let mut c = vec![0i128; rank];
        for r in 0..=bound as i128 {
            if let Some(hit) = self.shell(&mut c, 0, r, false, t2, &mut pred)? {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    fn shell(
        &self,
        c: &mut Vec<i128>,
        k: usize,
        r: i128,
        touched: bool,
        t2: i128,
        pred: &mut impl FnMut(&Quaternion) -> Result<bool>,
    ) -> Result<Option<Quaternion>> {
        if k == c.len() {
            if !touched && r > 0 {
                return Ok(None);
            }
            if c.iter().all(|x| *x == 0) {
                return Ok(None);
            }
            if self.eval(c) != Some(t2) {
                return Ok(None);
            }
            let coeffs: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            let q = combine(&self.basis, &coeffs)?;
            if pred(&q)? {
                return Ok(Some(q));
            }
            return Ok(None);
        }
        for v in -r..=r {
            c[k] = v;
            let hit = self.shell(c, k + 1, r, touched || v.abs() == r, t2, pred)?;
            if hit.is_some() {
                return Ok(hit);
            }
        }
        c[k] = 0;
        Ok(None)
    }
}

/// Primitive part of a quaternion's coordinate vector within a lattice: q
/// divided by the gcd of its integer coordinates.
pub fn primitive_in(lat: &Lattice, q: &Quaternion) -> Result<Quaternion> {
    let coords = lat
        .coordinates(q)
        .ok_or_else(|| Error::domain("element outside the lattice span"))?;
    let mut g = BigInt::zero();
    for c in &coords {
        if !c.is_integer() {
            return Err(Error::domain("element is not in the lattice"));
        }
        g = g.gcd(&c.to_integer());
    }
    if g.is_zero() || g.is_one() {
        return Ok(q.clone());
    }
    Ok(q.scale(&Rat::new(BigInt::one(), g.abs())))
}

use num_traits::One;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::lattice::maximal_order;
    use crate::quaternion::QuaternionAlgebra;

    #[test]
    fn finds_the_identity_for_norm_one() {
        let b = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&b).unwrap();
        let s = NormSearcher::new(ord.lattice()).unwrap();
        let hit = s.find(&rat(1), 5, |_| Ok(true)).unwrap().unwrap();
        assert_eq!(hit.norm(), rat(1));
    }

    #[test]
    fn deterministic_first_hit() {
        let b = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&b).unwrap();
        let s = NormSearcher::new(ord.lattice()).unwrap();
        let a = s.find(&rat(3), 10, |_| Ok(true)).unwrap().unwrap();
        let bq = s.find(&rat(3), 10, |_| Ok(true)).unwrap().unwrap();
        assert_eq!(a, bq);
        assert_eq!(a.norm(), rat(3));
    }

    #[test]
    fn respects_predicate_and_misses() {
        let b = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&b).unwrap();
        let s = NormSearcher::new(ord.lattice()).unwrap();
        // Fractional norms unreachable by integral elements.
        assert!(s
            .find(&Rat::new(BigInt::one(), BigInt::from(7)), 3, |_| Ok(true))
            .unwrap()
            .is_none());
        // Predicate rejecting everything.
        assert!(s.find(&rat(1), 3, |_| Ok(false)).unwrap().is_none());
        assert!(s.find(&rat(1), 0, |_| Ok(true)).is_err());
    }

    #[test]
    fn primitive_part() {
        let b = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&b).unwrap();
        let two_i = b.gen_i().scale(&rat(2));
        let p = primitive_in(ord.lattice(), &two_i).unwrap();
        assert_eq!(p, b.gen_i());
    }
}
