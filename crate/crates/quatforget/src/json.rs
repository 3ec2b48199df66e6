//! JSON encodings for exact values: rationals serialize as plain integers
//! when they are integral and fit in i64, and as "n/d" strings otherwise,
//! so round trips are bit-exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::arith::Rat;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LeftIdeal, Order};
use crate::quaternion::{Quaternion, QuaternionAlgebra};

/// A rational in the wire format: integer or "n/d" string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatJson(pub Rat);

impl Serialize for RatJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = &self.0;
        if r.is_integer() {
            if let Some(v) = r.numer().to_i64() {
                return s.serialize_i64(v);
            }
            return s.serialize_str(&r.numer().to_string());
        }
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

impl<'de> Deserialize<'de> for RatJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RatJson;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"n/d\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<RatJson, E> {
                Ok(RatJson(Rat::from_integer(BigInt::from(v))))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<RatJson, E> {
                Ok(RatJson(Rat::from_integer(BigInt::from(v))))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RatJson, E> {
                parse_rat(v).map(RatJson).map_err(|e| E::custom(e))
            }
        }
        d.deserialize_any(V)
    }
}

/// Parse "n", "-n" or "n/d" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|e| Error::Parse(format!("bad numerator: {e}")))?;
    let d = BigInt::from_str(den).map_err(|e| Error::Parse(format!("bad denominator: {e}")))?;
    if d.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Rat::new(n, d))
}

use num_traits::Zero;

/// Wire form of a lattice: {"alg": [a, b], "den": q, "rows": [[..]; 4]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    pub alg: [RatJson; 2],
    pub den: RatJson,
    pub rows: Vec<[RatJson; 4]>,
}

impl LatticeJson {
    pub fn from_lattice(lat: &Lattice) -> Self {
        LatticeJson {
            alg: [
                RatJson(lat.algebra().a().clone()),
                RatJson(lat.algebra().b().clone()),
            ],
            den: RatJson(Rat::from_integer(lat.den().clone())),
            rows: lat
                .rows()
                .iter()
                .map(|r| {
                    [
                        RatJson(Rat::from_integer(r[0].clone())),
                        RatJson(Rat::from_integer(r[1].clone())),
                        RatJson(Rat::from_integer(r[2].clone())),
                        RatJson(Rat::from_integer(r[3].clone())),
                    ]
                })
                .collect(),
        }
    }

    pub fn to_lattice(&self) -> Result<Lattice> {
        let alg = QuaternionAlgebra::new(self.alg[0].0.clone(), self.alg[1].0.clone())?;
        let den = &self.den.0;
        if !den.is_integer() {
            return Err(Error::Parse("lattice denominator must be an integer".into()));
        }
        let rows: Vec<[BigInt; 4]> = self
            .rows
            .iter()
            .map(|r| {
                let mut out: [BigInt; 4] = Default::default();
                for (k, x) in r.iter().enumerate() {
                    if !x.0.is_integer() {
                        return Err(Error::Parse("lattice rows must be integral".into()));
                    }
                    out[k] = x.0.numer().clone();
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Lattice::new(alg, den.numer().clone(), rows)
    }
}

/// Wire form of a principal datum:
/// {"alg": [a, b], "order": <lattice>, "ideal": <lattice>, "mu": [x, y, z, t]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatumJson {
    pub alg: [RatJson; 2],
    pub order: LatticeJson,
    pub ideal: LatticeJson,
    pub mu: [RatJson; 4],
}

impl DatumJson {
    pub fn from_parts(order: &Order, ideal: &LeftIdeal, mu: &Quaternion) -> Self {
        DatumJson {
            alg: [
                RatJson(order.algebra().a().clone()),
                RatJson(order.algebra().b().clone()),
            ],
            order: LatticeJson::from_lattice(order.lattice()),
            ideal: LatticeJson::from_lattice(ideal.lattice()),
            mu: quaternion_coords(mu),
        }
    }

    pub fn to_parts(&self) -> Result<(Order, LeftIdeal, Quaternion)> {
        let order_lat = self.order.to_lattice()?;
        let order = Order::new(order_lat)?;
        let ideal = LeftIdeal::new(self.ideal.to_lattice()?, order.clone())?;
        let mu = order.algebra().element([
            self.mu[0].0.clone(),
            self.mu[1].0.clone(),
            self.mu[2].0.clone(),
            self.mu[3].0.clone(),
        ]);
        Ok((order, ideal, mu))
    }
}

pub fn quaternion_coords(q: &Quaternion) -> [RatJson; 4] {
    let c = q.coords();
    [
        RatJson(c[0].clone()),
        RatJson(c[1].clone()),
        RatJson(c[2].clone()),
        RatJson(c[3].clone()),
    ]
}

/// Serialize a BigInt list as JSON numbers (desk-scale values).
pub fn bigints_to_u64(v: &[BigInt]) -> Result<Vec<u64>> {
    v.iter()
        .map(|x| {
            x.to_u64()
                .ok_or_else(|| Error::Overflow(format!("{x} does not fit u64")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_frac};
    use crate::lattice::maximal_order;

    #[test]
    fn rational_wire_round_trip() {
        for r in [rat(0), rat(7), rat(-3), rat_frac(1, 2), rat_frac(-5, 6)] {
            let s = serde_json::to_string(&RatJson(r.clone())).unwrap();
            let back: RatJson = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0, r);
        }
        assert_eq!(serde_json::to_string(&RatJson(rat(7))).unwrap(), "7");
        assert_eq!(
            serde_json::to_string(&RatJson(rat_frac(1, 2))).unwrap(),
            "\"1/2\""
        );
    }

    #[test]
    fn parse_rat_errors() {
        assert!(parse_rat("3/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(parse_rat(" -4/6 ").unwrap(), rat_frac(-2, 3));
    }

    #[test]
    fn lattice_round_trip_bit_exact() {
        let b = QuaternionAlgebra::new(rat(-1), rat(3)).unwrap();
        let ord = maximal_order(&b).unwrap();
        let j = LatticeJson::from_lattice(ord.lattice());
        let s1 = serde_json::to_string(&j).unwrap();
        let parsed: LatticeJson = serde_json::from_str(&s1).unwrap();
        let s2 = serde_json::to_string(&parsed).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(&parsed.to_lattice().unwrap(), ord.lattice());
    }
}
