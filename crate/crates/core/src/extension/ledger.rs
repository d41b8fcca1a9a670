//! The constants of the extension step, evaluated exactly.
//!
//! With `c >= 2` the local scale and `c'` the recursive bound:
//!
//! ```text
//! r  = 2c(c+1)
//! c2 = max(2c + c', 4(r+3)c^2)
//! c3 = c2 + c(2(r+2)c + 2) + (r+2)c c' + (r+2)c^2
//! c0 = max((r+2)c^2, (r+2)c c', c2, 4c c' + 2c^2 + 2r + 2c r c3)
//! ```
//!
//! These outgrow `u64` quickly (`c = 512` already gives `c0 ~ 5e20`), so the
//! ledger is kept in arbitrary precision and only narrowed when a constant
//! has to become an edge weight.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantLedger {
    #[serde(with = "decimal")]
    pub c: BigUint,
    #[serde(with = "decimal")]
    pub c_rec: BigUint,
    #[serde(with = "decimal")]
    pub r: BigUint,
    #[serde(with = "decimal")]
    pub c2: BigUint,
    #[serde(with = "decimal")]
    pub c3: BigUint,
    #[serde(with = "decimal")]
    pub c0: BigUint,
}

impl ConstantLedger {
    /// `4c c' + 2c^2 + 2r + 2c r c3`, the slack in the upper bound.
    pub fn upper_slack(&self) -> BigUint {
        let (c, cr) = (&self.c, &self.c_rec);
        4u32 * c * cr + 2u32 * c * c + 2u32 * &self.r + 2u32 * c * &self.r * &self.c3
    }

    /// `(r+2)c`, the reach of the near/far partition.
    pub fn reach(&self) -> BigUint {
        (&self.r + 2u32) * &self.c
    }

    /// `2(r+2)c + 1`, the shortcut threshold.
    pub fn shortcut_threshold(&self) -> BigUint {
        2u32 * self.reach() + 1u32
    }

    /// Worst-case `(L, C)` of the shortcut map: `(2c t, 4c t)` with `t` the
    /// shortcut threshold.
    pub fn shortcut_params(&self) -> (BigUint, BigUint) {
        let t = self.shortcut_threshold();
        (2u32 * &self.c * &t, 4u32 * &self.c * &t)
    }

    pub fn c3_weight(&self) -> Result<u64> {
        narrow(&self.c3, "c3")
    }
}

/// Evaluates the ledger for local scale `c` and recursive bound `c_rec`.
pub fn constants(c: &BigUint, c_rec: &BigUint) -> ConstantLedger {
    let r = 2u32 * c * (c + 1u32);
    let c2 = (2u32 * c + c_rec).max(4u32 * (&r + 3u32) * c * c);
    let reach = (&r + 2u32) * c;
    let c3 = &c2 + c * (2u32 * &reach + 2u32) + &reach * c_rec + &reach * c;
    let c0 = (&reach * c)
        .max(&reach * c_rec)
        .max(c2.clone())
        .max(4u32 * c * c_rec + 2u32 * c * c + 2u32 * &r + 2u32 * c * &r * &c3);
    ConstantLedger {
        c: c.clone(),
        c_rec: c_rec.clone(),
        r,
        c2,
        c3,
        c0,
    }
}

pub fn constants_u64(c: u64, c_rec: u64) -> ConstantLedger {
    constants(&BigUint::from(c), &BigUint::from(c_rec))
}

/// The local scale `max(32C^4, C^3 + C)` used for a `(C-1, C)`-quasi-isometry
/// whose spanning geodesic is within `C^2` of every bag.
pub fn local_scale(c: &BigUint) -> BigUint {
    let c2 = c * c;
    (32u32 * &c2 * &c2).max(&c2 * c + c)
}

/// A-priori additive bound after `depth` extension levels, starting from a
/// `(C-1, C)`-quasi-isometry: level 0 is the single-vertex case (`C`), and
/// each further level feeds the normalised worst-case shortcut parameter of
/// the level above into the one below.
pub fn a_priori_bound(c: &BigUint, depth: usize) -> BigUint {
    if depth == 0 {
        return c.clone();
    }
    let scale = local_scale(c);
    let probe = constants(&scale, &BigUint::one());
    let (l, add) = probe.shortcut_params();
    let inner = (l + 1u32).max(add);
    let rec = a_priori_bound(&inner, depth - 1).max(BigUint::one());
    constants(&scale, &rec).c0
}

pub(crate) fn narrow(x: &BigUint, name: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::ConstantOverflow(format!("{name} = {x}")))
}

/// Serde adapter writing a `BigUint` as a decimal string.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| D::Error::custom(format!("not a decimal integer: {text:?}")))
    }
}
