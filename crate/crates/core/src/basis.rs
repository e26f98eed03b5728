//! The computational basis `{|w⟩ : w ∈ {0,1}*}` of the string space.
//!
//! Strings are identified with their rank in length-lexicographic order,
//! `λ < 0 < 1 < 00 < 01 < …`, so `rank(w) = 2^len(w) - 1 + binary(w)`.
//! All index arithmetic on strings (`w + v`, `k + w`) is arithmetic on ranks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::opalg::HermOp;

/// Longest string representable by a `u64` rank.
pub const MAX_LEN: u32 = 63;

/// A finite binary string, stored as its length-lexicographic rank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StringIndex(u64);

impl StringIndex {
    /// The empty string λ.
    pub const EMPTY: StringIndex = StringIndex(0);

    pub fn from_rank(rank: u64) -> Self {
        StringIndex(rank)
    }

    pub fn rank(self) -> u64 {
        self.0
    }

    pub fn len(self) -> u32 {
        let shifted = self.0 as u128 + 1;
        127 - shifted.leading_zeros()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Parses a bit string; `""` is λ.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let len = bits.len() as u32;
        if len > MAX_LEN {
            return Err(Error::Invalid(format!("string longer than {MAX_LEN} bits")));
        }
        let mut value = 0u64;
        for c in bits.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Parse(format!("not a bit string: {bits:?}"))),
                };
        }
        Ok(StringIndex((1u64 << len) - 1 + value))
    }

    pub fn bits(self) -> String {
        let len = self.len();
        if len == 0 {
            return String::new();
        }
        let value = (self.0 as u128 + 1 - (1u128 << len)) as u64;
        format!("{value:0width$b}", width = len as usize)
    }

    pub fn next(self) -> Self {
        StringIndex(self.0 + 1)
    }

    /// All strings of rank `0..=self.rank()`.
    pub fn up_to(self) -> impl Iterator<Item = StringIndex> {
        (0..=self.0).map(StringIndex)
    }

    /// All strings of length exactly `len`.
    pub fn of_length(len: u32) -> impl Iterator<Item = StringIndex> {
        let start = (1u64 << len) - 1;
        (start..start + (1u64 << len)).map(StringIndex)
    }
}

/// `rankOf`.
pub fn rank_of(w: StringIndex) -> u64 {
    w.rank()
}

/// `stringOf`.
pub fn string_of(rank: u64) -> StringIndex {
    StringIndex::from_rank(rank)
}

/// `P_w = Σ_{v=λ}^{w} |v⟩⟨v|`.
pub fn prefix_projector(w: StringIndex) -> HermOp {
    HermOp::identity(w)
}

impl fmt::Display for StringIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("λ")
        } else {
            f.write_str(&self.bits())
        }
    }
}

impl Serialize for StringIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.bits())
    }
}

impl<'de> Deserialize<'de> for StringIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        StringIndex::from_bits(&text).map_err(serde::de::Error::custom)
    }
}
