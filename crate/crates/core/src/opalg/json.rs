//! JSON forms of operators and vectors.
//!
//! Operators list only the upper triangle; readers reject entries below the
//! diagonal, entries outside the window and non-real diagonals.

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{HermOp, Ket};
use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{rational_text, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub row: StringIndex,
    pub col: StringIndex,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub window: StringIndex,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeJson {
    pub index: StringIndex,
    pub value: Scalar,
}

/// A vector `amps / √norm_divisor`; the divisor defaults to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KetJson {
    pub amplitudes: Vec<AmplitudeJson>,
    #[serde(with = "rational_text", default = "Rational::one")]
    pub norm_divisor: Rational,
}

impl From<&HermOp> for OperatorJson {
    fn from(op: &HermOp) -> Self {
        OperatorJson {
            window: op.window(),
            entries: op
                .upper_entries()
                .map(|(row, col, value)| EntryJson { row, col, value: value.clone() })
                .collect(),
        }
    }
}

impl TryFrom<OperatorJson> for HermOp {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        HermOp::from_upper(j.window, j.entries.into_iter().map(|e| (e.row, e.col, e.value)))
    }
}

impl From<&Ket> for KetJson {
    fn from(k: &Ket) -> Self {
        KetJson {
            amplitudes: k
                .amplitudes()
                .map(|(index, value)| AmplitudeJson { index, value: value.clone() })
                .collect(),
            norm_divisor: k.norm_divisor().clone(),
        }
    }
}

impl TryFrom<KetJson> for Ket {
    type Error = Error;

    fn try_from(j: KetJson) -> Result<Self> {
        Ket::from_amplitudes(j.amplitudes.into_iter().map(|a| (a.index, a.value)))
            .with_norm_divisor(j.norm_divisor)
    }
}

impl HermOp {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&OperatorJson::from(self)).expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: OperatorJson = serde_json::from_str(text)?;
        j.try_into()
    }
}

impl Ket {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&KetJson::from(self)).expect("vector serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: KetJson = serde_json::from_str(text)?;
        j.try_into()
    }
}
