//! Closed-form stream families declared in configuration files.
//!
//! Only named families with rational parameters are accepted; a config can
//! never smuggle in code.

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{ApproxStream, CoeffApprox, ConjectureBundle, StreamKind, DEFAULT_SIGMA_PRECISION};
use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{pow2_neg, rational_text, Rational, Scalar};
use crate::opalg::{rank_one_from_vector, HermOp, Ket, KetJson, OperatorJson};

/// An operator given in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorFamily {
    /// `Σ_j first·ratio^j |j⟩⟨j|`, over `size` ranks or unbounded.
    GeometricDiagonal {
        #[serde(with = "rational_text")]
        first: Rational,
        #[serde(with = "rational_text")]
        ratio: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<u64>,
    },
    /// `scale · |v⟩⟨v|`.
    Projection {
        #[serde(with = "rational_text")]
        scale: Rational,
        vector: KetJson,
    },
    Constant { operator: OperatorJson },
}

impl OperatorFamily {
    /// Highest rank carrying a nonzero entry, if bounded.
    pub fn extent(&self) -> Result<Option<StringIndex>> {
        Ok(match self {
            OperatorFamily::GeometricDiagonal { size: Some(0), .. } => Some(StringIndex::EMPTY),
            OperatorFamily::GeometricDiagonal { size: Some(s), .. } => Some(StringIndex::from_rank(s - 1)),
            OperatorFamily::GeometricDiagonal { size: None, .. } => None,
            OperatorFamily::Projection { vector, .. } => Some(Ket::try_from(vector.clone())?.window()),
            OperatorFamily::Constant { operator } => Some(operator.window),
        })
    }

    /// The exact operator compressed to `window`.
    pub fn at(&self, window: StringIndex) -> Result<HermOp> {
        match self {
            OperatorFamily::GeometricDiagonal { first, ratio, size } => {
                let top = match size {
                    Some(0) => return Ok(HermOp::zero(window)),
                    Some(s) => window.rank().min(s - 1),
                    None => window.rank(),
                };
                let mut values = Vec::with_capacity(top as usize + 1);
                let mut current = first.clone();
                for _ in 0..=top {
                    values.push(current.clone());
                    current = &current * ratio;
                }
                Ok(HermOp::diagonal(values).with_window(window))
            }
            OperatorFamily::Projection { scale, vector } => {
                let ket = Ket::try_from(vector.clone())?;
                Ok(rank_one_from_vector(&ket).scale(scale).compress(window).with_window(window))
            }
            OperatorFamily::Constant { operator } => {
                Ok(HermOp::try_from(operator.clone())?.compress(window).with_window(window))
            }
        }
    }

    /// Exact entry `⟨a|A b⟩`.
    pub fn entry(&self, a: StringIndex, b: StringIndex) -> Result<Scalar> {
        if let OperatorFamily::GeometricDiagonal { first, ratio, size } = self {
            if a != b || size.is_some_and(|s| a.rank() >= s) {
                return Ok(Scalar::zero());
            }
            let exp = i32::try_from(a.rank()).map_err(|_| Error::Invalid("rank too large".into()))?;
            return Ok(Scalar::from_rational(first * num_traits::pow::Pow::pow(ratio, exp)));
        }
        Ok(self.at(a.max(b))?.entry(a, b))
    }

    /// Exact coefficients of the operator.
    pub fn coeff_approx(&self) -> CoeffApprox {
        let family = self.clone();
        CoeffApprox::fallible(move |a, b, _| family.entry(a, b))
    }
}

/// How `ρ_n` approaches its limit `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Approach {
    /// `ρ_n = L`.
    Exact,
    /// `ρ_n = (1 - 2^-n) L`.
    FromBelow,
    /// `ρ_n = (1 + 2^-n) L`.
    FromAbove,
    /// `ρ_n = L + (-1)^n 2^{-(n+2)} P`.
    Oscillating { perturbation: OperatorFamily },
}

/// The support string `f(n)` of a stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupportRule {
    /// `f(n) = stringOf(n - 1 + offset)`.
    Growing {
        #[serde(default)]
        offset: u64,
    },
    Fixed { string: StringIndex },
    /// `f(n)` is the `n`-th listed string; the last one repeats.
    Table { strings: Vec<StringIndex> },
}

impl SupportRule {
    pub fn at(&self, n: u32) -> StringIndex {
        match self {
            SupportRule::Growing { offset } => StringIndex::from_rank(u64::from(n.max(1)) - 1 + offset),
            SupportRule::Fixed { string } => *string,
            SupportRule::Table { strings } => {
                let i = (n.max(1) as usize - 1).min(strings.len().saturating_sub(1));
                strings.get(i).copied().unwrap_or_default()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let SupportRule::Table { strings } = self {
            if strings.is_empty() {
                return Err(Error::Invalid("support table is empty".into()));
            }
        }
        Ok(())
    }
}

/// `n ↦ ρ_n` compressed to `truncation(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamFixture {
    pub limit: OperatorFamily,
    pub approach: Approach,
    pub truncation: SupportRule,
}

impl StreamFixture {
    pub fn kind(&self) -> StreamKind {
        match self.approach {
            Approach::Exact => StreamKind::Computable,
            Approach::FromBelow => StreamKind::Lower,
            Approach::FromAbove => StreamKind::Upper,
            Approach::Oscillating { .. } => StreamKind::Raw,
        }
    }

    pub fn eval(&self, n: u32) -> Result<HermOp> {
        let window = self.truncation.at(n);
        let limit = self.limit.at(window)?;
        Ok(match &self.approach {
            Approach::Exact => limit,
            Approach::FromBelow => limit.scale(&(Rational::one() - pow2_neg(n))),
            Approach::FromAbove => limit.scale(&(Rational::one() + pow2_neg(n))),
            Approach::Oscillating { perturbation } => {
                let sign = if n.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
                &limit + &perturbation.at(window)?.scale(&(sign * pow2_neg(n + 2)))
            }
        })
    }

    pub fn to_stream(&self) -> Result<ApproxStream> {
        self.truncation.validate()?;
        let fixture = self.clone();
        Ok(ApproxStream::fallible(self.kind(), move |n| fixture.eval(n)))
    }
}

/// A [`ConjectureBundle`] in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub rho: StreamFixture,
    pub sigma: OperatorFamily,
    pub support: SupportRule,
    #[serde(default = "default_sigma_precision")]
    pub sigma_precision: u32,
}

fn default_sigma_precision() -> u32 {
    DEFAULT_SIGMA_PRECISION
}

impl BundleConfig {
    pub fn build(&self) -> Result<ConjectureBundle> {
        self.support.validate()?;
        let rho = self.rho.to_stream()?;
        let support = self.support.clone();
        Ok(ConjectureBundle::new(rho, self.sigma.coeff_approx(), move |n| support.at(n))
            .with_sigma_precision(self.sigma_precision))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
