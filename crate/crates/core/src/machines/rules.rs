//! Named closed-form rules that registry files may reference.
//!
//! | kind | name | value | cost |
//! |------|------|-------|------|
//! | classical | `length_geometric` | `(1 - 2^-k) 2^{-2len(w)-1}` | `len(w) + k + 1` |
//! | classical | `point_ramp` | `limit (1 - 2^-k)` at `w = index` | `k + 1` |
//! | pointwise | `naive_trap` | `½` if `w, v ∈ {λ, 0}`, else `0` | `8` |
//! | matrix | `projection_ramp` | `(1 - 2^-k) scale \|v⟩⟨v\|` | `k + 1` |
//! | matrix | `constant` | `operator` | `k + 1` |
//! | matrix | `bundle_primed` | `ρ'_{k+1}` of the bundle | `k + 1` |

use num_traits::One;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value as Json;

use super::{Input, MachineKind, Rule, Value};
use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{pow2_neg, rational_text, Rational, Scalar};
use crate::opalg::{rank_one_from_vector, HermOp, Ket, KetJson, OperatorJson};
use crate::streams::fixtures::BundleConfig;
use crate::streams::primed_stream;

/// Cost of every input of the `naive_trap` rule not overridden by a table entry.
pub const NAIVE_TRAP_DEFAULT_COST: u64 = 8;

fn params<T: DeserializeOwned>(name: &str, p: &Json) -> Result<T> {
    let p = if p.is_null() { Json::Object(Default::default()) } else { p.clone() };
    serde_json::from_value(p).map_err(|e| Error::Invalid(format!("parameters of rule {name}: {e}")))
}

fn ramp(k: u64) -> Rational {
    Rational::one() - pow2_neg(u32::try_from(k).unwrap_or(u32::MAX))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRamp {
    index: StringIndex,
    #[serde(with = "rational_text")]
    limit: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionRamp {
    #[serde(with = "rational_text")]
    scale: Rational,
    vector: KetJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Constant {
    operator: OperatorJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BundlePrimed {
    bundle: BundleConfig,
}

fn mismatch() -> Error {
    Error::Invalid("input does not match the rule's kind".into())
}

pub fn build(kind: MachineKind, name: &str, p: &Json) -> Result<Rule> {
    let p_owned = p.clone();
    match (kind, name) {
        (MachineKind::ClassicalSemimeasure, "length_geometric") => {
            params::<NoParams>(name, p)?;
            Ok(Rule::new(
                name,
                p_owned,
                |i| match *i {
                    Input::Classical(w, k) => Some(u64::from(w.len()) + k + 1),
                    _ => None,
                },
                |i| match *i {
                    Input::Classical(w, k) => Ok(Value::Rational(ramp(k) * pow2_neg(2 * w.len() + 1))),
                    _ => Err(mismatch()),
                },
            ))
        }
        (MachineKind::ClassicalSemimeasure, "point_ramp") => {
            let PointRamp { index, limit } = params(name, p)?;
            Ok(Rule::new(
                name,
                p_owned,
                move |i| match *i {
                    Input::Classical(w, k) if w == index => Some(k + 1),
                    _ => None,
                },
                move |i| match *i {
                    Input::Classical(_, k) => Ok(Value::Rational(&limit * ramp(k))),
                    _ => Err(mismatch()),
                },
            ))
        }
        (MachineKind::QuantumPointwise, "naive_trap") => {
            params::<NoParams>(name, p)?;
            Ok(Rule::new(
                name,
                p_owned,
                |i| matches!(i, Input::Pointwise(..)).then_some(NAIVE_TRAP_DEFAULT_COST),
                |i| match *i {
                    Input::Pointwise(w, v, _) if w.rank() <= 1 && v.rank() <= 1 => {
                        Ok(Value::Scalar(Scalar::from_ratio(1, 2)))
                    }
                    Input::Pointwise(..) => Ok(Value::Scalar(Scalar::zero())),
                    _ => Err(mismatch()),
                },
            ))
        }
        (MachineKind::QuantumMatrix, "projection_ramp") => {
            let ProjectionRamp { scale, vector } = params(name, p)?;
            let target = rank_one_from_vector(&Ket::try_from(vector)?).scale(&scale);
            Ok(matrix_rule(name, p_owned, move |k| Ok(target.scale(&ramp(k)))))
        }
        (MachineKind::QuantumMatrix, "constant") => {
            let Constant { operator } = params(name, p)?;
            let op = HermOp::try_from(operator)?;
            Ok(matrix_rule(name, p_owned, move |_| Ok(op.clone())))
        }
        (MachineKind::QuantumMatrix, "bundle_primed") => {
            let BundlePrimed { bundle } = params(name, p)?;
            let bundle = bundle.build()?;
            Ok(matrix_rule(name, p_owned, move |k| {
                let n = u32::try_from(k + 1).map_err(|_| Error::Invalid("stream index too large".into()))?;
                primed_stream(&bundle, n)
            }))
        }
        _ => Err(Error::Invalid(format!("no rule named {name:?} for kind {kind}"))),
    }
}

fn matrix_rule<F>(name: &str, p: Json, f: F) -> Rule
where
    F: Fn(u64) -> Result<HermOp> + Send + Sync + 'static,
{
    Rule::new(
        name,
        p,
        |i| match *i {
            Input::Matrix(k) => Some(k + 1),
            _ => None,
        },
        move |i| match *i {
            Input::Matrix(k) => Ok(Value::Matrix(f(k)?.to_matrix())),
            _ => Err(mismatch()),
        },
    )
}
