//! Cost-annotated partial functions and the dovetailing scheduler.
//!
//! A [`Machine`] is a finite table of `(input, value, cost)` entries plus an
//! optional closed-form rule. An input halts after `cost` steps; inputs
//! covered by neither table nor rule diverge. Table entries take precedence.

mod dovetail;
mod json;
pub mod rules;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value as Json;

pub use self::dovetail::{cantor_pair, cantor_unpair, dovetail, stage_of, HaltEvent};
pub use self::json::{MachineJson, RuleJson, TableEntryJson};

use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineKind {
    /// `(w, k) ↦ rational`.
    ClassicalSemimeasure,
    /// `(w, v, k) ↦ complex rational`.
    QuantumPointwise,
    /// `k ↦ finite hermitian matrix`.
    QuantumMatrix,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::ClassicalSemimeasure => "classical_semimeasure",
            MachineKind::QuantumPointwise => "quantum_pointwise",
            MachineKind::QuantumMatrix => "quantum_matrix",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Input {
    Classical(StringIndex, u64),
    Pointwise(StringIndex, StringIndex, u64),
    Matrix(u64),
}

impl Input {
    pub fn kind(&self) -> MachineKind {
        match self {
            Input::Classical(..) => MachineKind::ClassicalSemimeasure,
            Input::Pointwise(..) => MachineKind::QuantumPointwise,
            Input::Matrix(_) => MachineKind::QuantumMatrix,
        }
    }

    /// The `index`-th input (1-based) of the canonical enumeration of a kind's
    /// input space, decoded from `index - 1` by Cantor pairing.
    pub fn at(kind: MachineKind, index: u64) -> Input {
        let code = index.saturating_sub(1);
        match kind {
            MachineKind::ClassicalSemimeasure => {
                let (a, k) = cantor_unpair(code);
                Input::Classical(StringIndex::from_rank(a), k)
            }
            MachineKind::QuantumPointwise => {
                let (x, rest) = cantor_unpair(code);
                let (y, k) = cantor_unpair(rest);
                Input::Pointwise(StringIndex::from_rank(x), StringIndex::from_rank(y), k)
            }
            MachineKind::QuantumMatrix => Input::Matrix(code),
        }
    }

    /// Inverse of [`Input::at`].
    pub fn index(&self) -> u64 {
        1 + match *self {
            Input::Classical(w, k) => cantor_pair(w.rank(), k),
            Input::Pointwise(w, v, k) => cantor_pair(w.rank(), cantor_pair(v.rank(), k)),
            Input::Matrix(k) => k,
        }
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Classical(w, k) => write!(f, "({w}, {k})"),
            Input::Pointwise(w, v, k) => write!(f, "({w}, {v}, {k})"),
            Input::Matrix(k) => write!(f, "({k})"),
        }
    }
}

impl Serialize for Input {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let items: Vec<Json> = match self {
            Input::Classical(w, k) => vec![Json::from(w.bits()), Json::from(*k)],
            Input::Pointwise(w, v, k) => vec![Json::from(w.bits()), Json::from(v.bits()), Json::from(*k)],
            Input::Matrix(k) => vec![Json::from(*k)],
        };
        items.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Input {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let items = Vec::<Json>::deserialize(d)?;
        let bits = |j: &Json| -> std::result::Result<StringIndex, D::Error> {
            let text = j.as_str().ok_or_else(|| D::Error::custom("expected a bit string"))?;
            StringIndex::from_bits(text).map_err(D::Error::custom)
        };
        let nat = |j: &Json| j.as_u64().ok_or_else(|| D::Error::custom("expected a natural number"));
        match items.as_slice() {
            [k] => Ok(Input::Matrix(nat(k)?)),
            [w, k] => Ok(Input::Classical(bits(w)?, nat(k)?)),
            [w, v, k] => Ok(Input::Pointwise(bits(w)?, bits(v)?, nat(k)?)),
            _ => Err(D::Error::custom("input must have 1, 2 or 3 components")),
        }
    }
}

/// The output of a halting computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Rational(Rational),
    Scalar(Scalar),
    Matrix(Vec<Vec<Scalar>>),
}

impl Value {
    pub fn kind(&self) -> MachineKind {
        match self {
            Value::Rational(_) => MachineKind::ClassicalSemimeasure,
            Value::Scalar(_) => MachineKind::QuantumPointwise,
            Value::Matrix(_) => MachineKind::QuantumMatrix,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Rational(r) => Json::from(format_rational(r)),
            Value::Scalar(s) => Json::from(s.to_string()),
            Value::Matrix(m) => Json::Array(
                m.iter()
                    .map(|row| Json::Array(row.iter().map(|x| Json::from(x.to_string())).collect()))
                    .collect(),
            ),
        }
    }

    pub fn from_json(kind: MachineKind, j: &Json) -> Result<Value> {
        let text = |j: &Json| {
            j.as_str().map(str::to_owned).ok_or_else(|| Error::Parse(format!("expected a string, found {j}")))
        };
        match kind {
            MachineKind::ClassicalSemimeasure => Ok(Value::Rational(parse_rational(&text(j)?)?)),
            MachineKind::QuantumPointwise => Ok(Value::Scalar(text(j)?.parse()?)),
            MachineKind::QuantumMatrix => {
                let rows = j.as_array().ok_or_else(|| Error::Parse("matrix must be an array".into()))?;
                let mut m = Vec::with_capacity(rows.len());
                for row in rows {
                    let row = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
                    m.push(row.iter().map(|x| text(x)?.parse()).collect::<Result<Vec<Scalar>>>()?);
                }
                Ok(Value::Matrix(m))
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

type CostFn = Arc<dyn Fn(&Input) -> Option<u64> + Send + Sync>;
type ValueFn = Arc<dyn Fn(&Input) -> Result<Value> + Send + Sync>;

/// A closed-form rule: `cost` is `Some` exactly on the rule's domain.
#[derive(Clone)]
pub struct Rule {
    name: String,
    params: Json,
    cost: CostFn,
    value: ValueFn,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule").field("name", &self.name).field("params", &self.params).finish_non_exhaustive()
    }
}

impl Rule {
    pub fn new<C, V>(name: &str, params: Json, cost: C, value: V) -> Self
    where
        C: Fn(&Input) -> Option<u64> + Send + Sync + 'static,
        V: Fn(&Input) -> Result<Value> + Send + Sync + 'static,
    {
        Rule { name: name.to_owned(), params, cost: Arc::new(cost), value: Arc::new(value) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Json {
        &self.params
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub value: Value,
    pub cost: u64,
}

#[derive(Clone, Debug)]
pub struct Machine {
    kind: MachineKind,
    table: BTreeMap<Input, TableEntry>,
    rule: Option<Rule>,
}

impl Machine {
    /// The machine that diverges everywhere.
    pub fn new(kind: MachineKind) -> Self {
        Machine { kind, table: BTreeMap::new(), rule: None }
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn table(&self) -> &BTreeMap<Input, TableEntry> {
        &self.table
    }

    pub fn rule(&self) -> Option<&Rule> {
        self.rule.as_ref()
    }

    fn check_input(&self, input: &Input) -> Result<()> {
        if input.kind() == self.kind {
            Ok(())
        } else {
            Err(Error::WrongKind { expected: self.kind.to_string(), found: input.kind().to_string() })
        }
    }

    pub fn with_entry(mut self, input: Input, value: Value, cost: u64) -> Result<Self> {
        self.check_input(&input)?;
        if value.kind() != self.kind {
            return Err(Error::WrongKind { expected: self.kind.to_string(), found: value.kind().to_string() });
        }
        if cost == 0 {
            return Err(Error::Invalid(format!("halting cost of {input} must be at least 1")));
        }
        self.table.insert(input, TableEntry { value, cost });
        Ok(self)
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = Some(rule);
        self
    }

    /// Steps after which `input` halts, or `None` if it diverges.
    pub fn halt_cost(&self, input: &Input) -> Option<u64> {
        if let Some(e) = self.table.get(input) {
            return Some(e.cost);
        }
        self.rule.as_ref().and_then(|r| (r.cost)(input)).map(|c| c.max(1))
    }

    fn value_of(&self, input: &Input) -> Result<Value> {
        if let Some(e) = self.table.get(input) {
            return Ok(e.value.clone());
        }
        let rule = self.rule.as_ref().ok_or_else(|| Error::Invalid(format!("{input} diverges")))?;
        let value = (rule.value)(input)?;
        if value.kind() != self.kind {
            return Err(Error::WrongKind { expected: self.kind.to_string(), found: value.kind().to_string() });
        }
        Ok(value)
    }

    /// The output of `input` if it halts within `steps` steps.
    pub fn eval_with_budget(&self, input: &Input, steps: u64) -> Result<Option<Value>> {
        self.check_input(input)?;
        match self.halt_cost(input) {
            Some(c) if c <= steps => self.value_of(input).map(Some),
            _ => Ok(None),
        }
    }
}

/// An ordered list of machines, indexed from 1.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    machines: Vec<Machine>,
}

impl Registry {
    pub fn new(machines: Vec<Machine>) -> Self {
        Registry { machines }
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    /// The `n`-th machine, 1-based.
    pub fn get(&self, n: usize) -> Option<&Machine> {
        n.checked_sub(1).and_then(|i| self.machines.get(i))
    }

    pub fn expect_kind(&self, kind: MachineKind) -> Result<()> {
        for m in &self.machines {
            if m.kind != kind {
                return Err(Error::WrongKind { expected: kind.to_string(), found: m.kind.to_string() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ratio;

    fn w(bits: &str) -> StringIndex {
        StringIndex::from_bits(bits).unwrap()
    }

    fn single() -> Machine {
        Machine::new(MachineKind::ClassicalSemimeasure)
            .with_entry(Input::Classical(w(""), 0), Value::Rational(ratio(1, 2)), 5)
            .unwrap()
    }

    #[test]
    fn budgets() {
        let m = single();
        let input = Input::Classical(w(""), 0);
        assert_eq!(m.eval_with_budget(&input, 4).unwrap(), None);
        assert_eq!(m.eval_with_budget(&input, 5).unwrap(), Some(Value::Rational(ratio(1, 2))));
        assert_eq!(m.eval_with_budget(&Input::Classical(w("1"), 0), 1000).unwrap(), None);
        assert!(matches!(m.eval_with_budget(&Input::Matrix(0), 10), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn zero_cost_is_rejected() {
        let m = Machine::new(MachineKind::QuantumMatrix);
        assert!(m.with_entry(Input::Matrix(0), Value::Matrix(vec![]), 0).is_err());
    }

    #[test]
    fn input_enumeration_is_a_bijection() {
        for kind in [MachineKind::ClassicalSemimeasure, MachineKind::QuantumPointwise, MachineKind::QuantumMatrix] {
            for i in 1..500u64 {
                assert_eq!(Input::at(kind, i).index(), i);
            }
        }
        assert_eq!(Input::at(MachineKind::QuantumPointwise, 1), Input::Pointwise(w(""), w(""), 0));
        assert_eq!(Input::at(MachineKind::QuantumPointwise, 3), Input::Pointwise(w(""), w("0"), 0));
        assert_eq!(Input::at(MachineKind::QuantumPointwise, 5), Input::Pointwise(w("0"), w("0"), 0));
    }

    #[test]
    fn input_json() {
        let i = Input::Pointwise(w(""), w("10"), 3);
        let text = serde_json::to_string(&i).unwrap();
        assert_eq!(text, r#"["","10",3]"#);
        assert_eq!(serde_json::from_str::<Input>(&text).unwrap(), i);
        assert_eq!(serde_json::from_str::<Input>("[7]").unwrap(), Input::Matrix(7));
        assert!(serde_json::from_str::<Input>("[]").is_err());
    }
}
