//! Registry files.
//!
//! ```json
//! [{"kind": "quantum_matrix",
//!   "table": [{"input": [0], "value": [["1/1"]], "cost": 1}],
//!   "rule": {"name": "constant", "params": {...}}}]
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{rules, Input, Machine, MachineKind, Registry, Value};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntryJson {
    pub input: Input,
    pub value: Json,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleJson {
    pub name: String,
    #[serde(default)]
    pub params: Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineJson {
    pub kind: MachineKind,
    #[serde(default)]
    pub table: Vec<TableEntryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleJson>,
}

impl MachineJson {
    pub fn build(&self) -> Result<Machine> {
        let mut m = Machine::new(self.kind);
        for e in &self.table {
            m = m.with_entry(e.input, Value::from_json(self.kind, &e.value)?, e.cost)?;
        }
        if let Some(r) = &self.rule {
            m = m.with_rule(rules::build(self.kind, &r.name, &r.params)?);
        }
        Ok(m)
    }
}

impl From<&Machine> for MachineJson {
    fn from(m: &Machine) -> Self {
        MachineJson {
            kind: m.kind,
            table: m
                .table
                .iter()
                .map(|(input, e)| TableEntryJson { input: *input, value: e.value.to_json(), cost: e.cost })
                .collect(),
            rule: m.rule.as_ref().map(|r| RuleJson { name: r.name.clone(), params: r.params.clone() }),
        }
    }
}

impl Registry {
    pub fn from_json(text: &str) -> Result<Registry> {
        let specs: Vec<MachineJson> = serde_json::from_str(text)?;
        Ok(Registry::new(specs.iter().map(MachineJson::build).collect::<Result<_>>()?))
    }

    pub fn to_json(&self) -> String {
        let specs: Vec<MachineJson> = self.machines.iter().map(MachineJson::from).collect();
        serde_json::to_string_pretty(&specs).expect("registry serializes")
    }
}
