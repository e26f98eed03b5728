//! Deterministic dovetailing along the Cantor diagonals.
//!
//! Stage `s` visits the pair `(i, b)` of input index `i ≥ 1` and budget
//! `b ≥ 1` in diagonal `d = i + b = 2, 3, …`, with `i` ascending inside a
//! diagonal, so `s = (d-1)(d-2)/2 + i`. An input halts at the unique stage
//! whose budget equals its cost.

use num_integer::Roots;
use serde::Serialize;

use super::{Input, Machine, Value};
use crate::error::Result;

/// `π(x, y) = (x + y)(x + y + 1)/2 + y`.
pub fn cantor_pair(x: u64, y: u64) -> u64 {
    let s = x + y;
    s * (s + 1) / 2 + y
}

pub fn cantor_unpair(z: u64) -> (u64, u64) {
    let mut s = ((8 * u128::from(z) + 1).sqrt() - 1) / 2;
    while s * (s + 1) / 2 > u128::from(z) {
        s -= 1;
    }
    let y = z - (s * (s + 1) / 2) as u64;
    (s as u64 - y, y)
}

/// Stage at which input index `i` is run with budget `b`.
pub fn stage_of(i: u64, b: u64) -> u64 {
    let d = i + b;
    (d - 1) * (d - 2) / 2 + i
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HaltEvent {
    pub stage: u64,
    pub input: Input,
    pub value: Value,
}

/// Halt events of the first `total_stages` stages, in stage order.
pub fn dovetail(m: &Machine, total_stages: u64) -> Result<Vec<HaltEvent>> {
    let mut events = Vec::new();
    if m.table.is_empty() && m.rule.is_none() {
        return Ok(events);
    }
    let mut stage = 0u64;
    for d in 2u64.. {
        for i in 1..d {
            stage += 1;
            if stage > total_stages {
                return Ok(events);
            }
            let input = Input::at(m.kind, i);
            if m.halt_cost(&input) == Some(d - i) {
                let value = m.value_of(&input)?;
                events.push(HaltEvent { stage, input, value });
            }
        }
    }
    unreachable!("the diagonal loop only exits through the stage bound")
}
