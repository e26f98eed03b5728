//! Acceptance loops over dovetailed halt events, and the universal mixtures.
//!
//! Each loop keeps a current state and accepts a proposal only if it does
//! not decrease the state and keeps the total mass at most one. Every event
//! is recorded with the reason for its verdict.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{pow2_neg, Rational, Scalar, Sign};
use crate::machines::{dovetail, Input, Machine, MachineKind, Registry, Value};
use crate::opalg::HermOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Ok,
    /// The proposal would decrease the state.
    Order,
    /// The proposal would push the total mass (sum or trace) above one.
    Trace,
    /// The proposal is not hermitian (non-real diagonal, or asymmetric matrix).
    Hermitian,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub stage: u64,
    pub input: Input,
    pub value: Value,
    pub machine: usize,
    pub accepted: bool,
    pub reason: Reason,
}

impl TraceEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalState {
    pub alpha: BTreeMap<StringIndex, Rational>,
    pub trace: Vec<TraceEvent>,
}

impl ClassicalState {
    pub fn mass(&self) -> Rational {
        self.alpha.values().fold(Rational::zero(), |a, b| a + b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumState {
    pub nu: HermOp,
    pub trace: Vec<TraceEvent>,
}

fn expect_kind(m: &Machine, kind: MachineKind) -> Result<()> {
    if m.kind() == kind {
        Ok(())
    } else {
        Err(Error::WrongKind { expected: kind.to_string(), found: m.kind().to_string() })
    }
}

fn event(stage: u64, input: Input, value: Value, machine: usize, reason: Reason) -> TraceEvent {
    TraceEvent { stage, input, value, machine, accepted: reason == Reason::Ok, reason }
}

pub fn enumerate_classical(m: &Machine, total_stages: u64) -> Result<ClassicalState> {
    enumerate_classical_indexed(m, 1, total_stages)
}

fn enumerate_classical_indexed(m: &Machine, index: usize, total_stages: u64) -> Result<ClassicalState> {
    expect_kind(m, MachineKind::ClassicalSemimeasure)?;
    let mut alpha: BTreeMap<StringIndex, Rational> = BTreeMap::new();
    let mut mass = Rational::zero();
    let mut trace = Vec::new();
    for e in dovetail(m, total_stages)? {
        let (Input::Classical(w, _), Value::Rational(q)) = (&e.input, &e.value) else {
            return Err(Error::WrongKind { expected: m.kind().to_string(), found: e.input.kind().to_string() });
        };
        let current = alpha.get(w).cloned().unwrap_or_default();
        let others = &mass - &current;
        let reason = if q < &current {
            Reason::Order
        } else if &others + q > Rational::one() {
            Reason::Trace
        } else {
            Reason::Ok
        };
        if reason == Reason::Ok {
            mass = others + q;
            alpha.insert(*w, q.clone());
        }
        trace.push(event(e.stage, e.input, e.value, index, reason));
    }
    alpha.retain(|_, v| !v.is_zero());
    Ok(ClassicalState { alpha, trace })
}

/// `m(w) = Σ_n 2^-n α^{(n)}_w`.
pub fn universal_semimeasure(r: &Registry, total_stages: u64) -> Result<BTreeMap<StringIndex, Rational>> {
    r.expect_kind(MachineKind::ClassicalSemimeasure)?;
    let mut m: BTreeMap<StringIndex, Rational> = BTreeMap::new();
    for (i, machine) in r.machines().iter().enumerate() {
        let weight = pow2_neg(i as u32 + 1);
        for (w, a) in enumerate_classical_indexed(machine, i + 1, total_stages)?.alpha {
            *m.entry(w).or_default() += &weight * a;
        }
    }
    Ok(m)
}

fn trace_at_most_one(op: &HermOp) -> bool {
    matches!((&Scalar::one() - &op.trace()).sign_of_real(), Ok(Sign::Zero | Sign::Positive))
}

/// Entrywise proposals `ρ'_{w'v'} := z` checked for `ρ ≤ ρ'` and `Tr ρ' ≤ 1`.
pub fn enumerate_quantum_naive(m: &Machine, total_stages: u64) -> Result<QuantumState> {
    expect_kind(m, MachineKind::QuantumPointwise)?;
    let mut nu = HermOp::zero(StringIndex::EMPTY);
    let mut trace = Vec::new();
    for e in dovetail(m, total_stages)? {
        let (Input::Pointwise(w, v, _), Value::Scalar(z)) = (&e.input, &e.value) else {
            return Err(Error::WrongKind { expected: m.kind().to_string(), found: e.input.kind().to_string() });
        };
        let reason = if w == v && !z.is_real() {
            Reason::Hermitian
        } else {
            let mut proposal = nu.clone();
            proposal.set(*w, *v, z.clone())?;
            let reason = if !nu.loewner_leq(&proposal) {
                Reason::Order
            } else if !trace_at_most_one(&proposal) {
                Reason::Trace
            } else {
                Reason::Ok
            };
            if reason == Reason::Ok {
                nu = proposal;
            }
            reason
        };
        trace.push(event(e.stage, e.input, e.value, 1, reason));
    }
    Ok(QuantumState { nu, trace })
}

pub fn enumerate_quantum_matrix(m: &Machine, total_stages: u64) -> Result<QuantumState> {
    enumerate_quantum_matrix_indexed(m, 1, total_stages)
}

fn enumerate_quantum_matrix_indexed(m: &Machine, index: usize, total_stages: u64) -> Result<QuantumState> {
    expect_kind(m, MachineKind::QuantumMatrix)?;
    let mut nu = HermOp::zero(StringIndex::EMPTY);
    let mut trace = Vec::new();
    for e in dovetail(m, total_stages)? {
        let Value::Matrix(matrix) = &e.value else {
            return Err(Error::WrongKind { expected: m.kind().to_string(), found: e.value.kind().to_string() });
        };
        let reason = match HermOp::embed(matrix) {
            Err(_) => Reason::Hermitian,
            Ok(proposal) => {
                let reason = if !nu.loewner_leq(&proposal) {
                    Reason::Order
                } else if !trace_at_most_one(&proposal) {
                    Reason::Trace
                } else {
                    Reason::Ok
                };
                if reason == Reason::Ok {
                    nu = proposal;
                }
                reason
            }
        };
        trace.push(event(e.stage, e.input, e.value, index, reason));
    }
    Ok(QuantumState { nu, trace })
}

/// Stage-`total_stages` states `ν^{(n)}` of every registry member.
pub fn registry_states(r: &Registry, total_stages: u64) -> Result<Vec<QuantumState>> {
    r.expect_kind(MachineKind::QuantumMatrix)?;
    r.machines()
        .iter()
        .enumerate()
        .map(|(i, m)| enumerate_quantum_matrix_indexed(m, i + 1, total_stages))
        .collect()
}

fn weighted_sum(nus: &[&HermOp]) -> HermOp {
    let mut mu = HermOp::zero(StringIndex::EMPTY);
    for (i, nu) in nus.iter().enumerate() {
        mu = &mu + &nu.scale(&pow2_neg(i as u32 + 1));
    }
    mu
}

/// `μ_T = Σ_n 2^-n ν^{(n)}_T`.
pub fn universal_operator(r: &Registry, total_stages: u64) -> Result<HermOp> {
    let states = registry_states(r, total_stages)?;
    Ok(weighted_sum(&states.iter().map(|s| &s.nu).collect::<Vec<_>>()))
}

/// Largest dyadic `c ∈ {1, ½, …, 2^{-(n+1)}}` with `c·target ≤ μ_T`, at the
/// first stage `T ≤ max_t` where any such `c` exists.
///
/// `μ_T` only changes at accepted events, so the candidate stages are `0`
/// and the stages of accepted events.
pub fn domination_constant_search(
    target: &HermOp,
    r: &Registry,
    n: usize,
    max_t: u64,
) -> Result<Option<(Rational, u64)>> {
    let floor_exp = u32::try_from(n + 1).map_err(|_| Error::Invalid("registry index too large".into()))?;
    if target.is_zero() {
        return Ok(Some((pow2_neg(floor_exp), 0)));
    }
    let states = registry_states(r, max_t)?;
    let mut stages: Vec<u64> = vec![0];
    for s in &states {
        stages.extend(s.trace.iter().filter(|e| e.accepted).map(|e| e.stage));
    }
    stages.sort_unstable();
    stages.dedup();

    let zero = HermOp::zero(StringIndex::EMPTY);
    for t in stages {
        let nus: Vec<HermOp> = states
            .iter()
            .map(|s| {
                s.trace
                    .iter()
                    .rev()
                    .find(|e| e.accepted && e.stage <= t)
                    .map(|e| match &e.value {
                        Value::Matrix(m) => HermOp::embed(m).expect("accepted proposals are hermitian"),
                        _ => unreachable!("matrix machines emit matrices"),
                    })
                    .unwrap_or_else(|| zero.clone())
            })
            .collect();
        let mu = weighted_sum(&nus.iter().collect::<Vec<_>>());
        for e in 0..=floor_exp {
            let c = pow2_neg(e);
            if target.scale(&c).loewner_leq(&mu) {
                return Ok(Some((c, t)));
            }
        }
    }
    Ok(None)
}
