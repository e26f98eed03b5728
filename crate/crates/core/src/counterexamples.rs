//! Executable witnesses: the naive-loop trap, the irrational rank-one
//! projection, and the failure of diagonal operators to dominate.
//!
//! Every verdict in a [`WitnessReport`] is computed from its rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::basis::StringIndex;
use crate::enumerate::{enumerate_classical, enumerate_quantum_naive, ClassicalState, QuantumState};
use crate::error::{Error, Result};
use crate::field::{format_rational, pow2, ratio, Rational, Scalar};
use crate::machines::{rules, Input, Machine, MachineKind, Value};
use crate::opalg::{dominated_by_rank_one, HermOp, Ket};
use crate::streams::StateFamily;

/// Named rows and computed verdicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub verdicts: BTreeMap<String, bool>,
}

impl WitnessReport {
    pub fn holds(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned columns followed by one `name: verdict` line per verdict.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = format!("# {}\n", self.name);
        out.push_str(&line(&self.columns));
        out.push('\n');
        out.push_str(&line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>()));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        for (name, v) in &self.verdicts {
            let _ = writeln!(out, "{name}: {v}");
        }
        out
    }
}

fn bits(bits: &str) -> StringIndex {
    StringIndex::from_bits(bits).expect("literal bit string")
}

/// Pointwise machine whose first halts are `(λ,λ,0)`, `(0,0,0)`, `(λ,0,0)`, each with value `½`.
///
/// Input indices 1, 5 and 3 get costs 1, 2 and 5, so they halt at stages
/// 1, 20 and 24; every other input costs 8 and first halts at stage 38.
pub fn naive_trap_machine() -> Machine {
    let half = || Value::Scalar(Scalar::from_ratio(1, 2));
    Machine::new(MachineKind::QuantumPointwise)
        .with_entry(Input::Pointwise(bits(""), bits(""), 0), half(), 1)
        .and_then(|m| m.with_entry(Input::Pointwise(bits("0"), bits("0"), 0), half(), 2))
        .and_then(|m| m.with_entry(Input::Pointwise(bits(""), bits("0"), 0), half(), 5))
        .expect("trap table is well formed")
        .with_rule(rules::build(MachineKind::QuantumPointwise, "naive_trap", &serde_json::Value::Null).expect("named rule"))
}

/// Classical machine proposing the diagonal of the trap: `½` at `λ` and at `0`.
pub fn diagonal_shadow_machine() -> Machine {
    let half = || Value::Rational(ratio(1, 2));
    Machine::new(MachineKind::ClassicalSemimeasure)
        .with_entry(Input::Classical(bits(""), 0), half(), 1)
        .and_then(|m| m.with_entry(Input::Classical(bits("0"), 0), half(), 2))
        .expect("shadow table is well formed")
}

/// Outcome of running the naive loop on the trap.
#[derive(Clone, Debug)]
pub struct TrapRun {
    pub state: QuantumState,
    pub shadow: ClassicalState,
    pub report: WitnessReport,
}

/// Runs the naive loop on [`naive_trap_machine`] and the classical loop on its diagonal shadow.
pub fn naive_trap_run(total_stages: u64) -> Result<TrapRun> {
    let state = enumerate_quantum_naive(&naive_trap_machine(), total_stages)?;
    let shadow = enumerate_classical(&diagonal_shadow_machine(), total_stages)?;

    let mut rows = Vec::new();
    let mut distinct: Vec<HermOp> = vec![HermOp::zero(StringIndex::EMPTY)];
    let mut replay = HermOp::zero(StringIndex::EMPTY);
    for e in &state.trace {
        if e.accepted {
            if let (Input::Pointwise(w, v, _), Value::Scalar(z)) = (&e.input, &e.value) {
                replay.set(*w, *v, z.clone())?;
            }
            if distinct.last() != Some(&replay) {
                distinct.push(replay.clone());
            }
        }
    }
    for e in state.trace.iter().take(8) {
        rows.push(vec![
            e.stage.to_string(),
            e.input.to_string(),
            e.value.to_json().as_str().unwrap_or_default().to_string(),
            e.accepted.to_string(),
            serde_json::to_value(e.reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
        ]);
    }

    let half = ratio(1, 2);
    let expected_chain = vec![
        HermOp::zero(StringIndex::EMPTY),
        HermOp::diagonal([half.clone()]),
        HermOp::diagonal([half.clone(), half.clone()]),
    ];
    let off_diagonal_zero = state.nu.upper_entries().all(|(r, c, _)| r == c);
    let first_off_diagonal = state
        .trace
        .iter()
        .find(|e| {
            let nonzero = !matches!(&e.value, Value::Scalar(z) if z.is_zero());
            matches!(e.input, Input::Pointwise(w, v, _) if w != v) && nonzero
        });
    let rejected_off_diagonal = first_off_diagonal.is_some_and(|e| !e.accepted);
    let full = HermOp::embed(&vec![vec![Scalar::from_ratio(1, 2); 2]; 2])?;
    let shadow_diag: Vec<Rational> =
        (0..=1u64).map(|r| shadow.alpha.get(&StringIndex::from_rank(r)).cloned().unwrap_or_default()).collect();
    let nu_diag: Vec<Rational> = (0..=1u64)
        .map(|r| state.nu.entry_at(r, r).as_rational().cloned().unwrap_or_default())
        .collect();

    let verdicts = BTreeMap::from([
        ("accepted_chain_matches".to_string(), distinct == expected_chain),
        ("off_diagonal_rejected".to_string(), rejected_off_diagonal),
        ("final_off_diagonals_zero".to_string(), off_diagonal_zero),
        ("full_matrix_not_reached".to_string(), state.nu != full && !expected_chain[2].loewner_leq(&full)),
        ("shadow_reaches_same_diagonal".to_string(), shadow_diag == nu_diag),
    ]);
    let report = WitnessReport {
        name: "naive-trap".into(),
        columns: ["stage", "input", "value", "accepted", "reason"].map(String::from).to_vec(),
        rows,
        verdicts,
    };
    Ok(TrapRun { state, shadow, report })
}

/// `¼[[1, √3], [√3, 3]]`, the projection onto `½|λ⟩ + (√3/2)|0⟩`.
pub fn rank_one_irrational_example() -> HermOp {
    let quarter_s3 = Scalar::new(Rational::zero(), Rational::zero(), ratio(1, 4), Rational::zero());
    HermOp::embed(&[
        vec![Scalar::from_ratio(1, 4), quarter_s3.clone()],
        vec![quarter_s3, Scalar::from_ratio(3, 4)],
    ])
    .expect("example is hermitian")
}

/// Checks that `c·ρ` has complex-rational entries only for `c = 0`.
pub fn irrational_minorant_report(cs: &[Rational]) -> Result<WitnessReport> {
    let rho = rank_one_irrational_example();
    let (lam, zero) = (bits(""), bits("0"));
    let mut rows = Vec::new();
    let mut iff_holds = true;
    let mut recovered = true;
    let mut symbolic = true;
    for c in cs {
        let sigma = rho.scale(c);
        let rational = sigma.is_complex_rational();
        iff_holds &= rational == c.is_zero();
        let off = sigma.entry(zero, lam);
        // off-diagonal of c·ρ is (c/4)√3: its √3 coefficient vanishes iff c = 0
        symbolic &= off.re_s3() == &(c * ratio(1, 4)) && off.re_rat().is_zero();
        let in_range = c >= &Rational::zero() && c <= &Rational::one();
        if in_range {
            recovered &= dominated_by_rank_one(&sigma, &rho)? == Some(Scalar::from_rational(c.clone()));
        }
        rows.push(vec![format_rational(c), off.to_string(), rational.to_string()]);
    }
    let verdicts = BTreeMap::from([
        ("projection".to_string(), rho.is_psd() && rho.trace().is_one() && rho.square() == rho),
        ("entry_not_complex_rational".to_string(), !rho.entry(zero, lam).is_complex_rational()),
        ("complex_rational_iff_zero".to_string(), iff_holds),
        ("off_diagonal_coefficient_is_c_over_4".to_string(), symbolic),
        ("minorant_constant_recovered".to_string(), recovered),
    ]);
    Ok(WitnessReport {
        name: "rank-one".into(),
        columns: ["c", "entry(0, λ) of c·ρ", "complex rational"].map(String::from).to_vec(),
        rows,
        verdicts,
    })
}

/// `2^{-n/2} Σ_{len(w)=n} |w⟩`, stored as amplitudes 1 with norm divisor `2^n`.
pub fn uniform_superposition(n: u32) -> Ket {
    crate::streams::uniform_ket(u64::from(n))
}

/// `Σ_{l=2^{n-1}}^{2^n-1} |ψ_l⟩`, normalized by the number of terms.
///
/// The family's exact states must share one norm divisor `d`; the result
/// carries divisor `d · 2^{n-1}`, which normalizes it when the states are
/// orthonormal.
pub fn block_family(fam: &StateFamily, n: u32) -> Result<Ket> {
    if n == 0 || n > 62 {
        return Err(Error::Invalid("block index must lie in 1..=62".into()));
    }
    let (start, end) = (1u64 << (n - 1), 1u64 << n);
    let mut sum: BTreeMap<StringIndex, Scalar> = BTreeMap::new();
    let mut divisor: Option<Rational> = None;
    for l in start..end {
        let psi = fam.exact_state(l).ok_or_else(|| Error::Invalid("family has no exact states".into()))?;
        match &divisor {
            None => divisor = Some(psi.norm_divisor().clone()),
            Some(d) if d != psi.norm_divisor() => {
                return Err(Error::Invalid("block members have different norm divisors".into()))
            }
            _ => {}
        }
        for (w, a) in psi.amplitudes() {
            *sum.entry(w).or_default() += a;
        }
    }
    let d = divisor.expect("block is nonempty") * Rational::from_integer(BigInt::from(end - start));
    Ket::from_amplitudes(sum).with_norm_divisor(d)
}

/// Per length `n`: `m̄(n) = 2^-n Σ_{len(w)=n} m(w)`, the witness `2^n m̄(n)` and
/// the least constant `c_n = 2^-n` with `c_n · 2^n m̄(n) ≤ m̄(n)`.
pub fn diagonal_domination_table<F>(m: F, depth: u32) -> Result<WitnessReport>
where
    F: Fn(StringIndex) -> Rational,
{
    if depth > 30 {
        return Err(Error::Invalid("depth above 30 is not tabulated".into()));
    }
    let mut rows = Vec::new();
    let mut constants: Vec<Option<Rational>> = Vec::new();
    let mut witness_sum = Rational::zero();
    for n in 0..=depth {
        let total = StringIndex::of_length(n).fold(Rational::zero(), |acc, w| acc + m(w));
        let m_bar = &total * pow2(-i64::from(n));
        let witness = &m_bar * pow2(i64::from(n));
        witness_sum += &witness;
        let c = if m_bar.is_zero() { None } else { Some(&m_bar / &witness) };
        rows.push(vec![
            n.to_string(),
            format_rational(&m_bar),
            format_rational(&witness),
            c.as_ref().map(format_rational).unwrap_or_else(|| "degenerate".into()),
        ]);
        constants.push(c);
    }
    let present: Vec<(u32, &Rational)> =
        constants.iter().enumerate().filter_map(|(n, c)| c.as_ref().map(|c| (n as u32, c))).collect();
    let exact = present.iter().all(|(n, c)| **c == pow2(-i64::from(*n)));
    let halving = present.windows(2).all(|p| p[1].0 != p[0].0 + 1 || p[1].1 * Rational::from_integer(2.into()) == *p[0].1);
    let verdicts = BTreeMap::from([
        ("constants_are_2^-n".to_string(), exact),
        ("constants_halve".to_string(), halving),
        ("witness_is_semimeasure".to_string(), witness_sum <= Rational::one()),
        (
            "no_uniform_constant".to_string(),
            depth == 0 || present.last().is_some_and(|(n, c)| *n == depth && **c < Rational::one()),
        ),
    ]);
    Ok(WitnessReport {
        name: "diagonal".into(),
        columns: ["n", "mean mass", "witness", "constant"].map(String::from).to_vec(),
        rows,
        verdicts,
    })
}

/// `m(w) = 2^{-2len(w)-1}`.
pub fn length_geometric_semimeasure(w: StringIndex) -> Rational {
    pow2(-2 * i64::from(w.len()) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::dovetail;

    #[test]
    fn trap_halting_order() {
        let events = dovetail(&naive_trap_machine(), 40).unwrap();
        let firsts: Vec<(u64, Input)> = events.iter().take(4).map(|e| (e.stage, e.input)).collect();
        assert_eq!(
            firsts,
            vec![
                (1, Input::Pointwise(bits(""), bits(""), 0)),
                (20, Input::Pointwise(bits("0"), bits("0"), 0)),
                (24, Input::Pointwise(bits(""), bits("0"), 0)),
                (38, Input::Pointwise(bits("0"), bits(""), 0)),
            ]
        );
        assert_eq!(events[0].value, Value::Scalar(Scalar::from_ratio(1, 2)));
    }

    #[test]
    fn trap_run() {
        let run = naive_trap_run(10_000).unwrap();
        assert!(run.report.holds(), "{}", run.report.to_text());
        assert_eq!(run.state.nu, HermOp::diagonal([ratio(1, 2), ratio(1, 2)]));
    }

    #[test]
    fn irrational_projection() {
        let rho = rank_one_irrational_example();
        assert!(rho.is_psd());
        assert!(rho.is_rank_one_projection());
        let cs = [0, 1, 2].map(|n| ratio(n, 3));
        assert!(irrational_minorant_report(&cs).unwrap().holds());
    }

    #[test]
    fn uniform_and_block_states() {
        let psi = uniform_superposition(1);
        assert_eq!(psi.norm_divisor(), &ratio(2, 1));
        let d = HermOp::diagonal([ratio(1, 2), ratio(1, 8), ratio(1, 16)]);
        assert_eq!(crate::opalg::apply_quad_form(&d, &psi), Scalar::from_ratio(3, 32));

        let basis = StateFamily::computational_basis();
        assert_eq!(block_family(&basis, 1).unwrap(), Ket::basis(bits("0")));
        let b2 = block_family(&basis, 2).unwrap();
        assert!(b2.is_normalized());
        assert!(block_family(&StateFamily::uniform_superposition(), 2).is_err());
        assert!(block_family(&basis, 0).is_err());
    }

    #[test]
    fn diagonal_table() {
        let r = diagonal_domination_table(length_geometric_semimeasure, 10).unwrap();
        assert!(r.holds(), "{}", r.to_text());
        assert_eq!(r.rows[3][3], "1/8");
        let single = diagonal_domination_table(length_geometric_semimeasure, 0).unwrap();
        assert_eq!(single.rows, vec![vec!["0".to_string(), "1/2".into(), "1/2".into(), "1/1".into()]]);
        assert!(single.holds());
    }
}
