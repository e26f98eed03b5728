//! Command-line driver.
//!
//! Every subcommand reads JSON fixtures, runs one experiment and writes JSON
//! (or an aligned text rendering) to stdout or `--out`. Identical inputs give
//! byte-identical outputs. Exit codes: 0 success, 1 domain error, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::basis::StringIndex;
use crate::counterexamples::{
    diagonal_domination_table, irrational_minorant_report, length_geometric_semimeasure, naive_trap_run,
};
use crate::entropy::{lower_entropy, upper_entropy, DEFAULT_TOL};
use crate::enumerate::{
    domination_constant_search, enumerate_classical, enumerate_quantum_matrix, enumerate_quantum_naive,
    universal_operator, universal_semimeasure, TraceEvent,
};
use crate::error::{Error, Result};
use crate::field::{format_rational, ratio, Rational};
use crate::machines::{Machine, Registry};
use crate::opalg::{HermOp, Ket, OperatorJson};
use crate::streams::fixtures::BundleConfig;
use crate::streams::{polarization, primed_stream};

pub const DEFAULT_STAGES: u64 = 10_000;
pub const DEFAULT_WINDOW: u64 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

/// Exact laboratory for semi-density operators on the binary string space.
#[derive(Debug, Parser)]
#[command(name = "semidensity", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Registry file (JSON list of machines).
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    /// Number of dovetailing stages (default 10000).
    #[arg(long, global = true)]
    pub stages: Option<u64>,
    /// Window rank for truncated computations (default 15).
    #[arg(long, global = true)]
    pub window: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (default json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Spectral cutoff for entropy computations (default 1e-9).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Run configuration file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide positive semidefiniteness of an operator exactly.
    PsdCheck {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Decide the Loewner order lhs ≤ rhs exactly.
    Loewner {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Encode an operator by its polarization values q(w, v) and decode it back.
    Polarize {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Run the classical semimeasure acceptance loop on one registry machine.
    EnumerateClassical {
        /// 1-based registry index.
        #[arg(long, default_value_t = 1)]
        machine: usize,
    },
    /// Build the universal semimeasure m = Σ 2^-n m_n from the registry.
    ///
    /// Values are listed up to the window; the mass covers every string.
    UniversalM,
    /// Run a quantum acceptance loop (entrywise or matrix-valued) on one registry machine.
    EnumerateQuantum {
        /// Entrywise loop over pointwise machines.
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        naive: bool,
        /// Matrix-valued loop over matrix machines.
        #[arg(long)]
        matrix: bool,
        /// 1-based registry index.
        #[arg(long, default_value_t = 1)]
        machine: usize,
    },
    /// Build the universal operator μ = Σ 2^-n ν_n from the registry.
    ///
    /// Entries are listed up to the window; trace and positivity cover the whole operator.
    UniversalMu,
    /// Search the largest dyadic c with c·target ≤ μ_T for registry member n.
    Dominate {
        #[arg(long)]
        target: PathBuf,
        /// 1-based registry index n; the search floor is 2^-(n+1).
        #[arg(long)]
        index: usize,
    },
    /// Upper and lower entropies of a state against an operator.
    Entropy {
        #[arg(long)]
        operator: PathBuf,
        /// State file (JSON vector).
        #[arg(long, conflicts_with = "basis", required_unless_present = "basis")]
        state: Option<PathBuf>,
        /// Computational basis state |w⟩, given by its bits ("" for the empty string).
        #[arg(long)]
        basis: Option<String>,
    },
    /// Reproduce a counterexample witness.
    Counterexample {
        #[command(subcommand)]
        which: Counterexample,
    },
    /// Check the regularity conditions of a bundle and the monotonicity of its primed stream.
    ValidateBundle {
        #[arg(long)]
        bundle: PathBuf,
        /// Check indices 1..=upto.
        #[arg(long, default_value_t = 8)]
        upto: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum Counterexample {
    /// Entrywise loop on the trap machine: the off-diagonal update is never accepted.
    NaiveTrap,
    /// Rank-one projection with √3 entries and its scalar minorants.
    RankOne,
    /// Diagonal operator built from m(w) = 2^(-2len(w)-1) fails to dominate uniform superpositions.
    Diagonal {
        #[arg(long, default_value_t = 10)]
        depth: u32,
    },
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub registry: Option<PathBuf>,
    pub stages: Option<u64>,
    pub window: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
}

/// Settings after merging flags, config file and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub registry: Option<PathBuf>,
    pub stages: u64,
    pub window: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tol: f64,
}

impl Settings {
    fn resolve(g: &GlobalArgs) -> Result<Settings> {
        let config = match &g.config {
            Some(p) => serde_json::from_str::<RunConfig>(&read(p)?)?,
            None => RunConfig::default(),
        };
        Ok(Settings {
            registry: g.registry.clone().or(config.registry),
            stages: g.stages.or(config.stages).unwrap_or(DEFAULT_STAGES),
            window: g.window.or(config.window).unwrap_or(DEFAULT_WINDOW),
            out: g.out.clone().or(config.out),
            format: g.format.or(config.format).unwrap_or(Format::Json),
            tol: g.tol.or(config.tol).unwrap_or(DEFAULT_TOL),
        })
    }

    fn registry(&self) -> Result<Registry> {
        let path = self.registry.as_ref().ok_or_else(|| Error::Invalid("--registry is required".into()))?;
        Registry::from_json(&read(path)?)
    }

    fn machine(&self, index: usize) -> Result<Machine> {
        let r = self.registry()?;
        r.get(index).cloned().ok_or_else(|| Error::Invalid(format!("registry has no machine {index}")))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_operator(path: &Path) -> Result<HermOp> {
    HermOp::from_json(&read(path)?)
}

fn operator_json(op: &HermOp) -> Json {
    serde_json::to_value(OperatorJson::from(op)).expect("operator serializes")
}

/// A rendered result: optional event lines followed by a final document.
struct Output {
    events: Vec<TraceEvent>,
    doc: Json,
    text: String,
}

impl Output {
    fn doc(doc: Json, text: String) -> Self {
        Output { events: Vec::new(), doc, text }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = String::new();
                for e in &self.events {
                    out.push_str(&e.to_json_line());
                    out.push('\n');
                }
                if self.events.is_empty() {
                    out.push_str(&serde_json::to_string_pretty(&self.doc).expect("document serializes"));
                } else {
                    out.push_str(&serde_json::to_string(&self.doc).expect("document serializes"));
                }
                out.push('\n');
                out
            }
            Format::Text => {
                let mut out = String::new();
                for e in &self.events {
                    let reason = serde_json::to_value(e.reason).expect("reason serializes");
                    out.push_str(&format!(
                        "stage {:>6}  machine {}  input {}  value {}  {} ({})\n",
                        e.stage,
                        e.machine,
                        e.input,
                        e.value.to_json(),
                        if e.accepted { "accepted" } else { "rejected" },
                        reason.as_str().unwrap_or_default(),
                    ));
                }
                out.push_str(&self.text);
                if !out.ends_with('\n') {
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn operator_text(name: &str, op: &HermOp) -> String {
    let mut out = format!("{name} (window {}):\n", op.window());
    if op.is_zero() {
        out.push_str("  0\n");
    }
    for (r, c, v) in op.upper_entries() {
        out.push_str(&format!("  ({r}, {c}) = {v}\n"));
    }
    out
}

fn alpha_json(alpha: &std::collections::BTreeMap<StringIndex, Rational>) -> Json {
    Json::Object(alpha.iter().map(|(w, a)| (w.bits(), Json::from(format_rational(a)))).collect())
}

fn alpha_text(alpha: &std::collections::BTreeMap<StringIndex, Rational>) -> String {
    alpha.iter().map(|(w, a)| format!("  {w}: {}\n", format_rational(a))).collect()
}

fn execute(command: &Command, s: &Settings) -> Result<Output> {
    match command {
        Command::PsdCheck { matrix } => {
            let psd = read_operator(matrix)?.is_psd();
            Ok(Output::doc(json!({ "psd": psd }), format!("psd: {psd}")))
        }
        Command::Loewner { lhs, rhs } => {
            let leq = read_operator(lhs)?.loewner_leq(&read_operator(rhs)?);
            Ok(Output::doc(json!({ "leq": leq }), format!("lhs <= rhs: {leq}")))
        }
        Command::Polarize { matrix } => {
            let rho = read_operator(matrix)?;
            let window = rho.window();
            let q = polarization::encode_all(&rho, window);
            let decoded = polarization::decode_all(&q, window)?;
            let mut nonnegative = true;
            let mut values = Vec::new();
            let mut text = String::new();
            for ((w, v), value) in &q {
                nonnegative &= value.is_nonnegative()?;
                values.push(json!({ "w": w.bits(), "v": v.bits(), "q": value.to_string() }));
                text.push_str(&format!("q({w}, {v}) = {value}\n"));
            }
            let (psd, round_trip) = (rho.is_psd(), decoded == rho);
            text.push_str(&format!("all nonnegative: {nonnegative}\npsd: {psd}\nround trip: {round_trip}"));
            Ok(Output::doc(
                json!({ "values": values, "all_nonnegative": nonnegative, "psd": psd, "round_trip": round_trip }),
                text,
            ))
        }
        Command::EnumerateClassical { machine } => {
            let state = enumerate_classical(&s.machine(*machine)?, s.stages)?;
            let mass = state.mass();
            Ok(Output {
                doc: json!({ "final": { "alpha": alpha_json(&state.alpha), "mass": format_rational(&mass) } }),
                text: format!("final alpha:\n{}mass: {}", alpha_text(&state.alpha), format_rational(&mass)),
                events: state.trace,
            })
        }
        Command::UniversalM => {
            let mut m = universal_semimeasure(&s.registry()?, s.stages)?;
            let mass: Rational = m.values().sum();
            m.retain(|w, _| w.rank() <= s.window);
            Ok(Output::doc(
                json!({ "m": alpha_json(&m), "mass": format_rational(&mass) }),
                format!("m:\n{}mass: {}", alpha_text(&m), format_rational(&mass)),
            ))
        }
        Command::EnumerateQuantum { naive, machine, .. } => {
            let m = s.machine(*machine)?;
            let state = if *naive { enumerate_quantum_naive(&m, s.stages)? } else { enumerate_quantum_matrix(&m, s.stages)? };
            Ok(Output {
                doc: json!({ "final": operator_json(&state.nu) }),
                text: operator_text("final", &state.nu),
                events: state.trace,
            })
        }
        Command::UniversalMu => {
            let mu = universal_operator(&s.registry()?, s.stages)?;
            let (trace, psd) = (mu.trace(), mu.is_psd());
            let mu = mu.compress(StringIndex::from_rank(s.window));
            Ok(Output::doc(
                json!({ "mu": operator_json(&mu), "trace": trace.to_string(), "psd": psd }),
                format!("{}trace: {trace}\npsd: {psd}", operator_text("mu", &mu)),
            ))
        }
        Command::Dominate { target, index } => {
            let target = read_operator(target)?;
            let r = s.registry()?;
            if *index == 0 || *index > r.len() {
                return Err(Error::Invalid(format!("registry has no machine {index}")));
            }
            match domination_constant_search(&target, &r, *index, s.stages)? {
                Some((c, t)) => Ok(Output::doc(
                    json!({ "c": format_rational(&c), "stage": t }),
                    format!("c = {} at stage {t}", format_rational(&c)),
                )),
                None => Ok(Output::doc(json!({ "c": null, "stage": null }), "no witness".into())),
            }
        }
        Command::Entropy { operator, state, basis } => {
            let mu = read_operator(operator)?;
            let (psi, label) = match (state, basis) {
                (Some(p), _) => (Ket::from_json(&read(p)?)?, Json::from(p.display().to_string())),
                (None, Some(bits)) => (Ket::basis(StringIndex::from_bits(bits)?), Json::from(bits.clone())),
                (None, None) => return Err(Error::Invalid("either --state or --basis is required".into())),
            };
            let upper = upper_entropy(&mu, &psi, s.tol)?;
            let lower = lower_entropy(&mu, &psi)?;
            Ok(Output::doc(
                json!({ "state": label, "H_upper": upper, "H_lower": lower }),
                format!("H_upper: {upper}\nH_lower: {lower}"),
            ))
        }
        Command::Counterexample { which } => match which {
            Counterexample::NaiveTrap => {
                let run = naive_trap_run(s.stages)?;
                Ok(Output {
                    doc: json!({ "final": operator_json(&run.state.nu), "verdicts": run.report.verdicts }),
                    text: format!("{}{}", operator_text("final", &run.state.nu), run.report.to_text()),
                    events: run.state.trace,
                })
            }
            Counterexample::RankOne => {
                let cs: Vec<Rational> =
                    [(0, 1), (1, 2), (1, 3), (7, 8), (1, 1), (2, 5), (3, 4), (1, 16), (5, 7), (9, 10)]
                        .iter()
                        .map(|&(p, q)| ratio(p, q))
                        .collect();
                let report = irrational_minorant_report(&cs)?;
                Ok(Output::doc(serde_json::to_value(&report)?, report.to_text()))
            }
            Counterexample::Diagonal { depth } => {
                let report = diagonal_domination_table(length_geometric_semimeasure, *depth)?;
                Ok(Output::doc(serde_json::to_value(&report)?, report.to_text()))
            }
        },
        Command::ValidateBundle { bundle, upto } => {
            let b = BundleConfig::from_json(&read(bundle)?)?.build()?;
            let report = b.validate(*upto)?;
            let mut monotone = Vec::new();
            let mut current = primed_stream(&b, 1)?;
            for n in 1..=*upto {
                let next = primed_stream(&b, n + 1)?;
                monotone.push(current.loewner_leq(&next));
                current = next;
            }
            let mut text = format!("checked n = 1..={upto}\n");
            for f in &report.failures {
                text.push_str(&format!("condition {} fails at n = {}\n", f.condition, f.n));
            }
            text.push_str(&format!("passed: {}\nprimed stream increasing: {monotone:?}", report.passed()));
            Ok(Output::doc(
                json!({
                    "checked_up_to": report.checked_up_to,
                    "failures": report.failures,
                    "passed": report.passed(),
                    "primed_increasing": monotone,
                }),
                text,
            ))
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let settings = match Settings::resolve(&cli.global) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let rendered = match execute(&cli.command, &settings) {
        Ok(out) => out.render(settings.format),
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &settings.out {
        Some(path) => fs::write(path, rendered.as_bytes()),
        None => std::io::stdout().lock().write_all(rendered.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["semidensity", "no-such-command"]), 2);
        assert_eq!(run(["semidensity", "enumerate-quantum", "--naive", "--matrix"]), 2);
    }

    #[test]
    fn domain_errors_exit_one() {
        assert_eq!(run(["semidensity", "psd-check", "--matrix", "/nonexistent/operator.json"]), 1);
        assert_eq!(run(["semidensity", "universal-m"]), 1);
    }
}
