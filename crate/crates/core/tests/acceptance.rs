//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{fixture_path, psd_oracle, random_hermitian, random_mixed, random_state, read_fixture, rng, within_pow2};
use num_traits::{One, Zero};
use semidensity::basis::StringIndex;
use semidensity::counterexamples::{
    diagonal_domination_table, length_geometric_semimeasure, naive_trap_machine, rank_one_irrational_example,
    uniform_superposition,
};
use semidensity::entropy::{induced_semimeasure, lower_entropy, upper_entropy, DEFAULT_TOL};
use semidensity::enumerate::{domination_constant_search, enumerate_quantum_naive, registry_states, universal_operator};
use semidensity::field::{pow2_neg, ratio, rational_to_f64, Rational, Scalar};
use semidensity::machines::{Input, Registry, Value};
use semidensity::opalg::{apply_quad_form, HermOp};
use semidensity::streams::fixtures::{Approach, BundleConfig, OperatorFamily, StreamFixture, SupportRule};
use semidensity::streams::polarization::encode_all;
use semidensity::streams::{
    approx_from_lower_upper, coeff_approx_from_op_approx, primed_stream, ApproxStream, StreamKind, StateFamily,
};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn w(bits: &str) -> StringIndex {
    StringIndex::from_bits(bits).unwrap()
}

fn naive_trap_trace() -> Result<String, String> {
    let state = enumerate_quantum_naive(&naive_trap_machine(), 10_000).map_err(|e| e.to_string())?;
    let half = ratio(1, 2);
    let expected = [
        HermOp::zero(StringIndex::EMPTY),
        HermOp::diagonal([half.clone()]),
        HermOp::diagonal([half.clone(), half.clone()]),
    ];
    let mut current = HermOp::zero(StringIndex::EMPTY);
    let mut chain = vec![current.clone()];
    let mut rejected_at = None;
    for e in &state.trace {
        let (Input::Pointwise(a, b, _), Value::Scalar(z)) = (&e.input, &e.value) else {
            return Err("unexpected event shape".into());
        };
        if e.accepted {
            current.set(*a, *b, z.clone()).map_err(|e| e.to_string())?;
            if chain.last() != Some(&current) {
                ensure(rejected_at.is_none(), format!("state changed after the rejection, at stage {}", e.stage))?;
                chain.push(current.clone());
            }
        } else if rejected_at.is_none() {
            ensure((*a, *b) == (w(""), w("0")), format!("first rejection is at ({a}, {b})"))?;
            rejected_at = Some(e.stage);
        }
    }
    ensure(chain == expected, format!("accepted chain has {} states", chain.len()))?;
    ensure(rejected_at.is_some(), "no rejected event")?;
    ensure(current == state.nu, "replayed state differs from the final state")?;
    ensure(state.nu.upper_entries().all(|(r, c, z)| r == c || z.is_zero()), "nonzero off-diagonal")?;
    Ok(format!("{} events, rejection at stage {}", state.trace.len(), rejected_at.unwrap()))
}

fn polarization_counterexample() -> Result<String, String> {
    let rho = HermOp::embed(&[
        vec![Scalar::from_int(3), Scalar::from_int(2)],
        vec![Scalar::from_int(2), Scalar::from_int(1)],
    ])
    .map_err(|e| e.to_string())?;
    let values: Vec<Scalar> = encode_all(&rho, rho.window()).into_values().collect();
    ensure(values == [12, 8, 4, 4].map(Scalar::from_int), format!("values {values:?}"))?;
    ensure(values.iter().all(|v| v.is_nonnegative().unwrap()), "negative value")?;
    ensure(!rho.is_psd(), "matrix reported PSD")?;
    ensure(!psd_oracle(&rho.to_matrix()), "oracle reports PSD")?;
    Ok("values 12, 8, 4, 4; not PSD".into())
}

fn psd_oracle_equivalence() -> Result<String, String> {
    let mut r = rng(20_261_016);
    let (mut total, mut psd) = (0, 0);
    for i in 0..1000 {
        let n = 1 + i % 4;
        let m = if i % 2 == 0 { random_hermitian(&mut r, n, 8) } else { random_mixed(&mut r, n, 8) };
        let expected = psd_oracle(&m);
        ensure(common::op(&m).is_psd() == expected, format!("disagreement on {m:?}"))?;
        total += 1;
        psd += usize::from(expected);
    }
    Ok(format!("{total} matrices agree, {psd} PSD"))
}

fn transformer_bounds() -> Result<String, String> {
    const UPTO: u32 = 20;
    let mut checked = 0usize;
    for f in ["geometric.json", "projection.json", "oscillating.json"] {
        let limit: OperatorFamily =
            BundleConfig::from_json(&read_fixture(&format!("bundles/{f}"))).map_err(|e| e.to_string())?.rho.limit;
        let fixture = |approach| StreamFixture {
            limit: limit.clone(),
            approach,
            truncation: SupportRule::Growing { offset: u64::from(UPTO) + 1 },
        };
        let below = fixture(Approach::FromBelow);
        let computable = ApproxStream::fallible(StreamKind::Computable, move |n| below.eval(n + 1));
        let coeffs = coeff_approx_from_op_approx(&computable).map_err(|e| e.to_string())?;
        let lo = fixture(Approach::FromBelow).to_stream().map_err(|e| e.to_string())?;
        let hi = fixture(Approach::FromAbove).to_stream().map_err(|e| e.to_string())?;
        let bracket = approx_from_lower_upper(&lo, &hi, 64).map_err(|e| e.to_string())?;
        for n in 1..=UPTO {
            let window = StringIndex::from_rank(u64::from(n));
            let op_c = computable.eval(n).map_err(|e| e.to_string())?;
            let op_b = bracket.eval(n).map_err(|e| e.to_string())?;
            for a in window.up_to() {
                for b in window.up_to() {
                    let exact = limit.entry(a, b).map_err(|e| e.to_string())?;
                    let c = coeffs.eval(a, b, n).map_err(|e| e.to_string())?;
                    ensure(c == op_c.entry(a, b), "coefficients disagree with the stream")?;
                    ensure(within_pow2(&c, &exact, n), format!("{f}: coefficient ({a}, {b}) at n = {n}"))?;
                    ensure(within_pow2(&op_b.entry(a, b), &exact, n), format!("{f}: bracket ({a}, {b}) at n = {n}"))?;
                    checked += 2;
                }
            }
        }
    }
    Ok(format!("{checked} entry bounds hold"))
}

fn bundle(f: &str) -> Result<semidensity::streams::ConjectureBundle, String> {
    BundleConfig::from_json(&read_fixture(&format!("bundles/{f}")))
        .and_then(|c| c.build())
        .map_err(|e| e.to_string())
}

fn primed_stream_monotone() -> Result<String, String> {
    for f in ["geometric.json", "projection.json", "oscillating.json"] {
        let b = bundle(f)?;
        let report = b.validate(8).map_err(|e| e.to_string())?;
        ensure(report.passed(), format!("{f} fails conditions {:?}", report.failed_conditions()))?;
        for n in 1..=8 {
            let (x, y) = (primed_stream(&b, n).map_err(|e| e.to_string())?, primed_stream(&b, n + 1).map_err(|e| e.to_string())?);
            ensure(x.loewner_leq(&y), format!("{f}: primed stream decreases at n = {n}"))?;
            ensure(common::loewner_oracle(&x, &y), format!("{f}: oracle disagrees at n = {n}"))?;
        }
    }
    for (f, condition) in
        [("broken_almost_increase.json", 1u8), ("broken_support.json", 3), ("broken_sigma_monotone.json", 4)]
    {
        let failed = bundle(f)?.validate(8).map_err(|e| e.to_string())?.failed_conditions();
        ensure(failed == vec![condition], format!("{f} fails {failed:?}, expected [{condition}]"))?;
    }
    Ok("3 valid bundles increase; 3 broken bundles fail conditions 1, 3, 4".into())
}

fn universal_domination() -> Result<String, String> {
    let registry = Registry::from_json(&read_fixture("registries/bundles.json")).map_err(|e| e.to_string())?;
    let mut previous: Option<HermOp> = None;
    for t in [100u64, 1_000, 10_000] {
        let mu = universal_operator(&registry, t).map_err(|e| e.to_string())?;
        for (i, s) in registry_states(&registry, t).map_err(|e| e.to_string())?.iter().enumerate() {
            let scaled = s.nu.scale(&pow2_neg(i as u32 + 1));
            ensure(scaled.loewner_leq(&mu), format!("member {} not dominated at T = {t}", i + 1))?;
        }
        if let Some(p) = &previous {
            ensure(p.loewner_leq(&mu), format!("μ decreases at T = {t}"))?;
        }
        previous = Some(mu);
    }

    let configs: Vec<BundleConfig> = ["geometric.json", "projection.json", "oscillating.json"]
        .iter()
        .map(|f| BundleConfig::from_json(&read_fixture(&format!("bundles/{f}"))).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let mut constants = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        let n = i + 1;
        let target = c.rho.limit.at(w("1")).map_err(|e| e.to_string())?;
        let found = domination_constant_search(&target, &registry, n, 10_000).map_err(|e| e.to_string())?;
        let (constant, stage) = found.ok_or(format!("no constant for member {n}"))?;
        ensure(constant >= pow2_neg(n as u32 + 1), format!("member {n}: c = {constant}"))?;
        constants.push(format!("c{n} = {constant} at T = {stage}"));
    }
    Ok(constants.join(", "))
}

fn diagonal_non_universality() -> Result<String, String> {
    let report = diagonal_domination_table(length_geometric_semimeasure, 10).map_err(|e| e.to_string())?;
    let mut witness_sum = Rational::zero();
    for n in 0..=10u32 {
        let top = StringIndex::of_length(n).last().unwrap();
        let d = HermOp::diagonal(top.up_to().map(length_geometric_semimeasure));
        let q = apply_quad_form(&d, &uniform_superposition(n));
        let mean = q.as_rational().cloned().ok_or("quadratic form not rational")?;
        let witness = StringIndex::of_length(n).fold(Rational::zero(), |acc, s| acc + length_geometric_semimeasure(s));
        witness_sum += &witness;
        let c = &mean / &witness;
        ensure(c == pow2_neg(n), format!("c_{n} = {c}"))?;
        let row = &report.rows[n as usize];
        ensure(row[3] == semidensity::field::format_rational(&c), format!("table row {n} reports {}", row[3]))?;
    }
    ensure(witness_sum <= Rational::one(), format!("witness sum {witness_sum}"))?;
    ensure(report.holds(), "report verdicts fail")?;
    Ok(format!("c_n = 2^-n for n = 0..10, witness sum {witness_sum}"))
}

fn entropy_closed_forms() -> Result<String, String> {
    let mut r = rng(8);
    for i in 0..100u64 {
        let n = 1 + i % 6;
        let m: Vec<Rational> = (0..n).map(|k| ratio(1 + (k as i64 * 7 + i as i64) % 9, 16 + k as i64)).collect();
        let mu = HermOp::diagonal(m.clone());
        let psi = random_state(&mut r, n, 8);
        let d = rational_to_f64(psi.norm_divisor());
        let expected: f64 = (0..n)
            .map(|k| {
                let a = psi.amplitude(StringIndex::from_rank(k)).abs_sq().to_f64().unwrap() / d;
                -a * rational_to_f64(&m[k as usize]).log2()
            })
            .sum();
        let h = upper_entropy(&mu, &psi, DEFAULT_TOL).map_err(|e| e.to_string())?.finite().ok_or("infinite")?;
        ensure((h - expected).abs() <= 1e-9, format!("H = {h}, closed form {expected}"))?;
    }
    for i in 0..200usize {
        let n = 1 + i % 4;
        let rank = i % (n + 1);
        let mu = common::op(&common::random_gram(&mut r, n, rank, 4)).scale(&ratio(1, 128));
        let psi = random_state(&mut r, n as u64, 8);
        let upper = upper_entropy(&mu, &psi, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let lower = lower_entropy(&mu, &psi).map_err(|e| e.to_string())?;
        ensure(upper.at_least(lower, 1e-6), format!("H_upper {upper} < H_lower {lower}"))?;
    }
    let basis = StateFamily::computational_basis();
    for i in 0..50 {
        let n = 1 + i % 5;
        let mu = common::op(&common::random_gram(&mut r, n, n, 4));
        for k in 0..n as u64 {
            let got = induced_semimeasure(&mu, &basis, k, 32).map_err(|e| e.to_string())?;
            let diag = mu.entry(StringIndex::from_rank(k), StringIndex::from_rank(k));
            ensure(diag.as_rational() == Some(&got), format!("induced value {got} vs diagonal {diag}"))?;
        }
    }
    Ok("100 closed forms, 200 inequalities, 50 basis checks".into())
}

fn rank_one_witness() -> Result<String, String> {
    let rho = rank_one_irrational_example();
    ensure(rho.square() == rho, "ρ² ≠ ρ")?;
    ensure(rho.trace().is_one(), "trace ≠ 1")?;
    ensure(rho.is_psd(), "not PSD")?;
    let off = rho.entry(w("0"), w(""));
    ensure(!off.is_complex_rational(), "off-diagonal entry is complex rational")?;
    let cs = [(0, 1), (1, 2), (1, 3), (7, 8), (1, 1), (2, 5), (3, 4), (1, 16), (5, 7), (-9, 10)];
    for (p, q) in cs {
        let c = ratio(p, q);
        let scaled = rho.scale(&c);
        ensure(scaled.is_complex_rational() == c.is_zero(), format!("c = {c}"))?;
        let entry = scaled.entry(w("0"), w(""));
        let coefficient = entry.re_s3().clone();
        ensure(coefficient == &c / Rational::from_integer(4.into()), format!("√3 coefficient {coefficient} at c = {c}"))?;
        ensure(entry.re_rat().is_zero() && entry.im_rat().is_zero() && entry.im_s3().is_zero(), "stray component")?;
        ensure(coefficient.is_zero() == c.is_zero(), "coefficient vanishes off zero")?;
    }
    Ok("projection in the √3 extension; 10 scalings checked".into())
}

fn cli_determinism() -> Result<String, String> {
    let f = |rel: &str| fixture_path(rel).display().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["psd-check".into(), "--matrix".into(), f("operators/nonpositive_3_2.json")],
        vec!["psd-check".into(), "--matrix".into(), f("operators/zero.json")],
        vec!["loewner".into(), "--lhs".into(), f("operators/half_diag.json"), "--rhs".into(), f("operators/geometric_3.json")],
        vec!["polarize".into(), "--matrix".into(), f("operators/coherent.json")],
        vec!["enumerate-classical".into(), "--registry".into(), f("registries/classical.json"), "--machine".into(), "2".into()],
        vec!["universal-m".into(), "--registry".into(), f("registries/classical.json"), "--stages".into(), "2000".into()],
        vec!["enumerate-quantum".into(), "--naive".into(), "--registry".into(), f("registries/naive_trap.json")],
        vec!["enumerate-quantum".into(), "--matrix".into(), "--registry".into(), f("registries/matrix.json")],
        vec!["universal-mu".into(), "--registry".into(), f("registries/bundles.json"), "--stages".into(), "1000".into()],
        vec![
            "dominate".into(),
            "--registry".into(),
            f("registries/bundles.json"),
            "--target".into(),
            f("operators/half_diag.json"),
            "--index".into(),
            "2".into(),
            "--stages".into(),
            "1000".into(),
        ],
        vec!["entropy".into(), "--operator".into(), f("operators/coherent.json"), "--state".into(), f("states/plus.json")],
        vec!["entropy".into(), "--operator".into(), f("operators/geometric_3.json"), "--basis".into(), "1".into()],
        vec!["counterexample".into(), "naive-trap".into()],
        vec!["counterexample".into(), "rank-one".into()],
        vec!["counterexample".into(), "diagonal".into()],
        vec!["validate-bundle".into(), "--bundle".into(), f("bundles/oscillating.json")],
    ];
    let bin = env!("CARGO_BIN_EXE_semidensity");
    let mut runs = 0;
    for args in &commands {
        for format in ["json", "text"] {
            let go = || Command::new(bin).args(args).args(["--format", format]).output();
            let (a, b) = (go().map_err(|e| e.to_string())?, go().map_err(|e| e.to_string())?);
            ensure(a.status.success(), format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)))?;
            ensure(a.stdout == b.stdout && a.status == b.status, format!("{args:?} --format {format} differs"))?;
            runs += 2;
        }
    }
    Ok(format!("{runs} runs over {} invocations are byte-identical", commands.len() * 2))
}

fn main() {
    let criteria: [(u32, &str, Check, Duration); 10] = [
        (1, "naive-trap trace reproduction", naive_trap_trace, Duration::from_secs(1)),
        (2, "polarization counterexample", polarization_counterexample, Duration::from_secs(1)),
        (3, "PSD oracle equivalence", psd_oracle_equivalence, Duration::from_secs(30)),
        (4, "transformer bounds", transformer_bounds, Duration::from_secs(10)),
        (5, "primed stream monotonicity and bundle conditions", primed_stream_monotone, Duration::from_secs(10)),
        (6, "universal operator domination", universal_domination, Duration::from_secs(60)),
        (7, "diagonal non-universality", diagonal_non_universality, Duration::from_secs(1)),
        (8, "entropy closed forms", entropy_closed_forms, Duration::from_secs(30)),
        (9, "rank-one irrational witness", rank_one_witness, Duration::from_secs(1)),
        (10, "CLI determinism", cli_determinism, Duration::from_secs(10)),
    ];
    let mut failures = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: {detail} ({elapsed:.2?})");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
