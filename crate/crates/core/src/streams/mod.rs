//! Approximation streams and the transformations between them.
//!
//! Every rule is a black box evaluated at finite truncations. Monotonicity
//! and error guarantees are declared by a [`StreamKind`] and validated on
//! demand, never assumed.

mod bundle;
pub mod fixtures;
pub mod polarization;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub use self::bundle::{primed_stream, BundleReport, ConjectureBundle, Failure, DEFAULT_SIGMA_PRECISION};

use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{pow2_neg, Rational, Scalar, Sign};
use crate::opalg::{apply_quad_form, rank_one_from_vector, HermOp, Ket};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamKind {
    /// Loewner-increasing.
    Lower,
    /// Loewner-decreasing.
    Upper,
    /// `‖ρ - ρ_n‖ < 2^-n` on the evaluated window.
    Computable,
    /// No order guarantee.
    Raw,
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Lower => "lower",
            StreamKind::Upper => "upper",
            StreamKind::Computable => "computable",
            StreamKind::Raw => "raw",
        })
    }
}

type OpRule = Arc<dyn Fn(u32) -> Result<HermOp> + Send + Sync>;

/// A rule `n ↦ ρ_n` with a declared kind.
#[derive(Clone)]
pub struct ApproxStream {
    kind: StreamKind,
    rule: OpRule,
}

impl fmt::Debug for ApproxStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApproxStream").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl ApproxStream {
    pub fn new<F>(kind: StreamKind, rule: F) -> Self
    where
        F: Fn(u32) -> HermOp + Send + Sync + 'static,
    {
        ApproxStream { kind, rule: Arc::new(move |n| Ok(rule(n))) }
    }

    pub fn fallible<F>(kind: StreamKind, rule: F) -> Self
    where
        F: Fn(u32) -> Result<HermOp> + Send + Sync + 'static,
    {
        ApproxStream { kind, rule: Arc::new(rule) }
    }

    /// The stream that is `op` at every index.
    pub fn constant(kind: StreamKind, op: HermOp) -> Self {
        Self::new(kind, move |_| op.clone())
    }

    pub fn kind(&self) -> StreamKind {
        self.kind
    }

    pub fn eval(&self, n: u32) -> Result<HermOp> {
        (self.rule)(n)
    }

    fn expect_kind(&self, expected: StreamKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind { expected: expected.to_string(), found: self.kind.to_string() })
        }
    }

    /// First `n ≤ upto` where the declared order fails between `n` and `n + 1`.
    pub fn first_order_violation(&self, upto: u32) -> Result<Option<u32>> {
        if !matches!(self.kind, StreamKind::Lower | StreamKind::Upper) {
            return Ok(None);
        }
        let mut current = self.eval(1)?;
        for n in 1..=upto {
            let next = self.eval(n + 1)?;
            let ok = match self.kind {
                StreamKind::Lower => current.loewner_leq(&next),
                _ => next.loewner_leq(&current),
            };
            if !ok {
                return Ok(Some(n));
            }
            current = next;
        }
        Ok(None)
    }
}

type CoeffRule = Arc<dyn Fn(StringIndex, StringIndex, u32) -> Result<Scalar> + Send + Sync>;

/// A rule `(w, v, n) ↦ ψ̃` with `|⟨w|ρ v⟩ - ψ̃(w, v, n)| < 2^-n`.
///
/// Hermitian consistency is not assumed; consumers symmetrize.
#[derive(Clone)]
pub struct CoeffApprox {
    rule: CoeffRule,
}

impl fmt::Debug for CoeffApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoeffApprox")
    }
}

impl CoeffApprox {
    pub fn new<F>(rule: F) -> Self
    where
        F: Fn(StringIndex, StringIndex, u32) -> Scalar + Send + Sync + 'static,
    {
        CoeffApprox { rule: Arc::new(move |w, v, n| Ok(rule(w, v, n))) }
    }

    pub fn fallible<F>(rule: F) -> Self
    where
        F: Fn(StringIndex, StringIndex, u32) -> Result<Scalar> + Send + Sync + 'static,
    {
        CoeffApprox { rule: Arc::new(rule) }
    }

    /// The exact entries of a fixed operator, at every precision.
    pub fn exact(op: HermOp) -> Self {
        Self::new(move |w, v, _| op.entry(w, v))
    }

    pub fn eval(&self, w: StringIndex, v: StringIndex, n: u32) -> Result<Scalar> {
        (self.rule)(w, v, n)
    }

    /// `½(c(w, v, n) + conj c(v, w, n))`.
    pub fn symmetrized(&self, w: StringIndex, v: StringIndex, n: u32) -> Result<Scalar> {
        let sum = &self.eval(w, v, n)? + &self.eval(v, w, n)?.conj();
        Ok(sum.scale(&Rational::new(1.into(), 2.into())))
    }

    /// The symmetrized operator at precision `n`, compressed to `window`.
    pub fn operator_at(&self, window: StringIndex, n: u32) -> Result<HermOp> {
        let mut op = HermOp::zero(window);
        for w in window.up_to() {
            for r in w.rank()..=window.rank() {
                let v = StringIndex::from_rank(r);
                op.set(w, v, self.symmetrized(w, v, n)?)?;
            }
        }
        Ok(op)
    }
}

type StateRule = Arc<dyn Fn(u32, u64, StringIndex) -> Scalar + Send + Sync>;
type ExactState = Arc<dyn Fn(u64) -> Ket + Send + Sync>;

/// A uniformly computable family `(k, n, w) ↦ ψ̃` with
/// `|⟨w|ψ_n⟩ - ψ̃(k, n, w)| < 2^-k`, optionally with exact states.
#[derive(Clone)]
pub struct StateFamily {
    rule: StateRule,
    exact: Option<ExactState>,
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFamily").field("exact", &self.exact.is_some()).finish_non_exhaustive()
    }
}

impl StateFamily {
    pub fn new<F>(rule: F) -> Self
    where
        F: Fn(u32, u64, StringIndex) -> Scalar + Send + Sync + 'static,
    {
        StateFamily { rule: Arc::new(rule), exact: None }
    }

    pub fn with_exact<F>(mut self, exact: F) -> Self
    where
        F: Fn(u64) -> Ket + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn eval(&self, k: u32, n: u64, w: StringIndex) -> Scalar {
        (self.rule)(k, n, w)
    }

    pub fn exact_state(&self, n: u64) -> Option<Ket> {
        self.exact.as_ref().map(|f| f(n))
    }

    /// The rank-`k` rational approximation of `ψ_n` on ranks `0..=window`.
    pub fn approx_ket(&self, k: u32, n: u64, window: StringIndex) -> Ket {
        Ket::from_amplitudes(window.up_to().map(|w| (w, self.eval(k, n, w))))
    }

    /// `ψ_n = |stringOf(n)⟩`, exact at every precision.
    pub fn computational_basis() -> Self {
        StateFamily::new(|_, n, w| if w.rank() == n { Scalar::one() } else { Scalar::zero() })
            .with_exact(|n| Ket::basis(StringIndex::from_rank(n)))
    }

    /// `ψ_n = 2^{-n/2} Σ_{len(w) = n} |w⟩`.
    ///
    /// The rational rule truncates `2^{-n/2}` to `k + 1` binary digits.
    pub fn uniform_superposition() -> Self {
        StateFamily::new(|k, n, w| {
            if u64::from(w.len()) != n {
                return Scalar::zero();
            }
            Scalar::from_rational(dyadic_inverse_sqrt_pow2(n, k + 1))
        })
        .with_exact(uniform_ket)
    }
}

/// `⌊2^bits · 2^{-n/2}⌋ / 2^bits`, within `2^-bits` of `2^{-n/2}`.
fn dyadic_inverse_sqrt_pow2(n: u64, bits: u32) -> Rational {
    let twice = 2 * u64::from(bits);
    if n > twice {
        return Rational::zero();
    }
    let root = (BigUint::one() << (twice - n) as usize).sqrt();
    Rational::new(root.into(), (BigUint::one() << bits as usize).into())
}

/// Amplitudes 1 on every string of length `n`, norm divisor `2^n`.
pub(crate) fn uniform_ket(n: u64) -> Ket {
    let len = u32::try_from(n).expect("string length fits u32");
    Ket::from_amplitudes(StringIndex::of_length(len).map(|w| (w, Scalar::one())))
        .with_norm_divisor(Rational::from_integer(num_bigint::BigInt::one() << len as usize))
        .expect("positive divisor")
}

type MassRule = Arc<dyn Fn(u64, u32) -> Rational + Send + Sync>;

/// A rule `(index, k) ↦ m̃`, monotone in `k`, approximating a semimeasure from below.
#[derive(Clone)]
pub struct SemimeasureApprox {
    rule: MassRule,
}

impl fmt::Debug for SemimeasureApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SemimeasureApprox")
    }
}

impl SemimeasureApprox {
    pub fn new<F>(rule: F) -> Self
    where
        F: Fn(u64, u32) -> Rational + Send + Sync + 'static,
    {
        SemimeasureApprox { rule: Arc::new(rule) }
    }

    pub fn eval(&self, index: u64, k: u32) -> Rational {
        (self.rule)(index, k)
    }

    /// Checks monotonicity in `k`, nonnegativity and total mass `≤ 1` on
    /// indices `0..=index_cutoff` and precisions `0..=k_cutoff`.
    pub fn is_valid_up_to(&self, index_cutoff: u64, k_cutoff: u32) -> bool {
        let mut previous: Option<Vec<Rational>> = None;
        for k in 0..=k_cutoff {
            let row: Vec<Rational> = (0..=index_cutoff).map(|i| self.eval(i, k)).collect();
            if row.iter().any(|x| x < &Rational::zero()) {
                return false;
            }
            if row.iter().fold(Rational::zero(), |a, b| a + b) > Rational::one() {
                return false;
            }
            if let Some(prev) = &previous {
                if prev.iter().zip(&row).any(|(a, b)| a > b) {
                    return false;
                }
            }
            previous = Some(row);
        }
        true
    }
}

/// Entries of `s.rule(n)` read as coefficient approximations.
pub fn coeff_approx_from_op_approx(s: &ApproxStream) -> Result<CoeffApprox> {
    s.expect_kind(StreamKind::Computable)?;
    let s = s.clone();
    Ok(CoeffApprox::fallible(move |w, v, n| Ok(s.eval(n)?.entry(w, v))))
}

/// Precision used for the entry `(w, v)` of the `n`-th operator:
/// `⌈(rank(w) + rank(v) + n) / 2⌉ + 1`.
pub fn coeff_precision(w: StringIndex, v: StringIndex, n: u32) -> u32 {
    let total = w.rank() + v.rank() + u64::from(n);
    u32::try_from(total.div_ceil(2) + 1).unwrap_or(u32::MAX)
}

/// Assembles operators on the window of rank `n` from symmetrized coefficients.
pub fn op_approx_from_coeff_approx(c: &CoeffApprox) -> ApproxStream {
    let c = c.clone();
    ApproxStream::fallible(StreamKind::Computable, move |n| {
        let window = StringIndex::from_rank(u64::from(n));
        let mut op = HermOp::zero(window);
        for w in window.up_to() {
            for r in w.rank()..=window.rank() {
                let v = StringIndex::from_rank(r);
                op.set(w, v, c.symmetrized(w, v, coeff_precision(w, v, n))?)?;
            }
        }
        Ok(op)
    })
}

/// `¼ Σ_k |⟨w + i^k v | D (w + i^k v)⟩|`.
pub fn polarization_gap(d: &HermOp, w: StringIndex, v: StringIndex) -> Result<Rational> {
    let mut phase = Scalar::one();
    let mut total = Scalar::zero();
    for _ in 0..4 {
        let mut x = Ket::basis(w);
        x.set(v, &x.amplitude(v) + &phase);
        let q = apply_quad_form(d, &x);
        total += &match q.sign_of_real()? {
            Sign::Negative => -q,
            _ => q,
        };
        phase = &phase * &Scalar::i();
    }
    total
        .as_rational()
        .map(|r| r / Rational::from_integer(4.into()))
        .ok_or_else(|| Error::Invalid("gap outside the complex rationals".into()))
}

/// Least `m ≤ budget` whose bracket gap is below `2^-n` on the window of rank `n`.
pub fn bracket_index(lo: &ApproxStream, hi: &ApproxStream, n: u32, budget: u32) -> Result<u32> {
    let bound = pow2_neg(n);
    let window = u64::from(n);
    'search: for m in 1..=budget {
        let d = &lo.eval(m)? - &hi.eval(m)?;
        for a in 0..=window {
            for b in a..=window {
                let gap = polarization_gap(&d, StringIndex::from_rank(a), StringIndex::from_rank(b))?;
                if gap >= bound {
                    continue 'search;
                }
            }
        }
        return Ok(m);
    }
    Err(Error::NotConverged { level: n, budget })
}

/// A computable stream `n ↦ lo(f(n))` from a lower/upper bracket.
pub fn approx_from_lower_upper(lo: &ApproxStream, hi: &ApproxStream, budget: u32) -> Result<ApproxStream> {
    lo.expect_kind(StreamKind::Lower)?;
    hi.expect_kind(StreamKind::Upper)?;
    let (lo, hi) = (lo.clone(), hi.clone());
    Ok(ApproxStream::fallible(StreamKind::Computable, move |n| {
        lo.eval(bracket_index(&lo, &hi, n, budget)?)
    }))
}

fn shifted_by_identity(s: &ApproxStream, sign: i64, kind: StreamKind) -> Result<ApproxStream> {
    s.expect_kind(StreamKind::Computable)?;
    let s = s.clone();
    Ok(ApproxStream::fallible(kind, move |n| {
        let current = s.eval(n)?;
        let window = current.window().max(s.eval(n + 1)?.window());
        let shift = crate::field::pow2(2 - i64::from(n)) * Rational::from_integer(sign.into());
        Ok(&current.with_window(window) + &HermOp::scaled_identity(window, &shift))
    }))
}

/// `ρ_n - 2^{-n+2} I` on the union of the windows at `n` and `n + 1`.
pub fn lower_from_computable(s: &ApproxStream) -> Result<ApproxStream> {
    shifted_by_identity(s, -1, StreamKind::Lower)
}

/// `ρ_n + 2^{-n+2} I` on the union of the windows at `n` and `n + 1`.
pub fn upper_from_computable(s: &ApproxStream) -> Result<ApproxStream> {
    shifted_by_identity(s, 1, StreamKind::Upper)
}

/// `Σ_{n ≤ n_cutoff} m̃(n, k) |ψ_{k,n}⟩⟨ψ_{k,n}| - 2^{-(k+1)} I_window`, where
/// `⟨w|ψ_{k,n}⟩ = ψ̃(k + rank(w), n, w)`.
pub fn mixture_lower_approx(
    fam: &StateFamily,
    m: &SemimeasureApprox,
    k: u32,
    window: StringIndex,
    n_cutoff: u64,
) -> HermOp {
    let mut total = HermOp::zero(window);
    for n in 0..=n_cutoff {
        let weight = m.eval(n, k);
        if weight.is_zero() {
            continue;
        }
        let psi = Ket::from_amplitudes(window.up_to().map(|w| {
            let precision = u32::try_from(u64::from(k) + w.rank()).unwrap_or(u32::MAX);
            (w, fam.eval(precision, n, w))
        }));
        total = &total + &rank_one_from_vector(&psi).scale(&weight);
    }
    let shift = -pow2_neg(k + 1);
    &total.with_window(window) + &HermOp::scaled_identity(window, &shift)
}
