//! Upper and lower entropies of a state against a semi-density operator.
//!
//! `H̲(ψ) = -log₂⟨ψ|μψ⟩` is computed from the exact quadratic form.
//! `H̄(ψ) = -⟨ψ|(log₂ μ)ψ⟩` needs a spectral decomposition, done in `f64` on
//! the union of the supports of `μ` and `ψ`. All logarithms are base 2.

use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{log2_rational, Rational, Sign};
use crate::opalg::{apply_quad_form, HermOp, Ket};
use crate::streams::StateFamily;

/// Default eigenvalue cutoff below which the spectrum counts as null.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite `f64` or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// `self ≥ other - slack`, with `+∞` above everything.
    pub fn at_least(self, other: ExtReal, slack: f64) -> bool {
        match (self, other) {
            (ExtReal::PosInf, _) => true,
            (ExtReal::Finite(_), ExtReal::PosInf) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a >= b - slack,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

/// `-log₂⟨ψ|μψ⟩`, or `+∞` when the quadratic form vanishes.
pub fn lower_entropy(mu: &HermOp, psi: &Ket) -> Result<ExtReal> {
    psi.ensure_normalized()?;
    let q = apply_quad_form(mu, psi);
    match q.sign_of_real()? {
        Sign::Zero => Ok(ExtReal::PosInf),
        Sign::Negative => Err(Error::NotPositive(format!("⟨ψ|μψ⟩ = {q}"))),
        Sign::Positive => Ok(ExtReal::Finite(match q.as_rational() {
            Some(r) => -log2_rational(r),
            None => -q.to_f64()?.log2(),
        })),
    }
}

/// `-⟨ψ|(log₂ μ)ψ⟩`; eigenvalues below `tol` count as null, and a squared
/// overlap above `tol` with the null space gives `+∞`.
pub fn upper_entropy(mu: &HermOp, psi: &Ket, tol: f64) -> Result<ExtReal> {
    psi.ensure_normalized()?;
    let mut ranks = mu.support();
    ranks.extend(psi.support());
    ranks.sort_unstable();
    ranks.dedup();
    if ranks.is_empty() {
        return Ok(ExtReal::PosInf);
    }

    let n = ranks.len();
    let dense = mu.dense_on(&ranks);
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let (re, im) = dense[i][j].to_complex_f64();
        Complex::new(re, im)
    });
    let eigen = matrix.try_symmetric_eigen(f64::EPSILON, 100_000).ok_or(Error::EigenNoConvergence)?;
    let amps: Vec<Complex<f64>> =
        psi.to_complex_f64(&ranks).into_iter().map(|(re, im)| Complex::new(re, im)).collect();

    let mut null_overlap = 0.0;
    let mut total = 0.0;
    for (j, &lambda) in eigen.eigenvalues.iter().enumerate() {
        let column = eigen.eigenvectors.column(j);
        let inner: Complex<f64> = column.iter().zip(&amps).map(|(e, a)| e.conj() * a).sum();
        let overlap = inner.norm_sqr();
        if lambda < tol {
            null_overlap += overlap;
        } else {
            total -= overlap * lambda.log2();
        }
    }
    if null_overlap > tol {
        return Ok(ExtReal::PosInf);
    }
    Ok(ExtReal::Finite(total))
}

/// `⟨ψ̃|μψ̃⟩` for the precision-`k` approximation of `ψ_n` on `μ`'s window.
pub fn induced_semimeasure(mu: &HermOp, fam: &StateFamily, n: u64, k: u32) -> Result<Rational> {
    let psi = fam.approx_ket(k, n, mu.window());
    let q = apply_quad_form(mu, &psi);
    q.as_rational().cloned().ok_or_else(|| Error::NotReal(q.to_string()))
}

/// `⟨ψ_n|μψ_n⟩` for a family with exact states.
pub fn induced_semimeasure_exact(mu: &HermOp, fam: &StateFamily, n: u64) -> Result<Rational> {
    let psi = fam.exact_state(n).ok_or_else(|| Error::Invalid("family has no exact states".into()))?;
    let q = apply_quad_form(mu, &psi);
    q.as_rational().cloned().ok_or_else(|| Error::NotReal(q.to_string()))
}
