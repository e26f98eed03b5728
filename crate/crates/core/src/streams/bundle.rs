//! Regularity data for a lower approximation, and the primed stream built from it.

use std::fmt;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use super::{ApproxStream, CoeffApprox};
use crate::basis::StringIndex;
use crate::error::Result;
use crate::field::{pow2_neg, ratio, Rational};
use crate::opalg::HermOp;

/// Default precision at which the coefficient rule of `σ` is read.
pub const DEFAULT_SIGMA_PRECISION: u32 = 64;

type SupportRule = Arc<dyn Fn(u32) -> StringIndex + Send + Sync>;

/// `(ρ_n, σ, f)`: a stream, a dominating operator and finite supports.
#[derive(Clone)]
pub struct ConjectureBundle {
    rho: ApproxStream,
    sigma: CoeffApprox,
    sigma_precision: u32,
    support: SupportRule,
}

impl fmt::Debug for ConjectureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConjectureBundle")
            .field("rho", &self.rho)
            .field("sigma_precision", &self.sigma_precision)
            .finish_non_exhaustive()
    }
}

/// A failed condition at index `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub condition: u8,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BundleReport {
    pub checked_up_to: u32,
    pub failures: Vec<Failure>,
}

impl BundleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Distinct failed conditions.
    pub fn failed_conditions(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.failures.iter().map(|f| f.condition).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

impl ConjectureBundle {
    pub fn new<F>(rho: ApproxStream, sigma: CoeffApprox, support: F) -> Self
    where
        F: Fn(u32) -> StringIndex + Send + Sync + 'static,
    {
        ConjectureBundle { rho, sigma, sigma_precision: DEFAULT_SIGMA_PRECISION, support: Arc::new(support) }
    }

    pub fn with_sigma_precision(mut self, precision: u32) -> Self {
        self.sigma_precision = precision;
        self
    }

    pub fn rho(&self, n: u32) -> Result<HermOp> {
        self.rho.eval(n)
    }

    pub fn support(&self, n: u32) -> StringIndex {
        (self.support)(n)
    }

    /// `P_w σ P_w`.
    pub fn sigma_on(&self, w: StringIndex) -> Result<HermOp> {
        self.sigma.operator_at(w, self.sigma_precision)
    }

    /// `σ_n = P_{f(n)} σ P_{f(n)}`.
    pub fn sigma_n(&self, n: u32) -> Result<HermOp> {
        self.sigma_on(self.support(n))
    }

    /// Checks conditions 1, 3 and 4 for `n = 1..=upto`.
    ///
    /// Condition 1 compares against `σ` compressed to every window involved,
    /// which is a necessary check on a finite truncation.
    pub fn validate(&self, upto: u32) -> Result<BundleReport> {
        let mut failures = Vec::new();
        let mut rho_n = self.rho(1)?;
        for n in 1..=upto {
            let rho_next = self.rho(n + 1)?;
            let (f_n, f_next) = (self.support(n), self.support(n + 1));

            let window = rho_n.window().max(rho_next.window()).max(f_n).max(f_next);
            let slack = self.sigma_on(window)?.scale(&-pow2_neg(n + 1));
            if !rho_n.is_psd() || !slack.loewner_leq(&(&rho_next - &rho_n)) {
                failures.push(Failure { condition: 1, n });
            }
            if rho_n.compress(f_n) != rho_n {
                failures.push(Failure { condition: 3, n });
            }
            if !self.sigma_on(f_n)?.loewner_leq(&self.sigma_on(f_next)?) {
                failures.push(Failure { condition: 4, n });
            }
            rho_n = rho_next;
        }
        Ok(BundleReport { checked_up_to: upto, failures })
    }
}

/// `ρ'_n = ½(ρ_n + (1 - 2^-n) σ_n)`.
pub fn primed_stream(b: &ConjectureBundle, n: u32) -> Result<HermOp> {
    let sigma_part = b.sigma_n(n)?.scale(&(Rational::one() - pow2_neg(n)));
    Ok((&b.rho(n)? + &sigma_part).scale(&ratio(1, 2)))
}
