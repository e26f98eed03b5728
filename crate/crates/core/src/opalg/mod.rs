//! Finitely supported hermitian operators on the string space.
//!
//! A [`HermOp`] stores its upper triangle (`rank(row) <= rank(col)`) as a
//! sparse map of nonzero exact scalars; the lower triangle is implied by
//! hermitian symmetry. The declared window bounds the support. Everything
//! infinite-dimensional is handled by callers at truncation windows.

mod json;
mod psd;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

pub use self::json::{EntryJson, KetJson, OperatorJson};
pub use self::psd::is_psd_matrix;

use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{Rational, Scalar, Sign};

/// Hermitian operator with finite support and exact entries.
///
/// Equality compares the operators, not their declared windows.
#[derive(Clone, Debug)]
pub struct HermOp {
    window: StringIndex,
    entries: BTreeMap<(u64, u64), Scalar>,
}

impl PartialEq for HermOp {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for HermOp {}

impl HermOp {
    pub fn zero(window: StringIndex) -> Self {
        HermOp { window, entries: BTreeMap::new() }
    }

    /// Identity on the ranks `0..=rank(window)`; this is the prefix projector `P_window`.
    pub fn identity(window: StringIndex) -> Self {
        Self::scaled_identity(window, &Rational::one())
    }

    pub fn scaled_identity(window: StringIndex, c: &Rational) -> Self {
        let mut op = Self::zero(window);
        if !c.is_zero() {
            for r in 0..=window.rank() {
                op.entries.insert((r, r), Scalar::from_rational(c.clone()));
            }
        }
        op
    }

    /// Diagonal operator with `values[r]` at rank `r`.
    pub fn diagonal<I>(values: I) -> Self
    where
        I: IntoIterator<Item = Rational>,
    {
        let mut op = Self::zero(StringIndex::EMPTY);
        let mut last = 0u64;
        for (r, v) in values.into_iter().enumerate() {
            last = r as u64;
            if !v.is_zero() {
                op.entries.insert((last, last), Scalar::from_rational(v));
            }
        }
        op.window = StringIndex::from_rank(last);
        op
    }

    /// Builds an operator from upper-triangle entries (`rank(row) <= rank(col)`).
    pub fn from_upper<I>(window: StringIndex, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StringIndex, StringIndex, Scalar)>,
    {
        let mut op = Self::zero(window);
        for (row, col, value) in entries {
            if row > col {
                return Err(Error::Invalid(format!("entry ({row}, {col}) lies below the diagonal")));
            }
            if col > window {
                return Err(Error::Invalid(format!("entry ({row}, {col}) lies outside window {window}")));
            }
            op.set(row, col, value)?;
        }
        Ok(op)
    }

    /// Sets `⟨row|A col⟩ := value` and `⟨col|A row⟩ := conj(value)`, growing the window if needed.
    pub fn set(&mut self, row: StringIndex, col: StringIndex, value: Scalar) -> Result<()> {
        let (r, c, v) = if row <= col {
            (row.rank(), col.rank(), value)
        } else {
            (col.rank(), row.rank(), value.conj())
        };
        if r == c && !v.is_real() {
            return Err(Error::NonRealDiagonal(row.to_string()));
        }
        self.window = self.window.max(StringIndex::from_rank(c));
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
        Ok(())
    }

    /// `⟨row|A col⟩`.
    pub fn entry(&self, row: StringIndex, col: StringIndex) -> Scalar {
        self.entry_at(row.rank(), col.rank())
    }

    pub(crate) fn entry_at(&self, r: u64, c: u64) -> Scalar {
        if r <= c {
            self.entries.get(&(r, c)).cloned().unwrap_or_default()
        } else {
            self.entries.get(&(c, r)).map(Scalar::conj).unwrap_or_default()
        }
    }

    pub fn window(&self) -> StringIndex {
        self.window
    }

    /// Redeclares the window; shrinking compresses.
    pub fn with_window(&self, window: StringIndex) -> Self {
        if window >= self.window {
            HermOp { window, entries: self.entries.clone() }
        } else {
            self.compress(window)
        }
    }

    /// Nonzero upper-triangle entries in rank order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (StringIndex, StringIndex, &Scalar)> {
        self.entries
            .iter()
            .map(|(&(r, c), v)| (StringIndex::from_rank(r), StringIndex::from_rank(c), v))
    }

    pub fn nnz_upper(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ranks carrying a nonzero row, sorted.
    pub fn support(&self) -> Vec<u64> {
        let mut set = BTreeSet::new();
        for &(r, c) in self.entries.keys() {
            set.insert(r);
            set.insert(c);
        }
        set.into_iter().collect()
    }

    /// Diagonal entries at ranks `0..=rank(window)`.
    pub fn diagonal_values(&self) -> Vec<Scalar> {
        (0..=self.window.rank()).map(|r| self.entry_at(r, r)).collect()
    }

    pub fn is_complex_rational(&self) -> bool {
        self.entries.values().all(Scalar::is_complex_rational)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.window);
        if !c.is_zero() {
            out.entries = self.entries.iter().map(|(&k, v)| (k, v.scale(c))).collect();
        }
        out
    }

    /// Multiplies by a real scalar (which may involve `√3`).
    pub fn scale_real(&self, c: &Scalar) -> Result<Self> {
        if !c.is_real() {
            return Err(Error::NotReal(c.to_string()));
        }
        let mut out = Self::zero(self.window);
        for (&k, v) in &self.entries {
            let p = v * c;
            if !p.is_zero() {
                out.entries.insert(k, p);
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Scalar {
        let mut t = Scalar::zero();
        for ((r, c), v) in &self.entries {
            if r == c {
                t += v;
            }
        }
        t
    }

    /// `Σ_{w,v} |⟨w|A v⟩|²`, the squared Hilbert–Schmidt norm.
    pub fn hs_norm_squared(&self) -> Scalar {
        let mut total = Scalar::zero();
        for ((r, c), v) in &self.entries {
            let sq = v.abs_sq();
            if r == c {
                total += &sq;
            } else {
                total += &(&sq + &sq);
            }
        }
        total
    }

    /// `P_w A P_w`.
    pub fn compress(&self, w: StringIndex) -> Self {
        let limit = w.rank();
        HermOp {
            window: w,
            entries: self
                .entries
                .iter()
                .filter(|(&(_, c), _)| c <= limit)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    /// Dense matrix over the given ranks.
    pub fn dense_on(&self, ranks: &[u64]) -> Vec<Vec<Scalar>> {
        ranks
            .iter()
            .map(|&r| ranks.iter().map(|&c| self.entry_at(r, c)).collect())
            .collect()
    }

    /// Dense matrix over ranks `0..=rank(window)`.
    pub fn to_matrix(&self) -> Vec<Vec<Scalar>> {
        let ranks: Vec<u64> = (0..=self.window.rank()).collect();
        self.dense_on(&ranks)
    }

    /// Canonical embedding of a square hermitian matrix at origin rank 0.
    pub fn embed(matrix: &[Vec<Scalar>]) -> Result<Self> {
        let n = matrix.len();
        let mut op = Self::zero(StringIndex::from_rank(n.saturating_sub(1) as u64));
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!("row {i} has length {} in a {n}x{n} matrix", row.len())));
            }
        }
        for i in 0..n {
            if !matrix[i][i].is_real() {
                return Err(Error::NotHermitian(format!("diagonal entry {i} is not real")));
            }
            for j in i..n {
                if matrix[i][j] != matrix[j][i].conj() {
                    return Err(Error::NotHermitian(format!("entries ({i}, {j}) and ({j}, {i}) are not conjugate")));
                }
                if !matrix[i][j].is_zero() {
                    op.entries.insert((i as u64, j as u64), matrix[i][j].clone());
                }
            }
        }
        Ok(op)
    }

    /// Decides `A ≥ 0` by pivoted symmetric elimination over the support.
    pub fn is_psd(&self) -> bool {
        let support = self.support();
        if support.is_empty() {
            return true;
        }
        psd::eliminate(self.dense_on(&support))
    }

    /// `self ≤ other` in Loewner order.
    pub fn loewner_leq(&self, other: &HermOp) -> bool {
        (other - self).is_psd()
    }

    /// `A²`, which is hermitian.
    pub fn square(&self) -> HermOp {
        let support = self.support();
        let dense = self.dense_on(&support);
        let mut out = Self::zero(self.window);
        for (i, &r) in support.iter().enumerate() {
            for (j, &c) in support.iter().enumerate().skip(i) {
                let mut acc = Scalar::zero();
                for k in 0..support.len() {
                    if !dense[i][k].is_zero() && !dense[k][j].is_zero() {
                        acc += &(&dense[i][k] * &dense[k][j]);
                    }
                }
                if !acc.is_zero() {
                    out.entries.insert((r, c), acc);
                }
            }
        }
        out
    }

    /// Trace one and idempotent.
    pub fn is_rank_one_projection(&self) -> bool {
        self.trace().is_one() && &self.square() == self
    }

    fn combine(&self, other: &HermOp, negate_other: bool) -> HermOp {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let slot = entries.entry(*k).or_default();
            if negate_other {
                *slot -= v;
            } else {
                *slot += v;
            }
            if slot.is_zero() {
                entries.remove(k);
            }
        }
        HermOp { window: self.window.max(other.window), entries }
    }
}

impl<'a> Add<&'a HermOp> for &'a HermOp {
    type Output = HermOp;
    fn add(self, other: &HermOp) -> HermOp {
        self.combine(other, false)
    }
}

impl<'a> Sub<&'a HermOp> for &'a HermOp {
    type Output = HermOp;
    fn sub(self, other: &HermOp) -> HermOp {
        self.combine(other, true)
    }
}

impl Neg for &HermOp {
    type Output = HermOp;
    fn neg(self) -> HermOp {
        HermOp {
            window: self.window,
            entries: self.entries.iter().map(|(&k, v)| (k, -v)).collect(),
        }
    }
}

/// A finitely supported vector `amps / √norm_divisor`.
///
/// Carrying the divisor keeps states such as `2^{-n/2} Σ |w⟩` exact:
/// quadratic forms and outer products divide by it as a rational.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: BTreeMap<u64, Scalar>,
    norm_divisor: Rational,
}

impl Default for Ket {
    fn default() -> Self {
        Ket { amps: BTreeMap::new(), norm_divisor: Rational::one() }
    }
}

impl Ket {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(w: StringIndex) -> Self {
        let mut k = Self::new();
        k.amps.insert(w.rank(), Scalar::one());
        k
    }

    pub fn from_amplitudes<I>(amps: I) -> Self
    where
        I: IntoIterator<Item = (StringIndex, Scalar)>,
    {
        let mut k = Self::new();
        for (w, a) in amps {
            k.set(w, a);
        }
        k
    }

    /// Divides the represented vector by `√divisor`.
    pub fn with_norm_divisor(mut self, divisor: Rational) -> Result<Self> {
        if divisor <= Rational::zero() {
            return Err(Error::Invalid("norm divisor must be positive".into()));
        }
        self.norm_divisor = divisor;
        Ok(self)
    }

    pub fn set(&mut self, w: StringIndex, a: Scalar) {
        if a.is_zero() {
            self.amps.remove(&w.rank());
        } else {
            self.amps.insert(w.rank(), a);
        }
    }

    /// Raw (undivided) amplitude at `w`.
    pub fn amplitude(&self, w: StringIndex) -> Scalar {
        self.amps.get(&w.rank()).cloned().unwrap_or_default()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (StringIndex, &Scalar)> {
        self.amps.iter().map(|(&r, a)| (StringIndex::from_rank(r), a))
    }

    pub fn norm_divisor(&self) -> &Rational {
        &self.norm_divisor
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn window(&self) -> StringIndex {
        StringIndex::from_rank(self.amps.keys().next_back().copied().unwrap_or(0))
    }

    pub fn support(&self) -> Vec<u64> {
        self.amps.keys().copied().collect()
    }

    /// `⟨v|v⟩`, exact.
    pub fn norm_sq(&self) -> Scalar {
        let mut total = Scalar::zero();
        for a in self.amps.values() {
            total += &a.abs_sq();
        }
        total.scale(&self.norm_divisor.recip())
    }

    pub fn is_normalized(&self) -> bool {
        self.norm_sq().is_one()
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sq: (&self.norm_sq() * &Scalar::from_rational(self.norm_divisor.clone())).to_string(),
                divisor: crate::field::format_rational(&self.norm_divisor),
            })
        }
    }

    /// Floating-point amplitudes on the given ranks, divisor applied.
    pub fn to_complex_f64(&self, ranks: &[u64]) -> Vec<(f64, f64)> {
        let scale = crate::field::rational_to_f64(&self.norm_divisor).sqrt();
        ranks
            .iter()
            .map(|r| {
                let (re, im) = self.amps.get(r).map(Scalar::to_complex_f64).unwrap_or((0.0, 0.0));
                (re / scale, im / scale)
            })
            .collect()
    }
}

/// `|v⟩⟨v|`.
pub fn rank_one_from_vector(v: &Ket) -> HermOp {
    let inv = v.norm_divisor.recip();
    let mut op = HermOp::zero(v.window());
    let amps: Vec<(&u64, &Scalar)> = v.amps.iter().collect();
    for (i, (&r, a)) in amps.iter().enumerate() {
        for (&c, b) in amps.iter().skip(i) {
            let value = (*a * &b.conj()).scale(&inv);
            if !value.is_zero() {
                op.entries.insert((r, c), value);
            }
        }
    }
    op
}

/// `⟨v|A v⟩`, exact and real for hermitian `A`.
pub fn apply_quad_form(a: &HermOp, v: &Ket) -> Scalar {
    let mut total = Scalar::zero();
    let mut add_term = |r: u64, c: u64, value: &Scalar| {
        let (Some(x), Some(y)) = (v.amps.get(&r), v.amps.get(&c)) else {
            return;
        };
        let term = &(&x.conj() * value) * y;
        if r == c {
            total += &term;
        } else {
            // the (c, r) entry contributes the conjugate
            let re = term.real_part();
            total += &(&re + &re);
        }
    };
    let ket_pairs = v.amps.len() * (v.amps.len() + 1) / 2;
    if ket_pairs < a.entries.len() {
        let ranks: Vec<u64> = v.amps.keys().copied().collect();
        for (i, &r) in ranks.iter().enumerate() {
            for &c in &ranks[i..] {
                if let Some(value) = a.entries.get(&(r, c)) {
                    add_term(r, c, value);
                }
            }
        }
    } else {
        for (&(r, c), value) in &a.entries {
            add_term(r, c, value);
        }
    }
    total.scale(&v.norm_divisor.recip())
}

/// If `0 ≤ sigma ≤ rho` for a rank-one projection `rho`, returns the unique
/// `c` with `sigma = c·rho`.
pub fn dominated_by_rank_one(sigma: &HermOp, rho: &HermOp) -> Result<Option<Scalar>> {
    if !rho.is_rank_one_projection() {
        return Err(Error::NotProjection);
    }
    if !sigma.is_psd() || !sigma.loewner_leq(rho) {
        return Ok(None);
    }
    let c = sigma.trace();
    let expected = rho.scale_real(&c)?;
    if &expected != sigma {
        return Err(Error::Invalid("minorant of a rank-one projection is not a multiple of it".into()));
    }
    debug_assert!(c.sign_of_real().map(|s| s != Sign::Negative).unwrap_or(false));
    Ok(Some(c))
}
