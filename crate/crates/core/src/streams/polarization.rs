//! Encoding of matrix entries by quadratic-form values.
//!
//! `q(w, v) = ⟨e_w + e_v | ρ (e_w + e_v)⟩` for `w ≤ v` and
//! `q(w, v) = ⟨e_w + i e_v | ρ (e_w + i e_v)⟩` for `w > v`, so `q(w, w) = 4ρ_ww`.
//! For `w < v`:
//!
//! ```text
//! Re ρ_wv = [q(w, v) - q(w, w)/4 - q(v, v)/4] / 2
//! Im ρ_wv = [q(v, w) - q(w, w)/4 - q(v, v)/4] / 2
//! ```

use std::collections::BTreeMap;

use crate::basis::StringIndex;
use crate::error::{Error, Result};
use crate::field::{ratio, Rational, Scalar};
use crate::opalg::{apply_quad_form, HermOp, Ket};

pub type Encoded = BTreeMap<(StringIndex, StringIndex), Scalar>;

pub fn encode(rho: &HermOp, w: StringIndex, v: StringIndex) -> Scalar {
    let mut x = Ket::basis(w);
    let coeff = if w <= v { Scalar::one() } else { Scalar::i() };
    x.set(v, &x.amplitude(v) + &coeff);
    apply_quad_form(rho, &x)
}

/// `q(w, v)` for every pair in the window.
pub fn encode_all(rho: &HermOp, window: StringIndex) -> Encoded {
    let mut q = Encoded::new();
    for w in window.up_to() {
        for v in window.up_to() {
            q.insert((w, v), encode(rho, w, v));
        }
    }
    q
}

fn lookup(q: &Encoded, w: StringIndex, v: StringIndex) -> Result<Rational> {
    let value = q
        .get(&(w, v))
        .ok_or_else(|| Error::Invalid(format!("missing encoded value at ({w}, {v})")))?;
    value
        .as_rational()
        .cloned()
        .ok_or_else(|| Error::Invalid(format!("encoded value at ({w}, {v}) is not rational")))
}

/// Reconstructs `⟨w|ρ v⟩`.
pub fn decode(q: &Encoded, w: StringIndex, v: StringIndex) -> Result<Scalar> {
    if w > v {
        return Ok(decode(q, v, w)?.conj());
    }
    let quarter = ratio(1, 4);
    let dw = lookup(q, w, w)? * &quarter;
    if w == v {
        return Ok(Scalar::from_rational(dw));
    }
    let dv = lookup(q, v, v)? * &quarter;
    let half = ratio(1, 2);
    let re = (lookup(q, w, v)? - &dw - &dv) * &half;
    let im = (lookup(q, v, w)? - &dw - &dv) * &half;
    Ok(Scalar::complex(re, im))
}

/// Reconstructs the operator on ranks `0..=window`.
pub fn decode_all(q: &Encoded, window: StringIndex) -> Result<HermOp> {
    let mut op = HermOp::zero(window);
    for w in window.up_to() {
        for r in w.rank()..=window.rank() {
            let v = StringIndex::from_rank(r);
            op.set(w, v, decode(q, w, v)?)?;
        }
    }
    Ok(op)
}
