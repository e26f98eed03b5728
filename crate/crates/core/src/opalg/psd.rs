//! Exact positive-semidefiniteness by pivoted symmetric elimination.
//!
//! At each step: a negative diagonal entry refutes; an all-zero diagonal
//! forces the whole matrix to vanish; otherwise the largest diagonal entry
//! (least index on ties) is the pivot and we recurse on its Schur
//! complement. For a positive pivot `A ≥ 0` iff the complement is `≥ 0`,
//! which also covers the singular case where leading minors are useless.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::{Scalar, Sign};

/// Decides `M ≥ 0` for a dense square matrix, rejecting non-hermitian input.
pub fn is_psd_matrix(m: &[Vec<Scalar>]) -> Result<bool> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Invalid(format!("row {i} has length {}", row.len())));
        }
        for j in i..n {
            if m[i][j] != m[j][i].conj() {
                return Err(Error::NotHermitian(format!("entries ({i}, {j}) and ({j}, {i})")));
            }
        }
    }
    Ok(eliminate(m.to_vec()))
}

/// Elimination proper; the input must be hermitian.
pub(crate) fn eliminate(mut m: Vec<Vec<Scalar>>) -> bool {
    loop {
        let n = m.len();
        if n == 0 {
            return true;
        }
        let mut pivot = 0usize;
        for i in 0..n {
            match m[i][i].sign_of_real() {
                Ok(Sign::Negative) | Err(_) => return false,
                _ => {}
            }
            if i > 0 && matches!(m[i][i].cmp_real(&m[pivot][pivot]), Ok(Ordering::Greater)) {
                pivot = i;
            }
        }
        if m[pivot][pivot].is_zero() {
            return m.iter().all(|row| row.iter().all(Scalar::is_zero));
        }

        let inv = m[pivot][pivot].inv().expect("pivot is nonzero");
        let pivot_row = std::mem::take(&mut m[pivot]);
        let mut next = Vec::with_capacity(n - 1);
        for (i, mut row) in m.into_iter().enumerate() {
            if i == pivot {
                continue;
            }
            let coupling = row.remove(pivot);
            if !coupling.is_zero() {
                let factor = &coupling * &inv;
                let mut k = 0;
                for (j, pv) in pivot_row.iter().enumerate() {
                    if j == pivot {
                        continue;
                    }
                    if !pv.is_zero() {
                        row[k] -= &(&factor * pv);
                    }
                    k += 1;
                }
            }
            next.push(row);
        }
        m = next;
    }
}
