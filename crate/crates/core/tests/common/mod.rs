//! Independent oracles and random generators shared by the integration tests.
//!
//! The oracles use their own complex-rational type and never call into the
//! library's elimination or field code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semidensity::field::{Rational, Scalar};
use semidensity::opalg::{HermOp, Ket};
use semidensity::basis::StringIndex;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Cq {
    pub fn zero() -> Self {
        Cq { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Cq { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn of(s: &Scalar) -> Self {
        assert!(s.is_complex_rational(), "oracle only handles complex rationals: {s}");
        Cq { re: s.re_rat().clone(), im: s.im_rat().clone() }
    }

    pub fn add(&self, o: &Cq) -> Cq {
        Cq { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Cq) -> Cq {
        Cq { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Cq) -> Cq {
        Cq { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &[Vec<Cq>]) -> Cq {
    let n = m.len();
    if n == 0 {
        return Cq::one();
    }
    let mut total = Cq::zero();
    for j in 0..n {
        if m[0][j] == Cq::zero() {
            continue;
        }
        let minor: Vec<Vec<Cq>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][j].mul(&det(&minor));
        total = if j % 2 == 0 { total.add(&term) } else { total.sub(&term) };
    }
    total
}

/// `e_k` = sum of the principal `k × k` minors, for `k = 1..=n`. These are the
/// characteristic polynomial coefficients up to sign.
pub fn char_poly_coefficients(m: &[Vec<Cq>]) -> Vec<BigRational> {
    let n = m.len();
    let mut e = vec![BigRational::zero(); n + 1];
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Cq>> = idx.iter().map(|&r| idx.iter().map(|&c| m[r][c].clone()).collect()).collect();
        let d = det(&sub);
        assert!(d.im.is_zero(), "principal minor of a hermitian matrix is real");
        e[idx.len()] += d.re;
    }
    e.remove(0);
    e
}

/// A hermitian matrix is PSD iff every coefficient `e_k` is nonnegative.
pub fn psd_oracle(m: &[Vec<Scalar>]) -> bool {
    let q: Vec<Vec<Cq>> = m.iter().map(|row| row.iter().map(Cq::of).collect()).collect();
    char_poly_coefficients(&q).iter().all(|e| !e.is_negative())
}

pub fn loewner_oracle(a: &HermOp, b: &HermOp) -> bool {
    psd_oracle(&(b - a).to_matrix())
}

/// `p/q` with `|p| ≤ bound`, `1 ≤ q ≤ bound`.
pub fn random_rational(r: &mut ChaCha8Rng, bound: i64) -> Rational {
    BigRational::new(BigInt::from(r.gen_range(-bound..=bound)), BigInt::from(r.gen_range(1..=bound)))
}

pub fn random_complex(r: &mut ChaCha8Rng, bound: i64) -> Scalar {
    Scalar::complex(random_rational(r, bound), random_rational(r, bound))
}

pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<Vec<Scalar>> {
    let mut m = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        m[i][i] = Scalar::from_rational(random_rational(r, bound));
        for j in i + 1..n {
            let x = random_complex(r, bound);
            m[j][i] = x.conj();
            m[i][j] = x;
        }
    }
    m
}

/// `Σ_j |v_j⟩⟨v_j|` over `rank` random vectors; PSD of rank at most `rank`.
pub fn random_gram(r: &mut ChaCha8Rng, n: usize, rank: usize, bound: i64) -> Vec<Vec<Scalar>> {
    let mut m = vec![vec![Scalar::zero(); n]; n];
    for _ in 0..rank {
        let v: Vec<Scalar> = (0..n).map(|_| random_complex(r, bound)).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += &(&v[i] * &v[j].conj());
            }
        }
    }
    m
}

/// A hermitian matrix that is PSD, singular PSD, or indefinite with comparable odds.
pub fn random_mixed(r: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<Vec<Scalar>> {
    match r.gen_range(0..4) {
        0 => random_hermitian(r, n, bound),
        1 => random_gram(r, n, n, bound),
        2 => {
            let rank = r.gen_range(0..n);
            random_gram(r, n, rank, bound)
        }
        _ => {
            let mut m = random_gram(r, n, n, bound);
            let i = r.gen_range(0..n);
            m[i][i] = &m[i][i] - &Scalar::from_rational(random_rational(r, bound).abs());
            m
        }
    }
}

pub fn op(m: &[Vec<Scalar>]) -> HermOp {
    HermOp::embed(m).expect("generated matrices are hermitian")
}

/// Random unit vector on ranks `0..n`, with the norm carried by the divisor.
pub fn random_state(r: &mut ChaCha8Rng, n: u64, bound: i64) -> Ket {
    loop {
        let ket = Ket::from_amplitudes((0..n).map(|k| (StringIndex::from_rank(k), random_complex(r, bound))));
        let norm = ket.norm_sq();
        if let Some(d) = norm.as_rational().filter(|d| !d.is_zero()).cloned() {
            return ket.with_norm_divisor(d).expect("positive divisor");
        }
    }
}

pub fn w(bits: &str) -> StringIndex {
    StringIndex::from_bits(bits).expect("valid bit string")
}

/// `|a - b| ≤ 2^-n`, decided exactly on the squared modulus.
pub fn within_pow2(a: &Scalar, b: &Scalar, n: u32) -> bool {
    let d = (a - b).abs_sq();
    let bound = Scalar::from_rational(semidensity::field::pow2_neg(2 * n));
    matches!(d.cmp_real(&bound), Ok(std::cmp::Ordering::Less | std::cmp::Ordering::Equal))
}

pub fn fixture_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).expect("fixture exists")
}
