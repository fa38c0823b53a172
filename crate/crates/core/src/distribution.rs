//! Weight-table parameterization of the digit distribution.
//!
//! An outcome is a string of `n` base-`d` digits `s_0 .. s_{n-1}` with index
//! `x = sum_i s_i d^i` (so `s_0` is the least significant digit). Its
//! probability is a product of per-row factors:
//!
//! ```text
//! p(s) = prod_i w_i(c_i),   c_i = (s_0 + ... + s_i) mod d
//! ```
//!
//! The map from digits to carries `c_i` is a bijection, which is what makes
//! sampling, pointwise evaluation and the true XEB all O(nd).

use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::distr::{Distribution, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Row sums must equal one within this absolute tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// The `n x d` weights. Row `i` is the pmf of the carry `c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    n: usize,
    d: usize,
    weights: Vec<f64>,
    seed: u64,
}

/// Outcome as `n` base-`d` digits, least significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitString {
    digits: Vec<u32>,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    format_version: u32,
    n: usize,
    d: usize,
    seed: u64,
    rows: Vec<Vec<f64>>,
}

fn check_alphabet(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("alphabet size d must be at least 2, got {d}")));
    }
    if d > u32::MAX as usize {
        return Err(Error::invalid(format!("alphabet size d = {d} does not fit in 32 bits")));
    }
    Ok(())
}

/// Scales non-negative weights to sum to one.
pub fn normalize_pmf(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(Error::invalid(format!("pmf needs at least 2 entries, got {}", raw.len())));
    }
    if let Some(bad) = raw.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(format!("pmf entries must be finite and non-negative, got {bad}")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("pmf entries sum to zero"));
    }
    Ok(raw.iter().map(|v| v / total).collect())
}

/// Draws every weight uniformly from the open interval (0, 1) and normalizes
/// each row. Pure in `(n, d, seed)`.
pub fn generate_weight_table(n: usize, d: usize, seed: u64) -> Result<WeightTable> {
    if n == 0 {
        return Err(Error::invalid("digit count n must be positive"));
    }
    check_alphabet(d)?;
    let mut rng = rng::stream(seed, rng::TABLE_STREAM);
    let mut weights = Vec::with_capacity(n * d);
    let mut raw = vec![0.0; d];
    for _ in 0..n {
        for v in raw.iter_mut() {
            *v = Open01.sample(&mut rng);
        }
        weights.extend(normalize_pmf(&raw)?);
    }
    Ok(WeightTable { n, d, weights, seed })
}

impl WeightTable {
    /// Builds a table from explicit rows. Zero weights are allowed.
    pub fn from_rows(rows: &[Vec<f64>], seed: u64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("weight table needs at least one row"));
        }
        let d = rows[0].len();
        check_alphabet(d)?;
        let mut weights = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
                return Err(Error::invalid(format!("row {i} has weight {bad} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(format!("row {i} sums to {sum}, not 1")));
            }
            weights.extend_from_slice(row);
        }
        Ok(WeightTable {
            n: rows.len(),
            d,
            weights,
            seed,
        })
    }

    /// Every row uniform: `p(x) = 1/d^n`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("digit count n must be positive"));
        }
        check_alphabet(d)?;
        Self::from_rows(&vec![vec![1.0 / d as f64; d]; n], 0)
    }

    /// All mass on carry 0 in every row, hence on the all-zero outcome.
    pub fn point_mass(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("digit count n must be positive"));
        }
        check_alphabet(d)?;
        let mut row = vec![0.0; d];
        row[0] = 1.0;
        Self::from_rows(&vec![row; n], 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.d)
    }

    /// `log2(d^n)`, the bit width of an outcome index.
    pub fn index_bits(&self) -> f64 {
        self.n as f64 * (self.d as f64).log2()
    }

    /// `d^n` if it fits in a `u64`.
    pub fn outcome_count(&self) -> Option<u64> {
        (self.d as u64).checked_pow(u32::try_from(self.n).ok()?)
    }

    /// Pmf of digit `s_i` given the carry `t = s_0 + ... + s_{i-1} mod d`
    /// of the digits before it. Entry `s` is `w_i((t + s) mod d)`.
    pub fn conditional_pmf(&self, i: usize, carry: usize) -> Result<Vec<f64>> {
        if i >= self.n {
            return Err(Error::invalid(format!("row index {i} out of range for n = {}", self.n)));
        }
        if carry >= self.d {
            return Err(Error::invalid(format!("carry {carry} out of range for d = {}", self.d)));
        }
        let row = self.row(i);
        Ok((0..self.d).map(|s| row[(carry + s) % self.d]).collect())
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            format_version: TABLE_FORMAT_VERSION,
            n: self.n,
            d: self.d,
            seed: self.seed,
            rows: self.rows().map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string_pretty(&file).expect("table serialization cannot fail")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| Error::format(origin, e.to_string()))?;
        if file.format_version != TABLE_FORMAT_VERSION {
            return Err(Error::format(
                origin,
                format!("unsupported format_version {}", file.format_version),
            ));
        }
        if file.rows.len() != file.n {
            return Err(Error::format(
                origin,
                format!("n = {} but {} rows present", file.n, file.rows.len()),
            ));
        }
        if let Some(row) = file.rows.iter().find(|r| r.len() != file.d) {
            return Err(Error::format(
                origin,
                format!("d = {} but a row has {} entries", file.d, row.len()),
            ));
        }
        Self::from_rows(&file.rows, file.seed).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::report::write_atomically(path.as_ref(), |w| {
            w.write_all(self.to_json().as_bytes())?;
            w.write_all(b"\n")
        })
    }
}

impl DigitString {
    pub fn new(digits: Vec<u32>, d: usize) -> Result<Self> {
        check_alphabet(d)?;
        if digits.is_empty() {
            return Err(Error::invalid("digit string must have at least one digit"));
        }
        if let Some(bad) = digits.iter().find(|&&s| s as usize >= d) {
            return Err(Error::invalid(format!("digit {bad} out of range for d = {d}")));
        }
        Ok(DigitString { digits, d })
    }

    /// Caller guarantees every digit is below `d`.
    pub(crate) fn from_trusted(digits: Vec<u32>, d: usize) -> Self {
        debug_assert!(digits.iter().all(|&s| (s as usize) < d));
        DigitString { digits, d }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn base(&self) -> usize {
        self.d
    }

    /// Running sums `c_i = s_0 + ... + s_i mod d`.
    pub fn carries(&self) -> Vec<u32> {
        let d = self.d as u64;
        let mut acc = 0u64;
        self.digits
            .iter()
            .map(|&s| {
                acc = (acc + s as u64) % d;
                acc as u32
            })
            .collect()
    }

    /// Inverse of [`carries`](Self::carries).
    pub fn from_carries(carries: &[u32], d: usize) -> Result<Self> {
        check_alphabet(d)?;
        if let Some(bad) = carries.iter().find(|&&c| c as usize >= d) {
            return Err(Error::invalid(format!("carry {bad} out of range for d = {d}")));
        }
        let mut prev = 0u64;
        let digits = carries
            .iter()
            .map(|&c| {
                let s = (c as u64 + d as u64 - prev) % d as u64;
                prev = c as u64;
                s as u32
            })
            .collect();
        Self::new(digits, d)
    }

    /// Exact index `sum_i s_i d^i`.
    pub fn to_index(&self) -> BigUint {
        digits_to_index(self)
    }

    /// Index as `u64`, or `None` when it needs more than 64 bits.
    pub fn to_index_u64(&self) -> Option<u64> {
        let d = self.d as u64;
        self.digits
            .iter()
            .rev()
            .try_fold(0u64, |acc, &s| acc.checked_mul(d)?.checked_add(s as u64))
    }

    /// Digits in storage order, `s_0` first and the most significant digit
    /// last. Digits are `0-9a-z` when `d <= 36`, else dot-separated decimals.
    pub fn to_base_string(&self) -> String {
        if self.d <= 36 {
            self.digits
                .iter()
                .map(|&s| char::from_digit(s, self.d as u32).expect("digit below base"))
                .collect()
        } else {
            let parts: Vec<String> = self.digits.iter().map(u32::to_string).collect();
            parts.join(".")
        }
    }

    /// Parses [`to_base_string`](Self::to_base_string) output.
    pub fn from_base_string(text: &str, d: usize) -> Result<Self> {
        check_alphabet(d)?;
        let parsed: Option<Vec<u32>> = if d <= 36 {
            text.chars().map(|c| c.to_digit(d as u32)).collect()
        } else {
            text.split('.').map(|p| p.parse().ok()).collect()
        };
        let digits =
            parsed.ok_or_else(|| Error::invalid(format!("'{text}' is not a base-{d} digit string")))?;
        Self::new(digits, d)
    }
}

/// Exact index `x = sum_i s_i d^i` of a digit string.
pub fn digits_to_index(s: &DigitString) -> BigUint {
    let base = BigUint::from(s.d);
    s.digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &digit| acc * &base + BigUint::from(digit))
}

/// The `n` base-`d` digits of `x`, least significant first.
pub fn index_to_digits(x: &BigUint, n: usize, d: usize) -> Result<DigitString> {
    check_alphabet(d)?;
    if n == 0 {
        return Err(Error::invalid("digit count n must be positive"));
    }
    let base = BigUint::from(d);
    let mut rest = x.clone();
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        let digit = (&rest % &base).to_u32().expect("remainder below base");
        digits.push(digit);
        rest /= &base;
    }
    if !rest.is_zero() {
        return Err(Error::OutOfRange {
            index: x.to_string(),
            n,
            d,
        });
    }
    Ok(DigitString { digits, d })
}

/// `u64` fast path of [`index_to_digits`].
pub fn index_to_digits_u64(mut x: u64, n: usize, d: usize) -> Result<DigitString> {
    check_alphabet(d)?;
    if n == 0 {
        return Err(Error::invalid("digit count n must be positive"));
    }
    let original = x;
    let base = d as u64;
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        digits.push((x % base) as u32);
        x /= base;
    }
    if x != 0 {
        return Err(Error::OutOfRange {
            index: original.to_string(),
            n,
            d,
        });
    }
    Ok(DigitString { digits, d })
}
