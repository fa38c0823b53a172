//! Dense ground truth for small outcome spaces.

use std::io::Write;
use std::path::Path;

use crate::distribution::WeightTable;
use crate::error::{Error, Result};
use crate::numerics::compensated_sum;
use crate::report::{fmt_f64, write_atomically};
use crate::sampler::SampleBatch;

/// Largest dense pmf materialized unless configured otherwise.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;
/// Opt-in cap matching 30 binary digits.
pub const EXTENDED_ENUMERATION_CAP: u64 = 1 << 30;

/// Bound on the number of entries of a dense pmf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(u64);

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap(DEFAULT_ENUMERATION_CAP)
    }
}

impl EnumerationCap {
    pub fn new(entries: u64) -> Result<Self> {
        if entries == 0 {
            return Err(Error::invalid("enumeration cap must be positive"));
        }
        Ok(EnumerationCap(entries))
    }

    pub fn extended() -> Self {
        EnumerationCap(EXTENDED_ENUMERATION_CAP)
    }

    pub fn entries(self) -> u64 {
        self.0
    }

    /// `d^n` as a length, or a resource-limit error naming the cap.
    pub fn admit(self, what: &'static str, n: usize, d: usize) -> Result<usize> {
        let count = u32::try_from(n).ok().and_then(|n| (d as u64).checked_pow(n));
        match count {
            Some(c) if c <= self.0 && usize::try_from(c).is_ok() => Ok(c as usize),
            _ => Err(Error::ResourceLimit {
                what,
                requested: match count {
                    Some(c) => c.to_string(),
                    None => format!("{d}^{n}"),
                },
                cap: self.0,
            }),
        }
    }
}

/// A complete pmf over `0..d^n`, indexed by `x = sum_i s_i d^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePmf {
    n: usize,
    d: usize,
    probs: Vec<f64>,
}

impl DensePmf {
    pub fn new(n: usize, d: usize, probs: Vec<f64>) -> Result<Self> {
        let expected = u32::try_from(n).ok().and_then(|n| (d as u64).checked_pow(n));
        if expected != Some(probs.len() as u64) {
            return Err(Error::invalid(format!(
                "{} probabilities do not cover {d}^{n} outcomes",
                probs.len()
            )));
        }
        Ok(DensePmf { n, d, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn sum_of_squares(&self) -> f64 {
        compensated_sum(self.probs.iter().map(|p| p * p))
    }

    /// `N sum_x p(x)^2 - 1`.
    pub fn true_xeb(&self) -> f64 {
        self.probs.len() as f64 * self.sum_of_squares() - 1.0
    }

    /// `x,p` rows in ascending `x`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomically(path, |w| self.write_csv_to(w))
    }

    pub fn write_csv_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "x,p")?;
        for (x, p) in self.probs.iter().enumerate() {
            writeln!(w, "{x},{}", fmt_f64(*p))?;
        }
        Ok(())
    }
}

/// Every `p(x)`, built one digit position at a time.
///
/// After step `i` the first `d^(i+1)` entries hold the marginal of digits
/// `s_0..s_i`. Step `i + 1` extends each entry `x` to the `d` entries
/// `x + s d^(i+1)`, using the running digit sum of `x` mod `d` (kept with an
/// odometer) as the carry. Total work is O(d^n).
pub fn enumerate_pmf(table: &WeightTable, cap: EnumerationCap) -> Result<DensePmf> {
    let (n, d) = (table.n(), table.d());
    let total = cap.admit("enumerating the pmf", n, d)?;
    let mut probs = vec![0.0; total];
    probs[..d].copy_from_slice(table.row(0));

    let mut odometer: Vec<usize> = Vec::with_capacity(n);
    let mut block = d;
    for i in 1..n {
        let row = table.row(i);
        odometer.clear();
        odometer.resize(i, 0);
        let mut carry = 0usize;
        for x in 0..block {
            let p = probs[x];
            for s in 1..d {
                let mut c = carry + s;
                if c >= d {
                    c -= d;
                }
                probs[x + s * block] = p * row[c];
            }
            probs[x] = p * row[carry];

            // x -> x + 1: bump the least significant digits, tracking their
            // sum mod d.
            for digit in odometer.iter_mut() {
                *digit += 1;
                carry = if carry + 1 == d { 0 } else { carry + 1 };
                if *digit < d {
                    break;
                }
                // Wrapping subtracts d, which leaves the sum mod d unchanged.
                *digit = 0;
            }
        }
        block *= d;
    }
    Ok(DensePmf { n, d, probs })
}

/// Relative frequency of each outcome in `batch`.
pub fn empirical_histogram(batch: &SampleBatch, cap: EnumerationCap) -> Result<DensePmf> {
    let total = cap.admit("building the histogram", batch.n(), batch.d())?;
    let mut counts = vec![0u64; total];
    let d = batch.d() as u64;
    for m in 0..batch.len() {
        let x = batch
            .digits(m)
            .iter()
            .rev()
            .fold(0u64, |acc, &s| acc * d + s as u64);
        counts[x as usize] += 1;
    }
    let m = batch.len() as f64;
    Ok(DensePmf {
        n: batch.n(),
        d: batch.d(),
        probs: counts.into_iter().map(|c| c as f64 / m).collect(),
    })
}

/// `(1/2) sum_x |a(x) - b(x)|`.
pub fn total_variation(a: &DensePmf, b: &DensePmf) -> Result<f64> {
    if a.n != b.n || a.d != b.d {
        return Err(Error::invalid(format!(
            "pmfs over different spaces: (n = {}, d = {}) vs (n = {}, d = {})",
            a.n, a.d, b.n, b.d
        )));
    }
    Ok(0.5 * compensated_sum(a.probs.iter().zip(&b.probs).map(|(p, q)| (p - q).abs())))
}
