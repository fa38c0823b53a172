//! Exact sampling and pointwise log-probabilities.
//!
//! Samples are drawn in carry space: each carry `c_i` is an independent
//! categorical draw from row `i`, and the digits are recovered as
//! `s_0 = c_0`, `s_i = c_i - c_{i-1} mod d`. Sample `m` of a batch reads only
//! the random stream `(master_seed, m)`, so batches are identical under any
//! thread count.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::distribution::{DigitString, WeightTable};
use crate::error::{Error, Result};
use crate::report::{fmt_f64, write_atomically};
use crate::rng::StreamRng;

/// Outcomes with at most this many index bits are written as decimal indices.
pub const DECIMAL_INDEX_MAX_BITS: u32 = 63;

/// Precomputed inverse-CDF tables for one weight table.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: usize,
    d: usize,
    cumulative: Vec<f64>,
    log_weights: Vec<f64>,
    /// Per row: the last index with positive weight, used when rounding
    /// leaves the final cumulative sum below the uniform draw.
    fallback: Vec<u32>,
}

impl Sampler {
    pub fn new(table: &WeightTable) -> Self {
        let (n, d) = (table.n(), table.d());
        let mut cumulative = Vec::with_capacity(n * d);
        let mut log_weights = Vec::with_capacity(n * d);
        let mut fallback = Vec::with_capacity(n);
        for row in table.rows() {
            let mut acc = 0.0;
            for &w in row {
                acc += w;
                cumulative.push(acc);
                log_weights.push(w.ln());
            }
            let last = row.iter().rposition(|&w| w > 0.0).expect("rows sum to one");
            fallback.push(last as u32);
        }
        Sampler {
            n,
            d,
            cumulative,
            log_weights,
            fallback,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// First index whose cumulative weight strictly exceeds `u`.
    #[inline]
    fn draw_carry(&self, row: usize, u: f64) -> u32 {
        let cum = &self.cumulative[row * self.d..(row + 1) * self.d];
        let j = cum.partition_point(|&c| c <= u);
        if j < self.d {
            j as u32
        } else {
            self.fallback[row]
        }
    }

    /// Draws sample `sample_index` into `digits` and returns its natural-log
    /// probability. `base` must be the fresh stream of the master seed.
    #[inline]
    fn draw_with(&self, base: &StreamRng, sample_index: u64, digits: &mut [u32]) -> f64 {
        debug_assert_eq!(digits.len(), self.n);
        let mut rng = base.clone();
        rng.set_stream(sample_index);
        let d = self.d as u32;
        let mut prev = 0u32;
        let mut log_p = 0.0;
        for (i, slot) in digits.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let carry = self.draw_carry(i, u);
            log_p += self.log_weights[i * self.d + carry as usize];
            *slot = if carry >= prev { carry - prev } else { carry + d - prev };
            prev = carry;
        }
        log_p
    }

    /// Same draw as [`draw_with`](Self::draw_with) without keeping digits.
    #[inline]
    fn draw_log_prob_with(&self, base: &StreamRng, sample_index: u64) -> f64 {
        let mut rng = base.clone();
        rng.set_stream(sample_index);
        let mut log_p = 0.0;
        for i in 0..self.n {
            let u: f64 = rng.random();
            let carry = self.draw_carry(i, u);
            log_p += self.log_weights[i * self.d + carry as usize];
        }
        log_p
    }

    /// Draws sample `sample_index` under `master_seed` into `digits`
    /// (length `n`) and returns `ln p` of the drawn outcome.
    pub fn draw_into(&self, sample_index: u64, master_seed: u64, digits: &mut [u32]) -> f64 {
        assert_eq!(digits.len(), self.n, "digit buffer length must equal n");
        self.draw_with(&StreamRng::seed_from_u64(master_seed), sample_index, digits)
    }

    pub fn draw(&self, sample_index: u64, master_seed: u64) -> (DigitString, f64) {
        let mut digits = vec![0; self.n];
        let log_p = self.draw_into(sample_index, master_seed, &mut digits);
        (DigitString::from_trusted(digits, self.d), log_p)
    }

    /// `sum_i ln w_i(c_i)` over the carries of `s`.
    pub fn log_prob(&self, s: &DigitString) -> Result<f64> {
        if s.len() != self.n || s.base() != self.d {
            return Err(Error::invalid(format!(
                "digit string has shape (n = {}, d = {}), table has (n = {}, d = {})",
                s.len(),
                s.base(),
                self.n,
                self.d
            )));
        }
        let mut carry = 0usize;
        let mut log_p = 0.0;
        for (i, &digit) in s.digits().iter().enumerate() {
            carry = (carry + digit as usize) % self.d;
            log_p += self.log_weights[i * self.d + carry];
        }
        Ok(log_p)
    }

    /// Log-probabilities of samples `0..count`, without storing outcomes.
    pub fn draw_log_probs(&self, count: usize, master_seed: u64) -> Vec<f64> {
        let base = StreamRng::seed_from_u64(master_seed);
        let mut out = vec![0.0; count];
        out.par_iter_mut()
            .enumerate()
            .with_min_len(256)
            .for_each(|(m, slot)| *slot = self.draw_log_prob_with(&base, m as u64));
        out
    }

    fn fill_batch(&self, digits: &mut [u32], log_probs: &mut [f64], master_seed: u64) {
        let base = StreamRng::seed_from_u64(master_seed);
        digits
            .par_chunks_mut(self.n)
            .zip(log_probs.par_iter_mut())
            .enumerate()
            .with_min_len(64)
            .for_each(|(m, (row, slot))| *slot = self.draw_with(&base, m as u64, row));
    }
}

/// `M` outcomes of one table, stored flat, with their log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    d: usize,
    master_seed: u64,
    table_seed: u64,
    digits: Vec<u32>,
    log_probs: Vec<f64>,
}

impl SampleBatch {
    /// Batch of explicitly chosen outcomes; log-probabilities come from
    /// `table`.
    pub fn from_samples(table: &WeightTable, samples: &[DigitString], master_seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a batch needs at least one sample"));
        }
        let sampler = Sampler::new(table);
        let mut digits = Vec::with_capacity(samples.len() * table.n());
        let mut log_probs = Vec::with_capacity(samples.len());
        for s in samples {
            log_probs.push(sampler.log_prob(s)?);
            digits.extend_from_slice(s.digits());
        }
        Ok(SampleBatch {
            n: table.n(),
            d: table.d(),
            master_seed,
            table_seed: table.seed(),
            digits,
            log_probs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Seed of the table the batch was drawn from.
    pub fn table_seed(&self) -> u64 {
        self.table_seed
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn digits(&self, m: usize) -> &[u32] {
        &self.digits[m * self.n..(m + 1) * self.n]
    }

    pub fn sample(&self, m: usize) -> DigitString {
        DigitString::from_trusted(self.digits(m).to_vec(), self.d)
    }

    pub fn samples(&self) -> impl Iterator<Item = DigitString> + '_ {
        (0..self.len()).map(|m| self.sample(m))
    }

    /// Writes `sample_index,x_or_digits,log_prob`. Outcomes of at most 63
    /// index bits are decimal indices, longer ones digit strings with the
    /// most significant digit last.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomically(path, |w| {
            write_batch_header(w)?;
            for m in 0..self.len() {
                write_batch_row(w, m as u64, &self.sample(m), self.log_probs[m])?;
            }
            Ok(())
        })
    }
}

pub(crate) fn write_batch_header(w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "sample_index,x_or_digits,log_prob")
}

pub(crate) fn write_batch_row(
    w: &mut dyn Write,
    index: u64,
    s: &DigitString,
    log_prob: f64,
) -> std::io::Result<()> {
    writeln!(w, "{index},{},{}", outcome_label(s), fmt_f64(log_prob))
}

/// Decimal index when it fits in 63 bits, else the digit string.
pub fn outcome_label(s: &DigitString) -> String {
    match s.to_index_u64() {
        Some(x) if fits_decimal(s.len(), s.base()) => x.to_string(),
        _ => s.to_base_string(),
    }
}

fn fits_decimal(n: usize, d: usize) -> bool {
    u32::try_from(n)
        .ok()
        .and_then(|n| (d as u64).checked_pow(n))
        .is_some_and(|count| count <= 1u64 << DECIMAL_INDEX_MAX_BITS)
}

/// One exact sample; a pure function of `(table, sample_index, master_seed)`.
pub fn draw_sample(table: &WeightTable, sample_index: u64, master_seed: u64) -> DigitString {
    Sampler::new(table).draw(sample_index, master_seed).0
}

/// Samples `0..count` with log-probabilities, on the global thread pool.
pub fn draw_batch(table: &WeightTable, count: usize, master_seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::invalid("sample count M must be positive"));
    }
    let sampler = Sampler::new(table);
    let mut digits = vec![0u32; count * table.n()];
    let mut log_probs = vec![0.0; count];
    sampler.fill_batch(&mut digits, &mut log_probs, master_seed);
    Ok(SampleBatch {
        n: table.n(),
        d: table.d(),
        master_seed,
        table_seed: table.seed(),
        digits,
        log_probs,
    })
}

/// [`draw_batch`] on a dedicated pool of `workers` threads.
pub fn draw_batch_with_workers(
    table: &WeightTable,
    count: usize,
    master_seed: u64,
    workers: usize,
) -> Result<SampleBatch> {
    if workers == 0 {
        return Err(Error::invalid("worker count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| draw_batch(table, count, master_seed))
}

/// Log-probabilities of `count` samples without keeping the outcomes.
/// Equal to `draw_batch(..).log_probs()`.
pub fn draw_log_probs(table: &WeightTable, count: usize, master_seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("sample count M must be positive"));
    }
    Ok(Sampler::new(table).draw_log_probs(count, master_seed))
}

/// Natural-log probability of `s`; `-inf` when the path hits a zero weight.
pub fn log_prob(table: &WeightTable, s: &DigitString) -> Result<f64> {
    Sampler::new(table).log_prob(s)
}
