//! Sampling and enumeration timings, and the `d^n` extrapolation of
//! enumeration cost. Extrapolated quantities are carried as `log10` values
//! only; the linear-scale seconds would not fit in a double.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::distribution::WeightTable;
use crate::error::{Error, Result};
use crate::oracle::{enumerate_pmf, EnumerationCap};
use crate::sampler::Sampler;

/// Seconds per Julian year (365.25 days).
pub const JULIAN_YEAR_SECONDS: f64 = 31_557_600.0;

const WARMUP_SAMPLES: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Sampling,
    Enumeration,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Sampling => "sampling",
            Task::Enumeration => "enumeration",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRecord {
    pub task: Task,
    pub n: usize,
    pub d: usize,
    /// Samples drawn, or pmf entries for enumeration.
    #[serde(rename = "M")]
    pub items: u64,
    pub wall_seconds: f64,
    pub per_item_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageReport {
    pub log10_enum_seconds: f64,
    pub log10_enum_years: f64,
    pub log10_per_sample_seconds: f64,
    pub log10_advantage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub d: usize,
    pub n_ref: usize,
    pub n_target: usize,
    pub ref_seconds: f64,
    /// `measured` or `supplied`.
    pub source: String,
    pub log10_enum_seconds: f64,
}

/// What `xeb bench` writes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub timings: Vec<TimingRecord>,
    pub extrapolation: Extrapolation,
    pub advantage: AdvantageReport,
}

/// Times `count` single-threaded draws, after an untimed warm-up. Each draw
/// produces the digits and log-probability of one sample, as `draw_batch`
/// does, into a reused buffer.
pub fn time_sampling(table: &WeightTable, count: u64, master_seed: u64) -> Result<TimingRecord> {
    if count == 0 {
        return Err(Error::invalid("sample count M must be positive"));
    }
    let sampler = Sampler::new(table);
    let mut digits = vec![0u32; table.n()];
    for m in 0..WARMUP_SAMPLES.min(count) {
        black_box(sampler.draw_into(u64::MAX - m, master_seed, &mut digits));
    }
    let start = Instant::now();
    let mut acc = 0.0;
    for m in 0..count {
        acc += sampler.draw_into(m, master_seed, &mut digits);
        black_box(&digits);
    }
    black_box(acc);
    let wall = positive(start.elapsed().as_secs_f64());
    Ok(TimingRecord {
        task: Task::Sampling,
        n: table.n(),
        d: table.d(),
        items: count,
        wall_seconds: wall,
        per_item_seconds: wall / count as f64,
    })
}

/// Times one full enumeration of the pmf.
pub fn time_enumeration(table: &WeightTable, cap: EnumerationCap) -> Result<TimingRecord> {
    let entries = cap.admit("timing enumeration", table.n(), table.d())? as u64;
    let start = Instant::now();
    let pmf = enumerate_pmf(table, cap)?;
    black_box(pmf.probs());
    let wall = positive(start.elapsed().as_secs_f64());
    drop(pmf);
    Ok(TimingRecord {
        task: Task::Enumeration,
        n: table.n(),
        d: table.d(),
        items: entries,
        wall_seconds: wall,
        per_item_seconds: wall / entries as f64,
    })
}

/// Clock resolution can report zero for tiny workloads.
fn positive(seconds: f64) -> f64 {
    seconds.max(1e-9)
}

/// `log10` seconds to enumerate `d^n_target` outcomes, scaling a reference
/// time at `n_ref` by `d^(n_target - n_ref)`.
pub fn extrapolate_enum_time(t_ref_seconds: f64, n_ref: usize, n_target: usize, d: usize) -> Result<f64> {
    if !(t_ref_seconds.is_finite() && t_ref_seconds > 0.0) {
        return Err(Error::invalid(format!(
            "reference time must be positive, got {t_ref_seconds}"
        )));
    }
    if d < 2 {
        return Err(Error::invalid(format!("alphabet size d must be at least 2, got {d}")));
    }
    let steps = n_target as f64 - n_ref as f64;
    Ok(t_ref_seconds.log10() + steps * (d as f64).log10())
}

/// Enumeration time over per-sample time, in `log10`.
pub fn advantage_ratio(log10_enum_seconds: f64, per_sample_seconds: f64) -> Result<AdvantageReport> {
    if !(per_sample_seconds.is_finite() && per_sample_seconds > 0.0) {
        return Err(Error::invalid(format!(
            "per-sample time must be positive, got {per_sample_seconds}"
        )));
    }
    if !log10_enum_seconds.is_finite() {
        return Err(Error::invalid("log10 enumeration time must be finite"));
    }
    let log10_per_sample_seconds = per_sample_seconds.log10();
    Ok(AdvantageReport {
        log10_enum_seconds,
        log10_enum_years: log10_enum_seconds - JULIAN_YEAR_SECONDS.log10(),
        log10_per_sample_seconds,
        log10_advantage: log10_enum_seconds - log10_per_sample_seconds,
    })
}
