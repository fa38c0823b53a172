//! Linear cross-entropy benchmark values.
//!
//! * empirical: `(N/M) sum_m p(x_m) - 1` over a batch of exact samples;
//! * true: `N sum_x p(x)^2 - 1`, by enumeration or in closed form.
//!
//! `N = d^n`. Every estimate also carries `ln(XEB + 1)`, which stays finite
//! long after `N` itself overflows a double.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::distribution::WeightTable;
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, logsumexp, CompensatedSum};
use crate::oracle::{enumerate_pmf, EnumerationCap};
use crate::report::fmt_f64;
use crate::sampler::SampleBatch;

pub const XEB_CSV_HEADER: &str = "n,d,M,mode,value,log1p_value,stderr,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XebMode {
    /// `N` materialized as a double, as a straightforward implementation
    /// would. Overflows to `+inf` once `d^n` exceeds the double range.
    EmpiricalNaive,
    /// Log-sum-exp over the batch log-probabilities.
    EmpiricalLogspace,
    TrueBruteforce,
    TrueClosedform,
}

impl XebMode {
    pub const ALL: [XebMode; 4] = [
        XebMode::EmpiricalNaive,
        XebMode::EmpiricalLogspace,
        XebMode::TrueBruteforce,
        XebMode::TrueClosedform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            XebMode::EmpiricalNaive => "empirical_naive",
            XebMode::EmpiricalLogspace => "empirical_logspace",
            XebMode::TrueBruteforce => "true_bruteforce",
            XebMode::TrueClosedform => "true_closedform",
        }
    }

    pub fn is_empirical(self) -> bool {
        matches!(self, XebMode::EmpiricalNaive | XebMode::EmpiricalLogspace)
    }
}

impl fmt::Display for XebMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for XebMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        XebMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown XEB mode '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XebEstimate {
    pub n: usize,
    pub d: usize,
    /// Sample count; `None` for true-XEB results.
    pub samples: Option<usize>,
    pub mode: XebMode,
    /// The XEB; `+inf` on overflow.
    pub value: f64,
    /// `ln(XEB + 1)`.
    pub log1p_value: f64,
    /// Standard error of an empirical estimate, when representable.
    pub stderr: Option<f64>,
    /// Batch seed for empirical modes, table seed for true modes.
    pub seed: Option<u64>,
}

#[derive(Serialize)]
pub(crate) struct XebRecord {
    n: usize,
    d: usize,
    #[serde(rename = "M")]
    samples: Option<usize>,
    mode: XebMode,
    value: String,
    log1p_value: String,
    stderr: Option<String>,
    seed: Option<u64>,
}

impl XebEstimate {
    /// `n,d,M,mode,value,log1p_value,stderr,seed`; absent fields are empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            opt(self.samples.map(|m| m.to_string())),
            self.mode,
            fmt_f64(self.value),
            fmt_f64(self.log1p_value),
            opt(self.stderr.map(fmt_f64)),
            opt(self.seed.map(|s| s.to_string())),
        )
    }

    pub(crate) fn json_record(&self) -> XebRecord {
        XebRecord {
            n: self.n,
            d: self.d,
            samples: self.samples,
            mode: self.mode,
            value: fmt_f64(self.value),
            log1p_value: fmt_f64(self.log1p_value),
            stderr: self.stderr.map(fmt_f64),
            seed: self.seed,
        }
    }
}

/// `n ln d`, the log of the outcome count.
fn log_outcome_count(n: usize, d: usize) -> f64 {
    n as f64 * (d as f64).ln()
}

/// `d^n` as a double; `+inf` beyond the double range.
pub fn outcome_count_f64(n: usize, d: usize) -> f64 {
    (d as f64).powi(i32::try_from(n).unwrap_or(i32::MAX))
}

/// Empirical XEB of `batch`, whose log-probabilities must come from `table`.
pub fn empirical_xeb(table: &WeightTable, batch: &SampleBatch, mode: XebMode) -> Result<XebEstimate> {
    if batch.n() != table.n() || batch.d() != table.d() || batch.table_seed() != table.seed() {
        return Err(Error::invalid(format!(
            "batch was drawn for (n = {}, d = {}, table seed {}), table is (n = {}, d = {}, seed {})",
            batch.n(),
            batch.d(),
            batch.table_seed(),
            table.n(),
            table.d(),
            table.seed()
        )));
    }
    empirical_xeb_from_log_probs(table.n(), table.d(), batch.log_probs(), mode, batch.master_seed())
}

/// Empirical XEB from the log-probabilities `ln p(x_m)` of `M` samples.
pub fn empirical_xeb_from_log_probs(
    n: usize,
    d: usize,
    log_probs: &[f64],
    mode: XebMode,
    seed: u64,
) -> Result<XebEstimate> {
    if log_probs.is_empty() {
        return Err(Error::invalid("sample count M must be positive"));
    }
    if n == 0 || d < 2 {
        return Err(Error::invalid(format!("invalid shape n = {n}, d = {d}")));
    }
    let m = log_probs.len();
    let log_m = (m as f64).ln();
    let log1p_value = log_outcome_count(n, d) + (logsumexp(log_probs) - log_m);

    let (value, stderr) = match mode {
        XebMode::EmpiricalNaive => {
            let outcomes = outcome_count_f64(n, d);
            let mean_p = compensated_sum(log_probs.iter().map(|lp| lp.exp())) / m as f64;
            (outcomes * mean_p - 1.0, naive_stderr(outcomes, log_probs))
        }
        XebMode::EmpiricalLogspace => (log1p_value.exp_m1(), logspace_stderr(n, d, log_probs)),
        other => {
            return Err(Error::invalid(format!("{other} is not an empirical mode")));
        }
    };

    Ok(XebEstimate {
        n,
        d,
        samples: Some(m),
        mode,
        value,
        log1p_value,
        stderr,
        seed: Some(seed),
    })
}

/// Unbiased sample standard deviation of `values`, over `sqrt(M)`.
fn stderr_of(values: impl Iterator<Item = f64> + Clone, m: usize) -> Option<f64> {
    if m < 2 {
        return None;
    }
    let mean = compensated_sum(values.clone()) / m as f64;
    let ss = compensated_sum(values.map(|v| (v - mean) * (v - mean)));
    let se = (ss / (m - 1) as f64).sqrt() / (m as f64).sqrt();
    se.is_finite().then_some(se)
}

/// Works directly on `N p(x_m)`; absent as soon as those overflow.
fn naive_stderr(outcomes: f64, log_probs: &[f64]) -> Option<f64> {
    let values = log_probs.iter().map(move |lp| outcomes * lp.exp());
    if values.clone().any(|v| !v.is_finite()) {
        return None;
    }
    stderr_of(values, log_probs.len())
}

/// Factors `N p(x_m) = exp(n ln d + max) exp(ln p(x_m) - max)` so only the
/// final scale can overflow.
fn logspace_stderr(n: usize, d: usize, log_probs: &[f64]) -> Option<f64> {
    let max = log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let scaled = log_probs.iter().map(move |lp| (lp - max).exp());
    let unit = stderr_of(scaled, log_probs.len())?;
    let se = (log_outcome_count(n, d) + max + unit.ln()).exp();
    se.is_finite().then_some(se)
}

/// `N sum_x p(x)^2 - 1` by full enumeration of the pmf.
pub fn true_xeb_bruteforce(table: &WeightTable, cap: EnumerationCap) -> Result<XebEstimate> {
    let pmf = enumerate_pmf(table, cap)?;
    let value = pmf.true_xeb();
    Ok(XebEstimate {
        n: table.n(),
        d: table.d(),
        samples: None,
        mode: XebMode::TrueBruteforce,
        value,
        log1p_value: value.ln_1p(),
        stderr: None,
        seed: Some(table.seed()),
    })
}

/// `d sum_j w_i(j)^2` for each row. Each lies in `[1, d]`.
pub fn closed_form_factors(table: &WeightTable) -> Vec<f64> {
    let d = table.d() as f64;
    table
        .rows()
        .map(|row| d * compensated_sum(row.iter().map(|w| w * w)))
        .collect()
}

/// True XEB in O(nd): in carry space `p` is a product distribution, so
/// `sum_x p(x)^2 = prod_i sum_j w_i(j)^2`.
pub fn true_xeb_closed_form(table: &WeightTable) -> XebEstimate {
    let factors = closed_form_factors(table);
    let log1p_value = factors.iter().map(|f| f.ln()).collect::<CompensatedSum>().value();
    let product: f64 = factors.iter().product();
    // Near zero the subtraction would cancel, so expm1 is used there.
    let value = if product.is_finite() && product >= 2.0 {
        product - 1.0
    } else {
        log1p_value.exp_m1()
    };
    XebEstimate {
        n: table.n(),
        d: table.d(),
        samples: None,
        mode: XebMode::TrueClosedform,
        value,
        log1p_value,
        stderr: None,
        seed: Some(table.seed()),
    }
}
