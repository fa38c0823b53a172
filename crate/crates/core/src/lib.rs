//! Exact sampling from product-form distributions over `d^n` digit strings,
//! pointwise probabilities, and linear cross-entropy benchmark (XEB) values.
//!
//! ```
//! use xeb_core::{draw_batch, empirical_xeb, generate_weight_table, true_xeb_closed_form, XebMode};
//!
//! let table = generate_weight_table(64, 2, 42).unwrap();
//! let batch = draw_batch(&table, 10_000, 7).unwrap();
//! let empirical = empirical_xeb(&table, &batch, XebMode::EmpiricalLogspace).unwrap();
//! let truth = true_xeb_closed_form(&table);
//! assert!((empirical.value - truth.value).abs() < 6.0 * empirical.stderr.unwrap());
//! ```

pub mod bench;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod xeb;

pub use bench::{
    advantage_ratio, extrapolate_enum_time, time_enumeration, time_sampling, AdvantageReport,
    BenchReport, TimingRecord,
};
pub use distribution::{
    digits_to_index, generate_weight_table, index_to_digits, normalize_pmf, DigitString,
    WeightTable,
};
pub use error::{Error, Result};
pub use oracle::{empirical_histogram, enumerate_pmf, total_variation, DensePmf, EnumerationCap};
pub use sampler::{draw_batch, draw_batch_with_workers, draw_sample, log_prob, SampleBatch, Sampler};
pub use xeb::{
    empirical_xeb, true_xeb_bruteforce, true_xeb_closed_form, XebEstimate, XebMode,
};
