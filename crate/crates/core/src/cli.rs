//! The `xeb` command-line driver.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bench::{
    advantage_ratio, extrapolate_enum_time, time_enumeration, time_sampling, BenchReport,
    Extrapolation,
};
use crate::distribution::{generate_weight_table, WeightTable};
use crate::error::{Error, Result};
use crate::oracle::{empirical_histogram, enumerate_pmf, total_variation, EnumerationCap};
use crate::report::{emit_report, write_atomically, ReportFormat, ReportRows};
use crate::rng::derive_seed;
use crate::sampler::{draw_batch, draw_log_probs, write_batch_header, write_batch_row, Sampler};
use crate::xeb::{
    empirical_xeb_from_log_probs, true_xeb_bruteforce, true_xeb_closed_form, XebEstimate, XebMode,
};

pub const OUT_DIR_ENV: &str = "XEB_OUT_DIR";
pub const DEFAULT_SWEEP_GRID: &str = "2..30";
pub const DEFAULT_BIGSWEEP_GRID: &str = "100..1000:10,1023";

/// Key under which a sweep point's batch seed is derived from its table seed.
const BATCH_SEED_KEY: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "xeb",
    version,
    about = "Sample product-form digit distributions and compute linear cross-entropy benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random weight table and write it as JSON.
    Gen(GenArgs),
    /// Draw a batch of samples and write them as CSV.
    Sample(SampleArgs),
    /// Compute one XEB estimate.
    Xeb(XebArgs),
    /// Empirical and true XEB over a grid of small n (fresh table per n).
    Sweep(SweepArgs),
    /// Empirical XEB (both modes) and closed-form truth over a grid of large n.
    Bigsweep(SweepArgs),
    /// Exact and empirical pmf of one table as `x,p` CSVs.
    Pmf(PmfArgs),
    /// Time sampling and enumeration and report the extrapolated advantage.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file. Defaults to a fixed name inside the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for outputs written without --out.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

impl OutputArgs {
    fn resolve(&self, default_name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| self.out_dir.join(default_name))
    }
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Largest number of pmf entries to materialize.
    #[arg(long, value_parser = parse_count, default_value_t = crate::oracle::DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    /// Raise the cap to 2^30 entries (about 8 GiB).
    #[arg(long)]
    pub allow_large_enum: bool,
}

impl CapArgs {
    fn cap(&self) -> Result<EnumerationCap> {
        if self.allow_large_enum {
            Ok(EnumerationCap::extended())
        } else {
            EnumerationCap::new(self.cap)
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Weight-table JSON file.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long = "M", alias = "m", value_parser = parse_count, default_value = "1000000")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    Logspace,
    Bruteforce,
    Closedform,
}

impl From<ModeArg> for XebMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Naive => XebMode::EmpiricalNaive,
            ModeArg::Logspace => XebMode::EmpiricalLogspace,
            ModeArg::Bruteforce => XebMode::TrueBruteforce,
            ModeArg::Closedform => XebMode::TrueClosedform,
        }
    }
}

#[derive(Debug, Args)]
pub struct XebArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_enum, default_value = "logspace")]
    pub mode: ModeArg,
    #[arg(long = "M", alias = "m", value_parser = parse_count, default_value = "1000000")]
    pub samples: u64,
    /// Batch seed for empirical modes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Grid of n: comma-separated items `a`, `a..b` or `a..b:step` (inclusive).
    /// Defaults to 2..30 for sweep and 100..1000:10,1023 for bigsweep.
    #[arg(long = "n", value_parser = parse_n_list)]
    pub grid: Option<NList>,
    #[arg(long = "M", alias = "m", value_parser = parse_count, default_value = "1000000")]
    pub samples: u64,
    /// Master seed; point n uses table seed derive(seed, n).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long = "M", alias = "m", value_parser = parse_count, default_value = "1000000")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cap: CapArgs,
    #[arg(long)]
    pub out_exact: Option<PathBuf>,
    #[arg(long)]
    pub out_empirical: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Digits per sample for the sampling timing and extrapolation target.
    #[arg(long, default_value_t = 1023)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "M", alias = "m", value_parser = parse_count, default_value = "100000")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Digits of the table whose enumeration is timed.
    #[arg(long, default_value_t = 20)]
    pub enum_n: usize,
    /// Use this enumeration time (seconds) at --ref-n instead of measuring.
    #[arg(long, requires = "ref_n")]
    pub ref_seconds: Option<f64>,
    #[arg(long, requires = "ref_seconds")]
    pub ref_n: Option<usize>,
    /// Use this per-sample time (seconds) instead of measuring.
    #[arg(long)]
    pub per_sample_seconds: Option<f64>,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Sorted, de-duplicated digit counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

/// Parses `2..30`, `100..1000:10,1023`, `5`, ...
pub fn parse_n_list(text: &str) -> std::result::Result<NList, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (range, step) = match item.split_once(':') {
            Some((r, s)) => (r, s.parse::<usize>().map_err(|_| format!("bad step in '{item}'"))?),
            None => (item, 1),
        };
        if step == 0 {
            return Err(format!("zero step in '{item}'"));
        }
        let (lo, hi) = match range.split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (range, range),
        };
        let lo: usize = lo.trim().parse().map_err(|_| format!("bad bound in '{item}'"))?;
        let hi: usize = hi.trim().parse().map_err(|_| format!("bad bound in '{item}'"))?;
        if lo == 0 || hi < lo {
            return Err(format!("empty or zero range '{item}'"));
        }
        out.extend((lo..=hi).step_by(step));
    }
    if out.is_empty() {
        return Err("empty n list".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(NList(out))
}

/// Positive integer, also accepting exact scientific forms like `1e6`.
pub fn parse_count(text: &str) -> std::result::Result<u64, String> {
    let text = text.trim().replace('_', "");
    let value = match text.parse::<u64>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = text.parse().map_err(|_| format!("'{text}' is not a count"))?;
            if !(f.is_finite() && f.fract() == 0.0 && f >= 0.0 && f <= u64::MAX as f64) {
                return Err(format!("'{text}' is not a whole number"));
            }
            f as u64
        }
    };
    if value == 0 {
        return Err("count must be positive".into());
    }
    Ok(value)
}

fn count_to_usize(count: u64) -> Result<usize> {
    usize::try_from(count).map_err(|_| Error::invalid(format!("count {count} too large")))
}

fn log(line: std::fmt::Arguments<'_>) {
    eprintln!("xeb: {line}");
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("xeb: error: {e}");
            1
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Xeb(a) => cmd_xeb(a),
        Command::Sweep(a) => cmd_sweep(a, false),
        Command::Bigsweep(a) => cmd_sweep(a, true),
        Command::Pmf(a) => cmd_pmf(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let table = generate_weight_table(a.n, a.d, a.seed)?;
    let path = a.output.resolve(&format!("table_n{}_d{}_s{}.json", a.n, a.d, a.seed));
    table.save(&path)?;
    log(format_args!("wrote {}", path.display()));
    Ok(())
}

/// Drawn in parallel chunks and streamed out, so memory stays bounded for
/// any `M`.
fn cmd_sample(a: &SampleArgs) -> Result<()> {
    const CHUNK: u64 = 1 << 14;
    let table = WeightTable::load(&a.table)?;
    let sampler = Sampler::new(&table);
    let path = a.output.resolve("batch.csv");
    write_atomically(&path, |w| {
        write_batch_header(w)?;
        let mut start = 0;
        while start < a.samples {
            let end = (start + CHUNK).min(a.samples);
            let drawn: Vec<_> = (start..end)
                .into_par_iter()
                .map(|m| sampler.draw(m, a.seed))
                .collect();
            for (m, (s, lp)) in (start..end).zip(drawn) {
                write_batch_row(w, m, &s, lp)?;
            }
            start = end;
        }
        Ok(())
    })?;
    log(format_args!("wrote {} samples to {}", a.samples, path.display()));
    Ok(())
}

fn estimate(table: &WeightTable, mode: XebMode, samples: usize, seed: u64, cap: EnumerationCap) -> Result<XebEstimate> {
    match mode {
        XebMode::TrueBruteforce => true_xeb_bruteforce(table, cap),
        XebMode::TrueClosedform => Ok(true_xeb_closed_form(table)),
        empirical => {
            let log_probs = draw_log_probs(table, samples, seed)?;
            empirical_xeb_from_log_probs(table.n(), table.d(), &log_probs, empirical, seed)
        }
    }
}

fn cmd_xeb(a: &XebArgs) -> Result<()> {
    let table = WeightTable::load(&a.table)?;
    let row = estimate(&table, a.mode.into(), count_to_usize(a.samples)?, a.seed, a.cap.cap()?)?;
    let path = a.output.resolve("xeb.csv");
    emit_report(ReportRows::Xeb(&[row]), ReportFormat::Csv, &path)?;
    log(format_args!("wrote {}", path.display()));
    Ok(())
}

/// Rows for one sweep point, in a fixed mode order.
pub fn sweep_point(
    n: usize,
    d: usize,
    samples: usize,
    master_seed: u64,
    cap: EnumerationCap,
    with_bruteforce: bool,
) -> Result<Vec<XebEstimate>> {
    let table_seed = derive_seed(master_seed, n as u64);
    let batch_seed = derive_seed(table_seed, BATCH_SEED_KEY);
    let table = generate_weight_table(n, d, table_seed)?;
    let log_probs = draw_log_probs(&table, samples, batch_seed)?;
    let mut rows = Vec::with_capacity(4);
    for mode in [XebMode::EmpiricalNaive, XebMode::EmpiricalLogspace] {
        let mut e = empirical_xeb_from_log_probs(n, d, &log_probs, mode, batch_seed)?;
        e.seed = Some(table_seed);
        rows.push(e);
    }
    if with_bruteforce {
        match true_xeb_bruteforce(&table, cap) {
            Ok(e) => rows.push(e),
            Err(Error::ResourceLimit { .. }) => {
                log(format_args!("n={n}: brute-force truth skipped, {d}^{n} exceeds the cap"))
            }
            Err(e) => return Err(e),
        }
    }
    rows.push(true_xeb_closed_form(&table));
    Ok(rows)
}

fn cmd_sweep(a: &SweepArgs, big: bool) -> Result<()> {
    let grid = match &a.grid {
        Some(g) => g.clone(),
        None => parse_n_list(if big { DEFAULT_BIGSWEEP_GRID } else { DEFAULT_SWEEP_GRID })
            .expect("default grid parses"),
    };
    let cap = a.cap.cap()?;
    let samples = count_to_usize(a.samples)?;
    let points: Vec<Vec<XebEstimate>> = grid
        .0
        .par_iter()
        .map(|&n| {
            let rows = sweep_point(n, a.d, samples, a.seed, cap, !big);
            log(format_args!("n={n} done"));
            rows
        })
        .collect::<Result<_>>()?;
    let rows: Vec<XebEstimate> = points.into_iter().flatten().collect();
    let path = a.output.resolve(if big { "bigsweep.csv" } else { "sweep.csv" });
    emit_report(ReportRows::Xeb(&rows), ReportFormat::Csv, &path)?;
    log(format_args!("wrote {} rows to {}", rows.len(), path.display()));
    Ok(())
}

fn cmd_pmf(a: &PmfArgs) -> Result<()> {
    let table = WeightTable::load(&a.table)?;
    let cap = a.cap.cap()?;
    let exact = enumerate_pmf(&table, cap)?;
    let batch = draw_batch(&table, count_to_usize(a.samples)?, a.seed)?;
    let empirical = empirical_histogram(&batch, cap)?;
    drop(batch);
    let tv = total_variation(&exact, &empirical)?;
    let exact_path = a.out_exact.clone().unwrap_or_else(|| a.out_dir.join("pmf_exact.csv"));
    let empirical_path = a
        .out_empirical
        .clone()
        .unwrap_or_else(|| a.out_dir.join("pmf_empirical.csv"));
    exact.write_csv(&exact_path)?;
    if let Err(e) = empirical.write_csv(&empirical_path) {
        let _ = std::fs::remove_file(&exact_path);
        return Err(e);
    }
    log(format_args!(
        "wrote {} and {}; total variation {tv:.6}",
        exact_path.display(),
        empirical_path.display()
    ));
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let cap = a.cap.cap()?;
    let mut timings = Vec::new();

    let per_sample = match a.per_sample_seconds {
        Some(t) => t,
        None => {
            let table = generate_weight_table(a.n, a.d, a.seed)?;
            let rec = time_sampling(&table, a.samples, derive_seed(a.seed, BATCH_SEED_KEY))?;
            log(format_args!("sampling n={}: {:.3e} s/sample", a.n, rec.per_item_seconds));
            let t = rec.per_item_seconds;
            timings.push(rec);
            t
        }
    };

    let (ref_seconds, ref_n, source) = match (a.ref_seconds, a.ref_n) {
        (Some(s), Some(n)) => (s, n, "supplied"),
        _ => {
            let table = generate_weight_table(a.enum_n, a.d, a.seed)?;
            let rec = time_enumeration(&table, cap)?;
            log(format_args!("enumeration n={}: {:.3e} s", a.enum_n, rec.wall_seconds));
            let out = (rec.wall_seconds, a.enum_n, "measured");
            timings.push(rec);
            out
        }
    };

    let log10_enum_seconds = extrapolate_enum_time(ref_seconds, ref_n, a.n, a.d)?;
    let advantage = advantage_ratio(log10_enum_seconds, per_sample)?;
    let report = BenchReport {
        timings,
        extrapolation: Extrapolation {
            d: a.d,
            n_ref: ref_n,
            n_target: a.n,
            ref_seconds,
            source: source.to_owned(),
            log10_enum_seconds,
        },
        advantage,
    };
    let path = a.output.resolve("bench.json");
    emit_report(ReportRows::Bench(&report), ReportFormat::Json, &path)?;
    log(format_args!(
        "log10 advantage {:.2} ({:.2} log10 years); wrote {}",
        report.advantage.log10_advantage,
        report.advantage.log10_enum_years,
        path.display()
    ));
    Ok(())
}

/// Path helper for tests and callers that build argument lists.
pub fn path_arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("2..30").unwrap().0, (2..=30).collect::<Vec<_>>());
        let big = parse_n_list(DEFAULT_BIGSWEEP_GRID).unwrap().0;
        assert_eq!(big.len(), 92);
        assert_eq!(big[0], 100);
        assert_eq!(big[90], 1000);
        assert_eq!(big[91], 1023);
        assert_eq!(parse_n_list("5,3,3").unwrap().0, vec![3, 5]);
        assert_eq!(parse_n_list("1..=3").unwrap().0, vec![1, 2, 3]);
        for bad in ["", "0..3", "5..2", "a", "1..4:0", "1..x"] {
            assert!(parse_n_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1000000").unwrap(), 1_000_000);
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("1_000").unwrap(), 1000);
        for bad in ["0", "-1", "1.5", "abc", "1e400"] {
            assert!(parse_count(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_point_rows() {
        let rows = sweep_point(6, 2, 1000, 7, EnumerationCap::default(), true).unwrap();
        let modes: Vec<_> = rows.iter().map(|r| r.mode).collect();
        assert_eq!(modes, XebMode::ALL.to_vec());
        let seed = derive_seed(7, 6);
        assert!(rows.iter().all(|r| r.seed == Some(seed)));
        let capped = sweep_point(6, 2, 1000, 7, EnumerationCap::new(32).unwrap(), true).unwrap();
        assert_eq!(capped.len(), 3);
        assert!(capped.iter().all(|r| r.mode != XebMode::TrueBruteforce));
    }
}
