//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{literal_pmf, rel_err, worked_table};
use xeb_core::bench::JULIAN_YEAR_SECONDS;
use xeb_core::cli::sweep_point;
use xeb_core::rng::derive_seed;
use xeb_core::xeb::empirical_xeb_from_log_probs;
use xeb_core::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn c1_worked_example() -> Outcome {
    let t = worked_table();
    let oracle = literal_pmf(&t);
    let pmf = enumerate_pmf(&t, EnumerationCap::default()).map_err(|e| e.to_string())?;
    for (x, want) in [0.42, 0.12, 0.28, 0.18].into_iter().enumerate() {
        check!(rel_err(pmf.probs()[x], want) <= 1e-12, "pmf[{x}] = {}", pmf.probs()[x]);
        check!(rel_err(oracle[x], want) <= 1e-12, "oracle pmf[{x}] = {}", oracle[x]);
    }
    let bf = true_xeb_bruteforce(&t, EnumerationCap::default()).unwrap().value;
    let cf = true_xeb_closed_form(&t).value;
    check!(rel_err(bf, 0.2064) <= 1e-12, "brute force {bf}");
    check!(rel_err(cf, 0.2064) <= 1e-12, "closed form {cf}");
    let samples = [
        DigitString::new(vec![0, 0], 2).unwrap(),
        DigitString::new(vec![1, 1], 2).unwrap(),
    ];
    let batch = SampleBatch::from_samples(&t, &samples, 0).unwrap();
    for mode in [XebMode::EmpiricalNaive, XebMode::EmpiricalLogspace] {
        let e = empirical_xeb(&t, &batch, mode).unwrap();
        check!(rel_err(e.value, 0.2) <= 1e-12, "{mode} {}", e.value);
        check!(rel_err(e.log1p_value, 1.2f64.ln()) <= 1e-12, "{mode} log1p {}", e.log1p_value);
    }
    Ok(format!("pmf, truth {bf:.6}/{cf:.6}, empirical 0.2"))
}

fn c2_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..240u64 {
        let d = [2usize, 3, 5][k as usize % 3];
        // n <= 16 and d^n <= 2^20
        let max_n = (20.0 / (d as f64).log2()).floor().min(16.0) as u64;
        let n = 1 + (derive_seed(2024, k) % max_n) as usize;
        let t = generate_weight_table(n, d, derive_seed(7, k)).unwrap();
        let bf = true_xeb_bruteforce(&t, EnumerationCap::default()).unwrap().value;
        let cf = true_xeb_closed_form(&t).value;
        let err = (bf - cf).abs() / (1.0 + cf);
        worst = worst.max(err);
        check!(err <= 1e-9, "n = {n}, d = {d}: {bf} vs {cf}");
        count += 1;
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{count} tables, worst scaled error {worst:.2e}, {:.1?}", start.elapsed()))
}

fn c3_degenerate_cases() -> Outcome {
    for (n, d) in [(1, 2), (10, 2), (20, 2), (7, 3), (5, 5)] {
        let u = WeightTable::uniform(n, d).unwrap();
        let batch = draw_batch(&u, 1000, 1).unwrap();
        let mut vals = vec![
            true_xeb_closed_form(&u).value,
            true_xeb_bruteforce(&u, EnumerationCap::default()).unwrap().value,
        ];
        for mode in [XebMode::EmpiricalNaive, XebMode::EmpiricalLogspace] {
            vals.push(empirical_xeb(&u, &batch, mode).unwrap().value);
        }
        check!(vals.iter().all(|v| v.abs() <= 1e-9), "uniform n = {n}, d = {d}: {vals:?}");
    }
    let mut logspace_worst: f64 = 0.0;
    for d in [2usize, 3] {
        for n in 1..=20usize {
            let pm = WeightTable::point_mass(n, d).unwrap();
            let expected = (d as f64).powi(n as i32) - 1.0;
            let batch = draw_batch(&pm, 100, 1).unwrap();
            let naive = empirical_xeb(&pm, &batch, XebMode::EmpiricalNaive).unwrap().value;
            let cf = true_xeb_closed_form(&pm).value;
            check!(naive == expected, "naive point mass n = {n}, d = {d}: {naive}");
            check!(cf == expected, "closed form point mass n = {n}, d = {d}: {cf}");
            if (d as u64).pow(n as u32) <= 1 << 20 {
                let bf = true_xeb_bruteforce(&pm, EnumerationCap::default()).unwrap().value;
                check!(bf == expected, "brute force point mass n = {n}, d = {d}: {bf}");
            }
            let ls = empirical_xeb(&pm, &batch, XebMode::EmpiricalLogspace).unwrap().value;
            logspace_worst = logspace_worst.max(rel_err(ls, expected));
            check!(rel_err(ls, expected) <= 1e-12, "logspace point mass n = {n}, d = {d}: {ls}");
        }
    }
    Ok(format!(
        "uniform |XEB| <= 1e-9; point mass = d^n - 1 exactly (logspace within {logspace_worst:.1e})"
    ))
}

fn c4_small_distribution_fidelity() -> Outcome {
    let start = Instant::now();
    let t = generate_weight_table(10, 2, 1010).unwrap();
    let exact = enumerate_pmf(&t, EnumerationCap::default()).unwrap();
    let batch = draw_batch(&t, 1_000_000, 1011).unwrap();
    let hist = empirical_histogram(&batch, EnumerationCap::default()).unwrap();
    let tv = total_variation(&exact, &hist).unwrap();
    let e = empirical_xeb(&t, &batch, XebMode::EmpiricalLogspace).unwrap();
    let truth = true_xeb_closed_form(&t).value;
    let z = (e.value - truth).abs() / e.stderr.unwrap();
    check!(tv < 0.05, "total variation {tv}");
    check!(z <= 5.0, "empirical {} vs truth {truth}: {z:.2} standard errors", e.value);
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "TV {tv:.4}, XEB {:.4} vs {truth:.4} ({z:.2} se), {:.1?}",
        e.value,
        start.elapsed()
    ))
}

fn c5_sweep() -> Outcome {
    let start = Instant::now();
    let (d, samples, seed) = (2, 1_000_000, 7);
    let mut ns = Vec::new();
    let mut truths = Vec::new();
    let mut worst_z: f64 = 0.0;
    let mut bruteforce_points = 0;
    for n in 2..=30usize {
        let rows = sweep_point(n, d, samples, seed, EnumerationCap::default(), true)
            .map_err(|e| e.to_string())?;
        let cf = rows.iter().find(|r| r.mode == XebMode::TrueClosedform).unwrap();
        if let Some(bf) = rows.iter().find(|r| r.mode == XebMode::TrueBruteforce) {
            check!((bf.value - cf.value).abs() <= 1e-9 * (1.0 + cf.value), "n = {n}: truths disagree");
            bruteforce_points += 1;
        }
        for e in rows.iter().filter(|r| r.mode.is_empirical()) {
            let z = (e.value - cf.value).abs() / e.stderr.unwrap();
            worst_z = worst_z.max(z);
            check!(z <= 5.0, "n = {n} {}: {} vs {} ({z:.2} se)", e.mode, e.value, cf.value);
        }
        ns.push(n as f64);
        truths.push(cf.log1p_value);
    }
    let s = slope(&ns, &truths);
    check!(s > 0.0, "log1p(true XEB) slope {s}");
    within(start.elapsed(), Duration::from_secs(30 * 60))?;
    Ok(format!(
        "29 points, {bruteforce_points} with brute force, worst {worst_z:.2} se, slope {s:.4}/digit, {:.1?}",
        start.elapsed()
    ))
}

fn c6_big_sweep() -> Outcome {
    let start = Instant::now();
    let (d, samples, seed) = (2, 10_000, 11);
    let grid: Vec<usize> = (100..=1000).step_by(10).chain([1023]).collect();
    let mut ns = Vec::new();
    let mut logs = Vec::new();
    for &n in &grid {
        let rows = sweep_point(n, d, samples, seed, EnumerationCap::default(), false)
            .map_err(|e| e.to_string())?;
        let ls = rows.iter().find(|r| r.mode == XebMode::EmpiricalLogspace).unwrap();
        check!(ls.value.is_finite() && ls.log1p_value.is_finite(), "n = {n}: log-space {}", ls.value);
        ns.push(n as f64);
        logs.push(ls.log1p_value);
        if n == 1023 {
            let naive = rows.iter().find(|r| r.mode == XebMode::EmpiricalNaive).unwrap();
            check!(naive.value.is_finite(), "naive value at n = 1023 is {}", naive.value);
        }
    }
    let s = slope(&ns, &logs);
    check!(s > 0.0, "log-space slope {s}");

    let t = generate_weight_table(1024, 2, derive_seed(seed, 1024)).unwrap();
    let log_probs = sampler_log_probs(&t, samples);
    let naive = empirical_xeb_from_log_probs(1024, 2, &log_probs, XebMode::EmpiricalNaive, 0).unwrap();
    let ls = empirical_xeb_from_log_probs(1024, 2, &log_probs, XebMode::EmpiricalLogspace, 0).unwrap();
    check!(naive.value == f64::INFINITY, "naive value at n = 1024 is {}", naive.value);
    check!(ls.value.is_finite(), "log-space value at n = 1024 is {}", ls.value);
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!(
        "{} points, log1p {:.1} -> {:.1} (slope {s:.4}), naive inf at 1024, {:.1?}",
        grid.len(),
        logs[0],
        logs[logs.len() - 1],
        start.elapsed()
    ))
}

fn sampler_log_probs(t: &WeightTable, samples: usize) -> Vec<f64> {
    draw_batch(t, samples, 5).unwrap().log_probs().to_vec()
}

fn c7_advantage_arithmetic() -> Outcome {
    let log10_s = extrapolate_enum_time(6.0 * 3600.0, 30, 1023, 2).unwrap();
    let unrounded = advantage_ratio(log10_s, 3e-6).unwrap();
    check!(
        (unrounded.log10_enum_years - 295.76).abs() <= 0.01,
        "log10 years {}",
        unrounded.log10_enum_years
    );
    let rounded = advantage_ratio(300.0 + JULIAN_YEAR_SECONDS.log10(), 3e-6).unwrap();
    check!(
        (rounded.log10_advantage - 313.02).abs() <= 0.01,
        "log10 advantage {}",
        rounded.log10_advantage
    );
    Ok(format!(
        "6 h @ n=30 -> 10^{:.2} years (quoted as ~10^300); 10^300 years / 3 us -> 10^{:.2}",
        unrounded.log10_enum_years, rounded.log10_advantage
    ))
}

fn c8_throughput() -> Outcome {
    let t = generate_weight_table(1023, 2, 8).unwrap();
    let rec = time_sampling(&t, 100_000, 8).unwrap();
    check!(rec.per_item_seconds < 1e-3, "{} s per sample", rec.per_item_seconds);
    let small = generate_weight_table(20, 2, 8).unwrap();
    let en = time_enumeration(&small, EnumerationCap::default()).unwrap();
    check!(en.wall_seconds < 10.0, "enumeration took {} s", en.wall_seconds);
    Ok(format!(
        "{:.2} us/sample at n=1023; n=20 enumeration {:.3} s",
        rec.per_item_seconds * 1e6,
        en.wall_seconds
    ))
}

fn run_cli_twice(dir: &Path, args: &[&str]) -> Result<(), String> {
    let mut outputs = Vec::new();
    for rep in 0..2 {
        let name = format!("{}_{rep}", args[0]);
        let status = Command::new(env!("CARGO_BIN_EXE_xeb"))
            .args(args)
            .args(["--out", &name])
            .current_dir(dir)
            .env_remove("XEB_OUT_DIR")
            .output()
            .map_err(|e| e.to_string())?;
        check!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
        outputs.push(fs::read(dir.join(&name)).map_err(|e| e.to_string())?);
    }
    check!(outputs[0] == outputs[1], "{args:?} output differs between runs");
    Ok(())
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let table = generate_weight_table(12, 3, 9).unwrap();
    table.save(d.join("t.json")).unwrap();
    let commands: [&[&str]; 6] = [
        &["gen", "--n", "12", "--d", "3", "--seed", "9"],
        &["sample", "--table", "t.json", "--M", "20000", "--seed", "4"],
        &["xeb", "--table", "t.json", "--M", "20000", "--mode", "naive"],
        &["sweep", "--n", "2..14", "--M", "20000", "--seed", "3"],
        &["bigsweep", "--n", "100..400:100,1023", "--M", "2000", "--seed", "3"],
        &["bench", "--ref-seconds", "21600", "--ref-n", "30", "--per-sample-seconds", "3e-6"],
    ];
    for args in commands {
        run_cli_twice(d, args)?;
    }
    let one = draw_batch_with_workers(&table, 50_000, 9, 1).unwrap();
    for workers in [2, 3, 8] {
        let many = draw_batch_with_workers(&table, 50_000, 9, workers).unwrap();
        check!(one == many, "batch differs with {workers} workers");
    }
    Ok("6 CLI commands byte-identical; batches equal for 1/2/3/8 workers".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("C1 worked example", c1_worked_example),
        ("C2 closed form = brute force", c2_oracle_equivalence),
        ("C3 degenerate tables", c3_degenerate_cases),
        ("C4 n=10 pmf fidelity", c4_small_distribution_fidelity),
        ("C5 sweep n=2..30", c5_sweep),
        ("C6 big sweep and overflow", c6_big_sweep),
        ("C7 advantage arithmetic", c7_advantage_arithmetic),
        ("C8 throughput", c8_throughput),
        ("C9 determinism", c9_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, criterion) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS  {name:<32} {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name:<32} {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
