//! Test-only oracles, independent of the library's sampling and enumeration
//! paths.

#![allow(dead_code)]

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use xeb_core::WeightTable;

/// `p(x)` for every `x`, straight from the chain rule: digit `s_i` has
/// probability `w_i((t + s_i) mod d)` given the digit sum `t` of the digits
/// before it. Each index is decoded from scratch.
pub fn literal_pmf(table: &WeightTable) -> Vec<f64> {
    let (n, d) = (table.n(), table.d());
    let total = (d as u64).pow(n as u32);
    (0..total)
        .map(|x| {
            let mut rest = x;
            let mut t = 0usize;
            let mut p = 1.0;
            for i in 0..n {
                let s = (rest % d as u64) as usize;
                rest /= d as u64;
                let cond = table.conditional_pmf(i, t).unwrap();
                p *= cond[s];
                t = (t + s) % d;
            }
            p
        })
        .collect()
}

/// One outcome index drawn digit by digit from the successive conditional
/// pmfs.
pub fn literal_sequential_draw(table: &WeightTable, rng: &mut impl Rng) -> u64 {
    let (n, d) = (table.n(), table.d());
    let mut t = 0usize;
    let mut x = 0u64;
    let mut place = 1u64;
    for i in 0..n {
        let cond = table.conditional_pmf(i, t).unwrap();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut s = d - 1;
        for (j, w) in cond.iter().enumerate() {
            acc += w;
            if acc > u {
                s = j;
                break;
            }
        }
        x += s as u64 * place;
        place *= d as u64;
        t = (t + s) % d;
    }
    x
}

/// Pearson chi-square p-value of `counts` against `probs`, pooling bins
/// whose expected count is below 5.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let m: u64 = counts.iter().sum();
    let m = m as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = p * m;
        if expected < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += expected;
        } else {
            stat += (c as f64 - expected).powi(2) / expected;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let df = (bins - 1) as f64;
    ChiSquared::new(df).unwrap().sf(stat)
}

pub fn worked_table() -> WeightTable {
    WeightTable::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]], 0).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
