//! Four-point rainflow counting with companion-channel windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainflowCycle {
    pub range: f64,
    pub mean: f64,
    /// 1.0 for a closed cycle, 0.5 for a residue half cycle.
    pub weight: f64,
    /// Original sample indices bounding the cycle.
    pub i_start: usize,
    pub i_end: usize,
    /// Per companion: max - min over `i_start..=i_end`.
    pub companion_ranges: Vec<f64>,
    /// Per companion: (max + min) / 2 over `i_start..=i_end`.
    pub companion_means: Vec<f64>,
}

/// Indices of the turning points of `series`. Plateaus collapse to their
/// first sample; both end points are kept unless the series is constant.
pub fn peak_valley(series: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = Vec::new();
    for (i, &v) in series.iter().enumerate() {
        let Some(&last) = idx.last() else {
            idx.push(i);
            continue;
        };
        if v == series[last] {
            continue;
        }
        if idx.len() >= 2 {
            let prev = idx[idx.len() - 2];
            if (series[last] - series[prev]) * (v - series[last]) > 0.0 {
                *idx.last_mut().unwrap() = i;
                continue;
            }
        }
        idx.push(i);
    }
    if idx.len() < 2 {
        idx.clear();
    }
    idx
}

fn window_stats(channel: &[f64], a: usize, b: usize) -> (f64, f64) {
    let (lo, hi) = channel[a..=b]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    (hi - lo, 0.5 * (hi + lo))
}

/// Rainflow-counts `series`; every cycle also reports range and mean of each
/// companion channel over the cycle's sample window.
pub fn rainflow(series: &[f64], companions: &[&[f64]]) -> Result<Vec<RainflowCycle>> {
    if let Some(c) = companions.iter().find(|c| c.len() != series.len()) {
        return Err(Error::invalid(
            "companion",
            format!("length {} differs from series length {}", c.len(), series.len()),
        ));
    }
    let make = |p: usize, q: usize, weight: f64| {
        let (a, b) = (p.min(q), p.max(q));
        let (companion_ranges, companion_means) = companions.iter().map(|c| window_stats(c, a, b)).unzip();
        RainflowCycle {
            range: (series[p] - series[q]).abs(),
            mean: 0.5 * (series[p] + series[q]),
            weight,
            i_start: a,
            i_end: b,
            companion_ranges,
            companion_means,
        }
    };

    let mut cycles = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for r in peak_valley(series) {
        stack.push(r);
        while stack.len() >= 4 {
            let n = stack.len();
            let [a, b, c, d] = [stack[n - 4], stack[n - 3], stack[n - 2], stack[n - 1]].map(|i| series[i]);
            let inner = (b - c).abs();
            if inner <= (a - b).abs() && inner <= (c - d).abs() {
                cycles.push(make(stack[n - 3], stack[n - 2], 1.0));
                stack.drain(n - 3..n - 1);
            } else {
                break;
            }
        }
    }
    for w in stack.windows(2) {
        cycles.push(make(w[0], w[1], 0.5));
    }
    Ok(cycles)
}

/// Rainflow without companion channels.
pub fn rainflow_cycles(series: &[f64]) -> Vec<RainflowCycle> {
    rainflow(series, &[]).expect("no companions to mismatch")
}
