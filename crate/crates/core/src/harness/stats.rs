//! Pooled per-step statistics of distance and magic increments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::io::TraceRow;

/// Increments with magnitude at or below this count as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Correlation pairs are kept only when `|d_sre|` is below this.
pub const SRE_FILTER: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub ansatz: String,
    pub traces: usize,
    pub steps: usize,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub quartile_method: String,
    pub fraction_negative: f64,
    pub fraction_positive: f64,
    pub fraction_zero: f64,
    pub zero_tolerance: f64,
    /// Pearson r of `(-d_s0, |d_sre|)` over pooled filtered steps; `None` when
    /// either side has no spread.
    pub pearson_r: Option<f64>,
    pub sre_filter: f64,
    pub retained_fraction: f64,
    pub per_instance_pearson: BTreeMap<String, Option<f64>>,
}

/// Quartiles by linear interpolation between order statistics, i.e. the
/// value at fractional rank `q (len - 1)` of the sorted sample.
pub fn quartiles(values: &[f64]) -> Result<[f64; 3]> {
    if values.is_empty() {
        return Err(Error::Undefined("quartiles of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Ok([at(0.25), at(0.5), at(0.75)])
}

/// Sample correlation coefficient; `None` for fewer than two points or when
/// either variable is constant to within [`ZERO_TOLERANCE`].
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let floor = ZERO_TOLERANCE * ZERO_TOLERANCE * n as f64;
    if sxx <= floor || syy <= floor {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn filtered_pairs<'a>(rows: impl Iterator<Item = &'a TraceRow>) -> (Vec<f64>, Vec<f64>, usize) {
    let (mut xs, mut ys, mut total) = (Vec::new(), Vec::new(), 0);
    for r in rows {
        if let (Some(ds0), Some(dsre)) = (r.d_s0_perm_literal, r.d_sre) {
            total += 1;
            if dsre.abs() < SRE_FILTER {
                xs.push(-ds0);
                ys.push(dsre.abs());
            }
        }
    }
    (xs, ys, total)
}

impl StepStats {
    /// Pools every row with a distance increment (i.e. every step after 0).
    pub fn from_rows(ansatz: &str, rows: &[TraceRow]) -> Result<StepStats> {
        let deltas: Vec<f64> = rows.iter().filter_map(|r| r.d_s0_perm_literal).collect();
        if deltas.is_empty() {
            return Err(Error::Undefined(format!(
                "no distance increments for ansatz `{ansatz}` (relabelling scan disabled or empty traces)"
            )));
        }
        let [q1, q2, q3] = quartiles(&deltas)?;
        let total = deltas.len() as f64;
        let negative = deltas.iter().filter(|&&d| d < -ZERO_TOLERANCE).count() as f64;
        let positive = deltas.iter().filter(|&&d| d > ZERO_TOLERANCE).count() as f64;
        let fraction_negative = negative / total;
        let fraction_positive = positive / total;

        let (xs, ys, paired) = filtered_pairs(rows.iter());
        let retained_fraction = if paired == 0 { 0.0 } else { xs.len() as f64 / paired as f64 };

        let mut by_instance: BTreeMap<String, Vec<&TraceRow>> = BTreeMap::new();
        for r in rows {
            by_instance.entry(r.instance_id.clone()).or_default().push(r);
        }
        let per_instance_pearson = by_instance
            .iter()
            .map(|(id, rs)| {
                let (x, y, _) = filtered_pairs(rs.iter().copied());
                (id.clone(), pearson(&x, &y))
            })
            .collect();

        Ok(StepStats {
            ansatz: ansatz.to_string(),
            traces: by_instance.len(),
            steps: deltas.len(),
            q1,
            q2,
            q3,
            quartile_method: "linear interpolation between order statistics".into(),
            fraction_negative,
            fraction_positive,
            fraction_zero: 1.0 - (fraction_negative + fraction_positive),
            zero_tolerance: ZERO_TOLERANCE,
            pearson_r: pearson(&xs, &ys),
            sre_filter: SRE_FILTER,
            retained_fraction,
            per_instance_pearson,
        })
    }
}
