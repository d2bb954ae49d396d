// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Encoding error rate against keep fraction, breakeven points and score
//! diagnostics.

use serde::{Deserialize, Serialize};

use super::TrialTable;
use crate::error::{Error, Result};
use crate::rules::Score;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub kappa: f64,
    pub kept: usize,
    pub p_enc: f64,
    pub stderr: f64,
    /// `p_enc` is below the resolution `1 / (n kappa)` of the sample.
    pub sampling_limited: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EerCurve {
    pub rule: String,
    pub n_trials: usize,
    /// Descending in `kappa`.
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakeven {
    pub kappa: f64,
    pub overhead: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidKeepFraction(kappa))
    }
}

fn kept_count(kappa: f64, n: usize) -> usize {
    // The guard keeps k/n from rounding down to k - 1.
    ((kappa * n as f64) + 1e-9).floor() as usize
}

/// Log-spaced keep fractions from 1 down to `10 / n`, eight per decade,
/// merged with `extra` and sorted descending.
pub fn default_kappa_grid(n_trials: usize, extra: &[f64]) -> Vec<f64> {
    let mut grid = vec![1.0];
    if n_trials > 10 {
        let lo = (10.0 / n_trials as f64).log10();
        let steps = (-lo * 8.0).ceil() as usize;
        for i in 1..=steps {
            grid.push(10f64.powf(lo * i as f64 / steps as f64));
        }
    }
    grid.extend(extra.iter().copied().filter(|&k| k > 0.0 && k <= 1.0));
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

/// Keep fractions at which the unit-weight gap score changes value.
pub fn gap_sector_boundaries(table: &TrialTable) -> Vec<f64> {
    let n = table.n_trials();
    let mut s: Vec<f64> = table.records.iter().map(|r| r.gap_score()).collect();
    s.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for i in 1..n {
        if s[i] != s[i - 1] {
            out.push(i as f64 / n as f64);
        }
    }
    out
}

/// Record indices from best to worst under `rule`; equal scores keep trial
/// order.
pub fn order_by_rule(table: &TrialTable, rule: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..table.n_trials()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&table.records[i], &table.records[j]);
        a.scores[rule].cmp_key(&b.scores[rule]).then(a.trial.cmp(&b.trial))
    });
    order
}

/// Post-selected encoding error rate on a keep-fraction grid. Grid values
/// that keep no record are skipped.
pub fn eer_curve(table: &TrialTable, rule: usize, grid: &[f64]) -> Result<EerCurve> {
    for &k in grid {
        check_kappa(k)?;
    }
    let label = table
        .rules
        .get(rule)
        .ok_or_else(|| Error::InvalidParameter(format!("no rule with index {rule}")))?
        .label();
    let n = table.n_trials();
    let order = order_by_rule(table, rule);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    for &i in &order {
        prefix.push(prefix.last().unwrap() + table.records[i].failure);
    }
    let mut points = Vec::new();
    for &kappa in grid {
        let kept = kept_count(kappa, n).min(n);
        if kept == 0 {
            continue;
        }
        let p = prefix[kept] / kept as f64;
        let nk = n as f64 * kappa;
        points.push(CurvePoint {
            kappa,
            kept,
            p_enc: p,
            stderr: (p * (1.0 - p) / nk).sqrt(),
            sampling_limited: p < 1.0 / nk,
        });
    }
    Ok(EerCurve {
        rule: label,
        n_trials: n,
        points,
    })
}

/// Largest keep fraction with `p_enc <= p_init`, scanning down from the top
/// of the curve and interpolating linearly in `(ln p_enc, kappa)`.
pub fn breakeven(curve: &EerCurve, p_init: f64) -> Option<Breakeven> {
    let pts = &curve.points;
    let first = pts.first()?;
    let done = |kappa: f64| Breakeven {
        kappa,
        overhead: 1.0 / kappa,
    };
    if first.p_enc <= p_init {
        return Some(done(first.kappa));
    }
    for w in pts.windows(2) {
        let (hi, lo) = (&w[0], &w[1]);
        if lo.p_enc > p_init {
            continue;
        }
        let kappa = if lo.p_enc > 0.0 && p_init > 0.0 {
            let (a, b) = (hi.p_enc.ln(), lo.p_enc.ln());
            hi.kappa + (p_init.ln() - a) * (lo.kappa - hi.kappa) / (b - a)
        } else {
            hi.kappa + (p_init - hi.p_enc) * (lo.kappa - hi.kappa) / (lo.p_enc - hi.p_enc)
        };
        return Some(done(kappa));
    }
    None
}

/// Score of the last record kept at keep fraction `kappa`.
pub fn cutoff_for_keep(table: &TrialTable, rule: usize, kappa: f64) -> Result<Score> {
    check_kappa(kappa)?;
    let kept = kept_count(kappa, table.n_trials()).min(table.n_trials());
    if kept == 0 {
        return Err(Error::Domain(format!(
            "keep fraction {kappa} keeps no record out of {}",
            table.n_trials()
        )));
    }
    let order = order_by_rule(table, rule);
    Ok(table.records[order[kept - 1]].scores[rule])
}

/// p_enc with no post-selection recomputed from signed gaps: a membrane
/// with a negative gap fails, each tied membrane fails with probability 1/2.
pub fn signed_gap_eer(table: &TrialTable) -> f64 {
    if table.records.is_empty() {
        return 0.0;
    }
    let total: f64 = table
        .records
        .iter()
        .map(|r| {
            let gaps = [r.primal.signed_gap, r.dual.signed_gap];
            if gaps.iter().any(|&g| g < 0.0) {
                1.0
            } else {
                let ties = gaps.iter().filter(|&&g| g == 0.0).count() as i32;
                1.0 - 0.5f64.powi(ties)
            }
        })
        .sum();
    total / table.records.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub eer: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rule: String,
    /// `distinct` (one bin per observed score) or `uniform` (equal widths).
    pub binning: String,
    pub bins: Vec<DiagnosticBin>,
}

/// Bins below this many distinct scores get one bin per value.
pub const MAX_DISTINCT_BINS: usize = 64;
pub const UNIFORM_BINS: usize = 30;

/// Histogram of the primary score with the mean failure weight per bin.
pub fn score_diagnostics(table: &TrialTable, rule: usize) -> Diagnostics {
    let label = table.rules[rule].label();
    let mut pairs: Vec<(f64, f64)> = table.records.iter().map(|r| (r.scores[rule].s, r.failure)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    distinct.dedup();

    let summarize = |lo: f64, hi: f64, members: &[(f64, f64)]| {
        let count = members.len();
        let eer = if count == 0 {
            0.0
        } else {
            members.iter().map(|m| m.1).sum::<f64>() / count as f64
        };
        let stderr = if count == 0 {
            0.0
        } else {
            (eer * (1.0 - eer) / count as f64).sqrt()
        };
        DiagnosticBin {
            lo,
            hi,
            count,
            eer,
            stderr,
        }
    };

    let mut bins = Vec::new();
    let binning;
    if distinct.len() <= MAX_DISTINCT_BINS {
        binning = "distinct";
        let mut start = 0;
        while start < pairs.len() {
            let v = pairs[start].0;
            let end = start + pairs[start..].iter().take_while(|p| p.0 == v).count();
            bins.push(summarize(v, v, &pairs[start..end]));
            start = end;
        }
    } else {
        binning = "uniform";
        let (lo, hi) = (distinct[0], *distinct.last().unwrap());
        let width = (hi - lo) / UNIFORM_BINS as f64;
        let mut start = 0;
        for b in 0..UNIFORM_BINS {
            let bl = lo + width * b as f64;
            let bh = if b + 1 == UNIFORM_BINS {
                hi
            } else {
                lo + width * (b + 1) as f64
            };
            let end = if b + 1 == UNIFORM_BINS {
                pairs.len()
            } else {
                start + pairs[start..].iter().take_while(|p| p.0 < bh).count()
            };
            bins.push(summarize(bl, bh, &pairs[start..end]));
            start = end;
        }
    }
    Diagnostics {
        rule: label,
        binning: binning.to_string(),
        bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{MembraneOutcome, TrialRecord};
    use crate::geometry::BlockParams;
    use crate::noise::ErrorModel;
    use crate::rules::RuleConfig;

    fn table(scores: &[f64], failures: &[f64]) -> TrialTable {
        let m = MembraneOutcome {
            true_class: false,
            decoded_class: false,
            tie: false,
            abs_gap: 2.0,
            signed_gap: 2.0,
        };
        TrialTable {
            params: BlockParams::preparation(2, 2).unwrap(),
            model: ErrorModel::pauli(0.1).unwrap(),
            rules: vec![RuleConfig::gap()],
            master_seed: 0,
            records: scores
                .iter()
                .zip(failures)
                .enumerate()
                .map(|(i, (&s, &f))| TrialRecord {
                    trial: i as u64,
                    seed: 0,
                    scores: vec![Score::single(s)],
                    primal: m,
                    dual: m,
                    failure: f,
                })
                .collect(),
        }
    }

    #[test]
    fn grid_shape() {
        let g = default_kappa_grid(100_000, &[0.5, 0.37]);
        assert_eq!(g[0], 1.0);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!((g.last().unwrap() - 1e-4).abs() < 1e-12);
        assert!(g.contains(&0.37));
        assert_eq!(default_kappa_grid(5, &[]), vec![1.0]);
    }

    #[test]
    fn curve_keeps_best_scores() {
        let t = table(&[0.3, 0.1, 0.2, 0.4], &[1.0, 0.0, 0.5, 1.0]);
        let c = eer_curve(&t, 0, &[1.0, 0.5, 0.25]).unwrap();
        assert_eq!(c.points[0].p_enc, 2.5 / 4.0);
        assert_eq!(c.points[1].p_enc, 0.25);
        assert_eq!(c.points[2].p_enc, 0.0);
        assert!(c.points[2].sampling_limited);
        let se = (0.25f64 * 0.75 / 2.0).sqrt();
        assert!((c.points[1].stderr - se).abs() < 1e-15);
        assert!(eer_curve(&t, 0, &[1.5]).is_err());
        assert!(eer_curve(&t, 0, &[0.0]).is_err());
    }

    #[test]
    fn breakeven_cases() {
        let mk = |ps: &[(f64, f64)]| EerCurve {
            rule: "x".into(),
            n_trials: 10,
            points: ps
                .iter()
                .map(|&(kappa, p_enc)| CurvePoint {
                    kappa,
                    kept: 0,
                    p_enc,
                    stderr: 0.0,
                    sampling_limited: false,
                })
                .collect(),
        };
        assert_eq!(breakeven(&mk(&[(1.0, 0.5), (0.5, 0.5)]), 0.1), None);
        assert_eq!(breakeven(&mk(&[(1.0, 0.05), (0.5, 0.01)]), 0.1).unwrap().overhead, 1.0);
        // ln-linear between (1, e^-2) and (0.5, e^-4): crossing at e^-3.
        let b = breakeven(&mk(&[(1.0, (-2.0f64).exp()), (0.5, (-4.0f64).exp())]), (-3.0f64).exp()).unwrap();
        assert!((b.kappa - 0.75).abs() < 1e-12);
        let z = breakeven(&mk(&[(1.0, 0.2), (0.5, 0.0)]), 0.1).unwrap();
        assert!((z.kappa - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cutoffs() {
        let t = table(&[0.3, 0.1, 0.2, 0.4], &[0.0; 4]);
        assert_eq!(cutoff_for_keep(&t, 0, 1.0).unwrap().s, 0.4);
        assert_eq!(cutoff_for_keep(&t, 0, 0.25).unwrap().s, 0.1);
        assert!(cutoff_for_keep(&t, 0, 0.1).is_err());
    }

    #[test]
    fn diagnostics_bins() {
        let t = table(&[0.1, 0.1, 0.2, 0.2, 0.2], &[0.0, 1.0, 0.0, 0.0, 0.5]);
        let d = score_diagnostics(&t, 0);
        assert_eq!(d.binning, "distinct");
        assert_eq!(d.bins.len(), 2);
        assert_eq!(d.bins[0].count, 2);
        assert_eq!(d.bins[0].eer, 0.5);
        let many: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let t = table(&many, &vec![0.0; 300]);
        let d = score_diagnostics(&t, 0);
        assert_eq!(d.binning, "uniform");
        assert_eq!(d.bins.len(), UNIFORM_BINS);
        assert_eq!(d.bins.iter().map(|b| b.count).sum::<usize>(), 300);
    }

    #[test]
    fn sector_boundaries_split_at_changes() {
        let mut t = table(&[0.0; 4], &[0.0; 4]);
        t.records[3].primal.abs_gap = 0.0;
        t.records[2].primal.abs_gap = 1.0;
        assert_eq!(gap_sector_boundaries(&t), vec![0.5, 0.75]);
    }
}
