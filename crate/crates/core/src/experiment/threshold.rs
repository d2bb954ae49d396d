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

//! Bulk threshold of the memory block from crossings of failure curves.

use serde::{Deserialize, Serialize};

use super::combine_failures;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{build_block, validate_block, BlockGraphs, BlockParams, GraphId};
use crate::matching::{assign_weights, Decoder};
use crate::noise::{extract_visible, sample_into, trial_seed, Configuration, ErrorModel, ErrorRay};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailurePoint {
    pub x: f64,
    pub rate: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub distance: usize,
    pub points: Vec<FailurePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub sizes: [usize; 2],
    pub x: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub ray: ErrorRay,
    /// Mean of the pairwise crossings; absent unless every pair crosses.
    pub p_star: Option<f64>,
    pub sizes: Vec<usize>,
    pub scans: Vec<ThresholdScan>,
    pub crossings: Vec<PairCrossing>,
    /// Largest relative deviation of a pairwise crossing from `p_star`.
    pub spread: Option<f64>,
    pub stable: bool,
}

/// Relative deviation from the mean allowed for a stable estimate.
pub const STABLE_SPREAD: f64 = 0.15;

/// Logical failure rate of a block decoded with unit weights. Each trial
/// contributes the failure probability of its decoded output.
pub fn failure_rate(
    graphs: &BlockGraphs,
    model: &ErrorModel,
    n: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<FailurePoint> {
    let per_trial = map_indexed(
        exec,
        n,
        || (Decoder::new(), Configuration::default()),
        |(decoder, config), i| -> Result<f64> {
            sample_into(graphs, model, trial_seed(master_seed, i), config);
            let visible = extract_visible(graphs, config)?;
            let weights = assign_weights(graphs, &visible, model, None)?;
            let gap = decoder.logical_gap(graphs, &visible, &weights);
            let f = GraphId::ALL.map(|id| gap.graph(id).failure(config.graph(id).true_class(graphs.graph(id))));
            Ok(combine_failures(f))
        },
    );
    let mut total = 0.0;
    for f in per_trial {
        total += f?;
    }
    let rate = if n == 0 { 0.0 } else { total / n as f64 };
    Ok(FailurePoint {
        x: model.p_error,
        rate,
        stderr: if n == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / n as f64).sqrt()
        },
        n,
    })
}

/// Least-squares quadratic through `(x, y)`, returned as `[c0, c1, c2]` in
/// the variable `u = (x - x0) / h`.
fn quadratic_fit(xs: &[f64], ys: &[f64], x0: f64, h: f64) -> Option<[f64; 3]> {
    let mut a = [[0.0f64; 4]; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - x0) / h;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
            a[r][3] += basis[r] * y;
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Crossing of two failure curves sampled on the same grid: the smaller
/// block does better above threshold, the larger one below.
fn crossing(small: &ThresholdScan, large: &ThresholdScan) -> Option<f64> {
    let n = small.points.len();
    let d: Vec<f64> = (0..n).map(|i| large.points[i].rate - small.points[i].rate).collect();
    let i = (0..n.saturating_sub(1)).find(|&i| d[i] < 0.0 && d[i + 1] >= 0.0)?;
    let (xa, xb) = (small.points[i].x, small.points[i + 1].x);
    let linear = xa + (xb - xa) * (-d[i]) / (d[i + 1] - d[i]);
    if n < 3 {
        return Some(linear);
    }
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(n - 1);
    let (lo, hi) = if hi - lo < 2 {
        if lo == 0 {
            (0, 2)
        } else {
            (n - 3, n - 1)
        }
    } else {
        (lo, hi)
    };
    let xs: Vec<f64> = small.points[lo..=hi].iter().map(|p| p.x).collect();
    let x0 = 0.5 * (xa + xb);
    let h = 0.5 * (xb - xa);
    let ys = |s: &ThresholdScan| -> Vec<f64> { s.points[lo..=hi].iter().map(|p| p.rate).collect() };
    let (Some(fs), Some(fl)) = (
        quadratic_fit(&xs, &ys(small), x0, h),
        quadratic_fit(&xs, &ys(large), x0, h),
    ) else {
        return Some(linear);
    };
    let [c0, c1, c2] = [fl[0] - fs[0], fl[1] - fs[1], fl[2] - fs[2]];
    let mut roots = Vec::new();
    if c2.abs() < 1e-15 {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let s = disc.sqrt();
            roots.push((-c1 + s) / (2.0 * c2));
            roots.push((-c1 - s) / (2.0 * c2));
        }
    }
    roots
        .into_iter()
        .filter(|u| (-1.0..=1.0).contains(u))
        .map(|u| x0 + u * h)
        .min_by(|a, b| (a - linear).abs().total_cmp(&(b - linear).abs()))
        .or(Some(linear))
}

/// Memory-block threshold along `ray`, scanning the scalar grid `grid` for
/// every size with block depth equal to the size.
pub fn estimate_threshold(
    sizes: &[usize],
    ray: ErrorRay,
    grid: &[f64],
    n_per_point: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<ThresholdEstimate> {
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter("threshold needs at least two sizes".into()));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("error grid must be strictly increasing".into()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut scans = Vec::new();
    for &l in &sizes {
        let graphs = build_block(BlockParams::memory(l, l)?)?;
        validate_block(&graphs).into_result()?;
        let mut points = Vec::new();
        for (j, &x) in grid.iter().enumerate() {
            let model = ray.model(x)?;
            let seed = trial_seed(trial_seed(master_seed, l as u64), j as u64);
            let mut p = failure_rate(&graphs, &model, n_per_point, seed, exec)?;
            p.x = x;
            points.push(p);
        }
        scans.push(ThresholdScan { distance: l, points });
    }
    let crossings: Vec<PairCrossing> = scans
        .windows(2)
        .map(|w| PairCrossing {
            sizes: [w[0].distance, w[1].distance],
            x: crossing(&w[0], &w[1]),
        })
        .collect();
    let found: Vec<f64> = crossings.iter().filter_map(|c| c.x).collect();
    let (p_star, spread) = if found.len() == crossings.len() {
        let mean = found.iter().sum::<f64>() / found.len() as f64;
        let spread = found.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max);
        (Some(mean), Some(spread))
    } else {
        (None, None)
    };
    Ok(ThresholdEstimate {
        ray,
        p_star,
        sizes,
        scans,
        crossings,
        spread,
        stable: spread.is_some_and(|s| s <= STABLE_SPREAD),
    })
}
