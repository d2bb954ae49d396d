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

//! Soft-information scores and acceptance policies. Lower scores are
//! better under every rule.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BlockGraphs, GraphId, SyndromeGraph};
use crate::matching::{GapResult, SurvivingDistanceResult};
use crate::noise::VisibleInfo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    AnnularSyndrome,
    Gap,
    NestedGap,
    RadialGap,
    SurvivingDistance,
}

fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}

/// One post-selection rule and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub kind: RuleKind,
    /// Output label; derived from the kind and parameters when absent.
    #[serde(default)]
    pub name: Option<String>,
    /// Radial exponent of the annular, nested and radial-gap rules.
    #[serde(default)]
    pub alpha: f64,
    /// Multiplicity penalty of the surviving-distance rule.
    #[serde(default)]
    pub c: f64,
    /// Linear weights of the primal and dual terms.
    #[serde(default = "unit_pair")]
    pub a: [f64; 2],
    /// Acceptance cutoff `s*`, if fixed ahead of time.
    #[serde(default)]
    pub cutoff_score: Option<f64>,
    /// Radial cutoff of the radial-gap weights, `ceil(3 L_d / 4)` by default.
    #[serde(default)]
    pub radial_cutoff: Option<u32>,
}

impl RuleConfig {
    pub fn new(kind: RuleKind) -> Self {
        Self {
            kind,
            name: None,
            alpha: 0.0,
            c: 0.0,
            a: unit_pair(),
            cutoff_score: None,
            radial_cutoff: None,
        }
    }

    pub fn annular(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(RuleKind::AnnularSyndrome)
        }
    }

    pub fn gap() -> Self {
        Self::new(RuleKind::Gap)
    }

    pub fn nested(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(RuleKind::NestedGap)
        }
    }

    pub fn radial_gap(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(RuleKind::RadialGap)
        }
    }

    pub fn surviving(c: f64) -> Self {
        Self {
            c,
            ..Self::new(RuleKind::SurvivingDistance)
        }
    }

    pub fn check(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        if !finite(self.alpha) || self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rule {}: alpha must be finite and nonnegative",
                self.label()
            )));
        }
        if !finite(self.c) || !self.a.iter().all(|&x| finite(x)) {
            return Err(Error::InvalidParameter(format!(
                "rule {}: parameters must be finite",
                self.label()
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.kind {
            RuleKind::AnnularSyndrome => format!("annular(alpha={})", self.alpha),
            RuleKind::Gap => "gap".to_string(),
            RuleKind::NestedGap => format!("nested_gap(alpha={})", self.alpha),
            RuleKind::RadialGap => format!("radial_gap(alpha={})", self.alpha),
            RuleKind::SurvivingDistance => format!("surviving(c={})", self.c),
        }
    }
}

/// Score of one trial under one rule. Nested rules carry a secondary key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<f64>,
}

impl Score {
    pub fn single(s: f64) -> Self {
        Self { s, secondary: None }
    }

    pub fn nested(s_g: f64, s_s: f64) -> Self {
        Self {
            s: s_g,
            secondary: Some(s_s),
        }
    }

    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.s
            .total_cmp(&other.s)
            .then_with(|| match (self.secondary, other.secondary) {
                (Some(a), Some(b)) => a.total_cmp(&b),
                _ => Ordering::Equal,
            })
    }

    /// `true` when this score does not exceed the cutoff.
    pub fn accepted_by(&self, cutoff: &Score) -> bool {
        self.cmp_key(cutoff) != Ordering::Greater
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.secondary {
            Some(s2) => write!(f, "({}, {})", self.s, s2),
            None => write!(f, "{}", self.s),
        }
    }
}

/// Number of checks per radius, `sigma_bar(r)` for `r = 0..=max`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnularTable {
    pub counts: Vec<u32>,
    depth: usize,
    cutoff: u32,
}

impl AnnularTable {
    pub fn new(graph: &SyndromeGraph, distance: usize, depth: usize) -> Self {
        let max = graph.checks.iter().map(|c| c.radius).max().unwrap_or(0) as usize;
        let mut counts = vec![0u32; max.max(depth) + 1];
        for c in &graph.checks {
            counts[c.radius as usize] += 1;
        }
        Self {
            counts,
            depth,
            cutoff: (3 * distance as u32).div_ceil(4),
        }
    }

    /// Annulus-normalized, radially weighted count of lit checks.
    pub fn q(&self, graph: &SyndromeGraph, syndrome: &[u32], alpha: f64) -> f64 {
        let mut lit = vec![0u32; self.counts.len()];
        for &v in syndrome {
            lit[graph.checks[v as usize].radius as usize] += 1;
        }
        (1..=self.depth)
            .filter(|&r| self.counts[r] > 0)
            .map(|r| {
                let damp = (r as u32).min(self.cutoff) as f64;
                lit[r] as f64 / (self.counts[r] as f64 * damp.powf(alpha))
            })
            .sum()
    }
}

/// Annulus tables of both graphs of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnularTables {
    pub primal: AnnularTable,
    pub dual: AnnularTable,
}

impl AnnularTables {
    pub fn new(graphs: &BlockGraphs) -> Self {
        let p = graphs.params;
        Self {
            primal: AnnularTable::new(&graphs.primal, p.distance, p.depth),
            dual: AnnularTable::new(&graphs.dual, p.distance, p.depth),
        }
    }

    pub fn graph(&self, id: GraphId) -> &AnnularTable {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnularScore {
    pub q: [f64; 2],
    pub s: f64,
}

pub fn score_annular(
    graphs: &BlockGraphs,
    tables: &AnnularTables,
    visible: &VisibleInfo,
    alpha: f64,
    a: [f64; 2],
) -> AnnularScore {
    let mut q = [0.0; 2];
    for id in GraphId::ALL {
        q[id.index()] = tables.graph(id).q(graphs.graph(id), &visible.graph(id).syndrome, alpha);
    }
    AnnularScore {
        q,
        s: a[0] * q[0] + a[1] * q[1],
    }
}

/// `sum_i a_i exp(-|gap_i|)`.
pub fn score_gap(gap: &GapResult, a: [f64; 2]) -> f64 {
    let g = gap.abs_gaps();
    a[0] * (-g[0]).exp() + a[1] * (-g[1]).exp()
}

/// Same form as [`score_gap`] on gaps decoded under radial weights.
pub fn score_radial_gap(radial_gap: &GapResult, a: [f64; 2]) -> f64 {
    score_gap(radial_gap, a)
}

pub fn score_surviving(sd: &SurvivingDistanceResult, a: [f64; 2]) -> f64 {
    a[0] * (-sd.primal.q_d).exp() + a[1] * (-sd.dual.q_d).exp()
}

pub fn policy_threshold(score: f64, cutoff: f64) -> bool {
    score <= cutoff
}

/// Order of records sorted by gap score, then annular score; ties keep
/// input order.
pub fn rank_nested(records: &[(f64, f64)]) -> Vec<usize> {
    let scores: Vec<Score> = records.iter().map(|&(g, s)| Score::nested(g, s)).collect();
    rank(&scores)
}

/// Stable ascending order of `scores`.
pub fn rank(scores: &[Score]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].cmp_key(&scores[j]));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_block, BlockParams};
    use crate::matching::{assign_weights, Decoder};
    use crate::noise::ErrorModel;

    fn block(l: usize) -> BlockGraphs {
        build_block(BlockParams::preparation(l, l).unwrap()).unwrap()
    }

    #[test]
    fn annular_empty_and_single() {
        let g = block(6);
        let t = AnnularTables::new(&g);
        let v = VisibleInfo::default();
        assert_eq!(score_annular(&g, &t, &v, 1.0, [1.0, 1.0]).s, 0.0);
        let check = g.primal.checks.iter().position(|c| c.radius == 2).unwrap() as u32;
        let mut v = VisibleInfo::default();
        v.primal.syndrome = vec![check];
        let n2 = g.primal.checks.iter().filter(|c| c.radius == 2).count() as f64;
        let s = score_annular(&g, &t, &v, 1.0, [1.0, 1.0]);
        assert!((s.q[0] - 1.0 / (n2 * 2.0)).abs() < 1e-15);
        assert_eq!(s.q[1], 0.0);
        let s0 = score_annular(&g, &t, &v, 0.0, [1.0, 1.0]);
        assert!((s0.s - 1.0 / n2).abs() < 1e-15);
    }

    #[test]
    fn annular_cutoff_caps_damping() {
        // L = 4 caps the radial factor at 3.
        let g = block(4);
        let t = AnnularTables::new(&g);
        let far = g.primal.checks.iter().position(|c| c.radius == 4).unwrap() as u32;
        let mut v = VisibleInfo::default();
        v.primal.syndrome = vec![far];
        let n4 = t.primal.counts[4] as f64;
        let s = score_annular(&g, &t, &v, 2.0, [1.0, 0.0]);
        assert!((s.s - 1.0 / (n4 * 9.0)).abs() < 1e-15);
    }

    #[test]
    fn gap_scores() {
        let g = block(4);
        let m = ErrorModel::pauli(0.01).unwrap();
        let v = VisibleInfo::default();
        let w = assign_weights(&g, &v, &m, None).unwrap();
        let gap = Decoder::new().logical_gap(&g, &v, &w);
        assert!((score_gap(&gap, [1.0, 1.0]) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(score_radial_gap(&gap, [1.0, 1.0]), score_gap(&gap, [1.0, 1.0]));
    }

    #[test]
    fn policy_boundary_is_kept() {
        assert!(policy_threshold(0.1, 0.1));
        assert!(!policy_threshold(0.2, 0.1));
        assert!(policy_threshold(-1.0, 0.0));
    }

    #[test]
    fn nested_ordering() {
        let order = rank_nested(&[(1.0, 5.0), (0.0, 9.0), (1.0, 2.0)]);
        assert_eq!(order, vec![1, 2, 0]);
        let same_gap = rank_nested(&[(1.0, 3.0), (1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(same_gap, vec![1, 2, 0]);
        let same_ann = rank_nested(&[(3.0, 1.0), (2.0, 1.0), (2.0, 1.0)]);
        assert_eq!(same_ann, vec![1, 2, 0]);
    }

    #[test]
    fn labels_and_checks() {
        assert_eq!(RuleConfig::radial_gap(0.1).label(), "radial_gap(alpha=0.1)");
        assert!(RuleConfig::annular(-1.0).check().is_err());
        let parsed: RuleConfig = serde_json::from_str(r#"{"kind":"gap"}"#).unwrap();
        assert_eq!(parsed, RuleConfig::gap());
    }
}
