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

//! Weighted decoding: edge weights, class-constrained minimum-weight
//! corrections, logical gaps and surviving distances.
//!
//! A correction of class `c` on a graph with syndrome `S` is an edge set
//! whose odd-degree vertices are `S` plus some subset of `{B1, B2}`. Its
//! membrane parity equals `|S ∩ far| + [B2 used]` (mod 2), where `far` is the
//! `B2` side of the membrane, so the class fixes which pseudosyndromes are
//! lit. The lightest such edge set is a minimum T-join, found as a
//! minimum-cost perfect matching over shortest-path distances.

mod blossom;
mod surviving;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

pub use blossom::Blossom;
pub use surviving::{surviving_distance, GraphSurviving, SurvivingDistanceResult};

use crate::error::{Error, Result};
use crate::geometry::{BlockGraphs, GraphId, SyndromeGraph};
use crate::noise::{ErrorModel, VisibleInfo};

/// Fixed-point units per normalized weight unit under radial reweighting.
pub const RADIAL_SCALE: i64 = 1 << 32;

/// Radial reweighting `w / min(r, cutoff)^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialWeights {
    pub alpha: f64,
    /// Defaults to `ceil(3 L_d / 4)`.
    #[serde(default)]
    pub cutoff: Option<u32>,
}

impl RadialWeights {
    pub fn new(alpha: f64) -> Result<Self> {
        let r = Self { alpha, cutoff: None };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radial exponent must be finite and nonnegative, got {}",
                self.alpha
            )));
        }
        if self.cutoff == Some(0) {
            return Err(Error::InvalidParameter("radial cutoff must be positive".into()));
        }
        Ok(())
    }

    pub fn cutoff_for(&self, depth: usize) -> u32 {
        self.cutoff.unwrap_or((3 * depth as u32).div_ceil(4))
    }
}

/// Edge weights of both graphs in fixed point: `scale` units make one
/// normalized weight unit. Unit weights use `scale = 1`, so every correction
/// weight is an exact integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightAssignment {
    /// `ln((1 - p) / p)` of a non-erased location.
    pub w_unit: f64,
    /// Set when `p >= 1/2`, where the log-likelihood weight is not positive.
    pub degenerate: bool,
    pub scale: i64,
    pub primal: Vec<i64>,
    pub dual: Vec<i64>,
}

impl WeightAssignment {
    pub fn graph(&self, id: GraphId) -> &[i64] {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }

    /// Normalized weight of one edge.
    pub fn weight(&self, id: GraphId, edge: u32) -> f64 {
        self.to_normalized(self.graph(id)[edge as usize])
    }

    pub fn to_normalized(&self, raw: i64) -> f64 {
        raw as f64 / self.scale as f64
    }

    /// Every weight multiplied by `factor`, normalization kept.
    pub fn scaled(&self, factor: i64) -> Self {
        assert!(factor > 0);
        Self {
            primal: self.primal.iter().map(|w| w * factor).collect(),
            dual: self.dual.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    fn is_unit(&self) -> bool {
        self.primal.iter().chain(&self.dual).all(|&w| w <= 1)
    }
}

/// Log-likelihood weights normalized to 1, zero on erased locations, with
/// optional radial reweighting.
pub fn assign_weights(
    graphs: &BlockGraphs,
    visible: &VisibleInfo,
    model: &ErrorModel,
    radial: Option<RadialWeights>,
) -> Result<WeightAssignment> {
    if let Some(r) = &radial {
        r.check()?;
    }
    let p = model.p_error;
    let w_unit = ((1.0 - p) / p).ln();
    let radial = radial.filter(|r| r.alpha != 0.0);
    let scale = if radial.is_some() { RADIAL_SCALE } else { 1 };
    let cutoff = radial.map(|r| r.cutoff_for(graphs.params.depth));
    let mut out = WeightAssignment {
        w_unit,
        degenerate: p >= 0.5,
        scale,
        primal: Vec::new(),
        dual: Vec::new(),
    };
    for id in GraphId::ALL {
        let graph = graphs.graph(id);
        let mut w: Vec<i64> = match (radial, cutoff) {
            (Some(r), Some(cut)) => graph
                .edges
                .iter()
                .map(|e| {
                    let reff = e.radius.clamp(1, cut) as f64;
                    (scale as f64 / reff.powf(r.alpha)).round() as i64
                })
                .collect(),
            _ => vec![1; graph.num_edges()],
        };
        for &e in &visible.graph(id).erased {
            let slot = w.get_mut(e as usize).ok_or(Error::UnknownEdge {
                graph: id.name(),
                edge: e,
            })?;
            *slot = 0;
        }
        match id {
            GraphId::Primal => out.primal = w,
            GraphId::Dual => out.dual = w,
        }
    }
    Ok(out)
}

/// Membrane parity of a correction for the pseudosyndromes it lights.
fn boundary_usage(graph: &SyndromeGraph, syndrome: &[u32], class: bool) -> (bool, bool) {
    let far = syndrome.iter().filter(|&&v| graph.on_far_side(v)).count() % 2 == 1;
    let b2 = class ^ far;
    let b1 = (syndrome.len() % 2 == 1) ^ b2;
    (b1, b2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub class: bool,
    pub edges: Vec<u32>,
    pub total_weight: f64,
    pub raw_weight: i64,
}

/// Class-constrained correction weights of one graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphGap {
    pub w_class0: f64,
    pub w_class1: f64,
    pub abs_gap: f64,
    pub min_class: bool,
    pub tie: bool,
    pub raw: [i64; 2],
}

impl GraphGap {
    fn from_raw(raw: [i64; 2], scale: i64) -> Self {
        let s = scale as f64;
        let diff = raw[1] - raw[0];
        Self {
            w_class0: raw[0] as f64 / s,
            w_class1: raw[1] as f64 / s,
            abs_gap: diff.abs() as f64 / s,
            min_class: diff < 0,
            tie: diff == 0,
            raw,
        }
    }

    /// `w_wrong - w_correct` against the hidden class.
    pub fn signed_gap(&self, true_class: bool) -> f64 {
        if true_class {
            self.w_class0 - self.w_class1
        } else {
            self.w_class1 - self.w_class0
        }
    }

    /// Probability that the decoder picks the wrong class: ties are a coin.
    pub fn failure(&self, true_class: bool) -> f64 {
        if self.tie {
            0.5
        } else if self.min_class != true_class {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub primal: GraphGap,
    pub dual: GraphGap,
}

impl GapResult {
    pub fn graph(&self, id: GraphId) -> &GraphGap {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }

    pub fn abs_gaps(&self) -> [f64; 2] {
        [self.primal.abs_gap, self.dual.abs_gap]
    }
}

/// Terminals and pairwise shortest-path costs of one decode, for checking
/// against external matching solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingInstance {
    pub graph: GraphId,
    pub class: bool,
    /// Vertex ids; the pseudosyndromes appear when the class lights them.
    pub nodes: Vec<u32>,
    /// Fixed-point units per normalized weight unit.
    pub scale: i64,
    /// Row-major `nodes.len()²` cost matrix in fixed-point units.
    pub costs: Vec<i64>,
    pub optimum: i64,
}

/// Per-worker decoding workspace.
#[derive(Debug, Default)]
pub struct Decoder {
    dist: Vec<i64>,
    settled: Vec<bool>,
    parent: Vec<u32>,
    touched: Vec<u32>,
    slot: Vec<u32>,
    deque: VecDeque<(i64, u32)>,
    heap: BinaryHeap<Reverse<(i64, u32)>>,
    terminals: Vec<u32>,
    table: Vec<i64>,
    subset: Vec<usize>,
    blossom: Blossom,
}

const NONE: u32 = u32::MAX;

impl Decoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, nv: usize) {
        if self.dist.len() < nv {
            self.dist = vec![i64::MAX; nv];
            self.settled = vec![false; nv];
            self.parent = vec![NONE; nv];
            self.slot = vec![NONE; nv];
        }
    }

    fn clear_search(&mut self) {
        for &v in &self.touched {
            self.dist[v as usize] = i64::MAX;
            self.settled[v as usize] = false;
            self.parent[v as usize] = NONE;
        }
        self.touched.clear();
        self.deque.clear();
        self.heap.clear();
    }

    /// Single-source search settling vertices in cost order. `visit` gets
    /// each settled vertex and returns `false` to stop early.
    fn search(
        &mut self,
        graph: &SyndromeGraph,
        weights: &[i64],
        unit: bool,
        source: u32,
        mut visit: impl FnMut(u32, i64) -> bool,
    ) {
        self.clear_search();
        self.dist[source as usize] = 0;
        self.touched.push(source);
        if unit {
            self.deque.push_back((0, source));
            while let Some((d, v)) = self.deque.pop_front() {
                if self.settled[v as usize] {
                    continue;
                }
                self.settled[v as usize] = true;
                if !visit(v, d) {
                    return;
                }
                for &(w, e) in graph.neighbors(v) {
                    let we = weights[e as usize];
                    let nd = d + we;
                    let slot = &mut self.dist[w as usize];
                    if nd < *slot {
                        if *slot == i64::MAX {
                            self.touched.push(w);
                        }
                        *slot = nd;
                        self.parent[w as usize] = e;
                        if we == 0 {
                            self.deque.push_front((nd, w));
                        } else {
                            self.deque.push_back((nd, w));
                        }
                    }
                }
            }
        } else {
            self.heap.push(Reverse((0, source)));
            while let Some(Reverse((d, v))) = self.heap.pop() {
                if self.settled[v as usize] {
                    continue;
                }
                self.settled[v as usize] = true;
                if !visit(v, d) {
                    return;
                }
                for &(w, e) in graph.neighbors(v) {
                    let nd = d + weights[e as usize];
                    let slot = &mut self.dist[w as usize];
                    if nd < *slot {
                        if *slot == i64::MAX {
                            self.touched.push(w);
                        }
                        *slot = nd;
                        self.parent[w as usize] = e;
                        self.heap.push(Reverse((nd, w)));
                    }
                }
            }
        }
    }

    /// Fills the distance table between `syndrome ++ [B1, B2]`.
    fn load(&mut self, graph: &SyndromeGraph, syndrome: &[u32], weights: &[i64], unit: bool) {
        self.prepare(graph.num_vertices());
        self.terminals.clear();
        self.terminals.extend_from_slice(syndrome);
        self.terminals.push(graph.b1());
        self.terminals.push(graph.b2());
        let k = self.terminals.len();
        self.table.clear();
        self.table.resize(k * k, 0);
        let terminals = std::mem::take(&mut self.terminals);
        for (i, &t) in terminals.iter().enumerate() {
            debug_assert_eq!(self.slot[t as usize], NONE, "repeated syndrome vertex");
            self.slot[t as usize] = i as u32;
        }
        let mut table = std::mem::take(&mut self.table);
        let mut slot = std::mem::take(&mut self.slot);
        // Boundary rows first: they bound every other search.
        for i in [k - 2, k - 1] {
            let mut remaining = k - 1;
            self.search(graph, weights, unit, terminals[i], |v, d| {
                let j = slot[v as usize];
                if j != NONE && j as usize != i {
                    table[i * k + j as usize] = d;
                    table[j as usize * k + i] = d;
                    remaining -= 1;
                }
                remaining > 0
            });
            assert_eq!(remaining, 0, "syndrome graph is disconnected");
        }
        let (r1, r2) = ((k - 2) * k, (k - 1) * k);
        if unit && graph.is_lattice() && weights.iter().all(|&w| w == 1) {
            // Between real checks the graph is a full cuboid grid, so the
            // only alternative to the grid distance is a detour through a
            // pseudosyndrome.
            for i in 0..k - 2 {
                let a = graph.checks[terminals[i] as usize].coord;
                for j in i + 1..k - 2 {
                    let b = graph.checks[terminals[j] as usize].coord;
                    let grid = ((a.x - b.x).abs() + (a.y - b.y).abs() + (a.t - b.t).abs()) as i64 / 2;
                    let d = grid
                        .min(table[r1 + i] + table[r1 + j])
                        .min(table[r2 + i] + table[r2 + j]);
                    table[i * k + j] = d;
                    table[j * k + i] = d;
                }
            }
        } else {
            self.fill_by_search(graph, weights, unit, &terminals, &slot, &mut table);
        }
        for &t in &terminals {
            slot[t as usize] = NONE;
        }
        self.slot = slot;
        self.table = table;
        self.terminals = terminals;
    }

    fn fill_by_search(
        &mut self,
        graph: &SyndromeGraph,
        weights: &[i64],
        unit: bool,
        terminals: &[u32],
        slot: &[u32],
        table: &mut [i64],
    ) {
        let k = terminals.len();
        let (r1, r2) = ((k - 2) * k, (k - 1) * k);
        for i in 0..k.saturating_sub(3) {
            // A path through a pseudosyndrome caps every distance, so the
            // search can stop once its radius passes the largest cap.
            let via = |t: &[i64], j: usize| (t[r1 + i] + t[r1 + j]).min(t[r2 + i] + t[r2 + j]);
            let bound = (i + 1..k - 2).map(|j| via(table, j)).max().unwrap_or(0);
            for j in i + 1..k - 2 {
                table[i * k + j] = -1;
            }
            let mut remaining = k - 3 - i;
            self.search(graph, weights, unit, terminals[i], |v, d| {
                if d >= bound {
                    return false;
                }
                let j = slot[v as usize];
                if j != NONE && j as usize > i && (j as usize) < k - 2 {
                    table[i * k + j as usize] = d;
                    remaining -= 1;
                }
                remaining > 0
            });
            for j in i + 1..k - 2 {
                if table[i * k + j] < 0 {
                    table[i * k + j] = via(table, j);
                }
                table[j * k + i] = table[i * k + j];
            }
        }
    }

    /// Terminal indices lit for `class` after `load`.
    fn select(&mut self, graph: &SyndromeGraph, class: bool) {
        let k = self.terminals.len();
        let syndrome = &self.terminals[..k - 2];
        let (b1, b2) = boundary_usage(graph, syndrome, class);
        self.subset.clear();
        self.subset.extend(0..k - 2);
        if b1 {
            self.subset.push(k - 2);
        }
        if b2 {
            self.subset.push(k - 1);
        }
    }

    /// Matches the selected terminals; returns pairs of terminal indices and
    /// the total cost.
    fn solve(&mut self) -> (Vec<(usize, usize)>, i64) {
        let k = self.terminals.len();
        let n = self.subset.len();
        let subset = &self.subset;
        let table = &self.table;
        let cost = |a: usize, b: usize| table[subset[a] * k + subset[b]];
        let mates = self.blossom.min_cost_perfect(n, cost);
        let mut pairs = Vec::with_capacity(n / 2);
        let mut total = 0;
        for (a, &b) in mates.iter().enumerate() {
            if a < b {
                total += cost(a, b);
                pairs.push((subset[a], subset[b]));
            }
        }
        (pairs, total)
    }

    /// Raw weights of both classes.
    pub fn class_weights(&mut self, graph: &SyndromeGraph, syndrome: &[u32], weights: &[i64], unit: bool) -> [i64; 2] {
        self.load(graph, syndrome, weights, unit);
        let mut out = [0; 2];
        for class in [false, true] {
            self.select(graph, class);
            out[class as usize] = self.solve().1;
        }
        out
    }

    /// Lightest correction of the given class, with its edges.
    pub fn min_weight_correction(
        &mut self,
        graph: &SyndromeGraph,
        syndrome: &[u32],
        weights: &WeightAssignment,
        class: bool,
    ) -> Correction {
        let w = weights.graph(graph.id);
        let unit = weights.is_unit();
        self.load(graph, syndrome, w, unit);
        self.select(graph, class);
        let (pairs, total) = self.solve();
        let mut on = vec![false; graph.num_edges()];
        for (a, b) in pairs {
            let (src, dst) = (self.terminals[a], self.terminals[b]);
            self.search(graph, w, unit, src, |v, _| v != dst);
            let mut v = dst;
            while v != src {
                let e = self.parent[v as usize];
                on[e as usize] ^= true;
                let [x, y] = graph.edges[e as usize].endpoints;
                v = if x == v { y } else { x };
            }
        }
        let edges: Vec<u32> = (0..on.len() as u32).filter(|&e| on[e as usize]).collect();
        let raw: i64 = edges.iter().map(|&e| w[e as usize]).sum();
        debug_assert_eq!(raw, total);
        Correction {
            class,
            edges,
            total_weight: weights.to_normalized(raw),
            raw_weight: raw,
        }
    }

    /// Both class-constrained weights on both graphs.
    pub fn logical_gap(
        &mut self,
        graphs: &BlockGraphs,
        visible: &VisibleInfo,
        weights: &WeightAssignment,
    ) -> GapResult {
        let unit = weights.is_unit();
        let mut g = [GraphGap::from_raw([0, 0], 1); 2];
        for id in GraphId::ALL {
            let raw = self.class_weights(graphs.graph(id), &visible.graph(id).syndrome, weights.graph(id), unit);
            g[id.index()] = GraphGap::from_raw(raw, weights.scale);
        }
        GapResult {
            primal: g[0],
            dual: g[1],
        }
    }

    pub fn instance(
        &mut self,
        graph: &SyndromeGraph,
        syndrome: &[u32],
        weights: &WeightAssignment,
        class: bool,
    ) -> MatchingInstance {
        let w = weights.graph(graph.id);
        self.load(graph, syndrome, w, weights.is_unit());
        self.select(graph, class);
        let k = self.terminals.len();
        let nodes: Vec<u32> = self.subset.iter().map(|&i| self.terminals[i]).collect();
        let mut costs = Vec::with_capacity(nodes.len() * nodes.len());
        for &a in &self.subset {
            for &b in &self.subset {
                costs.push(self.table[a * k + b]);
            }
        }
        let optimum = self.solve().1;
        MatchingInstance {
            graph: graph.id,
            class,
            nodes,
            scale: weights.scale,
            costs,
            optimum,
        }
    }
}
