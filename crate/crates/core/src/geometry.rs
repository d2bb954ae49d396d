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

//! Syndrome graphs of the preparation and memory blocks.
//!
//! Both graphs of a block are cuboid matching graphs laid out in doubled
//! coordinates: checks of the primal graph sit at odd `x` and even `y`,
//! checks of the dual graph at even `x` and odd `y`, and error locations sit
//! at the midpoints between the checks they flip. Time is doubled as well, so
//! check layer `t` lives at `2t` and the measurement edges joining layers
//! `t` and `t + 1` live at `2t + 1`. The preparation point sits on the input
//! face at `(c, c, 0)`.
//!
//! Every graph carries two pseudosyndrome vertices `B1` and `B2` with ids
//! `n` and `n + 1`, where `n` is the number of real checks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the block encodes a magic state or just stores a logical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Preparation,
    Memory,
}

/// Spatial side length (`distance`) and number of check layers (`depth`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockParams {
    pub distance: usize,
    pub depth: usize,
    pub kind: BlockKind,
}

impl BlockParams {
    pub fn new(distance: usize, depth: usize, kind: BlockKind) -> Result<Self> {
        let params = Self { distance, depth, kind };
        params.check()?;
        Ok(params)
    }

    pub fn preparation(distance: usize, depth: usize) -> Result<Self> {
        Self::new(distance, depth, BlockKind::Preparation)
    }

    pub fn memory(distance: usize, depth: usize) -> Result<Self> {
        Self::new(distance, depth, BlockKind::Memory)
    }

    pub fn check(&self) -> Result<()> {
        if self.distance < 2 {
            return Err(Error::InvalidBlock(format!(
                "distance must be at least 2, got {}",
                self.distance
            )));
        }
        if self.depth < 2 {
            return Err(Error::InvalidBlock(format!(
                "depth must be at least 2, got {}",
                self.depth
            )));
        }
        if self.distance > 512 || self.depth > 4096 {
            return Err(Error::InvalidBlock("block is too large".into()));
        }
        Ok(())
    }

    /// Doubled coordinate of the preparation point on both spatial axes.
    pub fn center(&self) -> i32 {
        2 * (self.distance as i32 / 2) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphId {
    Primal,
    Dual,
}

impl GraphId {
    pub const ALL: [GraphId; 2] = [GraphId::Primal, GraphId::Dual];

    pub fn index(self) -> usize {
        match self {
            GraphId::Primal => 0,
            GraphId::Dual => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphId::Primal => "primal",
            GraphId::Dual => "dual",
        }
    }
}

/// Integer point in doubled space-time coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
    pub t: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32, t: i32) -> Self {
        Self { x, y, t }
    }

    /// L∞ distance to `other` in lattice units, rounded up.
    pub fn radius_from(&self, other: &Coord) -> u32 {
        let d = (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.t - other.t).abs());
        ((d + 1) / 2) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub coord: Coord,
    pub radius: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Error on a data location within one check layer.
    Space,
    /// Measurement error joining consecutive check layers.
    Time,
    /// Boundary measurement on the input face of a preparation block.
    Input,
}

/// One independent error location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub endpoints: [u32; 2],
    pub coord: Coord,
    pub radius: u32,
    pub kind: EdgeKind,
    /// Membership in the logical membrane of this graph.
    pub cut: bool,
}

/// Sector of the input face relative to the preparation point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputRegion {
    Left,
    Right,
    Bottom,
    Top,
    Center,
}

/// Classifies an input-face offset `(dx, dy)` by the two diagonals through
/// the preparation point. Points on a diagonal go to the sector clockwise of
/// it (y pointing up).
pub fn input_region(dx: i32, dy: i32) -> InputRegion {
    use InputRegion::*;
    if dx == 0 && dy == 0 {
        return Center;
    }
    let (ax, ay) = (dx.abs(), dy.abs());
    if ax > ay {
        if dx < 0 {
            Left
        } else {
            Right
        }
    } else if ay > ax {
        if dy < 0 {
            Bottom
        } else {
            Top
        }
    } else {
        match (dx > 0, dy > 0) {
            (true, true) => Right,
            (true, false) => Bottom,
            (false, false) => Left,
            (false, true) => Top,
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Adjacency {
    offsets: Vec<u32>,
    entries: Vec<(u32, u32)>,
}

impl Adjacency {
    fn build(num_vertices: usize, edges: &[Edge]) -> Self {
        let mut degree = vec![0u32; num_vertices + 1];
        for e in edges {
            degree[e.endpoints[0] as usize + 1] += 1;
            degree[e.endpoints[1] as usize + 1] += 1;
        }
        for i in 0..num_vertices {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut entries = vec![(0, 0); edges.len() * 2];
        for (id, e) in edges.iter().enumerate() {
            let [a, b] = e.endpoints;
            entries[fill[a as usize] as usize] = (b, id as u32);
            fill[a as usize] += 1;
            entries[fill[b as usize] as usize] = (a, id as u32);
            fill[b as usize] += 1;
        }
        Self { offsets, entries }
    }

    #[inline]
    fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        let lo = self.offsets[v as usize] as usize;
        let hi = self.offsets[v as usize + 1] as usize;
        &self.entries[lo..hi]
    }
}

/// Checks, error locations and membrane of one of the two syndrome graphs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "GraphJson", try_from = "GraphJson")]
pub struct SyndromeGraph {
    pub id: GraphId,
    pub checks: Vec<Check>,
    pub edges: Vec<Edge>,
    pub prep_point: Option<Coord>,
    adjacency: Adjacency,
    /// Membrane side of every vertex: `true` on the side of `B2`.
    far_side: Vec<bool>,
    /// Set by [`build_block`]: real checks form a full cuboid grid in which
    /// graph distance is half the L1 distance of doubled coordinates.
    lattice: bool,
}

impl PartialEq for SyndromeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.checks == other.checks
            && self.edges == other.edges
            && self.prep_point == other.prep_point
    }
}

/// On-disk layout of a syndrome graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphJson {
    graph_id: GraphId,
    vertices: Vec<Check>,
    pseudosyndromes: [u32; 2],
    edges: Vec<Edge>,
    cut: Vec<u32>,
    prep_point: Option<Coord>,
}

impl From<SyndromeGraph> for GraphJson {
    fn from(g: SyndromeGraph) -> Self {
        let cut = g.cut_edges().collect();
        Self {
            graph_id: g.id,
            pseudosyndromes: [g.b1(), g.b2()],
            vertices: g.checks,
            edges: g.edges,
            cut,
            prep_point: g.prep_point,
        }
    }
}

impl TryFrom<GraphJson> for SyndromeGraph {
    type Error = Error;

    fn try_from(mut j: GraphJson) -> Result<Self> {
        let n = j.vertices.len() as u32;
        if j.pseudosyndromes != [n, n + 1] {
            return Err(Error::InvalidBlock(
                "pseudosyndromes must follow the real checks".into(),
            ));
        }
        for e in &mut j.edges {
            e.cut = false;
        }
        for &id in &j.cut {
            let e = j
                .edges
                .get_mut(id as usize)
                .ok_or_else(|| Error::InvalidBlock(format!("cut edge {id} out of range")))?;
            e.cut = true;
        }
        SyndromeGraph::from_parts(j.graph_id, j.vertices, j.edges, j.prep_point)
    }
}

impl SyndromeGraph {
    /// Assembles a graph from raw parts; membrane sides are derived from the
    /// cut flags by parity labelling from `B1`.
    pub fn from_parts(id: GraphId, checks: Vec<Check>, edges: Vec<Edge>, prep_point: Option<Coord>) -> Result<Self> {
        let nv = checks.len() + 2;
        for (i, e) in edges.iter().enumerate() {
            if e.endpoints.iter().any(|&v| v as usize >= nv) {
                return Err(Error::InvalidBlock(format!("edge {i} has an unknown endpoint")));
            }
        }
        let adjacency = Adjacency::build(nv, &edges);
        let mut graph = Self {
            id,
            checks,
            edges,
            prep_point,
            adjacency,
            far_side: vec![false; nv],
            lattice: false,
        };
        graph.far_side = graph.parity_labels().0;
        Ok(graph)
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.checks.len() + 2
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn b1(&self) -> u32 {
        self.checks.len() as u32
    }

    pub fn b2(&self) -> u32 {
        self.checks.len() as u32 + 1
    }

    pub fn is_pseudo(&self, v: u32) -> bool {
        v as usize >= self.checks.len()
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    #[inline]
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        self.adjacency.neighbors(v)
    }

    /// `true` when `v` lies on the `B2` side of the membrane.
    #[inline]
    pub fn on_far_side(&self, v: u32) -> bool {
        self.far_side[v as usize]
    }

    pub fn cut_edges(&self) -> impl Iterator<Item = u32> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.cut)
            .map(|(i, _)| i as u32)
    }

    /// Labels every vertex by the cut parity of a BFS-tree path from `B1`.
    /// Returns the labels and whether every vertex was reached.
    fn parity_labels(&self) -> (Vec<bool>, bool) {
        let nv = self.num_vertices();
        let mut label = vec![false; nv];
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::new();
        seen[self.b1() as usize] = true;
        queue.push_back(self.b1());
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, e) in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    label[w as usize] = label[v as usize] ^ self.edges[e as usize].cut;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        (label, reached == nv)
    }

    /// Unit-cost shortest `B1`–`B2` path length over the edges accepted by
    /// `allow`, or `None` when the boundaries are disconnected.
    pub fn boundary_distance(&self, allow: impl Fn(&Edge) -> bool) -> Option<u32> {
        let nv = self.num_vertices();
        let mut dist = vec![u32::MAX; nv];
        let mut queue = VecDeque::new();
        dist[self.b1() as usize] = 0;
        queue.push_back(self.b1());
        while let Some(v) = queue.pop_front() {
            if v == self.b2() {
                return Some(dist[v as usize]);
            }
            for &(w, e) in self.neighbors(v) {
                if dist[w as usize] == u32::MAX && allow(&self.edges[e as usize]) {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Checks the parity invariant of the membrane: the cut must be the
    /// coboundary of a vertex set holding `B1` but not `B2`.
    pub fn cut_parity_ok(&self) -> bool {
        let (label, connected) = self.parity_labels();
        connected
            && !label[self.b1() as usize]
            && label[self.b2() as usize]
            && self
                .edges
                .iter()
                .all(|e| label[e.endpoints[0] as usize] ^ label[e.endpoints[1] as usize] == e.cut)
    }
}

/// Primal and dual syndrome graphs of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockGraphs {
    pub params: BlockParams,
    pub primal: SyndromeGraph,
    pub dual: SyndromeGraph,
}

impl BlockGraphs {
    pub fn graph(&self, id: GraphId) -> &SyndromeGraph {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }

    /// Logical membranes in decoding order.
    pub fn membranes(&self) -> [GraphId; 2] {
        GraphId::ALL
    }

    pub fn graphs(&self) -> [&SyndromeGraph; 2] {
        [&self.primal, &self.dual]
    }

    pub fn num_edges(&self) -> usize {
        self.primal.num_edges() + self.dual.num_edges()
    }
}

/// Builds both syndrome graphs of a block.
pub fn build_block(params: BlockParams) -> Result<BlockGraphs> {
    params.check()?;
    Ok(BlockGraphs {
        params,
        primal: build_graph(&params, GraphId::Primal)?,
        dual: build_graph(&params, GraphId::Dual)?,
    })
}

fn build_graph(params: &BlockParams, id: GraphId) -> Result<SyndromeGraph> {
    let l = params.distance as i32;
    let depth = params.depth as i32;
    let c = params.center();
    let prep = Coord::new(c, c, 0);
    // Local frame `(u, v)`: boundaries at the two `u` walls. The dual graph is
    // the transpose of the primal one.
    let to_global = |u: i32, v: i32, t: i32| match id {
        GraphId::Primal => Coord::new(u, v, t),
        GraphId::Dual => Coord::new(v, u, t),
    };
    let cols = l - 1;
    let rows = l;
    let n = (cols * rows * depth) as u32;
    let b1 = n;
    let b2 = n + 1;
    let index = |iu: i32, iv: i32, t: i32| (((t - 1) * rows + iv) * cols + iu) as u32;

    let mut checks = Vec::with_capacity(n as usize);
    for t in 1..=depth {
        for iv in 0..rows {
            for iu in 0..cols {
                let coord = to_global(2 * iu + 1, 2 * iv, 2 * t);
                checks.push(Check {
                    coord,
                    radius: coord.radius_from(&prep),
                });
            }
        }
    }

    let far = |v: u32| -> bool {
        if v == b1 {
            false
        } else if v == b2 {
            true
        } else {
            let coord = checks[v as usize].coord;
            match id {
                GraphId::Primal => coord.x > c,
                GraphId::Dual => coord.y > c,
            }
        }
    };

    let mut edges = Vec::new();
    let mut push = |a: u32, b: u32, coord: Coord, kind: EdgeKind| {
        edges.push(Edge {
            endpoints: [a, b],
            coord,
            radius: coord.radius_from(&prep),
            kind,
            cut: far(a) != far(b),
        });
    };

    for t in 1..=depth {
        if t == 1 && params.kind == BlockKind::Preparation {
            for iv in 0..rows {
                for iu in 0..cols {
                    let (u, v) = (2 * iu + 1, 2 * iv);
                    let here = index(iu, iv, 1);
                    let g = to_global(u, v, 1);
                    // Offsets along the graph's own boundary axis (`du`) and
                    // across it (`dv`).
                    let (du, dv) = match id {
                        GraphId::Primal => (g.x - c, g.y - c),
                        GraphId::Dual => (g.y - c, g.x - c),
                    };
                    if du == 0 && dv.abs() == 1 {
                        // Straddles both boundary sectors at the preparation point.
                        push(here, b1, to_global(u - 1, v, 1), EdgeKind::Input);
                        push(here, b2, to_global(u + 1, v, 1), EdgeKind::Input);
                        continue;
                    }
                    let region = input_region(g.x - c, g.y - c);
                    let side = match (id, region) {
                        (GraphId::Primal, InputRegion::Left) => Some(b1),
                        (GraphId::Primal, InputRegion::Right) => Some(b2),
                        (GraphId::Dual, InputRegion::Bottom) => Some(b1),
                        (GraphId::Dual, InputRegion::Top) => Some(b2),
                        _ => None,
                    };
                    if let Some(boundary) = side {
                        push(here, boundary, g, EdgeKind::Input);
                    }
                }
            }
        }
        for iv in 0..rows {
            for k in 0..l {
                let left = if k == 0 { b1 } else { index(k - 1, iv, t) };
                let right = if k == l - 1 { b2 } else { index(k, iv, t) };
                push(left, right, to_global(2 * k, 2 * iv, 2 * t), EdgeKind::Space);
            }
        }
        for j in 0..rows - 1 {
            for iu in 0..cols {
                push(
                    index(iu, j, t),
                    index(iu, j + 1, t),
                    to_global(2 * iu + 1, 2 * j + 1, 2 * t),
                    EdgeKind::Space,
                );
            }
        }
        if t < depth {
            for iv in 0..rows {
                for iu in 0..cols {
                    push(
                        index(iu, iv, t),
                        index(iu, iv, t + 1),
                        to_global(2 * iu + 1, 2 * iv, 2 * t + 1),
                        EdgeKind::Time,
                    );
                }
            }
        }
    }

    let prep_point = (params.kind == BlockKind::Preparation).then_some(prep);
    let mut graph = SyndromeGraph::from_parts(id, checks, edges, prep_point)?;
    graph.lattice = true;
    Ok(graph)
}

/// Structural checks of one syndrome graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphValidation {
    pub graph: GraphId,
    /// Shortest boundary-to-boundary path through the later half of the block.
    pub bulk_distance: Option<u32>,
    /// Fewest flips forming an undetectable logical error.
    pub min_fault_weight: Option<u32>,
    pub cut_parity_ok: bool,
    pub radius_ok: bool,
    pub pseudosyndromes_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: BlockParams,
    pub membranes: usize,
    pub graphs: Vec<GraphValidation>,
    pub cut_parity_ok: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.ok() {
            Ok(self)
        } else {
            Err(Error::Validation(self.failures.join("; ")))
        }
    }
}

/// Runs the structural checks on a built block. Failures are collected into
/// the report rather than returned as errors.
pub fn validate_block(graphs: &BlockGraphs) -> ValidationReport {
    let params = graphs.params;
    let half = params.depth.div_ceil(2) as i32;
    let bulk_t = 2 * half;
    let max_radius = params.distance.max(params.depth) as u32;
    let mut failures = Vec::new();
    let mut reports = Vec::new();

    for g in graphs.graphs() {
        let name = g.id.name();
        let bulk = g.boundary_distance(|e| {
            e.kind != EdgeKind::Input
                && e.endpoints
                    .iter()
                    .all(|&v| g.is_pseudo(v) || g.checks[v as usize].coord.t >= bulk_t)
        });
        let fault = g.boundary_distance(|_| true);
        let cut_ok = g.cut_parity_ok();
        let radius_ok =
            params.kind == BlockKind::Memory || g.edges.iter().all(|e| e.radius >= 1 && e.radius <= max_radius);
        let pseudo_ok = g
            .edges
            .iter()
            .all(|e| e.endpoints[0] != e.endpoints[1] && !(g.is_pseudo(e.endpoints[0]) && g.is_pseudo(e.endpoints[1])));

        if bulk != Some(params.distance as u32) {
            failures.push(format!("{name}: bulk distance {bulk:?}, expected {}", params.distance));
        }
        let expected_fault = match params.kind {
            BlockKind::Preparation => 2,
            BlockKind::Memory => params.distance as u32,
        };
        if fault != Some(expected_fault) {
            failures.push(format!("{name}: fault weight {fault:?}, expected {expected_fault}"));
        }
        if !cut_ok {
            failures.push(format!("{name}: membrane parity broken"));
        }
        if !radius_ok {
            failures.push(format!("{name}: radius annotation out of range"));
        }
        if !pseudo_ok {
            failures.push(format!("{name}: degenerate or boundary-to-boundary edge"));
        }
        reports.push(GraphValidation {
            graph: g.id,
            bulk_distance: bulk,
            min_fault_weight: fault,
            cut_parity_ok: cut_ok,
            radius_ok,
            pseudosyndromes_ok: pseudo_ok,
        });
    }

    let membranes = graphs.membranes().len();
    let cut_parity_ok = reports.iter().all(|r| r.cut_parity_ok);
    ValidationReport {
        params,
        membranes,
        graphs: reports,
        cut_parity_ok,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_blocks() {
        assert!(BlockParams::preparation(1, 4).is_err());
        assert!(BlockParams::memory(4, 1).is_err());
        assert!(BlockParams::memory(2, 2).is_ok());
    }

    #[test]
    fn memory_2x2x2_matches_hand_count() {
        // Per layer: checks (1,0) and (1,2); data edges (0,0),(2,0),(0,2),(2,2)
        // to the walls plus (1,1) between the two checks. One time edge per
        // check between the two layers.
        let g = build_block(BlockParams::memory(2, 2).unwrap()).unwrap();
        for graph in g.graphs() {
            assert_eq!(graph.num_checks(), 4);
            assert_eq!(graph.num_edges(), 2 * 5 + 2);
            let boundary = graph
                .edges
                .iter()
                .filter(|e| e.endpoints.iter().any(|&v| graph.is_pseudo(v)))
                .count();
            assert_eq!(boundary, 8);
        }
    }

    #[test]
    fn preparation_2x2x2_adds_four_input_edges() {
        let g = build_block(BlockParams::preparation(2, 2).unwrap()).unwrap();
        for graph in g.graphs() {
            let input: Vec<_> = graph.edges.iter().filter(|e| e.kind == EdgeKind::Input).collect();
            assert_eq!(input.len(), 4);
            assert_eq!(graph.num_edges(), 16);
        }
    }

    #[test]
    fn region_ties_go_clockwise() {
        assert_eq!(input_region(2, 2), InputRegion::Right);
        assert_eq!(input_region(2, -2), InputRegion::Bottom);
        assert_eq!(input_region(-2, -2), InputRegion::Left);
        assert_eq!(input_region(-2, 2), InputRegion::Top);
        assert_eq!(input_region(-3, 1), InputRegion::Left);
        assert_eq!(input_region(1, 3), InputRegion::Top);
        assert_eq!(input_region(0, 0), InputRegion::Center);
    }

    #[test]
    fn preparation_blocks_validate() {
        for l in [2, 3, 4, 5, 6, 8] {
            let g = build_block(BlockParams::preparation(l, l).unwrap()).unwrap();
            let report = validate_block(&g);
            assert!(report.ok(), "L={l}: {:?}", report.failures);
            assert_eq!(report.membranes, 2);
            assert!(report.graphs.iter().all(|r| r.min_fault_weight == Some(2)));
        }
    }

    #[test]
    fn memory_blocks_validate() {
        for l in [2, 4, 5, 6] {
            let g = build_block(BlockParams::memory(l, l).unwrap()).unwrap();
            let report = validate_block(&g);
            assert!(report.ok(), "L={l}: {:?}", report.failures);
            assert!(report.graphs.iter().all(|r| r.bulk_distance == Some(l as u32)));
        }
    }

    #[test]
    fn only_one_pair_of_pseudosyndromes() {
        let g = build_block(BlockParams::preparation(4, 4).unwrap()).unwrap();
        for graph in g.graphs() {
            let pseudo: std::collections::BTreeSet<u32> = graph
                .edges
                .iter()
                .flat_map(|e| e.endpoints)
                .filter(|&v| graph.is_pseudo(v))
                .collect();
            assert_eq!(pseudo.into_iter().collect::<Vec<_>>(), vec![graph.b1(), graph.b2()]);
        }
    }

    #[test]
    fn broken_cut_is_reported() {
        let mut g = build_block(BlockParams::memory(3, 3).unwrap()).unwrap();
        g.primal.edges[5].cut = !g.primal.edges[5].cut;
        let report = validate_block(&g);
        assert!(!report.cut_parity_ok);
        assert!(!report.ok());
    }

    #[test]
    fn graph_json_round_trip() {
        let g = build_block(BlockParams::preparation(3, 2).unwrap()).unwrap();
        let text = serde_json::to_string(&g.primal).unwrap();
        let back: SyndromeGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g.primal);
        assert!(back.cut_parity_ok());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["graph_id", "vertices", "pseudosyndromes", "edges", "cut"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }
}
