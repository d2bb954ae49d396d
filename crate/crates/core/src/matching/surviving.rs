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

//! Shortest boundary-to-boundary paths when erased locations are free.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::{BlockGraphs, GraphId, SyndromeGraph};
use crate::noise::VisibleInfo;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSurviving {
    /// Non-erased locations on the cheapest `B1`–`B2` path.
    pub d: u32,
    /// Number of cheapest paths after contracting erased clusters.
    pub m: f64,
    pub ln_m: f64,
    /// `d - c ln m`.
    pub q_d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivingDistanceResult {
    pub primal: GraphSurviving,
    pub dual: GraphSurviving,
}

impl SurvivingDistanceResult {
    pub fn compute(graphs: &BlockGraphs, visible: &VisibleInfo, c: f64) -> Self {
        Self {
            primal: surviving_distance(&graphs.primal, &visible.primal.erased, c),
            dual: surviving_distance(&graphs.dual, &visible.dual.erased, c),
        }
    }

    pub fn graph(&self, id: GraphId) -> &GraphSurviving {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        let up = parent[parent[v as usize] as usize];
        parent[v as usize] = up;
        v = up;
    }
    v
}

/// Surviving distance of one graph. Each connected cluster of erased edges
/// is contracted to one node; parallel surviving edges between two clusters
/// count as distinct paths.
pub fn surviving_distance(graph: &SyndromeGraph, erased: &[u32], c: f64) -> GraphSurviving {
    let nv = graph.num_vertices();
    let mut parent: Vec<u32> = (0..nv as u32).collect();
    let mut is_erased = vec![false; graph.num_edges()];
    for &e in erased {
        is_erased[e as usize] = true;
        let [a, b] = graph.edges[e as usize].endpoints;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra as usize] = rb;
        }
    }
    let rep: Vec<u32> = (0..nv as u32).map(|v| find(&mut parent, v)).collect();
    let (src, dst) = (rep[graph.b1() as usize], rep[graph.b2() as usize]);
    if src == dst {
        return GraphSurviving {
            d: 0,
            m: 1.0,
            ln_m: 0.0,
            q_d: 0.0,
        };
    }

    // Contracted adjacency over cluster representatives.
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for v in 0..nv as u32 {
        members[rep[v as usize] as usize].push(v);
    }
    let mut dist = vec![u32::MAX; nv];
    let mut count = vec![0.0f64; nv];
    let mut queue = VecDeque::new();
    dist[src as usize] = 0;
    count[src as usize] = 1.0;
    queue.push_back(src);
    while let Some(cl) = queue.pop_front() {
        if dist[cl as usize] >= dist[dst as usize] {
            break;
        }
        let next = dist[cl as usize] + 1;
        for &v in &members[cl as usize] {
            for &(w, e) in graph.neighbors(v) {
                if is_erased[e as usize] {
                    continue;
                }
                let to = rep[w as usize];
                if to == cl {
                    continue;
                }
                if dist[to as usize] == u32::MAX {
                    dist[to as usize] = next;
                    queue.push_back(to);
                }
                if dist[to as usize] == next {
                    count[to as usize] += count[cl as usize];
                }
            }
        }
    }
    let d = dist[dst as usize];
    assert!(d != u32::MAX, "boundaries are disconnected");
    let m = count[dst as usize];
    let ln_m = m.ln();
    GraphSurviving {
        d,
        m,
        ln_m,
        q_d: d as f64 - c * ln_m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_block, BlockParams, EdgeKind};

    #[test]
    fn clean_preparation_block() {
        let g = build_block(BlockParams::preparation(6, 6).unwrap()).unwrap();
        let s = surviving_distance(&g.primal, &[], 0.0);
        assert_eq!(s.d, 2);
        assert_eq!(s.q_d, 2.0);
        // Only the two checks beside the preparation point carry both
        // boundary edges.
        assert_eq!(s.m, 2.0);
        let s1 = surviving_distance(&g.primal, &[], 1.0);
        assert!(s1.q_d < s.q_d);
    }

    #[test]
    fn clean_memory_block_counts_straight_rows() {
        // Memory L=3, depth 2: shortest paths are the 3 straight rows in each
        // of the 2 layers.
        let g = build_block(BlockParams::memory(3, 2).unwrap()).unwrap();
        let s = surviving_distance(&g.primal, &[], 0.0);
        assert_eq!(s.d, 3);
        assert_eq!(s.m, 6.0);
    }

    #[test]
    fn spanning_erasure() {
        let g = build_block(BlockParams::preparation(4, 4).unwrap()).unwrap();
        let span: Vec<u32> = g
            .primal
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                let c = g.params.center();
                e.kind == EdgeKind::Input && e.coord.y == c + 1 && (e.coord.x - c).abs() == 1
            })
            .map(|(i, _)| i as u32)
            .collect();
        assert_eq!(span.len(), 2);
        let s = surviving_distance(&g.primal, &span, 0.5);
        assert_eq!(s.d, 0);
        assert_eq!(s.q_d, 0.0);
        let partial = surviving_distance(&g.primal, &span[..1], 0.0);
        assert_eq!(partial.d, 1);
    }
}
