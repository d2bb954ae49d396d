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

//! Independent Pauli and erasure noise on the error locations of a block.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BlockGraphs, GraphId, SyndromeGraph};

/// Per-location probabilities. An erased location is flipped with
/// probability one half; a location that is not erased is flipped with
/// probability `p_error`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub p_error: f64,
    pub p_erasure: f64,
}

impl ErrorModel {
    pub fn new(p_error: f64, p_erasure: f64) -> Result<Self> {
        for (name, p) in [("p_error", p_error), ("p_erasure", p_erasure)] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidModel(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p_error, p_erasure })
    }

    pub fn pauli(p_error: f64) -> Result<Self> {
        Self::new(p_error, 0.0)
    }

    /// Marginal flip probability of one location.
    pub fn flip_probability(&self) -> f64 {
        self.p_erasure / 2.0 + (1.0 - self.p_erasure) * self.p_error
    }
}

/// Fixed ratio between erasure and Pauli rates, parametrised by one scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorRay {
    /// No erasures.
    Pauli,
    /// Erasure and Pauli rates equal.
    Equal,
    /// Pauli rate one ninth of the erasure rate.
    ErasureNinth,
}

impl ErrorRay {
    pub const ALL: [ErrorRay; 3] = [ErrorRay::Pauli, ErrorRay::Equal, ErrorRay::ErasureNinth];

    /// Model at scalar `x` along the ray. For rays with erasure `x` is the
    /// erasure rate, for the Pauli ray it is the Pauli rate.
    pub fn model(self, x: f64) -> Result<ErrorModel> {
        match self {
            ErrorRay::Pauli => ErrorModel::new(x, 0.0),
            ErrorRay::Equal => ErrorModel::new(x, x),
            ErrorRay::ErasureNinth => ErrorModel::new(x / 9.0, x),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorRay::Pauli => "pauli",
            ErrorRay::Equal => "1:1",
            ErrorRay::ErasureNinth => "1:1/9",
        }
    }
}

impl fmt::Display for ErrorRay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ErrorRay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pauli" | "pure" | "pure_pauli" => Ok(ErrorRay::Pauli),
            "1:1" => Ok(ErrorRay::Equal),
            "1:1/9" => Ok(ErrorRay::ErasureNinth),
            other => Err(Error::InvalidModel(format!("unknown error ray {other:?}"))),
        }
    }
}

impl Serialize for ErrorRay {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for ErrorRay {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sorted flipped and erased edge ids of one graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSample {
    pub flipped: Vec<u32>,
    pub erased: Vec<u32>,
}

impl GraphSample {
    pub fn clear(&mut self) {
        self.flipped.clear();
        self.erased.clear();
    }

    /// Lit real checks, sorted.
    pub fn syndrome(&self, graph: &SyndromeGraph) -> Vec<u32> {
        let mut lit = vec![false; graph.num_checks()];
        for &e in &self.flipped {
            for v in graph.edges[e as usize].endpoints {
                if !graph.is_pseudo(v) {
                    lit[v as usize] ^= true;
                }
            }
        }
        lit.iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(v, _)| v as u32)
            .collect()
    }

    /// Parity of flipped edges on the membrane.
    pub fn true_class(&self, graph: &SyndromeGraph) -> bool {
        self.flipped.iter().filter(|&&e| graph.edges[e as usize].cut).count() % 2 == 1
    }

    pub fn erased_mask(&self, graph: &SyndromeGraph) -> Vec<bool> {
        let mut mask = vec![false; graph.num_edges()];
        for &e in &self.erased {
            mask[e as usize] = true;
        }
        mask
    }
}

/// One sampled noise configuration of a full block.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub trial: u64,
    pub seed: u64,
    pub primal: GraphSample,
    pub dual: GraphSample,
}

impl Configuration {
    pub fn graph(&self, id: GraphId) -> &GraphSample {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }

    pub fn graph_mut(&mut self, id: GraphId) -> &mut GraphSample {
        match id {
            GraphId::Primal => &mut self.primal,
            GraphId::Dual => &mut self.dual,
        }
    }

    /// Flips `edge` in `graph`, keeping the list sorted.
    pub fn toggle_flip(&mut self, graphs: &BlockGraphs, id: GraphId, edge: u32) -> Result<()> {
        if edge as usize >= graphs.graph(id).num_edges() {
            return Err(Error::UnknownEdge { graph: id.name(), edge });
        }
        let list = &mut self.graph_mut(id).flipped;
        match list.binary_search(&edge) {
            Ok(i) => {
                list.remove(i);
            }
            Err(i) => list.insert(i, edge),
        }
        Ok(())
    }
}

/// What the decoder sees of one graph: lit checks and erased locations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphVisible {
    pub syndrome: Vec<u32>,
    pub erased: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibleInfo {
    pub primal: GraphVisible,
    pub dual: GraphVisible,
}

impl VisibleInfo {
    pub fn graph(&self, id: GraphId) -> &GraphVisible {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }
}

/// Syndromes and erasures of `config`. Fails on edge ids the block lacks.
pub fn extract_visible(graphs: &BlockGraphs, config: &Configuration) -> Result<VisibleInfo> {
    let mut out = VisibleInfo::default();
    for id in GraphId::ALL {
        let graph = graphs.graph(id);
        let sample = config.graph(id);
        let n = graph.num_edges() as u32;
        if let Some(&edge) = sample.flipped.iter().chain(&sample.erased).find(|&&e| e >= n) {
            return Err(Error::UnknownEdge { graph: id.name(), edge });
        }
        let visible = match id {
            GraphId::Primal => &mut out.primal,
            GraphId::Dual => &mut out.dual,
        };
        visible.syndrome = sample.syndrome(graph);
        visible.erased = sample.erased.clone();
    }
    Ok(out)
}

/// Hidden logical class of `config` on one membrane.
pub fn true_class(graphs: &BlockGraphs, config: &Configuration, id: GraphId) -> bool {
    config.graph(id).true_class(graphs.graph(id))
}

/// Seed of trial `index` under `master`. Trials are independent of the order
/// in which they are evaluated.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index)
        .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws one configuration. Each location consumes one uniform variate,
/// primal locations first.
pub fn sample_configuration(graphs: &BlockGraphs, model: &ErrorModel, seed: u64) -> Configuration {
    let mut config = Configuration::default();
    sample_into(graphs, model, seed, &mut config);
    config
}

/// Same as [`sample_configuration`] but reuses the buffers of `out`.
pub fn sample_into(graphs: &BlockGraphs, model: &ErrorModel, seed: u64, out: &mut Configuration) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pe = model.p_erasure;
    let threshold = pe + (1.0 - pe) * model.p_error;
    out.seed = seed;
    for id in GraphId::ALL {
        let n = graphs.graph(id).num_edges() as u32;
        let sample = out.graph_mut(id);
        sample.clear();
        for e in 0..n {
            let u: f64 = rng.random();
            if u < pe {
                sample.erased.push(e);
                if u < pe / 2.0 {
                    sample.flipped.push(e);
                }
            } else if u < threshold {
                sample.flipped.push(e);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_block, BlockParams};

    #[test]
    fn rejects_bad_probabilities() {
        assert!(ErrorModel::new(-0.1, 0.0).is_err());
        assert!(ErrorModel::new(0.1, 1.5).is_err());
        assert!(ErrorModel::new(f64::NAN, 0.0).is_err());
        assert!(ErrorModel::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn rays_parse_and_scale() {
        let m = "1:1/9".parse::<ErrorRay>().unwrap().model(0.09).unwrap();
        assert!((m.p_error - 0.01).abs() < 1e-15);
        assert_eq!(m.p_erasure, 0.09);
        assert_eq!("1:1".parse::<ErrorRay>().unwrap(), ErrorRay::Equal);
        assert!("2:1".parse::<ErrorRay>().is_err());
    }

    #[test]
    fn same_seed_same_configuration() {
        let g = build_block(BlockParams::preparation(4, 4).unwrap()).unwrap();
        let m = ErrorModel::new(0.05, 0.05).unwrap();
        let a = sample_configuration(&g, &m, 17);
        let b = sample_configuration(&g, &m, 17);
        let c = sample_configuration(&g, &m, 18);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| trial_seed(3, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn marginals_match_model() {
        let g = build_block(BlockParams::memory(6, 6).unwrap()).unwrap();
        let m = ErrorModel::new(0.03, 0.2).unwrap();
        let (mut flips, mut erasures, mut erased_flips, mut total) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..200 {
            let c = sample_configuration(&g, &m, trial_seed(9, i));
            for id in GraphId::ALL {
                let s = c.graph(id);
                flips += s.flipped.len();
                erasures += s.erased.len();
                erased_flips += s.flipped.iter().filter(|e| s.erased.binary_search(e).is_ok()).count();
            }
            total += g.num_edges();
        }
        let n = total as f64;
        let pf = flips as f64 / n;
        let pe = erasures as f64 / n;
        let tol = |p: f64| 5.0 * (p * (1.0 - p) / n).sqrt();
        assert!((pf - m.flip_probability()).abs() < tol(m.flip_probability()));
        assert!((pe - 0.2).abs() < tol(0.2));
        let half = erased_flips as f64 / erasures as f64;
        assert!((half - 0.5).abs() < 5.0 * (0.25 / erasures as f64).sqrt());
    }

    #[test]
    fn syndrome_is_boundary_of_flips() {
        let g = build_block(BlockParams::preparation(3, 3).unwrap()).unwrap();
        let mut c = Configuration::default();
        let primal = &g.primal;
        let e = primal
            .edges
            .iter()
            .position(|e| e.endpoints.iter().all(|&v| !primal.is_pseudo(v)))
            .unwrap() as u32;
        c.toggle_flip(&g, GraphId::Primal, e).unwrap();
        let mut ends = primal.edges[e as usize].endpoints.to_vec();
        ends.sort();
        assert_eq!(c.primal.syndrome(primal), ends);
        c.toggle_flip(&g, GraphId::Primal, e).unwrap();
        assert!(c.primal.syndrome(primal).is_empty());
        assert!(c.toggle_flip(&g, GraphId::Dual, 1 << 30).is_err());
    }

    #[test]
    fn visible_rejects_unknown_edges() {
        let g = build_block(BlockParams::memory(2, 2).unwrap()).unwrap();
        let mut c = Configuration::default();
        c.dual.erased.push(999);
        assert!(matches!(
            extract_visible(&g, &c),
            Err(Error::UnknownEdge {
                graph: "dual",
                edge: 999
            })
        ));
    }

    #[test]
    fn boundary_path_is_a_logical() {
        let g = build_block(BlockParams::memory(4, 4).unwrap()).unwrap();
        let mut c = Configuration::default();
        // Row v = 0 of layer 1: the first L horizontal edges form a B1-B2 path.
        let layer: Vec<u32> = g
            .primal
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.coord.y == 0 && e.coord.t == 2 && e.coord.x % 2 == 0)
            .map(|(i, _)| i as u32)
            .collect();
        assert_eq!(layer.len(), 4);
        for e in layer {
            c.toggle_flip(&g, GraphId::Primal, e).unwrap();
        }
        let v = extract_visible(&g, &c).unwrap();
        assert!(v.primal.syndrome.is_empty());
        assert!(true_class(&g, &c, GraphId::Primal));
        assert!(!true_class(&g, &c, GraphId::Dual));
    }

    #[test]
    fn extreme_models() {
        let g = build_block(BlockParams::preparation(3, 3).unwrap()).unwrap();
        let none = sample_configuration(&g, &ErrorModel::new(0.0, 0.0).unwrap(), 5);
        assert!(none.primal.flipped.is_empty() && none.dual.erased.is_empty());
        let all = sample_configuration(&g, &ErrorModel::new(1.0, 0.0).unwrap(), 5);
        assert_eq!(all.primal.flipped.len(), g.primal.num_edges());
        assert_eq!(all.dual.flipped.len(), g.dual.num_edges());
    }
}
