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

//! Run configuration files.
//!
//! A config is one TOML document:
//!
//! ```toml
//! seed = 7
//! n_trials = 100000
//! out = "results"            # optional, overridden by --out
//! kappa_grid = [1.0, 0.1]    # optional, replaces the default grid
//! p_init = 0.01              # optional, defaults to each point's p_error
//!
//! [block]
//! kind = "preparation"       # or "memory"
//! distance = 8
//! depth = 8
//!
//! [noise]                    # either an explicit model...
//! p_error = 0.0186
//! p_erasure = 0.0
//!
//! # ...or fractions of a threshold along a ray:
//! # ray = "pauli"            # "pauli", "1:1" or "1:1/9"
//! # fractions = [0.6, 1.0]
//! # threshold = 0.031        # or a [calibration] table
//!
//! [calibration]              # used by `calibrate`, and by `run` when no
//! sizes = [4, 6, 8]          # threshold is given inline
//! grid = [0.026, 0.028, 0.030, 0.032, 0.034]
//! n_per_point = 20000
//!
//! [[rules]]
//! kind = "radial_gap"        # annular_syndrome, gap, nested_gap,
//! alpha = 0.1                # radial_gap, surviving_distance
//! ```

use std::path::{Path, PathBuf};

use ftps_core::geometry::BlockParams;
use ftps_core::noise::{ErrorModel, ErrorRay};
use ftps_core::rules::RuleConfig;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_trials: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub kappa_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub p_init: Option<f64>,
    #[serde(default)]
    pub block: Option<BlockParams>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub calibration: Option<CalibrationConfig>,
    #[serde(default)]
    pub rules: Vec<RuleConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub p_error: Option<f64>,
    #[serde(default)]
    pub p_erasure: Option<f64>,
    #[serde(default)]
    pub ray: Option<ErrorRay>,
    #[serde(default)]
    pub fractions: Option<Vec<f64>>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Defaults to the noise ray, or pure Pauli.
    #[serde(default)]
    pub ray: Option<ErrorRay>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    pub grid: Vec<f64>,
    pub n_per_point: u64,
}

fn default_sizes() -> Vec<usize> {
    vec![4, 6, 8]
}

/// How the error points of a run are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum NoisePlan {
    Explicit(ErrorModel),
    Fractions {
        ray: ErrorRay,
        fractions: Vec<f64>,
        threshold: Option<f64>,
    },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::config(e.to_string()))
    }

    pub fn block(&self) -> Result<BlockParams, Failure> {
        let b = self.block.ok_or_else(|| Failure::config("missing [block] table"))?;
        BlockParams::new(b.distance, b.depth, b.kind).map_err(Failure::config)
    }

    pub fn noise_plan(&self) -> Result<NoisePlan, Failure> {
        let n = self
            .noise
            .as_ref()
            .ok_or_else(|| Failure::config("missing [noise] table"))?;
        let explicit = n.p_error.is_some() || n.p_erasure.is_some();
        let fraction = n.ray.is_some() || n.fractions.is_some() || n.threshold.is_some();
        match (explicit, fraction) {
            (true, true) => Err(Failure::config(
                "[noise] mixes an explicit model with ray/fractions/threshold",
            )),
            (false, false) => Err(Failure::config("[noise] needs p_error or ray and fractions")),
            (true, false) => {
                let m =
                    ErrorModel::new(n.p_error.unwrap_or(0.0), n.p_erasure.unwrap_or(0.0)).map_err(Failure::config)?;
                Ok(NoisePlan::Explicit(m))
            }
            (false, true) => {
                let fractions = n
                    .fractions
                    .clone()
                    .ok_or_else(|| Failure::config("[noise] fraction mode needs `fractions`"))?;
                if fractions.is_empty() || fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                    return Err(Failure::config("fractions must be positive and finite"));
                }
                if let Some(t) = n.threshold {
                    if !(t > 0.0 && t <= 1.0) {
                        return Err(Failure::config(format!("threshold {t} is outside (0, 1]")));
                    }
                }
                Ok(NoisePlan::Fractions {
                    ray: n.ray.unwrap_or(ErrorRay::Pauli),
                    fractions,
                    threshold: n.threshold,
                })
            }
        }
    }

    /// Calibration settings with the ray resolved.
    pub fn calibration(&self) -> Result<Option<(ErrorRay, CalibrationConfig)>, Failure> {
        let Some(c) = self.calibration.clone() else {
            return Ok(None);
        };
        let noise_ray = self.noise.as_ref().and_then(|n| n.ray);
        let ray = match (c.ray, noise_ray) {
            (Some(a), Some(b)) if a != b => {
                return Err(Failure::config(format!(
                    "[calibration] ray {a} differs from [noise] ray {b}"
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => ErrorRay::Pauli,
        };
        Ok(Some((ray, c)))
    }
}
