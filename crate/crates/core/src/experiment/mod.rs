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

//! Monte Carlo trials, post-selection curves and threshold calibration.

mod curves;
mod output;
mod threshold;

use serde::{Deserialize, Serialize};

pub use curves::{
    breakeven, cutoff_for_keep, default_kappa_grid, eer_curve, gap_sector_boundaries, order_by_rule, score_diagnostics,
    signed_gap_eer, Breakeven, CurvePoint, DiagnosticBin, Diagnostics, EerCurve,
};
pub use output::{curves_csv, diagnostics_csv, trials_jsonl, write_text};
pub use threshold::{estimate_threshold, failure_rate, FailurePoint, PairCrossing, ThresholdEstimate, ThresholdScan};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{build_block, validate_block, BlockGraphs, BlockParams, GraphId};
use crate::matching::{assign_weights, Decoder, GapResult, RadialWeights, SurvivingDistanceResult};
use crate::noise::{extract_visible, sample_into, trial_seed, Configuration, ErrorModel};
use crate::rules::{score_annular, score_gap, score_surviving, AnnularTables, RuleConfig, RuleKind, Score};

/// Decode outcome on one membrane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembraneOutcome {
    pub true_class: bool,
    pub decoded_class: bool,
    pub tie: bool,
    pub abs_gap: f64,
    /// `w_wrong - w_correct`.
    pub signed_gap: f64,
}

/// Scores and outcome of one sampled block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub scores: Vec<Score>,
    pub primal: MembraneOutcome,
    pub dual: MembraneOutcome,
    /// Probability that the decoded output carries a logical error.
    pub failure: f64,
}

impl TrialRecord {
    pub fn membrane(&self, id: GraphId) -> &MembraneOutcome {
        match id {
            GraphId::Primal => &self.primal,
            GraphId::Dual => &self.dual,
        }
    }

    /// Unit-weight gap score with unit linear weights.
    pub fn gap_score(&self) -> f64 {
        (-self.primal.abs_gap).exp() + (-self.dual.abs_gap).exp()
    }
}

/// Combined failure probability of independent membranes: a tied membrane
/// is decoded by a fair coin.
pub fn combine_failures(f: [f64; 2]) -> f64 {
    1.0 - (1.0 - f[0]) * (1.0 - f[1])
}

/// Immutable result of a trial run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub params: BlockParams,
    pub model: ErrorModel,
    pub rules: Vec<RuleConfig>,
    pub master_seed: u64,
    pub records: Vec<TrialRecord>,
}

impl TrialTable {
    pub fn n_trials(&self) -> usize {
        self.records.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.rules.iter().map(RuleConfig::label).collect()
    }

    pub fn rule_index(&self, label: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.label() == label)
    }

    /// Mean failure weight with no post-selection.
    pub fn eer(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.failure).sum::<f64>() / self.records.len() as f64
    }
}

/// Everything a worker needs besides its scratch space.
struct TrialContext<'a> {
    graphs: &'a BlockGraphs,
    tables: AnnularTables,
    model: ErrorModel,
    rules: &'a [RuleConfig],
    radial: Vec<RadialWeights>,
    master_seed: u64,
}

#[derive(Default)]
struct Worker {
    decoder: Decoder,
    config: Configuration,
}

fn outcome(gap: &GapResult, config: &Configuration, graphs: &BlockGraphs, id: GraphId) -> (MembraneOutcome, f64) {
    let g = gap.graph(id);
    let true_class = config.graph(id).true_class(graphs.graph(id));
    (
        MembraneOutcome {
            true_class,
            decoded_class: g.min_class,
            tie: g.tie,
            abs_gap: g.abs_gap,
            signed_gap: g.signed_gap(true_class),
        },
        g.failure(true_class),
    )
}

impl TrialContext<'_> {
    fn run(&self, w: &mut Worker, trial: u64) -> Result<TrialRecord> {
        let seed = trial_seed(self.master_seed, trial);
        sample_into(self.graphs, &self.model, seed, &mut w.config);
        w.config.trial = trial;
        let visible = extract_visible(self.graphs, &w.config)?;
        let weights = assign_weights(self.graphs, &visible, &self.model, None)?;
        let gap = w.decoder.logical_gap(self.graphs, &visible, &weights);
        let (primal, fp) = outcome(&gap, &w.config, self.graphs, GraphId::Primal);
        let (dual, fd) = outcome(&gap, &w.config, self.graphs, GraphId::Dual);

        let mut radial_gaps: Vec<Option<GapResult>> = vec![None; self.radial.len()];
        let mut scores = Vec::with_capacity(self.rules.len());
        for rule in self.rules {
            let score = match rule.kind {
                RuleKind::AnnularSyndrome => {
                    Score::single(score_annular(self.graphs, &self.tables, &visible, rule.alpha, rule.a).s)
                }
                RuleKind::Gap => Score::single(score_gap(&gap, rule.a)),
                RuleKind::NestedGap => Score::nested(
                    score_gap(&gap, rule.a),
                    score_annular(self.graphs, &self.tables, &visible, rule.alpha, rule.a).s,
                ),
                RuleKind::RadialGap => {
                    let r = radial_of(rule);
                    let slot = self
                        .radial
                        .iter()
                        .position(|x| *x == r)
                        .expect("radial weights registered");
                    if radial_gaps[slot].is_none() {
                        let rw = assign_weights(self.graphs, &visible, &self.model, Some(r))?;
                        radial_gaps[slot] = Some(w.decoder.logical_gap(self.graphs, &visible, &rw));
                    }
                    Score::single(score_gap(radial_gaps[slot].as_ref().unwrap(), rule.a))
                }
                RuleKind::SurvivingDistance => {
                    let sd = SurvivingDistanceResult::compute(self.graphs, &visible, rule.c);
                    Score::single(score_surviving(&sd, rule.a))
                }
            };
            scores.push(score);
        }
        Ok(TrialRecord {
            trial,
            seed,
            scores,
            primal,
            dual,
            failure: combine_failures([fp, fd]),
        })
    }
}

fn radial_of(rule: &RuleConfig) -> RadialWeights {
    RadialWeights {
        alpha: rule.alpha,
        cutoff: rule.radial_cutoff,
    }
}

/// Samples, decodes and scores `n_trials` blocks. The table depends only on
/// the inputs, not on `exec`.
pub fn run_trials(
    params: BlockParams,
    model: ErrorModel,
    rules: &[RuleConfig],
    n_trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<TrialTable> {
    let graphs = build_block(params)?;
    validate_block(&graphs).into_result()?;
    run_trials_on(&graphs, model, rules, n_trials, master_seed, exec)
}

/// [`run_trials`] on an already built block.
pub fn run_trials_on(
    graphs: &BlockGraphs,
    model: ErrorModel,
    rules: &[RuleConfig],
    n_trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<TrialTable> {
    for rule in rules {
        rule.check()?;
    }
    let mut labels: Vec<String> = rules.iter().map(RuleConfig::label).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("rule labels must be unique".into()));
    }
    let mut radial = Vec::new();
    for rule in rules.iter().filter(|r| r.kind == RuleKind::RadialGap) {
        let r = radial_of(rule);
        r.check()?;
        if !radial.contains(&r) {
            radial.push(r);
        }
    }
    let ctx = TrialContext {
        graphs,
        tables: AnnularTables::new(graphs),
        model,
        rules,
        radial,
        master_seed,
    };
    let results = map_indexed(exec, n_trials, Worker::default, |w, i| ctx.run(w, i));
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(TrialTable {
        params: graphs.params,
        model,
        rules: rules.to_vec(),
        master_seed,
        records,
    })
}
