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

//! Text artifacts: trial records as JSON lines and curve/diagnostic CSVs.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{Diagnostics, EerCurve, TrialTable};

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One JSON object per trial, scores keyed by rule label.
pub fn trials_jsonl(table: &TrialTable) -> String {
    let labels = table.labels();
    let mut out = String::new();
    for r in &table.records {
        let mut scores = Map::new();
        for (label, s) in labels.iter().zip(&r.scores) {
            scores.insert(label.clone(), serde_json::to_value(s).expect("score serializes"));
        }
        let line = json!({
            "trial": r.trial,
            "seed": r.seed,
            "scores": Value::Object(scores),
            "primal": r.primal,
            "dual": r.dual,
            "failure": r.failure,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// Header `rule,kappa,p_enc,stderr`.
pub fn curves_csv(curves: &[EerCurve]) -> String {
    let mut out = String::from("rule,kappa,p_enc,stderr\n");
    for c in curves {
        let rule = csv_field(&c.rule);
        for p in &c.points {
            writeln!(out, "{rule},{},{},{}", p.kappa, p.p_enc, p.stderr).unwrap();
        }
    }
    out
}

/// Header `rule,score_bin_lo,score_bin_hi,count,eer,stderr`.
pub fn diagnostics_csv(diags: &[Diagnostics]) -> String {
    let mut out = String::from("rule,score_bin_lo,score_bin_hi,count,eer,stderr\n");
    for d in diags {
        let rule = csv_field(&d.rule);
        for b in &d.bins {
            writeln!(out, "{rule},{},{},{},{},{}", b.lo, b.hi, b.count, b.eer, b.stderr).unwrap();
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}
