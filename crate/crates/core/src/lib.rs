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

//! Fault-tolerant post-selection for surface-code magic-state preparation.
//!
//! The crate builds the primal and dual syndrome graphs of a preparation
//! block, samples independent Pauli and erasure noise on them, decodes with
//! class-constrained minimum-weight matching and scores every sample under a
//! family of post-selection rules. The [`experiment`] module turns scored
//! trials into encoding-error-rate curves against the keep fraction, and
//! [`buffer`] sizes the flush buffers that absorb the resulting rejection.

pub mod buffer;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod geometry;
pub mod matching;
pub mod noise;
pub mod rules;

pub use error::{Error, Result};
