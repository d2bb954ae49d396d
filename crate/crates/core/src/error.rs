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

use thiserror::Error;

/// Errors raised by block construction, sampling, decoding and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid block parameters: {0}")]
    InvalidBlock(String),
    #[error("block failed validation: {0}")]
    Validation(String),
    #[error("invalid error model: {0}")]
    InvalidModel(String),
    #[error("edge {edge} does not exist in the {graph} graph")]
    UnknownEdge { graph: &'static str, edge: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("keep fraction {0} is outside (0, 1]")]
    InvalidKeepFraction(f64),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
