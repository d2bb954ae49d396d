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

//! Exhaustive and exact oracles shared by integration tests.
#![allow(dead_code)]

use ftps_core::geometry::SyndromeGraph;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Minimum weight over every edge subset, indexed by syndrome mask and
/// membrane parity. Walks subsets in Gray-code order.
pub fn brute_table(graph: &SyndromeGraph, weights: &[i64]) -> Vec<i64> {
    let m = graph.num_edges();
    assert!(m <= 24 && graph.num_checks() <= 16);
    let bits: Vec<u32> = graph
        .edges
        .iter()
        .map(|e| {
            e.endpoints
                .iter()
                .filter(|&&v| !graph.is_pseudo(v))
                .fold(0, |acc, &v| acc ^ (1 << v))
        })
        .collect();
    let mut table = vec![i64::MAX; (1 << graph.num_checks()) * 2];
    let (mut mask, mut class, mut weight) = (0u32, 0usize, 0i64);
    let mut on = vec![false; m];
    table[0] = 0;
    for step in 1u64..(1 << m) {
        let e = step.trailing_zeros() as usize;
        on[e] = !on[e];
        mask ^= bits[e];
        class ^= graph.edges[e].cut as usize;
        weight += if on[e] { weights[e] } else { -weights[e] };
        let slot = &mut table[mask as usize * 2 + class];
        *slot = (*slot).min(weight);
    }
    table
}

pub fn syndrome_mask(s: &[u32]) -> usize {
    s.iter().fold(0, |acc, &v| acc | (1 << v))
}

/// `P[X <= x]` for `X ~ Bin(n, p)` summed exactly over the binary value of `p`.
pub fn exact_cdf(x: u64, n: u64, p: f64) -> f64 {
    let p = BigRational::from_float(p).unwrap();
    let q = BigRational::one() - &p;
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    for j in 0..=x {
        if j > 0 {
            binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        let term = BigRational::from_integer(binom.clone())
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (n - j) as usize);
        sum += term;
    }
    sum.to_f64().unwrap()
}
