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

//! Ordered map over trial indices, on a rayon pool or sequentially.

use serde::{Deserialize, Serialize};

/// How trials are scheduled. Results never depend on the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Global rayon pool. Runs sequentially when the crate is built without
    /// the `parallel` feature, as does `Threads`.
    #[default]
    Parallel,
    /// Dedicated pool of the given size.
    Threads(usize),
}

impl Execution {
    /// Workers available to this policy in the current build.
    pub fn workers(&self) -> usize {
        match self {
            Execution::Sequential => 1,
            #[cfg(feature = "parallel")]
            Execution::Parallel => rayon::current_num_threads(),
            #[cfg(feature = "parallel")]
            Execution::Threads(n) => (*n).max(1),
            #[cfg(not(feature = "parallel"))]
            _ => 1,
        }
    }
}

/// `f(state, i)` for `i in 0..n`, collected in index order. Each worker owns
/// one `state` made by `init`.
pub fn map_indexed<T, S, I, F>(exec: Execution, n: u64, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => sequential(n, init, f),
        #[cfg(feature = "parallel")]
        Execution::Parallel => parallel(n, init, f),
        #[cfg(feature = "parallel")]
        Execution::Threads(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(|| parallel(n, init, f)),
            Err(_) => sequential(n, init, f),
        },
        #[cfg(not(feature = "parallel"))]
        _ => sequential(n, init, f),
    }
}

fn sequential<T, S>(n: u64, init: impl Fn() -> S, f: impl Fn(&mut S, u64) -> T) -> Vec<T> {
    let mut state = init();
    (0..n).map(|i| f(&mut state, i)).collect()
}

#[cfg(feature = "parallel")]
fn parallel<T, S, I, F>(n: u64, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map_init(init, f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let square = |_: &mut (), i: u64| i * i;
        let seq = map_indexed(Execution::Sequential, 1000, || (), square);
        let par = map_indexed(Execution::Threads(3), 1000, || (), square);
        let all = map_indexed(Execution::Parallel, 1000, || (), square);
        assert_eq!(seq, par);
        assert_eq!(seq, all);
        assert_eq!(seq[999], 998_001);
    }
}
