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

//! Dense maximum-weight matching on general graphs (primal-dual blossom
//! algorithm, O(n³)).
//!
//! Vertices are 1-based internally; index 0 is the null vertex. Blossoms take
//! ids `n + 1 ..= 2n`. Edge weights must be positive even integers for the
//! duals to stay integral; a weight of zero means "no edge".

use std::collections::VecDeque;

const INF: i64 = i64::MAX / 4;

#[derive(Clone, Copy, Debug, Default)]
struct E {
    u: usize,
    v: usize,
    w: i64,
}

/// Reusable workspace. Buffers grow to the largest instance seen.
#[derive(Debug, Default)]
pub struct Blossom {
    n: usize,
    nx: usize,
    stride: usize,
    g: Vec<E>,
    lab: Vec<i64>,
    mate: Vec<usize>,
    slack: Vec<usize>,
    st: Vec<usize>,
    pa: Vec<usize>,
    flower_from: Vec<usize>,
    s: Vec<i32>,
    vis: Vec<u64>,
    vis_t: u64,
    flower: Vec<Vec<usize>>,
    q: VecDeque<usize>,
}

impl Blossom {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        let stride = 2 * n + 1;
        if stride > self.stride {
            self.stride = stride;
            self.g = vec![E::default(); stride * stride];
            self.lab = vec![0; stride];
            self.mate = vec![0; stride];
            self.slack = vec![0; stride];
            self.st = vec![0; stride];
            self.pa = vec![0; stride];
            self.flower_from = vec![0; stride * (n + 1)];
            self.s = vec![0; stride];
            self.vis = vec![0; stride];
            self.flower = vec![Vec::new(); stride];
        }
        self.n = n;
        self.nx = n;
        let ff = n + 1;
        for x in 0..=2 * n {
            self.mate[x] = 0;
            self.st[x] = if x <= n { x } else { 0 };
            self.flower[x].clear();
            self.lab[x] = 0;
            self.pa[x] = 0;
            self.slack[x] = 0;
        }
        for x in 0..=2 * n {
            for y in 0..ff {
                self.flower_from[x * ff + y] = if x == y && x <= n { x } else { 0 };
            }
        }
    }

    #[inline]
    fn g(&self, u: usize, v: usize) -> E {
        self.g[u * self.stride + v]
    }

    #[inline]
    fn g_mut(&mut self, u: usize, v: usize) -> &mut E {
        &mut self.g[u * self.stride + v]
    }

    #[inline]
    fn ff(&self, b: usize, x: usize) -> usize {
        self.flower_from[b * (self.n + 1) + x]
    }

    #[inline]
    fn ff_mut(&mut self, b: usize, x: usize) -> &mut usize {
        let n1 = self.n + 1;
        &mut self.flower_from[b * n1 + x]
    }

    #[inline]
    fn dist(&self, e: E) -> i64 {
        self.lab[e.u] + self.lab[e.v] - self.g(e.u, e.v).w * 2
    }

    fn update_slack(&mut self, u: usize, x: usize) {
        let sx = self.slack[x];
        if sx == 0 || self.dist(self.g(u, x)) < self.dist(self.g(sx, x)) {
            self.slack[x] = u;
        }
    }

    fn set_slack(&mut self, x: usize) {
        self.slack[x] = 0;
        for u in 1..=self.n {
            if self.g(u, x).w > 0 && self.st[u] != x && self.s[self.st[u]] == 0 {
                self.update_slack(u, x);
            }
        }
    }

    fn q_push(&mut self, x: usize) {
        if x <= self.n {
            self.q.push_back(x);
        } else {
            for i in 0..self.flower[x].len() {
                let y = self.flower[x][i];
                self.q_push(y);
            }
        }
    }

    fn set_st(&mut self, x: usize, b: usize) {
        self.st[x] = b;
        if x > self.n {
            for i in 0..self.flower[x].len() {
                let y = self.flower[x][i];
                self.set_st(y, b);
            }
        }
    }

    fn get_pr(&mut self, b: usize, xr: usize) -> usize {
        let f = &mut self.flower[b];
        let pr = f.iter().position(|&x| x == xr).expect("vertex not in blossom");
        if pr % 2 == 1 {
            f[1..].reverse();
            f.len() - pr
        } else {
            pr
        }
    }

    fn set_match(&mut self, u: usize, v: usize) {
        let e = self.g(u, v);
        self.mate[u] = e.v;
        if u > self.n {
            let xr = self.ff(u, e.u);
            let pr = self.get_pr(u, xr);
            for i in 0..pr {
                let (a, b) = (self.flower[u][i], self.flower[u][i ^ 1]);
                self.set_match(a, b);
            }
            self.set_match(xr, v);
            self.flower[u].rotate_left(pr);
        }
    }

    fn augment(&mut self, mut u: usize, mut v: usize) {
        loop {
            let xnv = self.st[self.mate[u]];
            self.set_match(u, v);
            if xnv == 0 {
                return;
            }
            let next = self.st[self.pa[xnv]];
            self.set_match(xnv, next);
            u = next;
            v = xnv;
        }
    }

    fn get_lca(&mut self, mut u: usize, mut v: usize) -> usize {
        self.vis_t += 1;
        let t = self.vis_t;
        while u != 0 || v != 0 {
            if u != 0 {
                if self.vis[u] == t {
                    return u;
                }
                self.vis[u] = t;
                u = self.st[self.mate[u]];
                if u != 0 {
                    u = self.st[self.pa[u]];
                }
            }
            std::mem::swap(&mut u, &mut v);
        }
        0
    }

    fn add_blossom(&mut self, u: usize, lca: usize, v: usize) {
        let mut b = self.n + 1;
        while b <= self.nx && self.st[b] != 0 {
            b += 1;
        }
        if b > self.nx {
            self.nx += 1;
        }
        self.lab[b] = 0;
        self.s[b] = 0;
        self.mate[b] = self.mate[lca];
        self.flower[b].clear();
        self.flower[b].push(lca);
        let mut x = u;
        while x != lca {
            let y = self.st[self.mate[x]];
            self.flower[b].push(x);
            self.flower[b].push(y);
            self.q_push(y);
            x = self.st[self.pa[y]];
        }
        self.flower[b][1..].reverse();
        let mut x = v;
        while x != lca {
            let y = self.st[self.mate[x]];
            self.flower[b].push(x);
            self.flower[b].push(y);
            self.q_push(y);
            x = self.st[self.pa[y]];
        }
        self.set_st(b, b);
        for x in 1..=self.nx {
            self.g_mut(b, x).w = 0;
            self.g_mut(x, b).w = 0;
        }
        for x in 1..=self.n {
            *self.ff_mut(b, x) = 0;
        }
        for i in 0..self.flower[b].len() {
            let xs = self.flower[b][i];
            for x in 1..=self.nx {
                if self.g(b, x).w == 0 || self.dist(self.g(xs, x)) < self.dist(self.g(b, x)) {
                    *self.g_mut(b, x) = self.g(xs, x);
                    *self.g_mut(x, b) = self.g(x, xs);
                }
            }
            for x in 1..=self.n {
                if self.ff(xs, x) != 0 {
                    *self.ff_mut(b, x) = xs;
                }
            }
        }
        self.set_slack(b);
    }

    fn expand_blossom(&mut self, b: usize) {
        for i in 0..self.flower[b].len() {
            let y = self.flower[b][i];
            self.set_st(y, y);
        }
        let xr = self.ff(b, self.g(b, self.pa[b]).u);
        let pr = self.get_pr(b, xr);
        let mut i = 0;
        while i < pr {
            let xs = self.flower[b][i];
            let xns = self.flower[b][i + 1];
            self.pa[xs] = self.g(xns, xs).u;
            self.s[xs] = 1;
            self.s[xns] = 0;
            self.slack[xs] = 0;
            self.set_slack(xns);
            self.q_push(xns);
            i += 2;
        }
        self.s[xr] = 1;
        self.pa[xr] = self.pa[b];
        for i in pr + 1..self.flower[b].len() {
            let xs = self.flower[b][i];
            self.s[xs] = -1;
            self.set_slack(xs);
        }
        self.st[b] = 0;
    }

    fn on_found_edge(&mut self, e: E) -> bool {
        let u = self.st[e.u];
        let v = self.st[e.v];
        if self.s[v] == -1 {
            self.pa[v] = e.u;
            self.s[v] = 1;
            let nu = self.st[self.mate[v]];
            self.slack[v] = 0;
            self.slack[nu] = 0;
            self.s[nu] = 0;
            self.q_push(nu);
        } else if self.s[v] == 0 {
            let lca = self.get_lca(u, v);
            if lca == 0 {
                self.augment(u, v);
                self.augment(v, u);
                return true;
            }
            self.add_blossom(u, lca, v);
        }
        false
    }

    fn matching(&mut self) -> bool {
        for x in 1..=self.nx {
            self.s[x] = -1;
            self.slack[x] = 0;
        }
        self.q.clear();
        for x in 1..=self.nx {
            if self.st[x] == x && self.mate[x] == 0 {
                self.pa[x] = 0;
                self.s[x] = 0;
                self.q_push(x);
            }
        }
        if self.q.is_empty() {
            return false;
        }
        loop {
            while let Some(u) = self.q.pop_front() {
                if self.s[self.st[u]] == 1 {
                    continue;
                }
                for v in 1..=self.n {
                    let e = self.g(u, v);
                    if e.w > 0 && self.st[u] != self.st[v] {
                        if self.dist(e) == 0 {
                            if self.on_found_edge(e) {
                                return true;
                            }
                        } else {
                            let sv = self.st[v];
                            self.update_slack(u, sv);
                        }
                    }
                }
            }
            let mut d = INF;
            for b in self.n + 1..=self.nx {
                if self.st[b] == b && self.s[b] == 1 {
                    d = d.min(self.lab[b] / 2);
                }
            }
            for x in 1..=self.nx {
                if self.st[x] == x && self.slack[x] != 0 {
                    let dx = self.dist(self.g(self.slack[x], x));
                    if self.s[x] == -1 {
                        d = d.min(dx);
                    } else if self.s[x] == 0 {
                        d = d.min(dx / 2);
                    }
                }
            }
            for u in 1..=self.n {
                match self.s[self.st[u]] {
                    0 => {
                        if self.lab[u] <= d {
                            return false;
                        }
                        self.lab[u] -= d;
                    }
                    1 => self.lab[u] += d,
                    _ => {}
                }
            }
            for b in self.n + 1..=self.nx {
                if self.st[b] == b {
                    match self.s[b] {
                        0 => self.lab[b] += 2 * d,
                        1 => self.lab[b] -= 2 * d,
                        _ => {}
                    }
                }
            }
            self.q.clear();
            for x in 1..=self.nx {
                let sx = self.slack[x];
                if self.st[x] == x && sx != 0 && self.st[sx] != x && self.dist(self.g(sx, x)) == 0 {
                    let e = self.g(sx, x);
                    if self.on_found_edge(e) {
                        return true;
                    }
                }
            }
            for b in self.n + 1..=self.nx {
                if self.st[b] == b && self.s[b] == 1 && self.lab[b] == 0 {
                    self.expand_blossom(b);
                }
            }
        }
    }

    /// Maximum-weight matching of the complete graph on `n` vertices with
    /// weights `weight(i, j)` (0-based, symmetric, positive and even).
    /// Returns the 0-based mate of every vertex, or `None` where unmatched.
    pub fn max_weight(&mut self, n: usize, weight: impl Fn(usize, usize) -> i64) -> Vec<Option<usize>> {
        self.reset(n);
        let mut w_max = 0;
        for u in 1..=n {
            for v in 1..=n {
                let w = if u == v { 0 } else { weight(u - 1, v - 1) };
                debug_assert!(w >= 0 && w % 2 == 0);
                *self.g_mut(u, v) = E { u, v, w };
                w_max = w_max.max(w);
            }
        }
        for u in 1..=n {
            self.lab[u] = w_max;
        }
        while self.matching() {}
        (1..=n).map(|u| (self.mate[u] != 0).then(|| self.mate[u] - 1)).collect()
    }

    /// Minimum-cost perfect matching of the complete graph on an even number
    /// of vertices with nonnegative symmetric costs. Returns the 0-based mate
    /// of every vertex.
    pub fn min_cost_perfect(&mut self, n: usize, cost: impl Fn(usize, usize) -> i64) -> Vec<usize> {
        assert!(n.is_multiple_of(2), "perfect matching needs an even vertex count");
        if n == 0 {
            return Vec::new();
        }
        if n == 2 {
            return vec![1, 0];
        }
        let mut c_max = 0;
        for u in 0..n {
            for v in u + 1..n {
                let c = cost(u, v);
                assert!(c >= 0, "negative matching cost");
                c_max = c_max.max(c);
            }
        }
        // Any perfect matching outweighs every matching with one pair fewer.
        let big = (n as i64) * c_max + 1;
        let mates = self.max_weight(n, |u, v| 2 * (big - cost(u, v)));
        mates
            .into_iter()
            .map(|m| m.expect("maximum-weight matching is not perfect"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min(n: usize, cost: &dyn Fn(usize, usize) -> i64) -> i64 {
        let full = (1usize << n) - 1;
        let mut dp = vec![i64::MAX; 1 << n];
        dp[0] = 0;
        for mask in 0..=full {
            if dp[mask] == i64::MAX {
                continue;
            }
            let Some(i) = (0..n).find(|&i| mask & (1 << i) == 0) else {
                continue;
            };
            for j in i + 1..n {
                if mask & (1 << j) == 0 {
                    let next = mask | (1 << i) | (1 << j);
                    dp[next] = dp[next].min(dp[mask] + cost(i, j));
                }
            }
        }
        dp[full]
    }

    fn lcg(state: &mut u64) -> u64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        *state >> 33
    }

    #[test]
    fn small_cases() {
        let mut b = Blossom::new();
        assert!(b.min_cost_perfect(0, |_, _| 0).is_empty());
        assert_eq!(b.min_cost_perfect(2, |_, _| 5), vec![1, 0]);
        let m = b.min_cost_perfect(4, |u, v| if u + v == 3 { 0 } else { 10 });
        assert_eq!(m, vec![3, 2, 1, 0]);
    }

    #[test]
    fn matches_bitmask_dp() {
        let mut b = Blossom::new();
        let mut state = 7u64;
        for round in 0..400 {
            let n = 2 * (1 + round % 7);
            let range = [3u64, 10, 1000][round % 3];
            let mut c = vec![0i64; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let w = (lcg(&mut state) % range) as i64;
                    c[i * n + j] = w;
                    c[j * n + i] = w;
                }
            }
            let cost = |i: usize, j: usize| c[i * n + j];
            let mates = b.min_cost_perfect(n, cost);
            let mut total = 0;
            for (i, &m) in mates.iter().enumerate() {
                assert_eq!(mates[m], i);
                assert_ne!(m, i);
                if i < m {
                    total += cost(i, m);
                }
            }
            assert_eq!(total, brute_min(n, &cost), "round {round}, n {n}");
        }
    }

    #[test]
    fn metric_instances_from_points() {
        // Points on a line: optimal matching pairs neighbours after sorting.
        let mut b = Blossom::new();
        let xs = [9i64, 1, 14, 3, 8, 20, 2, 15];
        let mates = b.min_cost_perfect(xs.len(), |i, j| (xs[i] - xs[j]).abs());
        let total: i64 = (0..xs.len())
            .filter(|&i| i < mates[i])
            .map(|i| (xs[i] - xs[mates[i]]).abs())
            .sum();
        assert_eq!(total, brute_min(xs.len(), &|i, j| (xs[i] - xs[j]).abs()));
    }
}
