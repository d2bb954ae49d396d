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

//! Flush-buffer sizing and distillation error arithmetic.
//!
//! Accepted blocks from `n_fac` factories accumulate for `n_cycles` cycles
//! before a distillation round needs `m_in` of them. With keep fraction
//! `kappa` the number accepted is binomial, and the buffer fails to fill
//! with probability `F(m_in - 1; n_cycles n_fac, kappa)`. The model assumes
//! free routing, negligible classical latency and independent factories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} is not a probability")))
    }
}

/// Binomial cdf `P[X <= x]` for `X ~ Bin(n, p)`, summed in log space.
pub fn binom_cdf(x: u64, n: u64, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if x > n {
        return Err(Error::Domain(format!("x = {x} exceeds n = {n}")));
    }
    if x == n || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let log_odds = (p / (1.0 - p)).ln();
    let mut term = n as f64 * (-p).ln_1p();
    let mut logs = Vec::with_capacity(x as usize + 1);
    logs.push(term);
    for j in 0..x {
        term += ((n - j) as f64 / (j + 1) as f64).ln() + log_odds;
        logs.push(term);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok((max + sum.ln()).exp().min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BufferSpec {
    pub m_in: u64,
    pub kappa: f64,
    pub p_flush: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// Smallest `n_cycles * n_fac` meeting the flush target.
    pub n_total: u64,
    pub mu: f64,
    pub sigma: f64,
    /// `F(m_in - 1; n_total, kappa)` at the solution.
    pub p_flush_achieved: f64,
    /// Every `(n_cycles, n_fac)` with product `n_total`.
    pub factorizations: Vec<(u64, u64)>,
}

/// Upper end of the capacity search.
const MAX_CAPACITY: u64 = 1 << 40;

/// Smallest `N` with `F(m_in - 1; N, kappa) <= p_flush`.
pub fn required_capacity(m_in: u64, kappa: f64, p_flush: f64) -> Result<Capacity> {
    if m_in == 0 {
        return Err(Error::Domain("m_in must be positive".into()));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidKeepFraction(kappa));
    }
    if !(p_flush > 0.0 && p_flush < 1.0) {
        return Err(Error::Domain(format!("p_flush = {p_flush} is outside (0, 1)")));
    }
    let f = |n: u64| binom_cdf(m_in - 1, n, kappa);
    let mut lo = m_in;
    if f(lo)? <= p_flush {
        return Ok(capacity(lo, kappa, f(lo)?));
    }
    let mut hi = m_in.max(2);
    while f(hi)? > p_flush {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .filter(|&h| h <= MAX_CAPACITY)
            .ok_or_else(|| Error::Domain(format!("no capacity below {MAX_CAPACITY} meets the flush target")))?;
    }
    // Invariant: f(lo) > p_flush >= f(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid)? <= p_flush {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(capacity(hi, kappa, f(hi)?))
}

fn capacity(n: u64, kappa: f64, achieved: f64) -> Capacity {
    let mu = n as f64 * kappa;
    let mut factorizations = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factorizations.push((d, n / d));
            if d != n / d {
                factorizations.push((n / d, d));
            }
        }
        d += 1;
    }
    factorizations.sort_unstable();
    Capacity {
        n_total: n,
        mu,
        sigma: (mu * (1.0 - kappa)).sqrt(),
        p_flush_achieved: achieved,
        factorizations,
    }
}

/// Error of an accepted block seeded with an initial error `p_init`.
pub fn prep_error(p_init: f64, p_enc: f64) -> Result<f64> {
    check_probability("p_init", p_init)?;
    check_probability("p_enc", p_enc)?;
    Ok(p_init * (1.0 - p_enc) + (1.0 - p_init) * p_enc)
}

/// Leading-order distillation protocol `p -> c p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillationSpec {
    pub c: f64,
    pub k: f64,
    pub m_in: u64,
    pub m_out: u64,
}

impl DistillationSpec {
    pub const FIFTEEN_TO_ONE: DistillationSpec = DistillationSpec {
        c: 35.0,
        k: 3.0,
        m_in: 15,
        m_out: 1,
    };

    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.k >= 1.0) || self.m_in == 0 || self.m_out == 0 {
            return Err(Error::Domain(format!("invalid distillation spec {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distilled {
    pub p_out: f64,
    /// `false` when `c p^k >= 1`, where the leading-order formula is void.
    pub in_regime: bool,
}

pub fn distill_error(p_prep: f64, spec: &DistillationSpec) -> Result<Distilled> {
    spec.check()?;
    check_probability("p_prep", p_prep)?;
    let p_out = spec.c * p_prep.powf(spec.k);
    Ok(Distilled {
        p_out,
        in_regime: p_out < 1.0,
    })
}

/// Output error after each of `rounds` chained rounds.
pub fn distill_chain(p_prep: f64, spec: &DistillationSpec, rounds: usize) -> Result<Vec<Distilled>> {
    let mut out = Vec::with_capacity(rounds);
    let mut p = p_prep;
    for _ in 0..rounds {
        let d = distill_error(p.min(1.0), spec)?;
        p = d.p_out;
        out.push(d);
    }
    Ok(out)
}

/// Prefactor of the `1 / (n_T n_Q)` target; only the scaling is fixed.
pub const ALG_CONSTANT: f64 = 1.0;

/// Magic-state error budget for `n_t` T gates on `n_q` qubits with total
/// failure budget `eps_total`.
pub fn target_magic_error(n_t: u64, n_q: u64, eps_total: f64) -> Result<f64> {
    if n_t == 0 || n_q == 0 {
        return Err(Error::Domain("gate and qubit counts must be positive".into()));
    }
    check_probability("eps_total", eps_total)?;
    Ok(ALG_CONSTANT * eps_total / (n_t as f64 * n_q as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_edges() {
        assert!((binom_cdf(0, 1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(binom_cdf(7, 7, 0.3).unwrap(), 1.0);
        assert_eq!(binom_cdf(2, 7, 0.0).unwrap(), 1.0);
        assert_eq!(binom_cdf(2, 7, 1.0).unwrap(), 0.0);
        assert!(binom_cdf(8, 7, 0.3).is_err());
        assert!(binom_cdf(1, 7, 1.3).is_err());
    }

    #[test]
    fn cdf_is_monotone() {
        let mut last = 0.0;
        for x in 0..=40 {
            let f = binom_cdf(x, 40, 0.3).unwrap();
            assert!(f >= last);
            last = f;
        }
        assert!(binom_cdf(10, 40, 0.2).unwrap() >= binom_cdf(10, 40, 0.3).unwrap());
    }

    #[test]
    fn capacity_small_cases() {
        let c = required_capacity(1, 0.5, 0.5).unwrap();
        assert_eq!(c.n_total, 1);
        let c = required_capacity(1, 0.5, 0.2).unwrap();
        // (1/2)^N <= 0.2 first at N = 3.
        assert_eq!(c.n_total, 3);
        assert_eq!(c.factorizations, vec![(1, 3), (3, 1)]);
        assert!(required_capacity(3, 0.0, 0.1).is_err());
        assert!(required_capacity(3, 0.5, 1.0).is_err());
    }

    #[test]
    fn relative_fluctuations() {
        let c = required_capacity(15, 0.5, 1e-6).unwrap();
        let n = c.n_total as f64;
        assert!((c.sigma / c.mu - ((1.0 - 0.5) / (n * 0.5)).sqrt()).abs() < 1e-12);
        assert!(c.p_flush_achieved <= 1e-6);
        assert!(binom_cdf(14, c.n_total - 1, 0.5).unwrap() > 1e-6);
    }

    #[test]
    fn error_arithmetic() {
        assert!((prep_error(0.1, 0.2).unwrap() - 0.26).abs() < 1e-15);
        assert_eq!(prep_error(0.03, 0.0).unwrap(), 0.03);
        let d = distill_error(1e-3, &DistillationSpec::FIFTEEN_TO_ONE).unwrap();
        assert!((d.p_out - 3.5e-8).abs() < 1e-20);
        assert!(d.in_regime);
        assert_eq!(
            distill_error(0.0, &DistillationSpec::FIFTEEN_TO_ONE).unwrap().p_out,
            0.0
        );
        assert!(!distill_error(0.5, &DistillationSpec::FIFTEEN_TO_ONE).unwrap().in_regime);
        let chain = distill_chain(1e-3, &DistillationSpec::FIFTEEN_TO_ONE, 2).unwrap();
        assert!((chain[1].p_out - 35.0 * 3.5e-8f64.powi(3)).abs() < 1e-30);
        assert!((target_magic_error(1000, 100, 0.01).unwrap() - 1e-7).abs() < 1e-20);
    }
}
