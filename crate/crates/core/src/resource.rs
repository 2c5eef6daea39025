//! Closed-form resource and runtime quantities: entropy, optimal ball
//! fraction, qubit counts, the radius reachable with a given device, and the
//! runtime exponents of the classical and hybrid algorithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::lambert_wm1;

/// Schöning's runtime exponent `log2(4/3)`.
pub fn gamma0() -> f64 {
    (4.0f64 / 3.0).log2()
}

/// `1 - log2(sqrt 3)`, the exponent gain per unit of `β`.
pub fn gain_coefficient() -> f64 {
    1.0 - 0.5 * 3f64.log2()
}

/// Binary entropy in bits.
pub fn entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("entropy undefined at p = {p}")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Exponent of space splitting when the PBS solver costs `2^{ζ r}`.
pub fn split_exponent(rho: f64, zeta: f64) -> Result<f64> {
    Ok(1.0 - entropy(rho)? + zeta * rho)
}

/// Minimizer `ρ* = 1/(1+2^ζ)` of `1 - h(ρ) + ζρ`, with the exponent there.
pub fn optimal_rho(zeta: f64) -> Result<(f64, f64)> {
    if !(zeta > 0.0) {
        return Err(Error::Domain(format!("zeta must be positive, got {zeta}")));
    }
    let rho = 1.0 / (1.0 + zeta.exp2());
    Ok((rho, split_exponent(rho, zeta)?))
}

/// Deterministic local search with PromiseBall: `ζ = log2 3` at `ρ = 1/4`.
pub fn dantsin_exponent() -> f64 {
    1.0 - entropy(0.25).unwrap() + 3f64.log2() / 4.0
}

/// Exponent of the naive bottom-up hybrid with a device of `μn` variables.
pub fn naive_hybrid_exponent(mu: f64) -> f64 {
    (1.0 - mu) + gamma0() * mu / 2.0
}

/// Device fraction below which the naive hybrid loses to Schöning.
pub fn threshold_ratio() -> f64 {
    let g = gamma0();
    (1.0 - g) / (1.0 - g / 2.0)
}

/// Qubit model `A·r·ln(n/r) + B·r + C·log2(2n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for QubitModel {
    fn default() -> Self {
        QubitModel {
            a: 10.0,
            b: 50.0,
            c: DEFAULT_LOG_COEFF,
        }
    }
}

/// Coefficient of the `log2(2n)` term. Chosen to bound the measured cell
/// usage of the QBall circuit's counters and scratch registers.
pub const DEFAULT_LOG_COEFF: f64 = 16.0;

impl QubitModel {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 || c <= 0.0 {
            return Err(Error::InvalidParam("qubit model coefficients must be positive".into()));
        }
        Ok(QubitModel { a, b, c })
    }

    pub fn qubit_count(&self, n: usize, r: usize) -> Result<f64> {
        if r == 0 || r > n {
            return Err(Error::InvalidParam(format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        let (n, r) = (n as f64, r as f64);
        Ok(self.a * r * (n / r).ln() + self.b * r + self.c * (2.0 * n).log2())
    }

    /// Largest `r` whose qubit count fits in `m` qubits, 0 if none does.
    pub fn r_tilde(&self, n: usize, m: f64) -> usize {
        // qubit_count is increasing in r while ln(n/r) > 1 - B/A, which holds
        // for every r <= n since B > 0; binary search is therefore exact.
        let fits = |r: usize| self.qubit_count(n, r).map(|q| q <= m).unwrap_or(false);
        if n == 0 || !fits(1) {
            return 0;
        }
        let (mut lo, mut hi) = (1usize, n);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// `g(β) = A·β·ln(1/β) + B·β`, qubits per variable at radius `βn`.
    pub fn radius_cost(&self, beta: f64) -> f64 {
        if beta <= 0.0 {
            return 0.0;
        }
        self.a * beta * (1.0 / beta).ln() + self.b * beta
    }

    /// Upper end of the interval on which `g` is increasing, capped at 1.
    fn beta_max(&self) -> f64 {
        (self.b / self.a - 1.0).exp().min(1.0)
    }

    /// `β(c)`: the root of `g(β) = c` on the increasing branch, by bisection.
    pub fn beta_of_c(&self, c: f64) -> Result<f64> {
        let hi_beta = self.beta_max();
        if !(c > 0.0 && c < self.radius_cost(hi_beta)) {
            return Err(Error::Domain(format!(
                "c = {c} outside (0, {})",
                self.radius_cost(hi_beta)
            )));
        }
        let (mut lo, mut hi) = (0.0f64, hi_beta);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.radius_cost(mid) < c {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Closed form `β(c) = -c / (A·W₋₁(-(c/A)·e^{-B/A}))`.
    pub fn beta_closed_form(&self, c: f64) -> Result<f64> {
        let x = -(c / self.a) * (-self.b / self.a).exp();
        let w = lambert_wm1(x)?;
        Ok(-c / (self.a * w))
    }

    pub fn f_of_c(&self, c: f64) -> Result<f64> {
        Ok(gain_coefficient() * self.beta_of_c(c)?)
    }
}

/// FastBall overhead `ε = log2(1 + ϵ/2) / 3` for slack `ϵ`.
pub fn fastball_epsilon(slack: f64) -> f64 {
    (1.0 + slack / 2.0).log2() / 3.0
}

/// `Δ = t - 2⌊t/k⌋`.
pub fn fastball_delta(t: usize, k: usize) -> usize {
    t - 2 * (t / k)
}

/// Smallest `t` with `Δ ≥ 1` and `2·t^{2/Δ} ≤ 2 + ϵ`, searched up to `limit`.
pub fn t_for_slack(slack: f64, k: usize, limit: usize) -> Result<usize> {
    if !(slack > 0.0) {
        return Err(Error::Domain(format!("slack must be positive, got {slack}")));
    }
    (1..=limit)
        .find(|&t| {
            let delta = fastball_delta(t, k);
            delta >= 1 && 2.0 * (t as f64).powf(2.0 / delta as f64) <= 2.0 + slack
        })
        .ok_or_else(|| Error::Budget(format!("no t <= {limit} reaches slack {slack}")))
}

/// Slowly growing alternative `t = ⌈log3 log2 n⌉`, at least 1.
pub fn t_slow_growing(n: usize) -> usize {
    let l = (n.max(2) as f64).log2();
    (l.ln() / 3f64.ln()).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub gamma0: f64,
    pub rho: f64,
    pub slack: f64,
    pub epsilon: f64,
    pub c: f64,
    pub beta_c: f64,
    pub f_c: f64,
    pub schoening: f64,
    pub dantsin: f64,
    pub fastball_split: f64,
    /// Naive bottom-up exponent with a device of `c·n` variables.
    pub naive_hybrid: f64,
    pub qfastball_split: f64,
}

/// All runtime exponents for device fraction `c` and FastBall slack `ϵ`.
/// `c = 0` is accepted and means no quantum device.
pub fn hybrid_exponent(c: f64, slack: f64, qm: &QubitModel) -> Result<ExponentReport> {
    if slack < 0.0 {
        return Err(Error::Domain(format!("slack must be non-negative, got {slack}")));
    }
    let g = gamma0();
    let beta_c = if c == 0.0 { 0.0 } else { qm.beta_of_c(c)? };
    let f_c = gain_coefficient() * beta_c;
    let epsilon = fastball_epsilon(slack);
    Ok(ExponentReport {
        gamma0: g,
        rho: 1.0 / 3.0,
        slack,
        epsilon,
        c,
        beta_c,
        f_c,
        schoening: g,
        dantsin: dantsin_exponent(),
        fastball_split: g + epsilon,
        naive_hybrid: naive_hybrid_exponent(c),
        qfastball_split: g + epsilon - f_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert!((entropy(1.0 / 3.0).unwrap() - (3f64.log2() - 2.0 / 3.0)).abs() < 1e-15);
        assert!(entropy(1.5).is_err());
    }

    #[test]
    fn optimal_rho_examples() {
        let (rho, e) = optimal_rho(1.0).unwrap();
        assert!((rho - 1.0 / 3.0).abs() < 1e-15);
        assert!((e - gamma0()).abs() < 1e-12);
        let (rho, e) = optimal_rho(3f64.log2()).unwrap();
        assert!((rho - 0.25).abs() < 1e-15);
        assert!((e - 0.585).abs() < 1e-3);
    }

    #[test]
    fn threshold() {
        let mu = threshold_ratio();
        assert!((mu - 0.7381).abs() <= 1e-4);
        assert!((mu - 0.738_140_492_857).abs() < 1e-11);
        assert!(naive_hybrid_exponent(mu + 0.01) < gamma0());
        assert!(naive_hybrid_exponent(mu - 0.01) > gamma0());
    }

    #[test]
    fn r_tilde_boundaries() {
        let qm = QubitModel::default();
        let m = qm.qubit_count(40, 5).unwrap();
        assert_eq!(qm.r_tilde(40, m), 5);
        assert_eq!(qm.r_tilde(40, qm.qubit_count(40, 1).unwrap() - 1.0), 0);
        assert_eq!(qm.r_tilde(40, 1e12), 40);
    }

    #[test]
    fn beta_small_c() {
        let qm = QubitModel::default();
        let b = qm.beta_of_c(0.1).unwrap();
        assert!((qm.radius_cost(b) - 0.1).abs() < 1e-12);
        assert!((qm.beta_closed_form(0.1).unwrap() - b).abs() < 1e-12);
        assert!(qm.beta_of_c(1e-6).unwrap() < 1e-7);
        assert!(qm.beta_of_c(0.0).is_err());
        assert!(qm.beta_of_c(100.0).is_err());
    }

    #[test]
    fn t_mapping() {
        assert_eq!(fastball_delta(3, 3), 1);
        assert_eq!(fastball_delta(6, 3), 2);
        let t = t_for_slack(0.5, 3, 10_000).unwrap();
        let d = fastball_delta(t, 3) as f64;
        assert!(2.0 * (t as f64).powf(2.0 / d) <= 2.5);
        let tp = t - 1;
        let dp = fastball_delta(tp, 3);
        assert!(dp == 0 || 2.0 * (tp as f64).powf(2.0 / dp as f64) > 2.5);
        assert!(t_slow_growing(1 << 20) >= 2);
    }

    #[test]
    fn exponent_report_continuity() {
        let r = hybrid_exponent(0.0, 0.0, &QubitModel::default()).unwrap();
        assert_eq!(r.qfastball_split, gamma0());
        let r = hybrid_exponent(0.2, 0.01, &QubitModel::default()).unwrap();
        assert!(r.qfastball_split < r.fastball_split);
    }
}
