//! Parameter schedules realizing a point `(α, β)` of a hardness diagram.
//!
//! Given a source size `n`, each schedule picks the planted size `k` of the
//! source clique instance and the lifting depth `ℓ` so that the target has
//! `log K / log N → β` and signal `≈ N^{−α}` up to polylog factors.

use planted_core::lifting::gaussian_lift_mu;
use planted_core::special::normal_cdf;
use planted_core::{Problem, ProblemParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which lower bound a schedule instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Theorem {
    /// Planted independent set by PC lifting and complement.
    Pis,
    /// Planted dense subgraph by Poisson lifting.
    PoissonPds,
    /// Planted dense subgraph with `q = 1/2` by Gaussian lifting.
    GaussianPds,
    /// Rank-one submatrix by reflection cloning.
    Ros,
    /// Sparse spiked Wigner (the `β ≥ 1/2` branch).
    Ssw,
    /// Sparse PCA with `d = n`.
    Spca,
    /// Unsigned sparse PCA with `d = 2^ℓ n`.
    Uspca,
}

/// Constant in the Poisson lifting densities.
pub const POISSON_C: f64 = 2.0;

/// One schedule evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    /// Schedule used.
    pub theorem: Theorem,
    /// Signal exponent requested.
    pub alpha: f64,
    /// Sparsity exponent requested.
    pub beta: f64,
    /// Source size.
    pub n: usize,
    /// Source sparsity exponent: `k = ⌈n^γ⌉`.
    pub gamma: f64,
    /// Source planted size.
    pub k: usize,
    /// Lifting depth.
    pub ell: u32,
    /// Slack exponent (dense-subgraph and wigner schedules).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Densification factor (independent-set schedule).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Target size `N` (ambient dimension for sparse PCA).
    pub big_n: u64,
    /// Target planted size `K`.
    pub big_k: u64,
    /// Target parameters. For sparse PCA `n` is the sample count and `d = N`.
    pub target: ProblemParams,
    /// Natural signal of the target: `q`, `p − q`, `μ/K` or `θ`.
    pub signal: f64,
    /// `log K / log N`.
    pub k_exponent: f64,
    /// `log(1/signal) / log N`.
    pub signal_exponent: f64,
}

fn region(ok: bool, inequality: &str, alpha: f64, beta: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Core(planted_core::Error::Param(format!("(alpha, beta) = ({alpha}, {beta}) violates {inequality}"))))
    }
}

fn ceil_log(x: f64, n: usize) -> u32 {
    (x * (n as f64).log2() - 1e-9).ceil().max(0.0) as u32
}

fn pow_k(n: usize, gamma: f64) -> usize {
    ((n as f64).powf(gamma) - 1e-9).ceil().max(1.0) as usize
}

fn shl(x: usize, ell: u32) -> Result<u64> {
    (x as u64).checked_shl(ell).filter(|v| v >> ell == x as u64).ok_or_else(|| Error::Config(format!("2^{ell} * {x} overflows")))
}

/// `w(n) = max(3, ln ln n)`.
pub fn schedule_w(n: usize) -> f64 {
    (n as f64).ln().ln().max(3.0)
}

/// Default Poisson slack: half of the largest admissible `ε`.
pub fn default_eps(alpha: f64, beta: f64) -> f64 {
    let bound = (0.5 + alpha / 4.0 - beta) / (1.0 - beta);
    0.5 * bound.min(alpha).max(0.0)
}

/// Parameters realizing `(alpha, beta)` under `theorem` from source size `n`.
/// `eps` overrides the slack of the Poisson schedule.
pub fn param_schedule(theorem: Theorem, alpha: f64, beta: f64, n: usize, eps: Option<f64>) -> Result<ScheduleResult> {
    if n < 3 {
        return Err(Error::Config("n must be at least 3".into()));
    }
    if !(alpha.is_finite() && beta.is_finite() && (0.0..=1.0).contains(&beta)) {
        return Err(Error::Config("need finite alpha and beta in [0, 1]".into()));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let mu = gaussian_lift_mu(n);
    let mut out_eps = None;
    let mut out_w = None;
    let (gamma, ell, target, big_n, big_k, signal);
    match theorem {
        Theorem::Pis => {
            region((0.0..2.0).contains(&alpha), "0 <= alpha < 2", alpha, beta)?;
            region(beta < 0.5 + alpha / 4.0, "beta < 1/2 + alpha/4", alpha, beta)?;
            region(2.0 * beta >= alpha, "2 beta >= alpha", alpha, beta)?;
            gamma = (2.0 * beta - alpha) / (2.0 - alpha);
            ell = ceil_log(alpha / (2.0 - alpha), n);
            let k = pow_k(n, gamma);
            big_n = shl(n, ell)?;
            big_k = shl(k, ell)?;
            let w = schedule_w(n);
            out_w = Some(w);
            let q = -((-1.0 / w).ln_1p() / 4f64.powi(ell as i32)).exp_m1();
            signal = q;
            target = ProblemParams::pis(big_n as usize, big_k as usize, q);
        }
        Theorem::PoissonPds => {
            region((0.0..2.0).contains(&alpha), "0 <= alpha < 2", alpha, beta)?;
            region(beta < 1.0, "beta < 1", alpha, beta)?;
            let e = eps.unwrap_or_else(|| default_eps(alpha, beta));
            region(e >= 0.0 && e <= alpha, "0 <= eps <= alpha", alpha, beta)?;
            region(beta + e * (1.0 - beta) < 0.5 + alpha / 4.0, "beta + eps (1 - beta) < 1/2 + alpha/4", alpha, beta)?;
            out_eps = Some(e);
            gamma = (2.0 * beta - alpha + e * (1.0 - beta)) / (2.0 - alpha);
            region((0.0..=1.0).contains(&gamma), "0 <= gamma <= 1", alpha, beta)?;
            ell = ceil_log((alpha - e) / (2.0 - alpha), n);
            let k = pow_k(n, gamma);
            big_n = shl(n, ell)?;
            big_k = shl(k, ell)?;
            let scale = nf.powf(-e) / 4f64.powi(ell as i32);
            let p = -(-POISSON_C * scale).exp_m1();
            let q = -(-scale).exp_m1();
            signal = p - q;
            target = ProblemParams::pds(big_n as usize, big_k as usize, p, q);
        }
        Theorem::GaussianPds => {
            region((0.0..1.0).contains(&alpha), "0 <= alpha < 1", alpha, beta)?;
            region(beta < 0.5 + alpha / 2.0, "beta < 1/2 + alpha/2", alpha, beta)?;
            region(beta >= alpha, "beta >= alpha", alpha, beta)?;
            gamma = (beta - alpha) / (1.0 - alpha);
            ell = ceil_log(alpha / (1.0 - alpha), n);
            let k = pow_k(n, gamma);
            big_n = shl(n, ell)?;
            big_k = shl(k, ell)?;
            let p = normal_cdf(mu / 2f64.powi(ell as i32));
            signal = p - 0.5;
            target = ProblemParams::pds(big_n as usize, big_k as usize, p, 0.5);
        }
        Theorem::Ros => {
            region(alpha >= 0.0 && beta >= alpha, "0 <= alpha <= beta", alpha, beta)?;
            region(beta < 0.5 + alpha, "beta < 1/2 + alpha", alpha, beta)?;
            gamma = beta - alpha;
            ell = ceil_log(alpha, n);
            let k = pow_k(n, gamma);
            big_n = 2 * n as u64;
            big_k = shl(k, ell)?;
            let mu_n = mu * k as f64 / std::f64::consts::SQRT_2;
            signal = mu_n / big_k as f64;
            target = ProblemParams::matrix(Problem::ROS, big_n as usize, big_k as usize, mu_n);
        }
        Theorem::Ssw => {
            let e = (alpha + 0.5 - beta) / 2.0;
            region(beta >= 0.5, "beta >= 1/2", alpha, beta)?;
            region(e > 0.0 && e < 0.5, "beta - 1/2 < alpha < beta + 1/2", alpha, beta)?;
            out_eps = Some(e);
            gamma = 0.5 - e;
            ell = ceil_log(beta - 0.5 + e, n);
            let k = pow_k(n, gamma);
            big_n = 2 * n as u64;
            big_k = shl(k, ell)?;
            let kf = k as f64;
            let mu_n = mu * kf * (kf - 1.0) / (2.0 * (nf - 1.0).sqrt());
            signal = mu_n / big_k as f64;
            target = ProblemParams::matrix(Problem::SSW, big_n as usize, big_k as usize, mu_n);
        }
        Theorem::Spca => {
            region(alpha > (1.0 - 2.0 * beta).max(0.0), "alpha > max(1 - 2 beta, 0)", alpha, beta)?;
            region(alpha < 1.0, "alpha < 1", alpha, beta)?;
            gamma = (1.0 - alpha) / 2.0;
            ell = ceil_log(beta - gamma, n);
            let k = pow_k(n, gamma);
            big_n = n as u64;
            big_k = shl(k, ell)?;
            region(big_k <= big_n, "K <= N", alpha, beta)?;
            let tau = ln_n;
            let kf = k as f64;
            signal = mu * mu * kf * kf / (2.0 * tau * nf);
            target = ProblemParams::spca(Problem::SPCA, n, big_k as usize, n, signal);
        }
        Theorem::Uspca => {
            region(alpha < 1.0, "alpha < 1", alpha, beta)?;
            region((1.0 - alpha) / 2.0 < beta && beta < (1.0 + alpha) / 2.0, "(1 - alpha)/2 < beta < (1 + alpha)/2", alpha, beta)?;
            gamma = (1.0 - alpha) / (3.0 - alpha - 2.0 * beta);
            ell = ceil_log((alpha + 2.0 * beta - 1.0) / (3.0 - alpha - 2.0 * beta), n);
            let k = pow_k(n, gamma);
            big_n = shl(n, ell)?;
            big_k = shl(k, ell)?;
            let tau = ln_n;
            let kf = k as f64;
            signal = mu * mu * kf * kf / (2f64.powi(ell as i32 + 1) * tau * nf);
            target = ProblemParams::spca(Problem::USPCA, n, big_k as usize, big_n as usize, signal);
        }
    }
    let k = pow_k(n, gamma);
    if big_k > big_n {
        return Err(Error::Config(format!("K = {big_k} exceeds N = {big_n} at n = {n}")));
    }
    let ln_big_n = (big_n as f64).ln();
    Ok(ScheduleResult {
        theorem,
        alpha,
        beta,
        n,
        gamma,
        k,
        ell,
        eps: out_eps,
        w: out_w,
        big_n,
        big_k,
        target,
        signal,
        k_exponent: (big_k as f64).ln() / ln_big_n,
        signal_exponent: -signal.ln() / ln_big_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pis_point() {
        let s = param_schedule(Theorem::Pis, 1.0, 0.6, 1 << 20, None).unwrap();
        assert_eq!(s.ell, 20);
        assert_eq!(s.k, 16);
        assert_eq!(s.big_n, 1 << 40);
        assert_eq!(s.big_k, 1 << 24);
        assert!((s.k_exponent - 0.6).abs() < 1e-12);
        assert!((s.signal_exponent - 1.0).abs() < 0.05);
    }

    #[test]
    fn small_pis_point() {
        let s = param_schedule(Theorem::Pis, 1.0, 0.6, 1024, None).unwrap();
        assert!((s.gamma - 0.2).abs() < 1e-12);
        assert_eq!(s.ell, 10);
        assert_eq!(s.big_n, 1 << 20);
        let t = param_schedule(Theorem::Pis, 1.0, 0.7, 1024, None).unwrap();
        assert!(t.big_k > s.big_k);
    }

    #[test]
    fn region_message_quotes_inequality() {
        let e = param_schedule(Theorem::Pis, 1.0, 0.75, 1024, None).unwrap_err().to_string();
        assert!(e.contains("beta < 1/2 + alpha/4"), "{e}");
    }

    #[test]
    fn regions() {
        assert!(param_schedule(Theorem::Pis, 1.0, 0.8, 1 << 10, None).is_err());
        assert!(param_schedule(Theorem::Ssw, 0.5, 0.4, 1 << 10, None).is_err());
        assert!(param_schedule(Theorem::Spca, 0.1, 0.2, 1 << 10, None).is_err());
        assert!(param_schedule(Theorem::Ros, 0.3, 0.6, 1 << 10, None).is_ok());
    }

    #[test]
    fn ros_exponents() {
        let s = param_schedule(Theorem::Ros, 0.3, 0.6, 1 << 20, None).unwrap();
        assert_eq!(s.ell, 6);
        assert_eq!(s.k, 64);
        assert_eq!(s.big_k, 1 << 12);
    }

    #[test]
    fn poisson_eps_window() {
        let s = param_schedule(Theorem::PoissonPds, 1.0, 0.5, 1 << 12, None).unwrap();
        let e = s.eps.unwrap();
        assert!(e > 0.0 && 0.5 + e * 0.5 < 0.75);
        assert!(s.target.p > s.target.q);
        assert!(param_schedule(Theorem::PoissonPds, 1.0, 0.5, 1 << 12, Some(0.9)).is_err());
    }
}
