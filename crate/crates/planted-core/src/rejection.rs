//! Rejection kernels: approximate maps `Bern(p) → f`, `Bern(q) → g`.

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::special::{normal_log_pdf, poisson_log_pmf};

/// Target law of a kernel endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Density {
    /// `Pois(lambda)`.
    Poisson {
        /// Rate.
        lambda: f64,
    },
    /// `N(mean, 1)`.
    Normal {
        /// Mean.
        mean: f64,
    },
}

impl Density {
    /// Log density (or log mass) at `x`.
    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            Density::Poisson { lambda } => poisson_log_pmf(x, lambda),
            Density::Normal { mean } => normal_log_pdf(x, mean),
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Density::Poisson { lambda } if lambda <= 0.0 => 0.0,
            Density::Poisson { lambda } => Poisson::new(lambda).expect("positive rate").sample(rng),
            Density::Normal { mean } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + z
            }
        }
    }
}

/// Parameters a kernel was derived from, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(missing_docs)]
pub struct KernelRecord {
    pub n: usize,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
}

/// Fully resolved kernel `rk(p → f, q → g, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSpec {
    /// Planted Bernoulli endpoint.
    pub p: f64,
    /// Null Bernoulli endpoint.
    pub q: f64,
    /// Target for `Bern(p)`.
    pub f: Density,
    /// Target for `Bern(q)`.
    pub g: Density,
    /// Iteration budget `N`.
    pub budget: usize,
    /// Derivation record.
    pub record: KernelRecord,
}

/// Kernel output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDraw {
    /// Accepted value, or 0 when the budget ran out.
    pub value: f64,
    /// Whether all `N` rounds rejected.
    pub exhausted: bool,
}

impl KernelSpec {
    /// Generic kernel. No total-variation guarantee is attached.
    pub fn new(p: f64, q: f64, f: Density, g: Density, budget: usize) -> Result<Self> {
        ensure!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q), "endpoints must lie in [0, 1]");
        ensure!(p > q, "need p > q (p = {p}, q = {q})");
        ensure!(budget >= 1, "budget must be at least 1");
        Ok(Self { p, q, f, g, budget, record: KernelRecord::default() })
    }

    /// Apply the kernel to bit `b`.
    pub fn apply<R: Rng + ?Sized>(&self, b: bool, rng: &mut R) -> Result<KernelDraw> {
        rejection_kernel(b, self, rng)
    }
}

/// One run of the kernel on input bit `b`.
///
/// Up to `N` rounds. With `b = 0` draw `Z ~ g` and, when `p·g(Z) ≥ q·f(Z)`,
/// accept with probability `1 − q f(Z) / (p g(Z))`. With `b = 1` draw `Z ~ f`
/// and, when `(1−q) f(Z) ≥ (1−p) g(Z)`, accept with probability
/// `1 − (1−p) g(Z) / ((1−q) f(Z))`. Ratios are formed in log space.
pub fn rejection_kernel<R: Rng + ?Sized>(b: bool, spec: &KernelSpec, rng: &mut R) -> Result<KernelDraw> {
    let (lp, lq) = (spec.p.ln(), spec.q.ln());
    let (l1p, l1q) = ((1.0 - spec.p).ln(), (1.0 - spec.q).ln());
    for _ in 0..spec.budget {
        let (z, ln_reject) = if b {
            let z = spec.f.sample(rng);
            let (lf, lg) = (spec.f.ln_density(z), spec.g.ln_density(z));
            (z, l1p + lg - (l1q + lf))
        } else {
            let z = spec.g.sample(rng);
            let (lf, lg) = (spec.f.ln_density(z), spec.g.ln_density(z));
            (z, lq + lf - (lp + lg))
        };
        if ln_reject.is_nan() {
            return Err(Error::Numeric(alloc::format!("density ratio undefined at {z}")));
        }
        // condition `ratio ≤ 1`; acceptance 1 − ratio
        if ln_reject <= 0.0 {
            let accept = -ln_reject.exp_m1();
            if rng.random::<f64>() < accept {
                return Ok(KernelDraw { value: z, exhausted: false });
            }
        }
    }
    Ok(KernelDraw { value: 0.0, exhausted: true })
}

/// `rk_P1 = rk(1 → Pois(cλ), q → Pois(λ), ⌈6 log_{1/q} n⌉)` with `λ = n^{−ε}`.
pub fn make_kernel_p1(n: usize, c: f64, q: f64, eps: f64) -> Result<KernelSpec> {
    ensure!(n >= 2, "n must be at least 2");
    ensure!(c > 1.0, "c must exceed 1");
    ensure!(q > 0.0 && q < 1.0, "q must lie in (0, 1)");
    ensure!(eps > 0.0, "eps must be positive");
    let nf = n as f64;
    let need = 3.0 / eps;
    let have = (1.0 / q).ln() / c.ln();
    ensure!(need <= have * (1.0 + 1e-12), "precondition 3/eps <= log_c(1/q) violated: {need} > {have}");
    let lambda = nf.powf(-eps);
    let budget = (6.0 * nf.ln() / (1.0 / q).ln()).ceil() as usize;
    Ok(KernelSpec {
        p: 1.0,
        q,
        f: Density::Poisson { lambda: c * lambda },
        g: Density::Poisson { lambda },
        budget: budget.max(1),
        record: KernelRecord { n, lambda: Some(lambda), c: Some(c), eps: Some(eps), ..Default::default() },
    })
}

/// `rk_P2 = rk(1/2+ρ → Pois(cλ), 1/2 → Pois(λ), ⌈6 ρ⁻¹ ln n⌉)` with `λ = n^{−ε}`,
/// checked against `(K+3)/ε ≤ log_c(1+2ρ)`.
pub fn make_kernel_p2(n: usize, rho: f64, c: f64, eps: f64, big_k: f64) -> Result<KernelSpec> {
    ensure!(n >= 2, "n must be at least 2");
    ensure!(rho > 0.0 && rho < 0.5, "rho must lie in (0, 1/2)");
    ensure!(c > 1.0, "c must exceed 1");
    ensure!(eps > 0.0, "eps must be positive");
    let nf = n as f64;
    let lambda = nf.powf(-eps);
    ensure!(lambda <= 1.0, "lambda = n^-eps must not exceed 1");
    let need = (big_k + 3.0) / eps;
    let have = (2.0 * rho).ln_1p() / c.ln();
    ensure!(need <= have * (1.0 + 1e-9), "precondition (K+3)/eps <= log_c(1+2rho) violated: {need} > {have}");
    let budget = (6.0 * nf.ln() / rho).ceil() as usize;
    Ok(KernelSpec {
        p: 0.5 + rho,
        q: 0.5,
        f: Density::Poisson { lambda: c * lambda },
        g: Density::Poisson { lambda },
        budget: budget.max(1),
        record: KernelRecord {
            n,
            lambda: Some(lambda),
            c: Some(c),
            rho: Some(rho),
            eps: Some(eps),
            ..Default::default()
        },
    })
}

/// `δ = min(ln(p/q), ln((1−q)/(1−p)))`.
pub fn gaussian_delta(p: f64, q: f64) -> f64 {
    let a = (p / q).ln();
    let b = if p >= 1.0 { f64::INFINITY } else { ((1.0 - q) / (1.0 - p)).ln() };
    a.min(b)
}

/// Largest admissible mean `δ / (2√(6 ln n + 2 ln(1/(p−q))))`.
pub fn gaussian_mu_bound(n: usize, p: f64, q: f64) -> f64 {
    let d = gaussian_delta(p, q);
    d / (2.0 * (6.0 * (n as f64).ln() + 2.0 * (1.0 / (p - q)).ln()).sqrt())
}

/// `rk_G(p → N(μ,1), q → N(0,1), ⌈6 δ⁻¹ ln n⌉)` at the maximal `μ`.
pub fn make_kernel_g(n: usize, p: f64, q: f64) -> Result<KernelSpec> {
    make_kernel_g_with_mu(n, p, q, gaussian_mu_bound(n, p, q))
}

/// `rk_G` at a caller-chosen `μ`, verified against the admissible bound.
pub fn make_kernel_g_with_mu(n: usize, p: f64, q: f64, mu: f64) -> Result<KernelSpec> {
    check_gaussian_endpoints(n, p, q)?;
    let bound = gaussian_mu_bound(n, p, q);
    ensure!(mu > 0.0 && mu <= bound * (1.0 + 1e-12), "mu = {mu} exceeds the admissible bound {bound}");
    gaussian_kernel_unchecked(n, p, q, mu)
}

fn check_gaussian_endpoints(n: usize, p: f64, q: f64) -> Result<()> {
    ensure!(n >= 2, "n must be at least 2");
    ensure!(q > 0.0 && q < 1.0, "q must lie strictly inside (0, 1)");
    ensure!(p > q && p <= 1.0, "need q < p <= 1");
    Ok(())
}

/// `rk_G` at any positive `μ`, budget `⌈6 δ⁻¹ ln n⌉`; no bound check.
pub(crate) fn gaussian_kernel_unchecked(n: usize, p: f64, q: f64, mu: f64) -> Result<KernelSpec> {
    check_gaussian_endpoints(n, p, q)?;
    ensure!(mu.is_finite() && mu > 0.0, "mu must be positive");
    let delta = gaussian_delta(p, q);
    let budget = (6.0 * (n as f64).ln() / delta).ceil() as usize;
    Ok(KernelSpec {
        p,
        q,
        f: Density::Normal { mean: mu },
        g: Density::Normal { mean: 0.0 },
        budget: budget.max(1),
        record: KernelRecord { n, mu: Some(mu), delta: Some(delta), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomStream;

    #[test]
    fn p1_examples() {
        let k = make_kernel_p1(100, 2.0, 0.5f64.powi(7), 0.5).unwrap();
        match k.g {
            Density::Poisson { lambda } => assert!((lambda - 0.1).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(make_kernel_p1(100, 2.0, 0.01, 0.5).is_ok());
        assert!(make_kernel_p1(100, 2.0, 0.2, 0.5).is_err());
    }

    #[test]
    fn p1_budget_at_1000() {
        // c = 1.01 keeps the precondition satisfied at q = 1/2
        let k = make_kernel_p1(1000, 1.01, 0.5, 0.5).unwrap();
        assert_eq!(k.budget, 60);
    }

    #[test]
    fn p2_budget() {
        let c = 1.2f64.powf(0.5 / 4.0);
        let k = make_kernel_p2(100, 0.1, c, 0.5, 1.0).unwrap();
        assert_eq!(k.budget, 277);
        let k = make_kernel_p2(100, 0.49, 1.0001, 0.5, 1.0).unwrap();
        assert!((k.p - 0.99).abs() < 1e-15);
    }

    #[test]
    fn g_examples() {
        let k = make_kernel_g(1000, 1.0, 0.5).unwrap();
        assert_eq!(k.budget, 60);
        let mu = k.record.mu.unwrap();
        assert!((mu - 0.052_96).abs() < 5e-5, "{mu}");
        assert!((gaussian_delta(1.0, 0.5) - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((gaussian_delta(0.6, 0.5) - 1.2f64.ln()).abs() < 1e-15);
        assert!(make_kernel_g(100, 0.5, 0.0).is_err());
        assert!(make_kernel_g_with_mu(1000, 1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn perfect_sampler_when_p_is_one() {
        let k = make_kernel_g(1000, 1.0, 0.5).unwrap();
        let mut rng = RandomStream::new(9).rng();
        for _ in 0..1000 {
            let d = rejection_kernel(true, &k, &mut rng).unwrap();
            assert!(!d.exhausted);
        }
    }

    #[test]
    fn exhaustion_returns_zero() {
        // g-branch with q f / (p g) = 1 everywhere never accepts
        let spec = KernelSpec::new(0.5, 0.25, Density::Normal { mean: 0.0 }, Density::Normal { mean: 0.0 }, 3)
            .unwrap();
        let spec = KernelSpec { q: 0.5 - 1e-300, p: 0.5, ..spec };
        let mut rng = RandomStream::new(1).rng();
        let mut saw = false;
        for _ in 0..200 {
            let d = rejection_kernel(false, &spec, &mut rng).unwrap();
            if d.exhausted {
                assert_eq!(d.value, 0.0);
                saw = true;
            }
        }
        assert!(saw);
    }
}
