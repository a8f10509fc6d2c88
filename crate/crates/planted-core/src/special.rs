//! Scalar special functions and small sampling helpers.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Log density of `N(mean, 1)`.
pub fn normal_log_pdf(x: f64, mean: f64) -> f64 {
    let z = x - mean;
    -0.5 * z * z - 0.5 * (2.0 * core::f64::consts::PI).ln()
}

/// Log mass of `Pois(lambda)` at integer `x` (−∞ off the support).
pub fn poisson_log_pmf(x: f64, lambda: f64) -> f64 {
    if x < 0.0 || x.fract() != 0.0 {
        return f64::NEG_INFINITY;
    }
    if lambda == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    x * lambda.ln() - lambda - libm::lgamma(x + 1.0)
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `C(n, 2)` as a float.
pub fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Uniform permutation of `0..n`, as the image vector `i ↦ sigma[i]`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

/// Inverse permutation.
pub fn invert(sigma: &[usize]) -> Vec<usize> {
    let mut inv = alloc::vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s] = i;
    }
    inv
}

/// Uniform ±1.
#[inline]
pub fn rademacher<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn poisson_mass_sums_to_one() {
        let s: f64 = (0..60).map(|x| poisson_log_pmf(x as f64, 3.5).exp()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_inverse() {
        let mut rng = crate::RandomStream::new(0).rng();
        let s = random_permutation(50, &mut rng);
        let inv = invert(&s);
        assert!((0..50).all(|i| inv[s[i]] == i));
    }
}
