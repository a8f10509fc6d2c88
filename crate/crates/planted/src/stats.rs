//! Goodness-of-fit and two-sample statistics, Wilson intervals, and exact
//! total variation on small discrete laws.

use std::collections::BTreeMap;

use planted_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::Result;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 1e-3;
/// Smallest sample accepted by the tests.
pub const MIN_SAMPLES: usize = 100;
/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;
/// Largest outcome space [`exact_tv_small`] will enumerate.
pub const MAX_OUTCOMES: usize = 10_000_000;

/// Test family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Kolmogorov-Smirnov.
    #[serde(rename = "KS")]
    Ks,
    /// Pearson chi-square on merged bins.
    #[serde(rename = "chi-square")]
    ChiSquare,
    /// Moment comparison (means and variances or covariances).
    #[serde(rename = "mean-cov")]
    MeanCov,
    /// Pearson correlation.
    #[serde(rename = "correlation")]
    Correlation,
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// Test family.
    pub method: Method,
    /// Test statistic.
    pub statistic: f64,
    /// p-value when the test has one.
    pub p_value: Option<f64>,
    /// Level (or tolerance for tolerance checks).
    pub alpha: f64,
    /// `p > alpha`, or the statistic within tolerance.
    pub pass: bool,
    /// Sample sizes.
    pub sizes: Vec<usize>,
    /// Bins after merging (chi-square only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

impl TestReport {
    fn with_p(method: Method, statistic: f64, p: f64, sizes: Vec<usize>) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self { method, statistic, p_value: Some(p), alpha: DEFAULT_ALPHA, pass: p > DEFAULT_ALPHA, sizes, bins: None }
    }

    /// Re-evaluate `pass` at level `alpha`.
    pub fn at_level(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        if let Some(p) = self.p_value {
            self.pass = p > alpha;
        }
        self
    }
}

/// Analytic reference law.
pub enum Reference<'a> {
    /// CDF of a continuous law.
    Continuous(&'a dyn Fn(f64) -> f64),
    /// PMF on the nonnegative integers.
    Discrete(&'a dyn Fn(u64) -> f64),
}

fn param(msg: impl Into<String>) -> crate::Error {
    CoreError::Param(msg.into()).into()
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(param(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS p-value with Stephens' small-sample correction, for effective size `ne`.
fn ks_p(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(CoreError::Numeric("NaN in sample".into()).into());
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test of `samples` against an analytic reference.
///
/// KS needs a continuous reference; chi-square needs a discrete one and
/// nonnegative integer samples. Bins with expected count below 5 are merged.
pub fn gof_test(samples: &[f64], reference: Reference<'_>, method: Method) -> Result<TestReport> {
    check_size(samples.len())?;
    match (method, reference) {
        (Method::Ks, Reference::Continuous(cdf)) => {
            let x = sorted(samples)?;
            let n = x.len() as f64;
            let mut d: f64 = 0.0;
            for (i, &v) in x.iter().enumerate() {
                let f = cdf(v);
                d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
            }
            Ok(TestReport::with_p(Method::Ks, d, ks_p(d, n), vec![x.len()]))
        }
        (Method::ChiSquare, Reference::Discrete(pmf)) => chi_square_gof(samples, pmf),
        (m, _) => Err(param(format!("{m:?} does not match the reference type"))),
    }
}

fn as_count(v: f64) -> Result<u64> {
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
        return Err(param(format!("chi-square samples must be nonnegative integers, got {v}")));
    }
    Ok(v as u64)
}

fn chi_square_gof(samples: &[f64], pmf: &dyn Fn(u64) -> f64) -> Result<TestReport> {
    let n = samples.len() as f64;
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for &s in samples {
        *counts.entry(as_count(s)?).or_default() += 1.0;
    }
    let top = *counts.keys().next_back().unwrap_or(&0);
    // (observed, expected) per merged bin; the last bin absorbs the upper tail
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp, mut cum) = (0.0, 0.0, 0.0);
    for v in 0..=top {
        let pr = pmf(v);
        cum += pr;
        obs += counts.get(&v).copied().unwrap_or(0.0);
        exp += n * pr;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    exp += n * (1.0 - cum).max(0.0);
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) if exp < MIN_EXPECTED => {
                last.0 += obs;
                last.1 += exp;
            }
            _ => bins.push((obs, exp)),
        }
    }
    if bins.len() < 2 {
        return Err(param("fewer than two bins after merging"));
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (bins.len() - 1) as f64;
    let p = ChiSquared::new(df).map_err(|e| param(e.to_string()))?.sf(stat);
    let mut r = TestReport::with_p(Method::ChiSquare, stat, p, vec![samples.len()]);
    r.bins = Some(bins.len());
    Ok(r)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Pearson correlation of paired samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (ma, _) = mean_var(&a[..n]);
    let (mb, _) = mean_var(&b[..n]);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    sab / (saa * sbb).sqrt()
}

fn two_sided_normal(z: f64) -> f64 {
    let std = Normal::standard();
    2.0 * std.sf(z.abs())
}

/// Two-sample comparison.
///
/// KS compares empirical CDFs; chi-square compares counts of integer values;
/// mean-cov combines a Welch test on the means with a fourth-moment test on
/// the variances (Bonferroni); correlation tests `r = 0` for paired samples
/// through the Fisher transform.
pub fn two_sample_test(a: &[f64], b: &[f64], method: Method) -> Result<TestReport> {
    check_size(a.len())?;
    check_size(b.len())?;
    let sizes = vec![a.len(), b.len()];
    match method {
        Method::Ks => {
            let (x, y) = (sorted(a)?, sorted(b)?);
            let (n, m) = (x.len() as f64, y.len() as f64);
            let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
            while i < x.len() && j < y.len() {
                let t = x[i].min(y[j]);
                while i < x.len() && x[i] <= t {
                    i += 1;
                }
                while j < y.len() && y[j] <= t {
                    j += 1;
                }
                d = d.max((i as f64 / n - j as f64 / m).abs());
            }
            Ok(TestReport::with_p(Method::Ks, d, ks_p(d, n * m / (n + m)), sizes))
        }
        Method::ChiSquare => {
            let mut table: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
            for &v in a {
                table.entry(as_count(v)?).or_default().0 += 1.0;
            }
            for &v in b {
                table.entry(as_count(v)?).or_default().1 += 1.0;
            }
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let fa = na / (na + nb);
            let mut bins: Vec<(f64, f64)> = Vec::new();
            let (mut ca, mut cb) = (0.0, 0.0);
            for (_, (x, y)) in table {
                ca += x;
                cb += y;
                let pooled = ca + cb;
                if pooled * fa.min(1.0 - fa) >= MIN_EXPECTED {
                    bins.push((ca, cb));
                    ca = 0.0;
                    cb = 0.0;
                }
            }
            if ca + cb > 0.0 {
                match bins.last_mut() {
                    Some(last) => {
                        last.0 += ca;
                        last.1 += cb;
                    }
                    None => bins.push((ca, cb)),
                }
            }
            if bins.len() < 2 {
                return Err(param("fewer than two bins after merging"));
            }
            let mut stat = 0.0;
            for &(x, y) in &bins {
                let t = x + y;
                let (ea, eb) = (t * fa, t * (1.0 - fa));
                stat += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
            }
            let df = (bins.len() - 1) as f64;
            let p = ChiSquared::new(df).map_err(|e| param(e.to_string()))?.sf(stat);
            let mut r = TestReport::with_p(Method::ChiSquare, stat, p, sizes);
            r.bins = Some(bins.len());
            Ok(r)
        }
        Method::MeanCov => {
            let (ma, va) = mean_var(a);
            let (mb, vb) = mean_var(b);
            let (n, m) = (a.len() as f64, b.len() as f64);
            let z_mean = (ma - mb) / (va / n + vb / m).sqrt();
            let m4 = |x: &[f64], mu: f64| x.iter().map(|t| (t - mu).powi(4)).sum::<f64>() / x.len() as f64;
            let se_var = ((m4(a, ma) - va * va) / n + (m4(b, mb) - vb * vb) / m).sqrt();
            let z_var = (va - vb) / se_var;
            let p = (2.0 * two_sided_normal(z_mean).min(two_sided_normal(z_var))).min(1.0);
            Ok(TestReport::with_p(Method::MeanCov, z_mean.abs().max(z_var.abs()), p, sizes))
        }
        Method::Correlation => {
            if a.len() != b.len() {
                return Err(param("correlation needs paired samples of equal length"));
            }
            let r = pearson(a, b);
            let z = r.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh() * (a.len() as f64 - 3.0).sqrt();
            Ok(TestReport::with_p(Method::Correlation, r, two_sided_normal(z), sizes))
        }
    }
}

/// Tolerance check on sample moments: every mean within `mean_tol` of `mean`
/// and every covariance entry within `cov_tol` of `cov`. The statistic is the
/// larger of the two normalized worst deviations (`≤ 1` passes).
pub fn mean_cov_check(samples: &[Vec<f64>], mean: &[f64], cov: &[Vec<f64>], mean_tol: f64, cov_tol: f64) -> Result<TestReport> {
    check_size(samples.len())?;
    let d = mean.len();
    if samples.iter().any(|s| s.len() != d) || cov.len() != d {
        return Err(param("dimension mismatch"));
    }
    let n = samples.len() as f64;
    let mut m = vec![0.0; d];
    for s in samples {
        for (acc, x) in m.iter_mut().zip(s) {
            *acc += x / n;
        }
    }
    let mut c = vec![vec![0.0; d]; d];
    for s in samples {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += (s[i] - m[i]) * (s[j] - m[j]) / (n - 1.0);
            }
        }
    }
    let dm = m.iter().zip(mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut dc: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            dc = dc.max((c[i][j] - cov[i][j]).abs());
        }
    }
    let stat = (dm / mean_tol).max(dc / cov_tol);
    Ok(TestReport { method: Method::MeanCov, statistic: stat, p_value: None, alpha: 1.0, pass: stat <= 1.0, sizes: vec![samples.len()], bins: None })
}

/// Tolerance check `|r| ≤ tol` on paired samples.
pub fn correlation_check(a: &[f64], b: &[f64], tol: f64) -> Result<TestReport> {
    check_size(a.len())?;
    if a.len() != b.len() {
        return Err(param("correlation needs paired samples of equal length"));
    }
    let r = pearson(a, b);
    Ok(TestReport { method: Method::Correlation, statistic: r, p_value: None, alpha: tol, pass: r.abs() <= tol, sizes: vec![a.len()], bins: None })
}

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson(errors: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let den = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
    ((centre - half).clamp(0.0, 1.0).min(p), (centre + half).clamp(0.0, 1.0).max(p))
}

/// Finite law on outcomes encoded as integers.
pub type DiscreteLaw = BTreeMap<u64, f64>;

/// `½ Σ |a(x) − b(x)|` by enumeration of the joint support.
pub fn exact_tv_small(a: &DiscreteLaw, b: &DiscreteLaw) -> Result<f64> {
    if a.len() + b.len() > 2 * MAX_OUTCOMES {
        return Err(CoreError::Refused(format!("more than {MAX_OUTCOMES} outcomes")).into());
    }
    let mut union: Vec<u64> = a.keys().chain(b.keys()).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() > MAX_OUTCOMES {
        return Err(CoreError::Refused(format!("more than {MAX_OUTCOMES} outcomes")).into());
    }
    let tv: f64 = union
        .iter()
        .map(|x| (a.get(x).copied().unwrap_or(0.0) - b.get(x).copied().unwrap_or(0.0)).abs())
        .sum();
    Ok(0.5 * tv)
}

/// `χ²(Bern(p), Bern(q))`.
pub fn chi_square_bernoulli(p: f64, q: f64) -> f64 {
    (p - q) * (p - q) / q + (p - q) * (p - q) / (1.0 - q)
}

/// Laws of `M^{id,σ}` (diagonal `Bern(p)`, off-diagonal `Bern(q)`, uniform
/// column permutation `σ`) and of `Bern(q)^{⊗n×n}`, as laws on row-major bit
/// patterns of the `n × n` matrix.
pub fn permuted_diagonal_laws(n: usize, p: f64, q: f64) -> Result<(DiscreteLaw, DiscreteLaw)> {
    let cells = n * n;
    let perms = permutations(n);
    if cells >= 24 || (perms.len() << cells) > MAX_OUTCOMES {
        return Err(CoreError::Refused(format!("n = {n} is too large to enumerate")).into());
    }
    let bern = |x: bool, r: f64| if x { r } else { 1.0 - r };
    let (mut a, mut b) = (DiscreteLaw::new(), DiscreteLaw::new());
    for pattern in 0u64..(1 << cells) {
        let bit = |i: usize, j: usize| pattern >> (i * n + j) & 1 == 1;
        let mut pa = 0.0;
        for sigma in &perms {
            let mut pr = 1.0;
            for i in 0..n {
                for j in 0..n {
                    // the diagonal entry of row i lands in column σ(i)
                    pr *= bern(bit(i, j), if j == sigma[i] { p } else { q });
                }
            }
            pa += pr;
        }
        a.insert(pattern, pa / perms.len() as f64);
        let mut pb = 1.0;
        for i in 0..n {
            for j in 0..n {
                pb *= bern(bit(i, j), q);
            }
        }
        b.insert(pattern, pb);
    }
    Ok((a, b))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
