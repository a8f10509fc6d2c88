//! Problem tags, parameter records, hypotheses and test verdicts.

use alloc::boxed::Box;
use core::fmt;
use core::str::FromStr;

use crate::error::{ensure, Error, Result};

/// Planted problem families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(missing_docs, clippy::upper_case_acronyms)]
pub enum Problem {
    PC,
    PIS,
    PDS,
    SSBM,
    BC,
    ROS,
    SROS,
    SSW,
    SPCA,
    BSPCA,
    USPCA,
    UBSPCA,
}

impl Problem {
    /// All tags.
    pub const ALL: [Problem; 12] = [
        Problem::PC,
        Problem::PIS,
        Problem::PDS,
        Problem::SSBM,
        Problem::BC,
        Problem::ROS,
        Problem::SROS,
        Problem::SSW,
        Problem::SPCA,
        Problem::BSPCA,
        Problem::USPCA,
        Problem::UBSPCA,
    ];

    /// Graph-valued observation.
    pub fn is_graph(self) -> bool {
        matches!(self, Problem::PC | Problem::PIS | Problem::PDS | Problem::SSBM)
    }

    /// Square matrix observation.
    pub fn is_matrix(self) -> bool {
        matches!(self, Problem::BC | Problem::ROS | Problem::SROS | Problem::SSW)
    }

    /// Sample-matrix observation.
    pub fn is_spca(self) -> bool {
        matches!(self, Problem::SPCA | Problem::BSPCA | Problem::USPCA | Problem::UBSPCA)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| alloc::format!("{p:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(alloc::format!("unknown problem tag `{s}`")))
    }
}

/// Null or planted hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(missing_docs)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Parameters of a planted problem. Unused fields stay at zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ProblemParams {
    /// Problem tag.
    pub problem: Problem,
    /// Vertices, matrix side, or sample count.
    pub n: usize,
    /// Planted size.
    pub k: usize,
    /// Ambient dimension for sparse PCA.
    pub d: usize,
    /// Planted edge density.
    pub p: f64,
    /// Ambient edge density.
    pub q: f64,
    /// Community bias.
    pub rho: f64,
    /// Signal strength for matrix problems.
    pub mu: f64,
    /// Spike strength for sparse PCA.
    pub theta: f64,
    /// Community-size slack exponent.
    pub delta_ssbm: f64,
    /// Sign-imbalance constant.
    pub delta_bspca: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            problem: Problem::PC,
            n: 1,
            k: 1,
            d: 0,
            p: 0.0,
            q: 0.0,
            rho: 0.0,
            mu: 0.0,
            theta: 0.0,
            delta_ssbm: 0.1,
            delta_bspca: 0.1,
        }
    }
}

impl ProblemParams {
    fn base(problem: Problem, n: usize, k: usize) -> Self {
        Self { problem, n, k, ..Self::default() }
    }

    /// `PC(n, k, p)`.
    pub fn pc(n: usize, k: usize, p: f64) -> Self {
        Self { p, q: p, ..Self::base(Problem::PC, n, k) }
    }

    /// `PIS(n, k, q)`.
    pub fn pis(n: usize, k: usize, q: f64) -> Self {
        Self { q, ..Self::base(Problem::PIS, n, k) }
    }

    /// `PDS(n, k, p, q)`.
    pub fn pds(n: usize, k: usize, p: f64, q: f64) -> Self {
        Self { p, q, ..Self::base(Problem::PDS, n, k) }
    }

    /// `SSBM(n, k, q, rho)`.
    pub fn ssbm(n: usize, k: usize, q: f64, rho: f64) -> Self {
        Self { q, rho, ..Self::base(Problem::SSBM, n, k) }
    }

    /// Matrix problems `BC | ROS | SROS | SSW` with strength `mu`.
    pub fn matrix(problem: Problem, n: usize, k: usize, mu: f64) -> Self {
        Self { mu, ..Self::base(problem, n, k) }
    }

    /// Sparse PCA variants with `n` samples in dimension `d`.
    pub fn spca(problem: Problem, n: usize, k: usize, d: usize, theta: f64) -> Self {
        Self { d, theta, ..Self::base(problem, n, k) }
    }

    /// Check the record's invariants.
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        ensure!(self.k >= 1, "k must be at least 1");
        ensure!(unit(self.p) && unit(self.q), "probabilities must lie in [0, 1] (p = {}, q = {})", self.p, self.q);
        ensure!(self.mu >= 0.0 && self.mu.is_finite(), "mu must be finite and nonnegative");
        ensure!(self.theta >= 0.0 && self.theta.is_finite(), "theta must be finite and nonnegative");
        ensure!(
            self.delta_ssbm > 0.0 && self.delta_ssbm < 0.5 && self.delta_bspca > 0.0 && self.delta_bspca < 0.5,
            "delta constants must lie in (0, 1/2)"
        );
        if self.problem.is_spca() {
            ensure!(self.k <= self.d, "k = {} exceeds d = {}", self.k, self.d);
            ensure!(self.n >= 1, "need at least one sample");
        } else {
            ensure!(self.k <= self.n, "k = {} exceeds n = {}", self.k, self.n);
        }
        if self.problem == Problem::SSBM {
            ensure!(
                self.rho >= 0.0 && self.rho <= self.q.min(1.0 - self.q),
                "rho = {} must not exceed min(q, 1 - q)",
                self.rho
            );
        }
        Ok(())
    }
}

/// Comparison a verdict applies between statistic and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(missing_docs)]
pub enum Rule {
    Greater,
    GreaterEq,
    Less,
    LessEq,
}

impl Rule {
    /// Evaluate `statistic ⋄ threshold`.
    pub fn holds(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Rule::Greater => statistic > threshold,
            Rule::GreaterEq => statistic >= threshold,
            Rule::Less => statistic < threshold,
            Rule::LessEq => statistic <= threshold,
        }
    }
}

/// Output of a detection test.
///
/// `decision` is `H1` iff `rule` holds for `(statistic, threshold)` or, when
/// present, the `alternative` branch decides `H1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    /// Decision.
    pub decision: Hypothesis,
    /// Test statistic.
    pub statistic: f64,
    /// Threshold.
    pub threshold: f64,
    /// Comparison.
    pub rule: Rule,
    /// Second branch of a disjunctive test.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub alternative: Option<Box<Verdict>>,
}

impl Verdict {
    /// Single-branch verdict.
    pub fn new(statistic: f64, threshold: f64, rule: Rule) -> Self {
        let decision = if rule.holds(statistic, threshold) { Hypothesis::H1 } else { Hypothesis::H0 };
        Self { decision, statistic, threshold, rule, alternative: None }
    }

    /// `H1` if either branch says `H1`.
    pub fn either(self, other: Verdict) -> Self {
        let decision = if self.decision == Hypothesis::H1 || other.decision == Hypothesis::H1 {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        };
        Self { decision, alternative: Some(Box::new(other)), ..self }
    }

    /// Whether the decision is `H1`.
    pub fn is_h1(&self) -> bool {
        self.decision == Hypothesis::H1
    }

    /// Recompute the decision from the recorded comparisons.
    pub fn is_consistent(&self) -> bool {
        let own = self.rule.holds(self.statistic, self.threshold);
        let alt = self.alternative.as_ref().map(|a| a.is_consistent() && a.is_h1());
        if let Some(a) = &self.alternative {
            if !a.is_consistent() {
                return false;
            }
        }
        let expect = own || alt.unwrap_or(false);
        expect == self.is_h1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_tags() {
        assert_eq!("pc".parse::<Problem>().unwrap(), Problem::PC);
        assert_eq!("UBSPCA".parse::<Problem>().unwrap(), Problem::UBSPCA);
        assert!("xyz".parse::<Problem>().is_err());
    }

    #[test]
    fn validation() {
        assert!(ProblemParams::pc(10, 11, 0.5).validate().is_err());
        assert!(ProblemParams::pds(10, 3, 1.5, 0.2).validate().is_err());
        assert!(ProblemParams::ssbm(100, 10, 0.3, 0.4).validate().is_err());
        assert!(ProblemParams::ssbm(100, 10, 0.3, 0.2).validate().is_ok());
    }

    #[test]
    fn verdict_either() {
        let v = Verdict::new(1.0, 2.0, Rule::Greater).either(Verdict::new(5.0, 4.0, Rule::Greater));
        assert!(v.is_h1());
        assert!(v.is_consistent());
    }
}
