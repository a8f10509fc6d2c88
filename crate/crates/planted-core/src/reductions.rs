//! End-to-end reductions from planted clique and planted dense subgraph,
//! and detection from a recovery procedure.
//!
//! Each reduction has a `_traced` form that also carries the planted set (or
//! integer spike) through every permutation it applies. Total-variation
//! budgets evaluate the stated asymptotic bounds with unit constants.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloning::{gaussian_clone, pds_clone, random_rotate, reflection_clone_traced, rotation_tv_bound, CloneTargets};
use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::lifting::{
    apply_kernel, gaussian_lift_matrix, gaussian_lift_mu, general_pds_params, general_pds_reduce_traced, pc_lift_traced,
};
use crate::linalg::{covariance, sigma_max, top_eigen};
use crate::matrix::RealMatrix;
use crate::params::{Problem, ProblemParams, Rule, Verdict};
use crate::rejection::gaussian_kernel_unchecked;
use crate::solvers::RecoveryResult;
use crate::special::{normal_cdf, pairs, rademacher, random_permutation};
use crate::support::Support;

/// Observation produced by a reduction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "kind", content = "data"))]
pub enum Observation {
    /// Graph.
    Graph(Graph),
    /// Square matrix.
    Matrix(RealMatrix),
    /// `d × n` sample matrix, one sample per column.
    Samples(RealMatrix),
}

impl Observation {
    /// `(rows, cols)`, or `(n, n)` for a graph.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Observation::Graph(g) => (g.n(), g.n()),
            Observation::Matrix(m) | Observation::Samples(m) => (m.rows(), m.cols()),
        }
    }

    /// The graph, if any.
    pub fn as_graph(&self) -> Option<&Graph> {
        match self {
            Observation::Graph(g) => Some(g),
            _ => None,
        }
    }

    /// The matrix or sample matrix, if any.
    pub fn as_matrix(&self) -> Option<&RealMatrix> {
        match self {
            Observation::Matrix(m) | Observation::Samples(m) => Some(m),
            Observation::Graph(_) => None,
        }
    }
}

/// Total-variation allowance attached to a reduction output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TvBudget {
    /// Finite bound.
    Bounded(f64),
    /// No guarantee applies at these parameters.
    Unbounded,
}

impl TvBudget {
    /// Sum of two budgets.
    pub fn plus(self, other: TvBudget) -> TvBudget {
        match (self, other) {
            (TvBudget::Bounded(a), TvBudget::Bounded(b)) if (a + b).is_finite() => TvBudget::Bounded(a + b),
            _ => TvBudget::Unbounded,
        }
    }

    /// Bound as a float, infinite when unbounded.
    pub fn value(self) -> f64 {
        match self {
            TvBudget::Bounded(x) => x,
            TvBudget::Unbounded => f64::INFINITY,
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for TvBudget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            TvBudget::Bounded(x) => s.serialize_f64(*x),
            TvBudget::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for TvBudget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(TvBudget::Bounded(x)),
            Repr::Tag(t) if t == "unbounded" => Ok(TvBudget::Unbounded),
            Repr::Tag(t) => Err(serde::de::Error::custom(alloc::format!("unknown budget `{t}`"))),
        }
    }
}

/// Latent structure carried through a reduction.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ReductionTrace {
    /// Planted rows (or vertices, or spike coordinates).
    pub row_support: Option<Support>,
    /// Planted columns.
    pub col_support: Option<Support>,
    /// Integer row spike before normalization.
    pub spike_row: Option<Vec<f64>>,
    /// Integer column spike before normalization.
    pub spike_col: Option<Vec<f64>>,
    /// Signed communities for block-model outputs.
    pub communities: Option<(Support, Support)>,
}

/// Result of a reduction with its claimed target problem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReductionOutput {
    /// The produced instance.
    pub observation: Observation,
    /// Target problem and parameters the output approximates.
    pub target: ProblemParams,
    /// Total-variation allowance at these parameters.
    pub tv_budget: TvBudget,
    /// Latent tracking, present only in traced runs.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub trace: Option<ReductionTrace>,
    /// Rejection-kernel calls that exhausted their budget.
    pub kernel_exhaustions: usize,
    /// Parameter-window warnings.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub warnings: Vec<String>,
}

impl ReductionOutput {
    /// Drop the trace.
    pub fn untraced(mut self) -> Self {
        self.trace = None;
        self
    }
}

fn lift_tv(n: usize) -> TvBudget {
    TvBudget::Bounded(1.0 / (n as f64).ln().sqrt())
}

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// `W ← (W + A)/√2` with `A` antisymmetric standard normal below the diagonal,
/// after replacing the diagonal by `N(0, 2)`.
fn antisymmetrize<R: Rng + ?Sized>(w: &mut RealMatrix, rng: &mut R) {
    let n = w.rows();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        w.set(i, i, core::f64::consts::SQRT_2 * d * s);
        for j in 0..i {
            let a: f64 = StandardNormal.sample(rng);
            let (lo, up) = (w.get(i, j), w.get(j, i));
            w.set(i, j, (lo + a) * s);
            w.set(j, i, (up - a) * s);
        }
    }
}

/// Biclustering reduction: `PC(n, k, 1/2) → BC(2^ℓ n, 2^ℓ k, 2^{−ℓ−1/2} μ)`.
pub fn bc_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, rng: &mut R) -> Result<ReductionOutput> {
    Ok(bc_reduce_traced(g, k, ell, None, rng)?.untraced())
}

/// [`bc_reduce`] tracking the planted clique `support`.
pub fn bc_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let n = g.n();
    ensure!(n >= 2, "graph needs at least 2 vertices");
    let lifted = gaussian_lift_matrix(g, ell, support, rng)?;
    let mut w = lifted.output;
    antisymmetrize(&mut w, rng);
    let size = w.rows();
    let sigma = random_permutation(size, rng);
    let w = w.permute(&identity(size), &sigma);
    let mu = gaussian_lift_mu(n) * 2f64.powf(-(ell as f64) - 0.5);
    let trace = lifted.support.map(|s| ReductionTrace {
        col_support: Some(s.map(&sigma)),
        row_support: Some(s),
        ..Default::default()
    });
    Ok(ReductionOutput {
        observation: Observation::Matrix(w),
        target: ProblemParams::matrix(Problem::BC, size, k << ell, mu),
        tv_budget: lift_tv(n),
        trace: Some(trace.unwrap_or_default()),
        kernel_exhaustions: lifted.exhausted,
        warnings: Vec::new(),
    })
}

/// Mean `ln(1+2ρ) / (2√(6 ln n + 2 ln 2))` of the recovery reduction.
pub fn bc_recovery_mu(n: usize, rho: f64) -> f64 {
    (2.0 * rho).ln_1p() / (2.0 * (6.0 * (n as f64).ln() + 2.0 * core::f64::consts::LN_2).sqrt())
}

/// Recovery reduction `PDS(n, k, 1/2+ρ, 1/2) → BC(n, k, μ)`; rows are never permuted.
pub fn bc_recovery_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, rho: f64, rng: &mut R) -> Result<ReductionOutput> {
    Ok(bc_recovery_reduce_traced(g, k, rho, None, rng)?.untraced())
}

/// [`bc_recovery_reduce`] tracking the planted set.
pub fn bc_recovery_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rho: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let n = g.n();
    ensure!(n >= 2, "graph needs at least 2 vertices");
    ensure!(rho >= 1.0 / n as f64 && rho < 0.5, "rho must lie in [1/n, 1/2) (got {rho})");
    let mu = bc_recovery_mu(n, rho);
    let spec = gaussian_kernel_unchecked(n, 0.5 + rho, 0.5, mu)?;
    let (mut w, exhausted) = apply_kernel(g, &spec, rng)?;
    antisymmetrize(&mut w, rng);
    let sigma = random_permutation(n, rng);
    let w = w.permute(&identity(n), &sigma);
    let trace = support.map(|s| ReductionTrace {
        row_support: Some(s.clone()),
        col_support: Some(s.map(&sigma)),
        ..Default::default()
    });
    Ok(ReductionOutput {
        observation: Observation::Matrix(w),
        target: ProblemParams::matrix(Problem::BC, n, k, mu),
        tv_budget: lift_tv(n),
        trace: Some(trace.unwrap_or_default()),
        kernel_exhaustions: exhausted,
        warnings: Vec::new(),
    })
}

fn sparsity_window(n: usize, k: usize, ell: u32) -> Option<String> {
    let big_k = (k << ell) as f64;
    let lim = n as f64 / (k as f64).ln();
    (k < 2 || big_k >= lim).then(|| alloc::format!("2^ell k = {big_k} is not below n / ln k = {lim}; no TV guarantee"))
}

/// Rank-one submatrix reduction: zero-round [`bc_reduce`] then `ℓ` reflection rounds.
/// Target spike `μk/√2` on unit vectors of sparsity `2^ℓ k`.
pub fn ros_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, rng: &mut R) -> Result<ReductionOutput> {
    Ok(ros_reduce_traced(g, k, ell, None, rng)?.untraced())
}

/// [`ros_reduce`] tracking the integer spike.
pub fn ros_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let n = g.n();
    ensure!(n % 2 == 0, "ROS reduction needs even n (got {n})");
    let bc = bc_reduce_traced(g, k, 0, support, rng)?;
    let Observation::Matrix(w) = bc.observation else { unreachable!() };
    let spike = bc.trace.as_ref().and_then(|t| Some((t.row_support.as_ref()?.indicator(n), t.col_support.as_ref()?.indicator(n))));
    let (out, sp) = reflection_clone_traced(&w, ell, spike.as_ref().map(|(r, c)| (&r[..], &c[..])), rng)?;
    let warn = sparsity_window(n, k, ell);
    let tv = if warn.is_some() { TvBudget::Unbounded } else { lift_tv(n).plus(TvBudget::Bounded(1.0 / k as f64)) };
    let mu = gaussian_lift_mu(n) * k as f64 / core::f64::consts::SQRT_2;
    let trace = sp.map(|(r, c)| ReductionTrace {
        row_support: Some(Support::of_nonzero(&r)),
        col_support: Some(Support::of_nonzero(&c)),
        spike_row: Some(r),
        spike_col: Some(c),
        communities: None,
    });
    Ok(ReductionOutput {
        observation: Observation::Matrix(out),
        target: ProblemParams::matrix(Problem::ROS, n, k << ell, mu),
        tv_budget: tv,
        trace: Some(trace.unwrap_or_default()),
        kernel_exhaustions: bc.kernel_exhaustions,
        warnings: warn.into_iter().collect(),
    })
}

/// Spike coefficient `μ(k−1)/(2√(n−1))` of the symmetric reduction before cloning.
pub fn sros_coefficient(n: usize, k: usize) -> f64 {
    gaussian_lift_mu(n) * (k as f64 - 1.0) / (2.0 * (n as f64 - 1.0).sqrt())
}

/// Symmetric rank-one reduction `PC(n, k, 1/2) → SROS(n, 2^ℓ k, μk(k−1)/(2√(n−1)))`.
pub fn sros_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, rng: &mut R) -> Result<ReductionOutput> {
    Ok(sros_reduce_traced(g, k, ell, None, rng)?.untraced())
}

/// [`sros_reduce`] tracking the integer spike.
pub fn sros_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let n = g.n();
    ensure!(n % 2 == 0 && n >= 2, "SROS reduction needs even n (got {n})");
    ensure!(k >= 1, "k must be at least 1");
    let km1 = k as f64 - 1.0;
    let nm1 = n as f64 - 1.0;
    ensure!(km1 * km1 <= nm1, "need (k-1)^2 <= n-1 (k = {k}, n = {n})");
    let spec = crate::rejection::make_kernel_g(n, 1.0, 0.5)?;
    let (w, exhausted) = apply_kernel(g, &spec, rng)?;
    let normal = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    let mut a = RealMatrix::zeros(n, n);
    let mut b = RealMatrix::zeros(n, n);
    let mut c = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b.set(i, j, normal(rng));
                c.set(i, j, normal(rng));
            }
            if j < i {
                let x = normal(rng);
                a.set(i, j, x);
                a.set(j, i, -x);
            }
        }
    }
    let off = km1 / (2.0 * nm1.sqrt());
    let rest = (1.0 - km1 * km1 / nm1).max(0.0).sqrt();
    let s2 = core::f64::consts::SQRT_2;
    let m = RealMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n).map(|t| w.get(i, t) + a.get(i, t) - s2 * b.get(i, t)).sum::<f64>() / (2.0 * nm1.sqrt())
        } else {
            off * (w.get(i, j) + a.get(i, j) + s2 * b.get(i, j)) + c.get(i, j) * rest
        }
    });
    let spike = support.map(|s| s.indicator(n));
    let (m, sp) = reflection_clone_traced(&m, ell, spike.as_ref().map(|r| (&r[..], &r[..])), rng)?;
    let sigma = random_permutation(n, rng);
    let m = m.permute(&sigma, &sigma);
    let warn = sparsity_window(n, k, ell);
    let tv = if warn.is_some() { TvBudget::Unbounded } else { TvBudget::Bounded(1.0 / n as f64) };
    let trace = sp.map(|(r, _)| {
        let mut v = alloc::vec![0.0; n];
        for (i, &s) in sigma.iter().enumerate() {
            v[s] = r[i];
        }
        ReductionTrace {
            row_support: Some(Support::of_nonzero(&v)),
            col_support: Some(Support::of_nonzero(&v)),
            spike_row: Some(v.clone()),
            spike_col: Some(v),
            communities: None,
        }
    });
    Ok(ReductionOutput {
        observation: Observation::Matrix(m),
        target: ProblemParams::matrix(Problem::SROS, n, k << ell, sros_coefficient(n, k) * k as f64),
        tv_budget: tv,
        trace: Some(trace.unwrap_or_default()),
        kernel_exhaustions: exhausted,
        warnings: warn.into_iter().collect(),
    })
}

/// `(M + Mᵀ)/√2`. Sends `N(0,1)^{⊗n×n}` to `GOE(n)` and `μ vvᵀ` to `√2 μ vvᵀ`.
pub fn symmetrize_to_ssw(m: &RealMatrix) -> Result<RealMatrix> {
    ensure!(m.is_square(), "symmetrization needs a square matrix");
    let mut s = m.add(&m.transpose());
    s.scale(core::f64::consts::FRAC_1_SQRT_2);
    Ok(s)
}

/// Community bias `ρ = Φ(μ(k−1)/(2^{ℓ+1}√(n−1))) − 1/2` of [`ssbm_reduce`].
pub fn ssbm_rho(n: usize, k: usize, ell: u32) -> f64 {
    let x = gaussian_lift_mu(n) * (k as f64 - 1.0) / (2f64.powi(ell as i32 + 1) * (n as f64 - 1.0).sqrt());
    0.5 * libm::erf(x / core::f64::consts::SQRT_2)
}

/// Block-model reduction: [`sros_reduce`], Rademacher conjugation, threshold at 0.
pub fn ssbm_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, rng: &mut R) -> Result<ReductionOutput> {
    Ok(ssbm_reduce_traced(g, k, ell, None, None, rng)?.untraced())
}

/// [`ssbm_reduce`] with tracking; `signs` forces the Rademacher draw.
pub fn ssbm_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    support: Option<&Support>,
    signs: Option<&[f64]>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let n = g.n();
    let sros = sros_reduce_traced(g, k, ell, support, rng)?;
    let Observation::Matrix(m) = sros.observation else { unreachable!() };
    let x: Vec<f64> = match signs {
        Some(s) => {
            ensure!(s.len() == n, "sign vector must have length n");
            s.to_vec()
        }
        None => (0..n).map(|_| rademacher(rng)).collect(),
    };
    let mut h = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if x[i] * x[j] * m.get(i, j) > 0.0 {
                h.set_edge(i, j, true);
            }
        }
    }
    let rho = ssbm_rho(n, k, ell);
    let trace = sros.trace.map(|mut t| {
        if let Some(v) = &t.spike_row {
            let pos = (0..n).filter(|&i| x[i] * v[i] > 0.0).collect();
            let neg = (0..n).filter(|&i| x[i] * v[i] < 0.0).collect();
            t.communities = Some((Support::new(pos), Support::new(neg)));
        }
        t
    });
    Ok(ReductionOutput {
        observation: Observation::Graph(h),
        target: ProblemParams::ssbm(n, k << ell, 0.5, rho),
        tv_budget: sros.tv_budget.plus(TvBudget::Bounded(1.0 / k as f64)),
        trace,
        kernel_exhaustions: sros.kernel_exhaustions,
        warnings: sros.warnings,
    })
}

fn rotate_output<R: Rng + ?Sized>(
    prev: ReductionOutput,
    problem: Problem,
    k: usize,
    theta: f64,
    tau: usize,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let Observation::Matrix(m) = &prev.observation else {
        return Err(Error::Contract("rotation needs a matrix stage".into()));
    };
    let x = random_rotate(m, tau, rng)?;
    let (d, n) = (x.rows(), x.cols());
    let trace = prev.trace.map(|t| ReductionTrace { col_support: None, spike_col: None, ..t });
    Ok(ReductionOutput {
        observation: Observation::Samples(x),
        target: ProblemParams::spca(problem, n, k, d, theta),
        tv_budget: prev.tv_budget.plus(TvBudget::Bounded(rotation_tv_bound(n, tau))),
        trace,
        kernel_exhaustions: prev.kernel_exhaustions,
        warnings: prev.warnings,
    })
}

/// [`ros_reduce`] then random rotation: spiked covariance with `θ = μ²k²/(2τn)`, sparsity `2^ℓ k`.
pub fn spca_high_sparsity<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, tau: usize, rng: &mut R) -> Result<ReductionOutput> {
    Ok(spca_high_sparsity_traced(g, k, ell, tau, None, rng)?.untraced())
}

/// [`spca_high_sparsity`] with tracking.
pub fn spca_high_sparsity_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    tau: usize,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    ensure!(tau >= 2, "tau must be at least 2");
    let n = g.n();
    let mu = gaussian_lift_mu(n);
    let theta = mu * mu * (k * k) as f64 / (2.0 * (tau * n) as f64);
    let prev = ros_reduce_traced(g, k, ell, support, rng)?;
    rotate_output(prev, Problem::SPCA, k << ell, theta, tau, rng)
}

/// [`bc_reduce`] then random rotation: `θ = μ²k²/(2^{ℓ+1}τn)`, dimension `2^ℓ n`.
pub fn spca_low_sparsity<R: Rng + ?Sized>(g: &Graph, k: usize, ell: u32, tau: usize, rng: &mut R) -> Result<ReductionOutput> {
    Ok(spca_low_sparsity_traced(g, k, ell, tau, None, rng)?.untraced())
}

/// [`spca_low_sparsity`] with tracking.
pub fn spca_low_sparsity_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    tau: usize,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    ensure!(tau >= 2, "tau must be at least 2");
    let n = g.n();
    let mu = gaussian_lift_mu(n);
    let theta = mu * mu * (k * k) as f64 / (2f64.powi(ell as i32 + 1) * (tau * n) as f64);
    let prev = bc_reduce_traced(g, k, ell, support, rng)?;
    rotate_output(prev, Problem::UBSPCA, k << ell, theta, tau, rng)
}

/// [`bc_recovery_reduce`] then random rotation: `θ = k²μ²/(τn)`; support preserved.
pub fn spca_recovery_reduce<R: Rng + ?Sized>(g: &Graph, k: usize, rho: f64, tau: usize, rng: &mut R) -> Result<ReductionOutput> {
    Ok(spca_recovery_reduce_traced(g, k, rho, tau, None, rng)?.untraced())
}

/// [`spca_recovery_reduce`] with tracking.
pub fn spca_recovery_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    rho: f64,
    tau: usize,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    ensure!(tau >= 2, "tau must be at least 2");
    let n = g.n();
    let mu = bc_recovery_mu(n, rho);
    let theta = (k * k) as f64 * mu * mu / (tau * n) as f64;
    let prev = bc_recovery_reduce_traced(g, k, rho, support, rng)?;
    rotate_output(prev, Problem::UBSPCA, k, theta, tau, rng)
}

/// PC lifting packaged as a reduction `PC(n, k, 1/2) → PC(2^ℓ n, 2^ℓ k, p)`.
pub fn pc_lift_reduce<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell: u32,
    w: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let out = pc_lift_traced(g, ell, w, support, rng)?;
    let n = out.output.n();
    Ok(ReductionOutput {
        target: ProblemParams::pc(n, k << ell, out.lambda),
        observation: Observation::Graph(out.output),
        tv_budget: TvBudget::Bounded(2.0 / w.sqrt()),
        trace: Some(ReductionTrace { row_support: out.support, ..Default::default() }),
        kernel_exhaustions: 0,
        warnings: Vec::new(),
    })
}

/// Two-stage lifting packaged as a reduction to `PDS(2^{ℓ₁+ℓ₂} n, 2^{ℓ₁+ℓ₂} k, p, q)`.
pub fn general_pds_reduce_output<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    ell1: u32,
    ell2: u32,
    eps: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<ReductionOutput> {
    let prm = general_pds_params(g.n(), ell1, ell2, eps)?;
    let out = general_pds_reduce_traced(g, ell1, ell2, eps, support, rng)?;
    let n = out.output.n();
    Ok(ReductionOutput {
        target: ProblemParams::pds(n, k << (ell1 + ell2), prm.p, prm.q),
        observation: Observation::Graph(out.output),
        tv_budget: lift_tv(g.n()).plus(TvBudget::Bounded(1.0 / prm.n_mid as f64)),
        trace: Some(ReductionTrace { row_support: out.support, ..Default::default() }),
        kernel_exhaustions: out.exhausted,
        warnings: Vec::new(),
    })
}

/// Default slowly diverging threshold factor `τ(k) = ln k`.
pub fn default_tau(k: usize) -> f64 {
    (k as f64).ln()
}

/// Detection from recovery: clone the instance into two conditionally
/// independent copies, recover on the first, and test the second restricted
/// to the recovered indices.
///
/// `params` supplies `k` (and `q`, `p` for graph problems). For sparse PCA
/// the two copies are the two halves of the sample columns.
pub fn detect_via_recovery<R, F>(
    problem: Problem,
    params: &ProblemParams,
    mut recover: F,
    observation: &Observation,
    rng: &mut R,
) -> Result<Verdict>
where
    R: Rng + ?Sized,
    F: FnMut(&Observation) -> Result<RecoveryResult>,
{
    let k = params.k.max(2);
    let kf = k as f64;
    match problem {
        Problem::BC | Problem::ROS => {
            let m = observation.as_matrix().ok_or_else(|| Error::Contract("matrix observation expected".into()))?;
            let (m1, m2) = gaussian_clone(m, rng);
            let r = recover(&Observation::Matrix(m1))?;
            let sub = m2.restrict(r.row_support.as_slice(), r.cols().as_slice());
            if problem == Problem::BC {
                Ok(Verdict::new(sub.sum(), kf * default_tau(k), Rule::GreaterEq))
            } else {
                let s = if sub.as_slice().is_empty() { 0.0 } else { sigma_max(&sub) };
                Ok(Verdict::new(s, 2.0 * kf.sqrt() + (2.0 * kf.ln()).sqrt(), Rule::GreaterEq))
            }
        }
        Problem::PIS => {
            let g = observation.as_graph().ok_or_else(|| Error::Contract("graph observation expected".into()))?;
            let q = params.q;
            let (g1, g2) = pds_clone(&g.complement(), &CloneTargets::pis_preset(q), rng)?;
            let r = recover(&Observation::Graph(g1.complement()))?;
            let s = r.row_support.as_slice();
            let qc = q / 2.0;
            let count = g2.complement().induced_edge_count(s) as f64;
            let t = pairs(s.len()) * qc - kf * (qc * (1.0 - qc) * kf.ln()).sqrt();
            Ok(Verdict::new(count, t, Rule::LessEq))
        }
        Problem::PDS => {
            let g = observation.as_graph().ok_or_else(|| Error::Contract("graph observation expected".into()))?;
            let targets = CloneTargets::pds_preset(params.p, params.q, 0.25);
            let (g1, g2) = pds_clone(g, &targets, rng)?;
            let r = recover(&Observation::Graph(g1))?;
            let s = r.row_support.as_slice();
            let qq = targets.big_q;
            let t = pairs(s.len()) * qq + kf * (qq * (1.0 - qq) * kf.ln()).sqrt();
            Ok(Verdict::new(g2.induced_edge_count(s) as f64, t, Rule::GreaterEq))
        }
        Problem::SPCA | Problem::BSPCA | Problem::USPCA | Problem::UBSPCA => {
            let x = observation.as_matrix().ok_or_else(|| Error::Contract("sample observation expected".into()))?;
            let (d, n) = (x.rows(), x.cols());
            ensure!(n >= 2, "need at least two samples to split");
            let h = n / 2;
            let x1 = x.restrict(&identity(d), &identity(h));
            let cols2: Vec<usize> = (h..n).collect();
            let x2 = x.restrict(&identity(d), &cols2);
            let r = recover(&Observation::Samples(x1))?;
            let s = r.row_support.as_slice();
            let lam = if s.is_empty() { 0.0 } else { top_eigen(&covariance(&x2.restrict(s, &identity(n - h)))).value };
            Ok(Verdict::new(lam, 1.0 + 2.0 * (kf / (n - h) as f64).sqrt(), Rule::GreaterEq))
        }
        other => Err(Error::Unsupported(alloc::format!("detection from recovery is not defined for {other}"))),
    }
}

/// Closed-form planted/ambient normal means of a biclustering output, as a check helper:
/// `Φ(2^{−ℓ}μ)` is the planted edge density of thresholded Gaussian lifting.
pub fn gaussian_lift_density(n: usize, ell: u32) -> f64 {
    normal_cdf(gaussian_lift_mu(n) / 2f64.powi(ell as i32))
}
