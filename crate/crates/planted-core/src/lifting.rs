//! Instance-growing maps: planted clique lifting and distributional lifting.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::graph::{bern, Graph};
use crate::matrix::RealMatrix;
use crate::rejection::{make_kernel_g, make_kernel_p1, make_kernel_p2, rejection_kernel, Density, KernelSpec};
use crate::special::random_permutation;
use crate::support::Support;

/// Default densification schedule `w(n) = ln n`.
pub fn default_w(n: usize) -> f64 {
    (n as f64).ln()
}

/// Reflection partner of `i` in a graph on `2m` vertices.
#[inline]
pub fn mirror(i: usize, m: usize) -> usize {
    2 * m - 1 - i
}

fn mirror_support(s: &Support, m: usize) -> Support {
    let mut v: Vec<usize> = s.as_slice().to_vec();
    v.extend(s.as_slice().iter().map(|&i| mirror(i, m)));
    Support::new(v)
}

/// Output of a lifting map with optional planted-set tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifted<T> {
    /// The lifted observation.
    pub output: T,
    /// Final value of the family parameter `λ` (edge density for PC lifting).
    pub lambda: f64,
    /// Image of the tracked planted set, when one was supplied.
    pub support: Option<Support>,
    /// Kernel invocations that exhausted their budget.
    pub exhausted: usize,
}

/// Step 1 of PC lifting: add each non-edge independently with probability `1 − 2/w`.
pub fn densify<R: Rng + ?Sized>(g: &Graph, w: f64, rng: &mut R) -> Result<Graph> {
    ensure!(w >= 2.0, "w(n) must be at least 2 (got {w})");
    let add = 1.0 - 2.0 / w;
    let mut out = g.clone();
    let n = g.n();
    for i in 0..n {
        for j in i + 1..n {
            if !g.has_edge(i, j) && bern(rng, add) {
                out.set_edge(i, j, true);
            }
        }
    }
    Ok(out)
}

/// Pattern for a non-edge: four `Bern(p^{1/4})` bits conditioned on not all being one.
fn non_edge_pattern<R: Rng + ?Sized>(p4: f64, rng: &mut R) -> [bool; 4] {
    loop {
        let x = [bern(rng, p4), bern(rng, p4), bern(rng, p4), bern(rng, p4)];
        if !x.iter().all(|&b| b) {
            return x;
        }
    }
}

/// Probability of the 4-bit pattern `v ≠ 1111` for a non-edge at density `p`:
/// `p^{|v|/4} (1 − p^{1/4})^{4−|v|} / (1 − p)`.
pub fn pc_pattern_probability(v: [bool; 4], p: f64) -> f64 {
    let ones = v.iter().filter(|&&b| b).count() as i32;
    if ones == 4 {
        return 0.0;
    }
    let p4 = p.powf(0.25);
    p4.powi(ones) * (1.0 - p4).powi(4 - ones) / (1.0 - p)
}

/// One unpermuted doubling round of PC lifting at current density `p`.
///
/// Edge `{i,j}` becomes edges on all four of `{i,j}`, `{i',j}`, `{i,j'}`,
/// `{i',j'}`; a non-edge receives a random pattern other than all-ones. The
/// anti-diagonal pairs `{i,i'}` are always edges.
pub fn pc_lift_round<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Graph {
    let m = g.n();
    let p4 = p.powf(0.25);
    let mut out = Graph::empty(2 * m);
    for i in 0..m {
        out.set_edge(i, mirror(i, m), true);
        for j in i + 1..m {
            let x = if g.has_edge(i, j) { [true; 4] } else { non_edge_pattern(p4, rng) };
            let (ii, jj) = (mirror(i, m), mirror(j, m));
            out.set_edge(i, j, x[0]);
            out.set_edge(ii, j, x[1]);
            out.set_edge(i, jj, x[2]);
            out.set_edge(ii, jj, x[3]);
        }
    }
    out
}

/// PC lifting: `G(n, 1/2)` to `G(2^ℓ n, p)` carrying a `k`-clique to a `2^ℓ k`-clique.
pub fn pc_lift<R: Rng + ?Sized>(g: &Graph, ell: u32, w: f64, rng: &mut R) -> Result<Graph> {
    Ok(pc_lift_traced(g, ell, w, None, rng)?.output)
}

/// [`pc_lift`] with the planted clique tracked through every relabeling.
/// The returned `lambda` is the final edge density `(1 − 1/w)^{4^{−ℓ}}`.
pub fn pc_lift_traced<R: Rng + ?Sized>(
    g: &Graph,
    ell: u32,
    w: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<Graph>> {
    ensure!(w > 2.0, "w(n) must exceed 2 (got {w})");
    let mut h = densify(g, w, rng)?;
    let mut p = 1.0 - 1.0 / w;
    let mut s = support.cloned();
    for _ in 0..ell {
        let m = h.n();
        let raw = pc_lift_round(&h, p, rng);
        let sigma = random_permutation(2 * m, rng);
        h = raw.relabel(&sigma);
        s = s.map(|s| mirror_support(&s, m).map(&sigma));
        p = p.powf(0.25);
    }
    Ok(Lifted { output: h, lambda: p, support: s, exhausted: 0 })
}

/// A family with an exact 4-way cloning map used by [`distributional_lift`].
pub trait CloneFamily {
    /// `f_cl`: one variate at parameter `λ` to four.
    fn clone4<R: Rng + ?Sized>(&self, x: f64, lambda: f64, rng: &mut R) -> [f64; 4];
    /// `g_cl`: parameter after one round.
    fn update(&self, lambda: f64) -> f64;
    /// Draw from `Q'_λ`, the law of the anti-diagonal fill.
    fn noise<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> f64;
    /// Edge threshold `t` used when emitting a graph.
    fn threshold(&self) -> f64;
}

/// Poisson splitting: `x` units scattered uniformly into four bins.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonFamily;

impl CloneFamily for PoissonFamily {
    fn clone4<R: Rng + ?Sized>(&self, x: f64, _lambda: f64, rng: &mut R) -> [f64; 4] {
        let mut out = [0.0; 4];
        for _ in 0..x as u64 {
            out[rng.random_range(0..4)] += 1.0;
        }
        out
    }
    fn update(&self, lambda: f64) -> f64 {
        lambda / 4.0
    }
    fn noise<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> f64 {
        Density::Poisson { lambda }.sample(rng)
    }
    fn threshold(&self) -> f64 {
        0.0
    }
}

/// Gaussian clone `x ↦ ½ H (x, G₁, G₂, G₃)ᵀ` with `H` the 4×4 ±1 Hadamard matrix.
///
/// Since the first column of `H` is all ones this equals
/// `½ H (x − λ, G₁, G₂, G₃)ᵀ + λ/2`, so `N(λ,1)` goes to four i.i.d. `N(λ/2, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianFamily;

/// Rows of the ±1 coefficient matrix.
pub const HADAMARD4: [[f64; 4]; 4] =
    [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];

impl CloneFamily for GaussianFamily {
    fn clone4<R: Rng + ?Sized>(&self, x: f64, _lambda: f64, rng: &mut R) -> [f64; 4] {
        let z: [f64; 4] = [x, StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)];
        let mut out = [0.0; 4];
        for (o, h) in out.iter_mut().zip(HADAMARD4.iter()) {
            *o = 0.5 * (h[0] * z[0] + h[1] * z[1] + h[2] * z[2] + h[3] * z[3]);
        }
        out
    }
    fn update(&self, lambda: f64) -> f64 {
        lambda / 2.0
    }
    fn noise<R: Rng + ?Sized>(&self, _lambda: f64, rng: &mut R) -> f64 {
        StandardNormal.sample(rng)
    }
    fn threshold(&self) -> f64 {
        0.0
    }
}

/// Replace each edge indicator of `g` by a kernel output. Diagonal is zero.
/// Returns the matrix and the number of exhausted kernel calls.
pub fn apply_kernel<R: Rng + ?Sized>(g: &Graph, spec: &KernelSpec, rng: &mut R) -> Result<(RealMatrix, usize)> {
    let n = g.n();
    let mut w = RealMatrix::zeros(n, n);
    let mut exhausted = 0;
    for i in 0..n {
        for j in i + 1..n {
            let d = rejection_kernel(g.has_edge(i, j), spec, rng)?;
            exhausted += d.exhausted as usize;
            w.set(i, j, d.value);
            w.set(j, i, d.value);
        }
    }
    Ok((w, exhausted))
}

/// Graph with edge `{i,j}` iff `W_ij > t`, read from the upper triangle.
pub fn threshold_graph(w: &RealMatrix, t: f64) -> Graph {
    let n = w.rows();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if w.get(i, j) > t {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Rounds of distributional lifting on a symmetric, zero-diagonal matrix.
pub fn distributional_lift<F: CloneFamily, R: Rng + ?Sized>(
    m: &RealMatrix,
    ell: u32,
    family: &F,
    lambda0: f64,
    rng: &mut R,
) -> Result<RealMatrix> {
    Ok(distributional_lift_traced(m, ell, family, lambda0, None, rng)?.output)
}

/// [`distributional_lift`] with planted-set tracking.
pub fn distributional_lift_traced<F: CloneFamily, R: Rng + ?Sized>(
    m: &RealMatrix,
    ell: u32,
    family: &F,
    lambda0: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<RealMatrix>> {
    if !m.is_symmetric() {
        return Err(Error::Contract("distributional lifting needs a symmetric input".into()));
    }
    let mut w = m.clone();
    let mut lambda = lambda0;
    let mut s = support.cloned();
    for _ in 0..ell {
        let n = w.rows();
        let next = family.update(lambda);
        let mut out = RealMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let ii = mirror(i, n);
            let z = family.noise(next, rng);
            out.set(i, ii, z);
            out.set(ii, i, z);
            for j in i + 1..n {
                let jj = mirror(j, n);
                let x = family.clone4(w.get(i, j), lambda, rng);
                for (k, (a, b)) in [(i, j), (ii, j), (i, jj), (ii, jj)].into_iter().enumerate() {
                    out.set(a, b, x[k]);
                    out.set(b, a, x[k]);
                }
            }
        }
        let sigma = random_permutation(2 * n, rng);
        w = out.permute(&sigma, &sigma);
        s = s.map(|s| mirror_support(&s, n).map(&sigma));
        lambda = next;
    }
    Ok(Lifted { output: w, lambda, support: s, exhausted: 0 })
}

/// Poisson lifting target densities `(p, q) = (1 − e^{−4^{−ℓ}cλ₀}, 1 − e^{−4^{−ℓ}λ₀})`, `λ₀ = n^{−ε}`.
pub fn poisson_lift_densities(n: usize, ell: u32, eps: f64, c: f64) -> (f64, f64) {
    let lam = (n as f64).powf(-eps) * 0.25f64.powi(ell as i32);
    (-(-c * lam).exp_m1(), -(-lam).exp_m1())
}

/// Poisson lifting from `PC(n, k, γ)` to `PDS(2^ℓ n, 2^ℓ k, p, q)`.
pub fn poisson_lift<R: Rng + ?Sized>(g: &Graph, ell: u32, gamma: f64, eps: f64, c: f64, rng: &mut R) -> Result<Graph> {
    Ok(poisson_lift_traced(g, ell, gamma, eps, c, None, rng)?.output)
}

/// [`poisson_lift`] with planted-set tracking.
pub fn poisson_lift_traced<R: Rng + ?Sized>(
    g: &Graph,
    ell: u32,
    gamma: f64,
    eps: f64,
    c: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<Graph>> {
    let spec = make_kernel_p1(g.n(), c, gamma, eps)?;
    lift_with_kernel(g, ell, &spec, &PoissonFamily, spec.record.lambda.unwrap_or(0.0), support, rng)
}

/// Mean `μ = ln 2 / (2√(6 ln n + 2 ln 2))` of the Gaussian lifting kernel.
pub fn gaussian_lift_mu(n: usize) -> f64 {
    core::f64::consts::LN_2 / (2.0 * (6.0 * (n as f64).ln() + 2.0 * core::f64::consts::LN_2).sqrt())
}

/// Output of Gaussian lifting.
#[derive(Debug, Clone, PartialEq)]
pub enum LiftOutput {
    /// Thresholded graph.
    Graph(Graph),
    /// Raw symmetric matrix, zero diagonal.
    Matrix(RealMatrix),
}

/// Gaussian lifting of `PC(n, k, 1/2)`. The emitted graph has planted density
/// `Φ(2^{−ℓ}μ)` against `1/2`; the emitted matrix has mean `2^{−ℓ}μ` on planted pairs.
pub fn gaussian_lift<R: Rng + ?Sized>(g: &Graph, ell: u32, emit_graph: bool, rng: &mut R) -> Result<LiftOutput> {
    let m = gaussian_lift_matrix(g, ell, None, rng)?;
    Ok(if emit_graph {
        LiftOutput::Graph(threshold_graph(&m.output, GaussianFamily.threshold()))
    } else {
        LiftOutput::Matrix(m.output)
    })
}

/// Gaussian lifting before thresholding, with planted-set tracking.
pub fn gaussian_lift_matrix<R: Rng + ?Sized>(
    g: &Graph,
    ell: u32,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<RealMatrix>> {
    let spec = make_kernel_g(g.n(), 1.0, 0.5)?;
    let mu = spec.record.mu.unwrap_or(0.0);
    let (w, exhausted) = apply_kernel(g, &spec, rng)?;
    let mut out = distributional_lift_traced(&w, ell, &GaussianFamily, mu, support, rng)?;
    out.exhausted = exhausted;
    Ok(out)
}

fn lift_with_kernel<F: CloneFamily, R: Rng + ?Sized>(
    g: &Graph,
    ell: u32,
    spec: &KernelSpec,
    family: &F,
    lambda0: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<Graph>> {
    let (w, exhausted) = apply_kernel(g, spec, rng)?;
    let lifted = distributional_lift_traced(&w, ell, family, lambda0, support, rng)?;
    Ok(Lifted {
        output: threshold_graph(&lifted.output, family.threshold()),
        lambda: lifted.lambda,
        support: lifted.support,
        exhausted,
    })
}

/// Parameters of the two-stage reduction to the general PDS regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralPdsParams {
    /// Vertex count after the Gaussian stage, `2^{ℓ₁} n`.
    pub n_mid: usize,
    /// `ρ = Φ(2^{−ℓ₁}μ) − 1/2`.
    pub rho: f64,
    /// `c = (2Φ(2^{−ℓ₁}μ))^{ε/4}`.
    pub c: f64,
    /// `λ = (2^{ℓ₁} n)^{−ε}`.
    pub lambda: f64,
    /// Final planted density.
    pub p: f64,
    /// Final ambient density.
    pub q: f64,
}

/// Closed-form parameters of [`general_pds_reduce`].
pub fn general_pds_params(n: usize, ell1: u32, ell2: u32, eps: f64) -> Result<GeneralPdsParams> {
    ensure!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    let n_mid = n << ell1;
    let x = gaussian_lift_mu(n) / (1u64 << ell1) as f64;
    let rho = 0.5 * libm::erf(x / core::f64::consts::SQRT_2);
    let c = (1.0 + 2.0 * rho).powf(eps / 4.0);
    let lambda = (n_mid as f64).powf(-eps);
    let scale = 0.25f64.powi(ell2 as i32);
    Ok(GeneralPdsParams {
        n_mid,
        rho,
        c,
        lambda,
        p: -(-scale * c * lambda).exp_m1(),
        q: -(-scale * lambda).exp_m1(),
    })
}

/// Gaussian lifting for `ℓ₁` rounds, then Poisson lifting for `ℓ₂` rounds
/// seeded with `rk_P2` at the intermediate densities `(1/2 + ρ, 1/2)`.
pub fn general_pds_reduce<R: Rng + ?Sized>(g: &Graph, ell1: u32, ell2: u32, eps: f64, rng: &mut R) -> Result<Graph> {
    Ok(general_pds_reduce_traced(g, ell1, ell2, eps, None, rng)?.output)
}

/// [`general_pds_reduce`] with planted-set tracking.
pub fn general_pds_reduce_traced<R: Rng + ?Sized>(
    g: &Graph,
    ell1: u32,
    ell2: u32,
    eps: f64,
    support: Option<&Support>,
    rng: &mut R,
) -> Result<Lifted<Graph>> {
    let prm = general_pds_params(g.n(), ell1, ell2, eps)?;
    let stage1 = gaussian_lift_matrix(g, ell1, support, rng)?;
    let mid = threshold_graph(&stage1.output, 0.0);
    let spec = make_kernel_p2(prm.n_mid, prm.rho, prm.c, eps, 1.0)?;
    let mut out = lift_with_kernel(&mid, ell2, &spec, &PoissonFamily, prm.lambda, stage1.support.as_ref(), rng)?;
    out.exhausted += stage1.exhausted;
    Ok(out)
}
