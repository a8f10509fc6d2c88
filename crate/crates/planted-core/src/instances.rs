//! Null and planted instance generators.
//!
//! Composite alternatives are resolved by fixed priors: spikes in `V_{n,k}` are
//! uniform `k`-sparse vectors with entries `±1/√k`, biased sparse PCA spikes are
//! all-positive, and block-model instances use the extremal densities `q ± ρ`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::graph::{bern, Graph};
use crate::matrix::RealMatrix;
use crate::params::{Hypothesis, Problem, ProblemParams};
use crate::special::rademacher;
use crate::support::Support;

/// Observed graph plus latent structure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantedGraphInstance {
    /// Generating parameters.
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: ProblemParams,
    /// Hypothesis sampled from.
    pub hypothesis: Hypothesis,
    /// Observation.
    pub graph: Graph,
    /// Planted vertices under `H1`.
    pub support: Option<Support>,
    /// Block-model communities under `H1`.
    pub communities: Option<(Support, Support)>,
}

/// Observed square matrix plus latent structure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantedMatrixInstance {
    /// Generating parameters.
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: ProblemParams,
    /// Hypothesis sampled from.
    pub hypothesis: Hypothesis,
    /// Observation.
    pub matrix: RealMatrix,
    /// Row support under `H1`.
    pub row_support: Option<Support>,
    /// Column support under `H1`.
    pub col_support: Option<Support>,
    /// Row spike `r` (or `v`) under `H1` for spiked models.
    pub spike_row: Option<Vec<f64>>,
    /// Column spike `c` under `H1` for spiked models.
    pub spike_col: Option<Vec<f64>>,
}

/// `d × n` sample matrix from the spiked covariance model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpcaInstance {
    /// Generating parameters.
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: ProblemParams,
    /// Hypothesis sampled from.
    pub hypothesis: Hypothesis,
    /// Columns are samples.
    pub samples: RealMatrix,
    /// Unit spike under `H1`.
    pub spike: Option<Vec<f64>>,
}

/// Uniform `k`-sparse vector in `R^n` with entries `±1/√k`.
pub fn sparse_sign_vector<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let s = Support::random(n, k, rng);
    let a = 1.0 / (k as f64).sqrt();
    let mut v = vec![0.0; n];
    for &i in s.as_slice() {
        v[i] = a * rademacher(rng);
    }
    v
}

/// Uniform `k`-sparse vector with entries `1/√k`.
pub fn sparse_positive_vector<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let s = Support::random(n, k, rng);
    let a = 1.0 / (k as f64).sqrt();
    let mut v = vec![0.0; n];
    for &i in s.as_slice() {
        v[i] = a;
    }
    v
}

/// Membership in `V_{n,k}`: unit norm, `k − k/ln k ≤ ‖v‖₀ ≤ k`, and
/// `|v_i| ≥ 1/√k` on the support (tolerance `tol`).
pub fn in_near_uniform_set(v: &[f64], k: usize, tol: f64) -> bool {
    let l0 = v.iter().filter(|x| **x != 0.0).count() as f64;
    let kf = k as f64;
    let lower = if k > 1 { kf - kf / kf.ln() } else { 1.0 };
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    let floor = 1.0 / kf.sqrt() - tol;
    (norm2 - 1.0).abs() <= tol
        && l0 <= kf
        && l0 >= lower - tol
        && v.iter().filter(|x| **x != 0.0).all(|x| x.abs() >= floor)
}

/// Sample a graph problem under `hypothesis`.
pub fn gen_graph<R: Rng + ?Sized>(
    params: &ProblemParams,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<PlantedGraphInstance> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    let null_density = match params.problem {
        Problem::PC => params.p,
        Problem::PIS | Problem::PDS | Problem::SSBM => params.q,
        other => return Err(Error::Unsupported(alloc::format!("{other} is not a graph problem"))),
    };
    let mut out = PlantedGraphInstance {
        params: params.clone(),
        hypothesis,
        graph: Graph::empty(n),
        support: None,
        communities: None,
    };
    if hypothesis == Hypothesis::H0 {
        out.graph = Graph::erdos_renyi(n, null_density, rng);
        return Ok(out);
    }
    match params.problem {
        Problem::PC | Problem::PIS | Problem::PDS => {
            let s = Support::random(n, k, rng);
            let inside = match params.problem {
                Problem::PC => 1.0,
                Problem::PIS => 0.0,
                _ => params.p,
            };
            let mut member = vec![false; n];
            s.as_slice().iter().for_each(|&i| member[i] = true);
            let mut g = Graph::empty(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let pr = if member[i] && member[j] { inside } else { null_density };
                    if bern(rng, pr) {
                        g.set_edge(i, j, true);
                    }
                }
            }
            out.graph = g;
            out.support = Some(s);
        }
        Problem::SSBM => {
            let (q, rho) = (params.q, params.rho);
            let kf = k as f64;
            let slack = kf.powf(1.0 - params.delta_ssbm);
            let lo = ((kf / 2.0 - slack).ceil().max(1.0)) as usize;
            let hi = ((kf / 2.0 + slack).floor() as usize).min(k.saturating_sub(1));
            ensure!(lo <= hi, "no admissible community split for k = {k}");
            let k1 = rng.random_range(lo..=hi);
            let all = Support::random(n, k, rng);
            let mut order = all.as_slice().to_vec();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
            let s1 = Support::new(order[..k1].to_vec());
            let s2 = Support::new(order[k1..].to_vec());
            let mut label = vec![0u8; n];
            s1.as_slice().iter().for_each(|&i| label[i] = 1);
            s2.as_slice().iter().for_each(|&i| label[i] = 2);
            let mut g = Graph::empty(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let pr = match (label[i], label[j]) {
                        (0, _) | (_, 0) => q,
                        (a, b) if a == b => q + rho,
                        _ => q - rho,
                    };
                    if bern(rng, pr) {
                        g.set_edge(i, j, true);
                    }
                }
            }
            out.graph = g;
            out.support = Some(all);
            out.communities = Some((s1, s2));
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// `GOE(n)`: symmetric, off-diagonal `N(0,1)`, diagonal `N(0,2)`.
pub fn goe<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealMatrix {
    let mut m = RealMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m.set(i, i, core::f64::consts::SQRT_2 * d);
        for j in (i + 1)..n {
            let z: f64 = StandardNormal.sample(rng);
            m.set(i, j, z);
            m.set(j, i, z);
        }
    }
    m
}

/// Sample a matrix problem under `hypothesis`.
pub fn gen_matrix<R: Rng + ?Sized>(
    params: &ProblemParams,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<PlantedMatrixInstance> {
    params.validate()?;
    let (n, k, mu) = (params.n, params.k, params.mu);
    ensure!(params.problem.is_matrix(), "{} is not a matrix problem", params.problem);
    let mut m = if params.problem == Problem::SSW { goe(n, rng) } else { RealMatrix::gaussian(n, n, rng) };
    let mut out = PlantedMatrixInstance {
        params: params.clone(),
        hypothesis,
        matrix: RealMatrix::zeros(0, 0),
        row_support: None,
        col_support: None,
        spike_row: None,
        spike_col: None,
    };
    if hypothesis == Hypothesis::H1 {
        match params.problem {
            Problem::BC => {
                let s = Support::random(n, k, rng);
                let t = Support::random(n, k, rng);
                for &i in s.as_slice() {
                    for &j in t.as_slice() {
                        *m.get_mut(i, j) += mu;
                    }
                }
                out.row_support = Some(s);
                out.col_support = Some(t);
            }
            Problem::ROS => {
                let r = sparse_sign_vector(n, k, rng);
                let c = sparse_sign_vector(n, k, rng);
                add_rank_one(&mut m, mu, &r, &c);
                out.row_support = Some(Support::of_nonzero(&r));
                out.col_support = Some(Support::of_nonzero(&c));
                out.spike_row = Some(r);
                out.spike_col = Some(c);
            }
            Problem::SROS | Problem::SSW => {
                let r = sparse_sign_vector(n, k, rng);
                add_rank_one(&mut m, mu, &r, &r);
                let s = Support::of_nonzero(&r);
                out.row_support = Some(s.clone());
                out.col_support = Some(s);
                out.spike_row = Some(r.clone());
                out.spike_col = Some(r);
            }
            _ => unreachable!(),
        }
    }
    out.matrix = m;
    Ok(out)
}

/// `M += mu · r cᵀ`.
pub fn add_rank_one(m: &mut RealMatrix, mu: f64, r: &[f64], c: &[f64]) {
    for (i, ri) in r.iter().enumerate() {
        if *ri == 0.0 {
            continue;
        }
        for (j, cj) in c.iter().enumerate() {
            if *cj != 0.0 {
                *m.get_mut(i, j) += mu * ri * cj;
            }
        }
    }
}

/// Sample a sparse PCA problem under `hypothesis`.
pub fn gen_spca<R: Rng + ?Sized>(
    params: &ProblemParams,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<SpcaInstance> {
    params.validate()?;
    ensure!(params.problem.is_spca(), "{} is not a sparse PCA problem", params.problem);
    let (n, d, k, theta) = (params.n, params.d, params.k, params.theta);
    let mut x = RealMatrix::gaussian(d, n, rng);
    let mut spike = None;
    if hypothesis == Hypothesis::H1 {
        let v = match params.problem {
            Problem::BSPCA | Problem::UBSPCA => sparse_positive_vector(d, k, rng),
            _ => sparse_sign_vector(d, k, rng),
        };
        let s = theta.sqrt();
        for col in 0..n {
            let g: f64 = StandardNormal.sample(rng);
            for (row, vi) in v.iter().enumerate() {
                if *vi != 0.0 {
                    *x.get_mut(row, col) += s * g * vi;
                }
            }
        }
        spike = Some(v);
    }
    Ok(SpcaInstance { params: params.clone(), hypothesis, samples: x, spike })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomStream;

    #[test]
    fn full_clique() {
        let mut rng = RandomStream::new(1).rng();
        let g = gen_graph(&ProblemParams::pc(10, 10, 0.5), Hypothesis::H1, &mut rng).unwrap();
        assert_eq!(g.graph.edge_count(), 45);
    }

    #[test]
    fn empty_pis_null() {
        let mut rng = RandomStream::new(2).rng();
        let g = gen_graph(&ProblemParams::pis(50, 5, 0.0), Hypothesis::H0, &mut rng).unwrap();
        assert_eq!(g.graph.edge_count(), 0);
    }

    #[test]
    fn clique_pairs_are_edges() {
        let mut rng = RandomStream::new(3).rng();
        let g = gen_graph(&ProblemParams::pc(60, 12, 0.5), Hypothesis::H1, &mut rng).unwrap();
        let s = g.support.unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(g.graph.induced_edge_count(s.as_slice()), 66);
    }

    #[test]
    fn ssbm_split_in_window() {
        let mut rng = RandomStream::new(4).rng();
        let p = ProblemParams::ssbm(200, 40, 0.5, 0.2);
        let g = gen_graph(&p, Hypothesis::H1, &mut rng).unwrap();
        let (a, b) = g.communities.unwrap();
        assert_eq!(a.len() + b.len(), 40);
        assert_eq!(a.overlap(&b), 0);
        let slack = 40f64.powf(0.9);
        assert!((a.len() as f64 - 20.0).abs() <= slack);
    }

    #[test]
    fn ubspca_spike() {
        let mut rng = RandomStream::new(5).rng();
        let p = ProblemParams::spca(Problem::UBSPCA, 20, 4, 8, 1.0);
        let inst = gen_spca(&p, Hypothesis::H1, &mut rng).unwrap();
        let v = inst.spike.unwrap();
        assert_eq!(v.iter().filter(|x| **x == 0.5).count(), 4);
        assert_eq!(v.iter().filter(|x| **x == 0.0).count(), 4);
    }

    #[test]
    fn k_exceeds_n() {
        let mut rng = RandomStream::new(6).rng();
        assert!(gen_matrix(&ProblemParams::matrix(Problem::BC, 4, 5, 1.0), Hypothesis::H1, &mut rng).is_err());
    }

    #[test]
    fn spikes_in_near_uniform_set() {
        let mut rng = RandomStream::new(7).rng();
        for _ in 0..20 {
            let v = sparse_sign_vector(100, 9, &mut rng);
            assert!(in_near_uniform_set(&v, 9, 1e-12));
        }
    }
}
