use planted_core::cloning::{gaussian_clone, pds_clone, reflection_clone, reflection_clone_traced, CloneTargets};
use planted_core::instances::{gen_graph, gen_matrix, gen_spca, in_near_uniform_set};
use planted_core::lifting::pc_lift_traced;
use planted_core::linalg::{sigma_max, sym_eigen_dense, top_eigen};
use planted_core::reductions::{sros_reduce_traced, ssbm_reduce_traced, Observation, TvBudget};
use planted_core::solvers::{bc_sum_max_test, pds_edge_tests, ros_inner_max, spca_spectral_test, ssbm_spectral_test};
use planted_core::{Graph, Hypothesis, Problem, ProblemParams, RandomStream, RealMatrix};
use proptest::prelude::*;
use rand::Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn random_symmetric(n: usize, seed: u64) -> RealMatrix {
    let g = RealMatrix::gaussian(n, n, &mut RandomStream::new(seed).rng());
    g.add(&g.transpose())
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn graph_stays_simple(n in 1usize..40, p in 0.0f64..1.0, seed: u64, ops in prop::collection::vec((0usize..40, 0usize..40, any::<bool>()), 0..60)) {
        let mut rng = RandomStream::new(seed).rng();
        let mut g = Graph::erdos_renyi(n, p, &mut rng);
        prop_assert!(g.is_valid());
        for (i, j, on) in ops {
            let (i, j) = (i % n, j % n);
            if i != j {
                g.set_edge(i, j, on);
                prop_assert_eq!(g.has_edge(i, j), on);
                prop_assert_eq!(g.has_edge(j, i), on);
            }
        }
        prop_assert!(g.is_valid());
        let c = g.complement();
        prop_assert!(c.is_valid());
        prop_assert_eq!(c.edge_count() + g.edge_count(), n * (n - 1) / 2);
        let sigma = planted_core::special::random_permutation(n, &mut rng);
        let h = g.relabel(&sigma);
        prop_assert!(h.is_valid());
        prop_assert_eq!(h.edge_count(), g.edge_count());
    }

    #[test]
    fn stream_is_reproducible(seed: u64, path in prop::collection::vec(0u64..1000, 0..4)) {
        let walk = |s: RandomStream| path.iter().fold(s, |s, &i| s.split(i));
        let a: Vec<u64> = { let mut r = walk(RandomStream::new(seed)).rng(); (0..16).map(|_| r.random()).collect() };
        let b: Vec<u64> = { let mut r = walk(RandomStream::new(seed)).rng(); (0..16).map(|_| r.random()).collect() };
        prop_assert_eq!(&a, &b);
        let c: Vec<u64> = { let mut r = walk(RandomStream::new(seed)).split(7).rng(); (0..16).map(|_| r.random()).collect() };
        prop_assert_ne!(a, c);
    }

    #[test]
    fn planted_clique_is_complete(n in 4usize..60, frac in 0.1f64..1.0, seed: u64) {
        let k = ((n as f64 * frac) as usize).max(2);
        let inst = gen_graph(&ProblemParams::pc(n, k, 0.5), Hypothesis::H1, &mut RandomStream::new(seed).rng()).unwrap();
        let s = inst.support.unwrap();
        prop_assert_eq!(s.len(), k);
        prop_assert_eq!(inst.graph.induced_edge_count(s.as_slice()), k * (k - 1) / 2);
    }

    #[test]
    fn spikes_lie_in_the_sparse_set(n in 8usize..80, k in 2usize..8, seed: u64) {
        let mut rng = RandomStream::new(seed).rng();
        for problem in [Problem::ROS, Problem::SROS] {
            let inst = gen_matrix(&ProblemParams::matrix(problem, n, k, 1.0), Hypothesis::H1, &mut rng).unwrap();
            prop_assert!(in_near_uniform_set(inst.spike_row.as_ref().unwrap(), k, 1e-9));
            prop_assert!(in_near_uniform_set(inst.spike_col.as_ref().unwrap(), k, 1e-9));
        }
        let s = gen_spca(&ProblemParams::spca(Problem::SPCA, 10, k, n, 1.0), Hypothesis::H1, &mut rng).unwrap();
        let v = s.spike.unwrap();
        prop_assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_preserves_norm_and_carries_spike(half in 2usize..16, ell in 0u32..4, lambda in -5.0f64..5.0, seed: u64) {
        let n = 2 * half;
        let mut rng = RandomStream::new(seed).rng();
        let z = RealMatrix::gaussian(n, n, &mut rng);
        let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut m = z.clone();
        planted_core::instances::add_rank_one(&mut m, lambda, &r, &c);

        let out = reflection_clone(&m, ell, &mut RandomStream::new(seed ^ 1).rng()).unwrap();
        prop_assert!((out.frobenius() - m.frobenius()).abs() <= 1e-9 * m.frobenius().max(1.0));

        let stream = RandomStream::new(seed ^ 2);
        let (w, sp) = reflection_clone_traced(&m, ell, Some((&r, &c)), &mut stream.rng()).unwrap();
        let (w0, _) = reflection_clone_traced(&z, ell, None, &mut stream.rng()).unwrap();
        let (r2, c2) = sp.unwrap();
        let scale = 2f64.powi(ell as i32);
        let rr: f64 = r.iter().map(|x| x * x).sum();
        prop_assert!((r2.iter().map(|x| x * x).sum::<f64>() - scale * rr).abs() <= 1e-9 * scale * rr.max(1.0));
        let mut expect = w0;
        planted_core::instances::add_rank_one(&mut expect, lambda / scale, &r2, &c2);
        let diff = w.sub(&expect);
        prop_assert!(diff.as_slice().iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn gaussian_clone_sum_identity(rows in 1usize..12, cols in 1usize..12, seed: u64) {
        let mut rng = RandomStream::new(seed).rng();
        let m = RealMatrix::gaussian(rows, cols, &mut rng);
        let (a, b) = gaussian_clone(&m, &mut rng);
        let back = a.add(&b);
        for (x, y) in back.as_slice().iter().zip(m.as_slice()) {
            prop_assert!((x / std::f64::consts::SQRT_2 - y).abs() < 1e-12);
        }
    }

    #[test]
    fn clone_patterns_are_probabilities(q in 0.01f64..0.9, gap in 0.01f64..0.5, big_p in 0.01f64..0.99, big_q in 0.01f64..0.99) {
        let p = (q + gap).min(0.999);
        let t = CloneTargets { p, q, big_p, big_q };
        if t.check().is_ok() {
            let (edge, non) = t.pattern_probabilities();
            let tol = 1e-12 / (p - q);
            for law in [edge, non] {
                prop_assert!(law.iter().all(|x| *x >= -tol));
                prop_assert!((law.iter().sum::<f64>() - 1.0).abs() <= tol);
            }
        }
    }

    #[test]
    fn budgets_compose(a in 0.0f64..10.0, b in 0.0f64..10.0) {
        prop_assert_eq!(TvBudget::Bounded(a).plus(TvBudget::Bounded(b)).value(), a + b);
        prop_assert_eq!(TvBudget::Bounded(a).plus(TvBudget::Unbounded), TvBudget::Unbounded);
        prop_assert_eq!(TvBudget::Unbounded.plus(TvBudget::Bounded(b)), TvBudget::Unbounded);
    }

    #[test]
    fn inner_max_matches_brute_force(a in prop::collection::vec(-5.0f64..5.0, 1..8), k1 in 1usize..8) {
        let n = a.len();
        let k1 = k1.min(n);
        let (v, u) = ros_inner_max(&a, k1);
        let mut best = f64::NEG_INFINITY;
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let (mut nz, mut val) = (0, 0.0);
            for x in &a {
                let s = [0.0, 1.0, -1.0][c % 3];
                c /= 3;
                if s != 0.0 {
                    nz += 1;
                }
                val += s * x;
            }
            if nz == k1 {
                best = best.max(val);
            }
        }
        prop_assert!((v - best).abs() < 1e-9);
        prop_assert_eq!(u.iter().filter(|x| **x != 0.0).count(), k1);
        let dot: f64 = u.iter().zip(&a).map(|(x, y)| x * y).sum();
        prop_assert!((dot - v).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn iterative_eigen_matches_dense(n in 2usize..120, seed: u64) {
        let m = random_symmetric(n, seed);
        let (vals, _) = sym_eigen_dense(&m);
        let dense = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let top = top_eigen(&m);
        prop_assert!((top.value - dense).abs() <= 1e-6 * dense.abs().max(1.0), "{} vs {}", top.value, dense);
        let mv = m.mul_vec(&top.vector);
        let resid: f64 = mv.iter().zip(&top.vector).map(|(a, b)| (a - top.value * b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(resid <= 1e-5 * dense.abs().max(1.0));
    }

    #[test]
    fn top_singular_matches_gram_eigen(rows in 1usize..60, cols in 1usize..60, seed: u64) {
        let m = RealMatrix::gaussian(rows, cols, &mut RandomStream::new(seed).rng());
        let (vals, _) = sym_eigen_dense(&m.transpose().matmul(&m));
        let dense = vals.iter().copied().fold(0.0, f64::max).sqrt();
        prop_assert!((sigma_max(&m) - dense).abs() <= 1e-6 * dense.max(1.0));
    }

    #[test]
    fn verdicts_are_consistent(seed: u64, h1: bool) {
        let h = if h1 { Hypothesis::H1 } else { Hypothesis::H0 };
        let mut rng = RandomStream::new(seed).rng();
        let bc = gen_matrix(&ProblemParams::matrix(Problem::BC, 40, 6, 1.0), h, &mut rng).unwrap();
        prop_assert!(bc_sum_max_test(&bc.matrix, 6, 1.0).unwrap().is_consistent());
        let pds = gen_graph(&ProblemParams::pds(40, 8, 0.8, 0.3), h, &mut rng).unwrap();
        prop_assert!(pds_edge_tests(&pds.graph, 8, 0.8, 0.3, false).unwrap().is_consistent());
        let ssbm = gen_graph(&ProblemParams::ssbm(40, 10, 0.5, 0.3), h, &mut rng).unwrap();
        prop_assert!(ssbm_spectral_test(&ssbm.graph, 0.5).unwrap().is_consistent());
        let spca = gen_spca(&ProblemParams::spca(Problem::SPCA, 30, 4, 20, 2.0), h, &mut rng).unwrap();
        prop_assert!(spca_spectral_test(&spca.samples, 20.0 / 30.0).unwrap().is_consistent());
    }

    #[test]
    fn solvers_are_reproducible(seed: u64) {
        let run = || {
            let mut rng = RandomStream::new(seed).rng();
            let g = gen_graph(&ProblemParams::ssbm(40, 10, 0.5, 0.3), Hypothesis::H1, &mut rng).unwrap();
            ssbm_spectral_test(&g.graph, 0.5).unwrap()
        };
        prop_assert_eq!(run(), run());
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn lifting_keeps_the_clique(n in 8usize..40, ell in 0u32..3, seed: u64) {
        let k = n / 4;
        let mut rng = RandomStream::new(seed).rng();
        let inst = gen_graph(&ProblemParams::pc(n, k, 0.5), Hypothesis::H1, &mut rng).unwrap();
        let lifted = pc_lift_traced(&inst.graph, ell, 3.0, inst.support.as_ref(), &mut rng).unwrap();
        let s = lifted.support.unwrap();
        prop_assert_eq!(lifted.output.n(), n << ell);
        prop_assert_eq!(s.len(), k << ell);
        prop_assert!(lifted.output.is_valid());
        prop_assert_eq!(lifted.output.induced_edge_count(s.as_slice()), s.len() * (s.len() - 1) / 2);
    }

    #[test]
    fn block_model_trace_splits_the_spike(seed: u64) {
        let (n, k) = (32, 4);
        let mut rng = RandomStream::new(seed).rng();
        let inst = gen_graph(&ProblemParams::pc(n, k, 0.5), Hypothesis::H1, &mut rng).unwrap();
        let before = inst.graph.clone();
        let sros = sros_reduce_traced(&inst.graph, k, 1, inst.support.as_ref(), &mut RandomStream::new(seed).split(1).rng()).unwrap();
        let out = ssbm_reduce_traced(&inst.graph, k, 1, inst.support.as_ref(), None, &mut RandomStream::new(seed).split(1).rng()).unwrap();
        prop_assert_eq!(&inst.graph, &before);
        prop_assert_eq!(out.tv_budget.value(), sros.tv_budget.plus(TvBudget::Bounded(1.0 / k as f64)).value());
        let Observation::Graph(h) = &out.observation else { panic!("graph output") };
        prop_assert!(h.is_valid());
        let t = out.trace.unwrap();
        let spike = t.spike_row.unwrap();
        let (pos, neg) = t.communities.unwrap();
        prop_assert_eq!(pos.overlap(&neg), 0);
        let mut all: Vec<usize> = pos.as_slice().iter().chain(neg.as_slice()).copied().collect();
        all.sort_unstable();
        let nz: Vec<usize> = (0..spike.len()).filter(|&i| spike[i] != 0.0).collect();
        prop_assert_eq!(all, nz);
    }
}

#[test]
fn pds_clone_is_reproducible_and_simple() {
    let t = CloneTargets::pds_preset(0.7, 0.3, 0.25);
    let g = gen_graph(&ProblemParams::pds(50, 10, 0.7, 0.3), Hypothesis::H1, &mut RandomStream::new(3).rng()).unwrap().graph;
    let a = pds_clone(&g, &t, &mut RandomStream::new(4).rng()).unwrap();
    let b = pds_clone(&g, &t, &mut RandomStream::new(4).rng()).unwrap();
    assert_eq!(a, b);
    assert!(a.0.is_valid() && a.1.is_valid());
}
