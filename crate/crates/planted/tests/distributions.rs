use std::collections::BTreeMap;

use planted::stats::{correlation_check, exact_tv_small, gof_test, mean_cov_check, two_sample_test, DiscreteLaw, Method, Reference};
use planted_core::cloning::{gaussian_clone, reflection_clone};
use planted_core::rejection::{make_kernel_p1, make_kernel_p2, KernelSpec};
use planted_core::special::normal_cdf;
use planted_core::{RandomStream, RealMatrix};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

fn mixture_endpoints(spec: &KernelSpec, seed: u64, samples: usize) {
    let mut rng = RandomStream::new(seed).rng();
    for (bias, target) in [(spec.p, spec.f), (spec.q, spec.g)] {
        let xs: Vec<f64> = (0..samples)
            .map(|_| {
                let b = rng.random::<f64>() < bias;
                spec.apply(b, &mut rng).unwrap().value
            })
            .collect();
        let pmf = |x: u64| target.ln_density(x as f64).exp();
        let r = gof_test(&xs, Reference::Discrete(&pmf), Method::ChiSquare).unwrap();
        assert!(r.pass, "{target:?}: p = {:?}", r.p_value);
    }
}

#[test]
fn poisson_kernels_hit_their_endpoints() {
    mixture_endpoints(&make_kernel_p1(100, 2.0, 0.01, 0.5).unwrap(), 1, 200_000);
    mixture_endpoints(&make_kernel_p2(10, 0.4, 1.1, 0.7, 1.0).unwrap(), 2, 200_000);
}

#[test]
fn kernel_is_a_function_of_its_stream() {
    let spec = make_kernel_p1(100, 2.0, 0.01, 0.5).unwrap();
    let draw = |b| spec.apply(b, &mut RandomStream::new(9).rng()).unwrap();
    assert_eq!(draw(true), draw(true));
    assert_eq!(draw(false), draw(false));
}

#[test]
fn reflection_null_has_identity_covariance() {
    const B: usize = 20_000;
    let mut rng = RandomStream::new(5).rng();
    let samples: Vec<Vec<f64>> = (0..B)
        .map(|_| {
            let z = RealMatrix::gaussian(4, 4, &mut rng);
            reflection_clone(&z, 2, &mut rng).unwrap().into_vec()
        })
        .collect();
    let eye: Vec<Vec<f64>> = (0..16).map(|i| (0..16).map(|j| (i == j) as u8 as f64).collect()).collect();
    let tol = 4.0 / (B as f64).sqrt();
    let r = mean_cov_check(&samples, &[0.0; 16], &eye, tol, 2.0 * tol).unwrap();
    assert!(r.pass, "normalized deviation {}", r.statistic);
}

#[test]
fn gaussian_copies_are_exchangeable_and_uncorrelated() {
    let mut rng = RandomStream::new(6).rng();
    let signal = RealMatrix::from_fn(40, 40, |i, j| if i == j && i < 10 { 3.0 } else { 0.0 });
    let m = signal.add(&RealMatrix::gaussian(40, 40, &mut rng));
    let (a, b) = gaussian_clone(&m, &mut rng);
    let noise = |c: &RealMatrix| -> Vec<f64> { c.as_slice().iter().zip(signal.as_slice()).map(|(x, y)| x - y / 2f64.sqrt()).collect() };
    let (noise_a, noise_b) = (noise(&a), noise(&b));
    assert!(two_sample_test(a.as_slice(), b.as_slice(), Method::Ks).unwrap().pass);
    assert!(correlation_check(&noise_a, &noise_b, 4.0 / 40.0).unwrap().pass);
}

#[test]
fn gof_false_rejections_are_calibrated() {
    let mut rng = RandomStream::new(7).rng();
    let cdf = |x: f64| normal_cdf(x);
    let pmf = |x: u64| planted_core::special::poisson_log_pmf(x as f64, 3.0).exp();
    let pois = Poisson::new(3.0).unwrap();
    let (mut ks, mut chi) = (0, 0);
    for _ in 0..1000 {
        let xs: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        ks += !gof_test(&xs, Reference::Continuous(&cdf), Method::Ks).unwrap().pass as usize;
        let ys: Vec<f64> = (0..500).map(|_| pois.sample(&mut rng)).collect();
        chi += !gof_test(&ys, Reference::Discrete(&pmf), Method::ChiSquare).unwrap().pass as usize;
    }
    assert!(ks <= 2, "KS rejected {ks}/1000");
    assert!(chi <= 2, "chi-square rejected {chi}/1000");
}

fn law(weights: &[f64]) -> DiscreteLaw {
    let total: f64 = weights.iter().sum();
    weights.iter().enumerate().map(|(i, w)| (i as u64, w / total)).collect::<BTreeMap<_, _>>()
}

proptest! {
    #[test]
    fn exact_tv_is_a_metric(
        a in prop::collection::vec(0.01f64..1.0, 1..12),
        b in prop::collection::vec(0.01f64..1.0, 1..12),
        c in prop::collection::vec(0.01f64..1.0, 1..12),
    ) {
        let (a, b, c) = (law(&a), law(&b), law(&c));
        let ab = exact_tv_small(&a, &b).unwrap();
        prop_assert!((ab - exact_tv_small(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(exact_tv_small(&a, &a).unwrap() == 0.0);
        let ac = exact_tv_small(&a, &c).unwrap();
        let cb = exact_tv_small(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }
}
