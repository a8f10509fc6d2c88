//! Signal-preserving transforms: reflection cloning, random rotation, and
//! the two-copy cloning maps.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, param_err, Result};
use crate::graph::Graph;
use crate::matrix::{dot, RealMatrix};
use crate::special::random_permutation;

/// One reflection round on an already permuted matrix: `½ Rᵀ W R` with
/// `R = A + B`, `A = diag(I, −I)`, `B` the anti-diagonal permutation.
fn reflect(w: &RealMatrix) -> RealMatrix {
    let n = w.rows();
    let h = n / 2;
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..h {
        let ii = n - 1 - i;
        for j in 0..h {
            let jj = n - 1 - j;
            let (a, b, c, d) = (w.get(i, j), w.get(i, jj), w.get(ii, j), w.get(ii, jj));
            out.set(i, j, 0.5 * (a + b + c + d));
            out.set(i, jj, 0.5 * (a - b + c - d));
            out.set(ii, j, 0.5 * (a + b - c - d));
            out.set(ii, jj, 0.5 * (a - b - c + d));
        }
    }
    out
}

/// `R v` for the reflection matrix `R`.
fn reflect_vec(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = alloc::vec![0.0; n];
    for i in 0..n / 2 {
        let ii = n - 1 - i;
        out[i] = v[i] + v[ii];
        out[ii] = v[i] - v[ii];
    }
    out
}

fn permute_vec(v: &[f64], sigma: &[usize]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; v.len()];
    for (i, &s) in sigma.iter().enumerate() {
        out[s] = v[i];
    }
    out
}

/// `ℓ` rounds of `W ← ½ (A+B)ᵀ W^{σ,σ} (A+B)` with a fresh uniform `σ` each round.
pub fn reflection_clone<R: Rng + ?Sized>(m: &RealMatrix, ell: u32, rng: &mut R) -> Result<RealMatrix> {
    Ok(reflection_clone_traced(m, ell, None, rng)?.0)
}

/// [`reflection_clone`] carrying a rank-one spike `(r, c)` along: if
/// `M = λ r cᵀ + Z` then the output is `(λ/2^ℓ) r' c'ᵀ + Z'` for the returned
/// `(r', c')`, which satisfy `‖r'‖² = 2^ℓ ‖r‖²`.
#[allow(clippy::type_complexity)]
pub fn reflection_clone_traced<R: Rng + ?Sized>(
    m: &RealMatrix,
    ell: u32,
    spike: Option<(&[f64], &[f64])>,
    rng: &mut R,
) -> Result<(RealMatrix, Option<(Vec<f64>, Vec<f64>)>)> {
    ensure!(m.is_square(), "reflection cloning needs a square matrix");
    let n = m.rows();
    ensure!(n % 2 == 0, "reflection cloning needs even n (got {n})");
    let mut w = m.clone();
    let mut sp = spike.map(|(r, c)| (r.to_vec(), c.to_vec()));
    for _ in 0..ell {
        let sigma = random_permutation(n, rng);
        w = reflect(&w.permute(&sigma, &sigma));
        sp = sp.map(|(r, c)| (reflect_vec(&permute_vec(&r, &sigma)), reflect_vec(&permute_vec(&c, &sigma))));
    }
    Ok((w, sp))
}

/// Leading columns of a Haar-distributed orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarColumns {
    /// Ambient dimension `N`.
    pub ambient: usize,
    /// Number of columns `n`.
    pub cols: usize,
    /// `N × n` entries with orthonormal columns.
    pub entries: RealMatrix,
}

/// Gram-Schmidt on fresh Gaussian vectors, with a redraw if a residual norm
/// falls below `1e-12`.
pub fn haar_columns<R: Rng + ?Sized>(big_n: usize, n: usize, rng: &mut R) -> Result<HaarColumns> {
    ensure!(n >= 1 && n <= big_n, "need 1 <= n <= N (n = {n}, N = {big_n})");
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..big_n).map(|_| StandardNormal.sample(rng)).collect();
        // two passes keep orthogonality near machine precision
        for _ in 0..2 {
            for u in &cols {
                let d = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv < 1e-12 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        cols.push(v);
    }
    let entries = RealMatrix::from_fn(big_n, n, |i, j| cols[j][i]);
    Ok(HaarColumns { ambient: big_n, cols: n, entries })
}

/// Pad `M` (`m × n`) to `m × τn` with fresh normals and right-multiply by
/// the first `n` columns of a Haar orthogonal `τn × τn` matrix.
pub fn random_rotate<R: Rng + ?Sized>(m: &RealMatrix, tau: usize, rng: &mut R) -> Result<RealMatrix> {
    ensure!(tau >= 2, "tau must be at least 2");
    let (rows, n) = (m.rows(), m.cols());
    let wide = tau * n;
    let mut padded = RealMatrix::zeros(rows, wide);
    for i in 0..rows {
        for j in 0..wide {
            padded.set(i, j, if j < n { m.get(i, j) } else { StandardNormal.sample(rng) });
        }
    }
    let r = haar_columns(wide, n, rng)?;
    Ok(padded.matmul(&r.entries))
}

/// Total-variation bound `2(n+3)/(τn − n − 3)` of [`random_rotate`] on a rank-one input;
/// infinite when the denominator is not positive.
pub fn rotation_tv_bound(n: usize, tau: usize) -> f64 {
    let den = (tau * n) as f64 - n as f64 - 3.0;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        2.0 * (n as f64 + 3.0) / den
    }
}

/// `(M + G)/√2` and `(M − G)/√2` for fresh standard normal `G`.
pub fn gaussian_clone<R: Rng + ?Sized>(m: &RealMatrix, rng: &mut R) -> (RealMatrix, RealMatrix) {
    let g = RealMatrix::gaussian(m.rows(), m.cols(), rng);
    let mut a = m.add(&g);
    let mut b = m.sub(&g);
    a.scale(core::f64::consts::FRAC_1_SQRT_2);
    b.scale(core::f64::consts::FRAC_1_SQRT_2);
    (a, b)
}

/// Target densities for [`pds_clone`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloneTargets {
    /// Source planted density.
    pub p: f64,
    /// Source ambient density.
    pub q: f64,
    /// Output planted density.
    pub big_p: f64,
    /// Output ambient density.
    pub big_q: f64,
}

impl CloneTargets {
    /// `P = (wp + (1−w)q)/2`, `Q = q/2`.
    pub fn pds_preset(p: f64, q: f64, w: f64) -> Self {
        Self { p, q, big_p: (w * p + (1.0 - w) * q) / 2.0, big_q: q / 2.0 }
    }

    /// Independent-set preset on the complement: `p = P = 1`, `q = 1 − q₀`, `Q = 1 − q₀/2`.
    pub fn pis_preset(q0: f64) -> Self {
        Self { p: 1.0, q: 1.0 - q0, big_p: 1.0, big_q: 1.0 - q0 / 2.0 }
    }

    /// Square-root targets `P = 1 − √(1−p)`, `Q = 1 − √(1−q)`.
    /// Outside `p = 1` it usually fails [`CloneTargets::check`].
    pub fn square_root(p: f64, q: f64) -> Self {
        Self { p, q, big_p: 1.0 - (1.0 - p).sqrt(), big_q: 1.0 - (1.0 - q).sqrt() }
    }

    /// Enforce `p > q`, `Q ∉ {0,1}`, and that both `P/Q` and `(1−P)/(1−Q)`
    /// lie in `[√((1−p)/(1−q)), √(p/q)]`.
    pub fn check(&self) -> Result<()> {
        let Self { p, q, big_p, big_q } = *self;
        ensure!(p > q, "need p > q (p = {p}, q = {q})");
        ensure!(big_q > 0.0 && big_q < 1.0, "Q must lie strictly inside (0, 1)");
        ensure!((0.0..=1.0).contains(&big_p), "P must lie in [0, 1]");
        let lo = ((1.0 - p) / (1.0 - q)).sqrt();
        let hi = if q == 0.0 { f64::INFINITY } else { (p / q).sqrt() };
        let tol = 1e-12;
        for (name, r) in [("P/Q", big_p / big_q), ("(1-P)/(1-Q)", (1.0 - big_p) / (1.0 - big_q))] {
            if r < lo - tol || r > hi + tol {
                return Err(param_err!("ratio {name} = {r} outside the validity window [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Two-bit pattern probabilities, indexed by `copy1 + 2·copy2`, for an
    /// edge and a non-edge of the source graph.
    pub fn pattern_probabilities(&self) -> ([f64; 4], [f64; 4]) {
        let Self { p, q, big_p, big_q } = *self;
        let pr = |x: f64, ones: i32| x.powi(ones) * (1.0 - x).powi(2 - ones);
        let mut edge = [0.0; 4];
        let mut non = [0.0; 4];
        for v in 0..4usize {
            let ones = v.count_ones() as i32;
            let (a, b) = (pr(big_p, ones), pr(big_q, ones));
            edge[v] = ((1.0 - q) * a - (1.0 - p) * b) / (p - q);
            non[v] = (p * b - q * a) / (p - q);
        }
        (edge, non)
    }
}

fn draw_pattern<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (v, &pr) in probs.iter().enumerate() {
        acc += pr;
        if u < acc {
            return v;
        }
    }
    3
}

/// Split `G` into two graphs that, given the planted set, are independent:
/// `G(n,S,p,q) ↦ G(n,S,P,Q)^{⊗2}` and `G(n,q) ↦ G(n,Q)^{⊗2}`.
pub fn pds_clone<R: Rng + ?Sized>(g: &Graph, targets: &CloneTargets, rng: &mut R) -> Result<(Graph, Graph)> {
    targets.check()?;
    let (edge, non) = targets.pattern_probabilities();
    let n = g.n();
    let (mut a, mut b) = (Graph::empty(n), Graph::empty(n));
    for i in 0..n {
        for j in i + 1..n {
            let v = draw_pattern(if g.has_edge(i, j) { &edge } else { &non }, rng);
            a.set_edge(i, j, v & 1 != 0);
            b.set_edge(i, j, v & 2 != 0);
        }
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomStream;

    #[test]
    fn reflection_preserves_frobenius() {
        let mut rng = RandomStream::new(1).rng();
        let m = RealMatrix::gaussian(32, 32, &mut rng);
        let out = reflection_clone(&m, 3, &mut rng).unwrap();
        assert!((out.frobenius() / m.frobenius() - 1.0).abs() < 1e-12);
        assert_eq!(reflection_clone(&m, 0, &mut rng).unwrap(), m);
        assert!(reflection_clone(&RealMatrix::zeros(3, 3), 1, &mut rng).is_err());
    }

    #[test]
    fn reflection_spike_identity() {
        let mut rng = RandomStream::new(2).rng();
        let n = 16;
        let mut r = alloc::vec![0.0; n];
        for i in [1, 4, 9] {
            r[i] = 1.0;
        }
        let mut m = RealMatrix::zeros(n, n);
        crate::instances::add_rank_one(&mut m, 3.0, &r, &r);
        let (out, sp) = reflection_clone_traced(&m, 2, Some((&r, &r)), &mut rng).unwrap();
        let (r2, c2) = sp.unwrap();
        assert_eq!(r2, c2);
        assert_eq!(dot(&r2, &r2), 12.0);
        for i in 0..n {
            for j in 0..n {
                assert!((out.get(i, j) - 0.75 * r2[i] * c2[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_orthonormal() {
        let mut rng = RandomStream::new(3).rng();
        let h = haar_columns(40, 10, &mut rng).unwrap();
        let g = h.entries.transpose().matmul(&h.entries);
        for i in 0..10 {
            for j in 0..10 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - e).abs() < 1e-9);
            }
        }
        let one = haar_columns(1, 1, &mut rng).unwrap();
        assert_eq!(one.entries.get(0, 0).abs(), 1.0);
        assert!(haar_columns(2, 3, &mut rng).is_err());
    }

    #[test]
    fn gaussian_clone_sum() {
        let mut rng = RandomStream::new(4).rng();
        let m = RealMatrix::gaussian(5, 7, &mut rng);
        let (a, b) = gaussian_clone(&m, &mut rng);
        let s = a.add(&b);
        for (x, y) in s.as_slice().iter().zip(m.as_slice()) {
            assert!((x - core::f64::consts::SQRT_2 * y).abs() < 1e-12);
        }
    }

    #[test]
    fn clone_window() {
        assert!(CloneTargets::square_root(0.75, 0.5).check().is_err());
        assert!(CloneTargets::pds_preset(0.75, 0.5, 0.25).check().is_ok());
        assert!(CloneTargets::pis_preset(0.3).check().is_ok());
        let (e, n) = CloneTargets::pds_preset(0.6, 0.3, 0.25).pattern_probabilities();
        assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e.iter().chain(n.iter()).all(|&x| x >= 0.0));
    }
}
