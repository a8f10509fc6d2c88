//! Detection tests and support-recovery algorithms.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloning::gaussian_clone;
use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::linalg::{covariance, lanczos_top, sigma_max, sym_eigen_dense, top_singular};
use crate::matrix::RealMatrix;
use crate::params::{Rule, Verdict};
use crate::special::{ln_choose, pairs};
use crate::support::Support;

/// Largest `n` for the ROS exhaustive search.
pub const ROS_SEARCH_MAX_N: usize = 40;
/// Largest `k` for the ROS exhaustive search.
pub const ROS_SEARCH_MAX_K: usize = 5;
/// Largest `n` for the dense-subgraph scan.
pub const SUBGRAPH_SCAN_MAX_N: usize = 30;
/// Largest ambient dimension for sparse eigenvector enumeration.
pub const SPARSE_EIG_MAX_D: usize = 20;

/// Output of a recovery procedure.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoveryResult {
    /// Recovered rows (or vertices, or coordinates).
    pub row_support: Support,
    /// Recovered columns, for bipartite structures.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub col_support: Option<Support>,
    /// Whether the procedure's acceptance check fired.
    pub marked: bool,
}

impl RecoveryResult {
    /// Result with only a row support.
    pub fn rows(s: Support) -> Self {
        Self { row_support: s, col_support: None, marked: true }
    }

    /// Column support, falling back to the rows.
    pub fn cols(&self) -> &Support {
        self.col_support.as_ref().unwrap_or(&self.row_support)
    }
}

/// Sum test `Σ M > μk²/2` or max test `max M > √(5 ln n)`.
pub fn bc_sum_max_test(m: &RealMatrix, k: usize, mu: f64) -> Result<Verdict> {
    ensure!(m.is_square(), "biclustering test needs a square matrix");
    let n = m.rows() as f64;
    let kk = k as f64;
    let sum = Verdict::new(m.sum(), mu * kk * kk / 2.0, Rule::Greater);
    let max = Verdict::new(m.max(), (5.0 * n.ln()).sqrt(), Rule::Greater);
    Ok(sum.either(max))
}

/// Edge-count test, optionally combined with an exhaustive `k`-subgraph scan.
///
/// Thresholds `C(n,2)q + C(k,2)(p−q)/2` and `C(k,2)(p+q)/2`; comparisons flip when `p < q`.
pub fn pds_edge_tests(g: &Graph, k: usize, p: f64, q: f64, scan_subgraphs: bool) -> Result<Verdict> {
    let n = g.n();
    ensure!(k <= n, "k = {k} exceeds n = {n}");
    let up = p >= q;
    let rule = if up { Rule::Greater } else { Rule::Less };
    let ck = pairs(k);
    let count = Verdict::new(g.edge_count() as f64, pairs(n) * q + ck * (p - q) / 2.0, rule);
    if !scan_subgraphs {
        return Ok(count);
    }
    if n > SUBGRAPH_SCAN_MAX_N || ln_choose(n as u64, k as u64) > (5e7f64).ln() {
        return Err(Error::Refused(alloc::format!("subgraph scan over C({n}, {k}) subsets is too large")));
    }
    let mut best: Option<usize> = None;
    for_each_subset(n, k, |s| {
        let e = g.induced_edge_count(s);
        best = Some(match best {
            None => e,
            Some(b) if up => b.max(e),
            Some(b) => b.min(e),
        });
    });
    let scan = Verdict::new(best.unwrap_or(0) as f64, ck * (p + q) / 2.0, rule);
    Ok(count.either(scan))
}

/// Call `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `λ₁(A − q(J − I)) ≥ 2√n` for the adjacency matrix `A`.
pub fn ssbm_spectral_test(g: &Graph, q: f64) -> Result<Verdict> {
    ensure!(q > 0.0 && q < 1.0, "q must lie in (0, 1)");
    let n = g.n();
    let lam = lanczos_top(n, |x| {
        let total: f64 = x.iter().sum();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for (w, &bits) in g.row(i).iter().enumerate() {
                    let mut b = bits;
                    while b != 0 {
                        s += x[w * 64 + b.trailing_zeros() as usize];
                        b &= b - 1;
                    }
                }
                s - q * (total - x[i])
            })
            .collect()
    });
    Ok(Verdict::new(lam.value, 2.0 * (n as f64).sqrt(), Rule::GreaterEq))
}

/// `σ₁(M) ≥ μ/2`.
pub fn ros_svd_test(m: &RealMatrix, mu: f64) -> Result<Verdict> {
    ensure!(mu > 0.0, "mu must be positive");
    Ok(Verdict::new(sigma_max(m), mu / 2.0, Rule::GreaterEq))
}

/// Entry thresholding at `√(6 ln n)`. Recovered supports are the row and
/// column projections of the exceeding entries.
pub fn ros_max_test(m: &RealMatrix) -> (Verdict, RecoveryResult) {
    let n = m.rows().max(m.cols()) as f64;
    let t = (6.0 * n.ln()).sqrt();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut stat = 0.0f64;
    for i in 0..m.rows() {
        for (j, &x) in m.row(i).iter().enumerate() {
            stat = stat.max(x.abs());
            if x.abs() > t {
                rows.push(i);
                cols.push(j);
            }
        }
    }
    let v = Verdict::new(stat, t, Rule::Greater);
    let marked = v.is_h1();
    (v, RecoveryResult { row_support: Support::new(rows), col_support: Some(Support::new(cols)), marked })
}

/// Best `u ∈ S_{k₁}` (entries in `{0, ±1}`, exactly `k₁` nonzero) against a
/// fixed vector `a`: the `k₁` largest `|a_i|` with matching signs.
/// Ties go to the smaller index.
pub fn ros_inner_max(a: &[f64], k1: usize) -> (f64, Vec<f64>) {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| a[y].abs().partial_cmp(&a[x].abs()).unwrap_or(core::cmp::Ordering::Equal).then(x.cmp(&y)));
    let mut u = alloc::vec![0.0; a.len()];
    let mut val = 0.0;
    for &i in order.iter().take(k1) {
        u[i] = if a[i] >= 0.0 { 1.0 } else { -1.0 };
        val += a[i].abs();
    }
    (val, u)
}

fn for_each_sign_vector(n: usize, k: usize, mut f: impl FnMut(&[usize], &[f64])) {
    // the first nonzero sign is fixed to +1 since (u, v) and (−u, −v) score alike
    let half = if k == 0 { 1 } else { 1usize << (k - 1) };
    let mut signs = alloc::vec![1.0; k];
    for_each_subset(n, k, |s| {
        for mask in 0..half {
            for (t, sg) in signs.iter_mut().enumerate().skip(1) {
                *sg = if mask >> (t - 1) & 1 == 1 { -1.0 } else { 1.0 };
            }
            f(s, &signs);
        }
    });
}

/// Exhaustive search for a sparse rank-one submatrix.
///
/// The input is split by [`gaussian_clone`] into `A` and `B`. For each
/// `k₁, k₂ ∈ [⌈c₁k⌉, k]` the pair `(u, v) ∈ S_{k₁} × S_{k₂}` maximizing
/// `uᵀAv` is found; it is marked when `{i : u_i (Bv)_i ≥ k₂ρ/2} = supp u` and
/// `{j : v_j (Bᵀu)_j ≥ k₁ρ/2} = supp v`. The marked pair with the largest
/// `|supp u| + |supp v|` is returned.
pub fn ros_search<R: Rng + ?Sized>(m: &RealMatrix, k: usize, rho: f64, c1: f64, rng: &mut R) -> Result<RecoveryResult> {
    let n = m.rows();
    ensure!(m.is_square(), "search needs a square matrix");
    ensure!(c1 > 0.0 && c1 < 1.0, "c1 must lie in (0, 1)");
    ensure!(k >= 1 && k <= n, "need 1 <= k <= n");
    if n > ROS_SEARCH_MAX_N || k > ROS_SEARCH_MAX_K {
        return Err(Error::Refused(alloc::format!(
            "exhaustive search limited to n <= {ROS_SEARCH_MAX_N}, k <= {ROS_SEARCH_MAX_K}"
        )));
    }
    let (a, b) = gaussian_clone(m, rng);
    let lo = ((c1 * k as f64).ceil() as usize).max(1);
    let sizes: Vec<usize> = (lo..=k).collect();
    let mut result = RecoveryResult::default();
    let mut best_size = 0;
    for &k2 in &sizes {
        // best (value, u, v) per k1 for this k2
        let mut best: Vec<Option<(f64, Vec<f64>, Vec<f64>)>> = alloc::vec![None; sizes.len()];
        let mut av = alloc::vec![0.0; n];
        for_each_sign_vector(n, k2, |s, signs| {
            for (i, x) in av.iter_mut().enumerate() {
                *x = s.iter().zip(signs).map(|(&j, &sg)| sg * a.get(i, j)).sum();
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| {
                av[y].abs().partial_cmp(&av[x].abs()).unwrap_or(core::cmp::Ordering::Equal).then(x.cmp(&y))
            });
            let mut acc = 0.0;
            let mut taken = 0;
            for (slot, &k1) in sizes.iter().enumerate() {
                while taken < k1 {
                    acc += av[order[taken]].abs();
                    taken += 1;
                }
                if best[slot].as_ref().is_none_or(|(v, _, _)| acc > *v) {
                    let mut u = alloc::vec![0.0; n];
                    for &i in order.iter().take(k1) {
                        u[i] = if av[i] >= 0.0 { 1.0 } else { -1.0 };
                    }
                    let mut v = alloc::vec![0.0; n];
                    for (&j, &sg) in s.iter().zip(signs) {
                        v[j] = sg;
                    }
                    best[slot] = Some((acc, u, v));
                }
            }
        });
        for (slot, &k1) in sizes.iter().enumerate() {
            let Some((_, u, v)) = &best[slot] else { continue };
            let bv = b.mul_vec(v);
            let btu = b.tr_mul_vec(u);
            let rows_ok = (0..n).all(|i| (u[i] * bv[i] >= 0.5 * k2 as f64 * rho) == (u[i] != 0.0));
            let cols_ok = (0..n).all(|j| (v[j] * btu[j] >= 0.5 * k1 as f64 * rho) == (v[j] != 0.0));
            if rows_ok && cols_ok && k1 + k2 > best_size {
                best_size = k1 + k2;
                result = RecoveryResult {
                    row_support: Support::of_nonzero(u),
                    col_support: Some(Support::of_nonzero(v)),
                    marked: true,
                };
            }
        }
    }
    if best_size == 0 {
        result.col_support = Some(Support::default());
    }
    Ok(result)
}

/// Split sorted-descending values at their largest consecutive gap and
/// return the indices above it. Equal gaps resolve to the smaller cluster.
pub fn largest_gap_cluster(values: &[f64]) -> Support {
    let n = values.len();
    if n < 2 {
        return Support::new((0..n).collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].partial_cmp(&values[x]).unwrap_or(core::cmp::Ordering::Equal).then(x.cmp(&y)));
    let mut cut = 1;
    let mut gap = f64::NEG_INFINITY;
    for t in 1..n {
        let d = values[order[t - 1]] - values[order[t]];
        if d > gap {
            gap = d;
            cut = t;
        }
    }
    Support::new(order[..cut].to_vec())
}

/// Spectral projection: clone into `A, B`; take the top singular pair
/// `(u, v)` of `A`; cluster `|B v|` for rows and `|Bᵀ u|` for columns.
pub fn ros_spectral_projection<R: Rng + ?Sized>(m: &RealMatrix, rng: &mut R) -> RecoveryResult {
    let (a, b) = gaussian_clone(m, rng);
    let t = top_singular(&a);
    let rows: Vec<f64> = b.mul_vec(&t.right).into_iter().map(f64::abs).collect();
    let cols: Vec<f64> = b.tr_mul_vec(&t.left).into_iter().map(f64::abs).collect();
    RecoveryResult {
        row_support: largest_gap_cluster(&rows),
        col_support: Some(largest_gap_cluster(&cols)),
        marked: true,
    }
}

/// `λ₁((1/n) X Xᵀ) > (1 + √c + √(2 ln d / n))²`.
///
/// The threshold is the operator-norm bound `σ₁(X) ≤ √n + √d + t` at
/// `t = √(2 ln d)`, which holds under `H0` with probability at least `1 − 2/d`.
/// The cruder level `1 + 2√c` lies below the bulk edge `(1 + √c)²` and would
/// reject almost every null instance.
pub fn spca_spectral_test(x: &RealMatrix, c_ratio: f64) -> Result<Verdict> {
    let (d, n) = (x.rows(), x.cols());
    ensure!(c_ratio * n as f64 >= d as f64 * (1.0 - 1e-12), "c_ratio must be at least d/n");
    let lam = lanczos_top(d, |v| {
        let mut y = x.mul_vec(&x.tr_mul_vec(v));
        y.iter_mut().for_each(|t| *t /= n as f64);
        y
    });
    let edge = 1.0 + c_ratio.sqrt() + (2.0 * (d.max(2) as f64).ln() / n as f64).sqrt();
    Ok(Verdict::new(lam.value, edge * edge, Rule::Greater))
}

/// `1ᵀ Σ̂ 1 > d + 2δ²kθ`.
pub fn bspca_sum_test(x: &RealMatrix, k: usize, theta: f64, delta: f64) -> Result<Verdict> {
    let (d, n) = (x.rows(), x.cols());
    let shift = 2.0 * delta * delta * k as f64 * theta;
    ensure!(shift <= d as f64, "need 2 delta^2 k theta <= d");
    let col_sums = x.tr_mul_vec(&alloc::vec![1.0; d]);
    let stat = col_sums.iter().map(|s| s * s).sum::<f64>() / n as f64;
    Ok(Verdict::new(stat, d as f64 + shift, Rule::Greater))
}

/// Largest eigenvalue over all `k × k` principal minors, with its embedded eigenvector.
pub fn spca_sparse_eig(sigma: &RealMatrix, k: usize) -> Result<(f64, Vec<f64>)> {
    let d = sigma.rows();
    ensure!(sigma.is_square(), "covariance must be square");
    ensure!(k >= 1 && k <= d, "need 1 <= k <= d");
    if d > SPARSE_EIG_MAX_D {
        return Err(Error::Refused(alloc::format!("minor enumeration limited to d <= {SPARSE_EIG_MAX_D}")));
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for_each_subset(d, k, |s| {
        let (vals, vecs) = sym_eigen_dense(&sigma.restrict(s, s));
        if vals[0] > best.0 {
            let mut v = alloc::vec![0.0; d];
            for (t, &i) in s.iter().enumerate() {
                v[i] = vecs.get(t, 0);
            }
            best = (vals[0], v);
        }
    });
    Ok(best)
}

/// Support of the leading eigenvector of `Σ̂`: `{i : |v̂_i|⁴ ≥ ln d / (kd)}`.
/// When `d ≤ n` the data is padded with fresh normal rows to dimension `2n`;
/// padded coordinates are never reported.
pub fn spca_spectral_recover<R: Rng + ?Sized>(x: &RealMatrix, k: usize, rng: &mut R) -> Support {
    let (d, n) = (x.rows(), x.cols());
    let dd = if d <= n { 2 * n } else { d };
    let mut data = RealMatrix::zeros(dd, n);
    for i in 0..dd {
        for j in 0..n {
            data.set(i, j, if i < d { x.get(i, j) } else { StandardNormal.sample(rng) });
        }
    }
    let top = lanczos_top(dd, |v| {
        let mut y = data.mul_vec(&data.tr_mul_vec(v));
        y.iter_mut().for_each(|t| *t /= n as f64);
        y
    });
    let t = (dd as f64).ln() / (k as f64 * dd as f64);
    Support::new((0..d).filter(|&i| top.vector[i].powi(4) >= t).collect())
}

/// Coordinates of the top `k`-sparse eigenvector of `Σ̂` with magnitude at least `1/(2√k)`.
pub fn spca_kmax_recover(x: &RealMatrix, k: usize) -> Result<Support> {
    let (_, v) = spca_sparse_eig(&covariance(x), k)?;
    let t = 0.5 / (k as f64).sqrt();
    Ok(Support::new((0..v.len()).filter(|&i| v[i].abs() >= t).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomStream;

    #[test]
    fn subsets_enumerated() {
        let mut c = 0;
        for_each_subset(6, 3, |_| c += 1);
        assert_eq!(c, 20);
        let mut c = 0;
        for_each_subset(4, 0, |s| {
            assert!(s.is_empty());
            c += 1
        });
        assert_eq!(c, 1);
    }

    #[test]
    fn trivial_verdicts() {
        let z = RealMatrix::zeros(10, 10);
        assert!(!bc_sum_max_test(&z, 3, 1.0).unwrap().is_h1());
        assert!(!ros_svd_test(&z, 1.0).unwrap().is_h1());
        let (v, r) = ros_max_test(&z);
        assert!(!v.is_h1() && r.row_support.is_empty());
        let mut m = z.clone();
        m.set(2, 3, (5.0 * 10f64.ln()).sqrt() + 1.0);
        assert!(bc_sum_max_test(&m, 3, 100.0).unwrap().is_h1());
        assert!(!pds_edge_tests(&Graph::empty(20), 5, 0.7, 0.5, false).unwrap().is_h1());
        assert!(ssbm_spectral_test(&Graph::complete(40), 0.5).unwrap().is_h1());
        assert!(pds_edge_tests(&Graph::empty(40), 5, 0.7, 0.5, true).is_err());
    }

    #[test]
    fn noiseless_search() {
        let mut rng = RandomStream::new(2).rng();
        let mut m = RealMatrix::zeros(12, 12);
        for i in [1, 5, 7] {
            for j in [0, 4, 9] {
                m.set(i, j, 1e4);
            }
        }
        let r = ros_search(&m, 3, 1e4 / 3.0, 0.5, &mut rng).unwrap();
        assert!(r.marked);
        assert_eq!(r.row_support.as_slice(), &[1, 5, 7]);
        assert_eq!(r.cols().as_slice(), &[0, 4, 9]);
    }

    #[test]
    fn gap_clusters() {
        assert_eq!(largest_gap_cluster(&[0.1, 5.0, 0.2, 4.0]).as_slice(), &[1, 3]);
        assert_eq!(largest_gap_cluster(&[3.0, 2.0, 1.0]).as_slice(), &[0]);
    }

    #[test]
    fn sparse_eig_identity_spike() {
        let mut s = RealMatrix::identity(6);
        s.set(2, 2, 4.0);
        let (l, v) = spca_sparse_eig(&s, 2).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        assert!((v[2].abs() - 1.0).abs() < 1e-12);
    }
}
