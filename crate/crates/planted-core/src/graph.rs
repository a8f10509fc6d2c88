//! Dense undirected simple graphs stored as adjacency bit rows.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{ensure, Error, Result};

/// Undirected simple graph on vertices `0..n`.
///
/// Each vertex owns a row of `ceil(n / 64)` words; bit `j` of row `i` is set
/// iff `{i, j}` is an edge. Mutators keep the rows symmetric and the diagonal
/// clear.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "GraphRepr", into = "GraphRepr")
)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, bits: vec![0; n * words] }
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Erdős-Rényi `G(n, p)`.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if bern(rng, p) {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether `{i, j}` is an edge. Self-pairs are never edges.
    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Insert or remove `{i, j}`. Requests with `i == j` are ignored.
    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        if i == j {
            return;
        }
        self.set_bit(i, j, on);
        self.set_bit(j, i, on);
    }

    #[inline]
    fn set_bit(&mut self, i: usize, j: usize, on: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        let m = 1u64 << (j % 64);
        if on {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        let twice: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        (twice / 2) as usize
    }

    /// Degree of vertex `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Adjacency words of row `i`.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Edges with both endpoints in `vertices`.
    pub fn induced_edge_count(&self, vertices: &[usize]) -> usize {
        let mut c = 0;
        for (a, &i) in vertices.iter().enumerate() {
            for &j in &vertices[a + 1..] {
                if self.has_edge(i, j) {
                    c += 1;
                }
            }
        }
        c
    }

    /// Graph with `{sigma[i], sigma[j]}` for every edge `{i, j}`.
    pub fn relabel(&self, sigma: &[usize]) -> Self {
        assert_eq!(sigma.len(), self.n, "permutation length mismatch");
        let mut g = Self::empty(self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    g.set_edge(sigma[i], sigma[j], true);
                }
            }
        }
        g
    }

    /// Complement graph.
    pub fn complement(&self) -> Self {
        let mut g = Self::empty(self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.has_edge(i, j) {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> crate::RealMatrix {
        let mut a = crate::RealMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_edge(i, j) {
                    a.set(i, j, 1.0);
                }
            }
        }
        a
    }

    /// Check symmetry and empty diagonal.
    pub fn is_valid(&self) -> bool {
        if self.bits.len() != self.n * self.words || self.words != self.n.div_ceil(64) {
            return false;
        }
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return false;
            }
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) != self.has_edge(j, i) {
                    return false;
                }
            }
            // padding bits past n stay clear
            if self.n % 64 != 0 {
                let last = self.bits[i * self.words + self.words - 1];
                if last >> (self.n % 64) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Rows as fixed-width lowercase hex strings. Character `c` of row `i`
    /// holds the bits for vertices `4c..4c+3`, lowest vertex in the lowest bit.
    pub fn to_hex_rows(&self) -> Vec<String> {
        (0..self.n)
            .map(|i| {
                let mut s = String::with_capacity(self.words * 16);
                for w in self.row(i) {
                    for b in 0..16 {
                        let nib = (w >> (4 * b)) & 0xF;
                        s.push(char::from_digit(nib as u32, 16).unwrap());
                    }
                }
                s
            })
            .collect()
    }

    /// Inverse of [`Graph::to_hex_rows`].
    pub fn from_hex_rows(n: usize, rows: &[String]) -> Result<Self> {
        ensure!(rows.len() == n, "expected {n} adjacency rows, found {}", rows.len());
        let mut g = Self::empty(n);
        for (i, r) in rows.iter().enumerate() {
            ensure!(r.len() == g.words * 16, "row {i} has length {}, expected {}", r.len(), g.words * 16);
            for (wi, chunk) in r.as_bytes().chunks(16).enumerate() {
                let mut w = 0u64;
                for (b, c) in chunk.iter().enumerate() {
                    let nib = (*c as char)
                        .to_digit(16)
                        .ok_or_else(|| Error::Contract(alloc::format!("row {i}: bad hex digit")))?;
                    w |= (nib as u64) << (4 * b);
                }
                g.bits[i * g.words + wi] = w;
            }
        }
        if !g.is_valid() {
            return Err(Error::Contract("adjacency rows are not a simple undirected graph".into()));
        }
        Ok(g)
    }
}

#[inline]
pub(crate) fn bern<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// Wire form of a graph.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct GraphRepr {
    n: usize,
    rows: Vec<String>,
}

#[cfg(feature = "serde")]
impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { n: g.n, rows: g.to_hex_rows() }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<GraphRepr> for Graph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::from_hex_rows(r.n, &r.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn complete_counts() {
        let g = Graph::complete(10);
        assert_eq!(g.edge_count(), 45);
        assert!(g.is_valid());
        assert_eq!(g.complement().edge_count(), 0);
    }

    #[test]
    fn no_self_loops() {
        let mut g = Graph::empty(5);
        g.set_edge(2, 2, true);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn hex_round_trip() {
        let mut rng = RandomStream::new(3).rng();
        for n in [1, 63, 64, 65, 130] {
            let g = Graph::erdos_renyi(n, 0.4, &mut rng);
            let back = Graph::from_hex_rows(n, &g.to_hex_rows()).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn relabel_preserves_count() {
        let mut rng = RandomStream::new(4).rng();
        let g = Graph::erdos_renyi(40, 0.3, &mut rng);
        let sigma: Vec<usize> = (0..40).rev().collect();
        let h = g.relabel(&sigma);
        assert_eq!(g.edge_count(), h.edge_count());
        assert_eq!(g.has_edge(0, 5), h.has_edge(39, 34));
    }
}
