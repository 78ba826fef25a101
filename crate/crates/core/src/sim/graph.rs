use rand::Rng;

use crate::scalar::ipow;

/// Simple graph on `n` vertices with cached degrees, edge count and
/// (optionally) the number of ordered triangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphState {
    n: usize,
    adjacency: Vec<bool>,
    degrees: Vec<u32>,
    edge_count: u64,
    /// `6 × #triangles`; `None` when the model does not need it.
    triangle_hom: Option<u64>,
}

impl GraphState {
    pub fn empty(n: usize, track_triangles: bool) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
            degrees: vec![0; n],
            edge_count: 0,
            triangle_hom: track_triangles.then_some(0),
        }
    }

    pub fn complete(n: usize, track_triangles: bool) -> Self {
        let mut g = Self::empty(n, false);
        for i in 0..n {
            for j in 0..n {
                g.adjacency[i * n + j] = i != j;
            }
        }
        g.rebuild_caches(track_triangles);
        g
    }

    /// Independent edges, each present with probability `density`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        density: f64,
        track_triangles: bool,
        rng: &mut R,
    ) -> Self {
        let mut g = Self::empty(n, false);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < density {
                    g.adjacency[i * n + j] = true;
                    g.adjacency[j * n + i] = true;
                }
            }
        }
        g.rebuild_caches(track_triangles);
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)], track_triangles: bool) -> Self {
        let mut g = Self::empty(n, false);
        for &(i, j) in edges {
            assert!(
                i != j && i < n && j < n,
                "invalid edge ({i}, {j}) for n = {n}"
            );
            g.adjacency[i * n + j] = true;
            g.adjacency[j * n + i] = true;
        }
        g.rebuild_caches(track_triangles);
        g
    }

    fn rebuild_caches(&mut self, track_triangles: bool) {
        let (degrees, edge_count, triangles) = self.recount();
        self.degrees = degrees;
        self.edge_count = edge_count;
        self.triangle_hom = track_triangles.then_some(triangles);
    }

    /// Degrees, edge count and ordered triangle count from the adjacency
    /// matrix alone.
    pub fn recount(&self) -> (Vec<u32>, u64, u64) {
        let n = self.n;
        let degrees: Vec<u32> = (0..n)
            .map(|i| (0..n).filter(|&j| self.has_edge(i, j)).count() as u32)
            .collect();
        let edge_count = degrees.iter().map(|&d| d as u64).sum::<u64>() / 2;
        let mut triangles = 0u64;
        for i in 0..n {
            for j in 0..n {
                if !self.has_edge(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.has_edge(j, k) && self.has_edge(k, i) {
                        triangles += 1;
                    }
                }
            }
        }
        (degrees, edge_count, triangles)
    }

    /// Whether the cached counts agree with [`GraphState::recount`].
    pub fn caches_consistent(&self) -> bool {
        let (degrees, edge_count, triangles) = self.recount();
        degrees == self.degrees
            && edge_count == self.edge_count
            && self.triangle_hom.is_none_or(|t| t == triangles)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn triangle_hom(&self) -> Option<u64> {
        self.triangle_hom
    }

    pub fn common_neighbors(&self, i: usize, j: usize) -> u64 {
        let n = self.n;
        let (ri, rj) = (
            &self.adjacency[i * n..(i + 1) * n],
            &self.adjacency[j * n..(j + 1) * n],
        );
        ri.iter().zip(rj).filter(|(&a, &b)| a && b).count() as u64
    }

    /// Adds or removes the edge `{i, j}`, updating every cache.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        debug_assert!(i != j);
        if self.has_edge(i, j) == present {
            return;
        }
        let common = if self.triangle_hom.is_some() {
            self.common_neighbors(i, j)
        } else {
            0
        };
        let n = self.n;
        self.adjacency[i * n + j] = present;
        self.adjacency[j * n + i] = present;
        if present {
            self.degrees[i] += 1;
            self.degrees[j] += 1;
            self.edge_count += 1;
            if let Some(t) = self.triangle_hom.as_mut() {
                *t += 6 * common;
            }
        } else {
            self.degrees[i] -= 1;
            self.degrees[j] -= 1;
            self.edge_count -= 1;
            if let Some(t) = self.triangle_hom.as_mut() {
                *t -= 6 * common;
            }
        }
    }

    /// Edge homomorphism density `2·|E| / n²`.
    pub fn t_edge(&self) -> f64 {
        let n = self.n as f64;
        2.0 * self.edge_count as f64 / (n * n)
    }

    /// `p`-star homomorphism density `Σ_v deg(v)^p / n^(p+1)`.
    pub fn t_pstar(&self, p: u32) -> f64 {
        let n = self.n as f64;
        let sum: f64 = self.degrees.iter().map(|&d| ipow(d as f64, p)).sum();
        sum / ipow(n, p + 1)
    }

    /// Triangle homomorphism density: ordered triangles over `n³`.
    pub fn t_triangle(&self) -> f64 {
        let n = self.n as f64;
        let t = match self.triangle_hom {
            Some(t) => t,
            None => self.recount().2,
        };
        t as f64 / (n * n * n)
    }
}
