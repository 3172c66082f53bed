//! Topologies and Metropolis mixing matrices.
//!
//! A [`Topology`] is an undirected connected graph over `n` nodes; a
//! [`MixingMatrix`] is the doubly stochastic Metropolis weighting of its
//! edges together with the consensus contraction factor
//! `sigma = ||W - (1/n) 1 1^T||_2 < 1`.

use crate::numerics::{spectral_norm, Matrix};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    Random { varrho: f64 },
    Cycle,
    Star,
}

/// Undirected connected graph, stored as sorted per-node neighbor lists.
#[derive(Debug, Clone)]
pub struct Topology {
    n: usize,
    neighbors: Vec<Vec<usize>>,
    kind: TopologyKind,
}

impl Topology {
    fn from_edges(n: usize, edges: &[(usize, usize)], kind: TopologyKind) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            debug_assert!(i != j && i < n && j < n);
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Topology { n, neighbors, kind }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges with i < j, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.n
    }

    /// Plain edge-list text: first line `n`, then one `i j` per edge, 0-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Topology> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty edge list".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad node count: {e}")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::MalformedLine {
                    line: lineno + 2,
                    reason: "expected `i j`".into(),
                })?
                .parse()
                .map_err(|e| Error::MalformedLine {
                    line: lineno + 2,
                    reason: format!("{e}"),
                })
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if i >= n || j >= n || i == j {
                return Err(Error::MalformedLine {
                    line: lineno + 2,
                    reason: format!("invalid edge ({i}, {j}) for n = {n}"),
                });
            }
            edges.push((i, j));
        }
        let topo = Topology::from_edges(n, &edges, TopologyKind::Random { varrho: f64::NAN });
        if !topo.is_connected() {
            return Err(Error::InvalidInput("edge list is not connected".into()));
        }
        Ok(topo)
    }
}

/// Target edge count for a random graph: round(varrho * n(n-1)/2).
pub fn target_edge_count(n: usize, varrho: f64) -> usize {
    (varrho * (n * (n - 1)) as f64 / 2.0).round() as usize
}

/// Connected random graph with exactly `round(varrho n(n-1)/2)` edges.
///
/// Builds a uniform random spanning tree (random Prufer sequence), then adds
/// uniformly sampled non-edges until the target count is reached.
pub fn random_connected_graph(n: usize, varrho: f64, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if !(varrho > 0.0 && varrho <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "connectivity ratio must lie in (0, 1], got {varrho}"
        )));
    }
    let target = target_edge_count(n, varrho);
    if target < n - 1 {
        return Err(Error::GraphTooSparse {
            n,
            varrho,
            min_edges: n - 1,
            min_varrho: 2.0 / n as f64,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = spanning_tree_prufer(n, &mut rng);

    let mut present = vec![false; n * n];
    for &(i, j) in &edges {
        present[i * n + j] = true;
        present[j * n + i] = true;
    }
    let mut non_edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !present[i * n + j] {
                non_edges.push((i, j));
            }
        }
    }
    non_edges.shuffle(&mut rng);
    while edges.len() < target {
        edges.push(non_edges.pop().expect("target <= n(n-1)/2"));
    }

    Ok(Topology::from_edges(n, &edges, TopologyKind::Random { varrho }))
}

fn spanning_tree_prufer(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &prufer {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    // Standard Prufer decoding with a min-leaf scan; n is small.
    let mut deg = degree.clone();
    for &v in &prufer {
        let leaf = (0..n).find(|&u| deg[u] == 1).unwrap();
        edges.push((leaf.min(v), leaf.max(v)));
        deg[leaf] = 0;
        deg[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| deg[u] == 1).collect();
    edges.push((rest[0].min(rest[1]), rest[0].max(rest[1])));
    edges
}

pub fn cycle_graph(n: usize) -> Result<Topology> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(Topology::from_edges(n, &edges, TopologyKind::Cycle))
}

pub fn star_graph(n: usize) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("star needs n >= 2, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
    Ok(Topology::from_edges(n, &edges, TopologyKind::Star))
}

/// Doubly stochastic mixing matrix with its contraction factor.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    pub w: Matrix,
    pub sigma: f64,
}

impl MixingMatrix {
    pub fn n(&self) -> usize {
        self.w.rows()
    }
}

/// Metropolis weights: w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, the
/// diagonal absorbs the remainder, zeros elsewhere.
pub fn metropolis_weights(t: &Topology) -> MixingMatrix {
    let n = t.n();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for &j in t.neighbors(i) {
            w[(i, j)] = 1.0 / (1.0 + t.degree(i).max(t.degree(j)) as f64);
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    let mut centered = w.clone();
    let avg = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            centered[(i, j)] -= avg;
        }
    }
    let sigma = spectral_norm(&centered);
    MixingMatrix { w, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_doubly_stochastic(w: &Matrix) {
        let n = w.rows();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| w[(i, j)]).sum();
            let col: f64 = (0..n).map(|j| w[(j, i)]).sum();
            assert!((row - 1.0).abs() <= 1e-12, "row sum {row}");
            assert!((col - 1.0).abs() <= 1e-12, "col sum {col}");
            for j in 0..n {
                assert!(w[(i, j)] >= 0.0);
                assert!((w[(i, j)] - w[(j, i)]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn complete_triangle() {
        let t = random_connected_graph(3, 1.0, 0).unwrap();
        assert_eq!(t.edge_count(), 3);
        assert!(t.is_connected());
    }

    #[test]
    fn twenty_node_half_connectivity_graph() {
        let t = random_connected_graph(20, 0.5, 1).unwrap();
        assert_eq!(t.edge_count(), 95);
        assert!(t.is_connected());
    }

    #[test]
    fn too_sparse_errors_with_minimum() {
        // n=5, varrho=0.1: formula gives round(0.1 * 10) = 1 edge, needs >= 4.
        match random_connected_graph(5, 0.1, 0) {
            Err(Error::GraphTooSparse {
                min_edges,
                min_varrho,
                ..
            }) => {
                assert_eq!(min_edges, 4);
                assert!((min_varrho - 0.4).abs() < 1e-15);
            }
            other => panic!("expected GraphTooSparse, got {other:?}"),
        }
    }

    #[test]
    fn determinism_per_seed() {
        let a = random_connected_graph(20, 0.3, 9).unwrap();
        let b = random_connected_graph(20, 0.3, 9).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = random_connected_graph(20, 0.3, 10).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn cycle_and_star_shapes() {
        let c = cycle_graph(3).unwrap();
        assert_eq!(c.edge_count(), 3);
        let s = star_graph(4).unwrap();
        assert_eq!(s.edges(), vec![(0, 1), (0, 2), (0, 3)]);
        assert!(cycle_graph(2).is_err());
        assert!(star_graph(1).is_err());
    }

    #[test]
    fn cycle_sigma_exceeds_random_sigma() {
        let cyc = metropolis_weights(&cycle_graph(20).unwrap());
        let rnd = metropolis_weights(&random_connected_graph(20, 0.5, 1).unwrap());
        assert!(cyc.sigma < 1.0 && rnd.sigma < 1.0);
        assert!(cyc.sigma > rnd.sigma, "{} vs {}", cyc.sigma, rnd.sigma);
        assert!(cyc.sigma > 0.9);
    }

    #[test]
    fn metropolis_two_path() {
        let t = star_graph(2).unwrap();
        let m = metropolis_weights(&t);
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.w[(i, j)] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn metropolis_star_three() {
        let m = metropolis_weights(&star_graph(3).unwrap());
        // Hub 0 has degree 2, leaves degree 1.
        assert!((m.w[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.w[(0, 2)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.w[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.w[(1, 1)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.w[(1, 2)], 0.0);
        check_doubly_stochastic(&m.w);
    }

    #[test]
    fn five_cycle_contraction_in_unit_interval() {
        let m = metropolis_weights(&cycle_graph(5).unwrap());
        assert!(m.sigma > 0.0 && m.sigma < 1.0);
    }

    #[test]
    fn edge_list_round_trip() {
        let t = random_connected_graph(12, 0.4, 3).unwrap();
        let text = t.to_edge_list();
        let back = Topology::from_edge_list(&text).unwrap();
        assert_eq!(t.edges(), back.edges());
        assert!(Topology::from_edge_list("3\n0 0\n").is_err());
    }

    proptest! {
        #[test]
        fn mixing_matrices_contract(n in 4usize..16, varrho in 0.5f64..1.0, seed in 0u64..500) {
            let t = random_connected_graph(n, varrho, seed).unwrap();
            prop_assert!(t.is_connected());
            let m = metropolis_weights(&t);
            prop_assert!(m.sigma < 1.0);
            check_doubly_stochastic(&m.w);
            // w_ij > 0 iff edge or diagonal
            for i in 0..n {
                for j in 0..n {
                    let is_edge = t.neighbors(i).contains(&j);
                    if i != j {
                        prop_assert_eq!(m.w[(i, j)] > 0.0, is_edge);
                    }
                }
            }
        }
    }
}
