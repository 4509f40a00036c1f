//! Spanning trees over `p` labelled vertices and the homogeneous model
//! parameters attached to them.
//!
//! Vertices are 0-indexed in the API. The text format and every report use
//! 1-indexed labels.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{Domain, StreamKey, AUX_LANE};

/// Undirected edge stored with `.0 < .1`.
pub type Edge = (usize, usize);

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` when `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// A spanning tree on `p >= 2` vertices.
///
/// Edges are normalized (`i < j`) and kept sorted, so two trees with the same
/// edge set compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeStructure {
    p: usize,
    edges: Vec<Edge>,
}

impl TreeStructure {
    /// Validates and builds a tree: `p - 1` distinct edges, no self-loops,
    /// no cycles.
    pub fn new(p: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if p < 2 {
            return invalid(format!("a tree needs at least 2 vertices, got {p}"));
        }
        let mut norm: Vec<Edge> = Vec::with_capacity(p - 1);
        for (a, b) in edges {
            if a >= p || b >= p {
                return invalid(format!("edge {}-{} out of range for p={p}", a + 1, b + 1));
            }
            if a == b {
                return invalid(format!("self-loop at vertex {}", a + 1));
            }
            norm.push((a.min(b), a.max(b)));
        }
        if norm.len() != p - 1 {
            return invalid(format!("a tree on {p} vertices has {} edges, got {}", p - 1, norm.len()));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate edge");
        }
        let mut uf = UnionFind::new(p);
        for &(a, b) in &norm {
            if !uf.union(a, b) {
                return invalid(format!("edge {}-{} closes a cycle", a + 1, b + 1));
            }
        }
        Ok(TreeStructure { p, edges: norm })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.p];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.p];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Breadth-first order from `root` as `(vertex, parent)` pairs; the root
    /// comes first with parent `None`.
    pub fn bfs_order(&self, root: usize) -> Vec<(usize, Option<usize>)> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.p];
        let mut order = Vec::with_capacity(self.p);
        let mut queue = VecDeque::from([(root, None)]);
        seen[root] = true;
        while let Some((v, parent)) = queue.pop_front() {
            order.push((v, parent));
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back((w, Some(v)));
                }
            }
        }
        order
    }

    /// Number of edges on the path between `a` and `b`.
    pub fn distance(&self, a: usize, b: usize) -> Result<usize> {
        if a >= self.p || b >= self.p {
            return invalid("vertex out of range");
        }
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.p];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist[b])
    }

    /// Maximum vertex degree.
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for TreeStructure {
    /// `p` followed by 1-indexed `i-j` edge tokens, e.g. `3 1-2 2-3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)?;
        for &(a, b) in &self.edges {
            write!(f, " {}-{}", a + 1, b + 1)?;
        }
        Ok(())
    }
}

impl FromStr for TreeStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let p: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty tree line".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("vertex count: {e}")))?;
        let mut edges = Vec::new();
        for tok in tokens {
            let (a, b) = tok
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("edge token `{tok}` is not `i-j`")))?;
            let parse = |x: &str| -> Result<usize> {
                let v: usize = x.parse().map_err(|e| Error::Parse(format!("edge token `{tok}`: {e}")))?;
                if v == 0 {
                    return Err(Error::Parse(format!("edge token `{tok}`: vertices are 1-indexed")));
                }
                Ok(v - 1)
            };
            edges.push((parse(a)?, parse(b)?));
        }
        TreeStructure::new(p, edges)
    }
}

/// Reads every non-empty, non-comment line of a tree file.
pub fn parse_tree_file(text: &str) -> Result<Vec<TreeStructure>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Edge flip probability θ and channel crossover q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(theta: f64, q: f64) -> Result<Self> {
        check_theta(theta)?;
        check_q(q)?;
        Ok(ModelParams { theta, q })
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 0.5 {
        Ok(())
    } else {
        invalid(format!("theta must lie in (0, 0.5), got {theta}"))
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if (0.0..0.5).contains(&q) {
        Ok(())
    } else {
        invalid(format!("q must lie in [0, 0.5), got {q}"))
    }
}

/// Star with vertex 1 (index 0) as the hub.
pub fn make_star(p: usize) -> Result<TreeStructure> {
    if p < 2 {
        return invalid(format!("star needs p >= 2, got {p}"));
    }
    TreeStructure::new(p, (1..p).map(|v| (0, v)))
}

/// Path 1-2-…-p.
pub fn make_chain(p: usize) -> Result<TreeStructure> {
    if p < 2 {
        return invalid(format!("chain needs p >= 2, got {p}"));
    }
    TreeStructure::new(p, (1..p).map(|v| (v - 1, v)))
}

/// Ten-vertex hybrid: hub 1 with leaves 2..6 and the tail 1-7-8-9-10.
/// Degrees are (6,1,1,1,1,1,2,2,2,1), so ζ = 15 + 3 = 18.
pub fn make_hybrid() -> TreeStructure {
    let edges = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (6, 7), (7, 8), (8, 9)];
    TreeStructure::new(10, edges).expect("hybrid tree is valid")
}

/// Decodes a Prüfer sequence (entries in `0..p`, length `p - 2`).
pub fn prufer_decode(p: usize, seq: &[usize]) -> Result<TreeStructure> {
    if p < 2 {
        return invalid(format!("Prüfer decoding needs p >= 2, got {p}"));
    }
    if seq.len() != p - 2 {
        return invalid(format!("Prüfer sequence for p={p} has length {}, got {}", p - 2, seq.len()));
    }
    if let Some(&bad) = seq.iter().find(|&&v| v >= p) {
        return invalid(format!("Prüfer entry {bad} out of range"));
    }
    let mut degree = vec![1usize; p];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(p - 1);
    // linear-time decoding with a moving pointer to the smallest leaf
    let mut ptr = degree.iter().position(|&d| d == 1).expect("a leaf exists");
    let mut leaf = ptr;
    for &v in seq {
        edges.push((leaf, v));
        degree[v] -= 1;
        if v < ptr && degree[v] == 1 {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, p - 1));
    TreeStructure::new(p, edges)
}

/// Uniform labelled tree on `p` vertices, deterministic in `seed`.
pub fn random_tree(p: usize, seed: u64) -> Result<TreeStructure> {
    if p < 2 {
        return invalid(format!("random tree needs p >= 2, got {p}"));
    }
    let mut rng = StreamKey::new(seed, Domain::Tree, p as u64).lane(AUX_LANE);
    let seq: Vec<usize> = (0..p - 2).map(|_| rng.gen_range(0..p)).collect();
    prufer_decode(p, &seq)
}

/// ζ = Σ d(d−1)/2 over vertex degrees.
pub fn zeta(t: &TreeStructure) -> u64 {
    t.degrees().into_iter().map(|d| (d * d.saturating_sub(1) / 2) as u64).sum()
}

/// Flip probability between the ends of a path of `d` edges.
pub fn flip_probability_at_distance(d: usize, theta: f64) -> f64 {
    0.5 * (1.0 - (1.0 - 2.0 * theta).powi(d as i32))
}

/// Probability that vertices `a` and `b` disagree under the homogeneous model.
pub fn path_flip_probability(t: &TreeStructure, a: usize, b: usize, theta: f64) -> Result<f64> {
    if a == b {
        return invalid("path flip probability needs distinct vertices");
    }
    check_theta(theta)?;
    let d = t.distance(a, b)?;
    if d == 1 {
        return Ok(theta);
    }
    Ok(flip_probability_at_distance(d, theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_chain_hybrid_zeta() {
        let star = make_star(10).unwrap();
        assert_eq!(star.degrees(), [9, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(zeta(&star), 36);
        assert_eq!(zeta(&make_chain(10).unwrap()), 8);
        assert_eq!(zeta(&make_hybrid()), 18);
        assert_eq!(zeta(&make_star(3).unwrap()), 1);
        assert_eq!(zeta(&make_chain(4).unwrap()), 2);
        assert_eq!(zeta(&make_chain(2).unwrap()), 0);
        assert_eq!(make_star(2).unwrap().edges(), &[(0, 1)]);
        assert_eq!(make_chain(4).unwrap().edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn closed_forms_for_star_and_chain() {
        for p in 3..40 {
            assert_eq!(zeta(&make_star(p).unwrap()), ((p - 1) * (p - 2) / 2) as u64);
            assert_eq!(zeta(&make_chain(p).unwrap()), (p - 2) as u64);
        }
    }

    #[test]
    fn constructors_reject_small_p() {
        assert!(make_star(1).is_err());
        assert!(make_chain(0).is_err());
        assert!(random_tree(1, 3).is_err());
    }

    #[test]
    fn validation_rejects_malformed_edge_sets() {
        assert!(TreeStructure::new(3, [(0, 1)]).is_err());
        assert!(TreeStructure::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(TreeStructure::new(3, [(0, 0), (1, 2)]).is_err());
        assert!(TreeStructure::new(4, [(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(TreeStructure::new(3, [(0, 1), (1, 3)]).is_err());
        assert!(TreeStructure::new(3, [(2, 1), (1, 0)]).is_ok());
    }

    #[test]
    fn text_format_round_trip() {
        let t: TreeStructure = "3 1-2 2-3".parse().unwrap();
        assert_eq!(t, make_chain(3).unwrap());
        assert_eq!(t.to_string(), "3 1-2 2-3");
        assert!("3 1-2".parse::<TreeStructure>().is_err());
        assert!("3 0-1 1-2".parse::<TreeStructure>().is_err());
        assert!("3 1:2 2-3".parse::<TreeStructure>().is_err());
        let many = parse_tree_file("# comment\n3 1-2 2-3\n\n4 1-2 1-3 1-4\n").unwrap();
        assert_eq!(many.len(), 2);
        assert_eq!(many[1], make_star(4).unwrap());
    }

    #[test]
    fn random_tree_is_deterministic() {
        assert_eq!(random_tree(5, 7).unwrap(), random_tree(5, 7).unwrap());
        for seed in 0..10 {
            assert_eq!(random_tree(2, seed).unwrap().edges(), &[(0, 1)]);
        }
    }

    #[test]
    fn prufer_decoding_known_case() {
        // classic example: sequence (4,4,4,5) on 6 vertices (1-indexed)
        let t = prufer_decode(6, &[3, 3, 3, 4]).unwrap();
        assert_eq!(t.edges(), &[(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
        assert!(prufer_decode(4, &[1]).is_err());
        assert!(prufer_decode(4, &[1, 9]).is_err());
    }

    #[test]
    fn path_flip_values() {
        let chain = make_chain(4).unwrap();
        assert_eq!(path_flip_probability(&chain, 0, 1, 0.1).unwrap(), 0.1);
        assert!((path_flip_probability(&chain, 0, 2, 0.1).unwrap() - 0.18).abs() < 1e-15);
        // third power of the symmetric channel matrix [[0.9, 0.1], [0.1, 0.9]]
        let m = [[0.9, 0.1], [0.1, 0.9]];
        let mut acc = m;
        for _ in 0..2 {
            let mut next = [[0.0; 2]; 2];
            for (i, row) in next.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = (0..2).map(|k| acc[i][k] * m[k][j]).sum();
                }
            }
            acc = next;
        }
        let d3 = path_flip_probability(&chain, 0, 3, 0.1).unwrap();
        assert!((d3 - acc[0][1]).abs() < 1e-15);
        assert!((d3 - 0.244).abs() < 1e-12);
        assert!(path_flip_probability(&chain, 2, 2, 0.1).is_err());
        assert!(path_flip_probability(&chain, 0, 1, 0.5).is_err());
    }

    #[test]
    fn bfs_starts_at_root() {
        let order = make_hybrid().bfs_order(0);
        assert_eq!(order[0], (0, None));
        assert_eq!(order.len(), 10);
        let mut seen = [false; 10];
        for &(v, parent) in &order {
            if let Some(u) = parent {
                assert!(seen[u]);
            }
            seen[v] = true;
        }
    }
}
