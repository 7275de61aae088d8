//! Weighted problem graphs.

use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

pub const MIN_WEIGHT: u32 = 1;
pub const MAX_WEIGHT: u32 = 10;

/// An undirected weighted edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: u32,
}

/// A connected simple graph with integer edge weights in `1..=10`.
///
/// Edges are kept sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    n: i64,
    edges: Vec<[i64; 3]>,
}

impl WeightedGraph {
    /// Builds a graph, normalizing each edge to `u < v` and checking every invariant.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, u32)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("graph needs at least 2 nodes, got {n}")));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let label = format!("[{a},{b},{w}]");
            if a == b {
                return Err(Error::Parse(format!("self-loop at edge {label}")));
            }
            if a >= n || b >= n {
                return Err(Error::Parse(format!("node index out of range at edge {label} (n = {n})")));
            }
            if !(MIN_WEIGHT..=MAX_WEIGHT).contains(&w) {
                return Err(Error::Parse(format!("weight out of range at edge {label}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::Parse(format!("duplicate edge {label}")));
            }
            out.push(Edge { u, v, w });
        }
        out.sort();
        let g = WeightedGraph { n, edges: out };
        if !g.is_connected() {
            return Err(Error::Parse("graph is disconnected".into()));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.w)).sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }

    /// Compact JSON document `{"n":N,"edges":[[u,v,w],...]}`.
    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            n: self.n as i64,
            edges: self
                .edges
                .iter()
                .map(|e| [e.u as i64, e.v as i64, i64::from(e.w)])
                .collect(),
        };
        serde_json::to_string(&doc).expect("graph document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed graph document: {e}")))?;
        if doc.n < 2 {
            return Err(Error::Parse(format!("graph needs at least 2 nodes, got {}", doc.n)));
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [u, v, w] in doc.edges {
            let label = format!("[{u},{v},{w}]");
            if u < 0 || v < 0 {
                return Err(Error::Parse(format!("negative node index at edge {label}")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at edge {label}")));
            }
            let w = u32::try_from(w)
                .ok()
                .filter(|w| (MIN_WEIGHT..=MAX_WEIGHT).contains(w))
                .ok_or_else(|| Error::Parse(format!("weight out of range at edge {label}")))?;
            edges.push((u as usize, v as usize, w));
        }
        Self::new(doc.n as usize, edges)
    }

    /// Short stable identifier: first 16 hex digits of the SHA-256 of [`to_json`](Self::to_json).
    pub fn instance_hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Number of edges produced by [`generate_ba_graph`].
pub fn ba_edge_count(n: usize, m: usize) -> usize {
    m * (m - 1) / 2 + m * (n - m)
}

/// Seeded Barabási–Albert graph with uniform integer weights in `1..=10`.
///
/// Starts from a clique on `m` nodes; every later node attaches to `m` distinct
/// existing nodes drawn one at a time with probability proportional to their
/// current degree (uniformly when all candidates have degree zero). Weights are
/// drawn afterwards, in sorted edge order, from the same stream.
pub fn generate_ba_graph(n: usize, m: usize, seed: u64) -> Result<WeightedGraph> {
    if m < 1 || n <= m {
        return Err(Error::InvalidArgument(format!(
            "Barabási–Albert graph needs n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    let mut rng = rng::from_seed(seed);
    let mut degree = vec![0u64; n];
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(ba_edge_count(n, m));
    for u in 0..m {
        for v in (u + 1)..m {
            pairs.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    for new in m..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            let candidates = (0..new).filter(|c| !chosen.contains(c));
            let total: u64 = candidates.clone().map(|c| degree[c]).sum();
            let pick = if total == 0 {
                let pool: Vec<usize> = candidates.collect();
                pool[rng.gen_range(0..pool.len())]
            } else {
                let mut r = rng.gen_range(0..total);
                let mut pick = None;
                for c in candidates {
                    if r < degree[c] {
                        pick = Some(c);
                        break;
                    }
                    r -= degree[c];
                }
                pick.expect("draw falls inside the degree mass")
            };
            chosen.push(pick);
        }
        for &t in &chosen {
            pairs.push((t, new));
            degree[t] += 1;
            degree[new] += 1;
        }
    }
    pairs.sort_unstable();
    let edges: Vec<(usize, usize, u32)> = pairs
        .into_iter()
        .map(|(u, v)| (u, v, rng.gen_range(MIN_WEIGHT..=MAX_WEIGHT)))
        .collect();
    WeightedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_nodes_gives_triangle() {
        for seed in 0..20 {
            let g = generate_ba_graph(3, 2, seed).unwrap();
            let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
            assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        }
    }

    #[test]
    fn six_nodes_has_nine_edges() {
        for seed in 0..20 {
            assert_eq!(generate_ba_graph(6, 2, seed).unwrap().edges().len(), 9);
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(matches!(generate_ba_graph(2, 2, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(generate_ba_graph(5, 0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn m_equal_one_is_a_tree() {
        let g = generate_ba_graph(12, 1, 3).unwrap();
        assert_eq!(g.edges().len(), 11);
        assert!(g.is_connected());
    }

    #[test]
    fn degree_distribution_is_heavy_tailed() {
        let heavy = (0..1000u64)
            .filter(|&s| {
                let g = generate_ba_graph(18, 2, s).unwrap();
                g.degrees().into_iter().max().unwrap() > 4
            })
            .count();
        assert!(heavy > 950, "only {heavy}/1000 graphs had max degree > 2m");
    }

    #[test]
    fn triangle_json_roundtrip() {
        let g = WeightedGraph::new(3, [(0, 1, 1), (0, 2, 2), (1, 2, 3)]).unwrap();
        let text = g.to_json();
        assert_eq!(text, r#"{"n":3,"edges":[[0,1,1],[0,2,2],[1,2,3]]}"#);
        assert_eq!(WeightedGraph::from_json(&text).unwrap(), g);
    }

    #[test]
    fn parse_errors_name_the_edge() {
        let err = WeightedGraph::from_json(r#"{"n":3,"edges":[[0,1,1],[2,2,5],[1,2,3]]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("self-loop") && msg.contains("[2,2,5]"), "{msg}");

        let err = WeightedGraph::from_json(r#"{"n":3,"edges":[[0,1,0],[1,2,3]]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weight out of range") && msg.contains("[0,1,0]"), "{msg}");

        let err = WeightedGraph::from_json(r#"{"n":3,"edges":[[0,1,11],[1,2,3]]}"#).unwrap_err();
        assert!(err.to_string().contains("weight out of range"));

        let err = WeightedGraph::from_json(r#"{"n":3,"edges":[[0,1,1],[1,0,2],[1,2,3]]}"#).unwrap_err();
        assert!(err.to_string().contains("duplicate"));

        let err = WeightedGraph::from_json(r#"{"n":4,"edges":[[0,1,1],[2,3,2]]}"#).unwrap_err();
        assert!(err.to_string().contains("disconnected"));

        assert!(WeightedGraph::from_json("{\"n\":3,").is_err());
        assert!(WeightedGraph::from_json(r#"{"n":3,"edges":[[0,5,1]]}"#).is_err());
    }

    #[test]
    fn parse_sorts_edges() {
        let g = WeightedGraph::from_json(r#"{"n":3,"edges":[[2,1,3],[0,1,1]]}"#).unwrap();
        assert_eq!(g.to_json(), r#"{"n":3,"edges":[[0,1,1],[1,2,3]]}"#);
    }

    #[test]
    fn instance_hash_is_stable() {
        let a = generate_ba_graph(8, 2, 11).unwrap();
        let b = generate_ba_graph(8, 2, 11).unwrap();
        assert_eq!(a.instance_hash(), b.instance_hash());
        assert_eq!(a.instance_hash().len(), 16);
        assert_ne!(a.instance_hash(), generate_ba_graph(8, 2, 12).unwrap().instance_hash());
    }

    proptest! {
        #[test]
        fn ba_edge_count_and_connectivity(n in 3usize..30, m in 1usize..5, seed in any::<u64>()) {
            prop_assume!(n > m);
            let g = generate_ba_graph(n, m, seed).unwrap();
            prop_assert_eq!(g.edges().len(), ba_edge_count(n, m));
            prop_assert!(g.is_connected());
            prop_assert!(g.edges().iter().all(|e| e.u < e.v && (1..=10).contains(&e.w)));
            prop_assert_eq!(&g, &generate_ba_graph(n, m, seed).unwrap());
        }

        #[test]
        fn json_roundtrip(n in 3usize..20, seed in any::<u64>()) {
            let g = generate_ba_graph(n, 2, seed).unwrap();
            prop_assert_eq!(WeightedGraph::from_json(&g.to_json()).unwrap(), g);
        }
    }
}
