//! Undirected simple graphs: edge-list ingestion, seeded G(n,p) generation,
//! and the fixed stand-in networks used by the planning experiments.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// An undirected simple graph over nodes `0..node_count`.
///
/// Immutable after construction; shareable across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Builds a graph from unordered node pairs. Rejects self-loops,
    /// duplicate edges, and out-of-range ids.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Param("node_count must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); node_count];
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Param(format!("self-loop on node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::Param(format!(
                    "edge ({a},{b}) out of range for {node_count} nodes"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::Param(format!("duplicate edge ({},{})", e.0, e.1)));
            }
            normalized.push(e);
            adj[a].push(b);
            adj[b].push(a);
        }
        normalized.sort_unstable();
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(SocialGraph {
            node_count,
            edges: normalized,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of friends of `node` (the symbol the click models divide by).
    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }
}

/// Reads a whitespace-separated edge list; `#` starts a comment line.
/// Node count is 1 + the largest id seen.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SocialGraph> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = File::open(path)?;
    let reader = BufReader::new(file);

    let mut edges = Vec::new();
    let mut max_id = 0usize;
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: "expected two node ids".into(),
            })?
            .parse::<usize>()
            .map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("invalid node id in {trimmed:?}"),
            })
        };
        let a = parse(parts.next())?;
        let b = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: "more than two fields".into(),
            });
        }
        if a == b {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("self-loop ({a},{b})"),
            });
        }
        let e = (a.min(b), a.max(b));
        if !seen.insert(e) {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("duplicate edge ({},{})", e.0, e.1),
            });
        }
        max_id = max_id.max(b.max(a));
        edges.push(e);
    }
    if edges.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 0,
            msg: "no edges in file".into(),
        });
    }
    SocialGraph::from_edges(max_id + 1, &edges)
}

/// Writes the graph back out in the same edge-list format.
pub fn save_edge_list(graph: &SocialGraph, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for &(a, b) in graph.edges() {
        writeln!(w, "{a} {b}")?;
    }
    w.flush()?;
    Ok(())
}

/// Seeded Erdős–Rényi G(n,p): each unordered pair is an edge independently
/// with probability `p`. Same (n, p, seed) reproduces the same graph.
pub fn generate_random_graph(n: usize, p: f64, seed: u64) -> Result<SocialGraph> {
    if n == 0 {
        return Err(Error::Param("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Param(format!("edge probability {p} outside [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    SocialGraph::from_edges(n, &edges)
}

/// The SYNTH1 stand-in: 10 nodes, one degree-4 hub (0 joined to 1..4),
/// a 5-cycle over nodes 5..9, and bridge edge {4,5}.
pub fn synth1_standin() -> SocialGraph {
    SocialGraph::from_edges(
        10,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 8),
            (8, 9),
            (5, 9),
        ],
    )
    .expect("fixture is valid")
}

/// SYNTH2 stand-in: 2,000 nodes, mean degree ≈ 4, fixed seed.
pub fn synth2_standin() -> SocialGraph {
    generate_random_graph(2000, 4.0 / 1999.0, 1002).expect("fixture parameters are valid")
}

/// SYNTH3 stand-in: 4,500 nodes, mean degree ≈ 4, fixed seed.
pub fn synth3_standin() -> SocialGraph {
    generate_random_graph(4500, 4.0 / 4499.0, 1003).expect("fixture parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), contents).unwrap();
        f
    }

    #[test]
    fn path_graph_degrees() {
        let f = write_temp("0 1\n1 2\n");
        let g = load_edge_list(f.path()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(
            (0..3).map(|i| g.degree(i)).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let f = write_temp("0 0\n");
        let err = load_edge_list(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":1:"), "{msg}");
        assert!(msg.contains("self-loop"), "{msg}");
    }

    #[test]
    fn duplicate_edge_rejected() {
        let f = write_temp("0 1\n1 0\n");
        let err = load_edge_list(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let f = write_temp("# header\n\n0 1\n");
        let g = load_edge_list(f.path()).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn gnp_empty_and_complete() {
        let g = generate_random_graph(5, 0.0, 1).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 0);
        let g = generate_random_graph(4, 1.0, 7).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn gnp_edge_count_within_four_sigma() {
        // C(2000,2)*0.002 mean, binomial variance
        let g = generate_random_graph(2000, 0.002, 42).unwrap();
        let pairs: f64 = 2000.0 * 1999.0 / 2.0;
        let mean = pairs * 0.002;
        let sd = (pairs * 0.002 * 0.998).sqrt();
        let m = g.edge_count() as f64;
        assert!((m - mean).abs() < 4.0 * sd, "edges {m} vs mean {mean}");
    }

    #[test]
    fn gnp_deterministic() {
        let a = generate_random_graph(100, 0.1, 9).unwrap();
        let b = generate_random_graph(100, 0.1, 9).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn degree_sum_identity() {
        for seed in 0..5 {
            let g = generate_random_graph(50, 0.15, seed).unwrap();
            let sum: usize = (0..g.node_count()).map(|i| g.degree(i)).sum();
            assert_eq!(sum, 2 * g.edge_count());
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_random_graph(30, 0.2, 3).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_edge_list(&g, f.path()).unwrap();
        let back = load_edge_list(f.path()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn synth1_shape() {
        let g = synth1_standin();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.degree(5), 3);
        for n in [6, 7, 8, 9] {
            assert_eq!(g.degree(n), 2);
        }
    }

    #[test]
    fn synth1_fixture_file_matches_builtin() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/synth1.edges");
        let g = load_edge_list(path).unwrap();
        assert_eq!(g, synth1_standin());
    }

    #[test]
    fn bad_probability_rejected() {
        assert!(generate_random_graph(5, 1.5, 0).is_err());
        assert!(generate_random_graph(5, -0.1, 0).is_err());
    }
}
