//! Enumeration of small bipartite graphs up to graph isomorphism, and the
//! census that groups the connected ones into algebra-isomorphism classes
//! by certificate.
//!
//! Enumeration walks edge subsets of the complete pattern for every side
//! pair `(m, n)` with `m ≤ n`, keeps the covering (and, where requested,
//! connected) ones, and deduplicates by the canonical graph encoding. The
//! order of results is deterministic and independent of the execution mode.

use std::collections::{BTreeMap, HashSet};

use serde_json::json;
use thiserror::Error;

use crate::graph::{canonical_bytes, BipartiteGraph};
use crate::skeleton::{certificate_hex, derived_structure};

/// Largest edge count the census accepts.
pub const CENSUS_MAX_EDGES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("census bound is {bound} edges, requested {requested}")]
    SizeBoundExceeded { requested: usize, bound: usize },
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance to the next k-combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn covers(m: usize, n: usize, edges: &[(usize, usize)]) -> bool {
    let mut row = vec![false; m];
    let mut col = vec![false; n];
    for &(i, j) in edges {
        row[i] = true;
        col[j] = true;
    }
    row.into_iter().all(|b| b) && col.into_iter().all(|b| b)
}

fn is_connected_indexed(m: usize, n: usize, edges: &[(usize, usize)]) -> bool {
    if m + n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); m + n];
    for &(i, j) in edges {
        adj[i].push(m + j);
        adj[m + j].push(i);
    }
    let mut seen = vec![false; m + n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

fn build_graph(m: usize, n: usize, edges: &[(usize, usize)]) -> BipartiteGraph {
    let u: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
    let v: Vec<String> = (1..=n).map(|j| format!("v{j}")).collect();
    let e: Vec<(&str, &str)> = edges
        .iter()
        .map(|&(i, j)| (u[i].as_str(), v[j].as_str()))
        .collect();
    BipartiteGraph::new(u.iter().map(String::as_str), v.iter().map(String::as_str), e)
        .expect("indexed edges are well-formed")
}

/// Covering (optionally connected) edge subsets of the complete `(m, n)`
/// pattern, in deterministic order, prior to isomorphism deduplication.
fn side_candidates(
    m: usize,
    n: usize,
    max_edges: usize,
    connected: bool,
) -> Vec<BipartiteGraph> {
    let cells: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let e_min = if connected {
        (m + n).saturating_sub(1).max(1)
    } else {
        m.max(n)
    };
    let e_max = (m * n).min(max_edges);
    let mut out = Vec::new();
    let mut edges = Vec::new();
    for e in e_min..=e_max {
        for_each_combination(cells.len(), e, |idx| {
            edges.clear();
            edges.extend(idx.iter().map(|&c| cells[c]));
            if !covers(m, n, &edges) {
                return;
            }
            if connected && !is_connected_indexed(m, n, &edges) {
                return;
            }
            out.push(build_graph(m, n, &edges));
        });
    }
    out
}

fn canonical_keys(candidates: &[BipartiteGraph], parallel: bool) -> Vec<Vec<u8>> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return candidates.par_iter().map(canonical_bytes).collect();
    }
    let _ = parallel;
    candidates.iter().map(canonical_bytes).collect()
}

fn dedup_by_canonical(candidates: Vec<BipartiteGraph>, parallel: bool) -> Vec<BipartiteGraph> {
    let keys = canonical_keys(&candidates, parallel);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (key, g) in keys.into_iter().zip(candidates) {
        if seen.insert(key) {
            out.push(g);
        }
    }
    out
}

fn connected_graphs_impl(
    max_vertices: usize,
    max_edges: usize,
    parallel: bool,
) -> Vec<BipartiteGraph> {
    let mut candidates = Vec::new();
    for m in 1..=max_vertices.saturating_sub(1) {
        for n in m..=(max_vertices - m) {
            candidates.extend(side_candidates(m, n, max_edges, true));
        }
    }
    dedup_by_canonical(candidates, parallel)
}

/// Connected bipartite graphs with at most `max_vertices` vertices and
/// `max_edges` edges, one representative per isomorphism class.
pub fn connected_graphs(max_vertices: usize, max_edges: usize) -> Vec<BipartiteGraph> {
    connected_graphs_impl(max_vertices, max_edges, true)
}

/// Sequential twin of [`connected_graphs`], for benchmarking.
pub fn connected_graphs_seq(max_vertices: usize, max_edges: usize) -> Vec<BipartiteGraph> {
    connected_graphs_impl(max_vertices, max_edges, false)
}

/// Explicitly parallel variant (identical output).
#[cfg(feature = "parallel")]
pub fn connected_graphs_par(max_vertices: usize, max_edges: usize) -> Vec<BipartiteGraph> {
    connected_graphs_impl(max_vertices, max_edges, true)
}

/// All bipartite graphs (disconnected allowed, no isolated vertices) with
/// both sides at most `max_side` and at most `max_edges` edges, one
/// representative per isomorphism class; the empty graph included.
pub fn all_graphs(max_side: usize, max_edges: usize) -> Vec<BipartiteGraph> {
    let mut candidates = vec![BipartiteGraph::new([], [], []).expect("empty graph")];
    for m in 1..=max_side {
        for n in m..=max_side {
            candidates.extend(side_candidates(m, n, max_edges, false));
        }
    }
    dedup_by_canonical(candidates, true)
}

/// One algebra-isomorphism class: all pairwise non-isomorphic graphs of one
/// edge count sharing a certificate.
#[derive(Debug, Clone)]
pub struct CensusClass {
    pub edges: usize,
    pub certificate: String,
    pub members: Vec<BipartiteGraph>,
}

#[derive(Debug, Clone)]
pub struct CensusTable {
    pub max_edges: usize,
    pub classes: Vec<CensusClass>,
}

impl CensusTable {
    pub fn class_of(&self, g: &BipartiteGraph) -> Option<&CensusClass> {
        let cert = certificate_hex(&derived_structure(g));
        self.classes
            .iter()
            .find(|c| c.edges == g.edge_count() && c.certificate == cert)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "max_edges": self.max_edges,
            "class_count": self.classes.len(),
            "classes": self.classes.iter().map(|c| json!({
                "edges": c.edges,
                "certificate": c.certificate,
                "size": c.members.len(),
                "members": c.members.iter()
                    .map(|g| serde_json::to_value(g).expect("graph serializes"))
                    .collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Enumerates connected graphs with up to `max_edges` edges and groups them
/// into algebra classes by certificate and edge count. Class sizes count
/// non-isomorphic graphs.
pub fn census(max_edges: usize) -> Result<CensusTable, CensusError> {
    if max_edges > CENSUS_MAX_EDGES {
        return Err(CensusError::SizeBoundExceeded {
            requested: max_edges,
            bound: CENSUS_MAX_EDGES,
        });
    }
    let graphs = connected_graphs(max_edges + 1, max_edges);
    let mut grouped: BTreeMap<(usize, String), Vec<BipartiteGraph>> = BTreeMap::new();
    for g in graphs {
        let cert = certificate_hex(&derived_structure(&g));
        grouped.entry((g.edge_count(), cert)).or_default().push(g);
    }
    Ok(CensusTable {
        max_edges,
        classes: grouped
            .into_iter()
            .map(|((edges, certificate), members)| CensusClass {
                edges,
                certificate,
                members,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, enumerate_k22, is_graph_isomorphic};

    #[test]
    fn tiny_counts() {
        // one connected graph per edge count at the bottom: a single edge,
        // the 2-edge path, and (with three edges) the 3-path and the claw
        let graphs = connected_graphs(9, 1);
        assert_eq!(graphs.len(), 1);
        let graphs = connected_graphs(9, 2);
        assert_eq!(graphs.len(), 2);
        let graphs = connected_graphs(9, 3);
        assert_eq!(graphs.len(), 4);
    }

    #[test]
    fn members_are_pairwise_non_isomorphic() {
        let graphs = connected_graphs(6, 5);
        for (i, a) in graphs.iter().enumerate() {
            for b in &graphs[i + 1..] {
                assert!(!is_graph_isomorphic(a, b), "{a} ~ {b}");
            }
        }
    }

    #[test]
    fn seq_and_par_agree() {
        let a = connected_graphs_seq(6, 5);
        let b = connected_graphs(6, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn census_bound() {
        assert!(matches!(
            census(9),
            Err(CensusError::SizeBoundExceeded { requested: 9, bound: 8 })
        ));
    }

    #[test]
    fn census_one_edge() {
        let table = census(1).unwrap();
        assert_eq!(table.classes.len(), 1);
        assert_eq!(table.classes[0].members.len(), 1);
    }

    #[test]
    fn four_edge_census_isolates_the_cycle() {
        let table = census(4).unwrap();
        let k22 = complete_bipartite(2, 2);
        let class = table.class_of(&k22).expect("the 4-cycle is in the census");
        assert_eq!(class.members.len(), 1);
        assert!(is_graph_isomorphic(&class.members[0], &k22));
        // it is the only 4-edge class whose member carries a 4-cycle
        for c in table.classes.iter().filter(|c| c.edges == 4) {
            let has_quad = !enumerate_k22(&c.members[0]).is_empty();
            assert_eq!(has_quad, c.certificate == class.certificate);
        }
    }

    #[test]
    fn five_edge_census_joins_pendant_and_disjoint() {
        let pendant = BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2", "v3"],
            [
                ("u1", "v1"),
                ("u1", "v2"),
                ("u2", "v1"),
                ("u2", "v2"),
                ("u1", "v3"),
            ],
        )
        .unwrap();
        let disjoint = BipartiteGraph::new(
            ["u1", "u2", "u3"],
            ["v1", "v2", "v3"],
            [
                ("u1", "v1"),
                ("u1", "v2"),
                ("u2", "v1"),
                ("u2", "v2"),
                ("u3", "v3"),
            ],
        )
        .unwrap();
        let table = census(5).unwrap();
        let class = table.class_of(&pendant).expect("pendant graph has a class");
        assert!(class
            .members
            .iter()
            .any(|g| is_graph_isomorphic(g, &pendant)));
        // the disconnected variant classifies into the same class even
        // though only connected graphs are census members
        let class2 = table.class_of(&disjoint).expect("classifies");
        assert_eq!(class.certificate, class2.certificate);
        assert_eq!(class.edges, class2.edges);
        assert!(!class.members.iter().any(|g| is_graph_isomorphic(g, &disjoint)));
    }

    #[test]
    fn all_graphs_includes_disconnected() {
        let graphs = all_graphs(2, 4);
        // the 2-matching (two disjoint edges) shows up
        let matching = BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2"],
            [("u1", "v1"), ("u2", "v2")],
        )
        .unwrap();
        assert!(graphs.iter().any(|g| is_graph_isomorphic(g, &matching)));
        // and the empty graph leads the list
        assert_eq!(graphs[0].edge_count(), 0);
    }
}
