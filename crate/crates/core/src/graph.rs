//! Finite bipartite graphs with a fixed bipartition, and the subgraph
//! machinery the rest of the crate is built on: 4-cycle (`K_{2,2}`)
//! enumeration, loose edges, hypergraph import, and structural reductions.
//!
//! Vertex labels are opaque strings; internal indices follow input order so
//! that JSON round-trips and edge orderings stay stable.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("edge {{{0}, {1}}} does not join the two sides")]
    CrossSideEdge(String, String),
    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge {{{0}, {1}}}")]
    UnknownEdge(String, String),
    #[error("edge {{{0}, {1}}} lies in a 4-cycle, cannot split it off")]
    EdgeNotLoose(String, String),
}

/// Which side of the bipartition a vertex lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    U,
    V,
}

/// A bipartite graph `(U, V, E)`. Edges always join a `U`-vertex to a
/// `V`-vertex and are stored as `(u_index, v_index)` pairs in lexicographic
/// order, which is the canonical edge ordering used everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct BipartiteGraph {
    u_labels: Vec<String>,
    v_labels: Vec<String>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    u: Vec<String>,
    v: Vec<String>,
    e: Vec<(String, String)>,
}

impl TryFrom<RawGraph> for BipartiteGraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        let edges: Vec<(&str, &str)> = raw.e.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        BipartiteGraph::new(
            raw.u.iter().map(String::as_str),
            raw.v.iter().map(String::as_str),
            edges,
        )
    }
}

impl From<BipartiteGraph> for RawGraph {
    fn from(g: BipartiteGraph) -> RawGraph {
        RawGraph {
            e: g.edges
                .iter()
                .map(|&(i, j)| (g.u_labels[i].clone(), g.v_labels[j].clone()))
                .collect(),
            u: g.u_labels,
            v: g.v_labels,
        }
    }
}

impl fmt::Display for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bipartite graph (|U|={}, |V|={}, |E|={})",
            self.u_labels.len(),
            self.v_labels.len(),
            self.edges.len()
        )
    }
}

impl BipartiteGraph {
    /// Builds a graph from labels and label-pair edges. Edges may list the
    /// endpoints in either order; parallel edges collapse to one.
    pub fn new<'a, I, J, K>(u_labels: I, v_labels: J, edges: K) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = &'a str>,
        J: IntoIterator<Item = &'a str>,
        K: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let u_labels: Vec<String> = u_labels.into_iter().map(str::to_owned).collect();
        let v_labels: Vec<String> = v_labels.into_iter().map(str::to_owned).collect();

        let mut seen = HashSet::new();
        for l in u_labels.iter().chain(v_labels.iter()) {
            if !seen.insert(l.clone()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let u_index: BTreeMap<&str, usize> =
            u_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let v_index: BTreeMap<&str, usize> =
            v_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let pair = match (u_index.get(a), v_index.get(b)) {
                (Some(&i), Some(&j)) => (i, j),
                _ => match (u_index.get(b), v_index.get(a)) {
                    (Some(&i), Some(&j)) => (i, j),
                    _ => {
                        // Same-side endpoints are a bipartiteness violation;
                        // anything else is an unknown label.
                        let a_known = u_index.contains_key(a) || v_index.contains_key(a);
                        let b_known = u_index.contains_key(b) || v_index.contains_key(b);
                        if a_known && b_known {
                            return Err(GraphError::CrossSideEdge(a.to_owned(), b.to_owned()));
                        }
                        let missing = if a_known { b } else { a };
                        return Err(GraphError::UnknownEndpoint(missing.to_owned()));
                    }
                },
            };
            edge_set.insert(pair);
        }

        Ok(BipartiteGraph {
            u_labels,
            v_labels,
            edges: edge_set.into_iter().collect(),
        })
    }

    pub fn u_labels(&self) -> &[String] {
        &self.u_labels
    }

    pub fn v_labels(&self) -> &[String] {
        &self.v_labels
    }

    pub fn u_len(&self) -> usize {
        self.u_labels.len()
    }

    pub fn v_len(&self) -> usize {
        self.v_labels.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.u_labels.len() + self.v_labels.len()
    }

    /// Edges as `(u_index, v_index)` pairs in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u, v)).is_ok()
    }

    /// Canonical index of the edge `(u, v)`, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u, v)).ok()
    }

    /// Canonical index of the edge given by two endpoint labels (in either
    /// order).
    pub fn edge_index_by_labels(&self, a: &str, b: &str) -> Result<usize, GraphError> {
        let (sa, ia) = self.vertex(a)?;
        let (sb, ib) = self.vertex(b)?;
        let (u, v) = match (sa, sb) {
            (Side::U, Side::V) => (ia, ib),
            (Side::V, Side::U) => (ib, ia),
            _ => return Err(GraphError::UnknownEdge(a.to_owned(), b.to_owned())),
        };
        self.edge_index(u, v)
            .ok_or_else(|| GraphError::UnknownEdge(a.to_owned(), b.to_owned()))
    }

    pub fn edge_labels(&self, edge: usize) -> (&str, &str) {
        let (u, v) = self.edges[edge];
        (&self.u_labels[u], &self.v_labels[v])
    }

    /// The `"u,v"` string form used in JSON interfaces.
    pub fn edge_string(&self, edge: usize) -> String {
        let (u, v) = self.edge_labels(edge);
        format!("{u},{v}")
    }

    /// Looks a vertex up by label.
    pub fn vertex(&self, label: &str) -> Result<(Side, usize), GraphError> {
        if let Some(i) = self.u_labels.iter().position(|l| l == label) {
            return Ok((Side::U, i));
        }
        if let Some(j) = self.v_labels.iter().position(|l| l == label) {
            return Ok((Side::V, j));
        }
        Err(GraphError::UnknownVertex(label.to_owned()))
    }

    pub fn vertex_label(&self, side: Side, index: usize) -> &str {
        match side {
            Side::U => &self.u_labels[index],
            Side::V => &self.v_labels[index],
        }
    }

    /// Global vertex index (all of `U` first, then all of `V`); the indexing
    /// used by representations.
    pub fn global_index(&self, side: Side, index: usize) -> usize {
        match side {
            Side::U => index,
            Side::V => self.u_labels.len() + index,
        }
    }

    pub fn degree(&self, side: Side, index: usize) -> usize {
        match side {
            Side::U => self.edges.iter().filter(|&&(u, _)| u == index).count(),
            Side::V => self.edges.iter().filter(|&&(_, v)| v == index).count(),
        }
    }

    fn neighbor_indices(&self, side: Side, index: usize) -> Vec<usize> {
        match side {
            Side::U => self
                .edges
                .iter()
                .filter(|&&(u, _)| u == index)
                .map(|&(_, v)| v)
                .collect(),
            Side::V => self
                .edges
                .iter()
                .filter(|&&(_, v)| v == index)
                .map(|&(u, _)| u)
                .collect(),
        }
    }

    /// Neighbor set of a vertex, as labels in canonical order.
    pub fn neighbors(&self, label: &str) -> Result<Vec<String>, GraphError> {
        let (side, idx) = self.vertex(label)?;
        let opposite = match side {
            Side::U => &self.v_labels,
            Side::V => &self.u_labels,
        };
        Ok(self
            .neighbor_indices(side, idx)
            .into_iter()
            .map(|i| opposite[i].clone())
            .collect())
    }

    fn adjacent(&self, a: (Side, usize), b: (Side, usize)) -> bool {
        match (a, b) {
            ((Side::U, u), (Side::V, v)) | ((Side::V, v), (Side::U, u)) => self.has_edge(u, v),
            _ => false,
        }
    }

    /// Whether consecutive entries of `labels` are adjacent. A single vertex
    /// counts as a path; revisits are allowed.
    pub fn is_path(&self, labels: &[&str]) -> Result<bool, GraphError> {
        let verts: Vec<(Side, usize)> = labels
            .iter()
            .map(|l| self.vertex(l))
            .collect::<Result<_, _>>()?;
        if verts.is_empty() {
            return Ok(false);
        }
        Ok(verts.windows(2).all(|w| self.adjacent(w[0], w[1])))
    }

    /// Vertex-induced subgraph: the given vertices and every edge between
    /// them. Label order is inherited from `self`.
    pub fn induced_by_vertices(&self, labels: &[&str]) -> Result<BipartiteGraph, GraphError> {
        let mut keep_u = vec![false; self.u_labels.len()];
        let mut keep_v = vec![false; self.v_labels.len()];
        for l in labels {
            match self.vertex(l)? {
                (Side::U, i) => keep_u[i] = true,
                (Side::V, j) => keep_v[j] = true,
            }
        }
        let u: Vec<&str> = self
            .u_labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep_u[i])
            .map(|(_, l)| l.as_str())
            .collect();
        let v: Vec<&str> = self
            .v_labels
            .iter()
            .enumerate()
            .filter(|&(j, _)| keep_v[j])
            .map(|(_, l)| l.as_str())
            .collect();
        let e: Vec<(&str, &str)> = self
            .edges
            .iter()
            .filter(|&&(i, j)| keep_u[i] && keep_v[j])
            .map(|&(i, j)| (self.u_labels[i].as_str(), self.v_labels[j].as_str()))
            .collect();
        BipartiteGraph::new(u, v, e)
    }

    /// Edge-induced subgraph: exactly the given edges on the union of their
    /// endpoints.
    pub fn induced_by_edges(&self, edge_indices: &[usize]) -> Result<BipartiteGraph, GraphError> {
        let mut keep_u = vec![false; self.u_labels.len()];
        let mut keep_v = vec![false; self.v_labels.len()];
        let mut chosen = BTreeSet::new();
        for &e in edge_indices {
            if e >= self.edges.len() {
                return Err(GraphError::UnknownEdge(format!("#{e}"), String::new()));
            }
            let (i, j) = self.edges[e];
            keep_u[i] = true;
            keep_v[j] = true;
            chosen.insert((i, j));
        }
        let u: Vec<&str> = self
            .u_labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep_u[i])
            .map(|(_, l)| l.as_str())
            .collect();
        let v: Vec<&str> = self
            .v_labels
            .iter()
            .enumerate()
            .filter(|&(j, _)| keep_v[j])
            .map(|(_, l)| l.as_str())
            .collect();
        let e: Vec<(&str, &str)> = chosen
            .iter()
            .map(|&(i, j)| (self.u_labels[i].as_str(), self.v_labels[j].as_str()))
            .collect();
        BipartiteGraph::new(u, v, e)
    }

    /// Deletes one edge, keeping all vertices (isolated vertices are fine;
    /// their projections are forced to zero anyway).
    pub fn delete_edge(&self, edge: usize) -> BipartiteGraph {
        let mut g = self.clone();
        g.edges.remove(edge);
        g
    }

    /// True when the graph is connected as an undirected graph (and both
    /// sides are nonempty, or the graph is a single vertex).
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let nu = self.u_labels.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            let nbrs: Vec<usize> = if x < nu {
                self.neighbor_indices(Side::U, x)
                    .into_iter()
                    .map(|j| nu + j)
                    .collect()
            } else {
                self.neighbor_indices(Side::V, x - nu)
            };
            for y in nbrs {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// GraphViz export; `U`-side vertices are drawn filled, `V`-side hollow.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph g {\n  node [shape=circle];\n");
        for l in &self.u_labels {
            out.push_str(&format!(
                "  \"{l}\" [style=filled, fillcolor=black, fontcolor=white];\n"
            ));
        }
        for l in &self.v_labels {
            out.push_str(&format!("  \"{l}\" [style=solid];\n"));
        }
        for &(i, j) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\";\n",
                self.u_labels[i], self.v_labels[j]
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The complete bipartite graph `K_{m,n}` with labels `u1..um`, `v1..vn`.
pub fn complete_bipartite(m: usize, n: usize) -> BipartiteGraph {
    let u: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
    let v: Vec<String> = (1..=n).map(|j| format!("v{j}")).collect();
    let mut e = Vec::new();
    for ul in &u {
        for vl in &v {
            e.push((ul.as_str(), vl.as_str()));
        }
    }
    BipartiteGraph::new(u.iter().map(String::as_str), v.iter().map(String::as_str), e).unwrap()
}

/// A 4-edge subgraph forming a 4-cycle, together with its partition into the
/// two pairs of opposite (vertex-disjoint) edges.
///
/// `members` are canonical edge indices in ascending order; `pairing` holds
/// the two opposite pairs, each sorted, ordered by first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub members: [usize; 4],
    pub pairing: [[usize; 2]; 2],
}

impl Quadruple {
    fn new(members: [usize; 4], mut pairing: [[usize; 2]; 2]) -> Self {
        let mut members = members;
        members.sort_unstable();
        for p in pairing.iter_mut() {
            p.sort_unstable();
        }
        pairing.sort_unstable();
        Quadruple { members, pairing }
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.members.contains(&edge)
    }

    /// The opposite partner of `edge` within this 4-cycle.
    pub fn opposite(&self, edge: usize) -> Option<usize> {
        for p in &self.pairing {
            if p[0] == edge {
                return Some(p[1]);
            }
            if p[1] == edge {
                return Some(p[0]);
            }
        }
        None
    }

    /// The two members adjacent to `edge` (sharing a vertex with it).
    pub fn adjacent_pair(&self, edge: usize) -> Option<[usize; 2]> {
        let opp = self.opposite(edge)?;
        let mut adj = self.members.iter().copied().filter(|&e| e != edge && e != opp);
        Some([adj.next()?, adj.next()?])
    }
}

/// All 4-cycles of `g`, in deterministic order.
///
/// For each pair of `U`-vertices every pair of common neighbors contributes
/// one 4-cycle, so each `K_{2,2}` subgraph is listed exactly once.
pub fn enumerate_k22(g: &BipartiteGraph) -> Vec<Quadruple> {
    let nu = g.u_len();
    let mut quads = Vec::new();
    for u1 in 0..nu {
        let n1 = g.neighbor_indices(Side::U, u1);
        for u2 in (u1 + 1)..nu {
            let n2: Vec<usize> = g
                .neighbor_indices(Side::U, u2)
                .into_iter()
                .filter(|v| n1.contains(v))
                .collect();
            for (a, &v1) in n2.iter().enumerate() {
                for &v2 in &n2[a + 1..] {
                    let e11 = g.edge_index(u1, v1).unwrap();
                    let e12 = g.edge_index(u1, v2).unwrap();
                    let e21 = g.edge_index(u2, v1).unwrap();
                    let e22 = g.edge_index(u2, v2).unwrap();
                    // Opposite pairs are the vertex-disjoint ones.
                    quads.push(Quadruple::new([e11, e12, e21, e22], [[e11, e22], [e12, e21]]));
                }
            }
        }
    }
    quads.sort_unstable_by_key(|q| q.members);
    quads
}

/// Checks that `q` really is a 4-cycle of `g` with the correct opposite-edge
/// pairing.
pub fn is_quadruple_of(g: &BipartiteGraph, q: &Quadruple) -> bool {
    enumerate_k22(g).iter().any(|p| p == q)
}

/// Edge indices of `g` lying in no 4-cycle.
pub fn loose_edges(g: &BipartiteGraph) -> Vec<usize> {
    let mut covered = vec![false; g.edge_count()];
    for q in enumerate_k22(g) {
        for e in q.members {
            covered[e] = true;
        }
    }
    (0..g.edge_count()).filter(|&e| !covered[e]).collect()
}

/// Whether `g` contains a complete `K_{2,3}` in either orientation, i.e. two
/// vertices on one side with at least three common neighbors.
pub fn contains_k23(g: &BipartiteGraph) -> bool {
    let common_ge3 = |side: Side, n: usize| {
        for a in 0..n {
            let na = g.neighbor_indices(side, a);
            for b in (a + 1)..n {
                let common = g
                    .neighbor_indices(side, b)
                    .into_iter()
                    .filter(|x| na.contains(x))
                    .count();
                if common >= 3 {
                    return true;
                }
            }
        }
        false
    };
    common_ge3(Side::U, g.u_len()) || common_ge3(Side::V, g.v_len())
}

/// An undirected hypergraph: vertices, hyperedges, and a source map
/// assigning each hyperedge its nonempty vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: Vec<String>,
    pub hedges: Vec<String>,
    pub source: BTreeMap<String, Vec<String>>,
}

/// Incidence bipartite graph of a hypergraph: vertices on the `U` side,
/// hyperedges on the `V` side, joined when the vertex lies in the
/// hyperedge's source set.
pub fn from_hypergraph(h: &Hypergraph) -> Result<BipartiteGraph, GraphError> {
    let vert_set: HashSet<&str> = h.vertices.iter().map(String::as_str).collect();
    let hedge_set: HashSet<&str> = h.hedges.iter().map(String::as_str).collect();
    let mut edges = Vec::new();
    for (hedge, srcs) in &h.source {
        if !hedge_set.contains(hedge.as_str()) {
            return Err(GraphError::UnknownVertex(hedge.clone()));
        }
        if srcs.is_empty() {
            return Err(GraphError::UnknownEndpoint(hedge.clone()));
        }
        for s in srcs {
            if !vert_set.contains(s.as_str()) {
                return Err(GraphError::UnknownVertex(s.clone()));
            }
            edges.push((s.as_str(), hedge.as_str()));
        }
    }
    for hedge in &h.hedges {
        match h.source.get(hedge) {
            Some(srcs) if !srcs.is_empty() => {}
            _ => return Err(GraphError::UnknownEndpoint(hedge.clone())),
        }
    }
    BipartiteGraph::new(
        h.vertices.iter().map(String::as_str),
        h.hedges.iter().map(String::as_str),
        edges,
    )
}

/// Splits a scalar direct summand off along a loose edge: returns the graph
/// with `edge` deleted plus the summand count increment (always one).
pub fn reduce_loose_edge(
    g: &BipartiteGraph,
    edge: usize,
) -> Result<(BipartiteGraph, usize), GraphError> {
    if edge >= g.edge_count() {
        return Err(GraphError::UnknownEdge(format!("#{edge}"), String::new()));
    }
    if !loose_edges(g).contains(&edge) {
        let (a, b) = g.edge_labels(edge);
        return Err(GraphError::EdgeNotLoose(a.to_owned(), b.to_owned()));
    }
    Ok((g.delete_edge(edge), 1))
}

/// Iterates [`reduce_loose_edge`] until no loose edge remains; returns the
/// reduced graph and the accumulated scalar-summand count.
pub fn reduce_all_loose(g: &BipartiteGraph) -> (BipartiteGraph, usize) {
    let mut g = g.clone();
    let mut count = 0;
    loop {
        let loose = loose_edges(&g);
        match loose.first() {
            None => return (g, count),
            Some(&e) => {
                let (next, inc) = reduce_loose_edge(&g, e).expect("edge taken from loose list");
                g = next;
                count += inc;
            }
        }
    }
}

/// A witnessing pair of side bijections for a graph isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphIsomorphism {
    /// Maps `g`-side-`U` labels to labels of `h` (of side `U`, or side `V`
    /// when `sides_swapped`).
    pub u_map: Vec<(String, String)>,
    pub v_map: Vec<(String, String)>,
    pub sides_swapped: bool,
}

/// Bipartite graph isomorphism allowing the side swap. Returns a witness.
///
/// Degree-refinement colors seed a plain backtracking search; no canonical
/// form is involved.
pub fn graph_isomorphism(g: &BipartiteGraph, h: &BipartiteGraph) -> Option<GraphIsomorphism> {
    if let Some((um, vm)) = oriented_isomorphism(g, h, false) {
        return Some(GraphIsomorphism {
            u_map: um,
            v_map: vm,
            sides_swapped: false,
        });
    }
    if let Some((um, vm)) = oriented_isomorphism(g, h, true) {
        return Some(GraphIsomorphism {
            u_map: um,
            v_map: vm,
            sides_swapped: true,
        });
    }
    None
}

pub fn is_graph_isomorphic(g: &BipartiteGraph, h: &BipartiteGraph) -> bool {
    graph_isomorphism(g, h).is_some()
}

/// Assigns each signature its rank in the sorted order of all distinct
/// signatures across the structures, so colors are canonical (independent
/// of input labeling) and comparable across the structures.
fn rank_colors<K: Ord + Clone>(sigs: &[Vec<K>]) -> Vec<Vec<u32>> {
    let mut dict: BTreeMap<&K, u32> = BTreeMap::new();
    for group in sigs {
        for s in group {
            dict.insert(s, 0);
        }
    }
    for (rank, v) in dict.values_mut().enumerate() {
        *v = rank as u32;
    }
    sigs.iter()
        .map(|group| group.iter().map(|s| dict[s]).collect())
        .collect()
}

/// Iterative color refinement on both graphs at once, colors comparable
/// across the two. Initial color is (side, degree).
fn refine_colors(
    adj: &[Vec<Vec<usize>>; 2],
    sides: &[Vec<u8>; 2],
) -> [Vec<u32>; 2] {
    let seed: Vec<Vec<(u8, usize)>> = (0..2)
        .map(|gi| {
            (0..sides[gi].len())
                .map(|x| (sides[gi][x], adj[gi][x].len()))
                .collect()
        })
        .collect();
    let mut colors = rank_colors(&seed);
    loop {
        let sigs: Vec<Vec<(u32, Vec<u32>)>> = (0..2)
            .map(|gi| {
                (0..colors[gi].len())
                    .map(|x| {
                        let mut nbr: Vec<u32> =
                            adj[gi][x].iter().map(|&y| colors[gi][y]).collect();
                        nbr.sort_unstable();
                        (colors[gi][x], nbr)
                    })
                    .collect()
            })
            .collect();
        let next = rank_colors(&sigs);
        if next == colors {
            return [colors.remove(0), colors.pop().unwrap()];
        }
        colors = next;
    }
}

type LabelMap = Vec<(String, String)>;

fn oriented_isomorphism(
    g: &BipartiteGraph,
    h: &BipartiteGraph,
    swap: bool,
) -> Option<(LabelMap, LabelMap)> {
    let (h_u, h_v): (Vec<&String>, Vec<&String>) = if swap {
        (h.v_labels.iter().collect(), h.u_labels.iter().collect())
    } else {
        (h.u_labels.iter().collect(), h.v_labels.iter().collect())
    };
    if g.u_len() != h_u.len() || g.v_len() != h_v.len() || g.edge_count() != h.edge_count() {
        return None;
    }
    let nu = g.u_len();
    let nv = g.v_len();

    // Flat adjacency over global indices (U first, then V) for both graphs,
    // with h's sides swapped when requested.
    let flat = |edges: &[(usize, usize)], nu: usize, nv: usize, swap: bool| {
        let (nu2, nv2) = if swap { (nv, nu) } else { (nu, nv) };
        let mut adj = vec![Vec::new(); nu2 + nv2];
        for &(i, j) in edges {
            let (a, b) = if swap { (j, nu2 + i) } else { (i, nu2 + j) };
            adj[a].push(b);
            adj[b].push(a);
        }
        let sides: Vec<u8> = (0..nu2 + nv2).map(|x| u8::from(x >= nu2)).collect();
        (adj, sides)
    };
    let (adj_g, sides_g) = flat(&g.edges, g.u_len(), g.v_len(), false);
    let (adj_h, sides_h) = flat(&h.edges, h.u_len(), h.v_len(), swap);

    let colors = refine_colors(&[adj_g.clone(), adj_h.clone()], &[sides_g, sides_h]);
    let mut hist: BTreeMap<u32, i64> = BTreeMap::new();
    for &c in &colors[0] {
        *hist.entry(c).or_insert(0) += 1;
    }
    for &c in &colors[1] {
        *hist.entry(c).or_insert(0) -= 1;
    }
    if hist.values().any(|&d| d != 0) {
        return None;
    }

    // Backtracking over global vertices: all of U, then all of V, adjacency
    // checked against previously assigned vertices.
    let n = nu + nv;
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    struct Search<'a> {
        n: usize,
        nu: usize,
        adj_g: &'a [Vec<usize>],
        adj_h: &'a [Vec<usize>],
        colors: &'a [Vec<u32>; 2],
    }
    fn bt(s: &Search, x: usize, assign: &mut Vec<Option<usize>>, used: &mut Vec<bool>) -> bool {
        if x == s.n {
            return true;
        }
        let side_ok = |y: usize| (x < s.nu) == (y < s.nu);
        for y in 0..s.n {
            if used[y] || !side_ok(y) || s.colors[0][x] != s.colors[1][y] {
                continue;
            }
            let consistent = (0..x).all(|x2| {
                let y2 = assign[x2].unwrap();
                s.adj_g[x].contains(&x2) == s.adj_h[y].contains(&y2)
            });
            if !consistent {
                continue;
            }
            assign[x] = Some(y);
            used[y] = true;
            if bt(s, x + 1, assign, used) {
                return true;
            }
            assign[x] = None;
            used[y] = false;
        }
        false
    }
    let search = Search {
        n,
        nu,
        adj_g: &adj_g,
        adj_h: &adj_h,
        colors: &colors,
    };
    if !bt(&search, 0, &mut assign, &mut used) {
        return None;
    }

    let u_map = (0..nu)
        .map(|i| (g.u_labels[i].clone(), h_u[assign[i].unwrap()].clone()))
        .collect();
    let v_map = (0..nv)
        .map(|j| {
            (
                g.v_labels[j].clone(),
                h_v[assign[nu + j].unwrap() - nu].clone(),
            )
        })
        .collect();
    Some((u_map, v_map))
}

/// Canonical byte encoding of a bipartite graph up to isomorphism (including
/// the side swap): equal bytes iff isomorphic. Intended for desk-scale
/// deduplication; the minimization runs over refinement-class-preserving
/// vertex orderings.
pub fn canonical_bytes(g: &BipartiteGraph) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    let m = g.u_len();
    let n = g.v_len();
    let orientations: &[bool] = if m == n { &[false, true] } else { &[m > n] };
    for &swap in orientations {
        let enc = min_encoding_oriented(g, swap);
        best = Some(match best {
            None => enc,
            Some(b) => b.min(enc),
        });
    }
    best.unwrap()
}

fn min_encoding_oriented(g: &BipartiteGraph, swap: bool) -> Vec<u8> {
    let (m, n) = if swap {
        (g.v_len(), g.u_len())
    } else {
        (g.u_len(), g.v_len())
    };
    // adjacency rows over the oriented sides
    let row = |i: usize, j: usize| -> bool {
        if swap {
            g.has_edge(j, i)
        } else {
            g.has_edge(i, j)
        }
    };

    let flat = {
        let mut adj = vec![Vec::new(); m + n];
        for i in 0..m {
            for j in 0..n {
                if row(i, j) {
                    adj[i].push(m + j);
                    adj[m + j].push(i);
                }
            }
        }
        adj
    };
    let sides: Vec<u8> = (0..m + n).map(|x| u8::from(x >= m)).collect();
    let colors = refine_colors(&[flat.clone(), flat], &[sides.clone(), sides])[0].clone();

    // Vertices grouped per side by color; permutations only within classes.
    let classes = |lo: usize, hi: usize| -> Vec<Vec<usize>> {
        let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (x, &c) in colors.iter().enumerate().take(hi).skip(lo) {
            by_color.entry(c).or_default().push(x);
        }
        by_color.into_values().collect()
    };
    let u_classes = classes(0, m);
    let v_classes = classes(m, m + n);

    let mut best: Option<Vec<u8>> = None;
    let mut u_order: Vec<usize> = Vec::with_capacity(m);
    permute_classes(&u_classes, 0, &mut u_order, &mut |u_order| {
        let mut v_order: Vec<usize> = Vec::with_capacity(n);
        permute_classes(&v_classes, 0, &mut v_order, &mut |v_order| {
            let mut enc = Vec::with_capacity(2 + m * n);
            enc.push(m as u8);
            enc.push(n as u8);
            for &i in u_order.iter() {
                for &jj in v_order.iter() {
                    enc.push(u8::from(row(i, jj - m)));
                }
            }
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        });
    });
    best.unwrap_or_else(|| vec![m as u8, n as u8])
}

/// Enumerates all orderings that permute each class internally, classes kept
/// in order.
fn permute_classes(
    classes: &[Vec<usize>],
    k: usize,
    prefix: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if k == classes.len() {
        visit(prefix);
        return;
    }
    let mut items = classes[k].clone();
    permute_within(&mut items, 0, &mut |perm| {
        let len = prefix.len();
        prefix.extend_from_slice(perm);
        permute_classes(classes, k + 1, prefix, visit);
        prefix.truncate(len);
    });
}

fn permute_within(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_within(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        complete_bipartite(2, 2)
    }

    fn single_edge() -> BipartiteGraph {
        BipartiteGraph::new(["u"], ["v"], [("u", "v")]).unwrap()
    }

    /// Path u1 - v1 - u2 - v2.
    fn path3() -> BipartiteGraph {
        BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2"],
            [("u1", "v1"), ("u2", "v1"), ("u2", "v2")],
        )
        .unwrap()
    }

    fn k22_pendant() -> BipartiteGraph {
        BipartiteGraph::new(
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
        .unwrap()
    }

    #[test]
    fn new_graph_normalizes_and_validates() {
        let g = k22();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.edges(), &[(0, 0), (0, 1), (1, 0), (1, 1)]);

        let single = single_edge();
        assert_eq!(single.edge_count(), 1);

        let err = BipartiteGraph::new(["u1", "u2"], ["v1"], [("u1", "u2")]).unwrap_err();
        assert_eq!(err, GraphError::CrossSideEdge("u1".into(), "u2".into()));

        let err = BipartiteGraph::new(["u", "u"], ["v"], []).unwrap_err();
        assert_eq!(err, GraphError::DuplicateLabel("u".into()));

        let err = BipartiteGraph::new(["u"], ["v"], [("u", "w")]).unwrap_err();
        assert_eq!(err, GraphError::UnknownEndpoint("w".into()));
    }

    #[test]
    fn neighbors_match_definition() {
        assert_eq!(k22().neighbors("u1").unwrap(), vec!["v1", "v2"]);
        assert_eq!(single_edge().neighbors("u").unwrap(), vec!["v"]);
        // direct enumeration on K_{2,3}
        assert_eq!(
            complete_bipartite(2, 3).neighbors("v1").unwrap(),
            vec!["u1", "u2"]
        );
        assert!(k22().neighbors("nope").is_err());
    }

    #[test]
    fn induced_subgraphs() {
        let g = k22();
        assert_eq!(g.induced_by_vertices(&["u1", "u2", "v1", "v2"]).unwrap(), g);
        let e = g.induced_by_vertices(&["u1", "v1"]).unwrap();
        assert_eq!(e.edge_count(), 1);
        let k23 = complete_bipartite(2, 3);
        let sub = k23.induced_by_vertices(&["u1", "u2", "v1", "v2"]).unwrap();
        assert!(is_graph_isomorphic(&sub, &k22()));

        // edge-induced
        assert!(is_graph_isomorphic(&g.induced_by_edges(&[0, 1, 2, 3]).unwrap(), &g));
        let two = g.induced_by_edges(&[0, 3]).unwrap(); // {u1,v1}, {u2,v2}
        assert_eq!(two.edge_count(), 2);
        assert_eq!(two.vertex_count(), 4);
        let wedge = g.induced_by_edges(&[0, 1]).unwrap(); // share u1
        assert_eq!(wedge.edge_count(), 2);
        assert_eq!(wedge.vertex_count(), 3);
        assert!(g.induced_by_edges(&[7]).is_err());
    }

    #[test]
    fn graph_isomorphism_basics() {
        let relabeled =
            BipartiteGraph::new(["a", "b"], ["c", "d"], [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])
                .unwrap();
        assert!(is_graph_isomorphic(&k22(), &relabeled));
        // side swap
        assert!(is_graph_isomorphic(
            &complete_bipartite(2, 3),
            &complete_bipartite(3, 2)
        ));
        // degree sequences differ
        let four_disjoint = BipartiteGraph::new(
            ["a1", "a2", "a3", "a4"],
            ["b1", "b2", "b3", "b4"],
            [("a1", "b1"), ("a2", "b2"), ("a3", "b3"), ("a4", "b4")],
        )
        .unwrap();
        assert!(!is_graph_isomorphic(&k22(), &four_disjoint));
        // witness is a genuine pair of bijections
        let w = graph_isomorphism(&k22(), &relabeled).unwrap();
        assert!(!w.sides_swapped);
        assert_eq!(w.u_map.len(), 2);
        assert_eq!(w.v_map.len(), 2);
    }

    #[test]
    fn paths() {
        let g = k22();
        assert!(g.is_path(&["u1", "v1", "u2"]).unwrap());
        assert!(!g.is_path(&["u1", "u2"]).unwrap());
        let s = single_edge();
        assert!(s.is_path(&["u", "v", "u", "v"]).unwrap());
        assert!(g.is_path(&["u1", "w"]).is_err());
    }

    #[test]
    fn k22_enumeration_ground_truth() {
        let quads = enumerate_k22(&k22());
        assert_eq!(quads.len(), 1);
        // e1={u1,v1}, e2={u1,v2}, e3={u2,v1}, e4={u2,v2}; opposite pairs
        // {e1,e4} and {e2,e3}.
        assert_eq!(quads[0].members, [0, 1, 2, 3]);
        assert_eq!(quads[0].pairing, [[0, 3], [1, 2]]);

        assert!(enumerate_k22(&single_edge()).is_empty());
        assert_eq!(enumerate_k22(&complete_bipartite(3, 3)).len(), 9);
    }

    /// Independent 4-subset oracle: an edge set of size four induces a
    /// 4-cycle iff it has exactly two distinct endpoints per side and all
    /// four combinations present.
    fn brute_force_quad_count(g: &BipartiteGraph) -> usize {
        let m = g.edge_count();
        let mut count = 0;
        for a in 0..m {
            for b in (a + 1)..m {
                for c in (b + 1)..m {
                    for d in (c + 1)..m {
                        let sub = g.induced_by_edges(&[a, b, c, d]).unwrap();
                        if is_graph_isomorphic(&sub, &complete_bipartite(2, 2)) {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn k22_counts_match_brute_force() {
        for m in 1..=4 {
            for n in 1..=4 {
                let g = complete_bipartite(m, n);
                let expected = (m * (m - 1) / 2) * (n * (n - 1) / 2);
                assert_eq!(enumerate_k22(&g).len(), expected, "K_{{{m},{n}}}");
                assert_eq!(brute_force_quad_count(&g), expected, "K_{{{m},{n}}} oracle");
            }
        }
    }

    #[test]
    fn quadruple_structure_is_valid() {
        for g in [k22(), complete_bipartite(3, 3), k22_pendant()] {
            for q in enumerate_k22(&g) {
                let sub = g.induced_by_edges(&q.members).unwrap();
                assert!(is_graph_isomorphic(&sub, &complete_bipartite(2, 2)));
                for p in q.pairing {
                    let (u1, v1) = g.edges()[p[0]];
                    let (u2, v2) = g.edges()[p[1]];
                    assert!(u1 != u2 && v1 != v2, "pairing class must be vertex-disjoint");
                }
            }
        }
    }

    #[test]
    fn loose_edge_detection() {
        assert!(loose_edges(&k22()).is_empty());
        assert_eq!(loose_edges(&path3()).len(), 3);
        let g = k22_pendant();
        let loose = loose_edges(&g);
        assert_eq!(loose.len(), 1);
        assert_eq!(g.edge_labels(loose[0]), ("u1", "v3"));

        // loose and covered edges partition the edge set
        for g in [k22(), path3(), k22_pendant(), complete_bipartite(3, 3)] {
            let loose: BTreeSet<usize> = loose_edges(&g).into_iter().collect();
            let covered: BTreeSet<usize> = enumerate_k22(&g)
                .iter()
                .flat_map(|q| q.members)
                .collect();
            assert!(loose.is_disjoint(&covered));
            assert_eq!(loose.len() + covered.len(), g.edge_count());
        }
    }

    #[test]
    fn k23_detection() {
        assert!(contains_k23(&complete_bipartite(2, 3)));
        assert!(contains_k23(&complete_bipartite(3, 2)));
        assert!(!contains_k23(&k22()));
        assert!(contains_k23(&complete_bipartite(3, 3)));
        assert!(!contains_k23(&k22_pendant()));
    }

    #[test]
    fn hypergraph_conversion() {
        let h = Hypergraph {
            vertices: vec!["x".into()],
            hedges: vec!["e".into()],
            source: BTreeMap::from([("e".into(), vec!["x".into()])]),
        };
        let g = from_hypergraph(&h).unwrap();
        assert!(is_graph_isomorphic(&g, &single_edge()));

        let h = Hypergraph {
            vertices: vec!["x1".into(), "x2".into()],
            hedges: vec!["e".into()],
            source: BTreeMap::from([("e".into(), vec!["x1".into(), "x2".into()])]),
        };
        let g = from_hypergraph(&h).unwrap();
        assert!(is_graph_isomorphic(&g, &path3().induced_by_edges(&[0, 1]).unwrap()));

        let h = Hypergraph {
            vertices: vec!["x1".into(), "x2".into()],
            hedges: vec!["e1".into(), "e2".into()],
            source: BTreeMap::from([
                ("e1".into(), vec!["x1".into(), "x2".into()]),
                ("e2".into(), vec!["x1".into(), "x2".into()]),
            ]),
        };
        let g = from_hypergraph(&h).unwrap();
        assert!(is_graph_isomorphic(&g, &k22()));
        assert_eq!(g.u_labels(), &["x1".to_string(), "x2".to_string()]);

        // duplicate source entries collapse; no parallel edges
        let h = Hypergraph {
            vertices: vec!["x".into()],
            hedges: vec!["e".into()],
            source: BTreeMap::from([("e".into(), vec!["x".into(), "x".into()])]),
        };
        assert_eq!(from_hypergraph(&h).unwrap().edge_count(), 1);

        // hedge without a source set is rejected
        let h = Hypergraph {
            vertices: vec!["x".into()],
            hedges: vec!["e".into()],
            source: BTreeMap::new(),
        };
        assert!(from_hypergraph(&h).is_err());
    }

    #[test]
    fn loose_edge_reduction() {
        let g = k22_pendant();
        let pendant = g.edge_index_by_labels("u1", "v3").unwrap();
        let (g2, inc) = reduce_loose_edge(&g, pendant).unwrap();
        assert_eq!(inc, 1);
        assert_eq!(g2.edge_count(), 4);
        assert_eq!(g2.vertex_count(), 5); // v3 stays as an isolated vertex
        assert_eq!(enumerate_k22(&g2).len(), 1);

        // iterating on the 3-edge path empties it: three scalar summands
        let (reduced, count) = reduce_all_loose(&path3());
        assert_eq!(count, 3);
        assert_eq!(reduced.edge_count(), 0);

        // K_{2,2} has no loose edge at all
        for e in 0..4 {
            assert!(matches!(
                reduce_loose_edge(&k22(), e),
                Err(GraphError::EdgeNotLoose(_, _))
            ));
        }
    }

    #[test]
    fn reduction_preserves_quadruples() {
        let g = k22_pendant();
        let before = enumerate_k22(&g);
        let pendant = g.edge_index_by_labels("u1", "v3").unwrap();
        let (g2, _) = reduce_loose_edge(&g, pendant).unwrap();
        // compare as label sets since indices shift under deletion
        let label_quads = |g: &BipartiteGraph| -> BTreeSet<Vec<String>> {
            enumerate_k22(g)
                .iter()
                .map(|q| {
                    let mut v: Vec<String> = q.members.iter().map(|&e| g.edge_string(e)).collect();
                    v.sort();
                    v
                })
                .collect()
        };
        assert_eq!(label_quads(&g), label_quads(&g2));
        assert_eq!(before.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let g = k22_pendant();
        let s = serde_json::to_string(&g).unwrap();
        let back: BipartiteGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);

        let parsed: BipartiteGraph = serde_json::from_str(
            r#"{"u":["u1"],"v":["v1"],"e":[["u1","v1"]]}"#,
        )
        .unwrap();
        assert!(is_graph_isomorphic(&parsed, &single_edge()));

        // a cross-side edge fails to deserialize
        assert!(serde_json::from_str::<BipartiteGraph>(
            r#"{"u":["u1","u2"],"v":["v1"],"e":[["u1","u2"]]}"#
        )
        .is_err());
    }

    #[test]
    fn dot_export_marks_sides() {
        let dot = single_edge().to_dot();
        assert!(dot.contains("\"u\" [style=filled"));
        assert!(dot.contains("\"v\" [style=solid];"));
        assert!(dot.contains("\"u\" -- \"v\";"));
    }

    #[test]
    fn canonical_bytes_agrees_with_isomorphism() {
        let graphs = [
            k22(),
            path3(),
            k22_pendant(),
            single_edge(),
            complete_bipartite(2, 3),
            complete_bipartite(3, 2),
            complete_bipartite(3, 3),
        ];
        for a in &graphs {
            for b in &graphs {
                assert_eq!(
                    canonical_bytes(a) == canonical_bytes(b),
                    is_graph_isomorphic(a, b),
                    "{a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn connectivity() {
        assert!(k22().is_connected());
        assert!(path3().is_connected());
        let disjoint =
            BipartiteGraph::new(["u1", "u2"], ["v1", "v2"], [("u1", "v1"), ("u2", "v2")]).unwrap();
        assert!(!disjoint.is_connected());
    }
}
