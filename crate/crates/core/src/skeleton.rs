//! The derived structure of a graph — its canonical edge list, 4-cycles with
//! opposite-edge pairings, and loose edges — plus the combinatorial model of
//! the space of small irreducible representations built from it, a
//! relabeling-invariant summary, and a canonical certificate.
//!
//! Every loose edge contributes one clopen point; every 4-cycle contributes
//! one interval component whose four boundary points are glued in pairs
//! according to the opposite-edge pairing. The interval parameter is kept
//! abstract: only the boundary identifications matter for classification.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::graph::{enumerate_k22, loose_edges, BipartiteGraph, Quadruple};

/// Edge-level structure derived from a graph: 4-cycles (as canonical edge
/// index 4-sets with pairings) and the loose edges not covered by any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedStructure {
    /// Canonical edge list, as label pairs.
    pub edge_labels: Vec<(String, String)>,
    pub quadruples: Vec<Quadruple>,
    pub loose: Vec<usize>,
}

pub fn derived_structure(g: &BipartiteGraph) -> DerivedStructure {
    DerivedStructure {
        edge_labels: (0..g.edge_count())
            .map(|e| {
                let (u, v) = g.edge_labels(e);
                (u.to_owned(), v.to_owned())
            })
            .collect(),
        quadruples: enumerate_k22(g),
        loose: loose_edges(g),
    }
}

impl DerivedStructure {
    pub fn edge_count(&self) -> usize {
        self.edge_labels.len()
    }

    /// Number of 4-cycles each edge lies in.
    pub fn quadruple_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.edge_count()];
        for q in &self.quadruples {
            for e in q.members {
                deg[e] += 1;
            }
        }
        deg
    }
}

/// One glued-interval component: an abstract open interval whose four
/// boundary points carry the edges of a 4-cycle, glued in opposite pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XComponent {
    pub edges: [usize; 4],
    pub pairing: [[usize; 2]; 2],
}

/// Combinatorial model of the one- and two-dimensional representation space:
/// a clopen point per loose edge and an [`XComponent`] per 4-cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecSkeleton {
    pub edge_labels: Vec<(String, String)>,
    pub clopen_points: Vec<usize>,
    pub components: Vec<XComponent>,
}

pub fn spec_skeleton(g: &BipartiteGraph) -> SpecSkeleton {
    let ds = derived_structure(g);
    SpecSkeleton {
        components: ds
            .quadruples
            .iter()
            .map(|q| XComponent {
                edges: q.members,
                pairing: q.pairing,
            })
            .collect(),
        clopen_points: ds.loose,
        edge_labels: ds.edge_labels,
    }
}

impl SpecSkeleton {
    fn edge_name(&self, e: usize) -> String {
        let (u, v) = &self.edge_labels[e];
        format!("{u},{v}")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "clopen": self.clopen_points.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>(),
            "components": self.components.iter().map(|c| json!({
                "edges": c.edges.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>(),
                "pairing": c.pairing.iter().map(|p| {
                    p.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Relabeling-invariant summary of a derived structure, used both for fast
/// non-isomorphism rejection and to seed the witness search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InvariantVector {
    pub edge_count: usize,
    pub loose_count: usize,
    pub quadruple_count: usize,
    /// Sorted multiset of per-edge 4-cycle membership counts.
    pub quadruple_degrees: Vec<usize>,
    /// Sorted multiset of per-edge partner profiles: for each edge, the
    /// sorted list of quadruple-degrees of its opposite partners across all
    /// 4-cycles containing it.
    pub partner_profiles: Vec<Vec<usize>>,
}

pub fn invariant_vector(ds: &DerivedStructure) -> InvariantVector {
    let deg = ds.quadruple_degrees();
    let mut profiles: Vec<Vec<usize>> = vec![Vec::new(); ds.edge_count()];
    for q in &ds.quadruples {
        for e in q.members {
            let partner = q.opposite(e).expect("member has an opposite partner");
            profiles[e].push(deg[partner]);
        }
    }
    for p in profiles.iter_mut() {
        p.sort_unstable();
    }
    let mut degrees = deg.clone();
    degrees.sort_unstable();
    profiles.sort();
    InvariantVector {
        edge_count: ds.edge_count(),
        loose_count: ds.loose.len(),
        quadruple_count: ds.quadruples.len(),
        quadruple_degrees: degrees,
        partner_profiles: profiles,
    }
}

/// Per-edge color data used by refinement: the edge's quadruple-degree and
/// the sorted partner-degree profile. This is exactly the per-edge slice of
/// the invariant vector.
fn seed_signature(ds: &DerivedStructure) -> Vec<(usize, Vec<usize>)> {
    let deg = ds.quadruple_degrees();
    let mut sigs: Vec<(usize, Vec<usize>)> = deg.iter().map(|&d| (d, Vec::new())).collect();
    for q in &ds.quadruples {
        for e in q.members {
            let partner = q.opposite(e).unwrap();
            sigs[e].1.push(deg[partner]);
        }
    }
    for s in sigs.iter_mut() {
        s.1.sort_unstable();
    }
    sigs
}

/// Refinement signature of one covered edge: its color plus, for every
/// 4-cycle through it, the partner's color and the sorted adjacent colors.
type EdgeSignature = (u32, Vec<(u32, [u32; 2])>);

/// One refinement pass: each covered edge's new color is determined by its
/// old color and, per 4-cycle containing it, the colors of its opposite
/// partner and of the two adjacent members.
fn refine_step(colors: &[u32], quads: &[Quadruple]) -> Vec<EdgeSignature> {
    let mut sigs: Vec<EdgeSignature> =
        colors.iter().map(|&c| (c, Vec::new())).collect();
    for q in quads {
        for e in q.members {
            let partner = q.opposite(e).unwrap();
            let adj = q.adjacent_pair(e).unwrap();
            let mut a = [colors[adj[0]], colors[adj[1]]];
            a.sort_unstable();
            sigs[e].1.push((colors[partner], a));
        }
    }
    for s in sigs.iter_mut() {
        s.1.sort_unstable();
    }
    sigs
}

/// Assigns each signature its rank among all distinct signatures across the
/// structures: canonical (labeling-independent) and comparable colors.
fn rank_colors<K: Ord>(sigs: &[Vec<K>]) -> Vec<Vec<u32>> {
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

/// Refines edge colors of several structures jointly until stable; colors
/// are comparable across the structures. Input and output are per-structure
/// color vectors over *covered* edge indices.
pub(crate) fn joint_refine(quad_sets: &[&[Quadruple]], colors: &mut [Vec<u32>]) {
    loop {
        let sigs: Vec<Vec<EdgeSignature>> = quad_sets
            .iter()
            .enumerate()
            .map(|(gi, quads)| refine_step(&colors[gi], quads))
            .collect();
        let next = rank_colors(&sigs);
        if next == colors {
            return;
        }
        colors.clone_from_slice(&next);
    }
}

/// Initial joint colors from the seed signatures of several structures.
pub(crate) fn joint_seed_colors(structures: &[&DerivedStructure]) -> Vec<Vec<u32>> {
    let sigs: Vec<Vec<(usize, Vec<usize>)>> =
        structures.iter().map(|ds| seed_signature(ds)).collect();
    rank_colors(&sigs)
}

/// Restricts a derived structure to its covered edges: returns the covered
/// edge ids in ascending order and the 4-cycles reindexed over them.
pub(crate) fn covered_quads(ds: &DerivedStructure) -> (Vec<usize>, Vec<Quadruple>) {
    let deg = ds.quadruple_degrees();
    let covered: Vec<usize> = (0..ds.edge_count()).filter(|&e| deg[e] > 0).collect();
    let cov_index: BTreeMap<usize, usize> =
        covered.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let quads: Vec<Quadruple> = ds
        .quadruples
        .iter()
        .map(|q| {
            let mut members = q.members.map(|e| cov_index[&e]);
            members.sort_unstable();
            let mut pairing = q.pairing.map(|pair| {
                let mut pr = [cov_index[&pair[0]], cov_index[&pair[1]]];
                pr.sort_unstable();
                pr
            });
            pairing.sort_unstable();
            Quadruple { members, pairing }
        })
        .collect();
    (covered, quads)
}

/// Canonical certificate of a derived structure: two structures admit an
/// edge bijection matching their 4-cycle systems (pairings included, loose
/// edges freely) iff their certificates are byte-equal.
///
/// Covered edges are colored by iterative refinement; remaining ties are
/// broken by individualizing each edge of the first non-singleton class in
/// turn and recursing, and the lexicographically least incidence encoding
/// over all resulting discrete orderings wins. Loose edges enter only
/// through their count.
pub fn canonical_certificate(ds: &DerivedStructure) -> Vec<u8> {
    let (covered, quads) = covered_quads(ds);

    let mut colors = joint_seed_colors(&[ds]);
    let cov_colors: Vec<u32> = covered.iter().map(|&e| colors[0][e]).collect();
    colors[0] = cov_colors;

    let mut best: Option<Vec<u8>> = None;
    minimize(&quads, colors.pop().unwrap(), &mut best);

    let mut cert = Vec::new();
    push_u16(&mut cert, ds.edge_count());
    push_u16(&mut cert, covered.len());
    push_u16(&mut cert, ds.loose.len());
    push_u16(&mut cert, quads.len());
    cert.extend(best.unwrap_or_default());
    cert
}

pub fn certificate_hex(ds: &DerivedStructure) -> String {
    canonical_certificate(ds)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn push_u16(out: &mut Vec<u8>, x: usize) {
    debug_assert!(x <= u16::MAX as usize);
    out.extend_from_slice(&(x as u16).to_be_bytes());
}

fn minimize(quads: &[Quadruple], mut colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
    let mut wrapped = vec![colors.clone()];
    joint_refine(&[quads], &mut wrapped);
    colors = wrapped.pop().unwrap();

    // first non-singleton color class, by color value
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (e, &c) in colors.iter().enumerate() {
        by_color.entry(c).or_default().push(e);
    }
    let target = by_color.values().find(|cell| cell.len() > 1).cloned();
    match target {
        None => {
            // discrete: order = sort by color
            let mut order: Vec<usize> = (0..colors.len()).collect();
            order.sort_unstable_by_key(|&e| colors[e]);
            let mut pos = vec![0u8; colors.len()];
            for (p, &e) in order.iter().enumerate() {
                pos[e] = p as u8;
            }
            let enc = encode(quads, &pos);
            if best.as_ref().is_none_or(|b| enc < *b) {
                *best = Some(enc);
            }
        }
        Some(cell) => {
            for &e in &cell {
                // individualize e: split its class, everything else shifts up
                let c = colors[e];
                let next: Vec<u32> = colors
                    .iter()
                    .enumerate()
                    .map(|(x, &cx)| {
                        if x == e {
                            c
                        } else if cx > c || (cx == c && x != e) {
                            cx + 1
                        } else {
                            cx
                        }
                    })
                    .collect();
                minimize(quads, next, best);
            }
        }
    }
}

fn encode(quads: &[Quadruple], pos: &[u8]) -> Vec<u8> {
    let mut rows: Vec<[u8; 8]> = quads
        .iter()
        .map(|q| {
            let mut m: Vec<u8> = q.members.iter().map(|&e| pos[e]).collect();
            m.sort_unstable();
            let mut p: Vec<[u8; 2]> = q
                .pairing
                .iter()
                .map(|pair| {
                    let mut pr = [pos[pair[0]], pos[pair[1]]];
                    pr.sort_unstable();
                    pr
                })
                .collect();
            p.sort_unstable();
            [m[0], m[1], m[2], m[3], p[0][0], p[0][1], p[1][0], p[1][1]]
        })
        .collect();
    rows.sort_unstable();
    rows.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, BipartiteGraph};

    fn k22() -> BipartiteGraph {
        complete_bipartite(2, 2)
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

    fn k22_disjoint_edge() -> BipartiteGraph {
        BipartiteGraph::new(
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
        .unwrap()
    }

    fn four_disjoint_edges() -> BipartiteGraph {
        BipartiteGraph::new(
            ["a1", "a2", "a3", "a4"],
            ["b1", "b2", "b3", "b4"],
            [("a1", "b1"), ("a2", "b2"), ("a3", "b3"), ("a4", "b4")],
        )
        .unwrap()
    }

    #[test]
    fn derived_structure_counts() {
        let ds = derived_structure(&k22());
        assert_eq!(ds.edge_count(), 4);
        assert_eq!(ds.quadruples.len(), 1);
        assert!(ds.loose.is_empty());

        let empty = BipartiteGraph::new([], [], []).unwrap();
        let ds = derived_structure(&empty);
        assert_eq!(ds.edge_count(), 0);
        assert!(ds.quadruples.is_empty() && ds.loose.is_empty());

        let ds = derived_structure(&k22_pendant());
        assert_eq!(ds.edge_count(), 5);
        assert_eq!(ds.quadruples.len(), 1);
        assert_eq!(ds.loose.len(), 1);
    }

    #[test]
    fn skeleton_shape() {
        let sk = spec_skeleton(&k22());
        assert_eq!(sk.components.len(), 1);
        assert!(sk.clopen_points.is_empty());
        assert_eq!(sk.components[0].pairing, [[0, 3], [1, 2]]);

        let single = BipartiteGraph::new(["u"], ["v"], [("u", "v")]).unwrap();
        let sk = spec_skeleton(&single);
        assert_eq!(sk.clopen_points.len(), 1);
        assert!(sk.components.is_empty());

        // two disjoint 4-cycles: two components, nothing clopen
        let two = BipartiteGraph::new(
            ["a1", "a2", "c1", "c2"],
            ["b1", "b2", "d1", "d2"],
            [
                ("a1", "b1"),
                ("a1", "b2"),
                ("a2", "b1"),
                ("a2", "b2"),
                ("c1", "d1"),
                ("c1", "d2"),
                ("c2", "d1"),
                ("c2", "d2"),
            ],
        )
        .unwrap();
        let sk = spec_skeleton(&two);
        assert_eq!(sk.components.len(), 2);
        assert!(sk.clopen_points.is_empty());

        // counts always line up with the derived structure
        for g in [k22(), k22_pendant(), complete_bipartite(3, 3)] {
            let ds = derived_structure(&g);
            let sk = spec_skeleton(&g);
            assert_eq!(sk.components.len(), ds.quadruples.len());
            assert_eq!(sk.clopen_points.len(), ds.loose.len());
        }
    }

    #[test]
    fn skeleton_json() {
        let v = spec_skeleton(&k22()).to_json();
        assert_eq!(v["clopen"].as_array().unwrap().len(), 0);
        let comp = &v["components"][0];
        assert_eq!(comp["pairing"][0][0], "u1,v1");
        assert_eq!(comp["pairing"][0][1], "u2,v2");
        assert_eq!(comp["pairing"][1][0], "u1,v2");
        assert_eq!(comp["pairing"][1][1], "u2,v1");
    }

    #[test]
    fn invariant_vector_values() {
        let iv = invariant_vector(&derived_structure(&k22()));
        assert_eq!(
            (iv.edge_count, iv.loose_count, iv.quadruple_count),
            (4, 0, 1)
        );
        assert_eq!(iv.quadruple_degrees, vec![1, 1, 1, 1]);

        let iv = invariant_vector(&derived_structure(&four_disjoint_edges()));
        assert_eq!(
            (iv.edge_count, iv.loose_count, iv.quadruple_count),
            (4, 4, 0)
        );
        assert_eq!(iv.quadruple_degrees, vec![0, 0, 0, 0]);

        // every edge of K_{2,3} lies in exactly two 4-cycles
        let iv = invariant_vector(&derived_structure(&complete_bipartite(2, 3)));
        assert_eq!(
            (iv.edge_count, iv.loose_count, iv.quadruple_count),
            (6, 0, 3)
        );
        assert_eq!(iv.quadruple_degrees, vec![2; 6]);
    }

    #[test]
    fn certificate_ground_cases() {
        let relabeled = BipartiteGraph::new(
            ["x", "y"],
            ["s", "t"],
            [("x", "s"), ("x", "t"), ("y", "s"), ("y", "t")],
        )
        .unwrap();
        let cert = |g: &BipartiteGraph| canonical_certificate(&derived_structure(g));
        assert_eq!(cert(&k22()), cert(&relabeled));

        // same derived structure despite non-isomorphic graphs
        assert_eq!(cert(&k22_pendant()), cert(&k22_disjoint_edge()));

        // quadruple counts differ
        assert_ne!(cert(&k22()), cert(&four_disjoint_edges()));
    }
}
