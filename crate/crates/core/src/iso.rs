//! Deciding whether two graphs generate isomorphic algebras.
//!
//! The criterion is purely combinatorial: an edge bijection must carry
//! 4-cycles to 4-cycles (in both directions) and preserve each 4-cycle's
//! opposite-edge pairing. Loose edges are interchangeable, so the search
//! only ever branches over covered edges.
//!
//! [`decide_iso`] is the production path (certificate comparison plus a
//! color-seeded backtracking search for an explicit witness);
//! [`brute_force_iso`] is the independent oracle that enumerates every edge
//! bijection and tests the two conditions directly on 4-element edge
//! subsets.

use std::collections::HashMap;

use serde_json::json;
use thiserror::Error;

use crate::graph::BipartiteGraph;
use crate::skeleton::{
    canonical_certificate, covered_quads, derived_structure, joint_refine, joint_seed_colors,
    DerivedStructure,
};

/// Edge count above which the oracle refuses to enumerate bijections.
pub const DEFAULT_ORACLE_BOUND: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("edge count {edges} exceeds the oracle bound {bound}")]
    SizeBoundExceeded { edges: usize, bound: usize },
    #[error("not a bijection between the edge sets: {0}")]
    NotABijection(String),
}

/// A bijection between the edge sets of two graphs, stored both ways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBijection {
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl EdgeBijection {
    /// Builds a bijection from the forward table `source edge -> target
    /// edge`; fails unless it is a permutation onto `0..target_len`.
    pub fn new(forward: Vec<usize>, target_len: usize) -> Result<Self, IsoError> {
        if forward.len() != target_len {
            return Err(IsoError::NotABijection(format!(
                "maps {} edges onto {} edges",
                forward.len(),
                target_len
            )));
        }
        let mut backward = vec![usize::MAX; target_len];
        for (e, &img) in forward.iter().enumerate() {
            if img >= target_len {
                return Err(IsoError::NotABijection(format!(
                    "image #{img} out of range"
                )));
            }
            if backward[img] != usize::MAX {
                return Err(IsoError::NotABijection(format!(
                    "edges #{} and #{e} share the image #{img}",
                    backward[img]
                )));
            }
            backward[img] = e;
        }
        Ok(EdgeBijection { forward, backward })
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn backward(&self) -> &[usize] {
        &self.backward
    }

    pub fn map(&self, edge: usize) -> usize {
        self.forward[edge]
    }

    pub fn unmap(&self, edge: usize) -> usize {
        self.backward[edge]
    }

    pub fn inverse(&self) -> EdgeBijection {
        EdgeBijection {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    /// JSON object mapping `"u,v"` edge names of `g` to edge names of `g2`.
    pub fn to_json(&self, g: &BipartiteGraph, g2: &BipartiteGraph) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (e, &img) in self.forward.iter().enumerate() {
            map.insert(g.edge_string(e), json!(g2.edge_string(img)));
        }
        serde_json::Value::Object(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionReason {
    CountMismatch,
    CertificateMismatch,
    ExhaustedSearch,
}

impl RejectionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectionReason::CountMismatch => "count mismatch",
            RejectionReason::CertificateMismatch => "certificate mismatch",
            RejectionReason::ExhaustedSearch => "exhausted search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    pub witness: Option<EdgeBijection>,
    pub rejection_reason: Option<RejectionReason>,
}

impl IsoVerdict {
    fn yes(witness: EdgeBijection) -> Self {
        IsoVerdict {
            isomorphic: true,
            witness: Some(witness),
            rejection_reason: None,
        }
    }

    fn no(reason: RejectionReason) -> Self {
        IsoVerdict {
            isomorphic: false,
            witness: None,
            rejection_reason: Some(reason),
        }
    }

    pub fn to_json(&self, g: &BipartiteGraph, g2: &BipartiteGraph) -> serde_json::Value {
        json!({
            "isomorphic": self.isomorphic,
            "witness": self.witness.as_ref().map(|w| w.to_json(g, g2)),
            "reason": self.rejection_reason.map(|r| r.as_str()),
        })
    }
}

/// Decides whether the two graphs generate isomorphic algebras.
///
/// Necessary counts and the canonical certificates are compared first; when
/// they agree, a backtracking search over covered edges (seeded by the
/// refinement colors) produces an explicit witness, extended by matching
/// loose edges in canonical order. Witnesses are deterministic.
pub fn decide_iso(g: &BipartiteGraph, g2: &BipartiteGraph) -> IsoVerdict {
    let ds = derived_structure(g);
    let ds2 = derived_structure(g2);
    if ds.edge_count() != ds2.edge_count()
        || ds.quadruples.len() != ds2.quadruples.len()
        || ds.loose.len() != ds2.loose.len()
    {
        return IsoVerdict::no(RejectionReason::CountMismatch);
    }
    if canonical_certificate(&ds) != canonical_certificate(&ds2) {
        return IsoVerdict::no(RejectionReason::CertificateMismatch);
    }
    match search_witness(&ds, &ds2) {
        Some(forward) => {
            let w = EdgeBijection::new(forward, ds2.edge_count()).expect("search yields bijections");
            IsoVerdict::yes(w)
        }
        None => IsoVerdict::no(RejectionReason::ExhaustedSearch),
    }
}

fn search_witness(ds: &DerivedStructure, ds2: &DerivedStructure) -> Option<Vec<usize>> {
    let (cov1, quads1) = covered_quads(ds);
    let (cov2, quads2) = covered_quads(ds2);
    if cov1.len() != cov2.len() {
        return None;
    }
    let n = cov1.len();

    let seeds = joint_seed_colors(&[ds, ds2]);
    let mut colors = vec![
        cov1.iter().map(|&e| seeds[0][e]).collect::<Vec<u32>>(),
        cov2.iter().map(|&e| seeds[1][e]).collect::<Vec<u32>>(),
    ];
    joint_refine(&[&quads1, &quads2], &mut colors);

    // 4-cycles of the target, keyed by sorted members
    let target: HashMap<[usize; 4], [[usize; 2]; 2]> = quads2
        .iter()
        .map(|q| (q.members, q.pairing))
        .collect();
    // source 4-cycles containing each covered edge
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (qi, q) in quads1.iter().enumerate() {
        for e in q.members {
            containing[e].push(qi);
        }
    }

    // assignment order: by (color, index); candidates share the color
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&e| (colors[0][e], e));

    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];

    struct Ctx<'a> {
        order: &'a [usize],
        colors: &'a [Vec<u32>],
        quads1: &'a [crate::graph::Quadruple],
        containing: &'a [Vec<usize>],
        target: &'a HashMap<[usize; 4], [[usize; 2]; 2]>,
    }

    fn bt(ctx: &Ctx, depth: usize, assign: &mut [usize], used: &mut [bool]) -> bool {
        if depth == ctx.order.len() {
            return true;
        }
        let e = ctx.order[depth];
        for cand in 0..used.len() {
            if used[cand] || ctx.colors[1][cand] != ctx.colors[0][e] {
                continue;
            }
            assign[e] = cand;
            used[cand] = true;
            if quads_consistent(ctx, e, assign) && bt(ctx, depth + 1, assign, used) {
                return true;
            }
            assign[e] = usize::MAX;
            used[cand] = false;
        }
        false
    }

    /// Every source 4-cycle through `e` that is now fully assigned must land
    /// on a target 4-cycle with the pairing carried over.
    fn quads_consistent(ctx: &Ctx, e: usize, assign: &[usize]) -> bool {
        for &qi in &ctx.containing[e] {
            let q = &ctx.quads1[qi];
            if q.members.iter().any(|&m| assign[m] == usize::MAX) {
                continue;
            }
            let mut mapped = q.members.map(|m| assign[m]);
            mapped.sort_unstable();
            let Some(pairing2) = ctx.target.get(&mapped) else {
                return false;
            };
            let mut mapped_pairing = q.pairing.map(|p| {
                let mut pr = [assign[p[0]], assign[p[1]]];
                pr.sort_unstable();
                pr
            });
            mapped_pairing.sort_unstable();
            if &mapped_pairing != pairing2 {
                return false;
            }
        }
        true
    }

    let ctx = Ctx {
        order: &order,
        colors: &colors,
        quads1: &quads1,
        containing: &containing,
        target: &target,
    };
    if !bt(&ctx, 0, &mut assign, &mut used) {
        return None;
    }

    let mut forward = vec![usize::MAX; ds.edge_count()];
    for (ci, &e) in cov1.iter().enumerate() {
        forward[e] = cov2[assign[ci]];
    }
    for (&l1, &l2) in ds.loose.iter().zip(ds2.loose.iter()) {
        forward[l1] = l2;
    }
    Some(forward)
}

/// Direct 4-subset scan: every 4-element edge subset inducing a 4-cycle,
/// with its opposite-edge pairing. Independent of the enumeration used by
/// the production path.
fn quads_by_subset_scan(g: &BipartiteGraph) -> Vec<([usize; 4], [[usize; 2]; 2])> {
    let edges = g.edges();
    let m = edges.len();
    let mut out = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                for d in (c + 1)..m {
                    let quad = [a, b, c, d];
                    let mut us: Vec<usize> = quad.iter().map(|&e| edges[e].0).collect();
                    let mut vs: Vec<usize> = quad.iter().map(|&e| edges[e].1).collect();
                    us.sort_unstable();
                    us.dedup();
                    vs.sort_unstable();
                    vs.dedup();
                    if us.len() != 2 || vs.len() != 2 {
                        continue;
                    }
                    // two distinct endpoints per side and four distinct
                    // edges: necessarily all four combinations
                    let mut pairing: Vec<[usize; 2]> = Vec::with_capacity(2);
                    for (i, &e1) in quad.iter().enumerate() {
                        for &e2 in &quad[i + 1..] {
                            let (u1, v1) = edges[e1];
                            let (u2, v2) = edges[e2];
                            if u1 != u2 && v1 != v2 {
                                pairing.push([e1, e2]);
                            }
                        }
                    }
                    debug_assert_eq!(pairing.len(), 2);
                    pairing.sort_unstable();
                    out.push((quad, [pairing[0], pairing[1]]));
                }
            }
        }
    }
    out
}

/// Tests whether one explicit bijection satisfies both classification
/// conditions, given precomputed 4-cycle tables.
fn bijection_ok(
    forward: &[usize],
    source_quads: &[([usize; 4], [[usize; 2]; 2])],
    target_quads: &HashMap<[usize; 4], [[usize; 2]; 2]>,
) -> bool {
    for (members, pairing) in source_quads {
        let mut mapped = members.map(|e| forward[e]);
        mapped.sort_unstable();
        let Some(target_pairing) = target_quads.get(&mapped) else {
            return false;
        };
        let mut mapped_pairing = pairing.map(|p| {
            let mut pr = [forward[p[0]], forward[p[1]]];
            pr.sort_unstable();
            pr
        });
        mapped_pairing.sort_unstable();
        if &mapped_pairing != target_pairing {
            return false;
        }
    }
    true
}

/// Exhaustive oracle with the default size bound.
pub fn brute_force_iso(g: &BipartiteGraph, g2: &BipartiteGraph) -> Result<IsoVerdict, IsoError> {
    brute_force_iso_bounded(g, g2, DEFAULT_ORACLE_BOUND)
}

/// Exhaustive oracle: enumerates all `|E|!` bijections in lexicographic
/// order and returns the first one satisfying both conditions.
pub fn brute_force_iso_bounded(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    bound: usize,
) -> Result<IsoVerdict, IsoError> {
    #[cfg(feature = "parallel")]
    {
        brute_force_iso_par(g, g2, bound)
    }
    #[cfg(not(feature = "parallel"))]
    {
        brute_force_iso_seq(g, g2, bound)
    }
}

struct OracleTables {
    n: usize,
    source_quads: Vec<([usize; 4], [[usize; 2]; 2])>,
    target_quads: HashMap<[usize; 4], [[usize; 2]; 2]>,
}

fn oracle_tables(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    bound: usize,
) -> Result<Result<OracleTables, IsoVerdict>, IsoError> {
    for edges in [g.edge_count(), g2.edge_count()] {
        if edges > bound {
            return Err(IsoError::SizeBoundExceeded { edges, bound });
        }
    }
    if g.edge_count() != g2.edge_count() {
        return Ok(Err(IsoVerdict::no(RejectionReason::CountMismatch)));
    }
    let source_quads = quads_by_subset_scan(g);
    let target_list = quads_by_subset_scan(g2);
    if source_quads.len() != target_list.len() {
        // no bijection can match the 4-cycle systems
        return Ok(Err(IsoVerdict::no(RejectionReason::CountMismatch)));
    }
    Ok(Ok(OracleTables {
        n: g.edge_count(),
        source_quads,
        target_quads: target_list.into_iter().collect(),
    }))
}

/// Sequential reference enumeration; always available for comparison.
pub fn brute_force_iso_seq(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    bound: usize,
) -> Result<IsoVerdict, IsoError> {
    let tables = match oracle_tables(g, g2, bound)? {
        Ok(t) => t,
        Err(verdict) => return Ok(verdict),
    };
    let mut forward = Vec::with_capacity(tables.n);
    let mut used = vec![false; tables.n];
    let found = enumerate_lex(&tables, &mut forward, &mut used);
    Ok(match found {
        Some(f) => IsoVerdict::yes(EdgeBijection::new(f, tables.n).unwrap()),
        None => IsoVerdict::no(RejectionReason::ExhaustedSearch),
    })
}

fn enumerate_lex(
    tables: &OracleTables,
    forward: &mut Vec<usize>,
    used: &mut [bool],
) -> Option<Vec<usize>> {
    if forward.len() == tables.n {
        return bijection_ok(forward, &tables.source_quads, &tables.target_quads)
            .then(|| forward.clone());
    }
    for cand in 0..tables.n {
        if used[cand] {
            continue;
        }
        forward.push(cand);
        used[cand] = true;
        if let Some(f) = enumerate_lex(tables, forward, used) {
            return Some(f);
        }
        forward.pop();
        used[cand] = false;
    }
    None
}

/// Parallel enumeration split on the image of the first edge. Branches are
/// scanned with `find_map_first`, so the returned witness is the one the
/// leftmost successful branch finds — the same lexicographically first
/// bijection the sequential scan returns.
#[cfg(feature = "parallel")]
pub fn brute_force_iso_par(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    bound: usize,
) -> Result<IsoVerdict, IsoError> {
    use rayon::prelude::*;

    let tables = match oracle_tables(g, g2, bound)? {
        Ok(t) => t,
        Err(verdict) => return Ok(verdict),
    };
    if tables.n == 0 {
        return Ok(IsoVerdict::yes(EdgeBijection::new(Vec::new(), 0).unwrap()));
    }
    let best = (0..tables.n)
        .into_par_iter()
        .find_map_first(|first| {
            let mut forward = Vec::with_capacity(tables.n);
            forward.push(first);
            let mut used = vec![false; tables.n];
            used[first] = true;
            enumerate_lex(&tables, &mut forward, &mut used)
        });
    Ok(match best {
        Some(f) => IsoVerdict::yes(EdgeBijection::new(f, tables.n).unwrap()),
        None => IsoVerdict::no(RejectionReason::ExhaustedSearch),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub ok: bool,
    pub violation: Option<String>,
}

/// Checks an explicit edge bijection against both classification conditions
/// in both directions, reporting the first violation found.
pub fn verify_witness(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    f: &EdgeBijection,
) -> Result<WitnessReport, IsoError> {
    if f.forward.len() != g.edge_count() || f.backward.len() != g2.edge_count() {
        return Err(IsoError::NotABijection(format!(
            "bijection over {} edges applied to graphs with {} and {} edges",
            f.forward.len(),
            g.edge_count(),
            g2.edge_count()
        )));
    }
    let source_quads = quads_by_subset_scan(g);
    let target_list = quads_by_subset_scan(g2);
    let target_quads: HashMap<[usize; 4], [[usize; 2]; 2]> = target_list.iter().copied().collect();
    let source_map: HashMap<[usize; 4], [[usize; 2]; 2]> = source_quads.iter().copied().collect();

    let name = |g: &BipartiteGraph, members: &[usize; 4]| -> String {
        let names: Vec<String> = members.iter().map(|&e| g.edge_string(e)).collect();
        format!("{{{}}}", names.join("; "))
    };

    for (members, pairing) in &source_quads {
        let mut mapped = members.map(|e| f.forward[e]);
        mapped.sort_unstable();
        let Some(target_pairing) = target_quads.get(&mapped) else {
            return Ok(WitnessReport {
                ok: false,
                violation: Some(format!(
                    "edges {} form a 4-cycle but their images {} do not",
                    name(g, members),
                    name(g2, &mapped)
                )),
            });
        };
        let mut mapped_pairing = pairing.map(|p| {
            let mut pr = [f.forward[p[0]], f.forward[p[1]]];
            pr.sort_unstable();
            pr
        });
        mapped_pairing.sort_unstable();
        if &mapped_pairing != target_pairing {
            return Ok(WitnessReport {
                ok: false,
                violation: Some(format!(
                    "4-cycle {} keeps its edge set but the opposite pairs are not preserved",
                    name(g, members)
                )),
            });
        }
    }
    for (members, _) in &target_list {
        let mut pre = members.map(|e| f.backward[e]);
        pre.sort_unstable();
        if !source_map.contains_key(&pre) {
            return Ok(WitnessReport {
                ok: false,
                violation: Some(format!(
                    "edges {} form a 4-cycle but their preimages {} do not",
                    name(g2, members),
                    name(g, &pre)
                )),
            });
        }
    }
    Ok(WitnessReport {
        ok: true,
        violation: None,
    })
}

/// Cross-module consistency view: verdict as implied by certificates and
/// edge counts alone.
pub fn certificates_agree(g: &BipartiteGraph, g2: &BipartiteGraph) -> bool {
    let ds = derived_structure(g);
    let ds2 = derived_structure(g2);
    ds.edge_count() == ds2.edge_count()
        && canonical_certificate(&ds) == canonical_certificate(&ds2)
}

/// Deterministic map turning any verdict into a stable summary string for
/// logs and error paths.
pub fn verdict_summary(v: &IsoVerdict) -> String {
    match (&v.isomorphic, &v.rejection_reason) {
        (true, _) => "isomorphic".to_owned(),
        (false, Some(r)) => format!("not isomorphic ({})", r.as_str()),
        (false, None) => "not isomorphic".to_owned(),
    }
}
