//! Finite-dimensional matrix representations: families of projections
//! indexed by the vertices, satisfying the two defining relations
//!
//! * both side sums equal the identity (`gp1`), and
//! * images of non-adjacent vertices multiply to zero (`gp2`).
//!
//! The irreducible representations of dimension at most two are completely
//! explicit: a one-dimensional one per edge and, per 4-cycle, a
//! one-parameter family of two-dimensional ones. [`standard_rep`] stacks
//! them all. Relation checkers report entrywise max-norm deviations against
//! the crate tolerance [`crate::TOL`].

mod phi;

pub use phi::{phi_image, verify_phi, PhiContext};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::graph::{is_quadruple_of, BipartiteGraph, Quadruple, Side};
use crate::matrix::{self, CMat};
use crate::TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReprError {
    #[error("unknown edge #{0}")]
    UnknownEdge(usize),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("parameter {0} outside the open interval (0,1)")]
    ParameterOutOfRange(f64),
    #[error("not a 4-cycle of this graph")]
    NotAQuadruple,
    #[error("representations live over different graphs")]
    GraphMismatch,
    #[error("empty direct sum")]
    EmptySum,
    #[error("{0}")]
    SideMismatch(String),
    #[error("not a subgraph: {0}")]
    NotASubgraph(String),
    #[error("witness fails verification: {0}")]
    WitnessInvalid(String),
}

/// A family of `dim × dim` complex matrices indexed by the vertices of a
/// graph (all of `U` first, then all of `V`).
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    graph: BipartiteGraph,
    dim: usize,
    images: Vec<CMat>,
}

impl Representation {
    /// Wraps explicit images. Panics unless there is one square `dim × dim`
    /// matrix per vertex.
    pub fn from_images(graph: BipartiteGraph, dim: usize, images: Vec<CMat>) -> Self {
        assert_eq!(images.len(), graph.vertex_count());
        for m in &images {
            assert_eq!(m.shape(), (dim, dim));
        }
        Representation { graph, dim, images }
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, side: Side, index: usize) -> &CMat {
        &self.images[self.graph.global_index(side, index)]
    }

    pub fn image_global(&self, global: usize) -> &CMat {
        &self.images[global]
    }

    pub fn image_by_label(&self, label: &str) -> Result<&CMat, ReprError> {
        let (side, idx) = self
            .graph
            .vertex(label)
            .map_err(|_| ReprError::UnknownVertex(label.to_owned()))?;
        Ok(self.image(side, idx))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut images = serde_json::Map::new();
        for side in [Side::U, Side::V] {
            let labels = match side {
                Side::U => self.graph.u_labels(),
                Side::V => self.graph.v_labels(),
            };
            for (i, l) in labels.iter().enumerate() {
                images.insert(l.clone(), matrix::to_json(self.image(side, i)));
            }
        }
        json!({ "dim": self.dim, "images": images })
    }
}

/// One-dimensional representation attached to an edge: value 1 exactly on
/// the two endpoints, 0 elsewhere. Exact in floating point.
pub fn rep_pi(g: &BipartiteGraph, edge: usize) -> Result<Representation, ReprError> {
    if edge >= g.edge_count() {
        return Err(ReprError::UnknownEdge(edge));
    }
    let (u0, v0) = g.edges()[edge];
    let images = (0..g.vertex_count())
        .map(|x| {
            let on = x == g.global_index(Side::U, u0) || x == g.global_index(Side::V, v0);
            matrix::scalar(if on { 1.0 } else { 0.0 })
        })
        .collect();
    Ok(Representation {
        graph: g.clone(),
        dim: 1,
        images,
    })
}

/// Two-dimensional irreducible representation attached to a 4-cycle and a
/// parameter `t ∈ (0,1)`.
///
/// With the 4-cycle's vertices `u1 < u2` and `v1 < v2` (canonical index
/// order), the images are
///
/// ```text
/// u1 -> [[1,0],[0,0]]     v1 -> [[1-t, s],[s, t]]          s = sqrt(t(1-t))
/// u2 -> [[0,0],[0,1]]     v2 -> [[t, -s],[-s, 1-t]]
/// ```
///
/// and zero on every other vertex. The endpoints `t = 0, 1` are rejected:
/// there the family degenerates into a reducible pair of one-dimensional
/// pieces.
pub fn rep_sigma(g: &BipartiteGraph, quad: &Quadruple, t: f64) -> Result<Representation, ReprError> {
    if !(t > 0.0 && t < 1.0) || !t.is_finite() {
        return Err(ReprError::ParameterOutOfRange(t));
    }
    if !is_quadruple_of(g, quad) {
        return Err(ReprError::NotAQuadruple);
    }
    let mut us: Vec<usize> = quad.members.iter().map(|&e| g.edges()[e].0).collect();
    let mut vs: Vec<usize> = quad.members.iter().map(|&e| g.edges()[e].1).collect();
    us.sort_unstable();
    us.dedup();
    vs.sort_unstable();
    vs.dedup();
    let (u1, u2) = (us[0], us[1]);
    let (v1, v2) = (vs[0], vs[1]);

    let s = (t * (1.0 - t)).sqrt();
    let m_u1 = matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
    let m_u2 = matrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
    let m_v1 = matrix::from_real_rows(&[&[1.0 - t, s], &[s, t]]);
    let m_v2 = matrix::from_real_rows(&[&[t, -s], &[-s, 1.0 - t]]);

    let mut images = vec![matrix::zeros(2, 2); g.vertex_count()];
    images[g.global_index(Side::U, u1)] = m_u1;
    images[g.global_index(Side::U, u2)] = m_u2;
    images[g.global_index(Side::V, v1)] = m_v1;
    images[g.global_index(Side::V, v2)] = m_v2;
    Ok(Representation {
        graph: g.clone(),
        dim: 2,
        images,
    })
}

/// Block-diagonal direct sum; all summands must live over the same graph.
pub fn direct_sum(reps: &[Representation]) -> Result<Representation, ReprError> {
    let first = reps.first().ok_or(ReprError::EmptySum)?;
    for r in reps {
        if r.graph != first.graph {
            return Err(ReprError::GraphMismatch);
        }
    }
    let dim = reps.iter().map(|r| r.dim).sum();
    let images = (0..first.graph.vertex_count())
        .map(|x| {
            let blocks: Vec<&CMat> = reps.iter().map(|r| &r.images[x]).collect();
            matrix::block_diag(&blocks)
        })
        .collect();
    Ok(Representation {
        graph: first.graph.clone(),
        dim,
        images,
    })
}

/// Which irreducible piece a block of the standard representation is.
#[derive(Debug, Clone, PartialEq)]
pub enum Summand {
    Pi { edge: usize },
    Sigma { quad: Quadruple, t: f64 },
}

/// All irreducible summands of the standard representation in canonical
/// order: one per edge, then one per (4-cycle, sample) pair.
pub fn standard_summands(
    g: &BipartiteGraph,
    t_samples: &[f64],
) -> Result<Vec<(Summand, Representation)>, ReprError> {
    for &t in t_samples {
        if !(t > 0.0 && t < 1.0) || !t.is_finite() {
            return Err(ReprError::ParameterOutOfRange(t));
        }
    }
    let mut out = Vec::new();
    for e in 0..g.edge_count() {
        out.push((Summand::Pi { edge: e }, rep_pi(g, e)?));
    }
    for quad in crate::graph::enumerate_k22(g) {
        for &t in t_samples {
            out.push((
                Summand::Sigma {
                    quad: quad.clone(),
                    t,
                },
                rep_sigma(g, &quad, t)?,
            ));
        }
    }
    Ok(out)
}

/// Direct sum of every irreducible of dimension at most two, one
/// two-dimensional family member per sample point.
pub fn standard_rep(g: &BipartiteGraph, t_samples: &[f64]) -> Result<Representation, ReprError> {
    let summands = standard_summands(g, t_samples)?;
    let reps: Vec<Representation> = summands.into_iter().map(|(_, r)| r).collect();
    direct_sum(&reps)
}

/// The default sample set: 1/4, 1/2, 3/4 plus two seeded uniform points,
/// so distinct 4-cycle components stay separated.
pub fn default_t_samples(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts = vec![0.25, 0.5, 0.75];
    for _ in 0..2 {
        // strictly interior draw
        ts.push(rng.random_range(0.01..0.99));
    }
    ts
}

/// One named relation with its observed deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub relation: String,
    pub max_deviation: f64,
    pub pass: bool,
}

impl RelationCheck {
    pub fn new(relation: &str, max_deviation: f64) -> Self {
        RelationCheck {
            relation: relation.to_owned(),
            max_deviation,
            pass: max_deviation <= TOL,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "relation": self.relation,
            "max_deviation": self.max_deviation,
            "pass": self.pass,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub items: Vec<RelationCheck>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.items.iter().all(|c| c.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.items.iter().fold(0.0, |a, c| a.max(c.max_deviation))
    }

    pub fn get(&self, relation: &str) -> Option<&RelationCheck> {
        self.items.iter().find(|c| c.relation == relation)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self.items.iter().map(RelationCheck::to_json).collect::<Vec<_>>())
    }
}

fn max_over<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> f64 {
    max_over_in(items, f, true)
}

/// Max of `f` over `items`; runs on rayon when the feature is enabled and
/// `parallel` is requested, sequentially otherwise. The reduction is a plain
/// max, so both paths agree exactly.
fn max_over_in<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send, parallel: bool) -> f64 {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(&f).reduce(|| 0.0, f64::max);
    }
    let _ = parallel;
    items.iter().map(&f).fold(0.0, f64::max)
}

/// Checks the defining relations: every image is a projection, both side
/// sums equal the identity, and non-adjacent images multiply to zero.
pub fn check_gp(rep: &Representation) -> CheckReport {
    let g = &rep.graph;
    let d = rep.dim;
    let id = matrix::identity(d);

    let proj = max_over(&rep.images, matrix::projection_defect);

    let sum_side = |side: Side, count: usize| -> CMat {
        let mut s = matrix::zeros(d, d);
        for i in 0..count {
            s += rep.image(side, i);
        }
        s
    };
    let gp1_u = matrix::max_diff(&sum_side(Side::U, g.u_len()), &id);
    let gp1_v = matrix::max_diff(&sum_side(Side::V, g.v_len()), &id);

    let non_edges: Vec<(usize, usize)> = (0..g.u_len())
        .flat_map(|u| (0..g.v_len()).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    let gp2 = max_over(&non_edges, |&(u, v)| {
        matrix::max_abs(&(rep.image(Side::U, u) * rep.image(Side::V, v)))
    });

    CheckReport {
        items: vec![
            RelationCheck::new("projection", proj),
            RelationCheck::new("gp1_u", gp1_u),
            RelationCheck::new("gp1_v", gp1_v),
            RelationCheck::new("gp2", gp2),
        ],
    }
}

/// The edge-indexed generators `x_e = p_u p_v` of a representation.
#[derive(Debug, Clone)]
pub struct EdgeGeneratorFamily {
    graph: BipartiteGraph,
    dim: usize,
    mats: Vec<CMat>,
}

impl EdgeGeneratorFamily {
    pub fn generator(&self, edge: usize) -> &CMat {
        &self.mats[edge]
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }
}

pub fn edge_generators(rep: &Representation) -> EdgeGeneratorFamily {
    let mats = rep
        .graph
        .edges()
        .iter()
        .map(|&(u, v)| rep.image(Side::U, u) * rep.image(Side::V, v))
        .collect();
    EdgeGeneratorFamily {
        graph: rep.graph.clone(),
        dim: rep.dim,
        mats,
    }
}

/// Checks the relations of the edge generators:
///
/// * `gc1`: `x_e* x_f = 0` when `e` and `f` share no `U`-vertex,
/// * `gc2`: `x_e x_f* = 0` when they share no `V`-vertex,
/// * `gc3`/`gc4`: the sum of all `x_e*` acts as a unit from either side,
/// * `contraction_identity`: `x_e x_e* x_e = x_e²` for every edge.
pub fn check_gc(fam: &EdgeGeneratorFamily) -> CheckReport {
    check_gc_impl(fam, true)
}

/// Sequential twin of [`check_gc`], kept available for benchmarking the
/// parallel sweep against a like-for-like baseline.
pub fn check_gc_seq(fam: &EdgeGeneratorFamily) -> CheckReport {
    check_gc_impl(fam, false)
}

fn check_gc_impl(fam: &EdgeGeneratorFamily, parallel: bool) -> CheckReport {
    let g = &fam.graph;
    let edges = g.edges();
    let m = edges.len();

    let u_disjoint: Vec<(usize, usize)> = (0..m)
        .flat_map(|e| ((e + 1)..m).map(move |f| (e, f)))
        .filter(|&(e, f)| edges[e].0 != edges[f].0)
        .collect();
    let v_disjoint: Vec<(usize, usize)> = (0..m)
        .flat_map(|e| ((e + 1)..m).map(move |f| (e, f)))
        .filter(|&(e, f)| edges[e].1 != edges[f].1)
        .collect();

    let gc1 = max_over_in(
        &u_disjoint,
        |&(e, f)| matrix::max_abs(&(fam.mats[e].adjoint() * &fam.mats[f])),
        parallel,
    );
    let gc2 = max_over_in(
        &v_disjoint,
        |&(e, f)| matrix::max_abs(&(&fam.mats[e] * fam.mats[f].adjoint())),
        parallel,
    );

    let mut unit = matrix::zeros(fam.dim, fam.dim);
    for x in &fam.mats {
        unit += x.adjoint();
    }
    let singles: Vec<usize> = (0..m).collect();
    let gc3 = max_over_in(
        &singles,
        |&e| matrix::max_diff(&(&unit * &fam.mats[e]), &fam.mats[e]),
        parallel,
    );
    let gc4 = max_over_in(
        &singles,
        |&e| matrix::max_diff(&(&fam.mats[e] * &unit), &fam.mats[e]),
        parallel,
    );
    let contraction = max_over_in(
        &singles,
        |&e| {
            let x = &fam.mats[e];
            matrix::max_diff(&(x * x.adjoint() * x), &(x * x))
        },
        parallel,
    );

    CheckReport {
        items: vec![
            RelationCheck::new("gc1", gc1),
            RelationCheck::new("gc2", gc2),
            RelationCheck::new("gc3", gc3),
            RelationCheck::new("gc4", gc4),
            RelationCheck::new("contraction_identity", contraction),
        ],
    }
}

/// Product of the images along a vertex sequence (identity for the empty
/// word). Products over sequences that do not walk along edges vanish.
pub fn evaluate_word(rep: &Representation, labels: &[&str]) -> Result<CMat, ReprError> {
    let mut acc = matrix::identity(rep.dim);
    for l in labels {
        acc *= rep.image_by_label(l)?;
    }
    Ok(acc)
}

/// Collapses consecutive repeats; the resulting sequence must walk along
/// edges for the word's image to be nonzero.
pub fn is_vanishing_word(g: &BipartiteGraph, labels: &[&str]) -> Result<bool, ReprError> {
    let mut collapsed: Vec<&str> = Vec::with_capacity(labels.len());
    for &l in labels {
        g.vertex(l).map_err(|_| ReprError::UnknownVertex(l.to_owned()))?;
        if collapsed.last() != Some(&l) {
            collapsed.push(l);
        }
    }
    if collapsed.is_empty() {
        return Ok(false);
    }
    Ok(!g.is_path(&collapsed).expect("vertices checked above"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// Whether the vanishing statement applies: it does unless the middle
    /// vertex together with a second common neighbor spans a 4-cycle with
    /// the outer pair.
    pub applicable: bool,
    pub norm: f64,
    pub pass: bool,
}

/// Checks the three-factor vanishing criterion: for `x1, x2` on one side
/// and `y` opposite, the product `p_{x1} p_y p_{x2}` must vanish unless `y`
/// is a common neighbor of `x1, x2` and they have another one.
pub fn sandwich_check(
    rep: &Representation,
    x1: &str,
    y: &str,
    x2: &str,
) -> Result<SandwichReport, ReprError> {
    let g = &rep.graph;
    let (s1, i1) = g.vertex(x1).map_err(|_| ReprError::UnknownVertex(x1.to_owned()))?;
    let (sy, _) = g.vertex(y).map_err(|_| ReprError::UnknownVertex(y.to_owned()))?;
    let (s2, i2) = g.vertex(x2).map_err(|_| ReprError::UnknownVertex(x2.to_owned()))?;
    if s1 != s2 || sy == s1 {
        return Err(ReprError::SideMismatch(format!(
            "need {x1}, {x2} on one side and {y} on the other"
        )));
    }
    if x1 == x2 || i1 == i2 {
        return Err(ReprError::SideMismatch(format!(
            "outer vertices {x1}, {x2} must be distinct"
        )));
    }

    let n1 = g.neighbors(x1).expect("vertex checked above");
    let n2 = g.neighbors(x2).expect("vertex checked above");
    let common: Vec<&String> = n1.iter().filter(|l| n2.contains(l)).collect();
    let hypothesis = common.iter().any(|l| l.as_str() == y) && common.len() >= 2;

    let prod = rep.image_by_label(x1)? * rep.image_by_label(y)? * rep.image_by_label(x2)?;
    let norm = matrix::max_abs(&prod);
    Ok(SandwichReport {
        applicable: !hypothesis,
        norm,
        pass: hypothesis || norm <= TOL,
    })
}

/// Dimension of the space of matrices commuting with every image; one means
/// irreducible. Solved as the nullity of the stacked Sylvester system.
pub fn commutant_dim(rep: &Representation) -> usize {
    let d = rep.dim;
    if d == 0 {
        return 0;
    }
    let id = matrix::identity(d);
    let mut rows = Vec::new();
    for m in &rep.images {
        // X M = M X  <=>  (M^T ⊗ I − I ⊗ M) vec(X) = 0
        rows.push(m.transpose().kronecker(&id) - id.kronecker(m));
    }
    let mut stacked = matrix::zeros(rows.len() * d * d, d * d);
    for (i, r) in rows.iter().enumerate() {
        stacked.view_mut((i * d * d, 0), (d * d, d * d)).copy_from(r);
    }
    d * d - matrix::rank(&stacked)
}

/// Extends a representation of a subgraph by zero to the ambient graph.
///
/// The subgraph may match with its sides swapped; subgraph edges must be
/// edges of the ambient graph.
pub fn subgraph_quotient_rep(
    g: &BipartiteGraph,
    h: &BipartiteGraph,
    rep_h: &Representation,
) -> Result<Representation, ReprError> {
    if rep_h.graph != *h {
        return Err(ReprError::GraphMismatch);
    }
    // every vertex of h must exist in g
    for l in h.u_labels().iter().chain(h.v_labels()) {
        g.vertex(l)
            .map_err(|_| ReprError::NotASubgraph(format!("vertex `{l}` not in the ambient graph")))?;
    }
    for e in 0..h.edge_count() {
        let (a, b) = h.edge_labels(e);
        g.edge_index_by_labels(a, b).map_err(|_| {
            ReprError::NotASubgraph(format!("edge {{{a}, {b}}} not in the ambient graph"))
        })?;
    }
    let d = rep_h.dim;
    let mut images = vec![matrix::zeros(d, d); g.vertex_count()];
    for side in [Side::U, Side::V] {
        let labels = match side {
            Side::U => h.u_labels(),
            Side::V => h.v_labels(),
        };
        for (i, l) in labels.iter().enumerate() {
            let (gs, gi) = g.vertex(l).expect("checked above");
            images[g.global_index(gs, gi)] = rep_h.image(side, i).clone();
        }
    }
    Ok(Representation {
        graph: g.clone(),
        dim: d,
        images,
    })
}
