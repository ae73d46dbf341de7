//! Numerical verification of the homomorphism induced by a witness edge
//! bijection.
//!
//! A bijection `f` between the edge sets carrying 4-cycles to 4-cycles and
//! preserving opposite pairs sends the generator of a vertex `x` to the sum
//! of the products `p̂_{u'} p̂_{v'}` over the image edges `I(x) = {f(e) : x ∈
//! e}`. Evaluated in a concrete representation of the target, the resulting
//! matrices must again be a projection family for the source graph, and
//! applying the reverse-indexed formula to them must reproduce the target's
//! own generator images. These are necessary conditions, checked to
//! tolerance; they cannot certify more than the representation separates.

use crate::graph::{BipartiteGraph, Side};
use crate::iso::{verify_witness, EdgeBijection};
use crate::matrix::{self, CMat};

use super::{check_gp, standard_rep, CheckReport, RelationCheck, ReprError, Representation};

/// Index data for a witness bijection: for each source vertex the image
/// edges `I(x)`, and for each target vertex the preimage edges `J(y)`.
#[derive(Debug, Clone)]
pub struct PhiContext {
    source: BipartiteGraph,
    target: BipartiteGraph,
    /// target edge ids, per global source vertex
    i_sets: Vec<Vec<usize>>,
    /// source edge ids, per global target vertex
    j_sets: Vec<Vec<usize>>,
}

impl PhiContext {
    pub fn new(
        g: &BipartiteGraph,
        g2: &BipartiteGraph,
        f: &EdgeBijection,
    ) -> Result<Self, ReprError> {
        if f.forward().len() != g.edge_count() || f.backward().len() != g2.edge_count() {
            return Err(ReprError::WitnessInvalid(format!(
                "bijection covers {} edges, graphs have {} and {}",
                f.forward().len(),
                g.edge_count(),
                g2.edge_count()
            )));
        }
        let mut i_sets = vec![Vec::new(); g.vertex_count()];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            i_sets[g.global_index(Side::U, u)].push(f.map(e));
            i_sets[g.global_index(Side::V, v)].push(f.map(e));
        }
        let mut j_sets = vec![Vec::new(); g2.vertex_count()];
        for (e2, &(u, v)) in g2.edges().iter().enumerate() {
            j_sets[g2.global_index(Side::U, u)].push(f.unmap(e2));
            j_sets[g2.global_index(Side::V, v)].push(f.unmap(e2));
        }
        for s in i_sets.iter_mut().chain(j_sets.iter_mut()) {
            s.sort_unstable();
        }
        Ok(PhiContext {
            source: g.clone(),
            target: g2.clone(),
            i_sets,
            j_sets,
        })
    }

    pub fn image_edges(&self, side: Side, index: usize) -> &[usize] {
        &self.i_sets[self.source.global_index(side, index)]
    }

    pub fn preimage_edges(&self, side: Side, index: usize) -> &[usize] {
        &self.j_sets[self.target.global_index(side, index)]
    }
}

/// Sum of `p̂_{u'} p̂_{v'}` over the image edges of one source vertex,
/// evaluated in a representation of the target graph. Vertices incident to
/// no edge give the zero matrix.
pub fn phi_image(
    ctx: &PhiContext,
    label: &str,
    target_rep: &Representation,
) -> Result<CMat, ReprError> {
    if *target_rep.graph() != ctx.target {
        return Err(ReprError::GraphMismatch);
    }
    let (side, idx) = ctx
        .source
        .vertex(label)
        .map_err(|_| ReprError::UnknownVertex(label.to_owned()))?;
    Ok(phi_image_indexed(ctx, side, idx, target_rep))
}

fn phi_image_indexed(
    ctx: &PhiContext,
    side: Side,
    idx: usize,
    target_rep: &Representation,
) -> CMat {
    let mut acc = matrix::zeros(target_rep.dim(), target_rep.dim());
    for &e2 in &ctx.i_sets[ctx.source.global_index(side, idx)] {
        let (u, v) = ctx.target.edges()[e2];
        acc += target_rep.image(Side::U, u) * target_rep.image(Side::V, v);
    }
    acc
}

/// Verifies a witness bijection numerically in the standard representation
/// of the target graph:
///
/// 1. `projection` — every transported generator is a projection,
/// 2. `partition_u` / `partition_v` — the side sums equal the identity,
/// 3. `orthogonality` — non-adjacent transported generators annihilate,
/// 4. `round_trip` — applying the reverse-indexed sum to the transported
///    generators reproduces each target generator image.
///
/// The bijection must pass [`verify_witness`] first.
pub fn verify_phi(
    g: &BipartiteGraph,
    g2: &BipartiteGraph,
    f: &EdgeBijection,
    t_samples: &[f64],
) -> Result<CheckReport, ReprError> {
    let report = verify_witness(g, g2, f).map_err(|e| ReprError::WitnessInvalid(e.to_string()))?;
    if !report.ok {
        return Err(ReprError::WitnessInvalid(
            report.violation.unwrap_or_else(|| "unknown violation".to_owned()),
        ));
    }

    let names = ["projection", "partition_u", "partition_v", "orthogonality", "round_trip"];
    if g2.edge_count() == 0 {
        // both algebras degenerate; nothing to evaluate
        return Ok(CheckReport {
            items: names.iter().map(|n| RelationCheck::new(n, 0.0)).collect(),
        });
    }

    let ctx = PhiContext::new(g, g2, f)?;
    let rep2 = standard_rep(g2, t_samples)?;
    debug_assert!(check_gp(&rep2).pass());
    let d = rep2.dim();
    let id = matrix::identity(d);

    let images: Vec<CMat> = (0..g.vertex_count())
        .map(|x| {
            let (side, idx) = if x < g.u_len() {
                (Side::U, x)
            } else {
                (Side::V, x - g.u_len())
            };
            phi_image_indexed(&ctx, side, idx, &rep2)
        })
        .collect();

    let projection = images
        .iter()
        .map(matrix::projection_defect)
        .fold(0.0, f64::max);

    let mut sum_u = matrix::zeros(d, d);
    for img in images.iter().take(g.u_len()) {
        sum_u += img;
    }
    let mut sum_v = matrix::zeros(d, d);
    for img in images.iter().skip(g.u_len()) {
        sum_v += img;
    }
    let partition_u = matrix::max_diff(&sum_u, &id);
    let partition_v = matrix::max_diff(&sum_v, &id);

    let mut orthogonality: f64 = 0.0;
    for u in 0..g.u_len() {
        for v in 0..g.v_len() {
            if !g.has_edge(u, v) {
                let prod = &images[u] * &images[g.u_len() + v];
                orthogonality = orthogonality.max(matrix::max_abs(&prod));
            }
        }
    }

    // reverse direction: J-indexed sums of the transported generators must
    // reproduce the target's own generator images
    let mut round_trip: f64 = 0.0;
    for y in 0..g2.vertex_count() {
        let mut acc = matrix::zeros(d, d);
        for &e in &ctx.j_sets[y] {
            let (u, v) = g.edges()[e];
            acc += &images[g.global_index(Side::U, u)] * &images[g.global_index(Side::V, v)];
        }
        round_trip = round_trip.max(matrix::max_diff(&acc, rep2.image_global(y)));
    }

    let values = [projection, partition_u, partition_v, orthogonality, round_trip];
    Ok(CheckReport {
        items: names
            .iter()
            .zip(values)
            .map(|(n, v)| RelationCheck::new(n, v))
            .collect(),
    })
}
