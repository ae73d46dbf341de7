//! Projection families in generic position at finite dimension.
//!
//! For a connected graph with equally many vertices on both sides, a family
//! of `k × k` blocks `C_{uv}` — zero off the edge pattern, invertible on it
//! — assembling into a block unitary gives rise to the projection family
//!
//! ```text
//! P_u[v1, v2] = C_{u v1}* C_{u v2}        P_v = v-th coordinate block
//! ```
//!
//! on `ℂ^{k·|V|}`, and every generic-position family arises this way up to
//! unitary equivalence. The block-unitarity conditions are
//!
//! * column condition: `Σ_u C_{u v1}* C_{u v2} = δ_{v1 v2} I`
//! * row condition:    `Σ_v C_{u1 v} C_{u2 v}* = δ_{u1 u2} I`
//!
//! Synthesis looks for such a family by alternating projections: snap the
//! working matrix to the nearest unitary (polar factor), zero the
//! off-pattern blocks, repeat. Patterns admitting no unitary completion
//! surface as nonconvergence or as a degenerate edge block, never as a
//! silently accepted family.
//!
//! Finite dimension is genuinely more restrictive than the general theory:
//! all vertex subspaces must share one dimension `k`, which forces
//! `|U| = |V|`, and "injective with dense range" hardens into
//! "invertible".

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side};
use crate::matrix::{self, CMat};
use crate::repr::{check_gp, Representation};

/// Residual level at which a synthesized family is accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;
/// Smallest singular value an edge block must clear to count as invertible.
pub const MIN_BLOCK_SINGULAR: f64 = 1e-6;

pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenposError {
    #[error("the two sides have {u} and {v} vertices; equal counts are required")]
    SideCountMismatch { u: usize, v: usize },
    #[error("the graph is not connected")]
    NotConnected,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Nonconvergence { residual: f64, iterations: usize },
    #[error("edge block {edge} is numerically singular (smallest singular value {sigma_min:.3e})")]
    DegenerateBlock { edge: String, sigma_min: f64 },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("vertex subspace ranks differ: {0:?}")]
    RankMismatch(Vec<usize>),
    #[error("family is not in generic position at edge {0}")]
    NotGenericPosition(String),
    #[error("the graph is not a complete 2-by-2 cycle")]
    NotK22,
}

/// Blocks `C_{uv}` over the edges of a connected square-sided graph.
#[derive(Debug, Clone)]
pub struct ContractionFamily {
    graph: BipartiteGraph,
    block_dim: usize,
    /// one block per canonical edge
    blocks: Vec<CMat>,
}

impl ContractionFamily {
    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block(&self, edge: usize) -> &CMat {
        &self.blocks[edge]
    }

    /// The assembled `|U|·k × |V|·k` block matrix (zero off the pattern).
    pub fn assemble(&self) -> CMat {
        let k = self.block_dim;
        let n = self.graph.v_len();
        let mut w = matrix::zeros(self.graph.u_len() * k, n * k);
        for (e, &(u, v)) in self.graph.edges().iter().enumerate() {
            w.view_mut((u * k, v * k), (k, k)).copy_from(&self.blocks[e]);
        }
        w
    }

    /// Largest deviation from the column and row conditions.
    pub fn residual(&self) -> f64 {
        let w = self.assemble();
        residual_of(&w)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut blocks = serde_json::Map::new();
        for (e, b) in self.blocks.iter().enumerate() {
            blocks.insert(self.graph.edge_string(e), matrix::to_json_rows(b));
        }
        json!({ "k": self.block_dim, "blocks": blocks })
    }
}

fn residual_of(w: &CMat) -> f64 {
    let id_cols = matrix::identity(w.ncols());
    let id_rows = matrix::identity(w.nrows());
    let col = matrix::max_diff(&(w.adjoint() * w), &id_cols);
    let row = matrix::max_diff(&(w * w.adjoint()), &id_rows);
    col.max(row)
}

fn check_preconditions(g: &BipartiteGraph) -> Result<(), GenposError> {
    if g.u_len() != g.v_len() {
        return Err(GenposError::SideCountMismatch {
            u: g.u_len(),
            v: g.v_len(),
        });
    }
    if !g.is_connected() {
        return Err(GenposError::NotConnected);
    }
    Ok(())
}

/// Checks the stored family against its own invariants: the pattern is
/// respected, both unitarity conditions hold at the acceptance residual,
/// and every edge block is comfortably invertible.
pub fn validate_family(cf: &ContractionFamily) -> Result<(), GenposError> {
    let res = cf.residual();
    if res > ACCEPT_RESIDUAL {
        return Err(GenposError::InvariantViolation(format!(
            "unitarity residual {res:.3e} exceeds {ACCEPT_RESIDUAL:.0e}"
        )));
    }
    for (e, b) in cf.blocks.iter().enumerate() {
        let sigma = matrix::min_singular_value(b);
        if sigma < MIN_BLOCK_SINGULAR {
            return Err(GenposError::DegenerateBlock {
                edge: cf.graph.edge_string(e),
                sigma_min: sigma,
            });
        }
    }
    Ok(())
}

/// Outcome of a synthesis run, residual history included for reporting.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub family: ContractionFamily,
    pub iterations: usize,
    pub residual: f64,
}

/// Searches for a contraction family on `g` with block size `k` by
/// alternating projections from a seeded Gaussian start.
///
/// Iteration stops once the residual drops below `tol`; the result is
/// accepted if it is below [`ACCEPT_RESIDUAL`] and every edge block is
/// invertible, and reported as [`GenposError::Nonconvergence`] or
/// [`GenposError::DegenerateBlock`] otherwise.
pub fn synthesize(
    g: &BipartiteGraph,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<Synthesis, GenposError> {
    check_preconditions(g)?;
    assert!(k >= 1, "block dimension must be positive");
    let n = g.u_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // seeded Gaussian start on the pattern
    let mut w = matrix::zeros(n * k, n * k);
    for &(u, v) in g.edges() {
        for i in 0..k {
            for j in 0..k {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                w[(u * k + i, v * k + j)] = Complex::new(re, im);
            }
        }
    }

    let mut residual = residual_of(&w);
    let mut iterations = 0;
    for it in 1..=max_iter {
        let unitary = matrix::polar_unitary(&w);
        w = apply_pattern(g, k, &unitary);
        residual = residual_of(&w);
        iterations = it;
        if residual <= tol {
            break;
        }
    }
    if residual > ACCEPT_RESIDUAL {
        return Err(GenposError::Nonconvergence {
            residual,
            iterations,
        });
    }

    let blocks: Vec<CMat> = g
        .edges()
        .iter()
        .map(|&(u, v)| w.view((u * k, v * k), (k, k)).into_owned())
        .collect();
    let family = ContractionFamily {
        graph: g.clone(),
        block_dim: k,
        blocks,
    };
    validate_family(&family)?;
    Ok(Synthesis {
        family,
        iterations,
        residual,
    })
}

fn apply_pattern(g: &BipartiteGraph, k: usize, w: &CMat) -> CMat {
    let mut out = matrix::zeros(w.nrows(), w.ncols());
    for &(u, v) in g.edges() {
        let view = w.view((u * k, v * k), (k, k)).into_owned();
        out.view_mut((u * k, v * k), (k, k)).copy_from(&view);
    }
    out
}

/// A projection family built from contraction blocks: a representation
/// whose `V`-side images are the coordinate block projections.
#[derive(Debug, Clone)]
pub struct ProjectionFamilyGP {
    pub rep: Representation,
    pub block_dim: usize,
}

/// Assembles the block projection family of a contraction family.
pub fn build_projection_family(cf: &ContractionFamily) -> Result<ProjectionFamilyGP, GenposError> {
    validate_family(cf)?;
    let g = &cf.graph;
    let k = cf.block_dim;
    let n = g.v_len();
    let d = n * k;
    let w = cf.assemble();

    let mut images = Vec::with_capacity(g.vertex_count());
    for u in 0..g.u_len() {
        // row compression: P_u = W_u* W_u for the u-th block row
        let row = w.view((u * k, 0), (k, d)).into_owned();
        images.push(row.adjoint() * row);
    }
    for v in 0..n {
        let mut p = matrix::zeros(d, d);
        for i in 0..k {
            p[(v * k + i, v * k + i)] = Complex::new(1.0, 0.0);
        }
        images.push(p);
    }
    let rep = Representation::from_images(g.clone(), d, images);
    debug_assert!(check_gp(&rep).pass());
    Ok(ProjectionFamilyGP { rep, block_dim: k })
}

#[derive(Debug, Clone)]
pub struct EdgePositionCheck {
    pub edge: String,
    pub dim_im_u_ker_v: usize,
    pub dim_ker_u_im_v: usize,
}

#[derive(Debug, Clone)]
pub struct GenericPositionReport {
    pub per_edge: Vec<EdgePositionCheck>,
    pub pass: bool,
}

impl GenericPositionReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pass": self.pass,
            "edges": self.per_edge.iter().map(|c| json!({
                "edge": c.edge,
                "dim_im_ker": c.dim_im_u_ker_v,
                "dim_ker_im": c.dim_ker_u_im_v,
            })).collect::<Vec<_>>(),
        })
    }
}

/// For every edge `{u, v}`, the dimensions of `im P_u ∩ ker P_v` and
/// `ker P_u ∩ im P_v`, computed by rank arithmetic; generic position means
/// both vanish everywhere.
pub fn check_generic_position(rep: &Representation) -> GenericPositionReport {
    let g = rep.graph();
    let d = rep.dim();
    let id = matrix::identity(d);
    let per_edge: Vec<EdgePositionCheck> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let pu = rep.image(Side::U, u);
            let pv = rep.image(Side::V, v);
            let ker_v = &id - pv;
            let ker_u = &id - pu;
            EdgePositionCheck {
                edge: g.edge_string(e),
                dim_im_u_ker_v: matrix::intersection_dim(pu, &ker_v),
                dim_ker_u_im_v: matrix::intersection_dim(&ker_u, pv),
            }
        })
        .collect();
    let pass = per_edge
        .iter()
        .all(|c| c.dim_im_u_ker_v == 0 && c.dim_ker_u_im_v == 0);
    GenericPositionReport { per_edge, pass }
}

/// Recovers contraction blocks from a projection family: with orthonormal
/// range bases `B_x` of the `im P_x` (pivoted QR, deterministic), the block
/// of an edge is `B_u* B_v`. Requires generic position and equal ranks.
pub fn extract_contractions(rep: &Representation) -> Result<ContractionFamily, GenposError> {
    let g = rep.graph();
    check_preconditions(g)?;
    if !check_gp(rep).pass() {
        return Err(GenposError::InvariantViolation(
            "family does not satisfy the defining relations".to_owned(),
        ));
    }
    let gp = check_generic_position(rep);
    if !gp.pass {
        let bad = gp
            .per_edge
            .iter()
            .find(|c| c.dim_im_u_ker_v != 0 || c.dim_ker_u_im_v != 0)
            .expect("some edge fails");
        return Err(GenposError::NotGenericPosition(bad.edge.clone()));
    }

    let ranks: Vec<usize> = (0..g.vertex_count())
        .map(|x| matrix::rank(rep.image_global(x)))
        .collect();
    let r = ranks[0];
    if ranks.iter().any(|&x| x != r) {
        return Err(GenposError::RankMismatch(ranks));
    }

    let basis: Vec<CMat> = (0..g.vertex_count())
        .map(|x| matrix::range_basis(rep.image_global(x), r))
        .collect();
    let blocks: Vec<CMat> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let bu = &basis[g.global_index(Side::U, u)];
            let bv = &basis[g.global_index(Side::V, v)];
            bu.adjoint() * bv
        })
        .collect();
    let family = ContractionFamily {
        graph: g.clone(),
        block_dim: r,
        blocks,
    };
    validate_family(&family)?;
    Ok(family)
}

/// The two-projection normal form over a complete 2x2 cycle.
#[derive(Debug, Clone)]
pub struct HalmosDecomposition {
    pub c: CMat,
    pub s: CMat,
    pub c_squared: CMat,
    pub s_squared: CMat,
    pub cs: CMat,
    /// `‖C² + S² − I‖` in max-norm.
    pub residual_identity: f64,
}

/// Decomposes a generic-position family over a complete 2x2 cycle into its
/// positive operators `C`, `S` with `C² + S² = I`.
///
/// In an orthonormal basis adapted to `im P_{u1} ⊕ im P_{u2}`, the matrix of
/// `P_{v1}` has blocks `[[C², B],[B*, D]]`; conjugating `D` by the unitary
/// polar factor of `B` aligns the two subspaces and turns `D` into `S²`.
pub fn halmos_decompose(rep: &Representation) -> Result<HalmosDecomposition, GenposError> {
    let g = rep.graph();
    if g.u_len() != 2 || g.v_len() != 2 || g.edge_count() != 4 {
        return Err(GenposError::NotK22);
    }
    if !check_gp(rep).pass() {
        return Err(GenposError::InvariantViolation(
            "family does not satisfy the defining relations".to_owned(),
        ));
    }
    let gp = check_generic_position(rep);
    if !gp.pass {
        let bad = gp
            .per_edge
            .iter()
            .find(|c| c.dim_im_u_ker_v != 0 || c.dim_ker_u_im_v != 0)
            .expect("some edge fails");
        return Err(GenposError::NotGenericPosition(bad.edge.clone()));
    }
    let r1 = matrix::rank(rep.image(Side::U, 0));
    let r2 = matrix::rank(rep.image(Side::U, 1));
    if r1 != r2 {
        return Err(GenposError::RankMismatch(vec![r1, r2]));
    }

    let b1 = matrix::range_basis(rep.image(Side::U, 0), r1);
    let b2 = matrix::range_basis(rep.image(Side::U, 1), r2);
    let q = rep.image(Side::V, 0);

    let c2 = b1.adjoint() * q * &b1;
    let b = b1.adjoint() * q * &b2;
    let d = b2.adjoint() * q * &b2;

    let phase = matrix::polar_unitary(&b);
    let s2 = &phase * d * phase.adjoint();
    let cs = &b * phase.adjoint();

    let residual_identity = matrix::max_diff(&(&c2 + &s2), &matrix::identity(r1));
    Ok(HalmosDecomposition {
        c: matrix::sqrt_psd(&c2),
        s: matrix::sqrt_psd(&s2),
        c_squared: c2,
        s_squared: s2,
        cs,
        residual_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, enumerate_k22, BipartiteGraph};
    use crate::matrix::{max_diff, to_json_rows};
    use crate::repr::rep_sigma;

    fn k22() -> BipartiteGraph {
        complete_bipartite(2, 2)
    }

    /// The explicit real family on the 2x2 cycle with parameter t = c².
    fn halmos_family(t: f64) -> ContractionFamily {
        let c = (1.0 - t).sqrt();
        let s = t.sqrt();
        let blocks = vec![
            matrix::scalar(c),
            matrix::scalar(s),
            matrix::scalar(s),
            matrix::scalar(-c),
        ];
        ContractionFamily {
            graph: k22(),
            block_dim: 1,
            blocks,
        }
    }

    #[test]
    fn synthesis_on_the_complete_cycle_converges() {
        for k in [1, 3] {
            let syn = synthesize(&k22(), k, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            assert!(syn.residual <= ACCEPT_RESIDUAL, "k={k}");
            assert!(syn.family.residual() <= ACCEPT_RESIDUAL);
        }
    }

    #[test]
    fn synthesis_rejects_bad_inputs() {
        assert!(matches!(
            synthesize(&complete_bipartite(2, 3), 1, 0, 100, 1e-10),
            Err(GenposError::SideCountMismatch { u: 2, v: 3 })
        ));
        let disconnected = BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2"],
            [("u1", "v1"), ("u2", "v2")],
        )
        .unwrap();
        assert!(matches!(
            synthesize(&disconnected, 1, 0, 100, 1e-10),
            Err(GenposError::NotConnected)
        ));
    }

    #[test]
    fn triangular_pattern_cannot_complete() {
        // u1-v1, u2-v1, u2-v2: a unitary with this block pattern forces the
        // off-diagonal edge block to vanish
        let path = BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2"],
            [("u1", "v1"), ("u2", "v1"), ("u2", "v2")],
        )
        .unwrap();
        for seed in 0..3 {
            let out = synthesize(&path, 1, seed, 2000, 1e-10);
            assert!(
                matches!(
                    out,
                    Err(GenposError::Nonconvergence { .. }) | Err(GenposError::DegenerateBlock { .. })
                ),
                "seed {seed}: {out:?}"
            );
        }
    }

    #[test]
    fn built_families_satisfy_everything() {
        let syn = synthesize(&k22(), 2, 7, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        let pf = build_projection_family(&syn.family).unwrap();
        assert!(check_gp(&pf.rep).pass());
        assert!(check_generic_position(&pf.rep).pass);
    }

    #[test]
    fn explicit_halmos_blocks_rebuild_the_two_by_two_forms() {
        let t = 0.25;
        let cf = halmos_family(t);
        assert!(cf.residual() < 1e-15);
        let pf = build_projection_family(&cf).unwrap();
        // P_{u1} = [[1-t, sqrt(t(1-t))], [sqrt(t(1-t)), t]]
        let s = (t * (1.0 - t)).sqrt();
        let expected = matrix::from_real_rows(&[&[1.0 - t, s], &[s, t]]);
        assert!(max_diff(pf.rep.image(Side::U, 0), &expected) < 1e-12);
        // P_{v1} is the first coordinate projection
        let coord = matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(max_diff(pf.rep.image(Side::V, 0), &coord) < 1e-12);
    }

    #[test]
    fn zeroed_edge_block_is_rejected() {
        let mut cf = halmos_family(0.5);
        cf.blocks[1] = matrix::zeros(1, 1);
        assert!(build_projection_family(&cf).is_err());
    }

    #[test]
    fn degenerate_parameter_fails_generic_position() {
        // t = 0 aligns ranges: im P_{u1} = ker P_{v2}
        let cf = halmos_family(0.0);
        let w = cf.assemble();
        assert!(residual_of(&w) < 1e-12);
        let g = k22();
        let k = 1;
        let mut images = Vec::new();
        for u in 0..2 {
            let row = w.view((u * k, 0), (k, 2)).into_owned();
            images.push(row.adjoint() * row);
        }
        for v in 0..2 {
            let mut p = matrix::zeros(2, 2);
            p[(v, v)] = Complex::new(1.0, 0.0);
            images.push(p);
        }
        let rep = Representation::from_images(g, 2, images);
        assert!(!check_generic_position(&rep).pass);
        assert!(matches!(
            extract_contractions(&rep),
            Err(GenposError::NotGenericPosition(_))
        ));
    }

    #[test]
    fn extraction_round_trip_preserves_traces() {
        let syn = synthesize(&k22(), 3, 11, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        let pf = build_projection_family(&syn.family).unwrap();

        // all vertex subspaces share the block rank
        let g = pf.rep.graph().clone();
        for x in 0..g.vertex_count() {
            assert_eq!(matrix::rank(pf.rep.image_global(x)), 3);
        }

        let extracted = extract_contractions(&pf.rep).unwrap();
        assert_eq!(extracted.block_dim(), 3);
        let rebuilt = build_projection_family(&extracted).unwrap();

        for x in 0..g.vertex_count() {
            for y in 0..g.vertex_count() {
                let t1 = (pf.rep.image_global(x) * pf.rep.image_global(y)).trace();
                let t2 = (rebuilt.rep.image_global(x) * rebuilt.rep.image_global(y)).trace();
                assert!((t1 - t2).norm() <= 1e-8, "tr(P_{x} P_{y}): {t1} vs {t2}");
            }
        }
    }

    #[test]
    fn halmos_decomposition_ground_truth() {
        // scalar case: t = 1/2 gives C = S = 1/sqrt(2)
        let pf = build_projection_family(&halmos_family(0.5)).unwrap();
        let h = halmos_decompose(&pf.rep).unwrap();
        assert!(h.residual_identity <= 1e-12);
        assert!((h.c[(0, 0)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((h.s[(0, 0)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        // a two-dimensional irreducible has C² with eigenvalue 1 - t
        let g = k22();
        let quad = enumerate_k22(&g).remove(0);
        let t = 0.3;
        let sigma = rep_sigma(&g, &quad, t).unwrap();
        let h = halmos_decompose(&sigma).unwrap();
        assert!(h.residual_identity <= 1e-12);
        assert!((h.c_squared[(0, 0)].re - (1.0 - t)).abs() < 1e-12);

        // synthesized blocks at k = 2
        let syn = synthesize(&k22(), 2, 5, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        let pf = build_projection_family(&syn.family).unwrap();
        let h = halmos_decompose(&pf.rep).unwrap();
        assert!(h.residual_identity <= ACCEPT_RESIDUAL, "{}", h.residual_identity);
        assert!(matrix::smallest_eigenvalue_hermitian(&h.c) > 0.0);
        assert!(matrix::smallest_eigenvalue_hermitian(&h.s) > 0.0);

        // anything but a complete 2x2 cycle is rejected
        let path = BipartiteGraph::new(
            ["u1", "u2"],
            ["v1", "v2"],
            [("u1", "v1"), ("u2", "v1"), ("u2", "v2")],
        )
        .unwrap();
        let rep = crate::repr::standard_rep(&path, &[0.5]).unwrap();
        assert!(matches!(halmos_decompose(&rep), Err(GenposError::NotK22)));
    }

    #[test]
    fn family_json_shape() {
        let cf = halmos_family(0.5);
        let v = cf.to_json();
        assert_eq!(v["k"], 1);
        assert!(v["blocks"]["u1,v1"].is_array());
        let b = to_json_rows(cf.block(0));
        assert_eq!(v["blocks"]["u1,v1"], b);
    }
}
