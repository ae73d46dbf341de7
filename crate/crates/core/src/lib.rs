//! C*-algebras generated by two partitions of unity whose orthogonality
//! pattern is prescribed by a bipartite graph.
//!
//! The combinatorics of a graph's 4-cycles (its `K_{2,2}` subgraphs) together
//! with its "loose" edges determine the algebra up to isomorphism, and this
//! crate works entirely at that level:
//!
//! * [`graph`] — the bipartite graph model, 4-cycle enumeration, hypergraph
//!   import, and loose-edge reductions.
//! * [`skeleton`] — the derived edge/4-cycle structure, a relabeling-invariant
//!   summary, and a canonical certificate for it.
//! * [`iso`] — the isomorphism decision: search for an edge bijection
//!   preserving 4-cycles and their opposite-edge pairings, plus a brute-force
//!   oracle and witness verification.
//! * [`repr`] — one- and two-dimensional matrix representations, relation
//!   checkers, and numerical verification of the homomorphism induced by a
//!   witness bijection.
//! * [`genpos`] — synthesis and verification of projection families in
//!   generic position via patterned unitary completion.
//! * [`census`] — enumeration of small graphs up to isomorphism and their
//!   grouping into algebra-isomorphism classes.
//! * [`report`] — the aggregate analysis report used by the CLI.
//!
//! With the default `parallel` feature the heavier sweeps (brute-force
//! search, census enumeration, relation checks) run on rayon; disabling the
//! feature falls back to equivalent sequential code paths with identical
//! results.

pub mod census;
pub mod genpos;
pub mod graph;
pub mod iso;
pub mod matrix;
pub mod report;
pub mod repr;
pub mod skeleton;

/// Absolute tolerance (entrywise max-norm) for all floating-point relation
/// checks. The constructions only involve square roots of numbers in (0,1),
/// so honest deviations are a few ulps.
pub const TOL: f64 = 1e-9;
