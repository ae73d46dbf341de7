//! Aggregate reports: the structural analysis of one graph (derived
//! structure, skeleton, certificate, non-nuclearity advisory, scalar-summand
//! count) and the full relation check of its standard representation.

use serde_json::json;

use crate::graph::{contains_k23, reduce_all_loose, BipartiteGraph, Quadruple, Side};
use crate::matrix;
use crate::repr::{
    check_gc, check_gp, commutant_dim, edge_generators, evaluate_word, is_vanishing_word,
    sandwich_check, standard_rep, standard_summands, CheckReport, ReprError, Representation,
};
use crate::skeleton::{certificate_hex, derived_structure, spec_skeleton, SpecSkeleton};
use crate::TOL;

/// Advisory attached when a complete 2x3 pattern embeds into the graph: the
/// algebra then fails both approximation properties.
pub const K23_ADVISORY: &str = "not nuclear, not exact";

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub graph: BipartiteGraph,
    pub quadruples: Vec<Quadruple>,
    pub loose: Vec<usize>,
    pub skeleton: SpecSkeleton,
    pub certificate: String,
    pub k23_flag: bool,
    pub advisory: Option<String>,
    pub scalar_summands: usize,
}

pub fn analyze(g: &BipartiteGraph) -> AnalysisReport {
    let ds = derived_structure(g);
    let k23_flag = contains_k23(g);
    let (_, scalar_summands) = reduce_all_loose(g);
    AnalysisReport {
        certificate: certificate_hex(&ds),
        skeleton: spec_skeleton(g),
        quadruples: ds.quadruples,
        loose: ds.loose,
        k23_flag,
        advisory: k23_flag.then(|| K23_ADVISORY.to_owned()),
        scalar_summands,
        graph: g.clone(),
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> serde_json::Value {
        let g = &self.graph;
        json!({
            "graph": {
                "u_count": g.u_len(),
                "v_count": g.v_len(),
                "edge_count": g.edge_count(),
                "edges": (0..g.edge_count()).map(|e| g.edge_string(e)).collect::<Vec<_>>(),
            },
            "quadruples": self.quadruples.iter().map(|q| json!({
                "edges": q.members.iter().map(|&e| g.edge_string(e)).collect::<Vec<_>>(),
                "pairing": q.pairing.iter()
                    .map(|p| p.iter().map(|&e| g.edge_string(e)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "loose": self.loose.iter().map(|&e| g.edge_string(e)).collect::<Vec<_>>(),
            "skeleton": self.skeleton.to_json(),
            "certificate": self.certificate,
            "k23": self.k23_flag,
            "advisory": self.advisory,
            "scalar_summands": self.scalar_summands,
        })
    }
}

/// Relation report for the standard representation of one graph.
///
/// The partition/orthogonality and edge-generator relations are checked on
/// the assembled direct sum; the three-factor vanishing, irreducibility,
/// and word-vanishing sweeps run per irreducible summand, which gives the
/// same max-norm values since all of them factor through the blocks.
#[derive(Debug, Clone)]
pub struct RepcheckReport {
    pub t_samples: Vec<f64>,
    pub dim: usize,
    pub gp: CheckReport,
    pub gc: CheckReport,
    pub sandwich_max_norm: f64,
    pub sandwich_triples: usize,
    pub sandwich_pass: bool,
    pub commutant_max_dim: usize,
    pub commutant_pass: bool,
    pub word_max_deviation: f64,
    pub words_checked: usize,
    pub word_pass: bool,
}

impl RepcheckReport {
    pub fn pass(&self) -> bool {
        self.gp.pass()
            && self.gc.pass()
            && self.sandwich_pass
            && self.commutant_pass
            && self.word_pass
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "t_samples": self.t_samples,
            "dim": self.dim,
            "relations": {
                "gp": self.gp.to_json(),
                "gc": self.gc.to_json(),
            },
            "sandwich": {
                "max_norm": self.sandwich_max_norm,
                "triples": self.sandwich_triples,
                "pass": self.sandwich_pass,
            },
            "commutant": {
                "max_dim": self.commutant_max_dim,
                "pass": self.commutant_pass,
            },
            "words": {
                "max_deviation": self.word_max_deviation,
                "checked": self.words_checked,
                "pass": self.word_pass,
            },
            "pass": self.pass(),
        })
    }
}

/// Longest word length the vanishing sweep enumerates exhaustively.
const WORD_SWEEP_LEN: usize = 4;

pub fn repcheck(g: &BipartiteGraph, t_samples: &[f64]) -> Result<RepcheckReport, ReprError> {
    let summands = standard_summands(g, t_samples)?;
    let (dim, gp, gc) = if summands.is_empty() {
        (0, CheckReport::default(), CheckReport::default())
    } else {
        let rep = standard_rep(g, t_samples)?;
        let gp = check_gp(&rep);
        let gc = check_gc(&edge_generators(&rep));
        (rep.dim(), gp, gc)
    };

    let reps: Vec<&Representation> = summands.iter().map(|(_, r)| r).collect();

    // three-factor vanishing over all applicable ordered triples
    let mut sandwich_max: f64 = 0.0;
    let mut sandwich_triples = 0;
    let labels_of = |side: Side| match side {
        Side::U => g.u_labels(),
        Side::V => g.v_labels(),
    };
    for (outer, inner) in [(Side::U, Side::V), (Side::V, Side::U)] {
        let outs = labels_of(outer);
        let ins = labels_of(inner);
        for x1 in outs {
            for x2 in outs {
                if x1 == x2 {
                    continue;
                }
                for y in ins {
                    let mut applicable = false;
                    for rep in &reps {
                        let r = sandwich_check(rep, x1, y, x2)?;
                        if r.applicable {
                            applicable = true;
                            sandwich_max = sandwich_max.max(r.norm);
                        }
                    }
                    if applicable {
                        sandwich_triples += 1;
                    }
                }
            }
        }
    }

    let commutant_max_dim = reps.iter().map(|r| commutant_dim(r)).max().unwrap_or(1);

    // exhaustive vanishing sweep over short words
    let mut vertex_labels: Vec<&str> = g.u_labels().iter().map(String::as_str).collect();
    vertex_labels.extend(g.v_labels().iter().map(String::as_str));
    let mut word_max: f64 = 0.0;
    let mut words_checked = 0;
    let mut word = Vec::new();
    sweep_words(
        g,
        &reps,
        &vertex_labels,
        &mut word,
        WORD_SWEEP_LEN,
        &mut word_max,
        &mut words_checked,
    )?;

    Ok(RepcheckReport {
        t_samples: t_samples.to_vec(),
        dim,
        gp,
        gc,
        sandwich_pass: sandwich_max <= TOL,
        sandwich_max_norm: sandwich_max,
        sandwich_triples,
        commutant_pass: commutant_max_dim <= 1,
        commutant_max_dim,
        word_max_deviation: word_max,
        words_checked,
        word_pass: word_max <= TOL,
    })
}

fn sweep_words<'a>(
    g: &BipartiteGraph,
    reps: &[&Representation],
    labels: &[&'a str],
    word: &mut Vec<&'a str>,
    max_len: usize,
    worst: &mut f64,
    checked: &mut usize,
) -> Result<(), ReprError> {
    if word.len() >= 2 && is_vanishing_word(g, word)? {
        // minimal vanishing words only; every extension collapses onto one
        *checked += 1;
        for rep in reps {
            *worst = worst.max(matrix::max_abs(&evaluate_word(rep, word)?));
        }
        return Ok(());
    }
    if word.len() == max_len {
        return Ok(());
    }
    for &l in labels {
        word.push(l);
        sweep_words(g, reps, labels, word, max_len, worst, checked)?;
        word.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete_bipartite;

    #[test]
    fn k22_report() {
        let report = analyze(&complete_bipartite(2, 2));
        assert_eq!(report.quadruples.len(), 1);
        assert!(report.loose.is_empty());
        assert!(!report.k23_flag);
        assert!(report.advisory.is_none());
        assert_eq!(report.scalar_summands, 0);
        let v = report.to_json();
        assert_eq!(v["k23"], false);
        assert_eq!(v["quadruples"][0]["pairing"][0][0], "u1,v1");
    }

    #[test]
    fn k23_advisory_text() {
        let report = analyze(&complete_bipartite(2, 3));
        assert!(report.k23_flag);
        assert_eq!(report.advisory.as_deref(), Some(K23_ADVISORY));
    }

    #[test]
    fn report_is_internally_consistent() {
        let g = BipartiteGraph::new(
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
        let report = analyze(&g);
        assert_eq!(report.skeleton.clopen_points.len(), report.loose.len());
        assert_eq!(report.skeleton.components.len(), report.quadruples.len());
        assert_eq!(report.scalar_summands, report.loose.len());
    }
}
