//! Command-line front end: graph analysis, isomorphism decisions,
//! representation checks, generic-position synthesis, hypergraph
//! conversion, and the small-graph census.
//!
//! Machine-readable JSON goes to stdout, human-readable logs to stderr.
//! The exit code is zero iff every requested check passed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bgcstar::census;
use bgcstar::genpos;
use bgcstar::graph::{from_hypergraph, BipartiteGraph, Hypergraph};
use bgcstar::iso::{brute_force_iso, decide_iso, verify_witness};
use bgcstar::report::{analyze, repcheck};
use bgcstar::repr::{default_t_samples, verify_phi};

#[derive(Parser)]
#[command(name = "bgcstar", version, about = "Bipartite-graph C*-algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Args)]
struct TSampleArgs {
    /// Sample points in (0,1) for the two-dimensional family; defaults to
    /// 1/4, 1/2, 3/4 plus two seeded uniform draws.
    #[arg(long = "t", value_delimiter = ',')]
    t: Vec<f64>,
    /// Seed for the extra sample points (echoed in the output).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TSampleArgs {
    fn samples(&self) -> Vec<f64> {
        if self.t.is_empty() {
            default_t_samples(self.seed)
        } else {
            self.t.clone()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural analysis: 4-cycles, loose edges, skeleton, certificate,
    /// and the non-nuclearity advisory.
    Analyze {
        graph: PathBuf,
    },
    /// Decide whether two graphs generate isomorphic algebras.
    Iso {
        graph: PathBuf,
        graph2: PathBuf,
        /// Also run the exhaustive oracle and require agreement.
        #[arg(long)]
        oracle: bool,
        /// Numerically verify the homomorphism induced by the witness.
        #[arg(long = "verify-phi")]
        verify_phi: bool,
        #[command(flatten)]
        t: TSampleArgs,
    },
    /// Check all representation relations on the standard representation.
    Repcheck {
        graph: PathBuf,
        #[command(flatten)]
        t: TSampleArgs,
    },
    /// Synthesize a generic-position projection family and verify it.
    Genpos {
        graph: PathBuf,
        /// Block dimension of the contraction blocks.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-iter", default_value_t = genpos::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Residual target for the alternating-projection iteration.
        #[arg(long, default_value_t = genpos::DEFAULT_TOL)]
        tol: f64,
    },
    /// Convert a hypergraph to its incidence bipartite graph.
    Convert {
        hypergraph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Enumerate connected graphs up to an edge bound and group them into
    /// algebra classes.
    Census {
        #[arg(long = "max-edges")]
        max_edges: usize,
    },
    /// Re-emit a graph file as JSON or DOT.
    Export {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
}

fn read_graph(path: &Path) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse graph file {}", path.display()))
}

fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse hypergraph file {}", path.display()))
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

/// Runs one subcommand; `Ok(true)` means every requested check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { graph } => {
            let g = read_graph(&graph)?;
            let report = analyze(&g);
            eprintln!(
                "analyzed {}: {} 4-cycles, {} loose edges{}",
                g,
                report.quadruples.len(),
                report.loose.len(),
                if report.k23_flag { "; advisory: ".to_owned() + report.advisory.as_deref().unwrap_or("") } else { String::new() }
            );
            emit(&report.to_json());
            Ok(true)
        }
        Command::Iso {
            graph,
            graph2,
            oracle,
            verify_phi: do_phi,
            t,
        } => {
            let g = read_graph(&graph)?;
            let g2 = read_graph(&graph2)?;
            let verdict = decide_iso(&g, &g2);
            let mut out = verdict.to_json(&g, &g2);
            let mut ok = true;

            if oracle {
                let reference = brute_force_iso(&g, &g2)?;
                let agree = reference.isomorphic == verdict.isomorphic;
                out["oracle_agrees"] = serde_json::json!(agree);
                if !agree {
                    eprintln!("oracle disagreement: search says {}, oracle says {}", verdict.isomorphic, reference.isomorphic);
                    ok = false;
                }
            }
            if let Some(w) = &verdict.witness {
                let report = verify_witness(&g, &g2, w)?;
                out["witness_valid"] = serde_json::json!(report.ok);
                ok &= report.ok;
                if do_phi {
                    let samples = t.samples();
                    let phi = verify_phi(&g, &g2, w, &samples)?;
                    out["phi"] = phi.to_json();
                    out["t_samples"] = serde_json::json!(samples);
                    ok &= phi.pass();
                }
            } else if do_phi {
                eprintln!("no witness to verify: graphs are not isomorphic");
            }
            eprintln!("verdict: {}", bgcstar::iso::verdict_summary(&verdict));
            emit(&out);
            Ok(ok)
        }
        Command::Repcheck { graph, t } => {
            let g = read_graph(&graph)?;
            let samples = t.samples();
            for &s in &samples {
                if !(s > 0.0 && s < 1.0) {
                    bail!("sample point {s} outside the open interval (0,1)");
                }
            }
            let report = repcheck(&g, &samples)?;
            let mut out = report.to_json();
            out["seed"] = serde_json::json!(t.seed);
            eprintln!(
                "relation checks on dim-{} standard representation: {}",
                report.dim,
                if report.pass() { "pass" } else { "FAIL" }
            );
            emit(&out);
            Ok(report.pass())
        }
        Command::Genpos {
            graph,
            k,
            seed,
            max_iter,
            tol,
        } => {
            let g = read_graph(&graph)?;
            let syn = genpos::synthesize(&g, k, seed, max_iter, tol)?;
            let pf = genpos::build_projection_family(&syn.family)?;
            let gp = bgcstar::repr::check_gp(&pf.rep);
            let position = genpos::check_generic_position(&pf.rep);
            let mut out = serde_json::json!({
                "k": k,
                "seed": seed,
                "iterations": syn.iterations,
                "residual": syn.residual,
                "family": syn.family.to_json(),
                "relations": gp.to_json(),
                "generic_position": position.to_json(),
            });
            let mut ok = gp.pass() && position.pass;
            if g.u_len() == 2 && g.v_len() == 2 && g.edge_count() == 4 {
                let h = genpos::halmos_decompose(&pf.rep)?;
                ok &= h.residual_identity <= genpos::ACCEPT_RESIDUAL;
                out["halmos"] = serde_json::json!({
                    "c_squared": bgcstar::matrix::to_json_rows(&h.c_squared),
                    "s_squared": bgcstar::matrix::to_json_rows(&h.s_squared),
                    "cs": bgcstar::matrix::to_json_rows(&h.cs),
                    "identity_residual": h.residual_identity,
                });
            }
            eprintln!(
                "synthesis: {} iterations, residual {:.3e}; generic position: {}",
                syn.iterations,
                syn.residual,
                if position.pass { "pass" } else { "FAIL" }
            );
            emit(&out);
            Ok(ok)
        }
        Command::Convert { hypergraph, format } => {
            let h = read_hypergraph(&hypergraph)?;
            let g = from_hypergraph(&h)?;
            match format {
                Format::Json => emit(&serde_json::to_value(&g)?),
                Format::Dot => print!("{}", g.to_dot()),
            }
            Ok(true)
        }
        Command::Census { max_edges } => {
            let table = census::census(max_edges)?;
            eprintln!(
                "census up to {} edges: {} classes",
                max_edges,
                table.classes.len()
            );
            emit(&table.to_json());
            Ok(true)
        }
        Command::Export { graph, format } => {
            let g = read_graph(&graph)?;
            match format {
                Format::Json => emit(&serde_json::to_value(&g)?),
                Format::Dot => print!("{}", g.to_dot()),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
