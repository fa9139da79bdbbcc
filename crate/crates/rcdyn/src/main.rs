use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rcdyn::bounds;
use rcdyn::dynamics::{sb_step, sw_step, DynamicsKind, RngState};
use rcdyn::graph::EdgeSubset;
use rcdyn::models::{fkes_distribution, potts_distribution, rc_distribution};
use rcdyn::spectral::{exact_mixing_time, sandwich_bounds, spectral_gap};
use rcdyn::suites::{run_suite, SuiteConfig, SUITE_NAMES};
use rcdyn::{Caps, Error, Graph, ModelParams, Result};

#[derive(Parser)]
#[command(name = "rcdyn", version, about = "Random-cluster dynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Builtin spec (torus:L,d path:n cycle:n complete:n star:n) or a
    /// JSON file {"n": int, "edges": [[u,v], ...]}
    #[arg(long)]
    graph: String,
}

impl GraphArg {
    fn load(&self) -> Result<Graph> {
        if self.graph.contains(':') || self.graph.parse::<usize>().is_ok() {
            Graph::parse_builtin(&self.graph)
        } else {
            let text = std::fs::read_to_string(&self.graph)?;
            Graph::from_json(&text)
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Edge probability, in (0,1)
    #[arg(long)]
    p: f64,
    /// Cluster weight, >= 1
    #[arg(long)]
    q: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.p, self.q)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap of a dynamics on a graph
    Gap {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamArgs,
        /// One of: sw, sb, sb-nonlazy, heatbath, metropolis
        #[arg(long, default_value = "sw")]
        dynamics: String,
        /// Write the dense transition matrix as CSV to this path
        #[arg(long)]
        matrix_out: Option<String>,
        /// Also print a matrix summary line
        #[arg(long)]
        matrix_summary: bool,
        /// Also print the exact mixing time and its sandwich bounds
        #[arg(long)]
        mixing: bool,
    },
    /// Run verification suites; exit code 4 if any check fails
    Verify {
        /// Suite name or "all"
        #[arg(long, default_value = "all")]
        suite: String,
        /// Restrict the grid to a single q
        #[arg(long)]
        q: Option<f64>,
        /// Print every check, not only failures
        #[arg(long)]
        verbose: bool,
    },
    /// Seeded sampling: one-step census, a trajectory trace, or exact
    /// distribution export
    Sample {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamArgs,
        /// One of: sw, sb (step samplers)
        #[arg(long, default_value = "sw")]
        dynamics: String,
        #[arg(long, default_value = "census")]
        mode: String,
        /// Start state as an edge-subset bit pattern
        #[arg(long, default_value_t = 0)]
        start: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Steps per sample (census) or trace length (trace)
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// For mode=exact: which distribution (rc, potts, fkes)
        #[arg(long, default_value = "rc")]
        law: String,
    },
    /// Gap table over a parameter grid, CSV on stdout
    Sweep {
        #[command(flatten)]
        graph: GraphArg,
        /// Comma-separated p values
        #[arg(long, default_value = "0.1,0.3,0.5,0.7,0.9")]
        ps: String,
        /// Comma-separated q values
        #[arg(long, default_value = "2,3")]
        qs: String,
        /// Comma-separated dynamics names
        #[arg(long, default_value = "sw,sb")]
        dynamics: String,
    },
    /// Closed-form bound calculators
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Inspect a graph or write it as JSON
    Graph {
        #[command(flatten)]
        graph: GraphArg,
        /// Write the graph JSON to this path instead of stdout
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Torus mixing-time upper bound (log scale)
    Torus {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        d: usize,
    },
    /// Exact bandwidth and linear-width with witnesses
    Width {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Tree gap formula and the Swendsen-Wang inverse-gap bound
    Tree {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamArgs,
    },
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::parameter(format!("bad number '{t}'")))
        })
        .collect()
}

fn cmd_gap(
    graph: &GraphArg,
    params: &ParamArgs,
    dynamics: &str,
    matrix_out: Option<&str>,
    matrix_summary: bool,
    mixing: bool,
    caps: &Caps,
) -> Result<()> {
    let g = graph.load()?;
    let kind: DynamicsKind = dynamics.parse()?;
    let mat = kind.build(&g, &params.params()?, caps)?;
    let spec = spectral_gap(&mat, caps)?;
    let mut out = json!({
        "graph": graph.graph,
        "p": params.p,
        "q": params.q,
        "dynamics": kind.name(),
        "gap": spec.gap,
        "second_eigenvalue": spec.second_largest_modulus,
        "dim": mat.dim(),
    });
    if mixing {
        let (lo, hi) = sandwich_bounds(&mat, caps)?;
        let res = exact_mixing_time(&mat, 1 << 40, caps)?;
        out["mixing_time"] = json!(res.mixing_time);
        out["sandwich_lower"] = json!(lo);
        out["sandwich_upper"] = json!(hi);
    }
    println!("{out}");
    if let Some(path) = matrix_out {
        let mut csv = String::new();
        for i in 0..mat.dim() {
            let row: Vec<String> = mat.row(i).iter().map(|v| format!("{v:.17e}")).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        std::fs::write(path, csv)?;
    }
    if matrix_summary {
        println!(
            "{}",
            json!({
                "dim": mat.dim(),
                "lazy": mat.is_lazy(),
                "row_sum_max_err": mat.row_sum_max_err(),
                "reversibility_max_err": mat.detailed_balance_max_err(),
            })
        );
    }
    Ok(())
}

fn cmd_verify(suite: &str, q: Option<f64>, verbose: bool, caps: &Caps) -> Result<bool> {
    let cfg = match q {
        Some(q) => SuiteConfig::with_q(q),
        None => SuiteConfig::default(),
    };
    let names: Vec<&str> = if suite == "all" {
        SUITE_NAMES.to_vec()
    } else {
        vec![suite]
    };
    let mut all_pass = true;
    for name in names {
        let reports = run_suite(name, &cfg, caps)?;
        let n_fail = reports.iter().filter(|r| !r.pass).count();
        let worst = reports
            .iter()
            .map(|r| r.max_violation)
            .fold(0.0f64, f64::max);
        for r in &reports {
            if verbose || !r.pass {
                println!("{}", serde_json::to_string(r).unwrap());
            }
        }
        println!(
            "{}",
            json!({
                "suite": name,
                "checks": reports.len(),
                "failures": n_fail,
                "max_violation": worst,
                "pass": n_fail == 0,
            })
        );
        all_pass &= n_fail == 0;
    }
    Ok(all_pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    graph: &GraphArg,
    params: &ParamArgs,
    dynamics: &str,
    mode: &str,
    start: u32,
    samples: usize,
    steps: usize,
    seed: u64,
    law: &str,
    caps: &Caps,
) -> Result<()> {
    let g = graph.load()?;
    let p = params.params()?;
    if mode == "exact" {
        let dist = match law {
            "rc" => rc_distribution(&g, &p, caps)?,
            "potts" => potts_distribution(&g, &p, caps)?,
            "fkes" => fkes_distribution(&g, &p, caps)?,
            _ => return Err(Error::parameter(format!("unknown law '{law}'"))),
        };
        println!("state_index,probability");
        for (i, v) in dist.iter().enumerate() {
            println!("{i},{v:.17e}");
        }
        return Ok(());
    }
    let kind: DynamicsKind = dynamics.parse()?;
    let step = |state: &EdgeSubset, rng: &mut RngState| -> Result<EdgeSubset> {
        match kind {
            DynamicsKind::Sw => sw_step(&g, &p, state, rng),
            DynamicsKind::Sb => Ok(sb_step(&g, &p, state, rng)),
            _ => Err(Error::parameter(format!(
                "step sampler not available for '{}'",
                kind.name()
            ))),
        }
    };
    if start as usize >= 1usize << g.n_edges() {
        return Err(Error::parameter("start state out of range"));
    }
    let start = EdgeSubset::from_bits(start, g.n_edges());
    let mut rng = RngState::new(seed);
    match mode {
        "census" => {
            let mut hits = vec![0usize; 1 << g.n_edges()];
            for _ in 0..samples {
                let mut state = start;
                for _ in 0..steps {
                    state = step(&state, &mut rng)?;
                }
                hits[state.index()] += 1;
            }
            println!("state_index,count,frequency");
            for (i, h) in hits.iter().enumerate() {
                println!("{i},{h},{}", *h as f64 / samples as f64);
            }
        }
        "trace" => {
            let mut state = start;
            println!("t,state_index");
            println!("0,{}", state.index());
            for t in 1..=steps {
                state = step(&state, &mut rng)?;
                println!("{t},{}", state.index());
            }
        }
        _ => return Err(Error::parameter(format!("unknown mode '{mode}'"))),
    }
    Ok(())
}

fn cmd_sweep(graph: &GraphArg, ps: &str, qs: &str, dynamics: &str, caps: &Caps) -> Result<()> {
    let g = graph.load()?;
    let kinds: Vec<DynamicsKind> = dynamics
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_>>()?;
    println!("graph,p,q,dynamics,gap,second_eigenvalue,dim");
    for &p in &parse_list(ps)? {
        for &q in &parse_list(qs)? {
            let params = ModelParams::new(p, q)?;
            for kind in &kinds {
                let mat = kind.build(&g, &params, caps)?;
                let spec = spectral_gap(&mat, caps)?;
                println!(
                    "{},{p},{q},{},{:.12e},{:.12e},{}",
                    graph.graph,
                    kind.name(),
                    spec.gap,
                    spec.second_largest_modulus,
                    mat.dim()
                );
            }
        }
    }
    Ok(())
}

fn cmd_bounds(which: &BoundsCommand) -> Result<()> {
    match which {
        BoundsCommand::Torus { p, q, l, d } => {
            let params = ModelParams::new(*p, *q)?;
            let b = bounds::torus_upper_bound(&params, *l, *d)?;
            println!("{}", serde_json::to_string(&b).unwrap());
        }
        BoundsCommand::Width { graph } => {
            let g = graph.load()?;
            let bw = bounds::bandwidth_exact(&g)?;
            let lw = bounds::linear_width_exact(&g)?;
            println!(
                "{}",
                json!({
                    "bandwidth": bw.width,
                    "linear_width": lw.width,
                    "witnesses": {
                        "bandwidth_vertex_order": bw.witness,
                        "linear_width_edge_order": lw.witness,
                    },
                })
            );
        }
        BoundsCommand::Tree { graph, params } => {
            let g = graph.load()?;
            let p = params.params()?;
            println!(
                "{}",
                json!({
                    "gap": bounds::tree_gap_exact(&g, &p)?,
                    "sw_inverse_gap_bound": bounds::sw_tree_bound(&g, &p)?,
                })
            );
        }
    }
    Ok(())
}

fn cmd_graph(graph: &GraphArg, out: Option<&str>) -> Result<()> {
    let g = graph.load()?;
    let text = g.to_json();
    match out {
        Some(path) => {
            std::fs::write(path, &text)?;
            println!(
                "{}",
                json!({
                    "written": path,
                    "n_vertices": g.n_vertices(),
                    "n_edges": g.n_edges(),
                    "connected": g.is_connected(),
                    "tree": g.is_tree(),
                })
            );
        }
        None => {
            println!("{text}");
            println!(
                "{}",
                json!({
                    "n_vertices": g.n_vertices(),
                    "n_edges": g.n_edges(),
                    "connected": g.is_connected(),
                    "tree": g.is_tree(),
                })
            );
        }
    }
    Ok(())
}

fn run(cli: &Cli, caps: &Caps) -> Result<bool> {
    match &cli.command {
        Command::Gap {
            graph,
            params,
            dynamics,
            matrix_out,
            matrix_summary,
            mixing,
        } => cmd_gap(
            graph,
            params,
            dynamics,
            matrix_out.as_deref(),
            *matrix_summary,
            *mixing,
            caps,
        )
        .map(|_| true),
        Command::Verify { suite, q, verbose } => cmd_verify(suite, *q, *verbose, caps),
        Command::Sample {
            graph,
            params,
            dynamics,
            mode,
            start,
            samples,
            steps,
            seed,
            law,
        } => cmd_sample(
            graph, params, dynamics, mode, *start, *samples, *steps, *seed, law, caps,
        )
        .map(|_| true),
        Command::Sweep { graph, ps, qs, dynamics } => {
            cmd_sweep(graph, ps, qs, dynamics, caps).map(|_| true)
        }
        Command::Bounds { which } => cmd_bounds(which).map(|_| true),
        Command::Graph { graph, out } => cmd_graph(graph, out.as_deref()).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let caps = Caps::from_env();
    match run(&cli, &caps) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
