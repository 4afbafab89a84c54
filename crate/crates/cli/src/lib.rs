//! Command-line front end. `run` parses one invocation (or a batch file),
//! dispatches to the library and writes a JSON report plus an optional CSV
//! companion.
//!
//! Exit codes: 0 success, 1 input error, 2 a solver missed its stopping
//! rule or the run was partial (the report is still written).

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use potlab::capacity::{capacity, check_cap_eq_mod, classify_parabolic, condenser, Thresholds};
use potlab::generators;
use potlab::hyperbolic::{self, hn_classification_harness, hyperbolic_norms, make_polar_grid, CapPair, HarnessOptions};
use potlab::mmspace::{
    detect_ends, ends_profile, estimate_geometry, read_graph_json, write_graph_json, GeometryOptions,
};
use potlab::modulus::{modulus_connecting, CurveFamilySpec, ModulusOptions};
use potlab::report::{csv, Report};
use potlab::uniformize::{
    boundary_clusters, comparison_constants, gromov_delta, rough_starlike_constant, uniformized_graph,
    UniformizationParams,
};
use potlab::witness::{
    ahlfors_witness, evaluate_witness, parabolic_staircase_witness, punctured_log_witness, staircase_witness,
    two_ends_witness, EvaluateOptions, PuncturedOptions, WitnessReport,
};
use potlab::{MetricMeasureGraph, VertexSet};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "potlab",
    version,
    about = "Modulus, capacity and witness computations on metric measure graphs"
)]
struct Cli {
    /// File with one command per line; commands run concurrently.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV companion path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// p-modulus of the curves joining two vertex sets.
    Modulus {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated source vertex ids.
        #[arg(long)]
        source: String,
        /// Comma-separated target vertex ids; the frontier when absent.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// p-capacity of the condenser (B(x0, r), X \ B(x0, R)).
    Capacity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also solve the modulus of the same condenser and compare.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Parabolicity tests along a radius schedule.
    Classify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        p: f64,
        /// Inner radius followed by the outer radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Uniformized metric and density-weighted measure.
    Uniformize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        z0: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        beta: f64,
        /// Exponent used for the `beta >= eps p` check.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Measure-density threshold for the warning check.
        #[arg(long, default_value_t = 0.0)]
        beta0: f64,
        /// Cluster scales for the boundary count.
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
        /// Quadruple budget for the four-point estimate.
        #[arg(long, default_value_t = 1_000_000)]
        delta_budget: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Witness functions and their deficit tables.
    Witness {
        #[arg(long, value_enum)]
        kind: WitnessChoice,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        p: f64,
        /// Doubling constant of the staircase.
        #[arg(long, default_value_t = 2.0)]
        cd: f64,
        #[arg(long)]
        q: Option<f64>,
        /// Ahlfors exponent.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 200)]
        mesh: usize,
        #[arg(long, default_value_t = 16)]
        angular: usize,
        /// Ball radius for the end decomposition.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 16)]
        budget: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        last_k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Norms, traces and the classification harness on hyperbolic space.
    Hn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 14.0)]
        rmax: f64,
        #[arg(long, default_value_t = 560)]
        radial: usize,
        #[arg(long, default_value_t = 96)]
        angular: usize,
        #[arg(long, value_enum, default_value_t = HnMode::Classify)]
        mode: HnMode,
        /// Scheduled radii; integers from 2 to rmax when absent.
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Ends outside a ball, or end counts along radii.
    Ends {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Doubling, Poincaré and mass-exponent estimates.
    Geometry {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        scales: Vec<f64>,
        /// Comma-separated sample vertex ids; all vertices when absent.
        #[arg(long)]
        sample: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        potentials: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Writes a generated graph file.
    Generate {
        #[arg(long, value_enum)]
        kind: GraphKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        /// Mark the grid boundary as frontier.
        #[arg(long)]
        boundary_frontier: bool,
        #[arg(long)]
        branching: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        radial: Option<usize>,
        #[arg(long)]
        angular: Option<usize>,
        #[arg(long)]
        cd: Option<f64>,
        #[arg(long)]
        stairs: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        mu0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WitnessChoice {
    Staircase,
    Ahlfors,
    PuncturedLog,
    TwoEnds,
    ParabolicStaircase,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum HnMode {
    Classify,
    Norms,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GraphKind {
    Path,
    Cycle,
    Grid,
    Tree,
    DoubleRay,
    HyperbolicDiskGraph,
    ExactGrowthStaircase,
}

/// Failure before a report could be produced.
#[derive(Debug)]
struct InputError(String);

impl From<potlab::Error> for InputError {
    fn from(e: potlab::Error) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, InputError>;

struct Outcome {
    text: String,
    csv: Option<String>,
    out: Option<PathBuf>,
    csv_path: Option<PathBuf>,
    complete: bool,
}

fn need<T>(v: Option<T>, flag: &str) -> CmdResult<T> {
    v.ok_or_else(|| InputError(format!("missing required flag --{flag}")))
}

fn load(path: &Path) -> CmdResult<MetricMeasureGraph> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("--graph {}: {e}", path.display())))?;
    Ok(read_graph_json(&text)?)
}

fn ids(g: &MetricMeasureGraph, list: &str) -> CmdResult<VertexSet> {
    let parts: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(g.set_from_ids(&parts)?)
}

fn report_outcome(report: Report, out: &Output, table: Option<String>, complete: bool) -> Outcome {
    let csv_path = match (&out.csv, &out.out) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(o)) if table.is_some() => Some(o.with_extension("csv")),
        _ => None,
    };
    Outcome {
        text: report.to_json(),
        csv: table,
        out: out.out.clone(),
        csv_path,
        complete,
    }
}

fn witness_table(r: &WitnessReport, limit: Option<f64>) -> String {
    let row = limit
        .and_then(|c| r.constants.iter().find(|row| row.c == c))
        .unwrap_or(&r.optimal);
    let rows: Vec<Vec<f64>> = row
        .deficits
        .iter()
        .zip(&row.cumulative)
        .enumerate()
        .map(|(k, (d, c))| vec![k as f64, *d, *c])
        .collect();
    csv(&["annulus", "deficit", "cumulative"], &rows)
}

fn execute(cmd: Command) -> CmdResult<Outcome> {
    match cmd {
        Command::Modulus {
            graph,
            source,
            target,
            p,
            tol,
            out,
        } => {
            let g = load(&graph)?;
            let src = ids(&g, &source)?;
            let fam = match &target {
                Some(t) => CurveFamilySpec::connecting(src, ids(&g, t)?),
                None => CurveFamilySpec::escape(&g, src),
            };
            let m = modulus_connecting(&g, &fam, p, tol, &ModulusOptions::default())?;
            let edges: Vec<Value> = g
                .edges
                .iter()
                .zip(&m.rho)
                .map(|(e, r)| json!({"u": g.vertices[e.u].id, "v": g.vertices[e.v].id, "rho": r}))
                .collect();
            let results = json!({
                "value": m.value, "gap": m.gap, "tol": tol, "iterations": m.iterations,
                "converged": m.converged, "active_paths": m.active_paths.len(), "rho": edges,
            });
            let table: Vec<Vec<f64>> = m.rho.iter().enumerate().map(|(i, r)| vec![i as f64, *r]).collect();
            let params = json!({"graph": graph, "source": source, "target": target, "p": p, "tol": tol});
            Ok(report_outcome(
                Report::new("modulus", out.seed, &params, &results),
                &out,
                Some(csv(&["edge", "rho"], &table)),
                m.converged,
            ))
        }
        Command::Capacity {
            graph,
            x0,
            r,
            big_r,
            p,
            tol,
            check,
            out,
        } => {
            let g = load(&graph)?;
            let x = g.idx(&x0)?;
            let (ones, zeros) = condenser(&g, x, r, big_r)?;
            let c = capacity(&g, &ones, &zeros, p, tol)?;
            let mut results = json!({
                "value": c.value, "residual": c.residual, "tol": tol, "converged": c.converged,
                "potential": g.vertices.iter().zip(&c.minimizer.u).map(|(v, u)| json!({"id": v.id, "u": u})).collect::<Vec<_>>(),
            });
            if check {
                results["check"] = serde_json::to_value(check_cap_eq_mod(&g, x, r, big_r, p, tol)?).unwrap();
            }
            let table: Vec<Vec<f64>> = c
                .minimizer
                .u
                .iter()
                .enumerate()
                .map(|(i, u)| vec![i as f64, *u])
                .collect();
            let params = json!({"graph": graph, "x0": x0, "r": r, "R": big_r, "p": p, "tol": tol});
            Ok(report_outcome(
                Report::new("capacity", out.seed, &params, &results),
                &out,
                Some(csv(&["vertex", "u"], &table)),
                c.converged,
            ))
        }
        Command::Classify {
            graph,
            x0,
            p,
            radii,
            tol,
            out,
        } => {
            let g = load(&graph)?;
            let rep = classify_parabolic(&g, g.idx(&x0)?, p, &radii, &Thresholds::default(), tol)?;
            let table: Vec<Vec<f64>> = rep.capacities.iter().map(|&(r, c)| vec![r, c]).collect();
            let mut results = serde_json::to_value(&rep).unwrap();
            results["tol"] = json!(tol);
            results["complete"] = json!(rep.complete());
            let params = json!({"graph": graph, "x0": x0, "p": p, "radii": radii, "tol": tol});
            Ok(report_outcome(
                Report::new("classify", out.seed, &params, &results),
                &out,
                Some(csv(&["R", "capacity"], &table)),
                rep.complete(),
            ))
        }
        Command::Uniformize {
            graph,
            z0,
            eps,
            beta,
            p,
            beta0,
            eta,
            delta_budget,
            out,
        } => {
            let g = load(&graph)?;
            let z = g.idx(&z0)?;
            let ug = uniformized_graph(&g, UniformizationParams { z0: z, eps, beta })?;
            let delta = gromov_delta(&g, delta_budget, out.seed);
            let m = rough_starlike_constant(&g, z)?;
            let sample: Vec<usize> = (0..g.n()).filter(|&v| !g.vertices[v].frontier).collect();
            let k1 = if g.frontier().is_empty() {
                None
            } else {
                Some(comparison_constants(&ug, &sample)?)
            };
            let mut clusters = Vec::new();
            for &e in &eta {
                clusters.push(json!({"eta": e, "count": boundary_clusters(&ug, e)?.len()}));
            }
            let results = json!({
                "w_eps": g.edges.iter().zip(&ug.w_eps).map(|(e, w)| json!({"u": g.vertices[e.u].id, "v": g.vertices[e.v].id, "w": w})).collect::<Vec<_>>(),
                "mu_beta": g.vertices.iter().zip(&ug.mu_beta).map(|(v, m)| json!({"id": v.id, "mu": m})).collect::<Vec<_>>(),
                "total_mu_beta": ug.total_mu_beta(),
                "delta": delta,
                "m": m,
                "k1": k1,
                "clusters": clusters,
                "warnings": ug.warnings(beta0, p),
            });
            let table: Vec<Vec<f64>> = (0..g.n())
                .map(|v| vec![v as f64, ug.base_dist[v], ug.rho_eps(v), ug.mu_beta[v]])
                .collect();
            let params = json!({"graph": graph, "z0": z0, "eps": eps, "beta": beta, "p": p, "beta0": beta0, "eta": eta, "delta_budget": delta_budget});
            let csv_text = csv(&["vertex", "d", "rho_eps", "mu_beta"], &table);
            Ok(report_outcome(
                Report::new("uniformize", out.seed, &params, &results),
                &out,
                Some(csv_text),
                true,
            ))
        }
        Command::Witness {
            kind,
            graph,
            x0,
            p,
            cd,
            q,
            s,
            mesh,
            angular,
            r,
            step,
            budget,
            tol,
            last_k,
            out,
        } => {
            let mut eval = EvaluateOptions {
                last_k,
                ..Default::default()
            };
            let (g, w) = match kind {
                WitnessChoice::PuncturedLog => {
                    let q = need(q, "q")?;
                    punctured_log_witness(q, p, mesh, &PuncturedOptions { h: 1.0, angular })?
                }
                _ => {
                    let g = load(&need(graph.clone(), "graph")?)?;
                    let x = g.idx(&need(x0.clone(), "x0")?)?;
                    let w = match kind {
                        WitnessChoice::Staircase => staircase_witness(&g, x, p, cd)?,
                        WitnessChoice::Ahlfors => {
                            let s = need(s, "s")?;
                            eval.ahlfors_s = Some(s);
                            ahlfors_witness(s, p, need(q, "q")?)?.on_graph(&g, x)?
                        }
                        WitnessChoice::TwoEnds => two_ends_witness(&g, &detect_ends(&g, x, r)?, step)?,
                        WitnessChoice::ParabolicStaircase => parabolic_staircase_witness(&g, x, p, budget, tol)?,
                        WitnessChoice::PuncturedLog => unreachable!(),
                    };
                    (g, w)
                }
            };
            let rep = evaluate_witness(&g, &w, p, &eval)?;
            let table = witness_table(&rep, w.predicted_limit);
            let results = json!({"witness": w, "report": rep});
            let params = json!({
                "kind": format!("{kind:?}"), "graph": graph, "x0": x0, "p": p, "cd": cd, "q": q, "s": s,
                "mesh": mesh, "angular": angular, "r": r, "step": step, "budget": budget, "tol": tol, "last_k": last_k,
            });
            Ok(report_outcome(
                Report::new("witness", out.seed, &params, &results),
                &out,
                Some(table),
                true,
            ))
        }
        Command::Hn {
            n,
            p,
            rmax,
            radial,
            angular,
            mode,
            schedule,
            out,
        } => {
            let grid = make_polar_grid(n, rmax, radial, angular)?;
            let schedule = if schedule.is_empty() {
                (2..=rmax.floor() as usize).map(|r| r as f64).collect()
            } else {
                schedule
            };
            let params = json!({"n": n, "p": p, "rmax": rmax, "radial": radial, "angular": angular, "mode": format!("{mode:?}"), "schedule": schedule});
            if mode == HnMode::Norms {
                let results = json!({"cap_witness": hyperbolic_norms(&hyperbolic::cap_witness(&grid), p, &grid)?});
                return Ok(report_outcome(
                    Report::new("hn", out.seed, &params, &results),
                    &out,
                    None,
                    true,
                ));
            }
            let pl = hyperbolic::pole(n);
            let caps = CapPair {
                c1: pl,
                c2: [-pl[0], -pl[1], -pl[2]],
                alpha: PI / 4.0,
            };
            let v = hn_classification_harness(p, &grid, &caps, &schedule, &HarnessOptions::default())?;
            // Plot data: function index, cell, radius, average, Cauchy bound to the next radius.
            let mut rows = Vec::new();
            let traces: Vec<&hyperbolic::TraceReport> = match &v.strict {
                Some(s) => vec![&s.trace],
                None => v.equality.iter().map(|e| &e.trace).collect(),
            };
            for (fi, t) in traces.iter().enumerate() {
                for (c, avgs) in t.averages.iter().enumerate() {
                    for (k, a) in avgs.iter().enumerate() {
                        let bound = t.cauchy[c].get(k).map_or(f64::NAN, |b| b.rhs);
                        rows.push(vec![fi as f64, c as f64, t.schedule[k], *a, bound]);
                    }
                }
            }
            let table = csv(&["function", "cell", "radius", "average", "bound"], &rows);
            Ok(report_outcome(
                Report::new("hn", out.seed, &params, &v),
                &out,
                Some(table),
                true,
            ))
        }
        Command::Ends { graph, x0, radii, out } => {
            let g = load(&graph)?;
            let x = g.idx(&x0)?;
            let results = if radii.len() == 1 {
                let e = detect_ends(&g, x, radii[0])?;
                json!({
                    "r": e.r,
                    "ends": e.ends.iter().map(|s| g.ids(s)).collect::<Vec<_>>(),
                    "bounded_components": e.bounded_components.iter().map(|s| g.ids(s)).collect::<Vec<_>>(),
                })
            } else {
                serde_json::to_value(ends_profile(&g, x, &radii)?).unwrap()
            };
            let params = json!({"graph": graph, "x0": x0, "radii": radii});
            Ok(report_outcome(
                Report::new("ends", out.seed, &params, &results),
                &out,
                None,
                true,
            ))
        }
        Command::Geometry {
            graph,
            scales,
            sample,
            p,
            lambda,
            potentials,
            out,
        } => {
            let g = load(&graph)?;
            let set = match &sample {
                Some(s) => ids(&g, s)?,
                None => VertexSet::new((0..g.n()).collect()),
            };
            let opts = GeometryOptions {
                p,
                lambda,
                potentials,
                seed: out.seed,
            };
            let results = estimate_geometry(&g, &scales, &set, &opts)?;
            let params = json!({"graph": graph, "scales": scales, "sample": sample, "p": p, "lambda": lambda, "potentials": potentials});
            Ok(report_outcome(
                Report::new("geometry", out.seed, &params, &results),
                &out,
                None,
                true,
            ))
        }
        Command::Generate {
            kind,
            n,
            width,
            height,
            boundary_frontier,
            branching,
            depth,
            rmax,
            radial,
            angular,
            cd,
            stairs,
            mu0,
            out,
        } => {
            let g = match kind {
                GraphKind::Path => generators::path(need(n, "n")?)?,
                GraphKind::Cycle => generators::cycle(need(n, "n")?)?,
                GraphKind::Grid => generators::grid(need(width, "width")?, need(height, "height")?, boundary_frontier)?,
                GraphKind::Tree => generators::tree(need(branching, "branching")?, need(depth, "depth")?)?,
                GraphKind::DoubleRay => generators::double_ray(need(n, "n")?)?,
                GraphKind::HyperbolicDiskGraph => generators::hyperbolic_disk_graph(
                    n.unwrap_or(2),
                    need(rmax, "rmax")?,
                    need(radial, "radial")?,
                    need(angular, "angular")?,
                )?,
                GraphKind::ExactGrowthStaircase => {
                    generators::exact_growth_staircase(need(cd, "cd")?, need(stairs, "stairs")?, mu0)?
                }
            };
            let mut text = write_graph_json(&g);
            text.push('\n');
            Ok(Outcome {
                text,
                csv: None,
                out,
                csv_path: None,
                complete: true,
            })
        }
    }
}

fn write_outcome(o: &Outcome, stdout: &mut String) -> CmdResult<()> {
    match &o.out {
        Some(path) => fs::write(path, &o.text).map_err(|e| InputError(format!("--out {}: {e}", path.display())))?,
        None => stdout.push_str(&o.text),
    }
    if let (Some(path), Some(table)) = (&o.csv_path, &o.csv) {
        fs::write(path, table).map_err(|e| InputError(format!("--csv {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs one parsed argument vector; output text goes to `stdout`, messages
/// to `stderr`.
fn run_captured<I, T>(argv: I, stdout: &mut String, stderr: &mut String) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                stderr.push_str(&text);
                1
            } else {
                stdout.push_str(&text);
                0
            };
        }
    };
    match (cli.batch, cli.command) {
        (Some(path), None) => run_batch(&path, stdout, stderr),
        (None, Some(cmd)) => match execute(cmd).and_then(|o| write_outcome(&o, stdout).map(|_| o.complete)) {
            Ok(true) => 0,
            Ok(false) => {
                stderr.push_str("warning: a solver missed its stopping rule or the run was partial; see the report\n");
                2
            }
            Err(InputError(msg)) => {
                stderr.push_str(&format!("error: {msg}\n"));
                1
            }
        },
        (Some(_), Some(_)) => {
            stderr.push_str("error: --batch cannot be combined with a subcommand\n");
            1
        }
        (None, None) => {
            stderr.push_str(&format!(
                "error: no subcommand given\n\n{}",
                <Cli as clap::CommandFactory>::command().render_help()
            ));
            1
        }
    }
}

fn worker_count() -> usize {
    std::env::var("POTLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs each nonblank, non-`#` line of the file as its own command. Outputs
/// are collected per command and emitted in file order; the exit code is
/// the largest of the individual codes.
fn run_batch(path: &Path, stdout: &mut String, stderr: &mut String) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            stderr.push_str(&format!("error: --batch {}: {e}\n", path.display()));
            return 1;
        }
    };
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let results: Vec<Mutex<Option<(i32, String, String)>>> = lines.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..worker_count().min(lines.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= lines.len() {
                    break;
                }
                let argv = std::iter::once("potlab").chain(lines[i].split_whitespace());
                let (mut out, mut err) = (String::new(), String::new());
                let code = run_captured(argv, &mut out, &mut err);
                *results[i].lock().unwrap() = Some((code, out, err));
            });
        }
    });
    let mut code = 0;
    for r in results {
        let (c, out, err) = r.into_inner().unwrap().expect("every batch line ran");
        code = code.max(c);
        stdout.push_str(&out);
        stderr.push_str(&err);
    }
    code
}

/// Entry point: `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (String::new(), String::new());
    let code = run_captured(argv, &mut out, &mut err);
    print!("{out}");
    eprint!("{err}");
    code
}
