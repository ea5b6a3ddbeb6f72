use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use willmore_core::curvature::willmore_energy;
use willmore_core::flow::{run as run_flow, Trajectory};
use willmore_core::graph::{graph_run, NormalGraph};
use willmore_core::inequality::{run_corpus, InequalityId};
use willmore_core::monitor::{existence_time_prediction, report, ConstantsLedger, EnergyReport};
use willmore_core::{analyze_surface, Error};

use crate::config::{parse_entries, ConfigError, Experiment, RunConfig};
use crate::meshio::{fmt_f64, write_mesh};
use crate::output::{create_dir, write_csv, write_ratios, write_text, write_trajectory};
use crate::CliError;

#[derive(Parser)]
#[command(name = "willmore", version, about = "Discrete Willmore flow of surfaces in R^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated mesh to `mesh.{format}`
    Make(Args),
    /// Run the direct flow and record reports and snapshots
    Flow(Args),
    /// Run the flow in the normal-graph gauge over a flattened base
    Graph(Args),
    /// Curvature, energy and concentration of a single mesh
    Analyze(Args),
    /// Empirical ratios of the Sobolev-type inequalities over a seeded corpus
    Ineq(Args),
}

#[derive(clap::Args)]
struct Args {
    /// File of `key = value` lines
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the `out` key)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Config overrides, applied after the file
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// Parses `argv`, runs the experiment and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve(experiment: Experiment, args: Args) -> Result<RunConfig, CliError> {
    let mut entries = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            parse_entries(&text, &path.display().to_string())?
        }
        None => Default::default(),
    };
    for o in &args.overrides {
        let Some((k, v)) = o.split_once('=') else {
            return Err(ConfigError(format!("override `{o}` is not KEY=VALUE")).into());
        };
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(out) = &args.out {
        entries.insert("out".into(), out.display().to_string());
    }
    Ok(RunConfig::resolve(experiment, entries)?)
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let (experiment, args) = match cli.command {
        Command::Make(a) => (Experiment::Make, a),
        Command::Flow(a) => (Experiment::Flow, a),
        Command::Graph(a) => (Experiment::Graph, a),
        Command::Analyze(a) => (Experiment::Analyze, a),
        Command::Ineq(a) => (Experiment::Ineq, a),
    };
    let cfg = resolve(experiment, args)?;
    // build inputs before touching the output directory
    let mesh = match &cfg.mesh {
        Some(source) => Some(source.load(cfg.seed)?),
        None => None,
    };
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("manifest.cfg"), &cfg.to_manifest())?;
    let mut summary = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(summary, "{k} = {v}");
    };
    match experiment {
        Experiment::Make => {
            let mesh = mesh.expect("make has a mesh");
            let path = cfg.out.join(format!("mesh.{}", cfg.format.extension()));
            write_mesh(&mesh, &path, cfg.format)?;
            put("mesh", path.display().to_string());
            put("vertices", mesh.vertex_count().to_string());
            put("triangles", mesh.triangle_count().to_string());
            put("ambient_dim", mesh.dim().to_string());
        }
        Experiment::Flow | Experiment::Graph => {
            let mesh = mesh.expect("flows have a mesh");
            let flow = cfg.flow.as_ref().expect("flows have a flow config");
            let result = if experiment == Experiment::Flow {
                run_flow(flow, &mesh)
            } else {
                NormalGraph::from_mesh(&mesh, &cfg.analysis).and_then(|g| graph_run(flow, &g)).map(|(_, t)| t)
            };
            let (traj, aborted) = match result {
                Ok(t) => (t, None),
                Err(Error::Aborted(a)) => (a.trajectory, Some(a.reason)),
                Err(e) => return Err(CliError::from_core(e)),
            };
            write_trajectory(&traj, &cfg.out)?;
            trajectory_summary(&traj, &cfg.ledger, cfg.report.rho, &mut put);
            if let Some(reason) = aborted {
                put("aborted", reason.clone());
                write_text(&cfg.out.join("summary.cfg"), &summary)?;
                return Err(CliError::Aborted { reason, dir: cfg.out.clone() });
            }
        }
        Experiment::Analyze => {
            let mesh = mesh.expect("analyze has a mesh");
            let a = analyze_surface(&mesh, &cfg.analysis).map_err(CliError::from_core)?;
            let r = report(&mesh, &a, 0.0, &cfg.report).map_err(CliError::from_core)?;
            let (w_energy, _) = willmore_energy(&a.frames, &a.shape);
            let rows = (0..mesh.vertex_count()).map(|i| {
                vec![
                    i.to_string(),
                    a.reliable()[i].to_string(),
                    fmt_f64(a.frames.dual_area(i)),
                    fmt_f64(a.shape.h_sq(i).sqrt()),
                    fmt_f64(a.shape.a_sq[i]),
                    fmt_f64(a.shape.w_norm(i)),
                ]
            });
            write_csv(&cfg.out.join("vertices.csv"), &["vertex", "reliable", "dual_area", "H", "A_sq", "W"], rows)?;
            put("vertices", mesh.vertex_count().to_string());
            put("reliable", a.reliable().iter().filter(|&&x| x).count().to_string());
            put("W_energy", fmt_f64(w_energy));
            report_summary(&r, &cfg.ledger, cfg.report.rho, &mut put);
            for (radius, area) in &r.area_by_radius {
                put(&format!("area_within_{radius}"), fmt_f64(*area));
            }
        }
        Experiment::Ineq => {
            let spec = cfg.corpus.as_ref().expect("ineq has a corpus");
            let corpus = run_corpus(spec, &cfg.analysis).map_err(CliError::from_core)?;
            write_ratios(&corpus.records, &cfg.out.join("ratios.csv"))?;
            put("records", corpus.records.len().to_string());
            for id in [InequalityId::MichaelSimon, InequalityId::LpInterpolation { p: spec.p }, InequalityId::SupBoundProxy] {
                if let Some(m) = corpus.max_ratio(id) {
                    put(&format!("max_{id}"), fmt_f64(m));
                }
            }
        }
    }
    write_text(&cfg.out.join("summary.cfg"), &summary)?;
    Ok(summary)
}

fn report_summary(r: &EnergyReport, ledger: &ConstantsLedger, rho: Option<f64>, put: &mut impl FnMut(&str, String)) {
    put("A_sq_total", fmt_f64(r.a_sq_total));
    put("sup_A", fmt_f64(r.sup_a));
    put("sup_W", fmt_f64(r.sup_w));
    if let (Some(e0), Some(rho)) = (r.concentration_sup(), rho) {
        put("concentration_sup", fmt_f64(e0));
        put("concentration_threshold", fmt_f64(ledger.threshold()));
        match existence_time_prediction(e0, rho, ledger) {
            Ok(p) => {
                put("existence_time", fmt_f64(p.t_pred));
                if let Some(t) = p.t_simplified {
                    put("existence_time_simplified", fmt_f64(t));
                }
            }
            Err(e) => put("existence_time", format!("none ({e})")),
        }
    }
}

fn trajectory_summary(traj: &Trajectory, ledger: &ConstantsLedger, rho: Option<f64>, put: &mut impl FnMut(&str, String)) {
    let Some(first) = traj.reports.first() else {
        put("reports", "0".into());
        return;
    };
    let last = traj.reports.last().expect("nonempty");
    put("reports", traj.reports.len().to_string());
    put("steps", traj.snapshots.last().map(|s| s.0).unwrap_or(0).to_string());
    put("t_final", fmt_f64(last.t));
    put("A_sq_initial", fmt_f64(first.a_sq_total));
    put("dissipation_accum", fmt_f64(traj.dissipation_accum));
    put("residual", fmt_f64(first.a_sq_total - last.a_sq_total - 2.0 * traj.dissipation_accum));
    put("initial_concentration_sup", first.concentration_sup().map(fmt_f64).unwrap_or_else(|| "unset".into()));
    if let (Some(e0), Some(rho)) = (first.concentration_sup(), rho) {
        if let Ok(p) = existence_time_prediction(e0, rho, ledger) {
            put("existence_time", fmt_f64(p.t_pred));
        }
    }
    report_summary(last, ledger, None, put);
}
