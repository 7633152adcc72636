//! `comsupport` subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use comsupport_core::centroidal::{solve_centroidal, CentroidalResult};
use comsupport_core::controller::run_scenario;
use comsupport_core::csa::contains;
use serde::Serialize;

use crate::config::{ScenarioConfig, SCHEMA_VERSION};
use crate::trace::{self, status_name, Summary};
use crate::{load_scenario, plot, sweep, Failure};

#[derive(Debug, Parser)]
#[command(name = "comsupport", version, about = "CoM support area and centroidal balance for multi-contact stances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// Pretty-printed JSON.
    Structured,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSA for the desired hand force at time `--at`.
    Csa {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        /// Also write a top-view SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// One centroidal QP solve at time `--at`.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
    },
    /// Closed-loop run; CSV trace plus a JSON summary next to it.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Directory for force, CoM and CSA plots.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Feasibility boundary in the pressing force, free vs fixed CoM.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Parameter::HandForce)]
        parameter: Parameter,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Parameter {
    HandForce,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Csa { common, at, svg } => cmd_csa(&common, at, svg.as_deref()),
        Command::Solve { common, at } => cmd_solve(&common, at),
        Command::Simulate { common, plots } => cmd_simulate(&common, plots.as_deref()),
        Command::Sweep { common, parameter: Parameter::HandForce, lo, hi } => cmd_sweep(&common, lo, hi),
    }
}

fn check_time(at: f64) -> Result<(), Failure> {
    if at.is_finite() && at >= 0.0 {
        Ok(())
    } else {
        Err(Failure::Config { path: "--at".into(), message: format!("time must be finite and non-negative, got {at}") })
    }
}

#[derive(Debug, Serialize)]
pub struct CsaReport {
    pub schema_version: u32,
    pub t: f64,
    pub hand_force: f64,
    pub offset: [f64; 2],
    pub scale: f64,
    pub area: f64,
    pub middle: [f64; 2],
    pub vertices: Vec<[f64; 2]>,
}

pub fn csa_report(cfg: &ScenarioConfig, at: f64) -> Result<(CsaReport, comsupport_core::csa::SupportPolygon), Failure> {
    check_time(at)?;
    let sc = cfg.to_scenario()?;
    let force = sc.force_profile.eval(at);
    let setup = sc.static_setup(at, force, Default::default())?;
    let csa = setup.desired_csa()?;
    let mid = csa.middle(sc.csa_middle);
    let report = CsaReport {
        schema_version: SCHEMA_VERSION,
        t: at,
        hand_force: force,
        offset: [csa.offset.x, csa.offset.y],
        scale: csa.scale,
        area: csa.area(),
        middle: [mid.x, mid.y],
        vertices: csa.vertices.iter().map(|v| [v.x, v.y]).collect(),
    };
    Ok((report, csa))
}

fn cmd_csa(common: &Common, at: f64, svg: Option<&Path>) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(&common.config)?;
    let (report, csa) = csa_report(&cfg, at)?;
    match common.format {
        Format::Structured => write_json(common.out.as_deref(), &report)?,
        Format::Csv => {
            let mut w = open_out(common.out.as_deref())?;
            writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
            writeln!(w, "# t={} hand_force={} offset_x={} offset_y={} scale={}", report.t, report.hand_force, report.offset[0], report.offset[1], report.scale)?;
            writeln!(w, "x,y")?;
            for v in &report.vertices {
                writeln!(w, "{},{}", v[0], v[1])?;
            }
            w.flush()?;
        }
    }
    if let Some(path) = svg {
        let sc = cfg.to_scenario()?;
        let mid = csa.middle(sc.csa_middle);
        write_file(path, &plot::csa_view(&sc.feet, &csa, Some(mid)))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub t: f64,
    pub hand_force: f64,
    pub status: &'static str,
    pub com: [f64; 3],
    /// Contact-frame wrenches (force, torque).
    pub w_rf: [f64; 6],
    pub w_lf: [f64; 6],
    pub w_rh: [f64; 6],
    /// Smallest inequality slack per contact (rf, lf, rh).
    pub cone_margins: [f64; 3],
    pub alphas: [f64; 2],
    pub newton_euler_residual: f64,
    pub sliding_residual: f64,
    pub com_in_csa: bool,
    pub iterations: usize,
}

fn six(v: &comsupport_core::spatial::Vec6) -> [f64; 6] {
    [v[0], v[1], v[2], v[3], v[4], v[5]]
}

impl SolveReport {
    fn new(t: f64, force: f64, r: &CentroidalResult) -> Self {
        let com = r.y.com;
        Self {
            schema_version: SCHEMA_VERSION,
            t,
            hand_force: force,
            status: status_name(r.status),
            com: [com.x, com.y, com.z],
            w_rf: six(&r.y.w_rf.to_vector()),
            w_lf: six(&r.y.w_lf.to_vector()),
            w_rh: six(&r.y.w_rh.to_vector()),
            cone_margins: r.cone_margins,
            alphas: r.alphas,
            newton_euler_residual: r.newton_euler_residual,
            sliding_residual: r.sliding_residual,
            com_in_csa: contains(&r.csa, &com.xy()),
            iterations: r.qp.iterations,
        }
    }
}

pub fn solve_report(cfg: &ScenarioConfig, at: f64) -> Result<SolveReport, Failure> {
    check_time(at)?;
    let sc = load_scenario(cfg)?;
    let force = sc.force_profile.eval(at);
    let setup = sc.static_setup(at, force, sc.com_policy)?;
    let r = solve_centroidal(&setup).map_err(|e| match Failure::from(e) {
        Failure::Infeasible(msg) => Failure::Infeasible(format!("{msg} (t = {at} s, pressing force {force} N)")),
        other => other,
    })?;
    Ok(SolveReport::new(at, force, &r))
}

fn cmd_solve(common: &Common, at: f64) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(&common.config)?;
    let report = solve_report(&cfg, at)?;
    match common.format {
        Format::Structured => write_json(common.out.as_deref(), &report),
        Format::Csv => {
            let mut w = open_out(common.out.as_deref())?;
            writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
            writeln!(w, "name,value")?;
            writeln!(w, "status,{}", report.status)?;
            writeln!(w, "t,{}", report.t)?;
            writeln!(w, "hand_force,{}", report.hand_force)?;
            for (name, v) in ["com_x", "com_y", "com_z"].iter().zip(report.com) {
                writeln!(w, "{name},{v}")?;
            }
            let axes = ["fx", "fy", "fz", "tx", "ty", "tz"];
            for (c, w6) in [("rf", report.w_rf), ("lf", report.w_lf), ("rh", report.w_rh)] {
                for (a, v) in axes.iter().zip(w6) {
                    writeln!(w, "w_{c}_{a},{v}")?;
                }
            }
            for (c, m) in ["rf", "lf", "rh"].iter().zip(report.cone_margins) {
                writeln!(w, "cone_margin_{c},{m}")?;
            }
            writeln!(w, "newton_euler_residual,{}", report.newton_euler_residual)?;
            writeln!(w, "sliding_residual,{}", report.sliding_residual)?;
            writeln!(w, "com_in_csa,{}", report.com_in_csa)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// `trace.csv` → `trace.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn cmd_simulate(common: &Common, plots: Option<&Path>) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(&common.config)?;
    let sc = load_scenario(&cfg)?;
    let records = run_scenario(&sc)?;
    let summary = Summary::from_records(&cfg.description, &records);
    match common.format {
        Format::Csv => {
            trace::write_csv(open_out(common.out.as_deref())?, &records)?;
            if let Some(out) = &common.out {
                let path = summary_path(out);
                let f = File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                trace::write_summary(BufWriter::new(f), &summary)?;
            }
        }
        Format::Structured => {
            let mut w = open_out(common.out.as_deref())?;
            trace::write_structured(&mut w, &summary, &records)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    if let Some(dir) = plots {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join("force.svg"), &plot::force_tracking(&records))?;
        write_file(&dir.join("com.svg"), &plot::com_path(&records))?;
        if let Some(last) = records.iter().rev().find(|r| !r.csa_vertices.is_empty()) {
            let csa = comsupport_core::csa::SupportPolygon {
                vertices: last.csa_vertices.clone(),
                offset: Default::default(),
                scale: 1.0,
            };
            write_file(&dir.join("csa.svg"), &plot::csa_view(&sc.feet, &csa, Some(last.com_des)))?;
        }
    }
    eprintln!(
        "{}: {} ticks, {}{}",
        common.config.display(),
        summary.ticks,
        summary.run_status,
        summary.infeasible_at.map_or(String::new(), |t| format!(" at t = {t:.3} s"))
    );
    Ok(())
}

fn cmd_sweep(common: &Common, lo: f64, hi: f64) -> Result<(), Failure> {
    sweep::check_range(lo, hi)?;
    let cfg = ScenarioConfig::load(&common.config)?;
    let sc = load_scenario(&cfg)?;
    let report = sweep::sweep_hand_force(&sc, lo, hi)?;
    match common.format {
        Format::Structured => write_json(common.out.as_deref(), &report),
        Format::Csv => {
            let mut w = open_out(common.out.as_deref())?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
            writeln!(w, "policy,max_feasible,min_infeasible,solves")?;
            for (name, b) in [("free", report.free), ("fixed", report.fixed)] {
                writeln!(w, "{name},{},{},{}", opt(b.max_feasible), opt(b.min_infeasible), b.solves)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}
