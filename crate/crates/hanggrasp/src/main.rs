//! Command-line front end: detection, hang-only analysis, visualization
//! export, and synthetic shape generation.
//!
//! Exit codes: 0 success, 1 error, 2 detection finished but found no grasp.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hanggrasp::pipeline::{
    build_hang_report, build_report, run_detect, run_hang, PipelineConfig, Profile, Report,
};
use hanggrasp::synthetics::{build_shape, partial_scan, ShapeKind, ShapeSpec};
use hanggrasp::{load_mesh, viz, GripperModel};

#[derive(Parser)]
#[command(
    name = "hanggrasp",
    about = "Detect hangable structures on a mesh and rank hook-gripper grasp poses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PipelineArgs {
    /// Input mesh (OBJ, PLY or STL).
    #[arg(long)]
    mesh: PathBuf,
    /// TOML config with sections hang/gen/score/gripper/run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of ranked poses to keep.
    #[arg(long)]
    top_k: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Viewpoint profile: full (no fingertip standoff) or single.
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write ranked grasps as JSON.
    Detect(PipelineArgs),
    /// Run hangability detection only.
    Hang(PipelineArgs),
    /// Export gripper solids, ray fans and markers from a detect report.
    Viz {
        /// JSON report produced by `detect`.
        #[arg(long)]
        input: PathBuf,
        /// Output directory for OBJ/PLY files.
        #[arg(long)]
        out: PathBuf,
        /// Optional config to pose the same gripper dimensions.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic test shape with its ground-truth sidecar.
    Synth {
        /// Shape kind.
        #[arg(long, value_enum)]
        kind: Kind,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        /// Ring radius for torus-like shapes (meters).
        #[arg(long)]
        major_radius: Option<f64>,
        /// Tube radius for torus-like shapes (meters).
        #[arg(long)]
        minor_radius: Option<f64>,
        /// Arc sweep in degrees.
        #[arg(long)]
        sweep_deg: Option<f64>,
        /// Sphere/cylinder radius (meters).
        #[arg(long)]
        radius: Option<f64>,
        /// Cylinder height (meters).
        #[arg(long)]
        height: Option<f64>,
        /// Box edge lengths (meters).
        #[arg(long, num_args = 3, allow_negative_numbers = true)]
        size: Option<Vec<f64>>,
        /// Also write a partial-scan variant seen from this viewpoint (x y z).
        #[arg(long, num_args = 3, allow_negative_numbers = true)]
        scan_from: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Kind {
    Torus,
    ArcTorus,
    Mug,
    Hanger,
    PlateWithHoles,
    Sphere,
    Box,
    Cylinder,
}

impl From<Kind> for ShapeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Torus => ShapeKind::Torus,
            Kind::ArcTorus => ShapeKind::ArcTorus,
            Kind::Mug => ShapeKind::Mug,
            Kind::Hanger => ShapeKind::Hanger,
            Kind::PlateWithHoles => ShapeKind::PlateWithHoles,
            Kind::Sphere => ShapeKind::Sphere,
            Kind::Box => ShapeKind::Box,
            Kind::Cylinder => ShapeKind::Cylinder,
        }
    }
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse::<Profile>().map_err(|e| e.to_string())
}

fn load_config(args: &PipelineArgs) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(top_k) = args.top_k {
        cfg.run.top_k = top_k;
    }
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(profile) = args.profile {
        cfg.run.profile = profile;
    }
    cfg.apply_profile();
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(report: &Report, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_detect(args: &PipelineArgs) -> anyhow::Result<u8> {
    let cfg = load_config(args)?;
    let mesh = load_mesh(&args.mesh)?;
    let run = run_detect(&mesh, &cfg)?;
    let report = build_report(&args.mesh.display().to_string(), &cfg, &run);
    write_report(&report, &args.out)?;
    Ok(if report.grasps.is_empty() { 2 } else { 0 })
}

fn cmd_hang(args: &PipelineArgs) -> anyhow::Result<u8> {
    let cfg = load_config(args)?;
    let mesh = load_mesh(&args.mesh)?;
    let (stats, hangs) = run_hang(&mesh, &cfg)?;
    let report = build_hang_report(&args.mesh.display().to_string(), &cfg, &stats, &hangs);
    write_report(&report, &args.out)?;
    Ok(0)
}

fn cmd_viz(input: &PathBuf, out: &PathBuf, config: &Option<PathBuf>) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(input)?;
    let report: Report = serde_json::from_str(&text)?;
    let model = match config {
        Some(path) => PipelineConfig::load(path)?.gripper,
        None => GripperModel::default(),
    };
    let written = viz::export_viz(&report, &model, out)?;
    eprintln!("wrote {} files to {}", written.len(), out.display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    kind: Kind,
    out: &PathBuf,
    resolution: Option<usize>,
    major_radius: Option<f64>,
    minor_radius: Option<f64>,
    sweep_deg: Option<f64>,
    radius: Option<f64>,
    height: Option<f64>,
    size: Option<Vec<f64>>,
    scan_from: Option<Vec<f64>>,
) -> anyhow::Result<u8> {
    let mut spec = ShapeSpec::new(kind.into());
    if let Some(v) = resolution {
        spec.resolution = v;
    }
    if let Some(v) = major_radius {
        spec.major_radius = v;
    }
    if let Some(v) = minor_radius {
        spec.minor_radius = v;
    }
    if let Some(v) = sweep_deg {
        spec.sweep_deg = v;
    }
    if let Some(v) = radius {
        spec.radius = v;
    }
    if let Some(v) = height {
        spec.height = v;
    }
    if let Some(v) = size {
        spec.size = [v[0], v[1], v[2]];
    }
    let (mesh, truth) = build_shape(&spec)?;
    std::fs::create_dir_all(out)?;
    hanggrasp::mesh::save_obj(&mesh, &out.join("mesh.obj"))?;
    hanggrasp::mesh::save_ply(&mesh, &out.join("mesh.ply"))?;
    std::fs::write(
        out.join("truth.json"),
        serde_json::to_string_pretty(&truth)? + "\n",
    )?;
    if let Some(v) = scan_from {
        let viewpoint = nalgebra::Point3::new(v[0], v[1], v[2]);
        let partial = partial_scan(&mesh, &viewpoint)?;
        hanggrasp::mesh::save_obj(&partial, &out.join("mesh_partial.obj"))?;
    }
    eprintln!("wrote shape files to {}", out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Hang(args) => cmd_hang(args),
        Command::Viz { input, out, config } => cmd_viz(input, out, config),
        Command::Synth {
            kind,
            out,
            resolution,
            major_radius,
            minor_radius,
            sweep_deg,
            radius,
            height,
            size,
            scan_from,
        } => cmd_synth(
            *kind,
            out,
            *resolution,
            *major_radius,
            *minor_radius,
            *sweep_deg,
            *radius,
            *height,
            size.clone(),
            scan_from.clone(),
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
