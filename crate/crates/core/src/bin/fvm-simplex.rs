use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use fvm_simplex::analysis::{self_convergence_study, StudyConfig};
use fvm_simplex::config::{ConfigDraft, RunConfig};
use fvm_simplex::graph::build_vertex_laplacian;
use fvm_simplex::output;
use fvm_simplex::scheme::{assemble, run_state, scheme_coefficient, sup_norm};
use fvm_simplex::spectral::{self, annotated_spectrum, cfl_admissible, cfl_admissible_steps, cfl_max_h};
use fvm_simplex::{BoundaryMode, CellLaplacian, FvmError, Scheme, SimplexSpace, VertexVariant};

#[derive(Parser)]
#[command(name = "fvm-simplex", version, about = "Heat flow on Sierpinski simplices by finite volumes")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "FVM_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the explicit or implicit scheme and write snapshots.
    Simulate(Box<SimulateArgs>),
    /// Cell-Laplacian spectrum with decimation provenance.
    Spectrum {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "dirichlet-ghost")]
        boundary: BoundaryMode,
        #[arg(long)]
        ghost_increment: Option<f64>,
    },
    /// Check a step size against the explicit stability bound.
    Cfl {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, conflicts_with_all = ["t", "n"], required_unless_present_all = ["t", "n"])]
        h: Option<f64>,
        #[arg(long = "T", requires = "n")]
        t: Option<f64>,
        #[arg(long = "N", requires = "t")]
        n: Option<u64>,
    },
    /// Write the cell or vertex Laplacian in Matrix Market format.
    Laplacian {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "dirichlet-ghost")]
        boundary: BoundaryMode,
        #[arg(long)]
        ghost_increment: Option<f64>,
        #[arg(long, value_enum, default_value = "cell")]
        graph: GraphKind,
        /// Vertex-graph construction: fused or merged.
        #[arg(long, default_value = "fused")]
        variant: VertexVariant,
    },
    /// Self-convergence study against a finer reference level.
    Convergence {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        levels: Vec<usize>,
        #[arg(long, default_value = "implicit")]
        scheme: Scheme,
        #[arg(long, default_value = "dirichlet-ghost")]
        boundary: BoundaryMode,
        #[arg(long = "T", default_value_t = 0.1)]
        t: f64,
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
    },
    /// Cell barycentres and measures.
    ExportGeometry {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum GraphKind {
    Cell,
    Vertex,
}

#[derive(Args)]
struct SimulateArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// gasket-paper or tetra-paper.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    ghost_increment: Option<String>,
    #[arg(long)]
    cfl_policy: Option<String>,
    /// Comma-separated step numbers.
    #[arg(long)]
    snapshots: Option<String>,
    /// spike:IDX, spline:WORD:CORNER[:LEVEL] or file:PATH.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    cg_tolerance: Option<String>,
    #[arg(long)]
    cg_max_iterations: Option<String>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<FvmError> for Failure {
    fn from(e: FvmError) -> Self {
        match e {
            FvmError::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.cmd {
        Cmd::Simulate(args) => simulate(&cli.out, *args),
        Cmd::Spectrum { d, m, boundary, ghost_increment } => {
            spectrum(&cli.out, d, m, with_increment(boundary, ghost_increment))
        }
        Cmd::Cfl { d, m, h, t, n } => cfl(d, m, h, t.zip(n)),
        Cmd::Laplacian { d, m, boundary, ghost_increment, graph, variant } => {
            let vertex = matches!(graph, GraphKind::Vertex).then_some(variant);
            laplacian(&cli.out, d, m, with_increment(boundary, ghost_increment), vertex)
        }
        Cmd::Convergence { d, levels, scheme, boundary, t, n } => {
            let mut cfg = StudyConfig::new(d, levels);
            cfg.scheme = scheme;
            cfg.boundary = boundary;
            cfg.t_final = t;
            cfg.n_steps = n;
            convergence(&cli.out, &cfg)
        }
        Cmd::ExportGeometry { d, m } => export_geometry(&cli.out, d, m),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn with_increment(boundary: BoundaryMode, inc: Option<f64>) -> BoundaryMode {
    match (boundary, inc) {
        (BoundaryMode::DirichletGhost { .. }, Some(increment)) => BoundaryMode::DirichletGhost { increment },
        (b, _) => b,
    }
}

fn io<T>(r: std::io::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Run(e.to_string()))
}

fn draft_from(args: &SimulateArgs) -> std::result::Result<ConfigDraft, FvmError> {
    let mut draft = match &args.preset {
        Some(p) => ConfigDraft::preset(p)?,
        None => ConfigDraft::new(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FvmError::Config(format!("{}: {e}", path.display())))?;
        draft = draft.merge(ConfigDraft::parse(&text, &path.display().to_string())?);
    }
    let flags = [
        ("d", &args.d),
        ("m", &args.m),
        ("T", &args.t),
        ("N", &args.n),
        ("scheme", &args.scheme),
        ("boundary", &args.boundary),
        ("ghost_increment", &args.ghost_increment),
        ("cfl_policy", &args.cfl_policy),
        ("snapshots", &args.snapshots),
        ("initial", &args.initial),
        ("cg_tolerance", &args.cg_tolerance),
        ("cg_max_iterations", &args.cg_max_iterations),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            let flag = format!("--{}", if key.len() == 1 { key.to_string() } else { key.replace('_', "-") });
            draft.set(key, v.clone(), flag)?;
        }
    }
    Ok(draft)
}

fn simulate(out: &Path, args: SimulateArgs) -> CmdResult {
    let cfg: RunConfig = draft_from(&args)?.finish()?;
    let started = Instant::now();
    let (d, m) = (cfg.d, cfg.m);
    let sc = cfg.scheme_config();
    let h = sc.h();
    let admissible = cfl_admissible_steps(cfg.t_final, cfg.n_steps as u64, d, m);
    let verdict = format!(
        "{} (h = {}, explicit bound = {})",
        if admissible { "admissible" } else { "violates" },
        output::num(h),
        output::num(cfl_max_h(d, m))
    );
    info!("d={d} m={m} h={h} scheme={} cfl {verdict}", cfg.scheme);
    let space = SimplexSpace::regular(d)?;
    let u0 = cfg.initial.state(d, m)?;
    let matrix = assemble(d, m, &sc)?;
    let (series, failure) = match run_state(&matrix, &sc, u0) {
        Ok(s) => (s, None),
        Err(f) => (f.partial.clone(), Some(f)),
    };
    let elapsed = started.elapsed().as_secs_f64();

    io(std::fs::create_dir_all(out))?;
    for snap in &series.snapshots {
        let mut w = output::create(&output::snapshot_path(out, snap.step))?;
        output::write_snapshot(&mut w, &space, m, snap)?;
        io(w.flush())?;
    }
    let mut manifest = cfg.to_kv();
    manifest.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
    manifest.push_str(&format!("# cfl = {verdict}\n"));
    manifest.push_str(&format!("# wall_clock_seconds = {elapsed:.3}\n"));
    io(std::fs::write(out.join("manifest.txt"), manifest))?;

    let mut summary = vec![
        ("d".to_string(), d.to_string()),
        ("m".to_string(), m.to_string()),
        ("cells".to_string(), matrix.dim().to_string()),
        ("scheme".to_string(), cfg.scheme.to_string()),
        ("boundary".to_string(), cfg.boundary.to_string()),
        ("h".to_string(), output::num(h)),
        ("coefficient".to_string(), output::num(scheme_coefficient(d, m))),
        ("cfl".to_string(), verdict),
        ("norm_2_inf".to_string(), output::num(series.norm_2_inf)),
        ("cg_iterations".to_string(), series.cg_iterations.to_string()),
    ];
    if matrix.dim() <= spectral::DENSE_BUDGET {
        if let Ok(rho) = spectral::spectral_radius(&matrix) {
            summary.push(("spectral_radius".to_string(), output::num(rho)));
        }
    }
    for snap in &series.snapshots {
        summary.push((format!("sup_norm[{}]", snap.step), output::num(sup_norm(&snap.values))));
        summary.push((format!("mass[{}]", snap.step), output::num(snap.mass)));
    }
    if let Some(f) = &failure {
        summary.push(("failed_at_step".to_string(), f.step.to_string()));
    }
    summary.push(("wall_clock_seconds".to_string(), format!("{elapsed:.3}")));
    let mut w = output::create(&out.join("summary.txt"))?;
    output::write_summary(&mut w, &summary)?;
    io(w.flush())?;
    let mut stdout = std::io::stdout().lock();
    output::write_summary(&mut stdout, &summary)?;

    match failure {
        Some(f) => Err(Failure::Run(f.to_string())),
        None => Ok(()),
    }
}

fn spectrum(out: &Path, d: usize, m: usize, boundary: BoundaryMode) -> CmdResult {
    let report = annotated_spectrum(d, m, boundary)?;
    let mut w = output::create(&out.join("spectrum.csv"))?;
    output::write_spectrum(&mut w, &report)?;
    io(w.flush())?;
    let mut stdout = std::io::stdout().lock();
    output::write_spectrum(&mut stdout, &report)?;
    Ok(())
}

fn cfl(d: usize, m: usize, h: Option<f64>, tn: Option<(f64, u64)>) -> CmdResult {
    if d < 2 {
        return Err(FvmError::InvalidDimension(d).into());
    }
    let (h, ok) = match (h, tn) {
        (Some(h), _) => (h, cfl_admissible(h, d, m)),
        (None, Some((t, n))) if n > 0 => (t / n as f64, cfl_admissible_steps(t, n, d, m)),
        _ => return Err(Failure::Usage("give --h, or --T with --N > 0".into())),
    };
    println!("{}", if ok { "admissible" } else { "violates" });
    println!("h = {}", output::num(h));
    println!("bound = {}", output::num(cfl_max_h(d, m)));
    Ok(())
}

fn laplacian(
    out: &Path,
    d: usize,
    m: usize,
    boundary: BoundaryMode,
    vertex: Option<VertexVariant>,
) -> CmdResult {
    let (matrix, name) = match vertex {
        None => (CellLaplacian::for_level(d, m, boundary)?.matrix().clone(), "laplacian.mtx"),
        Some(v) => {
            if boundary != BoundaryMode::dirichlet() {
                warn!("--boundary is ignored for vertex graphs");
            }
            (build_vertex_laplacian(d, m, v)?.laplacian_f64(), "vertex_laplacian.mtx")
        }
    };
    let path = out.join(name);
    let mut w = output::create(&path)?;
    output::write_matrix_market(&mut w, &matrix)?;
    io(w.flush())?;
    println!("wrote {} ({} x {}, {} nonzeros)", path.display(), matrix.dim(), matrix.dim(), matrix.nnz());
    Ok(())
}

fn convergence(out: &Path, cfg: &StudyConfig) -> CmdResult {
    let table = self_convergence_study(cfg)?;
    let mut w = output::create(&out.join("convergence.csv"))?;
    output::write_convergence(&mut w, &table)?;
    io(w.flush())?;
    let mut stdout = std::io::stdout().lock();
    output::write_convergence(&mut stdout, &table)?;
    if table.strictly_decreasing() {
        Ok(())
    } else {
        Err(Failure::Run("errors are not strictly decreasing".into()))
    }
}

fn export_geometry(out: &Path, d: usize, m: usize) -> CmdResult {
    let space = SimplexSpace::regular(d)?;
    let path = out.join("geometry.csv");
    let mut w = output::create(&path)?;
    output::write_geometry(&mut w, &space, m)?;
    io(w.flush())?;
    println!("wrote {}", path.display());
    Ok(())
}
