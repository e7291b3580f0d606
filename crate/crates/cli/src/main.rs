//! Batch driver: single runs, convergence studies, self-checks and reference profiles.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use esgdf::diagnostics::{l2_error, Monitor};
use esgdf::integrate::{advance, Solver, DEFAULT_CFL};
use esgdf::io::{write_convergence_csv, write_diagnostics_csv, Config, ConvergenceRow, Snapshot};
use esgdf::limiter::LimiterParams;
use esgdf::problems::get_problem;
use esgdf::reference::{cached_reference, REFERENCE_CELLS};
use esgdf::state::{BX, ENERGY, MX, RHO};

#[derive(Parser)]
#[command(name = "esgdf", version, about = "Divergence-free entropy-stable DG solver for 2D ideal MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Mesh-refinement study against an exact solution.
    Converge {
        #[arg(long, default_value = "vortex")]
        problem: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Comma-separated cell counts per direction.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        meshes: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_CFL)]
        cfl: f64,
        /// Also write the table to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check operators, fluxes and reconstruction.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build or load the 1D reference profile of the rotated shock tube.
    Reference {
        #[arg(long, default_value = "rotated_brio_wu")]
        problem: String,
        #[arg(long, default_value_t = REFERENCE_CELLS)]
        cells: usize,
        #[arg(long, default_value = "output/rotated_brio_wu_reference.csv")]
        output: PathBuf,
    },
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot create {}: {e}", path.display())))
}

fn write_snapshot(dir: &Path, step: usize, snap: &Snapshot, title: &str) -> esgdf::Result<()> {
    let stem = format!("snapshot_{step:06}");
    let mut w = create(&dir.join(format!("{stem}.vtk")))?;
    snap.write_vtk(&mut w, title)?;
    w.flush()?;
    let mut w = create(&dir.join(format!("{stem}.csv")))?;
    snap.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run(config_path: &Path) -> anyhow::Result<()> {
    let cfg = Config::from_file(config_path)?;
    let p = get_problem(&cfg.problem)?;
    let gamma = cfg.gamma.unwrap_or(p.gamma);
    let t_end = cfg.t_end.unwrap_or(p.t_end);
    let nx = cfg.nx.unwrap_or(p.recommended_mesh.0);
    let ny = cfg.ny.unwrap_or(p.recommended_mesh.1);
    let limiter = LimiterParams {
        enabled: cfg.limiter_enabled.unwrap_or(p.limiter),
        c0: cfg.limiter_c0.unwrap_or(p.limiter_c0),
    };
    log::info!(
        "{}: {nx}x{ny} cells, k = {}, gamma = {gamma}, t_end = {t_end}, cfl = {}, limiter {:?}",
        p.id,
        cfg.k,
        cfg.cfl,
        limiter
    );
    let mut solver = Solver::new(p.mesh(nx, ny)?, cfg.k, gamma, cfg.cfl, limiter)?;
    let (field, edges) = p.initial_fields(&solver.mesh, &solver.ops, gamma)?;
    let state = solver.initialize(field, edges)?;

    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let every = cfg.output_every;
    let mut monitor = Monitor::new(every.max(1));
    let mut theta_min = 1.0f64;
    let result = advance(&mut solver, state, t_end, cfg.max_steps, &mut |s, step, t, dt, st| {
        theta_min = theta_min.min(s.take_theta_min());
        let last = t >= t_end || cfg.max_steps == Some(step);
        if step == 0 || last || (every > 0 && step % every == 0) {
            monitor.record(&st.field, &s.ops, &s.mesh, s.gamma, step, t, dt, theta_min, st.energy_correction)?;
            theta_min = 1.0;
            let snap = Snapshot::new(&st.field, &s.mesh, &s.ops, s.gamma);
            let title = format!("{} step {step} t {t:.16e}", p.id);
            write_snapshot(&dir, step, &snap, &title)?;
            log::info!("step {step} t = {t:.6e} dt = {dt:.3e}");
        }
        Ok(())
    });
    let mut w = create(&dir.join("diagnostics.csv"))?;
    write_diagnostics_csv(&mut w, &monitor.rows)?;
    w.flush()?;
    result?;
    Ok(())
}

fn converge(problem: &str, k: usize, meshes: &[usize], t_end: f64, cfl: f64, output: Option<&Path>) -> anyhow::Result<()> {
    let p = get_problem(problem)?;
    let Some(exact) = p.exact.clone() else {
        return Err(esgdf::Error::Config(format!("problem '{problem}' has no exact solution")).into());
    };
    if meshes.is_empty() {
        return Err(esgdf::Error::Config("at least one mesh is required".into()).into());
    }
    let mut rows = Vec::new();
    for &n in meshes {
        let mut solver = Solver::new(p.mesh(n, n)?, k, p.gamma, cfl, LimiterParams::default())?;
        let (field, edges) = p.initial_fields(&solver.mesh, &solver.ops, p.gamma)?;
        let state = solver.initialize(field, edges)?;
        let end = advance(&mut solver, state, t_end, None, &mut |_, _, _, _, _| Ok(()))?;
        let e = l2_error(&end.field, &|x, y| exact(x, y, t_end), &solver.ops, &solver.mesh);
        log::info!("N = {n}: L2 errors rho {:.3e} mx {:.3e} Bx {:.3e} E {:.3e}", e[RHO], e[MX], e[BX], e[ENERGY]);
        rows.push(ConvergenceRow { n, errors: [e[RHO], e[MX], e[BX], e[ENERGY]] });
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    write_convergence_csv(&mut out, &rows)?;
    out.flush()?;
    if let Some(path) = output {
        let mut w = create(path)?;
        write_convergence_csv(&mut w, &rows)?;
        w.flush()?;
    }
    Ok(())
}

fn verify(seed: u64) -> anyhow::Result<()> {
    let checks = esgdf::verify::run_all(seed)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!(CliError::VerifyFailed(failed));
    }
    Ok(())
}

fn reference(problem: &str, cells: usize, output: &Path) -> anyhow::Result<()> {
    if problem != "rotated_brio_wu" {
        get_problem(problem)?;
        return Err(esgdf::Error::Config(format!("no reference profile for problem '{problem}'")).into());
    }
    let profile = cached_reference(output, cells)?;
    println!("reference {} cells, t = {:.16e}, written to {}", profile.cells.len(), profile.time, output.display());
    Ok(())
}

#[derive(Debug)]
enum CliError {
    VerifyFailed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::VerifyFailed(n) => write!(f, "{n} verification checks failed"),
        }
    }
}

impl std::error::Error for CliError {}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<esgdf::Error>() {
        return e.kind();
    }
    if let Some(CliError::VerifyFailed(_)) = e.downcast_ref::<CliError>() {
        return "verify_failed";
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    "internal"
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Converge { problem, k, meshes, t_end, cfl, output } => {
            converge(problem, *k, meshes, *t_end, *cfl, output.as_deref())
        }
        Command::Verify { seed } => verify(*seed),
        Command::Reference { problem, cells, output } => reference(problem, *cells, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: kind={} message={message}", error_kind(&e));
            ExitCode::FAILURE
        }
    }
}
