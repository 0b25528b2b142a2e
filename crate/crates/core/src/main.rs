//! Command-line driver: field maps, displacement sweeps, modal decomposition,
//! and the invariant suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use oamdiff::analysis::{bg_spectrum, lg_spectrum, uniform_k_rho_lattice};
use oamdiff::config::{OutputFormat, RunConfig};
use oamdiff::experiments::{count_extrema, field_maps, sweep_concurrence, sweep_overlap, FieldMaps};
use oamdiff::modes::ModeFamily;
use oamdiff::obstacle::apply_obstacle;
use oamdiff::output;
use oamdiff::verify::{run_suite, SuiteParams};
use oamdiff::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(version, about = "Diffraction of OAM modes on circular obstacles and the resulting entanglement loss")]
struct Cli {
    /// Flat `key = value` configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Grid samples per axis (power of two)
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,

    /// Physical window width in meters
    #[arg(long, global = true, value_name = "METERS")]
    window: Option<f64>,

    /// Number of d/a samples in a sweep
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,

    /// Minimum dip depth for counting concurrence minima
    #[arg(long, global = true, value_name = "EPS")]
    prominence: Option<f64>,

    /// Worker threads, 0 = one per core
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,

    /// Output format: csv or csv+pgm
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<String>,

    /// Override any config key, e.g. --set l0=3
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Intensity and phase before and after the obstacle at distance z
    Maps,
    /// Mutual overlap b versus d/a
    Overlap,
    /// Concurrence versus d/a
    Concurrence,
    /// Modal spectrum of the diffracted field at d_over_a
    Decompose,
    /// Run the invariant suite
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Maps => "maps",
            Command::Overlap => "overlap",
            Command::Concurrence => "concurrence",
            Command::Decompose => "decompose",
            Command::Verify => "verify",
        }
    }
}

enum Failure {
    Run(Error),
    Invariant(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn resolve(cli: &Cli) -> oamdiff::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| match e {
            Error::Io(io) => Error::Config { key: "config".into(), reason: format!("{}: {io}", path.display()) },
            other => other,
        })?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.grid {
        cfg.set("grid", &v.to_string())?;
    }
    if let Some(v) = cli.window {
        cfg.set("window", &v.to_string())?;
    }
    if let Some(v) = cli.samples {
        cfg.set("samples", &v.to_string())?;
    }
    if let Some(v) = cli.prominence {
        cfg.set("prominence", &v.to_string())?;
    }
    if let Some(v) = &cli.format {
        cfg.set("format", v)?;
    }
    for pair in &cli.overrides {
        cfg.apply_pair(pair)?;
    }
    Ok(cfg)
}

fn write_manifest(cfg: &RunConfig, command: &str, stem: &Path) -> oamdiff::Result<()> {
    fs::write(stem.with_extension("manifest"), cfg.manifest(command)?)?;
    Ok(())
}

fn write_maps(cfg: &RunConfig, stem: &str, maps: &FieldMaps) -> oamdiff::Result<()> {
    for (tag, field) in [("undiffracted", &maps.undiffracted), ("diffracted", &maps.diffracted)] {
        output::write_field_csv(&cfg.out.join(format!("{stem}-{tag}.csv")), field)?;
        if cfg.format == OutputFormat::CsvPgm {
            output::write_intensity_pgm(&cfg.out.join(format!("{stem}-{tag}-intensity.pgm")), field)?;
            output::write_phase_pgm(&cfg.out.join(format!("{stem}-{tag}-phase.pgm")), field)?;
        }
    }
    Ok(())
}

fn run(command: Command, cfg: &RunConfig) -> Result<(), Failure> {
    let name = command.name();
    let grid = cfg.transverse_grid()?;
    fs::create_dir_all(&cfg.out).map_err(Error::from)?;
    let stem = format!("{name}-{}", cfg.content_hash(name)?);
    let base = cfg.out.join(&stem);
    info!("writing {}", base.display());

    match command {
        Command::Maps => {
            let maps = field_maps(&cfg.mode()?, Some(&cfg.obstacle()), cfg.z, &grid, cfg.map_radius)?;
            write_maps(cfg, &stem, &maps)?;
            println!(
                "singularities within {:e} m: undiffracted (+{}, -{}), diffracted (+{}, -{}); edge/peak intensity {:.3e}",
                cfg.map_radius,
                maps.singularities_undiffracted.0,
                maps.singularities_undiffracted.1,
                maps.singularities_diffracted.0,
                maps.singularities_diffracted.1,
                maps.edge_ratio
            );
        }
        Command::Overlap => {
            let curve = sweep_overlap(&cfg.sweep_plan()?, &grid)?;
            output::write_overlap_csv(&base.with_extension("csv"), &curve.points)?;
            println!(
                "max |b| = {:.6e}, extrema (prominence {:e}) = {}",
                curve.max_abs(),
                cfg.prominence,
                count_extrema(&curve.values(), cfg.prominence)
            );
        }
        Command::Concurrence => {
            let sweep = sweep_concurrence(&cfg.sweep_plan()?, &grid, cfg.prominence)?;
            output::write_concurrence_csv(&base.with_extension("csv"), &sweep.rows)?;
            let (x, c) = sweep.summary.global_min;
            println!("global minimum C_paper = {c:.6} at d/a = {x:.4}; N_min = {}", sweep.summary.n_min);
        }
        Command::Decompose => {
            let u = cfg.mode()?.generate(&grid)?;
            let psi = apply_obstacle(&u, &cfg.obstacle())?.field;
            let l0 = cfg.l0 as i32;
            let l_range = l0 - cfg.l_span as i32..=l0 + cfg.l_span as i32;
            let spectrum = match cfg.family {
                ModeFamily::Lg => lg_spectrum(&psi, cfg.p_max, l_range, cfg.resolved_lg_waist()?)?,
                ModeFamily::Bg => {
                    let lattice = uniform_k_rho_lattice(cfg.krho_span * cfg.k_rho, cfg.krho_samples)?;
                    bg_spectrum(&psi, &lattice, l_range, cfg.bg_waist)?
                }
            };
            output::write_spectrum_csv(&base.with_extension("csv"), &spectrum)?;
            println!("captured power = {:.6e}", spectrum.captured_power());
        }
        Command::Verify => {
            let mut lg_cfg = cfg.clone();
            lg_cfg.family = ModeFamily::Lg;
            let mut bg_cfg = cfg.clone();
            bg_cfg.family = ModeFamily::Bg;
            let params = SuiteParams { grid, lg: lg_cfg.scenario()?, bg: bg_cfg.scenario()?, z: cfg.z };
            let checks = run_suite(&params)?;
            let report: String = checks.iter().map(|c| format!("{c}\n")).collect();
            print!("{report}");
            fs::write(base.with_extension("txt"), &report).map_err(Error::from)?;
            let failed = checks.iter().filter(|c| !c.passed()).count();
            write_manifest(cfg, name, &base)?;
            if failed > 0 {
                return Err(Failure::Invariant(failed));
            }
            return Ok(());
        }
    }
    write_manifest(cfg, name, &base)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    match run(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(n)) => {
            eprintln!("error: {n} invariant check(s) failed");
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_CONFIG)
            }
        }
    }
}
