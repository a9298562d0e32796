//! Command-line front end.
//!
//! Exit codes: 0 on success (including results flagged as critical),
//! 1 on usage errors, 2 on numerical failures or unwritable output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::berry::{chern_number, surface_samples, BerryField, ChernMethod, ExtensionKind, SignConvention};
use crate::error::Error;
use crate::io::{fmt_f64, round_json};
use crate::majorana::{analyze, eigenvalues_csv, majorana_charge, DEFAULT_ZERO_THRESHOLD};
use crate::model::{critical_fields, dispersion, preset, sample_loop, CouplingSet, DEFAULT_GRID_SIZE};
use crate::sweep::{sweep, table1_csv, table1_report, SweepSpec};
use crate::winding::{winding_number_with_tolerance, GAP_TOLERANCE};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "ISING_TOPO_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ising-topo",
    version,
    about = "Winding numbers, Chern numbers and Majorana charges of generalized quantum Ising chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quasiparticle energy and Bogoliubov angle over k.
    Spectrum {
        #[command(flatten)]
        coupling: CouplingArgs,
        /// Evaluate at a single momentum instead of the grid.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sampled auxiliary-plane loop.
    Loop {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Winding number of the loop about the origin.
    Winding {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[arg(long, default_value_t = GAP_TOLERANCE)]
        gap_tolerance: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Chern number of the lower band of the extended Hamiltonian.
    Chern {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = ConventionArg::ThetaFlipped)]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value_t = ExtensionArg::UnitSphere)]
        extension: ExtensionArg,
        /// Quadrature grid as NKxNPHI.
        #[arg(long, default_value = "1024x1024")]
        grid: String,
        /// Emit surface samples `k,phi,x,y,z` on an NKxNPHI grid instead.
        #[arg(long)]
        surface_grid: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Zero modes of the open-chain Majorana matrix.
    Zeromodes {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, default_value_t = 200)]
        sites: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD)]
        threshold: f64,
        /// Emit the full spectrum as `index,eigenvalue`.
        #[arg(long, conflicts_with = "profile")]
        eigenvalues: bool,
        /// Emit the summed zero-mode probability as `basis_index,|amplitude|^2`.
        #[arg(long)]
        profile: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Majorana charge of the zero modes.
    Charge {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, default_value_t = 200)]
        sites: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD)]
        threshold: f64,
        /// Projector depth at each end, replacing N/2.
        #[arg(long)]
        edge_depth: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Winding number, zero-mode count and charge for the built-in rows a-i.
    Table1 {
        /// Chain lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "200,500")]
        sizes: Vec<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Phase diagram of the Gaussian toy model.
    Sweep {
        #[arg(long, allow_hyphen_values = true, default_value = "-0.5,2.5")]
        x_range: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-0.5,2.5")]
        y_range: String,
        #[arg(long, default_value_t = 101)]
        nx: usize,
        #[arg(long, default_value_t = 101)]
        ny: usize,
        /// Number of Gaussian channels.
        #[arg(long, default_value_t = 5)]
        range: usize,
        #[arg(long, default_value_t = 200)]
        sites: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD)]
        threshold: f64,
        /// Where to write the JSON sidecar; defaults to `<output>.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct CouplingArgs {
    /// J^x_n for n = 1..R, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    jx: Option<Vec<f64>>,
    /// J^y_n for n = 1..R, comma separated; zeros when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    jy: Option<Vec<f64>>,
    /// Transverse field.
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    /// JSON file `{"R": .., "jx": [..], "jy": [..], "g": ..}`.
    #[arg(long)]
    coupling: Option<PathBuf>,
    /// Built-in row a..i.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Analytic,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    AsWritten,
    ThetaFlipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtensionArg {
    UnitSphere,
    Radial,
}

/// Fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: RunCommand,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunCommand {
    Spectrum { coupling: CouplingSet, k: Option<f64>, grid_size: usize },
    Loop { coupling: CouplingSet, grid_size: usize },
    Winding { coupling: CouplingSet, grid_size: usize, gap_tolerance: f64 },
    Chern {
        coupling: CouplingSet,
        method: ChernMethod,
        convention: SignConvention,
        extension: ExtensionKind,
        grid: (usize, usize),
        surface_grid: Option<(usize, usize)>,
    },
    Zeromodes { coupling: CouplingSet, sites: usize, threshold: f64, listing: Listing },
    Charge { coupling: CouplingSet, sites: usize, threshold: f64, edge_depth: Option<usize> },
    Table1 { sizes: Vec<usize> },
    Sweep { spec: SweepSpec, sidecar: Option<PathBuf> },
}

impl RunCommand {
    pub fn name(&self) -> &'static str {
        match self {
            RunCommand::Spectrum { .. } => "spectrum",
            RunCommand::Loop { .. } => "loop",
            RunCommand::Winding { .. } => "winding",
            RunCommand::Chern { .. } => "chern",
            RunCommand::Zeromodes { .. } => "zeromodes",
            RunCommand::Charge { .. } => "charge",
            RunCommand::Table1 { .. } => "table1",
            RunCommand::Sweep { .. } => "sweep",
        }
    }
}

/// What `zeromodes` prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Listing {
    Summary,
    Eigenvalues,
    Profile,
}

/// Failure while parsing arguments; `help` covers `--help` and `--version`.
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    pub help: bool,
}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError { message: message.into(), help: false }
}

fn resolve_coupling(args: &CouplingArgs) -> Result<CouplingSet, UsageError> {
    let inline = args.jx.is_some() || args.jy.is_some() || args.g.is_some();
    let sources = [inline, args.coupling.is_some(), args.preset.is_some()];
    match sources.iter().filter(|s| **s).count() {
        0 => return Err(usage("no coupling given: use --jx/--jy/--g, --coupling or --preset")),
        1 => {}
        _ => return Err(usage("conflicting coupling sources: use only one of --jx/--jy/--g, --coupling, --preset")),
    }
    if let Some(path) = &args.coupling {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("--coupling {}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| usage(format!("--coupling {}: {e}", path.display())));
    }
    if let Some(name) = &args.preset {
        return preset(name).ok_or_else(|| usage(format!("--preset: unknown row '{name}', expected a..i")));
    }
    let jx = args.jx.clone().ok_or_else(|| usage("--jx is required with inline couplings"))?;
    let jy = args.jy.clone().unwrap_or_else(|| vec![0.0; jx.len()]);
    if jy.len() != jx.len() {
        return Err(usage(format!("--jy has {} entries but --jx has {}", jy.len(), jx.len())));
    }
    CouplingSet::new(jx, jy, args.g.unwrap_or(0.0)).map_err(|e| usage(format!("--jx/--jy/--g: {e}")))
}

fn parse_grid(flag: &str, text: &str) -> Result<(usize, usize), UsageError> {
    let bad = || usage(format!("{flag}: expected NKxNPHI with positive integers, got '{text}'"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_range(flag: &str, text: &str) -> Result<(f64, f64), UsageError> {
    let bad = || usage(format!("{flag}: expected MIN,MAX with MIN < MAX, got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn check_grid_size(c: &CouplingSet, grid_size: usize) -> Result<(), UsageError> {
    if grid_size < 4 * c.range() {
        return Err(usage(format!("--grid-size must be at least 4*R = {}", 4 * c.range())));
    }
    Ok(())
}

fn check_sites(c: &CouplingSet, sites: usize) -> Result<(), UsageError> {
    if sites <= c.range() {
        return Err(usage(format!("--sites must exceed R = {}", c.range())));
    }
    Ok(())
}

fn check_threshold(threshold: f64) -> Result<(), UsageError> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(usage("--threshold must be positive"));
    }
    Ok(())
}

/// Parse and validate a full argument vector (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
        UsageError { message: e.render().to_string(), help }
    })?;

    let (command, out, default_format) = match cli.command {
        Command::Spectrum { coupling, k, grid_size, out } => {
            let coupling = resolve_coupling(&coupling)?;
            check_grid_size(&coupling, grid_size)?;
            if let Some(k) = k {
                if !k.is_finite() {
                    return Err(usage("--k must be finite"));
                }
            }
            let fmt = if k.is_some() { Format::Json } else { Format::Csv };
            (RunCommand::Spectrum { coupling, k, grid_size }, out, fmt)
        }
        Command::Loop { coupling, grid_size, out } => {
            let coupling = resolve_coupling(&coupling)?;
            check_grid_size(&coupling, grid_size)?;
            (RunCommand::Loop { coupling, grid_size }, out, Format::Csv)
        }
        Command::Winding { coupling, grid_size, gap_tolerance, out } => {
            let coupling = resolve_coupling(&coupling)?;
            check_grid_size(&coupling, grid_size)?;
            if !(gap_tolerance >= 0.0) {
                return Err(usage("--gap-tolerance must be non-negative"));
            }
            (RunCommand::Winding { coupling, grid_size, gap_tolerance }, out, Format::Json)
        }
        Command::Chern { coupling, method, convention, extension, grid, surface_grid, out } => {
            let coupling = resolve_coupling(&coupling)?;
            let grid = parse_grid("--grid", &grid)?;
            let surface_grid = surface_grid.map(|s| parse_grid("--surface-grid", &s)).transpose()?;
            let fmt = if surface_grid.is_some() { Format::Csv } else { Format::Json };
            let command = RunCommand::Chern {
                coupling,
                method: match method {
                    MethodArg::Analytic => ChernMethod::AnalyticBoundary,
                    MethodArg::Quadrature => ChernMethod::Quadrature2D,
                },
                convention: match convention {
                    ConventionArg::AsWritten => SignConvention::AsWritten,
                    ConventionArg::ThetaFlipped => SignConvention::ThetaFlipped,
                },
                extension: match extension {
                    ExtensionArg::UnitSphere => ExtensionKind::UnitSphereAngle,
                    ExtensionArg::Radial => ExtensionKind::RadialScaled,
                },
                grid,
                surface_grid,
            };
            (command, out, fmt)
        }
        Command::Zeromodes { coupling, sites, threshold, eigenvalues, profile, out } => {
            let coupling = resolve_coupling(&coupling)?;
            check_sites(&coupling, sites)?;
            check_threshold(threshold)?;
            let listing = match (eigenvalues, profile) {
                (true, _) => Listing::Eigenvalues,
                (_, true) => Listing::Profile,
                _ => Listing::Summary,
            };
            let fmt = if listing == Listing::Summary { Format::Json } else { Format::Csv };
            (RunCommand::Zeromodes { coupling, sites, threshold, listing }, out, fmt)
        }
        Command::Charge { coupling, sites, threshold, edge_depth, out } => {
            let coupling = resolve_coupling(&coupling)?;
            check_sites(&coupling, sites)?;
            check_threshold(threshold)?;
            if let Some(d) = edge_depth {
                if d == 0 || 2 * d > sites {
                    return Err(usage(format!("--edge-depth must be in 1..={}", sites / 2)));
                }
            }
            (RunCommand::Charge { coupling, sites, threshold, edge_depth }, out, Format::Json)
        }
        Command::Table1 { sizes, out } => {
            if sizes.is_empty() || sizes.iter().any(|&n| n <= 5) {
                return Err(usage("--sizes: every chain length must exceed 5"));
            }
            (RunCommand::Table1 { sizes }, out, Format::Csv)
        }
        Command::Sweep { x_range, y_range, nx, ny, range, sites, grid_size, threshold, sidecar, out } => {
            let spec = SweepSpec {
                x_range: parse_range("--x-range", &x_range)?,
                y_range: parse_range("--y-range", &y_range)?,
                nx,
                ny,
                range,
                n_sites: sites,
                grid_size,
                threshold,
            };
            if nx < 2 || ny < 2 {
                return Err(usage("--nx and --ny must be at least 2"));
            }
            if range == 0 {
                return Err(usage("--range must be at least 1"));
            }
            if sites <= range {
                return Err(usage("--sites must exceed --range"));
            }
            if grid_size < 4 * range {
                return Err(usage("--grid-size must be at least 4 * --range"));
            }
            check_threshold(threshold)?;
            (RunCommand::Sweep { spec, sidecar }, out, Format::Csv)
        }
    };
    Ok(RunConfig {
        command,
        output: out.output,
        format: out.format.unwrap_or(default_format),
    })
}

fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string(&round_json(v)).expect("JSON values serialize");
    s.push('\n');
    s
}

fn single_row_csv(header: &str, fields: &[String]) -> String {
    format!("{header}\n{}\n", fields.join(","))
}

/// Text produced by a run plus any extra files it wants written.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub extra: Vec<(PathBuf, String)>,
}

/// Run the computation and render it in the configured format.
pub fn execute(config: &RunConfig) -> Result<Rendered, Error> {
    let fmt = config.format;
    let mut extra = Vec::new();
    let body = match &config.command {
        RunCommand::Spectrum { coupling, k, grid_size } => {
            let samples: Vec<_> = match k {
                Some(k) => vec![dispersion(coupling, *k)],
                None => sample_loop(coupling, *grid_size)?
                    .samples()
                    .iter()
                    .map(|s| dispersion(coupling, s.k))
                    .collect(),
            };
            match fmt {
                Format::Csv => {
                    let mut out = String::from("k,epsilon,theta,gapless\n");
                    for s in &samples {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt_f64(s.k),
                            fmt_f64(s.epsilon),
                            fmt_f64(s.theta),
                            s.gapless
                        ));
                    }
                    out
                }
                Format::Json => {
                    let (g_plus, g_minus) = critical_fields(coupling);
                    let samples = if samples.len() == 1 { json!(samples[0]) } else { json!(samples) };
                    json_text(json!({"g_plus": g_plus, "g_minus": g_minus, "samples": samples}))
                }
            }
        }
        RunCommand::Loop { coupling, grid_size } => {
            let curve = sample_loop(coupling, *grid_size)?;
            match fmt {
                Format::Csv => curve.to_csv(),
                Format::Json => {
                    let samples: Vec<_> = curve.samples().iter().map(|s| json!([s.k, s.x, s.y])).collect();
                    json_text(json!({"grid_size": curve.grid_size(), "r_min": curve.r_min(), "samples": samples}))
                }
            }
        }
        RunCommand::Winding { coupling, grid_size, gap_tolerance } => {
            let curve = sample_loop(coupling, *grid_size)?;
            match winding_number_with_tolerance(&curve, *gap_tolerance) {
                Ok(w) => match fmt {
                    Format::Json => json_text(json!(w)),
                    Format::Csv => single_row_csv("n,raw,gap", &[w.n.to_string(), fmt_f64(w.raw), fmt_f64(w.gap)]),
                },
                // criticality is a result, not a failure
                Err(Error::LoopThroughOrigin { r_min }) => match fmt {
                    Format::Json => json_text(json!({"n": null, "raw": null, "gap": r_min, "flag": "critical"})),
                    Format::Csv => single_row_csv("n,raw,gap,flag", &["".into(), "".into(), fmt_f64(r_min), "critical".into()]),
                },
                Err(e) => return Err(e),
            }
        }
        RunCommand::Chern { coupling, method, convention, extension, grid, surface_grid } => {
            let field = BerryField::new(coupling.clone(), *extension, *convention);
            if let Some((nk, nphi)) = surface_grid {
                let rows = surface_samples(&field, *nk, *nphi);
                match fmt {
                    Format::Csv => {
                        let mut out = String::from("k,phi,x,y,z\n");
                        for r in rows {
                            let f: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
                            out.push_str(&f.join(","));
                            out.push('\n');
                        }
                        out
                    }
                    Format::Json => json_text(json!(rows)),
                }
            } else {
                match chern_number(&field, *method, *grid) {
                    Ok(r) => match fmt {
                        Format::Json => json_text(json!(r)),
                        Format::Csv => single_row_csv(
                            "c,raw,method",
                            &[r.c.to_string(), fmt_f64(r.raw), json!(r.method).as_str().unwrap_or("").to_string()],
                        ),
                    },
                    Err(Error::ChernAtCriticality { r_min }) => match fmt {
                        Format::Json => json_text(json!({"c": null, "raw": null, "method": method, "gap": r_min, "flag": "critical"})),
                        Format::Csv => single_row_csv("c,raw,method,flag", &["".into(), "".into(), json!(method).as_str().unwrap_or("").to_string(), "critical".into()]),
                    },
                    Err(e) => return Err(e),
                }
            }
        }
        RunCommand::Zeromodes { coupling, sites, threshold, listing } => {
            let (spectrum, zms) = analyze(coupling, *sites, *threshold, None)?;
            match (listing, fmt) {
                (Listing::Eigenvalues, Format::Csv) => eigenvalues_csv(spectrum.values()),
                (Listing::Eigenvalues, Format::Json) => json_text(json!(spectrum.values())),
                (Listing::Profile, Format::Csv) => zms.profile_csv(),
                (Listing::Profile, Format::Json) => json_text(json!(zms.profile())),
                (Listing::Summary, _) => {
                    let zero: Vec<f64> = zms.modes.iter().map(|m| m.eigenvalue).collect();
                    match fmt {
                        Format::Json => json_text(json!({
                            "N": sites, "threshold": threshold, "n_zero": zms.n_zero, "eigenvalues": zero,
                        })),
                        Format::Csv => single_row_csv(
                            "N,threshold,n_zero",
                            &[sites.to_string(), fmt_f64(*threshold), zms.n_zero.to_string()],
                        ),
                    }
                }
            }
        }
        RunCommand::Charge { coupling, sites, threshold, edge_depth } => {
            let (_, zms) = analyze(coupling, *sites, *threshold, None)?;
            let q = majorana_charge(&zms, *sites, *edge_depth)?;
            match fmt {
                Format::Json => json_text(json!({
                    "N": sites, "threshold": threshold, "n_zero": zms.n_zero, "charge": q, "edge_depth": edge_depth,
                })),
                Format::Csv => single_row_csv(
                    "N,n_zero,charge",
                    &[sites.to_string(), zms.n_zero.to_string(), fmt_f64(q)],
                ),
            }
        }
        RunCommand::Table1 { sizes } => {
            let rows = table1_report(sizes)?;
            match fmt {
                Format::Csv => table1_csv(&rows),
                Format::Json => json_text(json!(rows)),
            }
        }
        RunCommand::Sweep { spec, sidecar } => {
            let grid = sweep(spec)?;
            let side = json_text(grid.sidecar_json());
            let side_path = sidecar.clone().or_else(|| config.output.as_ref().map(|p| sidecar_path(p)));
            if let Some(p) = side_path {
                extra.push((p, side));
            }
            match fmt {
                Format::Csv => grid.to_csv(),
                Format::Json => json_text(json!({"spec": spec, "cells": grid.cells})),
            }
        }
    };
    Ok(Rendered { body, extra })
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write the rendered output; returns the number of body bytes written.
pub fn emit(rendered: &Rendered, config: &RunConfig) -> std::io::Result<usize> {
    use std::io::Write;
    match &config.output {
        Some(path) => fs::write(path, &rendered.body)?,
        None => std::io::stdout().lock().write_all(rendered.body.as_bytes())?,
    }
    for (path, text) in &rendered.extra {
        fs::write(path, text)?;
    }
    Ok(rendered.body.len())
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) if e.help => {
            print!("{}", e.message);
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("error: {}", e.message.trim_start_matches("error: ").trim_end());
            return EXIT_USAGE;
        }
    };
    configure_threads();
    let rendered = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} failed: {e}", config.command.name());
            return EXIT_NUMERICAL;
        }
    };
    match emit(&rendered, &config) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, UsageError> {
        parse_args(std::iter::once("ising-topo").chain(args.split_whitespace()))
    }

    #[test]
    fn inline_winding() {
        let c = parse("winding --jx 1 --jy 0 --g 0").unwrap();
        assert_eq!(c.format, Format::Json);
        match c.command {
            RunCommand::Winding { coupling, grid_size, .. } => {
                assert_eq!(coupling.range(), 1);
                assert_eq!(coupling.jx(), &[1.0]);
                assert_eq!(grid_size, DEFAULT_GRID_SIZE);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table1_sizes() {
        let c = parse("table1 --sizes 200,500").unwrap();
        assert_eq!(c.command, RunCommand::Table1 { sizes: vec![200, 500] });
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn negative_inline_values() {
        let c = parse("spectrum --jx 0.8,0.5 --jy -0.2,0.5 --g -0.1 --k -1.5").unwrap();
        match c.command {
            RunCommand::Spectrum { coupling, k, .. } => {
                assert_eq!(coupling.jy(), &[-0.2, 0.5]);
                assert_eq!(coupling.g(), -0.1);
                assert_eq!(k, Some(-1.5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let e = parse("winding").unwrap_err();
        assert!(e.message.contains("--jx"));
        let e = parse("winding --jx 1 --preset a").unwrap_err();
        assert!(e.message.contains("conflicting"));
        let e = parse("charge --preset i --sites 5").unwrap_err();
        assert!(e.message.contains("--sites"));
        let e = parse("chern --preset a --grid 10y3").unwrap_err();
        assert!(e.message.contains("--grid"));
        let e = parse("winding --preset a --bogus 3").unwrap_err();
        assert!(e.message.contains("--bogus"));
        assert!(!e.help);
        let e = parse("charge --preset a --sites 10 --edge-depth 6").unwrap_err();
        assert!(e.message.contains("--edge-depth"));
        let e = parse("winding --preset z").unwrap_err();
        assert!(e.message.contains("--preset"));
        let e = parse("sweep --x-range 2,1").unwrap_err();
        assert!(e.message.contains("--x-range"));
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(parse("--help").unwrap_err().help);
        assert!(parse("chern --help").unwrap_err().help);
    }

    #[test]
    fn chern_options() {
        let c = parse("chern --preset d --method quadrature --convention as-written --grid 64x32").unwrap();
        match c.command {
            RunCommand::Chern { method, convention, grid, .. } => {
                assert_eq!(method, ChernMethod::Quadrature2D);
                assert_eq!(convention, SignConvention::AsWritten);
                assert_eq!(grid, (64, 32));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_defaults() {
        let c = parse("sweep").unwrap();
        match c.command {
            RunCommand::Sweep { spec, sidecar } => {
                assert_eq!(spec, SweepSpec::default());
                assert_eq!(sidecar, None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn winding_output_shape() {
        let c = parse("winding --preset a").unwrap();
        let r = execute(&c).unwrap();
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["n"], -2);
        assert!(v["raw"].as_f64().is_some());
        assert!(v["gap"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn critical_winding_is_flagged_not_failed() {
        let c = parse("winding --jx 1 --g 1").unwrap();
        let r = execute(&c).unwrap();
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["flag"], "critical");
        assert!(v["n"].is_null());
    }

    #[test]
    fn sidecar_path_appends_json() {
        assert_eq!(sidecar_path(Path::new("out/map.csv")), PathBuf::from("out/map.csv.json"));
    }
}
