//! Command-line front end: exceptional energies, admissible couplings, root
//! systems, the spectral oracle, the consistency suite, and parameter
//! sweeps, with table/CSV/JSON output.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use vibronic_qes::bethe::{constraint_residual, solve_bethe};
use vibronic_qes::model::{exceptional_energy, LevelParams, ModelParams, PhysicalParams};
use vibronic_qes::oracle::{match_exceptional, match_levels, spectrum, OracleConfig};
use vibronic_qes::sl2::allowed_couplings;
use vibronic_qes::verify::{run_suite, VerifyConfig};
use vibronic_qes_cli::report::{
    BetheReport, BetheRow, CheckRow, CouplingRow, CouplingsReport, ExceptionalReport,
    ExceptionalRow, MatchRow, OracleReport, ParamsEcho, Report, SweepReport, SweepRow,
    VerifyReport, SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(
    name = "vibronic-qes",
    version,
    about = "Exceptional spectrum and polynomial eigenfunctions of the two-channel harmonic vibronic model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the exceptional energies over a level range.
    Exceptional(CommonArgs),
    /// Admissible couplings v^2 with kernel polynomials, per level.
    Couplings(CommonArgs),
    /// Solve the root-system equations and list the solutions.
    Bethe(CommonArgs),
    /// Run the cross-module consistency suite; exits nonzero on failure.
    Verify(VerifyArgs),
    /// Diagonalize the coupled system and match exceptional levels.
    Oracle(CommonArgs),
    /// Grid sweep over (F, b): oracle gap per admissible coupling.
    Sweep(SweepArgs),
}

/// Inclusive level range `A..B`, or a single level `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LevelRange {
    lo: usize,
    hi: usize,
}

impl LevelRange {
    fn iter(self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid level '{t}'"))
        };
        if let Some((a, b)) = s.split_once("..") {
            let lo = parse(a)?;
            let hi = parse(b)?;
            if hi < lo {
                return Err(format!("empty level range '{s}'"));
            }
            Ok(LevelRange { lo, hi })
        } else {
            let k = parse(s)?;
            Ok(LevelRange { lo: k, hi: k })
        }
    }
}

/// Grid `MIN:MAX:STEPS`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GridSpec {
    min: f64,
    max: f64,
    steps: usize,
}

impl GridSpec {
    fn values(self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = |t: &str| format!("invalid grid component '{t}'");
        match parts.as_slice() {
            [x] => {
                let v = x.trim().parse::<f64>().map_err(|_| err(x))?;
                Ok(GridSpec {
                    min: v,
                    max: v,
                    steps: 1,
                })
            }
            [a, b, k] => {
                let min = a.trim().parse::<f64>().map_err(|_| err(a))?;
                let max = b.trim().parse::<f64>().map_err(|_| err(b))?;
                let steps = k.trim().parse::<usize>().map_err(|_| err(k))?;
                if steps == 0 {
                    return Err("grid needs at least one step".into());
                }
                Ok(GridSpec { min, max, steps })
            }
            _ => Err(format!("expected MIN:MAX:STEPS, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Dimensionless slope difference F.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    f: Option<f64>,
    /// Dimensionless shift b.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    b: Option<f64>,
    /// Dimensionless coupling v (non-negative).
    #[arg(long, value_name = "X")]
    v: Option<f64>,
    /// Particle mass (physical parameter block).
    #[arg(long, value_name = "X")]
    mass: Option<f64>,
    /// Reduced Planck constant (physical parameter block).
    #[arg(long, value_name = "X")]
    hbar: Option<f64>,
    /// Oscillator angular frequency (physical parameter block).
    #[arg(long, value_name = "X")]
    omega: Option<f64>,
    /// Channel-1 linear slope (physical parameter block).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    f1: Option<f64>,
    /// Channel-2 linear slope (physical parameter block).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    f2: Option<f64>,
    /// Off-diagonal coupling energy V (physical parameter block).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    coupling: Option<f64>,
    /// Level range "A..B" (inclusive) or a single level [default: 0..3].
    #[arg(long, value_name = "A..B")]
    n: Option<LevelRange>,
    /// Oscillator basis size per channel for the oracle [default: 200].
    #[arg(long, value_name = "N")]
    basis: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON configuration file; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Keep branches with negative or complex squared coupling.
    #[arg(long)]
    include_unphysical: bool,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Deliberately perturb one operator so the suite must fail (negative
    /// control).
    #[arg(long)]
    inject_corruption: bool,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Slope-difference grid MIN:MAX:STEPS (or a single value).
    #[arg(
        long = "f-grid",
        value_name = "MIN:MAX:STEPS",
        allow_hyphen_values = true
    )]
    f_grid: GridSpec,
    /// Shift grid MIN:MAX:STEPS (or a single value).
    #[arg(
        long = "b-grid",
        value_name = "MIN:MAX:STEPS",
        allow_hyphen_values = true
    )]
    b_grid: GridSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    schema: Option<u32>,
    #[serde(default)]
    dimensionless: Option<DimBlock>,
    #[serde(default)]
    physical: Option<PhysBlock>,
    #[serde(default)]
    n: Option<String>,
    #[serde(default)]
    basis: Option<usize>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimBlock {
    #[serde(default)]
    f: Option<f64>,
    #[serde(default)]
    b: Option<f64>,
    #[serde(default)]
    v: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysBlock {
    #[serde(default)]
    mass: Option<f64>,
    #[serde(default)]
    hbar: Option<f64>,
    #[serde(default)]
    omega: Option<f64>,
    #[serde(default)]
    f1: Option<f64>,
    #[serde(default)]
    f2: Option<f64>,
    #[serde(default)]
    coupling: Option<f64>,
}

struct Resolved {
    mp: ModelParams,
    physical: PhysicalParams,
    physical_given: bool,
    levels: LevelRange,
    basis: usize,
}

fn load_config(path: &PathBuf) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config file {}", path.display()))?;
    if let Some(s) = cfg.schema {
        if s != SCHEMA_VERSION {
            bail!("unsupported config schema {s} (expected {SCHEMA_VERSION})");
        }
    }
    Ok(cfg)
}

/// Merge config file and flags into one parameter set. Exactly one of the
/// dimensionless and physical blocks may be present; `fallback` supplies
/// defaults for commands that can run without explicit parameters.
fn resolve(args: &CommonArgs, fallback: Option<(f64, f64, f64)>) -> Result<Resolved> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    let dim_given =
        args.f.is_some() || args.b.is_some() || args.v.is_some() || file.dimensionless.is_some();
    let phys_given = args.mass.is_some()
        || args.hbar.is_some()
        || args.omega.is_some()
        || args.f1.is_some()
        || args.f2.is_some()
        || args.coupling.is_some()
        || file.physical.is_some();
    if dim_given && phys_given {
        bail!("exactly one parameter block: give --f/--b/--v or --mass/--hbar/--omega/--f1/--f2/--coupling, not both");
    }
    let levels = match (&args.n, &file.n) {
        (Some(r), _) => *r,
        (None, Some(s)) => LevelRange::from_str(s).map_err(|e| anyhow::anyhow!(e))?,
        (None, None) => LevelRange { lo: 0, hi: 3 },
    };
    let basis = args.basis.or(file.basis).unwrap_or(200);
    if phys_given {
        let blk = file.physical.unwrap_or_default();
        let p = PhysicalParams::new(
            args.mass.or(blk.mass).unwrap_or(1.0),
            args.hbar.or(blk.hbar).unwrap_or(1.0),
            args.omega.or(blk.omega).unwrap_or(1.0),
            args.f1.or(blk.f1).unwrap_or(0.0),
            args.f2.or(blk.f2).unwrap_or(0.0),
            args.coupling.or(blk.coupling).unwrap_or(0.0),
        )?;
        Ok(Resolved {
            mp: p.to_dimensionless()?,
            physical: p,
            physical_given: true,
            levels,
            basis,
        })
    } else if dim_given || fallback.is_some() {
        let blk = file.dimensionless.unwrap_or_default();
        let fb = fallback.unwrap_or((0.0, 0.0, 0.0));
        let mp = ModelParams::new(
            args.f.or(blk.f).unwrap_or(fb.0),
            args.b.or(blk.b).unwrap_or(fb.1),
            args.v.or(blk.v).unwrap_or(fb.2),
        )?;
        Ok(Resolved {
            mp,
            physical: mp.canonical_physical(),
            physical_given: false,
            levels,
            basis,
        })
    } else {
        bail!("no parameters given; set --f/--b/--v (or a physical block, or --config FILE)");
    }
}

fn echo(mp: &ModelParams) -> ParamsEcho {
    ParamsEcho {
        f: mp.slope_diff,
        b: mp.shift,
        v: mp.coupling,
    }
}

fn emit(report: &Report, format: OutputFormat, out: Option<&PathBuf>) -> Result<()> {
    let text = match format {
        OutputFormat::Table => report.to_table(),
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => report.to_json(),
    };
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write output to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_exceptional(args: &CommonArgs) -> Result<Report> {
    let r = resolve(args, None)?;
    let rows = r
        .levels
        .iter()
        .map(|n| {
            let e = exceptional_energy(n, &r.physical);
            ExceptionalRow {
                n,
                epsilon: e.epsilon,
                energy: e.energy,
            }
        })
        .collect();
    Ok(Report::Exceptional(ExceptionalReport {
        schema: SCHEMA_VERSION,
        command: "exceptional".into(),
        params: echo(&r.mp),
        units: if r.physical_given {
            "physical inputs as given".into()
        } else {
            "canonical m = hbar = omega = 1".into()
        },
        rows,
    }))
}

fn cmd_couplings(args: &CommonArgs) -> Result<Report> {
    let r = resolve(args, None)?;
    let mut rows = Vec::new();
    for n in r.levels.iter() {
        let lp = LevelParams::for_level(n, &r.mp);
        for br in allowed_couplings(n, &r.mp)? {
            if !br.physical && !args.include_unphysical {
                continue;
            }
            // verify each kernel before printing
            let residual = br.kernel_residual(&lp, r.mp.slope_diff);
            rows.push(CouplingRow {
                n,
                v_squared_re: br.v_squared.re,
                v_squared_im: br.v_squared.im,
                physical: br.physical,
                degree_deficient: br.degree_deficient,
                multiplicity: br.multiplicity,
                kernel_residual: residual,
                roots: br.roots.iter().map(|z| [z.re, z.im]).collect(),
            });
        }
    }
    Ok(Report::Couplings(CouplingsReport {
        schema: SCHEMA_VERSION,
        command: "couplings".into(),
        params: echo(&r.mp),
        rows,
    }))
}

fn cmd_bethe(args: &CommonArgs) -> Result<Report> {
    let r = resolve(args, None)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for n in r.levels.iter() {
        let lp = LevelParams::for_level(n, &r.mp);
        if n == 0 {
            // empty root set: y1 = 1, restriction reads v^2 = e1 e2 = 0
            rows.push(BetheRow {
                n,
                v_model: r.mp.coupling,
                admissible_v_squared_re: 0.0,
                admissible_v_squared_im: 0.0,
                constraint_residual: constraint_residual(&[], &lp, &r.mp, r.mp.coupling),
                max_residue: 0.0,
                converged: true,
                physical: true,
                roots: Vec::new(),
                y1: vec![1.0],
            });
            continue;
        }
        let out = solve_bethe(n, &lp, &r.mp, None)?;
        for msg in &out.diagnostics.failures {
            notes.push(format!("n = {n}: {msg}"));
        }
        for sol in &out.solutions {
            if !sol.is_physical() && !args.include_unphysical {
                continue;
            }
            rows.push(BetheRow {
                n,
                v_model: sol.v,
                admissible_v_squared_re: sol.admissible_v_squared.re,
                admissible_v_squared_im: sol.admissible_v_squared.im,
                constraint_residual: sol.constraint_residual,
                max_residue: sol.max_residue,
                converged: sol.converged,
                physical: sol.is_physical(),
                roots: sol.roots.iter().map(|z| [z.re, z.im]).collect(),
                y1: sol.y1.coeffs().to_vec(),
            });
        }
    }
    Ok(Report::Bethe(BetheReport {
        schema: SCHEMA_VERSION,
        command: "bethe".into(),
        params: echo(&r.mp),
        rows,
        notes,
    }))
}

fn cmd_oracle(args: &CommonArgs) -> Result<Report> {
    let r = resolve(args, None)?;
    let cfg = OracleConfig::new(r.basis, 1e-7)?;
    let mut rep = spectrum(&r.mp, &cfg)?;
    match_levels(&mut rep, r.levels.iter(), &cfg)?;
    Ok(Report::Oracle(OracleReport {
        schema: SCHEMA_VERSION,
        command: "oracle".into(),
        params: echo(&r.mp),
        basis: r.basis,
        trusted: rep.trusted,
        matches: rep
            .matches
            .iter()
            .map(|m| MatchRow {
                n: m.n,
                target: m.target,
                nearest: m.nearest,
                gap: m.gap,
                matched: m.matched,
            })
            .collect(),
        eigenvalues: rep.eigenvalues[..rep.trusted.min(rep.eigenvalues.len())].to_vec(),
    }))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(Report, bool)> {
    let r = resolve(&args.common, Some((0.9, 0.3, 1.0)))?;
    let cfg = VerifyConfig {
        params: r.mp,
        levels: r.levels.iter().collect(),
        basis_size: r.basis,
        inject_corruption: args.inject_corruption,
    };
    let checks: Vec<CheckRow> = run_suite(&cfg)
        .into_iter()
        .map(|c| CheckRow {
            name: c.name.to_string(),
            passed: c.passed,
            detail: c.detail,
        })
        .collect();
    let all_passed = checks.iter().all(|c| c.passed);
    Ok((
        Report::Verify(VerifyReport {
            schema: SCHEMA_VERSION,
            command: "verify".into(),
            params: echo(&r.mp),
            checks,
            all_passed,
        }),
        all_passed,
    ))
}

fn sweep_point(
    f: f64,
    b: f64,
    levels: LevelRange,
    basis: usize,
    include_unphysical: bool,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    let mp0 = match ModelParams::new(f, b, 0.0) {
        Ok(m) => m,
        Err(e) => {
            return vec![SweepRow {
                f,
                b,
                n: 0,
                v_squared: f64::NAN,
                lambda_gap: None,
                status: e.to_string(),
            }]
        }
    };
    let cfg = match OracleConfig::new(basis, 1e-7) {
        Ok(c) => c,
        Err(e) => {
            return vec![SweepRow {
                f,
                b,
                n: 0,
                v_squared: 0.0,
                lambda_gap: None,
                status: e.to_string(),
            }]
        }
    };
    for n in levels.iter() {
        let branches = match allowed_couplings(n, &mp0) {
            Ok(brs) => brs,
            Err(e) => {
                rows.push(SweepRow {
                    f,
                    b,
                    n,
                    v_squared: 0.0,
                    lambda_gap: None,
                    status: e.to_string(),
                });
                continue;
            }
        };
        for br in branches {
            if !br.physical {
                if include_unphysical {
                    rows.push(SweepRow {
                        f,
                        b,
                        n,
                        v_squared: br.v_squared.re,
                        lambda_gap: None,
                        status: if br.v_squared.im.abs() > 1e-9 {
                            "unphysical-complex".into()
                        } else {
                            "unphysical".into()
                        },
                    });
                }
                continue;
            }
            let v = br.coupling().expect("physical branch");
            let outcome = ModelParams::new(f, b, v)
                .and_then(|mp| spectrum(&mp, &cfg))
                .and_then(|rep| match_exceptional(&rep, n, &cfg));
            match outcome {
                Ok(rec) => rows.push(SweepRow {
                    f,
                    b,
                    n,
                    v_squared: br.v_squared.re,
                    lambda_gap: Some(rec.gap),
                    status: "ok".into(),
                }),
                Err(e) => rows.push(SweepRow {
                    f,
                    b,
                    n,
                    v_squared: br.v_squared.re,
                    lambda_gap: None,
                    status: e.to_string(),
                }),
            }
        }
    }
    rows
}

fn worker_count(tasks: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("VIBRONIC_QES_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(hw);
    cap.min(tasks).max(1)
}

fn cmd_sweep(args: &SweepArgs) -> Result<Report> {
    let common = &args.common;
    let levels = common.n.unwrap_or(LevelRange { lo: 0, hi: 3 });
    let basis = common.basis.unwrap_or(200);
    let points: Vec<(f64, f64)> = args
        .f_grid
        .values()
        .into_iter()
        .flat_map(|f| args.b_grid.values().into_iter().map(move |b| (f, b)))
        .collect();
    let results: Vec<OnceLock<Vec<SweepRow>>> =
        (0..points.len()).map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let workers = worker_count(points.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let (f, b) = points[i];
                let rows = sweep_point(f, b, levels, basis, common.include_unphysical);
                results[i].set(rows).expect("each point is computed once");
            });
        }
    });
    let rows: Vec<SweepRow> = results
        .into_iter()
        .flat_map(|cell| cell.into_inner().expect("all points computed"))
        .collect();
    Ok(Report::Sweep(SweepReport {
        schema: SCHEMA_VERSION,
        command: "sweep".into(),
        rows,
    }))
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Exceptional(args) => cmd_exceptional(args).map(|r| (r, args.clone())),
        Command::Couplings(args) => cmd_couplings(args).map(|r| (r, args.clone())),
        Command::Bethe(args) => cmd_bethe(args).map(|r| (r, args.clone())),
        Command::Oracle(args) => cmd_oracle(args).map(|r| (r, args.clone())),
        Command::Verify(args) => match cmd_verify(args) {
            Ok((report, all_passed)) => {
                if let Err(e) = emit(&report, args.common.format, args.common.out.as_ref()) {
                    eprintln!("error: {e:#}");
                    std::process::exit(1);
                }
                std::process::exit(if all_passed { 0 } else { 1 });
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                std::process::exit(2);
            }
        },
        Command::Sweep(args) => cmd_sweep(args).map(|r| (r, args.common.clone())),
    };
    match outcome {
        Ok((report, args)) => {
            if let Err(e) = emit(&report, args.format, args.out.as_ref()) {
                eprintln!("error: {e:#}");
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
