//! Command-line adapter. Exit codes: 0 success or verdict true, 1 verdict
//! false, 2 usage or IO error, 3 internal error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::array::Dpda;
use crate::bounds::{compare_to_jcm, BoundsReport, MemoryCase};
use crate::construct::{construct_even, construct_grid, construct_jcm, construct_odd, lift};
use crate::search::{exists_dpda, search_min_s, SearchOptions, SearchResult, DEFAULT_CELLS_LIMIT};
use crate::sim::{simulate, Demand, DemandMode};
use crate::validate::{check_rate_optimal, validate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const CELLS_LIMIT_ENV: &str = "DPDA_CELLS_LIMIT";

#[derive(Debug, Parser)]
#[command(
    name = "dpda",
    version,
    about = "Build, check and exercise D2D placement delivery arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an array from one of the known families.
    Construct(ConstructArgs),
    /// Check conditions C0-C4 (and C2'/C5 with --optimal).
    Validate(ValidateArgs),
    /// Rate and packet-number bounds for a memory case or an array.
    Bounds(BoundsArgs),
    /// Run placement, delivery and decoding on synthetic files.
    Simulate(SimulateArgs),
    /// Exhaustive search for small single-band arrays.
    Search(SearchArgs),
    /// Compare an array's packet number with JCM at the same memory ratio.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Jcm,
    Grid,
    Even,
    Odd,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Family parameter for grid, even and odd.
    #[arg(long)]
    q: Option<usize>,
    /// Number of users for jcm.
    #[arg(long)]
    k: Option<usize>,
    /// KM/N for jcm.
    #[arg(long)]
    t: Option<usize>,
    /// Stack this many shifted copies (L').
    #[arg(long)]
    lift: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Array file in text or JSON format; `-` reads standard input.
    path: PathBuf,
    /// Also require the minimal-rate conditions.
    #[arg(long)]
    optimal: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, requires = "case", conflicts_with = "from")]
    k: Option<usize>,
    /// One of 1/K, 2/K, (K-2)/K, (K-1)/K.
    #[arg(long, requires = "k")]
    case: Option<MemoryCase>,
    /// Evaluate the bounds against an array file.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    path: PathBuf,
    /// Number of files N.
    #[arg(long)]
    files: usize,
    /// Blocks per file L.
    #[arg(long)]
    blocks: usize,
    #[arg(long, default_value_t = 64)]
    packet_size: usize,
    /// Demand literal `d0,d1,...;b0,b1,...`.
    #[arg(long, conflicts_with_all = ["trials", "exhaustive"])]
    demand: Option<String>,
    #[arg(long, requires = "seed", conflicts_with = "exhaustive")]
    trials: Option<usize>,
    #[arg(long, requires = "trials")]
    seed: Option<u64>,
    /// Every demand and start-block vector.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    f: usize,
    #[arg(long)]
    z: usize,
    /// Decide existence for exactly this many slots.
    #[arg(long, conflicts_with = "max_s")]
    s: Option<usize>,
    /// Find the least S up to this value (default (F-Z)·K).
    #[arg(long)]
    max_s: Option<usize>,
    /// Largest F·K the search accepts (also DPDA_CELLS_LIMIT).
    #[arg(long)]
    cells_limit: Option<usize>,
    /// Extend every star pattern, not only sorted representatives.
    #[arg(long)]
    no_pruning: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    path: PathBuf,
    #[arg(long)]
    json: bool,
}

/// A failure that maps to exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<i32, Usage>;

/// Parses `args` (program name first), dispatches, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = catch_unwind(AssertUnwindSafe(|| dispatch(cli.command, out)));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(Usage(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            let _ = writeln!(err, "internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Construct(a) => cmd_construct(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    }
}

fn read_input(path: &Path) -> Result<String, Usage> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Dpda, Usage> {
    Dpda::parse_any(&read_input(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn need(v: Option<usize>, flag: &str, family: &str) -> Result<usize, Usage> {
    v.ok_or_else(|| Usage(format!("--family {family} needs {flag}")))
}

fn cmd_construct(a: ConstructArgs, out: &mut dyn Write) -> Outcome {
    let p = match a.family {
        Family::Jcm => construct_jcm(need(a.k, "--k", "jcm")?, need(a.t, "--t", "jcm")?)?,
        Family::Grid => construct_grid(need(a.q, "--q", "grid")?)?,
        Family::Even => construct_even(need(a.q, "--q", "even")?)?,
        Family::Odd => construct_odd(need(a.q, "--q", "odd")?)?,
    };
    let p = match a.lift {
        Some(lp) => lift(&p, lp)?,
        None => p,
    };
    let text = if a.json {
        p.to_json() + "\n"
    } else {
        p.to_text()
    };
    match a.out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Outcome {
    let p = load(&a.path)?;
    let report = validate(&p);
    let optimal = a.optimal.then(|| check_rate_optimal(&p));
    let mut holds = report.is_valid();
    if let Some(o) = &optimal {
        holds &= o.rate_is_minimal;
    }
    if a.json {
        let mut value = serde_json::to_value(&report)?;
        value["valid"] = serde_json::Value::Bool(report.is_valid());
        if let Some(o) = &optimal {
            value["optimality"] = serde_json::to_value(o)?;
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    } else {
        for (name, v) in report.verdicts() {
            match &v.witness {
                None => writeln!(out, "{name}: pass")?,
                Some(w) => writeln!(out, "{name}: FAIL {}", serde_json::to_string(w)?)?,
            }
        }
        if let Some(o) = &optimal {
            writeln!(out, "C2': {}", pass_fail(o.c2prime))?;
            writeln!(out, "C5: {}", pass_fail(o.c5))?;
            writeln!(out, "rate_identity: {}", pass_fail(o.rate_identity))?;
        }
        writeln!(out, "{}", if holds { "valid" } else { "invalid" })?;
    }
    Ok(if holds { EXIT_OK } else { EXIT_FALSE })
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_bounds(a: BoundsArgs, out: &mut dyn Write) -> Outcome {
    let report = match (a.from, a.k, a.case) {
        (Some(path), _, _) => BoundsReport::for_array(&load(&path)?)?,
        (None, Some(k), Some(case)) => BoundsReport::for_case(k, case)?,
        _ => return Err(Usage("bounds needs --k with --case, or --from".into())),
    };
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_table())?;
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Outcome {
    let p = load(&a.path)?;
    let mode = match (a.demand, a.trials, a.seed, a.exhaustive) {
        (Some(d), _, _, _) => DemandMode::Single(Demand::parse(&d)?),
        (None, Some(trials), Some(seed), _) => DemandMode::Random { trials, seed },
        (None, None, None, true) => DemandMode::Exhaustive,
        _ => {
            return Err(Usage(
                "simulate needs --demand, --trials with --seed, or --exhaustive".into(),
            ))
        }
    };
    let report = simulate(&p, a.files, a.blocks, a.packet_size, &mode)?;
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        writeln!(out, "success: {}", report.success)?;
        writeln!(out, "trials: {}", report.trials)?;
        writeln!(out, "packets_sent: {}", report.packets_sent)?;
        writeln!(out, "rate: {}", report.rate)?;
        writeln!(out, "memory: {}", report.memory)?;
        writeln!(out, "byte_exact: {}", report.byte_exact)?;
        for f in &report.failures {
            writeln!(out, "failure: {} {}", f.demand, f.error)?;
        }
    }
    Ok(if report.success { EXIT_OK } else { EXIT_FALSE })
}

fn cells_limit(flag: Option<usize>) -> Result<usize, Usage> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(CELLS_LIMIT_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Usage(format!("{CELLS_LIMIT_ENV}={v:?} is not a cell count"))),
        Err(_) => Ok(DEFAULT_CELLS_LIMIT),
    }
}

fn cmd_search(a: SearchArgs, out: &mut dyn Write) -> Outcome {
    let opts = SearchOptions {
        cells_limit: cells_limit(a.cells_limit)?,
        symmetry_pruning: !a.no_pruning,
    };
    let result: SearchResult = match a.s {
        Some(s) => exists_dpda(a.k, a.f, a.z, s, &opts)?,
        None => {
            let s_max = a.max_s.unwrap_or(a.f.saturating_sub(a.z) * a.k);
            search_min_s(a.k, a.f, a.z, s_max, &opts)?
        }
    };
    if a.json {
        writeln!(out, "{}", result.to_json())?;
    } else {
        writeln!(out, "feasible: {}", result.feasible)?;
        if let Some(s) = result.minimal_s {
            writeln!(out, "minimal_S: {s}")?;
        }
        writeln!(out, "nodes_explored: {}", result.nodes_explored)?;
        writeln!(out, "exhausted: {}", result.exhausted)?;
        if let Some(w) = &result.witness {
            write!(out, "{}", w.to_text())?;
        }
    }
    Ok(if result.feasible { EXIT_OK } else { EXIT_FALSE })
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> Outcome {
    let cmp = compare_to_jcm(&load(&a.path)?)?;
    if a.json {
        writeln!(out, "{}", cmp.to_json())?;
    } else {
        write!(out, "{}", cmp.to_table())?;
    }
    Ok(EXIT_OK)
}
