//! Command-line surface: reproducible runs of the generator, entropy,
//! construction, gambling, and verification pipelines.
//!
//! Subcommands:
//!
//! - `entropy`: block-entropy profiles per ℓ and the dimension estimate.
//! - `construct`: build a distribution-matched gambler spec from a prefix.
//! - `gamble`: run a gambler spec over a stream, report capital drift.
//! - `verify`: run one randomized/exhaustive check suite.
//! - `equiv`: compare block-aligned and sliding estimates on one stream.
//!
//! Every command is deterministic given its flags (seeds included). Exit
//! codes: 0 on success, 1 when a verification suite fails, 2 on usage or
//! input errors. When `--out` is given, a `<out>.manifest.json` (or
//! `manifest.json` in an output directory) records the full command line,
//! parameters, input hashes, library version, and timestamp; CSV outputs
//! start with a `# manifest:` comment naming it. The `GALELAB_THREADS`
//! environment variable caps internal parallelism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::alphabet::Alphabet;
use crate::construct::{self, SmoothingPolicy};
use crate::dimension::{self, MAX_BLOCK_LEN};
use crate::entropy::{self, BlockMode, DimensionEstimate, EntropyReport, Schedule};
use crate::gambler::GamblerSpec;
use crate::rat::{self, Rational};
use crate::seqgen::{GeneratorConfig, StreamSource};
use crate::verify::{self, Suite};

#[derive(Debug, Parser)]
#[command(
    name = "galelab",
    version,
    about = "Finite-state gamblers, product gales, and block-entropy dimension estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Block-entropy profiles and the dimension estimate for a stream
    Entropy(EntropyArgs),
    /// Build a distribution-matched gambler spec from a stream prefix
    Construct(ConstructArgs),
    /// Run a gambler spec over a stream and report capital drift
    Gamble(GambleArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Compare block-aligned and sliding estimates on one stream
    Equiv(EquivArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Inline generator: periodic:PATTERN, champernowne:BASE,
    /// bernoulli:BIAS[:seedN], or thue_morse
    #[arg(long, value_name = "KIND:PARAMS", conflicts_with = "file")]
    gen: Option<String>,
    /// File of glyphs, one byte per symbol
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
    /// Alphabet glyphs for --file input
    #[arg(long, default_value = "01", value_name = "GLYPHS")]
    alphabet: String,
    /// Skip ASCII whitespace in --file input
    #[arg(long)]
    skip_whitespace: bool,
}

impl InputArgs {
    fn resolve(&self) -> Result<GeneratorConfig, String> {
        match (&self.gen, &self.file) {
            (Some(spec), None) => {
                GeneratorConfig::parse(spec).map_err(|e| format!("--gen {spec}: {e}"))
            }
            (None, Some(path)) => {
                let alphabet = Alphabet::from_glyph_str(&self.alphabet)
                    .map_err(|e| format!("--alphabet {}: {e}", self.alphabet))?;
                Ok(GeneratorConfig::File {
                    path: path.clone(),
                    alphabet,
                    skip_whitespace: self.skip_whitespace,
                })
            }
            (None, None) => Err("one of --gen or --file is required".to_string()),
            (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
        }
    }
}

fn parse_mode(s: &str) -> Result<BlockMode, String> {
    BlockMode::from_str(s).map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rat::parse(s).map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::from_str(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Window mode: disjoint or sliding
    #[arg(long, default_value = "disjoint", value_parser = parse_mode)]
    mode: BlockMode,
    /// Largest block length
    #[arg(long, default_value_t = 6)]
    lmax: usize,
    /// Symbols to read
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Approximate checkpoint count (geometric schedule)
    #[arg(long)]
    checkpoints: Option<u64>,
    /// Output directory for per-ℓ CSVs and estimate.json
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Block length of the distribution and gambler
    #[arg(long)]
    l: usize,
    /// Window mode: disjoint or sliding
    #[arg(long, default_value = "disjoint", value_parser = parse_mode)]
    mode: BlockMode,
    /// Prefix length to extract the distribution from
    #[arg(long, default_value_t = 65_536)]
    n: u64,
    /// Smoothing floor (a rational; 0 disables smoothing)
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    floor: Option<Rational>,
    /// Output path for the gambler spec JSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GambleArgs {
    /// Gambler spec JSON
    spec: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Gale exponent s (a rational)
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    s: Rational,
    /// Symbols to read
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Number of evenly spaced trajectory checkpoints
    #[arg(long, default_value_t = 256)]
    checkpoints: u64,
    /// Drift threshold for the verdict, bits per symbol
    #[arg(long, default_value_t = dimension::DEFAULT_SLOPE_THRESHOLD)]
    slope_threshold: f64,
    /// Output path for the trajectory CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite: gale, root, kraft, cover, or construct
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gambler spec JSON checked in place of random instances (gale suite);
    /// parsed without row validation so broken fixtures reach the checks
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquivArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest block length
    #[arg(long, default_value_t = 6)]
    lmax: usize,
    /// Symbols to read
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Output path for the per-ℓ CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    parameters: BTreeMap<String, String>,
    input_hashes: BTreeMap<String, String>,
    generator: serde_json::Value,
    version: String,
    timestamp: String,
    outputs: Vec<String>,
}

impl RunManifest {
    fn new(parameters: BTreeMap<String, String>, source: Option<&GeneratorConfig>) -> Self {
        let command: Vec<String> = std::env::args().collect();
        let mut input_hashes = BTreeMap::new();
        if let Some(GeneratorConfig::File { path, .. }) = source {
            if let Ok(bytes) = fs::read(path) {
                input_hashes.insert(path.display().to_string(), sha256_hex(&bytes));
            }
        }
        RunManifest {
            command: command.join(" "),
            parameters,
            input_hashes,
            generator: source.map(|s| s.metadata()).unwrap_or(serde_json::Value::Null),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    fn write(mut self, path: &Path, outputs: &[&Path]) -> Result<(), String> {
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn init_threads() {
    if let Ok(text) = std::env::var("GALELAB_THREADS") {
        if let Ok(threads) = text.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

/// Parses `std::env::args`, dispatches, and maps errors to exit codes.
pub fn run() -> ExitCode {
    init_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    let outcome = match cli.command {
        Command::Entropy(args) => cmd_entropy(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Gamble(args) => cmd_gamble(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Equiv(args) => cmd_equiv(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn check_lmax(lmax: usize) -> Result<(), String> {
    if lmax == 0 || lmax > MAX_BLOCK_LEN {
        return Err(format!("--lmax {lmax} must be between 1 and {MAX_BLOCK_LEN}"));
    }
    Ok(())
}

fn schedule_for(n: u64, checkpoints: Option<u64>) -> Result<Schedule, String> {
    match checkpoints {
        None => Ok(Schedule::default_for(n)),
        Some(0) => Err("--checkpoints must be at least 1".to_string()),
        Some(c) => {
            // Geometric schedule hitting roughly c points between n/100 and n.
            let first = (n / 100).max(16).min(n.max(1));
            let ratio = (100f64).powf(1.0 / c as f64).max(1.0 + 1e-9);
            Ok(Schedule::geometric(first, ratio))
        }
    }
}

fn cmd_entropy(args: EntropyArgs) -> Result<ExitCode, String> {
    check_lmax(args.lmax)?;
    let source = args.input.resolve()?;
    let schedule = schedule_for(args.n, args.checkpoints)?;
    let reports: Result<Vec<EntropyReport>, _> = (1..=args.lmax)
        .into_par_iter()
        .map(|l| entropy::entropy_profile(&source, l, args.mode, args.n, schedule))
        .collect();
    let reports = reports.map_err(|e| e.to_string())?;
    let estimate = DimensionEstimate {
        mode: args.mode,
        n_used: reports.iter().map(|r| r.n_used).max().unwrap_or(0),
        per_block_len: reports.iter().map(|r| (r.block_len, r.running_min)).collect(),
        estimate: reports.iter().map(|r| r.running_min).fold(f64::INFINITY, f64::min),
    };
    let estimate_json = serde_json::to_string_pretty(&estimate).expect("estimate serializes");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
        let manifest_path = dir.join("manifest.json");
        let mut outputs: Vec<PathBuf> = Vec::new();
        for report in &reports {
            let path = dir.join(format!("entropy_l{}.csv", report.block_len));
            let mut text = format!("# manifest: {}\n", manifest_path.display());
            text.push_str("prefix_len,h_value\n");
            for &(len, h) in &report.checkpoints {
                text.push_str(&format!("{len},{h:.9}\n"));
            }
            fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
            outputs.push(path);
        }
        let estimate_path = dir.join("estimate.json");
        fs::write(&estimate_path, &estimate_json)
            .map_err(|e| format!("writing {}: {e}", estimate_path.display()))?;
        outputs.push(estimate_path);
        let manifest = RunManifest::new(
            BTreeMap::from([
                ("mode".to_string(), args.mode.to_string()),
                ("lmax".to_string(), args.lmax.to_string()),
                ("n".to_string(), args.n.to_string()),
            ]),
            Some(&source),
        );
        let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
        manifest.write(&manifest_path, &refs)?;
    }
    println!("{estimate_json}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_construct(args: ConstructArgs) -> Result<ExitCode, String> {
    if args.l == 0 || args.l > MAX_BLOCK_LEN {
        return Err(format!("--l {} must be between 1 and {MAX_BLOCK_LEN}", args.l));
    }
    let source = args.input.resolve()?;
    let stream = source.open().map_err(|e| e.to_string())?;
    let x = stream.take_word(args.n).map_err(|e| e.to_string())?;
    let raw = construct::empirical_block_distribution(&x, args.l, args.mode)
        .map_err(|e| e.to_string())?;

    let smoothed = match &args.floor {
        Some(floor) if floor.is_zero() => raw,
        provided => {
            let policy = match provided {
                Some(floor) => SmoothingPolicy::new(floor.clone(), rat::ratio(1, 100))
                    .map_err(|e| format!("--floor: {e}"))?,
                None => SmoothingPolicy::default_for(x.alphabet().sigma(), args.l),
            };
            construct::rationalize_distribution(&raw, &policy).map_err(|e| e.to_string())?
        }
    };

    let spec = match args.mode {
        BlockMode::Disjoint => construct::build_disjoint_gambler(&smoothed),
        BlockMode::Sliding => construct::build_sliding_gambler(&smoothed),
    }
    .map_err(|e| match &args.floor {
        Some(f) if f.is_zero() => format!("--floor 0 disables smoothing: {e}"),
        _ => e.to_string(),
    })?;
    let spec_json = spec.to_json();

    if let Some(path) = &args.out {
        fs::write(path, &spec_json).map_err(|e| format!("writing {}: {e}", path.display()))?;
        let manifest_path = sidecar(path);
        let manifest = RunManifest::new(
            BTreeMap::from([
                ("l".to_string(), args.l.to_string()),
                ("mode".to_string(), args.mode.to_string()),
                ("n".to_string(), args.n.to_string()),
                (
                    "floor".to_string(),
                    args.floor.as_ref().map(rat::format).unwrap_or("default".to_string()),
                ),
            ]),
            Some(&source),
        );
        manifest.write(&manifest_path, &[path])?;
        eprintln!("wrote {}", path.display());
    } else {
        println!("{spec_json}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gamble(args: GambleArgs) -> Result<ExitCode, String> {
    if args.s.is_negative() {
        return Err(format!("--s must be nonnegative, got {}", rat::format(&args.s)));
    }
    if args.checkpoints < 10 {
        return Err("--checkpoints must be at least 10 for a drift verdict".to_string());
    }
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| format!("reading {}: {e}", args.spec.display()))?;
    let spec =
        GamblerSpec::from_json(&text).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let source = args.input.resolve()?;
    let stream = source.open().map_err(|e| e.to_string())?;

    let mut marks: Vec<u64> =
        (0..=args.checkpoints).map(|i| args.n / args.checkpoints * i).collect();
    marks.dedup();
    let traj = spec.run_stream(&args.s, stream, args.n, &marks).map_err(|e| e.to_string())?;
    let report =
        dimension::success_diagnostic(&traj, args.slope_threshold).map_err(|e| e.to_string())?;

    if let Some(path) = &args.out {
        let manifest_path = sidecar(path);
        let mut text = format!("# manifest: {}\n", manifest_path.display());
        text.push_str("prefix_len,log2_capital\n");
        for (len, log2) in traj.log2_series() {
            text.push_str(&format!("{len},{log2:.9}\n"));
        }
        fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
        let manifest = RunManifest::new(
            BTreeMap::from([
                ("spec".to_string(), args.spec.display().to_string()),
                ("s".to_string(), rat::format(&args.s)),
                ("n".to_string(), args.n.to_string()),
                ("checkpoints".to_string(), args.checkpoints.to_string()),
                ("slope_threshold".to_string(), args.slope_threshold.to_string()),
            ]),
            Some(&source),
        );
        manifest.write(&manifest_path, &[path])?;
    }
    println!("{}", report.to_json());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let provided = match &args.spec {
        None => None,
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            let spec = GamblerSpec::from_json_unchecked(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Some(spec)
        }
    };
    let report = verify::run_suite(args.suite, args.trials, args.seed, provided);
    println!("{}", report.summary_line());
    for failure in &report.failures {
        println!("  {failure}");
    }
    if report.failure_count > report.failures.len() as u64 {
        println!("  ... and {} more", report.failure_count - report.failures.len() as u64);
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_equiv(args: EquivArgs) -> Result<ExitCode, String> {
    check_lmax(args.lmax)?;
    let source = args.input.resolve()?;
    let report =
        dimension::equivalence_experiment(&source, args.lmax, args.n).map_err(|e| e.to_string())?;

    if let Some(path) = &args.out {
        let manifest_path = sidecar(path);
        let text = format!("# manifest: {}\n{}", manifest_path.display(), report.to_csv());
        fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
        let manifest = RunManifest::new(
            BTreeMap::from([
                ("lmax".to_string(), args.lmax.to_string()),
                ("n".to_string(), args.n.to_string()),
            ]),
            Some(&source),
        );
        manifest.write(&manifest_path, &[path])?;
    }
    println!("{}", report.to_json());
    Ok(ExitCode::SUCCESS)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(args)
    }

    #[test]
    fn gen_and_file_conflict() {
        let err =
            parse(&["galelab", "entropy", "--gen", "thue_morse", "--file", "x.txt"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::ArgumentConflict);
    }

    #[test]
    fn negative_s_is_rejected_after_parse() {
        let cli = parse(&["galelab", "gamble", "spec.json", "--gen", "thue_morse", "--s", "-1/2"])
            .unwrap();
        match cli.command {
            Command::Gamble(args) => {
                assert!(args.s.is_negative());
                let err = cmd_gamble(args).unwrap_err();
                assert!(err.contains("--s"));
            }
            _ => panic!("expected gamble"),
        }
    }

    #[test]
    fn lmax_guard_names_the_flag() {
        let err = check_lmax(20).unwrap_err();
        assert!(err.contains("--lmax 20"));
    }

    #[test]
    fn missing_input_is_an_error() {
        let cli = parse(&["galelab", "entropy"]).unwrap();
        match cli.command {
            Command::Entropy(args) => {
                let err = args.input.resolve().unwrap_err();
                assert!(err.contains("--gen or --file"));
            }
            _ => panic!("expected entropy"),
        }
    }

    #[test]
    fn manifest_sidecar_appends_suffix() {
        assert_eq!(sidecar(Path::new("out/traj.csv")), Path::new("out/traj.csv.manifest.json"));
    }

    #[test]
    fn schedules_cover_requested_density() {
        let schedule = schedule_for(10_000, Some(25)).unwrap();
        let points = schedule.points(10_000);
        assert!(points.len() >= 20, "{points:?}");
        assert_eq!(*points.last().unwrap(), 10_000);
        assert!(schedule_for(100, Some(0)).is_err());
    }
}
