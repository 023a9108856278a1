use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arboreal::certificate::{to_canonical_json, AnyCertificate};
use arboreal::conditions::{build_exclusion_set, search_condition_r_prime, SearchOutcome};
use arboreal::dynamics::UnicriticalMap;
use arboreal::galois_oracle::oracle_level_2;
use arboreal::irreducibility::certify_iterate;
use arboreal::multitree::{certify_levels, kummer_base_layer};
use arboreal::rat_core::parse_rational;
use arboreal::wreath::LayerVerdict;
use arboreal::{Rational, RunConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(name = "arboreal", version, about = "Certify maximal Kummer layers of iterated Galois groups of x^q + c")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with RunConfig fields; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_level: Option<u32>,
    #[arg(long, global = true)]
    trial_bound: Option<u64>,
    #[arg(long, global = true)]
    rho_budget: Option<u64>,
    #[arg(long, global = true)]
    zassenhaus_degree: Option<usize>,
    #[arg(long, global = true)]
    mod_p_primes: Option<usize>,
}

#[derive(Args)]
struct MapArgs {
    /// Degree, a prime power.
    #[arg(long)]
    q: u64,
    #[arg(long, allow_hyphen_values = true, value_parser = rational)]
    c: Rational,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit of beta: periodic, strictly preperiodic or wandering.
    Classify {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        beta: Rational,
    },
    /// Per-level irreducibility and Condition R search; one certificate file per certified level.
    Certify {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        beta: Rational,
        /// `a..b` (inclusive) or a single level.
        #[arg(long, value_parser = levels, default_value = "1..6")]
        levels: RangeInclusive<u32>,
        /// Directory for certificate files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare the predicted |G_2| with a direct computation (q = 2 only).
    OracleCompare {
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        c: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        beta: Rational,
    },
    /// Recompute every clause of a certificate file.
    Verify { file: PathBuf },
    /// Joint certification over several roots.
    Multitree {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_parser = rational, required = true)]
        roots: Vec<Rational>,
        #[arg(long, value_parser = levels, default_value = "1..6")]
        levels: RangeInclusive<u32>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn levels(text: &str) -> Result<RangeInclusive<u32>, String> {
    let bad = || format!("expected a level or a range a..b, got {text:?}");
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

enum Failure {
    Input(String),
    Hypothesis(String),
    Verify,
}

impl From<arboreal::Error> for Failure {
    fn from(e: arboreal::Error) -> Self {
        if e.is_hypothesis_violation() {
            Failure::Hypothesis(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    config = config.with_env_overrides()?;
    if let Some(v) = args.seed {
        config.rng_seed = v;
    }
    if let Some(v) = args.max_level {
        config.max_level = v;
    }
    if let Some(v) = args.trial_bound {
        config.trial_division_bound = v;
    }
    if let Some(v) = args.rho_budget {
        config.rho_step_budget = v;
    }
    if let Some(v) = args.zassenhaus_degree {
        config.zassenhaus_degree_bound = v;
    }
    if let Some(v) = args.mod_p_primes {
        config.mod_p_prime_count = v;
    }
    config.validate()?;
    Ok(config)
}

fn print_json(value: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(to_canonical_json(value).as_bytes());
}

/// Writes through a temporary sibling and a rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn classify(map: MapArgs, beta: Rational) -> Result<(), Failure> {
    let f = UnicriticalMap::new(map.q, map.c)?;
    let class = f.classify(&beta);
    print_json(&serde_json::to_value(&class.status).expect("status serializes"));
    Ok(())
}

fn certify(
    map: MapArgs,
    roots: &[Rational],
    levels: RangeInclusive<u32>,
    out: &Path,
    config: &RunConfig,
) -> Result<(), Failure> {
    let f = UnicriticalMap::new(map.q, map.c)?;
    let run = certify_levels(&f, roots, levels, config)?;
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for level in run.requested_levels() {
        let Some(joint) = level.joint.certificate() else { continue };
        let text = if roots.len() == 1 {
            to_canonical_json(&joint.per_root[0])
        } else {
            to_canonical_json(joint)
        };
        let path = out.join(format!("level-{}.json", level.level));
        write_atomic(&path, &text)?;
        written.push(Value::String(path.display().to_string()));
    }
    let mut report = serde_json::to_value(&run).expect("report serializes");
    report["certificates"] = Value::Array(written);
    print_json(&report);
    Ok(())
}

fn oracle_compare(q: u64, c: Rational, beta: Rational, config: &RunConfig) -> Result<(), Failure> {
    let f = UnicriticalMap::new(q, c)?;
    let factor_config = config.factor_config();
    let oracle = oracle_level_2(&f, &beta, &factor_config)?;
    let oracle_g2 = oracle.g2_order;
    let prediction: Result<u32, String> = if kummer_base_layer(&f, std::slice::from_ref(&beta)) != LayerVerdict::Maximal {
        Err("no certificate (level-1 reducible)".into())
    } else if !certify_iterate(&f, &beta, 2, config)?.is_irreducible() {
        Err("no certificate (level-2 irreducibility not certified)".into())
    } else {
        match build_exclusion_set(&f, std::slice::from_ref(&beta), &factor_config)
            .and_then(|s| search_condition_r_prime(&f, &beta, 2, &s, &factor_config))
        {
            Ok(SearchOutcome::Found(_)) => Ok(2 * 4),
            Ok(SearchOutcome::NotFound(_)) => Err("no certificate (no Condition R prime at level 2)".into()),
            Err(e) if e.is_hypothesis_violation() => Err(format!("no certificate ({e})")),
            Err(e) => return Err(e.into()),
        }
    };
    let report = match prediction {
        Ok(g2) => {
            let agree = g2 == oracle_g2;
            print_json(&json!({
                "predicted_g2": g2,
                "oracle_g2": oracle_g2,
                "agree": agree,
                "consistency": if agree { "consistent" } else { "inconsistent" },
            }));
            agree
        }
        Err(reason) => {
            print_json(&json!({
                "oracle_g2": oracle_g2,
                "predicted": reason,
                "agree": "n/a",
                "consistency": "no-claim",
            }));
            true
        }
    };
    if report {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn verify(file: &Path, config: &RunConfig) -> Result<(), Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let cert = AnyCertificate::parse(&text)?;
    let report = cert.verify(config);
    print_json(&serde_json::to_value(&report).expect("report serializes"));
    for f in &report.failures {
        let at = if f.location.is_empty() { String::new() } else { format!(" at {}", f.location) };
        eprintln!(
            "clause ({}) fails{at}: recorded {}, recomputed {}",
            f.clause, f.recorded, f.recomputed
        );
    }
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Classify { map, beta } => classify(map, beta),
        Command::Certify { map, beta, levels, out } => certify(map, &[beta], levels, &out, &config),
        Command::OracleCompare { q, c, beta } => oracle_compare(q, c, beta, &config),
        Command::Verify { file } => verify(&file, &config),
        Command::Multitree { map, roots, levels, out } => certify(map, &roots, levels, &out, &config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Hypothesis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_HYPOTHESIS)
        }
    }
}
