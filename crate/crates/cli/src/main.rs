mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use udcdma::verify::{
    classify_groups, count_forbidden_pairs, enumerate_b8_plus, min_distance, mitm_report,
    one_element_witness, sampled_report, ud_exhaustive_report, verify_max_append, MitmConfig,
};
use udcdma::{build_code_set, run_ber, BerRecord, CodeSet, DecoderKind, Error, SeedVariant, SimConfig};

use manifest::RunManifest;

pub const CSV_HEADER: [&str; 8] = ["decoder", "L", "K", "ebn0_db", "bits", "errors", "ber", "wall_seconds"];

#[derive(Parser, Debug)]
#[command(name = "udcdma", version, about = "Overloaded uniquely-decodable CDMA code sets")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "UDCDMA_THREADS")]
    threads: Option<usize>,
    /// Also write a run manifest here (`ber` always writes one next to its CSV).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a constructed code set.
    Gen {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_enum, default_value_t = Format::Figure)]
        format: Format,
    },
    /// Check that a code set is uniquely decodable.
    Verify {
        #[command(flatten)]
        set: InputArgs,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Pairs drawn in sampled mode.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hash index budget for mitm mode, in MiB.
        #[arg(long, default_value_t = 1024)]
        mitm_mib: usize,
        #[arg(long)]
        json: bool,
    },
    /// Recount the B8+ append ledger for L = 8.
    AppendixC {
        #[arg(long)]
        json: bool,
    },
    /// Minimum output distance and the first one-element column pair.
    Dmin {
        #[command(flatten)]
        set: InputArgs,
    },
    /// Monte-Carlo BER curve written as CSV.
    Ber(BerArgs),
}

#[derive(Args, Debug)]
struct SetArgs {
    #[arg(long = "l", value_name = "L")]
    l: usize,
    #[arg(long, default_value = "eq14", value_parser = parse_variant)]
    variant: SeedVariant,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long = "l", value_name = "L", required_unless_present = "input")]
    l: Option<usize>,
    #[arg(long, default_value = "eq14", value_parser = parse_variant)]
    variant: SeedVariant,
    /// Read the matrix from a figure-text or CSV file instead of constructing it.
    #[arg(long, conflicts_with = "l")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BerArgs {
    #[arg(long = "l", value_name = "L", required_unless_present = "from_manifest")]
    l: Option<usize>,
    #[arg(long, default_value = "eq14", value_parser = parse_variant)]
    variant: SeedVariant,
    #[arg(long, default_value = "fda", value_parser = parse_decoder)]
    decoder: DecoderKind,
    /// E_b/N0 grid in dB, `start:step:stop` (stop included when aligned) or one value.
    #[arg(long, default_value = "0:1:14", value_parser = parse_grid)]
    ebn0: Grid,
    /// Minimum simulated bits per point.
    #[arg(long, default_value_t = 2_000_000)]
    bits: u64,
    /// Stop a point after this many errors; 0 disables early stopping.
    #[arg(long, default_value_t = 400)]
    max_errors: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// FDA outer-iteration cap.
    #[arg(long, default_value_t = 32)]
    n_c_max: u32,
    /// Transmit without noise (required by the nda decoder).
    #[arg(long)]
    noiseless: bool,
    /// Take the full configuration from an earlier run's manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Figure,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exhaustive,
    Mitm,
    Sampled,
}

fn parse_variant(s: &str) -> Result<SeedVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
struct Grid(Vec<f64>);

/// Parses `start:step:stop` (or a single number) into an ascending grid.
fn parse_grid(s: &str) -> Result<Grid, String> {
    parse_grid_values(s).map(Grid)
}

fn parse_grid_values(s: &str) -> Result<Vec<f64>, String> {
    let nums: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in grid `{s}`")))
        .collect::<Result<_, _>>()?;
    if nums.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid `{s}` has non-finite values"));
    }
    match nums[..] {
        [v] => Ok(vec![v]),
        [start, step, stop] => {
            if step <= 0.0 || stop < start {
                return Err(format!("grid `{s}` needs step > 0 and stop ≥ start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > 10_000 {
                return Err(format!("grid `{s}` has {n} points"));
            }
            // round away accumulation noise such as 0.30000000000000004
            Ok((0..n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        _ => Err(format!("grid `{s}` must be start:step:stop")),
    }
}

/// A command's failure, mapped onto the exit-code contract.
enum Failure {
    /// Exit 1: a check failed or a budget was exceeded.
    Check(String),
    /// Exit 2: bad arguments or configuration.
    Usage(String),
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Budget errors count as usage errors except where a command says otherwise.
fn from_core(e: Error) -> Failure {
    match e {
        Error::Inconsistent(_) => Failure::Check(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

struct Outcome {
    pass: bool,
    config: Value,
    outputs: Value,
}

fn load_set(set: &InputArgs) -> Result<(CodeSet, Value), Failure> {
    match &set.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let c = if text.contains(',') { CodeSet::from_csv(&text) } else { CodeSet::from_figure(&text) };
            let c = c.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok((c, json!({ "input": path })))
        }
        None => {
            let l = set.l.expect("clap requires --l without --input");
            let c = build_code_set(l, set.variant).map_err(from_core)?;
            Ok((c, json!({ "L": l, "variant": set.variant })))
        }
    }
}

fn cmd_gen(set: &SetArgs, format: Format) -> Result<Outcome, Failure> {
    let c = build_code_set(set.l, set.variant).map_err(from_core)?;
    let text = match format {
        Format::Figure => c.to_figure(),
        Format::Csv => c.to_csv(),
    };
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    Ok(Outcome {
        pass: true,
        config: json!({ "L": set.l, "variant": set.variant, "format": format!("{format:?}").to_lowercase() }),
        outputs: json!({ "K": c.k(), "stdout": "matrix" }),
    })
}

fn cmd_verify(set: &InputArgs, mode: Mode, trials: u64, seed: u64, mitm_mib: usize, as_json: bool) -> Result<Outcome, Failure> {
    let (c, mut config) = load_set(set)?;
    let report = match mode {
        Mode::Exhaustive => ud_exhaustive_report(&c),
        Mode::Mitm => mitm_report(&c, &MitmConfig { memory_bytes: mitm_mib << 20 }),
        Mode::Sampled => sampled_report(&c, trials, seed),
    }
    .map_err(from_core)?;
    config["mode"] = json!(format!("{mode:?}").to_lowercase());
    if matches!(mode, Mode::Sampled) {
        config["trials"] = json!(trials);
        config["seed"] = json!(seed);
    }
    if matches!(mode, Mode::Mitm) {
        config["mitm_mib"] = json!(mitm_mib);
    }
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{report}");
        if let Some(w) = report.verdict.witness() {
            let z: Vec<String> = w.z.iter().map(i8::to_string).collect();
            println!("witness z=[{}]", z.join(","));
            let cols: Vec<String> = w.z.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, v)| format!("{}{}", if *v > 0 { "+" } else { "-" }, j + 1)).collect();
            println!("columns {}", cols.join(" "));
        }
    }
    Ok(Outcome {
        pass: report.verdict.is_pass(),
        config,
        outputs: serde_json::to_value(&report).expect("report serializes"),
    })
}

fn cmd_appendix_c(as_json: bool) -> Result<Outcome, Failure> {
    let b8 = enumerate_b8_plus().len();
    let pairs = count_forbidden_pairs();
    let classes = classify_groups().map_err(|e| Failure::Check(e.to_string()))?;
    let append = verify_max_append().map_err(from_core)?;
    let checks: [(&str, String, String); 7] = [
        ("b8_plus", b8.to_string(), "120".into()),
        ("pairs", pairs.total_pairs.to_string(), "7140".into()),
        ("forbidden", pairs.forbidden.to_string(), "308".into()),
        ("classes", classes.classes.len().to_string(), "22".into()),
        ("v1_ud", append.v1_ud.to_string(), "true".into()),
        ("v2_ud", append.v2_ud.to_string(), "true".into()),
        (
            "extensions_blocked",
            format!("{}/{}", append.extensions_blocked, append.extensions_tested),
            "115/115".into(),
        ),
    ];
    let mismatches: Vec<String> =
        checks.iter().filter(|(_, got, want)| got != want).map(|(k, got, want)| format!("{k}: got {got}, expected {want}")).collect();
    let summary = json!({
        "b8_plus": b8,
        "pairs": pairs.total_pairs,
        "forbidden": pairs.forbidden,
        "forbidden_by_weight": pairs.by_weight,
        "classes": classes.classes.len(),
        "class_labels": classes.classes.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "rules": classes.rules,
        "v1_ud": append.v1_ud,
        "v2_ud": append.v2_ud,
        "v2_listing_ud": append.v2_listing_ud,
        "extensions_tested": append.extensions_tested,
        "extensions_blocked": append.extensions_blocked,
        "mismatches": mismatches,
    });
    if as_json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    } else {
        println!(
            "pairs={} forbidden={} classes={} extensions_blocked={}/{}",
            pairs.total_pairs,
            pairs.forbidden,
            classes.classes.len(),
            append.extensions_blocked,
            append.extensions_tested
        );
        let weights: Vec<String> = pairs.by_weight.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        println!("b8_plus={b8} forbidden_by_weight={}", weights.join(","));
        println!("v1_ud={} v2_ud={} v2_listing_ud={}", append.v1_ud, append.v2_ud, append.v2_listing_ud);
        for r in &classes.rules {
            println!("rule {:<5} {} ({})", if r.holds { "holds" } else { "fails" }, r.rule, r.detail);
        }
        for m in &mismatches {
            println!("mismatch {m}");
        }
    }
    Ok(Outcome { pass: mismatches.is_empty(), config: json!({}), outputs: summary })
}

fn cmd_dmin(set: &InputArgs) -> Result<Outcome, Failure> {
    let (c, config) = load_set(set)?;
    let d = min_distance(&c).map_err(from_core)?;
    // 1-based for people; the library is 0-based
    let witness = one_element_witness(&c).map(|(a, b)| (a + 1, b + 1));
    match witness {
        Some((a, b)) => println!("d_min={} witness=({a},{b})", d.d_min),
        None => println!("d_min={} witness=none", d.d_min),
    }
    Ok(Outcome {
        pass: d.d_min > 0,
        config,
        outputs: json!({ "d_min": d.d_min, "z": d.z, "witness": witness }),
    })
}

fn write_csv(path: &Path, records: &[BerRecord]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.decoder.to_string(),
            r.l.to_string(),
            r.k.to_string(),
            r.ebn0_db.to_string(),
            r.bits.to_string(),
            r.errors.to_string(),
            format!("{:.6e}", r.ber),
            format!("{:.6}", r.wall_seconds),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn ber_config(a: &BerArgs) -> Result<SimConfig, Failure> {
    if let Some(path) = &a.from_manifest {
        let m = RunManifest::read(path).map_err(Failure::Usage)?;
        if m.command != "ber" {
            return Err(Failure::Usage(format!("{} is a `{}` manifest, not `ber`", path.display(), m.command)));
        }
        return serde_json::from_value(m.config).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    if a.bits == 0 {
        return Err(Failure::Usage("--bits must be positive".into()));
    }
    let mut cfg = SimConfig::new(a.l.expect("clap requires --l"), a.variant, a.decoder, a.ebn0.0.clone());
    cfg.min_bits = a.bits;
    cfg.max_errors = (a.max_errors > 0).then_some(a.max_errors);
    cfg.seed = a.seed;
    cfg.amplitude = a.amplitude;
    cfg.fda.n_c_max = a.n_c_max;
    cfg.noiseless = a.noiseless;
    Ok(cfg)
}

fn cmd_ber(a: &BerArgs, started: Instant) -> Result<Outcome, Failure> {
    let cfg = ber_config(a)?;
    let records = run_ber(&cfg).map_err(|e| match e {
        Error::BudgetExceeded(_) | Error::MemoryBudget(_) => Failure::Check(e.to_string()),
        _ => Failure::usage(e),
    })?;
    write_csv(&a.out, &records)?;
    let side = manifest::beside(&a.out);
    let outputs = json!({ "csv": a.out, "points": records.len() });
    let config = serde_json::to_value(&cfg).expect("config serializes");
    RunManifest::new("ber", config.clone(), started.elapsed().as_secs_f64(), outputs.clone())
        .write(&side)
        .map_err(|e| Failure::Usage(format!("{}: {e}", side.display())))?;
    for r in &records {
        eprintln!("{} dB: {} errors / {} bits, BER {:.6e}", r.ebn0_db, r.errors, r.bits, r.ber);
    }
    println!("wrote {} ({} points) and {}", a.out.display(), records.len(), side.display());
    Ok(Outcome { pass: true, config, outputs })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let started = Instant::now();
    let (name, result) = match &cli.command {
        Command::Gen { set, format } => ("gen", cmd_gen(set, *format)),
        Command::Verify { set, mode, trials, seed, mitm_mib, json } => {
            ("verify", cmd_verify(set, *mode, *trials, *seed, *mitm_mib, *json))
        }
        Command::AppendixC { json } => ("appendix-c", cmd_appendix_c(*json)),
        Command::Dmin { set } => ("dmin", cmd_dmin(set)),
        Command::Ber(a) => ("ber", cmd_ber(a, started)),
    };
    match result {
        Ok(out) => {
            if let Some(path) = &cli.manifest {
                let mut outputs = out.outputs;
                outputs["pass"] = json!(out.pass);
                let m = RunManifest::new(name, out.config, started.elapsed().as_secs_f64(), outputs);
                if let Err(e) = m.write(path) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
