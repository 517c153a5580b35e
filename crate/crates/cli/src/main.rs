//! `cvqkd`: key-rate sweeps, code planning and parity-check generation.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd_core::keyrate::{last_positive, sweep, SweepAxis, SweepFixed};
use cvqkd_core::ldpc::{
    design_rate, generate_regular_ldpc_trimmed, read_crs, serialize_crs, StorageReport, BITS_PER_GB, BITS_PER_MB,
};
use cvqkd_core::plan::{code_plan, CodePlan};
use cvqkd_core::report::{write_csv, write_json};
use cvqkd_core::selftest::run_selftest;
use cvqkd_core::{Detection, Direction, Error, RatePoint, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cvqkd", version, about = "Finite-size CV-QKD key rates and LDPC storage planning")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration; omitted keys take the default parameter set
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for output files (stdout when omitted)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Heterodyne detection (overrides the config)
    #[arg(long, global = true)]
    heterodyne: bool,
    /// Reverse reconciliation (overrides the config)
    #[arg(long, global = true)]
    rr: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimized key rate over a range of channel losses
    RateVsLoss {
        /// Loss range in dB as START:STEP:END
        #[arg(long, value_name = "START:STEP:END", default_value = "0:0.1:3")]
        db: String,
    },
    /// Optimized key rate over a list of block sizes N
    RateVsBlocksize {
        /// Comma-separated block sizes, e.g. 1e4,1e5,1e6
        #[arg(long = "bigN", value_name = "LIST")]
        big_n: String,
    },
    /// Optimal code rate at the configured point and the closest regular code
    CodePlan {
        /// Column weight of the regular code
        #[arg(long, default_value_t = 2)]
        dv: u32,
    },
    /// Generate a regular GF(2^d) parity-check matrix and write it in CRS form
    GenParity {
        #[arg(long)]
        hn: usize,
        #[arg(long, default_value_t = 4)]
        d: u32,
        #[arg(long, default_value_t = 2)]
        dv: u32,
        #[arg(long)]
        dc: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CRS file
        #[arg(short = 'o', long = "output", value_name = "FILE")]
        output: PathBuf,
    },
    /// Storage model for a code size, optionally compared with a CRS file
    StorageReport {
        /// Read code parameters from this CRS file
        #[arg(long, value_name = "FILE")]
        crs: Option<PathBuf>,
        #[arg(long, required_unless_present = "crs")]
        hn: Option<f64>,
        #[arg(long, default_value_t = 4)]
        d: u32,
        #[arg(long, default_value_t = 2.0)]
        dv: f64,
        /// Syndrome rate R_synd = 1 − R_code
        #[arg(long = "r-synd", required_unless_present = "crs")]
        r_synd: Option<f64>,
    },
    /// Run the built-in invariant checks
    Selftest,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    /// No key anywhere, or a failed self-test.
    Infeasible(String),
    /// Bad flags, configuration or file access.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(msg) => Failure::Infeasible(msg),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| match e {
            Error::Config(_) => Failure::from(e),
            other => usage(format!("cannot read config {}: {other}", path.display())),
        })?,
        None => RunConfig::default(),
    };
    if common.heterodyne {
        cfg.detection = Detection::Heterodyne;
    }
    if common.rr {
        cfg.direction = Direction::Reverse;
    }
    Ok(cfg)
}

fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("--db expects START:STEP:END with STEP > 0 and START ≤ END, got '{spec}'"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, step, end] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && start <= end && start.is_finite() && end.is_finite()) {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(usage(format!("--db {spec} has {count} points; use a coarser step")));
    }
    // Rounded so that 0:0.1:3 yields 0.3 rather than 0.30000000000000004.
    Ok((0..count).map(|i| ((start + step * i as f64) * 1e12).round() / 1e12).collect())
}

fn parse_list(spec: &str) -> Result<Vec<f64>, Failure> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--bigN expects a comma-separated list of integers, got '{spec}'")))?;
    if values.is_empty() || values.iter().any(|&v| !(v >= 4.0 && v.fract() == 0.0 && v < 1e15)) {
        return Err(usage(format!("--bigN values must be integers ≥ 4, got '{spec}'")));
    }
    Ok(values)
}

/// Writes `body` to `<out>/<name>` or stdout.
fn emit(common: &Common, name: &str, body: &[u8]) -> Outcome {
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => io::stdout()
            .write_all(body)
            .map_err(|e| usage(format!("cannot write to stdout: {e}")))?,
    }
    Ok(())
}

fn run_sweep(common: &Common, axis: SweepAxis, values: &[f64], stem: &str) -> Outcome {
    let cfg = load_config(common)?;
    let fixed = SweepFixed { xi: cfg.xi, loss_db: cfg.loss_db, big_n: cfg.big_n, bounds: cfg.bounds() };
    let points: Vec<RatePoint> = sweep(&cfg.protocol(), axis, values, &fixed)?;
    let mut body = Vec::new();
    let ext = match common.format {
        Format::Csv => {
            write_csv(&mut body, axis, &points)?;
            "csv"
        }
        Format::Json => {
            write_json(&mut body, &points)?;
            "json"
        }
    };
    emit(common, &format!("{stem}.{ext}"), &body)?;
    match last_positive(&points, axis) {
        Some(_) => Ok(()),
        None => Err(Failure::Infeasible(format!("zero key rate at every {} in the sweep", axis.column()))),
    }
}

fn plan_text(p: &CodePlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "loss_db = {}", p.loss_db);
    let _ = writeln!(s, "V = {}", p.v);
    let _ = writeln!(s, "N = {}", p.big_n);
    let _ = writeln!(s, "n = {}", p.n);
    let _ = writeln!(s, "hn = {}", p.hn);
    let _ = writeln!(s, "H(k|y) = {}", p.h_k_given_y);
    let _ = writeln!(s, "V(k|y) = {}", p.v_k_given_y);
    let _ = writeln!(s, "R_synd_star = {}", p.r_synd_star);
    let _ = writeln!(s, "R_code_star = {}", p.r_code_star);
    let _ = writeln!(s, "d_v = {}", p.choice.d_v);
    let _ = writeln!(s, "d_c = {}", p.choice.d_c);
    let _ = writeln!(s, "R_design = {}", p.choice.design_rate);
    let _ = writeln!(s, "M_dense_star = {} bits ({:.4} GB)", p.m_dense_star_bits, p.m_dense_star_bits / BITS_PER_GB);
    let _ = writeln!(s, "M_sparse_star = {} bits ({:.4} MB)", p.m_sparse_star_bits, p.m_sparse_star_bits / BITS_PER_MB);
    s
}

fn storage_text(r: &StorageReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "M_dense = {} bits ({:.4} GB)", r.m_dense_bits, r.m_dense_bits / BITS_PER_GB);
    let _ = writeln!(s, "M_sparse = {} bits ({:.4} MB)", r.m_sparse_bits, r.m_sparse_bits / BITS_PER_MB);
    if r.serialized_bytes > 0 {
        let _ = writeln!(s, "serialized = {} bytes ({:.4} MB)", r.serialized_bytes, r.serialized_bytes as f64 / 1e6);
        let _ = writeln!(s, "serialized / M_sparse = {:.4}", 8.0 * r.serialized_bytes as f64 / r.m_sparse_bits);
    }
    s
}

fn emit_record<T: serde::Serialize>(common: &Common, stem: &str, value: &T, text: String) -> Outcome {
    match common.format {
        Format::Json => {
            let mut body = serde_json::to_vec_pretty(value).map_err(|e| usage(e.to_string()))?;
            body.push(b'\n');
            emit(common, &format!("{stem}.json"), &body)
        }
        Format::Csv => emit(common, &format!("{stem}.txt"), text.as_bytes()),
    }
}

fn storage_from_code(code: &cvqkd_core::LdpcCode, bytes: u64) -> Result<StorageReport, Failure> {
    Ok(StorageReport::for_code(code, code.syndrome_rate(), bytes)?)
}

fn run(cli: Cli) -> Outcome {
    let common = &cli.common;
    match cli.command {
        Command::RateVsLoss { db } => run_sweep(common, SweepAxis::LossDb, &parse_range(&db)?, "rate_vs_loss"),
        Command::RateVsBlocksize { big_n } => {
            run_sweep(common, SweepAxis::BlockSize, &parse_list(&big_n)?, "rate_vs_blocksize")
        }
        Command::CodePlan { dv } => {
            let cfg = load_config(common)?;
            let plan = code_plan(&cfg, dv)?;
            emit_record(common, "code_plan", &plan, plan_text(&plan))
        }
        Command::GenParity { hn, d, dv, dc, seed, output } => {
            design_rate(f64::from(dv), f64::from(dc))?;
            let (code, dropped) = generate_regular_ldpc_trimmed(hn, d, dv, dc, seed)?;
            if dropped > 0 {
                eprintln!("note: hn trimmed from {hn} to {} so that d_v·hn is a multiple of d_c", code.n_cols());
            }
            let bytes = serialize_crs(&code, &output)?;
            eprintln!(
                "wrote {}: {} × {} over GF(2^{d}), R_code = {:.4}",
                output.display(),
                code.n_rows(),
                code.n_cols(),
                code.code_rate()
            );
            let report = storage_from_code(&code, bytes)?;
            emit_record(common, "storage_report", &report, storage_text(&report))
        }
        Command::StorageReport { crs, hn, d, dv, r_synd } => {
            let report = match crs {
                Some(path) => {
                    let code = read_crs(&path)?;
                    let bytes = file_len(&path)?;
                    storage_from_code(&code, bytes)?
                }
                None => {
                    let (hn, r) = (hn.unwrap_or_default(), r_synd.unwrap_or_default());
                    if !(hn >= 1.0 && (0.0..1.0).contains(&r) && dv > 0.0) {
                        return Err(usage("storage-report needs --hn ≥ 1, 0 ≤ --r-synd < 1 and --dv > 0"));
                    }
                    let dense = cvqkd_core::ldpc::dense_storage_bits(hn, d, r);
                    let sparse = cvqkd_core::ldpc::sparse_storage_bits(hn, d, dv, r);
                    StorageReport {
                        m_dense_bits: dense,
                        m_sparse_bits: sparse,
                        m_dense_star_bits: dense,
                        m_sparse_star_bits: sparse,
                        serialized_bytes: 0,
                    }
                }
            };
            emit_record(common, "storage_report", &report, storage_text(&report))
        }
        Command::Selftest => {
            let outcomes = run_selftest();
            let mut text = String::new();
            for c in &outcomes {
                let _ = writeln!(text, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            emit(common, "selftest.txt", text.as_bytes())?;
            let failed = outcomes.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Infeasible(format!("{failed} self-test check(s) failed")));
            }
            Ok(())
        }
    }
}

fn file_len(path: &Path) -> Result<u64, Failure> {
    fs::metadata(path)
        .map(|m| m.len())
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
