use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ahtower_core::comparison::BRUTE_FORCE_LIMIT;
use ahtower_core::euler::{max_transversal_size, EULER_COORD_LIMIT};
use ahtower_core::projection::DEFAULT_EXPANSION_LIMIT;
use ahtower_core::tower::r_enclosure_at;
use ahtower_core::{
    brute_force_max_trivial, closed_form_max_trivial, max_trivial_multiple, stable_matrix_obstruction, trace_growth,
    verify_not_properly_infinite, Certificate, CoordinateAllocator, DisjointFamilySummary, Error, FormalProjection,
    TowerParams, TraceMode,
};
use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::json;

const EXIT_FALSE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "ahtower",
    version,
    about = "Finite-stage verifier for an AH tower of Bott bundles"
)]
struct Cli {
    /// TOML file with k_seq, max_stage and truncation_depth
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether `copies` trivial summands fit under a formal projection
    Compare {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        copies: u64,
        /// Cross-check against the exhaustive and polynomial oracles
        #[arg(long)]
        paranoid: bool,
    },
    /// Data of stage j
    Stage {
        #[arg(long)]
        j: usize,
    },
    /// Map counts and the two trivial-capacity counts for stages i ≥ j
    Counts {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        n: u64,
    },
    /// Rational enclosure of R
    REnclosure {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Certify that n copies of the multiplier projection are not properly infinite
    VerifySimpleExample {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max_stage: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Write the certificate here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-verify a certificate written by verify-simple-example
    CheckCertificate {
        #[arg(long)]
        file: PathBuf,
    },
    /// Trace of the first c summands of the approximate unit
    TraceGrowth {
        #[arg(long, default_value = "simple")]
        mode: TraceMode,
        #[arg(long)]
        stages: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExhausted { .. }) => EXIT_INCONCLUSIVE,
        Some(Error::Internal(_)) => EXIT_INTERNAL,
        _ => EXIT_INVALID,
    }
}

fn load_params(config: Option<&Path>) -> anyhow::Result<TowerParams> {
    let Some(path) = config else {
        return Ok(TowerParams::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(TowerParams::from_toml(&text)?)
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json value serialises")
    );
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let mut params = load_params(cli.config.as_deref())?;
    match cli.command {
        Command::Compare {
            target,
            copies,
            paranoid,
        } => compare(&target, copies, paranoid),
        Command::Stage { j } => {
            params.max_stage = params.max_stage.max(j);
            let tower = ahtower_core::Tower::new(params)?;
            print_json(&serde_json::to_value(tower.stage(j)?)?);
            Ok(0)
        }
        Command::Counts { i, j, n } => {
            params.max_stage = params.max_stage.max(i);
            let tower = ahtower_core::Tower::new(params)?;
            let counts = tower.map_counts(i, j)?;
            print_json(&json!({
                "i": i,
                "j": j,
                "n": n,
                "k_ij": counts.k_ij.to_string(),
                "l_ij": counts.l_ij.to_string(),
                "m_i": tower.m(i)?.to_string(),
                "a_count": tower.a_count(i, j, n)?.to_string(),
                "b_count": tower.b_count(i, j, n)?.to_string(),
            }));
            Ok(0)
        }
        Command::REnclosure { depth } => {
            let depth = depth.unwrap_or(params.truncation_depth);
            let r = r_enclosure_at(&params.k_seq, depth)?;
            let mut value = serde_json::to_value(&r)?;
            value["depth"] = json!(depth);
            value["approx"] = json!(format!("{:.12}", r.midpoint_f64()));
            print_json(&value);
            Ok(0)
        }
        Command::VerifySimpleExample {
            n,
            max_stage,
            depth,
            json,
        } => {
            if let Some(s) = max_stage {
                params.max_stage = s;
            }
            if let Some(d) = depth {
                params.truncation_depth = d;
            }
            let cert = verify_not_properly_infinite(&params, n)?;
            cert.check().context("self-check of the fresh certificate")?;
            if let Some(path) = json {
                fs::write(&path, cert.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            print_summary(&cert)?;
            Ok(0)
        }
        Command::CheckCertificate { file } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let cert = Certificate::from_json(&text)?;
            cert.check()?;
            print_summary(&cert)?;
            Ok(0)
        }
        Command::TraceGrowth { mode, stages } => {
            let report = trace_growth(&params, mode, stages)?;
            if !report.is_linear() {
                return Err(Error::Internal("trace values are not linear in the stage count".into()).into());
            }
            print_json(&serde_json::to_value(&report)?);
            Ok(0)
        }
    }
}

fn print_summary(cert: &Certificate) -> anyhow::Result<()> {
    let p = &cert.params;
    let w = &cert.witness;
    println!("k_seq            {}", serde_json::to_string(&p.k_seq)?);
    println!("max_stage        {}", p.max_stage);
    println!("truncation_depth {}", p.truncation_depth);
    println!(
        "R in             [{:.12}, {:.12}]",
        to_f64(cert.r_interval.lo()),
        to_f64(cert.r_interval.hi())
    );
    println!("n                {}", cert.n);
    println!(
        "threshold T      {}  (n(n-1)/2 + n*R_hi = {:.12})",
        cert.threshold,
        to_f64(&cert.uniform_bound.bound)
    );
    println!("stage checks     {} pairs, a < T*m_i at each", cert.stage_checks.len());
    println!(
        "witness          i = {}, j = {}: b = {} >= T*m_i = {}",
        w.i, w.j, w.b_count, w.limit
    );
    for step in stable_matrix_obstruction(cert)?.steps {
        println!("  {step}");
    }
    println!("self-check       ok");
    println!("conclusion       {}", cert.conclusion);
    Ok(())
}

fn to_f64(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

enum Target {
    Explicit(FormalProjection),
    Compressed(DisjointFamilySummary),
}

fn read_target(path: &Path) -> anyhow::Result<Target> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("target is not JSON")?;
    if value.get("terms").is_some() {
        Ok(Target::Explicit(
            serde_json::from_value(value).context("malformed formal projection")?,
        ))
    } else if value.get("groups").is_some() {
        Ok(Target::Compressed(
            serde_json::from_value(value).context("malformed compressed projection")?,
        ))
    } else {
        bail!("target needs either \"terms\" or \"groups\"")
    }
}

fn compare(path: &Path, copies: u64, paranoid: bool) -> anyhow::Result<u8> {
    let q = match read_target(path)? {
        Target::Explicit(q) => q,
        Target::Compressed(summary) => {
            let mut alloc = CoordinateAllocator::new();
            match summary.expand_bounded(&mut alloc, DEFAULT_EXPANSION_LIMIT) {
                Ok(q) => q,
                Err(Error::SizeExceeded { .. }) if !paranoid => {
                    // too large to write out; the closed form needs no witness
                    let max = closed_form_max_trivial(&summary);
                    let result = max >= BigUint::from(copies);
                    print_json(&json!({ "result": result, "maxTrivial": max.to_string(), "witness": null }));
                    return Ok(if result { 0 } else { EXIT_FALSE });
                }
                Err(e) => return Err(e.into()),
            }
        }
    };

    let (max, witness) = max_trivial_multiple(&q);
    if paranoid {
        cross_check(&q, max)?;
    }
    let result = copies <= max;
    print_json(&json!({
        "result": result,
        "maxTrivial": max.to_string(),
        "witness": witness,
    }));
    Ok(if result { 0 } else { EXIT_FALSE })
}

fn cross_check(q: &FormalProjection, max: u64) -> anyhow::Result<()> {
    let nontrivial = q.terms().filter(|(s, _)| !s.is_empty()).count();
    if nontrivial > BRUTE_FORCE_LIMIT || q.support().len() > EULER_COORD_LIMIT {
        bail!(
            "--paranoid needs at most {BRUTE_FORCE_LIMIT} distinct sets and {EULER_COORD_LIMIT} coordinates, got {nontrivial} and {}",
            q.support().len()
        );
    }
    let brute = brute_force_max_trivial(q)?;
    let transversal = max_transversal_size(q)? as u64;
    let from_transversal = q.rank() - transversal;
    if brute != max || from_transversal != max {
        return Err(anyhow!(Error::Internal(format!(
            "oracles disagree: matching {max}, exhaustive {brute}, polynomial {from_transversal}"
        ))));
    }
    Ok(())
}
