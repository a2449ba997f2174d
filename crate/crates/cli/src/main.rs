//! `supercanon`: compute canonical bases, run verification suites and manage
//! the record cache from the command line.

mod cache;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use supercanon::golden;
use supercanon::matrices::{enumerate_level, enumerate_upper, SuperMatrix, SuperShape};
use supercanon::schur::{qs3_check, verify_stabilization, SchurElement, SchurLevel};
use supercanon::tableaux::{count_by_content, pi_tilde, t_pi, SuperPartition};
use supercanon::uplus::{AlgebraElement, CanonicalRecord, Side, UPlus};

use cache::RecordCache;

macro_rules! outln {
    ($($t:tt)*) => {
        write_line(&format!($($t)*))?
    };
}

/// Writes one line to stdout; a closed pipe ends the process quietly.
fn write_line(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        r => Ok(r?),
    }
}

#[derive(Parser)]
#[command(
    name = "supercanon",
    version,
    about = "Canonical bases for quantum gl(m|n)"
)]
struct Cli {
    /// Number of even indices.
    #[arg(long, global = true, default_value_t = 2)]
    m: usize,
    /// Number of odd indices.
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory holding cached canonical basis records.
    #[arg(long, global = true, env = "SUPERCANON_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads for enumeration jobs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical basis elements of the positive (or negative) part.
    Canonical {
        /// Target matrix, e.g. "aE[1,2]+E[1,3]" with integer coefficients.
        #[arg(long, conflicts_with = "all_upto_norm")]
        matrix: Option<String>,
        /// Every strictly upper target with norm at most this bound.
        #[arg(long)]
        all_upto_norm: Option<u64>,
        /// Treat the target as strictly lower.
        #[arg(long)]
        minus: bool,
    },
    /// Verification suites; exit status is nonzero on any failure.
    Verify {
        #[command(subcommand)]
        check: VerifyCmd,
    },
    /// Computations in the Schur superalgebra at a fixed level.
    Schur {
        #[command(subcommand)]
        op: SchurCmd,
    },
    /// Supertableaux counts.
    Tableaux {
        #[command(subcommand)]
        op: TableauxCmd,
    },
    /// Inspect or clear the record cache.
    Cache {
        #[command(subcommand)]
        op: CacheCmd,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// PBW products of root vectors against the basis `A(0)`.
    Pbw {
        #[arg(long, default_value_t = 2)]
        entry_max: u32,
    },
    /// Defining relations on every basis vector up to a norm bound.
    Serre {
        #[arg(long, default_value_t = 6)]
        norm_max: u64,
    },
    /// Closed-form table in rank (2|1).
    #[command(name = "golden-gl21")]
    GoldenGl21 {
        #[arg(long, default_value_t = 6)]
        a_max: u32,
    },
    /// Closed-form table in rank (2|2).
    #[command(name = "golden-gl22")]
    GoldenGl22 {
        #[arg(long, default_value_t = 3)]
        a_max: u32,
        #[arg(long, default_value_t = 3)]
        f_max: u32,
    },
    /// Canonical basis of the negative part against the Schur canonical basis.
    Thm54 {
        #[arg(long)]
        r: u32,
    },
    /// r-independent expansions of generator products.
    Stab(StabArgs),
}

#[derive(clap::Args)]
struct StabArgs {
    /// Off-diagonal matrix; without it every matrix of size at most 2 is used.
    #[arg(long)]
    matrix: Option<String>,
    /// Generator index; without it every index is used.
    #[arg(long)]
    h: Option<usize>,
    /// Character as comma-separated integers, default zero.
    #[arg(long)]
    j: Option<String>,
    /// Levels to compare, default the three smallest admissible ones.
    #[arg(long)]
    r_list: Option<String>,
}

#[derive(Subcommand)]
enum SchurCmd {
    /// Product of two basis elements `[A][B]`.
    Mult {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Canonical basis element of the Schur superalgebra.
    Xi {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Negative canonical basis against the Schur canonical basis, for one
    /// lower matrix or all of them at level r.
    #[command(name = "verify-thm54")]
    VerifyThm54 {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Stabilization check.
    #[command(name = "verify-stab")]
    VerifyStab(StabArgs),
    /// Commutator of `E_h` and `F_h` on every basis element at level r.
    #[command(name = "verify-qs3")]
    VerifyQs3 {
        #[arg(long)]
        r: u32,
    },
}

#[derive(Subcommand)]
enum TableauxCmd {
    /// Number of semistandard supertableaux of a shape, by content.
    Count {
        /// Partition, e.g. "2,1".
        #[arg(long)]
        shape: String,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    /// Number of cached records and their total size
    Stats,
    /// Remove every cached record
    Clear,
    /// Re-read every cached record, failing on the first unreadable one
    Verify,
}

#[derive(Serialize)]
struct CheckReport {
    check: String,
    shape: String,
    checked: usize,
    failures: Vec<String>,
    passed: bool,
}

impl CheckReport {
    fn new(check: &str, shape: SuperShape, checked: usize, failures: Vec<String>) -> Self {
        Self {
            check: check.to_string(),
            shape: shape.to_string(),
            checked,
            passed: failures.is_empty(),
            failures,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("cannot configure worker threads")?;
    }
    let shape = SuperShape::new(cli.m, cli.n)?;
    match &cli.command {
        Command::Canonical {
            matrix,
            all_upto_norm,
            minus,
        } => cmd_canonical(cli, shape, matrix.as_deref(), *all_upto_norm, *minus),
        Command::Verify { check } => cmd_verify(cli, shape, check),
        Command::Schur { op } => cmd_schur(cli, shape, op),
        Command::Tableaux { op } => match op {
            TableauxCmd::Count { shape: parts } => cmd_tableaux_count(shape, parts),
        },
        Command::Cache { op } => cmd_cache(cli, op),
    }
}

fn parse_matrix(shape: SuperShape, text: &str) -> Result<SuperMatrix> {
    let a = SuperMatrix::parse_text(shape, text, &BTreeMap::new())
        .with_context(|| format!("cannot parse matrix '{text}'"))?;
    if !a.is_valid() {
        bail!("matrix '{text}' has an entry above 1 in an odd position");
    }
    Ok(a)
}

fn parse_ints<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("'{s}' is not an integer in '{text}'"))
        })
        .collect()
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn emit_report(cli: &Cli, report: &CheckReport) -> Result<bool> {
    match cli.format {
        Format::Json => emit_json(report)?,
        Format::Latex | Format::Text => {
            outln!(
                "{} {}: {} checked, {} failures{}",
                report.check,
                report.shape,
                report.checked,
                report.failures.len(),
                if report.passed { "" } else { " [FAIL]" }
            );
            for f in &report.failures {
                outln!("  {f}");
            }
        }
    }
    Ok(report.passed)
}

fn open_cache(cli: &Cli) -> Result<Option<RecordCache>> {
    cli.cache_dir.as_deref().map(RecordCache::open).transpose()
}

fn cmd_canonical(
    cli: &Cli,
    shape: SuperShape,
    matrix: Option<&str>,
    all_upto_norm: Option<u64>,
    minus: bool,
) -> Result<bool> {
    let targets: Vec<SuperMatrix> = match (matrix, all_upto_norm) {
        (Some(text), _) => vec![parse_matrix(shape, text)?],
        (None, Some(bound)) => {
            let plus = enumerate_upper(shape, |_, _| u32::MAX, Some(bound));
            if minus {
                plus.iter().map(SuperMatrix::transpose).collect()
            } else {
                plus
            }
        }
        (None, None) => bail!("give --matrix or --all-upto-norm"),
    };
    let side = if minus { Side::Minus } else { Side::Plus };
    for a in &targets {
        if !side.admits(a) {
            bail!(
                "matrix {} is not strictly {}",
                a.to_text(),
                if minus { "lower" } else { "upper" }
            );
        }
    }
    let uplus = Arc::new(UPlus::new(shape));
    let cache = open_cache(cli)?;
    let start = Instant::now();
    let results: Vec<(CanonicalRecord, bool)> = targets
        .par_iter()
        .map(|a| -> Result<(CanonicalRecord, bool)> {
            if let Some(c) = &cache {
                if let Some(rec) = c.load(shape, side, a)? {
                    if side == Side::Plus {
                        uplus.insert_canonical(rec.clone());
                    }
                    return Ok((rec, true));
                }
            }
            let rec = match side {
                Side::Plus => (*uplus.canonical(a)?).clone(),
                Side::Minus => uplus.canonical_minus(a)?,
            };
            if let Some(c) = &cache {
                c.store(side, &rec)?;
            }
            Ok((rec, false))
        })
        .collect::<Result<_>>()?;
    let hits = results.iter().filter(|(_, h)| *h).count();
    eprintln!(
        "{} records ({} from cache) in {:.3}s",
        results.len(),
        hits,
        start.elapsed().as_secs_f64()
    );
    let records: Vec<CanonicalRecord> = results.into_iter().map(|(r, _)| r).collect();
    match cli.format {
        Format::Json => {
            if matrix.is_some() {
                emit_json(&records[0])?;
            } else {
                emit_json(&records)?;
            }
        }
        Format::Latex => {
            for r in &records {
                outln!("{}", render::record_latex(r));
            }
        }
        Format::Text => {
            for r in &records {
                outln!("{}", render::record_text(r));
            }
        }
    }
    Ok(true)
}

fn cmd_verify(cli: &Cli, shape: SuperShape, check: &VerifyCmd) -> Result<bool> {
    let report = match check {
        VerifyCmd::Pbw { entry_max } => {
            let uplus = UPlus::new(shape);
            let cap = *entry_max;
            let targets = enumerate_upper(shape, |_, _| cap, None);
            let failures: Vec<String> = targets
                .par_iter()
                .map(|a| -> Result<Option<String>> {
                    let lhs = uplus.pbw(a)?;
                    Ok((lhs != AlgebraElement::basis(a)?)
                        .then(|| format!("{}: product is {lhs}", a.to_text())))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            CheckReport::new("pbw", shape, targets.len(), failures)
        }
        VerifyCmd::Serre { norm_max } => {
            let rep = UPlus::new(shape).serre_check(*norm_max)?;
            let failures = rep
                .violations
                .iter()
                .map(|v| format!("{} on {}: {}", v.relation, v.basis.to_text(), v.residue))
                .collect();
            CheckReport::new("serre", shape, rep.checked, failures)
        }
        VerifyCmd::GoldenGl21 { a_max } => {
            let s = SuperShape::new(2, 1)?;
            golden_report("golden-gl21", s, &golden::gl21_cases(*a_max))?
        }
        VerifyCmd::GoldenGl22 { a_max, f_max } => {
            let s = SuperShape::new(2, 2)?;
            golden_report("golden-gl22", s, &golden::gl22_cases(*a_max, *f_max))?
        }
        VerifyCmd::Thm54 { r } => image_report(shape, *r, None)?,
        VerifyCmd::Stab(args) => stab_report(shape, args)?,
    };
    emit_report(cli, &report)
}

fn golden_report(
    name: &str,
    shape: SuperShape,
    cases: &[golden::GoldenCase],
) -> Result<CheckReport> {
    let uplus = UPlus::new(shape);
    let outcomes: Vec<golden::GoldenOutcome> = cases
        .par_iter()
        .map(|c| golden::check_case(&uplus, c))
        .collect::<Result<_, _>>()?;
    let failures = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| format!("{}: {}", o.label, o.problems.join("; ")))
        .collect();
    Ok(CheckReport::new(name, shape, outcomes.len(), failures))
}

fn lower_targets(shape: SuperShape, r: u32) -> Vec<SuperMatrix> {
    let set: BTreeSet<SuperMatrix> = enumerate_level(shape, r)
        .into_iter()
        .map(|a| a.lower_part())
        .filter(|a| !a.is_zero())
        .collect();
    set.into_iter().collect()
}

fn image_report(shape: SuperShape, r: u32, matrix: Option<&str>) -> Result<CheckReport> {
    let level = SchurLevel::new(shape, r)?;
    let targets = match matrix {
        Some(t) => vec![parse_matrix(shape, t)?],
        None => lower_targets(shape, r),
    };
    let failures: Vec<String> = targets
        .par_iter()
        .map(|a| -> Result<Option<String>> {
            let rep = level.verify_thm54(a)?;
            if rep.passed() {
                return Ok(None);
            }
            let bad: Vec<String> = rep
                .cases
                .iter()
                .filter(|c| !c.agrees())
                .map(|c| c.a_lambda.to_text())
                .collect();
            Ok(Some(format!(
                "{}: sum {}, failing weights at {}",
                a.to_text(),
                if rep.sum_agrees { "agrees" } else { "differs" },
                bad.join(", ")
            )))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(CheckReport::new(
        "canonical-image",
        shape,
        targets.len(),
        failures,
    ))
}

fn stab_report(shape: SuperShape, args: &StabArgs) -> Result<CheckReport> {
    let d = shape.dim();
    let targets: Vec<SuperMatrix> = match &args.matrix {
        Some(t) => vec![parse_matrix(shape, t)?],
        None => {
            let mut set = BTreeSet::new();
            for r in 0..=2 {
                for a in enumerate_level(shape, r) {
                    set.insert(a.off_diagonal());
                }
            }
            set.into_iter().collect()
        }
    };
    let j: Vec<i64> = match &args.j {
        Some(t) => parse_ints(t)?,
        None => vec![0; d],
    };
    let hs: Vec<usize> = match args.h {
        Some(h) => vec![h],
        None => (1..d).collect(),
    };
    let explicit: Option<Vec<u32>> = args.r_list.as_deref().map(parse_ints).transpose()?;
    let jobs: Vec<(SuperMatrix, usize)> = targets
        .iter()
        .flat_map(|a| hs.iter().map(move |&h| (a.clone(), h)))
        .collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .map(|(a, h)| -> Result<Option<String>> {
            let rs = explicit.clone().unwrap_or_else(|| {
                let s = a.size();
                (s + 1..=s + 3).collect()
            });
            let rep = verify_stabilization(a, &j, *h, &rs)?;
            if rep.passed() {
                return Ok(None);
            }
            let bad: Vec<String> = rep
                .levels
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|(r, _)| r.to_string())
                .collect();
            Ok(Some(format!(
                "{} h={h}: {} diagonal-dependent signs, mismatched levels [{}]",
                a.to_text(),
                rep.expansion.unstable_signs.len(),
                bad.join(",")
            )))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(CheckReport::new("stab", shape, jobs.len(), failures))
}

fn level_of(a: &SuperMatrix, r: Option<u32>) -> Result<u32> {
    match r {
        Some(r) if r != a.size() => {
            bail!("matrix {} has entry sum {}, not {r}", a.to_text(), a.size())
        }
        _ => Ok(a.size()),
    }
}

fn emit_schur(cli: &Cli, x: &SchurElement) -> Result<()> {
    match cli.format {
        Format::Json => emit_json(x),
        Format::Latex => {
            outln!("{}", render::schur_latex(x));
            Ok(())
        }
        Format::Text => {
            outln!("{x}");
            Ok(())
        }
    }
}

fn cmd_schur(cli: &Cli, shape: SuperShape, op: &SchurCmd) -> Result<bool> {
    match op {
        SchurCmd::Mult { left, right, r } => {
            let a = parse_matrix(shape, left)?;
            let b = parse_matrix(shape, right)?;
            let r = level_of(&a, *r)?;
            level_of(&b, Some(r))?;
            let level = SchurLevel::new(shape, r)?;
            let x = level.mult(&SchurElement::basis(&a)?, &SchurElement::basis(&b)?)?;
            emit_schur(cli, &x)?;
            Ok(true)
        }
        SchurCmd::Xi { matrix, r } => {
            let a = parse_matrix(shape, matrix)?;
            let level = SchurLevel::new(shape, level_of(&a, *r)?)?;
            emit_schur(cli, &*level.canonical_xi(&a)?)?;
            Ok(true)
        }
        SchurCmd::VerifyThm54 { r, matrix } => {
            let report = image_report(shape, *r, matrix.as_deref())?;
            emit_report(cli, &report)
        }
        SchurCmd::VerifyStab(args) => {
            let report = stab_report(shape, args)?;
            emit_report(cli, &report)
        }
        SchurCmd::VerifyQs3 { r } => {
            let rep = qs3_check(shape, *r)?;
            let failures = rep
                .violations
                .iter()
                .map(|v| format!("h={} on [{}]", v.h, v.basis.to_text()))
                .collect();
            emit_report(cli, &CheckReport::new("qs3", shape, rep.checked, failures))
        }
    }
}

fn cmd_tableaux_count(shape: SuperShape, parts: &str) -> Result<bool> {
    let parts: Vec<u32> = parse_ints(parts)?;
    let pi = SuperPartition::new(&parts, shape)?;
    let counts = count_by_content(&pi);
    let total: usize = counts.values().sum();
    let (tilde, t) = if pi.in_hook() {
        (
            Some(pi_tilde(&pi)?.0),
            t_pi(&pi)?.map(|t| t.rows().to_vec()),
        )
    } else {
        (None, None)
    };
    let by_content: Vec<_> = counts
        .iter()
        .map(|(mu, k)| json!({"content": mu.0, "count": k}))
        .collect();
    emit_json(&json!({
        "partition": pi.parts(),
        "m": shape.m,
        "n": shape.n,
        "in_hook": pi.in_hook(),
        "highest_weight": tilde,
        "highest_tableau": t,
        "total": total,
        "by_content": by_content,
    }))?;
    Ok(true)
}

fn cmd_cache(cli: &Cli, op: &CacheCmd) -> Result<bool> {
    let Some(cache) = open_cache(cli)? else {
        bail!("no cache directory: pass --cache-dir or set SUPERCANON_CACHE_DIR");
    };
    match op {
        CacheCmd::Stats => emit_json(&cache.stats()?)?,
        CacheCmd::Clear => {
            let n = cache.clear()?;
            emit_json(&json!({"dir": cache.dir(), "removed": n}))?;
        }
        CacheCmd::Verify => {
            let n = cache.verify()?;
            emit_json(&json!({"dir": cache.dir(), "valid": n}))?;
        }
    }
    Ok(true)
}
