//! `skewlat`: command-line front end. Machine output goes to stdout as JSON
//! (or DOT); summaries and diagnostics go to stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use skewlat::algebra::validate;
use skewlat::enumerate::{self, Catalog, MAX_SEARCH_ORDER};
use skewlat::laws::{self, ConcordanceReport, ReportVerdict, THEOREMS};
use skewlat::matrix::{self, Block, BlockDims, MatrixError};
use skewlat::{cosets, decompose, greens, varieties, AlgebraFile, SkewLattice};

#[derive(Parser)]
#[command(name = "skewlat", version, about = "Compute with finite skew lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms; exit 1 if any fails.
    Validate { file: PathBuf },
    /// Evaluate variety predicates.
    Classify {
        file: PathBuf,
        /// Comma-separated predicate names; all when omitted.
        #[arg(long, value_delimiter = ',')]
        predicates: Option<Vec<String>>,
        /// Exit 1 if a selected predicate is false.
        #[arg(long)]
        assert: bool,
    },
    /// Green's relations, eggboxes and the Hasse diagram of S/D.
    Greens { file: PathBuf },
    /// Coset partitions and bijections for every comparable pair of D-classes.
    Cosets { file: PathBuf },
    /// Kimura factorization, lattice sections and skew diamonds.
    Decompose { file: PathBuf },
    /// All skew lattices of one order up to isomorphism.
    Enumerate {
        #[arg(long)]
        order: usize,
        /// Use the unpruned reference search instead.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        workers: u16,
        /// Also write the catalog directory here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Primitive skew lattice of matrices over GF(p) in standard block form.
    Matrix {
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum)]
        construction: Construction,
        /// Block sizes n1,n2,n3.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 1, 1])]
        blocks: Vec<usize>,
        /// JSON object of parameter blocks: a13, a23, b12, b13 (right) or
        /// a31, a32, b21, b31 (left). Missing blocks are zero.
        #[arg(long)]
        params: Option<String>,
    },
    /// Run theorem checks over a catalog; exit 1 on any discordance.
    Verify {
        /// Comma-separated theorem names; all when omitted.
        #[arg(long, value_delimiter = ',')]
        theorems: Option<Vec<String>>,
        /// A catalog directory, or a directory of catalog directories.
        #[arg(long, conflicts_with = "order")]
        catalog: Option<PathBuf>,
        /// Enumerate orders 1..=N instead of reading a catalog.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        workers: u16,
        /// Include every evaluated record.
        #[arg(long)]
        full: bool,
    },
    /// Re-emit an algebra as canonical JSON or as a DOT eggbox diagram.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Right,
    Left,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// Exit status with its cause.
enum Failure {
    /// A domain finding: exit 1.
    Finding,
    /// Bad input or usage: exit 2.
    Usage(anyhow::Error),
    /// Internal inconsistency: exit 3.
    Internal(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Internal(e.into())
}

/// A closed downstream pipe is not an error.
fn written(r: io::Result<()>) -> Outcome {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(internal(e)),
        _ => Ok(()),
    }
}

fn emit(v: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(v).map_err(internal)?;
    text.push('\n');
    written(io::stdout().lock().write_all(text.as_bytes()))
}

fn read_file(path: &Path) -> Result<AlgebraFile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    AlgebraFile::parse(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)
}

fn load(path: &Path) -> Result<(SkewLattice, Option<Vec<String>>), Failure> {
    let file = read_file(path)?;
    let s = file
        .to_algebra()
        .with_context(|| format!("loading {}", path.display()))
        .map_err(usage)?;
    Ok((s, file.names))
}

fn cmd_validate(path: &Path) -> Outcome {
    let file = read_file(path)?;
    let (meet, join) = file.tables().map_err(usage)?;
    let report = validate(&meet, &join).map_err(usage)?;
    emit(&report)?;
    if report.valid {
        Ok(())
    } else {
        eprintln!("{}: {} axiom failure(s)", path.display(), report.failures.len());
        Err(Failure::Finding)
    }
}

fn cmd_classify(path: &Path, predicates: Option<Vec<String>>, assert: bool) -> Outcome {
    let (s, _) = load(path)?;
    let names: Option<Vec<&str>> = predicates.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let report = varieties::classify(&s, names.as_deref()).map_err(usage)?;
    emit(&report)?;
    let failed: Vec<&str> = report.results.iter().filter(|(_, v)| !v.holds).map(|(n, _)| n.as_str()).collect();
    if assert && !failed.is_empty() {
        eprintln!("false: {}", failed.join(", "));
        return Err(Failure::Finding);
    }
    Ok(())
}

fn cmd_greens(path: &Path) -> Outcome {
    let (s, _) = load(path)?;
    let l = greens::lattice_image(&s);
    emit(&json!({
        "R": greens::green_r(&s),
        "L": greens::green_l(&s),
        "D": greens::green_d(&s),
        "H": greens::green_h(&s),
        "eggboxes": greens::eggboxes(&s),
        "hasse": greens::dclass_hasse(&s),
        "lattice_image": AlgebraFile::from_algebra(&l.quotient),
    }))
}

fn cmd_cosets(path: &Path) -> Outcome {
    let (s, _) = load(path)?;
    let systems = cosets::coset_systems(&s).map_err(internal)?;
    let failures: Vec<String> = cosets::comparable_pairs(&s)
        .iter()
        .flat_map(|p| cosets::audit_pair(&s, p))
        .collect();
    emit(&json!({ "pairs": systems, "audit_failures": failures }))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(internal(anyhow!("coset audit failed: {}", failures.join("; "))))
    }
}

fn cmd_decompose(path: &Path) -> Outcome {
    let (s, _) = load(path)?;
    let k = decompose::kimura(&s).map_err(internal)?;
    let sections = decompose::find_lattice_section(&s).map_err(internal)?;
    let diamonds = decompose::skew_diamonds(&s).map_err(internal)?;
    emit(&json!({ "kimura": k, "sections": sections, "diamonds": diamonds }))
}

/// Catalog for one order, through the cache directory when one is configured.
fn catalog_for(order: usize, oracle: bool, workers: usize) -> Result<Catalog, Failure> {
    let cache = std::env::var_os("SKEWLAT_CACHE_DIR")
        .map(PathBuf::from)
        .map(|d| d.join(format!("order{order}-{}", if oracle { "oracle" } else { "pruned" })));
    if let Some(dir) = &cache {
        if dir.join("index.json").is_file() {
            match Catalog::load(dir) {
                Ok(c) => return Ok(c),
                Err(e) => eprintln!("ignoring cache {}: {e}", dir.display()),
            }
        }
    }
    let catalog = if oracle {
        enumerate::naive_oracle(order)
    } else {
        enumerate::enumerate(order, workers)
    }
    .map_err(usage)?;
    if let Some(dir) = &cache {
        if let Err(e) = catalog.save(dir) {
            eprintln!("could not write cache {}: {e}", dir.display());
        }
    }
    Ok(catalog)
}

fn cmd_enumerate(order: usize, oracle: bool, workers: usize, out: Option<PathBuf>) -> Outcome {
    let catalog = catalog_for(order, oracle, workers)?;
    if let Some(dir) = &out {
        catalog.save(dir).map_err(usage)?;
    }
    let algebras: Vec<Value> = catalog
        .algebras
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let report = varieties::classify(s, None).expect("registry predicates");
            json!({
                "file": format!("order{order}-{i:04}.json"),
                "fingerprint": report.fingerprint(),
                "algebra": AlgebraFile::from_algebra(s),
            })
        })
        .collect();
    emit(&json!({
        "order": order,
        "provenance": catalog.provenance,
        "count": catalog.len(),
        "algebras": algebras,
    }))?;
    eprintln!("order  count");
    eprintln!("{order:>5}  {:>5}", catalog.len());
    Ok(())
}

fn block_param(params: &Value, key: &str, rows: usize, cols: usize) -> Result<Block, Failure> {
    match params.get(key) {
        None => Ok(vec![vec![0; cols]; rows]),
        Some(v) => serde_json::from_value(v.clone())
            .with_context(|| format!("parameter {key}"))
            .map_err(usage),
    }
}

fn cmd_matrix(p: u32, construction: Construction, blocks: &[usize], params: Option<String>) -> Outcome {
    let &[n1, n2, n3] = blocks else {
        return Err(usage(anyhow!("--blocks takes three sizes, got {}", blocks.len())));
    };
    let d = BlockDims([n1, n2, n3]);
    let params: Value = match params {
        Some(text) => serde_json::from_str(&text).context("--params").map_err(usage)?,
        None => json!({}),
    };
    let built = match construction {
        Construction::Right => matrix::primitive_right_handed(
            p,
            d,
            (block_param(&params, "a13", n1, n3)?, block_param(&params, "a23", n2, n3)?),
            (block_param(&params, "b12", n1, n2)?, block_param(&params, "b13", n1, n3)?),
        ),
        Construction::Left => matrix::primitive_left_handed(
            p,
            d,
            (block_param(&params, "a31", n3, n1)?, block_param(&params, "a32", n3, n2)?),
            (block_param(&params, "b21", n2, n1)?, block_param(&params, "b31", n3, n1)?),
        ),
    };
    let ms = match built {
        Ok(ms) => ms,
        Err(e @ (MatrixError::NotASkewLattice(_) | MatrixError::ClosureExceedsCap { .. } | MatrixError::NotPrimitive)) => {
            emit(&json!({ "error": e.to_string() }))?;
            eprintln!("{e}");
            return Err(Failure::Finding);
        }
        Err(e) => return Err(usage(e)),
    };
    let report = matrix::matrix_coset_remark_check(&ms).map_err(internal)?;
    let factorizations: Vec<Value> = ms
        .elements
        .iter()
        .map(|m| {
            matrix::triangular_factorization(m, d)
                .map(|(l, r)| json!({ "left": l, "right": r }))
                .map_err(internal)
        })
        .collect::<Result<_, _>>()?;
    let discordant = report.is_discordant();
    emit(&json!({
        "lattice": ms,
        "factorizations": factorizations,
        "coset_criteria": summarize(&report),
    }))?;
    eprintln!("{} elements, coset criteria {}", ms.elements.len(), verdict_name(&report.verdict));
    if discordant {
        Err(Failure::Finding)
    } else {
        Ok(())
    }
}

fn verdict_name(v: &ReportVerdict) -> &'static str {
    match v {
        ReportVerdict::Concordant => "concordant",
        ReportVerdict::Discordant { .. } => "discordant",
        ReportVerdict::NotApplicable => "not-applicable",
    }
}

/// Report without its records: verdict, counts and observations.
fn summarize(r: &ConcordanceReport) -> Value {
    let applicable = r.records.iter().filter(|x| x.applicable).count();
    let mut observations: Vec<(&str, bool)> = Vec::new();
    for o in r.observations().filter(|o| o.applicable) {
        match observations.iter_mut().find(|(c, _)| *c == o.clause) {
            Some(entry) => entry.1 &= o.agrees(),
            None => observations.push((o.clause, o.agrees())),
        }
    }
    let mut v = json!({
        "theorem": r.theorem,
        "algebra": r.algebra,
        "verdict": verdict_name(&r.verdict),
        "records": r.records.len(),
        "applicable": applicable,
        "observations": observations.into_iter().map(|(c, a)| json!({ "clause": c, "holds": a })).collect::<Vec<_>>(),
    });
    if let ReportVerdict::Discordant { witness } = &r.verdict {
        v["witness"] = serde_json::to_value(witness).expect("record serializes");
    }
    v
}

fn catalogs_in(dir: &Path) -> Result<Vec<Catalog>, Failure> {
    if dir.join("index.json").is_file() {
        return Ok(vec![Catalog::load(dir).map_err(usage)?]);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(usage)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("index.json").is_file())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(usage(anyhow!("no catalog under {}", dir.display())));
    }
    let mut out: Vec<Catalog> = subdirs.iter().map(|d| Catalog::load(d).map_err(usage)).collect::<Result<_, _>>()?;
    out.sort_by_key(|c| c.order);
    Ok(out)
}

fn cmd_verify(
    theorems: Option<Vec<String>>,
    catalog: Option<PathBuf>,
    order: Option<usize>,
    workers: usize,
    full: bool,
) -> Outcome {
    let catalogs = match (catalog, order) {
        (Some(dir), _) => catalogs_in(&dir)?,
        (None, order) => {
            let max = order.unwrap_or(4);
            if max == 0 || max > MAX_SEARCH_ORDER {
                return Err(usage(anyhow!("--order must be in 1..={MAX_SEARCH_ORDER}")));
            }
            (1..=max).map(|k| catalog_for(k, false, workers)).collect::<Result<_, _>>()?
        }
    };
    let labeled: Vec<(String, SkewLattice)> = catalogs
        .iter()
        .flat_map(|c| {
            c.algebras
                .iter()
                .enumerate()
                .map(move |(i, s)| (format!("order{}-{i:04}", c.order), s.clone()))
        })
        .collect();
    let names: Vec<String> = theorems.unwrap_or_else(|| THEOREMS.iter().map(|t| t.0.to_string()).collect());
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let reports = laws::verify_grid(&labeled, &refs, workers).map_err(usage)?;
    if full {
        emit(&reports)?;
    } else {
        emit(&reports.iter().map(summarize).collect::<Vec<_>>())?;
    }
    eprintln!("{:<16} {:>11} {:>11} {:>15}", "theorem", "concordant", "discordant", "not-applicable");
    for name in &refs {
        let mut counts = [0usize; 3];
        for r in reports.iter().filter(|r| r.theorem == *name) {
            counts[match r.verdict {
                ReportVerdict::Concordant => 0,
                ReportVerdict::Discordant { .. } => 1,
                ReportVerdict::NotApplicable => 2,
            }] += 1;
        }
        eprintln!("{name:<16} {:>11} {:>11} {:>15}", counts[0], counts[1], counts[2]);
    }
    for r in reports.iter().filter(|r| r.is_discordant()) {
        if let ReportVerdict::Discordant { witness } = &r.verdict {
            eprintln!("discordant: {} on {}: {} at {:?}", r.theorem, r.algebra, witness.clause, witness.elements);
        }
    }
    if reports.iter().any(ConcordanceReport::is_discordant) {
        Err(Failure::Finding)
    } else {
        Ok(())
    }
}

fn cmd_export(path: &Path, format: Format) -> Outcome {
    let file = read_file(path)?;
    let s = file.to_algebra().map_err(usage)?;
    let mut out = io::stdout().lock();
    let text = match format {
        Format::Json => file.to_json(),
        Format::Dot => greens::eggbox_dot(&s, file.names.as_deref()),
    };
    written(writeln!(out, "{}", text.trim_end()))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Classify { file, predicates, assert } => cmd_classify(&file, predicates, assert),
        Command::Greens { file } => cmd_greens(&file),
        Command::Cosets { file } => cmd_cosets(&file),
        Command::Decompose { file } => cmd_decompose(&file),
        Command::Enumerate { order, oracle, workers, out } => cmd_enumerate(order, oracle, workers as usize, out),
        Command::Matrix { p, construction, blocks, params } => cmd_matrix(p, construction, &blocks, params),
        Command::Verify { theorems, catalog, order, workers, full } => {
            cmd_verify(theorems, catalog, order, workers as usize, full)
        }
        Command::Export { file, format } => cmd_export(&file, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Finding) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}
