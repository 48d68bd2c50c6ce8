use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use grasshopper::store::{read_dump, scan_seek_samples, SortedKeys};
use grasshopper::Matcher;
use serde_json::{json, Value};

use crate::analyze::analyze;
use crate::bench::{run_matrix, BenchMatrix, MatrixCell};
use crate::dataset::{load_layout, save_dataset, Dataset, DatasetMeta, RatioRecord};
use crate::dsl::parse;
use crate::generate::{generate, ValueDistribution};
use crate::ingest::ingest;
use crate::runner::{Executor, StrategyArg, DEFAULT_OPS, DEFAULT_TRIALS};

#[derive(Debug, Parser)]
#[command(
    name = "grasshopper",
    version,
    about = "Filtered scans over composite keys"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random dataset for a schema.
    Generate(GenerateArgs),
    /// Encode CSV rows into a dataset.
    Ingest(IngestArgs),
    /// Run one filter.
    Query(QueryArgs),
    /// Compare strategies over a matrix of filters.
    Bench(BenchArgs),
    /// Report reduction, locus geometry and thresholds of a filter.
    Analyze(AnalyzeArgs),
    /// Measure the scan-to-seek cost ratio of a dataset and record it.
    MeasureR(MeasureArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Jump threshold for `hopper`; computed from the data when absent.
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Split the key space into this many equal ranges (a power of two).
    #[arg(long)]
    pub partitions: Option<u32>,
    /// Worker threads for partitioned runs; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Scan-to-seek cost ratio; overrides the recorded or measured value.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub rows: usize,
    /// uniform, zipf:S or clustered:K
    #[arg(long, default_value = "uniform")]
    pub distribution: ValueDistribution,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// CSV file whose header names the schema dimensions.
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// e.g. `X=5 AND Y IN [1,3] AND Z IN {2,7}`
    pub filter: String,
    /// Count matches without collecting keys.
    #[arg(long)]
    pub count_only: bool,
    /// Decoded rows to show.
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
    /// Write the report as JSON (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON matrix file; overrides the template flags.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// `point:DIM`, `range:DIM:LEN` or a literal filter; repeatable.
    /// Defaults to a point template per dimension.
    #[arg(long)]
    pub template: Vec<String>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "crawler,frog,hopper,auto"
    )]
    pub strategies: Vec<StrategyArg>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Filters per template at most.
    #[arg(long, default_value_t = 64)]
    pub max_filters: usize,
    /// Filters per cell whose key bags are compared across strategies.
    #[arg(long, default_value_t = 8)]
    pub bag_checks: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub schema: PathBuf,
    /// Adds store-dependent thresholds and the plan.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<f64>,
    pub filter: String,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_OPS)]
    pub ops: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Record this value instead of measuring.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Successful completion, or a bench whose strategies disagreed.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Diverged,
}

fn emit_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if path == Path::new("-") {
        println!("{text}");
    } else {
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Generate(a) => {
            let layout = load_layout(&a.schema)?;
            let keys = generate(&layout, a.rows, a.distribution, a.seed)?;
            let n = save_dataset(&a.data, layout.width(), keys, &DatasetMeta::default())?;
            println!(
                "wrote {n} keys ({} draws, {}) to {}",
                a.rows,
                a.distribution,
                a.data.display()
            );
        }
        Command::Ingest(a) => {
            let layout = load_layout(&a.schema)?;
            let file =
                File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
            let (keys, dictionaries) = ingest(file, &layout)?;
            let rows = keys.len();
            let meta = DatasetMeta {
                ratio: None,
                dictionaries,
            };
            let n = save_dataset(&a.data, layout.width(), keys, &meta)?;
            println!(
                "ingested {rows} rows as {n} distinct keys into {}",
                a.data.display()
            );
            for (dim, values) in &meta.dictionaries {
                println!("  dictionary {dim}: {} values", values.len());
            }
        }
        Command::Query(a) => query(a)?,
        Command::Bench(a) => return bench(a),
        Command::Analyze(a) => {
            let layout = load_layout(&a.schema)?;
            let q = parse(&a.filter)?;
            let dataset = a
                .data
                .as_deref()
                .map(|d| Dataset::open(&a.schema, d))
                .transpose()?;
            let with_r = match &dataset {
                Some(ds) => Some((ds, Executor::new(ds, a.r, None, None, 1)?.r)),
                None => None,
            };
            let report = analyze(&layout, &q, with_r)?;
            emit_json(a.json.as_deref().unwrap_or(Path::new("-")), &report)?;
        }
        Command::MeasureR(a) => {
            let (width, keys) = read_dump(&a.data, true)?;
            let store = SortedKeys::from_sorted(width, keys)?;
            let record = match a.r {
                Some(r) if r > 0.0 && r.is_finite() => RatioRecord {
                    r,
                    stddev: 0.0,
                    ops: 0,
                    trials: 0,
                    samples: vec![],
                    source: "override".into(),
                },
                Some(r) => bail!("scan-to-seek ratio must be positive, got {r}"),
                None => {
                    if a.ops == 0 || a.trials == 0 {
                        bail!("--ops and --trials must be positive");
                    }
                    let samples = scan_seek_samples(&store, a.ops, a.trials)
                        .context("measuring needs at least two keys")?;
                    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                        / samples.len() as f64;
                    RatioRecord {
                        r: mean,
                        stddev: var.sqrt(),
                        ops: a.ops,
                        trials: a.trials,
                        samples,
                        source: "measured".into(),
                    }
                }
            };
            let mut meta = DatasetMeta::load(&a.data)?;
            meta.ratio = Some(record.clone());
            meta.save(&a.data)?;
            println!(
                "R = {:.4} (stddev {:.4}, {})",
                record.r, record.stddev, record.source
            );
            if let Some(p) = &a.json {
                emit_json(p, &serde_json::to_value(&record)?)?;
            }
        }
    }
    Ok(Status::Ok)
}

fn query(a: QueryArgs) -> Result<()> {
    let ds = Dataset::open(&a.data.schema, &a.data.data)?;
    let q = parse(&a.filter)?;
    let matcher = Matcher::from_filters(ds.layout.width(), &q.to_filters(&ds.layout)?)?;
    let exec = Executor::new(
        &ds,
        a.run.r,
        a.run.threshold,
        a.run.partitions,
        a.run.parallel,
    )?;
    let report = exec.run(&matcher, a.run.strategy, !a.count_only)?;
    let sample: Vec<Value> = report
        .keys
        .iter()
        .take(a.limit)
        .map(|k| ds.decode(*k).map(Value::Object))
        .collect::<Result<_>>()?;

    println!("filter: {q}");
    println!(
        "strategy: {}{}",
        report.strategy,
        report
            .threshold
            .map_or(String::new(), |t| format!(" (threshold {t})"))
    );
    println!("rows: {}", report.result_count);
    let c = report.counters;
    println!(
        "ops: seek={} scan={} get={} match={} mismatch={} hint={}",
        c.n_seek, c.n_scan, c.n_get, c.n_match, c.n_mismatch, c.n_hint
    );
    println!(
        "examined={} jumps={} crawls={} R={:.4} wall={}us",
        report.examined,
        report.jumps,
        report.crawls,
        exec.r,
        report.wall_ns / 1000
    );
    for row in &sample {
        println!("  {row}");
    }
    if let Some(p) = &a.json {
        let mut v: Value = serde_json::from_str(&report.to_json())?;
        v["filter"] = json!(q.to_string());
        v["r"] = json!(exec.r);
        v["keys"] = report.keys.iter().take(a.limit).map(|k| json!(k)).collect();
        v["sample"] = Value::from(sample);
        emit_json(p, &v)?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<Status> {
    let ds = Dataset::open(&a.data.schema, &a.data.data)?;
    let matrix = match &a.matrix {
        Some(p) => serde_json::from_str::<BenchMatrix>(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .with_context(|| format!("parsing matrix {}", p.display()))?,
        None if a.template.is_empty() => BenchMatrix::all_points(&ds.layout, &a.strategies, a.reps),
        None => BenchMatrix {
            cells: a
                .template
                .iter()
                .map(|t| MatrixCell {
                    template: t.clone(),
                    strategies: a.strategies.clone(),
                    repetitions: a.reps,
                })
                .collect(),
        },
    };
    let exec = Executor::new(
        &ds,
        a.run.r,
        a.run.threshold,
        a.run.partitions,
        a.run.parallel,
    )?;
    let report = run_matrix(&exec, &matrix, a.max_filters, a.bag_checks, a.seed)?;

    println!(
        "{:<24} {:<8} {:>7} {:>10} {:>10} {:>10} {:>10} {:>14}",
        "template", "strategy", "filters", "rows", "seeks", "scans", "hints", "wall_us"
    );
    for r in &report.rows {
        println!(
            "{:<24} {:<8} {:>7} {:>10} {:>10} {:>10} {:>10} {:>14.1}",
            r.template,
            r.strategy,
            r.filters,
            r.result_count,
            r.n_seek,
            r.n_scan,
            r.n_hint,
            r.wall_ns / 1000.0
        );
    }
    if let Some(p) = &a.csv {
        let mut w =
            csv::Writer::from_path(p).with_context(|| format!("writing {}", p.display()))?;
        for r in &report.rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    if let Some(p) = &a.json {
        emit_json(p, &serde_json::to_value(&report)?)?;
    }
    if report.divergences.is_empty() {
        return Ok(Status::Ok);
    }
    let mut err = std::io::stderr();
    for d in &report.divergences {
        writeln!(
            err,
            "divergence in {}: {}: {}",
            d.template, d.filter, d.detail
        )?;
    }
    Ok(Status::Diverged)
}
