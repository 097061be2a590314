use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use streamclucd::dataset::LabeledData;
use streamclucd::output::{
    parse_policy, read_assignments, read_json, write_json, AssignmentWriter, ConfigEcho, ModelDump, Summary,
};
use streamclucd::reader::{read_stream, ReadOptions};
use streamclucd::schema::parse_kind_overrides;
use streamclucd::sweep::{run_sweep, write_csv, write_csv_file, Grid};
use streamclucd_core::baselines::{chunked_kmodes_stream, kmodes_fit, SqueezerModel};
use streamclucd_core::datagen::{generate, GenSpec, RNG_ALGORITHM};
use streamclucd_core::evaluation::{accuracy, DominantClass};
use streamclucd_core::{ClusterModel, ClustererConfig, LossyParams, MissingPolicy};

#[derive(Parser)]
#[command(name = "streamclucd", version, about = "One-pass clustering of categorical data streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a CSV stream with bounded-memory histograms.
    Cluster(ClusterArgs),
    /// Cluster a CSV stream with exact histograms.
    Squeezer(SqueezerArgs),
    /// Batch or chunked k-modes.
    Kmodes(KmodesArgs),
    /// Generate a synthetic labeled stream.
    Gen(GenArgs),
    /// Score an assignments file against the labels of a data file.
    Eval(EvalArgs),
    /// Run a parameter grid over a labeled data file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV file with a header line, or `-` for standard input.
    #[arg(default_value = "-")]
    input: PathBuf,
    /// Column holding class labels; excluded from clustering.
    #[arg(long)]
    labels_col: Option<String>,
    /// Attribute kinds, e.g. `age=numeric,weight=numeric`.
    #[arg(long)]
    schema: Option<String>,
    #[arg(long, default_value = "?")]
    missing_token: String,
    /// `ignore` or `value`.
    #[arg(long, default_value = "value")]
    missing_policy: String,
    /// Bin width for numeric attributes.
    #[arg(long)]
    bin_width: Option<f64>,
}

impl InputArgs {
    fn read_options(&self) -> anyhow::Result<ReadOptions> {
        let numeric = match &self.schema {
            Some(s) => parse_kind_overrides(s).map_err(anyhow::Error::msg)?,
            None => Vec::new(),
        };
        Ok(ReadOptions {
            label_column: self.labels_col.clone(),
            numeric,
            missing_token: Some(self.missing_token.clone()),
        })
    }

    fn policy(&self) -> anyhow::Result<MissingPolicy> {
        parse_policy(&self.missing_policy)
            .with_context(|| format!("--missing-policy must be `ignore` or `value`, got {:?}", self.missing_policy))
    }

    fn load(&self) -> anyhow::Result<LabeledData> {
        Ok(LabeledData::load(&self.input, &self.read_options()?, self.bin_width, self.policy()?)?)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out_assignments: Option<PathBuf>,
    /// Summary JSON; printed to stdout when omitted.
    #[arg(long)]
    out_summary: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    support: f64,
    /// Defaults to half the attribute count.
    #[arg(long)]
    sim_threshold: Option<f64>,
    #[arg(long)]
    max_clusters: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    balance_beta: f64,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    out_model: Option<PathBuf>,
}

#[derive(Args)]
struct SqueezerArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Defaults to half the attribute count.
    #[arg(long)]
    sim_threshold: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KmodesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Use chunked streaming k-modes with this chunk size.
    #[arg(long)]
    chunk_size: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    attrs: usize,
    #[arg(long)]
    classes: usize,
    /// Defaults to twice the class count.
    #[arg(long)]
    domain_size: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    purity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON; defaults to `<out>.meta.json` when --out is given.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    assignments: PathBuf,
    /// Data file the assignments were produced from.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    labels_col: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// JSON grid file.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Squeezer(a) => squeezer(a),
        Command::Kmodes(a) => kmodes(a),
        Command::Gen(a) => gen(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn assignment_sink(path: &Option<PathBuf>) -> anyhow::Result<Option<AssignmentWriter<BufWriter<std::fs::File>>>> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Some(AssignmentWriter::new(BufWriter::new(f))?))
        }
        None => Ok(None),
    }
}

fn emit_summary(summary: &Summary, path: &Option<PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => write_json(p, summary),
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, summary)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

/// Cluster indices paired with labels for records that were both labeled and
/// assigned.
#[derive(Default)]
struct Scored {
    clusters: Vec<usize>,
    labels: Vec<String>,
}

impl Scored {
    fn push(&mut self, cluster: usize, label: Option<String>) {
        if let Some(l) = label {
            self.clusters.push(cluster);
            self.labels.push(l);
        }
    }

    fn apply(&self, summary: &mut Summary) -> anyhow::Result<()> {
        if !self.labels.is_empty() {
            summary.set_quality(&accuracy(&self.clusters, &self.labels)?);
        }
        Ok(())
    }
}

fn cluster(a: ClusterArgs) -> anyhow::Result<()> {
    // range errors surface before any input is read
    LossyParams::new(a.epsilon, a.support)?;
    let policy = a.input.policy()?;
    let stream = read_stream(&a.input.input, &a.input.read_options()?)?;
    let schema = stream.schema().clone();
    let mut config = ClustererConfig::new(schema.kinds.clone(), a.epsilon, a.support)
        .with_max_clusters(a.max_clusters)
        .with_bin_width(a.input.bin_width)
        .with_missing_policy(policy)
        .with_balance_beta(a.balance_beta);
    if let Some(st) = a.sim_threshold {
        config = config.with_sim_threshold(st);
    }
    let echo = ConfigEcho::new(&config, &schema.names);
    let mut model = ClusterModel::new(config)?;
    let mut sink = assignment_sink(&a.output.out_assignments)?;
    let mut scored = Scored::default();
    let mut rejected = 0;
    let mut elapsed = Duration::ZERO;
    for row in stream {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: {e}");
                rejected += 1;
                continue;
            }
        };
        let start = Instant::now();
        let outcome = model.ingest(&row.values);
        elapsed += start.elapsed();
        match &outcome {
            Ok(o) => scored.push(o.cluster_index, row.label),
            Err(r) => {
                eprintln!("warning: line {}: {}", row.line, r.error);
                rejected += 1;
            }
        }
        if let Some(w) = sink.as_mut() {
            w.write(&outcome)?;
        }
    }
    if let Some(w) = sink {
        w.finish()?;
    }
    let mut summary = Summary {
        algorithm: "streamclucd".into(),
        config: serde_json::to_value(&echo)?,
        k: model.cluster_count(),
        n: model.total_seen(),
        rejected,
        accuracy: None,
        error: None,
        absolute_error: None,
        total_entries: model.entry_count(),
        prunings: model.total_prunings(),
        elapsed_ms: elapsed.as_secs_f64() * 1e3,
    };
    scored.apply(&mut summary)?;
    if let Some(p) = &a.out_model {
        write_json(p, &ModelDump::from_snapshot(&model.snapshot(), &schema.names))?;
    }
    emit_summary(&summary, &a.output.out_summary)
}

fn squeezer(a: SqueezerArgs) -> anyhow::Result<()> {
    let policy = a.input.policy()?;
    let stream = read_stream(&a.input.input, &a.input.read_options()?)?;
    let schema = stream.schema().clone();
    // reuse the clusterer's preprocessing so both algorithms see the same tokens
    let mut pre = ClustererConfig::new(schema.kinds.clone(), 0.5, 0.5)
        .with_bin_width(a.input.bin_width)
        .with_missing_policy(policy);
    if let Some(st) = a.sim_threshold {
        pre = pre.with_sim_threshold(st);
    }
    let st = pre.sim_threshold;
    let mut prep = ClusterModel::new(pre)?;
    let mut model = SqueezerModel::new(st);
    let mut sink = assignment_sink(&a.output.out_assignments)?;
    let mut scored = Scored::default();
    let mut rejected = 0;
    let mut elapsed = Duration::ZERO;
    for row in stream {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: {e}");
                rejected += 1;
                continue;
            }
        };
        let record = match prep.preprocess(&row.values) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: line {}: {e}", row.line);
                rejected += 1;
                continue;
            }
        };
        let start = Instant::now();
        let outcome = model.process_record(&record);
        elapsed += start.elapsed();
        match &outcome {
            Ok(o) => scored.push(o.cluster_index, row.label),
            Err(r) => {
                eprintln!("warning: line {}: {}", row.line, r.error);
                rejected += 1;
            }
        }
        if let Some(w) = sink.as_mut() {
            w.write(&outcome)?;
        }
    }
    if let Some(w) = sink {
        w.finish()?;
    }
    let mut summary = Summary {
        algorithm: "squeezer".into(),
        config: serde_json::json!({ "sim_threshold": st, "missing_policy": a.input.missing_policy }),
        k: model.cluster_count(),
        n: model.total_seen(),
        rejected,
        accuracy: None,
        error: None,
        absolute_error: None,
        total_entries: model.entry_count(),
        prunings: 0,
        elapsed_ms: elapsed.as_secs_f64() * 1e3,
    };
    scored.apply(&mut summary)?;
    emit_summary(&summary, &a.output.out_summary)
}

fn kmodes(a: KmodesArgs) -> anyhow::Result<()> {
    let data = a.input.load()?;
    let start = Instant::now();
    let fit = match a.chunk_size {
        Some(c) => chunked_kmodes_stream(&data.records, a.k, c, a.max_iter, &data.symbols)?,
        None => kmodes_fit(&data.records, a.k, a.max_iter, &data.symbols)?,
    };
    let elapsed = start.elapsed();
    if let Some(p) = &a.output.out_assignments {
        let mut w = AssignmentWriter::new(BufWriter::new(std::fs::File::create(p)?))?;
        for (i, c) in fit.assignments.iter().enumerate() {
            w.write_plain(i as u64, *c)?;
        }
        w.finish()?;
    }
    let mut summary = Summary {
        algorithm: "kmodes".into(),
        config: serde_json::json!({ "k": a.k, "max_iter": a.max_iter, "chunk_size": a.chunk_size, "iterations": fit.iterations }),
        k: fit.modes.len(),
        n: fit.assignments.len() as u64,
        rejected: 0,
        accuracy: None,
        error: None,
        absolute_error: None,
        total_entries: 0,
        prunings: 0,
        elapsed_ms: elapsed.as_secs_f64() * 1e3,
    };
    if data.has_labels() {
        summary.set_quality(&accuracy(&fit.assignments, &data.labels)?);
    }
    emit_summary(&summary, &a.output.out_summary)
}

#[derive(Serialize)]
struct GenMeta<'a> {
    rng: &'a str,
    rows: usize,
    attrs: usize,
    classes: usize,
    domain_size: usize,
    purity: f64,
    seed: u64,
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let mut spec = GenSpec::new(a.rows, a.attrs, a.classes).with_purity(a.purity).with_seed(a.seed);
    if let Some(d) = a.domain_size {
        spec = spec.with_domain_size(d);
    }
    let data = generate(&spec)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = (0..spec.attrs).map(|j| format!("a{j}")).collect();
    header.push("class".into());
    w.write_record(&header)?;
    let mut line = Vec::with_capacity(spec.attrs + 1);
    for i in 0..data.len() {
        line.clear();
        line.extend(data.row_tokens(i).map(str::to_string));
        line.push(format!("c{}", data.labels()[i]));
        w.write_record(&line)?;
    }
    w.flush()?;
    let meta_path = a.meta.clone().or_else(|| a.out.as_ref().map(|p| meta_path_for(p)));
    if let Some(p) = meta_path {
        write_json(
            &p,
            &GenMeta {
                rng: RNG_ALGORITHM,
                rows: spec.rows,
                attrs: spec.attrs,
                classes: spec.classes,
                domain_size: spec.domain_size,
                purity: spec.purity,
                seed: spec.seed,
            },
        )?;
    }
    Ok(())
}

fn meta_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct EvalOutput {
    accuracy: f64,
    error: f64,
    absolute_error: f64,
    n: u64,
    k: usize,
    per_cluster_dominant: Vec<DominantOut>,
}

#[derive(Serialize)]
struct DominantOut {
    cluster: usize,
    label: String,
    count: u64,
}

fn eval(a: EvalArgs) -> anyhow::Result<()> {
    let pairs = read_assignments(&a.assignments)?;
    let options = ReadOptions {
        label_column: Some(a.labels_col.clone()),
        ..ReadOptions::default()
    };
    let mut labels = Vec::new();
    for row in read_stream(&a.data, &options)? {
        labels.push(row.map(|r| r.label.unwrap_or_default()).ok());
    }
    let mut clusters = Vec::with_capacity(pairs.len());
    let mut matched = Vec::with_capacity(pairs.len());
    for (index, cluster) in pairs {
        match labels.get(index as usize) {
            Some(Some(l)) => {
                clusters.push(cluster);
                matched.push(l.clone());
            }
            _ => bail!("record {index} has no label in {}", a.data.display()),
        }
    }
    let q = accuracy(&clusters, &matched)?;
    let out = EvalOutput {
        accuracy: q.accuracy,
        error: q.error,
        absolute_error: q.absolute_error,
        n: q.n,
        k: q.k,
        per_cluster_dominant: q
            .per_cluster_dominant
            .into_iter()
            .map(|DominantClass { cluster, label, count }| DominantOut { cluster, label, count })
            .collect(),
    };
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &out)?;
    writeln!(stdout)?;
    Ok(())
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let grid: Grid = read_json(&a.grid).with_context(|| format!("cannot read grid {}", a.grid.display()))?;
    let data = a.input.load()?;
    let rows = run_sweep(&grid, &data)?;
    for r in &rows {
        if let Some(w) = &r.warning {
            eprintln!("warning: {} st={}: {w}", r.algorithm, r.sim_threshold);
        }
        if let Some(f) = &r.failure {
            eprintln!("warning: {} st={} failed: {f}", r.algorithm, r.sim_threshold);
        }
    }
    if let Some(p) = &a.out_csv {
        write_csv_file(&rows, p)?;
    }
    if let Some(p) = &a.out_json {
        write_json(p, &rows)?;
    }
    if a.out_csv.is_none() && a.out_json.is_none() {
        write_csv(&rows, io::stdout().lock())?;
    }
    Ok(())
}
