//! The `csl` command-line tool.
//!
//! Every subcommand's arguments double as its run configuration: they are
//! validated before any computation, may be overridden by `--config <json>`
//! and are embedded verbatim in every file the command writes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dataset::{
    export_csv, generate_planted, import_csv, load, save, split_indices, CsvSchema, LabeledDataset, Overlap,
    PlantedConcept, PlantedSpec, SplitMode, SplitSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{estimate, read_subspace, write_subspace, EstimatorKind, EstimatorOptions};
use crate::evaluation::{
    evaluate_subspace, reports_to_csv, reports_to_json, reports_to_svg, run_protocol, sweep_dimension, ConceptPair,
    ProtocolConfig, ReportEntry, Splits,
};
use crate::probing::TrainConfig;
use crate::rng::{seed_from_env, DEFAULT_SEED};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "csl", version, about = "Estimate and evaluate linear concept subspaces")]
struct Cli {
    /// JSON object whose keys override the command's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a CSV file into a dataset container.
    Convert(ConvertArgs),
    /// Split a container into space-train, probe-train and test.
    Split(SplitArgs),
    /// Generate a planted synthetic dataset.
    Generate(GenerateArgs),
    /// Fit one estimator and write a `.csub` subspace artifact.
    Estimate(EstimateArgs),
    /// Run the four-metric protocol.
    Evaluate(EvaluateArgs),
    /// LEACE dimension sweep.
    Sweep(SweepArgs),
    /// Write a container back out as CSV.
    DumpCsv(DumpArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ConvertArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Feature columns; defaults to every non-label column.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    features: Vec<String>,
    /// Label columns, one concept each.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SplitArgs {
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// space-train, probe-train and test fractions.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.25")]
    fractions: Vec<f64>,
    /// Stratify on this concept (default: the first one).
    #[arg(long)]
    stratify_by: Option<String>,
    /// Keep the label sets of space-train and the other splits disjoint.
    #[arg(long, conflicts_with = "stratify_by")]
    disjoint_label: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Where to write the ground-truth bases (JSON); defaults to `<out>.bases.json`.
    #[arg(long)]
    bases: Option<PathBuf>,
    /// Planted spec as JSON; replaces the shape flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 4)]
    signal_dim: usize,
    /// `name:classes:mean_scale:noise_scale`, repeatable.
    #[arg(long = "concept")]
    #[serde(default)]
    concepts: Vec<String>,
    /// `orthogonal`, `random` or `shared:<dims>`.
    #[arg(long, default_value = "orthogonal")]
    overlap: String,
    /// Drop all isotropic noise.
    #[arg(long)]
    #[serde(default)]
    noiseless: bool,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize)]
struct ProbeArgs {
    #[arg(long, default_value_t = 1e-4)]
    ridge: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
}

impl ProbeArgs {
    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig { ridge: self.ridge, max_iter: self.max_iter, grad_tol: self.grad_tol, seed }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct EstimateArgs {
    /// Space-train container.
    input: PathBuf,
    #[arg(long)]
    estimator: String,
    #[arg(long)]
    concept: String,
    /// LEACE subspace dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// RAND seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    probe: ProbeArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct DataArgs {
    #[arg(long)]
    space_train: Option<PathBuf>,
    #[arg(long)]
    probe_train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Single container; with `--overfit` it plays all three roles.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    overfit: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct OutputArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Any of `json`, `csv`, `svg`.
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    formats: Vec<String>,
    /// Worker threads; output is identical for any value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Estimators to fit on space-train (default: all six, or none when
    /// artifacts are given).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    estimators: Vec<String>,
    /// Pre-computed `.csub` subspaces to evaluate.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    artifacts: Vec<PathBuf>,
    /// `concept:other` pairs.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pairs: Vec<String>,
    /// LEACE dimensions.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    dims: Vec<usize>,
    /// Run a LEACE dimension sweep over these dimensions instead.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    sweep_dims: Vec<usize>,
    /// RAND seeds (default: five consecutive seeds from `CSL_SEED` or 0).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    seeds: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pairs: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    dims: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct DumpArgs {
    input: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// The exact configuration of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub args: Value,
}

impl RunConfig {
    fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("run config serializes")
    }

    /// Provenance string for containers and artifacts.
    fn provenance(&self, parent: Option<&str>) -> String {
        let mut v = json!({ "tool": env!("CARGO_PKG_NAME"), "version": VERSION, "run_config": self.to_value() });
        if let Some(p) = parent {
            let parent = serde_json::from_str::<Value>(p).unwrap_or_else(|_| Value::String(p.to_string()));
            v["parent"] = parent;
        }
        v.to_string()
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

/// Apply `--config` overrides to a parsed argument struct.
fn resolve<T: Serialize + for<'de> Deserialize<'de>>(args: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(args) };
    let text = fs::read_to_string(path)?;
    let over: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if !over.is_object() {
        return Err(Error::Config(format!("{}: config must be a JSON object", path.display())));
    }
    let mut base = serde_json::to_value(args)?;
    merge(&mut base, over);
    serde_json::from_value(base).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run_config<T: Serialize>(command: &str, args: &T) -> RunConfig {
    RunConfig {
        command: command.to_string(),
        version: VERSION.to_string(),
        args: serde_json::to_value(args).expect("args serialize"),
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn describe(ds: &LabeledDataset) -> String {
    let concepts: Vec<String> = ds.concepts().iter().map(|c| format!("{}({})", c.name(), c.num_classes())).collect();
    format!("n={} d={} concepts={}", ds.n(), ds.d(), concepts.join(","))
}

fn cmd_convert(args: ConvertArgs, out: &mut dyn Write) -> Result<()> {
    if args.labels.is_empty() {
        return Err(Error::Config("--labels is required".into()));
    }
    let rc = run_config("convert", &args);
    let schema = CsvSchema { features: args.features.clone(), labels: args.labels.clone() };
    let file = File::open(&args.input)?;
    let ds = import_csv(io::BufReader::new(file), &schema, &rc.provenance(None))?;
    save(&ds, &args.out)?;
    writeln!(out, "{}", describe(&ds))?;
    Ok(())
}

fn cmd_dump(args: DumpArgs, out: &mut dyn Write) -> Result<()> {
    let rc = run_config("dump-csv", &args);
    let ds = load(&args.input)?;
    let header = format!("# {} {} {}\n", env!("CARGO_PKG_NAME"), VERSION, rc.to_value());
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(header.as_bytes())?;
            export_csv(&ds, &mut w)?;
            w.flush()?;
        }
        None => {
            out.write_all(header.as_bytes())?;
            export_csv(&ds, out)?;
        }
    }
    Ok(())
}

fn sha256_indices(idx: &[usize]) -> String {
    let mut h = Sha256::new();
    for &i in idx {
        h.update((i as u64).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn label_set(ds: &LabeledDataset, concept: &str, rows: &[usize]) -> Result<std::collections::BTreeSet<u32>> {
    let labels = ds.labels(concept)?;
    Ok(rows.iter().map(|&i| labels[i]).collect())
}

fn cmd_split(mut args: SplitArgs, out: &mut dyn Write) -> Result<()> {
    let seed = *args.seed.get_or_insert_with(|| seed_from_env(DEFAULT_SEED));
    let fractions: [f64; 3] = args
        .fractions
        .clone()
        .try_into()
        .map_err(|_| Error::Config("--fractions needs exactly three values".into()))?;
    let mode = match &args.disjoint_label {
        Some(c) => SplitMode::DisjointLabel { concept: c.clone() },
        None => SplitMode::RandomStratified { stratify_by: args.stratify_by.clone() },
    };
    let spec = SplitSpec { seed, mode, fractions, source: vec![args.input.display().to_string()] };
    spec.validate()?;
    let rc = run_config("split", &args);
    let ds = load(&args.input)?;
    let idx = split_indices(&ds, &spec)?;
    ensure_dir(&args.out_dir)?;

    let names = ["space_train", "probe_train", "test"];
    let mut outputs = BTreeMap::new();
    let mut hashes = BTreeMap::new();
    let mut sizes = BTreeMap::new();
    for (name, rows) in names.iter().zip(idx.parts()) {
        let mut part = ds.subset(rows)?;
        part.set_provenance(rc.provenance(Some(ds.provenance())));
        let path = args.out_dir.join(format!("{name}.csld"));
        save(&part, &path)?;
        outputs.insert(*name, path.display().to_string());
        hashes.insert(*name, sha256_indices(rows));
        sizes.insert(*name, rows.len());
    }
    let mut manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": VERSION,
        "run_config": rc.to_value(),
        "spec": spec,
        "sizes": sizes,
        "index_sha256": hashes,
        "outputs": outputs,
    });
    if let SplitMode::DisjointLabel { concept } = &spec.mode {
        let space = label_set(&ds, concept, &idx.space_train)?;
        let probe = label_set(&ds, concept, &idx.probe_train)?;
        let test = label_set(&ds, concept, &idx.test)?;
        let disjoint = space.is_disjoint(&probe) && space.is_disjoint(&test);
        if !disjoint {
            return Err(Error::Numerical(format!("split of `{concept}` is not label-disjoint")));
        }
        manifest["label_sets_disjoint"] = json!(disjoint);
    }
    write_json(&args.out_dir.join("split_manifest.json"), &manifest)?;
    writeln!(out, "space_train={} probe_train={} test={}", idx.space_train.len(), idx.probe_train.len(), idx.test.len())?;
    Ok(())
}

fn parse_overlap(s: &str) -> Result<Overlap> {
    match s {
        "orthogonal" => Ok(Overlap::Orthogonal),
        "random" => Ok(Overlap::Random),
        other => match other.strip_prefix("shared:").map(str::parse) {
            Some(Ok(dims)) => Ok(Overlap::Shared { dims }),
            _ => Err(Error::Config(format!("unknown overlap `{s}`"))),
        },
    }
}

fn parse_concept(s: &str, index: usize) -> Result<PlantedConcept> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("concept spec `{s}` must be name:classes:mean_scale:noise_scale"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(PlantedConcept::new(
        parts[0],
        parts[1].parse().map_err(|_| bad())?,
        index as u64 + 1,
        parts[2].parse().map_err(|_| bad())?,
        parts[3].parse().map_err(|_| bad())?,
    ))
}

fn cmd_generate(mut args: GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let seed = *args.seed.get_or_insert_with(|| seed_from_env(DEFAULT_SEED));
    let mut spec = match &args.spec {
        Some(path) => serde_json::from_str::<PlantedSpec>(&fs::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => {
            if args.concepts.is_empty() {
                return Err(Error::Config("at least one --concept is required".into()));
            }
            PlantedSpec {
                dim: args.dim,
                signal_dim: args.signal_dim,
                concepts: args.concepts.iter().enumerate().map(|(i, c)| parse_concept(c, i)).collect::<Result<_>>()?,
                overlap: parse_overlap(&args.overlap)?,
            }
        }
    };
    if args.noiseless {
        for c in &mut spec.concepts {
            c.noise_scale = 0.0;
        }
    }
    spec.validate()?;
    let rc = run_config("generate", &args);
    let (mut ds, bases) = generate_planted(&spec, args.n, seed)?;
    let prov = rc.provenance(Some(ds.provenance()));
    ds.set_provenance(prov);
    save(&ds, &args.out)?;
    let bases_path = args.bases.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".bases.json");
        PathBuf::from(p)
    });
    let bases_json: BTreeMap<&str, Vec<Vec<f64>>> = spec
        .concepts
        .iter()
        .zip(&bases)
        .map(|(c, b)| (c.name.as_str(), b.row_iter().map(|r| r.iter().copied().collect()).collect()))
        .collect();
    write_json(
        &bases_path,
        &json!({ "tool": env!("CARGO_PKG_NAME"), "version": VERSION, "run_config": rc.to_value(), "spec": spec, "bases": bases_json }),
    )?;
    writeln!(out, "{}", describe(&ds))?;
    Ok(())
}

fn cmd_estimate(mut args: EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let kind: EstimatorKind = args.estimator.parse()?;
    if kind == EstimatorKind::Rand {
        args.seed.get_or_insert_with(|| seed_from_env(DEFAULT_SEED));
    }
    let train = args.probe.train_config(args.seed.unwrap_or(DEFAULT_SEED));
    train.validate()?;
    let rc = run_config("estimate", &args);
    let ds = load(&args.input)?;
    let opts = EstimatorOptions { dim: args.dim, seed: args.seed, train };
    let s = estimate(kind, &ds, &args.concept, &opts)?;
    write_subspace(&s, &rc.provenance(Some(ds.provenance())), &args.out)?;
    writeln!(out, "estimator={} concept={} dim={} rank={} oblique={}", kind, s.concept, s.dim(), s.rank(), s.projector().is_oblique())?;
    Ok(())
}

struct LoadedSplits {
    space_train: Option<LabeledDataset>,
    probe_train: LabeledDataset,
    test: Option<LabeledDataset>,
}

impl LoadedSplits {
    fn load(args: &DataArgs, need_space: bool) -> Result<Self> {
        if args.overfit {
            let path = args.data.as_ref().or(args.space_train.as_ref()).ok_or_else(|| {
                Error::Config("--overfit needs --data (or --space-train)".into())
            })?;
            return Ok(LoadedSplits { space_train: None, probe_train: load(path)?, test: None });
        }
        let need = |p: &Option<PathBuf>, flag: &str| -> Result<PathBuf> {
            p.clone().ok_or_else(|| Error::Config(format!("{flag} is required (or use --overfit --data)")))
        };
        let probe_train = load(need(&args.probe_train, "--probe-train")?)?;
        let test = load(need(&args.test, "--test")?)?;
        let space_train = if need_space { Some(load(need(&args.space_train, "--space-train")?)?) } else { None };
        Ok(LoadedSplits { space_train, probe_train, test: Some(test) })
    }

    fn splits(&self) -> Result<Splits<'_>> {
        let probe = &self.probe_train;
        Splits::new(self.space_train.as_ref().unwrap_or(probe), probe, self.test.as_ref().unwrap_or(probe))
    }
}

fn parse_pairs(pairs: &[String]) -> Result<Vec<ConceptPair>> {
    if pairs.is_empty() {
        return Err(Error::Config("--pairs is required (concept:other,...)".into()));
    }
    pairs
        .iter()
        .map(|p| match p.split_once(':') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(ConceptPair::new(a, b)),
            _ => Err(Error::Config(format!("pair `{p}` must look like concept:other"))),
        })
        .collect()
}

fn check_formats(formats: &[String]) -> Result<()> {
    if let Some(f) = formats.iter().find(|f| !matches!(f.as_str(), "json" | "csv" | "svg")) {
        return Err(Error::Config(format!("unknown output format `{f}`")));
    }
    Ok(())
}

fn emit_reports(mut entries: Vec<ReportEntry>, rc: &RunConfig, output: &OutputArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = rc.to_value();
    for e in &mut entries {
        e.set_run_config(cfg.clone());
    }
    ensure_dir(&output.out_dir)?;
    for f in &output.formats {
        let path = output.out_dir.join(format!("report.{f}"));
        match f.as_str() {
            "json" => fs::write(&path, reports_to_json(&entries)?)?,
            "csv" => {
                let mut w = BufWriter::new(File::create(&path)?);
                reports_to_csv(&entries, &cfg, &mut w)?;
                w.flush()?;
            }
            "svg" => fs::write(&path, reports_to_svg(&entries, &cfg.to_string()))?,
            _ => unreachable!("formats validated"),
        }
    }
    let mut code = 0;
    writeln!(out, "{:<6} {:<24} {:>6} {:>9} {:>8} {:>7} {:>13}", "est", "pair", "dim", "retention", "leakage", "purity", "interference")?;
    for e in &entries {
        match e {
            ReportEntry::Ok(r) => writeln!(
                out,
                "{:<6} {:<24} {:>6} {:>9.1} {:>8.1} {:>7.1} {:>13.1}",
                r.estimator.as_str(),
                format!("{}:{}", r.concept, r.other_concept),
                r.dim.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
                r.metrics.retention,
                r.metrics.leakage,
                r.metrics.purity,
                r.metrics.interference
            )?,
            ReportEntry::Failed(f) => {
                writeln!(out, "{:<6} {:<24} failed: {}", f.estimator.as_str(), format!("{}:{}", f.concept, f.other_concept), f.error.message)?;
                eprintln!("{}", json!({ "error": f.error.kind, "message": f.error.message, "exit_code": f.error.exit_code, "estimator": f.estimator }));
                if code == 0 {
                    code = f.error.exit_code;
                }
            }
        }
    }
    Ok(code)
}

fn resolve_seeds(seeds: &mut Vec<u64>) {
    if seeds.is_empty() {
        let base = seed_from_env(DEFAULT_SEED);
        *seeds = (0..5).map(|i| base + i).collect();
    }
}

fn cmd_evaluate(mut args: EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    check_formats(&args.output.formats)?;
    let pairs = parse_pairs(&args.pairs)?;
    if !args.sweep_dims.is_empty() {
        let sweep = SweepArgs {
            data: args.data.clone(),
            pairs: args.pairs.clone(),
            dims: args.sweep_dims.clone(),
            probe: args.probe,
            output: args.output.clone(),
        };
        let rc = run_config("evaluate", &args);
        return run_sweep(&sweep, &pairs, &rc, out);
    }
    let estimators: Vec<EstimatorKind> = if args.estimators.is_empty() && args.artifacts.is_empty() {
        EstimatorKind::ALL.to_vec()
    } else {
        args.estimators.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    args.estimators = estimators.iter().map(|k| k.to_string()).collect();
    if estimators.contains(&EstimatorKind::Rand) {
        resolve_seeds(&mut args.seeds);
    }
    let probe = args.probe.train_config(args.seeds.first().copied().unwrap_or(DEFAULT_SEED));
    probe.validate()?;
    if args.output.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let rc = run_config("evaluate", &args);

    let data = LoadedSplits::load(&args.data, !estimators.is_empty())?;
    let splits = data.splits()?;
    let mut entries = Vec::new();
    if !estimators.is_empty() {
        let cfg = ProtocolConfig {
            estimators,
            pairs: pairs.clone(),
            dims: args.dims.clone(),
            seeds: args.seeds.clone(),
            probe,
            jobs: args.output.jobs,
        };
        entries.extend(run_protocol(&splits, &cfg)?);
    }
    for path in &args.artifacts {
        let (s, _) = read_subspace(path)?;
        let others: Vec<&ConceptPair> = pairs.iter().filter(|p| p.concept == s.concept).collect();
        if others.is_empty() {
            return Err(Error::Config(format!(
                "artifact {} is for concept `{}` but no pair starts with it",
                path.display(),
                s.concept
            )));
        }
        for pair in others {
            let outcome = evaluate_subspace(&s, splits.probe_train, splits.test, &pair.other, &probe);
            entries.push(match outcome {
                Ok(r) => ReportEntry::Ok(r),
                Err(e) => return Err(e),
            });
        }
    }
    emit_reports(entries, &rc, &args.output, out)
}

fn run_sweep(args: &SweepArgs, pairs: &[ConceptPair], rc: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let probe = args.probe.train_config(DEFAULT_SEED);
    probe.validate()?;
    if args.dims.is_empty() {
        return Err(Error::Config("sweep needs --dims".into()));
    }
    let data = LoadedSplits::load(&args.data, true)?;
    let splits = data.splits()?;
    let mut entries = Vec::new();
    for pair in pairs {
        let reports = sweep_dimension(&splits, &pair.concept, &pair.other, &args.dims, &probe, args.output.jobs)?;
        entries.extend(reports.into_iter().map(ReportEntry::Ok));
    }
    emit_reports(entries, rc, &args.output, out)
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    check_formats(&args.output.formats)?;
    let pairs = parse_pairs(&args.pairs)?;
    let rc = run_config("sweep", &args);
    run_sweep(&args, &pairs, &rc, out)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Convert(a) => cmd_convert(resolve(a, config)?, out).map(|_| 0),
        Command::Split(a) => cmd_split(resolve(a, config)?, out).map(|_| 0),
        Command::Generate(a) => cmd_generate(resolve(a, config)?, out).map(|_| 0),
        Command::Estimate(a) => cmd_estimate(resolve(a, config)?, out).map(|_| 0),
        Command::Evaluate(a) => cmd_evaluate(resolve(a, config)?, out),
        Command::Sweep(a) => cmd_sweep(resolve(a, config)?, out),
        Command::DumpCsv(a) => cmd_dump(resolve(a, config)?, out).map(|_| 0),
    }
}

/// Structured one-line error for stderr.
pub fn error_json(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }).to_string()
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}
