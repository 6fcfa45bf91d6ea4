//! Command-line front end: preprocessing, training, evaluation,
//! cross-validation, prediction and parameter sweeps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sdplstm::corpus::{load_corpus, write_corpus};
use sdplstm::depgraph::{load_dependencies, write_dependencies};
use sdplstm::pipeline::report::{cv_csv, metrics_csv, sweep_csv};
use sdplstm::pipeline::synthetic::synthetic_corpus;
use sdplstm::pipeline::{
    cross_validate, embedding_table, load_checkpoint, preprocess, save_checkpoint, sweep, train, FeatureSettings,
    InstanceSet, PipelineError, Predictor, SweepParam, TrainConfig,
};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sdplstm",
    version,
    about = "Protein interaction extraction over shortest dependency paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract shortest-path instances from a corpus and its parses.
    Preprocess(PreprocessArgs),
    /// Train a classifier on preprocessed instances.
    Train(TrainArgs),
    /// Score a model on preprocessed instances.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation from corpus and parses.
    Cv(CvArgs),
    /// Print a label and probability for every instance.
    Predict(PredictArgs),
    /// Cross-validate once per value of one parameter.
    Sweep(SweepArgs),
    /// Write a generated corpus, parses and word vectors.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    deps: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Position code width (5 to 12).
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long)]
    no_pos: bool,
    #[arg(long)]
    no_position: bool,
}

#[derive(Args)]
struct ModelInputs {
    /// Word vectors in word2vec text format, overriding `embedding_path`.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Fine-tune word vectors along with the network.
    #[arg(long)]
    tune_embeddings: bool,
    /// Tag → class file replacing the bundled PoS table.
    #[arg(long)]
    pos_table: Option<PathBuf>,
    #[command(flatten)]
    inputs: ModelInputs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    ck: PathBuf,
    #[arg(long)]
    instances: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    report: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave pairs without a path out of the counts.
    #[arg(long)]
    no_score_excluded: bool,
    #[command(flatten)]
    inputs: ModelInputs,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    deps: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV report path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    no_score_excluded: bool,
    #[arg(long)]
    pos_table: Option<PathBuf>,
    #[command(flatten)]
    inputs: ModelInputs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    ck: PathBuf,
    #[arg(long)]
    instances: PathBuf,
    #[command(flatten)]
    inputs: ModelInputs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    values: Vec<usize>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    deps: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    inputs: ModelInputs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    dim: usize,
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => TrainConfig::load(p).with_context(|| format!("config {}", p.display())),
        None => Ok(TrainConfig::default()),
    }
}

fn apply_inputs(config: &mut TrainConfig, inputs: &ModelInputs) {
    if let Some(e) = &inputs.embeddings {
        config.embedding_path = Some(e.display().to_string());
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_set(corpus: &Path, deps: &Path, features: FeatureSettings) -> Result<InstanceSet> {
    let sentences = load_corpus(corpus).with_context(|| format!("corpus {}", corpus.display()))?;
    let edges = load_dependencies(deps).with_context(|| format!("dependencies {}", deps.display()))?;
    Ok(preprocess(&sentences, &edges, features)?)
}

fn run_preprocess(a: PreprocessArgs) -> Result<()> {
    let features = FeatureSettings {
        use_pos: !a.no_pos,
        use_position: !a.no_position,
        window: a.window,
    };
    let probe = TrainConfig {
        position_window: a.window,
        ..TrainConfig::default()
    };
    probe.validate()?;
    let set = load_set(&a.corpus, &a.deps, features)?;
    set.save(&a.out)?;
    let t = set.tally();
    eprintln!(
        "{} instances, {} excluded ({} disconnected, {} too long), {} candidate pairs",
        set.instances.len(),
        set.excluded.len(),
        t.disconnected,
        t.too_long,
        set.generated()
    );
    Ok(())
}

fn run_train(a: TrainArgs) -> Result<()> {
    let mut config = load_config(a.config.as_deref())?;
    apply_inputs(&mut config, &a.inputs);
    if a.tune_embeddings {
        config.tune_embeddings = true;
    }
    if let Some(p) = &a.pos_table {
        config.pos_table = Some(p.display().to_string());
    }
    let set = InstanceSet::load(&a.instances)?;
    config.apply_features(set.features);
    let table = embedding_table(&config)?;
    let ck = train(&config, &set.instances, &table)?;
    save_checkpoint(&ck, &a.out)?;
    if let Some(last) = ck.epoch_losses.last() {
        eprintln!("trained {} epochs, final mean loss {last:.6}", ck.epoch_losses.len());
    }
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let mut ck = load_checkpoint(&a.ck)?;
    apply_inputs(&mut ck.config, &a.inputs);
    let set = InstanceSet::load(&a.instances)?;
    let table = embedding_table(&ck.config)?;
    let score_excluded = ck.config.score_excluded && !a.no_score_excluded;
    let m = Predictor::new(&ck, &table)?.evaluate(&set.instances, &set.excluded, score_excluded)?;
    let text = match a.report {
        ReportFormat::Csv => metrics_csv("all", &m),
        ReportFormat::Json => serde_json::to_string_pretty(&m)? + "\n",
    };
    emit(a.out.as_deref(), &text)
}

fn run_cv(a: CvArgs) -> Result<()> {
    let mut config = load_config(a.config.as_deref())?;
    apply_inputs(&mut config, &a.inputs);
    if let Some(k) = a.k {
        config.k_folds = k;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if a.no_score_excluded {
        config.score_excluded = false;
    }
    if let Some(p) = &a.pos_table {
        config.pos_table = Some(p.display().to_string());
    }
    config.validate()?;
    let set = load_set(&a.corpus, &a.deps, config.features())?;
    let table = embedding_table(&config)?;
    let report = cross_validate(&config, &set, &table)?;
    if let Some(p) = &a.json {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    emit(a.report.as_deref(), &cv_csv(&report))
}

fn run_predict(a: PredictArgs) -> Result<()> {
    let mut ck = load_checkpoint(&a.ck)?;
    apply_inputs(&mut ck.config, &a.inputs);
    let set = InstanceSet::load(&a.instances)?;
    let table = embedding_table(&ck.config)?;
    let predictor = Predictor::new(&ck, &table)?;
    let mut out = String::from("id\tlabel\tprob_positive\n");
    for inst in &set.instances {
        let p = predictor.predict(inst)?;
        out.push_str(&format!("{}\t{}\t{:.6}\n", inst.id, p.label, p.prob_positive));
    }
    for e in &set.excluded {
        out.push_str(&format!("{}\tNonInteracting\tNA\n", e.id));
    }
    emit(None, &out)
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let mut config = load_config(a.config.as_deref())?;
    apply_inputs(&mut config, &a.inputs);
    config.validate()?;
    for &v in &a.values {
        let mut probe = config.clone();
        a.param.apply(&mut probe, v);
        probe.validate().with_context(|| format!("{} = {v}", a.param))?;
    }
    let set = load_set(&a.corpus, &a.deps, config.features())?;
    let table = embedding_table(&config)?;
    let points = sweep(&config, &set, &table, a.param, &a.values)?;
    emit(a.out.as_deref(), &sweep_csv(&points))
}

fn run_synth(a: SynthArgs) -> Result<()> {
    if a.n == 0 || a.dim == 0 {
        bail!("--n and --dim must be positive");
    }
    fs::create_dir_all(&a.out_dir)?;
    let syn = synthetic_corpus(a.n, a.seed, a.dim);
    write_corpus(fs::File::create(a.out_dir.join("corpus.tsv"))?, &syn.sentences)?;
    write_dependencies(fs::File::create(a.out_dir.join("deps.tsv"))?, &syn.deps)?;
    let vectors = a.out_dir.join("vectors.txt");
    syn.embeddings.write(fs::File::create(&vectors)?)?;
    eprintln!("wrote {} sentences to {}", syn.sentences.len(), a.out_dir.display());
    Ok(())
}

/// The error chain joined by `: `, skipping causes already quoted by the
/// message before them.
fn describe(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if parts.last().is_some_and(|prev| prev.contains(&msg)) {
            continue;
        }
        parts.push(msg);
    }
    parts.join(": ")
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err
        .chain()
        .any(|c| c.downcast_ref::<PipelineError>().is_some_and(PipelineError::is_numeric));
    if numeric {
        EXIT_NUMERIC
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(a) => run_preprocess(a),
        Command::Train(a) => run_train(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Cv(a) => run_cv(a),
        Command::Predict(a) => run_predict(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
