//! `stitchnet` subcommands.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use stitchnet_core::encoding::encode_pattern;
use stitchnet_core::learning::{evaluate_sets, Trainer, TrainingExample};
use stitchnet_core::merge::transform_pattern;
use stitchnet_core::pattern::{Pattern, StitchPair};
use stitchnet_core::synth::{generate_corpus, Family};

use crate::checkpoint::Checkpoint;
use crate::config::{parse_aggregator, Config};
use crate::error::{Error, Result};
use crate::format::{save_pattern, write_file};
use crate::report::{feature_table, history_table, metrics_table, report_to_json, score_table};
use crate::{input_files, load_any, load_corpus, Manifest};

#[derive(Parser, Debug)]
#[command(name = "stitchnet", version, about = "Predict stitches between the edges of 2D sewing patterns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic corpus with a train/val/test manifest
    Synth(SynthArgs),
    /// Dump the encoded edge features of a pattern as a text table
    Extract(ExtractArgs),
    /// Fuse mirrored half-panels into single panels with multi-edge seams
    MergeMultiedge(MergeArgs),
    /// Train a model on a corpus directory
    Train(TrainArgs),
    /// Predict stitches for a pattern file or directory
    Predict(PredictArgs),
    /// Score predicted patterns against ground truth
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Family to generate (tube, skirt, bodice); repeat or comma-separate for several
    #[arg(long, required = true, value_delimiter = ',')]
    pub family: Vec<String>,
    /// Patterns per family, in the order of --family; a single value applies to all
    #[arg(long, required = true, value_delimiter = ',')]
    pub count: Vec<usize>,
    #[arg(long, default_value_t = 0.15)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Feature switches are read from the [model] section
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    /// Pattern file or directory
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output file, or directory when the input is a directory
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Corpus directory; its split manifest is used when present
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Written after every epoch
    #[arg(long)]
    pub ckpt_out: PathBuf,
    #[arg(long)]
    pub history_out: Option<PathBuf>,
    /// Continue an interrupted run from its checkpoint
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub aggregator: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub no_panel_id: bool,
    #[arg(long)]
    pub no_topology: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Pattern file or directory
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output file, or directory when the input is a directory
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the symmetrized assignment matrix next to each output
    #[arg(long)]
    pub dump_scores: bool,
    #[arg(long, default_value_t = 0.4)]
    pub tau: f64,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Predicted pattern file or directory
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth pattern file or directory
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::MergeMultiedge(a) => merge(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

fn synth(a: SynthArgs) -> Result<()> {
    if !(0.0..=0.3).contains(&a.jitter) {
        return Err(Error::Usage("--jitter must lie in [0, 0.3]".into()));
    }
    if a.count.len() != 1 && a.count.len() != a.family.len() {
        return Err(Error::Usage("give one --count, or one per --family".into()));
    }
    let mut counts = [0usize; 3];
    for (i, name) in a.family.iter().enumerate() {
        let fam = Family::from_name(name)
            .ok_or_else(|| Error::Usage(format!("unknown family `{name}` (expected tube, skirt or bodice)")))?;
        let k = Family::ALL.iter().position(|f| *f == fam).expect("family is listed");
        counts[k] += a.count[if a.count.len() == 1 { 0 } else { i }];
    }
    let corpus = generate_corpus(a.seed, counts, a.jitter)?;
    let file = |i: usize| format!("{}.json", corpus.patterns[i].name);
    for (i, p) in corpus.patterns.iter().enumerate() {
        save_pattern(&a.out.join(file(i)), p)?;
    }
    let names = |idx: &[usize]| idx.iter().map(|&i| file(i)).collect();
    Manifest {
        seed: a.seed,
        train: names(&corpus.split.train),
        val: names(&corpus.split.val),
        test: names(&corpus.split.test),
    }
    .save(&a.out)?;
    println!(
        "wrote {} patterns to {} (train {}, val {}, test {})",
        corpus.patterns.len(),
        a.out.display(),
        corpus.split.train.len(),
        corpus.split.val.len(),
        corpus.split.test.len()
    );
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let p = load_any(&a.input)?;
    let enc = encode_pattern(&p, cfg.mask)?;
    let nodes: Vec<_> = (0..enc.graph.node_count()).map(|i| enc.remap.backward(enc.graph.edge_ref(i))).collect();
    write_file(&a.out, feature_table(&nodes, &enc.features).as_bytes())
}

/// Maps each input file to its output path: `out` itself for a single file,
/// `out/<file name>` for a directory.
fn outputs(input: &Path, out: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let files = input_files(input)?;
    if input.is_dir() {
        Ok(files
            .into_iter()
            .map(|f| {
                let dst = out.join(f.file_name().expect("listed files have names"));
                (f, dst)
            })
            .collect())
    } else {
        Ok(files.into_iter().map(|f| (f, out.to_path_buf())).collect())
    }
}

fn merge(a: MergeArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    for (src, dst) in outputs(&a.input, &a.out)? {
        let p = load_any(&src)?;
        let merged = transform_pattern(&p, &cfg.merge).map_err(|e| Error::from(e).in_file(&src))?;
        save_pattern(&dst, &merged)?;
    }
    Ok(())
}

fn examples(patterns: &[Pattern], cfg: &Config) -> Result<Vec<TrainingExample>> {
    patterns.iter().map(|p| TrainingExample::from_pattern(p, cfg.mask).map_err(Error::from)).collect()
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    let set = |slot: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.model.layers, a.layers);
    set(&mut cfg.model.hidden, a.hidden);
    set(&mut cfg.model.embed_dim, a.embed_dim);
    set(&mut cfg.train.epochs, a.epochs);
    set(&mut cfg.sinkhorn.iterations, a.iterations);
    if let Some(agg) = &a.aggregator {
        cfg.model.aggregator = parse_aggregator(agg)?;
    }
    if let Some(s) = a.seed {
        cfg.train.seed = s;
    }
    if let Some(lr) = a.lr {
        cfg.train.learning_rate = lr;
    }
    if let Some(t) = a.tau {
        cfg.sinkhorn.tau_multi = t;
    }
    cfg.mask.panel_id &= !a.no_panel_id;
    cfg.mask.topology &= !a.no_topology;
    cfg.check()?;

    let mut trainer = match &a.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            cfg.mask = ck.predictor.mask;
            let mut t = ck
                .trainer
                .ok_or_else(|| Error::Checkpoint(format!("{} holds no training state", path.display())))?;
            set(&mut t.train.epochs, a.epochs);
            t
        }
        None => Trainer::new(cfg.model, cfg.sinkhorn, cfg.train)?,
    };
    let [train, val, _] = load_corpus(&a.data)?;
    let (train, val) = (examples(&train, &cfg)?, examples(&val, &cfg)?);
    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", history_table(&trainer.history));
    while !trainer.is_done() {
        let r = trainer.run_epoch(&train, &val)?;
        let row = history_table(&[r]);
        let _ = write!(out, "{}", row.lines().nth(1).map(|l| format!("{l}\n")).unwrap_or_default());
        let _ = out.flush();
        Checkpoint::from_trainer(&trainer, cfg.mask).save(&a.ckpt_out)?;
    }
    Checkpoint::from_trainer(&trainer, cfg.mask).save(&a.ckpt_out)?;
    if let Some(h) = &a.history_out {
        write_file(h, history_table(&trainer.history).as_bytes())?;
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let mut pr = Checkpoint::load(&a.model)?.predictor;
    pr.sinkhorn.tau_multi = a.tau;
    if let Some(t) = a.iterations {
        if t == 0 {
            return Err(Error::Usage("--iterations must be at least 1".into()));
        }
        pr.sinkhorn.iterations = t;
    }
    for (src, dst) in outputs(&a.input, &a.out)? {
        let p = load_any(&src)?;
        let pred = pr.predict(&p).map_err(|e| Error::from(e).in_file(&src))?;
        save_pattern(&dst, &Pattern { stitches: pred.stitches.clone(), ..p })?;
        if a.dump_scores {
            let mut name = dst.clone().into_os_string();
            name.push(".scores.txt");
            write_file(Path::new(&name), score_table(&pred.nodes, &pred.scores).as_bytes())?;
        }
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let key = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let preds: BTreeMap<String, PathBuf> = input_files(&a.pred)?.into_iter().map(|p| (key(&p), p)).collect();
    let gts = input_files(&a.gt)?;
    let single = a.gt.is_file() && a.pred.is_file();
    let mut items = Vec::with_capacity(gts.len());
    for g in &gts {
        let pf = if single {
            a.pred.clone()
        } else {
            preds.get(&key(g)).cloned().ok_or_else(|| Error::Schema(format!("no prediction for {}", key(g))))?
        };
        let gp = load_any(g)?;
        let pp = load_any(&pf)?;
        let set = |p: &Pattern| p.stitches.iter().copied().collect::<std::collections::BTreeSet<StitchPair>>();
        let name = if gp.name.is_empty() { key(g) } else { gp.name.clone() };
        items.push((name, set(&pp), set(&gp)));
    }
    let report = evaluate_sets(&items);
    print!("{}", metrics_table(&report));
    if let Some(out) = &a.report_out {
        write_file(out, report_to_json(&report).as_bytes())?;
    }
    Ok(())
}
