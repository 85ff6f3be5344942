//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage, `3` data or precondition failure,
//! `4` numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rand::seq::index;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimators::{fit_translator, FitConfig, PipelineConfig};
use crate::io::{self, Dtype, Labels};
use crate::metrics::{latent_cosine, latent_mse};
use crate::preprocess::{normalize, zero_pad};
use crate::space::{gather_anchors, AnchorCorrespondence, LatentSpace};
use crate::stitch::{self, EvalOptions, LmseFrame, Method, SweepPlan};
use crate::synth::{self, PlantSpec, TransformClass};
use crate::types::{EstimatorKind, L2Denorm, ScalingMode};

const ANCHOR_HELP: &str = "Anchor correspondence CSV (`src_idx,tgt_idx`). When omitted, k parallel \
anchors are drawn uniformly with --seed; k defaults to the padded dimension, i.e. an anchor count \
comparable with the dimensionality of the absolute representation.";

#[derive(Debug, Parser)]
#[command(name = "latent-translate", version, about = "Translate encodings between latent spaces using paired anchors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a translator on anchors and write it as JSON.
    Fit(FitArgs),
    /// Translate a tensor file with a fitted translator.
    Apply(ApplyArgs),
    /// Fit, translate held-out rows and score them next to the baselines.
    Stitch(StitchArgs),
    /// Score every method (estimators and baselines) on the same held-out rows.
    Eval(EvalArgs),
    /// Score methods over a grid of anchor counts with repeated subsampling.
    ///
    /// Per-repeat rows go to --out; the mean and standard deviation of each
    /// (method, k) cell are printed as JSON.
    Sweep(SweepArgs),
    /// Generate a planted source/target pair with anchors (and optional labels).
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Affine,
    Linear,
    #[value(name = "l-ortho")]
    LOrtho,
    Ortho,
    Relative,
    Absolute,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Affine => Method::Estimator(EstimatorKind::Affine),
            MethodArg::Linear => Method::Estimator(EstimatorKind::Linear),
            MethodArg::LOrtho => Method::Estimator(EstimatorKind::LOrtho),
            MethodArg::Ortho => Method::Estimator(EstimatorKind::Ortho),
            MethodArg::Relative => Method::Relative,
            MethodArg::Absolute => Method::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Standard,
    L2,
    None,
}

impl From<ScalingArg> for ScalingMode {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Standard => ScalingMode::Standard,
            ScalingArg::L2 => ScalingMode::UnitNorm,
            ScalingArg::None => ScalingMode::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum L2DenormArg {
    Identity,
    #[value(name = "mean-norm")]
    MeanNorm,
}

impl From<L2DenormArg> for L2Denorm {
    fn from(a: L2DenormArg) -> Self {
        match a {
            L2DenormArg::Identity => L2Denorm::Identity,
            L2DenormArg::MeanNorm => L2Denorm::MeanNorm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Raw,
    Normalized,
}

impl From<FrameArg> for LmseFrame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Raw => LmseFrame::Raw,
            FrameArg::Normalized => LmseFrame::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

impl From<DtypeArg> for Dtype {
    fn from(d: DtypeArg) -> Self {
        match d {
            DtypeArg::F32 => Dtype::F32,
            DtypeArg::F64 => Dtype::F64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Orthogonal,
    #[value(name = "scaled-orthogonal")]
    ScaledOrthogonal,
    Invertible,
    Affine,
}

impl From<TransformArg> for TransformClass {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Orthogonal => TransformClass::Orthogonal,
            TransformArg::ScaledOrthogonal => TransformClass::ScaledOrthogonal,
            TransformArg::Invertible => TransformClass::InvertibleLinear,
            TransformArg::Affine => TransformClass::Affine,
        }
    }
}

/// Inputs and pre-processing shared by fit, stitch, eval and sweep.
#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Source space tensor file.
    #[arg(long)]
    pub source: PathBuf,
    /// Target space tensor file.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, help = ANCHOR_HELP)]
    pub anchors: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "standard")]
    pub scaling: ScalingArg,
    /// How target-side L2 scaling is undone.
    #[arg(long = "l2-denorm", value_enum, default_value = "identity")]
    pub l2_denorm: L2DenormArg,
    /// Coordinate frame for lmse.
    #[arg(long = "lmse-frame", value_enum, default_value = "raw")]
    pub lmse_frame: FrameArg,
    /// Seed for anchor sampling and the probe split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value = "ortho")]
    pub method: MethodArg,
    /// Number of anchors to draw when --anchors is omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output translator JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    /// Translator JSON written by `fit`.
    #[arg(long)]
    pub translator: PathBuf,
    /// Source space tensor file.
    #[arg(long)]
    pub source: PathBuf,
    /// Output tensor file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    pub dtype: DtypeArg,
}

#[derive(Debug, Clone, Args)]
pub struct StitchArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value = "ortho")]
    pub method: MethodArg,
    /// Per-row labels CSV (header `label`); enables probe accuracy.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of anchors to draw when --anchors is omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Methods to score (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Methods to sweep (default: the four estimators).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Anchor counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output CSV (`method,k,repeat,lcos,lmse,accuracy`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub transform: TransformArg,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Source dimension.
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    /// Target dimension (defaults to --dim).
    #[arg(long = "target-dim")]
    pub target_dim: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of parallel anchors to write (default: the padded dimension).
    #[arg(long)]
    pub k: Option<usize>,
    /// Draw the source as labeled Gaussian blobs with this many classes.
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    pub separation: f64,
    #[arg(long, value_enum, default_value = "f64")]
    pub dtype: DtypeArg,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl PairArgs {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            scaling: self.scaling.into(),
            l2_denorm: self.l2_denorm.into(),
            lmse_frame: self.lmse_frame.into(),
            seed: self.seed,
            ..EvalOptions::default()
        }
    }

    fn load(&self, k: Option<usize>) -> Result<(LatentSpace, LatentSpace, AnchorCorrespondence)> {
        let source = io::read_tensor(&self.source)?;
        let target = io::read_tensor(&self.target)?;
        let anchors = match &self.anchors {
            Some(path) => io::read_anchor_csv(path)?,
            None => {
                let k = k.unwrap_or(source.dim().max(target.dim()));
                draw_parallel_anchors(source.count().min(target.count()), k, self.seed)?
            }
        };
        anchors.check_bounds(&source, &target)?;
        info!(
            "source {}x{}, target {}x{}, {} anchors",
            source.count(),
            source.dim(),
            target.count(),
            target.dim(),
            anchors.len()
        );
        Ok((source, target, anchors))
    }
}

/// `k` distinct row indices drawn uniformly from `0..n`, sorted, used on both sides.
pub fn draw_parallel_anchors(n: usize, k: usize, seed: u64) -> Result<AnchorCorrespondence> {
    if k > n {
        return Err(Error::KTooLarge { k, pool: n });
    }
    let mut rows = index::sample(&mut synth::rng(seed), n, k).into_vec();
    rows.sort_unstable();
    AnchorCorrespondence::parallel(rows)
}

fn load_labels(path: &Option<PathBuf>) -> Result<Option<Labels>> {
    path.as_ref().map(io::read_labels_csv).transpose()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn estimator_of(method: MethodArg) -> Result<EstimatorKind> {
    match Method::from(method) {
        Method::Estimator(kind) => Ok(kind),
        other => Err(Error::InvalidConfig(format!(
            "method `{other}` has no translator to fit"
        ))),
    }
}

#[derive(Debug, Serialize)]
struct FitSummary {
    method: String,
    scaling: String,
    k_anchors: usize,
    padded_dim: usize,
    anchor_lcos: f64,
    anchor_lmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gd: Option<serde_json::Value>,
}

/// Fits a translator, writes it to `--out` and returns the anchor residual summary.
pub fn cmd_fit(args: &FitArgs) -> Result<serde_json::Value> {
    let kind = estimator_of(args.method)?;
    let (source, target, anchors) = args.pair.load(args.k)?;
    let opts = args.pair.options();
    let config = PipelineConfig {
        fit: FitConfig::new(kind),
        scaling: opts.scaling,
        l2_denorm: opts.l2_denorm,
    };
    let fitted = fit_translator(&source, &target, &anchors, &config)?;
    let translator = &fitted.translator;
    io::write_translator(translator, &args.out)?;
    info!("wrote {} translator to {}", kind, args.out.display());

    let src_anchors = gather_anchors(&source, anchors.source_indices())?;
    let tgt_anchors = gather_anchors(&target, anchors.target_indices())?;
    let translated = translator.apply(&src_anchors)?;
    let anchor_lmse = match opts.lmse_frame {
        LmseFrame::Raw => latent_mse(&translated, &tgt_anchors)?,
        LmseFrame::Normalized => {
            let d = translator.padded_dim();
            let state = translator.target_norm();
            latent_mse(
                &normalize(&zero_pad(&translated, d)?, state)?.space,
                &normalize(&zero_pad(&tgt_anchors, d)?, state)?.space,
            )?
        }
    };
    let summary = FitSummary {
        method: kind.as_str().to_owned(),
        scaling: opts.scaling.as_str().to_owned(),
        k_anchors: anchors.len(),
        padded_dim: translator.padded_dim(),
        anchor_lcos: latent_cosine(&translated, &tgt_anchors)?,
        anchor_lmse,
        gd: fitted.diagnostics.map(|d| {
            json!({
                "epochs": d.epochs,
                "initial_loss": d.initial_loss,
                "final_loss": d.final_loss,
                "converged": d.converged,
            })
        }),
    };
    Ok(serde_json::to_value(summary).expect("summary serializes"))
}

pub fn cmd_apply(args: &ApplyArgs) -> Result<()> {
    let translator = io::read_translator(&args.translator)?;
    let source = io::read_tensor(&args.source)?;
    let out = translator.apply(&source)?;
    io::write_tensor(&out, &args.out, args.dtype.into())
}

pub fn cmd_stitch(args: &StitchArgs) -> Result<stitch::StitchReport> {
    let (source, target, anchors) = args.pair.load(args.k)?;
    let labels = load_labels(&args.labels)?;
    let report = stitch::stitch(
        &source,
        &target,
        &anchors,
        args.method.into(),
        &args.pair.options(),
        labels.as_ref().map(|l| l.indices.as_slice()),
    )?;
    if let Some(out) = &args.out {
        write_text(out, &to_json(&report))?;
    }
    Ok(report)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<String> {
    let (source, target, anchors) = args.pair.load(args.k)?;
    let labels = load_labels(&args.labels)?;
    let methods: Vec<Method> = if args.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.method.iter().map(|&m| m.into()).collect()
    };
    let report = stitch::evaluate_methods(
        &source,
        &target,
        &anchors,
        &methods,
        &args.pair.options(),
        labels.as_ref().map(|l| l.indices.as_slice()),
    )?;
    let text = match args.format {
        FormatArg::Json => to_json(&report),
        FormatArg::Csv => stitch::reports_to_csv(&report.reports),
    };
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(text)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<stitch::SweepRow>> {
    let source = io::read_tensor(&args.pair.source)?;
    let target = io::read_tensor(&args.pair.target)?;
    let pool = match &args.pair.anchors {
        Some(path) => io::read_anchor_csv(path)?,
        None => AnchorCorrespondence::parallel((0..source.count().min(target.count())).collect())?,
    };
    let labels = load_labels(&args.labels)?;
    let methods: Vec<Method> = if args.method.is_empty() {
        EstimatorKind::ALL.iter().map(|&k| Method::Estimator(k)).collect()
    } else {
        args.method.iter().map(|&m| m.into()).collect()
    };
    let plan = SweepPlan {
        methods,
        ks: args.k.clone(),
        repeats: args.repeats,
    };
    info!(
        "sweeping {} methods x {} anchor counts x {} repeats from a pool of {}",
        plan.methods.len(),
        plan.ks.len(),
        plan.repeats,
        pool.len()
    );
    let rows = stitch::sweep(
        &source,
        &target,
        &pool,
        &plan,
        &args.pair.options(),
        labels.as_ref().map(|l| l.indices.as_slice()),
    )?;
    write_text(&args.out, &stitch::sweep_to_csv(&rows))?;
    Ok(rows)
}

/// Paths written by `synth`.
#[derive(Debug, Serialize)]
pub struct SynthOutput {
    pub source: PathBuf,
    pub target: PathBuf,
    pub anchors: PathBuf,
    pub ground_truth: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<SynthOutput> {
    let d_tgt = args.target_dim.unwrap_or(args.dim);
    let spec = PlantSpec {
        noise_sigma: args.noise,
        d_tgt,
        ..PlantSpec::new(args.transform.into(), args.n, args.dim, args.seed)
    };
    let (pair, labels) = match args.classes {
        Some(classes) => {
            let per_class = args.n.div_ceil(classes.max(1));
            let (blobs, labels) =
                synth::make_labeled_blobs(per_class, classes, args.dim, args.separation, args.seed)?;
            let rows: Vec<usize> = (0..args.n).collect();
            let source = blobs.select_rows(&rows)?;
            let labels = Labels::from_indices(&labels[..args.n]);
            (synth::plant_from_source(&spec, source)?, Some(labels))
        }
        None => (synth::plant_pair(&spec)?, None),
    };
    let k = args.k.unwrap_or(args.dim.max(d_tgt));
    let anchors = draw_parallel_anchors(args.n, k, args.seed)?;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let out = SynthOutput {
        source: args.out.join("source.lten"),
        target: args.out.join("target.lten"),
        anchors: args.out.join("anchors.csv"),
        ground_truth: args.out.join("ground_truth.json"),
        labels: labels.as_ref().map(|_| args.out.join("labels.csv")),
    };
    io::write_tensor(&pair.source, &out.source, args.dtype.into())?;
    io::write_tensor(&pair.target, &out.target, args.dtype.into())?;
    io::write_anchor_csv(&anchors, &out.anchors)?;
    io::write_translator(&pair.ground_truth, &out.ground_truth)?;
    if let (Some(l), Some(path)) = (&labels, &out.labels) {
        io::write_labels_csv(l, path)?;
    }
    Ok(out)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Runs a parsed command, printing its report to standard output.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => println!("{}", to_json(&cmd_fit(&args)?)),
        Command::Apply(args) => cmd_apply(&args)?,
        Command::Stitch(args) => println!("{}", to_json(&cmd_stitch(&args)?)),
        Command::Eval(args) => print!("{}", cmd_eval(&args)?),
        Command::Sweep(args) => {
            let rows = cmd_sweep(&args)?;
            println!("{}", to_json(&stitch::summarize_sweep(&rows)));
        }
        Command::Synth(args) => println!("{}", to_json(&cmd_synth(&args)?)),
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
