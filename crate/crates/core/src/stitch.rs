//! Stitching evaluation: fit on anchors, translate held-out rows, and score the
//! result against the true target rows, next to the `absolute` (no transform)
//! and `relative` (cosines to anchors) baselines.
//!
//! Source and target must describe the same samples row by row; anchors are
//! excluded from evaluation. When labels are supplied, the non-anchor rows are
//! split with a seeded shuffle: one half trains the target-side probe (the
//! "decoder"), the other half is scored.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{fit_translator, FitConfig, PipelineConfig};
use crate::metrics::{latent_cosine, latent_mse, probe_accuracy, train_probe, EvalReport, LinearProbe, DEFAULT_RIDGE_LAMBDA};
use crate::preprocess::{fit_normalizer, normalize, zero_pad, NormalizerState};
use crate::relative::{build_projector, project_relative};
use crate::space::{gather_anchors, AnchorCorrespondence, LatentSpace};
use crate::synth;
use crate::types::{EstimatorKind, L2Denorm, ScalingMode};

pub const ABSOLUTE_DIM_MISMATCH: &str = "n/a (dimensionality mismatch)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Estimator(EstimatorKind),
    /// Source encodings used as-is in the target space.
    Absolute,
    /// Both spaces projected onto their own anchors.
    Relative,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Absolute,
        Method::Relative,
        Method::Estimator(EstimatorKind::Affine),
        Method::Estimator(EstimatorKind::Linear),
        Method::Estimator(EstimatorKind::LOrtho),
        Method::Estimator(EstimatorKind::Ortho),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Estimator(kind) => kind.as_str(),
            Method::Absolute => "absolute",
            Method::Relative => "relative",
        }
    }

    fn order(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).expect("listed")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Method::Absolute),
            "relative" => Ok(Method::Relative),
            other => other.parse().map(Method::Estimator),
        }
    }
}

/// Coordinate frame in which `lmse` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LmseFrame {
    /// De-normalized target coordinates.
    #[default]
    Raw,
    /// Target coordinates after the target-side scaling fitted on anchors.
    Normalized,
}

impl FromStr for LmseFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(LmseFrame::Raw),
            "normalized" => Ok(LmseFrame::Normalized),
            other => Err(Error::InvalidConfig(format!("unknown lmse frame `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub scaling: ScalingMode,
    pub l2_denorm: L2Denorm,
    pub lmse_frame: LmseFrame,
    /// Estimator hyperparameters; `kind` is overridden per method.
    pub fit: FitConfig,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            scaling: ScalingMode::Standard,
            l2_denorm: L2Denorm::Identity,
            lmse_frame: LmseFrame::Raw,
            fit: FitConfig::default(),
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            seed: 0,
        }
    }
}

impl EvalOptions {
    fn pipeline(&self, kind: EstimatorKind) -> PipelineConfig {
        PipelineConfig {
            fit: FitConfig {
                kind,
                ..self.fit.clone()
            },
            scaling: self.scaling,
            l2_denorm: self.l2_denorm,
        }
    }
}

/// Rows used for scoring and, with labels, rows used to train the probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSplit {
    pub eval: Vec<usize>,
    pub probe_train: Vec<usize>,
}

impl RowSplit {
    /// All rows not in `excluded`; halved by a seeded shuffle when `with_probe`.
    pub fn new(count: usize, excluded: &HashSet<usize>, with_probe: bool, seed: u64) -> Result<Self> {
        let mut rows: Vec<usize> = (0..count).filter(|r| !excluded.contains(r)).collect();
        if rows.is_empty() {
            return Err(Error::EmptySpace { rows: 0, cols: 0 });
        }
        if !with_probe {
            return Ok(Self {
                eval: rows,
                probe_train: Vec::new(),
            });
        }
        if rows.len() < 2 {
            return Err(Error::InvalidConfig(
                "need at least two non-anchor rows to train and score a probe".into(),
            ));
        }
        rows.shuffle(&mut synth::rng(seed));
        let half = rows.len() / 2;
        let mut probe_train = rows[..half].to_vec();
        let mut eval = rows[half..].to_vec();
        probe_train.sort_unstable();
        eval.sort_unstable();
        Ok(Self { eval, probe_train })
    }
}

fn anchor_rows(anchors: &AnchorCorrespondence) -> HashSet<usize> {
    anchors
        .source_indices()
        .iter()
        .chain(anchors.target_indices())
        .copied()
        .collect()
}

fn check_paired(source: &LatentSpace, target: &LatentSpace, labels: Option<&[usize]>) -> Result<()> {
    if source.count() != target.count() {
        return Err(Error::ShapeMismatch {
            left: (source.count(), source.dim()),
            right: (target.count(), target.dim()),
        });
    }
    if let Some(labels) = labels {
        if labels.len() != source.count() {
            return Err(Error::ShapeMismatch {
                left: (source.count(), source.dim()),
                right: (labels.len(), 1),
            });
        }
    }
    Ok(())
}

fn pick(labels: &[usize], rows: &[usize]) -> Vec<usize> {
    rows.iter().map(|&r| labels[r]).collect()
}

fn normalized_mse(pred: &LatentSpace, truth: &LatentSpace, state: &NormalizerState) -> Result<f64> {
    let d = state.dim();
    let p = normalize(&zero_pad(pred, d)?, state)?.space;
    let t = normalize(&zero_pad(truth, d)?, state)?.space;
    latent_mse(&p, &t)
}

struct Scored {
    lcos: f64,
    lmse: f64,
}

fn score(
    pred: &LatentSpace,
    truth: &LatentSpace,
    frame: LmseFrame,
    target_state: &NormalizerState,
) -> Result<Scored> {
    let lcos = latent_cosine(pred, truth)?;
    let lmse = match frame {
        LmseFrame::Raw => latent_mse(pred, truth)?,
        LmseFrame::Normalized => normalized_mse(pred, truth, target_state)?,
    };
    Ok(Scored { lcos, lmse })
}

/// Scores one method on the given rows.
pub fn evaluate_method(
    source: &LatentSpace,
    target: &LatentSpace,
    anchors: &AnchorCorrespondence,
    method: Method,
    opts: &EvalOptions,
    labels: Option<&[usize]>,
    split: &RowSplit,
) -> Result<EvalReport> {
    check_paired(source, target, labels)?;
    anchors.check_bounds(source, target)?;
    let k = anchors.len();
    let mut report = EvalReport::new(method.as_str(), k, split.eval.len());
    let src_eval = source.select_rows(&split.eval)?;
    let tgt_eval = target.select_rows(&split.eval)?;

    // Target-side probe: trained on target rows, fed with whatever the method produces.
    let probe_on = |train_space: &LatentSpace| -> Result<Option<LinearProbe>> {
        match labels {
            Some(l) => Ok(Some(train_probe(
                &train_space.select_rows(&split.probe_train)?,
                &pick(l, &split.probe_train),
                opts.ridge_lambda,
            )?)),
            None => Ok(None),
        }
    };
    let eval_labels = labels.map(|l| pick(l, &split.eval));

    match method {
        Method::Estimator(kind) => {
            let fitted = fit_translator(source, target, anchors, &opts.pipeline(kind))?;
            let translated = fitted.translator.apply(&src_eval)?;
            let s = score(&translated, &tgt_eval, opts.lmse_frame, fitted.translator.target_norm())?;
            report.lcos = Some(s.lcos);
            report.lmse = Some(s.lmse);
            if let (Some(probe), Some(el)) = (probe_on(target)?, &eval_labels) {
                report.accuracy = Some(probe_accuracy(&probe, &translated, el)?);
            }
        }
        Method::Absolute => {
            if source.dim() != target.dim() {
                return Ok(EvalReport::unavailable(method.as_str(), k, split.eval.len(), ABSOLUTE_DIM_MISMATCH));
            }
            let state = match opts.lmse_frame {
                LmseFrame::Raw => NormalizerState::identity(target.dim()),
                LmseFrame::Normalized => {
                    fit_normalizer(&gather_anchors(target, anchors.target_indices())?, opts.scaling)?
                }
            };
            let s = score(&src_eval, &tgt_eval, opts.lmse_frame, &state)?;
            report.lcos = Some(s.lcos);
            report.lmse = Some(s.lmse);
            if let (Some(probe), Some(el)) = (probe_on(target)?, &eval_labels) {
                report.accuracy = Some(probe_accuracy(&probe, &src_eval, el)?);
            }
        }
        Method::Relative => {
            let src_proj = build_projector(&gather_anchors(source, anchors.source_indices())?)?;
            let tgt_proj = build_projector(&gather_anchors(target, anchors.target_indices())?)?;
            let src_rel = project_relative(&src_eval, &src_proj)?;
            let tgt_rel = project_relative(&tgt_eval, &tgt_proj)?;
            report.lcos = Some(latent_cosine(&src_rel, &tgt_rel)?);
            report.lmse = Some(latent_mse(&src_rel, &tgt_rel)?);
            if labels.is_some() {
                let tgt_rel_all = project_relative(target, &tgt_proj)?;
                if let (Some(probe), Some(el)) = (probe_on(&tgt_rel_all)?, &eval_labels) {
                    report.accuracy = Some(probe_accuracy(&probe, &src_rel, el)?);
                }
            }
        }
    }
    Ok(report)
}

/// Accuracy of the target probe on genuine target encodings of the eval rows.
fn no_stitch_report(
    target: &LatentSpace,
    labels: &[usize],
    k: usize,
    split: &RowSplit,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let probe = train_probe(
        &target.select_rows(&split.probe_train)?,
        &pick(labels, &split.probe_train),
        opts.ridge_lambda,
    )?;
    let mut report = EvalReport::new("no-stitch", k, split.eval.len());
    report.accuracy = Some(probe_accuracy(&probe, &target.select_rows(&split.eval)?, &pick(labels, &split.eval))?);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct StitchReport {
    pub scaling: String,
    pub lmse_frame: String,
    pub k_anchors: usize,
    pub n_eval: usize,
    pub reports: Vec<EvalReport>,
}

/// Scores each method in `methods` on the same held-out rows. With labels a
/// `no-stitch` row is appended.
pub fn evaluate_methods(
    source: &LatentSpace,
    target: &LatentSpace,
    anchors: &AnchorCorrespondence,
    methods: &[Method],
    opts: &EvalOptions,
    labels: Option<&[usize]>,
) -> Result<StitchReport> {
    check_paired(source, target, labels)?;
    anchors.check_bounds(source, target)?;
    let split = RowSplit::new(source.count(), &anchor_rows(anchors), labels.is_some(), opts.seed)?;
    let mut reports = methods
        .iter()
        .map(|&m| evaluate_method(source, target, anchors, m, opts, labels, &split))
        .collect::<Result<Vec<_>>>()?;
    if let Some(l) = labels {
        reports.push(no_stitch_report(target, l, anchors.len(), &split, opts)?);
    }
    Ok(StitchReport {
        scaling: opts.scaling.as_str().to_owned(),
        lmse_frame: match opts.lmse_frame {
            LmseFrame::Raw => "raw",
            LmseFrame::Normalized => "normalized",
        }
        .to_owned(),
        k_anchors: anchors.len(),
        n_eval: split.eval.len(),
        reports,
    })
}

/// The chosen method followed by the `absolute` and `relative` baselines.
pub fn stitch(
    source: &LatentSpace,
    target: &LatentSpace,
    anchors: &AnchorCorrespondence,
    method: Method,
    opts: &EvalOptions,
    labels: Option<&[usize]>,
) -> Result<StitchReport> {
    let mut methods = vec![method];
    for baseline in [Method::Absolute, Method::Relative] {
        if baseline != method {
            methods.push(baseline);
        }
    }
    evaluate_methods(source, target, anchors, &methods, opts, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub k: usize,
    pub repeat: usize,
    pub lcos: Option<f64>,
    pub lmse: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Methods, anchor counts and repeats covered by a [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub methods: Vec<Method>,
    pub ks: Vec<usize>,
    pub repeats: usize,
}

pub const SWEEP_CSV_HEADER: &str = "method,k,repeat,lcos,lmse,accuracy";

fn subset_seed(seed: u64, k: usize, repeat: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (repeat as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Uniformly subsampled anchor sets of each size, drawn from `pool`.
///
/// The same subset is used for every method at a given `(k, repeat)`, so methods
/// are compared on identical anchors. Scoring rows are those outside the pool;
/// if the pool covers every row, rows outside the drawn subset are scored.
pub fn sweep(
    source: &LatentSpace,
    target: &LatentSpace,
    pool: &AnchorCorrespondence,
    plan: &SweepPlan,
    opts: &EvalOptions,
    labels: Option<&[usize]>,
) -> Result<Vec<SweepRow>> {
    let SweepPlan { methods, ks, repeats } = plan;
    let (methods, ks, repeats) = (methods.as_slice(), ks.as_slice(), *repeats);
    check_paired(source, target, labels)?;
    pool.check_bounds(source, target)?;
    if let Some(&k) = ks.iter().find(|&&k| k > pool.len()) {
        return Err(Error::KTooLarge { k, pool: pool.len() });
    }
    if ks.contains(&0) || repeats == 0 || methods.is_empty() {
        return Err(Error::InvalidConfig(
            "k values, repeats and methods must be non-empty and positive".into(),
        ));
    }
    let pool_rows = anchor_rows(pool);
    let pool_covers_all = pool_rows.len() >= source.count()
        && (0..source.count()).all(|r| pool_rows.contains(&r));

    let mut cells = Vec::new();
    for &k in ks {
        for repeat in 0..repeats {
            let mut positions = index::sample(&mut synth::rng(subset_seed(opts.seed, k, repeat)), pool.len(), k).into_vec();
            positions.sort_unstable();
            let anchors = pool.subset(&positions)?;
            let excluded = if pool_covers_all { anchor_rows(&anchors) } else { pool_rows.clone() };
            let split = RowSplit::new(source.count(), &excluded, labels.is_some(), opts.seed)?;
            for &method in methods {
                cells.push((method, k, repeat, anchors.clone(), split.clone()));
            }
        }
    }

    let mut rows = cells
        .into_par_iter()
        .map(|(method, k, repeat, anchors, split)| {
            let r = evaluate_method(source, target, &anchors, method, opts, labels, &split)?;
            Ok(SweepRow {
                method: method.as_str().to_owned(),
                k,
                repeat,
                lcos: r.lcos,
                lmse: r.lmse,
                accuracy: r.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| {
        let m: Method = r.method.parse().expect("method names round-trip");
        (m.order(), r.k, r.repeat)
    });
    Ok(rows)
}

/// Mean and sample standard deviation of one metric over the repeats of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

/// Unweighted aggregate of the sweep rows sharing a method and anchor count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub method: String,
    pub k: usize,
    pub repeats: usize,
    pub lcos: Option<Spread>,
    pub lmse: Option<Spread>,
    pub accuracy: Option<Spread>,
}

/// Groups consecutive rows of a [`sweep`] result by `(method, k)`.
pub fn summarize_sweep(rows: &[SweepRow]) -> Vec<SweepSummary> {
    rows.chunk_by(|a, b| a.method == b.method && a.k == b.k)
        .map(|group| {
            let collect = |f: fn(&SweepRow) -> Option<f64>| group.iter().filter_map(f).collect::<Vec<_>>();
            SweepSummary {
                method: group[0].method.clone(),
                k: group[0].k,
                repeats: group.len(),
                lcos: Spread::of(&collect(|r| r.lcos)),
                lmse: Spread::of(&collect(|r| r.lmse)),
                accuracy: Spread::of(&collect(|r| r.accuracy)),
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            r.k,
            r.repeat,
            fmt_opt(r.lcos),
            fmt_opt(r.lmse),
            fmt_opt(r.accuracy)
        ));
    }
    out
}

pub const REPORT_CSV_HEADER: &str = "method,k_anchors,n_eval,lcos,lmse,rmse,accuracy,note";

pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.method,
            r.k_anchors,
            r.n_eval,
            fmt_opt(r.lcos),
            fmt_opt(r.lmse),
            fmt_opt(r.rmse),
            fmt_opt(r.accuracy),
            r.note.as_deref().map(|n| format!("\"{n}\"")).unwrap_or_default()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gaussian_matrix, make_labeled_blobs, plant_pair, PlantSpec, TransformClass};

    #[test]
    fn sweep_summary_statistics() {
        let row = |k, repeat, lmse| SweepRow {
            method: "ortho".into(),
            k,
            repeat,
            lcos: None,
            lmse: Some(lmse),
            accuracy: None,
        };
        let rows = [row(8, 0, 1.0), row(8, 1, 3.0), row(16, 0, 0.5)];
        let summary = summarize_sweep(&rows);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[0].repeats, 2);
        let lmse = summary[0].lmse.unwrap();
        assert_eq!(lmse.mean, 2.0);
        assert!((lmse.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(summary[1].lmse, Some(Spread { mean: 0.5, std: 0.0 }));
        assert!(summary[0].lcos.is_none());
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("frobnicate".parse::<Method>().is_err());
    }

    #[test]
    fn split_excludes_anchors_and_is_deterministic() {
        let excluded: HashSet<usize> = [0, 3, 5].into_iter().collect();
        let a = RowSplit::new(20, &excluded, true, 4).unwrap();
        let b = RowSplit::new(20, &excluded, true, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eval.len() + a.probe_train.len(), 17);
        assert!(a.eval.iter().chain(&a.probe_train).all(|r| !excluded.contains(r)));
        let plain = RowSplit::new(20, &excluded, false, 4).unwrap();
        assert_eq!(plain.eval.len(), 17);
    }

    #[test]
    fn ortho_beats_absolute_on_planted_pair() {
        let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 300, 12, 1)).unwrap();
        let anchors = AnchorCorrespondence::parallel((0..48).collect()).unwrap();
        let report = stitch(
            &pair.source,
            &pair.target,
            &anchors,
            Method::Estimator(EstimatorKind::Ortho),
            &EvalOptions { scaling: ScalingMode::None, ..EvalOptions::default() },
            None,
        )
        .unwrap();
        assert_eq!(report.n_eval, 252);
        let ortho = &report.reports[0];
        let absolute = &report.reports[1];
        assert!(ortho.lcos.unwrap() >= 0.999, "{ortho:?}");
        assert!(absolute.lcos.unwrap() < ortho.lcos.unwrap());
        assert_eq!(report.reports[2].method, "relative");
    }

    #[test]
    fn absolute_is_unavailable_when_dims_differ() {
        let x = LatentSpace::new(gaussian_matrix(60, 5, 1)).unwrap();
        let y = LatentSpace::new(gaussian_matrix(60, 3, 2)).unwrap();
        let anchors = AnchorCorrespondence::parallel((0..20).collect()).unwrap();
        let report = stitch(&x, &y, &anchors, Method::Absolute, &EvalOptions::default(), None).unwrap();
        assert_eq!(report.reports[0].note.as_deref(), Some(ABSOLUTE_DIM_MISMATCH));
        assert!(report.reports[0].lcos.is_none());
    }

    #[test]
    fn labels_add_accuracy_and_no_stitch() {
        let (x, labels) = make_labeled_blobs(60, 3, 6, 6.0, 3).unwrap();
        let q = crate::synth::random_orthogonal(6, 4);
        let y = LatentSpace::new(x.matrix() * q).unwrap();
        let anchors = AnchorCorrespondence::parallel((0..30).collect()).unwrap();
        let report = stitch(
            &x,
            &y,
            &anchors,
            Method::Estimator(EstimatorKind::Ortho),
            &EvalOptions::default(),
            Some(&labels),
        )
        .unwrap();
        assert!(report.reports.iter().all(|r| r.accuracy.is_some()));
        assert_eq!(report.reports.last().unwrap().method, "no-stitch");
        assert!(report.reports[0].accuracy.unwrap() > 0.95);
    }

    #[test]
    fn normalized_frame_for_standard_plant() {
        let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 200, 6, 2)).unwrap();
        let anchors = AnchorCorrespondence::parallel((0..40).collect()).unwrap();
        let opts = EvalOptions {
            lmse_frame: LmseFrame::Normalized,
            ..EvalOptions::default()
        };
        let report = evaluate_methods(&pair.source, &pair.target, &anchors, &Method::ALL, &opts, None).unwrap();
        assert_eq!(report.reports.len(), 6);
        assert!(report.reports.iter().all(|r| r.lmse.unwrap().is_finite()));
    }

    #[test]
    fn sweep_rejects_large_k_and_is_deterministic() {
        let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 100, 4, 3)).unwrap();
        let pool = AnchorCorrespondence::parallel((0..50).collect()).unwrap();
        let methods = vec![Method::Estimator(EstimatorKind::Ortho)];
        let opts = EvalOptions::default();
        let too_big = SweepPlan { methods: methods.clone(), ks: vec![51], repeats: 1 };
        assert!(matches!(
            sweep(&pair.source, &pair.target, &pool, &too_big, &opts, None),
            Err(Error::KTooLarge { k: 51, pool: 50 })
        ));
        let plan = SweepPlan { methods, ks: vec![8, 50], repeats: 2 };
        let a = sweep(&pair.source, &pair.target, &pool, &plan, &opts, None).unwrap();
        let b = sweep(&pair.source, &pair.target, &pool, &plan, &opts, None).unwrap();
        assert_eq!(sweep_to_csv(&a), sweep_to_csv(&b));
        assert_eq!(a.len(), 4);
        // k = pool size: every repeat draws the full pool
        assert_eq!(a[2].lmse, a[3].lmse);
    }
}
