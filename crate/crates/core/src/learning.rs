//! Loss, end-to-end gradients, the Adam optimizer, the training loop and the
//! evaluation metrics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assignment::{
    augment_dustbin, dustbin_backward, hard_assign, score_backward, score_matrix, sinkhorn_backward, sinkhorn_log,
    symmetrize, HardAssignment, SinkhornConfig,
};
use crate::encoding::{encode_pattern, node_pairs, FeatureMask, StitchGraph};
use crate::model::{self, init_params, ModelConfig, ModelParams};
use crate::pattern::{EdgeRef, Pattern, StitchPair};
use crate::tensor::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Divide the loss by the number of supervised entries.
    pub normalize_loss: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, epochs: 18, seed: 0, normalize_loss: true }
    }
}

/// Node-addressed supervision.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    /// Undirected pairs with `i < j`.
    pub matched: Vec<(usize, usize)>,
    pub unmatched: Vec<usize>,
}

impl GroundTruth {
    /// Every node that is in no pair is unmatched.
    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Self {
        let mut matched: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        matched.sort_unstable();
        matched.dedup();
        let mut used = vec![false; m];
        for &(a, b) in &matched {
            if a < m {
                used[a] = true;
            }
            if b < m {
                used[b] = true;
            }
        }
        let unmatched = (0..m).filter(|&i| !used[i]).collect();
        Self { matched, unmatched }
    }

    fn check(&self, m: usize) -> Result<()> {
        let nodes = self.matched.iter().flat_map(|&(a, b)| [a, b]).chain(self.unmatched.iter().copied());
        for node in nodes {
            if node >= m {
                return Err(Error::NodeOutOfRange { node, count: m });
            }
        }
        Ok(())
    }
}

/// Negative log-likelihood of the supervised entries of the extended plan:
/// both orientations of each matched pair, and both dustbin entries of each
/// unmatched node. Returns the loss and its gradient wrt `log_p`.
pub fn nll_loss(log_p: &Matrix, gt: &GroundTruth, normalize: bool) -> Result<(f64, Matrix)> {
    let n = log_p.rows();
    let m = n - 1;
    gt.check(m)?;
    let mut entries = Vec::with_capacity(2 * (gt.matched.len() + gt.unmatched.len()));
    for &(i, j) in &gt.matched {
        entries.push((i, j));
        entries.push((j, i));
    }
    for &i in &gt.unmatched {
        entries.push((i, m));
        entries.push((m, i));
    }
    let scale = if normalize && !entries.is_empty() { 1.0 / entries.len() as f64 } else { 1.0 };
    let mut grad = Matrix::zeros(n, n);
    let mut loss = 0.0;
    for &(i, j) in &entries {
        loss -= log_p[(i, j)];
        grad[(i, j)] -= scale;
    }
    Ok((loss * scale, grad))
}

/// One pattern, encoded and supervised.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub name: String,
    pub graph: StitchGraph,
    pub features: Matrix,
    pub truth: GroundTruth,
    /// Ground-truth stitches in canonical (preprocessed) edge addressing.
    pub stitches: BTreeSet<StitchPair>,
}

impl TrainingExample {
    pub fn from_pattern(p: &Pattern, mask: FeatureMask) -> Result<Self> {
        let enc = encode_pattern(p, mask)?;
        let pairs = node_pairs(&enc.pattern, &enc.graph);
        let truth = GroundTruth::from_pairs(enc.graph.node_count(), &pairs);
        Ok(Self {
            name: p.name.clone(),
            stitches: enc.pattern.stitch_set(),
            graph: enc.graph,
            features: enc.features,
            truth,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn to_stitches(&self, pairs: &[(usize, usize)]) -> BTreeSet<StitchPair> {
        pairs.iter().map(|&(a, b)| StitchPair::new(self.graph.edge_ref(a), self.graph.edge_ref(b))).collect()
    }
}

/// Soft and hard assignment for one encoded pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// Symmetrized extended plan, `(M+1) x (M+1)`.
    pub scores: Matrix,
    pub hard: HardAssignment,
}

pub fn infer(
    graph: &StitchGraph,
    features: &Matrix,
    params: &ModelParams,
    model_cfg: &ModelConfig,
    sinkhorn: &SinkhornConfig,
) -> Result<Inference> {
    let (f, _) = model::forward(graph, features, params, model_cfg.aggregator)?;
    let k = augment_dustbin(&score_matrix(&f)?, params.z);
    let soft = sinkhorn_log(&k, sinkhorn.iterations)?;
    let scores = symmetrize(&soft.probabilities());
    let hard = hard_assign(&scores, sinkhorn.tau_multi);
    Ok(Inference { scores, hard })
}

/// Loss of one example and its exact gradient wrt every parameter, `z`
/// included.
pub fn loss_and_gradient(
    ex: &TrainingExample,
    params: &ModelParams,
    model_cfg: &ModelConfig,
    sinkhorn: &SinkhornConfig,
    normalize: bool,
) -> Result<(f64, ModelParams)> {
    let (f, cache) = model::forward(&ex.graph, &ex.features, params, model_cfg.aggregator)?;
    let k = augment_dustbin(&score_matrix(&f)?, params.z);
    let soft = sinkhorn_log(&k, sinkhorn.iterations)?;
    let (loss, g_logp) = nll_loss(&soft.log_p, &ex.truth, normalize)?;
    if !loss.is_finite() {
        return Err(Error::Numerical("non-finite loss"));
    }
    let g_k = sinkhorn_backward(&k, &soft, &g_logp);
    let (g_c, g_z) = dustbin_backward(&g_k);
    let g_f = score_backward(&f, &g_c);
    let (mut grads, _) = model::backward(&ex.graph, &cache, &g_f, params);
    grads.z = g_z;
    if !grads.is_finite() {
        return Err(Error::Numerical("non-finite gradient"));
    }
    Ok((loss, grads))
}

/// Adaptive moment estimation over the flattened parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, m: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - libm::pow(self.beta1, t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, t as f64);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let mh = self.m[k] / c1;
            let vh = self.v[k] / c2;
            params[k] -= lr * mh / (libm::sqrt(vh) + self.epsilon);
        }
    }
}

/// One forward/backward pass and optimizer update. Returns the loss before
/// the update.
pub fn train_step(
    ex: &TrainingExample,
    params: &mut ModelParams,
    opt: &mut Adam,
    model_cfg: &ModelConfig,
    sinkhorn: &SinkhornConfig,
    cfg: &TrainConfig,
) -> Result<f64> {
    let (loss, grads) = loss_and_gradient(ex, params, model_cfg, sinkhorn, cfg.normalize_loss)?;
    let mut flat = params.to_flat();
    opt.update(&mut flat, &grads.to_flat(), cfg.learning_rate);
    params.set_flat(&flat)?;
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_tf1: f64,
    pub val_gsp: f64,
}

/// Complete resumable training state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub model: ModelConfig,
    pub sinkhorn: SinkhornConfig,
    pub train: TrainConfig,
    pub params: ModelParams,
    pub optimizer: Adam,
    /// Number of finished epochs.
    pub epoch: usize,
    pub best: ModelParams,
    pub best_val_tf1: f64,
    pub history: Vec<EpochRecord>,
}

impl Trainer {
    pub fn new(model: ModelConfig, sinkhorn: SinkhornConfig, train: TrainConfig) -> Result<Self> {
        model.validate()?;
        if !(train.learning_rate >= 0.0) || sinkhorn.iterations == 0 {
            return Err(Error::Numerical("learning rate must be >= 0 and iterations >= 1"));
        }
        let params = init_params(&model, train.seed);
        let optimizer = Adam::new(params.num_scalars());
        Ok(Self {
            model,
            sinkhorn,
            train,
            best: params.clone(),
            params,
            optimizer,
            epoch: 0,
            best_val_tf1: f64::NEG_INFINITY,
            history: Vec::new(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.epoch >= self.train.epochs
    }

    /// Visiting order of epoch `epoch`; depends only on the seed and epoch.
    pub fn epoch_order(&self, n: usize, epoch: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.train.seed);
        rng.set_stream(epoch as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    }

    /// Runs the next epoch over `train` and scores `val` (or `train` when
    /// `val` is empty). The parameters with the best validation TF1 so far
    /// are kept in `best`.
    pub fn run_epoch(&mut self, train: &[TrainingExample], val: &[TrainingExample]) -> Result<EpochRecord> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let order = self.epoch_order(train.len(), self.epoch);
        let mut total = 0.0;
        for &i in &order {
            total += train_step(&train[i], &mut self.params, &mut self.optimizer, &self.model, &self.sinkhorn, &self.train)?;
        }
        let report = evaluate(if val.is_empty() { train } else { val }, &self.params, &self.model, &self.sinkhorn)?;
        let record = EpochRecord {
            epoch: self.epoch + 1,
            train_loss: total / train.len() as f64,
            val_tf1: report.tf1,
            val_gsp: report.gsp,
        };
        if record.val_tf1 > self.best_val_tf1 {
            self.best_val_tf1 = record.val_tf1;
            self.best = self.params.clone();
        }
        self.epoch += 1;
        self.history.push(record);
        Ok(record)
    }
}

/// Result of [`fit`]: best-validation parameters and per-epoch history.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
}

pub fn fit(
    train: &[TrainingExample],
    val: &[TrainingExample],
    model_cfg: &ModelConfig,
    sinkhorn: &SinkhornConfig,
    cfg: &TrainConfig,
) -> Result<FitOutput> {
    let mut trainer = Trainer::new(*model_cfg, *sinkhorn, *cfg)?;
    while !trainer.is_done() {
        trainer.run_epoch(train, val)?;
    }
    Ok(FitOutput { params: trainer.best, history: trainer.history })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Counts behind precision/recall, so they can be pooled over patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub hits: usize,
    pub predicted: usize,
    pub truth: usize,
}

impl Counts {
    fn of(pred: &BTreeSet<StitchPair>, gt: &BTreeSet<StitchPair>) -> Self {
        Self { hits: pred.intersection(gt).count(), predicted: pred.len(), truth: gt.len() }
    }

    fn add(self, o: Self) -> Self {
        Self { hits: self.hits + o.hits, predicted: self.predicted + o.predicted, truth: self.truth + o.truth }
    }

    /// Empty prediction scores precision 0, or 1 when the truth is empty too.
    pub fn pair_scores(&self) -> Scores {
        let p = ratio(self.hits, self.predicted, if self.truth == 0 { 1.0 } else { 0.0 });
        let r = ratio(self.hits, self.truth, 1.0);
        Scores { precision: p, recall: r, f1: f1(p, r) }
    }

    /// Empty multi-edge prediction scores precision 1 (nothing wrong claimed).
    pub fn multi_scores(&self) -> Scores {
        let p = ratio(self.hits, self.predicted, 1.0);
        let r = ratio(self.hits, self.truth, 1.0);
        Scores { precision: p, recall: r, f1: f1(p, r) }
    }
}

pub fn pair_metrics(pred: &BTreeSet<StitchPair>, gt: &BTreeSet<StitchPair>) -> Scores {
    Counts::of(pred, gt).pair_scores()
}

/// Pairs containing an edge that occurs in at least two pairs of the set.
pub fn multi_edge_subset(pairs: &BTreeSet<StitchPair>) -> BTreeSet<StitchPair> {
    let mut degree: alloc::collections::BTreeMap<EdgeRef, usize> = Default::default();
    for p in pairs {
        *degree.entry(p.a()).or_default() += 1;
        *degree.entry(p.b()).or_default() += 1;
    }
    pairs.iter().copied().filter(|p| degree[&p.a()] >= 2 || degree[&p.b()] >= 2).collect()
}

fn multi_counts(pred: &BTreeSet<StitchPair>, gt: &BTreeSet<StitchPair>) -> Counts {
    Counts::of(&multi_edge_subset(pred), &multi_edge_subset(gt))
}

pub fn multiedge_metrics(pred: &BTreeSet<StitchPair>, gt: &BTreeSet<StitchPair>) -> Scores {
    multi_counts(pred, gt).multi_scores()
}

/// Share of patterns predicted exactly. `warning` is set for an empty list,
/// which scores 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gsp {
    pub value: f64,
    pub warning: bool,
}

pub fn gsp(per_pattern: &[(BTreeSet<StitchPair>, BTreeSet<StitchPair>)]) -> Gsp {
    if per_pattern.is_empty() {
        return Gsp { value: 0.0, warning: true };
    }
    let exact = per_pattern.iter().filter(|(p, g)| p == g).count();
    Gsp { value: exact as f64 / per_pattern.len() as f64, warning: false }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternScore {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact: bool,
}

/// The seven metrics, pooled over all pattern pairs, plus a per-pattern
/// breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub tp: f64,
    pub tr: f64,
    pub tf1: f64,
    pub mep: f64,
    pub mer: f64,
    pub mef1: f64,
    pub gsp: f64,
    pub empty_warning: bool,
    pub patterns: Vec<PatternScore>,
}

pub fn evaluate_sets(items: &[(String, BTreeSet<StitchPair>, BTreeSet<StitchPair>)]) -> EvalReport {
    let mut all = Counts::default();
    let mut multi = Counts::default();
    let mut patterns = Vec::with_capacity(items.len());
    let mut pairs = Vec::with_capacity(items.len());
    for (name, pred, gt) in items {
        let c = Counts::of(pred, gt);
        all = all.add(c);
        multi = multi.add(multi_counts(pred, gt));
        let s = c.pair_scores();
        patterns.push(PatternScore { name: name.clone(), precision: s.precision, recall: s.recall, f1: s.f1, exact: pred == gt });
        pairs.push((pred.clone(), gt.clone()));
    }
    let t = all.pair_scores();
    let me = multi.multi_scores();
    let g = gsp(&pairs);
    EvalReport {
        tp: t.precision,
        tr: t.recall,
        tf1: t.f1,
        mep: me.precision,
        mer: me.recall,
        mef1: me.f1,
        gsp: g.value,
        empty_warning: g.warning,
        patterns,
    }
}

/// Predicts every example and scores it against its ground truth.
pub fn evaluate(
    examples: &[TrainingExample],
    params: &ModelParams,
    model_cfg: &ModelConfig,
    sinkhorn: &SinkhornConfig,
) -> Result<EvalReport> {
    let mut items = Vec::with_capacity(examples.len());
    for ex in examples {
        let inf = infer(&ex.graph, &ex.features, params, model_cfg, sinkhorn)?;
        items.push((ex.name.clone(), ex.to_stitches(&inf.hard.pairs), ex.stitches.clone()));
    }
    Ok(evaluate_sets(&items))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use crate::model::Aggregator;
    use crate::pattern::fixtures::tube;

    fn set(pairs: &[(usize, usize)]) -> BTreeSet<StitchPair> {
        pairs.iter().map(|&(a, b)| StitchPair::new(EdgeRef::new(0, a), EdgeRef::new(0, b))).collect()
    }

    #[test]
    fn loss_is_zero_at_certainty() {
        let log_p = Matrix::zeros(4, 4);
        let gt = GroundTruth::from_pairs(3, &[(0, 1)]);
        assert_eq!(gt.unmatched, vec![2]);
        assert_eq!(nll_loss(&log_p, &gt, false).unwrap().0, 0.0);
    }

    #[test]
    fn single_pair_loss_is_two() {
        let mut log_p = Matrix::zeros(3, 3);
        log_p[(0, 1)] = -1.0;
        log_p[(1, 0)] = -1.0;
        let gt = GroundTruth { matched: vec![(0, 1)], unmatched: vec![] };
        let (loss, grad) = nll_loss(&log_p, &gt, false).unwrap();
        assert_eq!(loss, 2.0);
        assert_eq!(grad[(0, 1)], -1.0);
        assert_eq!(grad[(1, 0)], -1.0);
        let (norm, g) = nll_loss(&log_p, &gt, true).unwrap();
        assert_eq!(norm, 1.0);
        assert_eq!(g[(0, 1)], -0.5);
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let mut log_p = Matrix::zeros(5, 5);
        for (k, v) in log_p.as_mut_slice().iter_mut().enumerate() {
            *v = -0.1 * k as f64;
        }
        let gt = GroundTruth::from_pairs(4, &[(0, 2), (1, 2)]);
        let (_, grad) = nll_loss(&log_p, &gt, true).unwrap();
        let h = 1e-5;
        for idx in 0..25 {
            let mut up = log_p.clone();
            up.as_mut_slice()[idx] += h;
            let mut down = log_p.clone();
            down.as_mut_slice()[idx] -= h;
            let fd = (nll_loss(&up, &gt, true).unwrap().0 - nll_loss(&down, &gt, true).unwrap().0) / (2.0 * h);
            assert!((fd - grad.as_slice()[idx]).abs() <= 1e-6 * fd.abs().max(1e-8) + 1e-10);
        }
    }

    #[test]
    fn out_of_range_truth_is_rejected() {
        let gt = GroundTruth { matched: vec![(0, 5)], unmatched: vec![] };
        assert!(matches!(nll_loss(&Matrix::zeros(3, 3), &gt, false), Err(Error::NodeOutOfRange { node: 5, count: 2 })));
    }

    fn small_cfg() -> (ModelConfig, SinkhornConfig) {
        (ModelConfig { layers: 2, hidden: 8, embed_dim: 4, aggregator: Aggregator::Mean }, SinkhornConfig { iterations: 30, tau_multi: 0.4 })
    }

    #[test]
    fn end_to_end_gradient_matches_finite_differences() {
        let ex = TrainingExample::from_pattern(&tube(), FeatureMask::default()).unwrap();
        let (mc, sc) = small_cfg();
        let mut params = init_params(&mc, 11);
        params.z = 0.3;
        for l in &mut params.layers {
            for (k, b) in l.bias.iter_mut().enumerate() {
                *b = 0.05 * (k as f64 + 1.0);
            }
        }
        let (_, grads) = loss_and_gradient(&ex, &params, &mc, &sc, true).unwrap();
        let analytic = grads.to_flat();
        let base = params.to_flat();
        let h = 1e-5;
        let mut q = params.clone();
        for c in 0..base.len() {
            let mut v = base.clone();
            v[c] += h;
            q.set_flat(&v).unwrap();
            let up = loss_and_gradient(&ex, &q, &mc, &sc, true).unwrap().0;
            v[c] -= 2.0 * h;
            q.set_flat(&v).unwrap();
            let down = loss_and_gradient(&ex, &q, &mc, &sc, true).unwrap().0;
            let fd = (up - down) / (2.0 * h);
            let diff = (fd - analytic[c]).abs();
            assert!(diff <= 1e-4 * fd.abs().max(analytic[c].abs()) || diff <= 1e-8, "coord {c}: fd {fd} analytic {}", analytic[c]);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let ex = TrainingExample::from_pattern(&tube(), FeatureMask::default()).unwrap();
        let (mc, sc) = small_cfg();
        let mut params = init_params(&mc, 1);
        let before = params.clone();
        let mut opt = Adam::new(params.num_scalars());
        let cfg = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        let loss = train_step(&ex, &mut params, &mut opt, &mc, &sc, &cfg).unwrap();
        assert!(loss.is_finite() && loss > 0.0);
        assert_eq!(params, before);
    }

    #[test]
    fn training_on_one_tube_reduces_loss() {
        let ex = TrainingExample::from_pattern(&tube(), FeatureMask::default()).unwrap();
        let (mc, sc) = small_cfg();
        let cfg = TrainConfig { learning_rate: 1e-3, ..TrainConfig::default() };
        let mut params = init_params(&mc, 3);
        let mut opt = Adam::new(params.num_scalars());
        let mut losses = Vec::new();
        for _ in 0..21 {
            losses.push(train_step(&ex, &mut params, &mut opt, &mc, &sc, &cfg).unwrap());
        }
        assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    }

    #[test]
    fn fit_on_one_pattern_runs_one_step_per_epoch() {
        let ex = TrainingExample::from_pattern(&tube(), FeatureMask::default()).unwrap();
        let (mc, sc) = small_cfg();
        let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
        let mut t = Trainer::new(mc, sc, cfg).unwrap();
        t.run_epoch(core::slice::from_ref(&ex), &[]).unwrap();
        assert_eq!(t.optimizer.step, 1);
        assert!(t.is_done());
        assert!(matches!(fit(&[], &[], &mc, &sc, &cfg), Err(Error::EmptyDataset)));
    }

    #[test]
    fn resumed_training_matches_uninterrupted() {
        let exs: Vec<_> = (0..3)
            .map(|k| {
                let mut p = tube();
                p.panels[0].vertices[2].y += k as f64;
                p.panels[0].vertices[3].y += k as f64;
                p.panels[1].vertices[2].y += k as f64;
                p.panels[1].vertices[3].y += k as f64;
                TrainingExample::from_pattern(&p, FeatureMask::default()).unwrap()
            })
            .collect();
        let (mc, sc) = small_cfg();
        let cfg = TrainConfig { epochs: 3, seed: 5, ..TrainConfig::default() };
        let full = fit(&exs, &exs[..1], &mc, &sc, &cfg).unwrap();
        let mut t = Trainer::new(mc, sc, cfg).unwrap();
        t.run_epoch(&exs, &exs[..1]).unwrap();
        let mut resumed = t.clone();
        while !resumed.is_done() {
            resumed.run_epoch(&exs, &exs[..1]).unwrap();
        }
        assert_eq!(resumed.best, full.params);
        assert_eq!(resumed.history, full.history);
    }

    #[test]
    fn pair_metric_examples() {
        let gt = set(&[(0, 1), (2, 3)]);
        assert_eq!(pair_metrics(&gt, &gt), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
        let s = pair_metrics(&set(&[(0, 1)]), &gt);
        assert_eq!((s.precision, s.recall), (1.0, 0.5));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pair_metrics(&set(&[]), &set(&[])), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
        assert_eq!(pair_metrics(&set(&[]), &gt).precision, 0.0);
    }

    #[test]
    fn multiedge_metric_examples() {
        let gt = set(&[(0, 1), (0, 2)]);
        assert_eq!(multiedge_metrics(&gt, &gt), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
        let s = multiedge_metrics(&set(&[(0, 1)]), &gt);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 0.0, 0.0));
        let one = set(&[(0, 1), (2, 3)]);
        assert_eq!(multiedge_metrics(&one, &one), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn gsp_examples() {
        let a = set(&[(0, 1)]);
        let b = set(&[(2, 3)]);
        let g = gsp(&[(a.clone(), a.clone()), (b.clone(), b.clone()), (a.clone(), b.clone())]);
        assert!((g.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(gsp(&[(a.clone(), a.clone())]).value, 1.0);
        let sup = set(&[(0, 1), (2, 3)]);
        assert_eq!(gsp(&[(sup, a)]).value, 0.0);
        assert_eq!(gsp(&[]), Gsp { value: 0.0, warning: true });
    }

    #[test]
    fn f1_is_harmonic_mean() {
        let s = pair_metrics(&set(&[(0, 1), (4, 5), (6, 7)]), &set(&[(0, 1), (2, 3)]));
        assert!((s.f1 - 2.0 * s.precision * s.recall / (s.precision + s.recall)).abs() < 1e-15);
        assert!(math::abs(s.precision - 1.0 / 3.0) < 1e-15);
    }
}
