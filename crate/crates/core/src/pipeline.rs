//! Pattern in, stitch pairs out, addressed in the caller's edge numbering.

use alloc::vec::Vec;

use crate::assignment::SinkhornConfig;
use crate::encoding::{encode_pattern, FeatureMask};
use crate::learning::infer;
use crate::model::{ModelConfig, ModelParams};
use crate::pattern::{EdgeRef, Pattern, StitchPair};
use crate::tensor::Matrix;
use crate::Result;

/// A trained model together with everything needed to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub model: ModelConfig,
    pub params: ModelParams,
    pub mask: FeatureMask,
    pub sinkhorn: SinkhornConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Sorted, in the input pattern's panel/edge numbering.
    pub stitches: Vec<StitchPair>,
    /// Sorted, in the input pattern's numbering.
    pub unstitched: Vec<EdgeRef>,
    /// Symmetrized extended plan over canonical node order.
    pub scores: Matrix,
    /// Input edge of each canonical node.
    pub nodes: Vec<EdgeRef>,
}

impl Predictor {
    pub fn predict(&self, p: &Pattern) -> Result<Prediction> {
        let enc = encode_pattern(p, self.mask)?;
        let inf = infer(&enc.graph, &enc.features, &self.params, &self.model, &self.sinkhorn)?;
        let nodes: Vec<EdgeRef> =
            (0..enc.graph.node_count()).map(|i| enc.remap.backward(enc.graph.edge_ref(i))).collect();
        let mut stitches: Vec<StitchPair> =
            inf.hard.pairs.iter().map(|&(a, b)| StitchPair::new(nodes[a], nodes[b])).collect();
        stitches.sort_unstable();
        let mut unstitched: Vec<EdgeRef> = inf.hard.unstitched.iter().map(|&i| nodes[i]).collect();
        unstitched.sort_unstable();
        Ok(Prediction { stitches, unstitched, scores: inf.scores, nodes })
    }

    /// `p` with its stitches replaced by the prediction.
    pub fn annotate(&self, p: &Pattern) -> Result<Pattern> {
        let pred = self.predict(p)?;
        Ok(Pattern { stitches: pred.stitches, ..p.clone() })
    }
}
