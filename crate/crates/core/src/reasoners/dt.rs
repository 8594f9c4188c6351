//! CART classification tree over integer count vectors.

use serde::{Deserialize, Serialize};

use super::ReasonerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for DtConfig {
    fn default() -> Self {
        DtConfig { max_depth: 8, min_leaf: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { label: bool, positives: usize, negatives: usize },
    /// Goes left when `x[feature] <= threshold`.
    Split { feature: usize, threshold: u32, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub width: usize,
    pub root: Node,
}

fn gini_sum(pos: usize, n: usize) -> f64 {
    // n * gini impurity
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64;
    let q = (n - pos) as f64;
    n as f64 - (p * p + q * q) / n as f64
}

struct Builder<'a> {
    x: &'a [Vec<u32>],
    y: &'a [bool],
    cfg: &'a DtConfig,
    width: usize,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let positives = idx.iter().filter(|&&i| self.y[i]).count();
        let negatives = idx.len() - positives;
        Node::Leaf { label: positives > negatives, positives, negatives }
    }

    /// Best (feature, threshold, weighted impurity) by exhaustive scan.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, u32, f64)> {
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut best: Option<(usize, u32, f64)> = None;
        for f in 0..self.width {
            let max = idx.iter().map(|&i| self.x[i][f]).max().unwrap_or(0) as usize;
            let mut count = vec![0usize; max + 1];
            let mut pos = vec![0usize; max + 1];
            for &i in idx {
                let v = self.x[i][f] as usize;
                count[v] += 1;
                pos[v] += self.y[i] as usize;
            }
            let (mut nl, mut pl) = (0, 0);
            for t in 0..max {
                nl += count[t];
                pl += pos[t];
                if count[t] == 0 || nl < self.cfg.min_leaf || n - nl < self.cfg.min_leaf {
                    continue;
                }
                let score = (gini_sum(pl, nl) + gini_sum(total_pos - pl, n - nl)) / n as f64;
                if best.is_none_or(|b| score < b.2 - 1e-12) {
                    best = Some((f, t as u32, score));
                }
            }
        }
        best
    }

    fn grow(&self, idx: Vec<usize>, depth: usize) -> Node {
        let positives = idx.iter().filter(|&&i| self.y[i]).count();
        if depth >= self.cfg.max_depth || positives == 0 || positives == idx.len() || idx.len() < 2 * self.cfg.min_leaf {
            return self.leaf(&idx);
        }
        let parent = gini_sum(positives, idx.len()) / idx.len() as f64;
        match self.best_split(&idx) {
            Some((feature, threshold, score)) if score < parent - 1e-12 => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.grow(l, depth + 1)),
                    right: Box::new(self.grow(r, depth + 1)),
                }
            }
            _ => self.leaf(&idx),
        }
    }
}

/// Greedy Gini splits; ties go to the lowest feature, then the lowest
/// threshold; leaves predict the majority class with ties negative.
pub fn dt_fit(x: &[Vec<u32>], y: &[bool], cfg: &DtConfig) -> Result<DecisionTree, ReasonerError> {
    if x.is_empty() {
        return Err(ReasonerError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ReasonerError::LengthMismatch { scenes: x.len(), labels: y.len() });
    }
    if cfg.min_leaf == 0 {
        return Err(ReasonerError::InvalidConfig("dt: min_leaf must be positive".into()));
    }
    let width = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != width) {
        return Err(ReasonerError::WidthMismatch { expected: width, found: row.len() });
    }
    let b = Builder { x, y, cfg, width };
    Ok(DecisionTree { width, root: b.grow((0..x.len()).collect(), 0) })
}

impl DecisionTree {
    pub fn predict(&self, v: &[u32]) -> Result<bool, ReasonerError> {
        if v.len() != self.width {
            return Err(ReasonerError::WidthMismatch { expected: self.width, found: v.len() });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return Ok(*label),
                Node::Split { feature, threshold, left, right } => {
                    node = if v[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}
