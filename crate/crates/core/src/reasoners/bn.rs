//! Class-conditional categorical model over clipped counts (naive Bayes).

use serde::{Deserialize, Serialize};

use super::ReasonerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BnConfig {
    pub alpha: f64,
    pub count_cap: u32,
}

impl Default for BnConfig {
    fn default() -> Self {
        BnConfig { alpha: 1.0, count_cap: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub width: usize,
    pub alpha: f64,
    pub count_cap: u32,
    /// Training examples per class, `[negative, positive]`.
    pub class_counts: [usize; 2],
    /// `counts[class][feature][value]`, value clipped to `0..=count_cap`.
    pub counts: [Vec<Vec<usize>>; 2],
}

pub fn bn_fit(x: &[Vec<u32>], y: &[bool], cfg: &BnConfig) -> Result<NaiveBayes, ReasonerError> {
    if x.is_empty() {
        return Err(ReasonerError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ReasonerError::LengthMismatch { scenes: x.len(), labels: y.len() });
    }
    if !(cfg.alpha > 0.0) {
        return Err(ReasonerError::InvalidConfig("bn: alpha must be positive".into()));
    }
    let width = x[0].len();
    let values = cfg.count_cap as usize + 1;
    let mut counts = [vec![vec![0; values]; width], vec![vec![0; values]; width]];
    let mut class_counts = [0; 2];
    for (row, &label) in x.iter().zip(y) {
        if row.len() != width {
            return Err(ReasonerError::WidthMismatch { expected: width, found: row.len() });
        }
        let c = label as usize;
        class_counts[c] += 1;
        for (f, &v) in row.iter().enumerate() {
            counts[c][f][v.min(cfg.count_cap) as usize] += 1;
        }
    }
    Ok(NaiveBayes { width, alpha: cfg.alpha, count_cap: cfg.count_cap, class_counts, counts })
}

impl NaiveBayes {
    /// Smoothed log P(x_f = v | class).
    pub fn log_likelihood(&self, class: usize, feature: usize, value: u32) -> f64 {
        let v = value.min(self.count_cap) as usize;
        let k = (self.count_cap + 1) as f64;
        ((self.counts[class][feature][v] as f64 + self.alpha) / (self.class_counts[class] as f64 + self.alpha * k)).ln()
    }

    /// log P(pos | x) - log P(neg | x).
    pub fn log_odds(&self, v: &[u32]) -> Result<f64, ReasonerError> {
        if v.len() != self.width {
            return Err(ReasonerError::WidthMismatch { expected: self.width, found: v.len() });
        }
        let prior = (self.class_counts[1] as f64).ln() - (self.class_counts[0] as f64).ln();
        Ok(v.iter()
            .enumerate()
            .fold(prior, |acc, (f, &x)| acc + self.log_likelihood(1, f, x) - self.log_likelihood(0, f, x)))
    }

    pub fn posterior(&self, v: &[u32]) -> Result<f64, ReasonerError> {
        let lo = self.log_odds(v)?;
        Ok(1.0 / (1.0 + (-lo).exp()))
    }

    pub fn predict(&self, v: &[u32]) -> Result<bool, ReasonerError> {
        Ok(self.posterior(v)? > 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separating_feature_dominates() {
        let x: Vec<Vec<u32>> = (0..40).map(|i| vec![(i % 2) * 3, i % 5, 1]).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 2 == 1).collect();
        let m = bn_fit(&x, &y, &BnConfig::default()).unwrap();
        for (v, &l) in x.iter().zip(&y) {
            assert_eq!(m.predict(v).unwrap(), l);
        }
        let swing = |f: usize| (m.log_likelihood(1, f, 3) - m.log_likelihood(0, f, 3)).abs();
        assert!(swing(0) > swing(1) && swing(0) > swing(2));
    }

    #[test]
    fn uninformative_features_follow_the_prior() {
        let x = vec![vec![1, 2]; 30];
        let y: Vec<bool> = (0..30).map(|i| i < 20).collect();
        let m = bn_fit(&x, &y, &BnConfig::default()).unwrap();
        assert!(m.predict(&[1, 2]).unwrap());
        // balanced classes and identical rows: exactly even odds, which is negative
        let y: Vec<bool> = (0..30).map(|i| i < 15).collect();
        let m = bn_fit(&x, &y, &BnConfig::default()).unwrap();
        assert!(m.log_odds(&[1, 2]).unwrap().abs() < 1e-12);
        assert!(!m.predict(&[1, 2]).unwrap());
    }

    #[test]
    fn hand_computed_posterior() {
        // 20 examples, 2 features, cap 4, alpha 1
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20u32 {
            x.push(vec![i % 3, (i * 7) % 6]);
            y.push(i % 4 == 0);
        }
        let m = bn_fit(&x, &y, &BnConfig::default()).unwrap();
        let query = [2u32, 5];
        // joint counts by brute force
        let mut score = [0.0f64; 2];
        for c in 0..2 {
            let members: Vec<&Vec<u32>> = x.iter().zip(&y).filter(|(_, &l)| l as usize == c).map(|(r, _)| r).collect();
            let n = members.len() as f64;
            let mut p = n / 20.0;
            for f in 0..2 {
                let hits = members.iter().filter(|r| r[f].min(4) == query[f].min(4)).count() as f64;
                p *= (hits + 1.0) / (n + 5.0);
            }
            score[c] = p;
        }
        let expect = score[1] / (score[0] + score[1]);
        assert!((m.posterior(&query).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch() {
        let m = bn_fit(&[vec![0, 1]], &[true], &BnConfig::default()).unwrap();
        assert!(matches!(m.predict(&[0]), Err(ReasonerError::WidthMismatch { .. })));
    }
}
