//! Neuro-symbolic rule-induction bench.
//!
//! Synthetic object scenes are corrupted by a calibrated perception
//! simulator, grounded into symbolic background knowledge, and handed to four
//! rule learners (a learning-from-failures ILP search, CART, naive Bayes over
//! bag-of-properties counts, and a DeepSets classifier).

pub mod generate;
pub mod perception;
pub mod reasoners;
pub mod rules;
pub mod scene;
pub mod seed;
