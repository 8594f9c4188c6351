use nesy_core::generate::{generate_scene, GenConfig};
use nesy_core::perception::{perceive, NoiseProfile};
use nesy_core::reasoners::{ilp_fit, Hypothesis, IlpClause, IlpConfig, IlpMode, IlpModel, IlpOutcome};
use nesy_core::rules::{evaluate_rule, Clause, Literal, RuleSpec};
use nesy_core::scene::{symbolic_scene_from_ground_truth, SchemaId, SymbolicScene, CLEVR_ATTR};
use nesy_core::seed::SeedKey;
use rand::seq::IndexedRandom;
use rand::Rng;

fn scenes(seed: u64, n: u64, noisy: bool) -> Vec<SymbolicScene> {
    let cfg = GenConfig::new(SchemaId::ClevrAttr, seed);
    let profile = NoiseProfile::builtin("sup15").unwrap();
    let mut rng = SeedKey::new(seed).with_str("noise").rng();
    (0..n)
        .map(|i| {
            let s = generate_scene(&cfg, i).unwrap();
            if noisy {
                perceive(&s, &profile, 10, &mut rng).unwrap().symbolic
            } else {
                symbolic_scene_from_ground_truth(&s)
            }
        })
        .collect()
}

fn random_clause(rng: &mut impl Rng, lits: usize) -> Clause {
    let mut concepts: Vec<usize> = (0..4).collect();
    rand::seq::SliceRandom::shuffle(concepts.as_mut_slice(), rng);
    Clause(
        concepts[..lits]
            .iter()
            .map(|&c| {
                let con = &CLEVR_ATTR.concepts[c];
                Literal::new(con.name, con.values.choose(rng).unwrap())
            })
            .collect(),
    )
}

fn random_rule(rng: &mut impl Rng) -> RuleSpec {
    match rng.random_range(0..4) {
        0 => {
            let n = rng.random_range(1..=2);
            RuleSpec::Existential { clause: random_clause(rng, n) }
        }
        1 => RuleSpec::Conjunctive { clauses: vec![random_clause(rng, 1), random_clause(rng, 2)] },
        2 => RuleSpec::Disjunctive { clauses: vec![random_clause(rng, 2), random_clause(rng, 2)] },
        _ => RuleSpec::Cardinality { clause: random_clause(rng, 1), count: 1 },
    }
}

fn labelled(seed: u64, n: u64, noisy: bool) -> (Vec<SymbolicScene>, Vec<bool>, RuleSpec) {
    let mut rng = SeedKey::new(seed).with_str("rule").rng();
    let pool = scenes(seed, n, noisy);
    let gt = scenes(seed, n, false);
    let rule = random_rule(&mut rng);
    let labels = gt.iter().map(|s| evaluate_rule(&rule, s).unwrap()).collect();
    (pool, labels, rule)
}

fn fit(scenes: &[SymbolicScene], labels: &[bool], cfg: &IlpConfig) -> IlpModel {
    let refs: Vec<&SymbolicScene> = scenes.iter().collect();
    ilp_fit(&refs, labels, cfg).unwrap()
}

fn cost(h: &Option<Hypothesis>, scenes: &[SymbolicScene], labels: &[bool]) -> usize {
    let positives = labels.iter().filter(|&&l| l).count();
    match h {
        None => positives,
        Some(h) => {
            let errors = scenes.iter().zip(labels).filter(|(s, &l)| h.covers(s) != l).count();
            h.size() + errors
        }
    }
}

#[test]
fn strict_hypotheses_are_sound() {
    let cfg = IlpConfig { mode: IlpMode::Strict, max_literals: 3, ..Default::default() };
    let mut found = 0;
    for seed in 0..30 {
        let (scenes, labels, rule) = labelled(seed, 60, false);
        let m = fit(&scenes, &labels, &cfg);
        if let Some(h) = &m.hypothesis {
            found += 1;
            for (s, &l) in scenes.iter().zip(&labels) {
                assert_eq!(h.covers(s), l, "{rule} learned as\n{h}");
            }
        } else {
            assert_ne!(m.outcome, IlpOutcome::Found);
        }
    }
    assert!(found >= 15, "{found}");
}

/// Every program of at most two one-variable clauses with at most two literals each.
fn small_language() -> Vec<Vec<IlpClause>> {
    let mut patterns = Vec::new();
    for (c, con) in CLEVR_ATTR.concepts.iter().enumerate() {
        for v in 0..con.arity() as u8 {
            patterns.push(vec![(c, v)]);
            for (d, dcon) in CLEVR_ATTR.concepts.iter().enumerate().skip(c + 1) {
                for w in 0..dcon.arity() as u8 {
                    patterns.push(vec![(c, v), (d, w)]);
                }
            }
        }
    }
    let clauses: Vec<IlpClause> = patterns.into_iter().map(|p| IlpClause { vars: vec![p], relation: None }).collect();
    let mut out: Vec<Vec<IlpClause>> = clauses.iter().map(|c| vec![c.clone()]).collect();
    for i in 0..clauses.len() {
        for j in i + 1..clauses.len() {
            out.push(vec![clauses[i].clone(), clauses[j].clone()]);
        }
    }
    out
}

#[test]
fn strict_result_is_minimal_in_small_language() {
    let language = small_language();
    let cfg = IlpConfig { mode: IlpMode::Strict, max_vars: 1, max_literals: 2, ..Default::default() };
    let mut solved = 0;
    for seed in 100..125 {
        let (scenes, labels, _) = labelled(seed, 40, false);
        let cover: Vec<Vec<bool>> =
            language.iter().map(|prog| scenes.iter().map(|s| prog.iter().any(|c| c.covers(s))).collect()).collect();
        let best = language
            .iter()
            .zip(&cover)
            .filter(|(_, cov)| **cov == labels)
            .map(|(prog, _)| prog.iter().map(IlpClause::size).sum::<usize>())
            .min();
        let m = fit(&scenes, &labels, &cfg);
        assert_eq!(m.hypothesis.as_ref().map(Hypothesis::size), best, "seed {seed}");
        solved += best.is_some() as usize;
    }
    assert!(solved >= 10, "{solved}");
}

#[test]
fn pruning_never_loses_the_answer() {
    for seed in 200..212 {
        let noisy = seed % 2 == 1;
        let (scenes, labels, rule) = labelled(seed, 40, noisy);
        for mode in [IlpMode::Strict, IlpMode::Mdl] {
            let base = IlpConfig { mode, max_literals: 2, max_iterations: 50_000_000, ..Default::default() };
            let pruned = fit(&scenes, &labels, &base);
            let full = fit(&scenes, &labels, &IlpConfig { prune: false, ..base.clone() });
            assert_ne!(full.outcome, IlpOutcome::BudgetExhausted);
            assert!(pruned.iterations_used <= full.iterations_used);
            match mode {
                IlpMode::Strict => assert_eq!(pruned.hypothesis, full.hypothesis.map(|h| Hypothesis { iterations_used: pruned.iterations_used, ..h }), "{rule}"),
                IlpMode::Mdl => assert_eq!(
                    cost(&pruned.hypothesis, &scenes, &labels),
                    cost(&full.hypothesis, &scenes, &labels),
                    "{rule}"
                ),
            }
        }
    }
}

#[test]
fn single_positive_single_literal_target() {
    // one positive scene holding the only cyan object
    let pool = scenes(9, 400, false);
    let cyan = 6u8;
    let has = |s: &SymbolicScene| s.rows().iter().any(|r| r[1] == cyan);
    let pos = pool.iter().find(|s| has(s)).unwrap().clone();
    let mut train = vec![pos];
    train.extend(pool.iter().filter(|s| !has(s)).take(30).cloned());
    let mut labels = vec![false; train.len()];
    labels[0] = true;
    let m = fit(&train, &labels, &IlpConfig { mode: IlpMode::Strict, ..Default::default() });
    let h = m.hypothesis.expect("found");
    assert_eq!(h.size(), 2);
    assert!(m.iterations_used <= CLEVR_ATTR.total_values() as u64, "{}", m.iterations_used);
}

#[test]
fn counting_rule_is_inexpressible() {
    let rule: RuleSpec = "count(material=metal) == 2".parse().unwrap();
    let pool = scenes(31, 2500, false);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for s in pool {
        if evaluate_rule(&rule, &s).unwrap() {
            if pos.len() < 80 {
                pos.push(s);
            }
        } else if neg.len() < 320 {
            neg.push(s);
        }
    }
    let labels: Vec<bool> = (0..pos.len()).map(|_| true).chain((0..neg.len()).map(|_| false)).collect();
    let train: Vec<SymbolicScene> = pos.into_iter().chain(neg).collect();
    for mode in [IlpMode::Strict, IlpMode::Mdl] {
        let m = fit(&train, &labels, &IlpConfig { mode, ..Default::default() });
        assert!(m.hypothesis.is_none(), "{mode:?}: {}", m.hypothesis.unwrap());
        assert_eq!(m.outcome, IlpOutcome::SpaceExhausted);
        assert!(train.iter().all(|s| !m.predict(s)));
    }
}

#[test]
fn budget_is_respected() {
    let (scenes, labels, _) = labelled(5, 60, true);
    let m = fit(&scenes, &labels, &IlpConfig { max_iterations: 37, ..Default::default() });
    assert_eq!(m.iterations_used, 37);
    assert_eq!(m.outcome, IlpOutcome::BudgetExhausted);
}
