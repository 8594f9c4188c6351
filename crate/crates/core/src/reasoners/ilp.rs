//! Generate-test-constrain search over existential definite programs.
//!
//! A clause binds one or two objects of the scene (`in(S,A)`, `in(S,B)`),
//! constrains each with attribute literals and optionally relates them with
//! one spatial literal. A hypothesis is a disjunction of at most two clauses.
//! Size counts body literals, so `pos(S) :- in(S,O), color(O,red).` has
//! size 2.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ReasonerError;
use crate::scene::{AttributeSchema, Relation, SchemaId, SymbolicScene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlpMode {
    /// Accept only hypotheses covering every positive and no negative.
    Strict,
    /// Minimize size + false negatives + false positives; fail when nothing
    /// beats the empty program.
    Mdl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IlpConfig {
    pub mode: IlpMode,
    pub max_iterations: u64,
    pub max_vars: usize,
    pub max_literals: usize,
    pub max_clauses: usize,
    pub relations: bool,
    pub prune: bool,
}

impl Default for IlpConfig {
    fn default() -> Self {
        IlpConfig {
            mode: IlpMode::Mdl,
            max_iterations: 200_000,
            max_vars: 2,
            max_literals: 4,
            max_clauses: 2,
            relations: true,
            prune: true,
        }
    }
}

impl IlpConfig {
    pub fn validate(&self) -> Result<(), ReasonerError> {
        let bad = |m: &str| Err(ReasonerError::InvalidConfig(format!("ilp: {m}")));
        if !(1..=2).contains(&self.max_vars) {
            return bad("max_vars must be 1 or 2");
        }
        if !(1..=4).contains(&self.max_literals) {
            return bad("max_literals must lie in 1..=4");
        }
        if !(1..=2).contains(&self.max_clauses) {
            return bad("max_clauses must be 1 or 2");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        Ok(())
    }
}

/// Partial attribute assignment for one variable, encoded in mixed radix
/// (digit 0 = concept unconstrained, d = value d-1).
#[derive(Debug)]
struct Patterns {
    strides: Vec<usize>,
    count: usize,
    digits: Vec<Vec<u8>>,
    by_lits: Vec<Vec<u16>>,
}

impl Patterns {
    fn new(schema: &AttributeSchema) -> Self {
        let mut strides = Vec::new();
        let mut count = 1;
        for c in schema.concepts {
            strides.push(count);
            count *= c.arity() + 1;
        }
        let mut digits = Vec::with_capacity(count);
        let mut by_lits = vec![Vec::new(); schema.concepts.len() + 1];
        for p in 0..count {
            let d: Vec<u8> = schema
                .concepts
                .iter()
                .zip(&strides)
                .map(|(c, &s)| ((p / s) % (c.arity() + 1)) as u8)
                .collect();
            let n = d.iter().filter(|&&x| x > 0).count();
            by_lits[n].push(p as u16);
            digits.push(d);
        }
        Patterns { strides, count, digits, by_lits }
    }

    fn subset(&self, a: u16, b: u16) -> bool {
        self.digits[a as usize].iter().zip(&self.digits[b as usize]).all(|(&x, &y)| x == 0 || x == y)
    }

    fn without(&self, p: u16, concept: usize) -> u16 {
        (p as usize - self.digits[p as usize][concept] as usize * self.strides[concept]) as u16
    }

    fn literals(&self, p: u16) -> Vec<(usize, u8)> {
        self.digits[p as usize]
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(c, &d)| (c, d - 1))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    One(u16),
    /// Unordered, `a < b`, neither pattern a subset of the other.
    Two(u16, u16),
    /// `rel(A,B)` with A matching the first pattern.
    Rel(u16, u16, u8),
}

const REL_ALL: [Relation; 2] = Relation::ALL;

/// Canonical form of an unrelated two-variable clause. Returns `None` for
/// the bare `in(S,A)` clause, which is outside the language.
fn canonical_two(pats: &Patterns, a: u16, b: u16) -> Option<Key> {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if pats.subset(a, b) {
        (b != 0).then_some(Key::One(b))
    } else if pats.subset(b, a) {
        (a != 0).then_some(Key::One(a))
    } else {
        Some(Key::Two(a, b))
    }
}

/// Clauses obtained by deleting one body literal (keeping the clause in the
/// language and canonical).
fn parents(pats: &Patterns, key: Key) -> Vec<Key> {
    let mut out = Vec::new();
    let drop_each = |p: u16| -> Vec<u16> {
        pats.digits[p as usize]
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(c, _)| pats.without(p, c))
            .collect()
    };
    match key {
        Key::One(p) => out.extend(drop_each(p).into_iter().filter(|&q| q != 0).map(Key::One)),
        Key::Two(a, b) => {
            out.extend(drop_each(a).into_iter().filter_map(|q| canonical_two(pats, q, b)));
            out.extend(drop_each(b).into_iter().filter_map(|q| canonical_two(pats, a, q)));
        }
        Key::Rel(a, b, r) => {
            out.extend(drop_each(a).into_iter().map(|q| Key::Rel(q, b, r)));
            out.extend(drop_each(b).into_iter().map(|q| Key::Rel(a, q, r)));
            out.extend(canonical_two(pats, a, b));
        }
    }
    out
}

/// Whether every scene satisfying `b` also satisfies `a`, by syntactic
/// containment of variable patterns.
fn generalizes(pats: &Patterns, a: Key, b: Key) -> bool {
    let sub = |x: u16, y: u16| pats.subset(x, y);
    match (a, b) {
        (Key::One(p), Key::One(q)) => sub(p, q),
        (Key::One(p), Key::Two(x, y) | Key::Rel(x, y, _)) => sub(p, x) || sub(p, y),
        (Key::Two(p, q), Key::One(x)) => sub(p, x) && sub(q, x),
        (Key::Two(p, q), Key::Two(x, y) | Key::Rel(x, y, _)) => (sub(p, x) && sub(q, y)) || (sub(p, y) && sub(q, x)),
        (Key::Rel(..), Key::One(_) | Key::Two(..)) => false,
        (Key::Rel(p, q, r), Key::Rel(x, y, s)) => r == s && sub(p, x) && sub(q, y),
    }
}

/// Per-scene object masks for every pattern plus relation adjacency.
struct Table {
    words: usize,
    scene_count: usize,
    masks: Vec<Vec<u32>>,
    adjacency: Vec<[Vec<u32>; 2]>,
    one_cover: Vec<Vec<u64>>,
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl Table {
    fn new(pats: &Patterns, schema: &AttributeSchema, scenes: &[&SymbolicScene], labels: &[bool]) -> Self {
        let n = scenes.len();
        let words = n.div_ceil(64);
        let concepts = schema.concepts.len();
        let mut masks = Vec::with_capacity(n);
        let mut adjacency = Vec::with_capacity(n);
        let mut one_cover = vec![vec![0u64; words]; pats.count];
        for (s, scene) in scenes.iter().enumerate() {
            let mut m = vec![0u32; pats.count];
            for (o, row) in scene.rows().iter().enumerate() {
                for subset in 0..(1usize << concepts) {
                    let mut idx = 0;
                    for c in 0..concepts {
                        if subset >> c & 1 == 1 {
                            idx += (row[c] as usize + 1) * pats.strides[c];
                        }
                    }
                    m[idx] |= 1 << o;
                }
            }
            for (p, &mask) in m.iter().enumerate() {
                if mask != 0 {
                    one_cover[p][s / 64] |= 1 << (s % 64);
                }
            }
            let mut adj = [vec![0u32; scene.len()], vec![0u32; scene.len()]];
            for &(rel, a, b) in scene.relations() {
                let r = REL_ALL.iter().position(|&x| x == rel).expect("known relation");
                adj[r][a] |= 1 << b;
            }
            masks.push(m);
            adjacency.push(adj);
        }
        let mut pos = vec![0u64; words];
        let mut neg = vec![0u64; words];
        for (s, &l) in labels.iter().enumerate() {
            let target = if l { &mut pos } else { &mut neg };
            target[s / 64] |= 1 << (s % 64);
        }
        Table { words, scene_count: n, masks, adjacency, one_cover, pos, neg }
    }

    fn cover(&self, key: Key) -> Vec<u64> {
        match key {
            Key::One(p) => self.one_cover[p as usize].clone(),
            Key::Two(a, b) => self.one_cover[a as usize].iter().zip(&self.one_cover[b as usize]).map(|(x, y)| x & y).collect(),
            Key::Rel(a, b, r) => {
                let mut out = vec![0u64; self.words];
                for s in 0..self.scene_count {
                    let ma = self.masks[s][a as usize];
                    let mb = self.masks[s][b as usize];
                    if ma == 0 || mb == 0 {
                        continue;
                    }
                    let adj = &self.adjacency[s][r as usize];
                    let mut bits = ma;
                    while bits != 0 {
                        let o = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if adj[o] & mb != 0 {
                            out[s / 64] |= 1 << (s % 64);
                            break;
                        }
                    }
                }
                out
            }
        }
    }

    fn counts(&self, cover: &[u64]) -> (usize, usize) {
        let t = cover.iter().zip(&self.pos).map(|(c, p)| (c & p).count_ones() as usize).sum();
        let f = cover.iter().zip(&self.neg).map(|(c, n)| (c & n).count_ones() as usize).sum();
        (t, f)
    }
}

/// One clause of a learned program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpClause {
    /// Attribute literals (concept, value) per bound variable; one or two entries.
    pub vars: Vec<Vec<(usize, u8)>>,
    /// Relation from the first variable to the second.
    pub relation: Option<Relation>,
}

impl IlpClause {
    pub fn size(&self) -> usize {
        self.vars.iter().map(|v| 1 + v.len()).sum::<usize>() + self.relation.is_some() as usize
    }

    pub fn covers(&self, scene: &SymbolicScene) -> bool {
        let sat = |o: usize, lits: &[(usize, u8)]| lits.iter().all(|&(c, v)| scene.object(o)[c] == v);
        let objects = scene.active_object_ids();
        match (self.vars.as_slice(), self.relation) {
            ([a], _) => objects.clone().any(|o| sat(o, a)),
            ([a, b], None) => objects.clone().any(|o| sat(o, a)) && objects.clone().any(|o| sat(o, b)),
            ([a, b], Some(rel)) => scene.relations().iter().any(|&(r, x, y)| r == rel && sat(x, a) && sat(y, b)),
            _ => false,
        }
    }

    pub fn render(&self, schema: &AttributeSchema) -> String {
        let names: &[&str] = if self.vars.len() == 1 { &["O"] } else { &["A", "B"] };
        let mut body = Vec::new();
        for (lits, var) in self.vars.iter().zip(names) {
            body.push(format!("in(S,{var})"));
            for &(c, v) in lits {
                body.push(format!("{}({var},{})", schema.concepts[c].name, schema.value_name(c, v)));
            }
        }
        if let Some(rel) = self.relation {
            body.push(format!("{rel}(A,B)"));
        }
        format!("pos(S) :- {}.", body.join(", "))
    }
}

/// A learned disjunction of clauses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypothesisRecord", into = "HypothesisRecord")]
pub struct Hypothesis {
    pub schema: SchemaId,
    pub clauses: Vec<IlpClause>,
    pub iterations_used: u64,
}

impl Hypothesis {
    pub fn size(&self) -> usize {
        self.clauses.iter().map(IlpClause::size).sum()
    }

    pub fn covers(&self, scene: &SymbolicScene) -> bool {
        self.clauses.iter().any(|c| c.covers(scene))
    }

    /// One definite clause per line.
    pub fn program(&self) -> String {
        let schema = self.schema.schema();
        self.clauses.iter().map(|c| c.render(schema)).collect::<Vec<_>>().join("\n")
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.program())
    }
}

#[derive(Serialize, Deserialize)]
struct HypothesisRecord {
    schema: SchemaId,
    program: String,
    size: usize,
    iterations_used: u64,
}

impl From<Hypothesis> for HypothesisRecord {
    fn from(h: Hypothesis) -> Self {
        HypothesisRecord { schema: h.schema, program: h.program(), size: h.size(), iterations_used: h.iterations_used }
    }
}

impl TryFrom<HypothesisRecord> for Hypothesis {
    type Error = ReasonerError;

    fn try_from(r: HypothesisRecord) -> Result<Self, Self::Error> {
        let clauses = parse_program(r.schema.schema(), &r.program)?;
        let h = Hypothesis { schema: r.schema, clauses, iterations_used: r.iterations_used };
        if h.size() != r.size {
            return Err(ReasonerError::Parse(format!("program has size {} but record says {}", h.size(), r.size)));
        }
        Ok(h)
    }
}

/// Parse clauses written by [`Hypothesis::program`].
pub fn parse_program(schema: &AttributeSchema, text: &str) -> Result<Vec<IlpClause>, ReasonerError> {
    let bad = |m: String| ReasonerError::Parse(m);
    let mut clauses = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let body = line
            .strip_prefix("pos(S) :-")
            .and_then(|b| b.trim().strip_suffix('.'))
            .ok_or_else(|| bad(format!("not a definite clause: `{line}`")))?;
        let mut vars: Vec<(String, Vec<(usize, u8)>)> = Vec::new();
        let mut relation = None;
        let mut rest = body.trim();
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| bad(format!("expected `(` in `{rest}`")))?;
            let close = rest.find(')').ok_or_else(|| bad(format!("expected `)` in `{rest}`")))?;
            let name = rest[..open].trim();
            let args: Vec<&str> = rest[open + 1..close].split(',').map(str::trim).collect();
            rest = rest[close + 1..].trim_start().trim_start_matches(',').trim_start();
            let var_index = |v: &str, vars: &Vec<(String, Vec<(usize, u8)>)>| {
                vars.iter().position(|(n, _)| n == v).ok_or_else(|| bad(format!("unbound variable `{v}`")))
            };
            match (name, args.as_slice()) {
                ("in", ["S", v]) => vars.push((v.to_string(), Vec::new())),
                (rel, [a, b]) if Relation::from_name(rel).is_some() && var_index(b, &vars).is_ok() => {
                    if var_index(a, &vars)? != 0 || var_index(b, &vars)? != 1 {
                        return Err(bad(format!("relation must run from the first to the second variable: `{line}`")));
                    }
                    relation = Relation::from_name(rel);
                }
                (concept, [v, value]) => {
                    let c = schema.concept_index(concept).ok_or_else(|| bad(format!("unknown concept `{concept}`")))?;
                    let val =
                        schema.concepts[c].value_index(value).ok_or_else(|| bad(format!("unknown value `{value}`")))?;
                    let i = var_index(v, &vars)?;
                    vars[i].1.push((c, val));
                }
                _ => return Err(bad(format!("cannot read literal `{name}` in `{line}`"))),
            }
        }
        if vars.is_empty() || vars.len() > 2 {
            return Err(bad(format!("clause must bind one or two objects: `{line}`")));
        }
        clauses.push(IlpClause { vars: vars.into_iter().map(|(_, l)| l).collect(), relation });
    }
    Ok(clauses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlpOutcome {
    /// The search completed and the hypothesis is optimal in the language.
    Found,
    /// Iteration budget hit; in MDL mode the best program so far is kept.
    BudgetExhausted,
    SpaceExhausted,
}

/// Result of a search; `hypothesis` is `None` on failure, and the model
/// then predicts negative everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub schema: SchemaId,
    pub hypothesis: Option<Hypothesis>,
    pub outcome: IlpOutcome,
    pub iterations_used: u64,
}

impl IlpModel {
    pub fn predict(&self, scene: &SymbolicScene) -> bool {
        self.hypothesis.as_ref().is_some_and(|h| h.covers(scene))
    }
}

struct PoolEntry {
    key: Key,
    cover: Vec<u64>,
    t: usize,
    f: usize,
}

struct Search<'a> {
    cfg: &'a IlpConfig,
    pats: Patterns,
    table: Table,
    positives: usize,
    iterations: u64,
    blocked: HashMap<Key, bool>,
    pool: Vec<Vec<PoolEntry>>,
    best: Option<(usize, Vec<Key>)>,
}

enum Step {
    Continue,
    Done,
}

impl Search<'_> {
    fn max_clause_size(&self) -> usize {
        let l = self.cfg.max_literals;
        match (self.cfg.max_vars, self.cfg.relations) {
            (1, _) => 1 + l,
            (_, false) => 2 + 2 * l,
            _ => 3 + 2 * l,
        }
    }

    fn clauses_of_size(&self, s: usize) -> Vec<Key> {
        let l = self.cfg.max_literals;
        let by = &self.pats.by_lits;
        let mut out = Vec::new();
        if (2..=1 + l).contains(&s) && s - 1 < by.len() {
            out.extend(by[s - 1].iter().map(|&p| Key::One(p)));
        }
        if self.cfg.max_vars < 2 {
            return out;
        }
        if s >= 4 {
            for la in 1..=(s - 2) / 2 {
                let lb = s - 2 - la;
                if lb > l || lb >= by.len() {
                    continue;
                }
                for &a in &by[la] {
                    for &b in &by[lb] {
                        if (la < lb || a < b) && !self.pats.subset(a, b) && !self.pats.subset(b, a) {
                            out.push(Key::Two(a.min(b), a.max(b)));
                        }
                    }
                }
            }
        }
        if self.cfg.relations && s >= 3 {
            for la in 0..=(s - 3).min(l) {
                let lb = s - 3 - la;
                if lb > l || lb >= by.len() || la >= by.len() {
                    continue;
                }
                for r in 0..REL_ALL.len() as u8 {
                    for &a in &by[la] {
                        for &b in &by[lb] {
                            out.push(Key::Rel(a, b, r));
                        }
                    }
                }
            }
        }
        out
    }

    fn spend(&mut self) -> bool {
        if self.iterations >= self.cfg.max_iterations {
            return false;
        }
        self.iterations += 1;
        true
    }

    /// Record a tested hypothesis; returns Done when strict search succeeds.
    fn consider(&mut self, keys: Vec<Key>, size: usize, t: usize, f: usize) -> Step {
        match self.cfg.mode {
            IlpMode::Strict => {
                if t == self.positives && f == 0 {
                    self.best = Some((size, keys));
                    return Step::Done;
                }
            }
            IlpMode::Mdl => {
                let cost = size + (self.positives - t) + f;
                if cost < self.best.as_ref().map_or(self.positives, |b| b.0) {
                    self.best = Some((cost, keys));
                }
            }
        }
        Step::Continue
    }

    fn bound(&self) -> usize {
        match (&self.best, self.cfg.mode) {
            (Some(_), IlpMode::Strict) => 0,
            (Some((cost, _)), IlpMode::Mdl) => *cost,
            (None, IlpMode::Mdl) => self.positives,
            (None, IlpMode::Strict) => usize::MAX,
        }
    }

    fn test_single(&mut self, key: Key, size: usize) -> Option<Step> {
        if self.cfg.prune && parents(&self.pats, key).iter().any(|p| self.blocked.get(p) == Some(&true)) {
            self.blocked.insert(key, true);
            return Some(Step::Continue);
        }
        if !self.spend() {
            return None;
        }
        let cover = self.table.cover(key);
        let (t, f) = self.table.counts(&cover);
        let block = match self.cfg.mode {
            IlpMode::Strict => t == 0 || f == 0,
            IlpMode::Mdl => t == 0 || f == 0 || t <= size + 1,
        };
        self.blocked.insert(key, self.cfg.prune && block);
        let useful = match self.cfg.mode {
            IlpMode::Strict => f == 0 && t >= 1,
            IlpMode::Mdl => t > size,
        };
        if useful && self.cfg.max_clauses >= 2 {
            self.pool[size].push(PoolEntry { key, cover, t, f });
        }
        Some(self.consider(vec![key], size, t, f))
    }

    fn test_pairs(&mut self, s: usize) -> Option<Step> {
        for s1 in 2..=s / 2 {
            let s2 = s - s1;
            if s2 >= self.pool.len() {
                continue;
            }
            let (n1, n2) = (self.pool[s1].len(), self.pool[s2].len());
            for i in 0..n1 {
                let start = if s1 == s2 { i + 1 } else { 0 };
                for j in start..n2 {
                    let (a, b) = (&self.pool[s1][i], &self.pool[s2][j]);
                    // constraint: no pair this weak can beat the incumbent
                    let missed = self.positives.saturating_sub(a.t + b.t);
                    let hopeless = match self.cfg.mode {
                        IlpMode::Strict => missed > 0,
                        IlpMode::Mdl => s + missed + a.f.max(b.f) >= self.bound(),
                    };
                    if hopeless || generalizes(&self.pats, a.key, b.key) || generalizes(&self.pats, b.key, a.key) {
                        continue;
                    }
                    let cover: Vec<u64> = a.cover.iter().zip(&b.cover).map(|(x, y)| x | y).collect();
                    let keys = vec![a.key, b.key];
                    if !self.spend() {
                        return None;
                    }
                    let (t, f) = self.table.counts(&cover);
                    if let Step::Done = self.consider(keys, s, t, f) {
                        return Some(Step::Done);
                    }
                }
            }
        }
        Some(Step::Continue)
    }

    fn run(&mut self) -> IlpOutcome {
        let max_single = self.max_clause_size();
        let max_total = max_single * self.cfg.max_clauses;
        for s in 2..=max_total {
            if s >= self.bound() {
                return IlpOutcome::SpaceExhausted;
            }
            if s <= max_single {
                for key in self.clauses_of_size(s) {
                    match self.test_single(key, s) {
                        None => return IlpOutcome::BudgetExhausted,
                        Some(Step::Done) => return IlpOutcome::Found,
                        Some(Step::Continue) => {}
                    }
                }
            }
            if self.cfg.max_clauses >= 2 {
                match self.test_pairs(s) {
                    None => return IlpOutcome::BudgetExhausted,
                    Some(Step::Done) => return IlpOutcome::Found,
                    Some(Step::Continue) => {}
                }
            }
        }
        IlpOutcome::SpaceExhausted
    }

    fn to_clause(&self, key: Key) -> IlpClause {
        let lits = |p: u16| self.pats.literals(p);
        match key {
            Key::One(p) => IlpClause { vars: vec![lits(p)], relation: None },
            Key::Two(a, b) => IlpClause { vars: vec![lits(a), lits(b)], relation: None },
            Key::Rel(a, b, r) => IlpClause { vars: vec![lits(a), lits(b)], relation: Some(REL_ALL[r as usize]) },
        }
    }
}

/// Search for a program separating positive from negative scenes.
pub fn ilp_fit(scenes: &[&SymbolicScene], labels: &[bool], cfg: &IlpConfig) -> Result<IlpModel, ReasonerError> {
    cfg.validate()?;
    if scenes.is_empty() {
        return Err(ReasonerError::EmptyTrainingSet);
    }
    if scenes.len() != labels.len() {
        return Err(ReasonerError::LengthMismatch { scenes: scenes.len(), labels: labels.len() });
    }
    let schema_id = scenes[0].schema_id();
    if scenes.iter().any(|s| s.schema_id() != schema_id) {
        return Err(ReasonerError::SchemaMismatch);
    }
    if let Some(s) = scenes.iter().find(|s| s.len() > 32) {
        return Err(ReasonerError::InvalidConfig(format!("scene {} has more than 32 objects", s.scene_id())));
    }
    let schema = schema_id.schema();
    let pats = Patterns::new(schema);
    let table = Table::new(&pats, schema, scenes, labels);
    let positives = labels.iter().filter(|&&l| l).count();
    let mut search = Search {
        cfg,
        table,
        positives,
        iterations: 0,
        blocked: HashMap::new(),
        pool: Vec::new(),
        best: None,
        pats,
    };
    let max_single = search.max_clause_size();
    search.pool = (0..=max_single).map(|_| Vec::new()).collect();
    let mut outcome = search.run();
    let hypothesis = search.best.take().map(|(_, keys)| Hypothesis {
        schema: schema_id,
        clauses: keys.into_iter().map(|k| search.to_clause(k)).collect(),
        iterations_used: search.iterations,
    });
    if hypothesis.is_some() && outcome == IlpOutcome::SpaceExhausted {
        outcome = IlpOutcome::Found;
    }
    Ok(IlpModel { schema: schema_id, hypothesis, outcome, iterations_used: search.iterations })
}
