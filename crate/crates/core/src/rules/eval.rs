use super::{ResolvedClause, ResolvedRule, RuleError, RuleSpec};
use crate::scene::SymbolicScene;

pub fn satisfies(row: &[u8], clause: &ResolvedClause) -> bool {
    clause.iter().all(|&(c, v)| row[c] == v)
}

fn count(scene: &SymbolicScene, clause: &ResolvedClause) -> usize {
    scene.rows().iter().filter(|r| satisfies(r, clause)).count()
}

fn any(scene: &SymbolicScene, clause: &ResolvedClause) -> bool {
    scene.rows().iter().any(|r| satisfies(r, clause))
}

impl ResolvedRule {
    pub fn evaluate(&self, scene: &SymbolicScene) -> bool {
        match self {
            ResolvedRule::Existential(c) => any(scene, c),
            ResolvedRule::Conjunctive(cs) => cs.iter().all(|c| any(scene, c)),
            ResolvedRule::Disjunctive(cs) => cs.iter().any(|c| any(scene, c)),
            ResolvedRule::Cardinality(c, n) => count(scene, c) == *n,
            ResolvedRule::Universal(a, b) => scene.rows().iter().all(|r| !satisfies(r, a) || satisfies(r, b)),
            ResolvedRule::Relational(a, rel, b) => scene.relations().iter().any(|&(r, x, y)| {
                r == *rel && satisfies(scene.object(x), a) && satisfies(scene.object(y), b)
            }),
        }
    }
}

/// Ground-truth label of `scene` under `rule`.
pub fn evaluate_rule(rule: &RuleSpec, scene: &SymbolicScene) -> Result<bool, RuleError> {
    Ok(rule.resolve(scene.schema())?.evaluate(scene))
}
