use std::fmt;

use serde::{Deserialize, Serialize};

use super::RuleError;
use crate::scene::{AttributeSchema, Relation};

/// `concept=value`, kept by name so one rule can be checked against any schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub concept: String,
    pub value: String,
}

impl Literal {
    pub fn new(concept: &str, value: &str) -> Self {
        Literal { concept: concept.into(), value: value.into() }
    }
}

/// Conjunction of attribute literals about a single object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn of(pairs: &[(&str, &str)]) -> Self {
        Clause(pairs.iter().map(|(c, v)| Literal::new(c, v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleSpec {
    Existential { clause: Clause },
    Conjunctive { clauses: Vec<Clause> },
    Disjunctive { clauses: Vec<Clause> },
    Cardinality { clause: Clause, count: usize },
    Universal { antecedent: Clause, consequent: Clause },
    Relational { a: Clause, relation: Relation, b: Clause },
}

impl RuleSpec {
    pub fn family(&self) -> &'static str {
        match self {
            RuleSpec::Existential { .. } => "existential",
            RuleSpec::Conjunctive { .. } => "conjunctive",
            RuleSpec::Disjunctive { .. } => "disjunctive",
            RuleSpec::Cardinality { .. } => "cardinality",
            RuleSpec::Universal { .. } => "universal",
            RuleSpec::Relational { .. } => "relational",
        }
    }

    pub fn clauses(&self) -> Vec<&Clause> {
        match self {
            RuleSpec::Existential { clause } | RuleSpec::Cardinality { clause, .. } => vec![clause],
            RuleSpec::Conjunctive { clauses } | RuleSpec::Disjunctive { clauses } => clauses.iter().collect(),
            RuleSpec::Universal { antecedent, consequent } => vec![antecedent, consequent],
            RuleSpec::Relational { a, b, .. } => vec![a, b],
        }
    }

    /// Check every literal against the schema and resolve it to indices.
    pub fn resolve(&self, schema: &AttributeSchema) -> Result<ResolvedRule, RuleError> {
        let r = |c: &Clause| resolve_clause(c, schema);
        Ok(match self {
            RuleSpec::Existential { clause } => ResolvedRule::Existential(r(clause)?),
            RuleSpec::Conjunctive { clauses } => {
                ResolvedRule::Conjunctive(clauses.iter().map(r).collect::<Result<_, _>>()?)
            }
            RuleSpec::Disjunctive { clauses } => {
                ResolvedRule::Disjunctive(clauses.iter().map(r).collect::<Result<_, _>>()?)
            }
            RuleSpec::Cardinality { clause, count } => ResolvedRule::Cardinality(r(clause)?, *count),
            RuleSpec::Universal { antecedent, consequent } => ResolvedRule::Universal(r(antecedent)?, r(consequent)?),
            RuleSpec::Relational { a, relation, b } => ResolvedRule::Relational(r(a)?, *relation, r(b)?),
        })
    }
}

/// Literals as (concept index, value index).
pub type ResolvedClause = Vec<(usize, u8)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedRule {
    Existential(ResolvedClause),
    Conjunctive(Vec<ResolvedClause>),
    Disjunctive(Vec<ResolvedClause>),
    Cardinality(ResolvedClause, usize),
    Universal(ResolvedClause, ResolvedClause),
    Relational(ResolvedClause, Relation, ResolvedClause),
}

fn resolve_clause(clause: &Clause, schema: &AttributeSchema) -> Result<ResolvedClause, RuleError> {
    clause
        .0
        .iter()
        .map(|lit| {
            let unknown = || RuleError::UnknownLiteral {
                concept: lit.concept.clone(),
                value: lit.value.clone(),
                schema: schema.id,
            };
            let c = schema.concept_index(&lit.concept).ok_or_else(unknown)?;
            let v = schema.concepts[c].value_index(&lit.value).ok_or_else(unknown)?;
            Ok((c, v))
        })
        .collect()
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}={}", lit.concept, lit.value)?;
        }
        Ok(())
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joined = |f: &mut fmt::Formatter<'_>, clauses: &[Clause], op: &str| {
            for (i, c) in clauses.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "exists({c})")?;
            }
            Ok(())
        };
        match self {
            RuleSpec::Existential { clause } => write!(f, "exists({clause})"),
            RuleSpec::Conjunctive { clauses } => joined(f, clauses, "and"),
            RuleSpec::Disjunctive { clauses } => joined(f, clauses, "or"),
            RuleSpec::Cardinality { clause, count } => write!(f, "count({clause}) == {count}"),
            RuleSpec::Universal { antecedent, consequent } => write!(f, "forall({antecedent} -> {consequent})"),
            RuleSpec::Relational { a, relation, b } => write!(f, "exists2(A: {a}, {relation}, B: {b})"),
        }
    }
}

impl std::str::FromStr for RuleSpec {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_rule(s)
    }
}
