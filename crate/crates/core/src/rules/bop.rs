use crate::scene::{AttributeSchema, SymbolicScene};

/// Number of entries in a Bag-of-Properties vector for `schema`.
pub fn bop_width(schema: &AttributeSchema) -> usize {
    let arities: Vec<usize> = schema.concepts.iter().map(|c| c.arity()).collect();
    let mut pairs = 0;
    for i in 0..arities.len() {
        for j in i + 1..arities.len() {
            pairs += arities[i] * arities[j];
        }
    }
    schema.total_values() + pairs
}

/// Feature names in vector order, e.g. `red` or `red&cube`.
pub fn bop_feature_names(schema: &AttributeSchema) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(bop_width(schema));
    for c in schema.concepts {
        names.extend(c.values.iter().map(|v| v.to_string()));
    }
    for (i, a) in schema.concepts.iter().enumerate() {
        for b in &schema.concepts[i + 1..] {
            for va in a.values {
                for vb in b.values {
                    names.push(format!("{va}&{vb}"));
                }
            }
        }
    }
    names
}

/// Per-value counts followed by within-object value-pair counts over
/// distinct concepts (concept pairs in schema order, values row-major).
pub fn bag_of_properties(scene: &SymbolicScene, schema: &AttributeSchema) -> Vec<u32> {
    let offsets = schema.value_offsets();
    let arities: Vec<usize> = schema.concepts.iter().map(|c| c.arity()).collect();
    let mut pair_offsets = Vec::new();
    let mut at = schema.total_values();
    for i in 0..arities.len() {
        for j in i + 1..arities.len() {
            pair_offsets.push(at);
            at += arities[i] * arities[j];
        }
    }
    let mut out = vec![0u32; at];
    for row in scene.rows() {
        let mut p = 0;
        for i in 0..arities.len() {
            out[offsets[i] + row[i] as usize] += 1;
            for j in i + 1..arities.len() {
                out[pair_offsets[p] + row[i] as usize * arities[j] + row[j] as usize] += 1;
                p += 1;
            }
        }
    }
    out
}
