//! Representative tables computed by exhaustive gluing over bounded universes.

use std::collections::HashMap;

use rayon::prelude::*;

use super::property::{self, Property};
use super::universe::{check_budget, enumerate_universe};
use super::FiniteStateError;
use crate::boundaried::{glue_compatible, BoundariedStructure, CompatKey, Kind};
use crate::text::{records, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub rep: BoundariedStructure,
    /// Evaluation bits over the table's context family, context `j` at bit
    /// `j % 64` of word `j / 64`; incompatible contexts read as zero.
    pub signature: Vec<u64>,
    pub compat: CompatKey,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepresentativeTable {
    property: Property,
    c: usize,
    universe_bound: usize,
    context_bound: usize,
    context_count: usize,
    classes: Vec<ClassEntry>,
}

/// A table together with the enumerated universe and its class assignment.
#[derive(Clone, Debug)]
pub struct ClassComputation {
    pub table: RepresentativeTable,
    pub universe: Vec<BoundariedStructure>,
    pub class_of: Vec<usize>,
    pub contexts: Vec<BoundariedStructure>,
}

impl RepresentativeTable {
    pub fn property(&self) -> Property {
        self.property
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn universe_bound(&self) -> usize {
        self.universe_bound
    }

    pub fn context_bound(&self) -> usize {
        self.context_bound
    }

    pub fn context_count(&self) -> usize {
        self.context_count
    }

    pub fn classes(&self) -> &[ClassEntry] {
        &self.classes
    }

    pub fn max_label(&self) -> u32 {
        2 * self.c as u32
    }

    pub fn max_vertices(&self) -> usize {
        self.classes.iter().map(|e| e.rep.graph().n()).max().unwrap_or(0)
    }

    /// Longest representative in canonical text form.
    pub fn max_encoding(&self) -> usize {
        self.classes.iter().map(|e| e.rep.to_text().len()).max().unwrap_or(0)
    }

    /// `r`: the larger of `c` and the vertex count of the biggest representative.
    pub fn r(&self) -> usize {
        self.max_vertices().max(self.c)
    }

    /// `2r·2^c + r`.
    pub fn default_s(&self) -> usize {
        let r = self.r();
        2 * r * (1 << self.c) + r
    }

    /// Smallest `s` for which every recursive split strictly shrinks both
    /// parts: `r + 2^c·(r - 1)`, and at least `r + 1`.
    pub fn min_s(&self) -> usize {
        let r = self.r();
        (r + (1 << self.c) * r.saturating_sub(1)).max(r + 1)
    }

    pub fn compatible_reps<'a>(&'a self, key: &'a CompatKey) -> impl Iterator<Item = &'a ClassEntry> + 'a {
        self.classes.iter().filter(move |e| e.compat.compatible_with(key))
    }

    pub fn same_compat<'a>(&'a self, key: &'a CompatKey) -> impl Iterator<Item = &'a ClassEntry> + 'a {
        self.classes.iter().filter(move |e| e.compat == *key)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("table v1\n");
        out.push_str(&format!("property {}\n", self.property.name()));
        out.push_str(&format!("c {}\n", self.c));
        out.push_str(&format!("bounds {} {}\n", self.universe_bound, self.context_bound));
        out.push_str(&format!("contexts {}\n", self.context_count));
        for (i, e) in self.classes.iter().enumerate() {
            let hex: String = e.signature.iter().map(|w| format!("{w:016x}")).collect();
            let hex = if hex.is_empty() { "-".to_string() } else { hex };
            out.push_str(&format!("class {i} {hex}\n"));
            out.push_str(&e.rep.to_text());
            out.push_str("end\n");
        }
        out
    }

    pub fn parse(text: &str) -> Result<RepresentativeTable, FiniteStateError> {
        let lines: Vec<&str> = text.lines().collect();
        let mut header = records(text);
        let first = header
            .next()
            .ok_or_else(|| ParseError::new(1, "empty table"))?;
        if first.tag != "table" || first.fields != ["v1"] {
            return Err(ParseError::new(first.line, "expected `table v1`").into());
        }
        let mut prop = None;
        let mut c = None;
        let mut bounds = None;
        let mut contexts = None;
        let mut classes = Vec::new();
        let mut body: Option<(usize, usize, Vec<u64>)> = None;
        for rec in records(text).skip(1) {
            if let Some((start, idx, sig)) = &body {
                if rec.tag != "end" {
                    continue;
                }
                let chunk = lines[*start..rec.line - 1].join("\n");
                let rep = BoundariedStructure::parse(&chunk).map_err(|e| match e {
                    crate::boundaried::BoundariedError::Parse(p) => {
                        FiniteStateError::Parse(ParseError::new(p.line + start, p.msg))
                    }
                    other => other.into(),
                })?;
                if *idx != classes.len() {
                    return Err(ParseError::new(*start, "class indices must be consecutive").into());
                }
                let compat = rep.compat_key();
                classes.push(ClassEntry {
                    rep,
                    signature: sig.clone(),
                    compat,
                });
                body = None;
                continue;
            }
            match rec.tag {
                "property" => {
                    rec.expect_fields(1)?;
                    prop = Some(
                        property::by_name(rec.fields[0])
                            .ok_or_else(|| FiniteStateError::UnknownProperty(rec.fields[0].into()))?,
                    );
                }
                "c" => {
                    rec.expect_fields(1)?;
                    c = Some(rec.parse_field::<usize>(0)?);
                }
                "bounds" => {
                    rec.expect_fields(2)?;
                    bounds = Some((rec.parse_field::<usize>(0)?, rec.parse_field::<usize>(1)?));
                }
                "contexts" => {
                    rec.expect_fields(1)?;
                    contexts = Some(rec.parse_field::<usize>(0)?);
                }
                "class" => {
                    rec.expect_fields(2)?;
                    let idx: usize = rec.parse_field(0)?;
                    let sig = parse_hex(rec.fields[1]).ok_or_else(|| ParseError::new(rec.line, "bad signature hex"))?;
                    body = Some((rec.line, idx, sig));
                }
                other => return Err(ParseError::new(rec.line, format!("unknown record `{other}`")).into()),
            }
        }
        if body.is_some() {
            return Err(ParseError::new(lines.len(), "unterminated class").into());
        }
        let missing = |what: &str| FiniteStateError::Parse(ParseError::new(1, format!("missing `{what}` line")));
        let property = prop.ok_or_else(|| missing("property"))?;
        let (universe_bound, context_bound) = bounds.ok_or_else(|| missing("bounds"))?;
        let table = RepresentativeTable {
            property,
            c: c.ok_or_else(|| missing("c"))?,
            universe_bound,
            context_bound,
            context_count: contexts.ok_or_else(|| missing("contexts"))?,
            classes,
        };
        for e in &table.classes {
            if e.rep.signature().len() != property.arity()
                || e.rep.signature()[1..]
                    .iter()
                    .zip(&property.signature()[1..])
                    .any(|(a, b)| *a != *b && !(*a == Kind::Star && b.is_point()))
            {
                return Err(FiniteStateError::SignatureMismatch(property.name().into()));
            }
        }
        Ok(table)
    }
}

fn parse_hex(s: &str) -> Option<Vec<u64>> {
    if s == "-" {
        return Some(Vec::new());
    }
    if s.len() % 16 != 0 {
        return None;
    }
    (0..s.len() / 16)
        .map(|i| u64::from_str_radix(&s[16 * i..16 * i + 16], 16).ok())
        .collect()
}

pub fn compute_classes(
    prop: Property,
    c: usize,
    universe_bound: usize,
    context_bound: usize,
) -> Result<RepresentativeTable, FiniteStateError> {
    compute_classes_full(prop, c, universe_bound, context_bound).map(|cc| cc.table)
}

/// Contexts grouped by compatibility type.
pub struct ContextIndex<'a> {
    contexts: &'a [BoundariedStructure],
    groups: Vec<(CompatKey, Vec<usize>)>,
}

impl<'a> ContextIndex<'a> {
    pub fn new(contexts: &'a [BoundariedStructure]) -> Self {
        let mut by_key: HashMap<CompatKey, Vec<usize>> = HashMap::new();
        for (j, ctx) in contexts.iter().enumerate() {
            by_key.entry(ctx.compat_key()).or_default().push(j);
        }
        let mut groups: Vec<_> = by_key.into_iter().collect();
        groups.sort_by_key(|(_, list)| list[0]);
        ContextIndex { contexts, groups }
    }

    /// Evaluation row of `a`: bit `j` is set iff context `j` is compatible
    /// and the property holds on the gluing.
    pub fn row(&self, prop: Property, a: &BoundariedStructure) -> Vec<u64> {
        let key = a.compat_key();
        let mut row = vec![0u64; self.contexts.len().div_ceil(64)];
        for (ctx_key, list) in &self.groups {
            if !key.compatible_with(ctx_key) {
                continue;
            }
            for &j in list {
                let glued = glue_compatible(a, &self.contexts[j]);
                if prop.evaluate(&glued) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
        }
        row
    }
}

pub fn compute_classes_full(
    prop: Property,
    c: usize,
    universe_bound: usize,
    context_bound: usize,
) -> Result<ClassComputation, FiniteStateError> {
    let sig = prop.signature();
    check_budget(sig, c, universe_bound)?;
    check_budget(sig, c, context_bound)?;
    let universe = enumerate_universe(sig, c, universe_bound)?;
    let contexts = if context_bound == universe_bound {
        universe.clone()
    } else {
        enumerate_universe(sig, c, context_bound)?
    };
    let index = ContextIndex::new(&contexts);
    let rows: Vec<Vec<u64>> = universe.par_iter().map(|a| index.row(prop, a)).collect();

    let mut index: HashMap<(CompatKey, Vec<u64>), usize> = HashMap::new();
    let mut class_of = Vec::with_capacity(universe.len());
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, a) in universe.iter().enumerate() {
        let key = (a.compat_key(), rows[i].clone());
        let next = members.len();
        let cls = *index.entry(key).or_insert(next);
        if cls == next {
            members.push(Vec::new());
        }
        members[cls].push(i);
        class_of.push(cls);
    }
    let classes = members
        .iter()
        .map(|list| {
            let best = *list
                .iter()
                .min_by_key(|&&i| {
                    let text = universe[i].to_text();
                    (text.len(), text)
                })
                .expect("nonempty class");
            ClassEntry {
                rep: universe[best].clone(),
                signature: rows[best].clone(),
                compat: universe[best].compat_key(),
            }
        })
        .collect();
    let table = RepresentativeTable {
        property: prop,
        c,
        universe_bound,
        context_bound,
        context_count: contexts.len(),
        classes,
    };
    Ok(ClassComputation {
        table,
        universe,
        class_of,
        contexts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_state::property::{ALWAYS_TRUE, EVEN_ORDER};
    use std::collections::BTreeSet;

    #[test]
    fn constant_true_has_one_class_per_compat_type() {
        let cc = compute_classes_full(ALWAYS_TRUE, 1, 3, 3).unwrap();
        let types: BTreeSet<_> = cc.universe.iter().map(|s| s.compat_key()).collect();
        assert_eq!(cc.table.classes().len(), types.len());
    }

    #[test]
    fn parity_splits_each_type_in_two() {
        let cc = compute_classes_full(EVEN_ORDER, 1, 4, 4).unwrap();
        let types: BTreeSet<_> = cc.universe.iter().map(|s| s.compat_key()).collect();
        assert_eq!(cc.table.classes().len(), 2 * types.len());
        assert!(cc.table.max_vertices() <= 3);
        for e in cc.table.classes() {
            let inner = e.rep.graph().n() - e.rep.labels().len();
            assert!(inner <= 1, "representatives carry at most one inner vertex");
        }
    }

    #[test]
    fn text_round_trip() {
        let t = compute_classes(EVEN_ORDER, 1, 3, 3).unwrap();
        let back = RepresentativeTable::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert!(RepresentativeTable::parse("table v2\n").is_err());
        let broken = t.to_text().replace("property even-order", "property missing");
        assert!(matches!(
            RepresentativeTable::parse(&broken),
            Err(FiniteStateError::UnknownProperty(_))
        ));
    }

    #[test]
    fn schedule_constants() {
        let t = compute_classes(EVEN_ORDER, 1, 4, 4).unwrap();
        let r = t.r();
        assert_eq!(t.default_s(), 2 * r * 2 + r);
        assert!(t.min_s() <= t.default_s());
    }
}
