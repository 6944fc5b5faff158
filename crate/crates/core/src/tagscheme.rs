//! Token-level tag codec for flat relation attributes.
//!
//! Tags are `o` or `b`/`i` combined with a relation label and one of its
//! roles, rendered as `o`, `b-<label>-<role>`, `i-<label>-<role>`. A tag
//! sequence can only place each token in one attribute, so overlapping
//! attributes are resolved at encode time and reported.

use serde::Serialize;
use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use crate::corpus::{Attribute, Document, Schema, Span};

/// Index pair into the schema: `labels[label].roles[role]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoleRef {
    pub label: usize,
    pub role: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    O,
    B(RoleRef),
    I(RoleRef),
}

impl Tag {
    pub fn role_ref(&self) -> Option<RoleRef> {
        match *self {
            Tag::O => None,
            Tag::B(r) | Tag::I(r) => Some(r),
        }
    }
}

/// The ordered tag inventory of a schema: `o` first, then for every label
/// (schema order) and role (role order) the `b` tag followed by the `i` tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<Tag>,
    label_offsets: Vec<usize>,
}

impl TagSet {
    pub fn new(schema: &Schema) -> Self {
        let mut tags = vec![Tag::O];
        let mut label_offsets = Vec::with_capacity(schema.labels.len());
        let mut flat = 0;
        for (li, label) in schema.labels.iter().enumerate() {
            label_offsets.push(flat);
            for ri in 0..label.roles.len() {
                let r = RoleRef { label: li, role: ri };
                tags.push(Tag::B(r));
                tags.push(Tag::I(r));
            }
            flat += label.roles.len();
        }
        TagSet { tags, label_offsets }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag(&self, index: usize) -> Tag {
        self.tags[index]
    }

    pub fn index_of(&self, tag: Tag) -> usize {
        match tag {
            Tag::O => 0,
            Tag::B(r) => 1 + 2 * (self.label_offsets[r.label] + r.role),
            Tag::I(r) => 2 + 2 * (self.label_offsets[r.label] + r.role),
        }
    }

    pub fn render(&self, tag: Tag, schema: &Schema) -> String {
        match tag {
            Tag::O => "o".to_string(),
            Tag::B(r) | Tag::I(r) => {
                let kind = if matches!(tag, Tag::B(_)) { 'b' } else { 'i' };
                let label = &schema.labels[r.label];
                format!("{kind}-{}-{}", label.name, label.roles[r.role].name)
            }
        }
    }

    pub fn render_all(&self, schema: &Schema) -> Vec<String> {
        self.tags.iter().map(|t| self.render(*t, schema)).collect()
    }

    pub fn parse(&self, text: &str, schema: &Schema) -> Option<Tag> {
        if text == "o" {
            return Some(Tag::O);
        }
        let mut parts = text.splitn(3, '-');
        let kind = parts.next()?;
        let (li, ri) = schema.role_index(parts.next()?, parts.next()?)?;
        let r = RoleRef { label: li, role: ri };
        match kind {
            "b" => Some(Tag::B(r)),
            "i" => Some(Tag::I(r)),
            _ => None,
        }
    }
}

pub fn tag_set(schema: &Schema) -> TagSet {
    TagSet::new(schema)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence(pub Vec<Tag>);

impl TagSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn render(&self, schema: &Schema) -> Vec<String> {
        let set = TagSet::new(schema);
        self.0.iter().map(|t| set.render(*t, schema)).collect()
    }

    pub fn indices(&self, set: &TagSet) -> Vec<usize> {
        self.0.iter().map(|t| set.index_of(*t)).collect()
    }

    pub fn from_indices(indices: &[usize], set: &TagSet) -> Self {
        TagSequence(indices.iter().map(|&i| set.tag(i)).collect())
    }
}

/// A flat attribute prediction: a relation label plus `(span, role)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LabeledAttribute {
    pub label: String,
    pub attribute: Attribute,
}

impl LabeledAttribute {
    pub fn new(label: impl Into<String>, start: usize, end: usize, role: impl Into<String>) -> Self {
        LabeledAttribute {
            label: label.into(),
            attribute: Attribute::new(start, end, role),
        }
    }
}

impl fmt::Display for LabeledAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.label, self.attribute.role, self.attribute.span)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum DropReason {
    /// The label or role is not part of the schema.
    UnknownRole,
    /// Another attribute already occupies at least one of the tokens.
    Overlap { winner: LabeledAttribute },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedAttribute {
    pub label: String,
    pub attribute: Attribute,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EncodingReport {
    pub dropped: Vec<DroppedAttribute>,
}

impl EncodingReport {
    pub fn is_conflict_free(&self) -> bool {
        self.dropped.is_empty()
    }
}

/// Priority key for overlapping attributes: the relation with the smallest
/// earliest start wins, then schema label order, then role order.
fn conflict_priority(rel_start: usize, role: RoleRef, span: Span, rel_index: usize) -> impl Ord {
    (rel_start, role.label, role.role, span.start, Reverse(span.len()), rel_index)
}

pub fn encode(doc: &Document, schema: &Schema) -> (TagSequence, EncodingReport) {
    let n = doc.tokens.len();
    let mut tags = vec![Tag::O; n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut report = EncodingReport::default();

    let mut candidates = Vec::new();
    for (ri, rel) in doc.relations.iter().enumerate() {
        let rel_start = rel.earliest_start();
        for attr in &rel.attributes {
            match schema.role_index(&rel.label, &attr.role) {
                Some((li, ro)) => {
                    let r = RoleRef { label: li, role: ro };
                    candidates.push((conflict_priority(rel_start, r, attr.span, ri), r, &rel.label, attr));
                }
                None => report.dropped.push(DroppedAttribute {
                    label: rel.label.clone(),
                    attribute: attr.clone(),
                    reason: DropReason::UnknownRole,
                }),
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let mut placed: Vec<LabeledAttribute> = Vec::new();
    for (_, r, label, attr) in candidates {
        let span = attr.span;
        let end = span.end.min(n);
        if let Some(holder) = (span.start..end).find_map(|t| owner[t]) {
            report.dropped.push(DroppedAttribute {
                label: label.clone(),
                attribute: attr.clone(),
                reason: DropReason::Overlap {
                    winner: placed[holder].clone(),
                },
            });
            continue;
        }
        if span.start >= end {
            continue;
        }
        let id = placed.len();
        placed.push(LabeledAttribute {
            label: label.clone(),
            attribute: attr.clone(),
        });
        tags[span.start] = Tag::B(r);
        owner[span.start] = Some(id);
        for t in span.start + 1..end {
            tags[t] = Tag::I(r);
            owner[t] = Some(id);
        }
    }
    (TagSequence(tags), report)
}

/// Turns a tag sequence into attributes. Maximal runs of one `(label, role)`
/// starting at a `b` become one attribute; an `i` that does not continue a
/// run of the same `(label, role)` starts a new attribute. Never fails.
pub fn decode(tags: &TagSequence, schema: &Schema) -> Vec<LabeledAttribute> {
    let mut out = BTreeSet::new();
    let mut current: Option<(RoleRef, usize)> = None;
    let close = |cur: Option<(RoleRef, usize)>, end: usize, out: &mut BTreeSet<LabeledAttribute>| {
        if let Some((r, start)) = cur {
            let label = &schema.labels[r.label];
            out.insert(LabeledAttribute::new(
                label.name.clone(),
                start,
                end,
                label.roles[r.role].name.clone(),
            ));
        }
    };
    for (t, tag) in tags.0.iter().enumerate() {
        match *tag {
            Tag::O => {
                close(current.take(), t, &mut out);
            }
            Tag::B(r) => {
                close(current.take(), t, &mut out);
                current = Some((r, t));
            }
            Tag::I(r) => match current {
                Some((cr, _)) if cr == r => {}
                _ => {
                    close(current.take(), t, &mut out);
                    current = Some((r, t));
                }
            },
        }
    }
    close(current.take(), tags.0.len(), &mut out);
    out.into_iter().collect()
}

/// Flattens the gold relations of a document into labeled attributes
/// (sorted, duplicates kept).
pub fn flatten_relations(doc: &Document) -> Vec<LabeledAttribute> {
    let mut out: Vec<LabeledAttribute> = doc
        .relations
        .iter()
        .flat_map(|r| {
            r.attributes.iter().map(move |a| LabeledAttribute {
                label: r.label.clone(),
                attribute: a.clone(),
            })
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelDef, Relation, RoleDef};
    use proptest::prelude::*;

    fn schema() -> Schema {
        Schema::new(vec![
            LabelDef::new(
                "Accident",
                vec![RoleDef::new("Trigger", true).trigger(), RoleDef::new("Location", true)],
            ),
            LabelDef::new(
                "Obstruction",
                vec![
                    RoleDef::new("Trigger", true).trigger(),
                    RoleDef::new("Location", true),
                    RoleDef::new("Cause", false),
                ],
            ),
        ])
        .unwrap()
    }

    fn tokens(n: usize) -> Vec<String> {
        ["A1", "closed", "at", "Köln", "road", "blocked", "by", "snow"]
            .iter()
            .cycle()
            .take(n)
            .map(|s| s.to_string())
            .collect()
    }

    fn render(seq: &TagSequence, s: &Schema) -> Vec<String> {
        seq.render(s)
    }

    #[test]
    fn tag_set_sizes() {
        let one = Schema::new(vec![LabelDef::new(
            "Accident",
            vec![RoleDef::new("Trigger", true), RoleDef::new("Location", true)],
        )])
        .unwrap();
        let set = tag_set(&one);
        assert_eq!(set.len(), 5);
        assert_eq!(
            set.render_all(&one),
            vec!["o", "b-Accident-Trigger", "i-Accident-Trigger", "b-Accident-Location", "i-Accident-Location"]
        );
        assert_eq!(tag_set(&schema()).len(), 11);
    }

    #[test]
    fn index_and_parse_agree() {
        let s = schema();
        let set = tag_set(&s);
        for (i, t) in set.tags().iter().enumerate() {
            assert_eq!(set.index_of(*t), i);
            assert_eq!(set.parse(&set.render(*t, &s), &s), Some(*t));
        }
        assert_eq!(set.parse("x-Accident-Trigger", &s), None);
    }

    #[test]
    fn encode_simple() {
        let s = schema();
        let mut d = Document::new("d", tokens(4));
        d.relations.push(Relation::new(
            "Accident",
            vec![Attribute::new(1, 2, "Trigger"), Attribute::new(3, 4, "Location")],
        ));
        let (seq, rep) = encode(&d, &s);
        assert!(rep.is_conflict_free());
        assert_eq!(render(&seq, &s), vec!["o", "b-Accident-Trigger", "o", "b-Accident-Location"]);
    }

    #[test]
    fn encode_multi_token() {
        let s = schema();
        let mut d = Document::new("d", tokens(4));
        d.relations.push(Relation::new("Accident", vec![Attribute::new(2, 4, "Location")]));
        let (seq, _) = encode(&d, &s);
        assert_eq!(render(&seq, &s), vec!["o", "o", "b-Accident-Location", "i-Accident-Location"]);
    }

    #[test]
    fn shared_span_goes_to_earliest_relation() {
        let s = schema();
        let mut d = Document::new("d", tokens(8));
        d.relations.push(Relation::new(
            "Obstruction",
            vec![Attribute::new(5, 6, "Trigger"), Attribute::new(3, 4, "Location")],
        ));
        d.relations.push(Relation::new(
            "Accident",
            vec![Attribute::new(1, 2, "Trigger"), Attribute::new(3, 4, "Location")],
        ));
        let (seq, rep) = encode(&d, &s);
        assert_eq!(render(&seq, &s)[3], "b-Accident-Location");
        assert_eq!(rep.dropped.len(), 1);
        let drop = &rep.dropped[0];
        assert_eq!(drop.label, "Obstruction");
        assert_eq!(drop.attribute, Attribute::new(3, 4, "Location"));
        assert_eq!(
            drop.reason,
            DropReason::Overlap {
                winner: LabeledAttribute::new("Accident", 3, 4, "Location")
            }
        );
    }

    #[test]
    fn partial_overlap_drops_loser_entirely() {
        let s = schema();
        let mut d = Document::new("d", tokens(8));
        d.relations.push(Relation::new("Accident", vec![Attribute::new(1, 4, "Location")]));
        d.relations.push(Relation::new("Obstruction", vec![Attribute::new(3, 6, "Cause")]));
        let (seq, rep) = encode(&d, &s);
        assert_eq!(rep.dropped.len(), 1);
        assert_eq!(seq.0[4], Tag::O);
        assert_eq!(seq.0[5], Tag::O);
    }

    #[test]
    fn decode_examples() {
        let s = schema();
        let set = tag_set(&s);
        let parse = |v: &[&str]| TagSequence(v.iter().map(|t| set.parse(t, &s).unwrap()).collect());

        assert_eq!(
            decode(&parse(&["o", "b-Accident-Trigger", "o", "b-Accident-Location"]), &s),
            vec![
                LabeledAttribute::new("Accident", 1, 2, "Trigger"),
                LabeledAttribute::new("Accident", 3, 4, "Location"),
            ]
        );
        assert_eq!(
            decode(&parse(&["i-Accident-Location", "i-Accident-Location"]), &s),
            vec![LabeledAttribute::new("Accident", 0, 2, "Location")]
        );
        assert_eq!(
            decode(&parse(&["b-Accident-Location", "i-Obstruction-Location"]), &s),
            vec![
                LabeledAttribute::new("Accident", 0, 1, "Location"),
                LabeledAttribute::new("Obstruction", 1, 2, "Location"),
            ]
        );
        assert!(decode(&TagSequence(vec![]), &s).is_empty());
    }

    proptest! {
        #[test]
        fn decode_is_total_and_in_bounds(idx in proptest::collection::vec(0usize..11, 0..40)) {
            let s = schema();
            let set = tag_set(&s);
            let seq = TagSequence::from_indices(&idx, &set);
            let attrs = decode(&seq, &s);
            for a in &attrs {
                prop_assert!(a.attribute.span.start < a.attribute.span.end);
                prop_assert!(a.attribute.span.end <= idx.len());
            }
            // every non-o token lies in exactly one attribute
            let covered: usize = attrs.iter().map(|a| a.attribute.span.len()).sum();
            prop_assert_eq!(covered, idx.iter().filter(|&&i| i != 0).count());
        }

        #[test]
        fn encode_never_breaks_runs(
            rels in proptest::collection::vec(
                (0usize..2, proptest::collection::vec((0usize..12, 1usize..4, 0usize..3), 1..4)),
                0..4,
            )
        ) {
            let s = schema();
            let mut d = Document::new("d", tokens(16));
            for (li, attrs) in rels {
                let label = &s.labels[li];
                let mut seen = BTreeSet::new();
                let attrs: Vec<Attribute> = attrs
                    .into_iter()
                    .map(|(st, w, r)| Attribute::new(st, st + w, label.roles[r % label.roles.len()].name.clone()))
                    .filter(|a| seen.insert(a.span))
                    .collect();
                d.relations.push(Relation::new(label.name.clone(), attrs));
            }
            let (seq, rep) = encode(&d, &s);
            prop_assert_eq!(seq.len(), 16);
            for t in 1..seq.len() {
                if let Tag::I(r) = seq.0[t] {
                    prop_assert!(matches!(seq.0[t - 1], Tag::B(p) | Tag::I(p) if p == r));
                }
            }
            if rep.is_conflict_free() {
                prop_assert_eq!(decode(&seq, &s), flatten_relations(&d));
            }
        }
    }
}
