//! Rule-based assembly of flat `(label, attribute)` predictions into
//! relation instances: group by label, borrow missing mandatory attributes
//! from nearby relations, then split same-label groups at wide gaps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Attribute, Relation, Schema, Span};
use crate::error::{Error, Result};
use crate::tagscheme::LabeledAttribute;

pub const DEFAULT_MAX_RELATION_WIDTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AssemblyConfig {
    pub max_relation_width: usize,
    pub enable_completion: bool,
    pub enable_splitting: bool,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            max_relation_width: DEFAULT_MAX_RELATION_WIDTH,
            enable_completion: true,
            enable_splitting: true,
        }
    }
}

impl AssemblyConfig {
    pub fn with_width(max_relation_width: usize) -> Self {
        AssemblyConfig {
            max_relation_width,
            ..AssemblyConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_relation_width == 0 {
            return Err(Error::Config("maximum relation width must be at least 1".into()));
        }
        Ok(())
    }
}

/// A relation instance built from predictions. `attributes` is sorted by
/// span; `completed_attributes` lists those copied in from other relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssembledRelation {
    pub label: String,
    pub attributes: Vec<Attribute>,
    pub completed_attributes: Vec<Attribute>,
    pub mandatory_complete: bool,
}

impl AssembledRelation {
    fn new(label: String, mut attributes: Vec<Attribute>, completed: Vec<Attribute>, schema: &Schema) -> Self {
        attributes.sort();
        attributes.dedup();
        let mandatory_complete = has_mandatory(schema, &label, &attributes);
        AssembledRelation {
            label,
            attributes,
            completed_attributes: completed,
            mandatory_complete,
        }
    }

    pub fn is_completed(&self, attribute: &Attribute) -> bool {
        self.completed_attributes.contains(attribute)
    }

    pub fn to_relation(&self) -> Relation {
        Relation::new(self.label.clone(), self.attributes.clone())
    }

    fn refresh(&mut self, schema: &Schema) {
        self.mandatory_complete = has_mandatory(schema, &self.label, &self.attributes);
    }
}

/// Whether `attributes` cover every mandatory role of `label`. A label
/// unknown to the schema has no mandatory roles.
fn has_mandatory(schema: &Schema, label: &str, attributes: &[Attribute]) -> bool {
    missing_roles(schema, label, attributes).is_empty()
}

fn missing_roles(schema: &Schema, label: &str, attributes: &[Attribute]) -> Vec<String> {
    schema
        .label(label)
        .map(|def| {
            def.mandatory_roles()
                .filter(|r| !attributes.iter().any(|a| a.role == r.name))
                .map(|r| r.name.clone())
                .collect()
        })
        .unwrap_or_default()
}

/// One relation per distinct label, in schema label order (labels unknown
/// to the schema follow, by name). Duplicate predictions collapse.
pub fn group_by_label(predictions: &[LabeledAttribute], schema: &Schema) -> Vec<AssembledRelation> {
    let mut groups: BTreeMap<(usize, &str), Vec<Attribute>> = BTreeMap::new();
    for p in predictions {
        let order = schema.label_index(&p.label).unwrap_or(usize::MAX);
        groups.entry((order, p.label.as_str())).or_default().push(p.attribute.clone());
    }
    groups
        .into_iter()
        .map(|((_, label), attrs)| AssembledRelation::new(label.to_string(), attrs, Vec::new(), schema))
        .collect()
}

/// Fills missing mandatory roles with copies of compatible attributes from
/// other relations. Only attributes each relation had before completion
/// are candidates; a candidate must lie within `max_relation_width` tokens
/// of the receiving relation's nearest attribute. The nearest candidate
/// wins, ties going to the smaller start. Copies take the missing role's name.
pub fn complete_shared(
    relations: &[AssembledRelation],
    schema: &Schema,
    config: &AssemblyConfig,
) -> Vec<AssembledRelation> {
    let original: Vec<Vec<&Attribute>> = relations
        .iter()
        .map(|r| r.attributes.iter().filter(|a| !r.is_completed(a)).collect())
        .collect();
    relations
        .iter()
        .enumerate()
        .map(|(ri, rel)| {
            let mut out = rel.clone();
            if rel.attributes.is_empty() {
                return out;
            }
            for role in missing_roles(schema, &rel.label, &rel.attributes) {
                let distance_to = |s: &Span| {
                    out.attributes.iter().map(|a| a.span.distance(s)).min().unwrap_or(usize::MAX)
                };
                let best = relations
                    .iter()
                    .enumerate()
                    .filter(|(oi, _)| *oi != ri)
                    .flat_map(|(oi, other)| original[oi].iter().map(move |a| (other, *a)))
                    .filter(|(other, a)| schema.roles_compatible(&other.label, &a.role, &rel.label, &role))
                    .filter(|(_, a)| !out.attributes.iter().any(|b| b.span == a.span))
                    .map(|(_, a)| (distance_to(&a.span), a.span))
                    .filter(|(d, _)| *d <= config.max_relation_width)
                    .min();
                if let Some((_, span)) = best {
                    let copy = Attribute {
                        span,
                        role: role.clone(),
                    };
                    out.attributes.push(copy.clone());
                    out.completed_attributes.push(copy);
                }
            }
            out.attributes.sort();
            out.completed_attributes.sort();
            out.refresh(schema);
            out
        })
        .collect()
}

fn gap(prev: &Attribute, next: &Attribute) -> usize {
    next.span.start.saturating_sub(prev.span.end)
}

/// Splits one relation at the leftmost index where both sides carry every
/// mandatory role and the gap between the neighbouring attributes exceeds
/// `max_relation_width`, recursing on the right part.
pub fn split_same_label(
    relation: &AssembledRelation,
    schema: &Schema,
    config: &AssemblyConfig,
) -> Vec<AssembledRelation> {
    let attrs = &relation.attributes;
    let cut = (1..attrs.len()).find(|&i| {
        gap(&attrs[i - 1], &attrs[i]) > config.max_relation_width
            && has_mandatory(schema, &relation.label, &attrs[..i])
            && has_mandatory(schema, &relation.label, &attrs[i..])
    });
    let Some(i) = cut else {
        return vec![relation.clone()];
    };
    let part = |slice: &[Attribute]| AssembledRelation {
        label: relation.label.clone(),
        attributes: slice.to_vec(),
        completed_attributes: relation
            .completed_attributes
            .iter()
            .filter(|a| slice.contains(a))
            .cloned()
            .collect(),
        mandatory_complete: has_mandatory(schema, &relation.label, slice),
    };
    let mut out = vec![part(&attrs[..i])];
    out.extend(split_same_label(&part(&attrs[i..]), schema, config));
    out
}

/// Group, complete (if enabled), then split (if enabled). Relations still
/// missing mandatory roles are kept and flagged.
pub fn assemble(
    predictions: &[LabeledAttribute],
    schema: &Schema,
    config: &AssemblyConfig,
) -> Vec<AssembledRelation> {
    let mut relations = group_by_label(predictions, schema);
    if config.enable_completion {
        relations = complete_shared(&relations, schema, config);
    }
    if config.enable_splitting {
        relations = relations
            .iter()
            .flat_map(|r| split_same_label(r, schema, config))
            .collect();
    }
    relations
}

/// Flattens assembled relations back into labeled attributes (completed
/// copies included).
pub fn flatten_assembled(relations: &[AssembledRelation]) -> Vec<LabeledAttribute> {
    let mut out: Vec<LabeledAttribute> = relations
        .iter()
        .flat_map(|r| {
            r.attributes.iter().map(|a| LabeledAttribute {
                label: r.label.clone(),
                attribute: a.clone(),
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRecord {
    pub start: usize,
    pub end: usize,
    pub role: String,
    #[serde(default)]
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelationRecord {
    pub label: String,
    #[serde(default = "default_true")]
    pub mandatory_complete: bool,
    pub attributes: Vec<AttributeRecord>,
}

fn default_true() -> bool {
    true
}

/// One line of the assembled prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredictionRecord {
    pub doc_id: String,
    pub relations: Vec<RelationRecord>,
}

impl PredictionRecord {
    pub fn from_assembled(doc_id: impl Into<String>, relations: &[AssembledRelation]) -> Self {
        PredictionRecord {
            doc_id: doc_id.into(),
            relations: relations
                .iter()
                .map(|r| RelationRecord {
                    label: r.label.clone(),
                    mandatory_complete: r.mandatory_complete,
                    attributes: r
                        .attributes
                        .iter()
                        .map(|a| AttributeRecord {
                            start: a.span.start,
                            end: a.span.end,
                            role: a.role.clone(),
                            completed: r.is_completed(a),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn relations(&self) -> Vec<Relation> {
        self.relations
            .iter()
            .map(|r| {
                Relation::new(
                    r.label.clone(),
                    r.attributes.iter().map(|a| Attribute::new(a.start, a.end, a.role.clone())).collect(),
                )
            })
            .collect()
    }
}
