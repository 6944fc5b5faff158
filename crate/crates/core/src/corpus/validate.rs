use serde::Serialize;
use std::fmt;

use super::{Document, Schema, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    UnknownLabel {
        relation: usize,
        label: String,
    },
    UnknownRole {
        relation: usize,
        label: String,
        role: String,
    },
    /// No entity annotation covers the attribute span.
    MissingEntity {
        relation: usize,
        label: String,
        role: String,
        span: Span,
    },
    /// Entities cover the span but none has a type the role accepts.
    IncompatibleEntityType {
        relation: usize,
        label: String,
        role: String,
        span: Span,
        found: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownLabel { relation, label } => {
                write!(f, "relation {relation}: unknown label `{label}`")
            }
            Violation::UnknownRole { relation, label, role } => {
                write!(f, "relation {relation}: role `{role}` is not defined for `{label}`")
            }
            Violation::MissingEntity { relation, label, role, span } => write!(
                f,
                "relation {relation}: `{label}.{role}` at {span} has no entity annotation"
            ),
            Violation::IncompatibleEntityType { relation, label, role, span, found } => write!(
                f,
                "relation {relation}: `{label}.{role}` at {span} is backed by incompatible entity types {found:?}"
            ),
        }
    }
}

/// Schema conformance of one document. Violations are data: an empty list
/// means the document conforms.
pub fn validate_document(doc: &Document, schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    for (ri, rel) in doc.relations.iter().enumerate() {
        let Some(label) = schema.label(&rel.label) else {
            out.push(Violation::UnknownLabel {
                relation: ri,
                label: rel.label.clone(),
            });
            continue;
        };
        for attr in &rel.attributes {
            let Some(role) = label.role(&attr.role) else {
                out.push(Violation::UnknownRole {
                    relation: ri,
                    label: rel.label.clone(),
                    role: attr.role.clone(),
                });
                continue;
            };
            if role.entity_types.is_empty() {
                continue;
            }
            let found: Vec<String> = doc
                .entities
                .iter()
                .filter(|e| e.span == attr.span)
                .map(|e| e.entity_type.clone())
                .collect();
            if found.is_empty() {
                out.push(Violation::MissingEntity {
                    relation: ri,
                    label: rel.label.clone(),
                    role: attr.role.clone(),
                    span: attr.span,
                });
            } else if !found.iter().any(|t| role.entity_types.contains(t)) {
                out.push(Violation::IncompatibleEntityType {
                    relation: ri,
                    label: rel.label.clone(),
                    role: attr.role.clone(),
                    span: attr.span,
                    found,
                });
            }
        }
    }
    out
}
