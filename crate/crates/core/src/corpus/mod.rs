//! Corpus data model: documents, relations, schema.

mod io;
mod schema;
mod stats;
mod transforms;
mod validate;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use io::{parse_corpus, read_corpus_file, serialize_document, write_corpus, write_corpus_file};
pub use schema::{LabelDef, RoleDef, Schema};
pub use stats::{corpus_stats, CorpusStats, ExplicitnessEntry};
pub use transforms::{
    assign_triggers, binary_subset, binary_subset_with, is_binary_document, BinarySubsetOptions,
    TriggerAssignment, UnresolvedReason, UnresolvedTrigger,
};
pub use validate::{validate_document, Violation};

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Token distance between two spans: zero when they touch or overlap,
    /// otherwise the number of tokens strictly between them.
    pub fn distance(&self, other: &Span) -> usize {
        if self.end <= other.start {
            other.start - self.end
        } else if other.end <= self.start {
            self.start - other.end
        } else {
            0
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    #[serde(flatten)]
    pub span: Span,
    #[serde(rename = "type")]
    pub entity_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Attribute {
    #[serde(flatten)]
    pub span: Span,
    pub role: String,
}

impl Attribute {
    pub fn new(start: usize, end: usize, role: impl Into<String>) -> Self {
        Attribute {
            span: Span::new(start, end),
            role: role.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub label: String,
    pub attributes: Vec<Attribute>,
}

impl Relation {
    pub fn new(label: impl Into<String>, attributes: Vec<Attribute>) -> Self {
        Relation {
            label: label.into(),
            attributes,
        }
    }

    /// Smallest attribute start, `usize::MAX` for an attribute-less relation.
    pub fn earliest_start(&self) -> usize {
        self.attributes
            .iter()
            .map(|a| a.span.start)
            .min()
            .unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub entities: Vec<Entity>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        Document {
            id: id.into(),
            tokens,
            entities: Vec::new(),
            relations: Vec::new(),
            source: None,
        }
    }

    /// Structural checks that do not need a schema: non-empty token list,
    /// every span inside the token bounds, at least one attribute per
    /// relation and pairwise distinct spans within a relation.
    pub fn check_structure(&self) -> Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("document has no tokens".to_string());
        }
        let check = |span: &Span, what: &str| {
            if span.start >= span.end || span.end > n {
                Err(format!(
                    "{what} span {span} is outside the token bounds [0,{n})"
                ))
            } else {
                Ok(())
            }
        };
        for (i, e) in self.entities.iter().enumerate() {
            check(&e.span, &format!("entities[{i}]"))?;
        }
        for (r, rel) in self.relations.iter().enumerate() {
            if rel.attributes.is_empty() {
                return Err(format!("relations[{r}] ({}) has no attributes", rel.label));
            }
            for (a, attr) in rel.attributes.iter().enumerate() {
                check(&attr.span, &format!("relations[{r}].attributes[{a}]"))?;
            }
            for (a, attr) in rel.attributes.iter().enumerate() {
                if rel.attributes[..a].iter().any(|o| o.span == attr.span) {
                    return Err(format!(
                        "relations[{r}] ({}) uses span {} for more than one attribute",
                        rel.label, attr.span
                    ));
                }
            }
        }
        Ok(())
    }
}
