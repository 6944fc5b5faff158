//! Conversion of the SmartData JSON-lines export into the native corpus
//! format.
//!
//! Expected record shape (character offsets, end exclusive):
//!
//! ```json
//! {"id": "...", "docType": "RSS_FEED", "text": "...",
//!  "tokens": [{"span": {"start": 0, "end": 6}}, ...],
//!  "conceptMentions": [{"id": "c1", "type": "location-city", "span": {"start": 0, "end": 6}}],
//!  "relationMentions": [{"name": "Accident",
//!                        "args": [{"role": "location", "conceptMention": {"id": "c1"}}]}]}
//! ```
//!
//! Label and role names have `-` replaced by `_`; entity types are kept.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::corpus::{Attribute, Document, Entity, Relation, Span};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct CharSpan {
    start: usize,
    end: usize,
}

#[derive(Debug, Deserialize)]
struct RawToken {
    span: CharSpan,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawConcept {
    id: String,
    #[serde(rename = "type")]
    concept_type: String,
    span: CharSpan,
}

#[derive(Debug, Deserialize)]
struct ConceptRef {
    id: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawArg {
    role: String,
    concept_mention: ConceptRef,
}

#[derive(Debug, Deserialize)]
struct RawRelation {
    name: String,
    args: Vec<RawArg>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawDocument {
    id: String,
    #[serde(default)]
    doc_type: Option<String>,
    text: String,
    tokens: Vec<RawToken>,
    #[serde(default)]
    concept_mentions: Vec<RawConcept>,
    #[serde(default)]
    relation_mentions: Vec<RawRelation>,
}

pub fn normalize_name(name: &str) -> String {
    name.replace('-', "_")
}

/// Token span covering the character range `[start, end)`: from the token
/// containing `start` to the last token starting before `end`.
fn token_span(tokens: &[RawToken], start: usize, end: usize) -> Option<Span> {
    let first = tokens.iter().position(|t| t.span.end > start)?;
    let last = tokens.iter().rposition(|t| t.span.start < end)?;
    (first <= last).then(|| Span::new(first, last + 1))
}

fn convert_document(raw: RawDocument) -> Result<Document> {
    let invalid = |message: String| Error::Validation {
        doc_id: raw.id.clone(),
        message,
    };
    let tokens: Vec<String> = raw
        .tokens
        .iter()
        .map(|t| {
            raw.text
                .get(t.span.start..t.span.end)
                .map(str::to_string)
                .ok_or_else(|| invalid(format!("token offsets {}..{} outside the text", t.span.start, t.span.end)))
        })
        .collect::<Result<_>>()?;
    let mut concepts: HashMap<&str, Span> = HashMap::new();
    let mut entities = Vec::new();
    for c in &raw.concept_mentions {
        let span = token_span(&raw.tokens, c.span.start, c.span.end)
            .ok_or_else(|| invalid(format!("concept `{}` does not cover any token", c.id)))?;
        concepts.insert(c.id.as_str(), span);
        entities.push(Entity {
            span,
            entity_type: c.concept_type.clone(),
        });
    }
    let mut relations = Vec::new();
    for r in &raw.relation_mentions {
        let mut attributes: Vec<Attribute> = Vec::new();
        for a in &r.args {
            let span = *concepts
                .get(a.concept_mention.id.as_str())
                .ok_or_else(|| invalid(format!("relation argument refers to unknown concept `{}`", a.concept_mention.id)))?;
            // one role per span within a relation
            if attributes.iter().all(|x| x.span != span) {
                attributes.push(Attribute {
                    span,
                    role: normalize_name(&a.role),
                });
            }
        }
        if !attributes.is_empty() {
            attributes.sort();
            relations.push(Relation::new(normalize_name(&r.name), attributes));
        }
    }
    let mut doc = Document::new(raw.id.clone(), tokens);
    doc.entities = entities;
    doc.relations = relations;
    doc.source = raw.doc_type.map(|t| t.to_lowercase());
    doc.check_structure().map_err(invalid)?;
    Ok(doc)
}

/// Converts every non-blank line of a SmartData export.
pub fn convert_smartdata<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut de = serde_json::Deserializer::from_str(&line);
        let raw: RawDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
            line: i + 1,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        out.push(convert_document(raw)?);
    }
    Ok(out)
}
