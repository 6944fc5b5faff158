//! Document-level extraction: model predictions, flat attributes, assembled
//! relations, and the prediction file formats.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::artifact::Model;
use crate::assembler::{assemble, AssembledRelation, AssemblyConfig, PredictionRecord};
use crate::corpus::{Document, Schema};
use crate::crf::{self, CrfModel};
use crate::error::{Error, Result};
use crate::eval::RelationsByDoc;
use crate::span::{self, SpanModel, SpanPrediction};
use crate::tagscheme::{decode, LabeledAttribute};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PredictOptions {
    /// Overrides the span model's stored threshold.
    pub threshold: Option<f64>,
    pub assembly: AssemblyConfig,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            threshold: None,
            assembly: AssemblyConfig::default(),
        }
    }
}

pub fn crf_attributes(model: &CrfModel, schema: &Schema, doc: &Document) -> Result<Vec<LabeledAttribute>> {
    if doc.tokens.is_empty() {
        return Ok(Vec::new());
    }
    Ok(decode(&crf::predict(model, schema, doc)?, schema))
}

pub fn span_attributes(predictions: &[SpanPrediction]) -> Vec<LabeledAttribute> {
    let mut out: Vec<LabeledAttribute> = predictions
        .iter()
        .map(|p| LabeledAttribute::new(p.label.clone(), p.span.start, p.span.end, p.role.clone()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Flat attribute predictions of either model for one document.
pub fn attributes(model: &Model, schema: &Schema, doc: &Document, threshold: Option<f64>) -> Result<Vec<LabeledAttribute>> {
    match model {
        Model::Crf(m) => crf_attributes(m, schema, doc),
        Model::Span(m) => Ok(span_attributes(&span::predict(
            m,
            schema,
            doc,
            threshold.unwrap_or(m.threshold),
        )?)),
    }
}

pub fn extract(model: &Model, schema: &Schema, doc: &Document, options: &PredictOptions) -> Result<Vec<AssembledRelation>> {
    let attrs = attributes(model, schema, doc, options.threshold)?;
    Ok(assemble(&attrs, schema, &options.assembly))
}

/// One prediction record per input document, in input order.
pub fn predict_corpus(
    model: &Model,
    schema: &Schema,
    corpus: &[Document],
    options: &PredictOptions,
) -> Result<Vec<PredictionRecord>> {
    options.assembly.validate()?;
    if let Some(t) = options.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
        }
    }
    let fp = schema.fingerprint();
    if model.schema_fingerprint() != fp {
        return Err(Error::FingerprintMismatch {
            model: model.schema_fingerprint().to_string(),
            schema: fp,
        });
    }
    corpus
        .iter()
        .map(|d| Ok(PredictionRecord::from_assembled(d.id.clone(), &extract(model, schema, d, options)?)))
        .collect()
}

pub fn write_jsonl<W: Write, T: Serialize>(mut writer: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut de = serde_json::Deserializer::from_str(&line);
        out.push(serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
            line: i + 1,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?);
    }
    Ok(out)
}

pub fn predictions_by_doc(records: &[PredictionRecord]) -> RelationsByDoc {
    let mut map = RelationsByDoc::new();
    for r in records {
        map.entry(r.doc_id.clone()).or_default().extend(r.relations());
    }
    map
}

/// Raw span labeler output for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanDumpRecord {
    pub doc_id: String,
    pub spans: Vec<SpanPrediction>,
}

pub fn span_dump(model: &SpanModel, schema: &Schema, corpus: &[Document], threshold: f64) -> Result<Vec<SpanDumpRecord>> {
    corpus
        .iter()
        .map(|d| {
            Ok(SpanDumpRecord {
                doc_id: d.id.clone(),
                spans: span::predict(model, schema, d, threshold)?,
            })
        })
        .collect()
}
