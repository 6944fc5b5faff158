//! JSON-lines corpus ingestion and serialization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::Document;
use crate::error::{Error, Result};

/// Reads one document per non-blank line, in input order.
///
/// Decoding failures report the 1-based line number and the JSON path of
/// the offending field; structural failures (spans outside the token
/// bounds, empty token lists) report the document id.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(trimmed);
        let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            line: idx + 1,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        doc.check_structure().map_err(|message| Error::Validation {
            doc_id: doc.id.clone(),
            message,
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn read_corpus_file(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open corpus `{}`: {e}", path.display())))?;
    parse_corpus(BufReader::new(file))
}

/// Canonical single-line rendering of a document (struct field order).
pub fn serialize_document(doc: &Document) -> String {
    serde_json::to_string(doc).expect("document serialization cannot fail")
}

pub fn write_corpus<W: Write>(mut writer: W, docs: &[Document]) -> Result<()> {
    for doc in docs {
        writeln!(writer, "{}", serialize_document(doc))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_corpus_file(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let file = File::create(path)?;
    write_corpus(BufWriter::new(file), docs)
}
