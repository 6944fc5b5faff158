//! Versioned on-disk model artifacts.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crf::CrfModel;
use crate::error::{Error, Result};
use crate::span::SpanModel;

pub const ARTIFACT_FORMAT: &str = "mare-model";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum Model {
    Crf(CrfModel),
    Span(SpanModel),
}

impl Model {
    pub fn schema_fingerprint(&self) -> &str {
        match self {
            Model::Crf(m) => &m.schema_fingerprint,
            Model::Span(m) => &m.schema_fingerprint,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Crf(_) => "crf",
            Model::Span(_) => "span",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub model: Model,
}

impl ModelArtifact {
    pub fn new(model: Model) -> Self {
        ModelArtifact {
            format: ARTIFACT_FORMAT.into(),
            version: ARTIFACT_VERSION,
            model,
        }
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.to_writer(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::check(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        Self::check(serde_json::from_reader(reader)?)
    }

    fn check(a: ModelArtifact) -> Result<Self> {
        if a.format != ARTIFACT_FORMAT {
            return Err(Error::Config(format!("not a model artifact (format `{}`)", a.format)));
        }
        if a.version != ARTIFACT_VERSION {
            return Err(Error::Config(format!(
                "unsupported artifact version {} (expected {ARTIFACT_VERSION})",
                a.version
            )));
        }
        Ok(a)
    }
}
