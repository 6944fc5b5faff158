//! Multi-attribute relation extraction.
//!
//! Relations here carry a label and a variable number of `(span, role)`
//! attributes, with no fixed arity and no required trigger. The crate
//! provides:
//!
//! * [`corpus`]: the document/schema data model, JSON-lines ingestion,
//!   statistics and the trigger / binary-subset transforms;
//! * [`tagscheme`]: the `{b,i} x label x role + {o}` tag codec;
//! * [`crf`]: a hashed-feature linear-chain CRF tagger;
//! * [`span`]: an attention-pooled multi-label span labeler;
//! * [`assembler`]: rule-based grouping of flat attribute predictions into
//!   relation instances;
//! * [`eval`]: AR / Cl / MRE / CRE / BRE scoring;
//! * [`synth`]: a seeded synthetic corpus generator.

pub mod artifact;
pub mod assembler;
pub mod convert;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod optim;
pub mod pipeline;
pub mod span;
pub mod synth;
pub mod tagscheme;

pub use error::{Error, Result};
