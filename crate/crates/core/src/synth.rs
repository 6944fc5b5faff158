//! Seeded synthetic corpus generator.
//!
//! Documents are sequences of relation blocks joined by filler. Each
//! `(label, role)` pair owns a private vocabulary, so attribute values are
//! unambiguous per role. Within a block, attributes are separated by 1 to 3
//! filler tokens; blocks are separated by 4 to 8. Three phenomena can be
//! switched on:
//!
//! * shared spans: the first relation's `Location` is placed as its last
//!   attribute and also serves a second relation (of another label) that
//!   directly follows and has no location of its own;
//! * same-label pairs: a second relation with the first relation's label,
//!   appended after more than `relation_width` filler tokens;
//! * ambiguity: a same-label pair placed closer than `relation_width`, which
//!   no width-based grouping rule can separate.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembler::DEFAULT_MAX_RELATION_WIDTH;
use crate::corpus::{Attribute, Document, Entity, LabelDef, Relation, RoleDef, Schema, Span};
use crate::error::{Error, Result};

/// Role that may be shared between neighbouring relations.
pub const SHARED_ROLE: &str = "Location";

const LOCATION_TYPES: [&str; 3] = ["Location-City", "Location-Street", "Location-Route"];
const SOURCES: [&str; 3] = ["news", "rss", "twitter"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleTemplate {
    pub name: String,
    pub mandatory: bool,
    #[serde(default)]
    pub trigger: bool,
    #[serde(default)]
    pub entity_types: Vec<String>,
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelTemplate {
    pub label: String,
    pub roles: Vec<RoleTemplate>,
}

impl LabelTemplate {
    fn role(&self, name: &str) -> Option<&RoleTemplate> {
        self.roles.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SynthConfig {
    pub document_count: usize,
    pub templates: Vec<LabelTemplate>,
    pub filler: Vec<String>,
    pub optional_attribute_probability: f64,
    /// Chance of an extra relation whose label differs from the others.
    pub multi_relation_probability: f64,
    pub same_label_pair_probability: f64,
    pub shared_span_probability: f64,
    pub ambiguity_probability: f64,
    /// Same-label pairs are separated by more than this many tokens.
    pub relation_width: usize,
    /// Attribute values have between 1 and this many tokens.
    pub max_value_tokens: usize,
    pub id_prefix: String,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let (templates, filler) = default_templates();
        SynthConfig {
            document_count: 100,
            templates,
            filler,
            optional_attribute_probability: 0.5,
            multi_relation_probability: 0.3,
            same_label_pair_probability: 0.2,
            shared_span_probability: 0.3,
            ambiguity_probability: 0.0,
            relation_width: DEFAULT_MAX_RELATION_WIDTH,
            max_value_tokens: 1,
            id_prefix: "synth".into(),
            seed: 0,
        }
    }
}

/// Pronounceable pseudo-words, unique across the whole generator.
fn pseudo_words(rng: &mut ChaCha8Rng, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
    const NUCLEI: [&str; 6] = ["a", "e", "i", "o", "u", "au"];
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(NUCLEI.choose(rng).unwrap());
        }
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Four traffic-event labels. Disaster has three mandatory roles, the
/// others two, so both binary and non-binary documents occur.
pub fn default_templates() -> (Vec<LabelTemplate>, Vec<String>) {
    type RoleSpec = (&'static str, bool, bool, &'static [&'static str]);
    let loc: &[&str] = &LOCATION_TYPES;
    let specs: [(&str, &[RoleSpec]); 4] = [
        (
            "Accident",
            &[
                ("Trigger", true, true, &["Trigger"]),
                ("Location", true, false, loc),
                ("Delay", false, false, &["Duration"]),
                ("Date", false, false, &["Date"]),
            ],
        ),
        (
            "Obstruction",
            &[
                ("Trigger", true, true, &["Trigger"]),
                ("Location", true, false, loc),
                ("Cause", false, false, &["Cause"]),
                ("Delay", false, false, &["Duration"]),
            ],
        ),
        (
            "TrafficJam",
            &[
                ("Trigger", true, true, &["Trigger"]),
                ("Location", true, false, loc),
                ("StartLoc", false, false, loc),
                ("EndLoc", false, false, loc),
                ("JamLength", false, false, &["Distance"]),
                ("Delay", false, false, &["Duration"]),
            ],
        ),
        (
            "Disaster",
            &[
                ("Trigger", true, true, &["Trigger"]),
                ("Location", true, false, loc),
                ("DisasterType", true, false, &["DisasterType"]),
                ("Date", false, false, &["Date"]),
            ],
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d617265);
    let mut taken = BTreeSet::new();
    let templates = specs
        .iter()
        .map(|(label, roles)| LabelTemplate {
            label: label.to_string(),
            roles: roles
                .iter()
                .map(|&(name, mandatory, trigger, types)| RoleTemplate {
                    name: name.into(),
                    mandatory,
                    trigger,
                    entity_types: types.iter().map(|t| t.to_string()).collect(),
                    vocabulary: pseudo_words(&mut rng, 12, &mut taken),
                })
                .collect(),
        })
        .collect();
    let filler = pseudo_words(&mut rng, 40, &mut taken);
    (templates, filler)
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            self.optional_attribute_probability,
            self.multi_relation_probability,
            self.same_label_pair_probability,
            self.shared_span_probability,
            self.ambiguity_probability,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("synthetic probabilities must lie in [0, 1]".into()));
        }
        if self.document_count == 0 {
            return Err(Error::Config("document count must be at least 1".into()));
        }
        if self.max_value_tokens == 0 || self.relation_width == 0 {
            return Err(Error::Config("value length and relation width must be at least 1".into()));
        }
        if self.templates.is_empty() || self.filler.is_empty() {
            return Err(Error::Config("templates and filler vocabulary must be non-empty".into()));
        }
        for t in &self.templates {
            if t.role(SHARED_ROLE).is_none_or(|r| !r.mandatory) {
                return Err(Error::Config(format!(
                    "template `{}` needs a mandatory `{SHARED_ROLE}` role",
                    t.label
                )));
            }
            if t.roles.iter().any(|r| r.vocabulary.is_empty()) {
                return Err(Error::Config(format!("template `{}` has a role without vocabulary", t.label)));
            }
        }
        let needs_pair_label = self.shared_span_probability > 0.0 || self.multi_relation_probability > 0.0;
        if needs_pair_label && self.templates.len() < 2 {
            return Err(Error::Config("shared spans and extra relations need at least two labels".into()));
        }
        self.schema().map(|_| ())
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::new(
            self.templates
                .iter()
                .map(|t| {
                    LabelDef::new(
                        t.label.clone(),
                        t.roles
                            .iter()
                            .map(|r| {
                                let mut def = RoleDef::new(r.name.clone(), r.mandatory)
                                    .with_entity_types(r.entity_types.iter().cloned());
                                def.trigger = r.trigger;
                                def
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// One relation being laid out: `(role, value tokens)` in output order.
struct Block {
    label: String,
    parts: Vec<(String, Vec<String>)>,
    /// The last attribute is also owned by the next block.
    shares_last: bool,
}

struct Builder<'a> {
    config: &'a SynthConfig,
    rng: ChaCha8Rng,
}

impl Builder<'_> {
    fn filler(&mut self, tokens: &mut Vec<String>, count: usize) {
        for _ in 0..count {
            tokens.push(self.config.filler.choose(&mut self.rng).unwrap().clone());
        }
    }

    fn value(&mut self, role: &RoleTemplate) -> Vec<String> {
        let len = self.rng.random_range(1..=self.config.max_value_tokens);
        (0..len).map(|_| role.vocabulary.choose(&mut self.rng).unwrap().clone()).collect()
    }

    /// Attribute roles of one relation, shuffled. `skip_shared` leaves out
    /// the shared role; `shared_last` moves it to the end.
    fn block(&mut self, template: &LabelTemplate, skip_shared: bool, shared_last: bool) -> Block {
        let mut roles: Vec<&RoleTemplate> = template
            .roles
            .iter()
            .filter(|r| !(skip_shared && r.name == SHARED_ROLE))
            .filter(|r| r.mandatory || self.rng.random_bool(self.config.optional_attribute_probability))
            .collect();
        roles.shuffle(&mut self.rng);
        if shared_last {
            let i = roles.iter().position(|r| r.name == SHARED_ROLE).expect("shared role is mandatory");
            let r = roles.remove(i);
            roles.push(r);
        }
        Block {
            label: template.label.clone(),
            parts: roles.into_iter().map(|r| (r.name.clone(), self.value(r))).collect(),
            shares_last: shared_last,
        }
    }

    fn document(&mut self, index: usize) -> Document {
        let cfg = self.config;
        let templates = &cfg.templates;
        let first = self.rng.random_range(0..templates.len());
        let ambiguous = self.rng.random_bool(cfg.ambiguity_probability);
        let shared = !ambiguous && self.rng.random_bool(cfg.shared_span_probability);
        let twin = !ambiguous && self.rng.random_bool(cfg.same_label_pair_probability);
        let extra = self.rng.random_bool(cfg.multi_relation_probability);

        let mut used = vec![first];
        let pick_other = |rng: &mut ChaCha8Rng, used: &mut Vec<usize>| {
            let free: Vec<usize> = (0..templates.len()).filter(|i| !used.contains(i)).collect();
            let pick = *free.choose(rng)?;
            used.push(pick);
            Some(pick)
        };

        // blocks laid out with the filler that precedes each one
        let mut blocks: Vec<(usize, Block)> = Vec::new();
        blocks.push((0, self.block(&templates[first], false, shared)));
        if ambiguous {
            let gap = self.rng.random_range(4..=8.min(cfg.relation_width).max(4));
            blocks.push((gap, self.block(&templates[first], false, false)));
        }
        if shared {
            if let Some(second) = pick_other(&mut self.rng, &mut used) {
                let gap = self.rng.random_range(1..=3);
                blocks.push((gap, self.block(&templates[second], true, false)));
            } else {
                blocks[0].1.shares_last = false;
            }
        }
        if extra {
            if let Some(third) = pick_other(&mut self.rng, &mut used) {
                let gap = self.rng.random_range(4..=8);
                blocks.push((gap, self.block(&templates[third], false, false)));
            }
        }
        if twin {
            let w = cfg.relation_width;
            let gap = self.rng.random_range(w + 1..=w + 5);
            blocks.push((gap, self.block(&templates[first], false, false)));
        }

        let mut tokens = Vec::new();
        let lead = self.rng.random_range(0..=3);
        self.filler(&mut tokens, lead);
        let mut relations: Vec<Relation> = Vec::new();
        let mut entities = Vec::new();
        let mut carried: Option<Attribute> = None;
        for (gap, block) in blocks {
            self.filler(&mut tokens, gap);
            let mut attrs = Vec::new();
            if let Some(shared_attr) = carried.take() {
                attrs.push(shared_attr);
            }
            let count = block.parts.len();
            for (i, (role, value)) in block.parts.into_iter().enumerate() {
                if i > 0 {
                    let g = self.rng.random_range(1..=3);
                    self.filler(&mut tokens, g);
                }
                let span = Span::new(tokens.len(), tokens.len() + value.len());
                tokens.extend(value);
                let template = templates.iter().find(|t| t.label == block.label).unwrap();
                let types = &template.role(&role).unwrap().entity_types;
                let entity_type = types.choose(&mut self.rng).cloned().unwrap_or_else(|| role.clone());
                entities.push(Entity { span, entity_type });
                let attr = Attribute { span, role };
                if block.shares_last && i + 1 == count {
                    carried = Some(attr.clone());
                }
                attrs.push(attr);
            }
            attrs.sort();
            relations.push(Relation::new(block.label, attrs));
        }
        let trail = self.rng.random_range(0..=3);
        self.filler(&mut tokens, trail);
        entities.sort_by_key(|e| e.span);

        let mut doc = Document::new(format!("{}-{index:05}", cfg.id_prefix), tokens);
        doc.relations = relations;
        doc.entities = entities;
        doc.source = Some(SOURCES.choose(&mut self.rng).unwrap().to_string());
        doc
    }
}

/// Generates `config.document_count` documents; identical for equal configs.
pub fn generate(config: &SynthConfig) -> Result<Vec<Document>> {
    config.validate()?;
    let mut builder = Builder {
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    Ok((0..config.document_count).map(|i| builder.document(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_document;

    #[test]
    fn deterministic_and_valid() {
        let cfg = SynthConfig {
            document_count: 200,
            max_value_tokens: 3,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        assert_eq!(a, generate(&cfg).unwrap());
        let schema = cfg.schema().unwrap();
        for d in &a {
            d.check_structure().unwrap();
            assert!(validate_document(d, &schema).is_empty(), "{d:?}");
        }
        let other = generate(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn forced_same_label_pairs() {
        let cfg = SynthConfig {
            document_count: 50,
            same_label_pair_probability: 1.0,
            ..SynthConfig::default()
        };
        for d in generate(&cfg).unwrap() {
            let first = &d.relations[0];
            let last = d.relations.last().unwrap();
            assert_eq!(first.label, last.label);
            let gap = last.attributes[0].span.start - first.attributes.last().unwrap().span.end;
            assert!(gap > cfg.relation_width);
        }
    }

    #[test]
    fn forced_shared_spans() {
        let cfg = SynthConfig {
            document_count: 50,
            shared_span_probability: 1.0,
            ..SynthConfig::default()
        };
        for d in generate(&cfg).unwrap() {
            let spans: Vec<Span> = d.relations.iter().flat_map(|r| r.attributes.iter().map(|a| a.span)).collect();
            let unique: BTreeSet<Span> = spans.iter().copied().collect();
            assert!(unique.len() < spans.len(), "{d:?}");
        }
    }

    #[test]
    fn vocabularies_are_disjoint() {
        let (templates, filler) = default_templates();
        let mut all: Vec<&String> = templates.iter().flat_map(|t| t.roles.iter().flat_map(|r| &r.vocabulary)).collect();
        all.extend(&filler);
        let set: BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let cfg = SynthConfig {
            shared_span_probability: 1.5,
            ..SynthConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
    }
}
