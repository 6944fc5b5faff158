use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleDef {
    pub name: String,
    #[serde(default)]
    pub mandatory: bool,
    #[serde(default)]
    pub trigger: bool,
    #[serde(default)]
    pub entity_types: Vec<String>,
}

impl RoleDef {
    pub fn new(name: impl Into<String>, mandatory: bool) -> Self {
        RoleDef {
            name: name.into(),
            mandatory,
            trigger: false,
            entity_types: Vec::new(),
        }
    }

    pub fn trigger(mut self) -> Self {
        self.trigger = true;
        self
    }

    pub fn with_entity_types<I, S>(mut self, types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entity_types = types.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelDef {
    pub name: String,
    pub roles: Vec<RoleDef>,
    /// Opt-out of the "at least two mandatory roles" rule.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub single_mandatory: bool,
}

impl LabelDef {
    pub fn new(name: impl Into<String>, roles: Vec<RoleDef>) -> Self {
        LabelDef {
            name: name.into(),
            roles,
            single_mandatory: false,
        }
    }

    pub fn role(&self, name: &str) -> Option<&RoleDef> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn mandatory_roles(&self) -> impl Iterator<Item = &RoleDef> {
        self.roles.iter().filter(|r| r.mandatory)
    }

    pub fn trigger_role(&self) -> Option<&RoleDef> {
        self.roles.iter().find(|r| r.trigger)
    }
}

/// Relation labels with their ordered role inventories.
///
/// Label order and role order are significant: they fix tag indices, the
/// span label set and every tie-break that refers to "schema order".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub labels: Vec<LabelDef>,
}

impl Schema {
    /// Builds and validates a schema.
    pub fn new(labels: Vec<LabelDef>) -> Result<Self> {
        let schema = Schema { labels };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let schema: Schema = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            line: 1,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read schema `{}`: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen_labels = HashSet::new();
        for label in &self.labels {
            check_name(&label.name, "label")?;
            if !seen_labels.insert(label.name.as_str()) {
                return Err(Error::Schema(format!("duplicate label `{}`", label.name)));
            }
            if label.roles.is_empty() {
                return Err(Error::Schema(format!("label `{}` has no roles", label.name)));
            }
            let mut seen_roles = HashSet::new();
            for role in &label.roles {
                check_name(&role.name, "role")?;
                if !seen_roles.insert(role.name.as_str()) {
                    return Err(Error::Schema(format!(
                        "label `{}` declares role `{}` twice",
                        label.name, role.name
                    )));
                }
            }
            let mandatory = label.mandatory_roles().count();
            if mandatory < 2 && !(label.single_mandatory && mandatory == 1) {
                return Err(Error::Schema(format!(
                    "label `{}` has {mandatory} mandatory roles; at least two are required unless `singleMandatory` is set",
                    label.name
                )));
            }
            if label.roles.iter().filter(|r| r.trigger).count() > 1 {
                return Err(Error::Schema(format!(
                    "label `{}` designates more than one trigger role",
                    label.name
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self, name: &str) -> Option<&LabelDef> {
        self.labels.iter().find(|l| l.name == name)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    pub fn role_index(&self, label: &str, role: &str) -> Option<(usize, usize)> {
        let li = self.label_index(label)?;
        let ri = self.labels[li].roles.iter().position(|r| r.name == role)?;
        Some((li, ri))
    }

    pub fn is_mandatory(&self, label: &str, role: &str) -> bool {
        self.label(label)
            .and_then(|l| l.role(role))
            .is_some_and(|r| r.mandatory)
    }

    pub fn trigger_role(&self, label: &str) -> Option<&str> {
        self.label(label)
            .and_then(|l| l.trigger_role())
            .map(|r| r.name.as_str())
    }

    pub fn entity_types(&self, label: &str, role: &str) -> &[String] {
        self.label(label)
            .and_then(|l| l.role(role))
            .map(|r| r.entity_types.as_slice())
            .unwrap_or(&[])
    }

    /// Total number of `(label, role)` pairs.
    pub fn role_count(&self) -> usize {
        self.labels.iter().map(|l| l.roles.len()).sum()
    }

    /// Whether an attribute with role `(label_a, role_a)` may stand in for
    /// `(label_b, role_b)`: entity-type overlap when both roles declare
    /// entity types, plain role-name equality otherwise.
    pub fn roles_compatible(&self, label_a: &str, role_a: &str, label_b: &str, role_b: &str) -> bool {
        let ta = self.entity_types(label_a, role_a);
        let tb = self.entity_types(label_b, role_b);
        if ta.is_empty() || tb.is_empty() {
            role_a == role_b
        } else {
            ta.iter().any(|t| tb.contains(t))
        }
    }

    /// Short stable digest of the canonical schema serialization.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("schema serialization cannot fail");
        let digest = Sha256::digest(&canonical);
        hex::encode(&digest[..8])
    }
}

fn check_name(name: &str, what: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Schema(format!("empty {what} name")));
    }
    if name.contains('-') || name.chars().any(char::is_whitespace) {
        return Err(Error::Schema(format!(
            "{what} name `{name}` must not contain `-` or whitespace"
        )));
    }
    Ok(())
}
