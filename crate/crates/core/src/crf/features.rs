//! Hashed sparse token features.

use fnv::FnvHasher;
use std::hash::Hasher;

/// log2 of the feature hash space.
pub const HASH_BITS: u32 = 20;
pub const HASH_SPACE: usize = 1 << HASH_BITS;

const BOUNDARY: &str = "<bnd>";

/// Sorted, deduplicated hashed feature ids of one token position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector(pub Vec<u32>);

impl FeatureVector {
    pub fn ids(&self) -> &[u32] {
        &self.0
    }
}

fn hash_feature(template: &str, parts: &[&str]) -> u32 {
    let mut h = FnvHasher::default();
    h.write(template.as_bytes());
    for p in parts {
        h.write_u8(0xff);
        h.write(p.as_bytes());
    }
    (h.finish() & (HASH_SPACE as u64 - 1)) as u32
}

/// Coarse character-class pattern with repeats collapsed: `A1` -> `Ad`,
/// `Köln` -> `Aa`, `12:30` -> `d:d`.
pub fn word_shape(token: &str) -> String {
    let mut shape = String::new();
    let mut last = None;
    for c in token.chars() {
        let class = if c.is_uppercase() {
            'A'
        } else if c.is_lowercase() {
            'a'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(class) {
            shape.push(class);
            last = Some(class);
        }
    }
    shape
}

fn token_at(tokens: &[String], position: usize, offset: isize) -> String {
    let idx = position as isize + offset;
    if idx < 0 || idx as usize >= tokens.len() {
        BOUNDARY.to_string()
    } else {
        tokens[idx as usize].to_lowercase()
    }
}

/// Features of `tokens[position]`: lowercased token, prefixes and suffixes of
/// length 1-3, word shape, digit flag, window tokens at offsets -2..=2 (other
/// than 0) and the two bigrams around the token. Out-of-range window slots
/// use a boundary sentinel.
pub fn extract_features(tokens: &[String], position: usize) -> FeatureVector {
    assert!(position < tokens.len(), "position {position} out of range");
    let word = tokens[position].to_lowercase();
    let chars: Vec<char> = word.chars().collect();
    let mut ids = Vec::with_capacity(20);

    ids.push(hash_feature("w", &[&word]));
    for len in 1..=3 {
        if chars.len() >= len {
            let prefix: String = chars[..len].iter().collect();
            let suffix: String = chars[chars.len() - len..].iter().collect();
            ids.push(hash_feature("pre", &[&prefix]));
            ids.push(hash_feature("suf", &[&suffix]));
        }
    }
    ids.push(hash_feature("shape", &[&word_shape(&tokens[position])]));
    let is_digit = !word.is_empty() && word.chars().all(|c| c.is_ascii_digit());
    ids.push(hash_feature("digit", &[if is_digit { "1" } else { "0" }]));

    let prev = token_at(tokens, position, -1);
    let next = token_at(tokens, position, 1);
    for (name, offset) in [("w-2", -2), ("w+2", 2)] {
        ids.push(hash_feature(name, &[&token_at(tokens, position, offset)]));
    }
    ids.push(hash_feature("w-1", &[&prev]));
    ids.push(hash_feature("w+1", &[&next]));
    ids.push(hash_feature("bi-1", &[&prev, &word]));
    ids.push(hash_feature("bi+1", &[&word, &next]));

    ids.sort_unstable();
    ids.dedup();
    FeatureVector(ids)
}

pub fn extract_all(tokens: &[String]) -> Vec<FeatureVector> {
    (0..tokens.len()).map(|i| extract_features(tokens, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn deterministic_and_bounded() {
        let t = toks(&["A1", "closed", "at", "Köln"]);
        for i in 0..t.len() {
            let a = extract_features(&t, i);
            assert_eq!(a, extract_features(&t, i));
            assert!(a.ids().iter().all(|&id| (id as usize) < HASH_SPACE));
            assert!(a.ids().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn left_boundary_sentinel() {
        let t = toks(&["A1", "closed"]);
        let f = extract_features(&t, 0);
        assert!(f.ids().contains(&hash_feature("w-1", &[BOUNDARY])));
        assert!(f.ids().contains(&hash_feature("w-2", &[BOUNDARY])));
        assert!(f.ids().contains(&hash_feature("w+2", &[BOUNDARY])));
    }

    #[test]
    fn right_context_change_only_touches_window_features() {
        let a = extract_features(&toks(&["A1", "closed"]), 0);
        let b = extract_features(&toks(&["A1", "blocked"]), 0);
        let only_a: Vec<u32> = a.ids().iter().filter(|id| !b.ids().contains(id)).copied().collect();
        let only_b: Vec<u32> = b.ids().iter().filter(|id| !a.ids().contains(id)).copied().collect();
        let expected_a = {
            let mut v = vec![hash_feature("w+1", &["closed"]), hash_feature("bi+1", &["a1", "closed"])];
            v.sort_unstable();
            v
        };
        let expected_b = {
            let mut v = vec![hash_feature("w+1", &["blocked"]), hash_feature("bi+1", &["a1", "blocked"])];
            v.sort_unstable();
            v
        };
        assert_eq!(only_a, expected_a);
        assert_eq!(only_b, expected_b);
    }

    #[test]
    fn shapes() {
        assert_eq!(word_shape("A1"), "Ad");
        assert_eq!(word_shape("Köln"), "Aa");
        assert_eq!(word_shape("12:30"), "d:d");
    }
}
