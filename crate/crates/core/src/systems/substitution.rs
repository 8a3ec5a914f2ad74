//! Primitive substitutions, fixed-point prefixes and return words.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubstitutionRepr", into = "SubstitutionRepr")]
pub struct SubstitutionSystem {
    alphabet: Vec<char>,
    rules: BTreeMap<char, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstitutionRepr {
    rules: BTreeMap<char, String>,
}

impl TryFrom<SubstitutionRepr> for SubstitutionSystem {
    type Error = Error;

    fn try_from(r: SubstitutionRepr) -> Result<Self> {
        SubstitutionSystem::new(r.rules)
    }
}

impl From<SubstitutionSystem> for SubstitutionRepr {
    fn from(s: SubstitutionSystem) -> Self {
        SubstitutionRepr { rules: s.rules }
    }
}

/// A distinct return word with the number of times it was observed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnWord {
    pub word: String,
    pub count: usize,
}

impl SubstitutionSystem {
    /// Builds the system; the alphabet is the key set of `rules`. Rejects
    /// empty images, images using unknown symbols, and non-primitive rules.
    pub fn new(rules: BTreeMap<char, String>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Substitution("empty rule set".into()));
        }
        let alphabet: Vec<char> = rules.keys().copied().collect();
        if let Some(c) = alphabet.iter().find(|c| !c.is_ascii_graphic()) {
            return Err(Error::Substitution(format!("symbol {c:?} is not printable ASCII")));
        }
        for (a, img) in &rules {
            if img.is_empty() {
                return Err(Error::Substitution(format!("image of {a:?} is empty")));
            }
            if let Some(c) = img.chars().find(|c| !rules.contains_key(c)) {
                return Err(Error::Substitution(format!("symbol {c:?} has no rule")));
            }
        }
        let sys = SubstitutionSystem { alphabet, rules };
        if !sys.is_primitive() {
            return Err(Error::Substitution("substitution is not primitive".into()));
        }
        Ok(sys)
    }

    /// `a → ab, b → a`.
    pub fn fibonacci() -> Self {
        Self::new(BTreeMap::from([('a', "ab".to_string()), ('b', "a".to_string())]))
            .expect("Fibonacci substitution is primitive")
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn image(&self, a: char) -> Option<&str> {
        self.rules.get(&a).map(String::as_str)
    }

    /// Some power of the incidence matrix is strictly positive. By Wielandt's
    /// bound it suffices to check exponents up to `(n-1)^2 + 1`.
    fn is_primitive(&self) -> bool {
        let n = self.alphabet.len();
        let idx: BTreeMap<char, usize> =
            self.alphabet.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let mut m = vec![vec![false; n]; n];
        for (a, img) in &self.rules {
            for c in img.chars() {
                m[idx[a]][idx[&c]] = true;
            }
        }
        let mut power = m.clone();
        for _ in 0..((n - 1) * (n - 1) + 1) {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return true;
            }
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..n {
                    next[i][j] = (0..n).any(|l| power[i][l] && m[l][j]);
                }
            }
            power = next;
        }
        power.iter().all(|row| row.iter().all(|&b| b))
    }

    pub fn apply(&self, w: &str) -> String {
        w.chars().map(|c| self.rules[&c].as_str()).collect()
    }

    /// Length-`len` prefix of the one-sided fixed point starting with `seed`.
    pub fn fixed_word(&self, seed: char, len: usize) -> Result<String> {
        if len == 0 {
            return Err(Error::InvalidArgument("prefix length must be ≥ 1".into()));
        }
        let img = self
            .image(seed)
            .ok_or_else(|| Error::Substitution(format!("unknown seed symbol {seed:?}")))?;
        if !img.starts_with(seed) || img.chars().count() < 2 {
            return Err(Error::Substitution(format!(
                "seed {seed:?} does not extend: its image {img:?} must start with it and be longer"
            )));
        }
        let mut w = seed.to_string();
        while w.len() < len {
            w = self.apply(&w);
        }
        w.truncate(len);
        Ok(w)
    }

    /// Distinct return words of `w` in the length-`horizon` prefix of the
    /// fixed point seeded by its first symbol: the segments between
    /// consecutive occurrences, in order of first appearance.
    pub fn return_words(&self, w: &str, horizon: usize) -> Result<Vec<ReturnWord>> {
        let seed = w
            .chars()
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty word".into()))?;
        let seed = self.fixed_point_seed(seed)?;
        let text = self.fixed_word(seed, horizon)?;
        return_words_in(&text, w)
    }

    /// The seed of a fixed point, preferring `preferred` when it extends.
    pub fn fixed_point_seed(&self, preferred: char) -> Result<char> {
        let extends = |c: char| {
            self.image(c).is_some_and(|img| img.starts_with(c) && img.chars().count() >= 2)
        };
        if extends(preferred) {
            return Ok(preferred);
        }
        self.alphabet
            .iter()
            .copied()
            .find(|&c| extends(c))
            .ok_or_else(|| Error::Substitution("no symbol seeds a fixed point".into()))
    }
}

/// Start positions of (possibly overlapping) occurrences of `w` in `text`.
pub fn occurrences(text: &str, w: &str) -> Vec<usize> {
    if w.is_empty() || w.len() > text.len() {
        return Vec::new();
    }
    let t = text.as_bytes();
    let p = w.as_bytes();
    (0..=t.len() - p.len()).filter(|&i| &t[i..i + p.len()] == p).collect()
}

/// Return words of `w` observed in `text`.
pub fn return_words_in(text: &str, w: &str) -> Result<Vec<ReturnWord>> {
    let occ = occurrences(text, w);
    if occ.len() < 2 {
        return Err(Error::InsufficientHorizon(format!(
            "{w:?} occurs {} time(s) in a prefix of length {}",
            occ.len(),
            text.len()
        )));
    }
    let mut out: Vec<ReturnWord> = Vec::new();
    for pair in occ.windows(2) {
        let r = &text[pair[0]..pair[1]];
        match out.iter_mut().find(|rw| rw.word == r) {
            Some(rw) => rw.count += 1,
            None => out.push(ReturnWord { word: r.to_string(), count: 1 }),
        }
    }
    Ok(out)
}
