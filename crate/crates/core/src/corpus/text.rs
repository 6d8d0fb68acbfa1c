//! Sentence splitting, tokenization and token normalization.
//!
//! Everything here is rule-based and deterministic. The stemmer is a small
//! suffix stripper applied until no rule fires, which makes it (and
//! therefore [`normalize`]) idempotent.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::stopwords;
use crate::error::{Error, Result};

/// Abbreviations whose trailing period never ends a sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "cf.", "vs.", "viz.", "mr.", "mrs.", "ms.", "dr.", "prof.", "art.", "para.",
    "sec.", "fig.", "approx.", "incl.", "resp.", "u.s.", "e.u.",
];

const TERMINALS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 7] = [')', ']', '"', '\'', '\u{2019}', '\u{201d}', '}'];

/// Rule-based splitter on terminal punctuation with an abbreviation list.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: BTreeSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn new<'a>(abbreviations: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            abbreviations: abbreviations.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn split<'t>(&self, text: &'t str) -> Vec<&'t str> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut sentences = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if !TERMINALS.contains(&c) {
                i += 1;
                continue;
            }
            // absorb runs like "?!" and closing quotes/brackets
            let mut j = i + 1;
            while j < chars.len() && (TERMINALS.contains(&chars[j].1) || CLOSERS.contains(&chars[j].1)) {
                j += 1;
            }
            let at_break = j == chars.len() || chars[j].1.is_whitespace();
            if at_break && !(c == '.' && self.is_abbreviation(&text[start..pos + 1])) {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                push_trimmed(&mut sentences, &text[start..end]);
                start = end;
            }
            i = j;
        }
        push_trimmed(&mut sentences, &text[start..]);
        sentences
    }

    fn is_abbreviation(&self, prefix: &str) -> bool {
        let word = prefix
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or("")
            .trim_start_matches(['(', '[', '"', '\'', '\u{2018}', '\u{201c}']);
        self.abbreviations.contains(&word.to_lowercase())
    }
}

fn push_trimmed<'t>(out: &mut Vec<&'t str>, piece: &'t str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece);
    }
}

/// Splits `text` into sentences with the default abbreviation list.
pub fn split_sentences(text: &str) -> Vec<String> {
    SentenceSplitter::default()
        .split(text)
        .into_iter()
        .map(str::to_owned)
        .collect()
}

/// Maximal runs of letters/digits; every other non-whitespace character is a
/// token on its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.push(c);
            continue;
        }
        if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
    pub stopword_list: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    /// Lowercasing and punctuation removal only.
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            remove_stopwords: false,
            stem: false,
            stopword_list: english_stopwords(),
        }
    }
}

impl PreprocessConfig {
    /// Every flag off: `normalize` is the identity.
    pub fn identity() -> Self {
        Self {
            lowercase: false,
            strip_punctuation: false,
            remove_stopwords: false,
            stem: false,
            stopword_list: BTreeSet::new(),
        }
    }

    /// Stopword and punctuation removal (the LSI / VSM setting).
    pub fn without_stopwords() -> Self {
        Self {
            remove_stopwords: true,
            ..Self::default()
        }
    }

    /// Stopword and punctuation removal plus stemming (the LDA setting).
    pub fn full() -> Self {
        Self {
            remove_stopwords: true,
            stem: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.remove_stopwords && self.stopword_list.is_empty() {
            return Err(Error::invalid(
                "stopword_list",
                "must be non-empty when remove_stopwords is set",
            ));
        }
        Ok(())
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopword_list.contains(token) || self.stopword_list.contains(&token.to_lowercase())
    }
}

pub fn english_stopwords() -> BTreeSet<String> {
    stopwords::ENGLISH.iter().map(|s| s.to_string()).collect()
}

/// Applies the enabled flags in the order lowercase, punctuation, stopwords,
/// stem. Stems that collide with a stopword are dropped too, so a second
/// pass never changes the output.
pub fn normalize(tokens: &[String], config: &PreprocessConfig) -> Vec<String> {
    tokens
        .iter()
        .filter_map(|token| {
            let mut t = if config.lowercase {
                token.to_lowercase()
            } else {
                token.clone()
            };
            if config.strip_punctuation && !t.chars().any(char::is_alphanumeric) {
                return None;
            }
            if config.remove_stopwords && config.is_stopword(&t) {
                return None;
            }
            if config.stem {
                t = stem(&t);
                if config.strip_punctuation && !t.chars().any(char::is_alphanumeric) {
                    return None;
                }
                if config.remove_stopwords && config.is_stopword(&t) {
                    return None;
                }
            }
            Some(t)
        })
        .collect()
}

/// Tokenize then normalize.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> Vec<String> {
    normalize(&tokenize(text), config)
}

/// Suffix-stripping stemmer for lowercase English words, iterated to a fixed
/// point. Words are left alone unless a rule keeps at least three characters.
pub fn stem(word: &str) -> String {
    let mut current = word.to_owned();
    while let Some(next) = stem_step(&current) {
        current = next;
    }
    current
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

fn strip_inflection(stem: &str) -> Option<String> {
    if char_len(stem) < 3 || !has_vowel(stem) {
        return None;
    }
    let mut chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 4 && chars[n - 1] == chars[n - 2] && !matches!(chars[n - 1], 'l' | 's' | 'z') && chars[n - 1].is_ascii_alphabetic() && !has_vowel(&chars[n - 1].to_string()) {
        chars.pop();
    }
    Some(chars.into_iter().collect())
}

/// One rewrite; every rule shortens the word so iteration terminates.
fn stem_step(w: &str) -> Option<String> {
    let cut = |suffix: &str, min_stem: usize| -> Option<&str> {
        let stem = w.strip_suffix(suffix)?;
        (char_len(stem) >= min_stem).then_some(stem)
    };

    if let Some(s) = cut("sses", 2) {
        return Some(format!("{s}ss"));
    }
    if let Some(s) = cut("ies", 2) {
        return Some(format!("{s}y"));
    }
    for suffix in ["xes", "ches", "shes", "zes"] {
        if let Some(s) = cut(suffix, 2) {
            return Some(format!("{s}{}", &suffix[..suffix.len() - 2]));
        }
    }
    for suffix in ["ization", "isation"] {
        if let Some(s) = cut(suffix, 3) {
            return Some(format!("{s}ize"));
        }
    }
    for suffix in ["ations", "ation", "ating", "ated", "ate"] {
        if let Some(s) = cut(suffix, 4) {
            return Some(s.to_owned());
        }
    }
    for suffix in ["tion", "sion"] {
        if let Some(s) = cut(suffix, 3) {
            return Some(format!("{s}{}", &suffix[..1]));
        }
    }
    for suffix in ["ments", "ment", "ness", "ity", "ly", "al"] {
        if let Some(s) = cut(suffix, 4) {
            return Some(s.to_owned());
        }
    }
    if let Some(s) = w.strip_suffix("ing").and_then(strip_inflection) {
        return Some(s);
    }
    if let Some(s) = w.strip_suffix("ed").and_then(strip_inflection) {
        return Some(s);
    }
    if let Some(s) = cut("s", 3) {
        if !(s.ends_with('s') || s.ends_with('u') || s.ends_with('i')) && has_vowel(s) {
            return Some(s.to_owned());
        }
    }
    if let Some(s) = cut("e", 4) {
        if !s.ends_with('e') {
            return Some(s.to_owned());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn splits_on_terminal_periods() {
        assert_eq!(
            split_sentences("A shall B. C shall D."),
            vec!["A shall B.", "C shall D."]
        );
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(
            split_sentences("e.g. the system logs in. Done."),
            vec!["e.g. the system logs in.", "Done."]
        );
        assert_eq!(
            split_sentences("Data (i.e. logs) are kept. See Art. 15 for details!"),
            vec!["Data (i.e. logs) are kept.", "See Art. 15 for details!"]
        );
    }

    #[test]
    fn closing_quotes_stay_with_their_sentence() {
        assert_eq!(
            split_sentences("He said \"stop.\" Then left? Yes"),
            vec!["He said \"stop.\"", "Then left?", "Yes"]
        );
        assert_eq!(split_sentences("Version 2.5 ships."), vec!["Version 2.5 ships."]);
    }

    #[test]
    fn custom_abbreviation_list() {
        let splitter = SentenceSplitter::new(["approx."]);
        assert_eq!(splitter.split("It takes approx. two days."), vec!["It takes approx. two days."]);
        assert_eq!(splitter.split("Use e.g. this. Done."), vec!["Use e.g.", "this.", "Done."]);
    }

    #[test]
    fn tokenizer_examples() {
        assert_eq!(tokenize("The cat sits."), toks(&["The", "cat", "sits", "."]));
        assert_eq!(tokenize("GDPR-compliant"), toks(&["GDPR", "-", "compliant"]));
        assert_eq!(tokenize("user's data"), toks(&["user", "'", "s", "data"]));
        assert_eq!(tokenize("Données à 3€"), toks(&["Données", "à", "3", "€"]));
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn normalize_with_all_flags() {
        let out = normalize(&toks(&["The", "system", "shall", "."]), &PreprocessConfig::full());
        assert_eq!(out, toks(&["system", "shall"]));
    }

    #[test]
    fn normalize_identity_when_flags_off() {
        let input = toks(&["The", "Users'", ",", "data"]);
        assert_eq!(normalize(&input, &PreprocessConfig::identity()), input);
    }

    #[test]
    fn stemmer_conflates_inflections() {
        assert_eq!(stem("processing"), "process");
        assert_eq!(stem("processes"), "process");
        assert_eq!(stem("processed"), "process");
        assert_eq!(stem("encryption"), "encrypt");
        assert_eq!(stem("encrypted"), "encrypt");
        assert_eq!(stem("authentication"), "authentic");
        assert_eq!(stem("authenticated"), "authentic");
        assert_eq!(stem("deletion"), "delet");
        assert_eq!(stem("delete"), "delet");
        assert_eq!(stem("policies"), "policy");
        assert_eq!(stem("logging"), "log");
        assert_eq!(stem("access"), "access");
        assert_eq!(stem("status"), "status");
    }

    #[test]
    fn stemmer_leaves_short_words() {
        for w in ["is", "as", "use", "data", "ing", "ed"] {
            assert_eq!(stem(w), w);
        }
    }

    #[test]
    fn stopword_config_must_have_a_list() {
        let mut config = PreprocessConfig::full();
        assert!(config.validate().is_ok());
        config.stopword_list.clear();
        assert!(config.validate().is_err());
    }
}
