//! Extraction of predictions from free-form model output.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ELSE_CODE;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedPrediction {
    /// Catalog codes only; `ELSE` alone yields the empty set.
    pub codes: BTreeSet<String>,
    /// Code-like tokens in the list that are not in the catalog.
    pub unknown_codes: BTreeSet<String>,
    pub rationale: String,
    pub raw: String,
}

fn output_error(message: impl Into<String>, raw: &str) -> Error {
    Error::Output {
        message: message.into(),
        raw: raw.to_owned(),
    }
}

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty())
}

fn looks_like_code(w: &str) -> bool {
    (2..=6).contains(&w.len()) && w.chars().all(|c| c.is_ascii_uppercase())
}

struct CodeScan {
    codes: BTreeSet<String>,
    unknown: BTreeSet<String>,
    saw_else: bool,
}

fn scan(list: &str, known: &BTreeSet<&str>) -> CodeScan {
    let mut out = CodeScan {
        codes: BTreeSet::new(),
        unknown: BTreeSet::new(),
        saw_else: false,
    };
    for w in words(list) {
        let upper = w.to_uppercase();
        if upper == ELSE_CODE {
            out.saw_else = true;
        } else if known.contains(upper.as_str()) {
            out.codes.insert(upper);
        } else if looks_like_code(w) {
            out.unknown.insert(w.to_owned());
        }
    }
    out
}

fn strip_rationale_label(s: &str) -> String {
    let t = s.trim();
    let lower = t.to_lowercase();
    let t = if lower.starts_with("rationale") {
        t["rationale".len()..].trim_start_matches([':', '*', ' ']).trim_start()
    } else {
        t
    };
    t.trim().to_owned()
}

/// Text up to the first ':' when it is a short label such as `Trace links`.
fn strip_line_label(line: &str) -> &str {
    match line.split_once(':') {
        Some((label, rest)) if label.split_whitespace().count() <= 3 && !label.trim().is_empty() && words(label).any(|w| w.chars().any(char::is_lowercase)) => rest,
        _ => line,
    }
}

/// Finds the predicted codes: the first bracketed group naming a catalog
/// code (or `ELSE`), otherwise the first run of lines consisting only of
/// codes. Codes are matched case-insensitively. Text after the list becomes
/// the rationale.
pub fn parse_code_list(raw: &str, catalog_codes: &[String]) -> Result<ParsedPrediction> {
    let known: BTreeSet<&str> = catalog_codes.iter().map(String::as_str).collect();
    let finish = |s: CodeScan, rest: &str| ParsedPrediction {
        codes: s.codes,
        unknown_codes: s.unknown,
        rationale: strip_rationale_label(rest),
        raw: raw.to_owned(),
    };

    let mut offset = 0;
    while let Some(open) = raw[offset..].find('[') {
        let open = offset + open;
        let Some(close) = raw[open..].find(']').map(|c| open + c) else { break };
        let s = scan(&raw[open + 1..close], &known);
        if !s.codes.is_empty() || s.saw_else {
            return Ok(finish(s, &raw[close + 1..]));
        }
        offset = close + 1;
    }

    let lines: Vec<&str> = raw.lines().collect();
    let is_code_line = |line: &str| {
        let body = strip_line_label(line);
        let mut any = false;
        for w in words(body) {
            let upper = w.to_uppercase();
            if upper == ELSE_CODE || known.contains(upper.as_str()) {
                any = true;
            } else {
                return false;
            }
        }
        any
    };
    if let Some(first) = lines.iter().position(|l| is_code_line(l)) {
        let last = (first..lines.len()).take_while(|&i| is_code_line(lines[i])).last().unwrap_or(first);
        let listed: Vec<&str> = lines[first..=last].iter().map(|l| strip_line_label(l)).collect();
        let s = scan(&listed.join("\n"), &known);
        return Ok(finish(s, &lines[last + 1..].join("\n")));
    }
    Err(output_error("no recognizable provision code", raw))
}

/// True when the first `<trace>...</trace>` pair contains "yes".
pub fn parse_trace_tag(raw: &str) -> Result<bool> {
    let lower = raw.to_lowercase();
    let start = lower
        .find("<trace>")
        .ok_or_else(|| output_error("missing <trace> tag", raw))?
        + "<trace>".len();
    let end = lower[start..]
        .find("</trace>")
        .ok_or_else(|| output_error("unterminated <trace> tag", raw))?;
    Ok(lower[start..start + end].contains("yes"))
}

/// Yes/no verdict of a free-text answer. Lines opening with yes or no
/// (optionally after an `Answer:` style label) decide, the last one winning;
/// otherwise the first yes or no word anywhere.
pub fn parse_yes_no(raw: &str) -> Result<bool> {
    let verdict = |w: &str| match w.to_lowercase().as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    };
    let line_initial = raw.lines().filter_map(|line| {
        let mut ws = words(line).peekable();
        let first = ws.next()?;
        if let Some(v) = verdict(first) {
            return Some(v);
        }
        let label = first.to_lowercase();
        if matches!(label.as_str(), "answer" | "final" | "finally" | "verdict") {
            let next = ws.find(|w| !w.eq_ignore_ascii_case("answer"))?;
            return verdict(next);
        }
        None
    });
    if let Some(v) = line_initial.last() {
        return Ok(v);
    }
    words(raw)
        .find_map(verdict)
        .ok_or_else(|| output_error("no yes/no answer", raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(list: &[&str]) -> Vec<String> {
        list.iter().map(|c| (*c).to_owned()).collect()
    }

    fn catalog() -> Vec<String> {
        codes(&["ACC", "CNF", "SEC", "ERS", "CON"])
    }

    #[test]
    fn bracketed_list_with_prose() {
        let p = parse_code_list("[acc, SEC] because both apply", &catalog()).unwrap();
        assert_eq!(p.codes, BTreeSet::from(["ACC".to_owned(), "SEC".to_owned()]));
        assert_eq!(p.rationale, "because both apply");
    }

    #[test]
    fn else_and_unknown_codes() {
        assert!(parse_code_list("ELSE", &catalog()).unwrap().codes.is_empty());
        assert!(parse_code_list("Trace links: [ELSE]", &catalog()).unwrap().codes.is_empty());
        let p = parse_code_list("[ACC, XYZ]", &catalog()).unwrap();
        assert_eq!(p.unknown_codes, BTreeSet::from(["XYZ".to_owned()]));
        assert!(parse_code_list("I cannot tell.", &catalog()).is_err());
    }

    #[test]
    fn line_listed_codes() {
        let p = parse_code_list("Trace links: ACC, CNF\nRationale: access matters", &catalog()).unwrap();
        assert_eq!(p.codes.len(), 2);
        assert_eq!(p.rationale, "access matters");
        let p = parse_code_list("SEC\nERS\n\nBoth relate to storage.", &catalog()).unwrap();
        assert_eq!(p.codes, BTreeSet::from(["ERS".to_owned(), "SEC".to_owned()]));
        assert_eq!(p.rationale, "Both relate to storage.");
    }

    #[test]
    fn trace_tags() {
        assert!(parse_trace_tag("<trace>yes</trace>").unwrap());
        assert!(!parse_trace_tag("<trace>No</trace>").unwrap());
        assert!(parse_trace_tag("The requirement stores data...\n<TRACE> Yes </TRACE>").unwrap());
        assert!(parse_trace_tag("yes").is_err());
    }

    #[test]
    fn yes_no_answers() {
        assert!(parse_yes_no("Yes. The regulation covers access.").unwrap());
        assert!(!parse_yes_no("1. Elements: login\n2. No gaps found here\nAnswer: No, unrelated.").unwrap());
        assert!(parse_yes_no("Finally, yes: both concern consent.").unwrap());
        assert!(parse_yes_no("unclear").is_err());
    }
}
