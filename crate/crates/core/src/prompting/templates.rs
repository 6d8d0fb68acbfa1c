//! Prompt builders. Every builder is a pure function of its inputs.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Provision, Requirement, ELSE_CODE};
use crate::error::{Error, Result};

pub const FEW_SHOT_COUNT: usize = 5;

/// Catalog line appended after the provisions in the structured prompt.
pub const ELSE_LINE: &str =
    "ELSE: No trace link: the requirement does not trace to any of the regulatory codes listed above.";

const RICE_CONTEXT: &str = "I am currently working on a task focused on establishing traceability between software requirements and regulatory codes. This involves analyzing and mapping requirements to relevant GDPR regulations, ensuring that our software development aligns with regulatory compliance. Below are the main regulatory codes that I want you to remember at first:";

const RICE_EXAMPLES: &str = "Here are five sample traceability examples. I've also added my rationale for tracing regulatory codes to the requirements for your reference.";

const RICE_INSTRUCTION: &str = "Find the trace links for a given requirement and provide the rationale behind your choice extended from the examples I provided. Please consider regulatory codes which I have not used in the examples. Pay attention to the roles (AS_ROLE) in the requirement, if there are any. Remember, regulations' text focus on personal data, but try to consider all types of data, role, or functionalities in a software system. Pay attention to commonsense and indirect relations between requirement and regulations. Aim to include regulations even if they have a low likelihood of being traced, prioritizing recall over precision. Choose at least one regulation for each requirement.";

const RICE_OUTPUT: &str = "List of alphabetical order of regulatory codes (if any) similar to the examples I provided to you. Newline to explain the rational behind the choice(s).";

const P1_HEAD: &str = "Below are artifacts from a software system requirement and the GDPR. Is there a traceability link between (1) and (2)? Give your reasoning and then answer with 'yes' or 'no' enclosed in <trace> </trace>.";

const P2_HEAD: &str = "Act as a requirements engineering domain expert and list the IDs of the GDPR regulations that are dependent on the following requirement:";

const P3_SCENARIO: &str = "Consider the following scenario where the Requirement text represent requirements of the software system and Regulation represent a GDPR regulation.";

const P3_1_TASK: &str = "Let's think step by step: 1. Identify the key elements of the requirement; 2. Match these elements with the regulation; 3. Highlight any gaps; 4. Infer implicit traceability; Finally, answer with Yes or No if there is a traceability relationship, and provide a brief rationale in about 10 words.";

const P3_2_TASK: &str = "Answer with Yes or No: Does the regulation trace back to the requirement?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PromptVariant {
    #[serde(rename = "rice")]
    Rice,
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "p3_1")]
    P3_1,
    #[serde(rename = "p3_2")]
    P3_2,
}

impl PromptVariant {
    pub const ALL: [PromptVariant; 5] = [Self::Rice, Self::P1, Self::P2, Self::P3_1, Self::P3_2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rice => "rice",
            Self::P1 => "p1",
            Self::P2 => "p2",
            Self::P3_1 => "p3_1",
            Self::P3_2 => "p3_2",
        }
    }

    /// Variants asking one question per (requirement, provision) pair.
    pub fn is_pairwise(&self) -> bool {
        matches!(self, Self::P1 | Self::P3_1 | Self::P3_2)
    }
}

impl std::fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PromptVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::invalid("variant", format!("unknown prompt variant {s:?}")))
    }
}

/// A demonstration requirement with its links and the reasoning behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub requirement_text: String,
    pub codes: BTreeSet<String>,
    pub rationale: String,
}

impl FewShotExample {
    pub fn validate(&self) -> Result<()> {
        if self.requirement_text.trim().is_empty() {
            return Err(Error::invalid("requirement_text", "must not be empty"));
        }
        if self.codes.is_empty() {
            return Err(Error::invalid("codes", "an example needs at least one code"));
        }
        if self.rationale.trim().is_empty() {
            return Err(Error::invalid("rationale", "must not be empty"));
        }
        Ok(())
    }

    /// `Requirement: TEXT. trace links: [A, B], rational behind choosing these codes: TEXT.`
    pub fn render(&self) -> String {
        let codes: Vec<&str> = self.codes.iter().map(String::as_str).collect();
        format!(
            "Requirement: {}. trace links: [{}], rational behind choosing these codes: {}.",
            strip_period(&self.requirement_text),
            codes.join(", "),
            strip_period(&self.rationale)
        )
    }
}

fn strip_period(s: &str) -> &str {
    let s = s.trim();
    s.strip_suffix('.').unwrap_or(s)
}

/// Reads a JSON array of examples.
pub fn load_examples(path: impl AsRef<Path>) -> Result<Vec<FewShotExample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let examples: Vec<FewShotExample> =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    for (i, e) in examples.iter().enumerate() {
        e.validate().map_err(|err| Error::invalid(format!("examples[{i}]"), err.to_string()))?;
    }
    Ok(examples)
}

fn require_text(req: &Requirement) -> Result<()> {
    if req.text.trim().is_empty() {
        return Err(Error::invalid(format!("requirement {}", req.id), "text is empty"));
    }
    Ok(())
}

/// `CODE: title: description`, one line per provision.
pub fn catalog_lines(catalog: &[Provision]) -> String {
    catalog
        .iter()
        .map(|p| format!("{}: {}", p.code, p.text()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Context, examples, instruction and output indicator separated by blank
/// lines, followed by the requirement.
pub fn build_rice_prompt(catalog: &[Provision], examples: &[FewShotExample], requirement: &Requirement) -> Result<String> {
    require_text(requirement)?;
    if examples.len() != FEW_SHOT_COUNT {
        return Err(Error::invalid(
            "examples",
            format!("exactly {FEW_SHOT_COUNT} examples are required, got {}", examples.len()),
        ));
    }
    let known: BTreeSet<&str> = catalog.iter().map(|p| p.code.as_str()).chain([ELSE_CODE]).collect();
    for (i, e) in examples.iter().enumerate() {
        e.validate().map_err(|err| Error::invalid(format!("examples[{i}]"), err.to_string()))?;
        if let Some(c) = e.codes.iter().find(|c| !known.contains(c.as_str())) {
            return Err(Error::Dangling {
                field: format!("examples[{i}].codes"),
                kind: "provision code",
                id: c.clone(),
            });
        }
    }
    let shots: Vec<String> = examples.iter().map(FewShotExample::render).collect();
    Ok(format!(
        "{RICE_CONTEXT}\n{}\n{ELSE_LINE}\n\n{RICE_EXAMPLES}\n{}\n\n{RICE_INSTRUCTION}\n\n{RICE_OUTPUT}\n\nRequirement: {}",
        catalog_lines(catalog),
        shots.join("\n"),
        requirement.text
    ))
}

pub fn build_p1_prompt(requirement: &Requirement, provision: &Provision) -> Result<String> {
    require_text(requirement)?;
    Ok(format!(
        "{P1_HEAD}\n(1) Requirement: '''{}'''\n(2) Regulation: '''{}'''",
        requirement.text,
        provision.text()
    ))
}

pub fn build_p2_prompt(requirement: &Requirement, catalog: &[Provision]) -> Result<String> {
    require_text(requirement)?;
    Ok(format!(
        "{P2_HEAD}\nRequirement: '''{}'''\nList of Regulations: '''{}'''",
        requirement.text,
        catalog_lines(catalog)
    ))
}

pub fn build_p3_prompt(variant: PromptVariant, requirement: &Requirement, provision: &Provision) -> Result<String> {
    require_text(requirement)?;
    let task = match variant {
        PromptVariant::P3_1 => P3_1_TASK,
        PromptVariant::P3_2 => P3_2_TASK,
        other => return Err(Error::invalid("variant", format!("{other} is not a P3 variant"))),
    };
    Ok(format!(
        "{P3_SCENARIO} {task}\nRequirement: '''{}'''\nRegulation: '''{}'''",
        requirement.text,
        provision.text()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(text: &str) -> Requirement {
        Requirement {
            id: "R1".into(),
            text: text.into(),
            doc_id: "D1".into(),
        }
    }

    fn example(code: &str) -> FewShotExample {
        FewShotExample {
            requirement_text: "Users can export their data.".into(),
            codes: BTreeSet::from([code.to_owned()]),
            rationale: "Export serves the access right.".into(),
        }
    }

    #[test]
    fn example_line_shape() {
        assert_eq!(
            example("ACC").render(),
            "Requirement: Users can export their data. trace links: [ACC], rational behind choosing these codes: Export serves the access right."
        );
    }

    #[test]
    fn rice_preconditions() {
        let catalog = vec![Provision::new("ACC", "Right to access", "Access to own data.")];
        let four = vec![example("ACC"); 4];
        assert!(build_rice_prompt(&catalog, &four, &req("x")).is_err());
        let bad = vec![example("ACC"), example("ACC"), example("ACC"), example("ACC"), example("ZZZ")];
        assert!(matches!(build_rice_prompt(&catalog, &bad, &req("x")), Err(Error::Dangling { .. })));
        let five = vec![example("ACC"); 5];
        let p = build_rice_prompt(&catalog, &five, &req("Keep {braces}.")).unwrap();
        assert!(p.ends_with("Requirement: Keep {braces}."));
        assert!(p.contains("ACC: Right to access: Access to own data.\nELSE: "));
    }

    #[test]
    fn pairwise_builders() {
        let p = Provision::new("SEC", "Ensuring security", "Protect data.");
        let p1 = build_p1_prompt(&req("Encrypt."), &p).unwrap();
        assert!(p1.ends_with("(2) Regulation: '''Ensuring security: Protect data.'''"));
        assert!(build_p1_prompt(&req("  "), &p).is_err());
        assert!(build_p3_prompt(PromptVariant::P2, &req("x"), &p).is_err());
        assert_eq!(
            build_p3_prompt(PromptVariant::P3_2, &req("x"), &p).unwrap(),
            build_p3_prompt(PromptVariant::P3_2, &req("x"), &p).unwrap()
        );
    }

    #[test]
    fn variant_names_round_trip() {
        for v in PromptVariant::ALL {
            assert_eq!(v.as_str().parse::<PromptVariant>().unwrap(), v);
        }
    }
}
