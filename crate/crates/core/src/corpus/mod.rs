//! Requirements documents, provision catalogs and ground-truth trace links.
//!
//! A corpus is stored as one UTF-8 JSON file (see `docs/corpus-format.md`).
//! Loading NFC-normalizes every string and enforces all structural and
//! referential invariants, so a [`Corpus`] value is always valid.

mod stopwords;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use text::{
    normalize, preprocess, split_sentences, stem, tokenize, PreprocessConfig, SentenceSplitter,
};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// Reserved code meaning "no trace link" in LLM output.
pub const ELSE_CODE: &str = "ELSE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provision {
    pub code: String,
    pub title: String,
    pub description: String,
}

impl Provision {
    pub fn new(code: &str, title: &str, description: &str) -> Self {
        Self {
            code: code.to_owned(),
            title: title.to_owned(),
            description: description.to_owned(),
        }
    }

    /// Text used to embed or score the provision: `title: description`.
    pub fn text(&self) -> String {
        format!("{}: {}", self.title, self.description)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub id: String,
    pub text: String,
    pub doc_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub name: String,
    pub requirements: Vec<Requirement>,
}

/// Ground-truth (or predicted) links: requirement id to provision codes.
/// Requirements without an entry have no links.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraceLinkSet {
    links: BTreeMap<String, BTreeSet<String>>,
}

impl TraceLinkSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, req_id: &str, code: &str) -> bool {
        self.links
            .entry(req_id.to_owned())
            .or_default()
            .insert(code.to_owned())
    }

    pub fn links_for(&self, req_id: &str) -> BTreeSet<String> {
        self.links.get(req_id).cloned().unwrap_or_default()
    }

    pub fn contains(&self, req_id: &str, code: &str) -> bool {
        self.links.get(req_id).is_some_and(|codes| codes.contains(code))
    }

    /// Total number of (requirement, code) links.
    pub fn len(&self) -> usize {
        self.links.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.links
            .iter()
            .flat_map(|(r, codes)| codes.iter().map(move |c| (r.as_str(), c.as_str())))
    }

    /// Keeps only links whose requirement is in `req_ids`.
    pub fn restrict<'a>(&self, req_ids: impl IntoIterator<Item = &'a str>) -> Self {
        let keep: BTreeSet<&str> = req_ids.into_iter().collect();
        Self {
            links: self
                .links
                .iter()
                .filter(|(r, codes)| keep.contains(r.as_str()) && !codes.is_empty())
                .map(|(r, codes)| (r.clone(), codes.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(String, String)> for TraceLinkSet {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut set = Self::new();
        for (r, c) in iter {
            set.insert(&r, &c);
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub req_id: String,
    pub prov_code: String,
    /// 1 when the pair is a ground-truth link, 0 otherwise.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    catalog: Vec<Provision>,
    ground_truth: TraceLinkSet,
    req_index: HashMap<String, (usize, usize)>,
}

// On-disk layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    format_version: u32,
    documents: Vec<DocumentFile>,
    provisions: Vec<Provision>,
    #[serde(default)]
    links: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentFile {
    id: String,
    #[serde(default)]
    name: String,
    requirements: Vec<RequirementFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequirementFile {
    id: String,
    text: String,
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn is_code(code: &str) -> bool {
    !code.is_empty()
        && code
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

impl Corpus {
    /// Builds a corpus and checks every invariant: unique document,
    /// requirement and provision identifiers, non-empty texts, a non-empty
    /// catalog and ground truth that only references known ids.
    pub fn new(
        documents: Vec<Document>,
        catalog: Vec<Provision>,
        ground_truth: TraceLinkSet,
    ) -> Result<Self> {
        let mut doc_ids = BTreeSet::new();
        let mut req_index = HashMap::new();
        for (di, doc) in documents.iter().enumerate() {
            let field = format!("documents[{di}]");
            if doc.id.trim().is_empty() {
                return Err(Error::invalid(format!("{field}.id"), "must be non-empty"));
            }
            if !doc_ids.insert(doc.id.as_str()) {
                return Err(Error::invalid(
                    format!("{field}.id"),
                    format!("duplicate document id `{}`", doc.id),
                ));
            }
            for (ri, req) in doc.requirements.iter().enumerate() {
                let field = format!("{field}.requirements[{ri}]");
                if req.id.trim().is_empty() {
                    return Err(Error::invalid(format!("{field}.id"), "must be non-empty"));
                }
                if req.text.trim().is_empty() {
                    return Err(Error::invalid(format!("{field}.text"), "must be non-empty"));
                }
                if req.doc_id != doc.id {
                    return Err(Error::invalid(
                        format!("{field}.doc_id"),
                        format!("`{}` does not match enclosing document `{}`", req.doc_id, doc.id),
                    ));
                }
                if req_index.insert(req.id.clone(), (di, ri)).is_some() {
                    return Err(Error::invalid(
                        format!("{field}.id"),
                        format!("duplicate requirement id `{}`", req.id),
                    ));
                }
            }
        }

        if catalog.is_empty() {
            return Err(Error::invalid("provisions", "catalog must be non-empty"));
        }
        let mut codes = BTreeSet::new();
        for (pi, p) in catalog.iter().enumerate() {
            let field = format!("provisions[{pi}]");
            if !is_code(&p.code) {
                return Err(Error::invalid(
                    format!("{field}.code"),
                    format!("`{}` is not an uppercase identifier", p.code),
                ));
            }
            if p.code == ELSE_CODE {
                return Err(Error::invalid(
                    format!("{field}.code"),
                    "ELSE is reserved for the no-link sentinel",
                ));
            }
            if !codes.insert(p.code.as_str()) {
                return Err(Error::invalid(
                    format!("{field}.code"),
                    format!("duplicate provision code `{}`", p.code),
                ));
            }
            if p.description.trim().is_empty() {
                return Err(Error::invalid(format!("{field}.description"), "must be non-empty"));
            }
        }

        for (req_id, code) in ground_truth.iter() {
            if !req_index.contains_key(req_id) {
                return Err(Error::Dangling {
                    field: "links".into(),
                    kind: "requirement",
                    id: req_id.to_owned(),
                });
            }
            if !codes.contains(code) {
                return Err(Error::Dangling {
                    field: format!("links.{req_id}"),
                    kind: "provision code",
                    id: code.to_owned(),
                });
            }
        }

        Ok(Self {
            documents,
            catalog,
            ground_truth,
            req_index,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::parse(json, "corpus")
    }

    fn parse(json: &str, context: &str) -> Result<Self> {
        let file: CorpusFile = serde_json::from_str(json).map_err(|e| Error::json(context, e))?;
        if file.format_version != CORPUS_FORMAT_VERSION {
            return Err(Error::invalid(
                "format_version",
                format!("unsupported version {}, expected {CORPUS_FORMAT_VERSION}", file.format_version),
            ));
        }
        let documents = file
            .documents
            .into_iter()
            .map(|d| {
                let doc_id = nfc(&d.id);
                Document {
                    requirements: d
                        .requirements
                        .into_iter()
                        .map(|r| Requirement {
                            id: nfc(&r.id),
                            text: nfc(&r.text),
                            doc_id: doc_id.clone(),
                        })
                        .collect(),
                    id: doc_id,
                    name: nfc(&d.name),
                }
            })
            .collect();
        let catalog = file
            .provisions
            .into_iter()
            .map(|p| Provision {
                code: nfc(&p.code),
                title: nfc(&p.title),
                description: nfc(&p.description),
            })
            .collect();
        let mut ground_truth = TraceLinkSet::new();
        for (req_id, codes) in file.links {
            let req_id = nfc(&req_id);
            for (i, code) in codes.iter().enumerate() {
                if !ground_truth.insert(&req_id, &nfc(code)) {
                    return Err(Error::invalid(
                        format!("links.{req_id}[{i}]"),
                        format!("duplicate code `{code}`"),
                    ));
                }
            }
        }
        Self::new(documents, catalog, ground_truth)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&json, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let file = CorpusFile {
            format_version: CORPUS_FORMAT_VERSION,
            documents: self
                .documents
                .iter()
                .map(|d| DocumentFile {
                    id: d.id.clone(),
                    name: d.name.clone(),
                    requirements: d
                        .requirements
                        .iter()
                        .map(|r| RequirementFile {
                            id: r.id.clone(),
                            text: r.text.clone(),
                        })
                        .collect(),
                })
                .collect(),
            provisions: self.catalog.clone(),
            links: self
                .ground_truth
                .links
                .iter()
                .filter(|(_, codes)| !codes.is_empty())
                .map(|(r, codes)| (r.clone(), codes.iter().cloned().collect()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("corpus serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn catalog(&self) -> &[Provision] {
        &self.catalog
    }

    pub fn ground_truth(&self) -> &TraceLinkSet {
        &self.ground_truth
    }

    pub fn provision_codes(&self) -> Vec<String> {
        self.catalog.iter().map(|p| p.code.clone()).collect()
    }

    pub fn provision(&self, code: &str) -> Option<&Provision> {
        self.catalog.iter().find(|p| p.code == code)
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn requirement(&self, id: &str) -> Option<&Requirement> {
        self.req_index
            .get(id)
            .map(|&(d, r)| &self.documents[d].requirements[r])
    }

    /// All requirements in document order.
    pub fn requirements(&self) -> impl Iterator<Item = &Requirement> {
        self.documents.iter().flat_map(|d| d.requirements.iter())
    }

    pub fn num_requirements(&self) -> usize {
        self.req_index.len()
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    /// Requirements of the given documents, in corpus order.
    pub fn requirements_in(&self, doc_ids: &BTreeSet<String>) -> Vec<&Requirement> {
        self.documents
            .iter()
            .filter(|d| doc_ids.contains(&d.id))
            .flat_map(|d| d.requirements.iter())
            .collect()
    }

    pub fn check_doc_ids<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> Result<()> {
        for id in ids {
            if self.document(id).is_none() {
                return Err(Error::UnknownId {
                    kind: "document",
                    id: id.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Every (requirement, provision) pair of the documents not held out,
/// labeled 1 when the pair is a ground-truth link.
pub fn build_training_pairs(
    corpus: &Corpus,
    heldout_doc_ids: &BTreeSet<String>,
) -> Result<Vec<TrainingPair>> {
    corpus.check_doc_ids(heldout_doc_ids)?;
    let mut pairs = Vec::new();
    for doc in corpus.documents() {
        if heldout_doc_ids.contains(&doc.id) {
            continue;
        }
        for req in &doc.requirements {
            for p in corpus.catalog() {
                pairs.push(TrainingPair {
                    req_id: req.id.clone(),
                    prov_code: p.code.clone(),
                    label: u8::from(corpus.ground_truth().contains(&req.id, &p.code)),
                });
            }
        }
    }
    Ok(pairs)
}

/// One sentence of a multi-sentence requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceUnit {
    /// `<requirement id>#<sentence index>`
    pub unit_id: String,
    pub parent_id: String,
    pub text: String,
}

/// Splits each requirement into sentences. A requirement with no detectable
/// boundary yields one unit holding its whole text.
pub fn sentence_units<'a>(reqs: impl IntoIterator<Item = &'a Requirement>) -> Vec<SentenceUnit> {
    let splitter = SentenceSplitter::default();
    let mut units = Vec::new();
    for req in reqs {
        let sentences = splitter.split(&req.text);
        for (i, s) in sentences.iter().enumerate() {
            units.push(SentenceUnit {
                unit_id: format!("{}#{i}", req.id),
                parent_id: req.id.clone(),
                text: (*s).to_owned(),
            });
        }
    }
    units
}
