//! Syntactic test suites: items in several conditions, segmented into aligned
//! regions, with inequality criteria over region measures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// 1-based position within the sentence; derived from document order.
    #[serde(skip)]
    pub index: usize,
    pub label: String,
    /// Space-separated words. Empty for gap regions.
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub critical: bool,
}

impl Region {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.text.split_whitespace()
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn is_empty(&self) -> bool {
        self.word_count() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionedSentence {
    pub regions: Vec<Region>,
}

impl RegionedSentence {
    pub fn words(&self) -> Vec<&str> {
        self.regions.iter().flat_map(|r| r.words()).collect()
    }

    pub fn word_count(&self) -> usize {
        self.regions.iter().map(Region::word_count).sum()
    }

    pub fn text(&self) -> String {
        self.words().join(" ")
    }

    pub fn region(&self, label: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.label == label)
    }

    /// Word-index range (0-based, half-open) covered by the region `label`.
    pub fn span(&self, label: &str) -> Option<Range<usize>> {
        let mut start = 0;
        for r in &self.regions {
            let n = r.word_count();
            if r.label == label {
                return Some(start..start + n);
            }
            start += n;
        }
        None
    }

    /// Region label for every word position.
    pub fn word_regions(&self) -> Vec<&str> {
        self.regions
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.label.as_str(), r.word_count()))
            .collect()
    }

    /// Word-aligned critical flags.
    pub fn word_critical(&self) -> Vec<bool> {
        self.regions
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.critical, r.word_count()))
            .collect()
    }

    fn labels(&self) -> Vec<&str> {
        self.regions.iter().map(|r| r.label.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: u32,
    pub sentences: BTreeMap<String, RegionedSentence>,
}

impl Item {
    pub fn sentence(&self, condition: &str) -> Result<&RegionedSentence> {
        self.sentences.get(condition).ok_or_else(|| {
            Error::UnknownReference(format!(
                "item {} has no condition {condition:?}",
                self.item_id
            ))
        })
    }
}

/// The words of `region` in `condition` of `item`, in order. Gap regions yield
/// an empty list.
pub fn region_words<'a>(item: &'a Item, condition: &str, region: &str) -> Result<Vec<&'a str>> {
    let sentence = item.sentence(condition)?;
    let r = sentence.region(region).ok_or_else(|| {
        Error::UnknownReference(format!(
            "item {} condition {condition:?} has no region {region:?}",
            item.item_id
        ))
    })?;
    Ok(r.words().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i64::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedTerm {
    pub sign: Sign,
    pub condition: String,
    pub region: String,
}

impl SignedTerm {
    pub fn new(sign: Sign, condition: &str, region: &str) -> Self {
        SignedTerm {
            sign,
            condition: condition.to_string(),
            region: region.to_string(),
        }
    }
}

/// `Σ lhs < Σ rhs`, strictly. Ties do not satisfy a criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub lhs: Vec<SignedTerm>,
    pub rhs: Vec<SignedTerm>,
}

impl Criterion {
    /// Two-way contrast: `good(region) < bad(region)`.
    pub fn contrast(name: &str, good: &str, bad: &str, region: &str) -> Self {
        Criterion {
            name: name.to_string(),
            lhs: vec![SignedTerm::new(Sign::Plus, good, region)],
            rhs: vec![SignedTerm::new(Sign::Plus, bad, region)],
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &SignedTerm> {
        self.lhs.iter().chain(self.rhs.iter())
    }

    /// A single positive term on each side.
    pub fn is_contrast(&self) -> bool {
        matches!((&self.lhs[..], &self.rhs[..]), ([l], [r]) if l.sign == Sign::Plus && r.sign == Sign::Plus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub name: String,
    pub tag: String,
    #[serde(default)]
    pub meta: String,
    pub conditions: Vec<String>,
    /// Conditions treated as ungrammatical in residual breakdowns. When absent,
    /// derived from the right-hand sides of two-way contrasts.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ungrammatical: Vec<String>,
    pub predictions: Vec<Criterion>,
    pub items: Vec<Item>,
}

impl TestSuite {
    pub fn from_json(source: &str) -> Result<Self> {
        load_suite(source)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        load_suite(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    pub fn item(&self, item_id: u32) -> Result<&Item> {
        self.items
            .iter()
            .find(|i| i.item_id == item_id)
            .ok_or_else(|| Error::UnknownReference(format!("{}: no item {item_id}", self.tag)))
    }

    pub fn prediction(&self, name: &str) -> Result<&Criterion> {
        self.predictions
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownReference(format!("{}: no prediction {name:?}", self.tag)))
    }

    /// Set of ungrammatical conditions, explicit or derived from contrasts.
    pub fn ungrammatical_conditions(&self) -> BTreeSet<&str> {
        if !self.ungrammatical.is_empty() {
            return self.ungrammatical.iter().map(String::as_str).collect();
        }
        self.predictions
            .iter()
            .filter(|c| c.is_contrast())
            .map(|c| c.rhs[0].condition.as_str())
            .collect()
    }

    pub fn is_grammatical(&self, condition: &str) -> bool {
        !self.ungrammatical_conditions().contains(condition)
    }

    fn assign_indices(&mut self) {
        for item in &mut self.items {
            for sentence in item.sentences.values_mut() {
                for (i, r) in sentence.regions.iter_mut().enumerate() {
                    r.index = i + 1;
                }
            }
        }
    }
}

/// Parses and validates a suite document.
pub fn load_suite(source: &str) -> Result<TestSuite> {
    let mut suite: TestSuite = serde_json::from_str(source)?;
    suite.assign_indices();
    let violations = validate_suite(&suite);
    if let Some(v) = violations.first() {
        let msg = if violations.len() > 1 {
            format!("{v} (and {} more)", violations.len() - 1)
        } else {
            v.to_string()
        };
        return Err(match v.rule {
            Rule::MissingCondition | Rule::ExtraCondition => Error::ConditionMismatch(msg),
            Rule::UnknownCondition | Rule::UnknownRegion => Error::UnknownReference(msg),
            _ => Error::InvalidSuite(msg),
        });
    }
    Ok(suite)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    NoItems,
    TooFewConditions,
    DuplicateCondition,
    NoPredictions,
    DuplicateItemId,
    MissingCondition,
    ExtraCondition,
    RegionMismatch,
    NoCriticalRegion,
    UnattestedEmptyRegion,
    UnnormalizedText,
    EmptyCriterionSide,
    UnknownCondition,
    UnknownRegion,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::NoItems => "no_items",
            Rule::TooFewConditions => "too_few_conditions",
            Rule::DuplicateCondition => "duplicate_condition",
            Rule::NoPredictions => "no_predictions",
            Rule::DuplicateItemId => "duplicate_item_id",
            Rule::MissingCondition => "missing_condition",
            Rule::ExtraCondition => "extra_condition",
            Rule::RegionMismatch => "region_mismatch",
            Rule::NoCriticalRegion => "no_critical_region",
            Rule::UnattestedEmptyRegion => "unattested_empty_region",
            Rule::UnnormalizedText => "unnormalized_text",
            Rule::EmptyCriterionSide => "empty_criterion_side",
            Rule::UnknownCondition => "unknown_condition",
            Rule::UnknownRegion => "unknown_region",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub item: Option<u32>,
    pub condition: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.as_str())?;
        if let Some(item) = self.item {
            write!(f, " item={item}")?;
        }
        if let Some(c) = &self.condition {
            write!(f, " condition={c}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks every structural invariant, returning one report per violation in a
/// deterministic order (suite-level, then items in document order, then
/// criteria). An empty list means the suite is valid.
pub fn validate_suite(suite: &TestSuite) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |item: Option<u32>, condition: Option<&str>, rule: Rule, detail: String| {
        out.push(Violation {
            item,
            condition: condition.map(str::to_string),
            rule,
            detail,
        })
    };

    if suite.items.is_empty() {
        push(None, None, Rule::NoItems, "suite has no items".into());
    }
    if suite.conditions.len() < 2 {
        push(
            None,
            None,
            Rule::TooFewConditions,
            format!("{} condition(s) declared, need at least 2", suite.conditions.len()),
        );
    }
    let mut declared = BTreeSet::new();
    for c in &suite.conditions {
        if !declared.insert(c.as_str()) {
            push(None, Some(c), Rule::DuplicateCondition, "declared twice".into());
        }
    }
    if suite.predictions.is_empty() {
        push(None, None, Rule::NoPredictions, "suite has no predictions".into());
    }
    for c in &suite.ungrammatical {
        if !declared.contains(c.as_str()) {
            push(
                None,
                Some(c),
                Rule::UnknownCondition,
                "ungrammatical list names an undeclared condition".into(),
            );
        }
    }

    let mut seen_ids = BTreeSet::new();
    for item in &suite.items {
        let id = Some(item.item_id);
        if !seen_ids.insert(item.item_id) {
            push(id, None, Rule::DuplicateItemId, "item id repeated".into());
        }
        for c in &suite.conditions {
            if !item.sentences.contains_key(c) {
                push(id, Some(c), Rule::MissingCondition, "no sentence for declared condition".into());
            }
        }
        for c in item.sentences.keys() {
            if !declared.contains(c.as_str()) {
                push(id, Some(c), Rule::ExtraCondition, "sentence for undeclared condition".into());
            }
        }

        // Region structure must align positionally across conditions.
        let mut reference: Option<(&str, Vec<&str>)> = None;
        for c in &suite.conditions {
            let Some(sentence) = item.sentences.get(c) else { continue };
            let labels = sentence.labels();
            match &reference {
                None => reference = Some((c, labels)),
                Some((ref_cond, ref_labels)) => {
                    if *ref_labels != labels {
                        push(
                            id,
                            Some(c),
                            Rule::RegionMismatch,
                            format!(
                                "{} regions {:?} differ from {} regions {:?} in {ref_cond}",
                                labels.len(),
                                labels,
                                ref_labels.len(),
                                ref_labels
                            ),
                        );
                    }
                }
            }
            if !sentence.regions.iter().any(|r| r.critical) {
                push(id, Some(c), Rule::NoCriticalRegion, "no region marked critical".into());
            }
            for r in &sentence.regions {
                let normalized = r.words().collect::<Vec<_>>().join(" ");
                if normalized != r.text {
                    push(
                        id,
                        Some(c),
                        Rule::UnnormalizedText,
                        format!("region {:?} text must be single-space separated", r.label),
                    );
                }
            }
        }
        // An empty region must be realized in at least one other condition.
        if let Some((_, labels)) = &reference {
            for label in labels {
                let realized = item
                    .sentences
                    .values()
                    .any(|s| s.region(label).is_some_and(|r| !r.is_empty()));
                if !realized {
                    push(
                        id,
                        None,
                        Rule::UnattestedEmptyRegion,
                        format!("region {label:?} is empty in every condition"),
                    );
                }
            }
        }
    }

    for crit in &suite.predictions {
        if crit.lhs.is_empty() || crit.rhs.is_empty() {
            push(
                None,
                None,
                Rule::EmptyCriterionSide,
                format!("criterion {:?} has an empty side", crit.name),
            );
        }
        for term in crit.terms() {
            if !declared.contains(term.condition.as_str()) {
                push(
                    None,
                    Some(&term.condition),
                    Rule::UnknownCondition,
                    format!("criterion {:?} references undeclared condition", crit.name),
                );
                continue;
            }
            for item in &suite.items {
                if let Some(s) = item.sentences.get(&term.condition) {
                    if s.region(&term.region).is_none() {
                        push(
                            Some(item.item_id),
                            Some(&term.condition),
                            Rule::UnknownRegion,
                            format!("criterion {:?} references missing region {:?}", crit.name, term.region),
                        );
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn region(label: &str, text: &str, critical: bool) -> Region {
        Region {
            index: 0,
            label: label.into(),
            text: text.into(),
            critical,
        }
    }

    /// One item, two conditions, one contrast on region "verb".
    pub fn minimal() -> TestSuite {
        let sentence = |verb: &str| RegionedSentence {
            regions: vec![
                region("subject", "The lawyers", false),
                region("verb", verb, true),
                region("end", "organized", false),
            ],
        };
        let mut suite = TestSuite {
            name: "minimal".into(),
            tag: "MIN".into(),
            meta: String::new(),
            conditions: vec!["good".into(), "bad".into()],
            ungrammatical: vec![],
            predictions: vec![Criterion::contrast("agreement", "good", "bad", "verb")],
            items: vec![Item {
                item_id: 1,
                sentences: [("good".to_string(), sentence("are")), ("bad".to_string(), sentence("is"))]
                    .into_iter()
                    .collect(),
            }],
        };
        suite.assign_indices();
        suite
    }
}
