use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annotation code attached to a paragraph by one reviewer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Within the scope of the privilege.
    D1,
    /// Decided non-exempt.
    D0,
    /// Trivially non-exempt: headers, signature blocks.
    T0,
    /// Non-exempt because the whole document is categorically excludable.
    E0,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::D1, Label::D0, Label::T0, Label::E0];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::D1 => "D1",
            Label::D0 => "D0",
            Label::T0 => "T0",
            Label::E0 => "E0",
        }
    }

    /// The marker line written before a paragraph in the annotated format.
    pub fn marker(self) -> &'static str {
        match self {
            Label::D1 => "D1//",
            Label::D0 => "D0//",
            Label::T0 => "T0//",
            Label::E0 => "E0//",
        }
    }

    /// Recognizes a trimmed marker line. The bare `0//` form is read as D0.
    pub fn from_marker(token: &str) -> Option<Label> {
        match token {
            "D1//" => Some(Label::D1),
            "D0//" | "0//" => Some(Label::D0),
            "T0//" => Some(Label::T0),
            "E0//" => Some(Label::E0),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D1" => Ok(Label::D1),
            "D0" => Ok(Label::D0),
            "T0" => Ok(Label::T0),
            "E0" => Ok(Label::E0),
            other => Err(Error::InvalidLabel(format!("unknown label code {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Custodian {
    Kagan,
    Rice,
}

impl FromStr for Custodian {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Kagan" | "Elena Kagan" => Ok(Custodian::Kagan),
            "Rice" | "Cynthia Rice" => Ok(Custodian::Rice),
            other => Err(Error::Config(format!("unknown custodian {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Batch {
    K1,
    K2,
    K3,
    R4,
    K5,
    E5,
}

impl Batch {
    pub const ALL: [Batch; 6] = [Batch::K1, Batch::K2, Batch::K3, Batch::R4, Batch::K5, Batch::E5];

    pub fn custodian(self) -> Custodian {
        match self {
            Batch::R4 => Custodian::Rice,
            _ => Custodian::Kagan,
        }
    }

    /// Paragraph count of each batch in the published collection.
    pub fn published_paragraphs(self) -> usize {
        match self {
            Batch::K1 => 523,
            Batch::K2 => 447,
            Batch::K3 => 670,
            Batch::R4 => 466,
            Batch::K5 => 631,
            Batch::E5 => 286,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Batch::K1 => "K1",
            Batch::K2 => "K2",
            Batch::K3 => "K3",
            Batch::R4 => "R4",
            Batch::K5 => "K5",
            Batch::E5 => "E5",
        }
    }
}

impl fmt::Display for Batch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Batch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Batch::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown batch {s:?}")))
    }
}

/// Reviewer whose annotations a label carries. `AB` is the consensus set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reviewer {
    A,
    B,
    AB,
}

impl Reviewer {
    pub fn as_str(self) -> &'static str {
        match self {
            Reviewer::A => "A",
            Reviewer::B => "B",
            Reviewer::AB => "AB",
        }
    }
}

impl fmt::Display for Reviewer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reviewer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Reviewer::A),
            "B" | "b" => Ok(Reviewer::B),
            "AB" | "ab" => Ok(Reviewer::AB),
            other => Err(Error::Config(format!("unknown reviewer {other:?}"))),
        }
    }
}

/// The sixteen document topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    Drugs,
    Health,
    TaxProposals,
    Welfare,
    ChildSupport,
    Service,
    MiscellaneousEmails,
    Disability,
    Education,
    Budget,
    Kids,
    Environment,
    SocialSecurity,
    Fathers,
    Family,
    Superfund,
}

impl Topic {
    pub const ALL: [Topic; 16] = [
        Topic::Drugs,
        Topic::Health,
        Topic::TaxProposals,
        Topic::Welfare,
        Topic::ChildSupport,
        Topic::Service,
        Topic::MiscellaneousEmails,
        Topic::Disability,
        Topic::Education,
        Topic::Budget,
        Topic::Kids,
        Topic::Environment,
        Topic::SocialSecurity,
        Topic::Fathers,
        Topic::Family,
        Topic::Superfund,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Topic::Drugs => "Drugs",
            Topic::Health => "Health",
            Topic::TaxProposals => "Tax Proposals",
            Topic::Welfare => "Welfare",
            Topic::ChildSupport => "Child Support",
            Topic::Service => "Service",
            Topic::MiscellaneousEmails => "Miscellaneous Emails",
            Topic::Disability => "Disability",
            Topic::Education => "Education",
            Topic::Budget => "Budget",
            Topic::Kids => "Kids",
            Topic::Environment => "Environment",
            Topic::SocialSecurity => "Social Security",
            Topic::Fathers => "Fathers",
            Topic::Family => "Family",
            Topic::Superfund => "Superfund",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        Topic::ALL
            .into_iter()
            .find(|t| {
                let name: String = t.name().chars().filter(|c| c.is_alphanumeric()).collect();
                name.to_lowercase() == key
            })
            .ok_or_else(|| Error::Config(format!("unknown topic {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    /// `<batch>/<file_name>/<doc-ordinal>/<para-ordinal>`
    pub id: String,
    pub text: String,
    pub ordinal: usize,
    pub labels: BTreeMap<Reviewer, Label>,
}

impl Paragraph {
    pub fn label(&self, reviewer: Reviewer) -> Option<Label> {
        self.labels.get(&reviewer).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// `<batch>/<file_name>/<doc-ordinal>`
    pub id: String,
    pub batch: Batch,
    pub custodian: Custodian,
    pub file_name: String,
    pub topic: Topic,
    pub paragraphs: Vec<Paragraph>,
}

impl Document {
    pub fn make_id(batch: Batch, file_name: &str, doc_ordinal: usize) -> String {
        format!("{batch}/{file_name}/{doc_ordinal}")
    }

    pub fn reviewers(&self) -> BTreeSet<Reviewer> {
        self.paragraphs
            .iter()
            .flat_map(|p| p.labels.keys().copied())
            .collect()
    }
}

/// Which codes form the negative class. D1 is always the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelScope {
    /// D1 vs D0
    D0,
    /// D1 vs {D0, T0}
    D0T0,
    /// D1 vs {D0, T0, E0}
    D0T0E0,
}

impl LabelScope {
    pub fn negatives(self) -> &'static [Label] {
        match self {
            LabelScope::D0 => &[Label::D0],
            LabelScope::D0T0 => &[Label::D0, Label::T0],
            LabelScope::D0T0E0 => &[Label::D0, Label::T0, Label::E0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelScope::D0 => "d0",
            LabelScope::D0T0 => "d0t0",
            LabelScope::D0T0E0 => "d0t0e0",
        }
    }

    pub fn caption(self) -> &'static str {
        match self {
            LabelScope::D0 => "D1 vs D0",
            LabelScope::D0T0 => "D1 vs {D0, T0}",
            LabelScope::D0T0E0 => "D1 vs {D0, T0, E0}",
        }
    }
}

impl FromStr for LabelScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d0" => Ok(LabelScope::D0),
            "d0t0" => Ok(LabelScope::D0T0),
            "d0t0e0" => Ok(LabelScope::D0T0E0),
            other => Err(Error::Config(format!("unknown scope {other:?}"))),
        }
    }
}

/// Maps a label to the binary class under `scope`; `None` means the
/// paragraph is excluded from the dataset.
pub fn binarize(label: Label, scope: LabelScope) -> Option<bool> {
    if label == Label::D1 {
        Some(true)
    } else if scope.negatives().contains(&label) {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_examples() {
        for scope in [LabelScope::D0, LabelScope::D0T0, LabelScope::D0T0E0] {
            assert_eq!(binarize(Label::D1, scope), Some(true));
        }
        assert_eq!(binarize(Label::T0, LabelScope::D0T0), Some(false));
        assert_eq!(binarize(Label::E0, LabelScope::D0T0), None);
        assert_eq!(binarize(Label::T0, LabelScope::D0), None);
        assert_eq!(binarize(Label::E0, LabelScope::D0T0E0), Some(false));
    }

    #[test]
    fn bare_zero_marker_is_d0() {
        assert_eq!(Label::from_marker("0//"), Some(Label::D0));
        assert_eq!(Label::from_marker("D0//"), Some(Label::D0));
        assert_eq!(Label::from_marker("X1//"), None);
    }

    #[test]
    fn batch_custodians() {
        assert_eq!(Batch::R4.custodian(), Custodian::Rice);
        for b in [Batch::K1, Batch::K2, Batch::K3, Batch::K5, Batch::E5] {
            assert_eq!(b.custodian(), Custodian::Kagan);
        }
        let total: usize = Batch::ALL.iter().map(|b| b.published_paragraphs()).sum();
        assert_eq!(total, 3023);
    }

    #[test]
    fn topics_parse_loosely() {
        assert_eq!("Tax Proposals".parse::<Topic>().unwrap(), Topic::TaxProposals);
        assert_eq!("miscellaneous_emails".parse::<Topic>().unwrap(), Topic::MiscellaneousEmails);
        assert!("Sports".parse::<Topic>().is_err());
        assert_eq!(Topic::ALL.len(), 16);
    }
}
