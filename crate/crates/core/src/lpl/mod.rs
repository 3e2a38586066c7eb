//! Layered privacy policy domain types and their orderings.
//!
//! A policy is a set of purposes plus two edge relations over them:
//! `composition` (has-a, the underlying-purpose relation) and `hierarchy`
//! (is-a, single inheritance). Retention elements and privacy models carry
//! partial orders used by the composition constraints.

mod json;

pub use json::{parse_policy, policy_to_value, serialize_policy, EdgeKind, PolicyParseError};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// One personal-data item, qualified as `Entity.field`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataElement {
    pub entity: String,
    pub field: String,
}

impl DataElement {
    pub fn new(entity: impl Into<String>, field: impl Into<String>) -> Self {
        DataElement { entity: entity.into(), field: field.into() }
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.entity, self.field)
    }

    /// Splits a `Entity.field` qualified name. Both parts must be non-empty.
    pub fn parse(qualified: &str) -> Option<Self> {
        let (entity, field) = qualified.split_once('.')?;
        if entity.is_empty() || field.is_empty() || field.contains('.') {
            return None;
        }
        Some(DataElement::new(entity, field))
    }
}

impl fmt::Display for DataElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.entity, self.field)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecipientKind {
    Controller,
    Processor,
    ThirdParty,
}

impl RecipientKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecipientKind::Controller => "controller",
            RecipientKind::Processor => "processor",
            RecipientKind::ThirdParty => "thirdParty",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "controller" => Some(RecipientKind::Controller),
            "processor" => Some(RecipientKind::Processor),
            "thirdParty" => Some(RecipientKind::ThirdParty),
            _ => None,
        }
    }
}

/// A party authorized to access the data of a purpose.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataRecipient {
    pub name: String,
    pub kind: RecipientKind,
}

impl DataRecipient {
    pub fn new(name: impl Into<String>, kind: RecipientKind) -> Self {
        DataRecipient { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RetentionType {
    FixedDate,
    AfterPurpose,
    Indefinite,
}

impl RetentionType {
    pub fn as_str(&self) -> &'static str {
        match self {
            RetentionType::Indefinite => "indefinite",
            RetentionType::AfterPurpose => "afterPurpose",
            RetentionType::FixedDate => "fixedDate",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "indefinite" => Some(RetentionType::Indefinite),
            "afterPurpose" => Some(RetentionType::AfterPurpose),
            "fixedDate" => Some(RetentionType::FixedDate),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            RetentionType::FixedDate => 0,
            RetentionType::AfterPurpose => 1,
            RetentionType::Indefinite => 2,
        }
    }
}

/// How long data is kept under a purpose.
///
/// Strictness order across types: `Indefinite > AfterPurpose > FixedDate`.
/// Within a type, a later date retains longer and therefore compares
/// greater; an `AfterPurpose` capped by a date is stricter than an
/// uncapped one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Retention {
    rtype: RetentionType,
    point_in_time: Option<NaiveDate>,
}

/// A `Retention` whose `point_in_time` presence does not match its type.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("retention of type {rtype} {problem}")]
pub struct InvalidRetention {
    pub rtype: String,
    pub problem: &'static str,
}

impl Retention {
    pub fn indefinite() -> Self {
        Retention { rtype: RetentionType::Indefinite, point_in_time: None }
    }

    pub fn after_purpose(cap: Option<NaiveDate>) -> Self {
        Retention { rtype: RetentionType::AfterPurpose, point_in_time: cap }
    }

    pub fn fixed_date(date: NaiveDate) -> Self {
        Retention { rtype: RetentionType::FixedDate, point_in_time: Some(date) }
    }

    pub fn new(
        rtype: RetentionType,
        point_in_time: Option<NaiveDate>,
    ) -> Result<Self, InvalidRetention> {
        match (rtype, point_in_time.is_some()) {
            (RetentionType::FixedDate, false) => Err(InvalidRetention {
                rtype: rtype.as_str().to_string(),
                problem: "requires pointInTime",
            }),
            (RetentionType::Indefinite, true) => Err(InvalidRetention {
                rtype: rtype.as_str().to_string(),
                problem: "must not carry pointInTime",
            }),
            _ => Ok(Retention { rtype, point_in_time }),
        }
    }

    pub fn rtype(&self) -> RetentionType {
        self.rtype
    }

    pub fn point_in_time(&self) -> Option<NaiveDate> {
        self.point_in_time
    }
}

/// Strictness comparison of two retention elements. Total on well-formed
/// values: types order `Indefinite > AfterPurpose > FixedDate`; ties are
/// broken by `pointInTime` with a later date greater and a missing date
/// greater than any present one (a cap only removes retention time).
pub fn retention_compare(a: &Retention, b: &Retention) -> Ordering {
    a.rtype.rank().cmp(&b.rtype.rank()).then_with(|| match (a.point_in_time, b.point_in_time) {
        (None, None) => Ordering::Equal,
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(&y),
    })
}

/// An anonymization guarantee attached to a purpose, e.g.
/// `k-anonymity {k: 5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyModel {
    pub name: String,
    pub attributes: BTreeMap<String, f64>,
}

impl PrivacyModel {
    pub fn new(name: impl Into<String>) -> Self {
        PrivacyModel { name: name.into(), attributes: BTreeMap::new() }
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: f64) -> Self {
        self.attributes.insert(key.into(), value);
        self
    }
}

/// Outcome of a privacy-model comparison. `Incomparable` covers models of
/// different names and attribute sets whose per-attribute orderings
/// disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PmOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl PmOrdering {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => PmOrdering::Less,
            Ordering::Equal => PmOrdering::Equal,
            Ordering::Greater => PmOrdering::Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PmCompareError {
    #[error("attribute {attribute:?} of model {model:?} is absent from one side")]
    UnknownAttribute { model: String, attribute: String },
}

/// Whether a larger or a smaller attribute value means a stronger
/// anonymization guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StrengthDirection {
    HigherStronger,
    LowerStronger,
}

/// Per-model, per-attribute strength directions used to compare privacy
/// models of the same name.
#[derive(Debug, Clone)]
pub struct StrengthRegistry {
    models: BTreeMap<String, BTreeMap<String, StrengthDirection>>,
}

impl Default for StrengthRegistry {
    fn default() -> Self {
        let mut reg = StrengthRegistry { models: BTreeMap::new() };
        reg.register("k-anonymity", "k", StrengthDirection::HigherStronger);
        reg.register("l-diversity", "l", StrengthDirection::HigherStronger);
        reg.register("t-closeness", "t", StrengthDirection::LowerStronger);
        reg
    }
}

impl StrengthRegistry {
    pub fn empty() -> Self {
        StrengthRegistry { models: BTreeMap::new() }
    }

    pub fn register(
        &mut self,
        model: impl Into<String>,
        attribute: impl Into<String>,
        direction: StrengthDirection,
    ) {
        self.models.entry(model.into()).or_default().insert(attribute.into(), direction);
    }

    pub fn direction(&self, model: &str, attribute: &str) -> Option<StrengthDirection> {
        self.models.get(model).and_then(|m| m.get(attribute)).copied()
    }

    /// Merges model/attribute directions from a JSON document of the form
    /// `{"models": {"k-anonymity": {"k": "higherStronger"}, ...}}`.
    pub fn extend_from_json(&mut self, text: &str) -> Result<(), serde_json::Error> {
        #[derive(Deserialize)]
        struct Doc {
            models: BTreeMap<String, BTreeMap<String, StrengthDirection>>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        for (model, attrs) in doc.models {
            for (attr, dir) in attrs {
                self.register(model.clone(), attr, dir);
            }
        }
        Ok(())
    }
}

/// Compares two optional privacy models under the given strength registry.
///
/// An absent model is the weakest guarantee; models with different names
/// are incomparable; equal names compare attribute-wise through the
/// registry's directions, with disagreeing attributes yielding
/// `Incomparable`.
pub fn privacy_model_compare(
    a: Option<&PrivacyModel>,
    b: Option<&PrivacyModel>,
    registry: &StrengthRegistry,
) -> Result<PmOrdering, PmCompareError> {
    let (a, b) = match (a, b) {
        (None, None) => return Ok(PmOrdering::Equal),
        (None, Some(_)) => return Ok(PmOrdering::Less),
        (Some(_), None) => return Ok(PmOrdering::Greater),
        (Some(a), Some(b)) => (a, b),
    };
    if a.name != b.name {
        return Ok(PmOrdering::Incomparable);
    }
    let keys: BTreeSet<&String> = a.attributes.keys().chain(b.attributes.keys()).collect();
    let mut acc = PmOrdering::Equal;
    for key in keys {
        let (av, bv) = match (a.attributes.get(key), b.attributes.get(key)) {
            (Some(av), Some(bv)) => (av, bv),
            _ => {
                return Err(PmCompareError::UnknownAttribute {
                    model: a.name.clone(),
                    attribute: key.clone(),
                })
            }
        };
        let raw = av.partial_cmp(bv).unwrap_or(Ordering::Equal);
        let dir = match registry.direction(&a.name, key) {
            Some(d) => d,
            None => return Ok(PmOrdering::Incomparable),
        };
        let ord = match dir {
            StrengthDirection::HigherStronger => raw,
            StrengthDirection::LowerStronger => raw.reverse(),
        };
        acc = match (acc, ord) {
            (x, Ordering::Equal) => x,
            (PmOrdering::Equal, o) => PmOrdering::from_ordering(o),
            (PmOrdering::Less, Ordering::Less) => PmOrdering::Less,
            (PmOrdering::Greater, Ordering::Greater) => PmOrdering::Greater,
            _ => return Ok(PmOrdering::Incomparable),
        };
    }
    Ok(acc)
}

/// One reason for processing personal data.
#[derive(Debug, Clone, PartialEq)]
pub struct Purpose {
    pub id: String,
    pub name: String,
    pub opt_out: bool,
    pub required: bool,
    pub descr: String,
    pub recipients: BTreeSet<DataRecipient>,
    pub retention: Retention,
    pub privacy_model: Option<PrivacyModel>,
    pub data: BTreeSet<DataElement>,
}

/// A directed parent → child reference between two purposes. Used for both
/// the composition (underlying-purpose) and inheritance relations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PurposeEdge {
    pub parent: String,
    pub child: String,
}

impl PurposeEdge {
    pub fn new(parent: impl Into<String>, child: impl Into<String>) -> Self {
        PurposeEdge { parent: parent.into(), child: child.into() }
    }
}

impl fmt::Display for PurposeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.parent, self.child)
    }
}

/// A privacy policy: purposes plus composition and inheritance edges, with
/// optional underlying policies of other parties.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayeredPrivacyPolicy {
    pub version: String,
    pub name: String,
    pub lang: String,
    pub pp_uri: String,
    pub underlying_policies: Vec<LayeredPrivacyPolicy>,
    pub purposes: BTreeMap<String, Purpose>,
    pub composition: BTreeSet<PurposeEdge>,
    pub hierarchy: BTreeSet<PurposeEdge>,
}

impl LayeredPrivacyPolicy {
    pub fn purpose(&self, id: &str) -> Option<&Purpose> {
        self.purposes.get(id)
    }

    pub fn insert_purpose(&mut self, purpose: Purpose) {
        self.purposes.insert(purpose.id.clone(), purpose);
    }

    /// Union of all data elements mentioned by any purpose.
    pub fn data_vocabulary(&self) -> BTreeSet<&DataElement> {
        self.purposes.values().flat_map(|p| p.data.iter()).collect()
    }
}
