//! Closed vocabularies and record types shared by every pipeline stage.
//!
//! Label parsing is deliberately lenient about case, whitespace, underscores,
//! and hyphens so that spelling variants coming back from a language model
//! ("Formal forgery", "formal_forgery", "FormalForgery") all normalize to the
//! same enum value, while anything outside the vocabulary is rejected with
//! [`ModelError::UnknownLabel`]. Free-text feature strings additionally fall
//! back to a versioned alias table ([`FeatureAliases`]) before being rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use once_cell::sync::Lazy;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    /// A string did not match any value of the target vocabulary.
    #[error("unknown {kind} label {value:?}")]
    UnknownLabel { kind: &'static str, value: String },
    /// The feature alias table could not be loaded or references bad terms.
    #[error("invalid feature alias table: {0}")]
    BadAliasTable(String),
}

/// Normalization key used by every vocabulary parser: lowercase with all
/// whitespace, underscores, and hyphens removed, so separator and case
/// variants collapse onto one key.
fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Defines a closed string vocabulary: an enum plus lenient `parse`, a
/// canonical display form, serde support, and an `ALL` listing for
/// exhaustive tests.
macro_rules! string_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal,
        { $($variant:ident => $canon:literal $([$($alt:literal),+])?),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            /// Every value, in declaration order.
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Canonical human-readable form (the one serialized to JSON).
            pub fn canonical(&self) -> &'static str {
                match self {
                    $($name::$variant => $canon),+
                }
            }

            /// Parse a label, tolerating case/whitespace/underscore variants.
            pub fn parse(s: &str) -> Result<Self, ModelError> {
                let key = squash(s);
                $(
                    if key == squash($canon) {
                        return Ok($name::$variant);
                    }
                    $($(
                        if key == $alt {
                            return Ok($name::$variant);
                        }
                    )+)?
                )+
                Err(ModelError::UnknownLabel { kind: $kind, value: s.to_string() })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.canonical())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.canonical())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                $name::parse(&raw).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_enum!(
    /// Overall authenticity judgment a cognizer assigns to an item.
    OpinionClass, "opinion",
    {
        Authentic => "Authentic",
        Forgery => "Forgery",
        FormalForgery => "Formal forgery",
        ContentForgery => "Content forgery",
        Neutral => "Neutral",
    }
);

impl OpinionClass {
    /// CamelCase class name used for the RDF type of the main claim.
    pub fn class_name(&self) -> &'static str {
        match self {
            OpinionClass::Authentic => "Authentic",
            OpinionClass::Forgery => "Forgery",
            OpinionClass::FormalForgery => "FormalForgery",
            OpinionClass::ContentForgery => "ContentForgery",
            OpinionClass::Neutral => "Neutral",
        }
    }
}

/// Broader grouping of [`FeatureClass`] values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    /// Features of the work itself: what it says and how it says it.
    Intrinsic,
    /// Features of the physical carrier.
    Extrinsic,
    /// Features of the item's documented history.
    Provenance,
}

string_enum!(
    /// Closed vocabulary of document features that evidence can assess.
    FeatureClass, "feature",
    {
        Content => "content",
        Language => "language",
        Style => "style",
        Orthography => "orthography",
        Handwriting => "handwriting",
        Ink => "ink",
        MaterialSupport => "material support",
        PhysicalCharacteristics => "physical characteristics",
        Provenance => "provenance",
    }
);

impl FeatureClass {
    pub fn group(&self) -> FeatureGroup {
        match self {
            FeatureClass::Content
            | FeatureClass::Language
            | FeatureClass::Style
            | FeatureClass::Orthography => FeatureGroup::Intrinsic,
            FeatureClass::Handwriting
            | FeatureClass::Ink
            | FeatureClass::MaterialSupport
            | FeatureClass::PhysicalCharacteristics => FeatureGroup::Extrinsic,
            FeatureClass::Provenance => FeatureGroup::Provenance,
        }
    }
}

string_enum!(
    /// How a piece of evidence engages with a feature.
    EvaluationCriterion, "evaluation",
    {
        Consistency => "consistency",
        Presence => "presence",
        Completeness => "completeness",
        Reliability => "reliability",
        Veridicality => "veridicality",
    }
);

string_enum!(
    /// Direction of an evidence evaluation or hypothesis.
    Polarity, "polarity",
    {
        Positive => "positive",
        Negative => "negative",
        Neutral => "neutral",
    }
);

string_enum!(
    /// Stated confidence of a claim, with a fixed numeric projection.
    ConfidenceLevel, "confidence",
    {
        High => "High",
        Medium => "Medium",
        Low => "Low",
    }
);

impl ConfidenceLevel {
    /// Numeric weight attached to graph nodes (`ov:confidence`).
    pub fn numeric(&self) -> f64 {
        match self {
            ConfidenceLevel::High => 1.0,
            ConfidenceLevel::Medium => 0.66,
            ConfidenceLevel::Low => 0.33,
        }
    }

    /// Exact lexical form of [`numeric`](Self::numeric) used in Turtle output.
    pub fn numeric_lexical(&self) -> &'static str {
        match self {
            ConfidenceLevel::High => "1.0",
            ConfidenceLevel::Medium => "0.66",
            ConfidenceLevel::Low => "0.33",
        }
    }
}

impl Default for ConfidenceLevel {
    fn default() -> Self {
        ConfidenceLevel::High
    }
}

string_enum!(
    /// What aspect of an item's origin a hypothesis addresses.
    ///
    /// `creation_date` is accepted as a wire spelling of `dating`.
    HypothesisKind, "hypothesis",
    {
        Authorship => "authorship",
        Dating => "dating" ["creationdate"],
        Location => "location",
        Motivation => "motivation",
    }
);

string_enum!(
    /// Entity type labels used by span recognition.
    EntityLabel, "entity label",
    {
        Person => "person",
        Organization => "organization" ["organisation"],
        Group => "group",
        Location => "location",
    }
);

/// Vocabulary selector for [`parse_vocabulary_term`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabKind {
    Feature,
    Evaluation,
    Polarity,
    Confidence,
    Hypothesis,
}

/// A parsed value from one of the five closed vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabTerm {
    Feature(FeatureClass),
    Evaluation(EvaluationCriterion),
    Polarity(Polarity),
    Confidence(ConfidenceLevel),
    Hypothesis(HypothesisKind),
}

/// Parse a raw string against one of the closed vocabularies. Feature strings
/// outside the vocabulary are additionally resolved through `aliases`.
pub fn parse_vocabulary_term(
    kind: VocabKind,
    raw: &str,
    aliases: &FeatureAliases,
) -> Result<VocabTerm, ModelError> {
    Ok(match kind {
        VocabKind::Feature => VocabTerm::Feature(aliases.resolve(raw)?),
        VocabKind::Evaluation => VocabTerm::Evaluation(EvaluationCriterion::parse(raw)?),
        VocabKind::Polarity => VocabTerm::Polarity(Polarity::parse(raw)?),
        VocabKind::Confidence => VocabTerm::Confidence(ConfidenceLevel::parse(raw)?),
        VocabKind::Hypothesis => VocabTerm::Hypothesis(HypothesisKind::parse(raw)?),
    })
}

/// Maps free-text feature labels ("philological arguments") onto the closed
/// [`FeatureClass`] vocabulary. Shipped as a versioned JSON data file so the
/// mapping can grow without code changes.
#[derive(Debug, Clone)]
pub struct FeatureAliases {
    map: BTreeMap<String, FeatureClass>,
}

#[derive(Deserialize)]
struct AliasFile {
    #[allow(dead_code)]
    version: u32,
    aliases: BTreeMap<String, String>,
}

static BUILTIN_ALIASES: Lazy<FeatureAliases> = Lazy::new(|| {
    FeatureAliases::from_json_str(include_str!("../assets/feature_aliases.json"))
        .expect("embedded feature alias table is valid")
});

impl FeatureAliases {
    /// The alias table shipped with the crate.
    pub fn builtin() -> &'static FeatureAliases {
        &BUILTIN_ALIASES
    }

    pub fn from_json_str(json: &str) -> Result<Self, ModelError> {
        let file: AliasFile =
            serde_json::from_str(json).map_err(|e| ModelError::BadAliasTable(e.to_string()))?;
        let mut map = BTreeMap::new();
        for (alias, term) in file.aliases {
            let class = FeatureClass::parse(&term).map_err(|_| {
                ModelError::BadAliasTable(format!("alias {alias:?} maps to unknown term {term:?}"))
            })?;
            map.insert(squash(&alias), class);
        }
        Ok(FeatureAliases { map })
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::BadAliasTable(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Resolve a feature label: direct vocabulary match first, then the alias
    /// table, otherwise [`ModelError::UnknownLabel`].
    pub fn resolve(&self, label: &str) -> Result<FeatureClass, ModelError> {
        if let Ok(class) = FeatureClass::parse(label) {
            return Ok(class);
        }
        self.map
            .get(&squash(label))
            .copied()
            .ok_or_else(|| ModelError::UnknownLabel { kind: "feature", value: label.to_string() })
    }
}

fn de_empty_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v = Option::<String>::deserialize(d)?;
    Ok(v.filter(|s| !s.trim().is_empty()))
}

/// One cultural-heritage item under debate, as stated by the article itself.
///
/// `alleged_*` fields hold what the item claims about its own origin;
/// `settled_*` fields hold origin facts the scholarly record treats as
/// established (relevant for formal forgeries). Empty strings deserialize
/// to `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    #[serde(rename = "item")]
    pub item_title: String,
    #[serde(
        rename = "alleged_author",
        default,
        deserialize_with = "de_empty_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub alleged_creator: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub alleged_date: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub alleged_location: Option<String>,
    pub item_type: String,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub item_subject: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub settled_creator: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub settled_date: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub settled_location: Option<String>,
}

/// One cognizer's authenticity judgment over one item.
///
/// `cognizer_id` and `subject_item` carry the surface strings used on the
/// wire ("entity"/"subject"); resolution against known entities and items
/// happens via slug comparison in the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionRecord {
    #[serde(rename = "entity")]
    pub cognizer_id: String,
    #[serde(rename = "subject")]
    pub subject_item: String,
    pub opinion: OpinionClass,
    #[serde(default)]
    pub confidence: ConfidenceLevel,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    #[serde(default, deserialize_with = "de_empty_opt", skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

/// A single piece of evidence backing an opinion: a text span assessed as a
/// feature, evaluated under a criterion, with a polarity and confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    #[serde(rename = "evidence")]
    pub evidence_text: String,
    #[serde(rename = "feature")]
    pub feature_label: String,
    pub feature_class: FeatureClass,
    pub evaluation: EvaluationCriterion,
    pub polarity: Polarity,
    #[serde(default)]
    pub confidence: ConfidenceLevel,
}

/// An alternative theory about an item's true origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub kind: HypothesisKind,
    #[serde(rename = "hypothesis")]
    pub target_text: String,
    #[serde(
        rename = "wikidata_id",
        default,
        deserialize_with = "de_empty_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub target_link: Option<String>,
    pub polarity: Polarity,
    #[serde(default)]
    pub confidence: ConfidenceLevel,
}
