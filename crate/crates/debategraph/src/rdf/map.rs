//! Deterministic mapping from pipeline output to the SEBI graph shape.
//!
//! Every local name is minted through [`slugify`], so mapping the same output
//! twice produces identical graphs. Items carry their alleged metadata as
//! quoted triples derived from a per-item `_self_statement` act; each
//! cognizer's reading of an item becomes a `hico:InterpretationAct` with the
//! main authenticity claim, evidence nodes, and hypothesis quoted triples
//! hanging off it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    cito, dcmitype, dct, hico, kb, ov, owl, prov, quoted, rdf, rdfs, sebi, skos, slugify, wd,
    xsd, Graph, Literal, RdfError, Term, Triple,
};
use crate::linker::LinkedEntity;
use crate::model::{EntityLabel, HypothesisKind, ItemRecord, Polarity};
use crate::pipeline::{OpinionBundle, PipelineOutput};

/// Predicate used for location hypotheses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationPredicate {
    /// `dct:coverage`, matching how items carry their locations.
    #[default]
    Coverage,
    /// `sebi:location`, the same predicate acts use for their setting.
    SebiLocation,
}

impl LocationPredicate {
    pub fn iri(&self) -> String {
        match self {
            LocationPredicate::Coverage => dct("coverage"),
            LocationPredicate::SebiLocation => sebi("location"),
        }
    }
}

/// Knobs for graph generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapConfig {
    #[serde(default)]
    pub location_predicate: LocationPredicate,
}

/// Map a full pipeline output: core annotations plus evidence and hypothesis
/// fragments for every bundle, unioned into one graph.
pub fn map_output(output: &PipelineOutput, cfg: &MapConfig) -> Result<Graph, RdfError> {
    let mut g = map_core(output)?;
    for bundle in &output.bundles {
        g.merge(map_evidence(bundle)?);
        g.merge(map_hypotheses(bundle, cfg)?);
    }
    Ok(g)
}

/// Core annotations: item nodes with minted type classes and alleged-metadata
/// quoted triples, cognizer agent nodes, and one interpretation act with its
/// main authenticity claim per bundle.
pub fn map_core(output: &PipelineOutput) -> Result<Graph, RdfError> {
    let mut g = Graph::new();
    for item in &output.items {
        map_item(item, &mut g)?;
    }
    for entity in &output.entities {
        map_cognizer(entity, &mut g)?;
    }
    for bundle in &output.bundles {
        map_act(&output.doc_id, bundle, &mut g)?;
    }
    Ok(g)
}

fn map_item(rec: &ItemRecord, g: &mut Graph) -> Result<(), RdfError> {
    let item_slug = slug_of("item title", &rec.item_title)?;
    let item = Term::iri(kb(&item_slug));
    let type_slug = slug_of("item type", &rec.item_type)?;
    let class = Term::iri(sebi(&camel_case(&type_slug)));

    g.insert(t(item.clone(), rdf("type"), class.clone()));
    g.insert(t(item.clone(), dct("title"), Term::Literal(Literal::lang(&rec.item_title, "en"))));
    g.insert(t(class.clone(), rdfs("subClassOf"), Term::iri(dcmitype(dcmi_type(&type_slug)))));
    g.insert(t(class, rdfs("label"), Term::Literal(Literal::lang(&rec.item_type, "en"))));

    if let Some(location) = &rec.alleged_location {
        let loc = Term::iri(kb(&slug_of("alleged location", location)?));
        g.insert(t(item.clone(), dct("coverage"), loc));
    }
    for (value, pred) in [
        (&rec.settled_creator, dct("creator")),
        (&rec.settled_date, dct("date")),
        (&rec.settled_location, dct("coverage")),
    ] {
        if let Some(v) = value {
            g.insert(t(item.clone(), pred, Term::iri(kb(&slug_of("settled metadata", v)?))));
        }
    }

    let alleged = [
        (&rec.alleged_creator, dct("creator")),
        (&rec.alleged_date, dct("date")),
        (&rec.alleged_location, dct("coverage")),
    ];
    if alleged.iter().any(|(v, _)| v.is_some()) {
        let self_stmt = Term::iri(kb(&format!("{item_slug}_self_statement")));
        g.insert(t(self_stmt.clone(), rdf("type"), Term::iri(hico("InterpretationAct"))));
        g.insert(t(self_stmt.clone(), prov("wasAttributedTo"), item.clone()));
        for (value, pred) in alleged {
            if let Some(v) = value {
                let target = Term::iri(kb(&slug_of("alleged metadata", v)?));
                let claim = quoted(item.clone(), pred, target)?;
                g.insert(t(claim, prov("wasDerivedFrom"), self_stmt.clone()));
            }
        }
    }
    Ok(())
}

fn map_cognizer(entity: &LinkedEntity, g: &mut Graph) -> Result<(), RdfError> {
    let cluster = &entity.cluster;
    let cog = Term::iri(kb(&slug_of("entity", &cluster.primary_mention)?));
    g.insert(t(cog.clone(), rdf("type"), Term::iri(dct("Agent"))));
    let extra_class = match cluster.entity_type {
        EntityLabel::Person => Some("Human"),
        EntityLabel::Organization => Some("Organization"),
        EntityLabel::Group => Some("Group"),
        EntityLabel::Location => None,
    };
    if let Some(class) = extra_class {
        g.insert(t(cog.clone(), rdf("type"), Term::iri(sebi(class))));
    }
    g.insert(t(
        cog.clone(),
        rdfs("label"),
        Term::Literal(Literal::lang(&cluster.primary_mention, "en")),
    ));
    if let Some(qid) = &entity.qid {
        g.insert(t(cog.clone(), owl("sameAs"), Term::iri(wd(qid))));
    }
    let alts: BTreeSet<&str> = cluster
        .all_mentions
        .iter()
        .map(String::as_str)
        .filter(|m| *m != cluster.primary_mention)
        .collect();
    for alt in alts {
        g.insert(t(cog.clone(), skos("altLabel"), Term::Literal(Literal::lang(alt, "en"))));
    }
    for occ in &entity.occupations {
        g.insert(t(cog.clone(), wd("occupation"), Term::iri(kb(&slug_of("occupation", occ)?))));
    }
    Ok(())
}

fn map_act(doc_id: &str, bundle: &OpinionBundle, g: &mut Graph) -> Result<(), RdfError> {
    let (item, act_local) = bundle_refs(bundle)?;
    let act = Term::iri(kb(&act_local));
    let opinion = &bundle.opinion;
    g.insert(t(act.clone(), rdf("type"), Term::iri(hico("InterpretationAct"))));
    g.insert(t(
        act.clone(),
        prov("wasAttributedTo"),
        Term::iri(kb(&slug_of("entity", &opinion.cognizer_id)?)),
    ));
    g.insert(t(
        act.clone(),
        prov("wasQuotedFrom"),
        Term::Literal(Literal::typed(doc_id, xsd("anyURI"))),
    ));
    if let Some(date) = &opinion.date {
        g.insert(t(act.clone(), sebi("date"), Term::iri(kb(&slug_of("opinion date", date)?))));
    }
    if let Some(location) = &opinion.location {
        g.insert(t(
            act.clone(),
            sebi("location"),
            Term::iri(kb(&slug_of("opinion location", location)?)),
        ));
    }
    let claim = quoted(item, rdf("type"), Term::iri(sebi(opinion.opinion.class_name())))?;
    g.insert(t(claim, prov("wasDerivedFrom"), act));
    Ok(())
}

/// Evidence and feature nodes for one bundle. Evidence nodes are numbered
/// `{act}_{idx}` with `idx` 1-based in record order.
pub fn map_evidence(bundle: &OpinionBundle) -> Result<Graph, RdfError> {
    let mut g = Graph::new();
    let (_, act_local) = bundle_refs(bundle)?;
    let act = Term::iri(kb(&act_local));
    for (idx, ev) in bundle.evidences.iter().enumerate() {
        let node = Term::iri(kb(&format!("{act_local}_{}", idx + 1)));
        let feature = Term::iri(kb(&slug_of("feature", &ev.feature_label)?));
        g.insert(t(node.clone(), rdf("type"), Term::iri(sebi("Evidence"))));
        g.insert(t(node.clone(), sebi("assess"), feature.clone()));
        g.insert(t(node.clone(), sebi("evaluate"), Term::iri(sebi(ev.evaluation.canonical()))));
        g.insert(t(
            node.clone(),
            sebi("hasEvaluationScore"),
            Term::Literal(Literal::lang(ev.polarity.canonical(), "en")),
        ));
        g.insert(t(node.clone(), sebi("support"), act.clone()));
        g.insert(t(
            node.clone(),
            ov("confidence"),
            Term::Literal(Literal::decimal(ev.confidence.numeric_lexical())),
        ));
        g.insert(t(act.clone(), cito("isSupportedBy"), node.clone()));

        g.insert(t(feature.clone(), rdf("type"), Term::iri(sebi("Feature"))));
        g.insert(t(
            feature.clone(),
            rdfs("label"),
            Term::Literal(Literal::lang(&ev.feature_label, "en")),
        ));
        g.insert(t(feature.clone(), sebi("isAssessedBy"), node));
        let class_slug = slug_of("feature class", ev.feature_class.canonical())?;
        g.insert(t(feature, skos("broader"), Term::iri(kb(&class_slug))));
    }
    Ok(g)
}

/// Hypothesis quoted triples for one bundle. Positive and neutral hypotheses
/// derive from the act; negative ones attach via the refutation predicate.
pub fn map_hypotheses(bundle: &OpinionBundle, cfg: &MapConfig) -> Result<Graph, RdfError> {
    let mut g = Graph::new();
    let (item, act_local) = bundle_refs(bundle)?;
    let act = Term::iri(kb(&act_local));
    for hyp in &bundle.hypotheses {
        let pred = match hyp.kind {
            HypothesisKind::Authorship => dct("creator"),
            HypothesisKind::Dating => dct("date"),
            HypothesisKind::Location => cfg.location_predicate.iri(),
            HypothesisKind::Motivation => sebi("intendedTo"),
        };
        let target = Term::iri(kb(&slug_of("hypothesis target", &hyp.target_text)?));
        g.insert(t(
            target.clone(),
            rdfs("label"),
            Term::Literal(Literal::lang(&hyp.target_text, "en")),
        ));
        if let Some(qid) = &hyp.target_link {
            g.insert(t(target.clone(), owl("sameAs"), Term::iri(wd(qid))));
        }
        let claim = quoted(item.clone(), pred, target)?;
        let attach = match hyp.polarity {
            Polarity::Negative => sebi("refutedBy"),
            Polarity::Positive | Polarity::Neutral => prov("wasDerivedFrom"),
        };
        g.insert(t(claim.clone(), attach, act.clone()));
        g.insert(t(
            claim,
            ov("confidence"),
            Term::Literal(Literal::decimal(hyp.confidence.numeric_lexical())),
        ));
    }
    Ok(g)
}

/// Summary counts over a graph: asserted triples, interpretation acts other
/// than self-statements, and distinct agents those acts are attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgStats {
    pub triple_count: usize,
    pub interpretation_acts: usize,
    pub cognizers: usize,
}

pub fn kg_stats(g: &Graph) -> KgStats {
    let type_pred = rdf("type");
    let act_class = hico("InterpretationAct");
    let agent_class = dct("Agent");
    let attributed = prov("wasAttributedTo");

    let mut acts: BTreeSet<&str> = BTreeSet::new();
    let mut agents: BTreeSet<&str> = BTreeSet::new();
    for triple in g {
        if triple.predicate != type_pred {
            continue;
        }
        if let (Some(subject), Some(class)) = (triple.subject.as_iri(), triple.object.as_iri()) {
            if class == act_class && !subject.contains("self_statement") {
                acts.insert(subject);
            } else if class == agent_class {
                agents.insert(subject);
            }
        }
    }
    let cognizers = g
        .iter()
        .filter(|t| {
            t.predicate == attributed
                && t.subject.as_iri().map(|s| acts.contains(s)).unwrap_or(false)
        })
        .filter_map(|t| t.object.as_iri())
        .filter(|o| agents.contains(o))
        .collect::<BTreeSet<_>>()
        .len();
    KgStats { triple_count: g.len(), interpretation_acts: acts.len(), cognizers }
}

/// The item node and the act local name shared by a bundle's fragments.
fn bundle_refs(bundle: &OpinionBundle) -> Result<(Term, String), RdfError> {
    let cog_slug = slug_of("entity", &bundle.opinion.cognizer_id)?;
    let item_slug = slug_of("subject item", &bundle.opinion.subject_item)?;
    Ok((Term::iri(kb(&item_slug)), format!("{cog_slug}_about_{item_slug}")))
}

fn slug_of(field: &str, value: &str) -> Result<String, RdfError> {
    slugify(value).map_err(|e| RdfError::Mapping(format!("{field} {value:?}: {e}")))
}

/// `papal_decree` → `PapalDecree`. Hyphens survive as-is inside segments.
fn camel_case(slug: &str) -> String {
    slug.split('_')
        .map(|seg| {
            let mut chars = seg.chars();
            match chars.next() {
                Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
                None => String::new(),
            }
        })
        .collect()
}

/// DCMI type for a minted item-type class, by keyword over the type slug.
fn dcmi_type(type_slug: &str) -> &'static str {
    const STILL_IMAGE: &[&str] = &["painting", "portrait", "drawing", "photograph", "image", "map"];
    const PHYSICAL: &[&str] = &[
        "artifact", "artefact", "relic", "shroud", "sculpture", "statue", "object", "vase",
        "crown", "tiara",
    ];
    if STILL_IMAGE.iter().any(|k| type_slug.contains(k)) {
        "StillImage"
    } else if PHYSICAL.iter().any(|k| type_slug.contains(k)) {
        "PhysicalObject"
    } else {
        "Text"
    }
}

fn t(subject: Term, predicate: String, object: Term) -> Triple {
    Triple::new(subject, predicate, object).expect("mapper only emits structurally valid triples")
}
