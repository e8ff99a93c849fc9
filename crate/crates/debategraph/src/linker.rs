//! Mention clustering and Wikibase entity linking.
//!
//! Stage-2 decisions are clustered by shared identical mentions (union-find
//! over whitespace-normalized strings), then each cluster is resolved against
//! a Wikibase: candidates from the search endpoint are scored by name
//! similarity, type compatibility, and scholarly-occupation relevance, and
//! the best candidate above the acceptance threshold wins. Group-typed
//! clusters (impersonal and consensus attributions like "most scholars")
//! are never linked; they keep their local minted identity. All lookups go
//! through an optional persistent cache so reruns do not touch the network.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Paragraph;
use crate::model::EntityLabel;
use crate::pipeline::CognizerDecision;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("quota exceeded while resolving {0:?}")]
    QuotaExceeded(String),
    #[error("malformed candidate data: {0}")]
    Malformed(String),
    #[error("fixture file {path}: {detail}")]
    Fixture { path: PathBuf, detail: String },
    #[error("cache file {path}: {detail}")]
    Cache { path: PathBuf, detail: String },
}

/// Mentions believed to denote one entity, with the paragraphs they occur in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCluster {
    /// Longest mention (ties: lexicographically first).
    pub primary_mention: String,
    /// Distinct whitespace-normalized mentions, sorted.
    pub all_mentions: Vec<String>,
    pub entity_type: EntityLabel,
    /// Sorted, deduplicated indices of paragraphs containing any mention.
    pub paragraph_indices: Vec<usize>,
}

/// One Wikibase search hit, hydrated with the fields scoring needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WikidataCandidate {
    pub qid: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Label of the entity's instance-of class, lowercased ("human", …).
    #[serde(default)]
    pub instance_hint: String,
    #[serde(default)]
    pub occupations: Vec<String>,
    #[serde(default)]
    pub birth_year: Option<i32>,
    #[serde(default)]
    pub death_year: Option<i32>,
}

impl WikidataCandidate {
    fn qid_number(&self) -> u64 {
        self.qid.strip_prefix('Q').and_then(|d| d.parse().ok()).unwrap_or(u64::MAX)
    }
}

/// A cluster plus its (possibly absent) Wikibase resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedEntity {
    pub cluster: EntityCluster,
    pub qid: Option<String>,
    pub wikidata_label: Option<String>,
    #[serde(default)]
    pub occupations: Vec<String>,
    #[serde(default)]
    pub birth_year: Option<i32>,
    #[serde(default)]
    pub death_year: Option<i32>,
    pub link_score: f64,
}

/// Merge decisions into clusters: two decisions join iff they share at least
/// one identical mention after whitespace normalization (case-sensitive).
/// Callers pass only decisions marked as cognizers. A cluster's type comes
/// from its lowest-indexed decision; output is sorted by primary mention.
pub fn cluster_mentions(
    decisions: &[CognizerDecision],
    paragraphs: &[Paragraph],
) -> Vec<EntityCluster> {
    let mut mention_sets: Vec<BTreeSet<String>> = Vec::with_capacity(decisions.len());
    for decision in decisions {
        let mut set: BTreeSet<String> = decision
            .mentions
            .iter()
            .map(|m| normalize_ws(m))
            .filter(|m| !m.is_empty())
            .collect();
        let surface = normalize_ws(&decision.entity.surface);
        if !surface.is_empty() {
            set.insert(surface);
        }
        mention_sets.push(set);
    }

    let mut dsu = Dsu::new(decisions.len());
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, set) in mention_sets.iter().enumerate() {
        for mention in set {
            match owner.entry(mention.as_str()) {
                std::collections::btree_map::Entry::Occupied(e) => dsu.union(i, *e.get()),
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(i);
                }
            }
        }
    }

    let normalized_paragraphs: Vec<String> =
        paragraphs.iter().map(|p| normalize_ws(&p.text)).collect();
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..decisions.len() {
        components.entry(dsu.find(i)).or_default().push(i);
    }

    let mut clusters = Vec::new();
    for members in components.values() {
        let mut all: BTreeSet<String> = BTreeSet::new();
        for &i in members {
            all.extend(mention_sets[i].iter().cloned());
        }
        if all.is_empty() {
            continue;
        }
        let primary = all
            .iter()
            .max_by(|a, b| a.chars().count().cmp(&b.chars().count()).then(b.cmp(a)))
            .expect("nonempty mention set")
            .clone();
        let paragraph_indices = normalized_paragraphs
            .iter()
            .enumerate()
            .filter(|(_, text)| all.iter().any(|m| text.contains(m.as_str())))
            .map(|(idx, _)| idx)
            .collect();
        clusters.push(EntityCluster {
            primary_mention: primary,
            all_mentions: all.into_iter().collect(),
            entity_type: decisions[members[0]].entity.label,
            paragraph_indices,
        });
    }
    clusters.sort_by(|a, b| a.primary_mention.cmp(&b.primary_mention));
    clusters
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Union-find with path halving and union by size.
struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Case-folded Levenshtein similarity: `1 − distance/max(len)`; two empty
/// strings count as identical.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&a, &b) as f64 / longest as f64
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// The scholarly-occupation list shipped with the crate, used for the
/// occupation-relevance score component. Matching is case-insensitive on
/// word boundaries, so "Renaissance humanist" counts via "humanist" while
/// "alchemist" does not count via "chemist".
#[derive(Debug, Clone)]
pub struct ScholarlyOccupations {
    entries: Vec<String>,
}

#[derive(Deserialize)]
struct OccupationsFile {
    #[allow(dead_code)]
    version: u32,
    occupations: Vec<String>,
}

static BUILTIN_OCCUPATIONS: Lazy<ScholarlyOccupations> = Lazy::new(|| {
    ScholarlyOccupations::from_json_str(include_str!("../assets/scholarly_occupations.json"))
        .expect("embedded occupation list is valid")
});

impl ScholarlyOccupations {
    pub fn builtin() -> &'static ScholarlyOccupations {
        &BUILTIN_OCCUPATIONS
    }

    pub fn from_json_str(data: &str) -> Result<Self, LinkError> {
        let file: OccupationsFile =
            serde_json::from_str(data).map_err(|e| LinkError::Malformed(e.to_string()))?;
        Ok(ScholarlyOccupations {
            entries: file.occupations.iter().map(|o| o.trim().to_lowercase()).collect(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, LinkError> {
        let data = fs::read_to_string(path)
            .map_err(|e| LinkError::Fixture { path: path.into(), detail: e.to_string() })?;
        Self::from_json_str(&data)
    }

    pub fn is_scholarly(&self, occupation: &str) -> bool {
        let hay = normalize_ws(&occupation.to_lowercase());
        self.entries.iter().any(|entry| contains_phrase(&hay, entry))
    }
}

/// Substring match constrained to word boundaries on both sides.
fn contains_phrase(hay: &str, phrase: &str) -> bool {
    if phrase.is_empty() {
        return false;
    }
    for (pos, _) in hay.match_indices(phrase) {
        let before_ok =
            hay[..pos].chars().next_back().map(|c| !c.is_alphanumeric()).unwrap_or(true);
        let after_ok = hay[pos + phrase.len()..]
            .chars()
            .next()
            .map(|c| !c.is_alphanumeric())
            .unwrap_or(true);
        if before_ok && after_ok {
            return true;
        }
    }
    false
}

/// Weights and data for [`score_candidate`].
#[derive(Debug, Clone)]
pub struct ScoringConfig {
    pub name_weight: f64,
    pub type_weight: f64,
    pub occupation_weight: f64,
    pub occupations: ScholarlyOccupations,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            name_weight: 0.5,
            type_weight: 0.2,
            occupation_weight: 0.3,
            occupations: ScholarlyOccupations::builtin().clone(),
        }
    }
}

/// Score a candidate for a cluster in `[0,1]`:
/// `w_name·S_name + w_type·S_type + w_occ·S_occ`, where `S_name` is the best
/// name similarity between any cluster mention and the candidate's label or
/// aliases, `S_type` is type compatibility (0/1), and `S_occ` is 1 for a
/// scholarly occupation, 0.5 when occupations are unknown, 0 otherwise
/// (pinned to 1 for non-person clusters, where occupations are meaningless).
pub fn score_candidate(
    cluster: &EntityCluster,
    candidate: &WikidataCandidate,
    cfg: &ScoringConfig,
) -> f64 {
    let mut s_name: f64 = 0.0;
    for mention in &cluster.all_mentions {
        for name in std::iter::once(&candidate.label).chain(candidate.aliases.iter()) {
            s_name = s_name.max(name_similarity(mention, name));
        }
    }
    let s_type = if type_compatible(cluster.entity_type, &candidate.instance_hint) { 1.0 } else { 0.0 };
    let s_occ = if cluster.entity_type != EntityLabel::Person {
        1.0
    } else if candidate.occupations.is_empty() {
        0.5
    } else if candidate.occupations.iter().any(|o| cfg.occupations.is_scholarly(o)) {
        1.0
    } else {
        0.0
    };
    cfg.name_weight * s_name + cfg.type_weight * s_type + cfg.occupation_weight * s_occ
}

fn type_compatible(entity_type: EntityLabel, instance_hint: &str) -> bool {
    let hint = instance_hint.to_lowercase();
    if hint.is_empty() {
        return false;
    }
    let any = |keys: &[&str]| keys.iter().any(|k| hint.contains(k));
    match entity_type {
        EntityLabel::Person => hint == "human" || any(&["person"]),
        EntityLabel::Organization => any(&[
            "organization",
            "organisation",
            "institution",
            "university",
            "academy",
            "museum",
            "society",
        ]),
        EntityLabel::Group => any(&["group", "people", "community", "school of"]),
        EntityLabel::Location => any(&[
            "city",
            "town",
            "municipality",
            "country",
            "region",
            "settlement",
            "place",
            "location",
        ]),
    }
}

/// Where candidates come from.
#[derive(Debug, Clone)]
pub enum LinkBackend {
    /// Mention → recorded candidate lists, loaded from a JSON file.
    Fixture(BTreeMap<String, Vec<WikidataCandidate>>),
    /// Live Wikibase API (`wbsearchentities` + `wbgetentities`).
    Wikibase { base_url: String },
}

impl LinkBackend {
    pub fn fixture_from_path(path: &Path) -> Result<Self, LinkError> {
        let data = fs::read_to_string(path)
            .map_err(|e| LinkError::Fixture { path: path.into(), detail: e.to_string() })?;
        let map = serde_json::from_str(&data)
            .map_err(|e| LinkError::Fixture { path: path.into(), detail: e.to_string() })?;
        Ok(LinkBackend::Fixture(map))
    }
}

/// Persistent mention → candidates cache with atomic writes.
#[derive(Debug, Default)]
pub struct LinkCache {
    path: Option<PathBuf>,
    map: BTreeMap<String, Vec<WikidataCandidate>>,
}

impl LinkCache {
    pub fn in_memory() -> Self {
        LinkCache::default()
    }

    /// Open a cache file, loading existing contents when the file exists.
    pub fn at_path(path: PathBuf) -> Result<Self, LinkError> {
        let map = if path.exists() {
            let data = fs::read_to_string(&path)
                .map_err(|e| LinkError::Cache { path: path.clone(), detail: e.to_string() })?;
            serde_json::from_str(&data)
                .map_err(|e| LinkError::Cache { path: path.clone(), detail: e.to_string() })?
        } else {
            BTreeMap::new()
        };
        Ok(LinkCache { path: Some(path), map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn get(&self, mention: &str) -> Option<&Vec<WikidataCandidate>> {
        self.map.get(mention)
    }

    fn put(&mut self, mention: String, candidates: Vec<WikidataCandidate>) -> Result<(), LinkError> {
        self.map.insert(mention, candidates);
        if let Some(path) = &self.path {
            let data = serde_json::to_string_pretty(&self.map)
                .map_err(|e| LinkError::Cache { path: path.clone(), detail: e.to_string() })?;
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, data)
                .and_then(|()| fs::rename(&tmp, path))
                .map_err(|e| LinkError::Cache { path: path.clone(), detail: e.to_string() })?;
        }
        Ok(())
    }
}

/// Candidate search + scoring + selection with a read-through cache.
pub struct Linker {
    backend: LinkBackend,
    cache: LinkCache,
    scoring: ScoringConfig,
    threshold: f64,
    backend_calls: usize,
}

impl Linker {
    pub fn new(backend: LinkBackend, cache: LinkCache) -> Self {
        Linker {
            backend,
            cache,
            scoring: ScoringConfig::default(),
            threshold: 0.65,
            backend_calls: 0,
        }
    }

    pub fn with_scoring(mut self, scoring: ScoringConfig) -> Self {
        self.scoring = scoring;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// How many times the backend (not the cache) answered a search.
    pub fn backend_calls(&self) -> usize {
        self.backend_calls
    }

    /// Candidates for a mention, from cache when possible.
    pub fn search_candidates(&mut self, mention: &str) -> Result<Vec<WikidataCandidate>, LinkError> {
        let key = normalize_ws(mention);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let candidates = match &self.backend {
            LinkBackend::Fixture(map) => map.get(&key).cloned().unwrap_or_default(),
            LinkBackend::Wikibase { base_url } => wikibase_search(base_url, &key)?,
        };
        self.backend_calls += 1;
        for candidate in &candidates {
            if candidate.qid_number() == u64::MAX {
                return Err(LinkError::Malformed(format!("bad qid {:?}", candidate.qid)));
            }
        }
        self.cache.put(key, candidates.clone())?;
        Ok(candidates)
    }

    /// Resolve a cluster: search on the primary mention, score all candidates,
    /// and accept the best one above the threshold (score ties go to the
    /// lower-numbered qid). Group clusters stay unlinked by policy, and an
    /// empty or below-threshold candidate list is an unlinked result, not an
    /// error.
    pub fn link_entity(&mut self, cluster: &EntityCluster) -> Result<LinkedEntity, LinkError> {
        if cluster.entity_type == EntityLabel::Group {
            return Ok(unlinked(cluster.clone(), 0.0));
        }
        let mut candidates = self.search_candidates(&cluster.primary_mention)?;
        candidates.sort_by(|a, b| {
            score_candidate(cluster, b, &self.scoring)
                .total_cmp(&score_candidate(cluster, a, &self.scoring))
                .then(a.qid_number().cmp(&b.qid_number()))
        });
        match candidates.into_iter().next() {
            Some(best) => {
                let score = score_candidate(cluster, &best, &self.scoring);
                if score > self.threshold {
                    Ok(LinkedEntity {
                        cluster: cluster.clone(),
                        qid: Some(best.qid),
                        wikidata_label: Some(best.label),
                        occupations: best.occupations,
                        birth_year: best.birth_year,
                        death_year: best.death_year,
                        link_score: score,
                    })
                } else {
                    Ok(unlinked(cluster.clone(), score))
                }
            }
            None => Ok(unlinked(cluster.clone(), 0.0)),
        }
    }
}

fn unlinked(cluster: EntityCluster, score: f64) -> LinkedEntity {
    LinkedEntity {
        cluster,
        qid: None,
        wikidata_label: None,
        occupations: Vec::new(),
        birth_year: None,
        death_year: None,
        link_score: score,
    }
}

/// Map well-known instance-of classes to the hint vocabulary scoring uses.
fn instance_hint_for(qid: &str) -> &'static str {
    match qid {
        "Q5" => "human",
        "Q515" => "city",
        "Q3957" => "town",
        "Q15284" => "municipality",
        "Q6256" => "country",
        "Q486972" => "human settlement",
        "Q43229" => "organization",
        "Q3918" => "university",
        "Q31855" => "research institute",
        "Q16334295" => "group of humans",
        _ => "",
    }
}

fn http_get_json(url: &str, query: &[(&str, &str)], mention: &str) -> Result<serde_json::Value, LinkError> {
    let mut request = ureq::get(url);
    for (key, value) in query {
        request = request.query(*key, *value);
    }
    match request.call() {
        Ok(mut response) => response
            .body_mut()
            .read_json()
            .map_err(|e| LinkError::Malformed(e.to_string())),
        Err(ureq::Error::StatusCode(429)) => Err(LinkError::QuotaExceeded(mention.to_string())),
        Err(e) => Err(LinkError::Transport(e.to_string())),
    }
}

/// Live candidate search: `wbsearchentities` for hits, one `wbgetentities`
/// to hydrate them, and a second to resolve occupation item labels.
fn wikibase_search(base_url: &str, mention: &str) -> Result<Vec<WikidataCandidate>, LinkError> {
    let search = http_get_json(
        base_url,
        &[
            ("action", "wbsearchentities"),
            ("format", "json"),
            ("language", "en"),
            ("type", "item"),
            ("limit", "8"),
            ("search", mention),
        ],
        mention,
    )?;
    let ids: Vec<String> = search["search"]
        .as_array()
        .map(|hits| {
            hits.iter().filter_map(|h| h["id"].as_str().map(String::from)).collect()
        })
        .unwrap_or_default();
    if ids.is_empty() {
        return Ok(Vec::new());
    }

    let entities = http_get_json(
        base_url,
        &[
            ("action", "wbgetentities"),
            ("format", "json"),
            ("props", "labels|aliases|claims"),
            ("ids", &ids.join("|")),
        ],
        mention,
    )?;

    let mut candidates = Vec::new();
    let mut occupation_ids: BTreeSet<String> = BTreeSet::new();
    for qid in &ids {
        let entity = &entities["entities"][qid];
        if entity.is_null() {
            continue;
        }
        let label = entity["labels"]["en"]["value"].as_str().unwrap_or(qid.as_str()).to_string();
        let aliases = entity["aliases"]["en"]
            .as_array()
            .map(|xs| xs.iter().filter_map(|a| a["value"].as_str().map(String::from)).collect())
            .unwrap_or_default();
        let instance = claim_item_ids(&entity["claims"]["P31"]);
        let occupations = claim_item_ids(&entity["claims"]["P106"]);
        occupation_ids.extend(occupations.iter().cloned());
        candidates.push(WikidataCandidate {
            qid: qid.clone(),
            label,
            aliases,
            instance_hint: instance
                .first()
                .map(|id| instance_hint_for(id))
                .unwrap_or("")
                .to_string(),
            occupations,
            birth_year: claim_year(&entity["claims"]["P569"]),
            death_year: claim_year(&entity["claims"]["P570"]),
        });
    }

    // Occupations were collected as item ids; swap in their English labels.
    let occupation_labels: BTreeMap<String, String> = if occupation_ids.is_empty() {
        BTreeMap::new()
    } else {
        let ids: Vec<&str> = occupation_ids.iter().map(String::as_str).collect();
        let response = http_get_json(
            base_url,
            &[
                ("action", "wbgetentities"),
                ("format", "json"),
                ("props", "labels"),
                ("ids", &ids.join("|")),
            ],
            mention,
        )?;
        occupation_ids
            .iter()
            .filter_map(|id| {
                response["entities"][id]["labels"]["en"]["value"]
                    .as_str()
                    .map(|l| (id.clone(), l.to_string()))
            })
            .collect()
    };

    for candidate in &mut candidates {
        candidate.occupations = candidate
            .occupations
            .iter()
            .map(|id| occupation_labels.get(id).cloned().unwrap_or_else(|| id.clone()))
            .collect();
    }
    Ok(candidates)
}

fn claim_item_ids(claims: &serde_json::Value) -> Vec<String> {
    claims
        .as_array()
        .map(|xs| {
            xs.iter()
                .filter_map(|c| {
                    c["mainsnak"]["datavalue"]["value"]["id"].as_str().map(String::from)
                })
                .collect()
        })
        .unwrap_or_default()
}

fn claim_year(claims: &serde_json::Value) -> Option<i32> {
    let time = claims.as_array()?.first()?["mainsnak"]["datavalue"]["value"]["time"].as_str()?;
    let (sign, rest) = match time.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, time.strip_prefix('+').unwrap_or(time)),
    };
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse::<i32>().ok().map(|y| sign * y)
}
