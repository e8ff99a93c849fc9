//! Batch extraction of scholarly authenticity debates into RDF-star graphs.
//!
//! The library converts plain-text articles about contested cultural-heritage
//! items (disputed documents, artifacts, artworks) into knowledge graphs of
//! *who said what about which item, on what evidence*. Processing runs as a
//! six-stage pipeline: item metadata extraction, cognizer detection, entity
//! linking against a Wikibase, opinion mining, evidence mining, and hypothesis
//! extraction. Stage outputs are JSON artifacts; the final graph is Turtle-star
//! with quoted triples carrying provenance back to each interpretation act.
//!
//! Module map:
//! - [`corpus`]: article loading, markup cleanup, paragraph segmentation.
//! - [`model`]: closed vocabularies (opinion classes, feature classes, …) and
//!   the record types passed between stages.
//! - [`llm`]: chat-backend gateway with JSON-schema-validated structured
//!   output and a deterministic fixture mode.
//! - [`ner`]: entity span recognition (gazetteer or external service).
//! - [`linker`]: mention clustering and Wikibase entity linking.
//! - [`pipeline`]: stage orchestration, artifact persistence, failure report.
//! - [`rdf`]: RDF-star terms/graphs, slugified local names, Turtle-star
//!   serializer/parser, ontology mapping, and graph statistics.
//! - [`eval`]: precision/recall/F1 harness, evidence scoring, graph
//!   rehydration, and judge-based scoring.
//! - [`cli`]: the `debategraph` command-line entry points.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod linker;
pub mod llm;
pub mod model;
pub mod ner;
pub mod pipeline;
pub mod rdf;

#[cfg(test)]
mod testsupport;
