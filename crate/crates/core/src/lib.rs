//! Layered privacy policy modelling and extraction.
//!
//! The crate is organized around five subsystems:
//!
//! * [`lpl`] — the layered privacy policy domain types, the retention and
//!   privacy-model orderings, and the canonical JSON policy format.
//! * [`validator`] — composition-constraint checking over a policy
//!   (subset rules, retention/privacy-model order, acyclicity,
//!   single inheritance) and layered closure computation.
//! * [`service`] — web services and their Petri-net service nets, the
//!   personal-data inspection function `pd`, and policy coverage.
//! * [`minisvc`] — lexer, recursive-descent parser and printer for the
//!   MiniSvc annotated service-definition language.
//! * [`extractor`] — symbol indexing, call-graph construction,
//!   personal-data reachability and composed-purpose generation.
//!
//! [`synth`] holds the seeded generators used by the test suites and
//! benchmarks (valid policies, mutation catalogue, corpora, service trees).

pub mod extractor;
pub mod lpl;
pub mod minisvc;
pub mod service;
pub mod synth;
pub mod validator;

pub use lpl::{
    DataElement, DataRecipient, LayeredPrivacyPolicy, PrivacyModel, Purpose, Retention,
    RetentionType,
};
pub use service::{GovEdge, ServiceModel, ServiceNet, WebService};
pub use validator::{ValidationReport, Violation};
