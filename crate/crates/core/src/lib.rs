//! Discrete Bayesian networks annotated with diagnostic roles, exact
//! inference by variable elimination, and straw-model conflict detection.
//!
//! ```
//! use strawnet::{corpus, format::parse_findings, straw::{conflict_report, StrawKind, Verdict}};
//!
//! let net = corpus::cancer();
//! let findings = parse_findings("Palpation=yes, Diabetes=yes", &net).unwrap();
//! let report = conflict_report(&net, &findings, &[StrawKind::Bipartite]).unwrap();
//! assert_eq!(report.score(StrawKind::Bipartite).unwrap().verdict, Verdict::Conflict);
//! ```

pub mod corpus;
pub mod error;
pub mod evidence;
pub mod factor;
pub mod format;
pub mod harness;
pub mod inference;
pub mod network;
pub mod straw;

pub use error::{Error, ParseError, Result};
pub use evidence::Evidence;
pub use factor::Factor;
pub use network::{validate_network, Cpt, Network, Role, ValidationReport, Variable, Violation};
pub use straw::{ConflictReport, StrawKind, Verdict};
