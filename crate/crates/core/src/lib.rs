//! Stream annotation: a helper streams a proof alongside the input and a
//! small-space verifier checks it in one pass.

pub mod field;
pub mod fingerprint;
pub mod stream;
pub mod annotation;
pub mod protocol;
pub mod graph;
pub mod labels;
pub mod dag;
pub mod traversal;
pub mod matching;
pub mod lp;
pub mod algebra;
pub mod memcheck;
pub mod simulate;
pub mod registry;
pub mod attack;

pub use annotation::{AnnHeader, AnnToken, Annotation, Num, Tag};
pub use attack::{attack, mutate, AttackRow, Mutation, MutationKind};
pub use field::{Fe, PrimeField};
pub use fingerprint::{Fingerprint, TupleFingerprint};
pub use graph::Graph;
pub use protocol::{run_in_memory, run_protocol, Answer, CostReport, Outcome, Reason, Reject, Verifier};
pub use registry::{GenParams, ProtocolKind, UsageError};
pub use stream::{Stream, StreamHeader, StreamKind, StreamToken};
