//! A verifying engine for containment-ordered model-to-model
//! transformations.
//!
//! Transformations are assembled per rung (one class-to-class mapping with
//! its own pre- and postcondition) through three constructors (base,
//! step, and join) and executed by preorder traversal of the source
//! object graph. Every run produces a replayable proof trace whose fixed
//! skeleton follows the structure of the transformation and whose variable
//! leaves are hole (pre-implies-post) and commutativity evidence.
//!
//! The crate is organized along the pipeline:
//!
//! - [`metamodel`]: class schemas and the containment partial order
//! - [`instance`]: finite typed object graphs
//! - [`contracts`]: predicate and mapping expressions, hole evidence
//! - [`ladder`]: the inductive transformation type and well-formedness
//! - [`engine`]: execution, specification evaluation, verification
//! - [`certificate`]: proof traces, serialization, replay
//! - [`dsl`]: the `.mt` textual front end
//! - [`uml2sql`]: the bundled class-model-to-schema example
//! - [`generator`]: seeded random cases for self-checks

pub mod certificate;
pub mod contracts;
pub mod dsl;
pub mod engine;
pub mod generator;
pub mod instance;
pub mod ladder;
pub mod metamodel;
pub mod report;
pub mod uml2sql;
pub mod validation;

pub use certificate::{deserialize, replay, serialize, Certificate};
pub use engine::{eval_spec, execute, verify, Mode, Verdict};
pub use instance::{InstanceBuilder, ModelInstance, ObjectKey, ObjectRef};
pub use ladder::{base, join, step, well_formed, LadderT, OrderedTransformation};
pub use metamodel::{validate_metamodel, Metamodel};
pub use validation::ValidationReport;
