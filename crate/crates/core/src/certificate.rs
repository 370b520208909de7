//! Assembled proof traces: a fixed skeleton of quantifier and conjunction
//! nodes whose variable leaves are hole, commutativity, and link evidence.
//!
//! Certificates serialize to a versioned JSON document whose node shape is
//! stable across runs, which makes them diffable in golden tests and
//! tamper-evident under replay: [`replay`] re-derives the whole trace from
//! the transformation and the two instances and demands an exact match.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::HoleEvidence;
use crate::engine::{ComEvidence, LinkEvidence};
use crate::instance::{ModelInstance, ObjectRef};
use crate::ladder::OrderedTransformation;

pub const SCHEMA_VERSION: u32 = 1;

/// One node of the proof trace. Structural kinds carry children; leaf
/// kinds carry evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertNode {
    /// Finite ∀-introduction: one node per element of the quantifier
    /// domain.
    ForallSrc {
        class: String,
        src_key: ObjectRef,
        children: Vec<CertNode>,
    },
    /// ⇒-introduction recording the antecedent's value.
    ImplIntro {
        pre_value: bool,
        children: Vec<CertNode>,
    },
    /// ∃-introduction. `tgt_key` is the committed witness; `None` records
    /// a failed search.
    ExistsWitness {
        class: String,
        tgt_key: Option<ObjectRef>,
        children: Vec<CertNode>,
    },
    /// ∧-introduction.
    And { children: Vec<CertNode> },
    /// Join of two independently derived subtrees.
    Join {
        left: Box<CertNode>,
        right: Box<CertNode>,
    },
    /// A skipped element: the rung's precondition was false here.
    Vacuous { src_key: ObjectRef },
    /// Pre-implies-post evidence for one pair.
    Hole { evidence: HoleEvidence },
    /// Square-commutativity evidence for one rung application.
    Com { evidence: ComEvidence },
    /// Positional link evidence for one child.
    Link { evidence: LinkEvidence },
}

impl CertNode {
    pub fn children(&self) -> &[CertNode] {
        match self {
            CertNode::ForallSrc { children, .. }
            | CertNode::ImplIntro { children, .. }
            | CertNode::ExistsWitness { children, .. }
            | CertNode::And { children } => children,
            _ => &[],
        }
    }

    /// Conjunction of every leaf verdict under this node.
    pub fn holds(&self) -> bool {
        match self {
            CertNode::ExistsWitness {
                tgt_key, children, ..
            } => tgt_key.is_some() && children.iter().all(|c| c.holds()),
            CertNode::Join { left, right } => left.holds() && right.holds(),
            CertNode::Vacuous { .. } => true,
            CertNode::Hole { evidence } => evidence.holds(),
            CertNode::Com { evidence } => evidence.equal,
            CertNode::Link { evidence } => evidence.ok,
            _ => self.children().iter().all(|c| c.holds()),
        }
    }

    fn count(&self) -> usize {
        let mut n = 0;
        self.for_each(&mut |_| n += 1);
        n
    }

    /// Visits every node in traversal order.
    pub fn for_each(&self, f: &mut impl FnMut(&CertNode)) {
        f(self);
        match self {
            CertNode::Join { left, right } => {
                left.for_each(f);
                right.for_each(f);
            }
            other => {
                for child in other.children() {
                    child.for_each(f);
                }
            }
        }
    }
}

/// A complete, replayable proof trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub transformation: String,
    pub root: CertNode,
}

impl Certificate {
    pub fn new(transformation: impl Into<String>, root: CertNode) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION,
            transformation: transformation.into(),
            root,
        }
    }

    pub fn holds(&self) -> bool {
        self.root.holds()
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("malformed certificate: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u32),
}

/// Canonical serialization: pretty JSON with fields in declaration order
/// and subtrees in traversal order. Byte-identical across runs.
pub fn serialize(cert: &Certificate) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(cert).expect("certificates always serialize");
    bytes.push(b'\n');
    bytes
}

pub fn deserialize(bytes: &[u8]) -> Result<Certificate, CertificateError> {
    let cert: Certificate = serde_json::from_slice(bytes)?;
    if cert.schema_version != SCHEMA_VERSION {
        return Err(CertificateError::UnsupportedVersion(cert.schema_version));
    }
    Ok(cert)
}

/// Result of replaying a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub ok: bool,
    /// Path to the first node where the recorded trace diverges from the
    /// recomputed one, when there is one.
    pub divergence: Option<String>,
}

/// Re-derives every leaf from scratch and compares. Returns `ok` only when
/// the recorded trace matches the recomputation exactly and its
/// conjunction holds.
pub fn replay(
    cert: &Certificate,
    ot: &OrderedTransformation,
    src: &ModelInstance,
    tgt: &ModelInstance,
) -> ReplayOutcome {
    let recomputed = match crate::engine::derive(ot, src, tgt, crate::engine::Mode::Constructive) {
        Ok(v) => v.trace,
        Err(e) => {
            return ReplayOutcome {
                ok: false,
                divergence: Some(format!("re-derivation failed: {e}")),
            }
        }
    };
    if cert.schema_version != recomputed.schema_version {
        return ReplayOutcome {
            ok: false,
            divergence: Some("schema_version".to_string()),
        };
    }
    if cert.transformation != recomputed.transformation {
        return ReplayOutcome {
            ok: false,
            divergence: Some("transformation".to_string()),
        };
    }
    if let Some(path) = first_divergence(&cert.root, &recomputed.root, "root") {
        return ReplayOutcome {
            ok: false,
            divergence: Some(path),
        };
    }
    if !cert.holds() {
        return ReplayOutcome {
            ok: false,
            divergence: Some("conjunction does not hold".to_string()),
        };
    }
    ReplayOutcome {
        ok: true,
        divergence: None,
    }
}

fn first_divergence(recorded: &CertNode, recomputed: &CertNode, path: &str) -> Option<String> {
    let label = |n: &CertNode| -> &'static str {
        match n {
            CertNode::ForallSrc { .. } => "forall_src",
            CertNode::ImplIntro { .. } => "impl_intro",
            CertNode::ExistsWitness { .. } => "exists_witness",
            CertNode::And { .. } => "and",
            CertNode::Join { .. } => "join",
            CertNode::Vacuous { .. } => "vacuous",
            CertNode::Hole { .. } => "hole",
            CertNode::Com { .. } => "com",
            CertNode::Link { .. } => "link",
        }
    };
    if label(recorded) != label(recomputed) {
        return Some(format!(
            "{path}: {} vs {}",
            label(recorded),
            label(recomputed)
        ));
    }
    match (recorded, recomputed) {
        (
            CertNode::Join {
                left: l1,
                right: r1,
            },
            CertNode::Join {
                left: l2,
                right: r2,
            },
        ) => first_divergence(l1, l2, &format!("{path}/join.left"))
            .or_else(|| first_divergence(r1, r2, &format!("{path}/join.right"))),
        (a, b) => {
            // Compare the node's own fields first, then recurse.
            let strip = |n: &CertNode| -> CertNode {
                let mut c = n.clone();
                match &mut c {
                    CertNode::ForallSrc { children, .. }
                    | CertNode::ImplIntro { children, .. }
                    | CertNode::ExistsWitness { children, .. }
                    | CertNode::And { children } => children.clear(),
                    _ => {}
                }
                c
            };
            if strip(a) != strip(b) {
                return Some(format!("{path} ({})", label(a)));
            }
            let (ca, cb) = (a.children(), b.children());
            if ca.len() != cb.len() {
                return Some(format!("{path}: {} children vs {}", ca.len(), cb.len()));
            }
            for (i, (x, y)) in ca.iter().zip(cb).enumerate() {
                if let Some(found) = first_divergence(x, y, &format!("{path}/{}[{i}]", label(x))) {
                    return Some(found);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ObjectRef;

    fn tiny_cert() -> Certificate {
        Certificate::new(
            "t",
            CertNode::And {
                children: vec![CertNode::Vacuous {
                    src_key: ObjectRef::new("A", 1),
                }],
            },
        )
    }

    #[test]
    fn round_trip_identity() {
        let cert = tiny_cert();
        let bytes = serialize(&cert);
        assert_eq!(deserialize(&bytes).unwrap(), cert);
    }

    #[test]
    fn serialize_is_deterministic() {
        let cert = tiny_cert();
        assert_eq!(serialize(&cert), serialize(&cert));
    }

    #[test]
    fn truncated_bytes_error() {
        let bytes = serialize(&tiny_cert());
        assert!(deserialize(&bytes[..bytes.len() / 2]).is_err());
    }

    #[test]
    fn unknown_schema_version_is_rejected() {
        let mut cert = tiny_cert();
        cert.schema_version = 99;
        let bytes = serde_json::to_vec(&cert).unwrap();
        assert!(matches!(
            deserialize(&bytes),
            Err(CertificateError::UnsupportedVersion(99))
        ));
    }

    #[test]
    fn vacuous_nodes_hold() {
        assert!(tiny_cert().holds());
    }
}
