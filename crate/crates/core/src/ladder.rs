//! The inductive transformation type and the top-level transformation
//! package.
//!
//! A [`LadderT`] value is built from three constructors: [`base`] starts a
//! ladder with a single child rung, [`step`] extends a ladder upward by one
//! rung, and [`join`] merges two ladders that share a root. Every node
//! carries the [`LadderIndex`] it presumes (root source class, root target
//! class, root mapping), so index agreement between constructors
//! is checkable locally. The root contract itself lives outside the
//! construction, in [`OrderedTransformation`].

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

use crate::contracts::{check_expr_scope, check_map, MapExpr, Rung};
use crate::metamodel::{validate_metamodel, Metamodel};
use crate::validation::ValidationReport;

/// The `(X, Y, f)` triple a ladder node is indexed by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderIndex {
    pub src_class: String,
    pub tgt_class: String,
    pub map: MapExpr,
}

impl LadderIndex {
    pub fn of_rung(rung: &Rung) -> Self {
        LadderIndex {
            src_class: rung.src_class.clone(),
            tgt_class: rung.tgt_class.clone(),
            map: rung.map.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderNode {
    Base {
        child: Rung,
        src_rel: String,
        tgt_rel: String,
    },
    Step {
        child: Rung,
        src_rel: String,
        tgt_rel: String,
        rest: Box<LadderT>,
    },
    Join {
        left: Box<LadderT>,
        right: Box<LadderT>,
    },
}

/// A transformation body: one of Base/Step/Join together with the index it
/// presumes of its enclosing context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderT {
    pub index: LadderIndex,
    pub node: LadderNode,
}

#[derive(Debug, Error)]
pub enum LadderError {
    #[error("relationship {relationship} is not declared on class {class}")]
    UndeclaredRelationship { class: String, relationship: String },
    #[error(
        "relationship {src_rel} targets {src_target}, but the child rung starts at {expected}"
    )]
    SourceRelationshipMismatch {
        src_rel: String,
        src_target: String,
        expected: String,
    },
    #[error("relationship {tgt_rel} targets {tgt_target}, but the child rung ends at {expected}")]
    TargetRelationshipMismatch {
        tgt_rel: String,
        tgt_target: String,
        expected: String,
    },
    #[error("relationships {src_rel} and {tgt_rel} have mismatched multiplicities")]
    MultiplicityMismatch { src_rel: String, tgt_rel: String },
    #[error("nested ladder is rooted at {found:?}, expected the child rung {expected:?}")]
    IndexMismatch {
        expected: Box<LadderIndex>,
        found: Box<LadderIndex>,
    },
    #[error("joined ladders have different indices")]
    JoinIndexMismatch,
    #[error("rung {0}: map target class {1} differs from rung target class {2}")]
    MapTargetMismatch(String, String, String),
}

fn check_rung_shape(
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    index: &LadderIndex,
    child: &Rung,
    src_rel: &str,
    tgt_rel: &str,
) -> Result<(), LadderError> {
    if child.map.target_class != child.tgt_class {
        return Err(LadderError::MapTargetMismatch(
            child.name.clone(),
            child.map.target_class.clone(),
            child.tgt_class.clone(),
        ));
    }
    let r = src_mm
        .relationship(&index.src_class, src_rel)
        .ok_or_else(|| LadderError::UndeclaredRelationship {
            class: index.src_class.clone(),
            relationship: src_rel.to_string(),
        })?;
    let s = tgt_mm
        .relationship(&index.tgt_class, tgt_rel)
        .ok_or_else(|| LadderError::UndeclaredRelationship {
            class: index.tgt_class.clone(),
            relationship: tgt_rel.to_string(),
        })?;
    if r.target_class != child.src_class {
        return Err(LadderError::SourceRelationshipMismatch {
            src_rel: src_rel.to_string(),
            src_target: r.target_class.clone(),
            expected: child.src_class.clone(),
        });
    }
    if s.target_class != child.tgt_class {
        return Err(LadderError::TargetRelationshipMismatch {
            tgt_rel: tgt_rel.to_string(),
            tgt_target: s.target_class.clone(),
            expected: child.tgt_class.clone(),
        });
    }
    if r.multiplicity != s.multiplicity {
        return Err(LadderError::MultiplicityMismatch {
            src_rel: src_rel.to_string(),
            tgt_rel: tgt_rel.to_string(),
        });
    }
    Ok(())
}

/// Starts a ladder: a single child rung reached from the index classes via
/// `src_rel` / `tgt_rel`.
pub fn base(
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    index: LadderIndex,
    child: Rung,
    src_rel: &str,
    tgt_rel: &str,
) -> Result<LadderT, LadderError> {
    check_rung_shape(src_mm, tgt_mm, &index, &child, src_rel, tgt_rel)?;
    Ok(LadderT {
        index,
        node: LadderNode::Base {
            child,
            src_rel: src_rel.to_string(),
            tgt_rel: tgt_rel.to_string(),
        },
    })
}

/// Extends a ladder upward: `rest` must be rooted at exactly the child
/// rung being added.
pub fn step(
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    index: LadderIndex,
    child: Rung,
    src_rel: &str,
    tgt_rel: &str,
    rest: LadderT,
) -> Result<LadderT, LadderError> {
    check_rung_shape(src_mm, tgt_mm, &index, &child, src_rel, tgt_rel)?;
    let expected = LadderIndex::of_rung(&child);
    if rest.index != expected {
        return Err(LadderError::IndexMismatch {
            expected: Box::new(expected),
            found: Box::new(rest.index),
        });
    }
    Ok(LadderT {
        index,
        node: LadderNode::Step {
            child,
            src_rel: src_rel.to_string(),
            tgt_rel: tgt_rel.to_string(),
            rest: Box::new(rest),
        },
    })
}

/// Merges two ladders sharing a root.
pub fn join(left: LadderT, right: LadderT) -> Result<LadderT, LadderError> {
    if left.index != right.index {
        return Err(LadderError::JoinIndexMismatch);
    }
    Ok(LadderT {
        index: left.index.clone(),
        node: LadderNode::Join {
            left: Box::new(left),
            right: Box::new(right),
        },
    })
}

impl LadderT {
    /// Rung applications directly under this node, across join branching.
    /// Each entry is `(child rung, src_rel, tgt_rel, nested ladder)`.
    pub fn applications(&self) -> Vec<(&Rung, &str, &str, Option<&LadderT>)> {
        match &self.node {
            LadderNode::Base {
                child,
                src_rel,
                tgt_rel,
            } => vec![(child, src_rel, tgt_rel, None)],
            LadderNode::Step {
                child,
                src_rel,
                tgt_rel,
                rest,
            } => {
                vec![(child, src_rel, tgt_rel, Some(rest))]
            }
            LadderNode::Join { left, right } => {
                let mut out = left.applications();
                out.extend(right.applications());
                out
            }
        }
    }

    /// All rungs in the ladder, preorder, without deduplication.
    pub fn rungs(&self) -> Vec<&Rung> {
        let mut out = Vec::new();
        self.collect_rungs(&mut out);
        out
    }

    fn collect_rungs<'a>(&'a self, out: &mut Vec<&'a Rung>) {
        match &self.node {
            LadderNode::Base { child, .. } => out.push(child),
            LadderNode::Step { child, rest, .. } => {
                out.push(child);
                rest.collect_rungs(out);
            }
            LadderNode::Join { left, right } => {
                left.collect_rungs(out);
                right.collect_rungs(out);
            }
        }
    }

    /// Canonical textual form: `base(rung via r/s)`, `step(rung via r/s,
    /// rest)`, `join(l, r)`.
    pub fn render(&self) -> String {
        match &self.node {
            LadderNode::Base {
                child,
                src_rel,
                tgt_rel,
            } => {
                format!("base({} via {}/{})", child.name, src_rel, tgt_rel)
            }
            LadderNode::Step {
                child,
                src_rel,
                tgt_rel,
                rest,
            } => {
                format!(
                    "step({} via {}/{}, {})",
                    child.name,
                    src_rel,
                    tgt_rel,
                    rest.render()
                )
            }
            LadderNode::Join { left, right } => {
                format!("join({}, {})", left.render(), right.render())
            }
        }
    }
}

/// A complete ordered transformation: both metamodels, the root contract
/// (which the inductive construction deliberately excludes), and the body.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedTransformation {
    pub name: String,
    pub src_mm: Arc<Metamodel>,
    pub tgt_mm: Arc<Metamodel>,
    pub root_rung: Rung,
    pub body: LadderT,
}

impl OrderedTransformation {
    /// Source classes some rung of this transformation maps.
    pub fn mapped_source_classes(&self) -> Vec<String> {
        let mut out = vec![self.root_rung.src_class.clone()];
        for rung in self.body.rungs() {
            if !out.contains(&rung.src_class) {
                out.push(rung.src_class.clone());
            }
        }
        out
    }

    /// Declared source classes no rung maps, in declaration order.
    pub fn unmapped_source_classes(&self) -> Vec<String> {
        let mapped = self.mapped_source_classes();
        self.src_mm
            .classes
            .iter()
            .map(|c| c.name.clone())
            .filter(|c| !mapped.contains(c))
            .collect()
    }
}

/// Re-checks every structural invariant of an ordered transformation
/// against its metamodels, regardless of how it was constructed.
pub fn well_formed(ot: &OrderedTransformation) -> ValidationReport {
    let mut report = ValidationReport::default();

    let src_report = validate_metamodel(&ot.src_mm);
    if !src_report.is_ok() {
        for v in src_report.violations {
            report.violation(format!("source metamodel: {v}"));
        }
    }
    let tgt_report = validate_metamodel(&ot.tgt_mm);
    if !tgt_report.is_ok() {
        for v in tgt_report.violations {
            report.violation(format!("target metamodel: {v}"));
        }
    }

    if ot.root_rung.src_class != ot.src_mm.root_class {
        report.violation(format!(
            "root rung starts at {}, but the source root class is {}",
            ot.root_rung.src_class, ot.src_mm.root_class
        ));
    }
    if ot.root_rung.tgt_class != ot.tgt_mm.root_class {
        report.violation(format!(
            "root rung ends at {}, but the target root class is {}",
            ot.root_rung.tgt_class, ot.tgt_mm.root_class
        ));
    }
    if ot.body.index != LadderIndex::of_rung(&ot.root_rung) {
        report.violation("ladder index does not match the root rung".to_string());
    }

    check_rung_contract(&ot.root_rung, &ot.src_mm, &ot.tgt_mm, &mut report);
    check_node(&ot.body, &ot.src_mm, &ot.tgt_mm, &mut report);

    for class in ot.unmapped_source_classes() {
        report.warning(format!("source class {class} is not mapped by any rung"));
    }

    report
}

fn check_rung_contract(
    rung: &Rung,
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    report: &mut ValidationReport,
) {
    let ctx = format!("rung {}", rung.name);
    if src_mm.class(&rung.src_class).is_none() {
        report.violation(format!("{ctx}: undeclared source class {}", rung.src_class));
    }
    if tgt_mm.class(&rung.tgt_class).is_none() {
        report.violation(format!("{ctx}: undeclared target class {}", rung.tgt_class));
    }
    if rung.pre.mentions_tgt() {
        report.violation(format!("{ctx}: precondition mentions tgt"));
    }
    check_expr_scope(
        &rung.pre,
        Some(&rung.src_class),
        None,
        src_mm,
        tgt_mm,
        &format!("{ctx} pre"),
        report,
    );
    check_expr_scope(
        &rung.post_data,
        Some(&rung.src_class),
        Some(&rung.tgt_class),
        src_mm,
        tgt_mm,
        &format!("{ctx} post"),
        report,
    );
    if rung.map.target_class != rung.tgt_class {
        report.violation(format!(
            "{ctx}: map targets {} but the rung ends at {}",
            rung.map.target_class, rung.tgt_class
        ));
    }
    check_map(
        &rung.map,
        &rung.src_class,
        src_mm,
        tgt_mm,
        &format!("{ctx} map"),
        report,
    );
}

fn check_node(
    node: &LadderT,
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    report: &mut ValidationReport,
) {
    // Sibling rung applications (gathered across joins) must claim
    // distinct target relationships; otherwise two branches would
    // interleave children in one list and positional links would be
    // ambiguous.
    let apps = node.applications();
    for (i, (_, _, s1, _)) in apps.iter().enumerate() {
        for (_, _, s2, _) in apps.iter().skip(i + 1) {
            if s1 == s2 {
                report.violation(format!(
                    "two rung applications under {} both link via {}",
                    node.index.tgt_class, s1
                ));
            }
        }
    }
    check_node_inner(node, src_mm, tgt_mm, report);
}

fn check_node_inner(
    node: &LadderT,
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    report: &mut ValidationReport,
) {
    match &node.node {
        LadderNode::Base {
            child,
            src_rel,
            tgt_rel,
        } => {
            if let Err(e) = check_rung_shape(src_mm, tgt_mm, &node.index, child, src_rel, tgt_rel) {
                report.violation(format!("rung {}: {e}", child.name));
            }
            check_rung_contract(child, src_mm, tgt_mm, report);
        }
        LadderNode::Step {
            child,
            src_rel,
            tgt_rel,
            rest,
        } => {
            if let Err(e) = check_rung_shape(src_mm, tgt_mm, &node.index, child, src_rel, tgt_rel) {
                report.violation(format!("rung {}: {e}", child.name));
            }
            check_rung_contract(child, src_mm, tgt_mm, report);
            if rest.index != LadderIndex::of_rung(child) {
                report.violation(format!(
                    "nested ladder under rung {} has a mismatched index",
                    child.name
                ));
            }
            check_node(rest, src_mm, tgt_mm, report);
        }
        LadderNode::Join { left, right } => {
            if left.index != node.index || right.index != node.index {
                report.violation("join branches disagree on the index".to_string());
            }
            check_node_inner(left, src_mm, tgt_mm, report);
            check_node_inner(right, src_mm, tgt_mm, report);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::Expr;
    use crate::metamodel::{ClassSchema, Multiplicity};

    // Three-runged totally ordered shape: A -> P over B -> Q over C -> R.
    fn mms() -> (Arc<Metamodel>, Arc<Metamodel>) {
        let src = Arc::new(
            Metamodel::new("src", "A")
                .with_class(ClassSchema::new("A").with_relationship("r1", "B", Multiplicity::Many))
                .with_class(ClassSchema::new("B").with_relationship("r2", "C", Multiplicity::Many))
                .with_class(ClassSchema::new("C")),
        );
        let tgt = Arc::new(
            Metamodel::new("tgt", "P")
                .with_class(ClassSchema::new("P").with_relationship("s1", "Q", Multiplicity::Many))
                .with_class(ClassSchema::new("Q").with_relationship("s2", "R", Multiplicity::Many))
                .with_class(ClassSchema::new("R")),
        );
        (src, tgt)
    }

    fn three_runged() -> OrderedTransformation {
        let (src, tgt) = mms();
        let root = Rung::copy_id("a2p", "A", "P");
        let b2q = Rung::copy_id("b2q", "B", "Q");
        let c2r = Rung::copy_id("c2r", "C", "R");
        let t_bq = base(&src, &tgt, LadderIndex::of_rung(&b2q), c2r, "r2", "s2").unwrap();
        let t_ap = step(
            &src,
            &tgt,
            LadderIndex::of_rung(&root),
            b2q,
            "r1",
            "s1",
            t_bq,
        )
        .unwrap();
        OrderedTransformation {
            name: "abc".into(),
            src_mm: src,
            tgt_mm: tgt,
            root_rung: root,
            body: t_ap,
        }
    }

    #[test]
    fn base_then_step_builds_the_three_runged_ladder() {
        let ot = three_runged();
        assert_eq!(ot.body.render(), "step(b2q via r1/s1, base(c2r via r2/s2))");
        assert!(well_formed(&ot).is_ok());
    }

    #[test]
    fn multiplicity_mismatch_is_rejected() {
        let src = Metamodel::new("src", "A")
            .with_class(ClassSchema::new("A").with_relationship("r1", "B", Multiplicity::Many))
            .with_class(ClassSchema::new("B"));
        let tgt = Metamodel::new("tgt", "P")
            .with_class(ClassSchema::new("P").with_relationship("s1", "Q", Multiplicity::One))
            .with_class(ClassSchema::new("Q"));
        let root = Rung::copy_id("a2p", "A", "P");
        let err = base(
            &src,
            &tgt,
            LadderIndex::of_rung(&root),
            Rung::copy_id("b2q", "B", "Q"),
            "r1",
            "s1",
        );
        assert!(matches!(err, Err(LadderError::MultiplicityMismatch { .. })));
    }

    #[test]
    fn step_with_mismatched_rest_is_rejected() {
        let (src, tgt) = mms();
        let root = Rung::copy_id("a2p", "A", "P");
        let b2q = Rung::copy_id("b2q", "B", "Q");
        let c2r = Rung::copy_id("c2r", "C", "R");
        // rest rooted at the root instead of at b2q
        let bad_rest = base(
            &src,
            &tgt,
            LadderIndex::of_rung(&root),
            b2q.clone(),
            "r1",
            "s1",
        )
        .unwrap();
        let err = step(
            &src,
            &tgt,
            LadderIndex::of_rung(&root),
            b2q,
            "r1",
            "s1",
            bad_rest,
        );
        assert!(matches!(err, Err(LadderError::IndexMismatch { .. })));
        let _ = c2r;
    }

    #[test]
    fn join_requires_equal_indices() {
        let (src, tgt) = mms();
        let root = Rung::copy_id("a2p", "A", "P");
        let b2q = Rung::copy_id("b2q", "B", "Q");
        let c2r = Rung::copy_id("c2r", "C", "R");
        let at_root = base(
            &src,
            &tgt,
            LadderIndex::of_rung(&root),
            b2q.clone(),
            "r1",
            "s1",
        )
        .unwrap();
        let at_b = base(&src, &tgt, LadderIndex::of_rung(&b2q), c2r, "r2", "s2").unwrap();
        assert!(matches!(
            join(at_root.clone(), at_b),
            Err(LadderError::JoinIndexMismatch)
        ));
        // Joining a ladder with itself shares the index, though it would
        // later be rejected by well_formed for claiming s1 twice.
        assert!(join(at_root.clone(), at_root).is_ok());
    }

    #[test]
    fn join_branches_may_not_share_a_target_relationship() {
        let (src, tgt) = mms();
        let root = Rung::copy_id("a2p", "A", "P");
        let b2q = Rung::copy_id("b2q", "B", "Q");
        let branch = base(&src, &tgt, LadderIndex::of_rung(&root), b2q, "r1", "s1").unwrap();
        let body = join(branch.clone(), branch).unwrap();
        let ot = OrderedTransformation {
            name: "dup".into(),
            src_mm: src,
            tgt_mm: tgt,
            root_rung: root,
            body,
        };
        let report = well_formed(&ot);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("both link via s1")));
    }

    #[test]
    fn citing_a_target_side_relationship_on_the_source_side_is_a_violation() {
        let (src, tgt) = mms();
        let root = Rung::copy_id("a2p", "A", "P");
        let b2q = Rung::copy_id("b2q", "B", "Q");
        assert!(matches!(
            base(
                &src,
                &tgt,
                LadderIndex::of_rung(&root),
                b2q.clone(),
                "s1",
                "s1"
            ),
            Err(LadderError::UndeclaredRelationship { .. })
        ));
        // And through well_formed on a hand-assembled value.
        let body = LadderT {
            index: LadderIndex::of_rung(&root),
            node: LadderNode::Base {
                child: b2q,
                src_rel: "s1".into(),
                tgt_rel: "s1".into(),
            },
        };
        let ot = OrderedTransformation {
            name: "bad".into(),
            src_mm: src,
            tgt_mm: tgt,
            root_rung: root,
            body,
        };
        assert!(!well_formed(&ot).is_ok());
    }

    #[test]
    fn subterms_of_a_well_formed_ladder_are_well_formed() {
        let ot = three_runged();
        if let LadderNode::Step { child, rest, .. } = &ot.body.node {
            let sub = OrderedTransformation {
                name: "sub".into(),
                src_mm: Arc::new(
                    Metamodel::new("src", "B")
                        .with_class(ClassSchema::new("B").with_relationship(
                            "r2",
                            "C",
                            Multiplicity::Many,
                        ))
                        .with_class(ClassSchema::new("C")),
                ),
                tgt_mm: Arc::new(
                    Metamodel::new("tgt", "Q")
                        .with_class(ClassSchema::new("Q").with_relationship(
                            "s2",
                            "R",
                            Multiplicity::Many,
                        ))
                        .with_class(ClassSchema::new("R")),
                ),
                root_rung: child.clone(),
                body: (**rest).clone(),
            };
            assert!(well_formed(&sub).is_ok());
        } else {
            panic!("expected a step at the top");
        }
    }

    #[test]
    fn pre_mentioning_tgt_is_a_violation() {
        let mut ot = three_runged();
        ot.root_rung.pre = Expr::eq(Expr::SrcId, Expr::TgtId);
        let report = well_formed(&ot);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("precondition mentions tgt")));
    }
}
