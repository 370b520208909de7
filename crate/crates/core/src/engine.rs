//! Execution and verification of ordered transformations.
//!
//! Both directions share one traversal scheme. [`execute`] walks the source
//! in preorder, applies each rung's map to the children reached through the
//! rung's source relationship, and links the results into the target
//! relationship in matching positions. [`verify`] re-derives the same
//! proposition over a given source/target pair without constructing
//! anything, resolving existentials by scanning the target (witness-search
//! mode). The derivation always produces a [`Certificate`] whose leaves are
//! hole, commutativity, and link evidence.
//!
//! Many-valued relationships pair positionally: the i-th kept source child
//! corresponds to the i-th traversal-produced target child, offset by any
//! `first`-emitted objects of the parent map. A child whose precondition is
//! false is skipped entirely; target positions compact around it and the
//! trace records a vacuous node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{CertNode, Certificate};
use crate::contracts::{
    apply_map, check_hole, eval_pred, map_surface, ApplyError, EvalError, HoleEvidence,
    HoleVerdict, MapExpr, ObjectSurface, Placement, Rung,
};
use crate::instance::{InstanceBuilder, InstanceError, ModelInstance, ObjectKey, ObjectRef};
use crate::ladder::{well_formed, LadderNode, LadderT, OrderedTransformation};
use crate::validation::ValidationReport;

// ---------------------------------------------------------------------------
// Evidence and verdicts
// ---------------------------------------------------------------------------

/// How existential witnesses are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Take the target object in the position the traversal links to.
    /// This is the executor's own reading of the target.
    Constructive,
    /// Search the target's objects of the witness class in id order for
    /// the first one satisfying the postcondition and the link. This is
    /// the independent route that trusts nothing about how the target was
    /// built.
    WitnessSearch,
}

/// Evidence that one rung's square commutes at one parent object: mapping
/// the (kept) source children equals navigating the target relationship,
/// compared pointwise as `(class, id, flags)` values. Objects emitted by
/// the parent map into the same relationship appear in the expected list
/// in their placement positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComEvidence {
    pub rung: String,
    pub parent_src: ObjectRef,
    pub relationship: String,
    pub left: Vec<ObjectSurface>,
    pub right: Vec<ObjectSurface>,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Evidence that one child's existential witness sits at its expected
/// position in the parent's target relationship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEvidence {
    pub rung: String,
    pub child_src: ObjectRef,
    pub relationship: String,
    pub position: usize,
    pub witness: Option<ObjectRef>,
    pub ok: bool,
}

/// Which conjunct of the assembled proposition a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjunct {
    Pre,
    PostData,
    Link,
    Com,
}

impl std::fmt::Display for Conjunct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Conjunct::Pre => write!(f, "PRE"),
            Conjunct::PostData => write!(f, "POST_DATA"),
            Conjunct::Link => write!(f, "LINK"),
            Conjunct::Com => write!(f, "COM"),
        }
    }
}

/// One localized diagnostic: the rung, the conjunct, and the pair it
/// failed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub rung: String,
    pub conjunct: Conjunct,
    pub src: Option<ObjectRef>,
    pub tgt: Option<ObjectRef>,
    pub detail: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rung {} [{}]", self.rung, self.conjunct)?;
        if let Some(src) = &self.src {
            write!(f, " at {src}")?;
        }
        if let Some(tgt) = &self.tgt {
            write!(f, " / {tgt}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Outcome of a verification pass: the full trace plus localized
/// diagnostics. `holds` iff `failures` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub trace: Certificate,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("transformation is not well-formed:\n{0}")]
    NotWellFormed(ValidationReport),
    #[error("source instance is over metamodel {actual}, the transformation expects {expected}")]
    SourceMetamodelMismatch { expected: String, actual: String },
    #[error("target instance is over metamodel {actual}, the transformation expects {expected}")]
    TargetMetamodelMismatch { expected: String, actual: String },
    #[error("root precondition is false on {0}")]
    RootPreconditionFailed(ObjectRef),
    #[error("pair ({x}, {y}) does not match the ladder index {src_class} -> {tgt_class}")]
    IndexMismatch {
        x: ObjectRef,
        y: ObjectRef,
        src_class: String,
        tgt_class: String,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error("expression evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// The result of executing a transformation: the constructed target and
/// the verdict over it (whose trace is the certificate).
#[derive(Debug, Clone)]
pub struct Execution {
    pub target: ModelInstance,
    pub verdict: Verdict,
}

impl Execution {
    pub fn certificate(&self) -> &Certificate {
        &self.verdict.trace
    }
}

/// Executes `ot` on `src` by preorder traversal and derives the full
/// certificate over the constructed target.
///
/// Refuses to run when the transformation is ill-formed or the root
/// precondition is false; a rung whose contract fails on some pair still
/// constructs (the verdict reports the failure).
pub fn execute(ot: &OrderedTransformation, src: &ModelInstance) -> Result<Execution, EngineError> {
    let wf = well_formed(ot);
    if !wf.is_ok() {
        return Err(EngineError::NotWellFormed(wf));
    }
    if **src.metamodel() != *ot.src_mm {
        return Err(EngineError::SourceMetamodelMismatch {
            expected: ot.src_mm.name.clone(),
            actual: src.metamodel().name.clone(),
        });
    }

    let root_x = src.root();
    let root_node = src.object(root_x);
    if !eval_pred(&ot.root_rung.pre, Some(root_node), None)? {
        return Err(EngineError::RootPreconditionFailed(src.object_ref(root_x)));
    }

    let mut builder = InstanceBuilder::new(ot.tgt_mm.clone());
    let mapped = apply_map(&ot.root_rung.map, root_node, &mut builder)?;
    build_node(&ot.body, src, root_x, mapped.key, &mut builder)?;
    for (rel, key) in mapped.pending_last {
        builder.push_many(mapped.key, &rel, key)?;
    }
    let (target, _warnings) = builder.freeze(mapped.key)?;

    let verdict = derive(ot, src, &target, Mode::Constructive)?;
    Ok(Execution { target, verdict })
}

fn build_node(
    node: &LadderT,
    src: &ModelInstance,
    x: ObjectKey,
    y: ObjectKey,
    builder: &mut InstanceBuilder,
) -> Result<(), EngineError> {
    match &node.node {
        LadderNode::Join { left, right } => {
            build_node(left, src, x, y, builder)?;
            build_node(right, src, x, y, builder)?;
        }
        LadderNode::Base {
            child,
            src_rel,
            tgt_rel,
        } => {
            build_rung(child, src_rel, tgt_rel, None, src, x, y, builder)?;
        }
        LadderNode::Step {
            child,
            src_rel,
            tgt_rel,
            rest,
        } => {
            build_rung(child, src_rel, tgt_rel, Some(rest), src, x, y, builder)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_rung(
    child: &Rung,
    src_rel: &str,
    tgt_rel: &str,
    rest: Option<&LadderT>,
    src: &ModelInstance,
    x: ObjectKey,
    y: ObjectKey,
    builder: &mut InstanceBuilder,
) -> Result<(), EngineError> {
    for x_child in src.children(x, src_rel)? {
        if !eval_pred(&child.pre, Some(src.object(x_child)), None)? {
            continue; // skipped: nothing to construct, trace records vacuity
        }
        let mapped = apply_map(&child.map, src.object(x_child), builder)?;
        builder.link(y, tgt_rel, mapped.key)?;
        if let Some(rest) = rest {
            build_node(rest, src, x_child, mapped.key, builder)?;
        }
        for (rel, key) in mapped.pending_last {
            builder.push_many(mapped.key, &rel, key)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Checks a given source/target pair against the transformation without
/// constructing anything: root precondition, root data postcondition, and
/// the assembled proposition in witness-search mode.
pub fn verify(
    ot: &OrderedTransformation,
    src: &ModelInstance,
    tgt: &ModelInstance,
) -> Result<Verdict, EngineError> {
    derive(ot, src, tgt, Mode::WitnessSearch)
}

/// Derives the full proposition (root quantifier included) over a pair of
/// instances in the given mode. This is the single code path behind
/// [`execute`]'s certificate, [`verify`], and certificate replay.
pub fn derive(
    ot: &OrderedTransformation,
    src: &ModelInstance,
    tgt: &ModelInstance,
    mode: Mode,
) -> Result<Verdict, EngineError> {
    let wf = well_formed(ot);
    if !wf.is_ok() {
        return Err(EngineError::NotWellFormed(wf));
    }
    if **src.metamodel() != *ot.src_mm {
        return Err(EngineError::SourceMetamodelMismatch {
            expected: ot.src_mm.name.clone(),
            actual: src.metamodel().name.clone(),
        });
    }
    if **tgt.metamodel() != *ot.tgt_mm {
        return Err(EngineError::TargetMetamodelMismatch {
            expected: ot.tgt_mm.name.clone(),
            actual: tgt.metamodel().name.clone(),
        });
    }

    let mut ev = Evaluator {
        src,
        tgt,
        mode,
        failures: Vec::new(),
    };
    let mut top = Vec::new();
    for x in src.objects_of(&ot.src_mm.root_class)? {
        top.push(ev.eval_root(&ot.root_rung, &ot.body, x));
    }
    let trace = Certificate::new(ot.name.clone(), CertNode::And { children: top });
    debug_assert_eq!(trace.holds(), ev.failures.is_empty());
    Ok(Verdict {
        holds: ev.failures.is_empty(),
        trace,
        failures: ev.failures,
    })
}

/// Evaluates the proposition a ladder slice assembles, at a concrete pair
/// typed by the slice's index.
pub fn eval_spec(
    body: &LadderT,
    x: ObjectKey,
    y: ObjectKey,
    src: &ModelInstance,
    tgt: &ModelInstance,
    mode: Mode,
) -> Result<Verdict, EngineError> {
    if src.object(x).class_name != body.index.src_class
        || tgt.object(y).class_name != body.index.tgt_class
    {
        return Err(EngineError::IndexMismatch {
            x: src.object_ref(x),
            y: tgt.object_ref(y),
            src_class: body.index.src_class.clone(),
            tgt_class: body.index.tgt_class.clone(),
        });
    }
    let mut ev = Evaluator {
        src,
        tgt,
        mode,
        failures: Vec::new(),
    };
    let node = ev.eval_node(body, x, y);
    let name = format!("spec {} -> {}", body.index.src_class, body.index.tgt_class);
    let trace = Certificate::new(name, node);
    debug_assert_eq!(trace.holds(), ev.failures.is_empty());
    Ok(Verdict {
        holds: ev.failures.is_empty(),
        trace,
        failures: ev.failures,
    })
}

/// Computes commutativity evidence for one rung application: the parent
/// map's emits plus the child map over the precondition-filtered source
/// children, against the target-side navigation.
#[allow(clippy::too_many_arguments)]
pub fn check_com(
    parent_map: &MapExpr,
    child: &Rung,
    src_rel: &str,
    tgt_rel: &str,
    x: ObjectKey,
    y: ObjectKey,
    src: &ModelInstance,
    tgt: &ModelInstance,
) -> ComEvidence {
    let ev = Evaluator {
        src,
        tgt,
        mode: Mode::WitnessSearch,
        failures: Vec::new(),
    };
    let kept = match src.children(x, src_rel) {
        Ok(children) => children
            .into_iter()
            .filter(|k| eval_pred(&child.pre, Some(src.object(*k)), None).unwrap_or(false))
            .collect(),
        Err(_) => Vec::new(),
    };
    ev.com_evidence(parent_map, child, tgt_rel, x, y, &kept)
}

// ---------------------------------------------------------------------------
// The evaluator
// ---------------------------------------------------------------------------

struct Evaluator<'a> {
    src: &'a ModelInstance,
    tgt: &'a ModelInstance,
    mode: Mode,
    failures: Vec<Failure>,
}

impl<'a> Evaluator<'a> {
    fn fail(
        &mut self,
        rung: &str,
        conjunct: Conjunct,
        src: Option<ObjectRef>,
        tgt: Option<ObjectRef>,
        detail: impl Into<String>,
    ) {
        self.failures.push(Failure {
            rung: rung.to_string(),
            conjunct,
            src,
            tgt,
            detail: detail.into(),
        });
    }

    /// Root quantifier: `forall x of the root class, pre x implies exists
    /// y with post x y and the nested proposition`.
    fn eval_root(&mut self, root: &Rung, body: &LadderT, x: ObjectKey) -> CertNode {
        let x_ref = self.src.object_ref(x);
        let x_node = self.src.object(x);
        let pre = match eval_pred(&root.pre, Some(x_node), None) {
            Ok(v) => v,
            Err(e) => {
                self.fail(
                    &root.name,
                    Conjunct::Pre,
                    Some(x_ref.clone()),
                    None,
                    format!("precondition evaluation failed: {e}"),
                );
                return forall(
                    x_node.class_name.clone(),
                    x_ref.clone(),
                    vec![CertNode::ImplIntro {
                        pre_value: false,
                        children: vec![CertNode::Hole {
                            evidence: failed_hole(
                                &root.name,
                                x_ref,
                                None,
                                format!("precondition evaluation failed: {e}"),
                            ),
                        }],
                    }],
                );
            }
        };
        if !pre {
            // No obligation: implication with a false antecedent.
            return forall(
                x_node.class_name.clone(),
                x_ref.clone(),
                vec![CertNode::ImplIntro {
                    pre_value: false,
                    children: vec![CertNode::Vacuous { src_key: x_ref }],
                }],
            );
        }

        let witness = match self.mode {
            Mode::Constructive => {
                if x == self.src.root() {
                    Some(self.tgt.root())
                } else {
                    None
                }
            }
            Mode::WitnessSearch => self
                .tgt
                .objects_of(&root.tgt_class)
                .unwrap_or_default()
                .into_iter()
                .find(|w| {
                    eval_pred(&root.post_data, Some(x_node), Some(self.tgt.object(*w)))
                        .unwrap_or(false)
                }),
        };

        let exists = match witness {
            None => {
                self.fail(
                    &root.name,
                    Conjunct::PostData,
                    Some(x_ref.clone()),
                    None,
                    format!(
                        "no object of class {} satisfies the root postcondition",
                        root.tgt_class
                    ),
                );
                CertNode::ExistsWitness {
                    class: root.tgt_class.clone(),
                    tgt_key: None,
                    children: vec![],
                }
            }
            Some(y) => {
                let hole = check_hole(root, x, y, self.src, self.tgt);
                self.record_hole(&hole);
                let nested = self.eval_node(body, x, y);
                CertNode::ExistsWitness {
                    class: root.tgt_class.clone(),
                    tgt_key: Some(self.tgt.object_ref(y)),
                    children: vec![CertNode::Hole { evidence: hole }, nested],
                }
            }
        };
        forall(
            x_node.class_name.clone(),
            x_ref,
            vec![CertNode::ImplIntro {
                pre_value: true,
                children: vec![exists],
            }],
        )
    }

    fn eval_node(&mut self, node: &LadderT, x: ObjectKey, y: ObjectKey) -> CertNode {
        match &node.node {
            LadderNode::Join { left, right } => CertNode::Join {
                left: Box::new(self.eval_node(left, x, y)),
                right: Box::new(self.eval_node(right, x, y)),
            },
            LadderNode::Base {
                child,
                src_rel,
                tgt_rel,
            } => self.eval_rung(&node.index.map, child, src_rel, tgt_rel, x, y, None),
            LadderNode::Step {
                child,
                src_rel,
                tgt_rel,
                rest,
            } => self.eval_rung(&node.index.map, child, src_rel, tgt_rel, x, y, Some(rest)),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn eval_rung(
        &mut self,
        parent_map: &MapExpr,
        child: &Rung,
        src_rel: &str,
        tgt_rel: &str,
        x: ObjectKey,
        y: ObjectKey,
        rest: Option<&LadderT>,
    ) -> CertNode {
        let x_ref = self.src.object_ref(x);
        let y_ref = self.tgt.object_ref(y);

        let src_children = match self.src.children(x, src_rel) {
            Ok(v) => v,
            Err(e) => {
                self.fail(
                    &child.name,
                    Conjunct::Link,
                    Some(x_ref.clone()),
                    Some(y_ref.clone()),
                    format!("source navigation failed: {e}"),
                );
                Vec::new()
            }
        };
        let tgt_list = match self.tgt.children(y, tgt_rel) {
            Ok(v) => v,
            Err(e) => {
                self.fail(
                    &child.name,
                    Conjunct::Link,
                    Some(x_ref.clone()),
                    Some(y_ref.clone()),
                    format!("target navigation failed: {e}"),
                );
                Vec::new()
            }
        };
        let n_first = parent_map.emits_into(tgt_rel, Placement::First).len();

        // Precondition pass over the guarded domain.
        let mut pres: Vec<Result<bool, EvalError>> = Vec::with_capacity(src_children.len());
        for &x_child in &src_children {
            pres.push(eval_pred(&child.pre, Some(self.src.object(x_child)), None));
        }
        let kept: Vec<ObjectKey> = src_children
            .iter()
            .zip(&pres)
            .filter(|(_, p)| matches!(p, Ok(true)))
            .map(|(k, _)| *k)
            .collect();

        let mut children_nodes = Vec::new();
        let mut kept_index = 0usize;
        for (&x_child, pre) in src_children.iter().zip(&pres) {
            let child_ref = self.src.object_ref(x_child);
            let node = match pre {
                Err(e) => {
                    self.fail(
                        &child.name,
                        Conjunct::Pre,
                        Some(child_ref.clone()),
                        None,
                        format!("precondition evaluation failed: {e}"),
                    );
                    forall(
                        child.src_class.clone(),
                        child_ref.clone(),
                        vec![CertNode::ImplIntro {
                            pre_value: false,
                            children: vec![CertNode::Hole {
                                evidence: failed_hole(
                                    &child.name,
                                    child_ref,
                                    None,
                                    format!("precondition evaluation failed: {e}"),
                                ),
                            }],
                        }],
                    )
                }
                Ok(false) => forall(
                    child.src_class.clone(),
                    child_ref.clone(),
                    vec![CertNode::ImplIntro {
                        pre_value: false,
                        children: vec![CertNode::Vacuous { src_key: child_ref }],
                    }],
                ),
                Ok(true) => {
                    let position = n_first + kept_index;
                    kept_index += 1;
                    let exists =
                        self.eval_child(child, tgt_rel, x_child, position, &tgt_list, rest);
                    forall(
                        child.src_class.clone(),
                        child_ref,
                        vec![CertNode::ImplIntro {
                            pre_value: true,
                            children: vec![exists],
                        }],
                    )
                }
            };
            children_nodes.push(node);
        }

        // Square commutativity for this rung application, checked last so
        // the per-pair hole evidence leads the trace.
        let com = self.com_evidence(parent_map, child, tgt_rel, x, y, &kept);
        if !com.equal {
            let detail = com.diagnostic.clone().unwrap_or_else(|| {
                format!(
                    "expected {} via {}, found {}",
                    render_surfaces(&com.left),
                    tgt_rel,
                    render_surfaces(&com.right)
                )
            });
            self.fail(&child.name, Conjunct::Com, Some(x_ref), Some(y_ref), detail);
        }
        children_nodes.push(CertNode::Com { evidence: com });

        CertNode::And {
            children: children_nodes,
        }
    }

    /// Existential for one kept child: commit a witness, check the data
    /// postcondition and the positional link, then recurse.
    fn eval_child(
        &mut self,
        child: &Rung,
        tgt_rel: &str,
        x_child: ObjectKey,
        position: usize,
        tgt_list: &[ObjectKey],
        rest: Option<&LadderT>,
    ) -> CertNode {
        let child_ref = self.src.object_ref(x_child);
        let pinned = tgt_list.get(position).copied();

        let committed = match self.mode {
            Mode::Constructive => pinned,
            Mode::WitnessSearch => {
                let searched = self
                    .tgt
                    .objects_of(&child.tgt_class)
                    .unwrap_or_default()
                    .into_iter()
                    .find(|w| {
                        Some(*w) == pinned
                            && eval_pred(
                                &child.post_data,
                                Some(self.src.object(x_child)),
                                Some(self.tgt.object(*w)),
                            )
                            .unwrap_or(false)
                    });
                // When the search comes up empty but a linked object sits
                // at the position, commit to it so the hole records the
                // postcondition failure with the concrete pair.
                searched.or(pinned)
            }
        };

        match committed {
            None => {
                let link = LinkEvidence {
                    rung: child.name.clone(),
                    child_src: child_ref.clone(),
                    relationship: tgt_rel.to_string(),
                    position,
                    witness: None,
                    ok: false,
                };
                self.fail(
                    &child.name,
                    Conjunct::Link,
                    Some(child_ref),
                    None,
                    format!("no witness: nothing is linked at position {position} of {tgt_rel}"),
                );
                CertNode::ExistsWitness {
                    class: child.tgt_class.clone(),
                    tgt_key: None,
                    children: vec![CertNode::Link { evidence: link }],
                }
            }
            Some(w) => {
                let w_ref = self.tgt.object_ref(w);
                let hole = check_hole(child, x_child, w, self.src, self.tgt);
                self.record_hole(&hole);
                let link = LinkEvidence {
                    rung: child.name.clone(),
                    child_src: child_ref,
                    relationship: tgt_rel.to_string(),
                    position,
                    witness: Some(w_ref.clone()),
                    ok: pinned == Some(w),
                };
                debug_assert!(link.ok);
                let mut children = vec![
                    CertNode::Hole { evidence: hole },
                    CertNode::Link { evidence: link },
                ];
                if let Some(rest) = rest {
                    children.push(self.eval_node(rest, x_child, w));
                }
                CertNode::ExistsWitness {
                    class: child.tgt_class.clone(),
                    tgt_key: Some(w_ref),
                    children,
                }
            }
        }
    }

    fn record_hole(&mut self, hole: &HoleEvidence) {
        if hole.verdict == HoleVerdict::Failed {
            let detail = hole
                .diagnostic
                .clone()
                .unwrap_or_else(|| "postcondition is false with a true precondition".to_string());
            let conjunct = if hole
                .diagnostic
                .as_deref()
                .map(|d| d.starts_with("precondition"))
                .unwrap_or(false)
            {
                Conjunct::Pre
            } else {
                Conjunct::PostData
            };
            self.fail(
                &hole.rung,
                conjunct,
                Some(hole.src.clone()),
                hole.tgt.clone(),
                detail,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn com_evidence(
        &self,
        parent_map: &MapExpr,
        child: &Rung,
        tgt_rel: &str,
        x: ObjectKey,
        y: ObjectKey,
        kept: &[ObjectKey],
    ) -> ComEvidence {
        let mut diagnostic = None;
        let mut left = Vec::new();
        let x_node = self.src.object(x);
        for emit in parent_map.emits_into(tgt_rel, Placement::First) {
            match map_surface(&emit.map, x_node, self.tgt.metamodel()) {
                Ok(s) => left.push(s),
                Err(e) => diagnostic = Some(format!("emit evaluation failed: {e}")),
            }
        }
        for &x_child in kept {
            match map_surface(&child.map, self.src.object(x_child), self.tgt.metamodel()) {
                Ok(s) => left.push(s),
                Err(e) => {
                    diagnostic = Some(format!(
                        "map evaluation failed on {}: {e}",
                        self.src.object_ref(x_child)
                    ))
                }
            }
        }
        for emit in parent_map.emits_into(tgt_rel, Placement::Last) {
            match map_surface(&emit.map, x_node, self.tgt.metamodel()) {
                Ok(s) => left.push(s),
                Err(e) => diagnostic = Some(format!("emit evaluation failed: {e}")),
            }
        }
        let right: Vec<ObjectSurface> = match self.tgt.children(y, tgt_rel) {
            Ok(list) => list
                .iter()
                .map(|k| ObjectSurface::of(self.tgt.object(*k)))
                .collect(),
            Err(e) => {
                diagnostic = Some(format!("target navigation failed: {e}"));
                Vec::new()
            }
        };
        let equal = diagnostic.is_none() && left == right;
        ComEvidence {
            rung: child.name.clone(),
            parent_src: self.src.object_ref(x),
            relationship: tgt_rel.to_string(),
            left,
            right,
            equal,
            diagnostic,
        }
    }
}

fn forall(class: String, src_key: ObjectRef, children: Vec<CertNode>) -> CertNode {
    CertNode::ForallSrc {
        class,
        src_key,
        children,
    }
}

fn failed_hole(
    rung: &str,
    src: ObjectRef,
    tgt: Option<ObjectRef>,
    diagnostic: String,
) -> HoleEvidence {
    HoleEvidence {
        rung: rung.to_string(),
        src,
        tgt,
        pre_value: false,
        post_value: None,
        verdict: HoleVerdict::Failed,
        diagnostic: Some(diagnostic),
    }
}

fn render_surfaces(surfaces: &[ObjectSurface]) -> String {
    let items: Vec<String> = surfaces.iter().map(|s| s.to_string()).collect();
    format!("[{}]", items.join(", "))
}
