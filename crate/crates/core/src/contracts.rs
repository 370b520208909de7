//! Executable contracts: predicate expressions, per-rung mapping
//! expressions, and hole evidence.
//!
//! A rung's correctness obligation is `pre(src) implies post(src, tgt)`
//! where `tgt` is what the rung's map produced. Evaluating that implication
//! on a concrete pair yields a [`HoleEvidence`] leaf, the variable part of
//! the assembled proof trace. Link obligations are not expressed here: the
//! engine derives them structurally from the traversal (see
//! [`crate::engine`]).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::instance::{
    InstanceBuilder, InstanceError, ModelInstance, ObjectKey, ObjectNode, ObjectRef,
};
use crate::metamodel::{Metamodel, Multiplicity, BASE_ATTR};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

/// Expression tree for contracts and map assignments. The only free
/// variables are `src` and `tgt`; the only arithmetic is the successor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Bool(bool),
    Nat(u64),
    SrcId,
    TgtId,
    SrcFlag(String),
    TgtFlag(String),
    Succ(Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }
    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Eq(Box::new(a), Box::new(b))
    }
    pub fn succ(a: Expr) -> Expr {
        Expr::Succ(Box::new(a))
    }

    /// `src.id = tgt.id`, the id-copy postcondition.
    pub fn ids_equal() -> Expr {
        Expr::eq(Expr::SrcId, Expr::TgtId)
    }

    pub fn mentions_tgt(&self) -> bool {
        match self {
            Expr::TgtId | Expr::TgtFlag(_) => true,
            Expr::Bool(_) | Expr::Nat(_) | Expr::SrcId | Expr::SrcFlag(_) => false,
            Expr::Succ(a) | Expr::Not(a) => a.mentions_tgt(),
            Expr::Eq(a, b) | Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.mentions_tgt() || b.mentions_tgt()
            }
        }
    }

    /// Flag names read off `src` / `tgt`, for declaration checks.
    pub fn flag_uses(&self) -> Vec<(Side, &str)> {
        let mut out = Vec::new();
        self.collect_flags(&mut out);
        out
    }

    fn collect_flags<'a>(&'a self, out: &mut Vec<(Side, &'a str)>) {
        match self {
            Expr::SrcFlag(name) => out.push((Side::Src, name)),
            Expr::TgtFlag(name) => out.push((Side::Tgt, name)),
            Expr::Succ(a) | Expr::Not(a) => a.collect_flags(out),
            Expr::Eq(a, b) | Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.collect_flags(out);
                b.collect_flags(out);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Src,
    Tgt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Nat(u64),
    Bool(bool),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{0} is not in scope here")]
    MissingObject(&'static str),
    #[error("object has no flag {0}")]
    UnknownFlag(String),
    #[error("expected a boolean, got a natural")]
    ExpectedBool,
    #[error("expected a natural, got a boolean")]
    ExpectedNat,
    #[error("equality compares values of different types")]
    EqTypeMismatch,
    #[error("natural overflow in succ")]
    Overflow,
}

/// Evaluates an expression against an optional source and target object.
pub fn eval(
    expr: &Expr,
    src: Option<&ObjectNode>,
    tgt: Option<&ObjectNode>,
) -> Result<Value, EvalError> {
    let flag =
        |node: Option<&ObjectNode>, which: &'static str, name: &str| -> Result<Value, EvalError> {
            let node = node.ok_or(EvalError::MissingObject(which))?;
            node.flags
                .get(name)
                .copied()
                .map(Value::Bool)
                .ok_or_else(|| EvalError::UnknownFlag(name.to_string()))
        };
    match expr {
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Nat(n) => Ok(Value::Nat(*n)),
        Expr::SrcId => Ok(Value::Nat(src.ok_or(EvalError::MissingObject("src"))?.id)),
        Expr::TgtId => Ok(Value::Nat(tgt.ok_or(EvalError::MissingObject("tgt"))?.id)),
        Expr::SrcFlag(name) => flag(src, "src", name),
        Expr::TgtFlag(name) => flag(tgt, "tgt", name),
        Expr::Succ(a) => match eval(a, src, tgt)? {
            Value::Nat(n) => n.checked_add(1).map(Value::Nat).ok_or(EvalError::Overflow),
            Value::Bool(_) => Err(EvalError::ExpectedNat),
        },
        Expr::Eq(a, b) => match (eval(a, src, tgt)?, eval(b, src, tgt)?) {
            (Value::Nat(x), Value::Nat(y)) => Ok(Value::Bool(x == y)),
            (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x == y)),
            _ => Err(EvalError::EqTypeMismatch),
        },
        Expr::Not(a) => Ok(Value::Bool(!eval_bool(a, src, tgt)?)),
        Expr::And(a, b) => Ok(Value::Bool(
            eval_bool(a, src, tgt)? & eval_bool(b, src, tgt)?,
        )),
        Expr::Or(a, b) => Ok(Value::Bool(
            eval_bool(a, src, tgt)? | eval_bool(b, src, tgt)?,
        )),
        Expr::Implies(a, b) => Ok(Value::Bool(
            !eval_bool(a, src, tgt)? | eval_bool(b, src, tgt)?,
        )),
    }
}

fn eval_bool(
    expr: &Expr,
    src: Option<&ObjectNode>,
    tgt: Option<&ObjectNode>,
) -> Result<bool, EvalError> {
    match eval(expr, src, tgt)? {
        Value::Bool(b) => Ok(b),
        Value::Nat(_) => Err(EvalError::ExpectedBool),
    }
}

/// Evaluates a predicate, requiring a boolean result.
pub fn eval_pred(
    p: &Expr,
    src: Option<&ObjectNode>,
    tgt: Option<&ObjectNode>,
) -> Result<bool, EvalError> {
    eval_bool(p, src, tgt)
}

// ---------------------------------------------------------------------------
// Mapping expressions
// ---------------------------------------------------------------------------

/// Where an emitted object lands relative to traversal-produced children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    First,
    Last,
}

/// An extra target object produced alongside the mapped one and placed
/// into a many-valued relationship of the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitClause {
    pub relationship: String,
    pub placement: Placement,
    pub map: MapExpr,
}

/// How one source object becomes one target object: the target class, the
/// mandatory base-attribute assignment, flag assignments, and emit clauses.
/// All right-hand sides range over `src` only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapExpr {
    pub target_class: String,
    pub id_expr: Expr,
    pub flag_assignments: Vec<(String, Expr)>,
    pub emits: Vec<EmitClause>,
}

impl MapExpr {
    /// The id-copy map onto `target_class`, no flags, no emits.
    pub fn copy_id(target_class: impl Into<String>) -> Self {
        MapExpr {
            target_class: target_class.into(),
            id_expr: Expr::SrcId,
            flag_assignments: Vec::new(),
            emits: Vec::new(),
        }
    }

    pub fn with_flag(mut self, name: impl Into<String>, expr: Expr) -> Self {
        self.flag_assignments.push((name.into(), expr));
        self
    }

    pub fn with_emit(
        mut self,
        relationship: impl Into<String>,
        placement: Placement,
        map: MapExpr,
    ) -> Self {
        self.emits.push(EmitClause {
            relationship: relationship.into(),
            placement,
            map,
        });
        self
    }

    /// Emit clauses into `rel` with the given placement, in declaration order.
    pub fn emits_into(&self, rel: &str, placement: Placement) -> Vec<&EmitClause> {
        self.emits
            .iter()
            .filter(|e| e.relationship == rel && e.placement == placement)
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("map assigns id to a non-natural value")]
    IdNotNat,
    #[error("map assigns flag {0} to a non-boolean value")]
    FlagNotBool(String),
    #[error("map evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("source object is of class {actual}, map expects {expected}")]
    SourceClassMismatch { expected: String, actual: String },
}

/// Result of applying a map: the constructed object plus emit-produced
/// children whose placement is `last`. Those are linked only after the
/// traversal has appended the rung-produced children.
#[derive(Debug)]
pub struct MappedObject {
    pub key: ObjectKey,
    pub pending_last: Vec<(String, ObjectKey)>,
}

/// Constructs the target object for `src` inside `sink`, placing
/// `first`-emitted children immediately.
pub fn apply_map(
    map: &MapExpr,
    src: &ObjectNode,
    sink: &mut InstanceBuilder,
) -> Result<MappedObject, ApplyError> {
    let surface = map_surface(map, src, sink.metamodel())?;
    let flags: Vec<(&str, bool)> = surface
        .flags
        .iter()
        .map(|(k, v)| (k.as_str(), *v))
        .collect();
    let key = sink.declare_object(&map.target_class, surface.id, &flags)?;
    let mut pending_last = Vec::new();
    for emit in &map.emits {
        let child = apply_map(&emit.map, src, sink)?;
        // Emitted objects take no traversal children, so their own
        // deferred emits can be linked right away.
        for (rel, k) in child.pending_last {
            sink.push_many(child.key, &rel, k)?;
        }
        match emit.placement {
            Placement::First => sink.push_many(key, &emit.relationship, child.key)?,
            Placement::Last => pending_last.push((emit.relationship.clone(), child.key)),
        }
    }
    Ok(MappedObject { key, pending_last })
}

/// Value-level view of one object: what `(class, id, flags)` a map yields
/// for a source object, computed without touching any instance. Also the
/// unit of comparison for commutativity evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSurface {
    pub class: String,
    pub id: u64,
    pub flags: BTreeMap<String, bool>,
}

impl ObjectSurface {
    pub fn of(node: &ObjectNode) -> Self {
        ObjectSurface {
            class: node.class_name.clone(),
            id: node.id,
            flags: node.flags.clone(),
        }
    }

    pub fn object_ref(&self) -> ObjectRef {
        ObjectRef::new(self.class.clone(), self.id)
    }
}

impl std::fmt::Display for ObjectSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.class, self.id)?;
        let set: Vec<&str> = self
            .flags
            .iter()
            .filter(|(_, v)| **v)
            .map(|(k, _)| k.as_str())
            .collect();
        if !set.is_empty() {
            write!(f, "[{}]", set.join(","))?;
        }
        Ok(())
    }
}

/// Computes the `(class, id, flags)` surface `map` assigns to `src`.
/// Declared target flags that the map leaves unassigned default to false,
/// matching what construction through a builder produces.
pub fn map_surface(
    map: &MapExpr,
    src: &ObjectNode,
    tgt_mm: &Metamodel,
) -> Result<ObjectSurface, ApplyError> {
    let id = match eval(&map.id_expr, Some(src), None)? {
        Value::Nat(n) => n,
        Value::Bool(_) => return Err(ApplyError::IdNotNat),
    };
    let mut flags: BTreeMap<String, bool> = tgt_mm
        .class(&map.target_class)
        .map(|c| c.flags.iter().map(|f| (f.clone(), false)).collect())
        .unwrap_or_default();
    for (name, expr) in &map.flag_assignments {
        match eval(expr, Some(src), None)? {
            Value::Bool(b) => flags.insert(name.clone(), b),
            Value::Nat(_) => return Err(ApplyError::FlagNotBool(name.clone())),
        };
    }
    Ok(ObjectSurface {
        class: map.target_class.clone(),
        id,
        flags,
    })
}

// ---------------------------------------------------------------------------
// Rungs and hole evidence
// ---------------------------------------------------------------------------

/// One class-to-class transformation step: precondition over the source,
/// data postcondition over the pair, and the mapping that produces the
/// target object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rung {
    pub name: String,
    pub src_class: String,
    pub tgt_class: String,
    pub pre: Expr,
    pub post_data: Expr,
    pub map: MapExpr,
}

impl Rung {
    /// Unconditional id-copy rung with an id-equality postcondition.
    pub fn copy_id(
        name: impl Into<String>,
        src_class: impl Into<String>,
        tgt_class: impl Into<String>,
    ) -> Self {
        let tgt_class = tgt_class.into();
        Rung {
            name: name.into(),
            src_class: src_class.into(),
            tgt_class: tgt_class.clone(),
            pre: Expr::Bool(true),
            post_data: Expr::ids_equal(),
            map: MapExpr::copy_id(tgt_class),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoleVerdict {
    /// Precondition true and postcondition true.
    Holds,
    /// Precondition false: nothing to show.
    Vacuous,
    /// Precondition true and postcondition false.
    Failed,
}

/// Evidence for one `pre implies post` obligation on a concrete pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleEvidence {
    pub rung: String,
    pub src: ObjectRef,
    pub tgt: Option<ObjectRef>,
    pub pre_value: bool,
    pub post_value: Option<bool>,
    pub verdict: HoleVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl HoleEvidence {
    pub fn holds(&self) -> bool {
        !matches!(self.verdict, HoleVerdict::Failed)
    }
}

/// Evaluates a rung's contract on a concrete source/target pair.
/// Evaluation errors surface as a failed verdict with a diagnostic rather
/// than as a crash.
pub fn check_hole(
    rung: &Rung,
    src_key: ObjectKey,
    tgt_key: ObjectKey,
    src: &ModelInstance,
    tgt: &ModelInstance,
) -> HoleEvidence {
    let src_node = src.object(src_key);
    let tgt_node = tgt.object(tgt_key);
    let src_ref = src.object_ref(src_key);
    let tgt_ref = tgt.object_ref(tgt_key);
    if src_node.class_name != rung.src_class || tgt_node.class_name != rung.tgt_class {
        return HoleEvidence {
            rung: rung.name.clone(),
            src: src_ref,
            tgt: Some(tgt_ref),
            pre_value: false,
            post_value: None,
            verdict: HoleVerdict::Failed,
            diagnostic: Some(format!(
                "pair ({}, {}) does not match rung classes ({} -> {})",
                src_node.class_name, tgt_node.class_name, rung.src_class, rung.tgt_class
            )),
        };
    }
    let pre_value = match eval_pred(&rung.pre, Some(src_node), None) {
        Ok(v) => v,
        Err(e) => {
            return HoleEvidence {
                rung: rung.name.clone(),
                src: src_ref,
                tgt: Some(tgt_ref),
                pre_value: false,
                post_value: None,
                verdict: HoleVerdict::Failed,
                diagnostic: Some(format!("precondition evaluation failed: {e}")),
            }
        }
    };
    let post = eval_pred(&rung.post_data, Some(src_node), Some(tgt_node));
    match (pre_value, post) {
        (false, post) => HoleEvidence {
            rung: rung.name.clone(),
            src: src_ref,
            tgt: Some(tgt_ref),
            pre_value: false,
            post_value: post.ok(),
            verdict: HoleVerdict::Vacuous,
            diagnostic: None,
        },
        (true, Ok(post_value)) => HoleEvidence {
            rung: rung.name.clone(),
            src: src_ref,
            tgt: Some(tgt_ref),
            pre_value: true,
            post_value: Some(post_value),
            verdict: if post_value {
                HoleVerdict::Holds
            } else {
                HoleVerdict::Failed
            },
            diagnostic: None,
        },
        (true, Err(e)) => HoleEvidence {
            rung: rung.name.clone(),
            src: src_ref,
            tgt: Some(tgt_ref),
            pre_value: true,
            post_value: None,
            verdict: HoleVerdict::Failed,
            diagnostic: Some(format!("postcondition evaluation failed: {e}")),
        },
    }
}

/// Checks that an expression only uses flags the relevant class declares
/// and respects the `src`-only restriction where required.
pub fn check_expr_scope(
    expr: &Expr,
    src_class: Option<&str>,
    tgt_class: Option<&str>,
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    context: &str,
    report: &mut crate::validation::ValidationReport,
) {
    for (side, flag) in expr.flag_uses() {
        match side {
            Side::Src => match src_class {
                Some(c) if src_mm.class(c).map(|s| s.has_flag(flag)).unwrap_or(false) => {}
                Some(c) => {
                    report.violation(format!("{context}: class {c} declares no flag {flag}"))
                }
                None => report.violation(format!("{context}: src is not in scope")),
            },
            Side::Tgt => match tgt_class {
                Some(c) if tgt_mm.class(c).map(|s| s.has_flag(flag)).unwrap_or(false) => {}
                Some(c) => {
                    report.violation(format!("{context}: class {c} declares no flag {flag}"))
                }
                None => report.violation(format!("{context}: tgt is not in scope")),
            },
        }
    }
    if tgt_class.is_none() && expr.mentions_tgt() {
        report.violation(format!("{context}: tgt is not in scope"));
    }
}

/// Checks a map expression against the target metamodel: the target class
/// exists, assigned flags are declared, emit relationships are declared,
/// many-valued, and emit maps match their relationship's target class.
pub fn check_map(
    map: &MapExpr,
    src_class: &str,
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
    context: &str,
    report: &mut crate::validation::ValidationReport,
) {
    let Some(schema) = tgt_mm.class(&map.target_class) else {
        report.violation(format!(
            "{context}: map targets undeclared class {}",
            map.target_class
        ));
        return;
    };
    check_expr_scope(
        &map.id_expr,
        Some(src_class),
        None,
        src_mm,
        tgt_mm,
        &format!("{context}: {BASE_ATTR}"),
        report,
    );
    for (name, expr) in &map.flag_assignments {
        if !schema.has_flag(name) {
            report.violation(format!(
                "{context}: class {} declares no flag {name}",
                map.target_class
            ));
        }
        check_expr_scope(
            expr,
            Some(src_class),
            None,
            src_mm,
            tgt_mm,
            &format!("{context}: {name}"),
            report,
        );
    }
    for emit in &map.emits {
        match schema.relationship(&emit.relationship) {
            None => report.violation(format!(
                "{context}: emit targets undeclared relationship {} of {}",
                emit.relationship, map.target_class
            )),
            Some(decl) => {
                if decl.multiplicity != Multiplicity::Many {
                    report.violation(format!(
                        "{context}: emit into one-valued relationship {} of {}",
                        emit.relationship, map.target_class
                    ));
                }
                if decl.target_class != emit.map.target_class {
                    report.violation(format!(
                        "{context}: emit into {} builds {} but the relationship targets {}",
                        emit.relationship, emit.map.target_class, decl.target_class
                    ));
                }
            }
        }
        check_map(
            &emit.map,
            src_class,
            src_mm,
            tgt_mm,
            &format!("{context}: emit {}", emit.relationship),
            report,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceBuilder;
    use crate::metamodel::ClassSchema;
    use std::sync::Arc;

    fn node(class: &str, id: u64, flags: &[(&str, bool)]) -> ObjectNode {
        ObjectNode {
            class_name: class.to_string(),
            id,
            flags: flags.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            refs: BTreeMap::new(),
        }
    }

    #[test]
    fn top_holds_on_any_object() {
        let a = node("A", 1, &[]);
        assert!(eval_pred(&Expr::Bool(true), Some(&a), None).unwrap());
    }

    #[test]
    fn id_equality_post() {
        let a = node("A", 1, &[]);
        let p = node("P", 1, &[]);
        assert!(eval_pred(&Expr::ids_equal(), Some(&a), Some(&p)).unwrap());
        let q = node("P", 2, &[]);
        assert!(!eval_pred(&Expr::ids_equal(), Some(&a), Some(&q)).unwrap());
    }

    #[test]
    fn missing_object_is_an_error() {
        assert!(matches!(
            eval_pred(&Expr::ids_equal(), Some(&node("A", 1, &[])), None),
            Err(EvalError::MissingObject("tgt"))
        ));
    }

    #[test]
    fn unknown_flag_is_an_error() {
        let a = node("A", 1, &[]);
        assert!(matches!(
            eval_pred(&Expr::SrcFlag("isKey".into()), Some(&a), None),
            Err(EvalError::UnknownFlag(_))
        ));
    }

    #[test]
    fn type_mismatches_are_errors() {
        let a = node("A", 1, &[("f", true)]);
        assert!(matches!(
            eval_pred(
                &Expr::eq(Expr::SrcId, Expr::SrcFlag("f".into())),
                Some(&a),
                None
            ),
            Err(EvalError::EqTypeMismatch)
        ));
        assert!(matches!(
            eval_pred(&Expr::and(Expr::SrcId, Expr::Bool(true)), Some(&a), None),
            Err(EvalError::ExpectedBool)
        ));
        assert!(matches!(
            eval(&Expr::succ(Expr::Bool(true)), Some(&a), None),
            Err(EvalError::ExpectedNat)
        ));
    }

    fn single_pair_models() -> (
        crate::instance::ModelInstance,
        crate::instance::ModelInstance,
        ObjectKey,
        ObjectKey,
    ) {
        let src_mm = Arc::new(Metamodel::new("src", "A").with_class(ClassSchema::new("A")));
        let tgt_mm = Arc::new(Metamodel::new("tgt", "P").with_class(ClassSchema::new("P")));
        let mut sb = InstanceBuilder::new(src_mm);
        let a = sb.build_object("A", 1, &[], &[]).unwrap();
        let (src, _) = sb.freeze(a).unwrap();
        let mut tb = InstanceBuilder::new(tgt_mm);
        let p = tb.build_object("P", 1, &[], &[]).unwrap();
        let (tgt, _) = tb.freeze(p).unwrap();
        (src, tgt, a, p)
    }

    #[test]
    fn copy_id_hole_holds() {
        let (src, tgt, a, p) = single_pair_models();
        let rung = Rung::copy_id("a2p", "A", "P");
        let ev = check_hole(&rung, a, p, &src, &tgt);
        assert_eq!(ev.verdict, HoleVerdict::Holds);
        assert_eq!(ev.tgt, Some(ObjectRef::new("P", 1)));
    }

    #[test]
    fn false_pre_is_vacuous() {
        let (src, tgt, a, p) = single_pair_models();
        let mut rung = Rung::copy_id("a2p", "A", "P");
        rung.pre = Expr::Bool(false);
        let ev = check_hole(&rung, a, p, &src, &tgt);
        assert_eq!(ev.verdict, HoleVerdict::Vacuous);
    }

    #[test]
    fn succ_map_against_id_equality_fails() {
        // Independent computation: the map sends id 1 to 2, the post
        // demands 1 = 2, so the implication with a true antecedent fails.
        let src_mm = Arc::new(Metamodel::new("src", "A").with_class(ClassSchema::new("A")));
        let tgt_mm = Arc::new(Metamodel::new("tgt", "P").with_class(ClassSchema::new("P")));
        let mut rung = Rung::copy_id("a2p", "A", "P");
        rung.map.id_expr = Expr::succ(Expr::SrcId);

        let mut sb = InstanceBuilder::new(src_mm);
        let a = sb.build_object("A", 1, &[], &[]).unwrap();
        let (src, _) = sb.freeze(a).unwrap();

        let mut tb = InstanceBuilder::new(tgt_mm.clone());
        let surface = map_surface(&rung.map, src.object(a), &tgt_mm).unwrap();
        assert_eq!(surface.id, 2);
        let p = tb.build_object("P", surface.id, &[], &[]).unwrap();
        let (tgt, _) = tb.freeze(p).unwrap();

        let ev = check_hole(&rung, a, p, &src, &tgt);
        assert_eq!(ev.verdict, HoleVerdict::Failed);
        assert_eq!(ev.post_value, Some(false));
    }

    #[test]
    fn apply_map_places_first_emits_before_later_children() {
        let tgt_mm = Arc::new(
            Metamodel::new("sql", "Table")
                .with_class(ClassSchema::new("Table").with_relationship(
                    "columns",
                    "Column",
                    Multiplicity::Many,
                ))
                .with_class(ClassSchema::new("Column").with_flag("isKey")),
        );
        let map = MapExpr::copy_id("Table").with_emit(
            "columns",
            Placement::First,
            MapExpr::copy_id("Column").with_flag("isKey", Expr::Bool(true)),
        );
        let class2 = node("Class", 2, &[]);
        let mut b = InstanceBuilder::new(tgt_mm);
        let mapped = apply_map(&map, &class2, &mut b).unwrap();
        assert!(mapped.pending_last.is_empty());
        // Simulate the traversal appending an attribute column afterwards.
        let extra = b.build_object("Column", 5, &[], &[]).unwrap();
        b.push_many(mapped.key, "columns", extra).unwrap();
        let (inst, _) = b.freeze(mapped.key).unwrap();
        let cols = inst.children(mapped.key, "columns").unwrap();
        let surfaces: Vec<(u64, bool)> = cols
            .iter()
            .map(|k| (inst.object(*k).id, inst.object(*k).flags["isKey"]))
            .collect();
        assert_eq!(surfaces, vec![(2, true), (5, false)]);
    }

    #[test]
    fn map_without_emit_builds_one_object() {
        let tgt_mm = Arc::new(
            Metamodel::new("sql", "Column")
                .with_class(ClassSchema::new("Column").with_flag("isKey")),
        );
        let map = MapExpr::copy_id("Column").with_flag("isKey", Expr::Bool(false));
        let attr8 = node("Attribute", 8, &[]);
        let mut b = InstanceBuilder::new(tgt_mm);
        let mapped = apply_map(&map, &attr8, &mut b).unwrap();
        let (inst, _) = b.freeze(mapped.key).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.object(mapped.key).id, 8);
        assert!(!inst.object(mapped.key).flags["isKey"]);
    }
}
