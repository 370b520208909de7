//! Class schemas, containment relationships, and the containment partial order.
//!
//! A [`Metamodel`] declares a set of classes rooted at a designated root
//! class. Every class carries exactly one numeric base attribute (always
//! named `id`), an optional set of boolean flags, and the relationships in
//! which it participates as the container. Containment edges must form an
//! acyclic graph, which is what makes preorder traversal and positional
//! verification well defined downstream.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::validation::ValidationReport;

/// Name of the base attribute every class carries. Fixed by construction:
/// the data model admits no other numeric attribute.
pub const BASE_ATTR: &str = "id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    One,
    Many,
}

impl std::fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Multiplicity::One => write!(f, "one"),
            Multiplicity::Many => write!(f, "many"),
        }
    }
}

/// A named containment relationship from the declaring class to
/// `target_class`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipDecl {
    pub name: String,
    pub target_class: String,
    pub multiplicity: Multiplicity,
}

/// One class of the metamodel: the implicit `id` base attribute, boolean
/// flags, and outgoing containment relationships.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSchema {
    pub name: String,
    pub flags: Vec<String>,
    pub relationships: Vec<RelationshipDecl>,
}

impl ClassSchema {
    pub fn new(name: impl Into<String>) -> Self {
        ClassSchema {
            name: name.into(),
            flags: Vec::new(),
            relationships: Vec::new(),
        }
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn with_relationship(
        mut self,
        name: impl Into<String>,
        target: impl Into<String>,
        multiplicity: Multiplicity,
    ) -> Self {
        self.relationships.push(RelationshipDecl {
            name: name.into(),
            target_class: target.into(),
            multiplicity,
        });
        self
    }

    pub fn relationship(&self, name: &str) -> Option<&RelationshipDecl> {
        self.relationships.iter().find(|r| r.name == name)
    }

    pub fn has_flag(&self, name: &str) -> bool {
        self.flags.iter().any(|f| f == name)
    }
}

/// A named collection of class schemas with a designated root class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metamodel {
    pub name: String,
    pub classes: Vec<ClassSchema>,
    pub root_class: String,
}

impl Metamodel {
    pub fn new(name: impl Into<String>, root_class: impl Into<String>) -> Self {
        Metamodel {
            name: name.into(),
            classes: Vec::new(),
            root_class: root_class.into(),
        }
    }

    pub fn with_class(mut self, class: ClassSchema) -> Self {
        self.classes.push(class);
        self
    }

    pub fn class(&self, name: &str) -> Option<&ClassSchema> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn relationship(&self, class: &str, rel: &str) -> Option<&RelationshipDecl> {
        self.class(class).and_then(|c| c.relationship(rel))
    }
}

/// Checks every schema-level invariant and reports violations as data.
///
/// Unreachable classes are tolerated (sources may carry classes no rung
/// maps) and surface as warnings rather than violations.
pub fn validate_metamodel(mm: &Metamodel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen_classes = BTreeSet::new();

    for class in &mm.classes {
        if !seen_classes.insert(class.name.clone()) {
            report.violation(format!("duplicate class {}", class.name));
        }
        let mut names = BTreeSet::new();
        for flag in &class.flags {
            if flag == BASE_ATTR {
                report.violation(format!(
                    "flag {} of class {} shadows the base attribute",
                    flag, class.name
                ));
            }
            if !names.insert(flag.clone()) {
                report.violation(format!("duplicate flag {} in class {}", flag, class.name));
            }
        }
        for rel in &class.relationships {
            if rel.name == BASE_ATTR {
                report.violation(format!(
                    "relationship {} of class {} shadows the base attribute",
                    rel.name, class.name
                ));
            }
            if !names.insert(rel.name.clone()) {
                report.violation(format!(
                    "relationship {} in class {} clashes with another member name",
                    rel.name, class.name
                ));
            }
            if mm.class(&rel.target_class).is_none() {
                report.violation(format!(
                    "relationship {} of class {} targets undeclared class {}",
                    rel.name, class.name, rel.target_class
                ));
            }
        }
    }

    if mm.class(&mm.root_class).is_none() {
        report.violation(format!("root class {} is not declared", mm.root_class));
    }
    for class in &mm.classes {
        for rel in &class.relationships {
            if rel.target_class == mm.root_class {
                report.violation(format!(
                    "root class {} is contained by {} via {}",
                    mm.root_class, class.name, rel.name
                ));
            }
        }
    }

    // Cycle check over the whole containment graph, not just the part
    // reachable from the root: the covering relation must be a strict
    // partial order for every declared class.
    for cycle_entry in containment_cycles(mm) {
        report.violation(format!("containment cycle at {}", cycle_entry));
    }

    for class in &mm.classes {
        if class.name != mm.root_class && !reachable_from_root(mm).contains(class.name.as_str()) {
            report.warning(format!(
                "class {} is unreachable from root {}",
                class.name, mm.root_class
            ));
        }
    }

    report
}

/// The covering relation of the containment partial order: `(C, D)` is
/// present iff some relationship of `C` targets `D`.
pub fn containment_order(mm: &Metamodel) -> Result<Vec<(String, String)>, ValidationReport> {
    let report = validate_metamodel(mm);
    if !report.is_ok() {
        return Err(report);
    }
    let mut pairs = Vec::new();
    for class in &mm.classes {
        for rel in &class.relationships {
            let pair = (class.name.clone(), rel.target_class.clone());
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    Ok(pairs)
}

fn reachable_from_root(mm: &Metamodel) -> BTreeSet<&str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack = vec![mm.root_class.as_str()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name) {
            continue;
        }
        if let Some(class) = mm.class(name) {
            for rel in &class.relationships {
                stack.push(rel.target_class.as_str());
            }
        }
    }
    seen
}

/// Classes that sit on some containment cycle, in name order.
fn containment_cycles(mm: &Metamodel) -> Vec<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Visiting,
        Done,
    }
    let mut states: BTreeMap<&str, State> = BTreeMap::new();
    let mut on_cycle: BTreeSet<&str> = BTreeSet::new();

    fn visit<'a>(
        mm: &'a Metamodel,
        name: &'a str,
        states: &mut BTreeMap<&'a str, State>,
        on_cycle: &mut BTreeSet<&'a str>,
    ) {
        match states.get(name) {
            Some(State::Done) => return,
            Some(State::Visiting) => {
                on_cycle.insert(name);
                return;
            }
            None => {}
        }
        states.insert(name, State::Visiting);
        if let Some(class) = mm.class(name) {
            for rel in &class.relationships {
                visit(mm, &rel.target_class, states, on_cycle);
            }
        }
        states.insert(name, State::Done);
    }

    for class in &mm.classes {
        visit(mm, &class.name, &mut states, &mut on_cycle);
    }
    on_cycle.into_iter().map(|s| s.to_string()).collect()
}
