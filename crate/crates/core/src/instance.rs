//! Finite typed object graphs: the models the engine transforms.
//!
//! Instances are built through an [`InstanceBuilder`] (single writer) and
//! frozen into an immutable [`ModelInstance`] that is safe to share across
//! concurrent readers. Objects are addressed by a synthetic [`ObjectKey`]
//! assigned in creation order; the stable, auditable identity of an object
//! is its `(class, id)` pair, which is unique within an instance and is
//! what certificates and reports cite (see [`ObjectRef`]).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

use crate::metamodel::{Metamodel, Multiplicity};

/// Synthetic handle for an object within one instance. Keys are assigned in
/// creation order and are not stable across serialization; use
/// [`ObjectRef`] for anything that leaves the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectKey(u32);

/// Stable identity of an object: class name plus base attribute value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectRef {
    pub class: String,
    pub id: u64,
}

impl ObjectRef {
    pub fn new(class: impl Into<String>, id: u64) -> Self {
        ObjectRef {
            class: class.into(),
            id,
        }
    }
}

impl std::fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.class, self.id)
    }
}

/// Value of one relationship slot on an object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefValue {
    One(ObjectKey),
    Many(Vec<ObjectKey>),
}

/// One object: class, base attribute, flags, and containment references.
/// Flags are fully materialized (declared flags default to `false`); a
/// one-valued relationship may be absent while its child has not been (or
/// never is) supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectNode {
    pub class_name: String,
    pub id: u64,
    pub flags: BTreeMap<String, bool>,
    pub refs: BTreeMap<String, RefValue>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("duplicate object {0}")]
    DuplicateObject(ObjectRef),
    #[error("unknown object key")]
    UnknownKey,
    #[error("class {class} declares no relationship {relationship}")]
    UndeclaredRelationship { class: String, relationship: String },
    #[error("class {class} declares no flag {flag}")]
    UndeclaredFlag { class: String, flag: String },
    #[error("relationship {relationship} of {object} expects multiplicity {expected}")]
    MultiplicityMismatch {
        object: ObjectRef,
        relationship: String,
        expected: Multiplicity,
    },
    #[error("relationship {relationship} of {object} expects class {expected}, got {actual}")]
    TargetClassMismatch {
        object: ObjectRef,
        relationship: String,
        expected: String,
        actual: String,
    },
    #[error("one-valued relationship {relationship} of {object} is already set")]
    AlreadySet {
        object: ObjectRef,
        relationship: String,
    },
    #[error("one-valued relationship {relationship} of {object} is unset")]
    Unset {
        object: ObjectRef,
        relationship: String,
    },
    #[error("root object {0} is not of root class {1}")]
    RootClassMismatch(ObjectRef, String),
    #[error("containment cycle at {0}")]
    ContainmentCycle(ObjectRef),
}

/// Shape of the references handed to [`InstanceBuilder::build_object`].
#[derive(Debug, Clone)]
pub enum RefInit {
    One(ObjectKey),
    Many(Vec<ObjectKey>),
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

/// Single-writer construction surface. Children may be supplied up front
/// (`build_object`, mirroring bottom-up anonymous constructors) or linked
/// after creation (`declare_object` plus `set_one`/`push_many`, which is
/// how the executor wires targets top-down).
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    metamodel: Arc<Metamodel>,
    objects: BTreeMap<ObjectKey, ObjectNode>,
    by_ref: BTreeMap<(String, u64), ObjectKey>,
    next: u32,
}

impl InstanceBuilder {
    pub fn new(metamodel: Arc<Metamodel>) -> Self {
        InstanceBuilder {
            metamodel,
            objects: BTreeMap::new(),
            by_ref: BTreeMap::new(),
            next: 0,
        }
    }

    pub fn metamodel(&self) -> &Arc<Metamodel> {
        &self.metamodel
    }

    /// Creates an object with empty reference slots: many-valued
    /// relationships start as `[]`, one-valued ones start unset.
    pub fn declare_object(
        &mut self,
        class: &str,
        id: u64,
        flags: &[(&str, bool)],
    ) -> Result<ObjectKey, InstanceError> {
        let schema = self
            .metamodel
            .class(class)
            .ok_or_else(|| InstanceError::UnknownClass(class.to_string()))?;
        let key_id = (class.to_string(), id);
        if self.by_ref.contains_key(&key_id) {
            return Err(InstanceError::DuplicateObject(ObjectRef::new(class, id)));
        }
        let mut flag_map: BTreeMap<String, bool> =
            schema.flags.iter().map(|f| (f.clone(), false)).collect();
        for (name, value) in flags {
            if !schema.has_flag(name) {
                return Err(InstanceError::UndeclaredFlag {
                    class: class.to_string(),
                    flag: name.to_string(),
                });
            }
            flag_map.insert(name.to_string(), *value);
        }
        let mut refs = BTreeMap::new();
        for rel in &schema.relationships {
            if rel.multiplicity == Multiplicity::Many {
                refs.insert(rel.name.clone(), RefValue::Many(Vec::new()));
            }
        }
        let key = ObjectKey(self.next);
        self.next += 1;
        self.objects.insert(
            key,
            ObjectNode {
                class_name: class.to_string(),
                id,
                flags: flag_map,
                refs,
            },
        );
        self.by_ref.insert(key_id, key);
        Ok(key)
    }

    /// Creates an object with all of its references supplied up front.
    pub fn build_object(
        &mut self,
        class: &str,
        id: u64,
        flags: &[(&str, bool)],
        refs: &[(&str, RefInit)],
    ) -> Result<ObjectKey, InstanceError> {
        let key = self.declare_object(class, id, flags)?;
        for (rel, init) in refs {
            match init {
                RefInit::One(child) => self.set_one(key, rel, *child)?,
                RefInit::Many(children) => {
                    for child in children {
                        self.push_many(key, rel, *child)?;
                    }
                }
            }
        }
        Ok(key)
    }

    pub fn set_one(
        &mut self,
        object: ObjectKey,
        rel: &str,
        child: ObjectKey,
    ) -> Result<(), InstanceError> {
        self.check_link(object, rel, child, Multiplicity::One)?;
        let node = self.objects.get_mut(&object).expect("checked");
        if node.refs.contains_key(rel) {
            return Err(InstanceError::AlreadySet {
                object: ObjectRef::new(node.class_name.clone(), node.id),
                relationship: rel.to_string(),
            });
        }
        node.refs.insert(rel.to_string(), RefValue::One(child));
        Ok(())
    }

    pub fn push_many(
        &mut self,
        object: ObjectKey,
        rel: &str,
        child: ObjectKey,
    ) -> Result<(), InstanceError> {
        self.check_link(object, rel, child, Multiplicity::Many)?;
        let node = self.objects.get_mut(&object).expect("checked");
        match node.refs.get_mut(rel) {
            Some(RefValue::Many(list)) => list.push(child),
            _ => unreachable!("many slots are materialized at declaration"),
        }
        Ok(())
    }

    fn check_link(
        &self,
        object: ObjectKey,
        rel: &str,
        child: ObjectKey,
        expected: Multiplicity,
    ) -> Result<(), InstanceError> {
        let node = self.objects.get(&object).ok_or(InstanceError::UnknownKey)?;
        let obj_ref = ObjectRef::new(node.class_name.clone(), node.id);
        let decl = self
            .metamodel
            .relationship(&node.class_name, rel)
            .ok_or_else(|| InstanceError::UndeclaredRelationship {
                class: node.class_name.clone(),
                relationship: rel.to_string(),
            })?;
        if decl.multiplicity != expected {
            return Err(InstanceError::MultiplicityMismatch {
                object: obj_ref,
                relationship: rel.to_string(),
                expected: decl.multiplicity,
            });
        }
        let child_node = self.objects.get(&child).ok_or(InstanceError::UnknownKey)?;
        if child_node.class_name != decl.target_class {
            return Err(InstanceError::TargetClassMismatch {
                object: obj_ref,
                relationship: rel.to_string(),
                expected: decl.target_class.clone(),
                actual: child_node.class_name.clone(),
            });
        }
        Ok(())
    }

    /// Links `child` under `rel`, dispatching on the declared multiplicity.
    pub fn link(
        &mut self,
        object: ObjectKey,
        rel: &str,
        child: ObjectKey,
    ) -> Result<(), InstanceError> {
        let node = self.objects.get(&object).ok_or(InstanceError::UnknownKey)?;
        let decl = self
            .metamodel
            .relationship(&node.class_name, rel)
            .ok_or_else(|| InstanceError::UndeclaredRelationship {
                class: node.class_name.clone(),
                relationship: rel.to_string(),
            })?;
        match decl.multiplicity {
            Multiplicity::One => self.set_one(object, rel, child),
            Multiplicity::Many => self.push_many(object, rel, child),
        }
    }

    pub fn find(&self, class: &str, id: u64) -> Option<ObjectKey> {
        self.by_ref.get(&(class.to_string(), id)).copied()
    }

    /// Freezes the graph. Fails on a wrongly classed root or a containment
    /// cycle; unreachable objects and unset one-valued relationships are
    /// tolerated and reported as warnings.
    pub fn freeze(self, root: ObjectKey) -> Result<(ModelInstance, Vec<String>), InstanceError> {
        let root_node = self.objects.get(&root).ok_or(InstanceError::UnknownKey)?;
        if root_node.class_name != self.metamodel.root_class {
            return Err(InstanceError::RootClassMismatch(
                ObjectRef::new(root_node.class_name.clone(), root_node.id),
                self.metamodel.root_class.clone(),
            ));
        }

        // Cycle detection over the object containment graph.
        let mut state: BTreeMap<ObjectKey, u8> = BTreeMap::new(); // 1 = visiting, 2 = done
        let mut stack: Vec<(ObjectKey, usize)> = Vec::new();
        for &start in self.objects.keys() {
            if state.contains_key(&start) {
                continue;
            }
            stack.push((start, 0));
            state.insert(start, 1);
            while let Some((key, child_idx)) = stack.pop() {
                let children = children_of(&self.objects[&key]);
                if child_idx < children.len() {
                    stack.push((key, child_idx + 1));
                    let child = children[child_idx];
                    match state.get(&child) {
                        Some(1) => {
                            let node = &self.objects[&child];
                            return Err(InstanceError::ContainmentCycle(ObjectRef::new(
                                node.class_name.clone(),
                                node.id,
                            )));
                        }
                        Some(_) => {}
                        None => {
                            state.insert(child, 1);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    state.insert(key, 2);
                }
            }
        }

        let mut warnings = Vec::new();

        // Reachability from root.
        let mut reached: BTreeMap<ObjectKey, bool> = BTreeMap::new();
        let mut queue = vec![root];
        while let Some(key) = queue.pop() {
            if reached.insert(key, true).is_some() {
                continue;
            }
            queue.extend(children_of(&self.objects[&key]));
        }
        for (key, node) in &self.objects {
            if !reached.contains_key(key) {
                warnings.push(format!(
                    "object {} is unreachable from the root",
                    ObjectRef::new(node.class_name.clone(), node.id)
                ));
            }
        }

        // Unset one-valued relationships.
        for node in self.objects.values() {
            let schema = self
                .metamodel
                .class(&node.class_name)
                .expect("class checked at declaration");
            for rel in &schema.relationships {
                if rel.multiplicity == Multiplicity::One && !node.refs.contains_key(&rel.name) {
                    warnings.push(format!(
                        "one-valued relationship {} of {} is unset",
                        rel.name,
                        ObjectRef::new(node.class_name.clone(), node.id)
                    ));
                }
            }
        }

        let mut by_class: BTreeMap<String, Vec<ObjectKey>> = BTreeMap::new();
        for (key, node) in &self.objects {
            by_class
                .entry(node.class_name.clone())
                .or_default()
                .push(*key);
        }
        for keys in by_class.values_mut() {
            keys.sort_by_key(|k| self.objects[k].id);
        }

        Ok((
            ModelInstance {
                metamodel: self.metamodel,
                objects: self.objects,
                by_ref: self.by_ref,
                by_class,
                root,
            },
            warnings,
        ))
    }
}

fn children_of(node: &ObjectNode) -> Vec<ObjectKey> {
    let mut out = Vec::new();
    for value in node.refs.values() {
        match value {
            RefValue::One(k) => out.push(*k),
            RefValue::Many(ks) => out.extend(ks.iter().copied()),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Frozen instance
// ---------------------------------------------------------------------------

/// An immutable object graph over a metamodel.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    metamodel: Arc<Metamodel>,
    objects: BTreeMap<ObjectKey, ObjectNode>,
    by_ref: BTreeMap<(String, u64), ObjectKey>,
    by_class: BTreeMap<String, Vec<ObjectKey>>,
    root: ObjectKey,
}

impl ModelInstance {
    pub fn metamodel(&self) -> &Arc<Metamodel> {
        &self.metamodel
    }

    pub fn root(&self) -> ObjectKey {
        self.root
    }

    pub fn object(&self, key: ObjectKey) -> &ObjectNode {
        &self.objects[&key]
    }

    pub fn object_ref(&self, key: ObjectKey) -> ObjectRef {
        let node = self.object(key);
        ObjectRef::new(node.class_name.clone(), node.id)
    }

    pub fn find(&self, class: &str, id: u64) -> Option<ObjectKey> {
        self.by_ref.get(&(class.to_string(), id)).copied()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = ObjectKey> + '_ {
        self.objects.keys().copied()
    }

    /// Follows a declared relationship from an object.
    pub fn navigate(&self, from: ObjectKey, rel: &str) -> Result<RefValue, InstanceError> {
        let node = self.object(from);
        let decl = self
            .metamodel
            .relationship(&node.class_name, rel)
            .ok_or_else(|| InstanceError::UndeclaredRelationship {
                class: node.class_name.clone(),
                relationship: rel.to_string(),
            })?;
        match node.refs.get(rel) {
            Some(value) => Ok(value.clone()),
            None => match decl.multiplicity {
                Multiplicity::Many => Ok(RefValue::Many(Vec::new())),
                Multiplicity::One => Err(InstanceError::Unset {
                    object: self.object_ref(from),
                    relationship: rel.to_string(),
                }),
            },
        }
    }

    /// `navigate` flattened to a list: a one-valued relationship yields a
    /// singleton, an unset one yields the empty list. Traversal and
    /// quantifier evaluation both run over this view.
    pub fn children(&self, from: ObjectKey, rel: &str) -> Result<Vec<ObjectKey>, InstanceError> {
        match self.navigate(from, rel) {
            Ok(RefValue::One(k)) => Ok(vec![k]),
            Ok(RefValue::Many(ks)) => Ok(ks),
            Err(InstanceError::Unset { .. }) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    /// All stored objects of a class, in ascending id order. The ordering
    /// is a function of instance content, which keeps traversals and
    /// certificates reproducible.
    pub fn objects_of(&self, class: &str) -> Result<Vec<ObjectKey>, InstanceError> {
        if self.metamodel.class(class).is_none() {
            return Err(InstanceError::UnknownClass(class.to_string()));
        }
        Ok(self.by_class.get(class).cloned().unwrap_or_default())
    }

    /// Structural equality: same metamodel, same `(class, id)` population,
    /// same flags, references resolved to `(class, id)` pairs, same root.
    /// Synthetic keys are ignored, so two instances built in different
    /// orders compare equal when their graphs agree.
    pub fn structurally_equal(&self, other: &ModelInstance) -> bool {
        if *self.metamodel != *other.metamodel {
            return false;
        }
        if self.object_ref(self.root) != other.object_ref(other.root) {
            return false;
        }
        // Flags, references as (class, id) lists, and the one/many shape
        // of each slot.
        type CanonObject = (
            BTreeMap<String, bool>,
            BTreeMap<String, Vec<ObjectRef>>,
            BTreeMap<String, bool>,
        );
        let canon = |inst: &ModelInstance| -> BTreeMap<ObjectRef, CanonObject> {
            inst.objects
                .values()
                .map(|node| {
                    let mut refs = BTreeMap::new();
                    let mut is_one = BTreeMap::new();
                    for (rel, value) in &node.refs {
                        let list = match value {
                            RefValue::One(k) => {
                                is_one.insert(rel.clone(), true);
                                vec![inst.object_ref(*k)]
                            }
                            RefValue::Many(ks) => {
                                is_one.insert(rel.clone(), false);
                                ks.iter().map(|k| inst.object_ref(*k)).collect()
                            }
                        };
                        refs.insert(rel.clone(), list);
                    }
                    (
                        ObjectRef::new(node.class_name.clone(), node.id),
                        (node.flags.clone(), refs, is_one),
                    )
                })
                .collect()
        };
        canon(self) == canon(other)
    }
}

impl PartialEq for ModelInstance {
    fn eq(&self, other: &Self) -> bool {
        self.structurally_equal(other)
    }
}
