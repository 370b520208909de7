//! Seeded random transformation cases for self-checks and property tests.
//!
//! A generated case is a pair of mirrored containment metamodels, an
//! id-copying rung per class, a ladder following the class tree (joins
//! where a class has several children), and a source instance in which
//! every class is inhabited, so every rung is exercised at least once.
//! Fault injection comes in two flavors: a structural mutation of a target
//! instance, and an off-by-one rewrite of a single rung's map.

use rand::Rng;
use std::sync::Arc;

use crate::contracts::{Expr, Rung};
use crate::instance::{InstanceBuilder, ModelInstance, ObjectKey, RefValue};
use crate::ladder::{base, join, step, LadderIndex, LadderNode, LadderT, OrderedTransformation};
use crate::metamodel::{ClassSchema, Metamodel, Multiplicity};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Containment depth of the class tree, root included.
    pub max_depth: usize,
    /// Maximum child classes per class (joins arise beyond one).
    pub max_branch: usize,
    /// Maximum non-root classes overall.
    pub max_classes: usize,
    /// Maximum instance children per parent per many-valued relationship.
    pub max_children: usize,
    /// Maximum objects per class in the generated instance.
    pub max_objects_per_class: usize,
    /// Rewrite one non-root rung's precondition to `false`.
    pub vacuous_rung: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_branch: 3,
            max_classes: 9,
            max_children: 2,
            max_objects_per_class: 5,
            vacuous_rung: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCase {
    pub name: String,
    pub src_mm: Arc<Metamodel>,
    pub tgt_mm: Arc<Metamodel>,
    pub transformation: OrderedTransformation,
    pub src: ModelInstance,
    /// Name of the rung whose precondition was forced to `false`, when
    /// the config asked for one.
    pub vacuous_rung: Option<String>,
}

struct ClassNode {
    children: Vec<usize>,
    one_valued: Vec<bool>,
}

/// Generates one case. Deterministic in the RNG state.
pub fn generate_case(rng: &mut impl Rng, cfg: &GenConfig) -> GeneratedCase {
    // Class tree: index 0 is the root; each child edge carries one
    // relationship on each side.
    let mut nodes: Vec<ClassNode> = vec![ClassNode {
        children: Vec::new(),
        one_valued: Vec::new(),
    }];
    let mut frontier = vec![0usize];
    for depth in 1..cfg.max_depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let remaining = cfg.max_classes.saturating_sub(nodes.len() - 1);
            if remaining == 0 {
                break;
            }
            let max_here = cfg.max_branch.min(remaining);
            let mut count = rng.gen_range(0..=max_here);
            if parent == 0 && depth == 1 && count == 0 {
                count = 1; // the root always has something to transform
            }
            for _ in 0..count {
                let idx = nodes.len();
                nodes.push(ClassNode {
                    children: Vec::new(),
                    one_valued: Vec::new(),
                });
                nodes[parent].children.push(idx);
                nodes[parent].one_valued.push(rng.gen_bool(0.25));
                next.push(idx);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }

    let src_mm = Arc::new(build_metamodel("source", "S", &nodes));
    let tgt_mm = Arc::new(build_metamodel("target", "T", &nodes));

    let mut rungs: Vec<Rung> = (0..nodes.len())
        .map(|i| Rung::copy_id(format!("rung{i}"), format!("S{i}"), format!("T{i}")))
        .collect();
    let mut vacuous_rung = None;
    if cfg.vacuous_rung && nodes.len() > 1 {
        let victim = rng.gen_range(1..nodes.len());
        rungs[victim].pre = Expr::Bool(false);
        vacuous_rung = Some(rungs[victim].name.clone());
    }

    let body = ladder_for(0, &nodes, &rungs, &src_mm, &tgt_mm);
    let transformation = OrderedTransformation {
        name: "generated".into(),
        src_mm: src_mm.clone(),
        tgt_mm: tgt_mm.clone(),
        root_rung: rungs[0].clone(),
        body,
    };

    let src = generate_instance(rng, cfg, &src_mm, &nodes);

    GeneratedCase {
        name: "generated".into(),
        src_mm,
        tgt_mm,
        transformation,
        src,
        vacuous_rung,
    }
}

fn build_metamodel(name: &str, prefix: &str, nodes: &[ClassNode]) -> Metamodel {
    let mut mm = Metamodel::new(name, format!("{prefix}0"));
    for (i, node) in nodes.iter().enumerate() {
        let mut class = ClassSchema::new(format!("{prefix}{i}"));
        for (j, &child) in node.children.iter().enumerate() {
            let rel = format!("{}{child}", prefix.to_lowercase());
            let mult = if node.one_valued[j] {
                Multiplicity::One
            } else {
                Multiplicity::Many
            };
            class = class.with_relationship(rel, format!("{prefix}{child}"), mult);
        }
        mm = mm.with_class(class);
    }
    mm
}

fn ladder_for(
    class: usize,
    nodes: &[ClassNode],
    rungs: &[Rung],
    src_mm: &Metamodel,
    tgt_mm: &Metamodel,
) -> LadderT {
    let index = LadderIndex::of_rung(&rungs[class]);
    let mut branches = Vec::new();
    for &child in &nodes[class].children {
        let src_rel = format!("s{child}");
        let tgt_rel = format!("t{child}");
        let node = if nodes[child].children.is_empty() {
            base(
                src_mm,
                tgt_mm,
                index.clone(),
                rungs[child].clone(),
                &src_rel,
                &tgt_rel,
            )
            .expect("generated shapes are well-formed")
        } else {
            let rest = ladder_for(child, nodes, rungs, src_mm, tgt_mm);
            step(
                src_mm,
                tgt_mm,
                index.clone(),
                rungs[child].clone(),
                &src_rel,
                &tgt_rel,
                rest,
            )
            .expect("generated shapes are well-formed")
        };
        branches.push(node);
    }
    let mut it = branches.into_iter();
    let first = it
        .next()
        .expect("ladder_for is only called for classes with children");
    it.fold(first, |acc, next| {
        join(acc, next).expect("branches share the index")
    })
}

fn generate_instance(
    rng: &mut impl Rng,
    cfg: &GenConfig,
    src_mm: &Arc<Metamodel>,
    nodes: &[ClassNode],
) -> ModelInstance {
    let mut builder = InstanceBuilder::new(src_mm.clone());
    let mut next_id = 1u64;
    let mut per_class: Vec<Vec<ObjectKey>> = vec![Vec::new(); nodes.len()];

    let root = builder
        .declare_object("S0", next_id, &[])
        .expect("root class exists");
    next_id += 1;
    per_class[0].push(root);

    // Walk classes in index order; parents of class i are created before
    // any class j > i is processed.
    for class in 0..nodes.len() {
        let parents = per_class[class].clone();
        for (j, &child_class) in nodes[class].children.iter().enumerate() {
            let one_valued = nodes[class].one_valued[j];
            let rel = format!("s{child_class}");
            for (p_idx, &parent) in parents.iter().enumerate() {
                let room = cfg
                    .max_objects_per_class
                    .saturating_sub(per_class[child_class].len());
                let count = if one_valued {
                    1.min(room)
                } else {
                    let mut c = rng.gen_range(0..=cfg.max_children.min(room));
                    if p_idx == 0 && c == 0 && room > 0 {
                        c = 1; // keep every class inhabited
                    }
                    c
                };
                for _ in 0..count {
                    let key = builder
                        .declare_object(&format!("S{child_class}"), next_id, &[])
                        .expect("ids are fresh");
                    next_id += 1;
                    builder
                        .link(parent, &rel, key)
                        .expect("generated links are declared");
                    per_class[child_class].push(key);
                }
            }
        }
    }

    builder
        .freeze(root)
        .expect("generated instances are valid")
        .0
}

// ---------------------------------------------------------------------------
// Fault injection
// ---------------------------------------------------------------------------

/// A rebuildable flat view of an instance, refs by `(class, id)`.
struct ObjSpec {
    class: String,
    id: u64,
    flags: Vec<(String, bool)>,
    refs: Vec<(String, RefSpecValue)>,
}

enum RefSpecValue {
    One((String, u64)),
    Many(Vec<(String, u64)>),
}

fn to_specs(inst: &ModelInstance) -> (Vec<ObjSpec>, (String, u64)) {
    let mut keys: Vec<ObjectKey> = inst.keys().collect();
    keys.sort_by_key(|k| {
        let node = inst.object(*k);
        (node.class_name.clone(), node.id)
    });
    let specs = keys
        .iter()
        .map(|&k| {
            let node = inst.object(k);
            let pair = |key: ObjectKey| {
                let n = inst.object(key);
                (n.class_name.clone(), n.id)
            };
            ObjSpec {
                class: node.class_name.clone(),
                id: node.id,
                flags: node.flags.iter().map(|(n, v)| (n.clone(), *v)).collect(),
                refs: node
                    .refs
                    .iter()
                    .map(|(rel, value)| {
                        let v = match value {
                            RefValue::One(c) => RefSpecValue::One(pair(*c)),
                            RefValue::Many(cs) => {
                                RefSpecValue::Many(cs.iter().map(|c| pair(*c)).collect())
                            }
                        };
                        (rel.clone(), v)
                    })
                    .collect(),
            }
        })
        .collect();
    let root = inst.object(inst.root());
    (specs, (root.class_name.clone(), root.id))
}

fn from_specs(mm: Arc<Metamodel>, specs: &[ObjSpec], root: &(String, u64)) -> ModelInstance {
    let mut builder = InstanceBuilder::new(mm);
    for spec in specs {
        let flags: Vec<(&str, bool)> = spec.flags.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        builder
            .declare_object(&spec.class, spec.id, &flags)
            .expect("specs are consistent");
    }
    for spec in specs {
        let key = builder.find(&spec.class, spec.id).unwrap();
        for (rel, value) in &spec.refs {
            let targets: Vec<&(String, u64)> = match value {
                RefSpecValue::One(t) => vec![t],
                RefSpecValue::Many(ts) => ts.iter().collect(),
            };
            for (class, id) in targets {
                let child = builder.find(class, *id).expect("specs are closed");
                builder.link(key, rel, child).expect("specs are well-typed");
            }
        }
    }
    let root_key = builder
        .find(&root.0, root.1)
        .expect("root survives mutation");
    builder
        .freeze(root_key)
        .expect("mutated instances still freeze")
        .0
}

/// Applies one structural mutation to an instance: renumber one object,
/// drop the last element of a list, or swap the first two. Returns the
/// mutated instance and a description of what changed.
pub fn mutate_target(rng: &mut impl Rng, inst: &ModelInstance) -> (ModelInstance, String) {
    let (mut specs, root) = to_specs(inst);
    let max_id = specs.iter().map(|s| s.id).max().unwrap_or(0);

    let kind = rng.gen_range(0..3u8);
    if kind == 1 {
        // Drop the last element of some nonempty list.
        let candidates: Vec<usize> = specs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.refs
                    .iter()
                    .any(|(_, v)| matches!(v, RefSpecValue::Many(l) if !l.is_empty()))
            })
            .map(|(i, _)| i)
            .collect();
        if let Some(&idx) =
            candidates.get(rng.gen_range(0..candidates.len().max(1)) % candidates.len().max(1))
        {
            let spec = &mut specs[idx];
            let description;
            {
                let (rel, value) = spec
                    .refs
                    .iter_mut()
                    .find(|(_, v)| matches!(v, RefSpecValue::Many(l) if !l.is_empty()))
                    .unwrap();
                let RefSpecValue::Many(list) = value else {
                    unreachable!()
                };
                let dropped = list.pop().unwrap();
                description = format!(
                    "dropped {}#{} from {} of {}#{}",
                    dropped.0, dropped.1, rel, spec.class, spec.id
                );
            }
            return (
                from_specs(inst.metamodel().clone(), &specs, &root),
                description,
            );
        }
    }
    if kind == 2 {
        // Swap the first two elements of some list with at least two.
        let candidates: Vec<usize> = specs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.refs
                    .iter()
                    .any(|(_, v)| matches!(v, RefSpecValue::Many(l) if l.len() >= 2))
            })
            .map(|(i, _)| i)
            .collect();
        if !candidates.is_empty() {
            let idx = candidates[rng.gen_range(0..candidates.len())];
            let spec = &mut specs[idx];
            let (rel, value) = spec
                .refs
                .iter_mut()
                .find(|(_, v)| matches!(v, RefSpecValue::Many(l) if l.len() >= 2))
                .unwrap();
            let RefSpecValue::Many(list) = value else {
                unreachable!()
            };
            list.swap(0, 1);
            let description = format!(
                "swapped the first two of {} of {}#{}",
                rel, spec.class, spec.id
            );
            return (
                from_specs(inst.metamodel().clone(), &specs, &root),
                description,
            );
        }
    }

    // Renumber one object (always applicable).
    let idx = rng.gen_range(0..specs.len());
    let old = (specs[idx].class.clone(), specs[idx].id);
    let new_id = max_id + 1 + rng.gen_range(0..100u64);
    specs[idx].id = new_id;
    for spec in &mut specs {
        for (_, value) in &mut spec.refs {
            match value {
                RefSpecValue::One(t) => {
                    if *t == old {
                        t.1 = new_id;
                    }
                }
                RefSpecValue::Many(ts) => {
                    for t in ts {
                        if *t == old {
                            t.1 = new_id;
                        }
                    }
                }
            }
        }
    }
    let root = if root == old {
        (old.0.clone(), new_id)
    } else {
        root
    };
    let description = format!("renumbered {}#{} to {}", old.0, old.1, new_id);
    (
        from_specs(inst.metamodel().clone(), &specs, &root),
        description,
    )
}

/// Rewrites one rung's map to `id <- succ(src.id)`, leaving its contract
/// untouched, and rebuilds the transformation with consistent indices.
/// Returns the mutated transformation and the rung's name.
pub fn mutate_rung_map(
    rng: &mut impl Rng,
    ot: &OrderedTransformation,
) -> (OrderedTransformation, String) {
    let mut names = vec![ot.root_rung.name.clone()];
    for rung in ot.body.rungs() {
        if !names.contains(&rung.name) {
            names.push(rung.name.clone());
        }
    }
    let victim = names[rng.gen_range(0..names.len())].clone();
    let mutated = map_rungs(ot, &|rung: &Rung| {
        if rung.name == victim {
            let mut r = rung.clone();
            r.map.id_expr = Expr::succ(Expr::SrcId);
            r
        } else {
            rung.clone()
        }
    });
    (mutated, victim)
}

/// Rebuilds a transformation with every rung passed through `f`,
/// recomputing ladder indices so step nesting stays consistent.
pub fn map_rungs(ot: &OrderedTransformation, f: &impl Fn(&Rung) -> Rung) -> OrderedTransformation {
    fn rebuild(node: &LadderT, parent: &Rung, f: &impl Fn(&Rung) -> Rung) -> LadderT {
        let index = LadderIndex::of_rung(parent);
        match &node.node {
            LadderNode::Base {
                child,
                src_rel,
                tgt_rel,
            } => LadderT {
                index,
                node: LadderNode::Base {
                    child: f(child),
                    src_rel: src_rel.clone(),
                    tgt_rel: tgt_rel.clone(),
                },
            },
            LadderNode::Step {
                child,
                src_rel,
                tgt_rel,
                rest,
            } => {
                let new_child = f(child);
                let new_rest = rebuild(rest, &new_child, f);
                LadderT {
                    index,
                    node: LadderNode::Step {
                        child: new_child,
                        src_rel: src_rel.clone(),
                        tgt_rel: tgt_rel.clone(),
                        rest: Box::new(new_rest),
                    },
                }
            }
            LadderNode::Join { left, right } => LadderT {
                index,
                node: LadderNode::Join {
                    left: Box::new(rebuild(left, parent, f)),
                    right: Box::new(rebuild(right, parent, f)),
                },
            },
        }
    }
    let root_rung = f(&ot.root_rung);
    let body = rebuild(&ot.body, &root_rung, f);
    OrderedTransformation {
        name: ot.name.clone(),
        src_mm: ot.src_mm.clone(),
        tgt_mm: ot.tgt_mm.clone(),
        root_rung,
        body,
    }
}
