//! Name resolution and structural checking of parsed documents.
//!
//! Sections may be split across documents: all metamodels are elaborated
//! first, then instances, then transformations, resolving names against
//! everything seen so far. Each transformation's root rung is the unique
//! rung whose source class is the source metamodel's root class.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::contracts::{Expr, MapExpr, Rung};
use crate::dsl::lexer::{Diagnostic, Pos};
use crate::dsl::parser::{RawDocument, RawEntryValue, RawLadder, RawMap, RawTransform};
use crate::instance::{InstanceBuilder, ModelInstance, ObjectKey};
use crate::ladder::{self, LadderIndex, LadderT, OrderedTransformation};
use crate::metamodel::{
    validate_metamodel, ClassSchema, Metamodel, Multiplicity, RelationshipDecl, BASE_ATTR,
};

/// Everything a set of documents declares, fully resolved.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub metamodels: BTreeMap<String, Arc<Metamodel>>,
    pub instances: BTreeMap<String, ModelInstance>,
    pub transformations: BTreeMap<String, OrderedTransformation>,
    pub warnings: Vec<String>,
}

impl PartialEq for Bundle {
    fn eq(&self, other: &Self) -> bool {
        self.metamodels == other.metamodels
            && self.instances == other.instances
            && self.transformations == other.transformations
    }
}

struct Ctx {
    diagnostics: Vec<Diagnostic>,
    source: Option<String>,
}

impl Ctx {
    fn diag(&mut self, pos: Pos, message: impl Into<String>) {
        let mut d = Diagnostic::at(pos, message);
        d.source = self.source.clone();
        self.diagnostics.push(d);
    }
}

/// Elaborates parsed documents into a bundle texts may reference each
/// other's declarations. Returns every semantic diagnostic found rather
/// than stopping at the first.
pub fn elaborate(docs: &[RawDocument]) -> Result<Bundle, Vec<Diagnostic>> {
    let mut bundle = Bundle::default();
    let mut ctx = Ctx {
        diagnostics: Vec::new(),
        source: None,
    };

    for doc in docs {
        ctx.source = doc.source.clone();
        for raw in &doc.metamodels {
            if bundle.metamodels.contains_key(&raw.name) {
                ctx.diag(raw.pos, format!("metamodel {} is declared twice", raw.name));
                continue;
            }
            let mm = Metamodel {
                name: raw.name.clone(),
                root_class: raw.root.clone(),
                classes: raw
                    .classes
                    .iter()
                    .map(|c| ClassSchema {
                        name: c.name.clone(),
                        flags: c.flags.clone(),
                        relationships: c
                            .rels
                            .iter()
                            .map(|r| RelationshipDecl {
                                name: r.name.clone(),
                                target_class: r.target.clone(),
                                multiplicity: if r.many {
                                    Multiplicity::Many
                                } else {
                                    Multiplicity::One
                                },
                            })
                            .collect(),
                    })
                    .collect(),
            };
            let report = validate_metamodel(&mm);
            for v in &report.violations {
                ctx.diag(raw.pos, format!("metamodel {}: {v}", raw.name));
            }
            for w in &report.warnings {
                bundle.warnings.push(format!("metamodel {}: {w}", raw.name));
            }
            if report.is_ok() {
                bundle.metamodels.insert(raw.name.clone(), Arc::new(mm));
            }
        }
    }

    for doc in docs {
        ctx.source = doc.source.clone();
        for raw in &doc.instances {
            if bundle.instances.contains_key(&raw.name) {
                ctx.diag(raw.pos, format!("instance {} is declared twice", raw.name));
                continue;
            }
            let Some(mm) = bundle.metamodels.get(&raw.metamodel) else {
                ctx.diag(
                    raw.pos,
                    format!(
                        "instance {} references unknown metamodel {}",
                        raw.name, raw.metamodel
                    ),
                );
                continue;
            };
            if let Some(instance) =
                elaborate_instance(raw, mm.clone(), &mut ctx, &mut bundle.warnings)
            {
                bundle.instances.insert(raw.name.clone(), instance);
            }
        }
    }

    for doc in docs {
        ctx.source = doc.source.clone();
        for raw in &doc.transforms {
            if bundle.transformations.contains_key(&raw.name) {
                ctx.diag(raw.pos, format!("transform {} is declared twice", raw.name));
                continue;
            }
            if let Some(ot) =
                elaborate_transform(raw, &bundle.metamodels, &mut ctx, &mut bundle.warnings)
            {
                bundle.transformations.insert(raw.name.clone(), ot);
            }
        }
    }

    if ctx.diagnostics.is_empty() {
        Ok(bundle)
    } else {
        Err(ctx.diagnostics)
    }
}

fn elaborate_instance(
    raw: &crate::dsl::parser::RawInstance,
    mm: Arc<Metamodel>,
    ctx: &mut Ctx,
    warnings: &mut Vec<String>,
) -> Option<ModelInstance> {
    let before = ctx.diagnostics.len();
    let mut builder = InstanceBuilder::new(mm.clone());
    let mut keys: BTreeMap<(String, u64), ObjectKey> = BTreeMap::new();

    // First pass: declare every object so references may point forward.
    for obj in &raw.objects {
        let mut flags: Vec<(&str, bool)> = Vec::new();
        let schema = mm.class(&obj.class);
        for entry in &obj.entries {
            if let RawEntryValue::Flag(v) = entry.value {
                // Only treat it as a flag if the schema says so; a
                // relationship named like a boolean would be a schema
                // error reported below.
                if schema.map(|s| s.has_flag(&entry.name)).unwrap_or(false) {
                    flags.push((entry.name.as_str(), v));
                } else {
                    ctx.diag(
                        entry.pos,
                        format!("class {} declares no flag {}", obj.class, entry.name),
                    );
                }
            }
        }
        match builder.declare_object(&obj.class, obj.id, &flags) {
            Ok(key) => {
                keys.insert((obj.class.clone(), obj.id), key);
            }
            Err(e) => ctx.diag(obj.pos, e.to_string()),
        }
    }

    // Second pass: wire references.
    for obj in &raw.objects {
        let Some(&key) = keys.get(&(obj.class.clone(), obj.id)) else {
            continue;
        };
        for entry in &obj.entries {
            let targets: Vec<(String, u64)> = match &entry.value {
                RawEntryValue::Flag(_) => continue,
                RawEntryValue::RefOne(class, id) => vec![(class.clone(), *id)],
                RawEntryValue::RefMany(refs) => refs.clone(),
            };
            let decl = mm.relationship(&obj.class, &entry.name);
            match (decl, &entry.value) {
                (None, _) => {
                    ctx.diag(
                        entry.pos,
                        format!(
                            "class {} declares no relationship {}",
                            obj.class, entry.name
                        ),
                    );
                    continue;
                }
                (Some(d), RawEntryValue::RefOne(..)) if d.multiplicity != Multiplicity::One => {
                    ctx.diag(
                        entry.pos,
                        format!(
                            "relationship {} of {} is many-valued, use a list",
                            entry.name, obj.class
                        ),
                    );
                    continue;
                }
                (Some(d), RawEntryValue::RefMany(..)) if d.multiplicity != Multiplicity::Many => {
                    ctx.diag(
                        entry.pos,
                        format!(
                            "relationship {} of {} is one-valued, drop the brackets",
                            entry.name, obj.class
                        ),
                    );
                    continue;
                }
                _ => {}
            }
            for (class, id) in targets {
                match keys.get(&(class.clone(), id)) {
                    None => ctx.diag(
                        entry.pos,
                        format!("{}#{} is not declared in this instance", class, id),
                    ),
                    Some(&child) => {
                        if let Err(e) = builder.link(key, &entry.name, child) {
                            ctx.diag(entry.pos, e.to_string());
                        }
                    }
                }
            }
        }
    }

    // The root is the unique object of the root class.
    let roots: Vec<ObjectKey> = raw
        .objects
        .iter()
        .filter(|o| o.class == mm.root_class)
        .filter_map(|o| keys.get(&(o.class.clone(), o.id)).copied())
        .collect();
    let root = match roots.as_slice() {
        [one] => *one,
        [] => {
            ctx.diag(
                raw.pos,
                format!(
                    "instance {} declares no object of root class {}",
                    raw.name, mm.root_class
                ),
            );
            return None;
        }
        _ => {
            ctx.diag(
                raw.pos,
                format!(
                    "instance {} declares more than one object of root class {}",
                    raw.name, mm.root_class
                ),
            );
            return None;
        }
    };

    if ctx.diagnostics.len() > before {
        return None;
    }
    match builder.freeze(root) {
        Ok((instance, freeze_warnings)) => {
            for w in freeze_warnings {
                warnings.push(format!("instance {}: {w}", raw.name));
            }
            Some(instance)
        }
        Err(e) => {
            ctx.diag(raw.pos, e.to_string());
            None
        }
    }
}

fn elaborate_transform(
    raw: &RawTransform,
    metamodels: &BTreeMap<String, Arc<Metamodel>>,
    ctx: &mut Ctx,
    warnings: &mut Vec<String>,
) -> Option<OrderedTransformation> {
    let Some(src_mm) = metamodels.get(&raw.src_mm) else {
        ctx.diag(
            raw.pos,
            format!(
                "transform {} references unknown metamodel {}",
                raw.name, raw.src_mm
            ),
        );
        return None;
    };
    let Some(tgt_mm) = metamodels.get(&raw.tgt_mm) else {
        ctx.diag(
            raw.pos,
            format!(
                "transform {} references unknown metamodel {}",
                raw.name, raw.tgt_mm
            ),
        );
        return None;
    };

    let mut rungs: BTreeMap<String, Rung> = BTreeMap::new();
    for raw_rung in &raw.rungs {
        if rungs.contains_key(&raw_rung.name) {
            ctx.diag(
                raw_rung.pos,
                format!("rung {} is declared twice", raw_rung.name),
            );
            continue;
        }
        let Some(map) = elaborate_map(&raw_rung.map, &raw_rung.tgt_class, tgt_mm, ctx) else {
            continue;
        };
        rungs.insert(
            raw_rung.name.clone(),
            Rung {
                name: raw_rung.name.clone(),
                src_class: raw_rung.src_class.clone(),
                tgt_class: raw_rung.tgt_class.clone(),
                pre: raw_rung.pre.clone(),
                post_data: raw_rung.post.clone(),
                map,
            },
        );
    }

    // The root rung is the one starting at the source root class.
    let root_candidates: Vec<&Rung> = rungs
        .values()
        .filter(|r| r.src_class == src_mm.root_class)
        .collect();
    let root_rung = match root_candidates.as_slice() {
        [one] => (*one).clone(),
        [] => {
            ctx.diag(
                raw.pos,
                format!(
                    "transform {} has no rung starting at root class {}",
                    raw.name, src_mm.root_class
                ),
            );
            return None;
        }
        _ => {
            ctx.diag(
                raw.pos,
                format!(
                    "transform {} has more than one rung starting at root class {}",
                    raw.name, src_mm.root_class
                ),
            );
            return None;
        }
    };

    let body = elaborate_ladder(
        &raw.ladder,
        LadderIndex::of_rung(&root_rung),
        &rungs,
        src_mm,
        tgt_mm,
        ctx,
    )?;

    let ot = OrderedTransformation {
        name: raw.name.clone(),
        src_mm: src_mm.clone(),
        tgt_mm: tgt_mm.clone(),
        root_rung,
        body,
    };
    let report = ladder::well_formed(&ot);
    for v in &report.violations {
        ctx.diag(raw.pos, format!("transform {}: {v}", raw.name));
    }
    for w in &report.warnings {
        warnings.push(format!("transform {}: {w}", raw.name));
    }
    if report.is_ok() {
        Some(ot)
    } else {
        None
    }
}

fn elaborate_map(
    raw: &RawMap,
    target_class: &str,
    tgt_mm: &Metamodel,
    ctx: &mut Ctx,
) -> Option<MapExpr> {
    let mut id_expr: Option<Expr> = None;
    let mut flag_assignments = Vec::new();
    for (name, expr, pos) in &raw.assignments {
        if name == BASE_ATTR {
            if id_expr.is_some() {
                ctx.diag(*pos, format!("map assigns {BASE_ATTR} twice"));
                return None;
            }
            id_expr = Some(expr.clone());
        } else {
            flag_assignments.push((name.clone(), expr.clone()));
        }
    }
    let Some(id_expr) = id_expr else {
        ctx.diag(raw.pos, format!("map must assign {BASE_ATTR} exactly once"));
        return None;
    };
    let mut map = MapExpr {
        target_class: target_class.to_string(),
        id_expr,
        flag_assignments,
        emits: Vec::new(),
    };
    for raw_emit in &raw.emits {
        // The emitted class is whatever the relationship targets.
        let Some(decl) = tgt_mm.relationship(target_class, &raw_emit.relationship) else {
            ctx.diag(
                raw_emit.pos,
                format!(
                    "class {target_class} declares no relationship {}",
                    raw_emit.relationship
                ),
            );
            return None;
        };
        let emit_map = elaborate_map(&raw_emit.map, &decl.target_class.clone(), tgt_mm, ctx)?;
        map = map.with_emit(raw_emit.relationship.clone(), raw_emit.placement, emit_map);
    }
    Some(map)
}

fn elaborate_ladder(
    raw: &RawLadder,
    index: LadderIndex,
    rungs: &BTreeMap<String, Rung>,
    src_mm: &Arc<Metamodel>,
    tgt_mm: &Arc<Metamodel>,
    ctx: &mut Ctx,
) -> Option<LadderT> {
    match raw {
        RawLadder::Base {
            rung,
            src_rel,
            tgt_rel,
            pos,
        } => {
            let Some(child) = rungs.get(rung) else {
                ctx.diag(*pos, format!("unknown rung {rung}"));
                return None;
            };
            match ladder::base(src_mm, tgt_mm, index, child.clone(), src_rel, tgt_rel) {
                Ok(t) => Some(t),
                Err(e) => {
                    ctx.diag(*pos, e.to_string());
                    None
                }
            }
        }
        RawLadder::Step {
            rung,
            src_rel,
            tgt_rel,
            rest,
            pos,
        } => {
            let Some(child) = rungs.get(rung) else {
                ctx.diag(*pos, format!("unknown rung {rung}"));
                return None;
            };
            let rest = elaborate_ladder(
                rest,
                LadderIndex::of_rung(child),
                rungs,
                src_mm,
                tgt_mm,
                ctx,
            )?;
            match ladder::step(src_mm, tgt_mm, index, child.clone(), src_rel, tgt_rel, rest) {
                Ok(t) => Some(t),
                Err(e) => {
                    ctx.diag(*pos, e.to_string());
                    None
                }
            }
        }
        RawLadder::Join { left, right, pos } => {
            let left = elaborate_ladder(left, index.clone(), rungs, src_mm, tgt_mm, ctx)?;
            let right = elaborate_ladder(right, index, rungs, src_mm, tgt_mm, ctx)?;
            match ladder::join(left, right) {
                Ok(t) => Some(t),
                Err(e) => {
                    ctx.diag(*pos, e.to_string());
                    None
                }
            }
        }
    }
}
