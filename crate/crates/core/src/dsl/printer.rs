//! Canonical printing. `parse(print(x))` is structurally identical to `x`.

use crate::contracts::{Expr, MapExpr, Placement, Rung};
use crate::dsl::elaborate::Bundle;
use crate::instance::{ModelInstance, ObjectKey, RefValue};
use crate::ladder::{LadderNode, LadderT, OrderedTransformation};
use crate::metamodel::{Metamodel, Multiplicity, BASE_ATTR};

pub fn print_metamodel(mm: &Metamodel) -> String {
    let mut out = String::new();
    out.push_str(&format!("metamodel {} {{\n", mm.name));
    out.push_str(&format!("  root {};\n", mm.root_class));
    for class in &mm.classes {
        if class.flags.is_empty() && class.relationships.is_empty() {
            out.push_str(&format!("  class {} {{}}\n", class.name));
            continue;
        }
        out.push_str(&format!("  class {} {{\n", class.name));
        for flag in &class.flags {
            out.push_str(&format!("    flag {flag};\n"));
        }
        for rel in &class.relationships {
            let mult = match rel.multiplicity {
                Multiplicity::One => "one",
                Multiplicity::Many => "many",
            };
            out.push_str(&format!(
                "    rel {} : {} {mult};\n",
                rel.name, rel.target_class
            ));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Prints an instance, objects sorted by `(class, id)`. Flags and
/// relationships appear in schema order; unset one-valued relationships
/// are omitted.
pub fn print_instance(name: &str, inst: &ModelInstance) -> String {
    let mm = inst.metamodel();
    let mut out = String::new();
    out.push_str(&format!("instance {} : {} {{\n", name, mm.name));

    let mut keys: Vec<ObjectKey> = inst.keys().collect();
    keys.sort_by_key(|k| {
        let node = inst.object(*k);
        (node.class_name.clone(), node.id)
    });

    for key in keys {
        let node = inst.object(key);
        let schema = mm
            .class(&node.class_name)
            .expect("frozen instances are schema-typed");
        let mut entries: Vec<String> = Vec::new();
        for flag in &schema.flags {
            entries.push(format!("{flag}={}", node.flags[flag]));
        }
        for rel in &schema.relationships {
            match node.refs.get(&rel.name) {
                Some(RefValue::One(child)) => {
                    entries.push(format!("{}={}", rel.name, inst.object_ref(*child)));
                }
                Some(RefValue::Many(children)) => {
                    let items: Vec<String> = children
                        .iter()
                        .map(|c| inst.object_ref(*c).to_string())
                        .collect();
                    entries.push(format!("{}=[{}]", rel.name, items.join(", ")));
                }
                None => {} // unset one-valued relationship
            }
        }
        if entries.is_empty() {
            out.push_str(&format!("  {}#{} {{}}\n", node.class_name, node.id));
        } else {
            out.push_str(&format!(
                "  {}#{} {{ {} }}\n",
                node.class_name,
                node.id,
                entries.join(", ")
            ));
        }
    }
    out.push_str("}\n");
    out
}

pub fn print_transformation(ot: &OrderedTransformation) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "transform {} : {} -> {} {{\n",
        ot.name, ot.src_mm.name, ot.tgt_mm.name
    ));
    out.push_str(&print_rung(&ot.root_rung));
    let mut seen = vec![ot.root_rung.name.clone()];
    for rung in ot.body.rungs() {
        if !seen.contains(&rung.name) {
            seen.push(rung.name.clone());
            out.push_str(&print_rung(rung));
        }
    }
    out.push_str(&format!("  ladder: {};\n", render_ladder(&ot.body)));
    out.push_str("}\n");
    out
}

fn render_ladder(t: &LadderT) -> String {
    match &t.node {
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
                render_ladder(rest)
            )
        }
        LadderNode::Join { left, right } => {
            format!("join({}, {})", render_ladder(left), render_ladder(right))
        }
    }
}

fn print_rung(rung: &Rung) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "  rung {} : {} -> {} {{\n",
        rung.name, rung.src_class, rung.tgt_class
    ));
    out.push_str(&format!("    pre: {};\n", print_expr(&rung.pre)));
    out.push_str(&format!("    post: {};\n", print_expr(&rung.post_data)));
    out.push_str(&print_map(&rung.map, 4));
    out.push_str("  }\n");
    out
}

fn print_map(map: &MapExpr, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let inner = " ".repeat(indent + 2);
    let mut out = String::new();
    out.push_str(&format!("{pad}map {{\n"));
    out.push_str(&format!(
        "{inner}{BASE_ATTR} <- {};\n",
        print_expr(&map.id_expr)
    ));
    for (flag, expr) in &map.flag_assignments {
        out.push_str(&format!("{inner}{flag} <- {};\n", print_expr(expr)));
    }
    for emit in &map.emits {
        let placement = match emit.placement {
            Placement::First => "first",
            Placement::Last => "last",
        };
        let block = print_map(&emit.map, indent + 2);
        // Reuse the map block but swap the head.
        let block = block.replacen(
            &format!("{inner}map {{"),
            &format!("{inner}emit {placement} {} {{", emit.relationship),
            1,
        );
        out.push_str(block.trim_end_matches('\n'));
        out.push_str(";\n");
    }
    out.push_str(&format!("{pad}}}\n"));
    out
}

/// Prints an expression with minimal parentheses.
pub fn print_expr(e: &Expr) -> String {
    print_prec(e, 0)
}

// Precedence levels, loosest first: -> 1, \/ 2, /\ 3, = 4, not 5, atoms 6.
fn print_prec(e: &Expr, parent: u8) -> String {
    let (text, prec) = match e {
        Expr::Bool(true) => ("true".to_string(), 6),
        Expr::Bool(false) => ("false".to_string(), 6),
        Expr::Nat(n) => (n.to_string(), 6),
        Expr::SrcId => (format!("src.{BASE_ATTR}"), 6),
        Expr::TgtId => (format!("tgt.{BASE_ATTR}"), 6),
        Expr::SrcFlag(name) => (format!("src.{name}"), 6),
        Expr::TgtFlag(name) => (format!("tgt.{name}"), 6),
        Expr::Succ(a) => (format!("succ({})", print_prec(a, 0)), 6),
        Expr::Not(a) => (format!("not {}", print_prec(a, 5)), 5),
        Expr::Eq(a, b) => (format!("{} = {}", print_prec(a, 5), print_prec(b, 5)), 4),
        Expr::And(a, b) => (format!("{} /\\ {}", print_prec(a, 3), print_prec(b, 4)), 3),
        Expr::Or(a, b) => (format!("{} \\/ {}", print_prec(a, 2), print_prec(b, 3)), 2),
        Expr::Implies(a, b) => (format!("{} -> {}", print_prec(a, 2), print_prec(b, 1)), 1),
    };
    if prec < parent {
        format!("({text})")
    } else {
        text
    }
}

/// Prints a whole bundle, sections keyed in name order.
pub fn print_bundle(bundle: &Bundle) -> String {
    let mut out = String::new();
    for mm in bundle.metamodels.values() {
        out.push_str(&print_metamodel(mm));
        out.push('\n');
    }
    for (name, inst) in &bundle.instances {
        out.push_str(&print_instance(name, inst));
        out.push('\n');
    }
    for ot in bundle.transformations.values() {
        out.push_str(&print_transformation(ot));
        out.push('\n');
    }
    // Drop the final blank separator line.
    if out.ends_with("\n\n") {
        out.pop();
    }
    out
}
