//! Shapes beyond the bundled example: one-valued rungs, skipped children
//! behind one-valued relationships, trailing and nested emits.

use std::sync::Arc;

use laddertx_core::certificate::CertNode;
use laddertx_core::contracts::{Expr, MapExpr, Placement, Rung};
use laddertx_core::engine::{execute, verify};
use laddertx_core::instance::{InstanceBuilder, RefInit};
use laddertx_core::ladder::{base, LadderIndex, OrderedTransformation};
use laddertx_core::metamodel::{ClassSchema, Metamodel, Multiplicity};

fn one_valued_setup(child_pre: Expr) -> (OrderedTransformation, laddertx_core::ModelInstance) {
    let src = Arc::new(
        Metamodel::new("people", "Person")
            .with_class(ClassSchema::new("Person").with_relationship(
                "passport",
                "Passport",
                Multiplicity::One,
            ))
            .with_class(ClassSchema::new("Passport")),
    );
    let tgt = Arc::new(
        Metamodel::new("registry", "Citizen")
            .with_class(ClassSchema::new("Citizen").with_relationship(
                "document",
                "Document",
                Multiplicity::One,
            ))
            .with_class(ClassSchema::new("Document")),
    );
    let root = Rung::copy_id("person2citizen", "Person", "Citizen");
    let mut child = Rung::copy_id("passport2document", "Passport", "Document");
    child.pre = child_pre;
    let body = base(
        &src,
        &tgt,
        LadderIndex::of_rung(&root),
        child,
        "passport",
        "document",
    )
    .unwrap();
    let ot = OrderedTransformation {
        name: "register".into(),
        src_mm: src.clone(),
        tgt_mm: tgt,
        root_rung: root,
        body,
    };

    let mut b = InstanceBuilder::new(src);
    let passport = b.build_object("Passport", 2, &[], &[]).unwrap();
    let person = b
        .build_object("Person", 1, &[], &[("passport", RefInit::One(passport))])
        .unwrap();
    let (instance, warnings) = b.freeze(person).unwrap();
    assert!(warnings.is_empty());
    (ot, instance)
}

#[test]
fn one_valued_rungs_link_single_children() {
    let (ot, src) = one_valued_setup(Expr::Bool(true));
    let run = execute(&ot, &src).unwrap();
    assert!(run.verdict.holds);
    let citizen = run.target.root();
    let documents = run.target.children(citizen, "document").unwrap();
    assert_eq!(documents.len(), 1);
    assert_eq!(run.target.object(documents[0]).id, 2);
    assert!(verify(&ot, &src, &run.target).unwrap().holds);
}

#[test]
fn a_skipped_child_leaves_a_one_valued_slot_unset_and_still_verifies() {
    let (ot, src) = one_valued_setup(Expr::Bool(false));
    let run = execute(&ot, &src).unwrap();
    assert!(run.verdict.holds, "failures: {:?}", run.verdict.failures);
    assert!(run.target.objects_of("Document").unwrap().is_empty());
    assert!(run
        .target
        .children(run.target.root(), "document")
        .unwrap()
        .is_empty());
    let mut vacuous = 0;
    run.certificate().root.for_each(&mut |node| {
        if matches!(node, CertNode::Vacuous { .. }) {
            vacuous += 1;
        }
    });
    assert_eq!(vacuous, 1);
    assert!(verify(&ot, &src, &run.target).unwrap().holds);
}

fn emit_setup() -> (OrderedTransformation, laddertx_core::ModelInstance) {
    let src = Arc::new(
        Metamodel::new("books", "Book")
            .with_class(ClassSchema::new("Book").with_relationship(
                "chapters",
                "Chapter",
                Multiplicity::Many,
            ))
            .with_class(ClassSchema::new("Chapter")),
    );
    let tgt = Arc::new(
        Metamodel::new("tomes", "Tome")
            .with_class(ClassSchema::new("Tome").with_relationship(
                "sections",
                "Section",
                Multiplicity::Many,
            ))
            .with_class(ClassSchema::new("Section").with_relationship(
                "notes",
                "Note",
                Multiplicity::Many,
            ))
            .with_class(ClassSchema::new("Note")),
    );
    // A generated preface (with one nested note) in front, a generated
    // index at the back, chapters in between.
    let preface = MapExpr {
        target_class: "Section".into(),
        id_expr: Expr::Nat(100),
        flag_assignments: vec![],
        emits: vec![],
    }
    .with_emit(
        "notes",
        Placement::First,
        MapExpr {
            target_class: "Note".into(),
            id_expr: Expr::Nat(300),
            flag_assignments: vec![],
            emits: vec![],
        },
    );
    let index = MapExpr {
        target_class: "Section".into(),
        id_expr: Expr::Nat(200),
        flag_assignments: vec![],
        emits: vec![],
    };
    let root = Rung {
        name: "book2tome".into(),
        src_class: "Book".into(),
        tgt_class: "Tome".into(),
        pre: Expr::Bool(true),
        post_data: Expr::ids_equal(),
        map: MapExpr::copy_id("Tome")
            .with_emit("sections", Placement::First, preface)
            .with_emit("sections", Placement::Last, index),
    };
    let chapter = Rung::copy_id("chapter2section", "Chapter", "Section");
    let body = base(
        &src,
        &tgt,
        LadderIndex::of_rung(&root),
        chapter,
        "chapters",
        "sections",
    )
    .unwrap();
    let ot = OrderedTransformation {
        name: "binder".into(),
        src_mm: src.clone(),
        tgt_mm: tgt,
        root_rung: root,
        body,
    };

    let mut b = InstanceBuilder::new(src);
    let c2 = b.build_object("Chapter", 2, &[], &[]).unwrap();
    let c3 = b.build_object("Chapter", 3, &[], &[]).unwrap();
    let book = b
        .build_object("Book", 1, &[], &[("chapters", RefInit::Many(vec![c2, c3]))])
        .unwrap();
    (ot, b.freeze(book).unwrap().0)
}

#[test]
fn first_and_last_emits_frame_the_traversal_children() {
    let (ot, src) = emit_setup();
    let run = execute(&ot, &src).unwrap();
    assert!(run.verdict.holds, "failures: {:?}", run.verdict.failures);
    let sections: Vec<u64> = run
        .target
        .children(run.target.root(), "sections")
        .unwrap()
        .iter()
        .map(|k| run.target.object(*k).id)
        .collect();
    assert_eq!(sections, vec![100, 2, 3, 200]);
    // The nested emit landed under the preface.
    let preface = run.target.find("Section", 100).unwrap();
    let notes: Vec<u64> = run
        .target
        .children(preface, "notes")
        .unwrap()
        .iter()
        .map(|k| run.target.object(*k).id)
        .collect();
    assert_eq!(notes, vec![300]);
    assert!(verify(&ot, &src, &run.target).unwrap().holds);
}

#[test]
fn a_missing_trailing_emit_fails_verification() {
    let (ot, src) = emit_setup();
    let run = execute(&ot, &src).unwrap();
    // Rebuild the target without the trailing index section.
    let mut b = InstanceBuilder::new(ot.tgt_mm.clone());
    let note = b.build_object("Note", 300, &[], &[]).unwrap();
    let preface = b
        .build_object("Section", 100, &[], &[("notes", RefInit::Many(vec![note]))])
        .unwrap();
    let s2 = b.build_object("Section", 2, &[], &[]).unwrap();
    let s3 = b.build_object("Section", 3, &[], &[]).unwrap();
    let tome = b
        .build_object(
            "Tome",
            1,
            &[],
            &[("sections", RefInit::Many(vec![preface, s2, s3]))],
        )
        .unwrap();
    let (broken, _) = b.freeze(tome).unwrap();
    assert!(!broken.structurally_equal(&run.target));

    let verdict = verify(&ot, &src, &broken).unwrap();
    assert!(!verdict.holds);
    assert!(verdict.failures.iter().all(|f| f.rung == "chapter2section"));
}
