//! End-to-end behavior of the engine on the bundled example: witness
//! localization, commutativity checks, vacuous preconditions, and replay
//! divergences.

use laddertx_core::certificate::{replay, CertNode};
use laddertx_core::contracts::Expr;
use laddertx_core::engine::{
    check_com, derive, eval_spec, execute, verify, Conjunct, EngineError, Mode,
};
use laddertx_core::generator::map_rungs;
use laddertx_core::instance::{InstanceBuilder, ModelInstance, RefInit};
use laddertx_core::uml2sql;

/// Rebuilds s1 with one column's id changed (8 -> 9) inside Table#3.
fn s1_with_altered_column() -> ModelInstance {
    let ex = uml2sql::bundle();
    let mut b = InstanceBuilder::new(ex.sql_mm.clone());
    let key = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", true)], &[])
            .unwrap()
    };
    let col = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", false)], &[])
            .unwrap()
    };
    let k2 = key(&mut b, 2);
    let c5 = col(&mut b, 5);
    let c6 = col(&mut b, 6);
    let c7 = col(&mut b, 7);
    let t2 = b
        .build_object(
            "Table",
            2,
            &[],
            &[("columns", RefInit::Many(vec![k2, c5, c6, c7]))],
        )
        .unwrap();
    let k3 = key(&mut b, 3);
    let c9 = col(&mut b, 9); // was Column#8
    let t3 = b
        .build_object("Table", 3, &[], &[("columns", RefInit::Many(vec![k3, c9]))])
        .unwrap();
    let k4 = key(&mut b, 4);
    let t4 = b
        .build_object("Table", 4, &[], &[("columns", RefInit::Many(vec![k4]))])
        .unwrap();
    let root = b
        .build_object(
            "Schema",
            1,
            &[],
            &[("tables", RefInit::Many(vec![t2, t3, t4]))],
        )
        .unwrap();
    b.freeze(root).unwrap().0
}

/// Rebuilds s1 without Table#4.
fn s1_without_table4() -> ModelInstance {
    let ex = uml2sql::bundle();
    let mut b = InstanceBuilder::new(ex.sql_mm.clone());
    let key = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", true)], &[])
            .unwrap()
    };
    let col = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", false)], &[])
            .unwrap()
    };
    let k2 = key(&mut b, 2);
    let c5 = col(&mut b, 5);
    let c6 = col(&mut b, 6);
    let c7 = col(&mut b, 7);
    let t2 = b
        .build_object(
            "Table",
            2,
            &[],
            &[("columns", RefInit::Many(vec![k2, c5, c6, c7]))],
        )
        .unwrap();
    let k3 = key(&mut b, 3);
    let c8 = col(&mut b, 8);
    let t3 = b
        .build_object("Table", 3, &[], &[("columns", RefInit::Many(vec![k3, c8]))])
        .unwrap();
    let root = b
        .build_object("Schema", 1, &[], &[("tables", RefInit::Many(vec![t2, t3]))])
        .unwrap();
    b.freeze(root).unwrap().0
}

#[test]
fn execute_on_a_root_only_model_yields_an_empty_schema() {
    let ex = uml2sql::bundle();
    let mut b = InstanceBuilder::new(ex.uml_mm.clone());
    let root = b
        .build_object("Model", 1, &[], &[("classes", RefInit::Many(vec![]))])
        .unwrap();
    let (src, _) = b.freeze(root).unwrap();
    let run = execute(&ex.transformation, &src).unwrap();
    assert!(run.verdict.holds);
    assert_eq!(run.target.object(run.target.root()).id, 1);
    assert!(run
        .target
        .children(run.target.root(), "tables")
        .unwrap()
        .is_empty());
}

#[test]
fn eval_spec_finds_every_witness_on_the_published_pair() {
    let ex = uml2sql::bundle();
    let m_root = ex.m1.root();
    let s_root = ex.s1.root();
    let verdict = eval_spec(
        &ex.transformation.body,
        m_root,
        s_root,
        &ex.m1,
        &ex.s1,
        Mode::WitnessSearch,
    )
    .unwrap();
    assert!(verdict.holds);
    let mut table_witnesses = Vec::new();
    let mut column_witnesses = Vec::new();
    verdict.trace.root.for_each(&mut |node| {
        if let CertNode::ExistsWitness {
            class,
            tgt_key: Some(key),
            ..
        } = node
        {
            if class == "Table" {
                table_witnesses.push(key.id);
            } else if class == "Column" {
                column_witnesses.push(key.id);
            }
        }
    });
    assert_eq!(table_witnesses, vec![2, 3, 4]);
    assert_eq!(column_witnesses, vec![5, 6, 7, 8]);
}

#[test]
fn eval_spec_rejects_pairs_that_do_not_match_the_index() {
    let ex = uml2sql::bundle();
    let class2 = ex.m1.find("Class", 2).unwrap();
    let err = eval_spec(
        &ex.transformation.body,
        class2,
        ex.s1.root(),
        &ex.m1,
        &ex.s1,
        Mode::WitnessSearch,
    );
    assert!(matches!(err, Err(EngineError::IndexMismatch { .. })));
}

#[test]
fn altered_column_id_localizes_to_the_attribute_rung_postcondition() {
    let ex = uml2sql::bundle();
    let broken = s1_with_altered_column();
    let verdict = verify(&ex.transformation, &ex.m1, &broken).unwrap();
    assert!(!verdict.holds);
    assert!(
        verdict
            .failures
            .iter()
            .any(|f| f.rung == "attr2column" && f.conjunct == Conjunct::PostData),
        "failures: {:?}",
        verdict.failures
    );
    // Every failure concerns the mutated rung.
    for f in &verdict.failures {
        assert_eq!(f.rung, "attr2column");
    }
}

#[test]
fn deleted_table_fails_at_the_missing_witness() {
    let ex = uml2sql::bundle();
    let broken = s1_without_table4();
    let verdict = verify(&ex.transformation, &ex.m1, &broken).unwrap();
    assert!(!verdict.holds);
    let witness_failure = verdict
        .failures
        .iter()
        .find(|f| f.conjunct == Conjunct::Link)
        .expect("missing witness reported");
    assert_eq!(witness_failure.rung, "class2table");
    assert_eq!(witness_failure.src.as_ref().unwrap().to_string(), "Class#4");
    assert!(witness_failure.detail.contains("no witness"));
}

#[test]
fn false_root_precondition_verifies_vacuously_but_refuses_to_execute() {
    let ex = uml2sql::bundle();
    let vacuous = map_rungs(&ex.transformation, &|rung| {
        let mut r = rung.clone();
        if r.name == "model2schema" {
            r.pre = Expr::Bool(false);
        }
        r
    });
    // Verification: implication with a false antecedent holds, and the
    // trace records it.
    let verdict = verify(&vacuous, &ex.m1, &ex.s1).unwrap();
    assert!(verdict.holds);
    let mut vacuous_roots = 0;
    verdict.trace.root.for_each(&mut |node| {
        if matches!(node, CertNode::Vacuous { .. }) {
            vacuous_roots += 1;
        }
    });
    assert_eq!(vacuous_roots, 1);
    // Execution: there is nothing to construct, which is an error rather
    // than an empty target.
    assert!(matches!(
        execute(&vacuous, &ex.m1),
        Err(EngineError::RootPreconditionFailed(_))
    ));
}

#[test]
fn com_holds_at_the_model_rung_of_the_example() {
    let ex = uml2sql::bundle();
    let evidence = check_com(
        &ex.transformation.root_rung.map,
        ex.transformation.body.rungs()[0], // class2table
        "classes",
        "tables",
        ex.m1.root(),
        ex.s1.root(),
        &ex.m1,
        &ex.s1,
    );
    assert!(evidence.equal);
    let left_ids: Vec<u64> = evidence.left.iter().map(|s| s.id).collect();
    let right_ids: Vec<u64> = evidence.right.iter().map(|s| s.id).collect();
    assert_eq!(left_ids, vec![2, 3, 4]);
    assert_eq!(right_ids, vec![2, 3, 4]);
}

#[test]
fn succ_mutated_builder_breaks_com_at_every_class() {
    let ex = uml2sql::bundle();
    let mutated = map_rungs(&ex.transformation, &|rung| {
        let mut r = rung.clone();
        if r.name == "class2table" {
            r.map.id_expr = Expr::succ(Expr::SrcId);
        }
        r
    });
    let run = execute(&mutated, &ex.m1).unwrap();
    // Checked against the original contracts, both paths of the square
    // disagree at the class rung for the single Model object.
    let evidence = check_com(
        &ex.transformation.root_rung.map,
        ex.transformation.body.rungs()[0],
        "classes",
        "tables",
        ex.m1.root(),
        run.target.root(),
        &ex.m1,
        &run.target,
    );
    assert!(!evidence.equal);
    assert_eq!(
        evidence.left.iter().map(|s| s.id).collect::<Vec<_>>(),
        vec![2, 3, 4]
    );
    assert_eq!(
        evidence.right.iter().map(|s| s.id).collect::<Vec<_>>(),
        vec![3, 4, 5]
    );

    let verdict = verify(&ex.transformation, &ex.m1, &run.target).unwrap();
    assert!(!verdict.holds);
    for failure in &verdict.failures {
        assert_eq!(failure.rung, "class2table", "stray failure: {failure}");
    }
}

#[test]
fn constructive_and_search_modes_agree_on_the_example() {
    let ex = uml2sql::bundle();
    let constructive = derive(&ex.transformation, &ex.m1, &ex.s1, Mode::Constructive).unwrap();
    let search = derive(&ex.transformation, &ex.m1, &ex.s1, Mode::WitnessSearch).unwrap();
    assert!(constructive.holds && search.holds);
    assert_eq!(constructive.trace, search.trace);
}

#[test]
fn replay_detects_a_tampered_witness_id() {
    let ex = uml2sql::bundle();
    let run = execute(&ex.transformation, &ex.m1).unwrap();
    let mut cert = run.verdict.trace.clone();
    // Flip the first exists witness id we can find.
    fn tamper(node: &mut CertNode) -> bool {
        match node {
            CertNode::ExistsWitness {
                tgt_key: Some(key), ..
            } => {
                key.id += 1;
                true
            }
            CertNode::Join { left, right } => tamper(left) || tamper(right),
            CertNode::ForallSrc { children, .. }
            | CertNode::ImplIntro { children, .. }
            | CertNode::ExistsWitness { children, .. }
            | CertNode::And { children } => children.iter_mut().any(tamper),
            _ => false,
        }
    }
    assert!(tamper(&mut cert.root));
    let outcome = replay(&cert, &ex.transformation, &ex.m1, &ex.s1);
    assert!(!outcome.ok);
}

#[test]
fn replay_against_a_flipped_flag_diverges_at_the_hole() {
    let ex = uml2sql::bundle();
    let run = execute(&ex.transformation, &ex.m1).unwrap();
    // Rebuild s1 with Column#8's isKey flipped to true.
    let mut b = InstanceBuilder::new(ex.sql_mm.clone());
    let key = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", true)], &[])
            .unwrap()
    };
    let col = |b: &mut InstanceBuilder, id: u64| {
        b.build_object("Column", id, &[("isKey", false)], &[])
            .unwrap()
    };
    let k2 = key(&mut b, 2);
    let c5 = col(&mut b, 5);
    let c6 = col(&mut b, 6);
    let c7 = col(&mut b, 7);
    let t2 = b
        .build_object(
            "Table",
            2,
            &[],
            &[("columns", RefInit::Many(vec![k2, c5, c6, c7]))],
        )
        .unwrap();
    let k3 = key(&mut b, 3);
    let c8 = key(&mut b, 8); // flipped
    let t3 = b
        .build_object("Table", 3, &[], &[("columns", RefInit::Many(vec![k3, c8]))])
        .unwrap();
    let k4 = key(&mut b, 4);
    let t4 = b
        .build_object("Table", 4, &[], &[("columns", RefInit::Many(vec![k4]))])
        .unwrap();
    let root = b
        .build_object(
            "Schema",
            1,
            &[],
            &[("tables", RefInit::Many(vec![t2, t3, t4]))],
        )
        .unwrap();
    let (flipped, _) = b.freeze(root).unwrap();

    let outcome = replay(run.certificate(), &ex.transformation, &ex.m1, &flipped);
    assert!(!outcome.ok);
    let path = outcome.divergence.unwrap();
    assert!(path.contains("hole"), "diverged at {path}");
}

#[test]
fn join_symmetry_at_the_verdict_level() {
    use laddertx_core::generator::{generate_case, GenConfig};
    use laddertx_core::ladder::join;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut tried = 0;
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = generate_case(&mut rng, &GenConfig::default());
        let laddertx_core::ladder::LadderNode::Join { left, right } =
            &case.transformation.body.node
        else {
            continue;
        };
        tried += 1;
        let run = execute(&case.transformation, &case.src).unwrap();
        let forward = join((**left).clone(), (**right).clone()).unwrap();
        let backward = join((**right).clone(), (**left).clone()).unwrap();
        let x = case.src.root();
        let y = run.target.root();
        let a = eval_spec(&forward, x, y, &case.src, &run.target, Mode::WitnessSearch).unwrap();
        let b = eval_spec(&backward, x, y, &case.src, &run.target, Mode::WitnessSearch).unwrap();
        assert_eq!(a.holds, b.holds);
    }
    assert!(tried >= 5, "not enough joins generated: {tried}");
}
