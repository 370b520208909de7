//! The bundled class-model-to-relational-schema example.
//!
//! Three rungs: models become schemas, classes become tables (plus an
//! emitted primary-key column), attributes become non-key columns. All
//! preconditions are true and every mapping copies the base attribute.
//! The fixture model `m1` has 3 classes and 4 attributes; its expected
//! transform `s1` has 3 tables and 7 columns, 3 of which are keys.
//!
//! The upstream listing labels two classes `c1` and two tables `t1`; the
//! ids make the intended reading unambiguous (the second of each pair is
//! the one with id 3), and that reading is what `m1`/`s1` encode.

use std::sync::Arc;

use crate::contracts::{Expr, MapExpr, Placement, Rung};
use crate::instance::{InstanceBuilder, ModelInstance, RefInit};
use crate::ladder::{base, step, LadderIndex, OrderedTransformation};
use crate::metamodel::{ClassSchema, Metamodel, Multiplicity};

/// Everything the example needs: both metamodels, the source model, the
/// transformation, and the expected target.
#[derive(Debug, Clone)]
pub struct ExampleBundle {
    pub uml_mm: Arc<Metamodel>,
    pub sql_mm: Arc<Metamodel>,
    pub m1: ModelInstance,
    pub transformation: OrderedTransformation,
    pub s1: ModelInstance,
}

pub fn uml_metamodel() -> Metamodel {
    Metamodel::new("uml", "Model")
        .with_class(ClassSchema::new("Model").with_relationship(
            "classes",
            "Class",
            Multiplicity::Many,
        ))
        .with_class(ClassSchema::new("Class").with_relationship(
            "attrs",
            "Attribute",
            Multiplicity::Many,
        ))
        .with_class(ClassSchema::new("Attribute"))
}

pub fn sql_metamodel() -> Metamodel {
    Metamodel::new("sql", "Schema")
        .with_class(ClassSchema::new("Schema").with_relationship(
            "tables",
            "Table",
            Multiplicity::Many,
        ))
        .with_class(ClassSchema::new("Table").with_relationship(
            "columns",
            "Column",
            Multiplicity::Many,
        ))
        .with_class(ClassSchema::new("Column").with_flag("isKey"))
}

/// Builds the whole example.
pub fn bundle() -> ExampleBundle {
    let uml_mm = Arc::new(uml_metamodel());
    let sql_mm = Arc::new(sql_metamodel());

    // m1 = Model#1 [ Class#2 [A#5, A#6, A#7], Class#3 [A#8], Class#4 [] ]
    let mut b = InstanceBuilder::new(uml_mm.clone());
    let m1 = {
        let a5 = b.build_object("Attribute", 5, &[], &[]).unwrap();
        let a6 = b.build_object("Attribute", 6, &[], &[]).unwrap();
        let a7 = b.build_object("Attribute", 7, &[], &[]).unwrap();
        let a8 = b.build_object("Attribute", 8, &[], &[]).unwrap();
        let c2 = b
            .build_object(
                "Class",
                2,
                &[],
                &[("attrs", RefInit::Many(vec![a5, a6, a7]))],
            )
            .unwrap();
        let c3 = b
            .build_object("Class", 3, &[], &[("attrs", RefInit::Many(vec![a8]))])
            .unwrap();
        let c4 = b
            .build_object("Class", 4, &[], &[("attrs", RefInit::Many(vec![]))])
            .unwrap();
        let root = b
            .build_object(
                "Model",
                1,
                &[],
                &[("classes", RefInit::Many(vec![c2, c3, c4]))],
            )
            .unwrap();
        b.freeze(root).unwrap().0
    };

    let transformation = transformation(&uml_mm, &sql_mm);
    let s1 = expected_target(&sql_mm);

    ExampleBundle {
        uml_mm,
        sql_mm,
        m1,
        transformation,
        s1,
    }
}

/// The three rungs and the two-level ladder under the Model -> Schema
/// root.
pub fn transformation(uml_mm: &Arc<Metamodel>, sql_mm: &Arc<Metamodel>) -> OrderedTransformation {
    let model2schema = Rung {
        name: "model2schema".into(),
        src_class: "Model".into(),
        tgt_class: "Schema".into(),
        pre: Expr::Bool(true),
        post_data: Expr::ids_equal(),
        map: MapExpr::copy_id("Schema"),
    };
    let class2table = Rung {
        name: "class2table".into(),
        src_class: "Class".into(),
        tgt_class: "Table".into(),
        pre: Expr::Bool(true),
        post_data: Expr::ids_equal(),
        map: MapExpr::copy_id("Table").with_emit(
            "columns",
            Placement::First,
            MapExpr::copy_id("Column").with_flag("isKey", Expr::Bool(true)),
        ),
    };
    let attr2column = Rung {
        name: "attr2column".into(),
        src_class: "Attribute".into(),
        tgt_class: "Column".into(),
        pre: Expr::Bool(true),
        post_data: Expr::and(
            Expr::ids_equal(),
            Expr::eq(Expr::TgtFlag("isKey".into()), Expr::Bool(false)),
        ),
        map: MapExpr::copy_id("Column").with_flag("isKey", Expr::Bool(false)),
    };

    let columns_rung = base(
        uml_mm,
        sql_mm,
        LadderIndex::of_rung(&class2table),
        attr2column,
        "attrs",
        "columns",
    )
    .expect("attribute rung fits the metamodels");
    let body = step(
        uml_mm,
        sql_mm,
        LadderIndex::of_rung(&model2schema),
        class2table,
        "classes",
        "tables",
        columns_rung,
    )
    .expect("class rung fits the metamodels");

    OrderedTransformation {
        name: "uml2sql".into(),
        src_mm: uml_mm.clone(),
        tgt_mm: sql_mm.clone(),
        root_rung: model2schema,
        body,
    }
}

/// s1 = Schema#1 [ Table#2 [Col#2*, Col#5, Col#6, Col#7],
///                 Table#3 [Col#3*, Col#8], Table#4 [Col#4*] ]
/// where * marks a key column.
fn expected_target(sql_mm: &Arc<Metamodel>) -> ModelInstance {
    let mut b = InstanceBuilder::new(sql_mm.clone());
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

/// The example's `.mt` source, byte-identical to the shipped fixture.
pub const FIXTURE_MT: &str = include_str!("../fixtures/uml2sql.mt");
