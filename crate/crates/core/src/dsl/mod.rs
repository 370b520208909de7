//! Textual front end: parsing and printing of `.mt` documents.
//!
//! One file may hold any mix of `metamodel`, `instance`, and `transform`
//! sections; sections may also be split across files and elaborated
//! together. The grammar is documented in the repository README; the
//! printer emits the canonical form and `parse(print(x))` is structurally
//! identical to `x`.

pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use elaborate::{elaborate, Bundle};
pub use lexer::Diagnostic;
pub use parser::{parse_document, RawDocument};
pub use printer::{
    print_bundle, print_expr, print_instance, print_metamodel, print_transformation,
};

/// Parses and elaborates a single self-contained document.
pub fn parse(text: &str) -> Result<Bundle, Vec<Diagnostic>> {
    let doc = parse_document(text).map_err(|d| vec![d])?;
    elaborate(&[doc])
}

/// Parses several named documents and elaborates them together.
pub fn parse_files(files: &[(String, String)]) -> Result<Bundle, Vec<Diagnostic>> {
    let mut docs = Vec::new();
    for (name, text) in files {
        match parse_document(text) {
            Ok(mut doc) => {
                doc.source = Some(name.clone());
                docs.push(doc);
            }
            Err(mut diag) => {
                diag.source = Some(name.clone());
                return Err(vec![diag]);
            }
        }
    }
    elaborate(&docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
metamodel uml {
  root Model;
  class Model {
    rel classes : Class many;
  }
  class Class {}
}

instance m : uml {
  Class#2 {}
  Model#1 { classes=[Class#2] }
}
";

    #[test]
    fn parse_then_print_then_parse_is_identity() {
        let first = parse(SMALL).unwrap();
        let printed = print_bundle(&first);
        let second = parse(&printed).unwrap();
        assert_eq!(first, second, "printed form:\n{printed}");
    }

    #[test]
    fn empty_input_is_an_empty_bundle() {
        let bundle = parse("").unwrap();
        assert!(bundle.metamodels.is_empty());
        assert!(bundle.instances.is_empty());
        assert!(bundle.transformations.is_empty());
    }

    #[test]
    fn undeclared_relationship_target_is_a_semantic_diagnostic() {
        let diags = parse("metamodel m { root A; class A { rel xs : Klass many; } }").unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("Klass")));
    }

    #[test]
    fn instances_may_reference_metamodels_from_other_files() {
        let files = vec![
            (
                "mm.mt".to_string(),
                "metamodel uml { root Model; class Model {} }".to_string(),
            ),
            (
                "inst.mt".to_string(),
                "instance m : uml { Model#1 {} }".to_string(),
            ),
        ];
        let bundle = parse_files(&files).unwrap();
        assert!(bundle.instances.contains_key("m"));
    }
}
