//! Human- and machine-readable run reports.

use serde::{Deserialize, Serialize};

use crate::engine::{Failure, Verdict};
use crate::ladder::OrderedTransformation;

/// What a run tells the user: the verdict, localized failures, and a
/// coverage section so silently skipped source classes are visible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub transformation: String,
    pub command: String,
    pub holds: bool,
    pub failures: Vec<Failure>,
    pub coverage: Coverage,
    pub certificate_nodes: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coverage {
    pub mapped_source_classes: Vec<String>,
    pub unmapped_source_classes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, ot: &OrderedTransformation, verdict: &Verdict) -> Self {
        Report {
            transformation: ot.name.clone(),
            command: command.to_string(),
            holds: verdict.holds,
            failures: verdict.failures.clone(),
            coverage: Coverage {
                mapped_source_classes: ot.mapped_source_classes(),
                unmapped_source_classes: ot.unmapped_source_classes(),
            },
            certificate_nodes: verdict.trace.node_count(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn render_text(&self, color: bool) -> String {
        let (pass, fail, reset) = if color {
            ("\x1b[32m", "\x1b[31m", "\x1b[0m")
        } else {
            ("", "", "")
        };
        let mut out = String::new();
        let verdict = if self.holds {
            format!("{pass}HOLDS{reset}")
        } else {
            format!("{fail}FAILS{reset}")
        };
        out.push_str(&format!(
            "{} {}: {}\n",
            self.command, self.transformation, verdict
        ));
        out.push_str(&format!("certificate nodes: {}\n", self.certificate_nodes));
        if !self.failures.is_empty() {
            out.push_str(&format!("failures ({}):\n", self.failures.len()));
            for f in &self.failures {
                out.push_str(&format!("  - {f}\n"));
            }
        }
        out.push_str(&format!(
            "coverage: mapped source classes: {}\n",
            self.coverage.mapped_source_classes.join(", ")
        ));
        if self.coverage.unmapped_source_classes.is_empty() {
            out.push_str("coverage: every source class is mapped\n");
        } else {
            out.push_str(&format!(
                "coverage: unmapped source classes: {}\n",
                self.coverage.unmapped_source_classes.join(", ")
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}
