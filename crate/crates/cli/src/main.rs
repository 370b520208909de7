//! `laddertx`: run, verify, and replay ordered model transformations.
//!
//! Exit codes: 0 when the run holds (or checks pass), 1 on a verification
//! failure, 2 on usage, parse, or validation errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use laddertx_core::certificate;
use laddertx_core::dsl::{self, Bundle, RawDocument};
use laddertx_core::engine::{derive, execute, verify, Mode};
use laddertx_core::generator::{generate_case, GenConfig};
use laddertx_core::instance::ModelInstance;
use laddertx_core::ladder::OrderedTransformation;
use laddertx_core::report::Report;
use laddertx_core::uml2sql;

#[derive(Parser)]
#[command(
    name = "laddertx",
    version,
    about = "Ordered model transformation engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OutputOpts {
    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a transformation and write the target, certificate, and report.
    Transform {
        /// File declaring the source instance.
        #[arg(long)]
        src: PathBuf,
        /// File declaring the transformation.
        #[arg(long)]
        tx: PathBuf,
        /// Where to write the target instance (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the certificate.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Check that a given target is the transform of a given source.
    Verify {
        #[arg(long)]
        src: PathBuf,
        /// File declaring the target instance.
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        tx: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Re-derive a certificate from scratch and compare.
    Replay {
        /// Certificate file to replay.
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        tx: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the bundled class-model-to-schema example end to end.
    Demo {
        /// Write the produced target here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the certificate here.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Parse and validate documents; optionally run seeded self-checks.
    Check {
        /// Documents to check.
        files: Vec<PathBuf>,
        /// Seed for the generator-backed property mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of generated cases in property mode.
        #[arg(long, default_value_t = 20)]
        cases: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn color_enabled() -> bool {
    std::env::var("LADDERTX_COLOR")
        .map(|v| v == "1")
        .unwrap_or(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(errors) => {
            for e in errors {
                eprintln!("{e}");
            }
            ExitCode::from(2)
        }
    }
}

/// Parses the given files once each (paths deduplicated) and elaborates
/// them together.
fn load(paths: &[&PathBuf]) -> Result<(Bundle, Vec<RawDocument>), Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut docs = Vec::new();
    for &path in paths {
        if !seen.insert(path.clone()) {
            continue;
        }
        let text =
            fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
        match dsl::parse_document(&text) {
            Ok(mut doc) => {
                doc.source = Some(path.display().to_string());
                docs.push(doc);
            }
            Err(mut diag) => {
                diag.source = Some(path.display().to_string());
                return Err(vec![diag.to_string()]);
            }
        }
    }
    let bundle =
        dsl::elaborate(&docs).map_err(|ds| ds.iter().map(|d| d.to_string()).collect::<Vec<_>>())?;
    Ok((bundle, docs))
}

/// The unique instance declared in `path`'s document.
fn instance_from<'b>(
    bundle: &'b Bundle,
    docs: &[RawDocument],
    path: &Path,
) -> Result<(String, &'b ModelInstance), String> {
    let source = path.display().to_string();
    let names: Vec<String> = docs
        .iter()
        .filter(|d| d.source.as_deref() == Some(source.as_str()))
        .flat_map(|d| d.instances.iter().map(|i| i.name.clone()))
        .collect();
    match names.as_slice() {
        [name] => Ok((name.clone(), &bundle.instances[name])),
        [] => Err(format!("{source}: declares no instance")),
        _ => Err(format!(
            "{source}: declares more than one instance ({})",
            names.join(", ")
        )),
    }
}

/// The unique transformation declared in `path`'s document.
fn transform_from<'b>(
    bundle: &'b Bundle,
    docs: &[RawDocument],
    path: &Path,
) -> Result<&'b OrderedTransformation, String> {
    let source = path.display().to_string();
    let names: Vec<String> = docs
        .iter()
        .filter(|d| d.source.as_deref() == Some(source.as_str()))
        .flat_map(|d| d.transforms.iter().map(|t| t.name.clone()))
        .collect();
    match names.as_slice() {
        [name] => Ok(&bundle.transformations[name]),
        [] => Err(format!("{source}: declares no transformation")),
        _ => Err(format!(
            "{source}: declares more than one transformation ({})",
            names.join(", ")
        )),
    }
}

fn emit_report(report: &Report, format: Format) {
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.render_text(color_enabled())),
    }
}

fn exit_for(holds: bool) -> ExitCode {
    if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> Result<ExitCode, Vec<String>> {
    match command {
        Command::Transform {
            src,
            tx,
            out,
            cert,
            output,
        } => {
            let (bundle, docs) = load(&[&src, &tx])?;
            let (src_name, source) = instance_from(&bundle, &docs, &src).map_err(|e| vec![e])?;
            let ot = transform_from(&bundle, &docs, &tx).map_err(|e| vec![e])?;
            let run = execute(ot, source).map_err(|e| vec![e.to_string()])?;

            let target_text = dsl::print_instance(&format!("{src_name}_out"), &run.target);
            match &out {
                Some(path) => fs::write(path, &target_text)
                    .map_err(|e| vec![format!("{}: {e}", path.display())])?,
                // In json mode the target rides inside the report so
                // stdout stays machine-parseable.
                None if output.format == Format::Text => print!("{target_text}"),
                None => {}
            }
            if let Some(path) = &cert {
                fs::write(path, certificate::serialize(run.certificate()))
                    .map_err(|e| vec![format!("{}: {e}", path.display())])?;
            }
            let mut report = Report::new("transform", ot, &run.verdict);
            report.warnings.extend(bundle.warnings.clone());
            match output.format {
                Format::Text => emit_report(&report, output.format),
                Format::Json => {
                    let mut value = serde_json::to_value(&report).unwrap();
                    if out.is_none() {
                        value["target"] = serde_json::Value::String(target_text);
                    }
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                }
            }
            Ok(exit_for(run.verdict.holds))
        }

        Command::Verify {
            src,
            tgt,
            tx,
            output,
        } => {
            let (bundle, docs) = load(&[&src, &tgt, &tx])?;
            let (_, source) = instance_from(&bundle, &docs, &src).map_err(|e| vec![e])?;
            let (_, target) = instance_from(&bundle, &docs, &tgt).map_err(|e| vec![e])?;
            let ot = transform_from(&bundle, &docs, &tx).map_err(|e| vec![e])?;
            let verdict = verify(ot, source, target).map_err(|e| vec![e.to_string()])?;
            let mut report = Report::new("verify", ot, &verdict);
            report.warnings.extend(bundle.warnings.clone());
            emit_report(&report, output.format);
            Ok(exit_for(verdict.holds))
        }

        Command::Replay {
            cert,
            src,
            tgt,
            tx,
            output,
        } => {
            let (bundle, docs) = load(&[&src, &tgt, &tx])?;
            let (_, source) = instance_from(&bundle, &docs, &src).map_err(|e| vec![e])?;
            let (_, target) = instance_from(&bundle, &docs, &tgt).map_err(|e| vec![e])?;
            let ot = transform_from(&bundle, &docs, &tx).map_err(|e| vec![e])?;
            let bytes = fs::read(&cert).map_err(|e| vec![format!("{}: {e}", cert.display())])?;
            let recorded = certificate::deserialize(&bytes).map_err(|e| vec![e.to_string()])?;
            let outcome = certificate::replay(&recorded, ot, source, target);
            match output.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcome).unwrap()),
                Format::Text => {
                    if outcome.ok {
                        println!("replay {}: certificate matches the recomputation", ot.name);
                    } else {
                        println!(
                            "replay {}: MISMATCH at {}",
                            ot.name,
                            outcome.divergence.as_deref().unwrap_or("(unknown)")
                        );
                    }
                }
            }
            Ok(exit_for(outcome.ok))
        }

        Command::Demo { out, cert, output } => {
            let ex = uml2sql::bundle();
            let run = execute(&ex.transformation, &ex.m1).map_err(|e| vec![e.to_string()])?;
            let tables = run.target.objects_of("Table").unwrap().len();
            let columns = run.target.objects_of("Column").unwrap();
            let keys = columns
                .iter()
                .filter(|k| run.target.object(**k).flags["isKey"])
                .count();
            let reproduced = run.target.structurally_equal(&ex.s1);
            let replayed =
                certificate::replay(run.certificate(), &ex.transformation, &ex.m1, &run.target);

            if let Some(path) = &out {
                fs::write(path, dsl::print_instance("s1", &run.target))
                    .map_err(|e| vec![format!("{}: {e}", path.display())])?;
            }
            if let Some(path) = &cert {
                fs::write(path, certificate::serialize(run.certificate()))
                    .map_err(|e| vec![format!("{}: {e}", path.display())])?;
            }

            let ok = run.verdict.holds && reproduced && replayed.ok;
            match output.format {
                Format::Json => {
                    let report = Report::new("demo", &ex.transformation, &run.verdict);
                    let mut value = serde_json::to_value(&report).unwrap();
                    value["summary"] = serde_json::Value::String(format!(
                        "s1: {tables} tables, {} columns, {keys} keys",
                        columns.len()
                    ));
                    value["reproduced"] = serde_json::Value::Bool(reproduced);
                    value["replay_ok"] = serde_json::Value::Bool(replayed.ok);
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                }
                Format::Text => {
                    println!(
                        "s1: {tables} tables, {} columns, {keys} keys",
                        columns.len()
                    );
                    println!("expected target reproduced: {reproduced}");
                    println!("certificate nodes: {}", run.certificate().node_count());
                    println!("certificate replays: {}", replayed.ok);
                }
            }
            Ok(exit_for(ok))
        }

        Command::Check {
            files,
            seed,
            cases,
            output,
        } => {
            let refs: Vec<&PathBuf> = files.iter().collect();
            let (bundle, _docs) = load(&refs)?;
            let mut lines = Vec::new();
            for name in bundle.metamodels.keys() {
                lines.push(format!("metamodel {name}: ok"));
            }
            for name in bundle.instances.keys() {
                lines.push(format!("instance {name}: ok"));
            }
            for name in bundle.transformations.keys() {
                lines.push(format!("transform {name}: ok"));
            }
            for w in &bundle.warnings {
                lines.push(format!("warning: {w}"));
            }

            let mut failures = 0u64;
            if let Some(seed) = seed {
                // Property mode: executor output must verify in both
                // witness-resolution modes.
                let cfg = GenConfig::default();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for case_idx in 0..cases {
                    let case = generate_case(&mut rng, &cfg);
                    let outcome = execute(&case.transformation, &case.src)
                        .map_err(|e| vec![format!("case {case_idx}: {e}")])?;
                    let search = verify(&case.transformation, &case.src, &outcome.target)
                        .map_err(|e| vec![format!("case {case_idx}: {e}")])?;
                    let constructive = derive(
                        &case.transformation,
                        &case.src,
                        &outcome.target,
                        Mode::Constructive,
                    )
                    .map_err(|e| vec![format!("case {case_idx}: {e}")])?;
                    if !search.holds || !constructive.holds {
                        failures += 1;
                        lines.push(format!("case {case_idx}: executor/checker disagreement"));
                    }
                }
                lines.push(format!(
                    "property mode: {}/{cases} cases agree",
                    cases - failures
                ));
            }

            match output.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&lines).unwrap()),
                Format::Text => {
                    for line in &lines {
                        println!("{line}");
                    }
                }
            }
            Ok(exit_for(failures == 0))
        }
    }
}
