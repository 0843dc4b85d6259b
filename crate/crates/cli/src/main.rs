use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use devissage::witt::{decompose_form, isometry_invariants, reduce_support, witt_class, ComplexForm, ModuleForm, ReduceOptions};
use devissage::Ring;
use devissage_cli::gen::{generate, trial_rng};
use devissage_cli::instance::{FormJson, Instance};
use devissage_cli::{replay, run_suite, Caps, Kind, Report, Suite, SuiteConfig};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "devissage", version, about = "Generate instances, run property suites and reduce forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Sizes {
    #[arg(long, default_value_t = 6)]
    max_rank: usize,
    #[arg(long, default_value_t = 8)]
    max_width: usize,
    #[arg(long, default_value_t = 50)]
    max_entry: i64,
}

impl Sizes {
    fn caps(&self) -> Caps {
        Caps { max_rank: self.max_rank, max_width: self.max_width, max_entry: self.max_entry }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print instances as JSON lines.
    Gen {
        /// module, morphism, complex-in-a, module-form, complex-form or neutral-form.
        kind: String,
        #[arg(long, default_value = "z-half")]
        ring: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a suite; exit status 1 if any trial fails.
    Verify {
        #[arg(long, required_unless_present = "replay")]
        suite: Option<String>,
        #[arg(long, default_value = "z-half")]
        ring: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Rerun the failed trials of a stored report.
        #[arg(long, conflicts_with = "suite")]
        replay: Option<PathBuf>,
    },
    /// Reduce a complex-form instance to a module form.
    Reduce { instance: PathBuf, #[arg(long)] json: Option<PathBuf> },
    /// Witt class of a module-form, neutral-form or complex-form instance.
    WittClass { instance: PathBuf, #[arg(long)] json: Option<PathBuf> },
    /// Primary decomposition of a module-form instance.
    Decompose { instance: PathBuf, #[arg(long)] json: Option<PathBuf> },
}

/// A usage or input error: exit status 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> UsageError {
        UsageError(e.to_string())
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), UsageError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// The first JSON value in a file, so `gen` output can be fed back directly.
fn read_instance(path: &Path) -> Result<Instance, UsageError> {
    let text = fs::read_to_string(path)?;
    let first = serde_json::Deserializer::from_str(&text)
        .into_iter::<Instance>()
        .next()
        .ok_or_else(|| UsageError(format!("{} holds no instance", path.display())))??;
    Ok(first)
}

fn module_form_of(inst: &Instance) -> Result<ModuleForm, UsageError> {
    match inst {
        Instance::ModuleForm { form } | Instance::NeutralForm { form, .. } => Ok(form.to_form()?),
        Instance::ComplexForm { form, .. } | Instance::SpreadForm { form, .. } => {
            Ok(reduce_support(&ComplexForm::from_json(form)?, ReduceOptions::default())?.extracted)
        }
        other => Err(UsageError(format!("a {} instance carries no form", other.kind()))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, UsageError> {
    match cli.command {
        Command::Gen { kind, ring, trials, seed, sizes, json } => {
            let kind: Kind = kind.parse()?;
            let ring: Ring = ring.parse()?;
            let caps = sizes.caps();
            let mut lines = Vec::with_capacity(trials);
            for t in 0..trials as u64 {
                let inst = generate(kind, ring, &caps, &mut trial_rng(seed, t))?;
                lines.push(serde_json::to_string(&inst)?);
            }
            write_out(json.as_deref(), &lines.join("\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { replay: Some(path), .. } => {
            let report: Report = serde_json::from_str(&fs::read_to_string(&path)?)?;
            let results = replay(&report);
            for (index, same) in &results {
                println!("trial {index}: {}", if *same { "reproduced" } else { "differs" });
            }
            println!("{} failed trials replayed", results.len());
            Ok(if results.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify { suite, ring, trials, seed, sizes, json, .. } => {
            let suite: Suite = suite.unwrap_or_default().parse()?;
            let mut config = SuiteConfig::new(ring.parse()?, suite, trials, seed).with_caps(sizes.caps());
            config.output = json.clone();
            config.validate()?;
            let report = run_suite(&config);
            if let Some(p) = &json {
                fs::write(p, serde_json::to_string_pretty(&report)?)?;
            }
            println!("{}", report.human_summary());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Reduce { instance, json } => {
            let c = match read_instance(&instance)? {
                Instance::ComplexForm { form, .. } | Instance::SpreadForm { form, .. } => ComplexForm::from_json(&form)?,
                other => return Err(UsageError(format!("reduce needs a complex form, got {}", other.kind()))),
            };
            let red = reduce_support(&c, ReduceOptions { verify: true })?;
            let out = json!({
                "validated": red.validated(),
                "surgeries": red.surgery_count(),
                "ledger": red.ledger,
                "extracted": FormJson::from_form(&red.extracted),
                "witt_class": witt_class(&red.extracted)?,
            });
            write_out(json.as_deref(), &serde_json::to_string_pretty(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::WittClass { instance, json } => {
            let f = module_form_of(&read_instance(&instance)?)?;
            let out = json!({ "witt_class": witt_class(&f)?, "isometry": isometry_invariants(&f)? });
            write_out(json.as_deref(), &serde_json::to_string_pretty(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose { instance, json } => {
            let f = module_form_of(&read_instance(&instance)?)?;
            let dec = decompose_form(&f)?;
            let parts: Vec<Value> = dec
                .parts
                .iter()
                .map(|p| {
                    Ok(json!({
                        "prime": p.prime,
                        "idempotent": p.idempotent.to_string(),
                        "invariants": isometry_invariants(&p.form)?,
                    }))
                })
                .collect::<Result<_, devissage::Error>>()?;
            let out = json!({ "verified": dec.verified(), "parts": parts });
            write_out(json.as_deref(), &serde_json::to_string_pretty(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
