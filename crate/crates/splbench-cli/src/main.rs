//! Command-line interface for the SPL model-learning benchmark toolkit.
//!
//! Exit codes: 0 on success, 1 on validation or benchmark failures, 2 on
//! usage and input-parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use splbench::feature_model::{parse_feature_model, Configuration, FeatureModel};
use splbench::ffsm::{parse_ffsm_dot, write_ffsm_dot, Ffsm};
use splbench::generator::{generate_ffsm, multiround_products, GenSpec, DEFAULT_CONFIG_LIMIT};
use splbench::harness::{analyze_rounds, config_in_model_order, run_benchmark, BenchSource};
use splbench::learner::{
    learn, CeHandling, ClosingStrategy, LearnMetrics, LearnerOptions, OracleKind, SimulatedTeacher,
};
use splbench::mealy::{parse_dot, write_dot, MealyMachine};

#[derive(Parser)]
#[command(
    name = "splbench",
    version,
    about = "Benchmark toolkit for active model learning of software product lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a feature model, and optionally an FFSM against it.
    Validate {
        /// FeatureIDE feature model XML.
        #[arg(long)]
        fm: PathBuf,
        /// FFSM dot file to validate over every configuration.
        #[arg(long)]
        ffsm: Option<PathBuf>,
        /// Configuration enumeration cap.
        #[arg(long, default_value_t = DEFAULT_CONFIG_LIMIT)]
        limit: usize,
    },
    /// Derive the product FSM of one configuration from an FFSM.
    Derive {
        #[arg(long)]
        fm: PathBuf,
        #[arg(long)]
        ffsm: PathBuf,
        /// Comma-separated feature names; every selected feature must be
        /// listed, mandatory ones included.
        #[arg(long)]
        config: String,
        /// Output dot file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a random FFSM and its product family.
    Generate {
        #[arg(long)]
        fm: PathBuf,
        /// Randomness source.
        #[arg(long)]
        seed: u64,
        /// Number of base states.
        #[arg(long)]
        states: usize,
        /// Comma-separated input alphabet.
        #[arg(long)]
        inputs: String,
        /// Comma-separated output alphabet.
        #[arg(long)]
        outputs: String,
        /// Fraction of (state, input) slots receiving guarded variants.
        #[arg(long, default_value_t = 0.5)]
        variability: f64,
        /// Fraction of non-initial states given a presence condition.
        #[arg(long = "state-pc", default_value_t = 0.25)]
        state_pc: f64,
        /// Skip the more-than-one-round guarantee.
        #[arg(long = "no-multiround")]
        no_multiround: bool,
        #[arg(long, default_value_t = DEFAULT_CONFIG_LIMIT)]
        limit: usize,
        /// Output directory for ffsm.dot, product dot files and
        /// manifest.json.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Learn one FSM from its dot file and print cost metrics.
    Learn {
        #[arg(long)]
        fsm: PathBuf,
        #[command(flatten)]
        learner: LearnerFlags,
        /// Write the metrics as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Learn every product of a family and emit the benchmark report.
    Bench {
        #[arg(long, requires = "ffsm", conflicts_with = "products")]
        fm: Option<PathBuf>,
        #[arg(long, requires = "fm")]
        ffsm: Option<PathBuf>,
        /// Directory of pre-derived product dot files.
        #[arg(long, required_unless_present = "fm")]
        products: Option<PathBuf>,
        #[command(flatten)]
        learner: LearnerFlags,
        #[arg(long, default_value_t = DEFAULT_CONFIG_LIMIT)]
        limit: usize,
        /// Report JSON path.
        #[arg(long)]
        report: PathBuf,
        /// Optional CSV projection of the per-product rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Explain why a machine needs more than one learning round.
    Analyze {
        #[arg(long)]
        fsm: PathBuf,
        /// Analysis JSON path.
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args)]
struct LearnerFlags {
    /// perfect | wmethod:<depth> | random:<count>,<min>,<max>,<seed>
    #[arg(long, default_value = "perfect")]
    oracle: String,
    /// all-prefixes | rivest-schapire
    #[arg(long, default_value = "all-prefixes")]
    ce: String,
    /// close-first | close-shortest
    #[arg(long, default_value = "close-first")]
    closing: String,
    /// Cache membership queries.
    #[arg(long)]
    cache: bool,
}

/// Failure carrying the process exit code.
enum CliError {
    /// Input could not be read or parsed, or flags make no sense: exit 2.
    Usage(String),
    /// The tool ran but the validation/benchmark failed: exit 1.
    Failure(String),
}

impl CliError {
    fn usage(err: impl ToString) -> Self {
        CliError::Usage(err.to_string())
    }

    fn failure(err: impl ToString) -> Self {
        CliError::Failure(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { fm, ffsm, limit } => cmd_validate(&fm, ffsm.as_deref(), limit),
        Command::Derive {
            fm,
            ffsm,
            config,
            output,
        } => cmd_derive(&fm, &ffsm, &config, &output),
        Command::Generate {
            fm,
            seed,
            states,
            inputs,
            outputs,
            variability,
            state_pc,
            no_multiround,
            limit,
            output,
        } => cmd_generate(
            &fm,
            seed,
            states,
            &inputs,
            &outputs,
            variability,
            state_pc,
            !no_multiround,
            limit,
            &output,
        ),
        Command::Learn {
            fsm,
            learner,
            report,
        } => cmd_learn(&fsm, &learner, report.as_deref()),
        Command::Bench {
            fm,
            ffsm,
            products,
            learner,
            limit,
            report,
            csv,
        } => cmd_bench(
            fm.as_deref(),
            ffsm.as_deref(),
            products.as_deref(),
            &learner,
            limit,
            &report,
            csv.as_deref(),
        ),
        Command::Analyze { fsm, report } => cmd_analyze(&fsm, &report),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::usage(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, content)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn load_feature_model(path: &Path) -> Result<FeatureModel, CliError> {
    parse_feature_model(&read_file(path)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_ffsm(path: &Path, model: &FeatureModel) -> Result<Ffsm, CliError> {
    parse_ffsm_dot(&read_file(path)?, model)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<MealyMachine, CliError> {
    let machine = parse_dot(&read_file(path)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    for state in machine.unreachable_states() {
        eprintln!(
            "warning: {}: state `{state}` is unreachable from the initial state",
            path.display()
        );
    }
    Ok(machine)
}

fn split_symbols(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_learner_flags(flags: &LearnerFlags) -> Result<LearnerOptions, CliError> {
    let oracle = match flags.oracle.as_str() {
        "perfect" => OracleKind::Perfect,
        other => {
            if let Some(depth) = other.strip_prefix("wmethod:") {
                let depth = depth
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad wmethod depth `{depth}`")))?;
                OracleKind::WMethod { depth }
            } else if let Some(rest) = other.strip_prefix("random:") {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 4 {
                    return Err(CliError::usage(
                        "random oracle takes `random:<count>,<min>,<max>,<seed>`",
                    ));
                }
                let parse = |s: &str| -> Result<u64, CliError> {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad random oracle number `{s}`")))
                };
                OracleKind::RandomWords {
                    count: parse(parts[0])? as usize,
                    min_len: parse(parts[1])? as usize,
                    max_len: parse(parts[2])? as usize,
                    seed: parse(parts[3])?,
                }
            } else {
                return Err(CliError::usage(format!("unknown oracle `{other}`")));
            }
        }
    };
    let ce_handling = match flags.ce.as_str() {
        "all-prefixes" => CeHandling::AllPrefixes,
        "rivest-schapire" => CeHandling::RivestSchapire,
        other => return Err(CliError::usage(format!("unknown ce handling `{other}`"))),
    };
    let closing = match flags.closing.as_str() {
        "close-first" => ClosingStrategy::CloseFirst,
        "close-shortest" => ClosingStrategy::CloseShortest,
        other => return Err(CliError::usage(format!("unknown closing strategy `{other}`"))),
    };
    Ok(LearnerOptions {
        oracle,
        ce_handling,
        closing,
        cache: flags.cache,
    })
}

fn cmd_validate(fm: &Path, ffsm: Option<&Path>, limit: usize) -> Result<(), CliError> {
    let model = load_feature_model(fm)?;
    let configs = model
        .enumerate_configurations(limit)
        .map_err(CliError::failure)?;
    println!(
        "feature model: {} features, {} valid configurations",
        model.feature_count(),
        configs.len()
    );
    if configs.is_empty() {
        println!("validation: FAIL");
        return Err(CliError::failure("feature model has no valid configuration"));
    }
    let Some(ffsm_path) = ffsm else {
        println!("validation: PASS");
        return Ok(());
    };
    let ffsm = load_ffsm(ffsm_path, &model)?;
    let (states, transitions) = ffsm.size();
    println!("ffsm: {states} conditional states, {transitions} conditional transitions");
    let report = ffsm.validate(limit).map_err(CliError::failure)?;
    for findings in &report.per_config {
        let mut notes = Vec::new();
        if let Some(error) = &findings.error {
            notes.push(format!("error: {error}"));
        }
        for (state, input) in &findings.missing {
            notes.push(format!("missing transition at ({state}, {input})"));
        }
        for (state, input) in &findings.conflicting {
            notes.push(format!("conflicting transitions at ({state}, {input})"));
        }
        for state in &findings.unreachable {
            notes.push(format!("warning: state {state} unreachable"));
        }
        if notes.is_empty() {
            println!("config {{{}}}: ok", findings.configuration);
        } else {
            println!("config {{{}}}: {}", findings.configuration, notes.join("; "));
        }
    }
    if report.pass {
        println!("validation: PASS");
        Ok(())
    } else {
        println!("validation: FAIL");
        Err(CliError::failure("ffsm validation failed"))
    }
}

fn cmd_derive(fm: &Path, ffsm: &Path, config: &str, output: &Path) -> Result<(), CliError> {
    let model = load_feature_model(fm)?;
    let ffsm = load_ffsm(ffsm, &model)?;
    let config = Configuration::new(split_symbols(config));
    let product = ffsm.derive_product(&config).map_err(CliError::failure)?;
    write_file(output, &write_dot(&product))?;
    println!(
        "derived {} states over {} inputs -> {}",
        product.state_count(),
        product.inputs().len(),
        output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ManifestProduct {
    index: usize,
    configuration: Vec<String>,
    file: String,
    states: usize,
    minimized_states: usize,
}

#[derive(Serialize)]
struct Manifest {
    tool_version: String,
    seed: u64,
    states: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
    variability: f64,
    state_pc: f64,
    multiround: bool,
    limit: usize,
    ffsm_file: String,
    cond_states: usize,
    cond_transitions: usize,
    products: Vec<ManifestProduct>,
    multiround_products: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    fm: &Path,
    seed: u64,
    states: usize,
    inputs: &str,
    outputs: &str,
    variability: f64,
    state_pc: f64,
    multiround: bool,
    limit: usize,
    output: &Path,
) -> Result<(), CliError> {
    let model = load_feature_model(fm)?;
    let mut spec = GenSpec::new(
        model.clone(),
        seed,
        states,
        split_symbols(inputs),
        split_symbols(outputs),
    );
    spec.variability_degree = variability;
    spec.state_pc_probability = state_pc;
    spec.ensure_multiround = multiround;
    spec.config_limit = limit;

    let ffsm = match generate_ffsm(&spec) {
        Ok(ffsm) => ffsm,
        Err(err @ splbench::generator::GenError::InvalidSpec(_)) => {
            return Err(CliError::usage(err))
        }
        Err(err) => return Err(CliError::failure(err)),
    };

    fs::create_dir_all(output)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", output.display())))?;
    write_file(&output.join("ffsm.dot"), &write_ffsm_dot(&ffsm))?;

    let configs = model
        .enumerate_configurations(limit)
        .map_err(CliError::failure)?;
    let mut products = Vec::new();
    for (index, config) in configs.iter().enumerate() {
        let machine = ffsm.derive_product(config).map_err(CliError::failure)?;
        let features = config_in_model_order(&model, config);
        let file = format!("product_{index}_{}.dot", features.join("_"));
        write_file(&output.join(&file), &write_dot(&machine))?;
        products.push(ManifestProduct {
            index,
            configuration: features,
            file,
            states: machine.state_count(),
            minimized_states: machine.minimize().state_count(),
        });
    }
    let (cond_states, cond_transitions) = ffsm.size();
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        states,
        inputs: spec.inputs.clone(),
        outputs: spec.outputs.clone(),
        variability,
        state_pc,
        multiround,
        limit,
        ffsm_file: "ffsm.dot".to_string(),
        cond_states,
        cond_transitions,
        products,
        multiround_products: if multiround {
            multiround_products(&ffsm, &configs)
        } else {
            Vec::new()
        },
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_json.push('\n');
    write_file(&output.join("manifest.json"), &manifest_json)?;
    println!(
        "generated ffsm ({cond_states} states, {cond_transitions} transitions) and {} products -> {}",
        manifest.products.len(),
        output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct LearnReport {
    tool_version: String,
    options: LearnerOptions,
    learned_states: usize,
    metrics: LearnMetrics,
    equivalent: bool,
}

fn cmd_learn(fsm: &Path, flags: &LearnerFlags, report: Option<&Path>) -> Result<(), CliError> {
    let machine = load_machine(fsm)?;
    let opts = parse_learner_flags(flags)?;
    let mut teacher = SimulatedTeacher::new(machine.clone());
    let (learned, metrics) = learn(&mut teacher, &opts).map_err(CliError::failure)?;
    let equivalent = matches!(learned.equivalent(&machine), Ok(None));
    println!("learned_states: {}", learned.state_count());
    println!("rounds: {}", metrics.rounds);
    println!("eq_count: {}", metrics.eq_count);
    println!("mq_count: {}", metrics.mq_count);
    println!("mq_symbols: {}", metrics.mq_symbols);
    println!("eq_symbols: {}", metrics.eq_symbols);
    println!("resets: {}", metrics.resets);
    println!("unverified: {}", metrics.unverified);
    println!("equivalent: {equivalent}");
    if let Some(path) = report {
        let record = LearnReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            options: opts,
            learned_states: learned.state_count(),
            metrics,
            equivalent,
        };
        let mut json = serde_json::to_string_pretty(&record).expect("report serializes");
        json.push('\n');
        write_file(path, &json)?;
    }
    if equivalent {
        Ok(())
    } else {
        Err(CliError::failure(
            "learned machine is not equivalent to the source",
        ))
    }
}

fn cmd_bench(
    fm: Option<&Path>,
    ffsm: Option<&Path>,
    products: Option<&Path>,
    flags: &LearnerFlags,
    limit: usize,
    report_path: &Path,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let opts = parse_learner_flags(flags)?;
    let report = match (fm, ffsm, products) {
        (Some(fm), Some(ffsm_path), None) => {
            let model = load_feature_model(fm)?;
            let ffsm = load_ffsm(ffsm_path, &model)?;
            run_benchmark(&BenchSource::Ffsm(&ffsm), &opts, limit, true)
                .map_err(CliError::failure)?
        }
        (None, None, Some(dir)) => {
            let mut entries: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|path| path.extension().is_some_and(|ext| ext == "dot"))
                .collect();
            entries.sort();
            if entries.is_empty() {
                return Err(CliError::usage(format!(
                    "no .dot files in {}",
                    dir.display()
                )));
            }
            let mut machines = Vec::new();
            for path in entries {
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                machines.push((label, load_machine(&path)?));
            }
            run_benchmark(&BenchSource::Products(machines), &opts, limit, true)
                .map_err(CliError::failure)?
        }
        _ => {
            return Err(CliError::usage(
                "bench needs either --fm with --ffsm, or --products",
            ))
        }
    };
    write_file(report_path, &report.to_json())?;
    if let Some(csv_path) = csv {
        write_file(csv_path, &report.to_csv())?;
    }
    println!(
        "benchmarked {} products: total rounds {}, total mqs {}, total resets {}",
        report.family.product_count,
        report.family.total_rounds,
        report.family.total_mq_count,
        report.family.total_resets
    );
    let all_equivalent = report.per_product.iter().all(|e| e.equivalent);
    if report.errors.is_empty() && all_equivalent {
        Ok(())
    } else {
        Err(CliError::failure(
            "benchmark finished with errors or inequivalent products",
        ))
    }
}

fn cmd_analyze(fsm: &Path, report_path: &Path) -> Result<(), CliError> {
    let machine = load_machine(fsm)?;
    let analysis =
        analyze_rounds(&machine, &LearnerOptions::default()).map_err(CliError::failure)?;
    println!("rounds: {}", analysis.rounds);
    println!(
        "hypothesis_states: {:?}, ce_lengths: {:?}",
        analysis.hypothesis_states, analysis.ce_lengths
    );
    println!(
        "one_step_signature_classes: {}",
        analysis.one_step_signature_classes
    );
    for pair in &analysis.merged_pairs {
        println!(
            "merged pair ({}, {}): distinguishing suffix length {}",
            pair.state_a, pair.state_b, pair.min_distinguishing_suffix_len
        );
    }
    write_file(report_path, &analysis.to_json())?;
    Ok(())
}
