//! Benchmark orchestration and family-level metrics.

mod report;

use rayon::prelude::*;
use thiserror::Error;

use crate::feature_model::{Configuration, FeatureModel, FeatureModelError};
use crate::ffsm::{Ffsm, FfsmError};
use crate::learner::{
    learn, learn_with_trace, LearnError, LearnerOptions, OracleKind, SimulatedTeacher,
};
use crate::mealy::{MealyError, MealyMachine};
use crate::rng::SplitMix64;

pub use report::{
    Accuracy, AccuracyFailure, BenchReport, Conciseness, FamilySummary, MergedPair, ProductEntry,
    Provenance, RoundAnalysis,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("round analysis requires the perfect oracle")]
    AnalysisNeedsPerfectOracle,
    #[error("family models disagree on the feature model")]
    FeatureModelMismatch,
    #[error("family models disagree on the input alphabet")]
    InputAlphabetMismatch,
    #[error(transparent)]
    FeatureModel(#[from] FeatureModelError),
    #[error(transparent)]
    Ffsm(#[from] FfsmError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
}

/// What a benchmark run learns from.
pub enum BenchSource<'a> {
    /// A family model: every valid configuration is derived and learned.
    Ffsm(&'a Ffsm),
    /// Pre-derived product machines with display labels.
    Products(Vec<(String, MealyMachine)>),
}

/// Selected features of a configuration in feature-model declaration
/// order, for stable report rows and file names.
pub fn config_in_model_order(model: &FeatureModel, config: &Configuration) -> Vec<String> {
    model
        .features()
        .iter()
        .filter(|f| config.contains(&f.name))
        .map(|f| f.name.clone())
        .collect()
}

/// Learns every product of the source and aggregates cost metrics.
///
/// Per-product failures are recorded on their entries and the run
/// continues. With `parallel`, products are processed concurrently; each
/// product owns its teacher and (for sampling oracles) a sub-stream seeded
/// by the product index, and entries are merged by index, so concurrency
/// never changes the report.
pub fn run_benchmark(
    source: &BenchSource<'_>,
    opts: &LearnerOptions,
    limit: usize,
    parallel: bool,
) -> Result<BenchReport, HarnessError> {
    struct Product {
        label: String,
        configuration: Vec<String>,
        machine: Result<MealyMachine, String>,
    }

    let mut products: Vec<Product> = Vec::new();
    let mut ffsm_size = None;
    match source {
        BenchSource::Ffsm(ffsm) => {
            ffsm_size = Some(ffsm.size());
            let configs = ffsm.feature_model().enumerate_configurations(limit)?;
            for config in configs {
                let configuration = config_in_model_order(ffsm.feature_model(), &config);
                products.push(Product {
                    label: configuration.join("+"),
                    configuration,
                    machine: ffsm.derive_product(&config).map_err(|e| e.to_string()),
                });
            }
        }
        BenchSource::Products(list) => {
            for (label, machine) in list {
                products.push(Product {
                    label: label.clone(),
                    configuration: Vec::new(),
                    machine: Ok(machine.clone()),
                });
            }
        }
    }

    let entry_for = |(index, product): (usize, &Product)| -> ProductEntry {
        let mut entry = ProductEntry {
            index,
            label: product.label.clone(),
            configuration: product.configuration.clone(),
            sul_states: 0,
            learned_states: 0,
            rounds: 0,
            eq_count: 0,
            mq_count: 0,
            mq_symbols: 0,
            eq_symbols: 0,
            resets: 0,
            equivalent: false,
            unverified: false,
            error: None,
        };
        let machine = match &product.machine {
            Ok(machine) => machine,
            Err(error) => {
                entry.error = Some(error.clone());
                return entry;
            }
        };
        entry.sul_states = machine.minimize().state_count();
        let product_opts = options_for_product(opts, index);
        let mut teacher = SimulatedTeacher::new(machine.clone());
        match learn(&mut teacher, &product_opts) {
            Ok((learned, metrics)) => {
                entry.learned_states = learned.state_count();
                entry.rounds = metrics.rounds;
                entry.eq_count = metrics.eq_count;
                entry.mq_count = metrics.mq_count;
                entry.mq_symbols = metrics.mq_symbols;
                entry.eq_symbols = metrics.eq_symbols;
                entry.resets = metrics.resets;
                entry.unverified = metrics.unverified;
                entry.equivalent = matches!(learned.equivalent(machine), Ok(None));
            }
            Err(error) => entry.error = Some(error.to_string()),
        }
        entry
    };

    let per_product: Vec<ProductEntry> = if parallel {
        products
            .par_iter()
            .enumerate()
            .map(entry_for)
            .collect()
    } else {
        products.iter().enumerate().map(entry_for).collect()
    };

    let sum_product_states: usize = per_product.iter().map(|e| e.sul_states).sum();
    let conciseness_ratio = match (ffsm_size, sum_product_states) {
        (Some((cond_states, _)), sum) if sum > 0 => {
            Some(report::round6(cond_states as f64 / sum as f64))
        }
        _ => None,
    };
    let family = FamilySummary {
        product_count: per_product.len(),
        ffsm_cond_states: ffsm_size.map(|(c, _)| c),
        ffsm_cond_transitions: ffsm_size.map(|(_, t)| t),
        sum_product_states,
        conciseness_ratio,
        total_rounds: per_product.iter().map(|e| e.rounds).sum(),
        total_eq_count: per_product.iter().map(|e| e.eq_count).sum(),
        total_mq_count: per_product.iter().map(|e| e.mq_count).sum(),
        total_mq_symbols: per_product.iter().map(|e| e.mq_symbols).sum(),
        total_eq_symbols: per_product.iter().map(|e| e.eq_symbols).sum(),
        total_resets: per_product.iter().map(|e| e.resets).sum(),
    };
    let errors: Vec<String> = per_product
        .iter()
        .filter_map(|e| e.error.clone())
        .collect();
    Ok(BenchReport {
        per_product,
        family,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            oracle_seed: match opts.oracle {
                OracleKind::RandomWords { seed, .. } => Some(seed),
                _ => None,
            },
            options: *opts,
        },
        errors,
    })
}

/// Per-product options: the sampling oracle draws from a sub-stream keyed
/// by the product index so concurrent runs stay reproducible.
fn options_for_product(opts: &LearnerOptions, index: usize) -> LearnerOptions {
    let mut per_product = *opts;
    if let OracleKind::RandomWords {
        count,
        min_len,
        max_len,
        seed,
    } = opts.oracle
    {
        per_product.oracle = OracleKind::RandomWords {
            count,
            min_len,
            max_len,
            seed: SplitMix64::stream(seed, index as u64).next_u64(),
        };
    }
    per_product
}

/// Family-model size against the summed minimized product sizes.
pub fn conciseness(ffsm: &Ffsm, limit: usize) -> Result<Conciseness, HarnessError> {
    let configs = ffsm.feature_model().enumerate_configurations(limit)?;
    let mut sum = 0usize;
    for config in &configs {
        sum += ffsm.derive_product(config)?.minimize().state_count();
    }
    let (cond_states, _) = ffsm.size();
    Ok(Conciseness {
        cond_states,
        sum_min_product_states: sum,
        ratio: report::round6(cond_states as f64 / sum as f64),
    })
}

/// Fraction of valid configurations whose derived products are equivalent
/// between a reference family model and a candidate.
pub fn accuracy(
    reference: &Ffsm,
    candidate: &Ffsm,
    limit: usize,
) -> Result<Accuracy, HarnessError> {
    if reference.feature_model() != candidate.feature_model() {
        return Err(HarnessError::FeatureModelMismatch);
    }
    if reference.inputs() != candidate.inputs() {
        return Err(HarnessError::InputAlphabetMismatch);
    }
    let model = reference.feature_model();
    let configs = model.enumerate_configurations(limit)?;
    let total = configs.len();
    let mut equivalent_count = 0usize;
    let mut failures = Vec::new();
    for config in &configs {
        let configuration = config_in_model_order(model, config);
        let pair = reference
            .derive_product(config)
            .map_err(|e| e.to_string())
            .and_then(|r| {
                candidate
                    .derive_product(config)
                    .map(|c| (r, c))
                    .map_err(|e| e.to_string())
            });
        match pair {
            Ok((ref_product, cand_product)) => match ref_product.equivalent(&cand_product)? {
                None => equivalent_count += 1,
                Some(word) => failures.push(AccuracyFailure {
                    configuration,
                    counterexample: Some(
                        ref_product
                            .input_symbols(&word)
                            .into_iter()
                            .map(str::to_string)
                            .collect(),
                    ),
                    error: None,
                }),
            },
            Err(error) => failures.push(AccuracyFailure {
                configuration,
                counterexample: None,
                error: Some(error),
            }),
        }
    }
    Ok(Accuracy {
        total_configs: total,
        equivalent_configs: equivalent_count,
        fraction: report::round6(equivalent_count as f64 / total as f64),
        failures,
    })
}

/// Learns the machine with an instrumented run and explains multi-round
/// behavior: measured counterexample lengths plus the minimal-machine
/// state pairs whose one-step output rows coincide, with the depth at
/// which each pair separates.
pub fn analyze_rounds(
    machine: &MealyMachine,
    opts: &LearnerOptions,
) -> Result<RoundAnalysis, HarnessError> {
    if opts.oracle != OracleKind::Perfect {
        return Err(HarnessError::AnalysisNeedsPerfectOracle);
    }
    let mut teacher = SimulatedTeacher::new(machine.clone());
    let (_, metrics, trace) = learn_with_trace(&mut teacher, opts)?;

    let minimal = machine.minimize();
    let inputs = minimal.inputs().len();
    let one_step_row =
        |s: usize| -> Vec<usize> { (0..inputs).map(|a| minimal.step(s, a).1).collect() };
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for s in 0..minimal.state_count() {
        let row = one_step_row(s);
        if !classes.contains(&row) {
            classes.push(row);
        }
    }
    let mut merged_pairs = Vec::new();
    for a in 0..minimal.state_count() {
        for b in a + 1..minimal.state_count() {
            if one_step_row(a) != one_step_row(b) {
                continue;
            }
            // States of a minimal machine are pairwise inequivalent, so a
            // separating word exists; sharing one-step rows makes it
            // longer than one symbol.
            if let Some(word) = minimal.distinguishing_word(a, b) {
                debug_assert!(word.len() >= 2);
                merged_pairs.push(MergedPair {
                    state_a: minimal.states()[a].clone(),
                    state_b: minimal.states()[b].clone(),
                    min_distinguishing_suffix_len: word.len(),
                });
            }
        }
    }
    Ok(RoundAnalysis {
        rounds: metrics.rounds,
        ce_lengths: trace.iter().filter_map(|r| r.ce_length).collect(),
        hypothesis_states: trace.iter().map(|r| r.hypothesis_states).collect(),
        merged_pairs,
        one_step_signature_classes: classes.len(),
    })
}
