//! Report records: JSON is the primary format, with a flat CSV projection
//! of the per-product rows. Field order is fixed and ratios are rounded to
//! six decimal places, so identical runs serialize byte-identically.

use serde::{Deserialize, Serialize};

use crate::learner::LearnerOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub index: usize,
    /// Configuration string or file stem, depending on the source.
    pub label: String,
    /// Selected features in feature-model declaration order; empty for
    /// directory sources.
    pub configuration: Vec<String>,
    /// Minimized state count of the system under learning.
    pub sul_states: usize,
    pub learned_states: usize,
    pub rounds: u64,
    pub eq_count: u64,
    pub mq_count: u64,
    pub mq_symbols: u64,
    pub eq_symbols: u64,
    pub resets: u64,
    pub equivalent: bool,
    pub unverified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub product_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ffsm_cond_states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ffsm_cond_transitions: Option<usize>,
    /// Sum of the minimized product state counts.
    pub sum_product_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conciseness_ratio: Option<f64>,
    pub total_rounds: u64,
    pub total_eq_count: u64,
    pub total_mq_count: u64,
    pub total_mq_symbols: u64,
    pub total_eq_symbols: u64,
    pub total_resets: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_seed: Option<u64>,
    pub options: LearnerOptions,
}

/// The full benchmark report for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub per_product: Vec<ProductEntry>,
    pub family: FamilySummary,
    pub provenance: Provenance,
    /// Copies of the per-product errors, for quick failure triage.
    pub errors: Vec<String>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat per-product projection for spreadsheets. Configurations are
    /// joined with `+` to keep the row a plain CSV record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,label,configuration,sul_states,learned_states,rounds,eq_count,mq_count,mq_symbols,eq_symbols,resets,equivalent,unverified,error\n",
        );
        for entry in &self.per_product {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                entry.index,
                entry.label,
                entry.configuration.join("+"),
                entry.sul_states,
                entry.learned_states,
                entry.rounds,
                entry.eq_count,
                entry.mq_count,
                entry.mq_symbols,
                entry.eq_symbols,
                entry.resets,
                entry.equivalent,
                entry.unverified,
                entry.error.as_deref().unwrap_or(""),
            ));
        }
        out
    }
}

/// Evidence for why a machine needs more than one learning round: the
/// measured rounds and counterexample lengths, plus the state pairs of the
/// minimal machine that share one-step output rows and the depth at which
/// they finally separate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAnalysis {
    pub rounds: u64,
    /// Length of the (normalized) counterexample that ended each round
    /// before the last.
    pub ce_lengths: Vec<usize>,
    /// Hypothesis state count at each equivalence query.
    pub hypothesis_states: Vec<usize>,
    pub merged_pairs: Vec<MergedPair>,
    /// Number of distinct one-step output rows among minimal states.
    pub one_step_signature_classes: usize,
}

/// An inequivalent state pair indistinguishable by any single input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedPair {
    pub state_a: String,
    pub state_b: String,
    /// Shortest word length separating the pair; at least 2 by
    /// construction.
    pub min_distinguishing_suffix_len: usize,
}

impl RoundAnalysis {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("analysis serializes");
        text.push('\n');
        text
    }
}

/// Conciseness of a family model against its minimized products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conciseness {
    pub cond_states: usize,
    pub sum_min_product_states: usize,
    pub ratio: f64,
}

/// Accuracy of a candidate family model against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub total_configs: usize,
    pub equivalent_configs: usize,
    pub fraction: f64,
    pub failures: Vec<AccuracyFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyFailure {
    pub configuration: Vec<String>,
    /// Shortest separating input word, when both products derived.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fixed-precision rounding for every ratio that lands in a report.
pub(crate) fn round6(value: f64) -> f64 {
    (value * 1e6).round() / 1e6
}
