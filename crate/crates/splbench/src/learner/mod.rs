//! Instrumented L* for Mealy machines.
//!
//! The table starts from S = {empty word} and E = the input alphabet, per
//! the reference configuration every benchmark run is measured against.
//! Equivalence oracles, counterexample handling, the closing strategy and
//! query caching are pluggable, and every query is accounted for in
//! [`LearnMetrics`].

mod oracle;
mod table;
mod teacher;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mealy::{MealyError, MealyMachine};
use oracle::OracleRuntime;
use table::ObservationTable;
use teacher::Engine;

pub use teacher::{SimulatedTeacher, Teacher};

/// Equivalence oracle selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleKind {
    /// Compares the hypothesis directly against the reference machine and
    /// returns a shortest counterexample. Performs no SUL executions, so
    /// it contributes nothing to `eq_symbols`/`resets`.
    Perfect,
    /// Executes the W-method suite built from the hypothesis with the
    /// given extra depth.
    WMethod { depth: usize },
    /// Executes seeded random words.
    RandomWords {
        count: usize,
        min_len: usize,
        max_len: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeHandling {
    /// Add the counterexample and all its prefixes to S.
    AllPrefixes,
    /// Rivest-Schapire: binary-search the counterexample for one
    /// distinguishing suffix and add it to E.
    RivestSchapire,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosingStrategy {
    /// Promote the first unclosed boundary row in creation order.
    CloseFirst,
    /// Promote a shortest unclosed row, ties broken lexicographically.
    CloseShortest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerOptions {
    pub oracle: OracleKind,
    pub ce_handling: CeHandling,
    pub closing: ClosingStrategy,
    pub cache: bool,
}

impl Default for LearnerOptions {
    /// The reference configuration: perfect oracle, classic prefix-based
    /// counterexample handling, close-first, no cache.
    fn default() -> Self {
        LearnerOptions {
            oracle: OracleKind::Perfect,
            ce_handling: CeHandling::AllPrefixes,
            closing: ClosingStrategy::CloseFirst,
            cache: false,
        }
    }
}

/// Exact cost counters for one learning run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnMetrics {
    /// Hypotheses submitted to the equivalence oracle; equals `eq_count`.
    pub rounds: u64,
    pub eq_count: u64,
    /// Membership queries actually sent (cache hits excluded).
    pub mq_count: u64,
    /// Total input symbols across sent membership queries.
    pub mq_symbols: u64,
    /// Total input symbols across equivalence-oracle test executions.
    pub eq_symbols: u64,
    /// SUL resets: one per sent membership query or executed test word.
    pub resets: u64,
    /// Set when a sampling oracle ran out of tests without a verdict.
    pub unverified: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("teacher answered the same query differently (cache detected inconsistency)")]
    InconsistentTeacher,
    #[error("oracle returned a word that is not a counterexample")]
    BogusCounterexample,
    #[error("the perfect oracle needs a teacher with a reference machine")]
    OracleNeedsReference,
    #[error("invalid learner options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Mealy(#[from] MealyError),
}

/// Per-round trace entry: the hypothesis size at the equivalence query and
/// the (normalized) counterexample length when one came back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub hypothesis_states: usize,
    pub ce_length: Option<usize>,
}

/// A hypothesis machine plus the access word of each state.
pub(crate) struct Hypothesis {
    pub machine: MealyMachine,
    pub access: Vec<Vec<usize>>,
}

/// Learns the teacher's machine. With the perfect oracle the result is
/// equivalent to the teacher and minimal in state count.
pub fn learn(
    teacher: &mut dyn Teacher,
    opts: &LearnerOptions,
) -> Result<(MealyMachine, LearnMetrics), LearnError> {
    let (machine, metrics, _) = learn_with_trace(teacher, opts)?;
    Ok((machine, metrics))
}

/// [`learn`] plus the per-round trace used by round analysis.
pub fn learn_with_trace(
    teacher: &mut dyn Teacher,
    opts: &LearnerOptions,
) -> Result<(MealyMachine, LearnMetrics, Vec<RoundRecord>), LearnError> {
    validate_options(opts)?;
    if teacher.input_symbols().is_empty() {
        return Err(LearnError::InvalidOptions("empty input alphabet".to_string()));
    }
    let inputs = teacher.input_symbols().to_vec();
    let outputs = teacher.output_symbols().to_vec();
    let mut run = Lstar {
        engine: Engine::new(teacher, opts.cache),
        table: ObservationTable::new(inputs.len()),
        inputs,
        outputs,
        opts: *opts,
    };
    run.table.fill(&mut run.engine)?;
    let mut oracle = OracleRuntime::new(&opts.oracle);
    let mut trace = Vec::new();
    loop {
        run.close_and_make_consistent()?;
        debug_assert!(run.table.invariants_hold());
        let hypothesis = run.build_hypothesis();
        run.engine.metrics.rounds += 1;
        run.engine.metrics.eq_count += 1;
        match oracle::run_oracle(&mut oracle, &hypothesis, &mut run.engine)? {
            None => {
                trace.push(RoundRecord {
                    hypothesis_states: hypothesis.machine.state_count(),
                    ce_length: None,
                });
                if matches!(opts.oracle, OracleKind::RandomWords { .. }) {
                    run.engine.metrics.unverified = true;
                }
                return Ok((hypothesis.machine, run.engine.metrics, trace));
            }
            Some((word, teacher_outputs)) => {
                let ce = normalize_counterexample(&hypothesis, &word, &teacher_outputs)?;
                trace.push(RoundRecord {
                    hypothesis_states: hypothesis.machine.state_count(),
                    ce_length: Some(ce.len()),
                });
                run.process_counterexample(&hypothesis, &ce)?;
                debug_assert!(run.table.invariants_hold());
            }
        }
    }
}

fn validate_options(opts: &LearnerOptions) -> Result<(), LearnError> {
    if let OracleKind::RandomWords {
        count,
        min_len,
        max_len,
        ..
    } = opts.oracle
    {
        if count == 0 {
            return Err(LearnError::InvalidOptions("random oracle needs count >= 1".into()));
        }
        if min_len == 0 || min_len > max_len {
            return Err(LearnError::InvalidOptions(
                "random oracle needs 1 <= min_len <= max_len".into(),
            ));
        }
    }
    Ok(())
}

/// Trims a counterexample to its shortest prefix on which the last outputs
/// of hypothesis and teacher differ.
fn normalize_counterexample(
    hypothesis: &Hypothesis,
    word: &[usize],
    teacher_outputs: &[usize],
) -> Result<Vec<usize>, LearnError> {
    let hyp_outputs = hypothesis.machine.run_indices(word);
    match hyp_outputs
        .iter()
        .zip(teacher_outputs.iter())
        .position(|(h, t)| h != t)
    {
        Some(k) => Ok(word[..=k].to_vec()),
        None => Err(LearnError::BogusCounterexample),
    }
}

struct Lstar<'a> {
    engine: Engine<'a>,
    table: ObservationTable,
    inputs: Vec<String>,
    outputs: Vec<String>,
    opts: LearnerOptions,
}

impl Lstar<'_> {
    /// Fixpoint of (consistency, then closedness) repairs.
    fn close_and_make_consistent(&mut self) -> Result<(), LearnError> {
        loop {
            if let Some(suffix) = self.table.find_inconsistency() {
                self.table.add_suffix(&suffix);
                self.table.fill(&mut self.engine)?;
                continue;
            }
            if let Some(row) = self.table.unclosed_row(self.opts.closing) {
                self.table.promote(row);
                self.table.fill(&mut self.engine)?;
                continue;
            }
            return Ok(());
        }
    }

    /// States are the distinct S-row vectors in first-occurrence order;
    /// transitions and outputs read straight off the table.
    fn build_hypothesis(&self) -> Hypothesis {
        let table = &self.table;
        let mut state_of_signature: HashMap<&[usize], usize> = HashMap::new();
        let mut access: Vec<Vec<usize>> = Vec::new();
        let mut representatives: Vec<usize> = Vec::new();
        for &row in table.s_row_ids() {
            let signature = table.row_cells(row);
            if !state_of_signature.contains_key(signature) {
                state_of_signature.insert(signature, representatives.len());
                representatives.push(row);
                access.push(table.row_word(row).to_vec());
            }
        }
        let input_count = self.inputs.len();
        let rows: Vec<Vec<(usize, usize)>> = representatives
            .iter()
            .map(|&rep| {
                (0..input_count)
                    .map(|input| {
                        let mut word = table.row_word(rep).to_vec();
                        word.push(input);
                        let ext = table.row_id(&word).expect("S extensions exist");
                        let target = *state_of_signature
                            .get(table.row_cells(ext))
                            .expect("table is closed");
                        // E starts as the alphabet, so column `input` holds
                        // the one-symbol suffix output.
                        let output = table.row_cells(rep)[input];
                        (target, output)
                    })
                    .collect()
            })
            .collect();
        let names = (0..representatives.len()).map(|i| format!("s{i}")).collect();
        let machine = MealyMachine::new(names, 0, self.inputs.clone(), self.outputs.clone(), rows)
            .expect("hypothesis from a closed consistent table is well-formed");
        Hypothesis { machine, access }
    }

    fn process_counterexample(
        &mut self,
        hypothesis: &Hypothesis,
        ce: &[usize],
    ) -> Result<(), LearnError> {
        match self.opts.ce_handling {
            CeHandling::AllPrefixes => {
                for len in 1..=ce.len() {
                    self.table.add_word_to_s(&ce[..len]);
                }
            }
            CeHandling::RivestSchapire => {
                let suffix = self.rivest_schapire_suffix(hypothesis, ce)?;
                self.table.add_suffix_with_tails(&suffix);
            }
        }
        self.table.fill(&mut self.engine)
    }

    /// Binary search for a position where re-anchoring the counterexample
    /// through hypothesis access words flips the teacher's answer. The
    /// suffix after the flip distinguishes two rows the hypothesis merged.
    fn rivest_schapire_suffix(
        &mut self,
        hypothesis: &Hypothesis,
        ce: &[usize],
    ) -> Result<Vec<usize>, LearnError> {
        let machine = &hypothesis.machine;
        let query_at = |run: &mut Self, i: usize| -> Result<usize, LearnError> {
            let state = machine.state_after(&ce[..i]);
            let mut word = hypothesis.access[state].clone();
            word.extend_from_slice(&ce[i..]);
            run.engine.mq_last(&word)
        };
        // The anchored answer at 0 is the original counterexample; at
        // |ce|-1 it equals the table cell backing the hypothesis output,
        // so a flip always exists in between.
        let mut lo = 0;
        let mut hi = ce.len() - 1;
        let at_lo = query_at(self, lo)?;
        if lo == hi {
            return Ok(ce[ce.len() - 1..].to_vec());
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if query_at(self, mid)? == at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(ce[hi..].to_vec())
    }
}
