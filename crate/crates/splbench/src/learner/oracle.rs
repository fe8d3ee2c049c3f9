//! Equivalence oracles: perfect (reference-machine comparison), W-method
//! test suites, and seeded random words.

use std::collections::HashSet;

use super::teacher::Engine;
use super::{Hypothesis, LearnError, OracleKind};
use crate::mealy::MealyMachine;
use crate::rng::SplitMix64;

/// Oracle state that persists across rounds of one learning run (the
/// random-word stream keeps advancing instead of replaying).
pub(crate) enum OracleRuntime {
    Perfect,
    WMethod {
        depth: usize,
    },
    Random {
        rng: SplitMix64,
        count: usize,
        min_len: usize,
        max_len: usize,
    },
}

impl OracleRuntime {
    pub fn new(kind: &OracleKind) -> Self {
        match *kind {
            OracleKind::Perfect => OracleRuntime::Perfect,
            OracleKind::WMethod { depth } => OracleRuntime::WMethod { depth },
            OracleKind::RandomWords {
                count,
                min_len,
                max_len,
                seed,
            } => OracleRuntime::Random {
                rng: SplitMix64::new(seed),
                count,
                min_len,
                max_len,
            },
        }
    }
}

/// A counterexample word paired with the teacher's output word on it.
pub(crate) type Counterexample = (Vec<usize>, Vec<usize>);

/// Runs one equivalence query. Returns the counterexample together with
/// the teacher's output word on it, or `None` on pass.
pub(crate) fn run_oracle(
    oracle: &mut OracleRuntime,
    hypothesis: &Hypothesis,
    engine: &mut Engine<'_>,
) -> Result<Option<Counterexample>, LearnError> {
    match oracle {
        OracleRuntime::Perfect => {
            let reference = engine
                .teacher
                .reference()
                .ok_or(LearnError::OracleNeedsReference)?;
            match hypothesis.machine.equivalent(reference)? {
                // The perfect oracle inspects the reference directly and
                // performs no SUL executions, so it adds no cost.
                Some(word) => {
                    let outputs = reference.run_indices(&word);
                    Ok(Some((word, outputs)))
                }
                None => Ok(None),
            }
        }
        OracleRuntime::WMethod { depth } => Ok(wmethod_search(hypothesis, engine, *depth)),
        OracleRuntime::Random {
            rng,
            count,
            min_len,
            max_len,
        } => {
            let inputs = hypothesis.machine.inputs().len();
            for _ in 0..*count {
                let len = *min_len + rng.below(*max_len - *min_len + 1);
                let word: Vec<usize> = (0..len).map(|_| rng.below(inputs)).collect();
                let teacher_out = engine.eq_execute(&word);
                if hypothesis.machine.run_indices(&word) != teacher_out {
                    return Ok(Some((word, teacher_out)));
                }
            }
            Ok(None)
        }
    }
}

/// Executes the W-method suite
/// `{ access(q) . a . m . w : q state, a input, m in I^{<=depth}, w in W }`
/// in deterministic order (state, input, middle by length then
/// lexicographic, characterizing suffix), skipping repeated words, and
/// returns the first failing test.
pub(crate) fn wmethod_search(
    hypothesis: &Hypothesis,
    engine: &mut Engine<'_>,
    depth: usize,
) -> Option<Counterexample> {
    let machine = &hypothesis.machine;
    let inputs = machine.inputs().len();
    let mut w_set = characterizing_set(machine);
    if w_set.is_empty() {
        w_set.push(Vec::new());
    }
    let middles = words_up_to(inputs, depth);
    let mut executed: HashSet<Vec<usize>> = HashSet::new();
    for access in &hypothesis.access {
        for a in 0..inputs {
            for middle in &middles {
                for w in &w_set {
                    let mut word = access.clone();
                    word.push(a);
                    word.extend_from_slice(middle);
                    word.extend_from_slice(w);
                    if !executed.insert(word.clone()) {
                        continue;
                    }
                    let teacher_out = engine.eq_execute(&word);
                    if machine.run_indices(&word) != teacher_out {
                        return Some((word, teacher_out));
                    }
                }
            }
        }
    }
    None
}

/// All words of length `0..=depth`, in (length, lexicographic) order.
fn words_up_to(inputs: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for word in &layer {
            for a in 0..inputs {
                let mut w = word.clone();
                w.push(a);
                next.push(w);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// A characterizing set: for every pair of distinct states, the shortest
/// word separating them. Deduplicated and sorted by (length,
/// lexicographic) for a deterministic suite order.
pub(crate) fn characterizing_set(machine: &MealyMachine) -> Vec<Vec<usize>> {
    let n = machine.state_count();
    let mut words: Vec<Vec<usize>> = Vec::new();
    for s1 in 0..n {
        for s2 in s1 + 1..n {
            if let Some(word) = machine.distinguishing_word(s1, s2) {
                if !words.contains(&word) {
                    words.push(word);
                }
            }
        }
    }
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    words
}
