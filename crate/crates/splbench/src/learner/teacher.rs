//! Teachers (simulated SULs) and the instrumented query engine.

use std::collections::HashMap;

use super::{LearnError, LearnMetrics};
use crate::mealy::MealyMachine;

/// The minimally adequate teacher interface: a system under learning that
/// answers executions of input words. A teacher instance is owned by one
/// learning run; its answers must come from a single fixed deterministic
/// machine for the whole run.
pub trait Teacher {
    fn input_symbols(&self) -> &[String];
    fn output_symbols(&self) -> &[String];
    /// Executes one input word from the initial state (one reset) and
    /// returns the full output word, as indices into `output_symbols`.
    fn execute(&mut self, word: &[usize]) -> Vec<usize>;
    /// The reference machine, when this teacher simulates a known SUL.
    /// The perfect equivalence oracle requires it.
    fn reference(&self) -> Option<&MealyMachine> {
        None
    }
}

/// Teacher backed by a known Mealy machine.
#[derive(Debug, Clone)]
pub struct SimulatedTeacher {
    machine: MealyMachine,
}

impl SimulatedTeacher {
    pub fn new(machine: MealyMachine) -> Self {
        SimulatedTeacher { machine }
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }
}

impl Teacher for SimulatedTeacher {
    fn input_symbols(&self) -> &[String] {
        self.machine.inputs()
    }

    fn output_symbols(&self) -> &[String] {
        self.machine.outputs()
    }

    fn execute(&mut self, word: &[usize]) -> Vec<usize> {
        self.machine.run_indices(word)
    }

    fn reference(&self) -> Option<&MealyMachine> {
        Some(&self.machine)
    }
}

/// Wraps a teacher with the cost accounting and the optional query cache.
///
/// Table queries go through [`Engine::mq_last`] and count toward
/// `mq_count`/`mq_symbols`; equivalence-oracle test executions go through
/// [`Engine::eq_execute`] and count toward `eq_symbols`. Both bump
/// `resets` once per word actually sent to the teacher. Cache hits are
/// never sent, so they cost nothing.
pub(crate) struct Engine<'a> {
    pub teacher: &'a mut dyn Teacher,
    cache: Option<HashMap<Vec<usize>, Vec<usize>>>,
    pub metrics: LearnMetrics,
}

impl<'a> Engine<'a> {
    pub fn new(teacher: &'a mut dyn Teacher, cache: bool) -> Self {
        Engine {
            teacher,
            cache: cache.then(HashMap::new),
            metrics: LearnMetrics::default(),
        }
    }

    /// Membership query: the last output of the SUL on `word`.
    pub fn mq_last(&mut self, word: &[usize]) -> Result<usize, LearnError> {
        debug_assert!(!word.is_empty(), "membership queries are non-empty");
        if let Some(cache) = &self.cache {
            if let Some(outputs) = cache.get(word) {
                return Ok(*outputs.last().expect("cached word is non-empty"));
            }
        }
        let outputs = self.teacher.execute(word);
        self.metrics.mq_count += 1;
        self.metrics.mq_symbols += word.len() as u64;
        self.metrics.resets += 1;
        let last = *outputs.last().expect("teacher returned empty output word");
        if let Some(cache) = &mut self.cache {
            if let Some(previous) = cache.insert(word.to_vec(), outputs) {
                if previous != *cache.get(word).expect("just inserted") {
                    return Err(LearnError::InconsistentTeacher);
                }
            }
        }
        Ok(last)
    }

    /// Equivalence-oracle test execution: full output word of the SUL.
    pub fn eq_execute(&mut self, word: &[usize]) -> Vec<usize> {
        let outputs = self.teacher.execute(word);
        self.metrics.eq_symbols += word.len() as u64;
        self.metrics.resets += 1;
        outputs
    }
}
