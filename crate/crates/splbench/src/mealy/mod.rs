//! Deterministic complete Mealy machines: execution, minimization,
//! equivalence checking and dot serialization.

mod dot;
mod equiv;
mod minimize;

use thiserror::Error;

pub use dot::{parse_dot, write_dot};

/// Statement-level dot machinery shared with the FFSM reader.
pub(crate) mod dot_graph {
    pub(crate) use super::dot::{parse_dot_graph, split_edge_label};
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MealyError {
    #[error("input symbol `{0}` is not in the alphabet")]
    UnknownInput(String),
    #[error("empty input word")]
    EmptyWord,
    #[error("input alphabets differ")]
    AlphabetMismatch,
    #[error("invalid symbol `{0}`: symbols match [A-Za-z0-9_]+")]
    InvalidSymbol(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("machine has no states")]
    NoStates,
    #[error("missing transition for state `{state}` on input `{input}`")]
    Incomplete { state: String, input: String },
    #[error("more than one transition for state `{state}` on input `{input}`")]
    Nondeterministic { state: String, input: String },
    #[error("dot syntax error on line {line}: {message}")]
    DotSyntax { line: usize, message: String },
    #[error("edge label `{0}` does not match `input / output`")]
    BadEdgeLabel(String),
    #[error("edge references unknown node `{0}`")]
    UnknownNode(String),
    #[error("missing initial state marker")]
    MissingInitialMarker,
}

/// Symbols used for states, inputs and outputs.
pub fn is_valid_symbol(symbol: &str) -> bool {
    !symbol.is_empty()
        && symbol
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A deterministic, complete Mealy machine.
///
/// Immutable after construction: the transition and output functions are
/// total over states x inputs, so every accessor below is panic-free for
/// in-range indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyMachine {
    states: Vec<String>,
    initial: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
    /// `transitions[state][input] = (target state, output)`.
    transitions: Vec<Vec<(usize, usize)>>,
}

impl MealyMachine {
    /// Builds a machine from index-based parts, checking shape and ranges.
    pub fn new(
        states: Vec<String>,
        initial: usize,
        inputs: Vec<String>,
        outputs: Vec<String>,
        transitions: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self, MealyError> {
        if states.is_empty() {
            return Err(MealyError::NoStates);
        }
        for (list, label) in [(&states, "state"), (&inputs, "input"), (&outputs, "output")] {
            for symbol in list {
                if !is_valid_symbol(symbol) {
                    return Err(MealyError::InvalidSymbol(format!("{label} {symbol}")));
                }
            }
        }
        for (idx, name) in states.iter().enumerate() {
            if states[..idx].contains(name) {
                return Err(MealyError::DuplicateState(name.clone()));
            }
        }
        assert!(initial < states.len(), "initial state out of range");
        assert_eq!(transitions.len(), states.len(), "one row per state");
        for (state, row) in transitions.iter().enumerate() {
            if row.len() != inputs.len() {
                return Err(MealyError::Incomplete {
                    state: states[state].clone(),
                    input: inputs
                        .get(row.len())
                        .cloned()
                        .unwrap_or_else(|| "?".to_string()),
                });
            }
            for &(target, output) in row {
                assert!(target < states.len(), "transition target out of range");
                assert!(output < outputs.len(), "transition output out of range");
            }
        }
        Ok(MealyMachine {
            states,
            initial,
            inputs,
            outputs,
            transitions,
        })
    }

    /// Builds a machine from `(source, input, output, target)` edges given
    /// by name. States, inputs and outputs are collected in first-occurrence
    /// order; the machine must come out deterministic and complete.
    pub fn from_edges(
        initial: &str,
        edges: &[(&str, &str, &str, &str)],
    ) -> Result<Self, MealyError> {
        let mut states: Vec<String> = vec![initial.to_string()];
        let mut inputs: Vec<String> = Vec::new();
        let mut outputs: Vec<String> = Vec::new();
        let intern = |list: &mut Vec<String>, symbol: &str| -> usize {
            match list.iter().position(|s| s == symbol) {
                Some(idx) => idx,
                None => {
                    list.push(symbol.to_string());
                    list.len() - 1
                }
            }
        };
        let mut triples = Vec::new();
        for &(source, input, output, target) in edges {
            let s = intern(&mut states, source);
            let i = intern(&mut inputs, input);
            let o = intern(&mut outputs, output);
            let t = intern(&mut states, target);
            triples.push((s, i, o, t));
        }
        let mut transitions: Vec<Vec<Option<(usize, usize)>>> =
            vec![vec![None; inputs.len()]; states.len()];
        for (s, i, o, t) in triples {
            if transitions[s][i].is_some() {
                return Err(MealyError::Nondeterministic {
                    state: states[s].clone(),
                    input: inputs[i].clone(),
                });
            }
            transitions[s][i] = Some((t, o));
        }
        let mut rows = Vec::with_capacity(states.len());
        for (s, row) in transitions.into_iter().enumerate() {
            let mut complete = Vec::with_capacity(row.len());
            for (i, entry) in row.into_iter().enumerate() {
                match entry {
                    Some(pair) => complete.push(pair),
                    None => {
                        return Err(MealyError::Incomplete {
                            state: states[s].clone(),
                            input: inputs[i].clone(),
                        })
                    }
                }
            }
            rows.push(complete);
        }
        MealyMachine::new(states, 0, inputs, outputs, rows)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn input_index(&self, symbol: &str) -> Option<usize> {
        self.inputs.iter().position(|s| s == symbol)
    }

    pub fn output_index(&self, symbol: &str) -> Option<usize> {
        self.outputs.iter().position(|s| s == symbol)
    }

    /// `(target, output)` for a state/input pair.
    pub fn step(&self, state: usize, input: usize) -> (usize, usize) {
        self.transitions[state][input]
    }

    /// Runs an index word from the initial state, returning output indices.
    pub fn run_indices(&self, word: &[usize]) -> Vec<usize> {
        let mut state = self.initial;
        let mut out = Vec::with_capacity(word.len());
        for &input in word {
            let (next, output) = self.step(state, input);
            out.push(output);
            state = next;
        }
        out
    }

    /// Final state reached by an index word from the initial state.
    pub fn state_after(&self, word: &[usize]) -> usize {
        let mut state = self.initial;
        for &input in word {
            state = self.step(state, input).0;
        }
        state
    }

    fn index_word(&self, word: &[&str]) -> Result<Vec<usize>, MealyError> {
        word.iter()
            .map(|symbol| {
                self.input_index(symbol)
                    .ok_or_else(|| MealyError::UnknownInput((*symbol).to_string()))
            })
            .collect()
    }

    /// Output word produced by an input word; empty input gives empty output.
    pub fn run(&self, word: &[&str]) -> Result<Vec<&str>, MealyError> {
        let indices = self.index_word(word)?;
        Ok(self
            .run_indices(&indices)
            .into_iter()
            .map(|o| self.outputs[o].as_str())
            .collect())
    }

    /// Final output symbol of a non-empty input word.
    pub fn last_output(&self, word: &[&str]) -> Result<&str, MealyError> {
        if word.is_empty() {
            return Err(MealyError::EmptyWord);
        }
        Ok(self.run(word)?.pop().unwrap())
    }

    /// Reachable states in breadth-first order from the initial state,
    /// expanding inputs in alphabet order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut order = Vec::with_capacity(self.states.len());
        seen[self.initial] = true;
        order.push(self.initial);
        let mut cursor = 0;
        while cursor < order.len() {
            let state = order[cursor];
            cursor += 1;
            for input in 0..self.inputs.len() {
                let (target, _) = self.step(state, input);
                if !seen[target] {
                    seen[target] = true;
                    order.push(target);
                }
            }
        }
        order
    }

    /// Names of states not reachable from the initial state. Kept by the
    /// parser; callers surface them as warnings.
    pub fn unreachable_states(&self) -> Vec<&str> {
        let mut reachable = vec![false; self.states.len()];
        for state in self.bfs_order() {
            reachable[state] = true;
        }
        self.states
            .iter()
            .enumerate()
            .filter(|(idx, _)| !reachable[*idx])
            .map(|(_, name)| name.as_str())
            .collect()
    }

    /// Symbols for an index word.
    pub fn input_symbols(&self, word: &[usize]) -> Vec<&str> {
        word.iter().map(|&i| self.inputs[i].as_str()).collect()
    }
}

/// The three-state cycle machine used as the canonical "needs more than one
/// learning round" witness: two of its states share one-step output rows.
#[cfg(test)]
pub(crate) fn m3() -> MealyMachine {
    MealyMachine::from_edges(
        "q0",
        &[
            ("q0", "a", "0", "q1"),
            ("q0", "b", "0", "q0"),
            ("q1", "a", "0", "q2"),
            ("q1", "b", "0", "q1"),
            ("q2", "a", "1", "q0"),
            ("q2", "b", "0", "q2"),
        ],
    )
    .unwrap()
}
