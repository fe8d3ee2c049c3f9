//! Equivalence checking with shortest counterexamples.

use std::collections::VecDeque;

use super::{MealyError, MealyMachine};

impl MealyMachine {
    /// Checks behavioral equivalence against `other`.
    ///
    /// Returns `None` when both machines produce the same output word for
    /// every input word, otherwise a shortest separating input word (as
    /// indices into the shared alphabet). Among equally short words the
    /// result is the least in input-alphabet order, found by breadth-first
    /// search over the product machine.
    pub fn equivalent(&self, other: &MealyMachine) -> Result<Option<Vec<usize>>, MealyError> {
        if self.inputs() != other.inputs() {
            return Err(MealyError::AlphabetMismatch);
        }
        let inputs = self.inputs().len();
        let n2 = other.state_count();
        let mut seen = vec![false; self.state_count() * n2];
        // Pair state plus the word that first reached it.
        let mut queue: VecDeque<(usize, usize, Vec<usize>)> = VecDeque::new();
        seen[self.initial() * n2 + other.initial()] = true;
        queue.push_back((self.initial(), other.initial(), Vec::new()));
        while let Some((s1, s2, path)) = queue.pop_front() {
            for input in 0..inputs {
                let (t1, o1) = self.step(s1, input);
                let (t2, o2) = other.step(s2, input);
                if self.outputs()[o1] != other.outputs()[o2] {
                    let mut word = path.clone();
                    word.push(input);
                    return Ok(Some(word));
                }
                if !seen[t1 * n2 + t2] {
                    seen[t1 * n2 + t2] = true;
                    let mut word = path.clone();
                    word.push(input);
                    queue.push_back((t1, t2, word));
                }
            }
        }
        Ok(None)
    }

    /// Shortest input word on which two states of this machine produce
    /// different output words, or `None` when the states are equivalent.
    /// Ties are broken toward the input-alphabet-least word.
    pub fn distinguishing_word(&self, s1: usize, s2: usize) -> Option<Vec<usize>> {
        let inputs = self.inputs().len();
        let n = self.state_count();
        let mut seen = vec![false; n * n];
        let mut queue: VecDeque<(usize, usize, Vec<usize>)> = VecDeque::new();
        seen[s1 * n + s2] = true;
        queue.push_back((s1, s2, Vec::new()));
        while let Some((a, b, path)) = queue.pop_front() {
            for input in 0..inputs {
                let (ta, oa) = self.step(a, input);
                let (tb, ob) = self.step(b, input);
                if oa != ob {
                    let mut word = path.clone();
                    word.push(input);
                    return Some(word);
                }
                if !seen[ta * n + tb] {
                    seen[ta * n + tb] = true;
                    let mut word = path.clone();
                    word.push(input);
                    queue.push_back((ta, tb, word));
                }
            }
        }
        None
    }
}
