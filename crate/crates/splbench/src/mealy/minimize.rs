//! Minimization by Moore-style partition refinement.

use std::collections::HashMap;

use super::MealyMachine;

impl MealyMachine {
    /// Returns the unique minimal machine equivalent to the reachable part
    /// of `self`. States are renamed `s0..s(k-1)` in breadth-first order
    /// from the initial state, so equal minimal machines serialize
    /// identically.
    pub fn minimize(&self) -> MealyMachine {
        let reachable = self.bfs_order();
        let position: HashMap<usize, usize> = reachable
            .iter()
            .enumerate()
            .map(|(pos, &state)| (state, pos))
            .collect();
        let n = reachable.len();
        let inputs = self.inputs().len();

        // Initial partition: one block per one-step output row.
        let mut block = vec![0usize; n];
        let mut signature_ids: HashMap<Vec<usize>, usize> = HashMap::new();
        for (pos, &state) in reachable.iter().enumerate() {
            let row: Vec<usize> = (0..inputs).map(|i| self.step(state, i).1).collect();
            let next = signature_ids.len();
            block[pos] = *signature_ids.entry(row).or_insert(next);
        }
        let mut block_count = signature_ids.len();

        // Refine on (current block, successor block per input) until stable.
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next_block = vec![0usize; n];
            for (pos, &state) in reachable.iter().enumerate() {
                let successors: Vec<usize> = (0..inputs)
                    .map(|i| block[position[&self.step(state, i).0]])
                    .collect();
                let next = ids.len();
                next_block[pos] = *ids.entry((block[pos], successors)).or_insert(next);
            }
            let next_count = ids.len();
            block = next_block;
            if next_count == block_count {
                break;
            }
            block_count = next_count;
        }

        // Quotient machine with canonical BFS naming. The representative
        // order is the BFS order of blocks as first encountered from the
        // initial state's block.
        let initial_block = block[position[&self.initial()]];
        let mut block_to_state: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<usize> = Vec::with_capacity(block_count);
        block_to_state.insert(initial_block, 0);
        order.push(initial_block);
        // Representative of a block: the first reachable state (in BFS
        // position order) belonging to it.
        let representative = |b: usize| -> usize {
            reachable[block.iter().position(|&x| x == b).unwrap()]
        };
        let mut cursor = 0;
        let mut rows: Vec<Vec<(usize, usize)>> = Vec::with_capacity(block_count);
        while cursor < order.len() {
            let current = order[cursor];
            cursor += 1;
            let state = representative(current);
            let mut row = Vec::with_capacity(inputs);
            for input in 0..inputs {
                let (target, output) = self.step(state, input);
                let target_block = block[position[&target]];
                let next_id = block_to_state.len();
                let target_state = *block_to_state.entry(target_block).or_insert_with(|| {
                    order.push(target_block);
                    next_id
                });
                row.push((target_state, output));
            }
            rows.push(row);
        }

        let states = (0..rows.len()).map(|i| format!("s{i}")).collect();
        MealyMachine::new(
            states,
            0,
            self.inputs().to_vec(),
            self.outputs().to_vec(),
            rows,
        )
        .expect("quotient of a valid machine is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{m3, MealyMachine};

    /// Brute-force bisimulation oracle: two states behave identically iff
    /// they produce the same outputs on every word up to the given length.
    fn brute_states_equivalent(
        m: &MealyMachine,
        s1: usize,
        s2: usize,
        max_len: usize,
    ) -> bool {
        fn run_from(m: &MealyMachine, mut state: usize, word: &[usize]) -> Vec<usize> {
            let mut out = Vec::new();
            for &input in word {
                let (next, output) = m.step(state, input);
                out.push(output);
                state = next;
            }
            out
        }
        let inputs = m.inputs().len();
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for word in &words {
                for i in 0..inputs {
                    let mut w = word.clone();
                    w.push(i);
                    if run_from(m, s1, &w) != run_from(m, s2, &w) {
                        return false;
                    }
                    next.push(w);
                }
            }
            words = next;
        }
        true
    }

    fn duplicate_state_machine() -> MealyMachine {
        // s1 and s2 are bisimilar: identical outputs, self-loop on b,
        // both return to s0 on a.
        MealyMachine::from_edges(
            "s0",
            &[
                ("s0", "a", "0", "s1"),
                ("s0", "b", "0", "s2"),
                ("s1", "a", "1", "s0"),
                ("s1", "b", "0", "s1"),
                ("s2", "a", "1", "s0"),
                ("s2", "b", "0", "s2"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn m3_is_already_minimal() {
        let min = m3().minimize();
        assert_eq!(min.state_count(), 3);
    }

    #[test]
    fn duplicate_state_is_merged() {
        let m = duplicate_state_machine();
        // Oracle first: states 1 and 2 are genuinely bisimilar.
        assert!(brute_states_equivalent(&m, 1, 2, 6));
        assert!(!brute_states_equivalent(&m, 0, 1, 6));
        let min = m.minimize();
        assert_eq!(min.state_count(), 2);
    }

    #[test]
    fn one_state_machine_minimizes_to_itself() {
        let m = MealyMachine::from_edges("s", &[("s", "a", "x", "s")]).unwrap();
        let min = m.minimize();
        assert_eq!(min.state_count(), 1);
        assert_eq!(min.run(&["a", "a"]).unwrap(), vec!["x", "x"]);
    }

    #[test]
    fn minimize_is_idempotent() {
        for m in [m3(), duplicate_state_machine()] {
            let once = m.minimize();
            let twice = once.minimize();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn minimize_uses_canonical_names() {
        let min = duplicate_state_machine().minimize();
        assert_eq!(min.states(), ["s0", "s1"]);
        assert_eq!(min.initial(), 0);
    }

    #[test]
    fn minimize_drops_unreachable_states() {
        let m = MealyMachine::new(
            vec!["a0".into(), "dead".into()],
            0,
            vec!["i".into()],
            vec!["o".into()],
            vec![vec![(0, 0)], vec![(1, 0)]],
        )
        .unwrap();
        assert_eq!(m.unreachable_states(), ["dead"]);
        assert_eq!(m.minimize().state_count(), 1);
    }
}
