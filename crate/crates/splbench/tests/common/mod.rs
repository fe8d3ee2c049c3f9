//! Shared helpers for the integration suites: seeded machine generation
//! and brute-force oracles kept independent of the library's search
//! implementations.

// Each integration target uses its own subset of these helpers.
#![allow(dead_code)]

use std::path::PathBuf;

use splbench::mealy::MealyMachine;
use splbench::rng::SplitMix64;

pub fn asset_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/game")
}

pub fn read_asset(name: &str) -> String {
    let path = asset_dir().join(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read bundled asset {}: {e}", path.display()))
}

/// A random complete Mealy machine; states may be unreachable, so callers
/// that need a connected or minimal machine should minimize first.
pub fn random_machine(
    seed: u64,
    n_states: usize,
    n_inputs: usize,
    n_outputs: usize,
) -> MealyMachine {
    let mut rng = SplitMix64::new(seed);
    let states = (0..n_states).map(|i| format!("q{i}")).collect();
    let inputs = (0..n_inputs).map(|i| format!("i{i}")).collect();
    let outputs = (0..n_outputs).map(|o| format!("o{o}")).collect();
    let transitions = (0..n_states)
        .map(|_| {
            (0..n_inputs)
                .map(|_| (rng.below(n_states), rng.below(n_outputs)))
                .collect()
        })
        .collect();
    MealyMachine::new(states, 0, inputs, outputs, transitions).expect("random machine is valid")
}

/// Independent equivalence oracle: scans every word in (length,
/// lexicographic) order up to `max_len` and returns the first one on which
/// the machines' output words differ.
pub fn brute_force_counterexample(
    m1: &MealyMachine,
    m2: &MealyMachine,
    max_len: usize,
) -> Option<Vec<usize>> {
    assert_eq!(m1.inputs(), m2.inputs());
    let inputs = m1.inputs().len();
    let differs = |word: &[usize]| {
        m1.run_indices(word)
            .iter()
            .zip(m2.run_indices(word).iter())
            .any(|(&a, &b)| m1.outputs()[a] != m2.outputs()[b])
    };
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * inputs);
        for word in &layer {
            for i in 0..inputs {
                let mut w = word.clone();
                w.push(i);
                if differs(&w) {
                    return Some(w);
                }
                next.push(w);
            }
        }
        layer = next;
    }
    None
}

/// The three-state delayed-observation machine: two states share one-step
/// output rows and separate only at depth two.
pub fn m3() -> MealyMachine {
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
