//! Dot serialization of FFSMs.
//!
//! Rides on the FSM dot dialect with `@`-separated presence conditions:
//! node labels are `name @ pc`, edge labels `input @ pc / output`, and a
//! ` @ true` annotation is omitted on both. The feature model is supplied
//! separately and never embedded in the file.

use std::fmt::Write as _;

use super::{CondTransition, Ffsm, FfsmError};
use crate::feature_model::{parse_constraint, FeatureExpr, FeatureModel};
use crate::mealy::dot_graph::{parse_dot_graph, split_edge_label};
use crate::mealy::MealyError;

pub fn parse_ffsm_dot(text: &str, feature_model: &FeatureModel) -> Result<Ffsm, FfsmError> {
    let graph = parse_dot_graph(text)?;
    let (state_nodes, initial_name) = graph.classify()?;

    let mut cond_states: Vec<(String, FeatureExpr)> = Vec::with_capacity(state_nodes.len());
    for node in &state_nodes {
        let condition = match node.attr("label") {
            Some(label) => match label.split_once('@') {
                Some((_, pc)) => parse_constraint(pc.trim())?,
                None => FeatureExpr::lit(true),
            },
            None => FeatureExpr::lit(true),
        };
        cond_states.push((node.name.clone(), condition));
    }
    let state_index = |name: &str| -> Result<usize, FfsmError> {
        cond_states
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| FfsmError::Dot(MealyError::UnknownNode(name.to_string())))
    };

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

    let mut transitions = Vec::new();
    for edge in graph.state_edges() {
        let label = edge
            .label()
            .ok_or_else(|| FfsmError::Dot(MealyError::BadEdgeLabel(String::new())))?;
        let (left, output_sym) = split_edge_label(label)
            .ok_or_else(|| FfsmError::Dot(MealyError::BadEdgeLabel(label.to_string())))?;
        let (input_sym, guard) = match left.split_once('@') {
            Some((input_sym, pc)) => (input_sym.trim(), parse_constraint(pc.trim())?),
            None => (left, FeatureExpr::lit(true)),
        };
        transitions.push(CondTransition {
            source: state_index(&edge.source)?,
            input: intern(&mut inputs, input_sym),
            guard,
            output: intern(&mut outputs, output_sym),
            target: state_index(&edge.target)?,
        });
    }

    let initial = state_index(&initial_name)?;
    Ffsm::new(
        feature_model.clone(),
        cond_states,
        initial,
        inputs,
        outputs,
        transitions,
    )
}

/// Canonical serialization: states in declaration order, transitions
/// sorted by (source, input, guard text, target, output).
pub fn write_ffsm_dot(ffsm: &Ffsm) -> String {
    let mut out = String::new();
    out.push_str("digraph ffsm {\n");
    out.push_str("  __start0 [shape=none label=\"\"]\n");
    let _ = writeln!(out, "  __start0 -> {}", ffsm.cond_states()[ffsm.initial()].0);
    for (name, condition) in ffsm.cond_states() {
        if condition.is_true() {
            let _ = writeln!(out, "  {name} [shape=circle label=\"{name}\"]");
        } else {
            let _ = writeln!(out, "  {name} [shape=circle label=\"{name} @ {condition}\"]");
        }
    }
    let mut order: Vec<&CondTransition> = ffsm.transitions().iter().collect();
    order.sort_by_cached_key(|t| {
        (
            t.source,
            t.input,
            t.guard.to_string(),
            t.target,
            t.output,
        )
    });
    for t in order {
        let source = &ffsm.cond_states()[t.source].0;
        let target = &ffsm.cond_states()[t.target].0;
        let input = &ffsm.inputs()[t.input];
        let output = &ffsm.outputs()[t.output];
        if t.guard.is_true() {
            let _ = writeln!(out, "  {source} -> {target} [label=\"{input} / {output}\"]");
        } else {
            let _ = writeln!(
                out,
                "  {source} -> {target} [label=\"{input} @ {} / {output}\"]",
                t.guard
            );
        }
    }
    out.push_str("}\n");
    out
}
