//! Dot serialization of Mealy machines.
//!
//! The write side is bit-exact: header `digraph fsm {`, a `__start0`
//! marker pointing at the initial state, one node line per state in BFS
//! order, then edge lines sorted by (source BFS index, input alphabet
//! index), each edge labelled `input / output`. The parse side is
//! tolerant: attribute order, semicolons, comments, quoting and whitespace
//! around `/` are all free; the initial state is the target of an edge
//! whose source node has an empty or `none`-shaped label, falling back to
//! the first declared node.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MealyError, MealyMachine};

/// A parsed dot statement list, shared with the FFSM reader.
#[derive(Debug, Default)]
pub(crate) struct DotGraph {
    pub nodes: Vec<DotNode>,
    pub edges: Vec<DotEdge>,
}

#[derive(Debug)]
pub(crate) struct DotNode {
    pub name: String,
    pub attrs: Vec<(String, String)>,
}

#[derive(Debug)]
pub(crate) struct DotEdge {
    pub source: String,
    pub target: String,
    pub attrs: Vec<(String, String)>,
}

impl DotNode {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Start markers carry an empty label or a `none`/`point` shape.
    pub fn is_marker(&self) -> bool {
        self.attr("label") == Some("") || matches!(self.attr("shape"), Some("none" | "point"))
    }
}

impl DotEdge {
    pub fn label(&self) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == "label")
            .map(|(_, v)| v.as_str())
    }
}

impl DotGraph {
    /// Splits marker nodes from state nodes and resolves the initial state.
    pub fn classify(&self) -> Result<(Vec<&DotNode>, String), MealyError> {
        let states: Vec<&DotNode> = self.nodes.iter().filter(|n| !n.is_marker()).collect();
        let marker_names: Vec<&str> = self
            .nodes
            .iter()
            .filter(|n| n.is_marker())
            .map(|n| n.name.as_str())
            .collect();
        let initial = self
            .edges
            .iter()
            .find(|e| marker_names.contains(&e.source.as_str()))
            .map(|e| e.target.clone());
        let initial = match initial {
            Some(name) => name,
            None if !marker_names.is_empty() => return Err(MealyError::MissingInitialMarker),
            None => states
                .first()
                .map(|n| n.name.clone())
                .ok_or(MealyError::MissingInitialMarker)?,
        };
        if !states.iter().any(|n| n.name == initial) {
            return Err(MealyError::UnknownNode(initial));
        }
        Ok((states, initial))
    }

    /// Edges whose source is not a marker node.
    pub fn state_edges(&self) -> impl Iterator<Item = &DotEdge> {
        let markers: Vec<&str> = self
            .nodes
            .iter()
            .filter(|n| n.is_marker())
            .map(|n| n.name.as_str())
            .collect();
        self.edges
            .iter()
            .filter(move |e| !markers.contains(&e.source.as_str()))
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Id(String),
    Arrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Equals,
    Semi,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, MealyError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b'\n' => {
                line += 1;
                pos += 1;
            }
            _ if c.is_ascii_whitespace() => pos += 1,
            b'/' if bytes.get(pos + 1) == Some(&b'/') => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b'#' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b'/' if bytes.get(pos + 1) == Some(&b'*') => {
                pos += 2;
                while pos + 1 < bytes.len() && !(bytes[pos] == b'*' && bytes[pos + 1] == b'/') {
                    if bytes[pos] == b'\n' {
                        line += 1;
                    }
                    pos += 1;
                }
                pos = (pos + 2).min(bytes.len());
            }
            b'-' if bytes.get(pos + 1) == Some(&b'>') => {
                tokens.push((Token::Arrow, line));
                pos += 2;
            }
            b'{' => {
                tokens.push((Token::LBrace, line));
                pos += 1;
            }
            b'}' => {
                tokens.push((Token::RBrace, line));
                pos += 1;
            }
            b'[' => {
                tokens.push((Token::LBracket, line));
                pos += 1;
            }
            b']' => {
                tokens.push((Token::RBracket, line));
                pos += 1;
            }
            b'=' => {
                tokens.push((Token::Equals, line));
                pos += 1;
            }
            b';' => {
                tokens.push((Token::Semi, line));
                pos += 1;
            }
            b',' => {
                tokens.push((Token::Comma, line));
                pos += 1;
            }
            b'"' => {
                pos += 1;
                let mut value = String::new();
                loop {
                    match bytes.get(pos) {
                        Some(b'"') => {
                            pos += 1;
                            break;
                        }
                        Some(b'\\') if bytes.get(pos + 1) == Some(&b'"') => {
                            value.push('"');
                            pos += 2;
                        }
                        Some(&b) => {
                            if b == b'\n' {
                                line += 1;
                            }
                            value.push(b as char);
                            pos += 1;
                        }
                        None => {
                            return Err(MealyError::DotSyntax {
                                line,
                                message: "unterminated string".to_string(),
                            })
                        }
                    }
                }
                tokens.push((Token::Id(value), line));
            }
            _ if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_' || bytes[pos] == b'.')
                {
                    pos += 1;
                }
                tokens.push((
                    Token::Id(String::from_utf8_lossy(&bytes[start..pos]).into_owned()),
                    line,
                ));
            }
            _ => {
                return Err(MealyError::DotSyntax {
                    line,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        }
    }
    Ok(tokens)
}

/// Parses a dot digraph into raw node and edge statements.
pub(crate) fn parse_dot_graph(text: &str) -> Result<DotGraph, MealyError> {
    let tokens = tokenize(text)?;
    let mut cursor = 0;
    let err = |line: usize, message: &str| MealyError::DotSyntax {
        line,
        message: message.to_string(),
    };
    let line_at = |cursor: usize| -> usize {
        tokens
            .get(cursor)
            .or_else(|| tokens.last())
            .map(|(_, l)| *l)
            .unwrap_or(1)
    };

    match tokens.get(cursor) {
        Some((Token::Id(word), _)) if word == "digraph" => cursor += 1,
        _ => return Err(err(line_at(cursor), "expected `digraph`")),
    }
    if let Some((Token::Id(_), _)) = tokens.get(cursor) {
        cursor += 1; // optional graph name
    }
    match tokens.get(cursor) {
        Some((Token::LBrace, _)) => cursor += 1,
        _ => return Err(err(line_at(cursor), "expected `{`")),
    }

    let mut graph = DotGraph::default();
    loop {
        match tokens.get(cursor) {
            Some((Token::RBrace, _)) => {
                cursor += 1;
                break;
            }
            Some((Token::Semi, _)) => cursor += 1,
            Some((Token::Id(name), line)) => {
                let name = name.clone();
                let line = *line;
                cursor += 1;
                match tokens.get(cursor) {
                    Some((Token::Arrow, _)) => {
                        cursor += 1;
                        let target = match tokens.get(cursor) {
                            Some((Token::Id(t), _)) => t.clone(),
                            _ => return Err(err(line, "expected edge target")),
                        };
                        cursor += 1;
                        let attrs = parse_attr_list(&tokens, &mut cursor)?;
                        graph.edges.push(DotEdge {
                            source: name,
                            target,
                            attrs,
                        });
                    }
                    Some((Token::Equals, _)) => {
                        // Bare graph attribute such as `rankdir=LR`.
                        cursor += 1;
                        match tokens.get(cursor) {
                            Some((Token::Id(_), _)) => cursor += 1,
                            _ => return Err(err(line, "expected attribute value")),
                        }
                    }
                    _ => {
                        let attrs = parse_attr_list(&tokens, &mut cursor)?;
                        // Default-attribute statements apply no semantics here.
                        if !matches!(name.as_str(), "graph" | "node" | "edge") {
                            graph.nodes.push(DotNode { name, attrs });
                        }
                    }
                }
            }
            Some((_, line)) => return Err(err(*line, "expected statement")),
            None => return Err(err(line_at(cursor), "unexpected end of file")),
        }
    }
    if cursor != tokens.len() {
        return Err(err(line_at(cursor), "content after closing `}`"));
    }
    Ok(graph)
}

fn parse_attr_list(
    tokens: &[(Token, usize)],
    cursor: &mut usize,
) -> Result<Vec<(String, String)>, MealyError> {
    let mut attrs = Vec::new();
    if !matches!(tokens.get(*cursor), Some((Token::LBracket, _))) {
        return Ok(attrs);
    }
    let line = tokens[*cursor].1;
    *cursor += 1;
    loop {
        match tokens.get(*cursor) {
            Some((Token::RBracket, _)) => {
                *cursor += 1;
                return Ok(attrs);
            }
            Some((Token::Comma | Token::Semi, _)) => *cursor += 1,
            Some((Token::Id(key), line)) => {
                let key = key.clone();
                let line = *line;
                *cursor += 1;
                if !matches!(tokens.get(*cursor), Some((Token::Equals, _))) {
                    return Err(MealyError::DotSyntax {
                        line,
                        message: format!("expected `=` after attribute `{key}`"),
                    });
                }
                *cursor += 1;
                match tokens.get(*cursor) {
                    Some((Token::Id(value), _)) => {
                        attrs.push((key, value.clone()));
                        *cursor += 1;
                    }
                    _ => {
                        return Err(MealyError::DotSyntax {
                            line,
                            message: format!("expected value for attribute `{key}`"),
                        })
                    }
                }
            }
            _ => {
                return Err(MealyError::DotSyntax {
                    line,
                    message: "unterminated attribute list".to_string(),
                })
            }
        }
    }
}

/// Splits an edge label into the part before the first `/` and the part
/// after, trimming whitespace.
pub(crate) fn split_edge_label(label: &str) -> Option<(&str, &str)> {
    let slash = label.find('/')?;
    let left = label[..slash].trim();
    let right = label[slash + 1..].trim();
    if left.is_empty() || right.is_empty() {
        return None;
    }
    Some((left, right))
}

/// Parses a machine from dot text. Unreachable declared states are kept;
/// query them with [`MealyMachine::unreachable_states`].
pub fn parse_dot(text: &str) -> Result<MealyMachine, MealyError> {
    let graph = parse_dot_graph(text)?;
    let (state_nodes, initial_name) = graph.classify()?;

    let mut states: Vec<String> = Vec::with_capacity(state_nodes.len());
    for node in &state_nodes {
        if states.contains(&node.name) {
            return Err(MealyError::DuplicateState(node.name.clone()));
        }
        states.push(node.name.clone());
    }
    let state_index: HashMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

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

    let mut cells: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for edge in graph.state_edges() {
        let source = *state_index
            .get(edge.source.as_str())
            .ok_or_else(|| MealyError::UnknownNode(edge.source.clone()))?;
        let target = *state_index
            .get(edge.target.as_str())
            .ok_or_else(|| MealyError::UnknownNode(edge.target.clone()))?;
        let label = edge
            .label()
            .ok_or_else(|| MealyError::BadEdgeLabel(String::new()))?;
        let (input_sym, output_sym) =
            split_edge_label(label).ok_or_else(|| MealyError::BadEdgeLabel(label.to_string()))?;
        let input = intern(&mut inputs, input_sym);
        let output = intern(&mut outputs, output_sym);
        if cells.insert((source, input), (target, output)).is_some() {
            return Err(MealyError::Nondeterministic {
                state: states[source].clone(),
                input: inputs[input].clone(),
            });
        }
    }

    let mut rows = Vec::with_capacity(states.len());
    for (state, state_name) in states.iter().enumerate() {
        let mut row = Vec::with_capacity(inputs.len());
        for (input, input_name) in inputs.iter().enumerate() {
            match cells.get(&(state, input)) {
                Some(&cell) => row.push(cell),
                None => {
                    return Err(MealyError::Incomplete {
                        state: state_name.clone(),
                        input: input_name.clone(),
                    })
                }
            }
        }
        rows.push(row);
    }

    let initial = state_index[initial_name.as_str()];
    MealyMachine::new(states, initial, inputs, outputs, rows)
}

/// Canonical dot serialization of a machine.
pub fn write_dot(machine: &MealyMachine) -> String {
    let mut order = machine.bfs_order();
    // Unreachable states follow the BFS-ordered part in declaration order.
    for state in 0..machine.state_count() {
        if !order.contains(&state) {
            order.push(state);
        }
    }
    let mut out = String::new();
    out.push_str("digraph fsm {\n");
    out.push_str("  __start0 [shape=none label=\"\"]\n");
    let _ = writeln!(out, "  __start0 -> {}", machine.states()[machine.initial()]);
    for &state in &order {
        let name = &machine.states()[state];
        let _ = writeln!(out, "  {name} [shape=circle label=\"{name}\"]");
    }
    for &state in &order {
        for input in 0..machine.inputs().len() {
            let (target, output) = machine.step(state, input);
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{} / {}\"]",
                machine.states()[state],
                machine.states()[target],
                machine.inputs()[input],
                machine.outputs()[output],
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::m3;
    use super::*;

    #[test]
    fn writes_smallest_machine_exactly() {
        let m = MealyMachine::from_edges("s0", &[("s0", "a", "x", "s0")]).unwrap();
        let expected = "digraph fsm {\n  __start0 [shape=none label=\"\"]\n  __start0 -> s0\n  s0 [shape=circle label=\"s0\"]\n  s0 -> s0 [label=\"a / x\"]\n}\n";
        assert_eq!(write_dot(&m), expected);
    }

    #[test]
    fn rejects_nondeterministic_edges() {
        let text = r#"digraph fsm {
  __start0 [shape=none label=""]
  __start0 -> s0
  s0 [shape=circle label="s0"]
  s1 [shape=circle label="s1"]
  s2 [shape=circle label="s2"]
  s0 -> s1 [label="a / 0"]
  s0 -> s2 [label="a / 1"]
}"#;
        assert_eq!(
            parse_dot(text).unwrap_err(),
            MealyError::Nondeterministic {
                state: "s0".to_string(),
                input: "a".to_string()
            }
        );
    }

    #[test]
    fn round_trips_m3() {
        let m = m3();
        let text = write_dot(&m);
        let parsed = parse_dot(&text).unwrap();
        assert_eq!(parsed.state_count(), 3);
        assert_eq!(parsed.equivalent(&m).unwrap(), None);
        // Canonical writer is a fixpoint.
        assert_eq!(write_dot(&parsed), text);
    }

    #[test]
    fn parses_tolerantly() {
        // LearnLib-ish output: tabs, semicolons, quoted values, reversed
        // attribute order, no spaces around the slash, trailing comment.
        let text = "digraph g {\n\t__start0 [label=\"\" shape=\"none\"];\n\ts0 [label=\"s0\" shape=\"circle\"];\n\ts1 [label=\"s1\" shape=\"circle\"];\n\ts0 -> s1 [label=\"a/0\"];\n\ts0 -> s0 [label=\"b / 1\"];\n\ts1 -> s0 [label=\"a/1\"];\n\ts1 -> s1 [label=\"b/0\"];\n\t__start0 -> s0;\n// generated\n}\n";
        let m = parse_dot(text).unwrap();
        assert_eq!(m.states(), ["s0", "s1"]);
        assert_eq!(m.initial(), 0);
        assert_eq!(m.run(&["a", "a"]).unwrap(), vec!["0", "1"]);
    }

    #[test]
    fn initial_falls_back_to_first_declared_node() {
        let text = r#"digraph fsm {
  s1 [shape=circle label="s1"]
  s0 [shape=circle label="s0"]
  s1 -> s0 [label="a / 0"]
  s0 -> s1 [label="a / 1"]
}"#;
        let m = parse_dot(text).unwrap();
        assert_eq!(m.states()[m.initial()], "s1");
    }

    #[test]
    fn marker_without_edge_is_missing_initial() {
        let text = r#"digraph fsm {
  __start0 [shape=none label=""]
  s0 [shape=circle label="s0"]
  s0 -> s0 [label="a / 0"]
}"#;
        assert_eq!(parse_dot(text).unwrap_err(), MealyError::MissingInitialMarker);
    }

    #[test]
    fn empty_graph_has_no_initial() {
        assert_eq!(
            parse_dot("digraph fsm {}").unwrap_err(),
            MealyError::MissingInitialMarker
        );
    }

    #[test]
    fn rejects_edge_to_undeclared_node() {
        let text = r#"digraph fsm {
  s0 [shape=circle label="s0"]
  s0 -> phantom [label="a / 0"]
}"#;
        assert_eq!(
            parse_dot(text).unwrap_err(),
            MealyError::UnknownNode("phantom".to_string())
        );
    }

    #[test]
    fn rejects_label_without_slash() {
        let text = r#"digraph fsm {
  s0 [shape=circle label="s0"]
  s0 -> s0 [label="a"]
}"#;
        assert_eq!(
            parse_dot(text).unwrap_err(),
            MealyError::BadEdgeLabel("a".to_string())
        );
    }

    #[test]
    fn rejects_incomplete_machine() {
        let text = r#"digraph fsm {
  s0 [shape=circle label="s0"]
  s1 [shape=circle label="s1"]
  s0 -> s1 [label="a / 0"]
  s0 -> s0 [label="b / 0"]
  s1 -> s0 [label="a / 0"]
}"#;
        assert_eq!(
            parse_dot(text).unwrap_err(),
            MealyError::Incomplete {
                state: "s1".to_string(),
                input: "b".to_string()
            }
        );
    }

    #[test]
    fn unreachable_states_survive_parsing_with_warning() {
        let text = r#"digraph fsm {
  __start0 [shape=none label=""]
  __start0 -> s0
  s0 [shape=circle label="s0"]
  dead [shape=circle label="dead"]
  s0 -> s0 [label="a / 0"]
  dead -> dead [label="a / 0"]
}"#;
        let m = parse_dot(text).unwrap();
        assert_eq!(m.unreachable_states(), ["dead"]);
    }
}
