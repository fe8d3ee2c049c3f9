//! Featured finite state machines: conditional states and transitions over
//! a feature model, validated by enumeration and projected onto product
//! Mealy machines by the derivation operator.

mod dot;

use thiserror::Error;

use crate::feature_model::{
    Configuration, ExprError, FeatureExpr, FeatureModel, FeatureModelError,
};
use crate::mealy::{is_valid_symbol, MealyError, MealyMachine};

pub use dot::{parse_ffsm_dot, write_ffsm_dot};

/// A conditional transition `(source, input [guard] / output, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondTransition {
    pub source: usize,
    pub input: usize,
    pub guard: FeatureExpr,
    pub output: usize,
    pub target: usize,
}

/// A featured finite state machine. The feature model supplies the feature
/// set and the valid-configuration space; states and transitions carry
/// presence conditions over it. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Ffsm {
    feature_model: FeatureModel,
    cond_states: Vec<(String, FeatureExpr)>,
    initial: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
    transitions: Vec<CondTransition>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FfsmError {
    #[error("invalid configuration {{{config}}}: {reason}")]
    InvalidConfiguration { config: String, reason: String },
    #[error("product for {{{config}}} is incomplete: state `{state}` has no transition on `{input}`")]
    Incomplete {
        config: String,
        state: String,
        input: String,
    },
    #[error("product for {{{config}}} is nondeterministic at state `{state}` on `{input}`")]
    Nondeterministic {
        config: String,
        state: String,
        input: String,
    },
    #[error("initial conditional state must have condition `true`")]
    InitialConditionNotTrue,
    #[error("unknown feature `{name}` in {place}")]
    UnknownFeature { name: String, place: String },
    #[error("duplicate conditional state `{0}`")]
    DuplicateState(String),
    #[error("invalid symbol `{0}`")]
    InvalidSymbol(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Dot(#[from] MealyError),
    #[error("guard syntax: {0}")]
    Guard(#[from] ExprError),
    #[error(transparent)]
    FeatureModel(#[from] FeatureModelError),
}

/// Per-configuration findings from exhaustive validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFindings {
    pub configuration: Configuration,
    /// Reachable `(state, input)` slots with no enabled transition.
    pub missing: Vec<(String, String)>,
    /// Reachable `(state, input)` slots with more than one enabled
    /// transition, or an enabled transition into an excluded state.
    pub conflicting: Vec<(String, String)>,
    /// Present states never reached from the initial state. Warnings: they
    /// are cut by derivation and do not fail validation.
    pub unreachable: Vec<String>,
    /// Set when the configuration could not be processed at all.
    pub error: Option<String>,
}

impl ConfigFindings {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.conflicting.is_empty() && self.error.is_none()
    }
}

/// Result of validating an FFSM against every valid configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub per_config: Vec<ConfigFindings>,
    pub pass: bool,
}

struct Projection {
    machine: Option<MealyMachine>,
    missing: Vec<(String, String)>,
    conflicting: Vec<(String, String)>,
    unreachable: Vec<String>,
}

impl Ffsm {
    pub fn new(
        feature_model: FeatureModel,
        cond_states: Vec<(String, FeatureExpr)>,
        initial: usize,
        inputs: Vec<String>,
        outputs: Vec<String>,
        transitions: Vec<CondTransition>,
    ) -> Result<Self, FfsmError> {
        if cond_states.is_empty() {
            return Err(FfsmError::Shape("FFSM has no states".to_string()));
        }
        if initial >= cond_states.len() {
            return Err(FfsmError::Shape("initial state out of range".to_string()));
        }
        if !cond_states[initial].1.is_true() {
            return Err(FfsmError::InitialConditionNotTrue);
        }
        for (idx, (name, cond)) in cond_states.iter().enumerate() {
            if !is_valid_symbol(name) {
                return Err(FfsmError::InvalidSymbol(name.clone()));
            }
            if cond_states[..idx].iter().any(|(n, _)| n == name) {
                return Err(FfsmError::DuplicateState(name.clone()));
            }
            check_features(cond, &feature_model, &format!("condition of state `{name}`"))?;
        }
        for symbol in inputs.iter().chain(outputs.iter()) {
            if !is_valid_symbol(symbol) {
                return Err(FfsmError::InvalidSymbol(symbol.clone()));
            }
        }
        for t in &transitions {
            if t.source >= cond_states.len() || t.target >= cond_states.len() {
                return Err(FfsmError::Shape("transition endpoint out of range".to_string()));
            }
            if t.input >= inputs.len() || t.output >= outputs.len() {
                return Err(FfsmError::Shape("transition symbol out of range".to_string()));
            }
            check_features(
                &t.guard,
                &feature_model,
                &format!("guard on `{}`", cond_states[t.source].0),
            )?;
        }
        Ok(Ffsm {
            feature_model,
            cond_states,
            initial,
            inputs,
            outputs,
            transitions,
        })
    }

    pub fn feature_model(&self) -> &FeatureModel {
        &self.feature_model
    }

    pub fn cond_states(&self) -> &[(String, FeatureExpr)] {
        &self.cond_states
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

    pub fn transitions(&self) -> &[CondTransition] {
        &self.transitions
    }

    /// `(|C|, |Gamma|)`: conditional state and transition counts.
    pub fn size(&self) -> (usize, usize) {
        (self.cond_states.len(), self.transitions.len())
    }

    fn eval(&self, expr: &FeatureExpr, config: &Configuration) -> bool {
        // Feature names are checked at construction time.
        self.feature_model
            .eval_expr(expr, config)
            .expect("expression features were validated at construction")
    }

    fn project(&self, config: &Configuration) -> Result<Projection, FfsmError> {
        if !self.feature_model.validate_configuration(config) {
            let reasons: Vec<String> = self
                .feature_model
                .validate_configuration_diagnostics(config)
                .iter()
                .map(|v| v.to_string())
                .collect();
            return Err(FfsmError::InvalidConfiguration {
                config: config.to_string(),
                reason: reasons.join("; "),
            });
        }
        let present: Vec<bool> = self
            .cond_states
            .iter()
            .map(|(_, cond)| self.eval(cond, config))
            .collect();

        // Enabled transitions per (state, input) slot.
        let mut cells: Vec<Vec<Vec<(usize, usize)>>> =
            vec![vec![Vec::new(); self.inputs.len()]; self.cond_states.len()];
        for t in &self.transitions {
            if present[t.source] && self.eval(&t.guard, config) {
                cells[t.source][t.input].push((t.target, t.output));
            }
        }

        // Breadth-first walk over present states, recording defects as they
        // are encountered; unreachable present states are cut.
        let mut missing = Vec::new();
        let mut conflicting = Vec::new();
        let mut visited = vec![false; self.cond_states.len()];
        let mut order = vec![self.initial];
        visited[self.initial] = true;
        let mut cursor = 0;
        while cursor < order.len() {
            let state = order[cursor];
            cursor += 1;
            for (input, slot) in cells[state].iter().enumerate() {
                let place = || {
                    (
                        self.cond_states[state].0.clone(),
                        self.inputs[input].clone(),
                    )
                };
                match slot.as_slice() {
                    [] => missing.push(place()),
                    [(target, _)] => {
                        if !present[*target] {
                            conflicting.push(place());
                        } else if !visited[*target] {
                            visited[*target] = true;
                            order.push(*target);
                        }
                    }
                    _ => conflicting.push(place()),
                }
            }
        }
        let unreachable: Vec<String> = (0..self.cond_states.len())
            .filter(|&s| present[s] && !visited[s])
            .map(|s| self.cond_states[s].0.clone())
            .collect();

        let machine = if missing.is_empty() && conflicting.is_empty() {
            let rename: Vec<Option<usize>> = {
                let mut map = vec![None; self.cond_states.len()];
                for (idx, &state) in order.iter().enumerate() {
                    map[state] = Some(idx);
                }
                map
            };
            let rows: Vec<Vec<(usize, usize)>> = order
                .iter()
                .map(|&state| {
                    (0..self.inputs.len())
                        .map(|input| {
                            let (target, output) = cells[state][input][0];
                            (rename[target].expect("reached targets are visited"), output)
                        })
                        .collect()
                })
                .collect();
            let names = (0..order.len()).map(|i| format!("s{i}")).collect();
            Some(
                MealyMachine::new(names, 0, self.inputs.clone(), self.outputs.clone(), rows)
                    .expect("projection produces a valid machine"),
            )
        } else {
            None
        };

        Ok(Projection {
            machine,
            missing,
            conflicting,
            unreachable,
        })
    }

    /// Projects the FFSM onto the product for a valid configuration:
    /// condition-true states and guard-true transitions, restricted to the
    /// reachable part, with canonical `s0..sk` breadth-first names.
    pub fn derive_product(&self, config: &Configuration) -> Result<MealyMachine, FfsmError> {
        let projection = self.project(config)?;
        if let Some((state, input)) = projection.conflicting.first() {
            return Err(FfsmError::Nondeterministic {
                config: config.to_string(),
                state: state.clone(),
                input: input.clone(),
            });
        }
        if let Some((state, input)) = projection.missing.first() {
            return Err(FfsmError::Incomplete {
                config: config.to_string(),
                state: state.clone(),
                input: input.clone(),
            });
        }
        Ok(projection.machine.expect("no defects recorded"))
    }

    /// Derives every configuration within `limit` and collects findings
    /// instead of aborting. Passes iff every product is deterministic and
    /// complete on its reachable part; unreachable present states are
    /// reported as warnings only.
    pub fn validate(&self, limit: usize) -> Result<ValidationReport, FfsmError> {
        let configs = self.feature_model.enumerate_configurations(limit)?;
        let mut per_config = Vec::with_capacity(configs.len());
        for config in configs {
            let findings = match self.project(&config) {
                Ok(projection) => ConfigFindings {
                    configuration: config,
                    missing: projection.missing,
                    conflicting: projection.conflicting,
                    unreachable: projection.unreachable,
                    error: None,
                },
                Err(error) => ConfigFindings {
                    configuration: config,
                    missing: Vec::new(),
                    conflicting: Vec::new(),
                    unreachable: Vec::new(),
                    error: Some(error.to_string()),
                },
            };
            per_config.push(findings);
        }
        let pass = per_config.iter().all(ConfigFindings::is_clean);
        Ok(ValidationReport { per_config, pass })
    }
}

fn check_features(
    expr: &FeatureExpr,
    model: &FeatureModel,
    place: &str,
) -> Result<(), FfsmError> {
    for name in expr.feature_names() {
        if !model.contains_feature(name) {
            return Err(FfsmError::UnknownFeature {
                name: name.to_string(),
                place: place.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::feature_model::{parse_constraint, parse_feature_model};

    pub const GAME_XML: &str = r#"<featureModel>
  <struct>
    <and name="Game">
      <and mandatory="true" name="Services">
        <feature mandatory="true" name="Start"/>
        <feature mandatory="true" name="Pause"/>
        <alt mandatory="true" name="Game_Type">
          <feature name="Ping_Pong"/>
          <feature name="Brick_Game"/>
        </alt>
      </and>
      <feature name="Save"/>
    </and>
  </struct>
</featureModel>"#;

    pub fn game_feature_model() -> FeatureModel {
        parse_feature_model(GAME_XML).unwrap()
    }

    pub const GAME_STATES: [(&str, &str); 9] = [
        ("m0", "true"),
        ("g", "true"),
        ("p0", "Ping_Pong"),
        ("p1", "Ping_Pong"),
        ("k0", "Brick_Game"),
        ("k1", "Brick_Game"),
        ("v0", "Save"),
        ("v1", "Save"),
        ("v2", "Save"),
    ];
    pub const GAME_INPUTS: [&str; 2] = ["play", "save"];
    pub const GAME_OUTPUTS: [&str; 4] = ["ok", "won", "saved", "err"];
    pub const GAME_EDGES: [(&str, &str, &str, &str, &str); 20] = [
        ("m0", "play", "true", "ok", "g"),
        ("m0", "save", "true", "err", "m0"),
        ("g", "play", "Ping_Pong", "ok", "p0"),
        ("g", "play", "Brick_Game", "ok", "k0"),
        ("g", "save", "Save", "ok", "v0"),
        ("g", "save", "!Save", "err", "m0"),
        ("p0", "play", "Ping_Pong", "ok", "p1"),
        ("p0", "save", "Ping_Pong", "err", "p0"),
        ("p1", "play", "Ping_Pong", "won", "g"),
        ("p1", "save", "Ping_Pong", "err", "p1"),
        ("k0", "play", "Brick_Game", "ok", "k1"),
        ("k0", "save", "Brick_Game", "err", "k0"),
        ("k1", "play", "Brick_Game", "won", "g"),
        ("k1", "save", "Brick_Game", "err", "k1"),
        ("v0", "play", "Save", "ok", "v1"),
        ("v0", "save", "Save", "err", "v0"),
        ("v1", "play", "Save", "ok", "v2"),
        ("v1", "save", "Save", "err", "v1"),
        ("v2", "play", "Save", "saved", "g"),
        ("v2", "save", "Save", "err", "v2"),
    ];

    /// The bundled computer-game FFSM: a menu/hub skeleton shared by all
    /// products, ping-pong and brick-game regions gated by the alternative
    /// group, and a three-state save sequence (two of whose states share
    /// one-step output rows) gated by the optional Save feature.
    pub fn game_ffsm() -> Ffsm {
        build_ffsm(
            game_feature_model(),
            &GAME_STATES,
            &GAME_INPUTS,
            &GAME_OUTPUTS,
            &GAME_EDGES,
        )
    }

    pub fn build_ffsm(
        fm: FeatureModel,
        states: &[(&str, &str)],
        inputs: &[&str],
        outputs: &[&str],
        edges: &[(&str, &str, &str, &str, &str)],
    ) -> Ffsm {
        let state_idx = |name: &str| states.iter().position(|(n, _)| *n == name).unwrap();
        let input_idx = |sym: &str| inputs.iter().position(|s| *s == sym).unwrap();
        let output_idx = |sym: &str| outputs.iter().position(|s| *s == sym).unwrap();
        let cond_states = states
            .iter()
            .map(|(name, cond)| (name.to_string(), parse_constraint(cond).unwrap()))
            .collect();
        let transitions = edges
            .iter()
            .map(|(src, input, guard, output, dst)| CondTransition {
                source: state_idx(src),
                input: input_idx(input),
                guard: parse_constraint(guard).unwrap(),
                output: output_idx(output),
                target: state_idx(dst),
            })
            .collect();
        Ffsm::new(
            fm,
            cond_states,
            0,
            inputs.iter().map(|s| s.to_string()).collect(),
            outputs.iter().map(|s| s.to_string()).collect(),
            transitions,
        )
        .unwrap()
    }
}
