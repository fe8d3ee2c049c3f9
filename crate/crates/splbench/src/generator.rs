//! Seeded synthesis of random FFSMs and FSM families over a feature model.
//!
//! Construction: a complete random base machine (repaired to be initially
//! connected), guard splitting on a fraction of (state, input) slots using
//! the model's variation points, presence conditions on a fraction of
//! non-initial states (with incoming transitions redirected to an
//! always-present fallback so products stay complete), and finally a
//! delayed-observation gadget splice when no derived product would need
//! more than one learning round on its own.
//!
//! Everything is a pure function of the [`GenSpec`]: the same spec yields
//! byte-identical serialized output.

use thiserror::Error;

use crate::feature_model::{Configuration, FeatureExpr, FeatureModel, FeatureModelError};
use crate::ffsm::{CondTransition, Ffsm, FfsmError};
use crate::learner::{learn, LearnerOptions, SimulatedTeacher};
use crate::mealy::{is_valid_symbol, MealyMachine};
use crate::rng::SplitMix64;

/// Regeneration attempts before giving up, for deterministic failures.
pub const RETRY_BUDGET: usize = 32;

/// Default cap on configuration enumeration.
pub const DEFAULT_CONFIG_LIMIT: usize = 1_000_000;

/// Parameters of one generation run.
#[derive(Debug, Clone)]
pub struct GenSpec {
    /// The variability source.
    pub feature_model: FeatureModel,
    /// The randomness source.
    pub seed: u64,
    /// Base state count (the gadget may add up to three more).
    pub n_states: usize,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Fraction of (state, input) slots that receive feature-guarded
    /// variants.
    pub variability_degree: f64,
    /// Fraction of non-initial states given a non-true presence condition.
    pub state_pc_probability: f64,
    /// Guarantee at least one derived product needs two or more rounds
    /// under the reference learner configuration.
    pub ensure_multiround: bool,
    pub config_limit: usize,
}

impl GenSpec {
    pub fn new(
        feature_model: FeatureModel,
        seed: u64,
        n_states: usize,
        inputs: Vec<String>,
        outputs: Vec<String>,
    ) -> Self {
        GenSpec {
            feature_model,
            seed,
            n_states,
            inputs,
            outputs,
            variability_degree: 0.5,
            state_pc_probability: 0.25,
            ensure_multiround: true,
            config_limit: DEFAULT_CONFIG_LIMIT,
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        let invalid = |message: &str| Err(GenError::InvalidSpec(message.to_string()));
        if self.n_states == 0 {
            return invalid("n_states must be at least 1");
        }
        if self.inputs.is_empty() {
            return invalid("input alphabet must be non-empty");
        }
        if self.outputs.is_empty() {
            return invalid("output alphabet must be non-empty");
        }
        if self.ensure_multiround && self.outputs.len() < 2 {
            return invalid("ensure_multiround needs at least two output symbols");
        }
        if !(0.0..=1.0).contains(&self.variability_degree) {
            return invalid("variability_degree must be within [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.state_pc_probability) {
            return invalid("state_pc_probability must be within [0, 1]");
        }
        for symbol in self.inputs.iter().chain(self.outputs.iter()) {
            if !is_valid_symbol(symbol) {
                return invalid(&format!("invalid symbol `{symbol}`"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("feature model has no valid configuration")]
    NoValidConfiguration,
    #[error("gave up after {attempts} attempts; last failure: {last_failure}")]
    RetryBudgetExhausted {
        attempts: usize,
        last_failure: String,
    },
    #[error(transparent)]
    FeatureModel(#[from] FeatureModelError),
    #[error(transparent)]
    Ffsm(#[from] FfsmError),
}

/// A guard family usable for exclusive, exhaustive transition splitting.
#[derive(Debug, Clone)]
enum VarPoint {
    /// `{f, !f}`: optional features and or-group members.
    Optional(String),
    /// One guard per member; only for groups whose parent chain is
    /// mandatory up to the root, so exactly one member holds everywhere.
    AltGroup(Vec<String>),
}

impl VarPoint {
    fn guards(&self) -> Vec<FeatureExpr> {
        match self {
            VarPoint::Optional(name) => vec![
                FeatureExpr::var(name.clone()),
                FeatureExpr::not(FeatureExpr::var(name.clone())),
            ],
            VarPoint::AltGroup(members) => members
                .iter()
                .map(|m| FeatureExpr::var(m.clone()))
                .collect(),
        }
    }
}

fn variation_points(model: &FeatureModel) -> Vec<VarPoint> {
    use crate::feature_model::ChildKind;
    let mut points = Vec::new();
    let mut seen_alt_parents = Vec::new();
    let always_present = |mut idx: usize| -> bool {
        while let Some(parent) = model.features()[idx].parent {
            if model.features()[idx].kind != ChildKind::Mandatory {
                return false;
            }
            idx = parent;
        }
        true
    };
    for (idx, feature) in model.features().iter().enumerate() {
        match feature.kind {
            ChildKind::Optional | ChildKind::OrMember => {
                points.push(VarPoint::Optional(feature.name.clone()));
            }
            ChildKind::AltMember => {
                let parent = feature.parent.expect("group members have a parent");
                if seen_alt_parents.contains(&parent) {
                    continue;
                }
                seen_alt_parents.push(parent);
                if !always_present(parent) {
                    continue;
                }
                let members: Vec<String> = model
                    .children(parent)
                    .filter(|&c| model.features()[c].kind == ChildKind::AltMember)
                    .map(|c| model.features()[c].name.clone())
                    .collect();
                points.push(VarPoint::AltGroup(members));
            }
            ChildKind::Mandatory => {}
        }
        let _ = idx;
    }
    points
}

fn satisfiable(model: &FeatureModel, expr: &FeatureExpr, configs: &[Configuration]) -> bool {
    configs
        .iter()
        .any(|c| model.eval_expr(expr, c).unwrap_or(false))
}

/// Generates an FFSM as a deterministic function of the [`GenSpec`].
pub fn generate_ffsm(spec: &GenSpec) -> Result<Ffsm, GenError> {
    spec.validate()?;
    let configs = spec
        .feature_model
        .enumerate_configurations(spec.config_limit)?;
    if configs.is_empty() {
        return Err(GenError::NoValidConfiguration);
    }
    let points = variation_points(&spec.feature_model);
    let mut last_failure = String::new();
    for attempt in 0..RETRY_BUDGET {
        let mut rng = SplitMix64::stream(spec.seed, attempt as u64);
        let Some(ffsm) = build_candidate(spec, &points, &configs, &mut rng) else {
            last_failure = "connectivity repair did not converge".to_string();
            continue;
        };
        let report = ffsm.validate(spec.config_limit)?;
        if !report.pass {
            last_failure = summarize_failures(&report);
            continue;
        }
        if !concise_enough(&ffsm, spec, &configs)? {
            last_failure = "products minimized below the family size".to_string();
            continue;
        }
        if !spec.ensure_multiround || !multiround_products(&ffsm, &configs).is_empty() {
            return Ok(ffsm);
        }
        // Every product converges in one round: splice the gadget.
        let spliced = splice_gadget(&ffsm, spec, &points, &configs, &mut rng);
        let report = spliced.validate(spec.config_limit)?;
        if !report.pass {
            last_failure = summarize_failures(&report);
            continue;
        }
        if multiround_products(&spliced, &configs).is_empty() {
            last_failure = "delayed-observation gadget did not force a second round".to_string();
            continue;
        }
        if !concise_enough(&spliced, spec, &configs)? {
            last_failure = "products minimized below the family size".to_string();
            continue;
        }
        return Ok(spliced);
    }
    Err(GenError::RetryBudgetExhausted {
        attempts: RETRY_BUDGET,
        last_failure,
    })
}

/// Generates the family: the FFSM projected onto every valid
/// configuration, in enumeration order.
pub fn generate_family(
    spec: &GenSpec,
) -> Result<Vec<(Configuration, MealyMachine)>, GenError> {
    let ffsm = generate_ffsm(spec)?;
    let configs = spec
        .feature_model
        .enumerate_configurations(spec.config_limit)?;
    let mut family = Vec::with_capacity(configs.len());
    for config in configs {
        let product = ffsm.derive_product(&config)?;
        family.push((config, product));
    }
    Ok(family)
}

/// Indices of derived products that need two or more rounds under the
/// reference learner configuration (perfect oracle, S = {empty}, E = I).
pub fn multiround_products(ffsm: &Ffsm, configs: &[Configuration]) -> Vec<usize> {
    let opts = LearnerOptions::default();
    let mut multi = Vec::new();
    for (idx, config) in configs.iter().enumerate() {
        let Ok(machine) = ffsm.derive_product(config) else {
            continue;
        };
        let mut teacher = SimulatedTeacher::new(machine);
        if let Ok((_, metrics)) = learn(&mut teacher, &opts) {
            if metrics.rounds >= 2 {
                multi.push(idx);
            }
        }
    }
    multi
}

/// Conciseness headroom: with two or more valid configurations and
/// variability below 1, the conditional state count must stay strictly
/// below the summed minimized product sizes. Candidates whose products
/// collapse too far under projection are rejected and regenerated.
fn concise_enough(
    ffsm: &Ffsm,
    spec: &GenSpec,
    configs: &[Configuration],
) -> Result<bool, GenError> {
    if configs.len() < 2 || spec.variability_degree >= 1.0 {
        return Ok(true);
    }
    let mut sum = 0usize;
    for config in configs {
        sum += ffsm.derive_product(config)?.minimize().state_count();
    }
    Ok(ffsm.size().0 < sum)
}

fn summarize_failures(report: &crate::ffsm::ValidationReport) -> String {
    for findings in &report.per_config {
        if let Some(error) = &findings.error {
            return error.clone();
        }
        if let Some((state, input)) = findings.conflicting.first() {
            return format!(
                "nondeterministic at ({state}, {input}) in {{{}}}",
                findings.configuration
            );
        }
        if let Some((state, input)) = findings.missing.first() {
            return format!(
                "incomplete at ({state}, {input}) in {{{}}}",
                findings.configuration
            );
        }
    }
    "unknown validation failure".to_string()
}

fn build_candidate(
    spec: &GenSpec,
    points: &[VarPoint],
    configs: &[Configuration],
    rng: &mut SplitMix64,
) -> Option<Ffsm> {
    let n = spec.n_states;
    let input_count = spec.inputs.len();
    let output_count = spec.outputs.len();

    // Complete random base machine.
    let mut base: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|_| {
            (0..input_count)
                .map(|_| (rng.below(n), rng.below(output_count)))
                .collect()
        })
        .collect();

    // Connectivity repair: rewire a uniformly chosen reachable slot toward
    // a uniformly chosen unreachable state until everything is reachable.
    let mut budget = 4 * n * input_count + 16;
    loop {
        let reachable = reachable_set(&base);
        let unreachable: Vec<usize> = (0..n).filter(|&s| !reachable[s]).collect();
        if unreachable.is_empty() {
            break;
        }
        if budget == 0 {
            return None;
        }
        budget -= 1;
        let slots: Vec<(usize, usize)> = (0..n)
            .filter(|&s| reachable[s])
            .flat_map(|s| (0..input_count).map(move |a| (s, a)))
            .collect();
        let (s, a) = slots[rng.below(slots.len())];
        let target = unreachable[rng.below(unreachable.len())];
        base[s][a].0 = target;
    }

    // Guard splitting on a deterministic sample of slots.
    type Variants = Vec<(FeatureExpr, usize, usize)>;
    let mut split: Vec<Vec<Option<Variants>>> = vec![vec![None; input_count]; n];
    if !points.is_empty() && spec.variability_degree > 0.0 {
        let total = n * input_count;
        let k = (spec.variability_degree * total as f64).floor() as usize;
        let mut slots: Vec<usize> = (0..total).collect();
        rng.shuffle(&mut slots);
        let mut chosen = slots[..k].to_vec();
        chosen.sort_unstable();
        for slot in chosen {
            let (s, a) = (slot / input_count, slot % input_count);
            let point = &points[rng.below(points.len())];
            let variants = point
                .guards()
                .into_iter()
                .map(|guard| (guard, rng.below(n), rng.below(output_count)))
                .collect();
            split[s][a] = Some(variants);
        }
    }

    // Presence conditions on non-initial states.
    let mut conds: Vec<FeatureExpr> = vec![FeatureExpr::lit(true); n];
    if !points.is_empty() && spec.state_pc_probability > 0.0 {
        for cond in conds.iter_mut().skip(1) {
            if rng.chance(spec.state_pc_probability) {
                let point = &points[rng.below(points.len())];
                let options = point.guards();
                *cond = options[rng.below(options.len())].clone();
            }
        }
    }
    let always_present: Vec<usize> = (0..n).filter(|&s| conds[s].is_true()).collect();

    // Assemble conditional transitions: conjoin endpoint conditions and
    // redirect flows into conditional states through a fallback.
    let mut transitions: Vec<CondTransition> = Vec::new();
    for s in 0..n {
        for a in 0..input_count {
            let variants: Vec<(FeatureExpr, usize, usize)> = match &split[s][a] {
                Some(v) => v.clone(),
                None => {
                    let (target, output) = base[s][a];
                    vec![(FeatureExpr::lit(true), target, output)]
                }
            };
            for (guard, target, output) in variants {
                let guard = FeatureExpr::and_simplified(guard, conds[s].clone());
                if target == s || conds[target].is_true() {
                    transitions.push(CondTransition {
                        source: s,
                        input: a,
                        guard,
                        output,
                        target,
                    });
                } else {
                    let fallback = always_present[rng.below(always_present.len())];
                    transitions.push(CondTransition {
                        source: s,
                        input: a,
                        guard: FeatureExpr::and_simplified(guard.clone(), conds[target].clone()),
                        output,
                        target,
                    });
                    transitions.push(CondTransition {
                        source: s,
                        input: a,
                        guard: FeatureExpr::and_simplified(guard, conds[target].clone().negated()),
                        output,
                        target: fallback,
                    });
                }
            }
        }
    }
    transitions.retain(|t| satisfiable(&spec.feature_model, &t.guard, configs));

    let cond_states: Vec<(String, FeatureExpr)> = (0..n)
        .map(|s| (format!("s{s}"), conds[s].clone()))
        .collect();
    Ffsm::new(
        spec.feature_model.clone(),
        cond_states,
        0,
        spec.inputs.clone(),
        spec.outputs.clone(),
        transitions,
    )
    .ok()
}

fn reachable_set(table: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut reachable = vec![false; table.len()];
    let mut stack = vec![0usize];
    reachable[0] = true;
    while let Some(state) = stack.pop() {
        for &(target, _) in &table[state] {
            if !reachable[target] {
                reachable[target] = true;
                stack.push(target);
            }
        }
    }
    reachable
}

/// Splices a three-state cycle in which two states share one-step output
/// rows, entered from the initial state under a feature guard: the
/// canonical structure that defeats the initial E = I observation table.
fn splice_gadget(
    ffsm: &Ffsm,
    spec: &GenSpec,
    points: &[VarPoint],
    configs: &[Configuration],
    rng: &mut SplitMix64,
) -> Ffsm {
    let model = &spec.feature_model;
    // First variation-point guard that some valid configuration satisfies;
    // a variability-free model gets an unguarded gadget.
    let gate = points
        .iter()
        .flat_map(|p| p.guards())
        .find(|g| satisfiable(model, g, configs))
        .unwrap_or_else(|| FeatureExpr::lit(true));

    let mut cond_states = ffsm.cond_states().to_vec();
    let base = cond_states.len();
    for offset in 0..3 {
        cond_states.push((format!("s{}", base + offset), gate.clone()));
    }
    let g = [base, base + 1, base + 2];

    let input_count = ffsm.inputs().len();
    let entry_input = rng.below(input_count);
    let initial = ffsm.initial();

    let mut transitions: Vec<CondTransition> = Vec::new();
    for t in ffsm.transitions() {
        if t.source == initial && t.input == entry_input {
            transitions.push(CondTransition {
                source: t.source,
                input: t.input,
                guard: FeatureExpr::and_simplified(t.guard.clone(), gate.clone()),
                output: t.output,
                target: g[0],
            });
            transitions.push(CondTransition {
                source: t.source,
                input: t.input,
                guard: FeatureExpr::and_simplified(t.guard.clone(), gate.clone().negated()),
                output: t.output,
                target: t.target,
            });
        } else {
            transitions.push(t.clone());
        }
    }
    // The cycle runs on input 0 with outputs (0, 0, 1); every other input
    // self-loops with output 0, so states g0 and g1 agree on every single
    // input and disagree first on a length-two word.
    for (offset, &state) in g.iter().enumerate() {
        for a in 0..input_count {
            let (target, output) = if a == 0 {
                (g[(offset + 1) % 3], if offset == 2 { 1 } else { 0 })
            } else {
                (state, 0)
            };
            transitions.push(CondTransition {
                source: state,
                input: a,
                guard: gate.clone(),
                output,
                target,
            });
        }
    }
    transitions.retain(|t| satisfiable(model, &t.guard, configs));

    Ffsm::new(
        model.clone(),
        cond_states,
        initial,
        ffsm.inputs().to_vec(),
        ffsm.outputs().to_vec(),
        transitions,
    )
    .expect("gadget splice preserves well-formedness")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_model::parse_feature_model;
    use crate::ffsm::write_ffsm_dot;

    fn game_model() -> FeatureModel {
        parse_feature_model(
            r#"<featureModel>
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
</featureModel>"#,
        )
        .unwrap()
    }

    fn symbols(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn game_spec(seed: u64, n_states: usize) -> GenSpec {
        GenSpec::new(
            game_model(),
            seed,
            n_states,
            symbols(&["a", "b", "c"]),
            symbols(&["0", "1"]),
        )
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let spec = game_spec(42, 10);
        let first = write_ffsm_dot(&generate_ffsm(&spec).unwrap());
        let second = write_ffsm_dot(&generate_ffsm(&spec).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn zero_variability_yields_equivalent_products() {
        let mut spec = game_spec(5, 8);
        spec.variability_degree = 0.0;
        spec.state_pc_probability = 0.0;
        spec.ensure_multiround = false;
        let ffsm = generate_ffsm(&spec).unwrap();
        assert!(ffsm.transitions().iter().all(|t| t.guard.is_true()));
        let family = generate_family(&spec).unwrap();
        assert_eq!(family.len(), 4);
        for (_, machine) in &family[1..] {
            assert_eq!(family[0].1.equivalent(machine).unwrap(), None);
        }
    }

    #[test]
    fn generated_ffsm_passes_validation_and_multiround() {
        let spec = game_spec(7, 15);
        let ffsm = generate_ffsm(&spec).unwrap();
        let report = ffsm.validate(spec.config_limit).unwrap();
        assert!(report.pass);
        let configs = spec.feature_model.enumerate_configurations(16).unwrap();
        assert!(
            !multiround_products(&ffsm, &configs).is_empty(),
            "at least one product needs two or more rounds"
        );
    }

    #[test]
    fn family_machines_respect_the_state_bound() {
        let spec = game_spec(9, 12);
        let family = generate_family(&spec).unwrap();
        assert_eq!(family.len(), 4);
        for (_, machine) in &family {
            assert!(machine.state_count() <= spec.n_states + 3);
        }
    }

    #[test]
    fn single_feature_model_yields_the_base_machine() {
        let fm = parse_feature_model(
            "<featureModel><struct><feature name=\"A\"/></struct></featureModel>",
        )
        .unwrap();
        let mut spec = GenSpec::new(fm, 3, 6, symbols(&["a", "b"]), symbols(&["0", "1"]));
        spec.ensure_multiround = false;
        let family = generate_family(&spec).unwrap();
        assert_eq!(family.len(), 1);
        // No variation points: all guards stay true.
        let ffsm = generate_ffsm(&spec).unwrap();
        assert!(ffsm.transitions().iter().all(|t| t.guard.is_true()));
    }

    #[test]
    fn multiround_holds_across_seeds() {
        for seed in 0..10 {
            let spec = game_spec(seed, 8);
            let ffsm = generate_ffsm(&spec).unwrap();
            let configs = spec.feature_model.enumerate_configurations(16).unwrap();
            assert!(
                !multiround_products(&ffsm, &configs).is_empty(),
                "seed {seed} produced a family learnable in one round everywhere"
            );
        }
    }

    #[test]
    fn distinct_seeds_disagree_somewhere() {
        let families: Vec<_> = (0..10)
            .map(|seed| generate_family(&game_spec(seed, 8)).unwrap())
            .collect();
        let mut distinct_pairs = 0;
        let mut total_pairs = 0;
        for i in 0..families.len() {
            for j in i + 1..families.len() {
                total_pairs += 1;
                let differs = families[i]
                    .iter()
                    .zip(families[j].iter())
                    .any(|((_, a), (_, b))| a.equivalent(b).unwrap().is_some());
                if differs {
                    distinct_pairs += 1;
                }
            }
        }
        assert!(
            distinct_pairs * 100 >= total_pairs * 95,
            "only {distinct_pairs}/{total_pairs} seed pairs were behaviorally distinct"
        );
    }

    #[test]
    fn conciseness_headroom_over_the_family() {
        for seed in [1, 2, 3] {
            let mut spec = game_spec(seed, 10);
            spec.variability_degree = 0.4;
            let ffsm = generate_ffsm(&spec).unwrap();
            let family = generate_family(&spec).unwrap();
            let sum: usize = family
                .iter()
                .map(|(_, m)| m.minimize().state_count())
                .sum();
            let (cond_states, _) = ffsm.size();
            assert!(
                cond_states < sum,
                "seed {seed}: |C| = {cond_states} not below sum {sum}"
            );
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = GenSpec::new(game_model(), 0, 0, symbols(&["a"]), symbols(&["0", "1"]));
        assert!(matches!(generate_ffsm(&spec), Err(GenError::InvalidSpec(_))));
        let mut spec = game_spec(1, 4);
        spec.outputs = symbols(&["only"]);
        assert!(matches!(generate_ffsm(&spec), Err(GenError::InvalidSpec(_))));
        let mut spec = game_spec(1, 4);
        spec.variability_degree = 1.5;
        assert!(matches!(generate_ffsm(&spec), Err(GenError::InvalidSpec(_))));
    }
}
