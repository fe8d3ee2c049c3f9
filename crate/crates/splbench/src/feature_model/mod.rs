//! Feature models: FeatureIDE XML parsing, constraint evaluation, and
//! configuration validation/enumeration.

mod expr;
mod xml;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use expr::{is_valid_feature_name, parse_constraint, ExprError, FeatureExpr};
pub use xml::{parse_feature_model, write_feature_model_xml};

/// How a non-root feature relates to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildKind {
    Mandatory,
    Optional,
    /// Member of an exactly-one group; the group id is the parent index.
    AltMember,
    /// Member of an at-least-one group; the group id is the parent index.
    OrMember,
}

/// One feature in the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    /// `None` for the root.
    pub parent: Option<usize>,
    pub kind: ChildKind,
    /// FeatureIDE `abstract` attribute; kept for re-serialization, has no
    /// effect on configuration semantics.
    pub is_abstract: bool,
}

/// A feature tree plus cross-tree constraints. Immutable once built; all
/// operations are pure, so models can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    features: Vec<Feature>,
    root: usize,
    constraints: Vec<FeatureExpr>,
}

/// A set of selected feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Configuration {
    selected: BTreeSet<String>,
}

impl Configuration {
    pub fn new<I, S>(features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Configuration {
            selected: features.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.selected.contains(name)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Selected names in lexicographic order (model-independent).
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.selected.iter().map(String::as_str)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for name in &self.selected {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{name}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureModelError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("unknown element `{element}` at {path}")]
    UnknownElement { element: String, path: String },
    #[error("duplicate feature name `{name}` at {path}")]
    DuplicateFeature { name: String, path: String },
    #[error("invalid feature name `{name}` at {path}")]
    InvalidFeatureName { name: String, path: String },
    #[error("unknown feature `{name}` referenced by constraint at {path}")]
    UnknownConstraintFeature { name: String, path: String },
    #[error("missing required element or attribute at {path}: {message}")]
    Structure { path: String, message: String },
    #[error("configuration space exceeds limit {limit}")]
    ConfigSpaceExceedsLimit { limit: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// One violated validity clause, for the diagnostic variant of
/// configuration checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigViolation {
    UnknownFeature { name: String },
    RootNotSelected { root: String },
    ParentNotSelected { child: String, parent: String },
    MandatoryChildMissing { parent: String, child: String },
    AltGroupNotExactlyOne { parent: String, selected: usize },
    OrGroupEmpty { parent: String },
    ConstraintViolated { index: usize, constraint: String },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::UnknownFeature { name } => {
                write!(f, "unknown feature `{name}`")
            }
            ConfigViolation::RootNotSelected { root } => {
                write!(f, "root feature `{root}` is not selected")
            }
            ConfigViolation::ParentNotSelected { child, parent } => {
                write!(f, "feature `{child}` is selected but its parent `{parent}` is not")
            }
            ConfigViolation::MandatoryChildMissing { parent, child } => {
                write!(f, "mandatory child `{child}` of selected `{parent}` is missing")
            }
            ConfigViolation::AltGroupNotExactlyOne { parent, selected } => {
                write!(
                    f,
                    "alternative group under `{parent}` needs exactly one member, found {selected}"
                )
            }
            ConfigViolation::OrGroupEmpty { parent } => {
                write!(f, "or group under `{parent}` needs at least one member")
            }
            ConfigViolation::ConstraintViolated { index, constraint } => {
                write!(f, "cross-tree constraint #{index} `{constraint}` is violated")
            }
        }
    }
}

impl FeatureModel {
    /// Builds a model from parts, checking the tree invariants.
    pub fn new(
        features: Vec<Feature>,
        root: usize,
        constraints: Vec<FeatureExpr>,
    ) -> Result<Self, FeatureModelError> {
        let model = FeatureModel {
            features,
            root,
            constraints,
        };
        model.check_invariants()?;
        Ok(model)
    }

    fn check_invariants(&self) -> Result<(), FeatureModelError> {
        let structure = |message: &str| FeatureModelError::Structure {
            path: "featureModel".to_string(),
            message: message.to_string(),
        };
        if self.features.is_empty() {
            return Err(structure("model has no features"));
        }
        if self.root >= self.features.len() || self.features[self.root].parent.is_some() {
            return Err(structure("root must exist and have no parent"));
        }
        let mut seen = BTreeSet::new();
        for (idx, feature) in self.features.iter().enumerate() {
            if !is_valid_feature_name(&feature.name) {
                return Err(FeatureModelError::InvalidFeatureName {
                    name: feature.name.clone(),
                    path: "struct".to_string(),
                });
            }
            if !seen.insert(feature.name.as_str()) {
                return Err(FeatureModelError::DuplicateFeature {
                    name: feature.name.clone(),
                    path: "struct".to_string(),
                });
            }
            if idx != self.root && feature.parent.is_none() {
                return Err(structure("non-root feature without a parent"));
            }
            if let Some(parent) = feature.parent {
                if parent >= self.features.len() {
                    return Err(structure("parent index out of range"));
                }
            }
        }
        // Acyclic and connected: walking parents from every feature must
        // reach the root without revisiting a node.
        for start in 0..self.features.len() {
            let mut hops = 0;
            let mut cursor = start;
            while let Some(parent) = self.features[cursor].parent {
                cursor = parent;
                hops += 1;
                if hops > self.features.len() {
                    return Err(structure("feature tree contains a cycle"));
                }
            }
            if cursor != self.root {
                return Err(structure("feature tree is not connected to the root"));
            }
        }
        for constraint in &self.constraints {
            for name in constraint.feature_names() {
                if self.feature_index(name).is_none() {
                    return Err(FeatureModelError::UnknownConstraintFeature {
                        name: name.to_string(),
                        path: "constraints".to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn root(&self) -> &Feature {
        &self.features[self.root]
    }

    pub fn constraints(&self) -> &[FeatureExpr] {
        &self.constraints
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn contains_feature(&self, name: &str) -> bool {
        self.feature_index(name).is_some()
    }

    /// Children of a feature, in declaration order.
    pub fn children(&self, parent: usize) -> impl Iterator<Item = usize> + '_ {
        self.features
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.parent == Some(parent))
            .map(|(idx, _)| idx)
    }

    /// Evaluates a constraint expression under a configuration, erroring on
    /// names outside this model's feature set.
    pub fn eval_expr(
        &self,
        expr: &FeatureExpr,
        config: &Configuration,
    ) -> Result<bool, ExprError> {
        expr.eval_with(&|name| config.contains(name), &|name| {
            self.contains_feature(name)
        })
    }

    /// Lists every violated validity clause; empty means valid.
    pub fn validate_configuration_diagnostics(&self, config: &Configuration) -> Vec<ConfigViolation> {
        let mut violations = Vec::new();
        for name in config.names() {
            if !self.contains_feature(name) {
                violations.push(ConfigViolation::UnknownFeature {
                    name: name.to_string(),
                });
            }
        }
        let selected = |idx: usize| config.contains(&self.features[idx].name);
        if !selected(self.root) {
            violations.push(ConfigViolation::RootNotSelected {
                root: self.features[self.root].name.clone(),
            });
        }
        for (idx, feature) in self.features.iter().enumerate() {
            let Some(parent) = feature.parent else { continue };
            if selected(idx) && !selected(parent) {
                violations.push(ConfigViolation::ParentNotSelected {
                    child: feature.name.clone(),
                    parent: self.features[parent].name.clone(),
                });
            }
            if feature.kind == ChildKind::Mandatory && selected(parent) && !selected(idx) {
                violations.push(ConfigViolation::MandatoryChildMissing {
                    parent: self.features[parent].name.clone(),
                    child: feature.name.clone(),
                });
            }
        }
        // Group clauses, one per alt/or parent.
        for (parent_idx, _) in self.features.iter().enumerate() {
            if !selected(parent_idx) {
                continue;
            }
            let mut alt_members = 0usize;
            let mut alt_selected = 0usize;
            let mut or_members = 0usize;
            let mut or_selected = 0usize;
            for child in self.children(parent_idx) {
                match self.features[child].kind {
                    ChildKind::AltMember => {
                        alt_members += 1;
                        if selected(child) {
                            alt_selected += 1;
                        }
                    }
                    ChildKind::OrMember => {
                        or_members += 1;
                        if selected(child) {
                            or_selected += 1;
                        }
                    }
                    _ => {}
                }
            }
            if alt_members > 0 && alt_selected != 1 {
                violations.push(ConfigViolation::AltGroupNotExactlyOne {
                    parent: self.features[parent_idx].name.clone(),
                    selected: alt_selected,
                });
            }
            if or_members > 0 && or_selected == 0 {
                violations.push(ConfigViolation::OrGroupEmpty {
                    parent: self.features[parent_idx].name.clone(),
                });
            }
        }
        for (index, constraint) in self.constraints.iter().enumerate() {
            // Constraint names are checked at model construction, so eval
            // cannot fail here.
            if !self.eval_expr(constraint, config).unwrap_or(false) {
                violations.push(ConfigViolation::ConstraintViolated {
                    index,
                    constraint: constraint.to_string(),
                });
            }
        }
        violations
    }

    /// True iff the configuration is a valid product of this model.
    pub fn validate_configuration(&self, config: &Configuration) -> bool {
        self.validate_configuration_diagnostics(config).is_empty()
    }

    /// All valid configurations in lexicographic bitvector order over the
    /// feature declaration order (unselected before selected). Errors once
    /// more than `limit` valid configurations exist.
    pub fn enumerate_configurations(
        &self,
        limit: usize,
    ) -> Result<Vec<Configuration>, FeatureModelError> {
        assert!(limit > 0, "enumeration limit must be positive");
        let mut out = Vec::new();
        let mut assignment = vec![false; self.features.len()];
        self.enumerate_rec(0, &mut assignment, limit, &mut out)?;
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        depth: usize,
        assignment: &mut Vec<bool>,
        limit: usize,
        out: &mut Vec<Configuration>,
    ) -> Result<(), FeatureModelError> {
        if depth == self.features.len() {
            let config = Configuration::new(
                self.features
                    .iter()
                    .zip(assignment.iter())
                    .filter(|(_, &sel)| sel)
                    .map(|(f, _)| f.name.clone()),
            );
            if self.validate_configuration(&config) {
                if out.len() == limit {
                    return Err(FeatureModelError::ConfigSpaceExceedsLimit { limit });
                }
                out.push(config);
            }
            return Ok(());
        }
        for value in [false, true] {
            assignment[depth] = value;
            if self.prefix_viable(depth, assignment) {
                self.enumerate_rec(depth + 1, assignment, limit, out)?;
            }
        }
        assignment[depth] = false;
        Ok(())
    }

    /// Monotone pruning for the enumeration walk: clauses that are already
    /// decided by the assignment of features `0..=depth` and can never be
    /// repaired by later choices.
    fn prefix_viable(&self, depth: usize, assignment: &[bool]) -> bool {
        if depth == self.root && !assignment[depth] {
            return false;
        }
        let feature = &self.features[depth];
        if let Some(parent) = feature.parent {
            if parent < depth {
                // Parent closure: selected child under unselected parent.
                if assignment[depth] && !assignment[parent] {
                    return false;
                }
                // Mandatory child of a selected parent must be selected.
                if feature.kind == ChildKind::Mandatory && assignment[parent] && !assignment[depth]
                {
                    return false;
                }
                // At most one alternative sibling.
                if feature.kind == ChildKind::AltMember && assignment[depth] {
                    for sibling in self.children(parent) {
                        if sibling < depth
                            && assignment[sibling]
                            && self.features[sibling].kind == ChildKind::AltMember
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The computer-game product line used throughout the docs and assets.
    pub(crate) fn game_model() -> FeatureModel {
        let f = |name: &str, parent: Option<usize>, kind: ChildKind| Feature {
            name: name.to_string(),
            parent,
            kind,
            is_abstract: false,
        };
        FeatureModel::new(
            vec![
                f("Game", None, ChildKind::Mandatory),
                f("Services", Some(0), ChildKind::Mandatory),
                f("Start", Some(1), ChildKind::Mandatory),
                f("Pause", Some(1), ChildKind::Mandatory),
                f("Game_Type", Some(1), ChildKind::Mandatory),
                f("Ping_Pong", Some(4), ChildKind::AltMember),
                f("Brick_Game", Some(4), ChildKind::AltMember),
                f("Save", Some(0), ChildKind::Optional),
            ],
            0,
            Vec::new(),
        )
        .unwrap()
    }

    fn mandatory_base() -> Vec<&'static str> {
        vec!["Game", "Services", "Start", "Pause", "Game_Type"]
    }

    fn config(extra: &[&str]) -> Configuration {
        Configuration::new(mandatory_base().into_iter().chain(extra.iter().copied()))
    }

    /// Independent oracle: brute-force all 2^n assignments and filter with
    /// the clause checker.
    fn brute_force_configs(model: &FeatureModel) -> Vec<Configuration> {
        let n = model.feature_count();
        assert!(n <= 20, "brute force oracle only for small models");
        let mut found = Vec::new();
        for mask in 0u32..(1 << n) {
            let config = Configuration::new(
                model
                    .features()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, f)| f.name.clone()),
            );
            if model.validate_configuration(&config) {
                found.push(config);
            }
        }
        found.sort();
        found
    }

    #[test]
    fn game_model_validates_hand_checked_config() {
        let model = game_model();
        assert!(model.validate_configuration(&config(&["Save", "Ping_Pong"])));
        assert!(model.validate_configuration(&config(&["Ping_Pong"])));
        assert!(model.validate_configuration(&config(&["Brick_Game"])));
    }

    #[test]
    fn game_model_rejects_both_alternatives() {
        let model = game_model();
        let bad = config(&["Ping_Pong", "Brick_Game"]);
        assert!(!model.validate_configuration(&bad));
        let diags = model.validate_configuration_diagnostics(&bad);
        assert!(diags
            .iter()
            .any(|d| matches!(d, ConfigViolation::AltGroupNotExactlyOne { selected: 2, .. })));
    }

    #[test]
    fn empty_config_misses_root() {
        let model = game_model();
        let diags = model.validate_configuration_diagnostics(&Configuration::default());
        assert!(diags
            .iter()
            .any(|d| matches!(d, ConfigViolation::RootNotSelected { .. })));
    }

    #[test]
    fn game_model_has_exactly_four_products() {
        let model = game_model();
        let enumerated = model.enumerate_configurations(64).unwrap();
        assert_eq!(enumerated.len(), 4);
        // {±Save} x {Ping_Pong | Brick_Game}
        for extra in [
            vec!["Ping_Pong"],
            vec!["Brick_Game"],
            vec!["Ping_Pong", "Save"],
            vec!["Brick_Game", "Save"],
        ] {
            assert!(enumerated.contains(&config(&extra)), "missing {extra:?}");
        }
    }

    #[test]
    fn enumeration_agrees_with_brute_force_oracle() {
        let model = game_model();
        let mut enumerated = model.enumerate_configurations(1024).unwrap();
        enumerated.sort();
        assert_eq!(enumerated, brute_force_configs(&model));
    }

    #[test]
    fn enumeration_is_duplicate_free_and_bitvector_ordered() {
        let model = game_model();
        let enumerated = model.enumerate_configurations(1024).unwrap();
        let as_bits: Vec<Vec<bool>> = enumerated
            .iter()
            .map(|c| {
                model
                    .features()
                    .iter()
                    .map(|f| c.contains(&f.name))
                    .collect()
            })
            .collect();
        for pair in as_bits.windows(2) {
            assert!(pair[0] < pair[1], "not strictly increasing: {pair:?}");
        }
    }

    #[test]
    fn enumeration_respects_limit() {
        let model = game_model();
        let err = model.enumerate_configurations(3).unwrap_err();
        assert_eq!(err, FeatureModelError::ConfigSpaceExceedsLimit { limit: 3 });
    }

    #[test]
    fn two_independent_optionals_give_four_products() {
        let f = |name: &str, parent: Option<usize>, kind: ChildKind| Feature {
            name: name.to_string(),
            parent,
            kind,
            is_abstract: false,
        };
        let model = FeatureModel::new(
            vec![
                f("Root", None, ChildKind::Mandatory),
                f("A", Some(0), ChildKind::Optional),
                f("B", Some(0), ChildKind::Optional),
            ],
            0,
            Vec::new(),
        )
        .unwrap();
        let mut enumerated = model.enumerate_configurations(16).unwrap();
        assert_eq!(enumerated.len(), 4);
        enumerated.sort();
        assert_eq!(enumerated, brute_force_configs(&model));
    }

    #[test]
    fn single_feature_model_has_one_product() {
        let model = FeatureModel::new(
            vec![Feature {
                name: "A".to_string(),
                parent: None,
                kind: ChildKind::Mandatory,
                is_abstract: false,
            }],
            0,
            Vec::new(),
        )
        .unwrap();
        let enumerated = model.enumerate_configurations(4).unwrap();
        assert_eq!(enumerated, vec![Configuration::new(["A"])]);
    }

    #[test]
    fn not_save_holds_on_save_free_product() {
        let model = game_model();
        let expr = parse_constraint("!Save").unwrap();
        let no_save = config(&["Ping_Pong"]);
        assert!(model.eval_expr(&expr, &no_save).unwrap());
        let with_save = config(&["Ping_Pong", "Save"]);
        assert!(!model.eval_expr(&expr, &with_save).unwrap());
    }

    #[test]
    fn eval_unknown_feature_errors() {
        let model = game_model();
        let expr = parse_constraint("Nope").unwrap();
        assert!(model.eval_expr(&expr, &config(&["Ping_Pong"])).is_err());
    }

    #[test]
    fn constraints_participate_in_validity() {
        let f = |name: &str, parent: Option<usize>, kind: ChildKind| Feature {
            name: name.to_string(),
            parent,
            kind,
            is_abstract: false,
        };
        let model = FeatureModel::new(
            vec![
                f("Root", None, ChildKind::Mandatory),
                f("A", Some(0), ChildKind::Optional),
                f("B", Some(0), ChildKind::Optional),
            ],
            0,
            vec![FeatureExpr::implies(
                FeatureExpr::var("A"),
                FeatureExpr::var("B"),
            )],
        )
        .unwrap();
        assert!(!model.validate_configuration(&Configuration::new(["Root", "A"])));
        assert!(model.validate_configuration(&Configuration::new(["Root", "A", "B"])));
        assert_eq!(model.enumerate_configurations(16).unwrap().len(), 3);
    }
}
