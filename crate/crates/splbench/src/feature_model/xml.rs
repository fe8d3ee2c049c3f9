//! FeatureIDE XML reading and canonical re-serialization.
//!
//! Supported subset: `<featureModel>` with a `<struct>` tree of `<and>`,
//! `<or>`, `<alt>` and `<feature>` elements, and `<constraints>` holding
//! `<rule>` expressions built from `<var>`, `<not>`, `<conj>`, `<disj>`,
//! `<imp>` and `<eq>`. `<graphics>`, `<comments>`, `<calculations>` and
//! `<properties>` are skipped. Any other element is an error, reported with
//! its element path.

use std::fmt::Write as _;

use super::{ChildKind, Feature, FeatureExpr, FeatureModel, FeatureModelError};

const SKIPPED_ELEMENTS: &[&str] = &["graphics", "comments", "calculations", "properties"];

pub fn parse_feature_model(xml_text: &str) -> Result<FeatureModel, FeatureModelError> {
    let doc = roxmltree::Document::parse(xml_text)
        .map_err(|e| FeatureModelError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "featureModel" {
        return Err(FeatureModelError::UnknownElement {
            element: root.tag_name().name().to_string(),
            path: root.tag_name().name().to_string(),
        });
    }

    let mut features: Vec<Feature> = Vec::new();
    let mut constraints: Vec<FeatureExpr> = Vec::new();
    let mut saw_struct = false;

    for child in element_children(root) {
        let name = child.tag_name().name();
        match name {
            "struct" => {
                saw_struct = true;
                let mut roots = element_children(child)
                    .filter(|n| !is_skipped(n.tag_name().name()));
                let Some(tree_root) = roots.next() else {
                    return Err(FeatureModelError::Structure {
                        path: "featureModel/struct".to_string(),
                        message: "empty feature tree".to_string(),
                    });
                };
                if roots.next().is_some() {
                    return Err(FeatureModelError::Structure {
                        path: "featureModel/struct".to_string(),
                        message: "more than one root feature".to_string(),
                    });
                }
                parse_feature_node(
                    tree_root,
                    None,
                    GroupKind::And,
                    "featureModel/struct",
                    &mut features,
                )?;
            }
            "constraints" => {
                for (idx, rule) in element_children(child)
                    .filter(|n| !is_skipped(n.tag_name().name()))
                    .enumerate()
                {
                    let path = format!("featureModel/constraints/rule[{idx}]");
                    if rule.tag_name().name() != "rule" {
                        return Err(FeatureModelError::UnknownElement {
                            element: rule.tag_name().name().to_string(),
                            path,
                        });
                    }
                    let mut exprs = element_children(rule)
                        .filter(|n| !is_skipped(n.tag_name().name()));
                    let Some(expr_node) = exprs.next() else {
                        return Err(FeatureModelError::Structure {
                            path,
                            message: "rule without an expression".to_string(),
                        });
                    };
                    if exprs.next().is_some() {
                        return Err(FeatureModelError::Structure {
                            path,
                            message: "rule with more than one top-level expression".to_string(),
                        });
                    }
                    constraints.push(parse_rule_expr(expr_node, &path)?);
                }
            }
            _ if is_skipped(name) => {}
            _ => {
                return Err(FeatureModelError::UnknownElement {
                    element: name.to_string(),
                    path: format!("featureModel/{name}"),
                })
            }
        }
    }

    if !saw_struct {
        return Err(FeatureModelError::Structure {
            path: "featureModel".to_string(),
            message: "missing <struct> element".to_string(),
        });
    }

    // Referential integrity of constraints against the parsed tree.
    for constraint in &constraints {
        for name in constraint.feature_names() {
            if !features.iter().any(|f| f.name == name) {
                return Err(FeatureModelError::UnknownConstraintFeature {
                    name: name.to_string(),
                    path: "featureModel/constraints".to_string(),
                });
            }
        }
    }

    FeatureModel::new(features, 0, constraints)
}

fn is_skipped(name: &str) -> bool {
    SKIPPED_ELEMENTS.contains(&name)
}

fn element_children<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
) -> impl Iterator<Item = roxmltree::Node<'a, 'input>> {
    node.children().filter(|n| n.is_element())
}

/// Grouping semantics a parent element imposes on its children.
#[derive(Clone, Copy, PartialEq)]
enum GroupKind {
    And,
    Or,
    Alt,
}

fn parse_feature_node(
    node: roxmltree::Node,
    parent: Option<usize>,
    parent_group: GroupKind,
    parent_path: &str,
    features: &mut Vec<Feature>,
) -> Result<(), FeatureModelError> {
    let element = node.tag_name().name();
    let group = match element {
        "and" | "feature" => GroupKind::And,
        "or" => GroupKind::Or,
        "alt" => GroupKind::Alt,
        _ if is_skipped(element) => return Ok(()),
        _ => {
            return Err(FeatureModelError::UnknownElement {
                element: element.to_string(),
                path: format!("{parent_path}/{element}"),
            })
        }
    };
    let path = format!("{parent_path}/{element}");
    let Some(name) = node.attribute("name") else {
        return Err(FeatureModelError::Structure {
            path,
            message: "feature element without a name attribute".to_string(),
        });
    };
    let path = format!("{parent_path}/{element}[{name}]");
    if name == "true" || name == "false" {
        return Err(FeatureModelError::InvalidFeatureName {
            name: name.to_string(),
            path,
        });
    }
    if !super::is_valid_feature_name(name) {
        return Err(FeatureModelError::InvalidFeatureName {
            name: name.to_string(),
            path,
        });
    }
    if features.iter().any(|f| f.name == name) {
        return Err(FeatureModelError::DuplicateFeature {
            name: name.to_string(),
            path,
        });
    }
    let mandatory = node.attribute("mandatory") == Some("true");
    let is_abstract = node.attribute("abstract") == Some("true");
    let kind = match parent_group {
        _ if parent.is_none() => ChildKind::Mandatory,
        GroupKind::And => {
            if mandatory {
                ChildKind::Mandatory
            } else {
                ChildKind::Optional
            }
        }
        GroupKind::Alt => ChildKind::AltMember,
        GroupKind::Or => ChildKind::OrMember,
    };
    let index = features.len();
    features.push(Feature {
        name: name.to_string(),
        parent,
        kind,
        is_abstract,
    });
    for child in element_children(node) {
        parse_feature_node(child, Some(index), group, &path, features)?;
    }
    Ok(())
}

fn parse_rule_expr(node: roxmltree::Node, path: &str) -> Result<FeatureExpr, FeatureModelError> {
    let element = node.tag_name().name();
    let path = format!("{path}/{element}");
    let children: Vec<_> = element_children(node)
        .filter(|n| !is_skipped(n.tag_name().name()))
        .collect();
    let expect = |count: usize| -> Result<(), FeatureModelError> {
        if children.len() == count {
            Ok(())
        } else {
            Err(FeatureModelError::Structure {
                path: path.clone(),
                message: format!("expected {count} operand(s), found {}", children.len()),
            })
        }
    };
    match element {
        "var" => {
            let name = node.text().map(str::trim).unwrap_or_default();
            if name.is_empty() {
                return Err(FeatureModelError::Structure {
                    path,
                    message: "empty <var>".to_string(),
                });
            }
            match name {
                "true" => Ok(FeatureExpr::Lit(true)),
                "false" => Ok(FeatureExpr::Lit(false)),
                _ => Ok(FeatureExpr::var(name)),
            }
        }
        "not" => {
            expect(1)?;
            Ok(FeatureExpr::not(parse_rule_expr(children[0], &path)?))
        }
        "conj" | "disj" => {
            if children.len() < 2 {
                return Err(FeatureModelError::Structure {
                    path,
                    message: "conjunction/disjunction needs at least two operands".to_string(),
                });
            }
            let mut operands = children.iter();
            let mut acc = parse_rule_expr(*operands.next().unwrap(), &path)?;
            for child in operands {
                let rhs = parse_rule_expr(*child, &path)?;
                acc = if element == "conj" {
                    FeatureExpr::and(acc, rhs)
                } else {
                    FeatureExpr::or(acc, rhs)
                };
            }
            Ok(acc)
        }
        "imp" => {
            expect(2)?;
            Ok(FeatureExpr::implies(
                parse_rule_expr(children[0], &path)?,
                parse_rule_expr(children[1], &path)?,
            ))
        }
        "eq" => {
            expect(2)?;
            Ok(FeatureExpr::equiv(
                parse_rule_expr(children[0], &path)?,
                parse_rule_expr(children[1], &path)?,
            ))
        }
        _ => Err(FeatureModelError::UnknownElement {
            element: element.to_string(),
            path,
        }),
    }
}

/// Canonical serialization: 2-space indent, attributes in the order
/// `abstract, mandatory, name`, false attributes omitted,
/// `<constraints>` omitted when empty.
pub fn write_feature_model_xml(model: &FeatureModel) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<featureModel>\n");
    out.push_str("  <struct>\n");
    let root_idx = model
        .features()
        .iter()
        .position(|f| f.parent.is_none())
        .expect("model has a root");
    write_feature(model, root_idx, 2, &mut out);
    out.push_str("  </struct>\n");
    if !model.constraints().is_empty() {
        out.push_str("  <constraints>\n");
        for constraint in model.constraints() {
            out.push_str("    <rule>\n");
            write_rule_expr(constraint, 3, &mut out);
            out.push_str("    </rule>\n");
        }
        out.push_str("  </constraints>\n");
    }
    out.push_str("</featureModel>\n");
    out
}

fn write_feature(model: &FeatureModel, index: usize, depth: usize, out: &mut String) {
    let feature = &model.features()[index];
    let children: Vec<usize> = model.children(index).collect();
    let element = if children.is_empty() {
        "feature"
    } else {
        match model.features()[children[0]].kind {
            ChildKind::AltMember => "alt",
            ChildKind::OrMember => "or",
            _ => "and",
        }
    };
    let indent = "  ".repeat(depth);
    let _ = write!(out, "{indent}<{element}");
    if feature.is_abstract {
        out.push_str(" abstract=\"true\"");
    }
    if feature.parent.is_some() && feature.kind == ChildKind::Mandatory {
        out.push_str(" mandatory=\"true\"");
    }
    let _ = write!(out, " name=\"{}\"", feature.name);
    if children.is_empty() {
        out.push_str("/>\n");
    } else {
        out.push_str(">\n");
        for child in children {
            write_feature(model, child, depth + 1, out);
        }
        let _ = writeln!(out, "{indent}</{element}>");
    }
}

fn write_rule_expr(expr: &FeatureExpr, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    match expr {
        FeatureExpr::Lit(b) => {
            let _ = writeln!(out, "{indent}<var>{b}</var>");
        }
        FeatureExpr::Var(name) => {
            let _ = writeln!(out, "{indent}<var>{name}</var>");
        }
        FeatureExpr::Not(inner) => {
            let _ = writeln!(out, "{indent}<not>");
            write_rule_expr(inner, depth + 1, out);
            let _ = writeln!(out, "{indent}</not>");
        }
        FeatureExpr::And(a, b) => {
            let _ = writeln!(out, "{indent}<conj>");
            write_rule_expr(a, depth + 1, out);
            write_rule_expr(b, depth + 1, out);
            let _ = writeln!(out, "{indent}</conj>");
        }
        FeatureExpr::Or(a, b) => {
            let _ = writeln!(out, "{indent}<disj>");
            write_rule_expr(a, depth + 1, out);
            write_rule_expr(b, depth + 1, out);
            let _ = writeln!(out, "{indent}</disj>");
        }
        FeatureExpr::Implies(a, b) => {
            let _ = writeln!(out, "{indent}<imp>");
            write_rule_expr(a, depth + 1, out);
            write_rule_expr(b, depth + 1, out);
            let _ = writeln!(out, "{indent}</imp>");
        }
        FeatureExpr::Equiv(a, b) => {
            let _ = writeln!(out, "{indent}<eq>");
            write_rule_expr(a, depth + 1, out);
            write_rule_expr(b, depth + 1, out);
            let _ = writeln!(out, "{indent}</eq>");
        }
    }
}
