//! Boolean feature-constraint expressions and their textual grammar.
//!
//! The grammar used by FFSM guards and the `parse_constraint` entry point:
//!
//! ```text
//! expr   := term ('||' term)*
//! term   := factor ('&&' factor)*
//! factor := '!' factor | '(' expr ')' | name | 'true' | 'false'
//! ```
//!
//! `||` binds loosest, `!` tightest. Feature names match
//! `[A-Za-z_][A-Za-z0-9_]*`. Implication and equivalence have no textual
//! form; they only enter through FeatureIDE XML rules and are rendered in
//! their or/and normal form when displayed.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A boolean expression over feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureExpr {
    /// Boolean literal.
    Lit(bool),
    /// A feature name; true iff the feature is selected.
    Var(String),
    Not(Box<FeatureExpr>),
    And(Box<FeatureExpr>, Box<FeatureExpr>),
    Or(Box<FeatureExpr>, Box<FeatureExpr>),
    Implies(Box<FeatureExpr>, Box<FeatureExpr>),
    Equiv(Box<FeatureExpr>, Box<FeatureExpr>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
}

impl FeatureExpr {
    pub fn lit(value: bool) -> Self {
        FeatureExpr::Lit(value)
    }

    pub fn var(name: impl Into<String>) -> Self {
        FeatureExpr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(expr: FeatureExpr) -> Self {
        FeatureExpr::Not(Box::new(expr))
    }

    pub fn and(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn equiv(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        FeatureExpr::Equiv(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction that drops `true` operands instead of nesting them.
    pub fn and_simplified(lhs: FeatureExpr, rhs: FeatureExpr) -> Self {
        match (lhs, rhs) {
            (FeatureExpr::Lit(true), rhs) => rhs,
            (lhs, FeatureExpr::Lit(true)) => lhs,
            (lhs, rhs) => FeatureExpr::and(lhs, rhs),
        }
    }

    /// Negation that cancels a directly nested negation.
    pub fn negated(self) -> Self {
        match self {
            FeatureExpr::Not(inner) => *inner,
            FeatureExpr::Lit(b) => FeatureExpr::Lit(!b),
            other => FeatureExpr::not(other),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, FeatureExpr::Lit(true))
    }

    /// Every feature name mentioned in the expression.
    pub fn feature_names(&self) -> BTreeSet<&str> {
        let mut names = BTreeSet::new();
        self.collect_names(&mut names);
        names
    }

    fn collect_names<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            FeatureExpr::Lit(_) => {}
            FeatureExpr::Var(name) => {
                out.insert(name.as_str());
            }
            FeatureExpr::Not(inner) => inner.collect_names(out),
            FeatureExpr::And(a, b)
            | FeatureExpr::Or(a, b)
            | FeatureExpr::Implies(a, b)
            | FeatureExpr::Equiv(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }

    /// Evaluates the expression against a set of selected features.
    ///
    /// `is_known` decides whether a name is part of the feature universe;
    /// unknown names are an error rather than silently false.
    pub fn eval_with(
        &self,
        is_selected: &dyn Fn(&str) -> bool,
        is_known: &dyn Fn(&str) -> bool,
    ) -> Result<bool, ExprError> {
        match self {
            FeatureExpr::Lit(b) => Ok(*b),
            FeatureExpr::Var(name) => {
                if !is_known(name) {
                    return Err(ExprError::UnknownFeature(name.clone()));
                }
                Ok(is_selected(name))
            }
            FeatureExpr::Not(inner) => Ok(!inner.eval_with(is_selected, is_known)?),
            FeatureExpr::And(a, b) => {
                Ok(a.eval_with(is_selected, is_known)? & b.eval_with(is_selected, is_known)?)
            }
            FeatureExpr::Or(a, b) => {
                Ok(a.eval_with(is_selected, is_known)? | b.eval_with(is_selected, is_known)?)
            }
            FeatureExpr::Implies(a, b) => {
                Ok(!a.eval_with(is_selected, is_known)? | b.eval_with(is_selected, is_known)?)
            }
            FeatureExpr::Equiv(a, b) => {
                Ok(a.eval_with(is_selected, is_known)? == b.eval_with(is_selected, is_known)?)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FeatureExpr::Or(..) | FeatureExpr::Implies(..) | FeatureExpr::Equiv(..) => 1,
            FeatureExpr::And(..) => 2,
            FeatureExpr::Not(..) => 3,
            FeatureExpr::Lit(_) | FeatureExpr::Var(_) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, rhs_of_parent: bool) -> fmt::Result {
        let prec = self.precedence();
        let needs_parens = prec < parent || (prec == parent && rhs_of_parent);
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            FeatureExpr::Lit(b) => write!(f, "{b}")?,
            FeatureExpr::Var(name) => write!(f, "{name}")?,
            FeatureExpr::Not(inner) => {
                write!(f, "!")?;
                inner.fmt_prec(f, 3, false)?;
            }
            FeatureExpr::And(a, b) => {
                a.fmt_prec(f, 2, false)?;
                write!(f, " && ")?;
                b.fmt_prec(f, 2, true)?;
            }
            FeatureExpr::Or(a, b) => {
                a.fmt_prec(f, 1, false)?;
                write!(f, " || ")?;
                b.fmt_prec(f, 1, true)?;
            }
            // No textual operator exists for these; render the or/and form.
            FeatureExpr::Implies(a, b) => {
                let desugared = FeatureExpr::or(a.as_ref().clone().negated(), b.as_ref().clone());
                desugared.fmt_prec(f, parent, rhs_of_parent)?;
            }
            FeatureExpr::Equiv(a, b) => {
                let desugared = FeatureExpr::or(
                    FeatureExpr::and(a.as_ref().clone(), b.as_ref().clone()),
                    FeatureExpr::and(
                        a.as_ref().clone().negated(),
                        b.as_ref().clone().negated(),
                    ),
                );
                desugared.fmt_prec(f, parent, rhs_of_parent)?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for FeatureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

pub fn is_valid_feature_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the textual constraint grammar. Errors carry the byte offset of
/// the offending token.
pub fn parse_constraint(text: &str) -> Result<FeatureExpr, ExprError> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    parser.skip_ws();
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.bytes[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FeatureExpr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            if self.eat("||") {
                self.skip_ws();
                let rhs = self.term()?;
                lhs = FeatureExpr::or(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<FeatureExpr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat("&&") {
                self.skip_ws();
                let rhs = self.factor()?;
                lhs = FeatureExpr::and(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<FeatureExpr, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(FeatureExpr::not(self.factor()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                match name {
                    "true" => Ok(FeatureExpr::Lit(true)),
                    "false" => Ok(FeatureExpr::Lit(false)),
                    _ => Ok(FeatureExpr::var(name)),
                }
            }
            Some(_) => Err(self.error("expected `!`, `(`, a feature name, `true` or `false`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}
