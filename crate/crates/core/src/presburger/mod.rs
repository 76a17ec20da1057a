//! Parametric Presburger formulas: linear constraints over the integers whose
//! coefficients are polynomials in the parameter `n`, closed under the boolean
//! connectives and quantifiers over variables other than `n`.
//!
//! Surface syntax:
//!
//! ```text
//! formula := implication
//! implication := disjunction ("->" implication)?
//! disjunction := conjunction ("|" conjunction)*
//! conjunction := unary ("&" unary)*
//! unary := "!" unary | ("E" | "A") ident+ formula | term rel term | "(" formula ")"
//! rel := "<=" | "<" | ">=" | ">" | "=" | "!="
//! term := product (("+" | "-") product)*
//! product := factor ("*" factor)*
//! factor := "-" factor | int | int "n" ("^" int)? | "n" ("^" int)? | ident | "(" term ")"
//! ```
//!
//! `E` and `A` are reserved. A quantifier body extends as far to the right as
//! possible. Every relation is normalized to atoms `sum a_i(n) x_i <= b(n)`;
//! `t = u` becomes `t <= u & !(t <= u - 1)`.

mod builtin;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::polyfam::{FamilyError, PolynomialZ};

pub use builtin::{builtin_formula, Builtin};
pub use eval::{default_window, define_set, eval, DefinedSet, Evaluation};
pub use parse::parse_formula;

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresburgerError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("the parameter n cannot be quantified (byte {pos})")]
    QuantifiedParameter { pos: usize },
    #[error("product of two variable terms at byte {pos} is not linear")]
    NonLinear { pos: usize },
    #[error("variable `{0}` has no value")]
    UnboundVariable(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("value does not fit in 128 bits after instantiation")]
    Overflow,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// `sum coeffs[i].1 * x_{coeffs[i].0} <= bound`, coefficients nonzero and
/// sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub coeffs: Vec<(VarId, PolynomialZ)>,
    pub bound: PolynomialZ,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Atom(Atom),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Exists(VarId, Box<Node>),
    ForAll(VarId, Box<Node>),
}

/// A formula with its variable names; ids follow first appearance in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    root: Node,
    names: Vec<String>,
}

impl Formula {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|s| s == name)
    }

    /// Variables with an occurrence outside the scope of any quantifier binding them.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut free = BTreeSet::new();
        collect_free(&self.root, &mut Vec::new(), &mut free);
        free.into_iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_bound(&self.root, &mut out);
        out.into_iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(&self.root, &mut out);
        out
    }

    fn render_node(&self, node: &Node, out: &mut String) {
        let wrap = |n: &Node, out: &mut String| {
            if matches!(n, Node::Atom(_)) {
                self.render_node(n, out);
            } else {
                out.push('(');
                self.render_node(n, out);
                out.push(')');
            }
        };
        match node {
            Node::Atom(a) => self.render_atom(a, out),
            Node::Not(x) => {
                out.push_str("!(");
                self.render_node(x, out);
                out.push(')');
            }
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
                wrap(a, out);
                out.push_str(match node {
                    Node::And(..) => " & ",
                    Node::Or(..) => " | ",
                    _ => " -> ",
                });
                wrap(b, out);
            }
            Node::Exists(v, x) | Node::ForAll(v, x) => {
                out.push_str(if matches!(node, Node::Exists(..)) { "E " } else { "A " });
                out.push_str(&self.names[*v]);
                out.push_str(" (");
                self.render_node(x, out);
                out.push(')');
            }
        }
    }

    fn render_atom(&self, a: &Atom, out: &mut String) {
        if a.coeffs.is_empty() {
            out.push('0');
        }
        for (i, (v, c)) in a.coeffs.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let name = &self.names[*v];
            match c.constant_value() {
                Some(k) if k == 1.into() => out.push_str(name),
                Some(k) if k == (-1).into() => {
                    out.push('-');
                    out.push_str(name);
                }
                Some(k) => out.push_str(&format!("{k}*{name}")),
                None => out.push_str(&format!("({c})*{name}")),
            }
        }
        out.push_str(" <= ");
        match a.bound.constant_value() {
            Some(k) => out.push_str(&k.to_string()),
            None => out.push_str(&format!("({})", a.bound)),
        }
    }
}

fn collect_free(node: &Node, bound: &mut Vec<VarId>, out: &mut BTreeSet<VarId>) {
    match node {
        Node::Atom(a) => {
            for (v, _) in &a.coeffs {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            }
        }
        Node::Not(x) => collect_free(x, bound, out),
        Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Node::Exists(v, x) | Node::ForAll(v, x) => {
            bound.push(*v);
            collect_free(x, bound, out);
            bound.pop();
        }
    }
}

fn collect_bound(node: &Node, out: &mut BTreeSet<VarId>) {
    match node {
        Node::Atom(_) => {}
        Node::Not(x) => collect_bound(x, out),
        Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
            collect_bound(a, out);
            collect_bound(b, out);
        }
        Node::Exists(v, x) | Node::ForAll(v, x) => {
            out.insert(*v);
            collect_bound(x, out);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for Formula {
    type Err = PresburgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}
