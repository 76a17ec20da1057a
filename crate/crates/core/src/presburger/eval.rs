//! Bounded evaluation.
//!
//! Before a quantified variable is enumerated, the constraints that must hold
//! for any witness (atoms reachable through conjunction, nested existentials
//! and pushed negations) are propagated as intervals under the current
//! assignment. A finite interval is enumerated in full and the answer is exact;
//! otherwise the variable is clipped to `[-W, W]` and the answer is only
//! window-limited, unless a witness is found whose check was itself exact.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{Formula, Node, PresburgerError, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub value: bool,
    /// The bounded answer is certified to equal the unbounded one.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinedSet {
    pub tuples: BTreeSet<Vec<i64>>,
    /// Every membership decision in the box was exact.
    pub exact: bool,
}

#[derive(Debug, Clone)]
struct IAtom {
    coeffs: Vec<(usize, i128)>,
    bound: i128,
}

impl IAtom {
    fn negated(&self) -> IAtom {
        IAtom {
            coeffs: self.coeffs.iter().map(|&(v, c)| (v, -c)).collect(),
            bound: -self.bound - 1,
        }
    }
}

/// Instantiated formula; every binder gets its own slot.
#[derive(Debug, Clone)]
enum INode {
    Atom(IAtom),
    Not(Box<INode>),
    And(Box<INode>, Box<INode>),
    Or(Box<INode>, Box<INode>),
    Implies(Box<INode>, Box<INode>),
    Exists(usize, Box<INode>),
    ForAll(usize, Box<INode>),
}

struct Instance {
    root: INode,
    slots: usize,
    /// Slot of each free variable, by formula id.
    free: HashMap<VarId, usize>,
    max_constant: i128,
}

fn to_i128(b: &BigInt) -> Result<i128, PresburgerError> {
    b.to_i128().ok_or(PresburgerError::Overflow)
}

fn instantiate(f: &Formula, n: u64) -> Result<Instance, PresburgerError> {
    struct Ctx {
        n: BigInt,
        slots: usize,
        scope: Vec<(VarId, usize)>,
        free: HashMap<VarId, usize>,
        max_constant: i128,
    }
    fn slot(ctx: &mut Ctx, v: VarId) -> usize {
        if let Some(&(_, s)) = ctx.scope.iter().rev().find(|(u, _)| *u == v) {
            return s;
        }
        if let Some(&s) = ctx.free.get(&v) {
            return s;
        }
        ctx.free.insert(v, ctx.slots);
        ctx.slots += 1;
        ctx.slots - 1
    }
    fn go(node: &Node, ctx: &mut Ctx) -> Result<INode, PresburgerError> {
        Ok(match node {
            Node::Atom(a) => {
                let mut coeffs = Vec::with_capacity(a.coeffs.len());
                for (v, c) in &a.coeffs {
                    let c = to_i128(&c.eval(&ctx.n))?;
                    ctx.max_constant = ctx.max_constant.max(c.abs());
                    if c != 0 {
                        coeffs.push((slot(ctx, *v), c));
                    }
                }
                let bound = to_i128(&a.bound.eval(&ctx.n))?;
                ctx.max_constant = ctx.max_constant.max(bound.abs());
                INode::Atom(IAtom { coeffs, bound })
            }
            Node::Not(x) => INode::Not(Box::new(go(x, ctx)?)),
            Node::And(a, b) => INode::And(Box::new(go(a, ctx)?), Box::new(go(b, ctx)?)),
            Node::Or(a, b) => INode::Or(Box::new(go(a, ctx)?), Box::new(go(b, ctx)?)),
            Node::Implies(a, b) => INode::Implies(Box::new(go(a, ctx)?), Box::new(go(b, ctx)?)),
            Node::Exists(v, x) | Node::ForAll(v, x) => {
                let s = ctx.slots;
                ctx.slots += 1;
                ctx.scope.push((*v, s));
                let body = Box::new(go(x, ctx)?);
                ctx.scope.pop();
                if matches!(node, Node::Exists(..)) {
                    INode::Exists(s, body)
                } else {
                    INode::ForAll(s, body)
                }
            }
        })
    }
    let mut ctx = Ctx {
        n: BigInt::from(n),
        slots: 0,
        scope: Vec::new(),
        free: HashMap::new(),
        max_constant: 0,
    };
    let root = go(f.root(), &mut ctx)?;
    Ok(Instance { root, slots: ctx.slots, free: ctx.free, max_constant: ctx.max_constant })
}

/// `4 * max |c|` over the coefficients and bounds after instantiation (at least 4).
pub fn default_window(f: &Formula, n: u64) -> Result<u64, PresburgerError> {
    let inst = instantiate(f, n)?;
    Ok(4 * inst.max_constant.max(1).min(i128::from(u32::MAX)) as u64)
}

const PROPAGATION_ROUNDS: usize = 32;

struct Evaluator {
    env: Vec<Option<i128>>,
    window: i128,
}

impl Evaluator {
    fn atom(&self, a: &IAtom) -> bool {
        let lhs: i128 = a
            .coeffs
            .iter()
            .map(|&(v, c)| c * self.env[v].expect("variables are bound before use"))
            .sum();
        lhs <= a.bound
    }

    fn eval(&mut self, node: &INode) -> Evaluation {
        match node {
            INode::Atom(a) => Evaluation { value: self.atom(a), exact: true },
            INode::Not(x) => {
                let e = self.eval(x);
                Evaluation { value: !e.value, exact: e.exact }
            }
            INode::And(a, b) => {
                let l = self.eval(a);
                if !l.value && l.exact {
                    return l;
                }
                let r = self.eval(b);
                combine(l, r, true)
            }
            INode::Or(a, b) => {
                let l = self.eval(a);
                if l.value && l.exact {
                    return l;
                }
                let r = self.eval(b);
                combine(l, r, false)
            }
            INode::Implies(a, b) => {
                let l = self.eval(a);
                let nl = Evaluation { value: !l.value, exact: l.exact };
                if nl.value && nl.exact {
                    return nl;
                }
                let r = self.eval(b);
                combine(nl, r, false)
            }
            INode::Exists(v, body) => self.exists(*v, body, false),
            INode::ForAll(v, body) => {
                let e = self.exists(*v, body, true);
                Evaluation { value: !e.value, exact: e.exact }
            }
        }
    }

    /// `E v body`, or `E v !body` when `negate_body`.
    fn exists(&mut self, v: usize, body: &INode, negate_body: bool) -> Evaluation {
        let mut cons = Vec::new();
        collect(body, negate_body, &mut cons);
        let Some(bounds) = self.propagate(&cons, v) else {
            return Evaluation { value: false, exact: true };
        };
        let certified = bounds.0.is_some() && bounds.1.is_some();
        let (mut lo, mut hi) = (bounds.0.unwrap_or(-self.window), bounds.1.unwrap_or(self.window));
        if !certified {
            lo = lo.max(-self.window);
            hi = hi.min(self.window);
        }
        let mut all_exact = certified;
        let mut inexact_witness = false;
        let mut x = lo;
        while x <= hi {
            self.env[v] = Some(x);
            let mut e = self.eval(body);
            if negate_body {
                e.value = !e.value;
            }
            if e.value {
                if e.exact {
                    self.env[v] = None;
                    return Evaluation { value: true, exact: true };
                }
                inexact_witness = true;
            }
            all_exact &= e.exact;
            x += 1;
        }
        self.env[v] = None;
        if inexact_witness {
            Evaluation { value: true, exact: false }
        } else {
            Evaluation { value: false, exact: all_exact }
        }
    }

    /// Interval for `target` implied by `cons`; `None` when they are infeasible.
    fn propagate(&self, cons: &[IAtom], target: usize) -> Option<(Option<i128>, Option<i128>)> {
        let mut bounds: HashMap<usize, (Option<i128>, Option<i128>)> = HashMap::new();
        bounds.insert(target, (None, None));
        for round in 0..PROPAGATION_ROUNDS {
            let mut changed = false;
            for a in cons {
                let mut rest = a.bound;
                let mut unknown = Vec::new();
                for &(u, c) in &a.coeffs {
                    match self.env[u] {
                        Some(val) if u != target => rest -= c * val,
                        _ => unknown.push((u, c)),
                    }
                }
                if unknown.is_empty() {
                    if rest < 0 {
                        return None;
                    }
                    continue;
                }
                // Smallest possible value of c*u over the current intervals.
                let low = |u: usize, c: i128, b: &HashMap<usize, (Option<i128>, Option<i128>)>| {
                    let (lo, hi) = b.get(&u).copied().unwrap_or((None, None));
                    if c > 0 {
                        lo.map(|l| c * l)
                    } else {
                        hi.map(|h| c * h)
                    }
                };
                let lows: Vec<Option<i128>> = unknown.iter().map(|&(u, c)| low(u, c, &bounds)).collect();
                let missing = lows.iter().filter(|l| l.is_none()).count();
                let total: i128 = lows.iter().flatten().sum();
                for (j, &(u, c)) in unknown.iter().enumerate() {
                    let others = match (lows[j], missing) {
                        (Some(l), 0) => total - l,
                        (None, 1) => total,
                        _ => continue,
                    };
                    let r = rest - others;
                    let entry = bounds.entry(u).or_insert((None, None));
                    if c > 0 {
                        let h = r.div_euclid(c);
                        if entry.1.is_none_or(|old| h < old) {
                            entry.1 = Some(h);
                            changed = true;
                        }
                    } else {
                        // c*u <= r with c < 0  <=>  u >= ceil(-r / -c)
                        let l = ceil_div(-r, -c);
                        if entry.0.is_none_or(|old| l > old) {
                            entry.0 = Some(l);
                            changed = true;
                        }
                    }
                    if let (Some(lo), Some(hi)) = *entry {
                        if lo > hi {
                            return None;
                        }
                    }
                }
            }
            if !changed || round + 1 == PROPAGATION_ROUNDS {
                break;
            }
        }
        Some(bounds[&target])
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

fn combine(l: Evaluation, r: Evaluation, and: bool) -> Evaluation {
    let value = if and { l.value && r.value } else { l.value || r.value };
    // A decisive exact operand fixes the answer on its own.
    let decisive = |e: Evaluation| e.exact && e.value != and;
    let exact = decisive(l) || decisive(r) || (l.exact && r.exact);
    Evaluation { value, exact }
}

/// Atoms that every witness of `node` (or of its negation) satisfies.
fn collect(node: &INode, negated: bool, out: &mut Vec<IAtom>) {
    match (node, negated) {
        (INode::Atom(a), false) => out.push(a.clone()),
        (INode::Atom(a), true) => out.push(a.negated()),
        (INode::Not(x), _) => collect(x, !negated, out),
        (INode::And(a, b), false) | (INode::Or(a, b), true) => {
            collect(a, negated, out);
            collect(b, negated, out);
        }
        (INode::Implies(a, b), true) => {
            collect(a, false, out);
            collect(b, true, out);
        }
        (INode::Exists(_, x), false) | (INode::ForAll(_, x), true) => collect(x, negated, out),
        _ => {}
    }
}

fn prepare(f: &Formula, n: u64, assignment: &[(&str, i64)], window: Option<u64>) -> Result<(Instance, Evaluator), PresburgerError> {
    let inst = instantiate(f, n)?;
    let mut env = vec![None; inst.slots];
    for (&v, &s) in &inst.free {
        let name = f.name(v);
        let val = assignment
            .iter()
            .find(|(k, _)| *k == name)
            .map(|&(_, x)| x)
            .ok_or_else(|| PresburgerError::UnboundVariable(name.to_string()))?;
        env[s] = Some(i128::from(val));
    }
    let window = match window {
        Some(w) => w,
        None => 4 * inst.max_constant.max(1).min(i128::from(u32::MAX)) as u64,
    };
    Ok((inst, Evaluator { env, window: i128::from(window) }))
}

/// Evaluates at parameter `n` with quantifiers ranging over at most `[-W, W]`
/// (W defaults to [`default_window`]). Every free variable must be assigned.
pub fn eval(f: &Formula, n: u64, assignment: &[(&str, i64)], window: Option<u64>) -> Result<Evaluation, PresburgerError> {
    let (inst, mut ev) = prepare(f, n, assignment, window)?;
    Ok(ev.eval(&inst.root))
}

/// All tuples in `[-W, W]^m` satisfying the formula, `free_vars` giving the coordinate order.
pub fn define_set(f: &Formula, n: u64, free_vars: &[&str], window: Option<u64>) -> Result<DefinedSet, PresburgerError> {
    for name in f.free_vars() {
        if !free_vars.contains(&name.as_str()) {
            return Err(PresburgerError::UnboundVariable(name));
        }
    }
    let zeros: Vec<(&str, i64)> = free_vars.iter().map(|&v| (v, 0)).collect();
    let (inst, ev) = prepare(f, n, &zeros, window)?;
    let w = ev.window as i64;
    let slots: Vec<Option<usize>> = free_vars
        .iter()
        .map(|name| f.var_id(name).and_then(|v| inst.free.get(&v).copied()))
        .collect();
    let m = free_vars.len();
    let side = (2 * w + 1) as usize;
    let total = side.checked_pow(m as u32).expect("box too large");
    let results: Vec<(Vec<i64>, Evaluation)> = (0..total)
        .into_par_iter()
        .map_init(
            || Evaluator { env: ev.env.clone(), window: ev.window },
            |local, mut idx| {
                let mut tuple = Vec::with_capacity(m);
                for s in &slots {
                    let x = (idx % side) as i64 - w;
                    idx /= side;
                    if let Some(s) = s {
                        local.env[*s] = Some(i128::from(x));
                    }
                    tuple.push(x);
                }
                let e = local.eval(&inst.root);
                (tuple, e)
            },
        )
        .collect();
    let exact = results.iter().all(|(_, e)| e.exact);
    let tuples = results.into_iter().filter(|(_, e)| e.value).map(|(t, _)| t).collect();
    Ok(DefinedSet { tuples, exact })
}
