use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{Atom, Formula, Node, PresburgerError, VarId};
use crate::polyfam::PolynomialZ;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
    Not,
    And,
    Or,
    Arrow,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PresburgerError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().expect("digits"))));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            b'<' if two(b'=') => Tok::Le,
            b'>' if two(b'=') => Tok::Ge,
            b'!' if two(b'=') => Tok::Ne,
            b'-' if two(b'>') => Tok::Arrow,
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'=' => Tok::Eq,
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                return Err(PresburgerError::Syntax {
                    pos: start,
                    msg: format!("unexpected character {:?}", text[start..].chars().next().unwrap_or('?')),
                })
            }
        };
        i += if matches!(tok, Tok::Le | Tok::Ge | Tok::Ne | Tok::Arrow) { 2 } else { 1 };
        out.push((start, tok));
    }
    Ok(out)
}

/// Linear expression `sum coeffs[v] * x_v + constant`.
#[derive(Debug, Clone, Default)]
struct Lin {
    coeffs: BTreeMap<VarId, PolynomialZ>,
    constant: PolynomialZ,
}

impl Lin {
    fn constant(p: PolynomialZ) -> Self {
        Lin { coeffs: BTreeMap::new(), constant: p }
    }

    fn var(v: VarId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, PolynomialZ::constant(1));
        Lin { coeffs, constant: PolynomialZ::zero() }
    }

    fn add(mut self, other: Lin, sign: i64) -> Lin {
        let s = BigInt::from(sign);
        for (v, c) in other.coeffs {
            let e = self.coeffs.entry(v).or_insert_with(PolynomialZ::zero);
            *e = &*e + &c.scale(&s);
        }
        self.constant = &self.constant + &other.constant.scale(&s);
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    fn scale(mut self, k: &PolynomialZ) -> Lin {
        for c in self.coeffs.values_mut() {
            *c = &*c * k;
        }
        self.constant = &self.constant * k;
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `self <= 0` as an atom.
    fn atom_le_zero(self) -> Atom {
        Atom {
            coeffs: self.coeffs.into_iter().collect(),
            bound: -self.constant,
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    names: Vec<String>,
}

type PResult<T> = Result<T, PresburgerError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(PresburgerError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn var(&mut self, name: &str) -> VarId {
        match self.names.iter().position(|s| s == name) {
            Some(v) => v,
            None => {
                self.names.push(name.to_string());
                self.names.len() - 1
            }
        }
    }

    fn implication(&mut self) -> PResult<Node> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Node::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Node> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            acc = Node::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> PResult<Node> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            acc = Node::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Node> {
        if self.eat(&Tok::Not) {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        if let Some(Tok::Ident(q)) = self.peek() {
            if q == "E" || q == "A" {
                let exists = q == "E";
                self.pos += 1;
                let mut vars = Vec::new();
                while let Some(Tok::Ident(name)) = self.peek() {
                    if name == "E" || name == "A" {
                        break;
                    }
                    if name == "n" {
                        return Err(PresburgerError::QuantifiedParameter { pos: self.offset() });
                    }
                    let name = name.clone();
                    self.pos += 1;
                    vars.push(self.var(&name));
                }
                if vars.is_empty() {
                    return self.err("expected a variable after the quantifier");
                }
                let mut body = self.implication()?;
                for v in vars.into_iter().rev() {
                    body = if exists {
                        Node::Exists(v, Box::new(body))
                    } else {
                        Node::ForAll(v, Box::new(body))
                    };
                }
                return Ok(body);
            }
        }
        if self.peek() == Some(&Tok::LParen) {
            // Either a parenthesized term starting an atom or a parenthesized formula.
            let save = (self.pos, self.names.len());
            let atom_err = match self.atom() {
                Ok(a) => return Ok(a),
                Err(e) => e,
            };
            if matches!(atom_err, PresburgerError::QuantifiedParameter { .. }) {
                return Err(atom_err);
            }
            self.pos = save.0;
            self.names.truncate(save.1);
            self.pos += 1;
            let inner = self.implication();
            let inner = match inner {
                Ok(f) => f,
                Err(e) => return Err(furthest(atom_err, e)),
            };
            if let Err(e) = self.expect(&Tok::RParen, "')'") {
                return Err(furthest(atom_err, e));
            }
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Node> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Some(t @ (Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt | Tok::Eq | Tok::Ne)) => t.clone(),
            _ => return self.err("expected a relation"),
        };
        self.pos += 1;
        let rhs = self.term()?;
        let diff = lhs.add(rhs, -1);
        let one = Lin::constant(PolynomialZ::constant(1));
        Ok(match rel {
            Tok::Le => Node::Atom(diff.atom_le_zero()),
            Tok::Lt => Node::Atom(diff.add(one, 1).atom_le_zero()),
            Tok::Ge => Node::Atom(diff.scale(&PolynomialZ::constant(-1)).atom_le_zero()),
            Tok::Gt => Node::Atom(diff.scale(&PolynomialZ::constant(-1)).add(one, 1).atom_le_zero()),
            Tok::Eq | Tok::Ne => {
                let le = Node::Atom(diff.clone().atom_le_zero());
                let lt = Node::Atom(diff.add(one, 1).atom_le_zero());
                let eq = Node::And(Box::new(le), Box::new(Node::Not(Box::new(lt))));
                if rel == Tok::Eq {
                    eq
                } else {
                    Node::Not(Box::new(eq))
                }
            }
            _ => unreachable!(),
        })
    }

    fn term(&mut self) -> PResult<Lin> {
        let mut acc = self.product()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => 1,
                Some(Tok::Minus) => -1,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.product()?;
            acc = acc.add(rhs, sign);
        }
    }

    fn product(&mut self) -> PResult<Lin> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            let at = self.offset();
            self.pos += 1;
            let rhs = self.factor()?;
            acc = match (acc.is_constant(), rhs.is_constant()) {
                (true, _) => rhs.scale(&acc.constant),
                (_, true) => acc.scale(&rhs.constant),
                _ => return Err(PresburgerError::NonLinear { pos: at }),
            };
        }
        Ok(acc)
    }

    fn power_of_n(&mut self) -> PResult<usize> {
        if !self.eat(&Tok::Caret) {
            return Ok(1);
        }
        match self.peek() {
            Some(Tok::Int(k)) => {
                let e = usize::try_from(k.clone()).ok().filter(|&e| e > 0);
                match e {
                    Some(e) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    None => self.err("exponent must be a small positive integer"),
                }
            }
            _ => self.err("expected an exponent"),
        }
    }

    fn factor(&mut self) -> PResult<Lin> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.scale(&PolynomialZ::constant(-1)))
            }
            Some(Tok::Int(k)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Ident("n".into())) {
                    self.pos += 1;
                    let e = self.power_of_n()?;
                    return Ok(Lin::constant(PolynomialZ::monomial(k, e)));
                }
                Ok(Lin::constant(PolynomialZ::constant(k)))
            }
            Some(Tok::Ident(name)) if name == "n" => {
                self.pos += 1;
                let e = self.power_of_n()?;
                Ok(Lin::constant(PolynomialZ::monomial(1, e)))
            }
            Some(Tok::Ident(name)) if name == "E" || name == "A" => self.err("quantifier inside a term"),
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Lin::var(self.var(&name)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.err("expected a term"),
        }
    }
}

fn furthest(a: PresburgerError, b: PresburgerError) -> PresburgerError {
    let pos = |e: &PresburgerError| match e {
        PresburgerError::Syntax { pos, .. }
        | PresburgerError::NonLinear { pos }
        | PresburgerError::QuantifiedParameter { pos } => *pos,
        _ => 0,
    };
    if pos(&a) > pos(&b) {
        a
    } else {
        b
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, PresburgerError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), names: Vec::new() };
    let root = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(Formula { root, names: p.names })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(f: &Formula) -> &Atom {
        match f.root() {
            Node::Atom(a) => a,
            other => panic!("not an atom: {other:?}"),
        }
    }

    #[test]
    fn ge_is_negated() {
        let f = parse_formula("x >= 0").unwrap();
        let a = atom(&f);
        assert_eq!(a.coeffs, vec![(0, PolynomialZ::constant(-1))]);
        assert_eq!(a.bound, PolynomialZ::zero());
    }

    #[test]
    fn equality_desugars() {
        let f = parse_formula("E z (2*z = n)").unwrap();
        let Node::Exists(0, body) = f.root() else { panic!() };
        let Node::And(le, not_lt) = body.as_ref() else { panic!() };
        let two = PolynomialZ::constant(2);
        assert_eq!(**le, Node::Atom(Atom { coeffs: vec![(0, two.clone())], bound: PolynomialZ::param() }));
        assert_eq!(
            **not_lt,
            Node::Not(Box::new(Node::Atom(Atom {
                coeffs: vec![(0, two)],
                bound: PolynomialZ::param() - PolynomialZ::constant(1),
            })))
        );
        assert_eq!(f.free_vars().len(), 0);
        assert_eq!(f.bound_vars().into_iter().collect::<Vec<_>>(), vec!["z".to_string()]);
    }

    #[test]
    fn polynomial_coefficients() {
        let f = parse_formula("4n^2*x - (n+1)*y + 3 < 2n").unwrap();
        let a = atom(&f);
        assert_eq!(a.coeffs[0].1, "4n^2".parse().unwrap());
        assert_eq!(a.coeffs[1].1, "-n-1".parse().unwrap());
        assert_eq!(a.bound, "2n-4".parse().unwrap());
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        let f = parse_formula("(x + 1) <= 3 & (y <= 2 | !(y = 5))").unwrap();
        assert!(matches!(f.root(), Node::And(..)));
        let g = parse_formula("((x <= 1))").unwrap();
        assert!(matches!(g.root(), Node::Atom(_)));
        let h = parse_formula("a <= 1 -> b <= 1 -> c <= 1").unwrap();
        let Node::Implies(_, rhs) = h.root() else { panic!() };
        assert!(matches!(rhs.as_ref(), Node::Implies(..)));
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_formula("A z (n*z <= 0 & E n (n <= 1))"),
            Err(PresburgerError::QuantifiedParameter { pos: 18 })
        );
        assert!(matches!(parse_formula("x*y <= 1"), Err(PresburgerError::NonLinear { pos: 1 })));
        assert!(matches!(parse_formula("x <= "), Err(PresburgerError::Syntax { pos: 5, .. })));
        assert!(matches!(parse_formula("x # 1"), Err(PresburgerError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_formula("(x <= 1"), Err(PresburgerError::Syntax { .. })));
        assert!(matches!(parse_formula("x <= 1 )"), Err(PresburgerError::Syntax { pos: 7, .. })));
        assert!(matches!(parse_formula("E (x <= 1)"), Err(PresburgerError::Syntax { .. })));
    }
}
