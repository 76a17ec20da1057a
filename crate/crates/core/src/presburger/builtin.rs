//! Named formulas over a one-dimensional family `<f_1(n), ..., f_k(n)>`,
//! with semigroup membership expanded in place. The free variable is `x`;
//! helper variables start with `_` and are fresh per occurrence. Quantified
//! pieces are parenthesized since a quantifier body extends to the right.
//!
//! Each quantified variable is boxed by the formula's own constraints, so the
//! bounded evaluator certifies every answer: the Frobenius number only needs
//! `g_1` members after it, pseudo-Frobenius numbers only need `x + g_i`, and
//! the Frobenius number of a numerical semigroup is below `(sum g_i)^2`.

use std::fmt;
use std::str::FromStr;

use super::{parse_formula, Formula, PresburgerError};
use crate::polyfam::{FamilyError, ParametricFamily, PolynomialZ};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    Member,
    Gcd,
    Frobenius,
    PseudoFrobenius,
    Symmetric,
    FundamentalGap,
    LengthSet(PolynomialZ),
    DeltaElem(PolynomialZ),
    Apery,
}

impl Builtin {
    pub const NAMES: [&'static str; 9] = [
        "member",
        "gcd",
        "frobenius",
        "pf",
        "symmetric",
        "fundamental_gap",
        "length_set(m)",
        "delta_elem(m)",
        "apery",
    ];

    /// Free variables of the formula, in coordinate order.
    pub fn free_vars(&self) -> &'static [&'static str] {
        match self {
            Builtin::Symmetric => &[],
            _ => &["x"],
        }
    }

    pub fn formula(&self, fam: &ParametricFamily) -> Result<Formula, PresburgerError> {
        if fam.dim() != 1 {
            return Err(FamilyError::NotNumerical { dim: fam.dim() }.into());
        }
        let gens: Vec<String> = fam.generators().iter().map(|g| format!("({})", g[0])).collect();
        let mut b = TextBuilder { gens, fresh: 0 };
        let text = match self {
            Builtin::Member => b.member("x"),
            Builtin::Gcd => {
                let combo = b.combination("x");
                let y = b.var("y");
                let smaller = format!("{y} >= 1 & {y} < x & {}", b.combination(&y));
                format!("x >= 1 & {combo} & (A {y} (({smaller}) -> 0 <= -1))")
            }
            Builtin::Frobenius => b.frobenius("x"),
            Builtin::PseudoFrobenius => {
                let mut parts = vec![format!("!{}", b.member("x"))];
                for g in b.gens.clone() {
                    parts.push(b.member(&format!("x + {g}")));
                }
                parts.join(" & ")
            }
            Builtin::Symmetric => {
                let f = b.var("f");
                let z = b.var("z");
                let sum = b.gens.join(" + ");
                format!(
                    "E {f} ({f} >= -1 & {f} <= ({sum})*({sum}) & {} & (A {z} (({z} >= 0 & {z} <= {f} & !{}) -> {})))",
                    b.frobenius(&f),
                    b.member(&z),
                    b.member(&format!("{f} - {z}"))
                )
            }
            Builtin::FundamentalGap => {
                format!("!({}) & {} & {}", b.member("x"), b.member("2*x"), b.member("3*x"))
            }
            Builtin::LengthSet(m) => b.length(&format!("({m})"), "x"),
            Builtin::DeltaElem(m) => {
                let m = format!("({m})");
                let (y1, y2, y) = (b.var("y"), b.var("y"), b.var("y"));
                format!(
                    "E {y1} {y2} ({} & {} & {y1} < {y2} & x = {y2} - {y1} & A {y} ({} -> ({y} <= {y1} | {y} >= {y2})))",
                    b.length(&m, &y1),
                    b.length(&m, &y2),
                    b.length(&m, &y)
                )
            }
            Builtin::Apery => {
                let m = b.var("m");
                let is_mult: Vec<String> = b.gens.iter().map(|g| format!("{m} <= {g}")).collect();
                let one_of: Vec<String> = b.gens.iter().map(|g| format!("{m} = {g}")).collect();
                format!(
                    "{} & E {m} ({m} >= 1 & {} & ({}) & !({}))",
                    b.member("x"),
                    is_mult.join(" & "),
                    one_of.join(" | "),
                    b.member(&format!("x - {m}"))
                )
            }
        };
        parse_formula(&text)
    }
}

struct TextBuilder {
    gens: Vec<String>,
    fresh: usize,
}

impl TextBuilder {
    fn var(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("_{stem}{}", self.fresh)
    }

    fn vars(&mut self, stem: &str) -> Vec<String> {
        (0..self.gens.len()).map(|_| self.var(stem)).collect()
    }

    fn weighted(&self, zs: &[String]) -> String {
        let parts: Vec<String> = self.gens.iter().zip(zs).map(|(g, z)| format!("{g}*{z}")).collect();
        parts.join(" + ")
    }

    /// `t` is a nonnegative combination of the generators.
    fn member(&mut self, t: &str) -> String {
        let zs = self.vars("z");
        let nonneg: Vec<String> = zs.iter().map(|z| format!("{z} >= 0")).collect();
        format!("(E {} ({} & {} = ({t})))", zs.join(" "), nonneg.join(" & "), self.weighted(&zs))
    }

    /// `t` is an integer combination of the generators, with coefficients
    /// at most `k * sum(g)` in absolute value. Every `t` with `|t| <= max(g)`
    /// in the lattice has such a representation.
    fn combination(&mut self, t: &str) -> String {
        let ws = self.vars("w");
        let k = self.gens.len();
        let sum = self.gens.join(" + ");
        let boxed: Vec<String> = ws.iter().map(|w| format!("{w} <= {k}*({sum}) & {w} >= -{k}*({sum})")).collect();
        format!("(E {} ({} & {} = ({t})))", ws.join(" "), boxed.join(" & "), self.weighted(&ws))
    }

    /// `t` is a gap and the next `g_1` integers are members.
    fn frobenius(&mut self, t: &str) -> String {
        let y = self.var("y");
        let g = &self.gens[0].clone();
        format!("!{} & (A {y} (({y} > {t} & {y} <= {t} + {g}) -> {}))", self.member(t), self.member(&y))
    }

    /// `len` is the length of some factorization of `m`.
    fn length(&mut self, m: &str, len: &str) -> String {
        let zs = self.vars("z");
        let nonneg: Vec<String> = zs.iter().map(|z| format!("{z} >= 0")).collect();
        format!(
            "(E {} ({} & {} = {m} & {} = {len}))",
            zs.join(" "),
            nonneg.join(" & "),
            self.weighted(&zs),
            zs.join(" + ")
        )
    }
}

impl FromStr for Builtin {
    type Err = PresburgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let unknown = || PresburgerError::UnknownBuiltin(s.to_string());
        if let Some((name, rest)) = s.split_once('(') {
            let arg = rest.strip_suffix(')').ok_or_else(unknown)?;
            let m: PolynomialZ = arg.parse().map_err(|_| unknown())?;
            return match name.trim() {
                "length_set" => Ok(Builtin::LengthSet(m)),
                "delta_elem" => Ok(Builtin::DeltaElem(m)),
                _ => Err(unknown()),
            };
        }
        Ok(match s {
            "member" => Builtin::Member,
            "gcd" => Builtin::Gcd,
            "frobenius" => Builtin::Frobenius,
            "pf" => Builtin::PseudoFrobenius,
            "symmetric" => Builtin::Symmetric,
            "fundamental_gap" => Builtin::FundamentalGap,
            "apery" => Builtin::Apery,
            _ => return Err(unknown()),
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Member => write!(f, "member"),
            Builtin::Gcd => write!(f, "gcd"),
            Builtin::Frobenius => write!(f, "frobenius"),
            Builtin::PseudoFrobenius => write!(f, "pf"),
            Builtin::Symmetric => write!(f, "symmetric"),
            Builtin::FundamentalGap => write!(f, "fundamental_gap"),
            Builtin::LengthSet(m) => write!(f, "length_set({m})"),
            Builtin::DeltaElem(m) => write!(f, "delta_elem({m})"),
            Builtin::Apery => write!(f, "apery"),
        }
    }
}

pub fn builtin_formula(name: &str, fam: &ParametricFamily) -> Result<Formula, PresburgerError> {
    name.parse::<Builtin>()?.formula(fam)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::factor::{delta_of_element, length_set};
    use crate::numsg::SemigroupView;
    use crate::presburger::{define_set, eval};

    fn fam(s: &str) -> ParametricFamily {
        ParametricFamily::numerical_from_str(s).unwrap()
    }

    fn xs(f: &Formula, n: u64, w: u64) -> BTreeSet<i64> {
        define_set(f, n, &["x"], Some(w)).unwrap().tuples.into_iter().map(|t| t[0]).collect()
    }

    fn set(v: impl IntoIterator<Item = i64>) -> BTreeSet<i64> {
        v.into_iter().collect()
    }

    #[test]
    fn names_parse() {
        for name in ["member", "gcd", "frobenius", "pf", "symmetric", "fundamental_gap", "apery"] {
            assert_eq!(name.parse::<Builtin>().unwrap().to_string(), name);
        }
        assert_eq!("length_set(60)".parse::<Builtin>().unwrap(), Builtin::LengthSet(PolynomialZ::constant(60)));
        assert_eq!("delta_elem(2n+1)".parse::<Builtin>().unwrap().to_string(), "delta_elem(2n+1)");
        assert!(matches!("mystery".parse::<Builtin>(), Err(PresburgerError::UnknownBuiltin(_))));
        assert!(builtin_formula("member", &ParametricFamily::parse_inline("1;0, 0;1").unwrap()).is_err());
    }

    #[test]
    fn member_matches_semigroup() {
        let f = builtin_formula("member", &fam("3, 5, 7")).unwrap();
        let s = SemigroupView::build(&[3, 5, 7]).unwrap();
        let want = set((0..=20).filter(|&x| s.contains(x as u64)));
        let got = define_set(&f, 0, &["x"], Some(20)).unwrap();
        assert!(got.exact);
        assert_eq!(got.tuples.into_iter().map(|t| t[0]).collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn small_fixtures() {
        let f23 = fam("2, 3");
        assert_eq!(xs(&builtin_formula("frobenius", &f23).unwrap(), 0, 12), set([1]));
        assert_eq!(xs(&builtin_formula("fundamental_gap", &f23).unwrap(), 0, 12), set([1]));
        assert_eq!(xs(&builtin_formula("gcd", &fam("4, 6")).unwrap(), 0, 12), set([2]));
        assert_eq!(xs(&builtin_formula("pf", &fam("1")).unwrap(), 0, 8), set([-1]));
        let sym = builtin_formula("symmetric", &f23).unwrap();
        assert!(eval(&sym, 0, &[], Some(12)).unwrap().value);
        let not_sym = builtin_formula("symmetric", &fam("3, 4, 5")).unwrap();
        assert!(!eval(&not_sym, 0, &[], Some(20)).unwrap().value);
    }

    #[test]
    fn parametric_evaluation() {
        // <n+3, n+5, n+7> at n = 2 is <5, 7, 9>.
        let f = builtin_formula("frobenius", &fam("n+3, n+5, n+7")).unwrap();
        let s = SemigroupView::build(&[5, 7, 9]).unwrap();
        assert_eq!(xs(&f, 2, 40), set([s.frobenius().unwrap()]));
    }

    #[test]
    fn factorization_builtins() {
        let g = fam("6, 9, 20");
        let s = SemigroupView::build(&[6, 9, 20]).unwrap();
        let ls = builtin_formula("length_set(60)", &g).unwrap();
        let got = define_set(&ls, 0, &["x"], Some(12)).unwrap();
        assert!(got.exact);
        assert_eq!(
            got.tuples.into_iter().map(|t| t[0] as u64).collect::<Vec<_>>(),
            length_set(&s, 60)
        );
        let de = builtin_formula("delta_elem(60)", &g).unwrap();
        let got = define_set(&de, 0, &["x"], Some(12)).unwrap();
        assert!(got.exact);
        assert_eq!(
            got.tuples.into_iter().map(|t| t[0] as u64).collect::<Vec<_>>(),
            delta_of_element(&s, 60)
        );
    }

    #[test]
    fn apery_set() {
        let s = SemigroupView::build(&[3, 5, 7]).unwrap();
        let f = builtin_formula("apery", &fam("3, 5, 7")).unwrap();
        let got = define_set(&f, 0, &["x"], Some(20)).unwrap();
        assert!(got.exact);
        let want: BTreeSet<i64> = s.apery_set(3).unwrap().into_iter().map(|w| w as i64).collect();
        assert_eq!(got.tuples.into_iter().map(|t| t[0]).collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn render_round_trip() {
        let g = fam("n^2+1, n^2+n+1, 2n+3");
        for name in ["member", "gcd", "frobenius", "pf", "symmetric", "fundamental_gap", "length_set(4n)", "delta_elem(7)", "apery"] {
            let f = builtin_formula(name, &g).unwrap();
            assert_eq!(parse_formula(&f.render()).unwrap(), f, "{name}");
        }
    }
}
