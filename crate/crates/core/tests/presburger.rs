use std::collections::BTreeSet;

use eqpsg::factor::{delta_of_element, length_set};
use eqpsg::numsg::SemigroupView;
use eqpsg::polyfam::ParametricFamily;
use eqpsg::presburger::{builtin_formula, define_set, eval, parse_formula};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];
const BOX: i64 = 3;

/// Reference formulas whose quantifiers always carry an explicit box `[-BOX, BOX]`.
#[derive(Debug, Clone)]
enum F {
    Le(i64, usize, i64, usize, i64),
    Not(Box<F>),
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
    Imp(Box<F>, Box<F>),
    Ex(usize, Box<F>),
    All(usize, Box<F>),
}

impl F {
    fn text(&self) -> String {
        match self {
            F::Le(a, u, b, v, c) => format!("{a}*{} + {b}*{} <= {c}", VARS[*u], VARS[*v]),
            F::Not(x) => format!("!({})", x.text()),
            F::And(a, b) => format!("({}) & ({})", a.text(), b.text()),
            F::Or(a, b) => format!("({}) | ({})", a.text(), b.text()),
            F::Imp(a, b) => format!("({}) -> ({})", a.text(), b.text()),
            F::Ex(v, x) => {
                let v = VARS[*v];
                format!("(E {v} ({v} >= -{BOX} & {v} <= {BOX} & ({})))", x.text())
            }
            F::All(v, x) => {
                let v = VARS[*v];
                format!("(A {v} (({v} >= -{BOX} & {v} <= {BOX}) -> ({})))", x.text())
            }
        }
    }

    fn holds(&self, env: &mut [i64; 3]) -> bool {
        match self {
            F::Le(a, u, b, v, c) => a * env[*u] + b * env[*v] <= *c,
            F::Not(x) => !x.holds(env),
            F::And(a, b) => a.holds(env) && b.holds(env),
            F::Or(a, b) => a.holds(env) || b.holds(env),
            F::Imp(a, b) => !a.holds(env) || b.holds(env),
            F::Ex(v, x) | F::All(v, x) => {
                let saved = env[*v];
                let mut found = matches!(self, F::All(..));
                for t in -BOX..=BOX {
                    env[*v] = t;
                    let h = x.holds(env);
                    if matches!(self, F::Ex(..)) && h {
                        found = true;
                        break;
                    }
                    if matches!(self, F::All(..)) && !h {
                        found = false;
                        break;
                    }
                }
                env[*v] = saved;
                found
            }
        }
    }
}

fn formula() -> impl Strategy<Value = F> {
    let leaf = (-3i64..=3, 0usize..3, -3i64..=3, 0usize..3, -4i64..=4).prop_map(|(a, u, b, v, c)| F::Le(a, u, b, v, c));
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| F::Not(Box::new(x))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Imp(Box::new(a), Box::new(b))),
            (0usize..3, inner.clone()).prop_map(|(v, x)| F::Ex(v, Box::new(x))),
            (0usize..3, inner).prop_map(|(v, x)| F::All(v, Box::new(x))),
        ]
    })
}

/// Unbounded variant of a random formula: same shape, quantifiers range over all of Z.
fn unboxed(f: &F) -> String {
    match f {
        F::Le(..) => f.text(),
        F::Not(x) => format!("!({})", unboxed(x)),
        F::And(a, b) => format!("({}) & ({})", unboxed(a), unboxed(b)),
        F::Or(a, b) => format!("({}) | ({})", unboxed(a), unboxed(b)),
        F::Imp(a, b) => format!("({}) -> ({})", unboxed(a), unboxed(b)),
        F::Ex(v, x) => format!("(E {} ({}))", VARS[*v], unboxed(x)),
        F::All(v, x) => format!("(A {} ({}))", VARS[*v], unboxed(x)),
    }
}

fn assignment(env: [i64; 3]) -> Vec<(&'static str, i64)> {
    VARS.iter().copied().zip(env).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn boxed_formulas_match_naive_evaluation(f in formula(), env in prop::array::uniform3(-4i64..=4)) {
        let parsed = parse_formula(&f.text()).unwrap();
        let got = eval(&parsed, 0, &assignment(env), Some(6)).unwrap();
        prop_assert!(got.exact);
        prop_assert_eq!(got.value, f.holds(&mut env.clone()));
    }

    #[test]
    fn render_parses_back(f in formula()) {
        for text in [f.text(), unboxed(&f)] {
            // Names that cancel out still take ids on the first parse, so the
            // fixed point is reached from the second round on.
            let parsed = parse_formula(&text).unwrap();
            let again = parse_formula(&parsed.render()).unwrap();
            prop_assert_eq!(&parse_formula(&again.render()).unwrap(), &again);
            for env in [[0, 1, -1], [2, -3, 1]] {
                let a = eval(&parsed, 0, &assignment(env), Some(5)).unwrap();
                let b = eval(&again, 0, &assignment(env), Some(5)).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn exact_answers_survive_a_larger_window(f in formula(), env in prop::array::uniform3(-3i64..=3)) {
        let parsed = parse_formula(&unboxed(&f)).unwrap();
        let small = eval(&parsed, 0, &assignment(env), Some(3)).unwrap();
        let large = eval(&parsed, 0, &assignment(env), Some(9)).unwrap();
        if small.exact {
            prop_assert!(large.exact);
            prop_assert_eq!(small.value, large.value);
        }
    }
}

const SEMIGROUPS: [&[u64]; 6] = [&[3, 5, 7], &[4, 6, 9], &[5, 7], &[6, 9, 20], &[4, 5, 11], &[7, 8, 9, 10]];

fn family(gens: &[u64]) -> ParametricFamily {
    let text: Vec<String> = gens.iter().map(u64::to_string).collect();
    ParametricFamily::numerical_from_str(&text.join(", ")).unwrap()
}

fn xs(name: &str, gens: &[u64], w: u64) -> BTreeSet<i64> {
    let f = builtin_formula(name, &family(gens)).unwrap();
    let set = define_set(&f, 0, &["x"], Some(w)).unwrap();
    assert!(set.exact, "{name} on {gens:?}");
    set.tuples.into_iter().map(|t| t[0]).collect()
}

#[test]
fn builtins_agree_with_direct_algorithms() {
    for gens in SEMIGROUPS {
        let s = SemigroupView::build(gens).unwrap();
        let f = s.frobenius().unwrap();
        let w = (f + 2 * *gens.iter().max().unwrap() as i64) as u64;
        let member: BTreeSet<i64> = (0..=w as i64).filter(|&x| s.contains_i64(x)).collect();
        assert_eq!(xs("member", gens, w), member, "{gens:?}");
        assert_eq!(xs("frobenius", gens, w), BTreeSet::from([f]), "{gens:?}");
        let pf: BTreeSet<i64> = s.pseudo_frobenius().unwrap().into_iter().collect();
        assert_eq!(xs("pf", gens, w), pf, "{gens:?}");
        let fg: BTreeSet<i64> = s.fundamental_gaps().unwrap().into_iter().map(|g| g as i64).collect();
        assert_eq!(xs("fundamental_gap", gens, w), fg, "{gens:?}");
        let m = s.multiplicity();
        let ap: BTreeSet<i64> = s.apery_set(m).unwrap().into_iter().map(|a| a as i64).collect();
        assert_eq!(xs("apery", gens, w), ap, "{gens:?}");
        assert_eq!(xs("gcd", gens, 4), BTreeSet::from([1]), "{gens:?}");
        let sym = builtin_formula("symmetric", &family(gens)).unwrap();
        let e = eval(&sym, 0, &[], Some(w)).unwrap();
        assert!(e.exact);
        assert_eq!(e.value, s.is_symmetric().unwrap(), "{gens:?}");
    }
}

#[test]
fn factorization_builtins_agree_with_direct_algorithms() {
    for gens in SEMIGROUPS {
        let s = SemigroupView::build(gens).unwrap();
        for m in [0u64, 30, 41, 60] {
            let ls: Vec<i64> = length_set(&s, m).into_iter().map(|l| l as i64).collect();
            let got = xs(&format!("length_set({m})"), gens, 20);
            assert_eq!(got.into_iter().collect::<Vec<_>>(), ls, "{gens:?} m={m}");
            let de: Vec<i64> = delta_of_element(&s, m).into_iter().map(|d| d as i64).collect();
            let got = xs(&format!("delta_elem({m})"), gens, 20);
            assert_eq!(got.into_iter().collect::<Vec<_>>(), de, "{gens:?} m={m}");
        }
    }
}

#[test]
fn builtins_on_a_non_numerical_semigroup() {
    let gens: &[u64] = &[4, 6, 10];
    assert_eq!(xs("gcd", gens, 12), BTreeSet::from([2]));
    assert!(xs("frobenius", gens, 30).is_empty());
    assert!(!eval(&builtin_formula("symmetric", &family(gens)).unwrap(), 0, &[], Some(30)).unwrap().value);
}
