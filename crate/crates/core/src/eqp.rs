//! Exact fitting of eventually quasi-polynomial sequences.
//!
//! A fit is only ever consistent with the sampled window: the onset and the
//! period are what the data supports, nothing more.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_P_MAX: usize = 12;
pub const DEFAULT_HOLDOUT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqpError {
    #[error("need at least {needed} defined points, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("no quasi-polynomial with period <= {p_max} and degree <= {d_max} fits the window")]
    NoFit { p_max: usize, d_max: usize },
    #[error("n = {n} is below the onset {onset}")]
    BelowOnset { n: u64, onset: u64 },
    #[error("no data was seen in the residue class of n = {n}")]
    UndefinedClass { n: u64 },
    #[error("invalid fit parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed quasi-polynomial JSON: {0}")]
    Json(String),
}

/// Values of an invariant on a contiguous range of `n`; `None` marks `n` where
/// the invariant is undefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSeries {
    n_lo: u64,
    values: Vec<Option<BigInt>>,
}

impl SampleSeries {
    pub fn new(n_lo: u64, values: Vec<Option<BigInt>>) -> Self {
        SampleSeries { n_lo, values }
    }

    pub fn from_fn(n_lo: u64, n_hi: u64, mut f: impl FnMut(u64) -> Option<BigInt>) -> Self {
        SampleSeries {
            n_lo,
            values: (n_lo..=n_hi).map(&mut f).collect(),
        }
    }

    pub fn n_lo(&self) -> u64 {
        self.n_lo
    }

    /// Last sampled `n`; `n_lo - 1` wraps are avoided by callers never building empty series.
    pub fn n_hi(&self) -> u64 {
        self.n_lo + self.values.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<&BigInt> {
        n.checked_sub(self.n_lo)
            .and_then(|i| self.values.get(i as usize))
            .and_then(Option::as_ref)
    }

    pub fn defined(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (self.n_lo + i as u64, v)))
    }

    pub fn undefined(&self) -> Vec<u64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| self.n_lo + i as u64)
            .collect()
    }

    /// 0/1 series recording where the invariant is defined.
    pub fn definedness(&self) -> Vec<(u64, bool)> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.n_lo + i as u64, v.is_some()))
            .collect()
    }
}

/// `f(n) = sum_j classes[n mod period][j] * n^j` for `n >= onset`. An empty
/// class marks a residue with no defined sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiPolynomial {
    pub period: usize,
    pub onset: u64,
    pub degree: usize,
    pub classes: Vec<Vec<BigRational>>,
}

impl QuasiPolynomial {
    pub fn eval(&self, n: u64) -> Result<BigRational, EqpError> {
        if n < self.onset {
            return Err(EqpError::BelowOnset { n, onset: self.onset });
        }
        let class = &self.classes[(n % self.period as u64) as usize];
        if class.is_empty() {
            return Err(EqpError::UndefinedClass { n });
        }
        Ok(horner(class, n))
    }

    /// The value at `n` when it is an integer.
    pub fn eval_integer(&self, n: u64) -> Result<Option<BigInt>, EqpError> {
        let v = self.eval(n)?;
        Ok(v.is_integer().then(|| v.to_integer()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "period": self.period,
            "onset": self.onset,
            "degree": self.degree,
            "classes": self
                .classes
                .iter()
                .map(|c| c.iter().map(rational_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, EqpError> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .ok_or_else(|| EqpError::Json(format!("missing or non-integer `{name}`")))
        };
        let period = field("period")? as usize;
        let onset = field("onset")?;
        let degree = field("degree")? as usize;
        let classes = v
            .get("classes")
            .and_then(Value::as_array)
            .ok_or_else(|| EqpError::Json("missing `classes`".into()))?
            .iter()
            .map(|c| {
                c.as_array()
                    .ok_or_else(|| EqpError::Json("class is not an array".into()))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .and_then(parse_rational)
                            .ok_or_else(|| EqpError::Json(format!("bad coefficient {s}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if period == 0 || classes.len() != period || classes.iter().any(|c| !c.is_empty() && c.len() != degree + 1) {
            return Err(EqpError::Json("shape does not match period and degree".into()));
        }
        Ok(QuasiPolynomial { period, onset, degree, classes })
    }
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "for n >= {}", self.onset)?;
        for (r, c) in self.classes.iter().enumerate() {
            if self.period > 1 {
                write!(f, "; n = {r} mod {}: ", self.period)?;
            } else {
                write!(f, ": ")?;
            }
            if c.is_empty() {
                write!(f, "undefined")?;
            } else {
                write!(f, "{}", poly_string(c))?;
            }
        }
        Ok(())
    }
}

fn poly_string(c: &[BigRational]) -> String {
    let mut out = String::new();
    for (j, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let mag = a.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag.is_integer() {
            mag.to_integer().to_string()
        } else {
            format!("({mag})")
        };
        match j {
            0 => out.push_str(&coeff),
            _ => {
                if !mag.is_one() {
                    out.push_str(&coeff);
                }
                out.push('n');
                if j > 1 {
                    out.push_str(&format!("^{j}"));
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn horner(coeffs: &[BigRational], n: u64) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(n));
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * &x + c)
}

/// Monomial coefficients of the interpolating polynomial through `pts`.
fn interpolate(pts: &[(u64, BigInt)]) -> Vec<BigRational> {
    let xs: Vec<BigRational> = pts
        .iter()
        .map(|(x, _)| BigRational::from_integer(BigInt::from(*x)))
        .collect();
    let mut dd: Vec<BigRational> = pts
        .iter()
        .map(|(_, y)| BigRational::from_integer(y.clone()))
        .collect();
    for level in 1..pts.len() {
        for i in (level..pts.len()).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Expand the Newton form from the innermost term outwards.
    let mut coeffs = vec![BigRational::zero(); pts.len()];
    for k in (0..pts.len()).rev() {
        // coeffs <- coeffs * (n - x_k) + dd[k]
        let mut next = vec![BigRational::zero(); pts.len()];
        for j in 0..pts.len() {
            if coeffs[j].is_zero() {
                continue;
            }
            if j + 1 < pts.len() {
                next[j + 1] += &coeffs[j];
            }
            next[j] -= &coeffs[j] * &xs[k];
        }
        next[0] += &dd[k];
        coeffs = next;
    }
    coeffs
}

/// Searches `(p, d)` in lexicographic order and returns the first exact fit.
///
/// The final `ceil(holdout * N)` defined points are held out. For each residue
/// class the polynomial through the last `d + 1` training points is extended
/// backwards while it agrees; the class must agree on at least `d + 2` training
/// points and on all of its held-out points. The onset is the smallest `n` from
/// which every class agrees. A class without any defined point is left
/// empty.
pub fn fit(series: &SampleSeries, p_max: usize, d_max: usize, holdout: f64) -> Result<QuasiPolynomial, EqpError> {
    if p_max == 0 {
        return Err(EqpError::InvalidParameters("p_max must be positive".into()));
    }
    if !(0.0..1.0).contains(&holdout) {
        return Err(EqpError::InvalidParameters(format!("holdout {holdout} is not in [0, 1)")));
    }
    let points: Vec<(u64, BigInt)> = series.defined().map(|(n, v)| (n, v.clone())).collect();
    let needed = (d_max + 2) * p_max;
    if points.len() < needed {
        return Err(EqpError::InsufficientData { needed, available: points.len() });
    }
    let held = (holdout * points.len() as f64).ceil() as usize;
    let (train, test) = points.split_at(points.len() - held);
    for p in 1..=p_max {
        for d in 0..=d_max {
            if let Some(qp) = try_candidate(train, test, series.n_lo(), p, d) {
                return Ok(qp);
            }
        }
    }
    Err(EqpError::NoFit { p_max, d_max })
}

fn try_candidate(
    train: &[(u64, BigInt)],
    test: &[(u64, BigInt)],
    n_lo: u64,
    p: usize,
    d: usize,
) -> Option<QuasiPolynomial> {
    let mut classes = Vec::with_capacity(p);
    let mut onset = n_lo;
    for r in 0..p as u64 {
        let cls: Vec<(u64, BigInt)> = train
            .iter()
            .filter(|(n, _)| n % p as u64 == r)
            .cloned()
            .collect();
        if cls.is_empty() && !test.iter().any(|(n, _)| n % p as u64 == r) {
            classes.push(Vec::new());
            continue;
        }
        if cls.len() < d + 2 {
            return None;
        }
        let coeffs = interpolate(&cls[cls.len() - d - 1..]);
        let matches = |(n, y): &(u64, BigInt)| horner(&coeffs, *n) == BigRational::from_integer(y.clone());
        let agreeing = cls.iter().rev().take_while(|pt| matches(pt)).count();
        if agreeing < d + 2 {
            return None;
        }
        if !test.iter().filter(|(n, _)| n % p as u64 == r).all(matches) {
            return None;
        }
        if agreeing < cls.len() {
            onset = onset.max(cls[cls.len() - agreeing - 1].0 + 1);
        }
        classes.push(coeffs);
    }
    Some(QuasiPolynomial { period: p, onset, degree: d, classes })
}

/// Highest power with a nonzero coefficient in some class.
pub fn degree_of(qp: &QuasiPolynomial) -> usize {
    qp.classes
        .iter()
        .filter_map(|c| c.iter().rposition(|a| !a.is_zero()))
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSet {
    pub period: usize,
    pub onset: u64,
    /// `pattern[r]` is membership for `n = r mod period`.
    pub pattern: Vec<bool>,
}

impl PeriodicSet {
    pub fn contains(&self, n: u64) -> Option<bool> {
        (n >= self.onset).then(|| self.pattern[(n % self.period as u64) as usize])
    }
}

pub fn eventually_periodic_set(flags: &[(u64, bool)]) -> Result<PeriodicSet, EqpError> {
    eventually_periodic_set_with(flags, DEFAULT_P_MAX, DEFAULT_HOLDOUT)
}

/// Degree-0 fit of the 0/1 indicator; `flags` must be contiguous in `n`.
pub fn eventually_periodic_set_with(flags: &[(u64, bool)], p_max: usize, holdout: f64) -> Result<PeriodicSet, EqpError> {
    let n_lo = flags.first().map_or(0, |f| f.0);
    let series = SampleSeries::new(
        n_lo,
        flags.iter().map(|&(_, b)| Some(BigInt::from(u8::from(b)))).collect(),
    );
    let qp = fit(&series, p_max, 0, holdout)?;
    Ok(PeriodicSet {
        period: qp.period,
        onset: qp.onset,
        pattern: qp.classes.iter().map(|c| c[0].is_one()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn series(lo: u64, hi: u64, f: impl Fn(u64) -> i64) -> SampleSeries {
        SampleSeries::from_fn(lo, hi, |n| Some(BigInt::from(f(n))))
    }

    #[test]
    fn squares() {
        let qp = fit(&series(0, 50, |n| (n * n) as i64), 12, 2, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree, qp.onset), (1, 2, 0));
        assert_eq!(qp.classes, vec![vec![q(0), q(0), q(1)]]);
        assert_eq!(degree_of(&qp), 2);
        assert_eq!(qp.to_string(), "for n >= 0: n^2");
    }

    #[test]
    fn quasi_linear() {
        let s = series(0, 60, |n| if n % 2 == 0 { n as i64 } else { 2 * n as i64 + 1 });
        let qp = fit(&s, 12, 3, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree, qp.onset), (2, 1, 0));
        assert_eq!(qp.classes, vec![vec![q(0), q(1)], vec![q(1), q(2)]]);
        assert_eq!(qp.eval(101).unwrap(), q(203));
        for (n, v) in s.defined() {
            assert_eq!(qp.eval_integer(n).unwrap().as_ref(), Some(v));
        }
    }

    #[test]
    fn eventual_behaviour() {
        let s = series(0, 60, |n| match n {
            0 => 7,
            1 => 3,
            2 => 9,
            _ => (n * n) as i64,
        });
        let qp = fit(&s, 12, 3, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree, qp.onset), (1, 2, 3));
        assert_eq!(qp.eval(2), Err(EqpError::BelowOnset { n: 2, onset: 3 }));
    }

    #[test]
    fn constant_and_errors() {
        let qp = fit(&series(5, 40, |_| 4), 3, 2, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree, degree_of(&qp), qp.onset), (1, 0, 0, 5));
        assert!(matches!(
            fit(&series(0, 10, |n| n as i64), 12, 3, 0.2),
            Err(EqpError::InsufficientData { needed: 60, available: 11 })
        ));
        let cubic = series(0, 80, |n| (n * n * n) as i64);
        assert_eq!(fit(&cubic, 2, 2, 0.2), Err(EqpError::NoFit { p_max: 2, d_max: 2 }));
        // Memorizing the training range is not enough: the holdout must match too.
        let kink = series(0, 80, |n| if n < 75 { n as i64 } else { 0 });
        assert!(fit(&kink, 2, 1, 0.2).is_err());
    }

    #[test]
    fn undefined_points_are_skipped() {
        let s = SampleSeries::from_fn(0, 60, |n| (n % 7 != 3).then(|| BigInt::from(3 * n + 1)));
        assert_eq!(s.undefined().len(), 9);
        let qp = fit(&s, 4, 2, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree), (1, 1));
    }

    #[test]
    fn empty_residue_classes() {
        // Defined on even n only, where n^2 / 4 + (n / 2) mod 2 has period 4.
        let s = SampleSeries::from_fn(0, 120, |n| (n % 2 == 0).then(|| BigInt::from(n * n / 4 + (n / 2) % 2)));
        let qp = fit(&s, 6, 2, 0.2).unwrap();
        assert_eq!((qp.period, qp.degree), (4, 2));
        assert!(qp.classes[1].is_empty() && qp.classes[3].is_empty());
        assert_eq!(qp.eval_integer(130).unwrap(), Some(BigInt::from(65 * 65 + 1)));
        assert_eq!(qp.eval(131), Err(EqpError::UndefinedClass { n: 131 }));
        assert!(qp.to_string().contains("n = 1 mod 4: undefined"));
        assert_eq!(QuasiPolynomial::from_json(&qp.to_json()).unwrap(), qp);
    }

    #[test]
    fn json_round_trip() {
        let qp = QuasiPolynomial {
            period: 2,
            onset: 4,
            degree: 1,
            classes: vec![
                vec![BigRational::new(1.into(), 2.into()), q(3)],
                vec![q(-2), BigRational::new((-5).into(), 3.into())],
            ],
        };
        let v = qp.to_json();
        assert_eq!(v["classes"][0][0], "1/2");
        assert_eq!(v["classes"][1][0], "-2/1");
        assert_eq!(QuasiPolynomial::from_json(&v).unwrap(), qp);
        assert!(QuasiPolynomial::from_json(&json!({"period": 2})).is_err());
    }

    #[test]
    fn periodic_sets() {
        let all: Vec<(u64, bool)> = (1..=60).map(|n| (n, true)).collect();
        let s = eventually_periodic_set(&all).unwrap();
        assert_eq!((s.period, s.pattern.clone()), (1, vec![true]));
        let odd: Vec<(u64, bool)> = (1..=60).map(|n| (n, n % 2 == 1)).collect();
        let s = eventually_periodic_set(&odd).unwrap();
        assert_eq!((s.period, s.pattern.clone()), (2, vec![false, true]));
        assert_eq!(s.contains(7), Some(true));
    }

    /// Random quasi-polynomial given per class by integer coefficients in the
    /// basis `binom((n - r) / p, j)`, which is integer valued on the class.
    #[derive(Debug, Clone)]
    struct Synthetic {
        p: u64,
        onset: u64,
        classes: Vec<Vec<i64>>,
    }

    impl Synthetic {
        fn value(&self, n: u64) -> BigInt {
            let r = n % self.p;
            let t = BigInt::from((n - r) / self.p);
            let mut binom = BigInt::one();
            let mut out = BigInt::zero();
            for (j, c) in self.classes[r as usize].iter().enumerate() {
                out += &binom * c;
                binom = binom * (&t - j) / (j + 1);
            }
            out
        }

        /// Class `r`'s polynomial evaluated at an arbitrary `n`.
        fn class_at(&self, r: u64, n: u64) -> BigRational {
            let t = BigRational::new(BigInt::from(n) - r, BigInt::from(self.p));
            let mut binom = BigRational::one();
            let mut out = BigRational::zero();
            for (j, c) in self.classes[r as usize].iter().enumerate() {
                out += &binom * BigRational::from_integer(BigInt::from(*c));
                binom = binom * (&t - BigRational::from_integer(BigInt::from(j)))
                    / BigRational::from_integer(BigInt::from(j + 1));
            }
            out
        }

        /// Smallest q | p such that classes r and r + q carry the same polynomial.
        fn minimal_period(&self) -> u64 {
            (1..=self.p)
                .filter(|q| self.p.is_multiple_of(*q))
                .find(|&q| {
                    (0..self.p).all(|r| (0..6).all(|n| self.class_at(r, n) == self.class_at((r + q) % self.p, n)))
                })
                .unwrap()
        }

        fn degree(&self) -> usize {
            self.classes
                .iter()
                .filter_map(|c| c.iter().rposition(|&a| a != 0))
                .max()
                .unwrap_or(0)
        }
    }

    fn synthetic() -> impl Strategy<Value = Synthetic> {
        (1u64..=6, 0usize..=4, 0u64..10).prop_flat_map(|(p, d, onset)| {
            prop::collection::vec(prop::collection::vec(-9i64..=9, d + 1), p as usize)
                .prop_map(move |classes| Synthetic { p, onset, classes })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(sq in synthetic(), noise in prop::collection::vec(-50i64..50, 10)) {
            let series = SampleSeries::from_fn(0, 260, |n| {
                Some(if n < sq.onset { BigInt::from(noise[n as usize]) } else { sq.value(n) })
            });
            let qp = fit(&series, 6, 4, 0.2).unwrap();
            prop_assert!(qp.onset <= sq.onset);
            prop_assert_eq!(qp.period as u64, sq.minimal_period());
            prop_assert_eq!(degree_of(&qp), sq.degree());
            for n in sq.onset..400 {
                let v = qp.eval_integer(n).unwrap();
                prop_assert_eq!(v, Some(sq.value(n)));
            }
        }
    }
}
