//! Integer polynomials in the parameter `n` and parametric generator families.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("generator {index} evaluates outside N^m \\ {{0}} at n = {n}")]
    NonPositiveGenerator { n: u64, index: usize },
    #[error("generator {index} does not fit in 64 bits at n = {n}")]
    Overflow { n: u64, index: usize },
    #[error("family must have at least one generator")]
    NoGenerators,
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("generator {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("family is {dim}-dimensional; a numerical (m = 1) family is required")]
    NotNumerical { dim: usize },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Poly {
        line: usize,
        #[source]
        source: PolyError,
    },
}

/// Dense polynomial with integer coefficients; `coeffs[j]` multiplies `n^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolynomialZ {
    coeffs: Vec<BigInt>,
}

impl PolynomialZ {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The polynomial `n`.
    pub fn param() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn monomial(c: impl Into<BigInt>, exp: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); exp];
        coeffs.push(c.into());
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial at -1.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        match self.coeffs.len() {
            0 => None,
            1 => Some(&self.coeffs[0]),
            _ => None,
        }
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        match self.coeffs.len() {
            0 => Some(BigInt::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * n + c)
    }

    pub fn eval_u64(&self, n: u64) -> BigInt {
        self.eval(&BigInt::from(n))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

/// Parses `text` with the grammar `poly := term (('+'|'-') term)*`,
/// `term := [integer]['n'['^' posint]]`; whitespace is ignored.
pub fn parse_poly(text: &str) -> Result<PolynomialZ, PolyError> {
    text.parse()
}

pub fn eval_poly(p: &PolynomialZ, n: u64) -> BigInt {
    p.eval_u64(n)
}

impl FromStr for PolynomialZ {
    type Err = PolyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lexer = PolyLexer::new(text);
        let poly = lexer.poly()?;
        lexer.skip_ws();
        if let Some((pos, c)) = lexer.peek() {
            return Err(PolyError::Syntax {
                pos,
                msg: format!("unexpected character {c:?}"),
            });
        }
        Ok(poly)
    }
}

/// Cursor over polynomial text.
struct PolyLexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> PolyLexer<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.text[self.pos..].chars().next().map(|c| (self.pos, c))
    }

    fn skip_ws(&mut self) {
        while let Some((_, c)) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while let Some((_, c)) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    fn poly(&mut self) -> Result<PolynomialZ, PolyError> {
        self.skip_ws();
        let mut negate = false;
        if let Some((_, c @ ('+' | '-'))) = self.peek() {
            negate = c == '-';
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some((_, c @ ('+' | '-'))) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = if c == '+' { acc + t } else { acc - t };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolynomialZ, PolyError> {
        self.skip_ws();
        let coeff = self.digits().map(|d| d.parse::<BigInt>().expect("digits"));
        self.skip_ws();
        let has_n = matches!(self.peek(), Some((_, 'n')));
        if !has_n {
            return match coeff {
                Some(c) => Ok(PolynomialZ::constant(c)),
                None => Err(self.err("expected integer or 'n'")),
            };
        }
        self.pos += 1;
        self.skip_ws();
        let mut exp = 1usize;
        if let Some((_, '^')) = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let d = self.digits().ok_or_else(|| self.err("expected exponent"))?;
            exp = d.parse().map_err(|_| self.err("exponent too large"))?;
            if exp == 0 {
                return Err(self.err("exponent must be positive"));
            }
        }
        Ok(PolynomialZ::monomial(coeff.unwrap_or_else(BigInt::one), exp))
    }
}

impl fmt::Display for PolynomialZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            if j == 0 || !mag.is_one() {
                write!(f, "{mag}")?;
            }
            match j {
                0 => {}
                1 => write!(f, "n")?,
                _ => write!(f, "n^{j}")?,
            }
        }
        Ok(())
    }
}

impl Add for &PolynomialZ {
    type Output = PolynomialZ;
    fn add(self, rhs: &PolynomialZ) -> PolynomialZ {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigInt::zero();
        PolynomialZ::new(
            (0..len)
                .map(|j| self.coeffs.get(j).unwrap_or(&zero) + rhs.coeffs.get(j).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Add for PolynomialZ {
    type Output = PolynomialZ;
    fn add(self, rhs: PolynomialZ) -> PolynomialZ {
        &self + &rhs
    }
}

impl Neg for PolynomialZ {
    type Output = PolynomialZ;
    fn neg(self) -> PolynomialZ {
        PolynomialZ::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Neg for &PolynomialZ {
    type Output = PolynomialZ;
    fn neg(self) -> PolynomialZ {
        -self.clone()
    }
}

impl Sub for &PolynomialZ {
    type Output = PolynomialZ;
    fn sub(self, rhs: &PolynomialZ) -> PolynomialZ {
        self + &(-rhs)
    }
}

impl Sub for PolynomialZ {
    type Output = PolynomialZ;
    fn sub(self, rhs: PolynomialZ) -> PolynomialZ {
        &self - &rhs
    }
}

impl Mul for &PolynomialZ {
    type Output = PolynomialZ;
    fn mul(self, rhs: &PolynomialZ) -> PolynomialZ {
        if self.is_zero() || rhs.is_zero() {
            return PolynomialZ::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolynomialZ::new(out)
    }
}

impl Mul for PolynomialZ {
    type Output = PolynomialZ;
    fn mul(self, rhs: PolynomialZ) -> PolynomialZ {
        &self * &rhs
    }
}

/// `k` generator vectors in `m` coordinates, each coordinate a polynomial in `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricFamily {
    dim: usize,
    generators: Vec<Vec<PolynomialZ>>,
    label: String,
}

impl ParametricFamily {
    pub fn new(
        dim: usize,
        generators: Vec<Vec<PolynomialZ>>,
        label: impl Into<String>,
    ) -> Result<Self, FamilyError> {
        if dim == 0 {
            return Err(FamilyError::ZeroDimension);
        }
        if generators.is_empty() {
            return Err(FamilyError::NoGenerators);
        }
        for (index, g) in generators.iter().enumerate() {
            if g.len() != dim {
                return Err(FamilyError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: g.len(),
                });
            }
        }
        Ok(Self {
            dim,
            generators,
            label: label.into(),
        })
    }

    /// A numerical (m = 1) family.
    pub fn numerical(gens: Vec<PolynomialZ>) -> Result<Self, FamilyError> {
        let label = gens
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        Self::new(1, gens.into_iter().map(|g| vec![g]).collect(), format!("<{label}>"))
    }

    /// Parses comma-separated polynomials, e.g. `"n+3, n+5, n+7"`.
    pub fn numerical_from_str(text: &str) -> Result<Self, FamilyError> {
        Self::parse_inline(text)
    }

    /// The Bresinsky-type family with generators `4n^d - 2n^(d/2)`,
    /// `4n^d - 1`, `4n^d + 2n^(d/2)`, `4n^d + 4n^(d/2) - 1`.
    pub fn bresinsky(d: usize) -> Self {
        let h = d / 2;
        let top = PolynomialZ::monomial(4, d);
        let gens = vec![
            &top - &PolynomialZ::monomial(2, h),
            &top - &PolynomialZ::constant(1),
            &top + &PolynomialZ::monomial(2, h),
            &(&top + &PolynomialZ::monomial(4, h)) - &PolynomialZ::constant(1),
        ];
        let mut fam = Self::numerical(gens).expect("four generators");
        fam.label = format!("bresinsky(d={d})");
        fam
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<PolynomialZ>] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Degree of each generator: the maximum coordinate degree.
    pub fn degrees(&self) -> Vec<i64> {
        self.generators
            .iter()
            .map(|g| g.iter().map(PolynomialZ::degree).max().unwrap_or(-1))
            .collect()
    }

    pub fn instantiate(&self, n: u64) -> Result<Vec<Vec<u64>>, FamilyError> {
        let nb = BigInt::from(n);
        self.generators
            .iter()
            .enumerate()
            .map(|(index, g)| {
                let v = g
                    .iter()
                    .map(|p| {
                        let x = p.eval(&nb);
                        if x.is_negative() {
                            return Err(FamilyError::NonPositiveGenerator { n, index });
                        }
                        x.to_u64().ok_or(FamilyError::Overflow { n, index })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if v.iter().all(|&x| x == 0) {
                    return Err(FamilyError::NonPositiveGenerator { n, index });
                }
                Ok(v)
            })
            .collect()
    }

    /// Instantiates an m = 1 family as a list of positive integers.
    pub fn instantiate_numerical(&self, n: u64) -> Result<Vec<u64>, FamilyError> {
        if self.dim != 1 {
            return Err(FamilyError::NotNumerical { dim: self.dim });
        }
        Ok(self.instantiate(n)?.into_iter().map(|v| v[0]).collect())
    }

    /// Parses the family file format: a `dim m` line followed by one line per
    /// generator with `m` semicolon-separated polynomials. `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self, FamilyError> {
        let mut dim = None;
        let mut gens = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some(m) = dim else {
                let rest = line.strip_prefix("dim").ok_or_else(|| FamilyError::Format {
                    line: line_no,
                    msg: "expected `dim m` header".into(),
                })?;
                let m: usize = rest.trim().parse().map_err(|_| FamilyError::Format {
                    line: line_no,
                    msg: format!("bad dimension {:?}", rest.trim()),
                })?;
                if m == 0 {
                    return Err(FamilyError::ZeroDimension);
                }
                dim = Some(m);
                continue;
            };
            let coords = line
                .split(';')
                .map(|s| {
                    s.parse::<PolynomialZ>().map_err(|source| FamilyError::Poly {
                        line: line_no,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if coords.len() != m {
                return Err(FamilyError::Format {
                    line: line_no,
                    msg: format!("expected {m} coordinates, found {}", coords.len()),
                });
            }
            gens.push(coords);
        }
        let dim = dim.ok_or(FamilyError::Format {
            line: 0,
            msg: "missing `dim m` header".into(),
        })?;
        let label = gens
            .iter()
            .map(|g| g.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"))
            .collect::<Vec<_>>()
            .join(", ");
        Self::new(dim, gens, format!("<{label}>"))
    }

    /// Parses the inline form: generators separated by `,`, coordinates by `;`.
    pub fn parse_inline(text: &str) -> Result<Self, FamilyError> {
        let gens = text
            .split(',')
            .map(|g| {
                g.split(';')
                    .map(|s| {
                        s.parse::<PolynomialZ>()
                            .map_err(|source| FamilyError::Poly { line: 1, source })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dim = gens.first().map_or(0, Vec::len);
        let label = text.split(',').map(str::trim).collect::<Vec<_>>().join(", ");
        Self::new(dim, gens, format!("<{label}>"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PolynomialZ {
        s.parse().unwrap()
    }

    #[test]
    fn parses_examples() {
        assert_eq!(p("4n^2-2n"), PolynomialZ::from_i64s(&[0, -2, 4]));
        assert_eq!(p("0"), PolynomialZ::zero());
        assert!(p("0").coeffs().is_empty());
        assert_eq!(p("n+3"), PolynomialZ::from_i64s(&[3, 1]));
        assert_eq!(p("-1+4n^2"), PolynomialZ::from_i64s(&[-1, 0, 4]));
        assert_eq!(p(" 4 n ^ 2 - 2 n "), PolynomialZ::from_i64s(&[0, -2, 4]));
        assert_eq!(p("7"), PolynomialZ::constant(7));
        assert_eq!(p("n-n"), PolynomialZ::zero());
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            "4n^".parse::<PolynomialZ>().unwrap_err(),
            PolyError::Syntax {
                pos: 3,
                msg: "expected exponent".into()
            }
        );
        assert!(matches!("3x".parse::<PolynomialZ>(), Err(PolyError::Syntax { pos: 1, .. })));
        assert!("".parse::<PolynomialZ>().is_err());
        assert!("n^0".parse::<PolynomialZ>().is_err());
        assert!("2++n".parse::<PolynomialZ>().is_err());
    }

    #[test]
    fn big_coefficients_are_exact() {
        let q = p("123456789012345678901234567890n^3+1");
        assert_eq!(
            q.eval_u64(10).to_string(),
            "123456789012345678901234567890001"
        );
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(eval_poly(&PolynomialZ::from_i64s(&[0, -2, 4]), 2), BigInt::from(12));
        assert_eq!(eval_poly(&PolynomialZ::zero(), 17), BigInt::zero());
        assert_eq!(eval_poly(&PolynomialZ::from_i64s(&[-1, 0, 4]), 2), BigInt::from(15));
    }

    #[test]
    fn degree_convention() {
        assert_eq!(PolynomialZ::zero().degree(), -1);
        assert_eq!(p("5").degree(), 0);
        assert_eq!(p("4n^2-2n").degree(), 2);
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(p("4n^2-2n").to_string(), "4n^2-2n");
        assert_eq!(p("-1+4n^2").to_string(), "4n^2-1");
        assert_eq!(p("-n").to_string(), "-n");
        assert_eq!(p("0").to_string(), "0");
    }

    #[test]
    fn instantiates_bresinsky() {
        let fam = ParametricFamily::bresinsky(2);
        assert_eq!(fam.instantiate_numerical(2).unwrap(), vec![12, 15, 20, 23]);
        assert_eq!(fam.degrees(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn instantiates_shifted() {
        let fam = ParametricFamily::numerical_from_str("n+3, n+5, n+7").unwrap();
        assert_eq!(fam.instantiate_numerical(0).unwrap(), vec![3, 5, 7]);
    }

    #[test]
    fn rejects_negative_and_zero_generators() {
        let fam = ParametricFamily::numerical_from_str("n+1, n-5").unwrap();
        assert_eq!(
            fam.instantiate_numerical(3),
            Err(FamilyError::NonPositiveGenerator { n: 3, index: 1 })
        );
        assert_eq!(
            fam.instantiate_numerical(5),
            Err(FamilyError::NonPositiveGenerator { n: 5, index: 1 })
        );
        let fam = ParametricFamily::parse_inline("n;0, 1;n").unwrap();
        assert_eq!(
            fam.instantiate(0),
            Err(FamilyError::NonPositiveGenerator { n: 0, index: 0 })
        );
        assert_eq!(fam.instantiate(2).unwrap(), vec![vec![2, 0], vec![1, 2]]);
    }

    #[test]
    fn parses_family_file() {
        let text = "# shifted\ndim 2\nn+1; 0  # first\n0; n+2\n\n1;1\n";
        let fam = ParametricFamily::parse_file(text).unwrap();
        assert_eq!(fam.dim(), 2);
        assert_eq!(fam.num_generators(), 3);
        assert_eq!(fam.instantiate(1).unwrap(), vec![vec![2, 0], vec![0, 3], vec![1, 1]]);
        assert!(matches!(
            ParametricFamily::parse_file("dim 2\nn\n"),
            Err(FamilyError::Format { line: 2, .. })
        ));
        assert!(matches!(
            ParametricFamily::parse_file("n+1\n"),
            Err(FamilyError::Format { line: 1, .. })
        ));
        assert!(matches!(
            ParametricFamily::parse_file("dim 1\nn+\n"),
            Err(FamilyError::Poly { line: 2, .. })
        ));
    }

    fn small_poly() -> impl Strategy<Value = PolynomialZ> {
        prop::collection::vec(-20i64..20, 0..5).prop_map(|c| PolynomialZ::from_i64s(&c))
    }

    proptest! {
        #[test]
        fn render_round_trips(q in small_poly()) {
            prop_assert_eq!(q.to_string().parse::<PolynomialZ>().unwrap(), q);
        }

        #[test]
        fn eval_is_a_ring_homomorphism(a in small_poly(), b in small_poly(), n in 0u64..50) {
            prop_assert_eq!((&a + &b).eval_u64(n), a.eval_u64(n) + b.eval_u64(n));
            prop_assert_eq!((&a - &b).eval_u64(n), a.eval_u64(n) - b.eval_u64(n));
            prop_assert_eq!((&a * &b).eval_u64(n), a.eval_u64(n) * b.eval_u64(n));
        }
    }
}
