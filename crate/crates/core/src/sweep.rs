//! Invariant registry and sweeps of a family over a range of `n`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::eqp::SampleSeries;
use crate::factor::{delta_of_element, delta_of_semigroup, delta_set, length_set};
use crate::homology::{coarse_betti, coarse_betti_numerical, FieldSpec};
use crate::numsg::SemigroupView;
use crate::polyfam::{FamilyError, ParametricFamily, PolynomialZ};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    Frobenius,
    Genus,
    Type,
    FgCount,
    DeltaCount,
    /// `i`-th smallest element of the Apéry set with respect to the multiplicity.
    Apery(usize),
    Symmetric,
    Irreducible,
    Numerical,
    Betti(usize),
    /// `|L(m(n))|` for the element polynomial of the sweep.
    LengthCount,
    /// `|Delta(m(n))|` for the element polynomial of the sweep.
    DeltaElemCount,
}

impl Invariant {
    pub const NAMES: [&'static str; 12] = [
        "frobenius",
        "genus",
        "type",
        "fg_count",
        "delta_count",
        "apery_<i>",
        "symmetric",
        "irreducible",
        "numerical",
        "betti_<i>",
        "length_count",
        "delta_elem_count",
    ];

    /// Boolean invariants; the rest are integers.
    pub fn is_flag(self) -> bool {
        matches!(self, Invariant::Symmetric | Invariant::Irreducible | Invariant::Numerical)
    }

    fn needs_element(self) -> bool {
        matches!(self, Invariant::LengthCount | Invariant::DeltaElemCount)
    }

    /// Parses a comma-separated list.
    pub fn parse_list(text: &str) -> Result<Vec<Invariant>, Error> {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
    }
}

impl FromStr for Invariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let indexed = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)?.parse().ok().filter(|&i| i >= 1)
        };
        Ok(match s {
            "frobenius" => Invariant::Frobenius,
            "genus" => Invariant::Genus,
            "type" => Invariant::Type,
            "fg_count" => Invariant::FgCount,
            "delta_count" => Invariant::DeltaCount,
            "symmetric" => Invariant::Symmetric,
            "irreducible" => Invariant::Irreducible,
            "numerical" => Invariant::Numerical,
            "length_count" => Invariant::LengthCount,
            "delta_elem_count" => Invariant::DeltaElemCount,
            _ => {
                if let Some(i) = indexed("apery_") {
                    Invariant::Apery(i)
                } else if let Some(i) = indexed("betti_") {
                    Invariant::Betti(i)
                } else {
                    return Err(Error::UnknownInvariant(s.to_string()));
                }
            }
        })
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Invariant::Frobenius => f.write_str("frobenius"),
            Invariant::Genus => f.write_str("genus"),
            Invariant::Type => f.write_str("type"),
            Invariant::FgCount => f.write_str("fg_count"),
            Invariant::DeltaCount => f.write_str("delta_count"),
            Invariant::Apery(i) => write!(f, "apery_{i}"),
            Invariant::Symmetric => f.write_str("symmetric"),
            Invariant::Irreducible => f.write_str("irreducible"),
            Invariant::Numerical => f.write_str("numerical"),
            Invariant::Betti(i) => write!(f, "betti_{i}"),
            Invariant::LengthCount => f.write_str("length_count"),
            Invariant::DeltaElemCount => f.write_str("delta_elem_count"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Flag(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Flag(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// `None` where the invariant is undefined at this `n`.
    pub value: Option<Value>,
    /// False when the value came from a bounded search that did not reach its
    /// completeness threshold (a delta scan below its bound, an affine Betti
    /// number summed over a capped box).
    pub complete: bool,
}

impl Cell {
    fn undefined() -> Self {
        Cell { value: None, complete: true }
    }

    fn int(x: impl TryInto<i64>) -> Self {
        Cell { value: Some(Value::Int(x.try_into().ok().expect("fits in i64"))), complete: true }
    }

    fn flag(b: bool) -> Self {
        Cell { value: Some(Value::Flag(b)), complete: true }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub field: FieldSpec,
    /// Scan bound for `delta_count`; the exact algorithm is used when absent.
    pub delta_bound: Option<u64>,
    /// Box side for Betti numbers of affine (m > 1) families.
    pub degree_cap: Option<u64>,
    /// Divide by the gcd before computing numerical invariants.
    pub normalize: bool,
    /// Element polynomial for `length_count` and `delta_elem_count`.
    pub element: Option<PolynomialZ>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { field: FieldSpec::Rationals, delta_bound: None, degree_cap: None, normalize: false, element: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub n: u64,
    /// Instantiated generators, absent when some generator is not positive.
    pub generators: Option<Vec<Vec<u64>>>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub invariants: Vec<Invariant>,
    pub rows: Vec<Row>,
}

impl Sweep {
    pub fn column(&self, inv: Invariant) -> Option<usize> {
        self.invariants.iter().position(|&i| i == inv)
    }

    /// Integer column as a series for the fitter; flags become 0/1.
    pub fn series(&self, col: usize) -> SampleSeries {
        let n_lo = self.rows.first().map_or(0, |r| r.n);
        let values = self
            .rows
            .iter()
            .map(|r| {
                r.cells[col].value.map(|v| match v {
                    Value::Int(x) => BigInt::from(x),
                    Value::Flag(b) => BigInt::from(b as u8),
                })
            })
            .collect();
        SampleSeries::new(n_lo, values)
    }

    /// Defined points of a flag column.
    pub fn flags(&self, col: usize) -> Vec<(u64, bool)> {
        self.rows
            .iter()
            .filter_map(|r| match r.cells[col].value {
                Some(Value::Flag(b)) => Some((r.n, b)),
                Some(Value::Int(x)) => Some((r.n, x != 0)),
                None => None,
            })
            .collect()
    }
}

/// Evaluates every requested invariant at one `n`.
pub fn compute_row(fam: &ParametricFamily, n: u64, invariants: &[Invariant], opts: &SweepOptions) -> Result<Row, Error> {
    if invariants.iter().any(|i| i.needs_element()) && opts.element.is_none() {
        return Err(Error::MissingElement);
    }
    let generators = match fam.instantiate(n) {
        Ok(g) => g,
        Err(FamilyError::NonPositiveGenerator { .. }) => {
            return Ok(Row { n, generators: None, cells: vec![Cell::undefined(); invariants.len()] });
        }
        Err(e) => return Err(e.into()),
    };
    let cells = if fam.dim() == 1 {
        let flat: Vec<u64> = generators.iter().map(|g| g[0]).collect();
        numerical_cells(&flat, n, invariants, opts)?
    } else {
        affine_cells(&generators, invariants, opts)?
    };
    Ok(Row { n, generators: Some(generators), cells })
}

fn numerical_cells(gens: &[u64], n: u64, invariants: &[Invariant], opts: &SweepOptions) -> Result<Vec<Cell>, Error> {
    let original = SemigroupView::build(gens)?;
    let numerical = original.is_numerical();
    let view = if opts.normalize { original.normalized() } else { original.clone() };
    let usable = view.is_numerical();
    let mut out = Vec::with_capacity(invariants.len());
    for &inv in invariants {
        let cell = match inv {
            Invariant::Numerical => Cell::flag(numerical),
            Invariant::Symmetric if !usable => Cell::flag(false),
            Invariant::Irreducible if !usable => Cell::flag(false),
            Invariant::Symmetric => Cell::flag(view.is_symmetric()?),
            Invariant::Irreducible => Cell::flag(view.is_irreducible()?),
            Invariant::Betti(i) => Cell::int(coarse_betti_numerical(gens, i, opts.field)?.value),
            Invariant::LengthCount | Invariant::DeltaElemCount => {
                let m = opts.element.as_ref().expect("checked").eval_u64(n);
                match u64::try_from(m).ok().filter(|&m| view.contains(m)) {
                    None => Cell::undefined(),
                    Some(m) if inv == Invariant::LengthCount => Cell::int(length_set(&view, m).len()),
                    Some(m) => Cell::int(delta_of_element(&view, m).len()),
                }
            }
            _ if !usable => Cell::undefined(),
            Invariant::Frobenius => Cell::int(view.frobenius()?),
            Invariant::Genus => Cell::int(view.genus()?),
            Invariant::Type => Cell::int(view.semigroup_type()?),
            Invariant::FgCount => Cell::int(view.fundamental_gaps()?.len()),
            Invariant::DeltaCount => match opts.delta_bound {
                None => Cell::int(delta_set(&view)?.len()),
                Some(bound) => {
                    let scan = delta_of_semigroup(&view, bound)?;
                    Cell { complete: scan.complete, ..Cell::int(scan.values.len()) }
                }
            },
            Invariant::Apery(i) => match view.ith_apery_element(i) {
                Ok(w) => Cell::int(w),
                Err(_) => Cell::undefined(),
            },
        };
        out.push(cell);
    }
    Ok(out)
}

fn affine_cells(gens: &[Vec<u64>], invariants: &[Invariant], opts: &SweepOptions) -> Result<Vec<Cell>, Error> {
    let mut out = Vec::with_capacity(invariants.len());
    for &inv in invariants {
        let cell = match inv {
            Invariant::Numerical => Cell::flag(false),
            Invariant::Betti(i) => {
                let b = coarse_betti(gens, i, opts.field, opts.degree_cap)?;
                Cell { complete: b.complete, ..Cell::int(b.value) }
            }
            _ => Cell::undefined(),
        };
        out.push(cell);
    }
    Ok(out)
}

/// Rows for `n_lo..=n_hi`, computed in parallel over `n` and returned in order.
pub fn sweep(fam: &ParametricFamily, n_lo: u64, n_hi: u64, invariants: &[Invariant], opts: &SweepOptions) -> Result<Sweep, Error> {
    if n_lo > n_hi {
        return Err(Error::EmptyRange { n_lo, n_hi });
    }
    let rows = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| compute_row(fam, n, invariants, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep { invariants: invariants.to_vec(), rows })
}
