use std::collections::HashMap;

use eqpsg::factor::{delta_of_element, delta_set, factorizations, length_set};
use eqpsg::homology::{coarse_betti_numerical, minimal_presentation_size, verify_bresinsky};
use eqpsg::presburger::{builtin_formula, define_set, eval, parse_formula};
use eqpsg::sweep::Value;
use eqpsg::{FieldSpec, Invariant, ParametricFamily, PolynomialZ, SampleSeries, SemigroupView, SweepOptions};
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(name: &str) -> PyResult<FieldSpec> {
    name.parse().map_err(err)
}

#[pyclass(name = "Semigroup", module = "eqpsg", frozen)]
struct PySemigroup {
    inner: SemigroupView,
}

#[pymethods]
impl PySemigroup {
    #[new]
    fn new(gens: Vec<u64>) -> PyResult<Self> {
        Ok(Self { inner: SemigroupView::build(&gens).map_err(err)? })
    }

    #[getter]
    fn gens(&self) -> Vec<u64> {
        self.inner.gens().to_vec()
    }

    #[getter]
    fn gcd(&self) -> u64 {
        self.inner.gcd()
    }

    #[getter]
    fn multiplicity(&self) -> u64 {
        self.inner.multiplicity()
    }

    fn is_numerical(&self) -> bool {
        self.inner.is_numerical()
    }

    fn normalized(&self) -> Self {
        Self { inner: self.inner.normalized() }
    }

    fn __contains__(&self, t: i64) -> bool {
        self.inner.contains_i64(t)
    }

    fn frobenius(&self) -> PyResult<i64> {
        self.inner.frobenius().map_err(err)
    }

    fn genus(&self) -> PyResult<u64> {
        self.inner.genus().map_err(err)
    }

    fn gaps(&self) -> PyResult<Vec<u64>> {
        self.inner.gaps().map_err(err)
    }

    /// Apéry set with respect to `x`, the multiplicity by default.
    #[pyo3(signature = (x=None))]
    fn apery(&self, x: Option<u64>) -> PyResult<Vec<u64>> {
        self.inner.apery_set(x.unwrap_or(self.inner.multiplicity())).map_err(err)
    }

    fn pseudo_frobenius(&self) -> PyResult<Vec<i64>> {
        self.inner.pseudo_frobenius().map_err(err)
    }

    #[pyo3(name = "type")]
    fn semigroup_type(&self) -> PyResult<usize> {
        self.inner.semigroup_type().map_err(err)
    }

    fn is_symmetric(&self) -> PyResult<bool> {
        self.inner.is_symmetric().map_err(err)
    }

    fn is_irreducible(&self) -> PyResult<bool> {
        self.inner.is_irreducible().map_err(err)
    }

    fn fundamental_gaps(&self) -> PyResult<Vec<u64>> {
        self.inner.fundamental_gaps().map_err(err)
    }

    fn factorizations(&self, m: u64) -> PyResult<Vec<Vec<u64>>> {
        Ok(factorizations(&self.inner, m).map_err(err)?.into_iter().map(|f| f.coeffs).collect())
    }

    fn length_set(&self, m: u64) -> Vec<u64> {
        length_set(&self.inner, m)
    }

    fn delta(&self, m: u64) -> Vec<u64> {
        delta_of_element(&self.inner, m)
    }

    fn delta_set(&self) -> PyResult<Vec<u64>> {
        delta_set(&self.inner).map_err(err)
    }

    #[pyo3(signature = (i=1, field="q"))]
    fn betti(&self, i: usize, field: &str) -> PyResult<usize> {
        Ok(coarse_betti_numerical(self.inner.gens(), i, self::field(field)?).map_err(err)?.value)
    }

    fn presentation_size(&self) -> PyResult<usize> {
        minimal_presentation_size(self.inner.gens()).map_err(err)
    }

    fn __repr__(&self) -> String {
        let g: Vec<String> = self.inner.gens().iter().map(u64::to_string).collect();
        format!("Semigroup([{}])", g.join(", "))
    }
}

#[pyclass(name = "Family", module = "eqpsg", frozen)]
struct PyFamily {
    inner: ParametricFamily,
}

fn cell(py: Python<'_>, v: Option<Value>) -> PyResult<Py<PyAny>> {
    Ok(match v {
        None => py.None(),
        Some(Value::Int(x)) => x.into_pyobject(py)?.into_any().unbind(),
        Some(Value::Flag(b)) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
    })
}

#[pymethods]
impl PyFamily {
    /// Inline generators such as `"n+3, n+5, n+7"`; `;` separates coordinates.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ParametricFamily::parse_inline(text).map_err(err)? })
    }

    #[staticmethod]
    fn from_file_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ParametricFamily::parse_file(text).map_err(err)? })
    }

    #[staticmethod]
    fn bresinsky(d: usize) -> Self {
        Self { inner: ParametricFamily::bresinsky(d) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn degrees(&self) -> Vec<i64> {
        self.inner.degrees()
    }

    fn instantiate(&self, n: u64) -> PyResult<Vec<Vec<u64>>> {
        self.inner.instantiate(n).map_err(err)
    }

    /// One dict per `n` with keys `n`, `generators` and the invariant names.
    #[pyo3(signature = (n_lo, n_hi, invariants="frobenius,genus,type", field="q", delta_bound=None, degree_cap=None, normalize=false, element=None))]
    #[allow(clippy::too_many_arguments)]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        n_lo: u64,
        n_hi: u64,
        invariants: &str,
        field: &str,
        delta_bound: Option<u64>,
        degree_cap: Option<u64>,
        normalize: bool,
        element: Option<&str>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let invs = Invariant::parse_list(invariants).map_err(err)?;
        let opts = SweepOptions {
            field: self::field(field)?,
            delta_bound,
            degree_cap,
            normalize,
            element: element.map(|e| e.parse::<PolynomialZ>()).transpose().map_err(err)?,
        };
        let family = &self.inner;
        let result = py.detach(|| eqpsg::sweep(family, n_lo, n_hi, &invs, &opts)).map_err(err)?;
        result
            .rows
            .iter()
            .map(|row| {
                let d = PyDict::new(py);
                d.set_item("n", row.n)?;
                d.set_item("generators", &row.generators)?;
                for (inv, c) in result.invariants.iter().zip(&row.cells) {
                    d.set_item(inv.to_string(), cell(py, c.value)?)?;
                }
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Family({:?})", self.inner.label())
    }
}

#[pyclass(name = "QuasiPolynomial", module = "eqpsg", frozen)]
struct PyQuasiPolynomial {
    inner: eqpsg::QuasiPolynomial,
}

#[pymethods]
impl PyQuasiPolynomial {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v = text.parse().map_err(err)?;
        Ok(Self { inner: eqpsg::QuasiPolynomial::from_json(&v).map_err(err)? })
    }

    #[getter]
    fn period(&self) -> usize {
        self.inner.period
    }

    #[getter]
    fn onset(&self) -> u64 {
        self.inner.onset
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree
    }

    /// Coefficients per residue class as `fractions.Fraction`, constant term first.
    #[getter]
    fn classes(&self) -> Vec<Vec<BigRational>> {
        self.inner.classes.clone()
    }

    fn __call__(&self, n: u64) -> PyResult<BigRational> {
        self.inner.eval(n).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("QuasiPolynomial({})", self.inner)
    }
}

/// Fits `values[k]`, the sample at `n_lo + k`; `None` marks an undefined point.
#[pyfunction]
#[pyo3(signature = (values, n_lo=0, pmax=12, dmax=3, holdout=0.2))]
fn fit(values: Vec<Option<BigInt>>, n_lo: u64, pmax: usize, dmax: usize, holdout: f64) -> PyResult<PyQuasiPolynomial> {
    let series = SampleSeries::new(n_lo, values);
    Ok(PyQuasiPolynomial { inner: eqpsg::fit(&series, pmax, dmax, holdout).map_err(err)? })
}

#[pyclass(name = "Formula", module = "eqpsg", frozen)]
struct PyFormula {
    inner: eqpsg::Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_formula(text).map_err(err)? })
    }

    #[staticmethod]
    fn builtin(name: &str, family: &PyFamily) -> PyResult<Self> {
        Ok(Self { inner: builtin_formula(name, &family.inner).map_err(err)? })
    }

    #[getter]
    fn free_vars(&self) -> Vec<String> {
        self.inner.free_vars().into_iter().collect()
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    /// Returns `(value, exact)`.
    #[pyo3(signature = (n=0, assignment=None, window=None))]
    fn eval(&self, n: u64, assignment: Option<HashMap<String, i64>>, window: Option<u64>) -> PyResult<(bool, bool)> {
        let a = assignment.unwrap_or_default();
        let pairs: Vec<(&str, i64)> = a.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let e = eval(&self.inner, n, &pairs, window).map_err(err)?;
        Ok((e.value, e.exact))
    }

    /// Returns `(tuples, exact)` over the box `[-window, window]^k`.
    #[pyo3(signature = (variables, n=0, window=None))]
    fn define_set(&self, variables: Vec<String>, n: u64, window: Option<u64>) -> PyResult<(Vec<Vec<i64>>, bool)> {
        let vars: Vec<&str> = variables.iter().map(String::as_str).collect();
        let s = define_set(&self.inner, n, &vars, window).map_err(err)?;
        Ok((s.tuples.into_iter().collect(), s.exact))
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }
}

/// Checks the lower bound for the four-generated family at `(d, n)`.
#[pyfunction]
#[pyo3(signature = (d, n, coarse=false))]
fn bresinsky<'py>(py: Python<'py>, d: u32, n: u64, coarse: bool) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| verify_bresinsky(d, n, coarse)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("generators", r.generators.gens.to_vec())?;
    out.set_item("lower_bound", r.lower_bound)?;
    out.set_item("degrees", r.degrees)?;
    out.set_item("coarse_beta1", r.coarse_beta1)?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "eqpsg")]
fn eqpsg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySemigroup>()?;
    m.add_class::<PyFamily>()?;
    m.add_class::<PyQuasiPolynomial>()?;
    m.add_class::<PyFormula>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(bresinsky, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
