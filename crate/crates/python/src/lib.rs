use growthforge_core::coder::{self, WordCount};
use growthforge_core::estimator::{self, FiniteSystem, GrowthSample, Method};
use growthforge_core::flexibility::{self, ConstructionPlan};
use growthforge_core::growth::{self, GrowthConfig};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(slack: Option<&str>) -> PyResult<GrowthConfig> {
    match slack {
        None => Ok(GrowthConfig::default()),
        Some(s) => Ok(GrowthConfig::with_slack(
            growth::parse_big_rational(s).map_err(err)?,
        )),
    }
}

/// An order-of-growth representative: a formula or a finite table.
#[pyclass(name = "Growth", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrowth {
    inner: growth::Growth,
}

#[pymethods]
impl PyGrowth {
    /// Parses the JSON spec used by the command line.
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        Ok(PyGrowth {
            inner: growth::parse_growth_spec(spec).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (t, s = 0, u = 0, r = "0"))]
    fn polylog(t: &str, s: i64, u: i64, r: &str) -> PyResult<Self> {
        let t = growth::parse_rational(t).map_err(err)?;
        let r = growth::parse_rational(r).map_err(err)?;
        let e = growth::GrowthExpr::new(t, s.into(), u.into(), r).map_err(err)?;
        Ok(PyGrowth { inner: e.into() })
    }

    #[staticmethod]
    fn table(values: Vec<BigUint>) -> PyResult<Self> {
        let t = growth::TabulatedGrowth::from_biguints(&values).map_err(err)?;
        Ok(PyGrowth { inner: t.into() })
    }

    fn to_json(&self) -> String {
        growth::growth_to_json(&self.inner).to_string()
    }

    fn values(&self, upto: usize) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .ln_values(upto)
            .map_err(err)?
            .into_iter()
            .map(f64::exp)
            .collect())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Growth({})", self.inner)
    }
}

fn verdict_dict<'py>(py: Python<'py>, v: &growth::Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("relation", v.relation.to_string())?;
    d.set_item("c1", v.c1.as_ref().map(|c| c.to_string()))?;
    d.set_item("c2", v.c2.as_ref().map(|c| c.to_string()))?;
    d.set_item("horizon", v.horizon)?;
    d.set_item(
        "mode",
        serde_json::to_value(v.mode)
            .map_err(err)?
            .as_str()
            .map(str::to_owned),
    )?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (a, b, horizon = 160, slack = None))]
fn compare<'py>(
    py: Python<'py>,
    a: &PyGrowth,
    b: &PyGrowth,
    horizon: usize,
    slack: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let v = growth::compare(&a.inner, &b.inner, horizon, &config(slack)?).map_err(err)?;
    verdict_dict(py, &v)
}

#[pyfunction]
fn sup_pair(a: &PyGrowth, b: &PyGrowth) -> PyResult<PyGrowth> {
    Ok(PyGrowth {
        inner: growth::sup_pair(&a.inner, &b.inner).map_err(err)?,
    })
}

/// BJP constant as a string, or `None` when the property fails.
#[pyfunction]
#[pyo3(signature = (a, horizon = 160))]
fn check_bjp(a: &PyGrowth, horizon: usize) -> PyResult<Option<String>> {
    let c = growth::check_bjp(&a.inner, horizon, &GrowthConfig::default()).map_err(err)?;
    Ok(c.map(|c| c.to_string()))
}

#[pyfunction]
#[pyo3(signature = (a, m = 2, horizon = 160))]
fn check_lip(a: &PyGrowth, m: u64, horizon: usize) -> PyResult<Option<(String, String)>> {
    let c = growth::check_lip(&a.inner, m, horizon, &GrowthConfig::default()).map_err(err)?;
    Ok(c.map(|(lo, hi)| (lo.to_string(), hi.to_string())))
}

#[pyfunction]
#[pyo3(signature = (a, horizon = 160))]
fn pi_e(a: &PyGrowth, horizon: usize) -> PyResult<f64> {
    Ok(growth::pi_e(&a.inner, horizon).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (a, horizon = 160))]
fn pi_p(a: &PyGrowth, horizon: usize) -> PyResult<f64> {
    Ok(growth::pi_p(&a.inner, horizon).map_err(err)?.value)
}

/// Crossing-time sequences realizing a target class.
#[pyclass(name = "Plan", frozen)]
struct PyPlan {
    inner: ConstructionPlan,
}

#[pymethods]
impl PyPlan {
    #[getter(L)]
    fn l(&self) -> usize {
        self.inner.l
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }

    #[getter]
    fn b1(&self) -> f64 {
        self.inner.b1.to_f64().unwrap_or(f64::NAN)
    }

    #[getter]
    fn b2(&self) -> f64 {
        self.inner.b2.to_f64().unwrap_or(f64::NAN)
    }

    #[getter]
    fn e(&self) -> Vec<BigUint> {
        self.inner.e.clone()
    }

    #[getter]
    fn d(&self) -> Vec<BigUint> {
        self.inner.d.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "Plan(target={}, L={}, horizon={})",
            self.inner.target, self.inner.l, self.inner.horizon
        )
    }
}

#[pyfunction]
#[pyo3(signature = (target, horizon = 160, L = None, slack = None))]
#[allow(non_snake_case)]
fn build_plan(
    target: &PyGrowth,
    horizon: usize,
    L: Option<usize>,
    slack: Option<&str>,
) -> PyResult<PyPlan> {
    let cfg = config(slack)?;
    let l = match L {
        Some(l) => l,
        None => flexibility::choose_l(&target.inner, horizon, &cfg).map_err(err)?,
    };
    Ok(PyPlan {
        inner: flexibility::build_sequences(&target.inner, l, horizon, &cfg).map_err(err)?,
    })
}

fn counts_of(
    plan: &PyPlan,
    horizon: Option<usize>,
    k1_max: Option<u64>,
    strict: bool,
) -> PyResult<WordCount> {
    let horizon = horizon.unwrap_or(plan.inner.horizon);
    let k1_max = k1_max.unwrap_or(horizon as u64);
    coder::count_words(&plan.inner, horizon, k1_max, strict).map_err(err)
}

/// Exact number of distinct coding words of each length `1..=horizon`.
#[pyfunction]
#[pyo3(signature = (plan, horizon = None, k1_max = None, strict = true))]
fn count_words(
    plan: &PyPlan,
    horizon: Option<usize>,
    k1_max: Option<u64>,
    strict: bool,
) -> PyResult<Vec<BigUint>> {
    Ok(counts_of(plan, horizon, k1_max, strict)?.values)
}

/// Counts against the target on the syndetic set, as a dict.
#[pyfunction]
#[pyo3(signature = (plan, horizon = None, k1_max = None))]
fn verify<'py>(
    py: Python<'py>,
    plan: &PyPlan,
    horizon: Option<usize>,
    k1_max: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let counts = counts_of(plan, horizon, k1_max, true)?;
    let report = coder::verify_syndetic_bounds(
        &plan.inner,
        &counts,
        counts.horizon(),
        &GrowthConfig::default(),
    )
    .map_err(err)?;
    let sandwich = coder::check_sandwich(&plan.inner, &counts);
    let d = verdict_dict(py, &report.verdict)?;
    d.set_item("d1", report.d1.to_f64())?;
    d.set_item("d2", report.d2.to_f64())?;
    d.set_item("trend", report.trend)?;
    d.set_item("sandwich", sandwich.holds())?;
    d.set_item("passed", report.passed() && sandwich.holds())?;
    Ok(d)
}

#[pyfunction]
fn translation_toy(horizon: usize) -> PyResult<Vec<BigUint>> {
    Ok(coder::translation_toy(horizon).map_err(err)?.values)
}

fn system(name: &str) -> PyResult<FiniteSystem> {
    let parts: Vec<&str> = name.split(':').collect();
    let size = |i: usize| -> PyResult<usize> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PyValueError::new_err(format!("bad system {name}")))
    };
    match parts[0] {
        "doubling" => Ok(FiniteSystem::doubling_grid(size(1)?)),
        "rotation" => Ok(FiniteSystem::rotation(
            size(1)?,
            if parts.len() > 2 { size(2)? } else { 1 },
        )),
        "identity" => Ok(FiniteSystem::identity(size(1)?)),
        _ => FiniteSystem::from_json_str(name).map_err(err),
    }
}

/// Entropy estimate for a built-in system (`doubling:M`, `rotation:M[:S]`,
/// `identity:M`) or a system given as JSON text.
#[pyfunction]
#[pyo3(signature = (sys, method = "separated", horizon = 16, rungs = estimator::DEFAULT_RUNGS))]
fn estimate<'py>(
    py: Python<'py>,
    sys: &str,
    method: &str,
    horizon: usize,
    rungs: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let sys = system(sys)?;
    let method = match method {
        "separated" => Method::Separated,
        "spanning" => Method::Spanning,
        other => return Err(PyValueError::new_err(format!("unknown method {other}"))),
    };
    let sample = GrowthSample::sample(&sys, method, &sys.ladder(rungs), horizon).map_err(err)?;
    let est = estimator::estimate_class(&sample, &GrowthConfig::default()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("label", est.label.map(|l| l.to_string()))?;
    d.set_item("h", est.h.value)?;
    d.set_item("h_pol", est.h_pol.value)?;
    d.set_item("horizon", est.horizon)?;
    Ok(d)
}

/// Runs the command line with `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    growthforge_core::cli::run(std::iter::once("growthforge".to_string()).chain(args))
}

#[pymodule]
fn growthforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrowth>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(sup_pair, m)?)?;
    m.add_function(wrap_pyfunction!(check_bjp, m)?)?;
    m.add_function(wrap_pyfunction!(check_lip, m)?)?;
    m.add_function(wrap_pyfunction!(pi_e, m)?)?;
    m.add_function(wrap_pyfunction!(pi_p, m)?)?;
    m.add_function(wrap_pyfunction!(build_plan, m)?)?;
    m.add_function(wrap_pyfunction!(count_words, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(translation_toy, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
