//! Python bindings for the central-value library.
//!
//! Build with `maturin develop` or copy the cdylib next to the interpreter
//! as `rsavg_py.so`; see python/smoke.py for a usage tour.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rsavg_core::{
    arith::{build_field, picard_group},
    builtin_11a, central_value_afe,
    characters::{dirichlet_family, ring_class_family},
    direct_average, exact_formula_average,
    expsums::{kloosterman4_all, salie_evaluate, ExpSumContext, SalieOutcome},
    padic::{weierstrass_prep, zero_count_bound, DVRSeries},
    render_report, run_all, AverageMode, CutoffSpec, Error as CoreError, HeckeCharacterW,
    Profile,
};

fn to_py(e: CoreError) -> PyErr {
    match e {
        CoreError::Validation(m) | CoreError::Unsupported(m) => PyValueError::new_err(m),
        CoreError::Numerical(m) | CoreError::Precision(m) => PyArithmeticError::new_err(m),
        CoreError::Io(e) => PyValueError::new_err(e.to_string()),
    }
}

fn parse_profile(s: &str) -> PyResult<Profile> {
    if s == "one" {
        Ok(Profile::One)
    } else if let Some(a) = s.strip_prefix("cosh:") {
        Ok(Profile::Cosh(a.parse().map_err(|_| {
            PyValueError::new_err(format!("bad profile parameter in {s:?}"))
        })?))
    } else if let Some(a) = s.strip_prefix("expsq:") {
        Ok(Profile::ExpSq(a.parse().map_err(|_| {
            PyValueError::new_err(format!("bad profile parameter in {s:?}"))
        })?))
    } else {
        Err(PyValueError::new_err(format!(
            "unknown profile {s:?} (expected one | cosh:A | expsq:A)"
        )))
    }
}

fn cplx(z: Complex64) -> (f64, f64) {
    (z.re, z.im)
}

/// Weierstrass factorization p^mu * g * u of a truncated series.
#[pyclass(frozen)]
struct Prepared {
    #[pyo3(get)]
    mu: u32,
    #[pyo3(get)]
    wdeg: usize,
    #[pyo3(get)]
    g: Vec<u64>,
    #[pyo3(get)]
    u: Vec<u64>,
    #[pyo3(get)]
    reconstruction_exact: bool,
}

#[pymethods]
impl Prepared {
    fn __repr__(&self) -> String {
        format!(
            "Prepared(mu={}, wdeg={}, g={:?}, exact={})",
            self.mu, self.wdeg, self.g, self.reconstruction_exact
        )
    }
}

/// Central value of a single family member picked by index.
#[pyfunction]
#[pyo3(signature = (disc=-7, p=3, alpha=0, beta=0, rho_index=0, chi_index=0, profile="one"))]
#[allow(clippy::too_many_arguments)]
fn lvalue<'py>(
    py: Python<'py>,
    disc: i64,
    p: i64,
    alpha: u32,
    beta: u32,
    rho_index: usize,
    chi_index: usize,
    profile: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = CutoffSpec { profile: parse_profile(profile)?, ..CutoffSpec::default() };
    let nf = builtin_11a(800_000);
    let k = build_field(disc).map_err(to_py)?;
    let order = picard_group(&k, p, alpha).map_err(to_py)?;
    let rhos = ring_class_family(&k, &order).map_err(to_py)?;
    let chis = dirichlet_family(p, beta).map_err(to_py)?;
    let rho = rhos
        .get(rho_index)
        .ok_or_else(|| PyValueError::new_err("rho index out of range"))?
        .clone();
    let chi = chis
        .get(chi_index)
        .ok_or_else(|| PyValueError::new_err("chi index out of range"))?
        .clone();
    let w = HeckeCharacterW { rho, chi };
    let label = w.label(alpha);
    let cv = central_value_afe(&nf, &w, &k, &order, p, &spec).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("member", label)?;
    d.set_item("value", cplx(cv.value))?;
    d.set_item("root_number", cplx(cv.epsilon))?;
    d.set_item("conductor_scale_x", cv.scale_x)?;
    d.set_item("fe_flatness_gap", cv.eps_quality)?;
    Ok(d)
}

/// Direct and exact-formula family averages for the given conductor exponents.
#[pyfunction]
#[pyo3(signature = (disc=-7, p=3, alpha=0, beta=1, formula=true))]
fn average<'py>(
    py: Python<'py>,
    disc: i64,
    p: i64,
    alpha: u32,
    beta: u32,
    formula: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = CutoffSpec::default();
    let nf = builtin_11a(800_000);
    let k = build_field(disc).map_err(to_py)?;
    let rep = if formula {
        exact_formula_average(&nf, &k, p, alpha, beta, &spec, &AverageMode::Double)
    } else {
        direct_average(&nf, &k, p, alpha, beta, &spec, &AverageMode::Double)
    }
    .map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("disc", rep.disc)?;
    d.set_item("p", rep.p)?;
    d.set_item("alpha", rep.alpha)?;
    d.set_item("beta", rep.beta)?;
    d.set_item("family_size", rep.family_size)?;
    d.set_item("direct_value", cplx(rep.direct_value))?;
    d.set_item("formula_value", rep.formula_value.map(cplx))?;
    d.set_item("difference", rep.difference.map(cplx))?;
    d.set_item("rn_identity_gap", rep.rn_identity_gap)?;
    d.set_item("salie_certified", rep.salie_certified)?;
    Ok(d)
}

/// Max gap between the closed-form Salie evaluation and the fourth
/// Kloosterman convolution power across all admissible J mod p^beta.
#[pyfunction]
fn salie_max_gap(p: i64, beta: u32) -> PyResult<f64> {
    let ctx = ExpSumContext::new(p, beta).map_err(to_py)?;
    let k4 = kloosterman4_all(&ctx);
    let mut worst = 0.0f64;
    for j in 1..ctx.q {
        if j % p == 0 {
            continue;
        }
        let lhs = match salie_evaluate(j, &ctx).map_err(to_py)? {
            SalieOutcome::Value(v) => v,
            SalieOutcome::NoQuarticRoot => Complex64::new(0.0, 0.0),
            SalieOutcome::NotCertified => continue,
        };
        worst = worst.max((lhs - k4[j as usize]).norm());
    }
    Ok(worst)
}

/// Weierstrass preparation of the series with the given coefficients.
#[pyfunction]
fn weierstrass(p: i64, nprec: u32, ntrunc: usize, coeffs: Vec<u64>) -> PyResult<Prepared> {
    let f = DVRSeries::new(p, nprec, ntrunc, coeffs).map_err(to_py)?;
    let w = weierstrass_prep(&f).map_err(to_py)?;
    let exact = w.reconstruct(nprec).map_err(to_py)? == f;
    Ok(Prepared {
        mu: w.mu,
        wdeg: w.wdeg,
        g: w.g.coeffs[..=w.wdeg].to_vec(),
        u: w.u.coeffs.clone(),
        reconstruction_exact: exact,
    })
}

/// Characters of conductor <= p^beta_max where the series vanishes,
/// as (beta, exponent) pairs, plus the Weierstrass-degree bound.
#[pyfunction]
fn zero_characters<'py>(
    py: Python<'py>,
    p: i64,
    nprec: u32,
    ntrunc: usize,
    coeffs: Vec<u64>,
    beta_max: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let f = DVRSeries::new(p, nprec, ntrunc, coeffs).map_err(to_py)?;
    let zc = zero_count_bound(&f, beta_max).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("mu", zc.mu)?;
    d.set_item("wdeg", zc.wdeg)?;
    d.set_item("vanishing", zc.vanishing)?;
    d.set_item("indeterminate", zc.indeterminate)?;
    Ok(d)
}

/// Class number of the order of conductor p^alpha in Q(sqrt(disc)).
#[pyfunction]
fn class_number(disc: i64, p: i64, alpha: u32) -> PyResult<usize> {
    let k = build_field(disc).map_err(to_py)?;
    let order = picard_group(&k, p, alpha).map_err(to_py)?;
    Ok(order.h as usize)
}

/// Run the full acceptance suite; returns (all_passed, report_text).
#[pyfunction]
fn acceptance() -> (bool, String) {
    let results = run_all();
    let ok = results.iter().all(|r| r.passed);
    (ok, render_report(&results))
}

#[pymodule]
fn rsavg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Prepared>()?;
    m.add_function(wrap_pyfunction!(lvalue, m)?)?;
    m.add_function(wrap_pyfunction!(average, m)?)?;
    m.add_function(wrap_pyfunction!(salie_max_gap, m)?)?;
    m.add_function(wrap_pyfunction!(weierstrass, m)?)?;
    m.add_function(wrap_pyfunction!(zero_characters, m)?)?;
    m.add_function(wrap_pyfunction!(class_number, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance, m)?)?;
    Ok(())
}
