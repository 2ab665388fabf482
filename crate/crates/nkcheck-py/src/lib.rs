//! Python bindings (module `nkcheck_py`) for the core geometry types
//! and verification suites.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nkcheck_core::catalog::{get_chart, CHART_IDS};
use nkcheck_core::frame::{classify, extract_angles, frame_at};
use nkcheck_core::nkcore::{self, SQRT3};
use nkcheck_core::quat::{ImaginaryQuaternion, Quaternion};
use nkcheck_core::report::RunConfig;
use nkcheck_core::suites;
use nkcheck_core::CoreError;

fn err(e: CoreError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A point of S³×S³, stored as a pair of unit quaternions (w, x, y, z).
#[pyclass(frozen)]
#[derive(Clone, Copy)]
struct SurfacePoint {
    inner: nkcore::SurfacePoint,
}

#[pymethods]
impl SurfacePoint {
    #[new]
    fn new(p: [f64; 4], q: [f64; 4]) -> PyResult<Self> {
        let inner = nkcore::SurfacePoint::new(
            Quaternion::new(p[0], p[1], p[2], p[3]),
            Quaternion::new(q[0], q[1], q[2], q[3]),
        )
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p(&self) -> [f64; 4] {
        let p = self.inner.p();
        [p.w, p.x, p.y, p.z]
    }

    #[getter]
    fn q(&self) -> [f64; 4] {
        let q = self.inner.q();
        [q.w, q.x, q.y, q.z]
    }

    fn __repr__(&self) -> String {
        format!("SurfacePoint(p={:?}, q={:?})", self.p(), self.q())
    }
}

/// A tangent vector (pα, qβ) at a surface point, stored by its
/// imaginary-quaternion components α and β.
#[pyclass(frozen)]
#[derive(Clone, Copy)]
struct TangentVector {
    inner: nkcore::TangentVector,
}

#[pymethods]
impl TangentVector {
    #[new]
    fn new(base: &SurfacePoint, alpha: [f64; 3], beta: [f64; 3]) -> Self {
        Self {
            inner: nkcore::TangentVector::new(
                base.inner,
                ImaginaryQuaternion::new(alpha[0], alpha[1], alpha[2]),
                ImaginaryQuaternion::new(beta[0], beta[1], beta[2]),
            ),
        }
    }

    #[getter]
    fn base(&self) -> SurfacePoint {
        SurfacePoint {
            inner: self.inner.base,
        }
    }

    #[getter]
    fn alpha(&self) -> [f64; 3] {
        let a = self.inner.alpha;
        [a.x, a.y, a.z]
    }

    #[getter]
    fn beta(&self) -> [f64; 3] {
        let b = self.inner.beta;
        [b.x, b.y, b.z]
    }

    /// Norm in the nearly Kähler metric.
    fn norm(&self) -> f64 {
        nkcore::norm_g(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("TangentVector(alpha={:?}, beta={:?})", self.alpha(), self.beta())
    }
}

/// The almost complex structure J.
#[pyfunction]
fn apply_j(v: &TangentVector) -> TangentVector {
    TangentVector {
        inner: nkcore::apply_j(&v.inner),
    }
}

/// The almost product structure P.
#[pyfunction]
fn apply_p(v: &TangentVector) -> TangentVector {
    TangentVector {
        inner: nkcore::apply_p(&v.inner),
    }
}

/// The structure Q = −P restricted to the first factor component.
#[pyfunction]
fn apply_q(v: &TangentVector) -> TangentVector {
    TangentVector {
        inner: nkcore::apply_q(&v.inner),
    }
}

/// The nearly Kähler metric g(v, w).
#[pyfunction]
fn metric_g(v: &TangentVector, w: &TangentVector) -> PyResult<f64> {
    nkcore::metric_g(&v.inner, &w.inner).map_err(err)
}

/// The fundamental tensor G(x, y) = (∇̃ₓJ)y.
#[pyfunction]
fn tensor_g(x: &TangentVector, y: &TangentVector) -> PyResult<TangentVector> {
    Ok(TangentVector {
        inner: nkcore::tensor_g(&x.inner, &y.inner).map_err(err)?,
    })
}

/// The Riemann curvature R(x, y)z of the nearly Kähler metric.
#[pyfunction]
fn curvature_r(x: &TangentVector, y: &TangentVector, z: &TangentVector) -> PyResult<TangentVector> {
    Ok(TangentVector {
        inner: nkcore::curvature_r(&x.inner, &y.inner, &z.inner).map_err(err)?,
    })
}

/// Ids of the registered immersion charts.
#[pyfunction]
fn chart_ids() -> Vec<String> {
    CHART_IDS.iter().map(|s| s.to_string()).collect()
}

/// Evaluate a registered chart at parameters (u, v, t).
#[pyfunction]
fn chart_point(id: &str, u: f64, v: f64, t: f64) -> PyResult<SurfacePoint> {
    let chart = get_chart(id).map_err(err)?;
    Ok(SurfacePoint {
        inner: chart.eval(u, v, t),
    })
}

/// Adapted-frame angle data and CR classification of a chart at
/// parameters (u, v, t): a dict with theta, a, omega, p_class.
#[pyfunction]
fn chart_angles(py: Python<'_>, id: &str, u: f64, v: f64, t: f64) -> PyResult<Py<PyDict>> {
    let chart = get_chart(id).map_err(err)?;
    let fr = frame_at(&chart, [u, v, t]).map_err(err)?;
    let ang = extract_angles(&fr).map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("theta", ang.theta)?;
    out.set_item("a", ang.a.to_vec())?;
    out.set_item("omega", ang.omega.to_vec())?;
    out.set_item("p_class", classify(&ang, 1e-3).as_str())?;
    Ok(out.into())
}

/// The gauge-invariant integrability defect g([E₁,E₂],E₃) of a chart
/// at parameters (u, v, t).
#[pyfunction]
fn integrability_defect(id: &str, u: f64, v: f64, t: f64) -> PyResult<f64> {
    let chart = get_chart(id).map_err(err)?;
    nkcheck_core::frame::d1_integrability_defect(&chart, [u, v, t]).map_err(err)
}

/// Run a verification suite ("identities", "ode", "isometries",
/// "chart:<id>", or "all") and return the JSON report.
#[pyfunction]
#[pyo3(signature = (suite, seed = 42, samples = 200, grid = 3))]
fn run_suite(suite: &str, seed: u64, samples: usize, grid: usize) -> PyResult<String> {
    let cfg = RunConfig {
        seed,
        samples,
        grid,
        ..RunConfig::default()
    };
    let report = match suite {
        "identities" => suites::run_identity_suite(&cfg),
        "ode" => suites::run_ode_suite(&cfg),
        "isometries" => suites::run_isometry_suite(&cfg),
        "all" => suites::run_all(&cfg),
        other => match other.strip_prefix("chart:") {
            Some(id) => suites::run_chart_suite(&cfg, id),
            None => {
                return Err(PyValueError::new_err(format!("unknown suite: {other}")));
            }
        },
    }
    .map_err(err)?;
    Ok(report.to_json())
}

#[pymodule]
fn nkcheck_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SurfacePoint>()?;
    m.add_class::<TangentVector>()?;
    m.add_function(wrap_pyfunction!(apply_j, m)?)?;
    m.add_function(wrap_pyfunction!(apply_p, m)?)?;
    m.add_function(wrap_pyfunction!(apply_q, m)?)?;
    m.add_function(wrap_pyfunction!(metric_g, m)?)?;
    m.add_function(wrap_pyfunction!(tensor_g, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_r, m)?)?;
    m.add_function(wrap_pyfunction!(chart_ids, m)?)?;
    m.add_function(wrap_pyfunction!(chart_point, m)?)?;
    m.add_function(wrap_pyfunction!(chart_angles, m)?)?;
    m.add_function(wrap_pyfunction!(integrability_defect, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("SQRT3", SQRT3)?;
    Ok(())
}
