//! Python bindings. Vertex indices are 0-based on input and output, except
//! inside report dictionaries, which mirror the command-line JSON (1-based sets).

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;
use sublap::cheeger::{self, CertifyOptions};
use sublap::error::Error;
use sublap::io::{self, Format};
use sublap::lovasz;
use sublap::oracle::{self, SubmodularTransformation};
use sublap::polytope::{self, PolytopeHandle, WolfeOptions};
use sublap::sdp::{self, ApproxOptions, PointSource, SdpMode};
use sublap::set;
use sublap::spectral::{self, DiffusionOptions, LaplacianOperator};

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Serialize through JSON into plain Python dicts and lists.
fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mask_of(t: &SubmodularTransformation, vertices: &[usize]) -> PyResult<u64> {
    if let Some(&v) = vertices.iter().find(|&&v| v >= t.n()) {
        return Err(PyValueError::new_err(format!("vertex {v} outside 0..{}", t.n())));
    }
    Ok(set::from_indices(vertices))
}

/// A submodular transformation `F: 2^V -> R^E`.
#[pyclass(name = "Transformation", frozen)]
struct PyTransformation {
    inner: SubmodularTransformation,
}

#[pymethods]
impl PyTransformation {
    /// Load an instance file; the format follows the extension unless given.
    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: &str, format: Option<&str>) -> PyResult<Self> {
        let format = format
            .map(|f| f.parse::<Format>())
            .transpose()
            .map_err(to_py)?;
        let file = io::load(Path::new(path), format).map_err(to_py)?;
        Ok(PyTransformation {
            inner: file.data.build().map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn graph(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = oracle::build_undirected_cut(n, &edges).map_err(to_py)?;
        Ok(PyTransformation { inner })
    }

    #[staticmethod]
    fn digraph(n: usize, arcs: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = oracle::build_directed_cut(n, &arcs).map_err(to_py)?;
        Ok(PyTransformation { inner })
    }

    #[staticmethod]
    fn hypergraph(n: usize, edges: Vec<Vec<usize>>) -> PyResult<Self> {
        let inner = oracle::build_hypergraph_cut(n, &edges).map_err(to_py)?;
        Ok(PyTransformation { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees().to_vec()
    }

    /// `(F_e(S))_e` for a vertex list `S`.
    fn evaluate(&self, vertices: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(self.inner.evaluate(mask_of(&self.inner, &vertices)?))
    }

    /// Lovász extension of every function at `x`.
    fn lovasz(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.n() {
            return Err(PyValueError::new_err("vector length differs from n"));
        }
        Ok(self
            .inner
            .functions()
            .iter()
            .map(|f| lovasz::lovasz_eval(f, &x))
            .collect())
    }

    /// Normalized Rayleigh quotient of `x`.
    fn rayleigh(&self, x: Vec<f64>) -> PyResult<f64> {
        let op = LaplacianOperator::normalized(&self.inner).map_err(to_py)?;
        op.rayleigh(&x).map_err(to_py)
    }

    /// One element of the normalized Laplacian applied to `x`.
    fn apply_laplacian(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let op = LaplacianOperator::normalized(&self.inner).map_err(to_py)?;
        if x.len() != op.n() {
            return Err(PyValueError::new_err("vector length differs from n"));
        }
        Ok(op.apply(&x))
    }

    fn conductance(&self, vertices: Vec<usize>) -> PyResult<f64> {
        let mask = mask_of(&self.inner, &vertices)?;
        Ok(cheeger::conductance_of_set(&self.inner, mask).map_err(to_py)?.phi)
    }

    /// Minimum conductance and a minimizing set, by enumeration.
    fn min_conductance(&self) -> PyResult<(f64, Vec<usize>)> {
        let best = cheeger::brute_force_phi(&self.inner).map_err(to_py)?;
        Ok((best.phi, set::to_indices(best.mask)))
    }

    /// Set from the strong sweep of `x`, with its conductance.
    fn strong_sweep(&self, x: Vec<f64>) -> PyResult<(f64, Vec<usize>)> {
        let s = cheeger::strong_sweep(&self.inner, &x).map_err(to_py)?;
        Ok((s.cut.phi, set::to_indices(s.cut.mask)))
    }

    /// Smallest Rayleigh quotient reached by the diffusion from several starts.
    #[pyo3(signature = (restarts=4, seed=0))]
    fn diffusion_eigenvalue(&self, restarts: usize, seed: u64) -> PyResult<(f64, Vec<f64>)> {
        let op = LaplacianOperator::normalized(&self.inner).map_err(to_py)?;
        let r = spectral::reference_lambda(&op, restarts, seed, DiffusionOptions::default())
            .map_err(to_py)?;
        Ok((r.lambda, r.best.vector))
    }

    /// Rounded relaxation: `mode` is "symmetric" or "general"; `eps=None` uses vertex sets.
    #[pyo3(signature = (mode="symmetric", eps=None, seed=0))]
    fn approx_eigenvalue<'py>(
        &self,
        py: Python<'py>,
        mode: &str,
        eps: Option<f64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode = match mode {
            "symmetric" => SdpMode::Symmetric,
            "general" => SdpMode::General,
            other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
        };
        let source = eps.map_or(PointSource::Vertices, |eps| PointSource::Cover { eps });
        let res = sdp::approx_eigenvalue(&self.inner, mode, &ApproxOptions::new(seed, source))
            .map_err(to_py)?;
        to_dict(py, &res)
    }

    #[pyo3(signature = (seed=0, restarts=4))]
    fn certify<'py>(&self, py: Python<'py>, seed: u64, restarts: usize) -> PyResult<Bound<'py, PyAny>> {
        let opts = CertifyOptions {
            seed,
            restarts,
            ..CertifyOptions::default()
        };
        let cert = cheeger::certify(&self.inner, &opts).map_err(to_py)?;
        to_dict(py, &cert)
    }

    /// Minimum-norm point of `B(F_e)` in local coordinates, and its squared norm.
    #[pyo3(signature = (index, eps=1e-6))]
    fn min_norm_point(&self, index: usize, eps: f64) -> PyResult<(Vec<f64>, f64)> {
        let f = self.function(index)?;
        let opts = WolfeOptions {
            eps,
            ..WolfeOptions::default()
        };
        let r = polytope::wolfe_min_norm(&PolytopeHandle::new(f), opts).map_err(to_py)?;
        Ok((r.point, r.norm_sq))
    }

    /// Points of a cover of `B(F_e)` at relative radius `eps`, and the absolute radius.
    fn cover(&self, index: usize, eps: f64) -> PyResult<(Vec<Vec<f64>>, f64)> {
        let c = polytope::cover_base_polytope(self.function(index)?, eps).map_err(to_py)?;
        Ok((c.points, c.eps_abs))
    }

    /// Extreme points of `B(F_e)` in local coordinates.
    fn extreme_points(&self, index: usize) -> PyResult<Vec<Vec<f64>>> {
        lovasz::enumerate_extreme_points(self.function(index)?).map_err(to_py)
    }

    fn support(&self, index: usize) -> PyResult<Vec<usize>> {
        Ok(self.function(index)?.support().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Transformation(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

impl PyTransformation {
    fn function(&self, index: usize) -> PyResult<&oracle::SubmodularOracle> {
        self.inner
            .functions()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("function index {index} outside 0..{}", self.inner.m())))
    }
}

#[pymodule]
fn sublap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTransformation>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
