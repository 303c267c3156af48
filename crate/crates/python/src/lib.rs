//! Python bindings: transfer functions, ν-gap distances, clustering,
//! prototypes, controller synthesis and the full pipeline.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyComplex;

use nugap::cluster;
use nugap::controller::{self, FeedbackConvention};
use nugap::coprime;
use nugap::dataset::{self, DatasetConfig};
use nugap::io::SystemSet;
use nugap::metric::{self, DistanceMatrix};
use nugap::pipeline::{self, PipelineConfig};
use nugap::prototype::{self, PrototypeConfig};
use nugap::{FrequencyGrid, RationalTF};

fn py_err(e: nugap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn grid(grid_min: f64, grid_max: f64, grid_points: usize) -> PyResult<FrequencyGrid> {
    FrequencyGrid::log_spaced(grid_min, grid_max, grid_points).map_err(py_err)
}

fn convention(name: &str) -> PyResult<FeedbackConvention> {
    name.parse().map_err(py_err)
}

/// Canonical SISO transfer function `num(s)/den(s)`, coefficients in
/// descending powers.
#[pyclass(name = "TransferFunction", module = "nugap_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyTransferFunction {
    inner: RationalTF,
}

#[pymethods]
impl PyTransferFunction {
    #[new]
    fn new(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        RationalTF::new(&num, &den).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn num(&self) -> Vec<f64> {
        self.inner.num().coeffs().to_vec()
    }

    #[getter]
    fn den(&self) -> Vec<f64> {
        self.inner.den().coeffs().to_vec()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn is_stable(&self) -> bool {
        self.inner.is_stable()
    }

    fn poles<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        let p = self.inner.poles();
        p.iter().map(|z| PyComplex::from_doubles(py, z.re, z.im)).collect()
    }

    /// `G(jω)`; `None` on a pole.
    fn eval_jw<'py>(&self, py: Python<'py>, omega: f64) -> Option<Bound<'py, PyComplex>> {
        self.inner
            .eval_jw(omega)
            .finite()
            .map(|z| PyComplex::from_doubles(py, z.re, z.im))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    fn __repr__(&self) -> String {
        format!("TransferFunction(num={:?}, den={:?})", self.num(), self.den())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn unwrap_all(systems: &[PyTransferFunction]) -> Vec<RationalTF> {
    systems.iter().map(|s| s.inner.clone()).collect()
}

fn wrap(inner: RationalTF) -> PyTransferFunction {
    PyTransferFunction { inner }
}

#[pyfunction]
#[pyo3(signature = (g1, g2, grid_min=1e-4, grid_max=1e4, grid_points=600))]
fn nu_gap(g1: &PyTransferFunction, g2: &PyTransferFunction, grid_min: f64, grid_max: f64, grid_points: usize) -> PyResult<f64> {
    Ok(metric::nu_gap(&g1.inner, &g2.inner, &grid(grid_min, grid_max, grid_points)?))
}

/// Pointwise chordal distance at `ω`.
#[pyfunction]
fn kappa(g1: &PyTransferFunction, g2: &PyTransferFunction, omega: f64) -> f64 {
    metric::kappa_jw(&g1.inner, &g2.inner, omega)
}

/// Largest achievable normalized coprime stability margin.
#[pyfunction]
fn b_max(g: &PyTransferFunction) -> PyResult<f64> {
    coprime::b_max(&g.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (systems, grid_min=1e-4, grid_max=1e4, grid_points=600))]
fn distance_matrix(systems: Vec<PyTransferFunction>, grid_min: f64, grid_max: f64, grid_points: usize) -> PyResult<Vec<Vec<f64>>> {
    let labels: Vec<String> = (0..systems.len()).map(|i| i.to_string()).collect();
    let d = metric::distance_matrix(&labels, &unwrap_all(&systems), &grid(grid_min, grid_max, grid_points)?);
    Ok((0..d.len()).map(|i| d.row(i).to_vec()).collect())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DistanceMatrix> {
    let labels = (0..rows.len()).map(|i| i.to_string()).collect();
    DistanceMatrix::from_rows(labels, rows).map_err(py_err)
}

/// Complete-linkage merges as `(a, b, height, id)` tuples.
#[pyfunction]
fn complete_linkage(distances: Vec<Vec<f64>>) -> PyResult<Vec<(usize, usize, f64, usize)>> {
    let dend = cluster::complete_linkage(&matrix(&distances)?).map_err(py_err)?;
    Ok(dend.merges.iter().map(|m| (m.a, m.b, m.height, m.id)).collect())
}

/// Cluster label per system for a dendrogram cut.
#[pyfunction]
fn cut_labels(distances: Vec<Vec<f64>>, height: f64) -> PyResult<Vec<usize>> {
    let dend = cluster::complete_linkage(&matrix(&distances)?).map_err(py_err)?;
    Ok(cluster::cut(&dend, height).labels)
}

/// Prototype of a cluster; returns `(prototype, max_distance, b_max, certified)`.
#[pyfunction]
#[pyo3(signature = (members, kmax=20, max_outer=50, grid_min=1e-4, grid_max=1e4, grid_points=600))]
fn find_prototype(
    members: Vec<PyTransferFunction>,
    kmax: usize,
    max_outer: usize,
    grid_min: f64,
    grid_max: f64,
    grid_points: usize,
) -> PyResult<(PyTransferFunction, f64, f64, bool)> {
    let g = grid(grid_min, grid_max, grid_points)?;
    let systems = unwrap_all(&members);
    let labels: Vec<String> = (0..systems.len()).map(|i| i.to_string()).collect();
    let d = metric::distance_matrix(&labels, &systems, &g);
    let cfg = PrototypeConfig {
        k_max: kmax,
        max_outer,
        ..PrototypeConfig::default()
    };
    let r = prototype::prototype(&systems, &d, &cfg, &g).map_err(py_err)?;
    Ok((wrap(r.prototype), r.max_distance, r.b_max, r.certified))
}

/// Central controller; returns `(controller, b_achieved, b_max)`.
#[pyfunction]
#[pyo3(signature = (plant, gamma_rel=1.05, convention="positive", grid_min=1e-4, grid_max=1e4, grid_points=600))]
fn synthesize(
    plant: &PyTransferFunction,
    gamma_rel: f64,
    convention: &str,
    grid_min: f64,
    grid_max: f64,
    grid_points: usize,
) -> PyResult<(PyTransferFunction, f64, f64)> {
    let conv = self::convention(convention)?;
    let s = controller::ncf_controller(&plant.inner, gamma_rel, conv, &grid(grid_min, grid_max, grid_points)?)
        .map_err(py_err)?;
    Ok((wrap(s.controller), s.b_achieved, s.b_max))
}

#[pyfunction]
#[pyo3(signature = (plant, controller, convention="positive", grid_min=1e-4, grid_max=1e4, grid_points=600))]
fn stability_margin(
    plant: &PyTransferFunction,
    controller: &PyTransferFunction,
    convention: &str,
    grid_min: f64,
    grid_max: f64,
    grid_points: usize,
) -> PyResult<f64> {
    controller::stability_margin(
        &plant.inner,
        &controller.inner,
        self::convention(convention)?,
        &grid(grid_min, grid_max, grid_points)?,
    )
    .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (plant, controller, convention="positive"))]
fn internally_stable(plant: &PyTransferFunction, controller: &PyTransferFunction, convention: &str) -> PyResult<bool> {
    controller::internal_stability(&plant.inner, &controller.inner, self::convention(convention)?).map_err(py_err)
}

/// Seeded synthetic set as `(id, system)` pairs.
#[pyfunction]
#[pyo3(signature = (seed, n=80))]
fn generate_dataset(seed: u64, n: usize) -> PyResult<Vec<(String, PyTransferFunction)>> {
    let (set, _) = dataset::generate_dataset(seed, n, &DatasetConfig::default()).map_err(py_err)?;
    Ok(set.ids.into_iter().zip(set.systems.into_iter().map(wrap)).collect())
}

/// Full pipeline; returns the run report as JSON and writes all artifacts
/// when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (systems, out_dir=None, cut=0.6, seed=1, gamma_rel=1.05, embed=true))]
fn run_pipeline(
    systems: Vec<(String, PyTransferFunction)>,
    out_dir: Option<PathBuf>,
    cut: f64,
    seed: u64,
    gamma_rel: f64,
    embed: bool,
) -> PyResult<String> {
    let (ids, tfs): (Vec<String>, Vec<PyTransferFunction>) = systems.into_iter().unzip();
    let set = SystemSet {
        ids,
        systems: unwrap_all(&tfs),
    };
    let cfg = PipelineConfig {
        cut_height: cut,
        seed,
        gamma_rel,
        embed,
        ..PipelineConfig::default()
    };
    let out = pipeline::run_pipeline(&set, &cfg).map_err(py_err)?;
    if let Some(dir) = out_dir {
        pipeline::emit_plots(&out, &dir).map_err(py_err)?;
    }
    Ok(serde_json::to_string(&out.report).expect("serializable"))
}

#[pymodule]
fn nugap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTransferFunction>()?;
    m.add_function(wrap_pyfunction!(nu_gap, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(b_max, m)?)?;
    m.add_function(wrap_pyfunction!(distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(complete_linkage, m)?)?;
    m.add_function(wrap_pyfunction!(cut_labels, m)?)?;
    m.add_function(wrap_pyfunction!(find_prototype, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(stability_margin, m)?)?;
    m.add_function(wrap_pyfunction!(internally_stable, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
