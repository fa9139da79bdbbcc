//! Python bindings for the rcdyn library: graphs, transition matrices,
//! spectral gaps, mixing times, samplers and the closed-form bounds.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rcdyn::bounds;
use rcdyn::dynamics::{sb_step, sw_step, DynamicsKind, RngState};
use rcdyn::graph::EdgeSubset;
use rcdyn::models::{fkes_distribution, potts_distribution, rc_distribution};
use rcdyn::spectral::{exact_mixing_time, sandwich_bounds, spectral_gap};
use rcdyn::suites::{run_suite, SuiteConfig};
use rcdyn::{Caps, Graph, ModelParams};

fn err(e: rcdyn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Graph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: Graph::new(n, edges).map_err(err)? })
    }

    #[staticmethod]
    fn builtin(spec: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: Graph::parse_builtin(spec).map_err(err)? })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn is_tree(&self) -> bool {
        self.inner.is_tree()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, m={})",
            self.inner.n_vertices(),
            self.inner.n_edges()
        )
    }
}

fn build(g: &PyGraph, p: f64, q: f64, dynamics: &str, caps: &Caps) -> PyResult<rcdyn::dynamics::StochasticMatrix> {
    let params = ModelParams::new(p, q).map_err(err)?;
    let kind: DynamicsKind = dynamics.parse().map_err(err)?;
    kind.build(&g.inner, &params, caps).map_err(err)
}

/// Dense transition matrix as a list of rows.
#[pyfunction]
fn transition_matrix(g: &PyGraph, p: f64, q: f64, dynamics: &str) -> PyResult<Vec<Vec<f64>>> {
    let mat = build(g, p, q, dynamics, &Caps::from_env())?;
    Ok((0..mat.dim()).map(|i| mat.row(i).to_vec()).collect())
}

/// Spectral gap and the full spectrum of a dynamics.
#[pyfunction]
fn gap(g: &PyGraph, p: f64, q: f64, dynamics: &str) -> PyResult<(f64, Vec<f64>)> {
    let caps = Caps::from_env();
    let mat = build(g, p, q, dynamics, &caps)?;
    let spec = spectral_gap(&mat, &caps).map_err(err)?;
    Ok((spec.gap, spec.eigenvalues))
}

/// Exact mixing time plus its (lower, upper) sandwich bounds.
#[pyfunction]
fn mixing_time(g: &PyGraph, p: f64, q: f64, dynamics: &str) -> PyResult<(u64, f64, f64)> {
    let caps = Caps::from_env();
    let mat = build(g, p, q, dynamics, &caps)?;
    let (lo, hi) = sandwich_bounds(&mat, &caps).map_err(err)?;
    let res = exact_mixing_time(&mat, 1 << 40, &caps).map_err(err)?;
    let tau = res
        .mixing_time
        .ok_or_else(|| PyValueError::new_err("mixing time cap exceeded"))?;
    Ok((tau, lo, hi))
}

/// Stationary distribution of one of the three laws (rc, potts, fkes).
#[pyfunction]
fn distribution(g: &PyGraph, p: f64, q: f64, law: &str) -> PyResult<Vec<f64>> {
    let caps = Caps::from_env();
    let params = ModelParams::new(p, q).map_err(err)?;
    match law {
        "rc" => rc_distribution(&g.inner, &params, &caps),
        "potts" => potts_distribution(&g.inner, &params, &caps),
        "fkes" => fkes_distribution(&g.inner, &params, &caps),
        _ => return Err(PyValueError::new_err(format!("unknown law '{law}'"))),
    }
    .map_err(err)
}

/// Seeded trajectory of edge-subset indices, starting state included.
#[pyfunction]
#[pyo3(signature = (g, p, q, dynamics, start, steps, seed=0))]
fn sample_trajectory(
    g: &PyGraph,
    p: f64,
    q: f64,
    dynamics: &str,
    start: u32,
    steps: usize,
    seed: u64,
) -> PyResult<Vec<usize>> {
    let params = ModelParams::new(p, q).map_err(err)?;
    let kind: DynamicsKind = dynamics.parse().map_err(err)?;
    let m = g.inner.n_edges();
    if (start as usize) >= 1usize << m {
        return Err(PyValueError::new_err("start state out of range"));
    }
    let mut state = EdgeSubset::from_bits(start, m);
    let mut rng = RngState::new(seed);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.index());
    for _ in 0..steps {
        state = match kind {
            DynamicsKind::Sw => sw_step(&g.inner, &params, &state, &mut rng).map_err(err)?,
            DynamicsKind::Sb => sb_step(&g.inner, &params, &state, &mut rng),
            _ => {
                return Err(PyValueError::new_err(
                    "step sampler only available for sw and sb",
                ))
            }
        };
        out.push(state.index());
    }
    Ok(out)
}

/// Exact bandwidth and linear-width with witness orderings.
#[pyfunction]
fn width(g: &PyGraph) -> PyResult<(usize, Vec<usize>, usize, Vec<usize>)> {
    let bw = bounds::bandwidth_exact(&g.inner).map_err(err)?;
    let lw = bounds::linear_width_exact(&g.inner).map_err(err)?;
    Ok((bw.width, bw.witness, lw.width, lw.witness))
}

/// Torus mixing-time upper bound constants (k1, k2, log_bound).
#[pyfunction]
fn torus_bound(p: f64, q: f64, l: usize, d: usize) -> PyResult<(f64, f64, f64)> {
    let params = ModelParams::new(p, q).map_err(err)?;
    let b = bounds::torus_upper_bound(&params, l, d).map_err(err)?;
    Ok((b.k1, b.k2, b.log_bound))
}

/// Run a verification suite; returns (check, max_violation, tolerance,
/// pass) tuples.
#[pyfunction]
#[pyo3(signature = (name, q=None))]
fn verify(name: &str, q: Option<f64>) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let cfg = match q {
        Some(q) => SuiteConfig::with_q(q),
        None => SuiteConfig::default(),
    };
    let reports = run_suite(name, &cfg, &Caps::from_env()).map_err(err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.check, r.max_violation, r.tolerance, r.pass))
        .collect())
}

#[pymodule]
fn rcdyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(transition_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(gap, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_time, m)?)?;
    m.add_function(wrap_pyfunction!(distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sample_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(width, m)?)?;
    m.add_function(wrap_pyfunction!(torus_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
