use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use gwqed_core::criticality::{self, ScanParam};
use gwqed_core::dfree;
use gwqed_core::interactions::{self, EffectivePair, PairSetup, Placement};
use gwqed_core::quantum_ops::LadderConvention;
use gwqed_core::scan::ScanResult;
use gwqed_core::slh::{cascade_left, cascade_right, gauge_transform, Ordering};
use gwqed_core::spinchain::{self, Boundary, KGrid, Parity, SpinChainSpec};
use gwqed_core::waveguide::{self, ModeAmplitudes, WaveguideConfig};
use gwqed_core::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for gwqed_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn columns(table: &ScanResult) -> BTreeMap<String, Vec<f64>> {
    table
        .header
        .iter()
        .map(|h| (h.clone(), table.column(h).unwrap_or_default()))
        .collect()
}

fn scan_param(name: &str) -> PyResult<ScanParam> {
    match name {
        "delta" => Ok(ScanParam::Delta),
        "jp" => Ok(ScanParam::Jp),
        other => Err(PyValueError::new_err(format!("param must be 'delta' or 'jp', got {other:?}"))),
    }
}

/// Uniform periodic XY chain.
#[pyclass(name = "SpinChain", module = "gwqed")]
struct PySpinChain {
    spec: SpinChainSpec,
}

#[pymethods]
impl PySpinChain {
    #[new]
    fn new(n: usize, jc: f64, jp: f64, delta: f64) -> PyResult<Self> {
        Ok(Self { spec: SpinChainSpec::new(n, jc, jp, delta).py()? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n
    }

    fn dispersion(&self, k: f64) -> PyResult<f64> {
        spinchain::dispersion_paper(k, &self.spec).py()
    }

    #[pyo3(signature = (continuum = false))]
    fn gap(&self, continuum: bool) -> PyResult<f64> {
        let grid = if continuum { KGrid::Continuum } else { KGrid::Quantized };
        spinchain::energy_gap(&self.spec, grid).py()
    }

    fn allowed_momenta(&self) -> Vec<f64> {
        spinchain::allowed_momenta(self.spec.n, self.spec.parity)
    }

    /// Full many-body spectrum by exact diagonalization (N <= 12).
    fn exact_spectrum(&self) -> PyResult<Vec<f64>> {
        spinchain::exact_spectrum(&self.spec, Boundary::Periodic, None).py()
    }

    /// Full many-body spectrum from the Bogoliubov-de Gennes solution of
    /// both parity sectors.
    fn bdg_spectrum(&self) -> PyResult<Vec<f64>> {
        let mut all = Vec::new();
        for parity in [Parity::Even, Parity::Odd] {
            let spec = self.spec.clone().with_parity(parity);
            let form = spinchain::jw_quadratic_form(&spec, Boundary::Periodic, LadderConvention::Standard);
            all.extend(form.many_body_spectrum(Some(parity)).py()?);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// `"even"` or `"odd"`: sector holding the ground state.
    fn ground_sector(&self) -> &'static str {
        match spinchain::ground_sector(&self.spec, LadderConvention::Standard).0 {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    #[pyo3(signature = (param, h, delta_h = criticality::DEFAULT_DELTA_H))]
    fn fidelity(&self, param: &str, h: f64, delta_h: f64) -> PyResult<f64> {
        criticality::ground_fidelity(&self.spec, scan_param(param)?, h, delta_h).py()
    }

    #[pyo3(signature = (param, h, delta_h = criticality::DEFAULT_DELTA_H))]
    fn fidelity_susceptibility(&self, param: &str, h: f64, delta_h: f64) -> PyResult<f64> {
        criticality::fidelity_susceptibility(&self.spec, scan_param(param)?, h, delta_h).py()
    }

    /// Returns `(chi, peaks)` over `grid`.
    #[pyo3(signature = (param, grid, delta_h = criticality::DEFAULT_DELTA_H))]
    fn fidelity_scan(&self, param: &str, grid: Vec<f64>, delta_h: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let s = criticality::fidelity_scan(&self.spec, scan_param(param)?, &grid, delta_h).py()?;
        Ok((s.chi, s.peaks))
    }

    fn __repr__(&self) -> String {
        let p = self.spec.params().ok();
        match p {
            Some(p) => format!("SpinChain(n={}, jc={}, jp={}, delta={})", self.spec.n, p.jc, p.jp, p.delta),
            None => format!("SpinChain(n={})", self.spec.n),
        }
    }
}

/// `(jc, jp)` for a braided decoherence-free pair at spacing `d_s`.
#[pyfunction]
#[pyo3(signature = (d_s, gain, theta_minus = 0.0, theta_plus = 0.0, center = false))]
fn braided_couplings(d_s: f64, gain: f64, theta_minus: f64, theta_plus: f64, center: bool) -> PyResult<(f64, f64)> {
    let placement = if center { Placement::Centered } else { Placement::default() };
    let setup = PairSetup { placement, theta_plus, ..PairSetup::default() };
    let p = setup.pair(d_s, gain, theta_minus).py()?;
    Ok((p.jc, p.jp))
}

/// Columns `gain, jc, jp`.
#[pyfunction]
#[pyo3(signature = (d_s, gains, theta_minus = 0.0))]
fn scan_vs_gain(d_s: f64, gains: Vec<f64>, theta_minus: f64) -> PyResult<BTreeMap<String, Vec<f64>>> {
    Ok(columns(&interactions::scan_vs_gain(d_s, theta_minus, &gains, &PairSetup::default()).py()?))
}

/// Columns `d_s, jc, jp, jp_over_jc` plus `jp_roots` and `jc_roots`.
#[pyfunction]
#[pyo3(signature = (gain, spacings, theta_minus = 0.0))]
fn scan_vs_separation(gain: f64, spacings: Vec<f64>, theta_minus: f64) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let s = interactions::scan_vs_separation(gain, theta_minus, &spacings, &PairSetup::default()).py()?;
    let mut out = columns(&s.table);
    out.insert("jp_roots".into(), s.jp_roots);
    out.insert("jc_roots".into(), s.jc_roots);
    Ok(out)
}

/// Coupling-strength ratios `g(z_m)/g_ref` of the three-point
/// decoherence-free profile.
#[pyfunction]
#[pyo3(signature = (gain, spacing = std::f64::consts::PI))]
fn df_ratios(gain: f64, spacing: f64) -> PyResult<Vec<f64>> {
    Ok(dfree::df_ratios_m3(gain, spacing).py()?.ratios.to_vec())
}

/// `(best_ratio, residual)` for two coupling points.
#[pyfunction]
#[pyo3(signature = (z1, z2, gain, ratio_max = dfree::M2_RATIO_MAX))]
fn m2_min_residual(z1: f64, z2: f64, gain: f64, ratio_max: f64) -> PyResult<(f64, f64)> {
    dfree::m2_min_residual(z1, z2, gain, ratio_max).py()
}

/// Jump-operator norms of both cascades and the largest deviation between
/// the cascaded Hamiltonian and the closed form.
#[pyfunction]
#[pyo3(signature = (d_s, gain, theta_plus = 0.0, theta_minus = 0.0))]
fn slh_check(d_s: f64, gain: f64, theta_plus: f64, theta_minus: f64) -> PyResult<BTreeMap<String, f64>> {
    let setup = PairSetup { theta_plus, ..PairSetup::default() };
    let (a, b) = setup.braided_pair(d_s, gain).py()?;
    let cfg = setup.config(gain, theta_minus).py()?;
    let atoms = [a.clone(), b.clone()];
    let r = cascade_right(&atoms, &cfg, Ordering::Braided).py()?;
    let l = cascade_left(&atoms, &cfg, Ordering::Braided).py()?;
    let h = gauge_transform(&(&r.hamiltonian + &l.hamiltonian), cfg.theta_plus());
    let pair = EffectivePair::from_atoms(&a, &b, &cfg);
    let closed = interactions::effective_hamiltonian(&pair);
    Ok(BTreeMap::from([
        ("l_r_norm".to_string(), r.jump().op_norm()),
        ("l_l_norm".to_string(), l.jump().op_norm()),
        ("h_max_deviation".to_string(), h.max_abs_diff(&closed)),
        ("jc".to_string(), pair.jc),
        ("jp".to_string(), pair.jp),
    ]))
}

/// Amplitudes `(a1, a2*)` after propagating a lossless guide to `z`.
#[pyfunction]
#[pyo3(signature = (gain, z, a1, a2c, delta_k = 0.0, theta = 0.0, rk4 = false))]
fn propagate(gain: f64, z: f64, a1: Complex64, a2c: Complex64, delta_k: f64, theta: f64, rk4: bool) -> PyResult<(Complex64, Complex64)> {
    let cfg = WaveguideConfig::new(gain, z.max(0.0))
        .py()?
        .with_pump_phases(theta, 0.0)
        .with_delta_k(delta_k);
    let init = ModeAmplitudes::new(a1, a2c);
    let out = if rk4 {
        waveguide::integrate_coupled_wave(&cfg, &init, z, waveguide::DEFAULT_STEP).py()?
    } else {
        waveguide::propagate_analytic(&cfg, &init, z).py()?
    };
    Ok((out.a1, out.a2_conj))
}

/// Gap map and phase labels; returns `(gap, labels, regions)` with rows
/// indexed by delta.
#[pyfunction]
#[pyo3(signature = (jc, deltas, jps, threshold = criticality::DEFAULT_GAP_THRESHOLD))]
fn phase_diagram(jc: f64, deltas: Vec<f64>, jps: Vec<f64>, threshold: f64) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<u8>>, usize)> {
    let pd = criticality::phase_diagram(jc, &deltas, &jps, threshold).py()?;
    Ok((pd.gap, pd.phase_label, pd.regions))
}

/// Runs the command-line front end and returns its output text.
#[pyfunction]
fn run_cli(args: Vec<String>) -> PyResult<String> {
    gwqed_core::cli::execute_args(std::iter::once("gwqed".to_string()).chain(args))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn gwqed(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpinChain>()?;
    m.add_function(wrap_pyfunction!(braided_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(scan_vs_gain, m)?)?;
    m.add_function(wrap_pyfunction!(scan_vs_separation, m)?)?;
    m.add_function(wrap_pyfunction!(df_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(m2_min_residual, m)?)?;
    m.add_function(wrap_pyfunction!(slh_check, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
