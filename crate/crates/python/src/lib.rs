//! Python bindings for the `mimo_detect` library.
//!
//! Channels are passed as lists of rows of Python complex numbers and are the
//! physical (unit-energy symbol) channels; per-layer constellation scaling is
//! applied internally. Symbols are returned as constellation indices.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mimo_detect::constellation::{Constellation as CoreConstellation, ModScheme};
use mimo_detect::decomp::{ql_decompose, ql_decompose_flipped, transform_observation, wld, PuncturedDecomposition};
use mimo_detect::detcore::{detect_one_sided, rescore_candidates, zero_priors, DistanceScaling, SliceMode};
use mimo_detect::hwmodel::{self, FixedPointFormat};
use mimo_detect::linalg::CMatrix;
use mimo_detect::llrpost::{llr_two_sided_2layer, wl_combine, DetectionResult};
use mimo_detect::mumimo::{self, MuScenario, MuTone};
use mimo_detect::sim::{self, parse_distance_mode, SimConfig};
use mimo_detect::{oracle, DetectError};

create_exception!(pymimo, DetectionError, PyValueError);

fn err(e: DetectError) -> PyErr {
    DetectionError::new_err(e.to_string())
}

fn scheme(order: usize) -> PyResult<ModScheme> {
    ModScheme::from_order(order)
        .ok_or_else(|| DetectionError::new_err(format!("unsupported constellation size {order}")))
}

/// Channel, observation, priors and constellations in detector units.
struct Problem {
    h_eff: CMatrix,
    y: Vec<Complex64>,
    priors: Vec<Vec<f64>>,
    cons: Vec<CoreConstellation>,
}

fn problem(
    h: Vec<Vec<Complex64>>,
    y: Vec<Complex64>,
    mods: Vec<usize>,
    priors: Option<Vec<Vec<f64>>>,
) -> PyResult<Problem> {
    let schemes = mods.into_iter().map(scheme).collect::<PyResult<Vec<_>>>()?;
    let h = CMatrix::from_rows(&h).map_err(err)?;
    if h.cols() != schemes.len() {
        return Err(DetectionError::new_err(format!(
            "channel has {} columns for {} constellations",
            h.cols(),
            schemes.len()
        )));
    }
    let scales: Vec<f64> = schemes.iter().map(|s| s.scale()).collect();
    let cons: Vec<CoreConstellation> = schemes.into_iter().map(CoreConstellation::new).collect();
    let priors = priors.unwrap_or_else(|| zero_priors(&cons));
    Ok(Problem {
        h_eff: h.scale_columns(&scales),
        y,
        priors,
        cons,
    })
}

/// Hard decisions, minimum distance and per-layer bit LLRs.
#[pyclass(frozen, get_all)]
struct Detection {
    hard: Vec<usize>,
    dmin: f64,
    llr: Vec<Vec<f64>>,
}

impl From<DetectionResult> for Detection {
    fn from(r: DetectionResult) -> Self {
        Self {
            hard: r.hard,
            dmin: r.dmin,
            llr: r.llr,
        }
    }
}

#[pymethods]
impl Detection {
    fn __repr__(&self) -> String {
        format!(
            "Detection(hard={:?}, dmin={}, llr={:?})",
            self.hard, self.dmin, self.llr
        )
    }
}

/// Gray-labelled constellation with integer levels (2 = BPSK).
#[pyclass(frozen)]
struct Constellation(CoreConstellation);

#[pymethods]
impl Constellation {
    #[new]
    fn new(order: usize) -> PyResult<Self> {
        Ok(Self(CoreConstellation::new(scheme(order)?)))
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn bits(&self) -> usize {
        self.0.bits()
    }

    /// Factor that normalizes the average symbol energy to one.
    #[getter]
    fn scale(&self) -> f64 {
        self.0.scheme().scale()
    }

    fn point(&self, symbol: usize) -> PyResult<Complex64> {
        if symbol >= self.0.size() {
            return Err(DetectionError::new_err(format!("symbol {symbol} out of range")));
        }
        Ok(self.0.point(symbol))
    }

    fn bits_of(&self, symbol: usize) -> PyResult<Vec<i8>> {
        self.point(symbol)?;
        Ok(self.0.bits_of(symbol))
    }

    fn symbol_from_bits(&self, bits: Vec<i8>) -> PyResult<usize> {
        self.0.symbol_from_bits(&bits).map_err(err)
    }

    fn dump(&self) -> String {
        self.0.dump()
    }

    fn __repr__(&self) -> String {
        format!("Constellation({})", self.0.scheme())
    }
}

/// Exact max-log-MAP detection of a 2-layer system from two one-sided lists.
#[pyfunction]
#[pyo3(signature = (h, y, mods, priors=None))]
fn detect_2layer(
    h: Vec<Vec<Complex64>>,
    y: Vec<Complex64>,
    mods: Vec<usize>,
    priors: Option<Vec<Vec<f64>>>,
) -> PyResult<Detection> {
    let p = problem(h, y, mods, priors)?;
    let run = || {
        let d1 = PuncturedDecomposition::from_ql(ql_decompose(&p.h_eff)?)?;
        let d2 = PuncturedDecomposition::from_flipped(ql_decompose_flipped(&p.h_eff)?)?;
        let l1 = detect_one_sided(
            &d1,
            &d1.w.adjoint_mul_vec(&p.y)?,
            &p.priors,
            &p.cons,
            SliceMode::SoftSlicer,
        )?;
        let l2 = detect_one_sided(
            &d2,
            &d2.w.adjoint_mul_vec(&p.y)?,
            &p.priors,
            &p.cons,
            SliceMode::SoftSlicer,
        )?;
        llr_two_sided_2layer(&l1, &l2, &p.cons)
    };
    run().map(Detection::from).map_err(err)
}

/// Detection with one punctured decomposition per layer (2 to 4 layers).
#[pyfunction]
#[pyo3(signature = (h, y, mods, priors=None, distance_mode="H"))]
fn detect_wld(
    h: Vec<Vec<Complex64>>,
    y: Vec<Complex64>,
    mods: Vec<usize>,
    priors: Option<Vec<Vec<f64>>>,
    distance_mode: &str,
) -> PyResult<Detection> {
    let p = problem(h, y, mods, priors)?;
    let mode = parse_distance_mode(distance_mode).map_err(err)?;
    let run = || {
        let lists = (0..p.cons.len())
            .map(|m| {
                let d = wld(&p.h_eff, m)?;
                let list = detect_one_sided(
                    &d,
                    &transform_observation(&d, &p.y)?,
                    &p.priors,
                    &p.cons,
                    SliceMode::SoftSlicer,
                )?;
                match mode {
                    mimo_detect::DistanceMode::H => {
                        rescore_candidates(&list, &p.h_eff, &p.y, &p.priors, &p.cons, DistanceScaling::Unscaled)
                    }
                    mimo_detect::DistanceMode::L => Ok(list),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        wl_combine(&lists, &p.cons, mode)
    };
    run().map(Detection::from).map_err(err)
}

/// Brute-force max-log-MAP over every symbol vector.
#[pyfunction]
#[pyo3(signature = (h, y, mods, priors=None))]
fn exhaustive_map(
    h: Vec<Vec<Complex64>>,
    y: Vec<Complex64>,
    mods: Vec<usize>,
    priors: Option<Vec<Vec<f64>>>,
) -> PyResult<Detection> {
    let p = problem(h, y, mods, priors)?;
    let o = oracle::exhaustive_map(&p.h_eff, &p.y, &p.priors, &p.cons).map_err(err)?;
    Ok(Detection {
        hard: o.hard,
        dmin: o.dmin,
        llr: o.llr,
    })
}

/// Exact ML symbol vector and its squared distance.
#[pyfunction]
fn exact_ml(h: Vec<Vec<Complex64>>, y: Vec<Complex64>, mods: Vec<usize>) -> PyResult<(Vec<usize>, f64)> {
    let p = problem(h, y, mods, None)?;
    oracle::exact_ml(&p.h_eff, &p.y, &p.cons).map_err(err)
}

/// Classifies the co-scheduled user's constellation from `k` tones of a
/// 2x2 system. Returns the chosen constellation size.
#[pyfunction]
fn classify_interferer(
    channels: Vec<Vec<Vec<Complex64>>>,
    observations: Vec<Vec<Complex64>>,
    desired: usize,
    sigma2: f64,
) -> PyResult<usize> {
    if channels.len() != observations.len() {
        return Err(DetectionError::new_err("one observation per channel is required"));
    }
    let tones = channels
        .into_iter()
        .zip(observations)
        .map(|(h, y)| {
            Ok(MuTone {
                h: CMatrix::from_rows(&h).map_err(err)?,
                y,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let s = MuScenario {
        tones,
        desired: scheme(desired)?,
        sigma2,
    };
    Ok(mumimo::classify_interferer(&s).map_err(err)?.interferer.order())
}

/// `(c1, c2, c3, c4, c5)` distinct product-term counts for `p`-PAM.
#[pyfunction]
fn count_distinct_terms(p: usize) -> PyResult<(usize, usize, usize, usize, usize)> {
    Ok(hwmodel::count_distinct_terms(p).map_err(err)?.as_tuple())
}

#[pyfunction]
fn count_coprime_classes(p: usize) -> PyResult<usize> {
    hwmodel::count_coprime_classes(p).map_err(err)
}

/// Shift-add plan for odd constants: `(adder count, listing)`.
#[pyfunction]
fn shiftadd_plan(targets: Vec<u64>) -> PyResult<(usize, String)> {
    let plan = hwmodel::build_shiftadd_plan(&targets).map_err(err)?;
    Ok((plan.cost(), plan.dump()))
}

#[pyfunction]
fn quantize(x: f64, int_bits: u32, frac_bits: u32) -> PyResult<f64> {
    Ok(hwmodel::quantize(
        x,
        FixedPointFormat::new(int_bits, frac_bits).map_err(err)?,
    ))
}

/// Monte-Carlo sweep; returns the CSV text written by the command-line tool.
#[pyfunction]
#[pyo3(signature = (mods, snr_db, trials, detector="wld", distance_mode="H", priors="zero", quant=None, seed=0, threads=1))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    mods: Vec<usize>,
    snr_db: Vec<f64>,
    trials: usize,
    detector: &str,
    distance_mode: &str,
    priors: &str,
    quant: Option<&str>,
    seed: u64,
    threads: usize,
) -> PyResult<String> {
    let schemes = mods.into_iter().map(scheme).collect::<PyResult<Vec<_>>>()?;
    let mut cfg = SimConfig::new(schemes.len(), schemes);
    cfg.snr_db = snr_db;
    cfg.trials = trials;
    cfg.detector = detector.parse().map_err(err)?;
    cfg.distance_mode = parse_distance_mode(distance_mode).map_err(err)?;
    cfg.priors = priors.parse().map_err(err)?;
    cfg.quant = quant.map(str::parse).transpose().map_err(err)?;
    cfg.seed = seed;
    cfg.threads = threads;
    let result = py.detach(|| sim::run_sweep(&cfg)).map_err(err)?;
    Ok(result.to_csv())
}

#[pymodule]
fn pymimo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DetectionError", m.py().get_type::<DetectionError>())?;
    m.add_class::<Constellation>()?;
    m.add_class::<Detection>()?;
    m.add_function(wrap_pyfunction!(detect_2layer, m)?)?;
    m.add_function(wrap_pyfunction!(detect_wld, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_map, m)?)?;
    m.add_function(wrap_pyfunction!(exact_ml, m)?)?;
    m.add_function(wrap_pyfunction!(classify_interferer, m)?)?;
    m.add_function(wrap_pyfunction!(count_distinct_terms, m)?)?;
    m.add_function(wrap_pyfunction!(count_coprime_classes, m)?)?;
    m.add_function(wrap_pyfunction!(shiftadd_plan, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
