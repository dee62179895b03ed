//! Python bindings for the qcdma simulator: grids, wavepackets, codes,
//! couplers, networks and the Monte-Carlo statistics.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qcdma::codes as qcodes;
use qcdma::coupler as qcoupler;
use qcdma::encoder;
use qcdma::experiments;
use qcdma::qstate;
use qcdma::wavepacket as qwp;

fn err(e: qcdma::QcdmaError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Uniform angular-frequency grid.
#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: qwp::FrequencyGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(omega0: f64, delta: f64, span_sigmas: f64, n_samples: usize) -> PyResult<Self> {
        Ok(Self { inner: qwp::FrequencyGrid::new(omega0, delta, span_sigmas, n_samples).map_err(err)? })
    }

    #[staticmethod]
    fn default() -> Self {
        Self { inner: qwp::FrequencyGrid::default_grid() }
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.omega0
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples
    }

    #[getter]
    fn d_omega(&self) -> f64 {
        self.inner.d_omega()
    }

    #[getter]
    fn d_t(&self) -> f64 {
        self.inner.d_t()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(omega0={}, delta={}, span_sigmas={}, n_samples={})",
            self.inner.omega0, self.inner.delta, self.inner.span_sigmas, self.inner.n_samples
        )
    }
}

/// Spectral photon-wavepacket, unit L2 norm.
#[pyclass(name = "Wavepacket", from_py_object)]
#[derive(Clone)]
struct PyWavepacket {
    inner: qwp::SpectralWavepacket,
}

#[pymethods]
impl PyWavepacket {
    #[staticmethod]
    fn gaussian(grid: &PyGrid, t0: f64) -> PyResult<Self> {
        Ok(Self { inner: qwp::gaussian_spectral(&grid.inner, t0).map_err(err)? })
    }

    #[staticmethod]
    fn superpose(terms: Vec<(Complex64, PyWavepacket)>) -> PyResult<(Self, f64)> {
        let refs: Vec<(Complex64, &qwp::SpectralWavepacket)> =
            terms.iter().map(|(c, wp)| (*c, &wp.inner)).collect();
        let (wp, pre_norm) = qwp::superpose(&refs).map_err(err)?;
        Ok((Self { inner: wp }, pre_norm))
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn inner_product(&self, other: &PyWavepacket) -> PyResult<Complex64> {
        qwp::inner_product(&self.inner, &other.inner).map_err(err)
    }

    /// `(omegas, |xi(omega)|^2)` samples.
    fn spectrum(&self) -> (Vec<f64>, Vec<f64>) {
        let omegas = self.inner.grid().omegas().collect();
        let energy = self.inner.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        (omegas, energy)
    }

    /// `(times, |xi(t)|^2)` samples of the temporal wavepacket.
    fn intensity_trace(&self) -> (Vec<f64>, Vec<f64>) {
        let tw = qwp::to_time(&self.inner);
        (tw.times().to_vec(), tw.intensity())
    }

    fn time_amplitude_at(&self, t: f64) -> Complex64 {
        qwp::time_amplitude_at(&self.inner, t)
    }

    fn effective_duration(&self) -> PyResult<f64> {
        qwp::to_time(&self.inner).effective_duration().map_err(err)
    }

    fn time_shift(&self, tau: f64) -> Self {
        Self { inner: qwp::time_shift(&self.inner, tau) }
    }

    fn encoded(&self, partition: &PyPartition, code: &PyCode) -> PyResult<Self> {
        Ok(Self { inner: encoder::encode(&self.inner, &partition.inner, &code.inner).map_err(err)? })
    }

    fn decoded(&self, partition: &PyPartition, code: &PyCode) -> PyResult<Self> {
        Ok(Self { inner: encoder::decode(&self.inner, &partition.inner, &code.inner).map_err(err)? })
    }
}

/// Equal-energy chip partition.
#[pyclass(name = "Partition", from_py_object)]
#[derive(Clone)]
struct PyPartition {
    inner: qcodes::ChipPartition,
}

#[pymethods]
impl PyPartition {
    #[staticmethod]
    fn equal_energy(wp: &PyWavepacket, n_chips: usize) -> PyResult<Self> {
        Ok(Self { inner: qcodes::partition_equal_energy(&wp.inner, n_chips).map_err(err)? })
    }

    #[staticmethod]
    fn gaussian_quantile(grid: &PyGrid, n_chips: usize) -> PyResult<Self> {
        Ok(Self { inner: qcodes::gaussian_quantile_partition(&grid.inner, n_chips).map_err(err)? })
    }

    #[getter]
    fn n_chips(&self) -> usize {
        self.inner.n_chips()
    }

    fn boundaries(&self) -> Vec<f64> {
        self.inner.boundaries()
    }

    fn chip_energies(&self) -> Vec<f64> {
        self.inner.chip_energies().to_vec()
    }

    fn max_energy_deviation(&self) -> f64 {
        self.inner.max_energy_deviation()
    }

    fn walsh_residual_bound(&self) -> f64 {
        self.inner.walsh_residual_bound()
    }
}

/// Binary (or general real) spectral phase code.
#[pyclass(name = "Code", from_py_object)]
#[derive(Clone)]
struct PyCode {
    inner: qcodes::Code,
}

#[pymethods]
impl PyCode {
    #[staticmethod]
    fn random(n_chips: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: qcodes::random_binary_code(n_chips, seed).map_err(err)? })
    }

    #[staticmethod]
    fn walsh(n_chips: usize, index: usize) -> PyResult<Self> {
        Ok(Self { inner: qcodes::walsh_hadamard_code(n_chips, index).map_err(err)? })
    }

    #[staticmethod]
    fn from_phases(phases: Vec<f64>, label: String) -> PyResult<Self> {
        Ok(Self { inner: qcodes::Code::new(phases, label).map_err(err)? })
    }

    #[getter]
    fn n_chips(&self) -> usize {
        self.inner.n_chips()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn phases(&self) -> Vec<f64> {
        self.inner.phases().to_vec()
    }

    fn inner_product(&self, other: &PyCode) -> PyResult<Complex64> {
        qcodes::code_inner_product(&self.inner, &other.inner).map_err(err)
    }

    /// Encode-by-self then decode-by-other as a single code.
    fn compose(&self, other: &PyCode) -> PyResult<Self> {
        Ok(Self { inner: encoder::compose_codes(&self.inner, &other.inner).map_err(err)? })
    }
}

/// Unitary star-coupler matrix.
#[pyclass(name = "Coupler", from_py_object)]
#[derive(Clone)]
struct PyCoupler {
    inner: qcoupler::CouplerMatrix,
}

#[pymethods]
impl PyCoupler {
    #[staticmethod]
    fn balanced_2x2() -> Self {
        Self { inner: qcoupler::balanced_2x2() }
    }

    #[staticmethod]
    fn dft(m: usize) -> PyResult<Self> {
        Ok(Self { inner: qcoupler::dft_coupler(m).map_err(err)? })
    }

    #[staticmethod]
    fn hadamard(m: usize) -> PyResult<Self> {
        Ok(Self { inner: qcoupler::hadamard_coupler(m).map_err(err)? })
    }

    #[staticmethod]
    fn custom(entries: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let m = entries.len();
        let flat: Vec<Complex64> = entries.into_iter().flatten().collect();
        Ok(Self { inner: qcoupler::CouplerMatrix::new(m, flat).map_err(err)? })
    }

    fn rephase(&self, row_phases: Vec<f64>, col_phases: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: qcoupler::rephase(&self.inner, &row_phases, &col_phases).map_err(err)? })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.m())
            .map(|r| (0..self.inner.m()).map(|s| self.inner.entry(r, s)).collect())
            .collect()
    }

    fn unitarity_residual(&self) -> f64 {
        self.inner.unitarity_residual()
    }
}

/// One transmitter of a network.
#[pyclass(name = "Transmitter", from_py_object)]
#[derive(Clone)]
struct PyTransmitter {
    inner: qstate::TransmitterSpec,
}

#[pymethods]
impl PyTransmitter {
    #[staticmethod]
    #[pyo3(signature = (alpha, wavepacket, code, t_offset = 0.0))]
    fn glauber(alpha: Complex64, wavepacket: &PyWavepacket, code: &PyCode, t_offset: f64) -> Self {
        Self {
            inner: qstate::TransmitterSpec {
                kind: qstate::StateKind::Glauber { alpha },
                wavepacket: wavepacket.inner.clone(),
                code: code.inner.clone(),
                t_offset,
            },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (n, wavepacket, code, t_offset = 0.0))]
    fn fock(n: u32, wavepacket: &PyWavepacket, code: &PyCode, t_offset: f64) -> Self {
        Self {
            inner: qstate::TransmitterSpec {
                kind: qstate::StateKind::Fock { n },
                wavepacket: wavepacket.inner.clone(),
                code: code.inner.clone(),
                t_offset,
            },
        }
    }

    #[getter]
    fn mean_intensity(&self) -> f64 {
        self.inner.kind.mean_intensity()
    }
}

/// A validated network: coupler, transmitters, shared partition and the
/// receiver-to-code assignment.
#[pyclass(name = "Network")]
struct PyNetwork {
    inner: qstate::NetworkSpec,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (coupler, transmitters, partition, decode_assignment = None))]
    fn new(
        coupler: &PyCoupler,
        transmitters: Vec<PyTransmitter>,
        partition: &PyPartition,
        decode_assignment: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let txs = transmitters.into_iter().map(|t| t.inner).collect();
        Ok(Self {
            inner: qstate::NetworkSpec::new(
                coupler.inner.clone(),
                txs,
                decode_assignment,
                partition.inner.clone(),
            )
            .map_err(err)?,
        })
    }

    /// `(times, [rows])` of the coherent-detection intensities.
    fn glauber_trace(&self) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let trace = qstate::glauber_network_trace(&self.inner).map_err(err)?;
        Ok((trace.times().to_vec(), trace.rows().to_vec()))
    }

    /// `(times, [rows])` of the incoherent-detection intensities.
    fn fock_trace(&self) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let trace = qstate::fock_network_trace(&self.inner).map_err(err)?;
        Ok((trace.times().to_vec(), trace.rows().to_vec()))
    }

    fn decoded_wavepacket(&self, sender: usize, receiver: usize) -> PyResult<PyWavepacket> {
        Ok(PyWavepacket { inner: self.inner.decoded_wavepacket(sender, receiver).map_err(err)? })
    }

    fn energy_residual(&self) -> PyResult<f64> {
        experiments::energy_check(&self.inner).map_err(err)
    }

    fn two_user_fock_output<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = qstate::two_user_fock_output(&self.inner).map_err(err)?;
        let dict = PyDict::new(py);
        dict.set_item("both_to_receiver_one", out.both_to_receiver_one)?;
        dict.set_item("aligned", out.aligned)?;
        dict.set_item("swapped", out.swapped)?;
        dict.set_item("both_to_receiver_two", out.both_to_receiver_two)?;
        dict.set_item("encoded_overlap", out.encoded_overlap)?;
        dict.set_item("normalization_factor", out.normalization_factor)?;
        Ok(dict)
    }
}

/// Coincidence probability of two single photons at a 2x2 coupler.
#[pyfunction]
fn hom_coincidence(coupler: &PyCoupler, xi1: &PyWavepacket, xi2: &PyWavepacket) -> PyResult<f64> {
    qstate::hom_coincidence(&coupler.inner, &xi1.inner, &xi2.inner).map_err(err)
}

/// Peak intensity of the unencoded reference pulse (normalization divisor).
#[pyfunction]
fn reference_peak_intensity(wp: &PyWavepacket, t0: f64) -> f64 {
    qstate::reference_peak_intensity(&wp.inner, t0)
}

/// Ratio of effective durations after/before encoding.
#[pyfunction]
fn spreading_factor(wp: &PyWavepacket, code: &PyCode, partition: &PyPartition) -> PyResult<f64> {
    experiments::spreading_factor(&wp.inner, &code.inner, &partition.inner).map_err(err)
}

/// Monte-Carlo peak-suppression statistics over random codes.
#[pyfunction]
fn mc_peak_stats<'py>(
    py: Python<'py>,
    n_chips: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let stats = experiments::mc_peak_stats(n_chips, trials, seed).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("n_chips", stats.n_chips)?;
    dict.set_item("trials", stats.trials)?;
    dict.set_item("mean_peak_ratio", stats.mean_peak_ratio)?;
    dict.set_item("se_peak_ratio", stats.se_peak_ratio)?;
    dict.set_item("mean_cross_re", stats.mean_cross_re)?;
    dict.set_item("mean_cross_im", stats.mean_cross_im)?;
    dict.set_item("var_cross_re", stats.var_cross_re)?;
    dict.set_item("var_cross_im", stats.var_cross_im)?;
    dict.set_item("mean_cross_sq", stats.mean_cross_sq)?;
    dict.set_item("se_cross_sq", stats.se_cross_sq)?;
    Ok(dict)
}

/// Monte-Carlo mean of the normalized receiver intensities at t0 for the
/// two-user both-send-one configuration.
#[pyfunction]
#[pyo3(signature = (n_chips, trials, seed, state_kind = "glauber"))]
fn mc_receiver_mean<'py>(
    py: Python<'py>,
    n_chips: usize,
    trials: usize,
    seed: u64,
    state_kind: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = match state_kind {
        "glauber" => experiments::EngineKind::Glauber,
        "fock" => experiments::EngineKind::Fock,
        other => return Err(PyValueError::new_err(format!("unknown state kind {other:?}"))),
    };
    let stats = experiments::mc_receiver_mean(n_chips, trials, seed, kind).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("n_chips", stats.n_chips)?;
    dict.set_item("trials", stats.trials)?;
    dict.set_item("mean_receiver_1", stats.mean_receiver_1)?;
    dict.set_item("se_receiver_1", stats.se_receiver_1)?;
    dict.set_item("mean_receiver_2", stats.mean_receiver_2)?;
    dict.set_item("se_receiver_2", stats.se_receiver_2)?;
    dict.set_item("nominal", stats.nominal)?;
    Ok(dict)
}

#[pymodule]
fn qcdma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyWavepacket>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyCode>()?;
    m.add_class::<PyCoupler>()?;
    m.add_class::<PyTransmitter>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(hom_coincidence, m)?)?;
    m.add_function(wrap_pyfunction!(reference_peak_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(spreading_factor, m)?)?;
    m.add_function(wrap_pyfunction!(mc_peak_stats, m)?)?;
    m.add_function(wrap_pyfunction!(mc_receiver_mean, m)?)?;
    Ok(())
}
