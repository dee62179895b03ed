//! Receiver-intensity engines for coherent (Glauber) and number (Fock)
//! state transmitters, the general coupler-output intensity with its
//! inter-signal interference term, the two-user single-photon output state
//! and Hong-Ou-Mandel coincidence.
//!
//! Glauber networks detect coherently (`|sum of amplitudes|^2`); Fock
//! networks detect incoherently (`sum of |amplitude|^2`) because the field
//! expectation of a number state vanishes.

use num_complex::Complex64;

use crate::codes::ChipPartition;
use crate::coupler::CouplerMatrix;
use crate::encoder::{decode, encode};
use crate::error::{QcdmaError, Result};
use crate::wavepacket::{inner_product, time_shift, to_time, SpectralWavepacket};

/// Pure-state family of one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    /// Coherent state with complex amplitude `alpha`; mean intensity
    /// `|alpha|^2`. `alpha = 0` is the vacuum.
    Glauber { alpha: Complex64 },
    /// Number state with exactly `n` photons; mean intensity `n`, zero
    /// field expectation.
    Fock { n: u32 },
    /// Any other pure state, reduced to the two quantities the intensity
    /// formulas consume: the mean intensity and the field-mean trace.
    /// States with vanishing field expectation (number-like,
    /// squeezed-like) declare `field_mean_zero = true`; no field mean is
    /// ever inferred.
    GenericPure { mean_intensity: f64, field_mean_zero: bool },
}

impl StateKind {
    pub fn mean_intensity(&self) -> f64 {
        match self {
            StateKind::Glauber { alpha } => alpha.norm_sqr(),
            StateKind::Fock { n } => *n as f64,
            StateKind::GenericPure { mean_intensity, .. } => *mean_intensity,
        }
    }
}

/// One transmitter: its state family, wavepacket, spectral code and an
/// asynchronous launch shift.
#[derive(Debug, Clone)]
pub struct TransmitterSpec {
    pub kind: StateKind,
    pub wavepacket: SpectralWavepacket,
    pub code: crate::codes::Code,
    pub t_offset: f64,
}

/// A full network: coupler, transmitters, the shared chip partition and
/// the receiver-to-code assignment `d(r)`.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    coupler: CouplerMatrix,
    transmitters: Vec<TransmitterSpec>,
    decode_assignment: Vec<usize>,
    partition: ChipPartition,
}

impl NetworkSpec {
    /// `decode_assignment = None` defaults to the identity (receiver `r`
    /// decodes transmitter `r`'s code).
    pub fn new(
        coupler: CouplerMatrix,
        transmitters: Vec<TransmitterSpec>,
        decode_assignment: Option<Vec<usize>>,
        partition: ChipPartition,
    ) -> Result<Self> {
        let m = coupler.m();
        if transmitters.len() != m {
            return Err(QcdmaError::LengthMismatch { left: transmitters.len(), right: m });
        }
        let assignment = decode_assignment.unwrap_or_else(|| (0..m).collect());
        if assignment.len() != m {
            return Err(QcdmaError::LengthMismatch { left: assignment.len(), right: m });
        }
        for &d in &assignment {
            if d >= m {
                return Err(QcdmaError::IndexOutOfRange { index: d, len: m });
            }
        }
        for (i, tx) in transmitters.iter().enumerate() {
            if tx.wavepacket.grid() != partition.grid() {
                return Err(QcdmaError::GridMismatch);
            }
            if tx.code.n_chips() != partition.n_chips() {
                return Err(QcdmaError::LengthMismatch {
                    left: tx.code.n_chips(),
                    right: partition.n_chips(),
                });
            }
            if !tx.t_offset.is_finite() {
                return Err(QcdmaError::Config(format!("transmitter {i} t_offset is not finite")));
            }
        }
        Ok(Self { coupler, transmitters, decode_assignment: assignment, partition })
    }

    pub fn coupler(&self) -> &CouplerMatrix {
        &self.coupler
    }

    pub fn transmitters(&self) -> &[TransmitterSpec] {
        &self.transmitters
    }

    pub fn decode_assignment(&self) -> &[usize] {
        &self.decode_assignment
    }

    pub fn partition(&self) -> &ChipPartition {
        &self.partition
    }

    pub fn n_users(&self) -> usize {
        self.coupler.m()
    }

    /// Sum of the transmitters' mean intensities.
    pub fn total_input_intensity(&self) -> f64 {
        self.transmitters.iter().map(|t| t.kind.mean_intensity()).sum()
    }

    /// Wavepacket of sender `s` as receiver `r` sees it: encoded with the
    /// sender's code, decoded with code `d(r)`, shifted by the sender's
    /// launch offset.
    pub fn decoded_wavepacket(&self, s: usize, r: usize) -> Result<SpectralWavepacket> {
        let tx = &self.transmitters[s];
        let decode_code = &self.transmitters[self.decode_assignment[r]].code;
        let enc = encode(&tx.wavepacket, &self.partition, &tx.code)?;
        let dec = decode(&enc, &self.partition, decode_code)?;
        Ok(if tx.t_offset == 0.0 { dec } else { time_shift(&dec, tx.t_offset) })
    }

    /// Wavepacket of sender `s` at the coupler input (encoded, shifted,
    /// not yet decoded).
    pub fn encoded_wavepacket(&self, s: usize) -> Result<SpectralWavepacket> {
        let tx = &self.transmitters[s];
        let enc = encode(&tx.wavepacket, &self.partition, &tx.code)?;
        Ok(if tx.t_offset == 0.0 { enc } else { time_shift(&enc, tx.t_offset) })
    }
}

/// Nonnegative per-receiver intensity rows on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace {
    times: Vec<f64>,
    d_t: f64,
    rows: Vec<Vec<f64>>,
}

impl IntensityTrace {
    pub fn new(times: Vec<f64>, d_t: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &rows {
            if row.len() != times.len() {
                return Err(QcdmaError::LengthMismatch { left: row.len(), right: times.len() });
            }
        }
        Ok(Self { times, d_t, rows })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn d_t(&self) -> f64 {
        self.d_t
    }

    pub fn n_receivers(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Trapezoid-free Riemann integral `sum I(t) d_t` of one row.
    pub fn integrated(&self, r: usize) -> f64 {
        self.rows[r].iter().sum::<f64>() * self.d_t
    }

    pub fn total_integrated(&self) -> f64 {
        (0..self.rows.len()).map(|r| self.integrated(r)).sum()
    }

    pub fn index_nearest(&self, t: f64) -> usize {
        if self.times.is_empty() {
            return 0;
        }
        let m = ((t - self.times[0]) / self.d_t).round();
        (m.max(0.0) as usize).min(self.times.len() - 1)
    }

    pub fn value_nearest(&self, r: usize, t: f64) -> f64 {
        self.rows[r][self.index_nearest(t)]
    }

    pub fn argmax_time(&self, r: usize) -> f64 {
        let (idx, _) = self.rows[r]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty trace");
        self.times[idx]
    }

    /// Divides every row by a reference intensity (peak-normalized
    /// reporting).
    pub fn normalized_by(&self, reference: f64) -> IntensityTrace {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|v| v / reference).collect())
            .collect();
        IntensityTrace { times: self.times.clone(), d_t: self.d_t, rows }
    }
}

/// Complex receiver amplitude trace `A_r(t)` (Glauber networks only).
#[derive(Debug, Clone)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub d_t: f64,
    pub values: Vec<Complex64>,
}

/// Peak intensity `|xi(t0)|^2` of the unencoded reference pulse at the
/// nearest time sample; the divisor used by peak-normalized reporting.
pub fn reference_peak_intensity(wp: &SpectralWavepacket, t0: f64) -> f64 {
    to_time(wp).sample_nearest(t0).norm_sqr()
}

/// `I(t) = mean_intensity * |xi^e(t - t_offset)|^2` for one transmitter in
/// isolation; the temporal shape does not depend on the state family.
pub fn single_source_intensity(
    tx: &TransmitterSpec,
    partition: &ChipPartition,
) -> Result<IntensityTrace> {
    let enc = encode(&tx.wavepacket, partition, &tx.code)?;
    let shifted = if tx.t_offset == 0.0 { enc } else { time_shift(&enc, tx.t_offset) };
    let tw = to_time(&shifted);
    let intensity_mean = tx.kind.mean_intensity();
    let row: Vec<f64> = tw.amplitudes().iter().map(|a| intensity_mean * a.norm_sqr()).collect();
    IntensityTrace::new(tw.times().to_vec(), tw.d_t(), vec![row])
}

fn require_all_glauber(net: &NetworkSpec) -> Result<Vec<Complex64>> {
    net.transmitters()
        .iter()
        .enumerate()
        .map(|(i, tx)| match tx.kind {
            StateKind::Glauber { alpha } => Ok(alpha),
            _ => Err(QcdmaError::WrongEngine { index: i, expected: "Glauber" }),
        })
        .collect()
}

fn require_all_fock(net: &NetworkSpec) -> Result<Vec<u32>> {
    net.transmitters()
        .iter()
        .enumerate()
        .map(|(i, tx)| match tx.kind {
            StateKind::Fock { n } => Ok(n),
            _ => Err(QcdmaError::WrongEngine { index: i, expected: "Fock" }),
        })
        .collect()
}

/// Coherent receiver: `A_r(t) = sum_s B_rs alpha_s xi_s^{e_s d_{d(r)}}(t)`,
/// intensity `|A_r(t)|^2`.
pub fn glauber_receiver_trace(
    net: &NetworkSpec,
    r: usize,
) -> Result<(AmplitudeTrace, IntensityTrace)> {
    let alphas = require_all_glauber(net)?;
    if r >= net.n_users() {
        return Err(QcdmaError::IndexOutOfRange { index: r, len: net.n_users() });
    }
    let grid = net.partition().grid();
    let n = grid.n_samples;
    let mut amplitude = vec![Complex64::new(0.0, 0.0); n];
    let mut times: Option<(Vec<f64>, f64)> = None;
    for (s, alpha) in alphas.iter().enumerate() {
        if alpha.norm_sqr() == 0.0 && times.is_some() {
            continue;
        }
        let tw = to_time(&net.decoded_wavepacket(s, r)?);
        if times.is_none() {
            times = Some((tw.times().to_vec(), tw.d_t()));
        }
        if alpha.norm_sqr() == 0.0 {
            continue;
        }
        let weight = net.coupler().entry(r, s) * alpha;
        for (acc, a) in amplitude.iter_mut().zip(tw.amplitudes()) {
            *acc += weight * a;
        }
    }
    let (times, d_t) = times.expect("at least one transmitter");
    let intensity: Vec<f64> = amplitude.iter().map(|a| a.norm_sqr()).collect();
    let trace = IntensityTrace::new(times.clone(), d_t, vec![intensity])?;
    Ok((AmplitudeTrace { times, d_t, values: amplitude }, trace))
}

/// Incoherent receiver:
/// `I_r(t) = sum_s n_s |B_rs|^2 |xi_s^{e_s d_{d(r)}}(t)|^2`; no cross terms.
pub fn fock_receiver_trace(net: &NetworkSpec, r: usize) -> Result<IntensityTrace> {
    let ns = require_all_fock(net)?;
    if r >= net.n_users() {
        return Err(QcdmaError::IndexOutOfRange { index: r, len: net.n_users() });
    }
    let grid = net.partition().grid();
    let mut row = vec![0.0f64; grid.n_samples];
    let mut times: Option<(Vec<f64>, f64)> = None;
    for (s, &n_photons) in ns.iter().enumerate() {
        if n_photons == 0 && times.is_some() {
            continue;
        }
        let tw = to_time(&net.decoded_wavepacket(s, r)?);
        if times.is_none() {
            times = Some((tw.times().to_vec(), tw.d_t()));
        }
        if n_photons == 0 {
            continue;
        }
        let weight = n_photons as f64 * net.coupler().entry(r, s).norm_sqr();
        for (acc, a) in row.iter_mut().zip(tw.amplitudes()) {
            *acc += weight * a.norm_sqr();
        }
    }
    let (times, d_t) = times.expect("at least one transmitter");
    IntensityTrace::new(times, d_t, vec![row])
}

/// All receiver rows of a Glauber network.
pub fn glauber_network_trace(net: &NetworkSpec) -> Result<IntensityTrace> {
    let mut rows = Vec::with_capacity(net.n_users());
    let mut times: Option<(Vec<f64>, f64)> = None;
    for r in 0..net.n_users() {
        let (_, trace) = glauber_receiver_trace(net, r)?;
        if times.is_none() {
            times = Some((trace.times().to_vec(), trace.d_t()));
        }
        rows.push(trace.rows()[0].clone());
    }
    let (times, d_t) = times.expect("at least one receiver");
    IntensityTrace::new(times, d_t, rows)
}

/// All receiver rows of a Fock network.
pub fn fock_network_trace(net: &NetworkSpec) -> Result<IntensityTrace> {
    let mut rows = Vec::with_capacity(net.n_users());
    let mut times: Option<(Vec<f64>, f64)> = None;
    for r in 0..net.n_users() {
        let trace = fock_receiver_trace(net, r)?;
        if times.is_none() {
            times = Some((trace.times().to_vec(), trace.d_t()));
        }
        rows.push(trace.rows()[0].clone());
    }
    let (times, d_t) = times.expect("at least one receiver");
    IntensityTrace::new(times, d_t, rows)
}

/// Field-expectation trace of one sender feeding the general engine.
#[derive(Debug, Clone)]
pub enum FieldMean {
    /// Number-like and squeezed-like inputs: identically zero field mean.
    Zero,
    /// Coherent-like inputs: `E_s(t)` sampled on the shared time grid.
    Trace(Vec<Complex64>),
}

/// Per-sender input to [`coupler_output_intensity_general`].
#[derive(Debug, Clone)]
pub struct SenderSignal {
    pub intensity: Vec<f64>,
    pub field_mean: FieldMean,
}

/// General coupler-output intensity
/// `I_r = sum_s |B_rs|^2 I_s + sum_{s != s'} Re(B*_rs B_rs' E*_s E_s')`.
/// With all field means declared zero this is the incoherent sum.
pub fn coupler_output_intensity_general(
    inputs: &[SenderSignal],
    b: &CouplerMatrix,
) -> Result<Vec<Vec<f64>>> {
    if inputs.len() != b.m() {
        return Err(QcdmaError::LengthMismatch { left: inputs.len(), right: b.m() });
    }
    let n = inputs
        .first()
        .map(|s| s.intensity.len())
        .ok_or_else(|| QcdmaError::Config("general engine needs at least one sender".into()))?;
    for sig in inputs {
        if sig.intensity.len() != n {
            return Err(QcdmaError::LengthMismatch { left: sig.intensity.len(), right: n });
        }
        if let FieldMean::Trace(e) = &sig.field_mean {
            if e.len() != n {
                return Err(QcdmaError::LengthMismatch { left: e.len(), right: n });
            }
        }
    }
    let m = b.m();
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let mut row = vec![0.0f64; n];
        for (s, sig) in inputs.iter().enumerate() {
            let w = b.entry(r, s).norm_sqr();
            for (acc, i_s) in row.iter_mut().zip(&sig.intensity) {
                *acc += w * i_s;
            }
        }
        for (s, sig_s) in inputs.iter().enumerate() {
            let FieldMean::Trace(e_s) = &sig_s.field_mean else { continue };
            for (sp, sig_sp) in inputs.iter().enumerate() {
                if sp == s {
                    continue;
                }
                let FieldMean::Trace(e_sp) = &sig_sp.field_mean else { continue };
                let w = b.entry(r, s).conj() * b.entry(r, sp);
                for (t, acc) in row.iter_mut().enumerate() {
                    *acc += (w * e_s[t].conj() * e_sp[t]).re;
                }
            }
        }
        // Interference can round a few ulp below zero.
        for v in &mut row {
            *v = v.max(0.0);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// The four components of the decoded two-user single-photon output state,
/// the overlap of the encoded wavepackets and the two-photon normalization
/// `N_f = sqrt(1 + |<xi_1^{e_1}|xi_2^{e_2}>|^2)`.
#[derive(Debug, Clone)]
pub struct TwoUserFockOutput {
    /// Both photons at receiver 1 (`B11 B12`).
    pub both_to_receiver_one: Complex64,
    /// Photon 1 to receiver 1, photon 2 to receiver 2 (`B11 B22`).
    pub aligned: Complex64,
    /// Photon 1 to receiver 2, photon 2 to receiver 1 (`B21 B12`).
    pub swapped: Complex64,
    /// Both photons at receiver 2 (`B21 B22`).
    pub both_to_receiver_two: Complex64,
    /// `<xi_1^{e_1} | xi_2^{e_2}>` at the coupler input.
    pub encoded_overlap: Complex64,
    /// `sqrt(1 + |overlap|^2)`.
    pub normalization_factor: f64,
}

/// Expands the star-coupler output for a two-transmitter single-photon
/// network over the four two-photon basis states.
pub fn two_user_fock_output(net: &NetworkSpec) -> Result<TwoUserFockOutput> {
    if net.n_users() != 2 {
        return Err(QcdmaError::Config(format!(
            "two-user expansion needs exactly 2 transmitters, got {}",
            net.n_users()
        )));
    }
    let ns = require_all_fock(net)?;
    if ns != [1, 1] {
        return Err(QcdmaError::Config(format!(
            "two-user expansion needs single photons, got n = {ns:?}"
        )));
    }
    let e1 = net.encoded_wavepacket(0)?;
    let e2 = net.encoded_wavepacket(1)?;
    let overlap = inner_product(&e1, &e2)?;
    let b = net.coupler();
    Ok(TwoUserFockOutput {
        both_to_receiver_one: b.entry(0, 0) * b.entry(0, 1),
        aligned: b.entry(0, 0) * b.entry(1, 1),
        swapped: b.entry(1, 0) * b.entry(0, 1),
        both_to_receiver_two: b.entry(1, 0) * b.entry(1, 1),
        encoded_overlap: overlap,
        normalization_factor: (1.0 + overlap.norm_sqr()).sqrt(),
    })
}

/// Coincidence probability for two single photons meeting at a 2x2
/// coupler:
/// `P = |B11 B22|^2 + |B21 B12|^2 + 2 Re(B11 B22 conj(B21 B12)) |<xi_1|xi_2>|^2`.
/// For a balanced coupler this is `(1 - |<xi_1|xi_2>|^2) / 2`.
pub fn hom_coincidence(
    b: &CouplerMatrix,
    xi1: &SpectralWavepacket,
    xi2: &SpectralWavepacket,
) -> Result<f64> {
    if b.m() != 2 {
        return Err(QcdmaError::Config(format!("HOM needs a 2x2 coupler, got {}x{}", b.m(), b.m())));
    }
    let overlap_sq = inner_product(xi1, xi2)?.norm_sqr();
    let aligned = b.entry(0, 0) * b.entry(1, 1);
    let swapped = b.entry(1, 0) * b.entry(0, 1);
    Ok(aligned.norm_sqr() + swapped.norm_sqr() + 2.0 * (aligned * swapped.conj()).re * overlap_sq)
}
