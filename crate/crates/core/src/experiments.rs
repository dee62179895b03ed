//! Scenario runners and Monte-Carlo statistics: OOK bit sequences through
//! a network, peak-suppression and receiver-mean estimators over random
//! codes, time-spreading factors and energy accounting.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{
    mask_from_code, partition_equal_energy, random_binary_code_from, walsh_hadamard_code,
    ChipPartition, Code,
};
use crate::coupler::{balanced_2x2, dft_coupler, hadamard_coupler, CouplerMatrix};
use crate::encoder::{apply_mask, decode, encode, Direction};
use crate::error::{QcdmaError, Result};
use crate::qstate::{
    fock_network_trace, glauber_network_trace, reference_peak_intensity, IntensityTrace,
    NetworkSpec, StateKind, TransmitterSpec,
};
use crate::rng;
use crate::wavepacket::{gaussian_spectral, time_amplitude_at, to_time, FrequencyGrid, SpectralWavepacket};

/// Which intensity engine a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Glauber,
    Fock,
}

/// Code family of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeKind {
    /// Per-user random binary codes; user `u` draws from `stream(seed, u)`.
    Random { seed: u64 },
    /// Walsh-Hadamard rows, one index per user.
    Walsh { indices: Vec<usize> },
}

/// Coupler family of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplerKind {
    Balanced2x2,
    Dft { m: usize },
    Hadamard { m: usize },
}

impl CouplerKind {
    pub fn build(&self) -> Result<CouplerMatrix> {
        match self {
            CouplerKind::Balanced2x2 => Ok(balanced_2x2()),
            CouplerKind::Dft { m } => dft_coupler(*m),
            CouplerKind::Hadamard { m } => hadamard_coupler(*m),
        }
    }
}

/// Launch-offset model: synchronous (the worst case for multiaccess
/// interference) or one uniform offset per user within a bit period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsyncOffsets {
    None,
    Uniform { seed: u64 },
}

/// An on-off-keyed multi-user transmission run.
#[derive(Debug, Clone)]
pub struct OokScenario {
    /// One binary sequence per user; equal lengths.
    pub bits: Vec<Vec<u8>>,
    /// Slot length in units of tau_p = 1/delta.
    pub bit_period: f64,
    pub n_chips: usize,
    pub code_kind: CodeKind,
    pub state_kind: EngineKind,
    pub coupler_kind: CouplerKind,
    pub async_offsets: AsyncOffsets,
    /// Permit encoded pulses longer than a bit period to overlap
    /// neighbouring slots.
    pub allow_overlap: bool,
    pub grid: FrequencyGrid,
}

impl OokScenario {
    /// Defaults from the two-user worst-case configuration: Nc = 63,
    /// balanced 2x2 coupler, synchronous users, bit period 4 Nc tau_p.
    pub fn two_user_default(bits1: Vec<u8>, bits2: Vec<u8>, state_kind: EngineKind, seed: u64) -> Self {
        Self {
            bits: vec![bits1, bits2],
            bit_period: 4.0 * 63.0,
            n_chips: 63,
            code_kind: CodeKind::Random { seed },
            state_kind,
            coupler_kind: CouplerKind::Balanced2x2,
            async_offsets: AsyncOffsets::None,
            allow_overlap: false,
            grid: FrequencyGrid::default_grid(),
        }
    }
}

/// Detection statistics of one receiver in one bit slot.
#[derive(Debug, Clone, Serialize)]
pub struct SlotStats {
    pub slot: usize,
    pub receiver: usize,
    /// Intensity at the sample nearest the decoded user's pulse center.
    pub peak: f64,
    /// `peak` divided by the unencoded reference pulse's peak intensity.
    pub peak_normalized: f64,
    /// Slot energy `sum I d_t` of this slot's own emission.
    pub integrated: f64,
}

/// Output of [`run_ook`]: concatenated traces on a shared clock plus
/// per-slot detection statistics.
#[derive(Debug, Clone)]
pub struct OokResult {
    pub trace: IntensityTrace,
    pub slots: Vec<SlotStats>,
    /// Peak intensity of the unencoded reference pulse (normalization
    /// divisor).
    pub reference_peak: f64,
    /// Bit period after snapping to the time grid.
    pub bit_period_snapped: f64,
}

fn scenario_codes(scenario: &OokScenario, n_users: usize) -> Result<Vec<Code>> {
    match &scenario.code_kind {
        CodeKind::Random { seed } => (0..n_users)
            .map(|u| {
                let mut stream = rng::stream(*seed, u as u64);
                random_binary_code_from(scenario.n_chips, &mut stream, format!("user-{u}"))
            })
            .collect(),
        CodeKind::Walsh { indices } => {
            if indices.len() != n_users {
                return Err(QcdmaError::LengthMismatch { left: indices.len(), right: n_users });
            }
            indices
                .iter()
                .map(|&i| walsh_hadamard_code(scenario.n_chips, i))
                .collect()
        }
    }
}

/// Runs an OOK scenario: each user transmits a pulse (`alpha = 1` or
/// `n = 1`) in slots where its bit is one and vacuum elsewhere. Slot
/// traces are laid out on a shared clock at multiples of the snapped bit
/// period.
pub fn run_ook(scenario: &OokScenario) -> Result<OokResult> {
    let n_users = scenario.bits.len();
    if n_users == 0 {
        return Err(QcdmaError::Config("scenario needs at least one user".into()));
    }
    let n_slots = scenario.bits[0].len();
    if n_slots == 0 {
        return Err(QcdmaError::Config("scenario needs at least one bit".into()));
    }
    for (u, seq) in scenario.bits.iter().enumerate() {
        if seq.len() != n_slots {
            return Err(QcdmaError::LengthMismatch { left: seq.len(), right: n_slots });
        }
        if seq.iter().any(|&b| b > 1) {
            return Err(QcdmaError::Config(format!("user {u} has a non-binary bit")));
        }
    }
    if !scenario.bit_period.is_finite() || scenario.bit_period <= 0.0 {
        return Err(QcdmaError::Config("bit_period must be positive".into()));
    }
    let coupler = scenario.coupler_kind.build()?;
    if coupler.m() != n_users {
        return Err(QcdmaError::LengthMismatch { left: coupler.m(), right: n_users });
    }

    let grid = scenario.grid;
    let reference = gaussian_spectral(&grid, 0.0)?;
    let partition = partition_equal_energy(&reference, scenario.n_chips)?;
    let codes = scenario_codes(scenario, n_users)?;
    let reference_peak = reference_peak_intensity(&reference, 0.0);

    let offsets: Vec<f64> = match scenario.async_offsets {
        AsyncOffsets::None => vec![0.0; n_users],
        AsyncOffsets::Uniform { seed } => (0..n_users)
            .map(|u| {
                use rand::Rng;
                rng::stream(seed, u as u64).random_range(0.0..scenario.bit_period)
            })
            .collect(),
    };

    if !scenario.allow_overlap {
        for (u, code) in codes.iter().enumerate() {
            let encoded = encode(&reference, &partition, code)?;
            let duration = to_time(&encoded).effective_duration()?;
            if duration > scenario.bit_period {
                return Err(QcdmaError::Config(format!(
                    "user {u}: encoded pulse duration {duration:.1} exceeds bit period {}; \
                     enable allow_overlap or enlarge the period",
                    scenario.bit_period
                )));
            }
        }
    }

    let d_t = grid.d_t();
    let steps_per_slot = (scenario.bit_period / d_t).round().max(1.0) as usize;
    let bit_period_snapped = steps_per_slot as f64 * d_t;
    let n_local = grid.n_samples;
    let total_len = (n_slots - 1) * steps_per_slot + n_local;
    let mut rows = vec![vec![0.0f64; total_len]; n_users];
    let mut slots = Vec::with_capacity(n_slots * n_users);

    for slot in 0..n_slots {
        let transmitters: Vec<TransmitterSpec> = (0..n_users)
            .map(|u| {
                let on = scenario.bits[u][slot] == 1;
                let kind = match scenario.state_kind {
                    EngineKind::Glauber => StateKind::Glauber {
                        alpha: Complex64::new(if on { 1.0 } else { 0.0 }, 0.0),
                    },
                    EngineKind::Fock => StateKind::Fock { n: u32::from(on) },
                };
                TransmitterSpec {
                    kind,
                    wavepacket: reference.clone(),
                    code: codes[u].clone(),
                    t_offset: offsets[u],
                }
            })
            .collect();
        let net = NetworkSpec::new(coupler.clone(), transmitters, None, partition.clone())?;
        let slot_trace = match scenario.state_kind {
            EngineKind::Glauber => glauber_network_trace(&net)?,
            EngineKind::Fock => fock_network_trace(&net)?,
        };
        let base = slot * steps_per_slot;
        for r in 0..n_users {
            for (m, v) in slot_trace.row(r).iter().enumerate() {
                rows[r][base + m] += v;
            }
            let sample_time = offsets[net.decode_assignment()[r]];
            let peak = slot_trace.value_nearest(r, sample_time);
            slots.push(SlotStats {
                slot,
                receiver: r,
                peak,
                peak_normalized: peak / reference_peak,
                integrated: slot_trace.integrated(r),
            });
        }
    }

    let times: Vec<f64> = (0..total_len)
        .map(|i| (i as f64 - n_local as f64 / 2.0) * d_t)
        .collect();
    Ok(OokResult {
        trace: IntensityTrace::new(times, d_t, rows)?,
        slots,
        reference_peak,
        bit_period_snapped,
    })
}

/// Monte-Carlo statistics of the encoded and cross-decoded peak over
/// i.i.d. random codes.
#[derive(Debug, Clone, Serialize)]
pub struct PeakStats {
    pub n_chips: usize,
    pub trials: usize,
    pub seed: u64,
    /// Sample mean and standard error of `|xi^e(t0)|^2 / |xi(t0)|^2`.
    pub mean_peak_ratio: f64,
    pub se_peak_ratio: f64,
    /// Sample mean of the cross-decoded amplitude
    /// `xi^{e_j d_k}(t0) / |xi(t0)|` (complex components) with standard
    /// errors and component variances.
    pub mean_cross_re: f64,
    pub mean_cross_im: f64,
    pub se_cross_re: f64,
    pub se_cross_im: f64,
    pub var_cross_re: f64,
    pub var_cross_im: f64,
    /// Sample mean and standard error of `|xi^{e_j d_k}(t0)|^2 / |xi(t0)|^2`.
    pub mean_cross_sq: f64,
    pub se_cross_sq: f64,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Peak-suppression statistics over `trials` random codes (and independent
/// code pairs for the cross-decoded case) on the default Gaussian pulse.
pub fn mc_peak_stats(n_chips: usize, trials: usize, seed: u64) -> Result<PeakStats> {
    if trials < 100 {
        return Err(QcdmaError::Config(format!("need at least 100 trials, got {trials}")));
    }
    let grid = FrequencyGrid::default_grid();
    let wp = gaussian_spectral(&grid, 0.0)?;
    let partition = partition_equal_energy(&wp, n_chips)?;
    let peak = time_amplitude_at(&wp, 0.0).norm();

    let samples: Vec<(f64, Complex64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng::stream(seed, k as u64);
            let cj = random_binary_code_from(n_chips, &mut stream, "mc-j").expect("valid code");
            let ck = random_binary_code_from(n_chips, &mut stream, "mc-k").expect("valid code");
            let encoded = encode(&wp, &partition, &cj).expect("same grid");
            let ratio = time_amplitude_at(&encoded, 0.0).norm_sqr() / (peak * peak);
            let cross = decode(&encoded, &partition, &ck).expect("same grid");
            let v = time_amplitude_at(&cross, 0.0) / peak;
            (ratio, v)
        })
        .collect();

    let ratios: Vec<f64> = samples.iter().map(|(r, _)| *r).collect();
    let re: Vec<f64> = samples.iter().map(|(_, v)| v.re).collect();
    let im: Vec<f64> = samples.iter().map(|(_, v)| v.im).collect();
    let cross_sq: Vec<f64> = samples.iter().map(|(_, v)| v.norm_sqr()).collect();
    let (mean_peak_ratio, se_peak_ratio) = mean_and_se(&ratios);
    let (mean_cross_re, se_cross_re) = mean_and_se(&re);
    let (mean_cross_im, se_cross_im) = mean_and_se(&im);
    let (mean_cross_sq, se_cross_sq) = mean_and_se(&cross_sq);
    Ok(PeakStats {
        n_chips,
        trials,
        seed,
        mean_peak_ratio,
        se_peak_ratio,
        mean_cross_re,
        mean_cross_im,
        se_cross_re,
        se_cross_im,
        var_cross_re: variance(&re),
        var_cross_im: variance(&im),
        mean_cross_sq,
        se_cross_sq,
    })
}

/// Monte-Carlo mean of the normalized receiver intensities at the sampling
/// time for the two-user both-send-one configuration on a balanced 2x2
/// coupler.
#[derive(Debug, Clone, Serialize)]
pub struct ReceiverMeanStats {
    pub n_chips: usize,
    pub trials: usize,
    pub seed: u64,
    pub state_kind: EngineKind,
    pub mean_receiver_1: f64,
    pub se_receiver_1: f64,
    pub mean_receiver_2: f64,
    pub se_receiver_2: f64,
    /// Nominal large-Nc value `(1 + 1/Nc)/2` of both means.
    pub nominal: f64,
}

/// Estimates `E{I_r(t0)}` (normalized) over independent random code pairs;
/// both the coherent and the number-state engines are supported. The Fock
/// mean coincides with the Glauber one because the inter-signal
/// interference has zero mean.
pub fn mc_receiver_mean(
    n_chips: usize,
    trials: usize,
    seed: u64,
    state_kind: EngineKind,
) -> Result<ReceiverMeanStats> {
    if trials < 100 {
        return Err(QcdmaError::Config(format!("need at least 100 trials, got {trials}")));
    }
    let grid = FrequencyGrid::default_grid();
    let wp = gaussian_spectral(&grid, 0.0)?;
    let partition = partition_equal_energy(&wp, n_chips)?;
    let coupler = balanced_2x2();
    let reference_peak = reference_peak_intensity(&wp, 0.0);

    let samples: Vec<[f64; 2]> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng::stream(seed, k as u64);
            let c1 = random_binary_code_from(n_chips, &mut stream, "u1").expect("valid code");
            let c2 = random_binary_code_from(n_chips, &mut stream, "u2").expect("valid code");
            let kind = |_: usize| match state_kind {
                EngineKind::Glauber => StateKind::Glauber { alpha: Complex64::new(1.0, 0.0) },
                EngineKind::Fock => StateKind::Fock { n: 1 },
            };
            let transmitters = vec![
                TransmitterSpec { kind: kind(0), wavepacket: wp.clone(), code: c1, t_offset: 0.0 },
                TransmitterSpec { kind: kind(1), wavepacket: wp.clone(), code: c2, t_offset: 0.0 },
            ];
            let net = NetworkSpec::new(coupler.clone(), transmitters, None, partition.clone())
                .expect("valid network");
            let trace = match state_kind {
                EngineKind::Glauber => glauber_network_trace(&net).expect("glauber engine"),
                EngineKind::Fock => fock_network_trace(&net).expect("fock engine"),
            };
            [
                trace.value_nearest(0, 0.0) / reference_peak,
                trace.value_nearest(1, 0.0) / reference_peak,
            ]
        })
        .collect();

    let r1: Vec<f64> = samples.iter().map(|s| s[0]).collect();
    let r2: Vec<f64> = samples.iter().map(|s| s[1]).collect();
    let (mean_receiver_1, se_receiver_1) = mean_and_se(&r1);
    let (mean_receiver_2, se_receiver_2) = mean_and_se(&r2);
    Ok(ReceiverMeanStats {
        n_chips,
        trials,
        seed,
        state_kind,
        mean_receiver_1,
        se_receiver_1,
        mean_receiver_2,
        se_receiver_2,
        nominal: 0.5 * (1.0 + 1.0 / n_chips as f64),
    })
}

/// Ratio of effective durations after/before encoding; approximately the
/// code length for random binary codes.
pub fn spreading_factor(
    wp: &SpectralWavepacket,
    code: &Code,
    partition: &ChipPartition,
) -> Result<f64> {
    let mask = mask_from_code(partition, code)?;
    let encoded = apply_mask(wp, &mask, Direction::Encode)?;
    let before = to_time(wp).effective_duration()?;
    let after = to_time(&encoded).effective_duration()?;
    Ok(after / before)
}

/// `|sum_r Integral I_r dt - sum_s mean_intensity_s|` through the engine
/// matching the network's state family.
pub fn energy_check(net: &NetworkSpec) -> Result<f64> {
    let all_glauber = net
        .transmitters()
        .iter()
        .all(|t| matches!(t.kind, StateKind::Glauber { .. }));
    let trace = if all_glauber {
        glauber_network_trace(net)?
    } else {
        fock_network_trace(net)?
    };
    Ok((trace.total_integrated() - net.total_input_intensity()).abs())
}
