//! Versioned JSON document formats for codes, partitions, couplers and
//! scenario configs, plus the CSV/SVG trace writers.
//!
//! All documents carry a top-level `schema_version`. Floating-point values
//! are emitted in shortest round-trip decimal form, so equal inputs produce
//! byte-identical files.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codes::{ChipPartition, Code};
use crate::coupler::CouplerMatrix;
use crate::error::{QcdmaError, Result};
use crate::experiments::{AsyncOffsets, CodeKind, CouplerKind, EngineKind, OokScenario};
use crate::qstate::{IntensityTrace, NetworkSpec, StateKind, TransmitterSpec};
use crate::rng;
use crate::wavepacket::{gaussian_spectral, FrequencyGrid};

pub const SCHEMA_VERSION: u32 = 1;

/// Code document: phases stored as multiples of pi.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeDoc {
    pub schema_version: u32,
    pub n_chips: usize,
    pub phases_pi: Vec<f64>,
    pub label: String,
}

impl CodeDoc {
    pub fn from_code(code: &Code) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n_chips: code.n_chips(),
            phases_pi: code.phases().iter().map(|p| p / PI).collect(),
            label: code.label().to_string(),
        }
    }

    pub fn to_code(&self) -> Result<Code> {
        if self.phases_pi.len() != self.n_chips {
            return Err(QcdmaError::LengthMismatch {
                left: self.phases_pi.len(),
                right: self.n_chips,
            });
        }
        // Multiples of 1.0 map back to exact {0, pi} binary phases.
        let phases = self
            .phases_pi
            .iter()
            .map(|&m| if m == 0.0 { 0.0 } else if m == 1.0 { PI } else { m * PI })
            .collect();
        Code::new(phases, self.label.clone())
    }
}

/// Partition document: boundary frequencies and realized chip energies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub schema_version: u32,
    pub n_chips: usize,
    pub boundaries: Vec<f64>,
    pub chip_energies: Vec<f64>,
    pub max_energy_deviation: f64,
    pub walsh_residual_bound: f64,
}

impl PartitionDoc {
    pub fn from_partition(p: &ChipPartition) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n_chips: p.n_chips(),
            boundaries: p.boundaries(),
            chip_energies: p.chip_energies().to_vec(),
            max_energy_deviation: p.max_energy_deviation(),
            walsh_residual_bound: p.walsh_residual_bound(),
        }
    }
}

/// Coupler document: entries as `[re, im]` pairs, row-major. Loading
/// re-validates unitarity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplerDoc {
    pub schema_version: u32,
    pub m: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    pub unitarity_residual: f64,
}

impl CouplerDoc {
    pub fn from_coupler(b: &CouplerMatrix) -> Self {
        let entries = (0..b.m())
            .map(|r| (0..b.m()).map(|s| [b.entry(r, s).re, b.entry(r, s).im]).collect())
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            m: b.m(),
            entries,
            unitarity_residual: b.unitarity_residual(),
        }
    }

    pub fn to_coupler(&self) -> Result<CouplerMatrix> {
        let mut flat = Vec::with_capacity(self.m * self.m);
        if self.entries.len() != self.m {
            return Err(QcdmaError::LengthMismatch { left: self.entries.len(), right: self.m });
        }
        for row in &self.entries {
            if row.len() != self.m {
                return Err(QcdmaError::LengthMismatch { left: row.len(), right: self.m });
            }
            for e in row {
                flat.push(Complex64::new(e[0], e[1]));
            }
        }
        CouplerMatrix::new(self.m, flat)
    }
}

/// Grid parameters in a config; defaults to [`FrequencyGrid::default_grid`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub omega0: f64,
    pub delta: f64,
    pub span_sigmas: f64,
    pub n_samples: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.omega0, self.delta, self.span_sigmas, self.n_samples)
    }
}

fn default_grid_config() -> GridConfig {
    let g = FrequencyGrid::default_grid();
    GridConfig { omega0: g.omega0, delta: g.delta, span_sigmas: g.span_sigmas, n_samples: g.n_samples }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplerConfig {
    Balanced2x2,
    Dft { m: usize },
    Hadamard { m: usize },
    Custom { entries: Vec<Vec<[f64; 2]>> },
}

impl CouplerConfig {
    pub fn build(&self) -> Result<CouplerMatrix> {
        match self {
            CouplerConfig::Balanced2x2 => Ok(crate::coupler::balanced_2x2()),
            CouplerConfig::Dft { m } => crate::coupler::dft_coupler(*m),
            CouplerConfig::Hadamard { m } => crate::coupler::hadamard_coupler(*m),
            CouplerConfig::Custom { entries } => CouplerDoc {
                schema_version: SCHEMA_VERSION,
                m: entries.len(),
                entries: entries.clone(),
                unitarity_residual: 0.0,
            }
            .to_coupler(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateConfig {
    Glauber { alpha: [f64; 2] },
    Fock { n: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeConfig {
    Random { seed: u64 },
    Walsh { index: usize },
    Explicit { phases_pi: Vec<f64>, label: Option<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmitterConfig {
    pub state: StateConfig,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub t_offset: f64,
    pub code: CodeConfig,
}

/// Single-shot network scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    #[serde(default = "default_grid_config")]
    pub grid: GridConfig,
    pub n_chips: usize,
    pub coupler: CouplerConfig,
    pub transmitters: Vec<TransmitterConfig>,
    #[serde(default)]
    pub decode_assignment: Option<Vec<usize>>,
}

impl NetworkConfig {
    /// Builds the network. `seed_override`, when present, redirects every
    /// `random` code of transmitter `i` to `stream(seed_override, i)`.
    pub fn build(&self, seed_override: Option<u64>) -> Result<(NetworkSpec, EngineKind)> {
        let grid = self.grid.build()?;
        let reference = gaussian_spectral(&grid, 0.0)?;
        let partition = crate::codes::partition_equal_energy(&reference, self.n_chips)?;
        let coupler = self.coupler.build()?;

        let mut engine: Option<EngineKind> = None;
        let mut transmitters = Vec::with_capacity(self.transmitters.len());
        for (i, tc) in self.transmitters.iter().enumerate() {
            let kind = match tc.state {
                StateConfig::Glauber { alpha } => {
                    match engine {
                        None => engine = Some(EngineKind::Glauber),
                        Some(EngineKind::Glauber) => {}
                        Some(EngineKind::Fock) => {
                            return Err(QcdmaError::Config(
                                "mixed Glauber/Fock transmitters are not supported".into(),
                            ))
                        }
                    }
                    StateKind::Glauber { alpha: Complex64::new(alpha[0], alpha[1]) }
                }
                StateConfig::Fock { n } => {
                    match engine {
                        None => engine = Some(EngineKind::Fock),
                        Some(EngineKind::Fock) => {}
                        Some(EngineKind::Glauber) => {
                            return Err(QcdmaError::Config(
                                "mixed Glauber/Fock transmitters are not supported".into(),
                            ))
                        }
                    }
                    StateKind::Fock { n }
                }
            };
            let code = match (&tc.code, seed_override) {
                (CodeConfig::Random { .. }, Some(o)) => {
                    let mut stream = rng::stream(o, i as u64);
                    crate::codes::random_binary_code_from(self.n_chips, &mut stream, format!("user-{i}"))?
                }
                (CodeConfig::Random { seed }, None) => {
                    let mut stream = rng::stream(*seed, i as u64);
                    crate::codes::random_binary_code_from(self.n_chips, &mut stream, format!("user-{i}"))?
                }
                (CodeConfig::Walsh { index }, _) => crate::codes::walsh_hadamard_code(self.n_chips, *index)?,
                (CodeConfig::Explicit { phases_pi, label }, _) => CodeDoc {
                    schema_version: SCHEMA_VERSION,
                    n_chips: self.n_chips,
                    phases_pi: phases_pi.clone(),
                    label: label.clone().unwrap_or_else(|| format!("explicit-{i}")),
                }
                .to_code()?,
            };
            transmitters.push(TransmitterSpec {
                kind,
                wavepacket: gaussian_spectral(&grid, tc.t0)?,
                code,
                t_offset: tc.t_offset,
            });
        }
        let engine = engine.ok_or_else(|| QcdmaError::Config("no transmitters".into()))?;
        let net = NetworkSpec::new(coupler, transmitters, self.decode_assignment.clone(), partition)?;
        Ok((net, engine))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OokCodeConfig {
    Random { seed: u64 },
    Walsh { indices: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsyncConfig {
    None,
    Uniform { seed: u64 },
}

/// OOK bit-sequence scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OokConfig {
    #[serde(default = "default_grid_config")]
    pub grid: GridConfig,
    pub n_chips: usize,
    pub bits: Vec<Vec<u8>>,
    pub bit_period: f64,
    pub code: OokCodeConfig,
    pub state_kind: String,
    pub coupler: CouplerConfig,
    #[serde(default)]
    pub async_offsets: Option<AsyncConfig>,
    #[serde(default)]
    pub allow_overlap: bool,
}

impl OokConfig {
    pub fn build(&self, seed_override: Option<u64>) -> Result<OokScenario> {
        let state_kind = match self.state_kind.as_str() {
            "glauber" => EngineKind::Glauber,
            "fock" => EngineKind::Fock,
            other => {
                return Err(QcdmaError::Config(format!(
                    "state_kind must be \"glauber\" or \"fock\", got {other:?}"
                )))
            }
        };
        let coupler_kind = match &self.coupler {
            CouplerConfig::Balanced2x2 => CouplerKind::Balanced2x2,
            CouplerConfig::Dft { m } => CouplerKind::Dft { m: *m },
            CouplerConfig::Hadamard { m } => CouplerKind::Hadamard { m: *m },
            CouplerConfig::Custom { .. } => {
                return Err(QcdmaError::Config(
                    "ook scenarios support balanced2x2/dft/hadamard couplers".into(),
                ))
            }
        };
        let code_kind = match (&self.code, seed_override) {
            (OokCodeConfig::Random { .. }, Some(o)) => CodeKind::Random { seed: o },
            (OokCodeConfig::Random { seed }, None) => CodeKind::Random { seed: *seed },
            (OokCodeConfig::Walsh { indices }, _) => CodeKind::Walsh { indices: indices.clone() },
        };
        let async_offsets = match (&self.async_offsets, seed_override) {
            (None, _) | (Some(AsyncConfig::None), _) => AsyncOffsets::None,
            (Some(AsyncConfig::Uniform { .. }), Some(o)) => AsyncOffsets::Uniform { seed: o },
            (Some(AsyncConfig::Uniform { seed }), None) => AsyncOffsets::Uniform { seed: *seed },
        };
        Ok(OokScenario {
            bits: self.bits.clone(),
            bit_period: self.bit_period,
            n_chips: self.n_chips,
            code_kind,
            state_kind,
            coupler_kind,
            async_offsets,
            allow_overlap: self.allow_overlap,
            grid: self.grid.build()?,
        })
    }
}

/// Top-level simulate config: `{"schema_version": 1, "kind": "network"|"ook", ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Network(NetworkConfig),
    Ook(OokConfig),
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)
}

pub fn load_simulate_config(path: &Path) -> Result<SimulateConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| QcdmaError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: SimulateConfig = serde_json::from_str(&text)
        .map_err(|e| QcdmaError::Config(format!("invalid config {}: {e}", path.display())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(QcdmaError::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    Ok(config)
}

pub fn load_coupler(path: &Path) -> Result<CouplerMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| QcdmaError::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc: CouplerDoc = serde_json::from_str(&text)
        .map_err(|e| QcdmaError::Config(format!("invalid coupler {}: {e}", path.display())))?;
    doc.to_coupler()
}

/// `t,I_1,...,I_M` rows, shortest round-trip decimals.
pub fn write_traces_csv(path: &Path, trace: &IntensityTrace) -> std::io::Result<()> {
    let mut out = String::new();
    out.push('t');
    for r in 0..trace.n_receivers() {
        out.push_str(&format!(",I_{}", r + 1));
    }
    out.push('\n');
    for (m, t) in trace.times().iter().enumerate() {
        out.push_str(&format!("{t}"));
        for r in 0..trace.n_receivers() {
            out.push_str(&format!(",{}", trace.row(r)[m]));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

const SVG_COLORS: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// Minimal hand-emitted polyline plot of the intensity rows.
pub fn write_plot_svg(path: &Path, trace: &IntensityTrace) -> std::io::Result<()> {
    let width = 800.0f64;
    let height = 320.0f64;
    let margin = 40.0f64;
    let n = trace.times().len();
    let stride = n.div_ceil(2000).max(1);
    let t_min = trace.times()[0];
    let t_max = trace.times()[n - 1];
    let v_max = trace
        .rows()
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |a, &b| a.max(b))
        .max(1e-300);
    let x = |t: f64| margin + (t - t_min) / (t_max - t_min) * (width - 2.0 * margin);
    let y = |v: f64| height - margin - v / v_max * (height - 2.0 * margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        b = height - margin,
        r = width - margin
    ));
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        t = margin,
        b = height - margin
    ));
    svg.push_str(&format!(
        "<text x=\"{m}\" y=\"{by}\" font-size=\"12\">t = {t_min}</text>\n",
        m = margin,
        by = height - margin + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{rx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"end\">t = {t_max}</text>\n",
        rx = width - margin,
        by = height - margin + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{m}\" y=\"{ty}\" font-size=\"12\">I max = {v_max}</text>\n",
        m = margin,
        ty = margin - 8.0
    ));
    for (r, row) in trace.rows().iter().enumerate() {
        let color = SVG_COLORS[r % SVG_COLORS.len()];
        let mut points = String::new();
        for m in (0..n).step_by(stride) {
            points.push_str(&format!("{},{} ", x(trace.times()[m]), y(row[m])));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
            points.trim_end()
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)
}
