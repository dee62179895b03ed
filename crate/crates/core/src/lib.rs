//! Simulator for spectrally phase-encoded quantum CDMA networks.
//!
//! The library models continuous-mode photon-wavepackets on discrete
//! frequency/time grids, binary spectral phase codes over equal-energy chips,
//! unitary star-couplers, and the closed-form receiver intensities for
//! coherent (Glauber) and number (Fock) state transmitters, together with
//! Monte-Carlo statistics over random codes.
//!
//! Everything is dimensionless: the spectral half-bandwidth `delta` defines
//! the frequency unit and `tau_p = 1/delta` the time unit.

pub mod cli;
pub mod codes;
pub mod coupler;
pub mod encoder;
pub mod error;
pub mod experiments;
pub mod io;
pub mod qstate;
pub mod rng;
pub mod wavepacket;

pub use codes::{ChipPartition, Code, PhaseMask};
pub use coupler::CouplerMatrix;
pub use encoder::Direction;
pub use error::{QcdmaError, Result};
pub use qstate::{IntensityTrace, NetworkSpec, StateKind, TransmitterSpec};
pub use wavepacket::{FrequencyGrid, SpectralWavepacket, TemporalWavepacket};
