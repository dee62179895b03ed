//! M x M star-coupler unitaries: the balanced 2x2, DFT and
//! Sylvester-Hadamard constructions, phase regauging and custom matrices.
//!
//! Rows index receivers (output ports), columns index senders (input
//! ports); entry `(r, s)` is the path connection amplitude from sender `s`
//! to receiver `r`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QcdmaError, Result};

pub const UNITARITY_TOL: f64 = 1e-12;

/// Validated unitary coupler matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplerMatrix {
    m: usize,
    entries: Vec<Complex64>,
}

impl CouplerMatrix {
    /// Accepts arbitrary complex entries and rejects non-unitary input,
    /// carrying the residual `max |B^H B - I|` in the error.
    pub fn new(m: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m == 0 || entries.len() != m * m {
            return Err(QcdmaError::LengthMismatch { left: entries.len(), right: m * m });
        }
        let candidate = Self { m, entries };
        let residual = candidate.unitarity_residual();
        if residual >= UNITARITY_TOL {
            return Err(QcdmaError::NotUnitary { residual });
        }
        Ok(candidate)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, r: usize, s: usize) -> Complex64 {
        self.entries[r * self.m + s]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `max_ij |(B^H B - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// The 2x2 balanced coupler `(1/sqrt(2)) [[1, 1], [-1, 1]]`.
pub fn balanced_2x2() -> CouplerMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CouplerMatrix::new(
        2,
        vec![
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(h, 0.0),
        ],
    )
    .expect("balanced 2x2 is unitary")
}

/// M-point DFT coupler `B_jk = gamma^{jk} / sqrt(M)` with
/// `gamma = e^{-2 pi i / M}` (0-based indices). Exponents are reduced
/// modulo M before evaluation to keep the entries accurate for large M.
pub fn dft_coupler(m: usize) -> Result<CouplerMatrix> {
    if m == 0 {
        return Err(QcdmaError::Config("coupler needs at least one port".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let e = (j * k) % m;
            // Exact values at quarter turns; gamma^e elsewhere.
            let entry = if e == 0 {
                Complex64::new(scale, 0.0)
            } else if 2 * e == m {
                Complex64::new(-scale, 0.0)
            } else if 4 * e == m {
                Complex64::new(0.0, -scale)
            } else if 4 * e == 3 * m {
                Complex64::new(0.0, scale)
            } else {
                Complex64::from_polar(scale, -2.0 * PI * e as f64 / m as f64)
            };
            entries.push(entry);
        }
    }
    CouplerMatrix::new(m, entries)
}

/// Sylvester-Hadamard coupler `H/sqrt(M)` for M a power of two;
/// `H_jk = (-1)^{popcount(j & k)}`.
pub fn hadamard_coupler(m: usize) -> Result<CouplerMatrix> {
    if !m.is_power_of_two() {
        return Err(QcdmaError::NotPowerOfTwo("hadamard coupler size", m));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let sign = if (j & k).count_ones() % 2 == 0 { scale } else { -scale };
            entries.push(Complex64::new(sign, 0.0));
        }
    }
    CouplerMatrix::new(m, entries)
}

/// Regauges `B_jk -> e^{i phi_j} e^{i psi_k} B_jk`; the result is validated
/// like any other coupler.
pub fn rephase(b: &CouplerMatrix, row_phases: &[f64], col_phases: &[f64]) -> Result<CouplerMatrix> {
    if row_phases.len() != b.m() || col_phases.len() != b.m() {
        return Err(QcdmaError::LengthMismatch { left: row_phases.len(), right: b.m() });
    }
    let m = b.m();
    let mut entries = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let phase = Complex64::from_polar(1.0, row_phases[j] + col_phases[k]);
            entries.push(b.entry(j, k) * phase);
        }
    }
    CouplerMatrix::new(m, entries)
}
