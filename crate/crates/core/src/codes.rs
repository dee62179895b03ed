//! Equal-energy spectral chip partitions, binary phase codes and the
//! per-sample phase masks they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{QcdmaError, Result};
use crate::rng;
use crate::wavepacket::{gaussian_spectral, FrequencyGrid, SpectralWavepacket};

/// Division of a grid window into `n_chips` frequency bands of equal
/// spectral energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipPartition {
    grid: FrequencyGrid,
    /// Sample index of each boundary; `boundary_indices[0] == 0` and
    /// `boundary_indices[n_chips] == n_samples`. Chip `k` holds samples
    /// `boundary_indices[k] .. boundary_indices[k+1]` (closed on the left).
    boundary_indices: Vec<usize>,
    chip_energies: Vec<f64>,
    /// Largest single-sample energy of the generating wavepacket; bounds
    /// how far any realized chip energy can sit from `1/n_chips`.
    max_sample_energy: f64,
}

impl ChipPartition {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn n_chips(&self) -> usize {
        self.chip_energies.len()
    }

    /// Boundary frequencies `Omega_0 ..= Omega_Nc` spanning the grid window.
    pub fn boundaries(&self) -> Vec<f64> {
        let n = self.grid.n_samples;
        self.boundary_indices
            .iter()
            .map(|&i| if i >= n { self.grid.omega(n - 1) } else { self.grid.omega(i) })
            .collect()
    }

    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary_indices
    }

    pub fn chip_energies(&self) -> &[f64] {
        &self.chip_energies
    }

    /// `max_k |chip_energy_k - 1/Nc|` as realized on the grid.
    pub fn max_energy_deviation(&self) -> f64 {
        let target = 1.0 / self.n_chips() as f64;
        self.chip_energies
            .iter()
            .map(|e| (e - target).abs())
            .fold(0.0f64, f64::max)
    }

    /// Bound on the grid's single-sample energy; the realized chip-energy
    /// deviation never exceeds it.
    pub fn max_sample_energy(&self) -> f64 {
        self.max_sample_energy
    }

    /// Bound on `|<xi^{e_j}|xi^{e_k}>|` for binary codes on this partition:
    /// `Nc * max|chip_energy - 1/Nc|`. It is zero only for exactly
    /// equal-energy chips, so it is reported alongside orthogonality results.
    pub fn walsh_residual_bound(&self) -> f64 {
        self.n_chips() as f64 * self.max_energy_deviation()
    }

    /// Chip index containing sample `i`.
    pub fn chip_of_sample(&self, i: usize) -> usize {
        match self.boundary_indices.binary_search(&i) {
            Ok(k) => k.min(self.n_chips() - 1),
            Err(k) => k - 1,
        }
    }

    fn from_boundary_indices(
        wp: &SpectralWavepacket,
        boundary_indices: Vec<usize>,
    ) -> Result<Self> {
        let n_chips = boundary_indices.len() - 1;
        for w in boundary_indices.windows(2) {
            if w[1] <= w[0] {
                return Err(QcdmaError::Resolution {
                    n_samples: wp.grid().n_samples,
                    n_chips,
                });
            }
        }
        let chip_energies: Vec<f64> = boundary_indices
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|i| wp.sample_energy(i)).sum())
            .collect();
        Ok(Self {
            grid: *wp.grid(),
            boundary_indices,
            chip_energies,
            max_sample_energy: wp.max_sample_energy(),
        })
    }
}

fn check_resolution(grid: &FrequencyGrid, n_chips: usize) -> Result<()> {
    if n_chips < 1 {
        return Err(QcdmaError::Config("n_chips must be at least 1".into()));
    }
    if grid.n_samples < 16 * n_chips {
        return Err(QcdmaError::Resolution { n_samples: grid.n_samples, n_chips });
    }
    Ok(())
}

/// Splits the spectrum of `wp` into `n_chips` bands of equal energy.
/// Boundary `k` sits at the first sample where the cumulative energy
/// reaches `k/Nc` (closed on the left).
pub fn partition_equal_energy(wp: &SpectralWavepacket, n_chips: usize) -> Result<ChipPartition> {
    check_resolution(wp.grid(), n_chips)?;
    let n = wp.grid().n_samples;
    let mut boundary_indices = Vec::with_capacity(n_chips + 1);
    boundary_indices.push(0usize);
    let total: f64 = (0..n).map(|i| wp.sample_energy(i)).sum();
    let mut cum = 0.0;
    let mut next_k = 1usize;
    for i in 0..n {
        cum += wp.sample_energy(i);
        while next_k < n_chips && cum >= next_k as f64 * total / n_chips as f64 {
            boundary_indices.push(i);
            next_k += 1;
        }
    }
    if boundary_indices.len() != n_chips {
        return Err(QcdmaError::Resolution { n_samples: n, n_chips });
    }
    boundary_indices.push(n);
    ChipPartition::from_boundary_indices(wp, boundary_indices)
}

/// Analytic boundaries for the Gaussian case: `|xi(w)|^2` is normal with
/// standard deviation `delta`, so boundary `k` sits at the quantile
/// `omega0 + delta * Phi^{-1}(k/Nc)` snapped to the nearest grid sample.
/// Chip energies are evaluated against the sampled Gaussian of the grid.
pub fn gaussian_quantile_partition(grid: &FrequencyGrid, n_chips: usize) -> Result<ChipPartition> {
    check_resolution(grid, n_chips)?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut boundary_indices = Vec::with_capacity(n_chips + 1);
    boundary_indices.push(0usize);
    for k in 1..n_chips {
        let q = normal.inverse_cdf(k as f64 / n_chips as f64);
        let omega = grid.omega0 + grid.delta * q;
        boundary_indices.push(grid.index_nearest_omega(omega));
    }
    boundary_indices.push(grid.n_samples);
    let reference = gaussian_spectral(grid, 0.0)?;
    ChipPartition::from_boundary_indices(&reference, boundary_indices)
}

/// A phase sequence of length `Nc`, one value per chip. Binary codes use
/// phases in `{0, pi}`; general real phases are allowed so that composed
/// encode/decode masks stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    phases: Vec<f64>,
    label: String,
}

impl Code {
    pub fn new(phases: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if phases.is_empty() {
            return Err(QcdmaError::Config("code must have at least one chip".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(QcdmaError::Config("code phases must be finite".into()));
        }
        Ok(Self { phases, label: label.into() })
    }

    pub fn n_chips(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spectral wavepacket multiplier of chip `l` under encoding,
    /// `e^{-i theta_l}`; exactly +/-1 for binary phases.
    pub fn multiplier(&self, l: usize) -> Complex64 {
        unit_phase(-self.phases[l])
    }

    pub fn is_binary(&self) -> bool {
        self.phases.iter().all(|&p| p == 0.0 || p == PI)
    }
}

/// `e^{i theta}` with exact values at theta in {0, +/-pi} so that binary
/// code algebra stays exact in floating point.
pub(crate) fn unit_phase(theta: f64) -> Complex64 {
    if theta == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if theta == PI || theta == -PI {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

/// I.i.d. uniform binary `{0, pi}` code of length `n_chips`, deterministic
/// per seed.
pub fn random_binary_code(n_chips: usize, seed: u64) -> Result<Code> {
    let mut rng = rng::stream(seed, 0);
    random_binary_code_from(n_chips, &mut rng, format!("random-{seed}"))
}

/// Draws a binary code from an already-positioned stream.
pub fn random_binary_code_from(
    n_chips: usize,
    rng: &mut impl Rng,
    label: impl Into<String>,
) -> Result<Code> {
    if n_chips < 1 {
        return Err(QcdmaError::Config("n_chips must be at least 1".into()));
    }
    let phases: Vec<f64> = (0..n_chips)
        .map(|_| if rng.random::<bool>() { PI } else { 0.0 })
        .collect();
    Code::new(phases, label)
}

/// Row `index` of the order-`Nc` Sylvester-Hadamard matrix as a binary
/// code: phase 0 where the entry is +1, pi where it is -1.
pub fn walsh_hadamard_code(n_chips: usize, index: usize) -> Result<Code> {
    if !n_chips.is_power_of_two() {
        return Err(QcdmaError::NotPowerOfTwo("walsh code length", n_chips));
    }
    if index >= n_chips {
        return Err(QcdmaError::IndexOutOfRange { index, len: n_chips });
    }
    let phases: Vec<f64> = (0..n_chips)
        .map(|j| if (index & j).count_ones().is_multiple_of(2) { 0.0 } else { PI })
        .collect();
    Code::new(phases, format!("walsh-{n_chips}-{index}"))
}

/// `<c_j|c_k> = sum_l e^{-i(theta_k(l) - theta_j(l))}`; exact integer
/// arithmetic on +/-1 multipliers for binary codes.
pub fn code_inner_product(cj: &Code, ck: &Code) -> Result<Complex64> {
    if cj.n_chips() != ck.n_chips() {
        return Err(QcdmaError::LengthMismatch { left: cj.n_chips(), right: ck.n_chips() });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in cj.phases().iter().zip(ck.phases()) {
        acc += unit_phase(-(b - a));
    }
    Ok(acc)
}

/// Piecewise-constant per-sample phase `theta(w_i)` induced by a code on a
/// partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    grid: FrequencyGrid,
    theta: Vec<f64>,
}

impl PhaseMask {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

/// Expands a code to the per-sample mask `theta(w_i) = theta_{chip(i)}`.
pub fn mask_from_code(partition: &ChipPartition, code: &Code) -> Result<PhaseMask> {
    if code.n_chips() != partition.n_chips() {
        return Err(QcdmaError::LengthMismatch {
            left: code.n_chips(),
            right: partition.n_chips(),
        });
    }
    let n = partition.grid().n_samples;
    let mut theta = vec![0.0f64; n];
    for k in 0..partition.n_chips() {
        let lo = partition.boundary_indices()[k];
        let hi = partition.boundary_indices()[k + 1];
        for t in &mut theta[lo..hi] {
            *t = code.phases()[k];
        }
    }
    Ok(PhaseMask { grid: *partition.grid(), theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::gaussian_spectral;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn default_gaussian() -> SpectralWavepacket {
        gaussian_spectral(&FrequencyGrid::default_grid(), 0.0).unwrap()
    }

    #[test]
    fn single_chip_holds_all_energy() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 1).unwrap();
        assert_eq!(p.n_chips(), 1);
        assert_abs_diff_eq!(p.chip_energies()[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn seven_chip_widths_grow_toward_tails() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 7).unwrap();
        assert_eq!(p.n_chips(), 7);
        let widths: Vec<usize> = p
            .boundary_indices()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        // Equal probability mass of a normal: widths shrink to the median
        // then grow again.
        for i in 0..3 {
            assert!(widths[i] > widths[i + 1], "left widths {widths:?}");
        }
        for i in 3..6 {
            assert!(widths[i + 1] > widths[i], "right widths {widths:?}");
        }
    }

    #[test]
    fn chip_energy_deviation_bounded_by_sample_energy() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 63).unwrap();
        // The realized deviation can never exceed one sample's energy;
        // on the default grid that bound is ~9.8e-4.
        assert!(p.max_energy_deviation() < p.max_sample_energy());
        assert!(p.max_sample_energy() < 1e-3);
    }

    #[test]
    fn chip_energies_sum_to_one() {
        let wp = default_gaussian();
        for nc in [1usize, 2, 7, 63, 128] {
            let p = partition_equal_energy(&wp, nc).unwrap();
            let total: f64 = p.chip_energies().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn partition_rejects_coarse_grid() {
        let grid = FrequencyGrid::new(100.0, 1.0, 10.0, 64).unwrap();
        let wp = gaussian_spectral(&grid, 0.0).unwrap();
        assert!(matches!(
            partition_equal_energy(&wp, 63),
            Err(QcdmaError::Resolution { .. })
        ));
        assert!(partition_equal_energy(&wp, 0).is_err());
    }

    #[test]
    fn quantile_partition_median_at_center() {
        let grid = FrequencyGrid::default_grid();
        let p = gaussian_quantile_partition(&grid, 2).unwrap();
        let interior = p.boundaries()[1];
        assert!((interior - grid.omega0).abs() <= grid.d_omega());
    }

    #[test]
    fn quantile_partition_quartiles() {
        // Standard normal quartiles: +/-0.6744897501960817.
        let grid = FrequencyGrid::default_grid();
        let p = gaussian_quantile_partition(&grid, 4).unwrap();
        let b = p.boundaries();
        let q = 0.674_489_750_196_081_7;
        for (got, want) in [(b[1], -q), (b[2], 0.0), (b[3], q)] {
            assert!(
                (got - (grid.omega0 + grid.delta * want)).abs() <= grid.d_omega(),
                "boundary {got} vs {want}"
            );
        }
    }

    #[test]
    fn quantile_partition_matches_equal_energy() {
        let grid = FrequencyGrid::default_grid();
        let wp = gaussian_spectral(&grid, 0.0).unwrap();
        let a = partition_equal_energy(&wp, 63).unwrap();
        let b = gaussian_quantile_partition(&grid, 63).unwrap();
        for (x, y) in a.boundary_indices().iter().zip(b.boundary_indices()) {
            assert!(x.abs_diff(*y) <= 1, "boundaries differ by more than one sample");
        }
    }

    #[test]
    fn random_code_deterministic_per_seed() {
        let a = random_binary_code(63, 17).unwrap();
        let b = random_binary_code(63, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_code_is_balanced() {
        let c = random_binary_code(10_000, 5).unwrap();
        let frac = c.phases().iter().filter(|&&p| p == PI).count() as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn random_code_single_chip() {
        let c = random_binary_code(1, 99).unwrap();
        assert!(c.phases()[0] == 0.0 || c.phases()[0] == PI);
    }

    #[test]
    fn distinct_seeds_give_distinct_codes() {
        for seed in 0u64..100 {
            let a = random_binary_code(63, 2 * seed).unwrap();
            let b = random_binary_code(63, 2 * seed + 1).unwrap();
            assert_ne!(a.phases(), b.phases(), "seeds {} and {}", 2 * seed, 2 * seed + 1);
        }
    }

    #[test]
    fn walsh_rows_match_sylvester_construction() {
        let multipliers = |c: &Code| -> Vec<i32> {
            c.phases().iter().map(|&p| if p == 0.0 { 1 } else { -1 }).collect()
        };
        assert_eq!(multipliers(&walsh_hadamard_code(4, 1).unwrap()), vec![1, -1, 1, -1]);
        assert_eq!(multipliers(&walsh_hadamard_code(4, 2).unwrap()), vec![1, 1, -1, -1]);
        assert!(walsh_hadamard_code(8, 0).unwrap().phases().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn walsh_rows_exactly_orthogonal() {
        for j in 0..8 {
            for k in 0..8 {
                let cj = walsh_hadamard_code(8, j).unwrap();
                let ck = walsh_hadamard_code(8, k).unwrap();
                let ip = code_inner_product(&cj, &ck).unwrap();
                let expected = if j == k { 8.0 } else { 0.0 };
                assert_eq!(ip, Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn walsh_rejects_non_power_of_two() {
        assert!(matches!(walsh_hadamard_code(63, 0), Err(QcdmaError::NotPowerOfTwo(_, 63))));
        assert!(matches!(
            walsh_hadamard_code(8, 8),
            Err(QcdmaError::IndexOutOfRange { index: 8, len: 8 })
        ));
    }

    #[test]
    fn code_inner_product_with_self_is_nc() {
        let c = random_binary_code(63, 3).unwrap();
        assert_eq!(code_inner_product(&c, &c).unwrap(), Complex64::new(63.0, 0.0));
    }

    #[test]
    fn binary_inner_product_is_real_integer() {
        let a = random_binary_code(63, 1).unwrap();
        let b = random_binary_code(63, 2).unwrap();
        let ip = code_inner_product(&a, &b).unwrap();
        assert_eq!(ip.im, 0.0);
        assert_eq!(ip.re, ip.re.round());
        assert!(ip.re.abs() <= 63.0);
    }

    #[test]
    fn code_inner_product_rejects_length_mismatch() {
        let a = random_binary_code(8, 1).unwrap();
        let b = random_binary_code(4, 1).unwrap();
        assert!(code_inner_product(&a, &b).is_err());
    }

    #[test]
    fn zero_code_gives_zero_mask() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 7).unwrap();
        let zero = Code::new(vec![0.0; 7], "zero").unwrap();
        let mask = mask_from_code(&p, &zero).unwrap();
        assert!(mask.theta().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn alternating_code_alternates_sign_bands() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 7).unwrap();
        let phases: Vec<f64> = (0..7).map(|l| if l % 2 == 0 { 0.0 } else { PI }).collect();
        let code = Code::new(phases, "alt").unwrap();
        let mask = mask_from_code(&p, &code).unwrap();
        for k in 0..7 {
            let lo = p.boundary_indices()[k];
            let hi = p.boundary_indices()[k + 1];
            let expected = if k % 2 == 0 { 0.0 } else { PI };
            assert!(mask.theta()[lo..hi].iter().all(|&t| t == expected), "chip {k}");
        }
    }

    #[test]
    fn mask_rejects_chip_count_mismatch() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 7).unwrap();
        let code = random_binary_code(8, 0).unwrap();
        assert!(mask_from_code(&p, &code).is_err());
    }

    #[test]
    fn chip_of_sample_is_consistent_with_boundaries() {
        let wp = default_gaussian();
        let p = partition_equal_energy(&wp, 63).unwrap();
        for k in 0..p.n_chips() {
            let lo = p.boundary_indices()[k];
            let hi = p.boundary_indices()[k + 1];
            assert_eq!(p.chip_of_sample(lo), k);
            assert_eq!(p.chip_of_sample(hi - 1), k);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn partition_invariants_hold(nc in 1usize..100, seed in 0u64..32) {
            let grid = FrequencyGrid::new(100.0, 1.0, 10.0, 4096).unwrap();
            let wp = gaussian_spectral(&grid, seed as f64 / 7.0).unwrap();
            let p = partition_equal_energy(&wp, nc).unwrap();
            let b = p.boundary_indices();
            prop_assert!(b.windows(2).all(|w| w[1] > w[0]));
            prop_assert_eq!(b[0], 0);
            prop_assert_eq!(b[nc], 4096);
            let total: f64 = p.chip_energies().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(p.max_energy_deviation() < p.max_sample_energy());
        }
    }
}
