//! The spectral phase-shifting operator as it acts on wavepackets:
//! encoding, decoding, and the composition algebra of consecutive masks.

use num_complex::Complex64;

use crate::codes::{mask_from_code, unit_phase, ChipPartition, Code, PhaseMask};
use crate::error::{QcdmaError, Result};
use crate::wavepacket::{inner_product, SpectralWavepacket};

/// Sign convention of the phase multiplier: encoding applies
/// `e^{-i theta(w)}`, decoding the conjugate `e^{+i theta(w)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encode,
    Decode,
}

/// Pointwise phase multiplication `xi(w) -> xi(w) e^{∓i theta(w)}`.
/// Unimodular multipliers leave the norm unchanged.
pub fn apply_mask(
    wp: &SpectralWavepacket,
    mask: &PhaseMask,
    direction: Direction,
) -> Result<SpectralWavepacket> {
    if wp.grid() != mask.grid() {
        return Err(QcdmaError::GridMismatch);
    }
    let sign = match direction {
        Direction::Encode => -1.0,
        Direction::Decode => 1.0,
    };
    let amplitudes: Vec<Complex64> = wp
        .amplitudes()
        .iter()
        .zip(mask.theta())
        .map(|(x, &t)| x * unit_phase(sign * t))
        .collect();
    Ok(SpectralWavepacket::from_samples_unchecked(*wp.grid(), amplitudes))
}

/// Convenience: encode `wp` with `code` on `partition`.
pub fn encode(
    wp: &SpectralWavepacket,
    partition: &ChipPartition,
    code: &Code,
) -> Result<SpectralWavepacket> {
    apply_mask(wp, &mask_from_code(partition, code)?, Direction::Encode)
}

/// Convenience: decode `wp` with `code` on `partition`.
pub fn decode(
    wp: &SpectralWavepacket,
    partition: &ChipPartition,
    code: &Code,
) -> Result<SpectralWavepacket> {
    apply_mask(wp, &mask_from_code(partition, code)?, Direction::Decode)
}

/// Encode-by-`cj` followed by decode-by-`ck` collapses to a single encoding
/// mask with chip phases `(theta_j - theta_k) mod 2 pi`. Binary codes are
/// closed under composition.
pub fn compose_codes(cj: &Code, ck: &Code) -> Result<Code> {
    if cj.n_chips() != ck.n_chips() {
        return Err(QcdmaError::LengthMismatch { left: cj.n_chips(), right: ck.n_chips() });
    }
    let phases: Vec<f64> = cj
        .phases()
        .iter()
        .zip(ck.phases())
        .map(|(a, b)| (a - b).rem_euclid(2.0 * std::f64::consts::PI))
        .collect();
    Code::new(phases, format!("{}*{}'", cj.label(), ck.label()))
}

/// Both sides of the cross-coding identity
/// `<xi_j^{e_j d_k} | xi_k> = <xi_j^{e_j} | xi_k^{e_k}>`, computed through
/// independent paths so callers can assert their equality.
pub fn cross_inner_after_coding(
    xi_j: &SpectralWavepacket,
    cj: &Code,
    xi_k: &SpectralWavepacket,
    ck: &Code,
    partition: &ChipPartition,
) -> Result<(Complex64, Complex64)> {
    // Left: encode j with its own code, decode with k's, inner with raw xi_k.
    let cross_decoded = decode(&encode(xi_j, partition, cj)?, partition, ck)?;
    let left = inner_product(&cross_decoded, xi_k)?;
    // Right: encode each with its own code, then the inner product.
    let right = inner_product(&encode(xi_j, partition, cj)?, &encode(xi_k, partition, ck)?)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{
        partition_equal_energy, random_binary_code, random_binary_code_from,
        walsh_hadamard_code, Code,
    };
    use crate::rng;
    use crate::wavepacket::{gaussian_spectral, time_amplitude_at, FrequencyGrid};
    use approx::assert_abs_diff_eq;

    fn setup(nc: usize) -> (SpectralWavepacket, ChipPartition) {
        let wp = gaussian_spectral(&FrequencyGrid::default_grid(), 0.0).unwrap();
        let p = partition_equal_energy(&wp, nc).unwrap();
        (wp, p)
    }

    #[test]
    fn zero_mask_is_identity() {
        let (wp, p) = setup(7);
        let zero = Code::new(vec![0.0; 7], "zero").unwrap();
        let out = encode(&wp, &p, &zero).unwrap();
        assert_eq!(wp.amplitudes(), out.amplitudes());
    }

    #[test]
    fn decode_undoes_encode_pointwise() {
        let (wp, p) = setup(63);
        let code = random_binary_code(63, 11).unwrap();
        let round = decode(&encode(&wp, &p, &code).unwrap(), &p, &code).unwrap();
        for (x, y) in wp.amplitudes().iter().zip(round.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn binary_mask_preserves_modulus_exactly() {
        let (wp, p) = setup(63);
        let code = random_binary_code(63, 4).unwrap();
        let enc = encode(&wp, &p, &code).unwrap();
        for (x, y) in wp.amplitudes().iter().zip(enc.amplitudes()) {
            assert_eq!(x.norm_sqr(), y.norm_sqr());
        }
        assert_eq!(wp.norm(), enc.norm());
    }

    #[test]
    fn general_mask_preserves_norm() {
        let (wp, p) = setup(16);
        let phases: Vec<f64> = (0..16).map(|l| 0.37 * l as f64).collect();
        let code = Code::new(phases, "general").unwrap();
        let enc = encode(&wp, &p, &code).unwrap();
        assert_abs_diff_eq!(enc.norm(), wp.norm(), epsilon = 1e-12);
    }

    #[test]
    fn composing_code_with_itself_is_zero_code() {
        let c = random_binary_code(63, 8).unwrap();
        let composed = compose_codes(&c, &c).unwrap();
        assert!(composed.phases().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn composition_of_binary_codes_stays_binary() {
        let a = random_binary_code(63, 1).unwrap();
        let b = random_binary_code(63, 2).unwrap();
        let c = compose_codes(&a, &b).unwrap();
        assert!(c.is_binary());
    }

    #[test]
    fn zero_code_is_identity_element() {
        let zero = Code::new(vec![0.0; 63], "zero").unwrap();
        let c = random_binary_code(63, 21).unwrap();
        assert_eq!(compose_codes(&c, &zero).unwrap().phases(), c.phases());
    }

    #[test]
    fn composed_mask_equals_sequential_application() {
        let (wp, p) = setup(32);
        let a = random_binary_code(32, 5).unwrap();
        let b = random_binary_code(32, 6).unwrap();
        let sequential = decode(&encode(&wp, &p, &a).unwrap(), &p, &b).unwrap();
        let composed = encode(&wp, &p, &compose_codes(&a, &b).unwrap()).unwrap();
        for (x, y) in sequential.amplitudes().iter().zip(composed.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn cross_inner_identity_for_same_code_and_wavepacket() {
        let (wp, p) = setup(63);
        let c = random_binary_code(63, 13).unwrap();
        let (left, right) = cross_inner_after_coding(&wp, &c, &wp, &c, &p).unwrap();
        assert!((left - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((right - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cross_inner_identity_over_random_code_pairs() {
        let (wp, p) = setup(63);
        for seed in 0..50u64 {
            let cj = random_binary_code(63, 2 * seed).unwrap();
            let ck = random_binary_code(63, 2 * seed + 1).unwrap();
            let (left, right) = cross_inner_after_coding(&wp, &cj, &wp, &ck, &p).unwrap();
            assert!((left - right).norm() < 1e-12, "seed {seed}: {left} vs {right}");
        }
    }

    #[test]
    fn walsh_encoded_wavepackets_nearly_orthogonal() {
        let (wp, p) = setup(8);
        let bound = p.walsh_residual_bound();
        for j in 0..8 {
            for k in (j + 1)..8 {
                let cj = walsh_hadamard_code(8, j).unwrap();
                let ck = walsh_hadamard_code(8, k).unwrap();
                let (left, right) = cross_inner_after_coding(&wp, &cj, &wp, &ck, &p).unwrap();
                assert!(left.norm() <= bound + 1e-15, "({j},{k}) {} > {bound}", left.norm());
                assert!((left - right).norm() < 1e-12);
            }
        }
    }

    // Monte-Carlo oracle over the definition: for random binary code pairs
    // the cross-decoded peak statistic |<xi^{e_j d_k}(t0)>|^2 has mean
    // sum_k w_k^2 where w_k are the chips' amplitude-integral weights.
    #[test]
    fn cross_decoded_peak_statistics_match_direct_expectation() {
        let (wp, p) = setup(63);
        let peak = time_amplitude_at(&wp, 0.0).norm();
        // Independent expectation: chip amplitude-integral weights.
        let sums: Vec<f64> = (0..p.n_chips())
            .map(|k| {
                let lo = p.boundary_indices()[k];
                let hi = p.boundary_indices()[k + 1];
                wp.amplitudes()[lo..hi].iter().map(|a| a.norm()).sum::<f64>()
            })
            .collect();
        let total: f64 = sums.iter().sum();
        let expectation: f64 = sums.iter().map(|s| (s / total).powi(2)).sum();

        let trials = 1000;
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        for t in 0..trials {
            let mut stream = rng::stream(900, t as u64);
            let cj = random_binary_code_from(63, &mut stream, "mc").unwrap();
            let ck = random_binary_code_from(63, &mut stream, "mc").unwrap();
            let cross = decode(&encode(&wp, &p, &cj).unwrap(), &p, &ck).unwrap();
            let v = time_amplitude_at(&cross, 0.0).norm_sqr() / (peak * peak);
            acc += v;
            acc_sq += v * v;
        }
        let mean = acc / trials as f64;
        let var = (acc_sq / trials as f64 - mean * mean) * trials as f64 / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - expectation).abs() < 3.0 * se,
            "mean {mean} vs expectation {expectation} (se {se})"
        );
        // Order of magnitude of the paper-level claim: ~1/Nc.
        assert!(mean > 0.5 / 63.0 && mean < 3.0 / 63.0, "mean {mean}");
    }

    #[test]
    fn cross_decoded_peak_mean_is_zero_and_real_for_synchronous_gaussian() {
        let (wp, p) = setup(63);
        let peak = time_amplitude_at(&wp, 0.0).norm();
        let trials = 1000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut max_im: f64 = 0.0;
        for t in 0..trials {
            let mut stream = rng::stream(901, t as u64);
            let cj = random_binary_code_from(63, &mut stream, "mc").unwrap();
            let ck = random_binary_code_from(63, &mut stream, "mc").unwrap();
            let cross = decode(&encode(&wp, &p, &cj).unwrap(), &p, &ck).unwrap();
            let v = time_amplitude_at(&cross, 0.0) / peak;
            sum += v;
            max_im = max_im.max(v.im.abs());
        }
        let mean = sum / trials as f64;
        // 3 SE of a +/-w random sum with variance ~1/Nc.
        let se = (1.0 / 63.0f64 / trials as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * se, "mean {mean}");
        // At the central time of a symmetric Gaussian every chip contributes
        // in phase, so the statistic is purely real.
        assert!(max_im < 1e-9, "imaginary leak {max_im}");
    }
}
