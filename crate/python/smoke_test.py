#!/usr/bin/env python3
"""Smoke test for the qcdma_py extension module.

Locates the built cdylib (release preferred), copies it next to this script
under the importable name, and exercises the main types end to end.

Build the module first:
    cargo build -p qcdma-py --release
Then run:
    python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libqcdma_py.so",
        ROOT / "target" / "debug" / "libqcdma_py.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no built extension found; run `cargo build -p qcdma-py --release` first")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    target = HERE / "qcdma_py.so"
    if not target.exists() or target.stat().st_mtime < newest.stat().st_mtime:
        shutil.copy2(newest, target)
    sys.path.insert(0, str(HERE))
    import qcdma_py

    return qcdma_py


def approx(a, b, tol):
    assert abs(a - b) < tol, f"{a} != {b} (tol {tol})"


def main():
    q = load_module()

    grid = q.Grid.default()
    wp = q.Wavepacket.gaussian(grid, 0.0)
    approx(wp.norm(), 1.0, 1e-9)

    # Parseval through the time-domain trace.
    times, intensity = wp.intensity_trace()
    d_t = times[1] - times[0]
    approx(sum(intensity) * d_t, 1.0, 1e-9)

    # Effective duration of the Gaussian is sqrt(pi) * tau_p.
    approx(wp.effective_duration(), math.sqrt(math.pi), 0.02)

    # Walsh rows are exactly orthogonal.
    rows = [q.Code.walsh(8, i) for i in range(8)]
    for i in range(8):
        for j in range(8):
            ip = rows[i].inner_product(rows[j])
            assert ip == complex(8.0 if i == j else 0.0, 0.0), (i, j, ip)

    # Encode/decode round trip restores the overlap with the original.
    partition = q.Partition.equal_energy(wp, 63)
    code = q.Code.random(63, 7)
    encoded = wp.encoded(partition, code)
    approx(abs(wp.inner_product(encoded.decoded(partition, code))), 1.0, 1e-12)
    # Encoding knocks the central peak down by roughly Nc.
    suppressed = abs(encoded.time_amplitude_at(0.0)) ** 2 / abs(wp.time_amplitude_at(0.0)) ** 2
    assert suppressed < 10.0 / 63.0, suppressed

    # Time spreading is of order Nc.
    ratio = q.spreading_factor(wp, code, partition)
    assert 0.3 * 63 <= ratio <= 3.0 * 63, ratio

    # Couplers: exact balanced entries, unitary DFT.
    b = q.Coupler.balanced_2x2()
    h = math.sqrt(0.5)
    assert b.entries()[1][0] == complex(-h, 0.0)
    assert q.Coupler.dft(8).unitarity_residual() < 1e-12

    # Hong-Ou-Mandel: identical photons never coincide, orthogonal ones
    # coincide half the time.
    far = q.Wavepacket.gaussian(grid, 60.0)
    approx(q.hom_coincidence(b, wp, wp), 0.0, 1e-12)
    approx(q.hom_coincidence(b, wp, far), 0.5, 1e-9)

    # Two-user network: a correctly decoded single photon lands the
    # normalized half-peak at each receiver; no energy is lost.
    tx1 = q.Transmitter.fock(1, wp, q.Code.random(63, 1))
    tx2 = q.Transmitter.fock(1, wp, q.Code.random(63, 2))
    net = q.Network(b, [tx1, tx2], partition)
    times, rows = net.fock_trace()
    peak = q.reference_peak_intensity(wp, 0.0)
    center = min(range(len(times)), key=lambda i: abs(times[i]))
    assert 0.45 < rows[0][center] / peak < 0.7, rows[0][center] / peak
    approx(net.energy_residual(), 0.0, 1e-9)

    out = net.two_user_fock_output()
    approx(abs(out["both_to_receiver_one"] - complex(0.5, 0.0)), 0.0, 1e-15)
    approx(abs(out["swapped"] - complex(-0.5, 0.0)), 0.0, 1e-15)
    nf = out["normalization_factor"]
    assert 1.0 <= nf <= math.sqrt(2.0), nf

    # Monte-Carlo helpers run and report standard errors.
    stats = q.mc_receiver_mean(63, 200, 1)
    assert abs(stats["mean_receiver_1"] - stats["nominal"]) < 6 * stats["se_receiver_1"]
    peak_stats = q.mc_peak_stats(63, 200, 1)
    assert peak_stats["se_peak_ratio"] > 0.0

    print("qcdma_py smoke test passed")


if __name__ == "__main__":
    main()
