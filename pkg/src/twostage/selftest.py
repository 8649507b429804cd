"""Oracle-equivalence checks run by ``twostage selftest``.

Each check compares a library routine with an independent computation on a
few random instances and returns ``(name, passed, detail)``.
"""

from __future__ import annotations

import numpy as np

from . import beamforming as bf
from . import estimation as est
from .channel import ArrayGeometry, assemble_channel, draw_fading, make_cluster_set, steering_matrices
from .config import ScenarioConfig
from .scenario import Method, run_window, window_geometry

__all__ = ["run_selftest", "CHECKS"]


def _random_clusters(rng, num_clusters, num_taps, los=True):
    aoa = rng.uniform(-1.2, 1.2, num_clusters)
    aod = rng.uniform(-1.2, 1.2, num_clusters)
    los_path = (rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), 1.0) if los else None
    return make_cluster_set(aoa, aod, [0.1] * num_clusters, num_taps, los=los_path)


def check_compact_form(rng):
    rx, tx = ArrayGeometry(4), ArrayGeometry(8)
    S = 16
    worst = 0.0
    for _ in range(10):
        clusters = _random_clusters(rng, 3, 4)
        fading = draw_fading(rng, clusters)
        H = assemble_channel(rx, tx, clusters, fading, S).per_subcarrier
        A_r, A_t = steering_matrices(rx, tx, clusters)
        # naive DFT of the taps
        nu = np.arange(S)[:, None]
        ell = np.arange(clusters.num_taps)[None, :]
        dft = np.exp(-2j * np.pi * nu * ell / S)
        gains = fading.taps @ dft.T  # (K, S)
        for v in range(S):
            ref = A_r @ np.diag(gains[:, v]) @ A_t.T
            worst = max(worst, np.linalg.norm(H[v] - ref) / np.linalg.norm(ref))
    return "compact form", worst < 1e-10, f"max relative error {worst:.2e}"


def check_water_filling(rng):
    worst = 0.0
    for _ in range(100):
        g = rng.exponential(size=rng.integers(1, 9))
        budget = rng.uniform(0.1, 10.0)
        P = bf.water_fill(g, budget)
        # bisection on the water level
        lo, hi = 0.0, budget + 1.0 / g.min()
        for _ in range(200):
            mu = 0.5 * (lo + hi)
            if np.maximum(mu - 1.0 / g, 0.0).sum() > budget:
                hi = mu
            else:
                lo = mu
        worst = max(worst, np.max(np.abs(P - np.maximum(lo - 1.0 / g, 0.0))))
    return "water-filling", worst < 1e-6, f"max deviation {worst:.2e}"


def check_noiseless_estimation(rng):
    Nr, Nt, Nc, Ns = 4, 6, 3, 2
    H = rng.standard_normal((Nr, Nt)) + 1j * rng.standard_normal((Nr, Nt))
    Q = np.linalg.qr(rng.standard_normal((Nr, Nc)) + 1j * rng.standard_normal((Nr, Nc)))[0]
    F = rng.standard_normal((Nt, Ns)) + 1j * rng.standard_normal((Nt, Ns))
    G = Q.conj().T @ H
    pairs = [
        (est.estimate_uplink_full(H, 3.0, Nr, None).estimate, H),
        (est.estimate_downlink_precoded(H @ F, None).estimate, H @ F),
        (est.estimate_uplink_effective(G, 3.0, Nr, None).estimate, G),
        (est.estimate_downlink_effective(G @ F, None).estimate, G @ F),
    ]
    worst = max(np.linalg.norm(a - b) / np.linalg.norm(b) for a, b in pairs)
    return "noiseless estimation", worst < 1e-10, f"max relative error {worst:.2e}"


def check_lossless_compression(rng):
    cfg = ScenarioConfig(
        N_t=16, N_r=8, N_c=8, N_s=3, S=8, L=4, blocks_per_window=2, noiseless=True, trials=2
    )
    worst = 0.0
    for _ in range(5):
        seed = int(rng.integers(2**32))
        # between the BS at the origin and the UE at (20, 0), in front of both
        scatterers = rng.uniform([2.0, -15.0], [18.0, 15.0], (cfg.N_cl, 2))
        geom = window_geometry(cfg, np.array([20.0, 0.0]), scatterers)
        result = run_window(cfg, geom, np.random.default_rng(seed), (Method.PROPOSED_FIXED_Q,))
        fading_rng = np.random.default_rng(seed)
        for block in result.per_block:
            fading = draw_fading(fading_rng, geom.clusters)
            H = assemble_channel(cfg.rx_geometry, cfg.tx_geometry, geom.clusters, fading, cfg.S).per_subcarrier
            s = np.linalg.svd(H, compute_uv=False)[:, : cfg.N_s]
            ref = np.array([np.sum(np.log2(1 + g * bf.water_fill(g, cfg.P_t_linear))) for g in s**2])
            got = block.genie_rate[Method.PROPOSED_FIXED_Q]
            worst = max(worst, np.max(np.abs(got - ref) / ref))
    return "lossless compression", worst < 1e-6, f"max relative error {worst:.2e}"


CHECKS = (check_compact_form, check_water_filling, check_noiseless_estimation, check_lossless_compression)


def run_selftest(seed: int = 0, out=print) -> bool:
    """Run every check, print one line per check and return overall success."""
    rng = np.random.default_rng(seed)
    ok = True
    for check in CHECKS:
        name, passed, detail = check(rng)
        out(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        ok &= bool(passed)
    return ok
