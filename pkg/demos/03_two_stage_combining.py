"""
Two-stage combining
===================

Designs the precoder and the two combining stages for one block: the first
stage compresses the receive antennas to a few outputs, the second separates
the streams. Designed from the true channel, any N_c >= N_s keeps the full
SVD capacity; the loss in the simulations comes from estimation error and
from keeping the first stage while the fading changes.
"""

import numpy as np

from twostage import beamforming as bf
from twostage.rates import se_perfect_csi_subcarrier

rng = np.random.default_rng(2)
N_r, N_t, N_s, P = 8, 16, 2, 100.0

# water-filling on two streams with gains 4 and 1 and a budget of 3
print("water-filling [4, 1], budget 3:", bf.water_fill([4.0, 1.0], 3.0))

H = (rng.standard_normal((N_r, N_t)) + 1j * rng.standard_normal((N_r, N_t))) / np.sqrt(2)
F = bf.design_precoder(H, N_s, P).matrix
s = np.linalg.svd(H, compute_uv=False)[:N_s]
capacity = np.sum(np.log2(1 + s**2 * bf.water_fill(s**2, P)))

for N_c in (N_s, 4, N_r):
    Q = bf.design_first_stage(H @ F, N_c)
    W = bf.design_second_stage(Q.conj().T @ H @ F, N_s)
    rate = se_perfect_csi_subcarrier(H, F, Q, W)
    print(f"N_c = {N_c}: {rate:.4f} bits/symbol (SVD capacity {capacity:.4f})")

# a constant-modulus combiner shared by all subcarriers loses part of the rate
B = np.stack([H @ F] * 4)
Q_hbf = bf.hbf_phase_proxy(B, 4)
W = bf.design_second_stage(np.linalg.pinv(Q_hbf) @ H @ F, N_s)
print(f"constant-modulus first stage: {se_perfect_csi_subcarrier(H, F, Q_hbf, W):.4f} bits/symbol")
