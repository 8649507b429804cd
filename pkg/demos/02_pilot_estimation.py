"""
Pilot-based channel estimation
==============================

Estimates the full channel from uplink pilots and shows that the squared
error falls inversely with the pilot energy.
"""

import numpy as np

from twostage import estimation as est

rng = np.random.default_rng(1)
N_r, N_t, t_p = 8, 16, 8
H = (rng.standard_normal((N_r, N_t)) + 1j * rng.standard_normal((N_r, N_t))) / np.sqrt(2)

pilots = est.make_pilot_matrix(N_r, t_p)
print("pilot rows orthonormal:", np.allclose(pilots.entries @ pilots.entries.conj().T, np.eye(N_r)))

print(" pilot power   measured MSE   N_t*N_r/(P t_p)")
for power in (0.5, 1.0, 2.0, 4.0):
    trials = 2000
    H_hat = est.estimate_uplink_full(np.broadcast_to(H, (trials, N_r, N_t)), power, t_p, rng).estimate
    mse = np.mean(np.sum(np.abs(H_hat - H) ** 2, axis=(1, 2)))
    print(f"{power:12.1f} {mse:14.2f} {N_t * N_r / (power * t_p):17.2f}")

# without noise the estimate is exact
print("noiseless error:", np.abs(est.estimate_uplink_full(H, 1.0, t_p).estimate - H).max())
