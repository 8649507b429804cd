"""
Use-and-then-forget bound
=========================

The receiver only knows the average effective channel; fluctuations around
it act as extra noise. The bound is compared with the genie rate that knows
every realization.
"""

import numpy as np

from twostage.rates import estimate_uatf_statistics, log2det_gain, se_uatf_subcarrier

rng = np.random.default_rng(3)
mean = np.diag([3.0, 1.5]).astype(complex)
X = np.broadcast_to(np.eye(2, dtype=complex), (5000, 2, 2))

print(" spread   UatF   genie")
for spread in (0.0, 0.3, 1.0, 3.0):
    E = mean + spread * (rng.standard_normal((5000, 2, 2)) + 1j * rng.standard_normal((5000, 2, 2))) / np.sqrt(2)
    uatf = se_uatf_subcarrier(estimate_uatf_statistics(E, X))
    genie = np.mean(log2det_gain(np.swapaxes(E.conj(), -1, -2)))
    print(f"{spread:7.1f} {uatf:6.2f} {genie:7.2f}")
