"""
Spectral efficiency over SNR
============================

Fully digital two-stage combining against a frequency-flat constant-modulus
first stage, at the UE position reached after 3 s.
"""

from twostage.config import ScenarioConfig
from twostage.scenario import run_se_vs_snr

cfg = ScenarioConfig(
    N_t=16, N_r=8, N_c=4, N_s=2, S=32, L=4, blocks_per_window=5, trials=20,
    snr_grid_dB=(-10.0, 0.0, 10.0, 20.0),
)
res = run_se_vs_snr(cfg)

methods = [m.value for m in res.methods]
print("SNR [dB] " + " ".join(f"{m:>17s}" for m in methods))
rows = {}
for r in res.records:
    rows.setdefault(r.sweep_value, {})[r.method] = r
for snr in sorted(rows):
    print(f"{snr:8.0f} " + " ".join(f"{rows[snr][m].mean_se:9.2f} ±{rows[snr][m].ci95_half_width:5.2f}" for m in methods))
