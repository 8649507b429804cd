"""
Spectral efficiency along the trajectory
========================================

A reduced desk-scale run of the moving-UE experiment. The first-stage
combiner is kept for a whole window; freezing both stages for the whole
trajectory collapses once the UE has moved.
"""

from twostage.config import ScenarioConfig
from twostage.scenario import run_se_vs_time

cfg = ScenarioConfig(N_t=16, N_r=8, N_c=4, N_s=2, S=32, L=4, blocks_per_window=5, trials=20, time_points=5)
res = run_se_vs_time(cfg)

methods = [m.value for m in res.methods]
print("time [s] " + " ".join(f"{m:>19s}" for m in methods))
rows = {}
for r in res.records:
    rows.setdefault(r.sweep_value, {})[r.method] = r.mean_se
for t in sorted(rows):
    print(f"{t:8.1f} " + " ".join(f"{rows[t][m]:19.2f}" for m in methods))
