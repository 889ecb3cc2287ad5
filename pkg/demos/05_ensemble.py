"""Dipolar coupling statistics in a 50 ppm NV ensemble.

Random NV positions and axes give a distribution of couplings between a
central spin and its off-axis bath (Delta) and among bath pairs (R_dd).
Driving the bath rescales every coupling by the same factor.
"""
# %%
from dressedspin.ensemble import EnsembleConfig, nearest_neighbour_mean, sweep_drive

cfg = EnsembleConfig(density_ppm=50.0, n_configs=500, seed=0)
print(f"{cfg.expected_count:.0f} NVs expected per box, mean nearest neighbour {nearest_neighbour_mean(cfg):.2f} nm")

# %%
rows = sweep_drive(cfg, [0.0, 4.0, 8.0, 10.0], omega_plus=10.0)
nd = rows[0]
print("drive        Delta peak   ratio   R_dd peak   ratio")
for r in rows:
    dr = r.delta.peak / nd.delta.peak
    rr = r.rdd.peak / nd.rdd.peak
    print(f"{r.label:10s}  {r.delta.peak:9.4f}  {dr:6.3f}   {r.rdd.peak:9.4f}  {rr:6.3f}")
