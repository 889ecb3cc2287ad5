"""Tuning the effective coupling with the drive imbalance alpha.

NV_B is driven on both transitions with Omega_+- = s*(1 +- alpha). The
dressed-frame coupling follows 0.5*(Op^2 - Om^2)/(Op^2 + Om^2)*nu_dip and is
read out as half the DQ Ramsey shift.
"""
# %%
import numpy as np

from dressedspin import SystemParams
from dressedspin.experiments import run_alpha_sweep

params = SystemParams(nu_dip=0.26)
res = run_alpha_sweep(params, np.linspace(-1, 1, 11), omega_scale=5.0)

# %%
print(" alpha   measured   closed form")
for a, m, c in zip(res.axis, res.signals["nu_eff"], res.signals["nu_eff_model"]):
    print(f"{a:+.1f}   {m:+.5f}   {c:+.5f}")
print(f"largest deviation: {res.value('max_deviation'):.2e} MHz")
