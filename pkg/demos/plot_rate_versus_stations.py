"""
Key rate versus number of stations
==================================

Fine-grained (FG) and coarse-grained (CG) per-mode rates of the (2,2) code
at ``eta0 = 0.9`` and ``e = 5e-4``, against the PLOB and TGW bounds.  The
``literal`` draw reading is the one behind the published rate curves.
"""

import numpy as np

from tecrepeater import ChainSpec, ChannelParams, CodeParams, build_station_table, cg_rate, plob, tgw
from tecrepeater.chain import fg_rate
from tecrepeater.sweep import positive_key_cutoff

code, channel = CodeParams(2, 2), ChannelParams(0.9, 5e-4)
table = build_station_table(code, channel, "literal")

ns = np.arange(5, 361, 5)
r_fg, r_cg = [], []
for n in ns:
    spec = ChainSpec(table, int(n))
    r_fg.append(fg_rate(spec, samples=10**5, seed=int(n)).r_per_mode)
    r_cg.append(cg_rate(spec).r_per_mode)
r_fg, r_cg = np.array(r_fg), np.array(r_cg)
eta_tot = channel.eta0**ns
r_plob, r_tgw = plob(eta_tot), tgw(eta_tot)

# %%
# Where each scenario beats the repeaterless bound.
for name, r in (("FG", r_fg), ("CG", r_cg)):
    beats = ns[r > r_plob]
    print(f"{name} beats PLOB for N in [{beats.min()}, {beats.max()}]")
print("CG cutoff", positive_key_cutoff(code, channel, "CG", dx_form="literal"))

# %%
# Plot, if matplotlib is around.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    l_tot = ns * channel.unit_distance_km()
    fig, ax = plt.subplots()
    ax.semilogy(l_tot, r_fg, label="FG")
    ax.semilogy(l_tot, np.where(r_cg > 0, r_cg, np.nan), label="CG")
    ax.semilogy(l_tot, r_plob, "k--", label="PLOB")
    ax.semilogy(l_tot, r_tgw, "k:", label="TGW")
    ax.set_xlabel("L_tot [km]")
    ax.set_ylabel("key per mode")
    ax.legend()
    fig.savefig("rate_versus_stations.png", dpi=120)
