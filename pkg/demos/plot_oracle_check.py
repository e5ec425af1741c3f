"""
Checking the analytic table against a bit-level simulation
==========================================================

The oracle simulates every photon: loss, X and Z flips, the parity vote and
the per-row majorities.  Per-class tallies are compared to the analytic
numbers with score-test z values.
"""

from tecrepeater import ChannelParams, CodeParams, build_station_table
from tecrepeater.oracle import adjudicate_dx, compare_with_analytic, simulate_station

code = CodeParams(2, 2)
channel = ChannelParams(eta0=0.9, e=0.05)
oracle = simulate_station(code, channel, trials=10**6, seed=0)
print(f"conclusive fraction {oracle.conclusive_fraction:.5f}")

# %%
# Per-class agreement for the default reading.
report = compare_with_analytic(build_station_table(code, channel), oracle)
for r in report.rows:
    print(f"{str(r.pattern.u):>8}  q={r.q_conc:.4f}/{r.q_conc_hat:.4f}  ex={r.ex:.4f}/{r.ex_hat:.4f}  max|z|={r.max_abs_z:.2f}")

# %%
# Both draw-probability readings against the same run.
adj = adjudicate_dx(oracle)
for form, rep in adj["reports"].items():
    print(f"{form:>10}: flagged={rep.n_flagged} max|z|={rep.max_abs_z:.1f}")
print("preferred:", adj["preferred"])
