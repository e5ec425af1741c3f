"""
Station statistics of a small parity code
=========================================

A station sees one of a handful of loss classes.  For each acceptable class
we get the probability ``w`` that it occurs *and* gives a conclusive Bell
outcome, plus the logical error pair ``(ez, ex)``.
"""

from tecrepeater import ChannelParams, CodeParams, build_station_table

code = CodeParams(3, 2)
channel = ChannelParams(eta0=0.9, e=1e-3)

# %%
# Build the table and look at the rows.  ``u[k]`` counts rows that lost
# ``k`` photons.
table = build_station_table(code, channel)
print(f"{'u':>12} {'w':>10} {'ez':>10} {'ex':>10}")
for row in table.rows:
    print(f"{str(row.pattern.u):>12} {row.w:10.5f} {row.ez:10.2e} {row.ex:10.2e}")

# %%
# Averages feed the coarse-grained rate.
print(f"P0 = {table.p0:.6f}, E0 = {table.e0:.3e}")

# %%
# The two readings of the X-vote draw probability differ mostly at larger
# flip rates.
for form in ("consistent", "literal"):
    t = build_station_table(code, ChannelParams(0.9, 0.05), form)
    print(f"{form:>10}: P0 = {t.p0:.5f}, E0 = {t.e0:.4f}")
