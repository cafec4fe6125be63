"""Walk through the Hopf point, cycle sizes and the Dulac threshold.

Run with ``python3 demos/hopf_and_cycles.py``.
"""

import numpy as np

from gameenv.bifurcation import dulac_exponents, hopf_point
from gameenv.cycles import find_limit_cycle
from gameenv.equilibria import all_equilibria
from gameenv.model import PayoffPair, SystemParams

pair = PayoffPair([[3.5, 1.0], [0.5, 0.8]], [[2.0, 0.2], [2.5, 1.2]])
base = SystemParams.from_payoffs(pair, theta=1.0)
print("coefficients (a, b, c, d):", base.coefficients)

hopf = hopf_point(base)
print(f"Hopf point mu1 = {hopf.mu1:.6f}, omega0 = {hopf.omega0:.6f}")
print(f"first Lyapunov coefficient: closed form {hopf.ell1:.6f}, normal form {hopf.ell1_numeric:.6f}")

ex = dulac_exponents(base)
print(f"Dulac threshold mu0 = {ex.mu0:.6f} ({ex.regime})")

for eq in all_equilibria(base.with_(mu=0.1)):
    print(f"  {eq.kind.value:>10s} at ({eq.location.x:.6f}, {eq.location.r:.6f}): {eq.stability.value}")

print("\nmu       status  r_min     r_max     period    floquet")
for mu in (0.005, 0.05, 0.1, 0.154, 0.2, 0.4):
    res = find_limit_cycle(base.with_(mu=mu))
    c = res.cycle
    if c is None:
        print(f"{mu:<8} {res.status.value}")
    else:
        print(f"{mu:<8} {res.status.value:7s} {c.r_min:.6f}  {c.r_max:.6f}  {c.period:8.4f}  {c.floquet:.4f}")

# amplitude ~ sqrt(mu1 - mu) near the Hopf point
gaps = np.logspace(-4, -2, 5)
amps = [find_limit_cycle(base.with_(mu=hopf.mu1 - g)).cycle.r_amplitude for g in gaps]
print(f"\nlog-log slope of amplitude vs (mu1 - mu): {np.polyfit(np.log(gaps), np.log(amps), 1)[0]:.4f}")
