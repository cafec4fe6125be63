"""Transform a balanced game to Liénard form and check the uniqueness conditions.

Run with ``python3 demos/lienard_uniqueness.py``.
"""

import numpy as np

from gameenv.lienard import check_lienard_conditions, lienard_transform
from gameenv.model import SystemParams

form = lienard_transform(SystemParams(3.0, 1.0, 1.0, 3.0, mu=0.05))
print(f"shift r'* = {form.r_star_prime}, mu1 = {form.mu1}, nu = {form.nu:.6f}")

# the Liénard field times alpha*beta reproduces the original field
rng = np.random.default_rng(0)
x, r = rng.uniform(0.01, 0.99, (2, 10_000))
xt, rt = form.from_original(x, r)
lx, lr = form.field(xt, rt)
ox, orr = form.original_field(xt, rt)
scale = form.alpha(xt) * form.beta(rt)
print(f"max field mismatch: {max(np.max(abs(lx * scale - ox)), np.max(abs(lr * scale - orr))):.2e}")

for key, verdict in check_lienard_conditions(form).items():
    print(f"condition {key}: {'Pass' if verdict.passed else 'Fail'} ({verdict.method}) {verdict.detail}")
