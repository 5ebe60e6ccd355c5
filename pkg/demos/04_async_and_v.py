"""
Unequal local steps and the V diagnostic
========================================

Workers may run different numbers of local steps per round and still meet
at the round barrier. V_m tracks sqrt(sum ||g||^2 + ||M||^2) on worker m.
"""

# %%
import numpy as np

from localadaseg import Topology, generate_bilinear, run

p = generate_bilinear(10, 0.1, 0)
sync = run(Topology(M=4, K=50, R=40), p)
asyn = run(Topology(M=4, K=None, per_worker_K=(50, 45, 40, 35), R=40), p)

for name, tr in (("synchronous", sync), ("asynchronous", asyn)):
    print(f"{name:13s} final/initial residual {tr.final_residual / tr.initial_residual:.4f}")

# %%
# Rounds needed to reach a few residual levels.
for level in (0.5, 0.2, 0.1, 0.06):
    print(level, sync.rounds_to_reach(level), asyn.rounds_to_reach(level))

# %%
# V_max is the largest V_m over workers. It grows like sqrt(T) when the
# oracle norms stay bounded, so V_max / sqrt(t) settles to a constant.
v = sync.column("v_max")
t = sync.column("iteration")
print("nondecreasing:", bool(np.all(np.diff(v) >= 0)))
print("V_max/sqrt(t) every 10 rounds:", np.round(v / np.sqrt(t), 3)[::10])
