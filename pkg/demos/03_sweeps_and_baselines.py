"""
Communication rounds, noise level and baselines
===============================================
"""

# %%
import numpy as np

from localadaseg import BilinearSpec, SolverKind, Topology, generate_bilinear, run, sweep

# At a fixed budget of T = 2500 local steps, compare how many rounds two
# choices of K need to reach the same residual.
runs = {
    K: [run(Topology(M=4, K=K, R=2500 // K, master_seed=s), generate_bilinear(10, 0.1, s)) for s in range(3)]
    for K in (1, 50)
}
for level in (0.5, 0.2, 0.1):
    rounds = {K: np.median([t.rounds_to_reach(level) or np.inf for t in trs]) for K, trs in runs.items()}
    print(f"residual {level}: K=1 needs {rounds[1]:.0f} rounds, K=50 needs {rounds[50]:.0f}")

# %%
# The sweep helper runs the grid x seeds, optionally over several processes.
# Seed s is both the problem seed and the run's master seed.
results = sweep(Topology(M=4, K=50, R=40), {"sigma": [0.1, 0.5]}, seeds=range(3), problem=BilinearSpec(n=10))
for sigma in (0.1, 0.5):
    finals = [r.trajectory.final_residual for r in results if r.params["sigma"] == sigma]
    print(f"sigma {sigma}: mean final residual {np.mean(finals):.4f}")

# %%
# Baselines share the simulator. Fixed-step kinds default to
# eta = D / (G0 sqrt(T)); pass SolverKind(name, eta) to choose it.
p = generate_bilinear(10, 0.1, 0)
for kind in (SolverKind(), SolverKind("local_segda"), SolverKind("local_sgda"), SolverKind("minibatch_eg")):
    tr = run(Topology(M=4, K=50, R=40, solver=kind), p)
    print(f"{kind.name:13s} final residual {tr.final_residual:.4f}  oracle calls {tr.oracle_calls}")
