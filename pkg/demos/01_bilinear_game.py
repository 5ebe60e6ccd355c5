"""
The stochastic bilinear game
============================

F(x, y) = x'Ay + b'x + c'y over the box [-1, 1]^n x [-1, 1]^n, observed
through an oracle that adds one Gaussian vector xi to both linear terms.
"""

# %%
import numpy as np

from localadaseg import RngStream, duality_gap, generate_bilinear, kkt_residual

# A seeded instance. The integer is the problem seed; the same seed always
# gives the same A, b and c.
p = generate_bilinear(n=10, sigma=0.1, stream=0)
print("A symmetric:", np.array_equal(p.A, p.A.T))
print("largest |b|, |c|:", np.abs(p.b).max(), np.abs(p.c).max())

# %%
# The operator stacks (dF/dx, -dF/dy). At the origin it is just (b, -c).
z = np.zeros(2 * p.n)
print(np.allclose(p.operator(z), np.concatenate((p.b, -p.c))))

# %%
# The noisy oracle. Workers own their streams, keyed by (master_seed, worker id).
stream = RngStream(master_seed=0, stream_id=0)
draws = np.array([p.oracle(z, stream) for _ in range(20_000)])
noise = draws - p.operator(z)
print("mean of noise (should be ~0):", np.abs(noise.mean(axis=0)).max())
print("E|noise|^2:", (noise**2).sum(axis=1).mean(), "expected 2 n sigma^2 =", 2 * p.n * 0.1**2)

# %%
# Two quality measures. The residual is defined everywhere; the duality gap
# only inside the box.
for point in (np.zeros(2 * p.n), np.ones(2 * p.n), -np.ones(2 * p.n)):
    print(f"residual {kkt_residual(p, point):8.4f}   gap {duality_gap(p, point):8.4f}")

# %%
# Instances serialize to JSON so a run can be replayed on exactly the same data.
text = p.to_json()
q = type(p).from_json(text)
print(np.array_equal(q.A, p.A), len(text), "characters")
