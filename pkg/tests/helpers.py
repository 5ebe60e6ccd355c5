"""Independent oracles and invariant checks shared by the test modules."""
import itertools
import math

import numpy as np


def brute_force_gap(problem, z):
    """Duality gap by enumerating the 2^n box vertices of each block.

    F is linear in each block, so the inner max/min is attained at a vertex.
    """
    n = problem.n
    x, y = np.asarray(z[:n]), np.asarray(z[n:])
    A, b, c = problem.A, problem.b, problem.c

    def F(xx, yy):
        return xx @ A @ yy + b @ xx + c @ yy

    vertices = [np.array(v, dtype=float) for v in itertools.product((-1.0, 1.0), repeat=n)]
    return max(F(x, v) for v in vertices) - min(F(v, y) for v in vertices)


class InvariantChecker:
    """Step and communication hooks that record every per-step invariant violation."""

    def __init__(self, problem, adaptive=True, tol=1e-12):
        self.problem = problem
        self.adaptive = adaptive
        self.tol = tol
        self.violations = []
        self.steps = 0
        self.comms = []

    def _fail(self, msg):
        if len(self.violations) < 20:
            self.violations.append(msg)

    def step(self, m, before, after):
        self.steps += 1
        S = self.problem.feasible_set
        tol = self.tol
        if self.adaptive:
            a = after.adaptive
            if after.eta > before.eta:
                self._fail(f"worker {m} step {after.steps}: eta increased {before.eta} -> {after.eta}")
            closed = after.eta * math.sqrt(a.G0**2 + a.accumulator)
            if abs(closed - a.D * a.alpha) > tol:
                self._fail(f"worker {m} step {after.steps}: eta*sqrt(G0^2+acc) off by {closed - a.D * a.alpha}")
            if after.last_eta != before.eta:
                self._fail(f"worker {m} step {after.steps}: step used eta {after.last_eta}, state had {before.eta}")
        eta = after.last_eta
        move = np.linalg.norm(after.last_half - before.anchor)
        if move > eta * np.linalg.norm(after.last_M) + tol:
            self._fail(f"worker {m} step {after.steps}: probe moved {move} > eta*|M|")
        second = np.linalg.norm(after.last_full - after.last_half)
        if second > eta * np.linalg.norm(after.last_g - after.last_M) + tol:
            self._fail(f"worker {m} step {after.steps}: |full-half| {second} > eta*|g-M|")
        for name in ("last_half", "last_full"):
            if not S.contains(getattr(after, name), tol):
                self._fail(f"worker {m} step {after.steps}: {name} infeasible")

    def comm(self, iteration, weights, workers):
        self.comms.append(iteration)
        if abs(weights.sum() - 1.0) > self.tol or not np.all(weights > 0):
            self._fail(f"iteration {iteration}: bad weights {weights}")
        first = workers[0].anchor
        if not all(np.array_equal(w.anchor, first) for w in workers):
            self._fail(f"iteration {iteration}: anchors differ after communication")
        if not self.problem.feasible_set.contains(first, self.tol):
            self._fail(f"iteration {iteration}: server average infeasible")

    def hooks(self):
        return {"step_hook": self.step, "comm_hook": self.comm}
