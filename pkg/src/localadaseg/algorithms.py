"""Per-worker transitions: adaptive extragradient, baselines and server averaging.

Every step function takes a :class:`WorkerState` and returns a new one.
The only object shared between the old and new state is the worker's
:class:`~localadaseg.core.RngStream`, which advances as noise is drawn.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import ConfigurationError, Iterate, ProtocolError, RngStream
from .problems import SaddleProblem

__all__ = [
    "AdaptiveState",
    "WorkerState",
    "SolverKind",
    "SOLVER_NAMES",
    "base_learning_rate",
    "eta_update",
    "extragradient_step",
    "gda_step",
    "local_phase",
    "aggregation_weights",
    "server_aggregate",
    "baseline_step",
    "init_worker",
]

ALPHA_MODES = ("nonsmooth", "smooth", "smooth_eps")


def base_learning_rate(mode: str, M: int, T: int, eps: float = 0.0) -> float:
    """``alpha`` for the three regimes: 1, ``1/sqrt(M)`` and ``T**eps / sqrt(M)``."""
    if mode == "nonsmooth":
        return 1.0
    if mode == "smooth":
        return 1.0 / math.sqrt(M)
    if mode == "smooth_eps":
        if not 0 < eps < 0.5:
            raise ConfigurationError("smooth_eps requires 0 < eps < 1/2")
        return T**eps / math.sqrt(M)
    raise ConfigurationError(f"unknown alpha_mode {mode!r}; expected one of {ALPHA_MODES}")


@dataclass(frozen=True, slots=True)
class AdaptiveState:
    """Learning-rate accumulator of one worker.

    ``accumulator`` holds the running sum of
    ``(||half - anchor||^2 + ||half - full||^2) / (5 eta^2)`` and
    ``eta_current = D * alpha / sqrt(G0^2 + accumulator)``.
    """

    D: float
    G0: float
    alpha: float
    accumulator: float = 0.0
    eta_current: float = float("nan")

    def __post_init__(self):
        if not (self.D > 0 and self.G0 > 0 and self.alpha > 0):
            raise ConfigurationError("D, G0 and alpha must be positive")
        if math.isnan(self.eta_current):
            object.__setattr__(self, "eta_current", self._eta(self.accumulator))

    def _eta(self, accumulator: float) -> float:
        return self.D * self.alpha / math.sqrt(self.G0 * self.G0 + accumulator)


def eta_update(s: AdaptiveState, half, anchor, full) -> AdaptiveState:
    """Fold the step just taken with ``s.eta_current`` into the accumulator."""
    if isinstance(half, Iterate):
        half, anchor, full = half.flat, anchor.flat, full.flat
    d1 = half - anchor
    d2 = half - full
    z_sq = (d1 @ d1 + d2 @ d2) / (5.0 * s.eta_current * s.eta_current)
    if z_sq == 0.0:
        return s
    acc = s.accumulator + z_sq
    return AdaptiveState(s.D, s.G0, s.alpha, acc, s._eta(acc))


@dataclass(slots=True)
class WorkerState:
    """Everything one worker carries between steps.

    ``anchor`` is the point the next step starts from; ``last_half`` and
    ``last_full`` are the probing and updated points of the last step.
    ``half_sum`` accumulates the probing points for the output average and
    ``v_sq`` the squared oracle norms ``||g||^2 + ||M||^2``.
    """

    anchor: np.ndarray
    last_half: np.ndarray
    last_full: np.ndarray
    adaptive: AdaptiveState
    half_sum: np.ndarray
    full_sum: np.ndarray
    stream: RngStream
    steps: int = 0
    v_sq: float = 0.0
    oracle_calls: int = 0
    samples: int = 0
    max_oracle_norm: float = 0.0
    # Diagnostics of the last step: operator at the anchor, at the probe, and the step size used.
    last_M: np.ndarray | None = None
    last_g: np.ndarray | None = None
    last_eta: float | None = None

    @property
    def eta(self) -> float:
        return self.adaptive.eta_current

    @property
    def v(self) -> float:
        """Running ``sqrt(sum_t ||g_t||^2 + ||M_t||^2)``."""
        return math.sqrt(self.v_sq)

    def output(self, n_x: int) -> Iterate:
        if self.steps == 0:
            return Iterate.from_flat(self.anchor, n_x)
        return Iterate.from_flat(self.half_sum / self.steps, n_x)

    def reanchor(self, point: np.ndarray) -> "WorkerState":
        return replace(self, anchor=point, last_full=point)


def init_worker(z0: np.ndarray, adaptive: AdaptiveState, stream: RngStream) -> WorkerState:
    z0 = np.array(z0, dtype=float)
    return WorkerState(
        anchor=z0,
        last_half=z0,
        last_full=z0,
        adaptive=adaptive,
        half_sum=np.zeros_like(z0),
        full_sum=np.zeros_like(z0),
        stream=stream,
    )


SOLVER_NAMES = ("local_adaseg", "segda", "minibatch_eg", "local_sgda", "local_segda")


@dataclass(frozen=True)
class SolverKind:
    """Which update rule a run uses.

    ``eta`` is the fixed step for the baselines; ``None`` means the default
    ``D / (G0 sqrt(T))`` for fixed-step kinds and the adaptive rule for
    ``minibatch_eg``. LocalAdaSEG ignores it.
    """

    name: str = "local_adaseg"
    eta: float | None = None

    def __post_init__(self):
        if self.name not in SOLVER_NAMES:
            raise ConfigurationError(f"unknown solver {self.name!r}; expected one of {SOLVER_NAMES}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigurationError(f"solver {self.name}: fixed eta must be positive, got {self.eta}")

    @property
    def adaptive(self) -> bool:
        return self.name == "local_adaseg" or (self.name == "minibatch_eg" and self.eta is None)

    @property
    def extragradient(self) -> bool:
        return self.name != "local_sgda"

    @property
    def weighted_averaging(self) -> bool:
        return self.name == "local_adaseg"


def _advance(w, half, full, M, g, eta, batch, adaptive, calls):
    gn = g @ g
    mn = M @ M
    if adaptive is None:
        adaptive = w.adaptive
    return WorkerState(
        anchor=full,
        last_half=half,
        last_full=full,
        adaptive=adaptive,
        half_sum=w.half_sum + half,
        full_sum=w.full_sum + full,
        stream=w.stream,
        steps=w.steps + 1,
        v_sq=w.v_sq + gn + mn,
        oracle_calls=w.oracle_calls + calls,
        samples=w.samples + calls * batch,
        max_oracle_norm=max(w.max_oracle_norm, math.sqrt(max(gn, mn))),
        last_M=M,
        last_g=g,
        last_eta=eta,
    )


def extragradient_step(
    w: WorkerState,
    problem: SaddleProblem,
    fixed_eta: float | None = None,
    batch: int = 1,
) -> WorkerState:
    """One projected extragradient step from ``w.anchor``.

    The step uses the current learning rate; the adaptive accumulator is
    updated afterwards, so step ``t`` only sees steps ``1..t-1``. With
    ``fixed_eta`` the learning rate never changes.
    """
    proj = problem.feasible_set.project
    anchor = w.anchor
    eta = w.adaptive.eta_current if fixed_eta is None else fixed_eta
    M = problem.oracle(anchor, w.stream, batch)
    half = proj(anchor - eta * M)
    g = problem.oracle(half, w.stream, batch)
    full = proj(anchor - eta * g)
    adaptive = eta_update(w.adaptive, half, anchor, full) if fixed_eta is None else w.adaptive
    return _advance(w, half, full, M, g, eta, batch, adaptive, 2)


def gda_step(w: WorkerState, problem: SaddleProblem, eta: float, batch: int = 1) -> WorkerState:
    """Simultaneous projected gradient descent-ascent with a fixed step.

    The new point doubles as the "half" iterate so the output average and
    the accumulators have the same meaning as for extragradient.
    """
    g = problem.oracle(w.anchor, w.stream, batch)
    new = problem.feasible_set.project(w.anchor - eta * g)
    return _advance(w, new, new, g, g, eta, batch, w.adaptive, 1)


def local_phase(
    w: WorkerState,
    problem: SaddleProblem,
    steps: int,
    solver: SolverKind | None = None,
    hook=None,
) -> WorkerState:
    """Run ``steps`` local steps, each starting from the previous updated point.

    ``hook(before, after)`` is called after each step when given.
    """
    if steps < 1:
        raise ConfigurationError("a local phase needs at least one step")
    for _ in range(steps):
        nxt = extragradient_step(w, problem) if solver is None else baseline_step(solver, w, problem)
        if hook is not None:
            hook(w, nxt)
        w = nxt
    return w


def aggregation_weights(etas: Sequence[float]) -> np.ndarray:
    """Inverse learning-rate weights ``(1/eta_m) / sum_m' (1/eta_m')``."""
    etas = np.asarray(etas, dtype=float)
    if etas.size == 0:
        raise ProtocolError("server received no reports")
    if not np.all(etas > 0):
        raise ProtocolError("every reported learning rate must be positive")
    inv = 1.0 / etas
    return inv / inv.sum()


def server_aggregate(reports: Sequence[tuple[float, object]], weights: np.ndarray | None = None):
    """Weighted average of the reported iterates, reduced in report order.

    ``reports`` holds ``(eta_m, iterate_m)`` pairs; iterates may be
    :class:`Iterate` or flat arrays and the result has the same kind.
    Pass ``weights`` to override the inverse-eta rule (e.g. plain averaging).
    """
    if not reports:
        raise ProtocolError("server received no reports")
    if weights is None:
        weights = aggregation_weights([eta for eta, _ in reports])
    first = reports[0][1]
    as_iterate = isinstance(first, Iterate)
    out = None
    for wm, (_, z) in zip(weights, reports):
        z = z.flat if isinstance(z, Iterate) else np.asarray(z, dtype=float)
        out = wm * z if out is None else out + wm * z
    if as_iterate:
        return Iterate.from_flat(out, first.n_x)
    return out


def baseline_step(kind: SolverKind, w: WorkerState, problem: SaddleProblem, batch: int = 1) -> WorkerState:
    """One step of the rule named by ``kind``; ``kind.eta`` must be resolved for fixed-step kinds."""
    if kind.name == "local_adaseg":
        return extragradient_step(w, problem, batch=batch)
    if kind.name == "minibatch_eg" and kind.eta is None:
        return extragradient_step(w, problem, batch=batch)
    if kind.eta is None:
        raise ConfigurationError(f"solver {kind.name} needs a fixed step size")
    if kind.name == "local_sgda":
        return gda_step(w, problem, kind.eta, batch)
    return extragradient_step(w, problem, fixed_eta=kind.eta, batch=batch)
