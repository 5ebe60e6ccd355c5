"""Deterministic parameter-server simulation.

``run`` drives ``M`` workers through ``R`` rounds. Within a round worker
``m`` performs ``K_m`` local steps from the common anchor; at the round
boundary the server averages the workers' latest points and every worker
restarts from that average. Workers own their random streams, so the
result does not depend on how the workers are scheduled.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .algorithms import (
    AdaptiveState,
    SolverKind,
    WorkerState,
    aggregation_weights,
    base_learning_rate,
    baseline_step,
    extragradient_step,
    init_worker,
    server_aggregate,
)
from .core import ConfigurationError, Iterate, RngStream
from .problems import BilinearProblem, SaddleProblem, generate_bilinear

__all__ = [
    "Topology",
    "RoundRecord",
    "Trajectory",
    "run",
    "sweep",
    "SweepResult",
    "BilinearSpec",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("round", "iteration", "residual", "dualgap", "eta_min", "eta_max", "v_max", "samples", "wall_ms")


@dataclass(frozen=True)
class Topology:
    """Workers, rounds, local steps and solver settings of one run.

    Give either ``K`` (every worker does ``K`` local steps per round) or
    ``per_worker_K`` (the asynchronous variant; rounds still end at a
    common barrier). ``D`` overrides the diameter bound derived from the
    feasible set.
    """

    M: int = 4
    R: int = 40
    K: int | None = 50
    per_worker_K: tuple[int, ...] | None = None
    solver: SolverKind = field(default_factory=SolverKind)
    alpha_mode: str = "nonsmooth"
    eps: float = 0.25
    G0: float = 1.0
    master_seed: int = 0
    D: float | None = None

    def __post_init__(self):
        if self.per_worker_K is not None:
            object.__setattr__(self, "per_worker_K", tuple(int(k) for k in self.per_worker_K))
        if isinstance(self.solver, str):
            object.__setattr__(self, "solver", SolverKind(self.solver))

    def errors(self) -> list[str]:
        errs = []
        if not (isinstance(self.M, int) and self.M >= 1):
            errs.append(f"M must be an integer >= 1, got {self.M!r}")
        if not (isinstance(self.R, int) and self.R >= 1):
            errs.append(f"R must be an integer >= 1, got {self.R!r}")
        if self.per_worker_K is None:
            if not (isinstance(self.K, int) and self.K >= 1):
                errs.append(f"K must be an integer >= 1, got {self.K!r}")
        else:
            if isinstance(self.M, int) and len(self.per_worker_K) != self.M:
                errs.append(f"per_worker_K has {len(self.per_worker_K)} entries but M = {self.M}")
            if any(k < 1 for k in self.per_worker_K):
                errs.append("per_worker_K entries must be >= 1")
            if self.solver.name == "minibatch_eg":
                errs.append("minibatch_eg has no local steps; per_worker_K is not supported")
        if not self.G0 > 0:
            errs.append(f"G0 must be positive, got {self.G0!r}")
        if self.D is not None and not self.D > 0:
            errs.append(f"D override must be positive, got {self.D!r}")
        if self.solver.name == "segda" and self.M != 1:
            errs.append("segda is the single-worker baseline; it requires M = 1")
        if not 0 <= int(self.master_seed) < 2**64:
            errs.append("master_seed must fit in an unsigned 64-bit integer")
        if self.alpha_mode not in ("nonsmooth", "smooth", "smooth_eps"):
            errs.append(f"unknown alpha_mode {self.alpha_mode!r}")
        elif self.alpha_mode == "smooth_eps" and not 0 < self.eps < 0.5:
            errs.append("smooth_eps requires 0 < eps < 1/2")
        return errs

    def validate(self) -> None:
        errs = self.errors()
        if errs:
            raise ConfigurationError("; ".join(errs))

    @property
    def local_steps(self) -> tuple[int, ...]:
        if self.per_worker_K is not None:
            return self.per_worker_K
        return (self.K,) * self.M

    @property
    def synchronous(self) -> bool:
        return len(set(self.local_steps)) == 1

    @property
    def T(self) -> int:
        """Local iterations of the busiest worker, ``max_m K_m * R``."""
        return max(self.local_steps) * self.R

    @property
    def communication_times(self) -> list[int]:
        """Global iterations at which the server averages: ``0, K, 2K, ..., RK``."""
        k = max(self.local_steps)
        return [r * k for r in range(self.R + 1)]

    def alpha(self) -> float:
        return base_learning_rate(self.alpha_mode, self.M, self.T, self.eps)


@dataclass
class RoundRecord:
    round: int
    iteration: int
    residual: float
    dualgap: float
    eta_min: float
    eta_max: float
    v_max: float
    samples: int
    wall_ms: float


@dataclass
class Trajectory:
    """Metrics recorded during a run plus its final output.

    By default metrics are evaluated at the running output average (mean
    of all probing points so far, across workers).
    """

    records: list[RoundRecord]
    final_output: Iterate
    final_anchor: Iterate
    gamma_observed: float
    initial_residual: float
    initial_gap: float
    oracle_calls: int
    samples: int
    communications: list[int]
    D: float
    alpha: float

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def final_residual(self) -> float:
        return self.records[-1].residual

    @property
    def final_gap(self) -> float:
        return self.records[-1].dualgap

    def round_rows(self) -> list[RoundRecord]:
        """Last record of each round."""
        last = {}
        for rec in self.records:
            last[rec.round] = rec
        return [last[k] for k in sorted(last)]

    def rounds_to_reach(self, level: float, column: str = "residual") -> int | None:
        """First round whose end-of-round value is ``<= level``; ``None`` if never."""
        for rec in self.round_rows():
            if getattr(rec, column) <= level:
                return rec.round
        return None

    def rows(self) -> list[tuple]:
        return [tuple(getattr(r, c) for c in CSV_COLUMNS) for r in self.records]


def _metrics(problem, z):
    return problem.residual(z), problem.gap(z)


def run(
    topology: Topology,
    problem: SaddleProblem,
    *,
    z0=None,
    record_every: str = "round",
    metric_point: str = "average",
    n_threads: int = 1,
    step_hook: Callable[[int, WorkerState, WorkerState], None] | None = None,
    comm_hook: Callable[[int, np.ndarray, list[WorkerState]], None] | None = None,
) -> Trajectory:
    """Simulate the topology on ``problem`` and return the recorded trajectory.

    ``record_every`` is ``"round"`` or ``"iteration"``. ``metric_point``
    picks where residual and gap are measured: ``"average"`` is the running
    output average, ``"anchor"`` the latest server average (mid-round, the
    average the server would form from the workers' current points).

    ``step_hook(m, before, after)`` sees every local step of worker ``m``;
    ``comm_hook(iteration, weights, workers)`` sees the workers right after
    they re-anchor. ``n_threads > 1`` runs the workers of a round
    concurrently; the result is identical to the sequential run.
    """
    topology.validate()
    if record_every not in ("round", "iteration"):
        raise ConfigurationError(f"record_every must be 'round' or 'iteration', got {record_every!r}")
    if metric_point not in ("average", "anchor"):
        raise ConfigurationError(f"metric_point must be 'average' or 'anchor', got {metric_point!r}")
    dim = problem.dim
    if z0 is None:
        z0 = problem.feasible_set.project(np.zeros(dim))
    else:
        z0 = z0.flat if isinstance(z0, Iterate) else np.asarray(z0, dtype=float)
        if z0.shape != (dim,):
            raise ConfigurationError(f"z0 has shape {z0.shape}, problem dimension is {dim}")
        if not problem.feasible_set.contains(z0):
            raise ConfigurationError("z0 is not feasible")

    D = topology.D if topology.D is not None else problem.feasible_set.diameter_bound()
    alpha = topology.alpha()
    solver = topology.solver
    if not solver.adaptive and solver.eta is None:
        solver = replace(solver, eta=D / (topology.G0 * math.sqrt(topology.T)))
    adaptive = AdaptiveState(D, topology.G0, alpha)

    if solver.name == "minibatch_eg":
        return _run_minibatch(topology, problem, solver, z0, adaptive, metric_point, step_hook, comm_hook)

    start = time.perf_counter()
    ks = topology.local_steps
    M = topology.M
    workers = [init_worker(z0, adaptive, RngStream(topology.master_seed, m)) for m in range(M)]
    init_res, init_gap = _metrics(problem, z0)
    uniform = np.full(M, 1.0 / M)

    def step(m, w):
        nxt = extragradient_step(w, problem) if solver.adaptive else baseline_step(solver, w, problem)
        if step_hook is not None:
            step_hook(m, w, nxt)
        return nxt

    def phase(m):
        w = workers[m]
        for _ in range(ks[m]):
            w = step(m, w)
        return w

    def server_point():
        reports = [(w.eta, w.last_full) for w in workers]
        if M == 1:
            return np.ones(1), workers[0].last_full
        weights = aggregation_weights([e for e, _ in reports]) if solver.weighted_averaging else uniform
        return weights, server_aggregate(reports, weights)

    def communicate(iteration):
        weights, anchor = server_point()
        workers[:] = [w.reanchor(anchor.copy()) for w in workers]
        communications.append(iteration)
        if comm_hook is not None:
            comm_hook(iteration, weights, workers)
        return anchor

    def output():
        if M == 1:
            return workers[0].half_sum / workers[0].steps
        return sum(w.half_sum for w in workers) / sum(w.steps for w in workers)

    def record(rnd, iteration, anchor=None):
        if metric_point == "average":
            point = output()
        else:
            point = server_point()[1] if anchor is None else anchor
        res, gap = _metrics(problem, point)
        etas = [w.eta for w in workers] if solver.adaptive else [solver.eta]
        records.append(
            RoundRecord(
                round=rnd,
                iteration=iteration,
                residual=res,
                dualgap=gap,
                eta_min=min(etas),
                eta_max=max(etas),
                v_max=max(w.v_sq for w in workers) ** 0.5,
                samples=sum(w.samples for w in workers),
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )

    records: list[RoundRecord] = []
    communications: list[int] = []
    kmax = max(ks)
    anchor = communicate(0)
    pool = ThreadPoolExecutor(n_threads) if n_threads > 1 and record_every == "round" else None
    try:
        for rnd in range(1, topology.R + 1):
            base = (rnd - 1) * kmax
            if record_every == "iteration":
                for j in range(kmax):
                    for m in range(M):
                        if j < ks[m]:
                            workers[m] = step(m, workers[m])
                    if j < kmax - 1:
                        record(rnd, base + j + 1)
            elif pool is not None:
                workers[:] = list(pool.map(phase, range(M)))
            else:
                workers[:] = [phase(m) for m in range(M)]
            anchor = communicate(rnd * kmax)
            record(rnd, rnd * kmax, anchor)
    finally:
        if pool is not None:
            pool.shutdown()

    n_x = problem.n_x
    g_obs = max(w.max_oracle_norm for w in workers)
    return Trajectory(
        records=records,
        final_output=Iterate.from_flat(output(), n_x),
        final_anchor=Iterate.from_flat(anchor, n_x),
        gamma_observed=_gamma(g_obs, topology.G0),
        initial_residual=init_res,
        initial_gap=init_gap,
        oracle_calls=sum(w.oracle_calls for w in workers),
        samples=sum(w.samples for w in workers),
        communications=communications,
        D=D,
        alpha=alpha,
    )


def _gamma(g_obs: float, G0: float) -> float:
    if g_obs <= 0:
        return math.inf
    return max(g_obs / G0, G0 / g_obs)


def _run_minibatch(topology, problem, solver, z0, adaptive, metric_point, step_hook, comm_hook):
    # One server-side extragradient step per round, each oracle call averaging K*M samples.
    start = time.perf_counter()
    batch = topology.K * topology.M
    w = init_worker(z0, adaptive, RngStream(topology.master_seed, 0))
    init_res, init_gap = _metrics(problem, z0)
    records = []
    communications = [0]
    if comm_hook is not None:
        comm_hook(0, np.ones(1), [w])
    for rnd in range(1, topology.R + 1):
        nxt = baseline_step(solver, w, problem, batch=batch)
        if step_hook is not None:
            step_hook(0, w, nxt)
        w = nxt
        it = rnd * topology.K
        communications.append(it)
        if comm_hook is not None:
            comm_hook(it, np.ones(1), [w])
        res, gap = _metrics(problem, w.half_sum / w.steps if metric_point == "average" else w.anchor)
        eta = w.eta if solver.adaptive else solver.eta
        records.append(
            RoundRecord(
                round=rnd,
                iteration=it,
                residual=res,
                dualgap=gap,
                eta_min=eta,
                eta_max=eta,
                v_max=w.v,
                samples=w.samples,
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    n_x = problem.n_x
    return Trajectory(
        records=records,
        final_output=w.output(n_x),
        final_anchor=Iterate.from_flat(w.anchor, n_x),
        gamma_observed=_gamma(w.max_oracle_norm, topology.G0),
        initial_residual=init_res,
        initial_gap=init_gap,
        oracle_calls=w.oracle_calls,
        samples=w.samples,
        communications=communications,
        D=adaptive.D,
        alpha=adaptive.alpha,
    )


@dataclass(frozen=True)
class BilinearSpec:
    """Recipe for seeded bilinear instances; ``spec(seed)`` builds one."""

    n: int = 10
    sigma: float = 0.1
    noise_scale_is_std: bool = True

    def __call__(self, seed: int, **overrides) -> BilinearProblem:
        spec = replace(self, **overrides)
        return generate_bilinear(spec.n, spec.sigma, seed, spec.noise_scale_is_std)


@dataclass
class SweepResult:
    params: dict
    seed: int
    trajectory: Trajectory


_TOPOLOGY_KEYS = {f.name for f in fields(Topology)} - {"master_seed"}


def _split_params(params: Mapping, problem_keys: set[str]):
    topo, prob = {}, {}
    for key, value in params.items():
        if key in _TOPOLOGY_KEYS:
            topo[key] = SolverKind(value) if key == "solver" and isinstance(value, str) else value
        elif key in problem_keys:
            prob[key] = value
        else:
            raise ConfigurationError(f"cannot vary unknown parameter {key!r}")
    return topo, prob


def _sweep_task(base, problem, params, seed, record_every):
    problem_keys = {f.name for f in fields(problem)} if hasattr(problem, "__dataclass_fields__") else set()
    topo, prob = _split_params(params, problem_keys)
    if "per_worker_K" in topo:
        topo.setdefault("K", None)
    if "K" in topo and topo["K"] is not None:
        topo.setdefault("per_worker_K", None)
    topology = replace(base, master_seed=seed, **topo)
    return SweepResult(dict(params), seed, run(topology, problem(seed, **prob), record_every=record_every))


def sweep(
    base: Topology,
    vary: Mapping[str, Sequence],
    seeds: Sequence[int],
    problem: Callable[..., SaddleProblem] = BilinearSpec(),
    n_jobs: int = 1,
    record_every: str = "round",
) -> list[SweepResult]:
    """One run per (grid point, seed), in grid-major order.

    ``vary`` maps topology fields (``M``, ``K``, ``R``, ``G0``, ...) or
    problem recipe fields (``n``, ``sigma``) to the values to try. Seed ``s``
    is both the problem seed and the run's master seed. With ``n_jobs > 1``
    runs are spread over worker processes; results are identical.
    """
    keys = list(vary)
    grid = [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]
    if not grid:
        raise ConfigurationError("sweep grid is empty")
    if not seeds:
        raise ConfigurationError("sweep needs at least one seed")
    problem_keys = {f.name for f in fields(problem)} if hasattr(problem, "__dataclass_fields__") else set()
    for params in grid:
        _split_params(params, problem_keys)
    tasks = [(params, int(seed)) for params in grid for seed in seeds]
    if n_jobs == 1:
        return [_sweep_task(base, problem, p, s, record_every) for p, s in tasks]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(_sweep_task)(base, problem, p, s, record_every) for p, s in tasks)
