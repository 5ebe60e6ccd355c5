"""Saddle problems, the stochastic bilinear game and its quality metrics."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    PROBLEM_STREAM,
    Box,
    ConfigurationError,
    DomainError,
    FeasibleSet,
    Iterate,
    RngStream,
    UsageError,
)

__all__ = [
    "SaddleProblem",
    "BilinearProblem",
    "generate_bilinear",
    "oracle_eval",
    "kkt_residual",
    "duality_gap",
    "regret_bound_check",
    "FORMAT_NAME",
    "FORMAT_VERSION",
]

FORMAT_NAME = "localadaseg.bilinear"
FORMAT_VERSION = 1


class SaddleProblem:
    """Convex-concave ``min_x max_y F(x, y)`` over a compact convex set.

    Subclasses provide the monotone operator ``(d_x F, -d_y F)`` on flat
    iterates and an unbiased stochastic version of it.
    """

    feasible_set: FeasibleSet
    n_x: int
    n_y: int
    gradient_bound_hint: float | None = None

    def operator(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def oracle(self, z: np.ndarray, stream: RngStream, batch: int = 1) -> np.ndarray:
        """Stochastic operator; ``batch`` fresh samples are averaged."""
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return self.n_x + self.n_y

    def residual(self, z: np.ndarray) -> float:
        """``||z - proj(z - G(z))||``, zero exactly at solutions."""
        r = z - self.feasible_set.project(z - self.operator(z))
        return float(np.sqrt(r @ r))

    def gap(self, z: np.ndarray) -> float:
        return float("nan")


@dataclass
class BilinearProblem(SaddleProblem):
    """``F(x, y) = E[x'Ay + (b + xi)'x + (c + xi)'y]`` over ``[-1, 1]^n x [-1, 1]^n``.

    A single ``xi ~ N(0, s^2 I)`` is drawn per oracle call and perturbs both
    blocks. ``s`` is ``sigma`` when ``noise_scale_is_std`` (the default),
    otherwise ``sqrt(sigma)``.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sigma: float = 0.0
    noise_scale_is_std: bool = True
    seed: int | None = None
    feasible_set: FeasibleSet = field(init=False, repr=False)

    def __post_init__(self):
        self.A = np.array(self.A, dtype=float, ndmin=2)
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float)).copy()
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float)).copy()
        n = self.b.size
        if self.A.shape != (n, n) or self.c.shape != (n,):
            raise ConfigurationError(
                f"inconsistent shapes: A {self.A.shape}, b {self.b.shape}, c {self.c.shape}"
            )
        if not self.sigma >= 0:
            raise ConfigurationError("sigma must be non-negative")
        self.sigma = float(self.sigma)
        self.n_x = self.n_y = n
        self.feasible_set = Box.symmetric(2 * n)
        self._At = np.ascontiguousarray(self.A.T)
        # G(z) = B z + q with B = [[0, A], [-A', 0]] and q = (b, -c).
        self._B = np.block([[np.zeros((n, n)), self.A], [-self._At, np.zeros((n, n))]])
        self._q = np.concatenate((self.b, -self.c))

    @property
    def n(self) -> int:
        return self.n_x

    @property
    def noise_std(self) -> float:
        return self.sigma if self.noise_scale_is_std else float(np.sqrt(self.sigma))

    @property
    def gradient_bound_hint(self) -> float:
        # Loose bound: |y_j| <= 1 so each coordinate of Ay + b is at most
        # row-abs-sum + max|b|; noise is charged at three standard deviations.
        n = self.n
        row = np.abs(self.A).sum(axis=1).max()
        shift = max(np.abs(self.b).max(), np.abs(self.c).max())
        return float(np.sqrt(2.0) * np.sqrt(n) * (row + shift + 3.0 * self.noise_std))

    def operator(self, z):
        return self._B @ z + self._q

    def oracle(self, z, stream, batch=1):
        out = self._B @ z + self._q
        std = self.noise_std
        if std == 0:
            stream.counter += 1
            return out
        n = self.n_x
        if batch == 1:
            xi = stream.normal(n, std)
        else:
            xi = stream.normal((batch, n), std).mean(axis=0)
        out[:n] += xi
        out[n:] -= xi
        return out

    def objective(self, z) -> float:
        """Expected objective ``F(x, y)``."""
        x, y = self._split(z)
        return float(x @ self.A @ y + self.b @ x + self.c @ y)

    def _split(self, z):
        n = self.n
        if isinstance(z, Iterate):
            x, y = z.x, z.y
        else:
            if type(z) is not np.ndarray:
                z = np.asarray(z, dtype=float)
            if z.shape == (2 * n,):
                return z[:n], z[n:]
            x, y = z[:n], z[n:]
        if x.shape != (n,) or y.shape != (n,):
            raise ConfigurationError(f"point does not match problem dimension n={self.n}")
        return x, y

    def residual(self, z) -> float:
        return kkt_residual(self, z)

    def gap(self, z) -> float:
        return duality_gap(self, z)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "n": self.n,
            "sigma": self.sigma,
            "noise_scale_is_std": self.noise_scale_is_std,
            "seed": self.seed,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BilinearProblem":
        if data.get("format") != FORMAT_NAME:
            raise ConfigurationError(f"not a bilinear problem document: format={data.get('format')!r}")
        if data.get("version") != FORMAT_VERSION:
            raise ConfigurationError(f"unsupported problem format version {data.get('version')!r}")
        p = cls(
            A=data["A"],
            b=data["b"],
            c=data["c"],
            sigma=data["sigma"],
            noise_scale_is_std=data.get("noise_scale_is_std", True),
            seed=data.get("seed"),
        )
        if p.n != data["n"]:
            raise ConfigurationError(f"declared n={data['n']} but arrays have n={p.n}")
        return p

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BilinearProblem":
        return cls.from_dict(json.loads(text))


def generate_bilinear(
    n: int,
    sigma: float,
    stream: RngStream | int,
    noise_scale_is_std: bool = True,
) -> BilinearProblem:
    """Random instance: ``b, c ~ U[-1, 1]^n`` and ``A = Abar / max(|b|_max, |c|_max)``.

    ``Abar`` has i.i.d. uniform entries in ``[-1, 1]`` on and above the
    diagonal, mirrored below it. An integer ``stream`` is taken as the
    problem seed.
    """
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    if not sigma >= 0:
        raise ConfigurationError("sigma must be non-negative")
    seed = None
    if isinstance(stream, (int, np.integer)):
        seed = int(stream)
        stream = RngStream(seed, PROBLEM_STREAM)
    while True:
        b = stream.uniform(-1.0, 1.0, n)
        c = stream.uniform(-1.0, 1.0, n)
        scale = max(np.abs(b).max(), np.abs(c).max())
        if scale >= 1e-12:
            break
    raw = stream.uniform(-1.0, 1.0, (n, n))
    upper = np.triu(raw)
    a_bar = upper + np.triu(raw, 1).T
    return BilinearProblem(a_bar / scale, b, c, sigma, noise_scale_is_std, seed)


def oracle_eval(problem: SaddleProblem, z, stream: RngStream):
    """One stochastic operator evaluation; returns the same kind it was given."""
    if isinstance(z, Iterate):
        return Iterate.from_flat(problem.oracle(z.flat, stream), z.n_x)
    z = np.asarray(z, dtype=float)
    if z.shape != (problem.dim,):
        raise ConfigurationError(f"point of shape {z.shape} does not match problem dimension {problem.dim}")
    return problem.oracle(z, stream)


def kkt_residual(problem: BilinearProblem, z) -> float:
    """Norm of the projected-gradient fixed-point violation; zero exactly at saddles."""
    x, y = problem._split(z)
    rx = x - np.minimum(np.maximum(x - (problem.A @ y + problem.b), -1.0), 1.0)
    ry = y - np.minimum(np.maximum(y + (problem._At @ x + problem.c), -1.0), 1.0)
    return float(np.sqrt(rx @ rx + ry @ ry))


def duality_gap(problem: BilinearProblem, z, tol: float = 1e-12) -> float:
    """``max_y' F(x, y') - min_x' F(x', y)`` in closed form over the box."""
    x, y = problem._split(z)
    if max(np.abs(x).max(), np.abs(y).max()) > 1 + tol:
        raise DomainError("duality gap is only defined for points inside the box")
    best_y = problem.b @ x + np.abs(problem._At @ x + problem.c).sum()
    best_x = problem.c @ y - np.abs(problem.A @ y + problem.b).sum()
    return float(best_y - best_x)


def regret_bound_check(problem: BilinearProblem, iterates: Sequence | Iterable) -> tuple[float, float]:
    """``(T * gap(mean), sup_z sum_t <z_t - z, G(z_t)>)``; the first never exceeds the second."""
    pts = [it.flat if isinstance(it, Iterate) else np.asarray(it, dtype=float) for it in iterates]
    if not pts:
        raise UsageError("regret bound needs at least one iterate")
    Z = np.vstack(pts)
    T = Z.shape[0]
    G = np.vstack([problem.operator(z) for z in Z])
    gap = T * duality_gap(problem, Z.mean(axis=0))
    regret_sup = float(np.einsum("ij,ij->", Z, G) + np.abs(G.sum(axis=0)).sum())
    return gap, regret_sup
