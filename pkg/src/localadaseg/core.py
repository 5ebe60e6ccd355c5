"""Iterates, feasible sets and seeded random streams.

Everything here works in the Euclidean setting. Iterates are stored as a
single flat ``float64`` vector ``z = (x, y)``; :class:`Iterate` is the
block-aware view handed out at API boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ConfigurationError",
    "DomainError",
    "ProtocolError",
    "UsageError",
    "Iterate",
    "FeasibleSet",
    "Box",
    "Ball",
    "Product",
    "project",
    "diameter_bound",
    "RngStream",
    "gaussian_draw",
    "PROBLEM_STREAM",
]

# Stream id reserved for problem generation; worker streams use 0..M-1.
PROBLEM_STREAM = 2**64 - 1


class ConfigurationError(ValueError):
    """Invalid sizes, bounds or settings detected before any work is done."""


class DomainError(ValueError):
    """A point lies outside the domain where a quantity is defined."""


class ProtocolError(RuntimeError):
    """The worker/server exchange was driven with invalid messages."""


class UsageError(ValueError):
    """A call was made with arguments that make no sense together."""


@dataclass(frozen=True)
class Iterate:
    """A point ``(x, y)`` of the product space."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())

    @classmethod
    def from_flat(cls, z: np.ndarray, n_x: int) -> "Iterate":
        z = np.asarray(z, dtype=float)
        return cls(z[:n_x].copy(), z[n_x:].copy())

    @classmethod
    def zeros(cls, n_x: int, n_y: int) -> "Iterate":
        return cls(np.zeros(n_x), np.zeros(n_y))

    @property
    def n_x(self) -> int:
        return self.x.size

    @property
    def n_y(self) -> int:
        return self.y.size

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate((self.x, self.y))

    def _check(self, other: "Iterate") -> None:
        if self.n_x != other.n_x or self.n_y != other.n_y:
            raise ConfigurationError(
                f"iterate dimensions differ: ({self.n_x}, {self.n_y}) vs ({other.n_x}, {other.n_y})"
            )

    def __add__(self, other: "Iterate") -> "Iterate":
        self._check(other)
        return Iterate(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Iterate") -> "Iterate":
        self._check(other)
        return Iterate(self.x - other.x, self.y - other.y)

    def __mul__(self, scale: float) -> "Iterate":
        return Iterate(self.x * scale, self.y * scale)

    __rmul__ = __mul__

    def __neg__(self) -> "Iterate":
        return Iterate(-self.x, -self.y)

    def dot(self, other: "Iterate") -> float:
        self._check(other)
        return float(self.x @ other.x + self.y @ other.y)

    def sq_norm(self) -> float:
        """``||x||^2 + ||y||^2``."""
        return float(self.x @ self.x + self.y @ self.y)

    def norm(self) -> float:
        return float(np.sqrt(self.sq_norm()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Iterate):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None  # type: ignore[assignment]


def _as_flat(z) -> np.ndarray:
    if isinstance(z, Iterate):
        return z.flat
    return np.asarray(z, dtype=float)


class FeasibleSet:
    """A compact convex set with a cheap Euclidean projection."""

    dim: int

    def project(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def diameter_bound(self) -> float:
        """Smallest ``D`` with ``sup_z 0.5 * ||z||^2 <= D^2``."""
        return float(np.sqrt(0.5 * self.sup_sq_norm()))

    def sup_sq_norm(self) -> float:
        raise NotImplementedError

    def _check_dim(self, z: np.ndarray) -> None:
        if z.shape != (self.dim,):
            raise ConfigurationError(f"point of shape {z.shape} does not match a set of dimension {self.dim}")


class Box(FeasibleSet):
    """Componentwise bounds ``lower <= z <= upper``."""

    def __init__(self, lower, upper, dim: int | None = None):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if dim is not None:
            lower = np.broadcast_to(lower, (dim,)).copy()
            upper = np.broadcast_to(upper, (dim,)).copy()
        lower, upper = np.atleast_1d(lower), np.atleast_1d(upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("box bounds must be 1-d vectors of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ConfigurationError("box bounds contain NaN")
        if np.any(lower > upper):
            raise ConfigurationError("box requires lower <= upper componentwise")
        self.lower = lower
        self.upper = upper
        self.dim = lower.size

    @classmethod
    def symmetric(cls, dim: int, half_width: float = 1.0) -> "Box":
        return cls(-half_width, half_width, dim=dim)

    def project(self, z):
        z = _as_flat(z)
        self._check_dim(z)
        return np.minimum(np.maximum(z, self.lower), self.upper)

    def contains(self, z, tol=1e-12):
        z = _as_flat(z)
        return bool(np.all(z >= self.lower - tol) and np.all(z <= self.upper + tol))

    def sup_sq_norm(self):
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ConfigurationError("box is unbounded; no diameter bound exists")
        return float(np.sum(np.maximum(self.lower**2, self.upper**2)))

    def __repr__(self):
        return f"Box(dim={self.dim})"


class Ball(FeasibleSet):
    """Closed Euclidean ball."""

    def __init__(self, center, radius: float):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.ndim != 1:
            raise ConfigurationError("ball center must be a vector")
        if not radius > 0 or not np.isfinite(radius):
            raise ConfigurationError("ball radius must be positive and finite")
        self.center = center
        self.radius = float(radius)
        self.dim = center.size

    def project(self, z):
        z = _as_flat(z)
        self._check_dim(z)
        d = z - self.center
        dist = np.sqrt(d @ d)
        if dist <= self.radius:
            return z.copy()
        return self.center + d * (self.radius / dist)

    def contains(self, z, tol=1e-12):
        d = _as_flat(z) - self.center
        return bool(np.sqrt(d @ d) <= self.radius + tol)

    def sup_sq_norm(self):
        return float((np.linalg.norm(self.center) + self.radius) ** 2)

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"


class Product(FeasibleSet):
    """Cartesian product; coordinates are split between the parts in order."""

    def __init__(self, parts: Sequence[FeasibleSet]):
        if not parts:
            raise ConfigurationError("product of zero sets")
        self.parts = list(parts)
        self.dim = sum(p.dim for p in self.parts)
        self._splits = np.cumsum([p.dim for p in self.parts])[:-1]

    def project(self, z):
        z = _as_flat(z)
        self._check_dim(z)
        pieces = np.split(z, self._splits)
        return np.concatenate([p.project(q) for p, q in zip(self.parts, pieces)])

    def contains(self, z, tol=1e-12):
        pieces = np.split(_as_flat(z), self._splits)
        return all(p.contains(q, tol) for p, q in zip(self.parts, pieces))

    def sup_sq_norm(self):
        return float(sum(p.sup_sq_norm() for p in self.parts))

    def __repr__(self):
        return f"Product({self.parts!r})"


def project(feasible_set: FeasibleSet, z):
    """Euclidean projection; returns the same kind (Iterate or array) it was given."""
    if isinstance(z, Iterate):
        return Iterate.from_flat(feasible_set.project(z.flat), z.n_x)
    return feasible_set.project(np.asarray(z, dtype=float))


def diameter_bound(feasible_set: FeasibleSet) -> float:
    return feasible_set.diameter_bound()


@dataclass
class RngStream:
    """Counter-based stream of random draws keyed by ``(master_seed, stream_id)``.

    Each draw is generated from a fresh Philox block at ``counter`` and then
    bumps ``counter`` by one, so the output of draw number ``k`` depends on
    ``(master_seed, stream_id, k)`` only. Distinct stream ids give distinct
    Philox keys.
    """

    master_seed: int
    stream_id: int
    counter: int = 0
    _bitgen: np.random.Philox = field(init=False, repr=False, compare=False)
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "counter"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise ConfigurationError(f"{name} must fit in an unsigned 64-bit integer, got {v}")
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state
        self._ctr = self._state["state"]["counter"]

    def _seek(self) -> np.random.Generator:
        # Low counter words run within a draw; the top word is the draw index.
        self._ctr[:] = (0, 0, 0, self.counter)
        self._bitgen.state = self._state
        self.counter += 1
        return self._gen

    def normal(self, size, std: float = 1.0) -> np.ndarray:
        out = self._seek().standard_normal(size)
        if std != 1.0:
            out *= std
        return out

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self._seek().uniform(low, high, size)

    def spawn(self, stream_id: int) -> "RngStream":
        """Fresh stream with the same master seed."""
        return RngStream(self.master_seed, stream_id)

    def __getstate__(self):
        return {"master_seed": self.master_seed, "stream_id": self.stream_id, "counter": self.counter}

    def __setstate__(self, state):
        self.master_seed = state["master_seed"]
        self.stream_id = state["stream_id"]
        self.counter = state["counter"]
        self.__post_init__()


def gaussian_draw(stream: RngStream, length: int, std: float) -> np.ndarray:
    """Zero-mean i.i.d. Gaussian vector; advances ``stream`` by one draw."""
    if std < 0:
        raise ConfigurationError("standard deviation must be non-negative")
    if std == 0:
        stream.counter += 1
        return np.zeros(length)
    return stream.normal(length, std)
