"""Midpoint quadrature with grid doubling for periodic integrands.

Midpoint nodes never touch the endpoints or (for even grid sizes) the origin,
which keeps the integrable log singularity of the free-energy integrand at
k = (0, 0) off the grid.  Successive estimates are compared until they agree
to the requested tolerance; for smooth periodic integrands the midpoint rule
converges spectrally, so the doubling ladder is short away from criticality.

Drivers evaluate several integrands in a single pass: the callable receives
the node array(s) and returns one partial sum per integrand, so the dominant
cost (building g + h on the grid) is shared between f, f', and f''.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint-doubling controls.

    tol is the absolute agreement required between successive estimates;
    max_grid_2d caps the per-axis size of tensor grids (the stated doubling
    budget would be astronomically large in two dimensions).
    """

    tol: float = 1e-10
    initial_n: int = 64
    max_doublings: int = 14
    max_grid_2d: int = 8192

    def __post_init__(self):
        if not 0 < self.tol <= 1e-2:
            raise ValueError("quadrature tol must lie in (0, 1e-2]")
        if self.initial_n < 2 or self.initial_n % 2:
            raise ValueError("initial grid must be even and >= 2")


class QuadratureError(RuntimeError):
    """Raised when doubling exhausts its budget; carries the last two estimates."""

    def __init__(self, message, last, previous):
        super().__init__(f"{message}; last two estimates {previous} -> {last}")
        self.last = last
        self.previous = previous


def midpoint_nodes(a: float, b: float, n: int) -> np.ndarray:
    return a + (b - a) * (np.arange(n) + 0.5) / n


@dataclass(frozen=True)
class QuadResult:
    values: np.ndarray
    errors: np.ndarray
    n: int

    @property
    def value(self) -> float:
        return float(self.values[0])

    @property
    def error(self) -> float:
        return float(self.errors[0])


def midpoint_doubling_1d(sums_fn, a: float, b: float, quad: QuadratureSpec) -> QuadResult:
    """Integrate m integrands over [a, b] simultaneously.

    sums_fn(nodes) must return an array of m plain sums of integrand values
    over the nodes; estimates are sums * (b - a) / n.
    """
    n = quad.initial_n
    prev = last = None
    for _ in range(quad.max_doublings + 1):
        vals = np.atleast_1d(np.asarray(sums_fn(midpoint_nodes(a, b, n)), dtype=float))
        prev, last = last, vals * (b - a) / n
        if prev is not None:
            diffs = np.abs(last - prev)
            if np.all(diffs < quad.tol):
                return QuadResult(last, diffs, n)
        n *= 2
    raise QuadratureError("1d midpoint integration did not converge", last, prev)


def midpoint_doubling_2d(sums_fn, quad: QuadratureSpec) -> QuadResult:
    """Integrate m integrands over [-pi, pi]^2 on tensor midpoint grids.

    sums_fn(k1_nodes, k2_nodes) returns m plain sums over the full tensor
    grid; estimates are sums * (2 pi / n)^2.  The per-axis size is capped at
    quad.max_grid_2d.
    """
    n = quad.initial_n
    prev = last = None
    for _ in range(quad.max_doublings + 1):
        if n > quad.max_grid_2d:
            break
        nodes = midpoint_nodes(-math.pi, math.pi, n)
        vals = np.atleast_1d(np.asarray(sums_fn(nodes, nodes), dtype=float))
        prev, last = last, vals * (2.0 * math.pi / n) ** 2
        if prev is not None:
            diffs = np.abs(last - prev)
            if np.all(diffs < quad.tol):
                return QuadResult(last, diffs, n)
        n *= 2
    raise QuadratureError("2d midpoint integration did not converge", last, prev)


def midpoint_doubling_2d_lenient(sums_fn, quad: QuadratureSpec) -> QuadResult:
    """Like midpoint_doubling_2d but returns the best estimate at the cap.

    Used where the caller reports the achieved error instead of failing
    (sweeps that pass arbitrarily close to the critical point).
    """
    try:
        return midpoint_doubling_2d(sums_fn, quad)
    except QuadratureError as err:
        if err.last is None or err.previous is None:
            raise
        return QuadResult(np.asarray(err.last), np.abs(np.asarray(err.last) - np.asarray(err.previous)),
                          -1)
