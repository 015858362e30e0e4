"""Spectral cut-off reconstructions and their exact and expected errors.

The active range of level ``n`` is half-open, ``1 <= k < s(n)``: the bands
``s(n) <= k < s(m)`` then partition the coefficients between two levels and
all expected values are finite sums of powers of ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LevelOutOfRange, PreconditionViolated
from .model import ModelParams
from .schedule import Grid

# direct terms summed before the Euler-Maclaurin closure of a power tail
_TAIL_BLOCK = 512


def power_sum(p: float, a: int, b: int) -> float:
    """``sum(k**p for a <= k < b)``; zero for an empty range."""
    if a < 1:
        raise PreconditionViolated(f"power sums start at k >= 1, got {a}")
    if b <= a:
        return 0.0
    return float(np.sum(np.arange(a, b, dtype=float) ** p))


def tail_sum(q: float, a: int) -> float:
    """``sum(k**-q for k >= a)`` for ``q > 1``.

    Terms are summed directly over a block of ``_TAIL_BLOCK`` indices and the
    rest is closed with the integral plus Euler-Maclaurin corrections, whose
    truncation error is far below 1e-12 relative once the block start exceeds
    a few hundred.
    """
    if not q > 1:
        raise PreconditionViolated(f"tail sum needs q > 1, got {q}")
    if a < 1:
        raise PreconditionViolated(f"tail sums start at k >= 1, got {a}")
    m = a + _TAIL_BLOCK
    head = power_sum(-q, a, m)
    M = float(m)
    remainder = (
        M ** (1 - q) / (q - 1)
        + 0.5 * M ** -q
        + q * M ** (-q - 1) / 12
        - q * (q + 1) * (q + 2) * M ** (-q - 3) / 720
        + q * (q + 1) * (q + 2) * (q + 3) * (q + 4) * M ** (-q - 5) / 30240
    )
    return head + remainder


def prior_tail(eta: float, gamma: float, s: int) -> float:
    """Expected squared truth mass beyond the cutoff, ``eta**2 * sum_{k>=s} k**-2gamma``."""
    if eta == 0:
        return 0.0
    return eta * eta * tail_sum(2 * gamma, s)


def noise_mass(delta: float, lam: float, epsilon: float, a: int, b: int) -> float:
    """Expected squared propagated noise on ``a <= k < b``."""
    if delta == 0:
        return 0.0
    return delta * delta * power_sum(2 * lam + 2 * epsilon, a, b)


def prior_band(eta: float, gamma: float, a: int, b: int) -> float:
    if eta == 0:
        return 0.0
    return eta * eta * power_sum(-2 * gamma, a, b)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    level: int
    coeffs: np.ndarray
    cutoff: int


def _active_cutoff(instance, grid: Grid, n: int) -> int:
    grid.check_level(n)
    s = grid.cutoffs[n]
    if s - 1 > instance.k_max:
        raise LevelOutOfRange(f"cutoff s({n}) = {s} needs k_max >= {s - 1}, have {instance.k_max}")
    return s


def reconstruct(instance, grid: Grid, n: int) -> Reconstruction:
    """Truncated-SVD solution keeping coefficients ``1 <= k < s(n)``."""
    s = _active_cutoff(instance, grid, n)
    coeffs = np.zeros(instance.k_max)
    coeffs[: s - 1] = instance.data_coefficients()[: s - 1]
    return Reconstruction(n, coeffs, s)


def diff_norm(instance, grid: Grid, n: int, m: int) -> float:
    """``||x_m - x_n||``, the norm of the data coefficients on the band ``[s(n), s(m))``."""
    if n > m:
        raise LevelOutOfRange(f"diff_norm needs n <= m, got {n} > {m}")
    sn = _active_cutoff(instance, grid, n)
    sm = _active_cutoff(instance, grid, m)
    return float(np.linalg.norm(instance.data_coefficients()[sn - 1: sm - 1]))


def error_norm(instance, grid: Grid, n: int) -> float:
    """``||x_n - x||`` against the drawn (finite) truth."""
    return math.sqrt(error_sq(instance, grid, n))


def error_sq(instance, grid: Grid, n: int) -> float:
    s = _active_cutoff(instance, grid, n)
    missed = instance.truth[s - 1:]
    propagated = instance.propagated_noise()[: s - 1]
    return float(np.dot(missed, missed) + np.dot(propagated, propagated))


def expected_error_sq(params: ModelParams, grid: Grid, n: int) -> float:
    """``E||x_n - x||^2`` with the full infinite prior tail."""
    grid.check_level(n)
    s = grid.cutoffs[n]
    return (prior_tail(params.eta, params.gamma, s)
            + noise_mass(params.delta, params.lam, params.epsilon, 1, s))


def expected_diff_sq(params: ModelParams, grid: Grid, n: int, m: int) -> float:
    grid.check_level(n)
    grid.check_level(m)
    if n > m:
        raise LevelOutOfRange(f"expected_diff_sq needs n <= m, got {n} > {m}")
    a, b = grid.cutoffs[n], grid.cutoffs[m]
    return (prior_band(params.eta, params.gamma, a, b)
            + noise_mass(params.delta, params.lam, params.epsilon, a, b))


def expected_error_curve(params: ModelParams, grid: Grid) -> np.ndarray:
    return np.array([expected_error_sq(params, grid, n) for n in grid.levels])


class SolutionPath:
    """Lazily materialised family of reconstructions for one data vector.

    ``evaluations`` counts the distinct levels whose reconstruction has been
    computed, which is the cost measure of a parameter-choice rule.
    """

    def __init__(self, instance, grid: Grid):
        self.instance = instance
        self.grid = grid
        self._coeffs = instance.data_coefficients()
        self._cache: dict[int, Reconstruction] = {}

    @property
    def evaluations(self) -> int:
        return len(self._cache)

    @property
    def evaluated_levels(self) -> list[int]:
        return sorted(self._cache)

    def solution(self, n: int) -> Reconstruction:
        rec = self._cache.get(n)
        if rec is None:
            s = _active_cutoff(self.instance, self.grid, n)
            coeffs = np.zeros(self.instance.k_max)
            coeffs[: s - 1] = self._coeffs[: s - 1]
            rec = self._cache[n] = Reconstruction(n, coeffs, s)
        return rec

    def distance(self, n: int, m: int) -> float:
        if n > m:
            n, m = m, n
        a = self.solution(n).cutoff
        b = self.solution(m).cutoff
        # reconstructions differ only on the band [s(n), s(m))
        return float(np.linalg.norm(self._coeffs[a - 1: b - 1]))
