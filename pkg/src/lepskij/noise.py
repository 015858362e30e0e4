"""Noise behavior ``rho(n)``: size of the propagated noise at level ``n``."""

from __future__ import annotations

import math

import numpy as np

from .estimator import noise_mass
from .model import ModelParams, SplitInstance, indices
from .schedule import Grid

ANALYTIC = "analytic-stochastic"
DETERMINISTIC = "deterministic"
SPLIT = "split-estimate"
MODES = (ANALYTIC, DETERMINISTIC, SPLIT)

_ALIASES = {"analytic": ANALYTIC, "stochastic": ANALYTIC, "deterministic": DETERMINISTIC,
            "split": SPLIT, "estimated": SPLIT}


def canonical_mode(mode: str) -> str:
    mode = _ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown noise-behavior mode {mode!r}; expected one of {MODES}")
    return mode


def rho_stochastic(params: ModelParams, grid: Grid, m: int) -> float:
    """Root-mean-square propagated noise, ``sqrt(E||A_m^-1 xi||^2)``."""
    grid.check_level(m)
    return math.sqrt(noise_mass(params.delta, params.lam, params.epsilon, 1, grid.cutoffs[m]))


def rho_deterministic(delta: float, lam: float, grid: Grid, n: int) -> float:
    """Worst-case bound ``delta / sigma_{s(n)} = s(n)**lam * delta``."""
    grid.check_level(n)
    return grid.cutoffs[n] ** lam * delta


def rho_estimated(split: SplitInstance, grid: Grid, n: int) -> float:
    """Norm of the half-difference of the two single-measurement reconstructions."""
    grid.check_level(n)
    s = grid.cutoffs[n]
    k = indices(s - 1)
    half = split.noise_half_difference[: s - 1]
    return float(np.linalg.norm(k ** split.params.lam * half))


class NoiseBehavior:
    """Memoized per-level noise behavior; call it with a level.

    The memo is a write-once cache, so repeated and out-of-order queries give
    the same values as a fresh evaluation.
    """

    def __init__(self, mode: str, grid: Grid, params: ModelParams | None = None,
                 split: SplitInstance | None = None):
        self.mode = canonical_mode(mode)
        self.grid = grid
        self.params = params
        self.split = split
        if self.mode == SPLIT:
            if split is None:
                raise ValueError("split-estimate noise behavior needs a SplitInstance")
            if params is None:
                self.params = split.params
        elif params is None:
            raise ValueError(f"{self.mode} noise behavior needs model parameters")
        self._memo: dict[int, float] = {}

    def __call__(self, n: int) -> float:
        value = self._memo.get(n)
        if value is None:
            if self.mode == ANALYTIC:
                value = rho_stochastic(self.params, self.grid, n)
            elif self.mode == DETERMINISTIC:
                value = rho_deterministic(self.params.delta, self.params.lam, self.grid, n)
            else:
                value = rho_estimated(self.split, self.grid, n)
            self._memo[n] = value
        return value

    @property
    def values(self) -> np.ndarray:
        return np.array([self(n) for n in self.grid.levels])

    def __repr__(self):
        return f"NoiseBehavior(mode={self.mode!r}, n_max={self.grid.n_max})"
