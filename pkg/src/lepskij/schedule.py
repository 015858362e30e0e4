"""Geometric subsampling grid ``s(n) = ceil(omega0 * omega**n)`` and look-ahead."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import ConstraintViolation, GridTooCoarse, LevelOutOfRange


def exact_cutoff(omega0: float, omega: float, n: int) -> int:
    # rational arithmetic on the float inputs, so ceil never rounds the wrong way
    return math.ceil(Fraction(omega0) * Fraction(omega) ** n)


def _check_ratios(omega0, omega):
    if not omega0 > 1:
        raise ConstraintViolation("omega0")
    if not omega > 1:
        raise ConstraintViolation("omega")
    if not omega0 * omega > omega0 + 1:
        raise ConstraintViolation("omega0*omega")


def max_level(omega0: float, omega: float, k_max: int) -> int:
    """Largest ``N`` with ``s(N) <= k_max``."""
    _check_ratios(omega0, omega)
    if exact_cutoff(omega0, omega, 0) > k_max:
        raise GridTooCoarse(
            f"s(0) = {exact_cutoff(omega0, omega, 0)} exceeds k_max = {k_max}")
    n = 0
    while exact_cutoff(omega0, omega, n + 1) <= k_max:
        n += 1
    return n


@dataclass(frozen=True)
class Grid:
    omega0: float
    omega: float
    n_max: int
    k_max: int
    cutoffs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_ratios(self.omega0, self.omega)
        if self.n_max < 0:
            raise ConstraintViolation("n_max", f"n_max must be >= 0, got {self.n_max}")
        s = tuple(exact_cutoff(self.omega0, self.omega, n) for n in range(self.n_max + 1))
        if s[-1] > self.k_max:
            raise GridTooCoarse(f"s({self.n_max}) = {s[-1]} exceeds k_max = {self.k_max}")
        object.__setattr__(self, "cutoffs", s)

    @classmethod
    def for_params(cls, params, k_max: int, n_max: int | None = None) -> "Grid":
        top = max_level(params.omega0, params.omega, k_max)
        if n_max is None:
            n_max = top
        elif n_max > top:
            raise GridTooCoarse(f"n_max = {n_max} needs s(n_max) <= k_max; largest is {top}")
        return cls(params.omega0, params.omega, n_max, k_max)

    @property
    def levels(self) -> range:
        return range(self.n_max + 1)

    def check_level(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise LevelOutOfRange(f"level {n} outside [0, {self.n_max}]")


def cutoff(grid: Grid, n: int) -> int:
    grid.check_level(n)
    return grid.cutoffs[n]


def lookahead(grid: Grid, n: int, sigma: float, rho: Callable[[int], float]) -> int:
    """First level whose noise behavior exceeds ``sigma * rho(n)``, capped at ``n_max``.

    ``rho`` maps a level to its noise behavior and is evaluated lazily, only
    up to the returned level.
    """
    grid.check_level(n)
    if not sigma > 1:
        raise ConstraintViolation("sigma", f"sigma > 1 required, got {sigma}")
    threshold = sigma * rho(n)
    for m in range(n + 1, grid.n_max + 1):
        if rho(m) > threshold:
            return m
    return grid.n_max


def lookahead_gap_estimate(sigma: float, omega: float) -> float:
    """Diagnostic ``log(sigma)/log(omega)``; selection never uses it."""
    return math.log(sigma) / math.log(omega)
