"""Balancing functionals and the classic and fast stopping indices.

All rules take a :class:`~lepskij.estimator.SolutionPath` (the data) and a
noise-behavior callable ``rho(level)``.  The path counts the reconstructions
a rule actually needed, which is how the cost of the fast rule is measured.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConstraintViolation, NoBalancePoint, NoFastPoint, ZeroNoiseBehavior
from .estimator import SolutionPath
from .model import ProblemInstance, SplitInstance
from .schedule import Grid, lookahead


@dataclass(frozen=True)
class BalancingConfig:
    """``sigma`` look-ahead ratio, ``kappa`` classic threshold, ``tau`` fast threshold."""

    sigma: float = 2.0
    kappa: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if not self.sigma > 1:
            raise ConstraintViolation("sigma", f"sigma > 1 required, got {self.sigma}")
        if not self.kappa > 0:
            raise ConstraintViolation("kappa", f"kappa > 0 required, got {self.kappa}")
        if not self.tau > 0:
            raise ConstraintViolation("tau", f"tau > 0 required, got {self.tau}")


@dataclass
class SelectionResult:
    index: int
    functional_trace: dict = field(default_factory=dict)
    evaluations: int = 0
    max_gap: int = 0
    rule: str = "fast"


def solution_path(data, grid: Grid) -> SolutionPath:
    """Wrap an instance (a split instance is averaged) in a lazy solution path."""
    if isinstance(data, SolutionPath):
        return data
    if isinstance(data, SplitInstance):
        data = data.averaged()
    if not isinstance(data, ProblemInstance):
        raise TypeError(f"expected an instance or SolutionPath, got {type(data).__name__}")
    return SolutionPath(data, grid)


def _window_end(path: SolutionPath, sigma: float, rho, n: int) -> int:
    if n == path.grid.n_max:
        return n
    return lookahead(path.grid, n, sigma, rho)


def functional_b(path: SolutionPath, sigma: float, rho, n: int) -> float:
    """``max_{n < m <= l(n)} ||x_n - x_m|| / (4 rho(m))``; zero for an empty window."""
    path.grid.check_level(n)
    end = _window_end(path, sigma, rho, n)
    best = 0.0
    for m in range(n + 1, end + 1):
        r = rho(m)
        if r <= 0:
            raise ZeroNoiseBehavior(f"rho({m}) = {r} inside the window of level {n}")
        best = max(best, path.distance(n, m) / (4 * r))
    return best


def functional_B_trace(path: SolutionPath, sigma: float, rho, start: int = 0):
    """``b`` and the smoothed ``B`` for levels ``start..n_max`` (backward running max)."""
    n_max = path.grid.n_max
    b = {n: functional_b(path, sigma, rho, n) for n in range(start, n_max + 1)}
    B = {}
    running = 0.0
    for n in range(n_max, start - 1, -1):
        running = max(running, b[n])
        B[n] = running
    return b, B


def functional_B(path: SolutionPath, sigma: float, rho, n: int) -> float:
    path.grid.check_level(n)
    return functional_B_trace(path, sigma, rho, n)[1][n]


def classic_index(path: SolutionPath, config: BalancingConfig, rho) -> SelectionResult:
    """Smallest level with ``B(n) <= kappa``; evaluates every level."""
    b, B = functional_B_trace(path, config.sigma, rho)
    for n in path.grid.levels:
        path.solution(n)
    gap = max(_window_end(path, config.sigma, rho, n) - n for n in path.grid.levels)
    for n in path.grid.levels:
        if B[n] <= config.kappa:
            return SelectionResult(n, b, path.evaluations, gap, "classic")
    raise NoBalancePoint(f"B(n) > kappa = {config.kappa} for every level")


def fast_index(path: SolutionPath, config: BalancingConfig, rho) -> SelectionResult:
    """First level, scanning upward, with ``b(n) < tau``.

    Only the reconstructions inside the look-ahead windows of the scanned
    levels are computed.
    """
    trace = {}
    gap = 0
    for n in path.grid.levels:
        path.solution(n)
        gap = max(gap, _window_end(path, config.sigma, rho, n) - n)
        trace[n] = functional_b(path, config.sigma, rho, n)
        if trace[n] < config.tau:
            return SelectionResult(n, trace, path.evaluations, gap, "fast")
    raise NoFastPoint(f"b(n) >= tau = {config.tau} for every level up to {path.grid.n_max}")
