"""Closed-form constants, side conditions, optimal level and probability bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PreconditionViolated, SeriesDiverged
from .estimator import expected_error_curve, power_sum
from .model import ModelParams
from .schedule import Grid

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SandwichConstants:
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def as_dict(self) -> dict:
        return asdict(self)


def constants(params: ModelParams) -> SandwichConstants:
    """Constants of the adjacent-difference, propagated-noise and error sandwiches."""
    w0, w = params.omega0, params.omega
    up = (w0 + 1) / w0
    down = (w0 - 1) / w0
    p = params.noise_exponent
    q = params.prior_exponent
    c3 = down ** p * (1 - w ** -p)
    c4 = up ** p
    c1 = min(up ** -q * (1 - w ** -q), c3)
    c2 = max(down ** -q, c4)
    return SandwichConstants(c1, c2, c3, c4, c1, c2)


@dataclass(frozen=True)
class ConditionReport:
    hi1: bool
    hi2: bool
    hi3: bool
    hi5: bool
    hi1_lhs: float
    hi2_lhs: float
    hi3_lhs: float
    hi5_lhs: float

    @property
    def all_hold(self) -> bool:
        return self.hi1 and self.hi2 and self.hi3 and self.hi5

    def as_dict(self) -> dict:
        return asdict(self)


def check_conditions(params: ModelParams) -> ConditionReport:
    """Evaluate the four ``omega0 large enough`` side conditions.

    ``hi1``: c3/c6 >= 1/2, ``hi2``: c4/c1 <= 2, ``hi3``: c1*omega0*omega/(2gamma-1) >= 1,
    ``hi5``: c3*omega0/(1+2lambda+2epsilon) > 1.
    """
    c = constants(params)
    hi1 = c.c3 / c.c6
    hi2 = c.c4 / c.c1
    hi3 = c.c1 * params.omega0 * params.omega / params.prior_exponent
    hi5 = c.c3 * params.omega0 / params.noise_exponent
    return ConditionReport(hi1 >= 0.5, hi2 <= 2, hi3 >= 1, hi5 > 1, hi1, hi2, hi3, hi5)


@dataclass(frozen=True)
class OptimalLevel:
    s_star: float
    n_opt_real: float
    n_opt: int | None  # None when the balance point lies below the grid

    @property
    def representable(self) -> bool:
        return self.n_opt is not None


def balance_cutoff(params: ModelParams) -> float:
    """Real cutoff where prior tail and propagated noise approximately balance."""
    ratio = params.eta ** 2 / params.delta ** 2 * params.prior_exponent / params.noise_exponent
    return ratio ** (1 / (2 * params.lam + 2 * params.epsilon + 2 * params.gamma))


def balance_cutoff_exact(params: ModelParams) -> float:
    """Real root of ``eta^2 s^-Q / Q = delta^2 s^P / P`` (``Q = 2gamma-1``, ``P = 2lam+2eps+1``).

    Coincides with :func:`balance_cutoff` only when ``P == Q``; the closed
    form above carries the ratio ``Q/P`` where solving the equation gives ``P/Q``.
    """
    ratio = params.eta ** 2 / params.delta ** 2 * params.noise_exponent / params.prior_exponent
    return ratio ** (1 / (2 * params.lam + 2 * params.epsilon + 2 * params.gamma))


def n_opt_closed(params: ModelParams, grid: Grid | None = None) -> OptimalLevel:
    s_star = balance_cutoff(params)
    n_real = math.log(s_star / params.omega0) / math.log(params.omega)
    if n_real < 0:
        return OptimalLevel(s_star, n_real, None)
    n = int(math.floor(n_real + 0.5))
    if grid is not None:
        n = min(n, grid.n_max)
    return OptimalLevel(s_star, n_real, n)


def n_opt_empirical(params: ModelParams, grid: Grid) -> int:
    """Argmin of the expected squared error over the grid (first on ties)."""
    return int(np.argmin(expected_error_curve(params, grid)))


@dataclass(frozen=True)
class RiemannBounds:
    lower: float
    value: float
    upper: float

    @property
    def strict(self) -> bool:
        return self.lower < self.value < self.upper


def riemann_bounds(n: int, m: int, kappa_exp: float, omega0: float, omega: float) -> dict:
    """Integral bounds on ``sum_{k=n}^{m-1} k**-kappa`` and ``k**kappa``.

    Returns ``{"decay": RiemannBounds | None, "growth": RiemannBounds}``;
    the decay case exists only for ``kappa_exp > 1``.
    """
    # tolerance so that exact boundary cases such as m = omega * n survive rounding
    if not (m / omega >= n * (1 - 1e-12) and n >= omega0):
        raise PreconditionViolated(f"need m/omega >= n >= omega0, got n={n}, m={m}")
    if kappa_exp < 0:
        raise PreconditionViolated(f"exponent must be >= 0, got {kappa_exp}")
    kap = kappa_exp
    shrink = (omega0 - 1) / omega0
    decay = None
    if kap > 1:
        decay = RiemannBounds(
            (1 - omega ** (1 - kap)) / (kap - 1) * n ** (1 - kap),
            power_sum(-kap, n, m),
            shrink ** (1 - kap) / (kap - 1) * n ** (1 - kap),
        )
    growth = RiemannBounds(
        shrink ** (kap + 1) * (1 - omega ** (-kap - 1)) / (1 + kap) * m ** (kap + 1),
        power_sum(kap, n, m),
        m ** (kap + 1) / (1 + kap),
    )
    return {"decay": decay, "growth": growth}


def sandwich_base(params: ModelParams, n: int, m: int) -> float:
    """Bracket shared by the three sandwiches: prior part at ``n``, noise part at ``m``."""
    w0, w = params.omega0, params.omega
    p, q = params.noise_exponent, params.prior_exponent
    prior = params.eta ** 2 * w0 ** -q / q * w ** (-n * q)
    noise = params.delta ** 2 * w0 ** p / p * w ** (m * p)
    return prior + noise


def noise_base(params: ModelParams, m: int) -> float:
    p = params.noise_exponent
    return params.delta ** 2 * params.omega0 ** p / p * params.omega ** (m * p)


def gauss_tail_upper(z: float) -> float:
    """Bound on ``P(Z >= z)`` for a normalised chi-square mixture."""
    if z < 0:
        raise PreconditionViolated(f"z must be non-negative, got {z}")
    return SQRT2 * math.exp(-z / 4)


def gauss_tail_lower(z: float, max_alpha_sq: float) -> tuple[float, float]:
    """Both forms of the bound on ``P(Z <= z)``; the first is the sharper."""
    if not 0 < z < 1:
        raise PreconditionViolated(f"need 0 < z < 1, got {z}")
    if not 0 < max_alpha_sq <= 1:
        raise PreconditionViolated(f"need 0 < max alpha^2 <= 1, got {max_alpha_sq}")
    power = 1 / (2 * max_alpha_sq)
    return math.exp((1 - z + math.log(z)) * power), (math.e * z) ** power


def tail_bound_overshoot(tau: float, K: int = 1) -> float:
    """Bound on ``P{b(n) > tau}`` for levels above the optimum."""
    return K * SQRT2 * math.exp(-tau * tau)


def tail_bound_overshoot_B(tau: float, K: int, delta: float, omega0: float, omega: float,
                           lam: float) -> float:
    """Bound on ``P{B(n) > tau}``; the union factor counts levels as ``log(delta/omega0)/(-lam log omega)``."""
    levels = math.log(delta / omega0) / (-lam * math.log(omega))
    return K * levels * SQRT2 * math.exp(-tau * tau)


def _gap_decay(params: ModelParams) -> float:
    return 2 * params.lam + 2 * params.epsilon + 2 * params.gamma


def tail_bound_undershoot(params: ModelParams, tau: float, gap: float, K: int = 1) -> float:
    """Bound on ``P{b(n) < tau}`` for ``gap = n_opt - n >= 0`` levels below the optimum."""
    if gap < 0:
        raise PreconditionViolated(f"gap must be >= 0, got {gap}")
    w, p = params.omega, params.noise_exponent
    return 32 * math.e * w ** (K * p) * tau ** 2 * w ** (-gap * _gap_decay(params))


def tail_bound_undershoot_B(params: ModelParams, tau: float, gap: float) -> float:
    if gap < 0:
        raise PreconditionViolated(f"gap must be >= 0, got {gap}")
    w, p = params.omega, params.noise_exponent
    return 32 * math.e * w ** p * tau ** 2 * w ** (-gap * _gap_decay(params))


def tilde_tail_overshoot(tau: float, K: int = 1) -> float:
    """Bound on ``P{b~(n) > tau}`` above the optimum; needs ``e/(2 tau) < 1``."""
    if not math.e / (2 * tau) < 1:
        raise PreconditionViolated(f"overshoot bound needs e/(2 tau) < 1, got tau={tau}")
    return K * math.e / tau


def tilde_tail_undershoot(params: ModelParams, tau: float, gap: float) -> float:
    """Bound on ``P{b~(n) < tau}``; the decay exponent is ``lam + 2 eps + 2 gamma``."""
    if gap < 0:
        raise PreconditionViolated(f"gap must be >= 0, got {gap}")
    w, p = params.omega, params.noise_exponent
    return (64 * math.e * w ** p * tau
            * w ** (-gap * (params.lam + 2 * params.epsilon + 2 * params.gamma)))


def tilde_tail_bounds(params: ModelParams, tau: float, gap: float, K: int = 1) -> tuple[float, float]:
    """``(overshoot, undershoot)`` bounds when rho is replaced by the split estimate."""
    return tilde_tail_overshoot(tau, K), tilde_tail_undershoot(params, tau, gap)


@dataclass(frozen=True)
class OracleConstant:
    value: float
    below_ratio: float
    above_ratio: float
    hi_n1_lhs: float
    reading: str


def oracle_constant(params: ModelParams, tau: float, p_bar: float, c_p: float) -> OracleConstant:
    """Upper bound on the oracle constant of fast balancing.

    ``below_ratio`` and ``above_ratio`` are the common ratios of the two
    geometric series over levels below and above the optimum; both must be
    below one, otherwise :class:`SeriesDiverged` is raised.  The below-optimum
    factor is written with the ratio ``omega**(-hi_n1_lhs/p_bar)`` of that
    series; the form ``(1 - omega**hi_n1_lhs)**(-1/p_bar)`` is undefined
    exactly when the series converges.  ``reading`` records this choice.
    """
    if not p_bar > 1:
        raise PreconditionViolated(f"p_bar must exceed 1, got {p_bar}")
    if not c_p >= 1:
        raise PreconditionViolated(f"c_p must be >= 1, got {c_p}")
    c = constants(params)
    w, p, g = params.omega, params.noise_exponent, params.gamma
    hi_n1 = 2 * params.lam + 2 * params.epsilon + 2 * g * (1 - p_bar) + p_bar
    below_ratio = w ** (-hi_n1 / p_bar)
    above_ratio = w ** p * (SQRT2 * math.exp(-tau * tau)) ** (1 / p_bar)
    if not below_ratio < 1:
        raise SeriesDiverged(f"below-optimum series ratio {below_ratio} >= 1 (hi:n1 fails)")
    if not above_ratio < 1:
        raise SeriesDiverged(f"above-optimum series ratio {above_ratio} >= 1 (hi:n2 fails)")
    first = ((32 * math.e * w ** p * tau ** 2) ** (1 / p_bar) * c.c6 / c.c5
             * (1 - below_ratio) ** (-1 / p_bar))
    second = w ** (1 - 2 * g)
    third = 1 / (1 - above_ratio)
    return OracleConstant(4 * c_p * (first + second + third), below_ratio, above_ratio,
                          hi_n1, "series")
