"""Model parameters and random problem instances in SVD coordinates.

Everything lives in the sequence model: the truth is a vector of
coefficients against the right singular basis, the noise a vector of
coefficients against the left singular basis, and the operator is the
diagonal ``sigma_k = k**-lam``.  Indices are 1-based in every formula;
arrays store index ``k`` at position ``k - 1``.

Random streams
--------------
An instance is a pure function of ``(params, k_max, seed)``.  The generator
is ``numpy.random.default_rng(seed)`` (PCG64 seeded through
``SeedSequence(seed)``).  Standard normals are drawn as one block of shape
``(2, k_max)`` for a plain instance (row 0 truth, row 1 noise) and
``(3, k_max)`` for a split instance (truth, noise_a, noise_b), then scaled.

Replication ``r`` of an experiment with base seed ``b`` uses
``derive_seed(b, r)``: the first 64-bit word of
``SeedSequence(b, spawn_key=(r,)).generate_state(1, uint64)``.  This makes
each replication's stream independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConstraintViolation, DegenerateDimension

UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ModelParams:
    """Prior, operator, noise and grid parameters.

    ``gamma`` prior decay, ``lam`` singular-value decay, ``epsilon`` noise
    color, ``eta`` prior scale, ``delta`` noise scale, ``omega0`` grid
    offset and ``omega`` grid ratio.
    """

    gamma: float
    lam: float
    epsilon: float
    eta: float
    delta: float
    omega0: float
    omega: float

    def __post_init__(self):
        _check(self)

    @property
    def noise_exponent(self) -> float:
        """``2*lam + 2*epsilon + 1``, the growth exponent of propagated noise."""
        return 2 * self.lam + 2 * self.epsilon + 1

    @property
    def prior_exponent(self) -> float:
        """``2*gamma - 1``, the decay exponent of the prior tail."""
        return 2 * self.gamma - 1

    def replace(self, **changes) -> "ModelParams":
        values = asdict(self)
        values.update(changes)
        return ModelParams(**values)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelParams":
        return validate_params(**raw)


def _check(p: ModelParams) -> None:
    # order matters: the first violated constraint is reported
    for name in ("gamma", "lam", "epsilon", "eta", "delta", "omega0", "omega"):
        value = getattr(p, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConstraintViolation(name, f"{name} must be a finite real, got {value!r}")
    if not p.gamma > 0.5:
        raise ConstraintViolation("gamma", f"gamma > 1/2 required, got {p.gamma}")
    if not p.lam > 0:
        raise ConstraintViolation("lambda", f"lambda > 0 required, got {p.lam}")
    if not p.lam > -p.epsilon:
        raise ConstraintViolation(
            "lambda+epsilon", f"lambda > -epsilon required, got {p.lam}, {p.epsilon}")
    if not p.eta > 0:
        raise ConstraintViolation("eta", f"eta > 0 required, got {p.eta}")
    if not p.delta > 0:
        raise ConstraintViolation("delta", f"delta > 0 required, got {p.delta}")
    if not p.omega0 > 1:
        raise ConstraintViolation("omega0", f"omega0 > 1 required, got {p.omega0}")
    if not p.omega > 1:
        raise ConstraintViolation("omega", f"omega > 1 required, got {p.omega}")
    if not p.omega0 * p.omega > p.omega0 + 1:
        raise ConstraintViolation(
            "omega0*omega",
            f"omega0*omega > omega0 + 1 required, got {p.omega0 * p.omega} <= {p.omega0 + 1}")


def validate_params(gamma, epsilon, eta, delta, omega0, omega, lam=None, **kw) -> ModelParams:
    """Build a :class:`ModelParams`, accepting ``lambda=`` as an alias of ``lam``."""
    if "lambda" in kw:
        lam = kw.pop("lambda")
    if kw:
        raise TypeError(f"unexpected parameters: {sorted(kw)}")
    if lam is None:
        raise TypeError("missing parameter: lambda")
    return ModelParams(float(gamma), float(lam), float(epsilon), float(eta),
                       float(delta), float(omega0), float(omega))


def indices(k_max: int) -> np.ndarray:
    """Float array ``[1, 2, ..., k_max]``."""
    return np.arange(1, k_max + 1, dtype=float)


def singular_values(lam: float, k_max: int) -> np.ndarray:
    return indices(k_max) ** -lam


def derive_seed(base_seed: int, rep_index: int) -> int:
    """Seed of replication ``rep_index`` under ``base_seed`` (see module doc)."""
    _check_seed(base_seed)
    if rep_index < 0:
        raise ValueError(f"rep_index must be non-negative, got {rep_index}")
    ss = np.random.SeedSequence(base_seed, spawn_key=(rep_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_seed(seed: int) -> None:
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed <= UINT64_MAX):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")


def _standard_normals(k_max: int, seed: int, rows: int) -> np.ndarray:
    if k_max < 1:
        raise DegenerateDimension(f"k_max must be positive, got {k_max}")
    _check_seed(seed)
    return np.random.default_rng(seed).standard_normal((rows, k_max))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    params: ModelParams
    k_max: int
    seed: int
    truth: np.ndarray
    noise: np.ndarray

    @property
    def singular_values(self) -> np.ndarray:
        return singular_values(self.params.lam, self.k_max)

    def data_coefficients(self) -> np.ndarray:
        """Naive-inverse coefficients ``truth[k] + k**lam * noise[k]``."""
        return self.truth + indices(self.k_max) ** self.params.lam * self.noise

    def propagated_noise(self) -> np.ndarray:
        return indices(self.k_max) ** self.params.lam * self.noise


@dataclass(frozen=True, eq=False)
class SplitInstance:
    """Truth plus two independent half-measurements at level ``sqrt(2)*delta``."""

    params: ModelParams
    k_max: int
    seed: int
    truth: np.ndarray
    noise_a: np.ndarray
    noise_b: np.ndarray

    @property
    def noise(self) -> np.ndarray:
        """Averaged noise; distributed like a level-``delta`` draw."""
        return (self.noise_a + self.noise_b) / 2

    @property
    def noise_half_difference(self) -> np.ndarray:
        return (self.noise_a - self.noise_b) / 2

    def data_coefficients(self) -> np.ndarray:
        return self.truth + indices(self.k_max) ** self.params.lam * self.noise

    def propagated_noise(self) -> np.ndarray:
        return indices(self.k_max) ** self.params.lam * self.noise

    def averaged(self) -> ProblemInstance:
        """The plain instance seen by an estimator that averages both halves."""
        return ProblemInstance(self.params, self.k_max, self.seed, self.truth, self.noise)


def _scales(params: ModelParams, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    k = indices(k_max)
    return params.eta * k ** -params.gamma, params.delta * k ** params.epsilon


def draw_problem(params: ModelParams, k_max: int, seed: int) -> ProblemInstance:
    z = _standard_normals(k_max, seed, 2)
    prior_sd, noise_sd = _scales(params, k_max)
    truth = z[0] * prior_sd
    noise = z[1] * noise_sd
    truth.flags.writeable = False
    noise.flags.writeable = False
    return ProblemInstance(params, k_max, int(seed), truth, noise)


def draw_split(params: ModelParams, k_max: int, seed: int) -> SplitInstance:
    z = _standard_normals(k_max, seed, 3)
    prior_sd, noise_sd = _scales(params, k_max)
    half_sd = math.sqrt(2) * noise_sd
    truth = z[0] * prior_sd
    noise_a = z[1] * half_sd
    noise_b = z[2] * half_sd
    for arr in (truth, noise_a, noise_b):
        arr.flags.writeable = False
    return SplitInstance(params, k_max, int(seed), truth, noise_a, noise_b)
