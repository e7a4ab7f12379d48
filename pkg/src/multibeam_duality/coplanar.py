"""Three equally populated beams tagged by coplanar qubit detector states.

The detector Bloch vectors are ``n0 = (0, 0, 1)`` and
``n+- = (+-sin t, 0, cos t)``.  Everything here is closed form; the general
modules provide the numeric counterparts used for cross-checks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .distinguishability import TwoOutcomeObservable, optimize_refined
from .measures import visibility
from .qcore import BeamDetectorConfig, BlochVector, PopulationVector, ValidationError

CROSSOVER = 2.0 * math.pi / 3.0
CROSSOVER_TOL = 1e-9
DEAD_BAND = 1e-12
CROSS_CHECK_TOL = 1e-8
DEFAULT_STEPS = 257
THREADS_ENV = "MULTIBEAM_DUALITY_THREADS"


class Branch(str, Enum):
    SIGMA_X = "sigma_x"
    SIGMA_Z = "sigma_z"
    CROSSOVER = "crossover"

    def __str__(self) -> str:
        return self.value


class CrossCheckError(AssertionError):
    """Closed form and numeric evaluation disagree."""


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= math.pi):
        raise ValidationError(f"theta={theta!r} outside [0, pi]")
    return theta


def branch_of(theta: float) -> Branch:
    if abs(theta - CROSSOVER) <= CROSSOVER_TOL:
        return Branch.CROSSOVER
    return Branch.SIGMA_X if theta < CROSSOVER else Branch.SIGMA_Z


@dataclass(frozen=True)
class CoplanarFamily:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_theta(self.theta))

    def bloch_vectors(self) -> Tuple[BlochVector, BlochVector, BlochVector]:
        s, c = math.sin(self.theta), math.cos(self.theta)
        return BlochVector(0.0, 0.0, 1.0), BlochVector(s, 0.0, c), BlochVector(-s, 0.0, c)


def make_config(theta: float) -> BeamDetectorConfig:
    """Beams ordered (n0, n+, n-), each with population 1/3."""
    vectors = CoplanarFamily(theta).bloch_vectors()
    return BeamDetectorConfig.from_bloch(PopulationVector.uniform(3), vectors)


def closed_visibility(theta: float) -> float:
    c = math.cos(_check_theta(theta))
    return math.sqrt((1.0 + c + c * c) / 3.0)


def closed_knowledge_sq(theta: float, beta: float, gamma: float) -> float:
    s2 = math.sin(theta / 2.0) ** 2
    c2 = math.cos(theta / 2.0) ** 2
    return (
        4.0 / 9.0
        * (math.cos(beta) ** 2 * s2 + 3.0 * math.sin(beta) ** 2 * math.cos(gamma) ** 2 * c2)
        * s2
    )


def closed_distinguishability(theta: float) -> Tuple[float, Branch]:
    theta = _check_theta(theta)
    branch = branch_of(theta)
    if branch is Branch.SIGMA_X:
        return math.sin(theta) / math.sqrt(3.0), branch
    if branch is Branch.SIGMA_Z:
        return 2.0 / 3.0 * math.sin(theta / 2.0) ** 2, branch
    return 0.5, branch


def optimal_observable(theta: float) -> Tuple[TwoOutcomeObservable, bool]:
    """Optimal observable and whether the optimum is degenerate.

    At the crossover every ``beta`` with ``cos(gamma) = +-1`` is optimal; the
    representative ``(0, 0)`` is returned with the flag set.
    """
    branch = branch_of(_check_theta(theta))
    if branch is Branch.SIGMA_X:
        return TwoOutcomeObservable(math.pi / 2.0, 0.0), False
    return TwoOutcomeObservable(0.0, 0.0), branch is Branch.CROSSOVER


@dataclass(frozen=True)
class SweepRow:
    theta: float
    V: float
    D: float
    sum_sq: float
    branch: Branch
    beta_opt: float
    gamma_opt: float
    numeric_V: Optional[float] = None
    numeric_D: Optional[float] = None


def sweep_row(theta: float, validate: bool = False) -> SweepRow:
    V = closed_visibility(theta)
    D, branch = closed_distinguishability(theta)
    obs, _ = optimal_observable(theta)
    numeric_V = numeric_D = None
    if validate:
        cfg = make_config(theta)
        numeric_V = visibility(cfg)
        numeric_D = optimize_refined(cfg).best_K
        if abs(numeric_V - V) > CROSS_CHECK_TOL or abs(numeric_D - D) > CROSS_CHECK_TOL:
            raise CrossCheckError(
                f"theta={theta!r}: closed (V={V!r}, D={D!r}) vs "
                f"numeric (V={numeric_V!r}, D={numeric_D!r})"
            )
    return SweepRow(theta, V, D, V * V + D * D, branch, obs.beta, obs.gamma, numeric_V, numeric_D)


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def sweep(
    theta_min: float = 0.0,
    theta_max: float = math.pi,
    steps: int = DEFAULT_STEPS,
    validate: bool = False,
    threads: Optional[int] = None,
) -> List[SweepRow]:
    """Uniform theta grid with closed-form rows, optionally cross-checked numerically.

    Rows come back in theta order whatever the thread count.
    """
    if not (0.0 <= theta_min < theta_max <= math.pi):
        raise ValidationError(
            f"need 0 <= theta_min < theta_max <= pi, got [{theta_min!r}, {theta_max!r}]"
        )
    if steps < 2:
        raise ValidationError("steps must be at least 2")
    thetas = [float(t) for t in np.linspace(theta_min, theta_max, steps)]
    workers = _thread_count(threads) if validate else 1
    if workers == 1:
        return [sweep_row(t, validate) for t in thetas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: sweep_row(t, validate), thetas))


@dataclass(frozen=True)
class AnomalyInterval:
    theta_start: float
    theta_end: float
    tag: str  # "co-decrease" or "co-increase"

    def contains(self, lo: float, hi: float) -> bool:
        return self.theta_start <= lo and hi <= self.theta_end


def _sign(x: float) -> int:
    if x > DEAD_BAND:
        return 1
    if x < -DEAD_BAND:
        return -1
    return 0


def detect_anomaly(rows: Sequence[SweepRow]) -> List[AnomalyInterval]:
    """Maximal theta intervals on which V and D move in the same direction."""
    if len(rows) < 16:
        raise ValidationError("anomaly detection needs at least 16 rows")
    thetas = [r.theta for r in rows]
    if any(b <= a for a, b in zip(thetas, thetas[1:])):
        raise ValidationError("rows must have strictly increasing theta")

    tags = []
    for a, b in zip(rows, rows[1:]):
        sv, sd = _sign(b.V - a.V), _sign(b.D - a.D)
        if sv != 0 and sv == sd:
            tags.append("co-increase" if sv > 0 else "co-decrease")
        else:
            tags.append(None)

    intervals = []
    k = 0
    while k < len(tags):
        if tags[k] is None:
            k += 1
            continue
        start = k
        while k + 1 < len(tags) and tags[k + 1] == tags[start]:
            k += 1
        intervals.append(AnomalyInterval(thetas[start], thetas[k + 1], tags[start]))
        k += 1
    return intervals
