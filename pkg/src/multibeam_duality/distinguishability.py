"""Two-outcome qubit observables and the maximization of K(W) over them.

An observable on a two-dimensional detector is fixed, up to outcome labels,
by the unit vector ``m = (sin b cos g, sin b sin g, cos b)`` of its ``+``
eigenprojector ``(1 + m.sigma)/2``.  The distinguishability D is the largest
which-way knowledge reachable this way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from .measures import DualityReport, Measurement, predictability, visibility, which_way_knowledge
from .qcore import BeamDetectorConfig, DimensionError, ValidationError, bloch_projector

TWO_PI = 2.0 * math.pi
TIE_TOL = 1e-6
# candidates this close to the maximum are interchangeable representatives
REPRESENTATIVE_TOL = 1e-12
MAX_CYCLES = 200
SEED_RESOLUTION = 64
MAX_SEEDS = 4
GOLDEN_XTOL = 1e-10

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def canonical_angles(beta: float, gamma: float) -> Tuple[float, float]:
    """Fold arbitrary polar/azimuthal angles into ``[0, pi] x [0, 2 pi)``."""
    beta = beta % TWO_PI
    if beta > math.pi:
        beta = TWO_PI - beta
        gamma = gamma + math.pi
    if beta == 0.0 or beta == math.pi:
        gamma = 0.0
    gamma = gamma % TWO_PI
    if gamma >= TWO_PI:
        gamma = 0.0
    return beta, gamma


@dataclass(frozen=True, order=True)
class TwoOutcomeObservable:
    beta: float
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.beta <= math.pi):
            raise ValidationError(f"beta={self.beta!r} outside [0, pi]")
        if not (0.0 <= self.gamma < TWO_PI):
            raise ValidationError(f"gamma={self.gamma!r} outside [0, 2 pi)")

    @classmethod
    def from_angles(cls, beta: float, gamma: float) -> "TwoOutcomeObservable":
        return cls(*canonical_angles(beta, gamma))

    @property
    def direction(self) -> np.ndarray:
        sb = math.sin(self.beta)
        return np.array(
            [sb * math.cos(self.gamma), sb * math.sin(self.gamma), math.cos(self.beta)]
        )

    def antipode(self) -> "TwoOutcomeObservable":
        """Same observable with the outcome labels swapped."""
        return TwoOutcomeObservable.from_angles(math.pi - self.beta, self.gamma + math.pi)


@dataclass(frozen=True)
class OptimizationResult:
    best_K: float
    best_observable: TwoOutcomeObservable
    method: str
    grid_resolution: int
    tie_set: tuple = ()
    converged: bool = True
    cycles: int = 0
    extra: dict = field(default_factory=dict, compare=False)


def observable_to_measurement(obs: TwoOutcomeObservable) -> Measurement:
    m = tuple(obs.direction)
    return Measurement((bloch_projector(m, +1), bloch_projector(m, -1)), labels=("+", "-"))


def _require_qubit(cfg: BeamDetectorConfig) -> None:
    if cfg.dim != 2:
        raise DimensionError(f"observable search needs d=2 detector states, got d={cfg.dim}")


def knowledge_of(cfg2d: BeamDetectorConfig, obs: TwoOutcomeObservable) -> float:
    """K(W) for the observable ``obs``, through the general measurement path."""
    _require_qubit(cfg2d)
    return which_way_knowledge(cfg2d, observable_to_measurement(obs)).total


class _BlochObjective:
    """Fast K(m) for qubit detectors, using ``q_{i|+-} = (1 +- m.n_i)/2``.

    Each outcome contributes ``p_l K_l = sqrt(sum_{i<j} (w_i - w_j)^2 / (n-1))``
    with ``w_i = zeta_i q_{i|l}``, so no division by ``p_l`` is needed.
    """

    def __init__(self, cfg: BeamDetectorConfig):
        _require_qubit(cfg)
        self.n = cfg.n
        self.vectors = cfg.bloch_vectors()
        self.zeta = cfg.populations.as_array()
        iu = np.triu_indices(self.n, 1)
        self._pairs = list(zip(iu[0].tolist(), iu[1].tolist()))
        self._iu = iu
        self._nv = [tuple(v) for v in self.vectors.tolist()]
        self._z = self.zeta.tolist()

    def many(self, directions: np.ndarray) -> np.ndarray:
        dots = directions @ self.vectors.T
        total = np.zeros(len(directions))
        for sign in (1.0, -1.0):
            w = self.zeta * (1.0 + sign * dots) / 2.0
            gaps = w[:, self._iu[0]] - w[:, self._iu[1]]
            total += np.sqrt(np.sum(gaps * gaps, axis=1) / (self.n - 1))
        return np.minimum(total, 1.0)

    def __call__(self, beta: float, gamma: float) -> float:
        sb = math.sin(beta)
        mx, my, mz = sb * math.cos(gamma), sb * math.sin(gamma), math.cos(beta)
        wp, wm = [], []
        for z, (x, y, zz) in zip(self._z, self._nv):
            d = mx * x + my * y + mz * zz
            wp.append(z * (1.0 + d) / 2.0)
            wm.append(z * (1.0 - d) / 2.0)
        sp = sm = 0.0
        for i, j in self._pairs:
            a = wp[i] - wp[j]
            b = wm[i] - wm[j]
            sp += a * a
            sm += b * b
        k = math.sqrt(sp / (self.n - 1)) + math.sqrt(sm / (self.n - 1))
        return min(k, 1.0)


def _grid_axes(resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    # beta = pi is the antipode of beta = 0 and carries the same K
    betas = math.pi * np.arange(resolution) / resolution
    gammas = TWO_PI * np.arange(resolution) / resolution
    return betas, gammas


def _grid_values(objective: _BlochObjective, resolution: int):
    betas, gammas = _grid_axes(resolution)
    B, G = np.meshgrid(betas, gammas, indexing="ij")
    sb = np.sin(B)
    dirs = np.stack([sb * np.cos(G), sb * np.sin(G), np.cos(B)], axis=-1).reshape(-1, 3)
    values = objective.many(dirs).reshape(resolution, resolution)
    return betas, gammas, values


def _select(candidates: List[Tuple[float, float, float]], best: float):
    """Lexicographically smallest near-optimal candidate, plus the tie set."""
    reps = [(b, g) for b, g, k in candidates if k >= best - REPRESENTATIVE_TOL]
    rep = TwoOutcomeObservable(*min(reps))
    ties = sorted({(b, g) for b, g, k in candidates if k >= best - TIE_TOL})
    return rep, tuple(TwoOutcomeObservable(b, g) for b, g in ties)


def optimize_grid(cfg2d: BeamDetectorConfig, resolution: int = 256) -> OptimizationResult:
    """Exhaustive scan of ``resolution x resolution`` observables.

    The polar grid is ``pi*k/resolution`` and the azimuthal grid
    ``2*pi*j/resolution``; the omitted ``beta = pi`` row duplicates ``beta = 0``
    up to outcome relabeling.
    """
    if resolution < 16:
        raise ValidationError("grid resolution must be at least 16")
    objective = _BlochObjective(cfg2d)
    betas, gammas, values = _grid_values(objective, resolution)
    best = float(values.max())
    idx = np.argwhere(values >= best - TIE_TOL)
    candidates = [
        canonical_angles(float(betas[i]), float(gammas[j])) + (float(values[i, j]),)
        for i, j in idx
    ]
    rep, ties = _select(candidates, best)
    return OptimizationResult(
        best_K=best,
        best_observable=rep,
        method="grid",
        grid_resolution=resolution,
        tie_set=ties,
    )


def golden_max(f: Callable[[float], float], a: float, b: float, xtol: float = GOLDEN_XTOL):
    """Golden-section search for a maximum of ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _seeds(betas, gammas, values, limit: int):
    padded = np.pad(values, ((1, 1), (0, 0)), constant_values=-np.inf)
    padded = np.concatenate([padded[:, -1:], padded, padded[:, :1]], axis=1)
    core = padded[1:-1, 1:-1]
    is_peak = np.ones_like(values, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = padded[1 + di : padded.shape[0] - 1 + di, 1 + dj : padded.shape[1] - 1 + dj]
            is_peak &= core >= shifted
    peaks = np.argwhere(is_peak)
    order = sorted(range(len(peaks)), key=lambda k: (-values[tuple(peaks[k])], k))
    return [
        (float(betas[peaks[k][0]]), float(gammas[peaks[k][1]]), float(values[tuple(peaks[k])]))
        for k in order[:limit]
    ]


def _refine(objective, beta, gamma, k, h_beta, h_gamma, tol):
    for cycle in range(1, MAX_CYCLES + 1):
        start = k
        x, fx = golden_max(lambda b: objective(b, gamma), beta - h_beta, beta + h_beta)
        if fx > k:
            beta, k = x, fx
        x, fx = golden_max(lambda g: objective(beta, g), gamma - h_gamma, gamma + h_gamma)
        if fx > k:
            gamma, k = x, fx
        if k - start < tol:
            return beta, gamma, k, True, cycle
    return beta, gamma, k, False, MAX_CYCLES


def optimize_refined(cfg2d: BeamDetectorConfig, tol: float = 1e-12) -> OptimizationResult:
    """Grid seed followed by alternating golden-section refinement of beta and gamma.

    Each of the best few grid peaks is refined until a full beta/gamma cycle
    improves K by less than ``tol`` (at most ``MAX_CYCLES`` cycles; the
    ``converged`` flag records whether that happened).
    """
    if not tol >= 1e-12:
        raise ValidationError("tol must be at least 1e-12")
    objective = _BlochObjective(cfg2d)
    betas, gammas, values = _grid_values(objective, SEED_RESOLUTION)
    h_beta = math.pi / SEED_RESOLUTION
    h_gamma = TWO_PI / SEED_RESOLUTION

    candidates = []
    grid_best = float(values.max())
    for i, j in np.argwhere(values >= grid_best - TIE_TOL):
        candidates.append(
            canonical_angles(float(betas[i]), float(gammas[j])) + (float(values[i, j]),)
        )

    converged = True
    cycles = 0
    for beta, gamma, k in _seeds(betas, gammas, values, MAX_SEEDS):
        b, g, kr, ok, nc = _refine(objective, beta, gamma, k, h_beta, h_gamma, tol)
        converged &= ok
        cycles = max(cycles, nc)
        candidates.append(canonical_angles(b, g) + (kr,))

    best = max(k for _, _, k in candidates)
    rep, ties = _select(candidates, best)
    return OptimizationResult(
        best_K=best,
        best_observable=rep,
        method="refined",
        grid_resolution=SEED_RESOLUTION,
        tie_set=ties,
        converged=converged,
        cycles=cycles,
    )


def duality_report(cfg: BeamDetectorConfig, tol: float = 1e-12) -> DualityReport:
    """V and P for any config; D (and its optimal observable) when d=2."""
    V = visibility(cfg)
    P = predictability(cfg.populations)
    if cfg.dim != 2:
        return DualityReport(V=V, P=P)
    result = optimize_refined(cfg, tol)
    return DualityReport(V=V, P=P, D=result.best_K, extra={"optimization": result})
