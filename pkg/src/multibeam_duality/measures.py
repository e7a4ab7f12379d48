"""Generalized visibility, predictability and which-way knowledge.

All spreads of the form ``sqrt(n/(n-1) * sum_i (p_i - mean)^2)`` are
evaluated through the equivalent pairwise sum
``sqrt(sum_{i<j} (p_i - p_j)^2 / (n-1))``, which is exactly zero whenever all
entries agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .qcore import (
    NORM_TOL,
    BeamDetectorConfig,
    DimensionError,
    PopulationVector,
    ValidationError,
    reduced_beam_density,
)

ZERO_PROB = 1e-12


def _pairwise_spread(values: Sequence[float]) -> float:
    """``sqrt(n/(n-1) * sum (v_i - mean)^2)`` computed from pairwise gaps."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        raise ValidationError("spread needs at least two entries")
    gaps = v[:, None] - v[None, :]
    total = float(np.sum(np.triu(gaps, 1) ** 2))
    return math.sqrt(total / (n - 1))


@dataclass(frozen=True)
class Measurement:
    """Projective measurement on the detector, one projector per outcome."""

    projectors: tuple
    labels: tuple = ()

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if not projs:
            raise ValidationError("measurement has no outcomes")
        d = projs[0].shape[0]
        eye = np.eye(d)
        for k, p in enumerate(projs):
            if p.shape != (d, d):
                raise DimensionError(f"projector {k} has shape {p.shape}, expected {(d, d)}")
            if np.max(np.abs(p - p.conj().T)) > NORM_TOL:
                raise ValidationError(f"projector {k} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > NORM_TOL:
                raise ValidationError(f"projector {k} is not idempotent")
            for j in range(k):
                if np.max(np.abs(p @ projs[j])) > NORM_TOL:
                    raise ValidationError(f"projectors {j} and {k} are not orthogonal")
        if np.max(np.abs(sum(projs) - eye)) > NORM_TOL:
            raise ValidationError("projectors do not sum to the identity")
        labels = tuple(self.labels) if self.labels else tuple(str(k) for k in range(len(projs)))
        if len(labels) != len(projs):
            raise ValidationError("one label per projector required")
        for p in projs:
            p.setflags(write=False)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True)
class KnowledgeReport:
    """Decomposition of K(W) over the outcomes that can actually occur.

    Outcomes whose probability falls below ``ZERO_PROB`` have no posterior;
    their labels are listed in ``dropped``.
    """

    labels: tuple
    outcome_probs: tuple
    posteriors: tuple
    partial_knowledge: tuple
    total: float
    dropped: tuple = ()


@dataclass(frozen=True)
class DualityReport:
    V: float
    P: float
    D: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def sum_sq(self) -> Optional[float]:
        """D^2 + V^2, or None when D is unavailable."""
        if self.D is None:
            return None
        return self.D * self.D + self.V * self.V

    @property
    def pv_sum_sq(self) -> float:
        return self.P * self.P + self.V * self.V


def visibility(cfg: BeamDetectorConfig) -> float:
    """Normalized rms fringe visibility, from the off-diagonal coherences."""
    n = cfg.n
    if n < 2:
        raise ValidationError("visibility is defined for n >= 2 beams")
    rho = reduced_beam_density(cfg)
    off = np.abs(rho) ** 2
    off_sum = float(off.sum() - np.trace(off).real)
    return min(1.0, math.sqrt(max(0.0, n / (n - 1) * off_sum)))


def predictability(pops: PopulationVector) -> float:
    if not isinstance(pops, PopulationVector):
        pops = PopulationVector(tuple(pops))
    return min(1.0, _pairwise_spread(pops.zeta))


def partial_knowledge(posterior) -> float:
    """Predictability of a sorted subensemble (same formula as P)."""
    return predictability(posterior)


def outcome_likelihoods(cfg: BeamDetectorConfig, meas: Measurement) -> np.ndarray:
    """``q[i, l] = <chi_i|Pi_l|chi_i>``, shape ``(n_beams, n_outcomes)``."""
    if meas.dim != cfg.dim:
        raise DimensionError(
            f"measurement acts on d={meas.dim}, detector states have d={cfg.dim}"
        )
    X = cfg.amplitude_matrix()
    q = np.empty((cfg.n, meas.n_outcomes))
    for l, p in enumerate(meas.projectors):
        q[:, l] = np.einsum("ia,ab,ib->i", X.conj(), p, X).real
    return np.clip(q, 0.0, 1.0)


def bayes_posteriors(pops, q):
    """Outcome probabilities and posteriors over the beams.

    Returns ``(p, posteriors)`` where ``p[l] = sum_i zeta_i q[i, l]`` and
    ``posteriors[l]`` is a :class:`PopulationVector`, or ``None`` for an
    outcome with ``p[l] < ZERO_PROB``.
    """
    if not isinstance(pops, PopulationVector):
        pops = PopulationVector(tuple(pops))
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != pops.n:
        raise DimensionError(f"likelihood matrix shape {q.shape} does not match {pops.n} beams")
    if np.max(np.abs(q.sum(axis=1) - 1.0)) > NORM_TOL:
        raise ValidationError("likelihood rows must sum to 1")
    joint = pops.as_array()[:, None] * q
    p = joint.sum(axis=0)
    posteriors = []
    for l in range(q.shape[1]):
        if p[l] < ZERO_PROB:
            posteriors.append(None)
        else:
            posteriors.append(PopulationVector(tuple(joint[:, l] / p[l])))
    return p, posteriors


def which_way_knowledge(cfg: BeamDetectorConfig, meas: Measurement) -> KnowledgeReport:
    q = outcome_likelihoods(cfg, meas)
    p, posteriors = bayes_posteriors(cfg.populations, q)
    labels, probs, kept, partial, dropped = [], [], [], [], []
    for label, pl, post in zip(meas.labels, p, posteriors):
        if post is None:
            dropped.append(label)
            continue
        labels.append(label)
        probs.append(float(pl))
        kept.append(post)
        partial.append(partial_knowledge(post))
    total = float(sum(pl * kl for pl, kl in zip(probs, partial)))
    return KnowledgeReport(
        labels=tuple(labels),
        outcome_probs=tuple(probs),
        posteriors=tuple(kept),
        partial_knowledge=tuple(partial),
        total=min(1.0, total),
        dropped=tuple(dropped),
    )


def _phase_rows(grid: int, free: int) -> np.ndarray:
    phases = 2.0 * np.pi * np.arange(grid) / grid
    if free == 0:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*([phases] * free), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def fringe_visibility_check(cfg: BeamDetectorConfig, phase_grid_size: int = 32) -> float:
    """Visibility from the rms spread of the fringe intensity over phase settings.

    Beam 0 is held at phase 0 and every other beam runs over a uniform grid
    of ``phase_grid_size`` phases.  Chunks are reduced in a fixed order, so the
    result does not depend on how the grid is partitioned.
    """
    if phase_grid_size < 8:
        raise ValidationError("phase_grid_size must be at least 8")
    n = cfg.n
    if n < 2:
        raise ValidationError("visibility is defined for n >= 2 beams")
    rho = reduced_beam_density(cfg)
    grid = phase_grid_size
    phases = 2.0 * np.pi * np.arange(grid) / grid
    inner = _phase_rows(grid, n - 2)

    def intensities(first_phase: float) -> np.ndarray:
        rows = np.column_stack(
            [np.zeros(len(inner)), np.full(len(inner), first_phase), inner]
        )
        u = np.exp(1j * rows)
        return np.einsum("gi,ij,gj->g", u, rho, u.conj()).real

    count = grid ** (n - 1)
    total = 0.0
    for phi in phases:
        total += float(np.sum(intensities(phi)))
    mean = total / count
    sq = 0.0
    for phi in phases:
        sq += float(np.sum((intensities(phi) - mean) ** 2))
    rms = math.sqrt(sq / count)
    return math.sqrt(n / (n - 1)) * rms / mean
