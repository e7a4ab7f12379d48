"""Complex-vector kernel: detector states, Bloch vectors and the beam density.

The joint beam/detector state produced when a detector tags each beam ``i``
with a state ``|chi_i>`` is rank one, so it is never built explicitly.  A
:class:`BeamDetectorConfig` (populations plus detector states) carries all of
its information, and :func:`reduced_beam_density` gives the beam state left
after the detector is traced out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-9
IDENTITY_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class ValidationError(ValueError):
    """Raised when an input violates a domain invariant."""


class DimensionError(ValidationError):
    """Raised on incompatible or unsupported Hilbert-space dimensions."""


@dataclass(frozen=True)
class DetectorState:
    """Pure detector state, stored with exactly unit norm.

    Inputs within ``NORM_TOL`` of unit norm are accepted and renormalized so
    that downstream identities hold to double precision.
    """

    amplitudes: tuple

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size < 1:
            raise DimensionError("detector state needs at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("detector amplitudes must be finite")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"detector state norm {norm!r} is not 1")
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in amps / norm))

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    @classmethod
    def from_unnormalized(cls, amplitudes: Sequence[complex]) -> "DetectorState":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(tuple(amps / norm))


@dataclass(frozen=True)
class BlochVector:
    """Unit three-vector labelling a ray of a two-dimensional Hilbert space."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        v = np.array([self.nx, self.ny, self.nz], dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValidationError("Bloch vector components must be finite")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"Bloch vector norm {norm!r} is not 1")
        v = v / norm
        object.__setattr__(self, "nx", float(v[0]))
        object.__setattr__(self, "ny", float(v[1]))
        object.__setattr__(self, "nz", float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])

    def dot(self, other: "BlochVector") -> float:
        return self.nx * other.nx + self.ny * other.ny + self.nz * other.nz


@dataclass(frozen=True)
class PopulationVector:
    """Beam populations: a probability vector over the beams."""

    zeta: tuple

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=float).ravel()
        if z.size < 1:
            raise ValidationError("population vector is empty")
        if not np.all(np.isfinite(z)):
            raise ValidationError("populations must be finite")
        if np.any(z < -NORM_TOL) or np.any(z > 1 + NORM_TOL):
            raise ValidationError("populations must lie in [0, 1]")
        total = float(z.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"populations sum to {total!r}, not 1")
        z = np.clip(z, 0.0, None)
        object.__setattr__(self, "zeta", tuple(float(x) for x in z / z.sum()))

    @property
    def n(self) -> int:
        return len(self.zeta)

    def as_array(self) -> np.ndarray:
        return np.array(self.zeta)

    @classmethod
    def uniform(cls, n: int) -> "PopulationVector":
        return cls((1.0 / n,) * n)


@dataclass(frozen=True)
class BeamDetectorConfig:
    """n coherent beams, each tagged by its own detector state."""

    populations: PopulationVector
    detector_states: tuple

    def __post_init__(self):
        if not isinstance(self.populations, PopulationVector):
            object.__setattr__(self, "populations", PopulationVector(tuple(self.populations)))
        states = tuple(
            s if isinstance(s, DetectorState) else DetectorState(tuple(s))
            for s in self.detector_states
        )
        if len(states) != self.populations.n:
            raise ValidationError(
                f"{len(states)} detector states given for {self.populations.n} beams"
            )
        if len({s.dim for s in states}) != 1:
            raise DimensionError("all detector states must share one dimension")
        object.__setattr__(self, "detector_states", states)

    @property
    def n(self) -> int:
        return self.populations.n

    @property
    def dim(self) -> int:
        return self.detector_states[0].dim

    def amplitude_matrix(self) -> np.ndarray:
        """Rows are the detector states, shape ``(n, d)``."""
        return np.array([s.amplitudes for s in self.detector_states], dtype=complex)

    def bloch_vectors(self) -> np.ndarray:
        """Bloch vectors of the detector states as an ``(n, 3)`` array (d=2 only)."""
        return np.array([state_to_bloch(s).as_array() for s in self.detector_states])

    @classmethod
    def from_bloch(cls, populations, vectors) -> "BeamDetectorConfig":
        states = tuple(bloch_to_state(v) for v in vectors)
        return cls(populations, states)


BlochLike = Union[BlochVector, Sequence[float]]


def _as_bloch(v: BlochLike) -> BlochVector:
    if isinstance(v, BlochVector):
        return v
    x, y, z = (float(c) for c in v)
    return BlochVector(x, y, z)


def bloch_to_state(v: BlochLike) -> DetectorState:
    """Qubit state whose projector is ``(1 + v.sigma)/2``.

    The global phase makes the first nonzero amplitude real and non-negative.
    """
    v = _as_bloch(v)
    x, y, z = v.nx, v.ny, v.nz
    # pick the numerically larger component as pivot
    if z >= 0.0:
        a = math.sqrt((1.0 + z) / 2.0)
        b = complex(x, y) / (2.0 * a)
        amps = (complex(a), b)
    else:
        b = math.sqrt((1.0 - z) / 2.0)
        a = complex(x, -y) / (2.0 * b)
        if abs(a) > 0.0:
            phase = a.conjugate() / abs(a)
            amps = (complex(abs(a)), b * phase)
        else:
            amps = (0j, complex(b))
    return DetectorState(amps)


def state_to_bloch(s: DetectorState) -> BlochVector:
    if s.dim != 2:
        raise DimensionError(f"Bloch vectors need a 2-dimensional state, got d={s.dim}")
    a, b = s.amplitudes
    c = b * a.conjugate()
    return BlochVector(2.0 * c.real, 2.0 * c.imag, abs(a) ** 2 - abs(b) ** 2)


def projector(s: DetectorState) -> np.ndarray:
    v = s.vector
    return np.outer(v, v.conj())


def bloch_projector(m: BlochLike, sign: int = 1) -> np.ndarray:
    """``(1 + sign * m.sigma)/2`` as a 2x2 matrix."""
    m = _as_bloch(m)
    ms = m.nx * SIGMA_X + m.ny * SIGMA_Y + m.nz * SIGMA_Z
    return 0.5 * (np.eye(2, dtype=complex) + sign * ms)


def overlap_sq(a: DetectorState, b: DetectorState) -> float:
    """``|<a|b>|**2``."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    value = abs(np.vdot(a.vector, b.vector)) ** 2
    return float(min(max(value, 0.0), 1.0))


def gram_matrix(states: Sequence[DetectorState]) -> np.ndarray:
    """``G[i, j] = <chi_i|chi_j>``."""
    X = np.array([s.amplitudes for s in states], dtype=complex)
    return X.conj() @ X.T


def reduced_beam_density(cfg: BeamDetectorConfig) -> np.ndarray:
    """Beam density matrix after tracing out the detector.

    ``rho[i, j] = sqrt(zeta_i zeta_j) <chi_j|chi_i>``.  The result is made
    exactly Hermitian.
    """
    s = np.sqrt(cfg.populations.as_array())
    X = cfg.amplitude_matrix()
    rho = (s[:, None] * s[None, :]) * (X @ X.conj().T)
    return 0.5 * (rho + rho.conj().T)
