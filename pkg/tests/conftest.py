"""Shared fixtures and brute-force oracles.

The oracles materialize the joint beam/detector vector
``sum_i sqrt(zeta_i) |i> (x) |chi_i>`` and work from it directly, so they
share no code path with the library's factored formulas.
"""

import math

import numpy as np
import pytest

from multibeam_duality.qcore import BeamDetectorConfig, PopulationVector


def joint_vector(cfg: BeamDetectorConfig) -> np.ndarray:
    n, d = cfg.n, cfg.dim
    psi = np.zeros(n * d, dtype=complex)
    for i, (z, s) in enumerate(zip(cfg.populations.zeta, cfg.detector_states)):
        beam = np.zeros(n)
        beam[i] = 1.0
        psi += math.sqrt(z) * np.kron(beam, s.vector)
    return psi


def oracle_beam_density(cfg: BeamDetectorConfig) -> np.ndarray:
    """Partial trace over the detector of the joint pure state."""
    n, d = cfg.n, cfg.dim
    psi = joint_vector(cfg).reshape(n, d)
    return psi @ psi.conj().T


def oracle_joint_probs(cfg: BeamDetectorConfig, projectors) -> np.ndarray:
    """``P[i, l] = <Psi| (|i><i| (x) Pi_l) |Psi>``."""
    n = cfg.n
    psi = joint_vector(cfg)
    out = np.zeros((n, len(projectors)))
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        for l, p in enumerate(projectors):
            out[i, l] = np.vdot(psi, np.kron(e, p) @ psi).real
    return out


def oracle_knowledge(cfg: BeamDetectorConfig, projectors) -> float:
    """K(W) straight from the definition: weighted mean of posterior predictabilities."""
    joint = oracle_joint_probs(cfg, projectors)
    n = cfg.n
    total = 0.0
    for l in range(joint.shape[1]):
        p = joint[:, l].sum()
        if p < 1e-14:
            continue
        post = joint[:, l] / p
        total += p * math.sqrt(n / (n - 1) * sum((x - 1.0 / n) ** 2 for x in post))
    return total


def oracle_visibility(cfg: BeamDetectorConfig) -> float:
    rho = oracle_beam_density(cfg)
    n = cfg.n
    off = sum(abs(rho[i, j]) ** 2 for i in range(n) for j in range(n) if i != j)
    return math.sqrt(n / (n - 1) * off)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def uniform3():
    return PopulationVector.uniform(3)
