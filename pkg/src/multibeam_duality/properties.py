"""Seeded randomized property suites run by ``multibeam-duality check``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import coplanar
from .distinguishability import TwoOutcomeObservable, knowledge_of, optimize_refined
from .measures import (
    Measurement,
    bayes_posteriors,
    outcome_likelihoods,
    predictability,
    visibility,
    which_way_knowledge,
)
from .qcore import (
    BeamDetectorConfig,
    BlochVector,
    DetectorState,
    PopulationVector,
    bloch_to_state,
    overlap_sq,
    projector,
    reduced_beam_density,
    state_to_bloch,
)

INEQ_TOL = 1e-9
IDENTITY_TOL = 1e-12


# -- random generators --------------------------------------------------------

def random_state(rng: np.random.Generator, d: int) -> DetectorState:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return DetectorState.from_unnormalized(v)


def random_bloch(rng: np.random.Generator) -> BlochVector:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return BlochVector(*v)


def random_populations(rng: np.random.Generator, n: int, uniform: bool = False) -> PopulationVector:
    if uniform:
        return PopulationVector.uniform(n)
    z = rng.dirichlet(np.ones(n))
    return PopulationVector(tuple(z / z.sum()))


def random_config(
    rng: np.random.Generator, n: int, d: int, uniform: bool = False
) -> BeamDetectorConfig:
    states = tuple(random_state(rng, d) for _ in range(n))
    return BeamDetectorConfig(random_populations(rng, n, uniform), states)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_measurement(rng: np.random.Generator, d: int) -> Measurement:
    """Projective measurement with 2..d outcomes built from a random basis."""
    u = random_unitary(rng, d)
    outcomes = int(rng.integers(2, d + 1))
    owner = np.concatenate([np.arange(outcomes), rng.integers(0, outcomes, size=d - outcomes)])
    rng.shuffle(owner)
    projs = []
    for l in range(outcomes):
        cols = u[:, owner == l]
        projs.append(cols @ cols.conj().T)
    return Measurement(tuple(projs))


def config_to_dict(cfg: BeamDetectorConfig) -> dict:
    return {
        "n_beams": cfg.n,
        "populations": list(cfg.populations.zeta),
        "detector": {
            "amplitudes": [[[a.real, a.imag] for a in s.amplitudes] for s in cfg.detector_states]
        },
    }


# -- property definitions -----------------------------------------------------

@dataclass
class PropertyResult:
    name: str
    trials: int = 0
    passed: int = 0
    failures: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials


def _bloch_roundtrip(rng):
    s = random_state(rng, 2)
    back = bloch_to_state(state_to_bloch(s))
    err = float(np.max(np.abs(projector(back) - projector(s))))
    return err <= IDENTITY_TOL, {"state": [[a.real, a.imag] for a in s.amplitudes], "err": err}


def _bloch_overlap(rng):
    u, v = random_bloch(rng), random_bloch(rng)
    lhs = overlap_sq(bloch_to_state(u), bloch_to_state(v))
    err = abs(lhs - (1.0 + u.dot(v)) / 2.0)
    return err <= IDENTITY_TOL, {"u": list(u.as_array()), "v": list(v.as_array()), "err": err}


def _density_valid(rng):
    cfg = random_config(rng, int(rng.integers(2, 6)), int(rng.integers(2, 4)))
    rho = reduced_beam_density(cfg)
    herm = np.array_equal(rho, rho.conj().T)
    tr = abs(np.trace(rho).real - 1.0)
    low = float(np.linalg.eigvalsh(rho).min())
    ok = herm and tr <= IDENTITY_TOL and low >= -INEQ_TOL
    return ok, {"config": config_to_dict(cfg), "trace_err": tr, "min_eig": low}


def _pv_inequality(rng):
    cfg = random_config(rng, int(rng.integers(2, 6)), int(rng.integers(2, 4)))
    V, P = visibility(cfg), predictability(cfg.populations)
    ok = 0.0 <= V <= 1.0 and 0.0 <= P <= 1.0 and P * P + V * V <= 1.0 + INEQ_TOL
    return ok, {"config": config_to_dict(cfg), "V": V, "P": P}


def _pv_equality(rng):
    n = int(rng.integers(2, 6))
    s = random_state(rng, int(rng.integers(2, 4)))
    cfg = BeamDetectorConfig(random_populations(rng, n), (s,) * n)
    V, P = visibility(cfg), predictability(cfg.populations)
    return abs(P * P + V * V - 1.0) <= INEQ_TOL, {"config": config_to_dict(cfg), "V": V, "P": P}


def _knowledge_ge_p(rng):
    d = int(rng.integers(2, 4))
    cfg = random_config(rng, int(rng.integers(2, 6)), d)
    rep = which_way_knowledge(cfg, random_measurement(rng, d))
    P = predictability(cfg.populations)
    ok = rep.total >= P - INEQ_TOL and all(0.0 <= k <= 1.0 for k in rep.partial_knowledge)
    return ok, {"config": config_to_dict(cfg), "K": rep.total, "P": P}


def _bayes_consistency(rng):
    d = int(rng.integers(2, 4))
    cfg = random_config(rng, int(rng.integers(2, 6)), d)
    q = outcome_likelihoods(cfg, random_measurement(rng, d))
    p, posts = bayes_posteriors(cfg.populations, q)
    mix = np.zeros(cfg.n)
    for pl, post in zip(p, posts):
        if post is not None:
            mix += pl * post.as_array()
    err = float(np.max(np.abs(mix - cfg.populations.as_array())))
    return err <= INEQ_TOL and abs(p.sum() - 1.0) <= INEQ_TOL, {"config": config_to_dict(cfg), "err": err}


def _dv_inequality(rng, trial):
    cfg = random_config(rng, int(rng.integers(2, 6)), 2, uniform=trial % 2 == 0)
    V = visibility(cfg)
    D = optimize_refined(cfg).best_K
    ok = 0.0 <= D <= 1.0 and D * D + V * V <= 1.0 + INEQ_TOL
    return ok, {"config": config_to_dict(cfg), "V": V, "D": D}


def _antipodal(rng):
    cfg = random_config(rng, int(rng.integers(2, 6)), 2)
    obs = TwoOutcomeObservable.from_angles(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
    a, b = knowledge_of(cfg, obs), knowledge_of(cfg, obs.antipode())
    return abs(a - b) <= IDENTITY_TOL, {"config": config_to_dict(cfg), "beta": obs.beta, "gamma": obs.gamma}


def _coplanar_agreement(rng):
    theta = float(rng.uniform(0.0, math.pi))
    cfg = coplanar.make_config(theta)
    dv = abs(coplanar.closed_visibility(theta) - visibility(cfg))
    dd = abs(coplanar.closed_distinguishability(theta)[0] - optimize_refined(cfg).best_K)
    return dv < IDENTITY_TOL and dd < 1e-8, {"theta": theta, "dV": dv, "dD": dd}


PROPERTIES: Dict[str, Callable] = {
    "bloch_roundtrip": _bloch_roundtrip,
    "bloch_overlap": _bloch_overlap,
    "density_valid": _density_valid,
    "pv_inequality": _pv_inequality,
    "pv_equality_identical_states": _pv_equality,
    "knowledge_ge_predictability": _knowledge_ge_p,
    "bayes_consistency": _bayes_consistency,
    "dv_inequality": _dv_inequality,
    "antipodal_symmetry": _antipodal,
    "coplanar_closed_vs_numeric": _coplanar_agreement,
}
_NEEDS_TRIAL = {"dv_inequality"}


def run_suite(seed: int, trials: int, names: Optional[List[str]] = None) -> List[PropertyResult]:
    """Run every property ``trials`` times; each property has its own seeded stream."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    names = list(PROPERTIES) if names is None else names
    results = []
    for idx, name in enumerate(names):
        rng = np.random.default_rng([seed, idx])
        check = PROPERTIES[name]
        res = PropertyResult(name)
        for t in range(trials):
            ok, info = check(rng, t) if name in _NEEDS_TRIAL else check(rng)
            res.trials += 1
            if ok:
                res.passed += 1
            else:
                res.failures.append({"trial": t, **info})
        results.append(res)
    return results
