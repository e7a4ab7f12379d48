"""Command-line front end: ``sweep``, ``eval``, ``optimize`` and ``check``.

Exit codes: 0 success, 1 property check failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, coplanar
from .distinguishability import (
    TwoOutcomeObservable,
    observable_to_measurement,
    optimize_refined,
)
from .measures import Measurement, predictability, visibility, which_way_knowledge
from .properties import PROPERTIES, run_suite
from .qcore import (
    BeamDetectorConfig,
    DetectorState,
    PopulationVector,
    ValidationError,
    bloch_to_state,
)
from .svg import sweep_svg

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CSV_HEADER = "theta,V,D,D2V2,branch,beta_opt,gamma_opt"
COPLANAR_TOL = 1e-9

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:e[+-]?\d+)?"
_PI_RE = re.compile(rf"^([+-]?(?:{_NUM})?)\*?pi(?:/({_NUM}))?$")
_PLAIN_RE = re.compile(rf"^([+-]?{_NUM})(?:/({_NUM}))?$")


class UsageError(Exception):
    pass


def parse_angle(text) -> float:
    """Radians, with optional ``pi`` literal: ``pi``, ``2pi/3``, ``-0.5*pi``, ``1.2``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip().lower().replace(" ", "").replace("π", "pi")
    m = _PI_RE.match(s)
    if m:
        coef = m.group(1)
        c = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        value = (c if c is not None else float(coef)) * math.pi
    else:
        m = _PLAIN_RE.match(s)
        if not m:
            raise ValueError(f"not an angle: {text!r}")
        value = float(m.group(1))
    if m.group(2):
        den = float(m.group(2))
        if den == 0.0:
            raise ValueError(f"zero denominator in {text!r}")
        value /= den
    return value


def _angle_arg(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def fmt_short(x: float) -> str:
    return format(float(x), ".15g")


# -- config files -------------------------------------------------------------

class ConfigError(Exception):
    def __init__(self, message: str, line: int = 1):
        super().__init__(message)
        self.line = line


def _line_of(text: str, key: str) -> int:
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 1


def _complex_list(raw, where: str):
    try:
        return [complex(float(re_), float(im)) for re_, im in raw]
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a list of [re, im] pairs") from None


def parse_config(text: str):
    """Parse a JSON config into ``(config, measurement or None)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")

    def need(key):
        if key not in doc:
            raise ConfigError(f"missing field {key!r}")
        return doc[key]

    n = need("n_beams")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError("n_beams must be an integer >= 2", _line_of(text, "n_beams"))
    pops_raw = need("populations")
    try:
        if len(pops_raw) != n:
            raise ValidationError(f"expected {n} populations, got {len(pops_raw)}")
        pops = PopulationVector(tuple(float(p) for p in pops_raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"populations: {exc}", _line_of(text, "populations")) from None

    det = need("detector")
    line = _line_of(text, "detector")
    try:
        if not isinstance(det, dict):
            raise ValidationError("detector must be an object")
        if "bloch_vectors" in det:
            line = _line_of(text, "bloch_vectors")
            states = tuple(bloch_to_state([float(c) for c in v]) for v in det["bloch_vectors"])
        elif "amplitudes" in det:
            line = _line_of(text, "amplitudes")
            states = tuple(
                DetectorState(tuple(_complex_list(s, "amplitudes"))) for s in det["amplitudes"]
            )
        else:
            raise ValidationError("detector needs 'bloch_vectors' or 'amplitudes'")
        cfg = BeamDetectorConfig(pops, states)
    except ConfigError as exc:
        raise ConfigError(str(exc), line) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"detector: {exc}", line) from None

    meas = None
    if "measurement" in doc:
        raw = doc["measurement"]
        line = _line_of(text, "measurement")
        try:
            if isinstance(raw, dict) and "beta" in raw:
                obs = TwoOutcomeObservable.from_angles(
                    parse_angle(raw["beta"]), parse_angle(raw.get("gamma", 0.0))
                )
                meas = observable_to_measurement(obs)
            elif isinstance(raw, dict) and "projectors" in raw:
                projs = [
                    np.array([_complex_list(row, "projectors") for row in p])
                    for p in raw["projectors"]
                ]
                meas = Measurement(tuple(projs), tuple(raw.get("labels", ())))
            else:
                raise ValidationError("measurement needs {beta, gamma} or 'projectors'")
            if meas.dim != cfg.dim:
                raise ValidationError(f"measurement dimension {meas.dim} != detector {cfg.dim}")
        except ConfigError as exc:
            raise ConfigError(str(exc), line) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"measurement: {exc}", line) from None
    return cfg, meas


def _load_config(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise UsageError(f"{path}:{exc.line}: {exc}") from None


def recognize_coplanar(cfg: BeamDetectorConfig) -> Optional[float]:
    """Theta if ``cfg`` is the three-beam coplanar family (in either +- order)."""
    if cfg.n != 3 or cfg.dim != 2:
        return None
    if max(abs(z - 1.0 / 3.0) for z in cfg.populations.zeta) > COPLANAR_TOL:
        return None
    v = cfg.bloch_vectors()
    theta = math.atan2(abs(v[1][0]), v[1][2])
    fam = [b.as_array() for b in coplanar.CoplanarFamily(theta).bloch_vectors()]
    for order in ((0, 1, 2), (0, 2, 1)):
        if all(np.max(np.abs(v[k] - fam[o])) <= COPLANAR_TOL for k, o in enumerate(order)):
            return theta
    return None


def _branch_matches(branch: coplanar.Branch, obs: TwoOutcomeObservable) -> bool:
    in_plane = abs(math.sin(obs.gamma)) <= 1e-6 or math.sin(obs.beta) <= 1e-6
    along_x = abs(obs.beta - math.pi / 2) <= 1e-6 and in_plane
    along_z = math.sin(obs.beta) <= 1e-6
    if branch is coplanar.Branch.SIGMA_X:
        return along_x
    if branch is coplanar.Branch.SIGMA_Z:
        return along_z
    return in_plane


# -- commands -----------------------------------------------------------------

def sweep_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(
            ",".join(
                [fmt(r.theta), fmt(r.V), fmt(r.D), fmt(r.sum_sq), str(r.branch),
                 fmt(r.beta_opt), fmt(r.gamma_opt)]
            )
            + "\n"
        )
    return buf.getvalue()


def _write(path: str, content: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
    except OSError as exc:
        raise UsageError(f"{path}: cannot write: {exc.strerror}") from None


def _manifest(argv, digest_source: str, seed, outputs: List[str]) -> dict:
    return {
        "command": list(argv),
        "config_digest": hashlib.sha256(digest_source.encode("utf-8")).hexdigest(),
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }


def cmd_sweep(args, argv, out) -> int:
    try:
        rows = coplanar.sweep(args.min, args.max, args.steps, validate=args.validate)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    csv_text = sweep_csv(rows)
    outputs = []
    if args.csv:
        _write(args.csv, csv_text)
        outputs.append(args.csv)
    if args.svg:
        _write(args.svg, sweep_svg(rows))
        outputs.append(args.svg)
    if not outputs:
        out.write(csv_text)
        return EXIT_OK
    if not args.no_manifest:
        target = args.manifest or str(Path(outputs[0]).with_suffix(".manifest.json"))
        source = json.dumps(
            {"min": args.min, "max": args.max, "steps": args.steps, "validate": args.validate},
            sort_keys=True,
        )
        _write(target, json.dumps(_manifest(argv, source, args.seed, outputs), indent=2) + "\n")
    return EXIT_OK


def cmd_eval(args, argv, out) -> int:
    cfg, meas = _load_config(args.config)
    V = visibility(cfg)
    P = predictability(cfg.populations)
    lines = [
        ("n_beams", cfg.n),
        ("dim", cfg.dim),
        ("V", fmt_short(V)),
        ("P", fmt_short(P)),
        ("P2V2", fmt_short(P * P + V * V)),
    ]
    if cfg.dim == 2:
        res = optimize_refined(cfg, args.tol)
        lines += [
            ("D", fmt_short(res.best_K)),
            ("beta", fmt_short(res.best_observable.beta)),
            ("gamma", fmt_short(res.best_observable.gamma)),
            ("D2V2", fmt_short(res.best_K ** 2 + V * V)),
        ]
    if meas is not None:
        rep = which_way_knowledge(cfg, meas)
        lines.append(("K", fmt_short(rep.total)))
        for label, pl, kl in zip(rep.labels, rep.outcome_probs, rep.partial_knowledge):
            lines.append((f"p[{label}]", fmt_short(pl)))
            lines.append((f"K[{label}]", fmt_short(kl)))
        if rep.dropped:
            lines.append(("dropped", ",".join(rep.dropped)))
    for key, value in lines:
        out.write(f"{key}={value}\n")
    return EXIT_OK


def cmd_optimize(args, argv, out) -> int:
    cfg, _ = _load_config(args.config)
    if cfg.dim != 2:
        raise UsageError(
            f"{args.config}: optimization needs a 2-dimensional detector, got d={cfg.dim}"
        )
    try:
        res = optimize_refined(cfg, args.tol)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    obs = res.best_observable
    lines = [
        ("best_K", fmt_short(res.best_K)),
        ("beta", fmt_short(obs.beta)),
        ("gamma", fmt_short(obs.gamma)),
        ("tie_set_size", len(res.tie_set)),
        ("converged", str(res.converged).lower()),
        ("cycles", res.cycles),
    ]
    theta = recognize_coplanar(cfg)
    if theta is not None:
        D, branch = coplanar.closed_distinguishability(theta)
        lines += [
            ("coplanar_theta", fmt_short(theta)),
            ("closed_D", fmt_short(D)),
            ("closed_branch", str(branch)),
            ("branch_match", str(_branch_matches(branch, obs)).lower()),
        ]
    for key, value in lines:
        out.write(f"{key}={value}\n")
    return EXIT_OK


def cmd_check(args, argv, out) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    unknown = sorted(set(args.property or ()) - set(PROPERTIES))
    if unknown:
        raise UsageError(f"unknown property: {', '.join(unknown)}")
    results = run_suite(args.seed, args.trials, args.property or None)
    failed = False
    for res in results:
        status = "ok" if res.ok else "FAIL"
        out.write(f"{res.name}: {res.passed}/{res.trials} {status}\n")
        if not res.ok:
            failed = True
            for f in res.failures[:5]:
                out.write("  failing input: " + json.dumps(f, sort_keys=True) + "\n")
    out.write(f"seed={args.seed}\n")
    out.write(f"status={'fail' if failed else 'pass'}\n")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multibeam-duality",
        description="Visibility, which-way knowledge and distinguishability for multibeam interferometers.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("sweep", help="theta sweep of the three-beam coplanar example")
    s.add_argument("--min", type=_angle_arg, default=0.0, help="radians; 'pi' literal allowed")
    s.add_argument("--max", type=_angle_arg, default=math.pi)
    s.add_argument("--steps", type=int, default=coplanar.DEFAULT_STEPS)
    s.add_argument("--csv", help="CSV output path (stdout if neither --csv nor --svg)")
    s.add_argument("--svg", help="SVG chart output path")
    s.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    s.add_argument("--validate", action="store_true",
                   help="cross-check each row against the numeric optimizer")
    s.add_argument("--manifest", help="manifest path (default: next to the first output)")
    s.add_argument("--no-manifest", action="store_true")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="V, P and D for a JSON config")
    e.add_argument("config")
    e.add_argument("--tol", type=float, default=1e-12)
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("optimize", help="optimal two-outcome observable for a d=2 config")
    o.add_argument("config")
    o.add_argument("--tol", type=float, default=1e-12)
    o.set_defaults(func=cmd_optimize)

    c = sub.add_parser("check", help="seeded randomized property suites")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--property", action="append", help="restrict to a named property")
    c.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
