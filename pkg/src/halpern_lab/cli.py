"""Command-line experiment runner.

Exit codes: 0 converged / no violations, 1 error, 2 iteration or oracle
budget exhausted, 3 hypothesis violations found by ``validate``.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .diagnostics import regime_report
from .errors import ConfigurationError, ContractViolation, NumericFailure, SamplingFailure
from .hilbert import as_vector, to_list
from .iterations import AnchorSequence, IterationConfig, run_iteration
from .operators import OperatorSpec
from .oracle import DEFAULT_MAX_ITER, DEFAULT_TOL, dykstra_project
from .schedules import REGIMES, Schedule, validate_regime
from .sets import ConvexSetSpec

EXIT_OK, EXIT_ERROR, EXIT_BUDGET, EXIT_VIOLATIONS = 0, 1, 2, 3

KEYS = {
    "mode", "dimension", "u", "x1", "T", "S", "alpha", "beta", "anchor_sequence",
    "max_iter", "stop_tol", "trace_stride", "targets", "output_prefix", "regime", "witness",
}
REQUIRED = ("mode", "dimension", "u", "x1", "alpha")

# which candidate limit each regime converges to
REGIME_TARGET = {"regime1": "PT", "halpern": "PT", "regime2": "PS", "anchored": "PS", "regime3": "PF"}
DEFAULT_REGIME = {"halpern": "halpern", "anchored_variable": "anchored"}


@dataclass
class Experiment:
    config: IterationConfig
    regime: str
    targets: object
    output_prefix: str


def _parse(key, fn, value):
    try:
        return fn(value)
    except ConfigurationError:
        raise
    except (ContractViolation, TypeError, ValueError, KeyError) as exc:
        raise ConfigurationError(f"{key}: {exc}", key=key) from None


def _vector(dim):
    def parse(value):
        v = as_vector(value)
        if v.size != dim:
            raise ValueError(f"expected {dim} components, got {v.size}")
        return v

    return parse


def parse_experiment(data, max_iter=None, stop_tol=None):
    """Turn an experiment JSON object into an :class:`Experiment`.

    Raises
    ------
    ConfigurationError
        Naming the offending key.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("experiment file must hold a JSON object")
    unknown = sorted(set(data) - KEYS)
    if unknown:
        raise ConfigurationError(f"unknown key {unknown[0]!r}", key=unknown[0])
    for key in REQUIRED:
        if key not in data:
            raise ConfigurationError(f"missing required key {key!r}", key=key)

    dim = data["dimension"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ConfigurationError("dimension must be a positive integer", key="dimension")
    vec = _vector(dim)
    kw = {"mode": data["mode"]}
    for key in ("u", "x1", "witness"):
        if key in data:
            kw[key] = _parse(key, vec, data[key])
    for key in ("T", "S"):
        if key in data:
            kw[key] = _parse(key, OperatorSpec.from_dict, data[key])
    for key in ("alpha", "beta"):
        if key in data:
            kw[key] = _parse(key, Schedule.from_dict, data[key])
    if "anchor_sequence" in data:
        a = data["anchor_sequence"]
        kw["anchor_sequence"] = _parse(
            "anchor_sequence", lambda a: AnchorSequence(vec(a["direction"]), float(a.get("q", 1.0))), a
        )
    for key in ("max_iter", "trace_stride"):
        if key in data:
            v = data[key]
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigurationError(f"{key} must be an integer", key=key)
            kw[key] = v
    if "stop_tol" in data:
        kw["stop_tol"] = _parse("stop_tol", float, data["stop_tol"])
    if max_iter is not None:
        kw["max_iter"] = max_iter
    if stop_tol is not None:
        kw["stop_tol"] = stop_tol

    regime = data.get("regime", DEFAULT_REGIME.get(data["mode"]))
    if regime is not None and regime not in REGIMES:
        raise ConfigurationError(f"unknown regime {regime!r}", key="regime")

    targets = data.get("targets")
    if targets is not None and targets != "oracle":
        if not isinstance(targets, dict) or not set(targets) <= {"PT", "PS", "PF"}:
            raise ConfigurationError('targets must be "oracle" or an object with keys PT, PS, PF', key="targets")
        targets = {k: _parse("targets", vec, v) for k, v in targets.items()}

    config = IterationConfig(**kw)
    prefix = data.get("output_prefix", "experiment")
    if not isinstance(prefix, str) or not prefix:
        raise ConfigurationError("output_prefix must be a nonempty string", key="output_prefix")
    return Experiment(config, regime, targets, prefix)


def resolve_targets(exp):
    """Candidate limits PT, PS, PF, computing them with the oracle if asked."""
    if exp.targets is None:
        return {}
    if exp.targets != "oracle":
        return dict(exp.targets)
    cfg = exp.config
    d = cfg.dim
    out = {}
    if cfg.T is not None:
        out["PT"] = cfg.T.fixed_set(d).project(cfg.u)
    if cfg.S is not None:
        out["PS"] = cfg.S.fixed_set(d).project(cfg.u)
    if cfg.T is not None and cfg.S is not None:
        res = dykstra_project([cfg.T.fixed_set(d), cfg.S.fixed_set(d)], cfg.u)
        if not res.converged:
            raise ConfigurationError("oracle did not converge on the common fixed set", key="targets")
        out["PF"] = res.point
    return out


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from None


def _dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def run_command(path, max_iter=None, stop_tol=None):
    """Execute an experiment file and write its trace, summary and regime report.

    Output paths are ``<prefix>.trace.csv``, ``<prefix>.summary.json`` and
    ``<prefix>.regime.json``; a relative prefix is taken relative to the
    experiment file.
    """
    try:
        exp = parse_experiment(_load(path), max_iter=max_iter, stop_tol=stop_tol)
        targets = resolve_targets(exp)
    except (ConfigurationError, ContractViolation, SamplingFailure) as exc:
        return _fail(str(exc))
    cfg = exp.config
    key = REGIME_TARGET.get(exp.regime)
    if key in targets:
        cfg.known_target = targets[key]
    try:
        trace = run_iteration(cfg)
    except NumericFailure as exc:
        print(json.dumps({"error": str(exc), "n": exc.n, "last_finite_iterate": to_list(exc.last_point)}), file=sys.stderr)
        return EXIT_ERROR
    except ContractViolation as exc:
        return _fail(str(exc))

    prefix = exp.output_prefix
    if not os.path.isabs(prefix):
        prefix = os.path.join(os.path.dirname(os.path.abspath(path)), prefix)
    with open(prefix + ".trace.csv", "w", encoding="utf-8", newline="") as fh:
        trace.write_csv(fh)
    summary = trace.summary()
    _dump(summary, prefix + ".summary.json")
    if {"PT", "PS", "PF"} <= set(targets):
        report = regime_report(trace, targets["PT"], targets["PS"], targets["PF"], cfg.stop_tol)
        _dump(report.to_dict(), prefix + ".regime.json")
        summary = {**summary, "verdict": report.verdict}
    print(json.dumps(summary))
    return EXIT_OK if trace.converged else EXIT_BUDGET


def validate_command(path):
    """Print the step-size hypothesis report for an experiment file."""
    try:
        exp = parse_experiment(_load(path))
        if exp.regime is None:
            raise ConfigurationError("validate needs a 'regime' for this mode", key="regime")
        report = validate_regime(exp.regime, exp.config.alpha, exp.config.beta)
    except ContractViolation as exc:
        return _fail(str(exc))
    print(json.dumps(report.to_dict(), ensure_ascii=False))
    return EXIT_OK if report.valid else EXIT_VIOLATIONS


def oracle_command(sets, u, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Project ``u`` onto an intersection given as inline JSON or a file path."""
    try:
        data = _load(sets) if os.path.exists(sets) else json.loads(sets)
        if isinstance(data, dict):
            data = [data]
        specs = [ConvexSetSpec.from_dict(d) for d in data]
        point = as_vector([float(c) for c in u.split(",")], "u")
        result = dykstra_project(specs, point, tol=tol, max_iter=max_iter)
    except json.JSONDecodeError as exc:
        return _fail(f"--sets is neither a file nor valid JSON: {exc}")
    except (ConfigurationError, ContractViolation, SamplingFailure, ValueError) as exc:
        return _fail(str(exc))
    print(json.dumps(result.to_dict()))
    return EXIT_OK if result.converged else EXIT_BUDGET


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="halpern-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run an experiment file")
    p.add_argument("file")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float, help="override stop_tol")

    p = sub.add_parser("validate", help="check step-size hypotheses of an experiment file")
    p.add_argument("file")

    p = sub.add_parser("oracle", help="project a point onto an intersection of sets")
    p.add_argument("--sets", required=True, help="JSON list of sets, or a path to one")
    p.add_argument("--u", required=True, help="comma-separated coordinates")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args.file, max_iter=args.max_iter, stop_tol=args.tol)
    if args.command == "validate":
        return validate_command(args.file)
    return oracle_command(args.sets, args.u, tol=args.tol, max_iter=args.max_iter)


if __name__ == "__main__":
    sys.exit(main())
