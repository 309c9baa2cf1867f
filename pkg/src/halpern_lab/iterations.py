"""Anchored iteration steps and the experiment loop.

Modes
-----
``flmr``
    ``x_{n+1} = a_n u + (1 - a_n) (b_n T x_n + (1 - b_n) S x_n)``.
``halpern``
    ``y_{n+1} = a_n u + (1 - a_n) T y_n``.
``anchored_variable``
    ``x_{n+1} = a_n u_n + (1 - a_n) S x_n`` with a moving anchor ``u_n -> u``.
``sequence_mapping``
    ``x_{n+1} = a_n u + (1 - a_n) U_n x_n`` where ``U_n = b_n T + (1 - b_n) S``
    is rebuilt at every step. Arithmetically identical to ``flmr``.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation, NumericFailure
from .hilbert import as_vector, combine, to_list
from .operators import OperatorSpec, apply, convex_combine_op
from .schedules import Schedule

MODES = ("flmr", "halpern", "anchored_variable", "sequence_mapping")

CONVERGED_TARGET = "converged_target"
CONVERGED_RESIDUAL = "converged_residual"
MAX_ITER_REACHED = "max_iter_reached"

RESIDUAL_STREAK = 10


def _unit(value, name, open_left=False):
    value = float(value)
    lo_ok = value > 0.0 if open_left else value >= 0.0
    if not (lo_ok and value <= 1.0):
        interval = "(0, 1]" if open_left else "[0, 1]"
        raise ContractViolation(f"{name} must lie in {interval}, got {value}")
    return value


def flmr_step(u, alpha_n, beta_n, T, S, x):
    """One step of the two-map anchored scheme.

    The inner combination ``beta_n*Tx + (1-beta_n)*Sx`` is formed first, then
    blended with the anchor, so runs are bit-reproducible.
    """
    a = _unit(alpha_n, "alpha_n")
    b = _unit(beta_n, "beta_n")
    return combine(a, u, combine(b, apply(T, x), apply(S, x)))


def halpern_step(u, alpha_n, T, y):
    a = _unit(alpha_n, "alpha_n")
    return combine(a, u, apply(T, y))


def anchored_variable_step(u_n, alpha_n, S, x):
    """``alpha_n * u_n + (1 - alpha_n) * S x``; ``alpha_n`` must be in (0, 1]."""
    a = _unit(alpha_n, "alpha_n", open_left=True)
    return combine(a, u_n, apply(S, x))


def reduce_to_anchored(alpha_n, beta_n, u, z):
    """Rewrite a two-map step as a one-map step with a moving anchor.

    With ``gamma = a + b - a*b`` and ``u_eff = (a*u + (1-a)*b*z) / gamma``,

        gamma*u_eff + (1-gamma)*w == a*u + (1-a)*(b*z + (1-b)*w)

    for every ``w``.

    Returns
    -------
    gamma : float
        In (0, 1].
    u_eff : ndarray
    """
    a = _unit(alpha_n, "alpha_n", open_left=True)
    b = _unit(beta_n, "beta_n")
    u, z = as_vector(u, "u"), as_vector(z, "z")
    if u.shape != z.shape:
        raise ContractViolation("u and z differ in dimension")
    gamma = a + b - a * b
    return gamma, (a * u + ((1.0 - a) * b) * z) / gamma


@dataclass(frozen=True)
class AnchorSequence:
    """Moving anchor ``u_n = u + direction / n**q`` with ``q > 0``."""

    direction: np.ndarray
    q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "direction", as_vector(self.direction, "direction"))
        if not float(self.q) > 0.0:
            raise ConfigurationError(f"anchor exponent q must be positive, got {self.q}", key="anchor_sequence")

    def at(self, u, n):
        return u + self.direction / float(n) ** self.q

    def to_dict(self):
        return {"direction": to_list(self.direction), "q": float(self.q)}


@dataclass
class IterationConfig:
    mode: str
    u: np.ndarray
    x1: np.ndarray
    T: OperatorSpec = None
    S: OperatorSpec = None
    alpha: Schedule = None
    beta: Schedule = None
    anchor_sequence: AnchorSequence = None
    max_iter: int = 500_000
    stop_tol: float = 1e-2
    trace_stride: int = 1
    known_target: np.ndarray = None
    witness: np.ndarray = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; expected one of {MODES}", key="mode")
        self.u = _vec(self.u, "u")
        self.x1 = _vec(self.x1, "x1")
        d = self.u.size
        if self.x1.size != d:
            raise ConfigurationError(f"x1 has dimension {self.x1.size}, u has {d}", key="x1")
        if self.known_target is not None:
            self.known_target = _vec(self.known_target, "known_target", d)
        if self.witness is not None:
            self.witness = _vec(self.witness, "witness", d)
        if self.alpha is None:
            raise ConfigurationError("an alpha schedule is required", key="alpha")

        need_T = self.mode != "anchored_variable"
        need_S = self.mode != "halpern"
        need_beta = self.mode in ("flmr", "sequence_mapping")
        if need_T and self.T is None:
            raise ConfigurationError(f"mode {self.mode} needs T", key="T")
        if need_S and self.S is None:
            raise ConfigurationError(f"mode {self.mode} needs S", key="S")
        if self.mode == "halpern" and self.S is not None:
            raise ConfigurationError("halpern mode takes no S", key="S")
        if need_beta and self.beta is None:
            raise ConfigurationError(f"mode {self.mode} needs a beta schedule", key="beta")
        if not need_beta and self.beta is not None:
            raise ConfigurationError(f"mode {self.mode} takes no beta schedule", key="beta")
        if self.mode == "anchored_variable":
            if self.anchor_sequence is None:
                raise ConfigurationError("anchored_variable mode needs an anchor_sequence", key="anchor_sequence")
            if self.anchor_sequence.direction.size != d:
                raise ConfigurationError("anchor direction dimension mismatch", key="anchor_sequence")
        elif self.anchor_sequence is not None:
            raise ConfigurationError(f"mode {self.mode} takes no anchor_sequence", key="anchor_sequence")
        for name in ("T", "S"):
            op = getattr(self, name)
            if op is not None and op.dim is not None and op.dim != d:
                raise ConfigurationError(f"{name} acts on R^{op.dim} but u is in R^{d}", key=name)
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError("max_iter must be an integer >= 1", key="max_iter")
        self.max_iter = int(self.max_iter)
        if not (math.isfinite(self.stop_tol) and self.stop_tol > 0):
            raise ConfigurationError("stop_tol must be positive", key="stop_tol")
        if int(self.trace_stride) != self.trace_stride or self.trace_stride < 1:
            raise ConfigurationError("trace_stride must be an integer >= 1", key="trace_stride")
        self.trace_stride = int(self.trace_stride)

    @property
    def dim(self):
        return self.u.size


def _vec(x, key, dim=None):
    try:
        v = as_vector(x, key)
    except ContractViolation as exc:
        raise ConfigurationError(str(exc), key=key) from None
    if dim is not None and v.size != dim:
        raise ConfigurationError(f"{key} has dimension {v.size}, expected {dim}", key=key)
    return v


@dataclass(frozen=True)
class TraceRecord:
    n: int
    x: np.ndarray
    residual_T: float = None
    residual_S: float = None
    alpha: float = None
    beta: float = None
    dist_to_target: float = None


@dataclass
class Trace:
    records: list
    final_point: np.ndarray
    status: str
    iterations_run: int
    stride: int = 1
    dim: int = field(init=False)

    def __post_init__(self):
        self.dim = self.final_point.size

    @property
    def converged(self):
        return self.status in (CONVERGED_TARGET, CONVERGED_RESIDUAL)

    def indices(self):
        return [r.n for r in self.records]

    def points(self):
        return np.array([r.x for r in self.records])

    def summary(self):
        return {
            "status": self.status,
            "iterations_run": self.iterations_run,
            "final_point": to_list(self.final_point),
        }

    def csv_header(self):
        return ["n", *(f"x_{i + 1}" for i in range(self.dim)), "residual_T", "residual_S", "alpha", "beta", "dist_to_target"]

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.csv_header())
        for r in self.records:
            w.writerow([r.n, *(repr(float(c)) for c in r.x), *(_cell(v) for v in (r.residual_T, r.residual_S, r.alpha, r.beta, r.dist_to_target))])

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _cell(v):
    return "" if v is None else repr(float(v))


def _dist(a, b):
    d = a - b
    return math.sqrt(float(np.dot(d, d)))


def _find_witness(cfg):
    from .oracle import dykstra_project

    sets = [cfg.T.fixed_set(cfg.dim), cfg.S.fixed_set(cfg.dim)]
    res = dykstra_project(sets, cfg.u, tol=1e-12, max_iter=100_000, probes=0)
    if not all(s.contains(res.point) for s in sets):
        raise ConfigurationError("could not find a common fixed point of T and S; supply a witness", key="witness")
    return res.point


def run_iteration(config):
    """Iterate from ``config.x1`` until a stopping rule fires.

    Stopping rules, checked in this order:

    * ``converged_target``: ``known_target`` is set and ``|x_n - target| < stop_tol``;
    * ``converged_residual``: only without a known target; on 10
      consecutive records every fixed-point residual is below ``stop_tol``,
      and ``alpha_n < stop_tol``;
    * ``max_iter_reached``: ``max_iter`` steps were taken.

    Records are kept at n = 1, 1 + stride, 1 + 2*stride, ... and for the
    final iterate. ``iterations_run`` counts steps taken, so the final
    iterate has index ``iterations_run + 1``.

    Raises
    ------
    NumericFailure
        If an iterate becomes non-finite; carries the last finite iterate.
    """
    cfg = config
    mode = cfg.mode
    u, T, S = cfg.u, cfg.T, cfg.S
    alpha, beta = cfg.alpha, cfg.beta
    target = cfg.known_target
    tol = cfg.stop_tol
    stride = cfg.trace_stride
    witness = None
    if mode == "sequence_mapping":
        witness = cfg.witness if cfg.witness is not None else _find_witness(cfg)

    records = []
    streak = 0
    x = cfg.x1.copy()
    status = MAX_ITER_REACHED
    steps = 0

    def residuals(x, Tx=None, Sx=None):
        rT = rS = None
        if T is not None:
            rT = _dist(x, apply(T, x) if Tx is None else Tx)
        if S is not None:
            rS = _dist(x, apply(S, x) if Sx is None else Sx)
        return rT, rS

    def record(n, x, rT, rS, a, b):
        dist = None if target is None else _dist(x, target)
        records.append(TraceRecord(n, x, rT, rS, a, b, dist))

    if target is not None and _dist(x, target) < tol:
        status = CONVERGED_TARGET
    else:
        for n in range(1, cfg.max_iter + 1):
            a = alpha.value(n)
            b = None if beta is None else beta.value(n)
            Tx = Sx = None
            if mode == "flmr":
                Tx, Sx = apply(T, x), apply(S, x)
                _check_finite(n, x, Tx, Sx)
                nxt = combine(a, u, combine(b, Tx, Sx))
            elif mode == "halpern":
                Tx = apply(T, x)
                _check_finite(n, x, Tx)
                nxt = combine(a, u, Tx)
            elif mode == "anchored_variable":
                if not a > 0.0:
                    raise ContractViolation(f"alpha_{n} = 0 is not allowed with a moving anchor")
                Sx = apply(S, x)
                _check_finite(n, x, Sx)
                nxt = combine(a, cfg.anchor_sequence.at(u, n), Sx)
            else:
                U = convex_combine_op(b, T, S, witness=witness)
                Ux = apply(U, x)
                _check_finite(n, x, Ux)
                nxt = combine(a, u, Ux)

            if (n - 1) % stride == 0:
                rT, rS = residuals(x, Tx, Sx)
                record(n, x, rT, rS, a, b)
                if all(r < tol for r in (rT, rS) if r is not None):
                    streak += 1
                else:
                    streak = 0
                if target is None and streak >= RESIDUAL_STREAK and a < tol:
                    status = CONVERGED_RESIDUAL
                    break

            if not np.isfinite(nxt).all():
                raise NumericFailure(f"non-finite iterate at n = {n + 1}", last_point=x, n=n)
            x = nxt
            steps = n
            if target is not None and _dist(x, target) < tol:
                status = CONVERGED_TARGET
                break

    last_n = steps + 1
    if not records or records[-1].n != last_n:
        rT, rS = residuals(x)
        a = alpha.value(last_n)
        b = None if beta is None else beta.value(last_n)
        record(last_n, x, rT, rS, a, b)
    return Trace(records=records, final_point=x, status=status, iterations_run=steps, stride=stride)


def _check_finite(n, x, *images):
    for img in images:
        if not np.isfinite(img).all():
            raise NumericFailure(f"operator returned a non-finite value at n = {n}", last_point=x, n=n)
