"""Step-size sequences in [0, 1] with analytically declared asymptotics.

No finite computation can certify that a series diverges, so every closed
form kind carries flags derived from its parameters (p-series facts,
telescoping). Explicit ``table`` schedules must supply their flags, which
are then marked as asserted rather than derived. Numeric probes are offered
alongside as advisory evidence only. Indexing starts at n = 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, UsageError

VANISHES = "vanishes"
DIVERGING_SUM = "diverging_sum"
SUMMABLE = "summable"
SUMMABLE_DIFFERENCES = "summable_differences"
STRICTLY_POSITIVE = "strictly_positive"
LIMINF_PRODUCT_POSITIVE = "liminf_product_positive"

FLAGS = frozenset(
    {VANISHES, DIVERGING_SUM, SUMMABLE, SUMMABLE_DIFFERENCES, STRICTLY_POSITIVE, LIMINF_PRODUCT_POSITIVE}
)

KINDS = ("harmonic", "constant", "inverse_square", "one_minus_inverse_square", "table")
REGIMES = ("regime1", "regime2", "regime3", "halpern", "anchored")

RATIO_PROBE_N = 100_000


def _constant_flags(v):
    flags = {SUMMABLE_DIFFERENCES}
    if v > 0.0:
        flags |= {STRICTLY_POSITIVE, DIVERGING_SUM}
    else:
        flags |= {VANISHES, SUMMABLE}
    if 0.0 < v < 1.0:
        flags.add(LIMINF_PRODUCT_POSITIVE)
    return frozenset(flags)


def _table_tail_flags(values):
    """Exact flags of a table whose last entry repeats forever."""
    tail = values[-1]
    flags = set(_constant_flags(tail)) - {STRICTLY_POSITIVE}
    if all(v > 0.0 for v in values):
        flags.add(STRICTLY_POSITIVE)
    return frozenset(flags)


@dataclass(frozen=True)
class Schedule:
    """A sequence ``s(1), s(2), ...`` in [0, 1].

    Construct through the classmethods; ``flags`` are assigned there.
    """

    kind: str
    params: dict = field(default_factory=dict, compare=False)
    flags: frozenset = frozenset()
    asserted: bool = False
    _key: tuple = field(default=(), repr=False)

    # constructors -----------------------------------------------------

    @classmethod
    def harmonic(cls, a=1.0, c=1.0, p=1.0):
        """``min(1, a / (n + c)**p)``."""
        a, c, p = float(a), float(c), float(p)
        if not (a > 0 and c >= 0 and p > 0) or not all(map(math.isfinite, (a, c, p))):
            raise ContractViolation(f"harmonic schedule needs a > 0, c >= 0, p > 0; got a={a}, c={c}, p={p}")
        flags = {VANISHES, STRICTLY_POSITIVE, SUMMABLE_DIFFERENCES}
        flags.add(DIVERGING_SUM if p <= 1.0 else SUMMABLE)
        return cls("harmonic", {"a": a, "c": c, "p": p}, frozenset(flags), False, ("harmonic", a, c, p))

    @classmethod
    def constant(cls, v):
        v = float(v)
        if not 0.0 <= v <= 1.0:
            raise ContractViolation(f"constant schedule value must lie in [0, 1], got {v}")
        return cls("constant", {"v": v}, _constant_flags(v), False, ("constant", v))

    @classmethod
    def inverse_square(cls):
        """``1 / n**2``."""
        flags = frozenset({VANISHES, SUMMABLE, SUMMABLE_DIFFERENCES, STRICTLY_POSITIVE})
        return cls("inverse_square", {}, flags, False, ("inverse_square",))

    @classmethod
    def one_minus_inverse_square(cls):
        """``1 - 1 / n**2``; zero at n = 1."""
        flags = frozenset({DIVERGING_SUM, SUMMABLE_DIFFERENCES})
        return cls("one_minus_inverse_square", {}, flags, False, ("one_minus_inverse_square",))

    @classmethod
    def table(cls, values, flags):
        """Explicit finite list, the last value repeated forever.

        ``flags`` are taken on trust and the schedule is marked asserted.
        """
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ContractViolation("table schedule needs at least one value")
        bad = [v for v in vals if not (0.0 <= v <= 1.0)]
        if bad:
            raise ContractViolation(f"table values must lie in [0, 1], got {bad[0]}")
        flags = frozenset(flags)
        unknown = flags - FLAGS
        if unknown:
            raise ContractViolation(f"unknown schedule flags {sorted(unknown)}")
        return cls("table", {"values": vals}, flags, True, ("table", vals, tuple(sorted(flags))))

    # evaluation -------------------------------------------------------

    def value(self, n):
        """The n-th term, n >= 1."""
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ContractViolation(f"schedule index must be an integer >= 1, got {n!r}")
        n = int(n)
        p = self.params
        if self.kind == "harmonic":
            return min(1.0, p["a"] / (n + p["c"]) ** p["p"])
        if self.kind == "constant":
            return p["v"]
        if self.kind == "inverse_square":
            return 1.0 / (n * n)
        if self.kind == "one_minus_inverse_square":
            return 1.0 - 1.0 / (n * n)
        vals = p["values"]
        return vals[min(n, len(vals)) - 1]

    __call__ = value

    def values(self, N):
        """Array of the first ``N`` terms (vectorised)."""
        if N < 1:
            raise ContractViolation("N must be at least 1")
        n = np.arange(1, N + 1, dtype=float)
        p = self.params
        if self.kind == "harmonic":
            return np.minimum(1.0, p["a"] / (n + p["c"]) ** p["p"])
        if self.kind == "constant":
            return np.full(N, p["v"])
        if self.kind == "inverse_square":
            return 1.0 / (n * n)
        if self.kind == "one_minus_inverse_square":
            return 1.0 - 1.0 / (n * n)
        vals = np.asarray(p["values"])
        idx = np.minimum(np.arange(N), vals.size - 1)
        return vals[idx]

    def complement_flags(self):
        """Flags of the sequence ``1 - s(n)``."""
        if self.kind == "constant":
            return _constant_flags(1.0 - self.params["v"])
        if self.kind == "inverse_square":
            return Schedule.one_minus_inverse_square().flags
        if self.kind == "one_minus_inverse_square":
            return Schedule.inverse_square().flags
        if self.kind == "harmonic":
            flags = {DIVERGING_SUM, SUMMABLE_DIFFERENCES}
            if self.value(1) < 1.0:
                flags.add(STRICTLY_POSITIVE)
            return frozenset(flags)
        return _table_tail_flags([1.0 - v for v in self.params["values"]])

    def decay_exponent(self):
        """``q`` with ``s(n) ~ const * n**-q``; ``inf`` if identically zero, ``None`` for tables."""
        if self.kind == "harmonic":
            return self.params["p"]
        if self.kind == "inverse_square":
            return 2.0
        if self.kind == "constant":
            return math.inf if self.params["v"] == 0.0 else 0.0
        if self.kind == "one_minus_inverse_square":
            return 0.0
        return None

    # serialization ----------------------------------------------------

    def to_dict(self):
        if self.kind == "table":
            return {"kind": "table", "values": list(self.params["values"]), "flags": sorted(self.flags)}
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ContractViolation(f"schedule must be an object with a 'kind', got {d!r}")
        kind = d["kind"]
        allowed = {
            "harmonic": {"a", "c", "p"},
            "constant": {"v"},
            "inverse_square": set(),
            "one_minus_inverse_square": set(),
            "table": {"values", "flags"},
        }
        if kind not in allowed:
            raise ContractViolation(f"unknown schedule kind {kind!r}")
        extra = set(d) - {"kind"} - allowed[kind]
        if extra:
            raise ContractViolation(f"unknown keys {sorted(extra)} for {kind} schedule")
        args = {k: v for k, v in d.items() if k != "kind"}
        if kind == "table":
            if "values" not in args or "flags" not in args:
                raise ContractViolation("table schedule needs 'values' and 'flags'")
            return cls.table(args["values"], args["flags"])
        if kind == "constant" and "v" not in args:
            raise ContractViolation("constant schedule needs 'v'")
        return getattr(cls, kind)(**args)


def schedule_value(s, n):
    return s.value(n)


def schedule_properties(s):
    return s.flags


@dataclass
class ValidationReport:
    regime: str
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations

    def to_dict(self):
        return {"regime": self.regime, "valid": self.valid, "violations": self.violations, "notes": self.notes}


def _ratio_vanishes(alpha, beta):
    """Decide ``beta_n / alpha_n -> 0``; returns (verdict, proven)."""
    qa, qb = alpha.decay_exponent(), beta.decay_exponent()
    if qa is not None and qb is not None:
        return qb > qa, True
    a = alpha.values(RATIO_PROBE_N)
    b = beta.values(RATIO_PROBE_N)
    if np.any(a <= 0.0):
        return False, False
    r = b / a
    tail = r[RATIO_PROBE_N // 10 :]
    ok = r[-1] < 1e-3 and tail[-1] <= tail[0]
    return bool(ok), False


def validate_regime(regime, alpha, beta=None):
    """Check the step-size hypotheses of a convergence regime.

    ``regime1``: limit is the projection onto Fix(T); ``regime2``: onto
    Fix(S); ``regime3``: onto the common fixed set. ``halpern`` is the
    single-map anchored iteration and ``anchored`` the variable-anchor one.

    Raises
    ------
    UsageError
        If ``beta`` is missing for regimes 1-3 or given for the others.
    """
    if regime not in REGIMES:
        raise UsageError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    two_maps = regime in ("regime1", "regime2", "regime3")
    if two_maps and beta is None:
        raise UsageError(f"{regime} needs a beta schedule")
    if not two_maps and beta is not None:
        raise UsageError(f"{regime} takes no beta schedule")

    report = ValidationReport(regime)
    v = report.violations
    af = alpha.flags
    if VANISHES not in af:
        v.append("alpha does not vanish")
    if DIVERGING_SUM not in af:
        v.append("Σα = ∞ fails")
    if regime in ("regime2", "regime3", "anchored") and STRICTLY_POSITIVE not in af:
        v.append("alpha not strictly positive")
    if regime in ("regime1", "halpern") and SUMMABLE_DIFFERENCES not in af:
        v.append("Σ|Δα| < ∞ fails")
    if regime == "regime1" and SUMMABLE not in beta.complement_flags():
        v.append("1−β not summable")
    if regime == "regime2":
        if VANISHES not in beta.flags:
            v.append("beta does not vanish")
        ok, proven = _ratio_vanishes(alpha, beta)
        if not ok:
            v.append("β/α does not vanish")
        if not proven:
            report.notes.append("β/α → 0: probed, not proven")
    if regime == "regime3" and LIMINF_PRODUCT_POSITIVE not in beta.flags:
        v.append("liminf β(1−β) = 0")
    for name, s in (("alpha", alpha), ("beta", beta)):
        if s is not None and s.asserted:
            report.notes.append(f"{name} flags asserted, unverified")
    return report


@dataclass(frozen=True)
class ProbeReport:
    N: int
    partial_sum: float
    total_variation: float
    min_value: float
    max_value: float


def partial_sum_probe(s, N):
    """Partial sum, total variation and range over the first ``N`` terms.

    Advisory only: never used to set or override flags.
    """
    if N < 1:
        raise ContractViolation("N must be at least 1")
    vals = s.values(N)
    return ProbeReport(
        N=N,
        partial_sum=math.fsum(vals),
        total_variation=math.fsum(np.abs(np.diff(vals))),
        min_value=float(vals.min()),
        max_value=float(vals.max()),
    )
