"""Catalog of mappings with declared analytic properties.

An :class:`OperatorSpec` is an immutable descriptor: a ``kind`` tag, its
parameters, and the set of properties it is declared to have. Declarations
are checked against what the kind can legitimately claim and must be closed
upward (firmly nonexpansive => nonexpansive => quasinonexpansive, and
strongly quasinonexpansive => quasinonexpansive).

Properties quantified over sequences (strong quasinonexpansiveness,
demiclosedness of ``I - T`` at 0) cannot be verified by sampling; they are
declarations only. Every catalog map is continuous on R^d, so ``I - T`` is
demiclosed at 0 for all of them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, PreconditionError
from .hilbert import as_vector, combine, to_list
from .sets import MEMBERSHIP_TOL, ConvexSetSpec

NONEXPANSIVE = "nonexpansive"
QUASINONEXPANSIVE = "quasinonexpansive"
STRONGLY_QUASINONEXPANSIVE = "strongly_quasinonexpansive"
FIRMLY_NONEXPANSIVE = "firmly_nonexpansive"
DEMICLOSED = "demiclosed_complement_at_zero"

PROPERTIES = frozenset(
    {NONEXPANSIVE, QUASINONEXPANSIVE, STRONGLY_QUASINONEXPANSIVE, FIRMLY_NONEXPANSIVE, DEMICLOSED}
)

PROJECTION_KINDS = ("halfspace_projection", "ball_projection", "box_projection")
KINDS = PROJECTION_KINDS + ("radial_oscillator", "convex_combination", "identity")

# (stronger, weaker) pairs that a declaration must respect
_IMPLICATIONS = (
    (FIRMLY_NONEXPANSIVE, NONEXPANSIVE),
    (NONEXPANSIVE, QUASINONEXPANSIVE),
    (STRONGLY_QUASINONEXPANSIVE, QUASINONEXPANSIVE),
)

_SET_KIND = {
    "halfspace_projection": "halfspace",
    "ball_projection": "ball",
    "box_projection": "box",
}


def radial_oscillator(x):
    """``x/2 * cos(1/|x|)``, with value 0 at the origin.

    Quasinonexpansive with fixed set {0} since ``|Tx| <= |x|/2``, but not
    nonexpansive near the origin where the cosine oscillates.
    """
    x = as_vector(x)
    r = math.sqrt(float(np.dot(x, x)))
    if r == 0.0:
        return np.zeros_like(x)
    return (0.5 * math.cos(1.0 / r)) * x


def _admissible(kind, params):
    if kind in PROJECTION_KINDS or kind == "identity":
        return PROPERTIES
    if kind == "radial_oscillator":
        return frozenset({QUASINONEXPANSIVE, STRONGLY_QUASINONEXPANSIVE, DEMICLOSED})
    beta, T, S = params["beta"], params["T"], params["S"]
    if beta == 1.0:
        return T.properties | {QUASINONEXPANSIVE}
    if beta == 0.0:
        return S.properties | {QUASINONEXPANSIVE}
    out = {QUASINONEXPANSIVE}
    both = T.properties & S.properties
    out |= both & {NONEXPANSIVE, FIRMLY_NONEXPANSIVE, DEMICLOSED}
    if STRONGLY_QUASINONEXPANSIVE in T.properties | S.properties:
        out.add(STRONGLY_QUASINONEXPANSIVE)
    return frozenset(out)


def _check_declaration(kind, declared, admissible):
    unknown = declared - PROPERTIES
    if unknown:
        raise ContractViolation(f"unknown properties {sorted(unknown)}")
    for strong, weak in _IMPLICATIONS:
        if strong in declared and weak not in declared:
            raise ContractViolation(f"{kind}: declaring {strong} requires declaring {weak}")
    excess = declared - admissible
    if excess:
        raise ContractViolation(f"{kind} cannot be declared {sorted(excess)}")


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """A mapping of R^d into itself with declared properties.

    Build instances with the classmethod constructors or
    :func:`convex_combine_op`; they validate parameters and declarations.
    """

    kind: str
    params: dict = field(default_factory=dict)
    properties: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown operator kind {self.kind!r}")
        props = frozenset(self.properties)
        object.__setattr__(self, "properties", props)
        _check_declaration(self.kind, props, _admissible(self.kind, self.params))

    # constructors -----------------------------------------------------

    @classmethod
    def identity(cls, properties=None):
        return cls("identity", {}, PROPERTIES if properties is None else properties)

    @classmethod
    def halfspace_projection(cls, a, b, properties=None):
        s = ConvexSetSpec.halfspace(a, b)
        return cls("halfspace_projection", {"set": s}, PROPERTIES if properties is None else properties)

    @classmethod
    def ball_projection(cls, center, radius, properties=None):
        s = ConvexSetSpec.ball(center, radius)
        return cls("ball_projection", {"set": s}, PROPERTIES if properties is None else properties)

    @classmethod
    def box_projection(cls, lo, hi, properties=None):
        s = ConvexSetSpec.box(lo, hi)
        return cls("box_projection", {"set": s}, PROPERTIES if properties is None else properties)

    @classmethod
    def oscillator(cls, properties=None):
        if properties is None:
            properties = _admissible("radial_oscillator", {})
        return cls("radial_oscillator", {}, properties)

    # structure --------------------------------------------------------

    @property
    def dim(self):
        """Dimension fixed by the parameters, or ``None`` for dimension-free maps."""
        if self.kind in PROJECTION_KINDS:
            return self.params["set"].dim
        if self.kind == "convex_combination":
            return self.params["witness"].size
        return None

    def fixed_set(self, dim=None):
        """The declared fixed-point set as a :class:`ConvexSetSpec`.

        ``dim`` is needed only for dimension-free kinds; the identity's
        fixed set is the empty intersection (all of R^d).
        """
        if self.kind in PROJECTION_KINDS:
            return self.params["set"]
        if self.kind == "identity":
            return ConvexSetSpec.intersection([])
        if self.kind == "radial_oscillator":
            if dim is None:
                raise ContractViolation("the oscillator's fixed set {0} needs a dimension")
            return ConvexSetSpec.point(np.zeros(dim))
        d = self.dim
        beta, T, S = self.params["beta"], self.params["T"], self.params["S"]
        if beta == 1.0:
            return T.fixed_set(d)
        if beta == 0.0:
            return S.fixed_set(d)
        return ConvexSetSpec.intersection([T.fixed_set(d), S.fixed_set(d)])

    def __call__(self, x):
        return apply(self, x)

    # serialization ----------------------------------------------------

    def to_dict(self):
        if self.kind in PROJECTION_KINDS:
            params = self.params["set"].to_dict()
            del params["kind"]
        elif self.kind == "convex_combination":
            params = {
                "beta": self.params["beta"],
                "T": self.params["T"].to_dict(),
                "S": self.params["S"].to_dict(),
                "witness": to_list(self.params["witness"]),
            }
        else:
            params = {}
        return {"kind": self.kind, "params": params, "properties": sorted(self.properties)}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ContractViolation(f"operator description must be an object with a 'kind', got {d!r}")
        extra = set(d) - {"kind", "params", "properties"}
        if extra:
            raise ContractViolation(f"unknown operator keys {sorted(extra)}")
        kind = d["kind"]
        params = d.get("params", {})
        props = d.get("properties")
        props = None if props is None else frozenset(props)
        if kind in _SET_KIND:
            s = ConvexSetSpec.from_dict({"kind": _SET_KIND[kind], **params})
            return cls(kind, {"set": s}, PROPERTIES if props is None else props)
        if kind == "identity":
            return cls.identity(props)
        if kind == "radial_oscillator":
            return cls.oscillator(props)
        if kind == "convex_combination":
            missing = {"beta", "T", "S", "witness"} - set(params)
            if missing:
                raise ContractViolation(f"convex_combination needs params {sorted(missing)}")
            return convex_combine_op(
                params["beta"],
                cls.from_dict(params["T"]),
                cls.from_dict(params["S"]),
                witness=params["witness"],
                properties=props,
            )
        raise ContractViolation(f"unknown operator kind {kind!r}")

    def __eq__(self, other):
        if not isinstance(other, OperatorSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


def convex_combine_op(beta, T, S, witness=None, properties=None):
    """Build ``U = beta*T + (1 - beta)*S``.

    Both children must be declared quasinonexpansive, and ``witness`` must
    be a common fixed point; it certifies that ``Fix(T) & Fix(S)`` is
    nonempty. For ``beta`` strictly inside (0, 1) the fixed set of ``U`` is
    that intersection and ``U`` is quasinonexpansive. At the endpoints
    ``U`` coincides with the surviving child.
    """
    beta = float(beta)
    if not 0.0 <= beta <= 1.0:
        raise ContractViolation(f"beta must lie in [0, 1], got {beta}")
    for name, op in (("T", T), ("S", S)):
        if not isinstance(op, OperatorSpec):
            raise ContractViolation(f"{name} must be an OperatorSpec")
        if QUASINONEXPANSIVE not in op.properties:
            raise PreconditionError(f"{name} is not declared quasinonexpansive")
    if witness is None:
        raise PreconditionError("a common fixed point (witness) is required to combine T and S")
    w = as_vector(witness, "witness")
    for name, op in (("T", T), ("S", S)):
        if op.dim is not None and op.dim != w.size:
            raise ContractViolation(f"witness dimension {w.size} does not match {name}")
        if not op.fixed_set(w.size).contains(w, MEMBERSHIP_TOL):
            raise PreconditionError(f"witness is not in the declared fixed set of {name}")
    w = w.copy()
    w.setflags(write=False)
    params = {"beta": beta, "T": T, "S": S, "witness": w}
    if properties is None:
        properties = _admissible("convex_combination", params)
    return OperatorSpec("convex_combination", params, properties)


def apply(op, x):
    """Evaluate the mapping at ``x``."""
    x = as_vector(x)
    kind = op.kind
    if kind in PROJECTION_KINDS:
        return op.params["set"].project(x)
    if kind == "identity":
        return x.copy()
    if kind == "radial_oscillator":
        return radial_oscillator(x)
    if op.dim != x.size:
        raise ContractViolation(f"dimension mismatch: operator in R^{op.dim}, point has {x.size}")
    return combine(op.params["beta"], apply(op.params["T"], x), apply(op.params["S"], x))


def fixed_point_residual(op, x):
    """``|x - op(x)|``; zero exactly on the fixed set."""
    x = as_vector(x)
    d = x - apply(op, x)
    return math.sqrt(float(np.dot(d, d)))


def quasi_check(op, x, p, tol=1e-9):
    """Check ``|op(x) - p| <= |x - p|`` for a declared fixed point ``p``.

    Raises
    ------
    PreconditionError
        If ``p`` is not in ``op``'s declared fixed set.
    """
    x, p = as_vector(x, "x"), as_vector(p, "p")
    if not op.fixed_set(p.size).contains(p, MEMBERSHIP_TOL):
        raise PreconditionError("p is not in the declared fixed set; the inequality is not claimed there")
    return bool(np.linalg.norm(apply(op, x) - p) <= np.linalg.norm(x - p) + tol)


def firm_check(P, x, y, tol=1e-9):
    """Check ``|Px - Py|^2 <= <Px - Py, x - y>`` for a catalog projection."""
    if P.kind not in PROJECTION_KINDS:
        raise PreconditionError(f"firm_check applies to catalog projections, not {P.kind}")
    x, y = as_vector(x, "x"), as_vector(y, "y")
    d = apply(P, x) - apply(P, y)
    return bool(float(np.dot(d, d)) <= float(np.dot(d, x - y)) + tol)
