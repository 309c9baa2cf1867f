"""Closed convex sets with analytic metric projections.

Four kinds are supported: ``halfspace`` ({x : <a, x> <= b}), ``ball``,
``box`` and ``intersection`` of other sets. A box with ``lo == hi`` is a
single point, which is how the fixed set {0} of the radial oscillator is
represented. An intersection of zero sets is the whole space.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidSetError
from .hilbert import as_vector, to_list

MEMBERSHIP_TOL = 1e-9

KINDS = ("halfspace", "ball", "box", "intersection")


def project_halfspace(a, b, x):
    """Project ``x`` onto {y : <a, y> <= b}."""
    a, x = as_vector(a, "a"), as_vector(x, "x")
    if a.shape != x.shape:
        raise ContractViolation(f"dimension mismatch: {a.size} vs {x.size}")
    aa = float(np.dot(a, a))
    if aa == 0.0:
        raise InvalidSetError("half-space normal must be nonzero")
    excess = float(np.dot(a, x)) - float(b)
    if excess <= 0.0:
        return x.copy()
    return x - (excess / aa) * a


def project_ball(c, r, x):
    """Project ``x`` onto the closed ball of radius ``r`` about ``c``."""
    c, x = as_vector(c, "c"), as_vector(x, "x")
    if c.shape != x.shape:
        raise ContractViolation(f"dimension mismatch: {c.size} vs {x.size}")
    r = float(r)
    if not r > 0.0:
        raise InvalidSetError(f"ball radius must be positive, got {r}")
    d = x - c
    dist = float(np.sqrt(np.dot(d, d)))
    if dist <= r:
        return x.copy()
    return c + (r / dist) * d


def project_box(lo, hi, x):
    """Clamp ``x`` componentwise to ``[lo, hi]``."""
    lo, hi, x = as_vector(lo, "lo"), as_vector(hi, "hi"), as_vector(x, "x")
    if not lo.shape == hi.shape == x.shape:
        raise ContractViolation("dimension mismatch between box bounds and x")
    if np.any(lo > hi):
        raise InvalidSetError("box requires lo <= hi componentwise")
    return np.minimum(np.maximum(x, lo), hi)


def _frozen(v):
    v = v.copy()
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class ConvexSetSpec:
    """A closed convex set in R^d.

    Use the ``halfspace``/``ball``/``box``/``intersection`` constructors
    rather than instantiating directly; they validate parameters.
    """

    kind: str
    params: dict = field(default_factory=dict)
    children: tuple = ()

    # constructors -----------------------------------------------------

    @classmethod
    def halfspace(cls, a, b):
        a = as_vector(a, "a")
        if not np.any(a != 0.0):
            raise InvalidSetError("half-space normal must be nonzero")
        b = float(b)
        if not np.isfinite(b):
            raise InvalidSetError("half-space offset must be finite")
        return cls("halfspace", {"a": _frozen(a), "b": b})

    @classmethod
    def ball(cls, center, radius):
        c = as_vector(center, "center")
        radius = float(radius)
        if not (np.isfinite(radius) and radius > 0.0):
            raise InvalidSetError(f"ball radius must be positive, got {radius}")
        return cls("ball", {"center": _frozen(c), "radius": radius})

    @classmethod
    def box(cls, lo, hi):
        lo, hi = as_vector(lo, "lo"), as_vector(hi, "hi")
        if lo.shape != hi.shape:
            raise InvalidSetError("box bounds differ in dimension")
        if np.any(lo > hi):
            raise InvalidSetError("box requires lo <= hi componentwise")
        return cls("box", {"lo": _frozen(lo), "hi": _frozen(hi)})

    @classmethod
    def point(cls, p):
        """The singleton {p}, as a degenerate box."""
        p = as_vector(p, "p")
        return cls.box(p, p)

    @classmethod
    def intersection(cls, sets):
        sets = tuple(sets)
        for s in sets:
            if not isinstance(s, ConvexSetSpec):
                raise InvalidSetError("intersection members must be ConvexSetSpec")
        dims = {s.dim for s in sets if s.dim is not None}
        if len(dims) > 1:
            raise InvalidSetError(f"intersection members disagree in dimension: {sorted(dims)}")
        return cls("intersection", {}, sets)

    # geometry ---------------------------------------------------------

    def __post_init__(self):
        object.__setattr__(self, "_dim", self._compute_dim())

    @property
    def dim(self):
        """Ambient dimension, or ``None`` for the empty intersection (all of R^d)."""
        return self._dim

    def _compute_dim(self):
        if self.kind == "halfspace":
            return self.params["a"].size
        if self.kind == "ball":
            return self.params["center"].size
        if self.kind == "box":
            return self.params["lo"].size
        for child in self.children:
            if child.dim is not None:
                return child.dim
        return None

    def _check_dim(self, x):
        x = as_vector(x)
        d = self._dim
        if d is not None and x.size != d:
            raise ContractViolation(f"dimension mismatch: set is in R^{d}, point has {x.size} components")
        return x

    def contains(self, x, tol=MEMBERSHIP_TOL):
        """Membership test, allowing a violation of at most ``tol`` in distance."""
        x = self._check_dim(x)
        p = self.params
        if self.kind == "halfspace":
            a = p["a"]
            return float(np.dot(a, x)) - p["b"] <= tol * float(np.sqrt(np.dot(a, a)))
        if self.kind == "ball":
            d = x - p["center"]
            return float(np.sqrt(np.dot(d, d))) <= p["radius"] + tol
        if self.kind == "box":
            return bool((x >= p["lo"] - tol).all() and (x <= p["hi"] + tol).all())
        return all(child.contains(x, tol) for child in self.children)

    def leaves(self):
        """Flatten nested intersections into a list of simple sets."""
        if self.kind != "intersection":
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def project(self, x):
        """Metric projection onto the set.

        Simple kinds use closed forms. Intersections with more than one
        member fall back to Dykstra's algorithm.
        """
        x = self._check_dim(x)
        p = self.params
        # parameters were validated at construction
        if self.kind == "halfspace":
            a = p["a"]
            excess = float(np.dot(a, x)) - p["b"]
            if excess <= 0.0:
                return x.copy()
            return x - (excess / float(np.dot(a, a))) * a
        if self.kind == "ball":
            d = x - p["center"]
            dist = math.sqrt(float(np.dot(d, d)))
            if dist <= p["radius"]:
                return x.copy()
            return p["center"] + (p["radius"] / dist) * d
        if self.kind == "box":
            return np.minimum(np.maximum(x, p["lo"]), p["hi"])
        leaves = self.leaves()
        if not leaves:
            return x.copy()
        if len(leaves) == 1:
            return leaves[0].project(x)
        from .oracle import dykstra_project

        return dykstra_project(leaves, x, probes=0).point

    # serialization ----------------------------------------------------

    def to_dict(self):
        p = self.params
        if self.kind == "halfspace":
            return {"kind": "halfspace", "a": to_list(p["a"]), "b": p["b"]}
        if self.kind == "ball":
            return {"kind": "ball", "center": to_list(p["center"]), "radius": p["radius"]}
        if self.kind == "box":
            return {"kind": "box", "lo": to_list(p["lo"]), "hi": to_list(p["hi"])}
        return {"kind": "intersection", "sets": [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidSetError(f"set description must be an object with a 'kind', got {d!r}")
        kind = d["kind"]
        expected = {
            "halfspace": {"a", "b"},
            "ball": {"center", "radius"},
            "box": {"lo", "hi"},
            "intersection": {"sets"},
        }
        if kind not in expected:
            raise InvalidSetError(f"unknown set kind {kind!r}")
        keys = set(d) - {"kind"}
        if keys != expected[kind]:
            raise InvalidSetError(f"{kind} set needs keys {sorted(expected[kind])}, got {sorted(keys)}")
        if kind == "halfspace":
            return cls.halfspace(d["a"], d["b"])
        if kind == "ball":
            return cls.ball(d["center"], d["radius"])
        if kind == "box":
            return cls.box(d["lo"], d["hi"])
        return cls.intersection(cls.from_dict(c) for c in d["sets"])

    def __eq__(self, other):
        if not isinstance(other, ConvexSetSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))
