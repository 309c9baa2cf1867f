"""Independent ground truth for projections onto intersections.

Dykstra's algorithm converges to the metric projection onto an
intersection of closed convex sets, unlike plain cyclic projections which
only find *some* common point. Results are certified with a sampled check
of the variational inequality ``<u - p, y - p> <= 0`` for feasible ``y``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, PreconditionError, SamplingFailure
from .hilbert import as_vector, to_list

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_PROBES = 2000
DEFAULT_SEED = 20170816
FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class OracleResult:
    point: np.ndarray
    iterations_used: int
    certificate_gap: float
    status: str = "converged"

    @property
    def converged(self):
        return self.status == "converged"

    def to_dict(self):
        return {
            "point": to_list(self.point),
            "iterations_used": self.iterations_used,
            "certificate_gap": self.certificate_gap,
            "status": self.status,
        }


def _leaves(sets):
    out = []
    for s in sets:
        out.extend(s.leaves())
    return out


def _check_dims(leaves, x):
    for s in leaves:
        if s.dim is not None and s.dim != x.size:
            raise ContractViolation(f"set in R^{s.dim} but point has {x.size} components")


def dykstra_project(sets, u, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, probes=DEFAULT_PROBES, seed=DEFAULT_SEED):
    """Project ``u`` onto the intersection of ``sets`` with Dykstra's algorithm.

    One iteration is a full cycle over the sets. The loop stops when a cycle
    changes the iterate and the correction terms by less than ``tol``
    combined; if that never happens within
    ``max_iter`` cycles the result has status ``"unconverged"`` and carries
    the last iterate.

    Parameters
    ----------
    sets : sequence of ConvexSetSpec
        Nested intersections are flattened. An empty sequence means R^d.
    u : array_like
        Point to project.
    tol, max_iter : float, int
        Stopping controls.
    probes, seed : int
        Passed to :func:`variational_inequality_check` for the certificate.
        ``probes=0`` skips certification (``certificate_gap`` is NaN).
    """
    u = as_vector(u, "u")
    if not tol > 0:
        raise ContractViolation("tol must be positive")
    if max_iter < 1:
        raise ContractViolation("max_iter must be at least 1")
    leaves = _leaves(sets)
    _check_dims(leaves, u)

    x = u.copy()
    incr = [np.zeros_like(u) for _ in leaves]
    status = "unconverged"
    k = 0
    if not leaves:
        status = "converged"
    while leaves and k < max_iter:
        k += 1
        start = x
        moved = 0.0
        for i, s in enumerate(leaves):
            y = s.project(x + incr[i])
            new_incr = x + incr[i] - y
            d = new_incr - incr[i]
            moved += float(np.dot(d, d))
            incr[i] = new_incr
            x = y
        # the iterate can sit still for a cycle while corrections still move
        moved += float(np.dot(x - start, x - start))
        if math.sqrt(moved) < tol:
            status = "converged"
            break

    gap = float("nan")
    if probes > 0:
        if all(s.contains(x, FEASIBILITY_TOL) for s in leaves):
            gap = max(0.0, variational_inequality_check(leaves, u, x, probes, seed=seed))
        else:
            gap = float("inf")
    return OracleResult(point=x, iterations_used=k, certificate_gap=gap, status=status)


def _feasible_probe(leaves, y, cycles=200, tol=1e-10):
    for _ in range(cycles):
        if all(s.contains(y, tol) for s in leaves):
            return y
        for s in leaves:
            y = s.project(y)
    return y if all(s.contains(y, tol) for s in leaves) else None


def variational_inequality_check(sets, u, p, probes=DEFAULT_PROBES, seed=DEFAULT_SEED):
    """Largest sampled value of ``<u - p, y - p>`` over feasible points ``y``.

    ``p`` is the metric projection of ``u`` exactly when this is <= 0 for
    every feasible ``y``. Probes are drawn uniformly from a box around ``p``
    and ``u``; infeasible draws are pushed into the intersection by cyclic
    projections. The generator is seeded, so the result is reproducible.

    Raises
    ------
    PreconditionError
        If ``p`` is not feasible to 1e-7.
    SamplingFailure
        If no feasible probe could be produced.
    """
    u, p = as_vector(u, "u"), as_vector(p, "p")
    if u.shape != p.shape:
        raise ContractViolation("u and p differ in dimension")
    if probes < 1:
        raise ContractViolation("probes must be at least 1")
    leaves = _leaves(sets)
    _check_dims(leaves, p)
    if not all(s.contains(p, FEASIBILITY_TOL) for s in leaves):
        raise PreconditionError("p is not feasible for every set")

    rng = np.random.default_rng(seed)
    r = u - p
    h = max(1.0, math.sqrt(float(np.dot(r, r))))
    lo = np.minimum(p, u) - h
    hi = np.maximum(p, u) + h
    best = -math.inf
    found = 0
    attempts = 0
    while found < probes and attempts < 20 * probes:
        attempts += 1
        y = _feasible_probe(leaves, rng.uniform(lo, hi))
        if y is None:
            continue
        found += 1
        best = max(best, float(np.dot(r, y - p)))
    if found == 0:
        raise SamplingFailure("could not generate a feasible probe point")
    return best
