"""Numeric checks of the auxiliary lemmas and limit classification.

Asymptotic statements have no finite certificate. The verdicts here use
decade-median heuristics with fixed thresholds (10x decay, final gap below
1e-3) that are calibrated to the acceptance instances.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, PreconditionError, UsageError
from .hilbert import as_vector
from .schedules import DIVERGING_SUM, SUMMABLE, Schedule
from .sets import MEMBERSHIP_TOL

VANISHING_RATIO = 0.1
VANISHING_FINAL_GAP = 1e-3


@dataclass
class LiuReport:
    xi: np.ndarray
    alpha_sum_diverges: bool
    gamma_summable: bool
    decreased_tenfold: bool
    violations: list = field(default_factory=list)

    @property
    def xi_N(self):
        return float(self.xi[-1])


def liu_lemma_check(xi1, alpha, gamma, N):
    """Run ``xi_{n+1} = (1 - alpha_n) xi_n + gamma_n`` up to ``xi_N``.

    The equality is the extremal case of the recursive inequality, so if
    the hypotheses hold the sequence must still tend to zero.

    Parameters
    ----------
    xi1 : float
        Nonnegative start value.
    alpha : Schedule
        Its ``diverging_sum`` flag decides the first hypothesis.
    gamma : Schedule or callable
        Nonnegative perturbations. For a plain callable ``n -> value`` the
        summability hypothesis is unknown and reported as not established.
    N : int
        Last index, at least 2.

    Returns
    -------
    LiuReport
        ``xi`` holds ``xi_1 .. xi_N``; ``decreased_tenfold`` compares
        ``xi_N`` with ``xi_{N // 10}``.
    """
    if N < 2:
        raise ContractViolation("N must be at least 2")
    xi1 = float(xi1)
    if not xi1 >= 0.0:
        raise ContractViolation("xi1 must be nonnegative")
    xi = np.empty(N)
    xi[0] = xi1
    for n in range(1, N):
        g = float(gamma(n))
        if not g >= 0.0:
            raise ContractViolation(f"gamma_{n} = {g} is negative")
        xi[n] = (1.0 - alpha.value(n)) * xi[n - 1] + g

    alpha_div = DIVERGING_SUM in alpha.flags
    gamma_sum = isinstance(gamma, Schedule) and SUMMABLE in gamma.flags
    violations = []
    if not alpha_div:
        violations.append("Σα = ∞ fails")
    if not gamma_sum:
        violations.append("Σγ < ∞ not established")
    ref = xi[max(N // 10, 1) - 1]
    # tiny slack: the telescoping case decays by exactly 10x per decade
    tenfold = bool(xi[-1] * 10.0 <= ref * (1.0 + 1e-9))
    return LiuReport(xi, alpha_div, gamma_sum, tenfold, violations)


@dataclass
class CouplingReport:
    n: np.ndarray
    gaps: np.ndarray
    verdict: str

    def to_csv(self):
        lines = ["n,gap"]
        lines += [f"{int(k)},{float(g)!r}" for k, g in zip(self.n, self.gaps)]
        return "\n".join(lines) + "\n"


def coupling_gap(trace_x, trace_y):
    """Distances ``|x_n - y_n|`` at the record indices both traces share.

    The verdict is ``"vanishing"`` when the median gap over the last
    decade of indices is below 10% of the median over the first decade
    (or is exactly zero) and the final gap is below 1e-3; otherwise
    ``"not_vanishing"``.
    """
    if trace_x.dim != trace_y.dim:
        raise UsageError("traces differ in dimension")
    if trace_x.stride != trace_y.stride:
        raise UsageError(f"trace strides differ: {trace_x.stride} vs {trace_y.stride}")
    ys = {r.n: r.x for r in trace_y.records}
    ns, gaps = [], []
    for r in trace_x.records:
        if r.n in ys:
            ns.append(r.n)
            gaps.append(math.sqrt(float(np.dot(r.x - ys[r.n], r.x - ys[r.n]))))
    if not ns:
        raise UsageError("traces share no record index")
    ns, gaps = np.array(ns), np.array(gaps)
    first = gaps[ns < 10 * ns[0]]
    last = gaps[ns > ns[-1] / 10]
    first_med, last_med = float(np.median(first)), float(np.median(last))
    decays = last_med == 0.0 or last_med < VANISHING_RATIO * first_med
    verdict = "vanishing" if decays and gaps[-1] < VANISHING_FINAL_GAP else "not_vanishing"
    return CouplingReport(ns, gaps, verdict)


def bounded_orbit_check(trace, u, x1, v, F_membership, tol=1e-9):
    """Check ``|x_n - v| <= max(|u - v|, |x1 - v|)`` on every record.

    Raises
    ------
    PreconditionError
        If ``v`` is not in the common fixed set ``F_membership``.
    """
    u, x1, v = as_vector(u, "u"), as_vector(x1, "x1"), as_vector(v, "v")
    if not F_membership.contains(v, MEMBERSHIP_TOL):
        raise PreconditionError("v is not in F; the bound is only claimed for common fixed points")
    bound = max(np.linalg.norm(u - v), np.linalg.norm(x1 - v))
    dists = np.linalg.norm(trace.points() - v, axis=1)
    return bool(np.all(dists <= bound + tol))


VERDICTS = ("fixT", "fixS", "intersection")


@dataclass(frozen=True)
class RegimeReport:
    dist_to_PT: float
    dist_to_PS: float
    dist_to_PF: float
    verdict: str
    margins: tuple

    def to_dict(self):
        return {
            "dist_to_PT": self.dist_to_PT,
            "dist_to_PS": self.dist_to_PS,
            "dist_to_PF": self.dist_to_PF,
            "verdict": self.verdict,
            "margins": list(self.margins),
        }


def classify(distances, labels, stop_tol):
    """Label of the nearest target, or ``"inconclusive"``.

    A label is returned only if the smallest distance is below ``stop_tol``
    and at most half the second smallest.
    """
    order = sorted(range(len(distances)), key=lambda i: distances[i])
    d0, d1 = distances[order[0]], distances[order[1]]
    if d0 < stop_tol and d0 <= 0.5 * d1:
        return labels[order[0]], (d0, d1)
    return "inconclusive", (d0, d1)


def regime_report(trace, PT, PS, PF, stop_tol):
    """Which of the three candidate limits the run's final point reached."""
    x = trace.final_point
    targets = [as_vector(t, name) for t, name in ((PT, "PT"), (PS, "PS"), (PF, "PF"))]
    for t in targets:
        if t.size != x.size:
            raise ContractViolation("targets must share the trace dimension")
    dists = [float(np.linalg.norm(x - t)) for t in targets]
    verdict, margins = classify(dists, VERDICTS, stop_tol)
    return RegimeReport(dists[0], dists[1], dists[2], verdict, margins)
