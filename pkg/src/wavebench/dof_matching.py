"""Fairness protocol: match the FEM discretization to the surrogate's DoF.

The surrogate's complexity is its effective DoF (hat-matrix trace). The FEM
run with n intervals per direction and time step T/n has (n-1)^2 interior
nodes and n+1 time levels, so its DoF is (n-1)^2 (n+1). Matching solves the
cubic (x-1)^2 (x+1) = dof for its real positive root and rounds to the
nearest achievable integer resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["MatchResult", "dof_cn", "match_cn_to_dof", "cubic_root"]


@dataclass(frozen=True)
class MatchResult:
    """Matched FEM resolution for a given effective DoF."""

    dof_ep: float
    n: int
    dt: float
    Nt: int
    dof_cn: int
    mismatch: float


def dof_cn(n: int, Nt_levels: int) -> int:
    """FEM degrees of freedom: interior nodes times time levels."""
    if n < 2:
        raise ValueError("need n >= 2 for interior nodes to exist")
    if Nt_levels < 1:
        raise ValueError("need at least one time level")
    return (n - 1) ** 2 * Nt_levels


def cubic_root(dof: float) -> float:
    """Real positive root of (x-1)^2 (x+1) = dof, via safeguarded Newton.

    The cubic is strictly increasing for x > 1, so the root is unique once
    dof > 0; bisection takes over whenever a Newton step leaves the bracket.
    """
    f = lambda x: (x - 1.0) ** 2 * (x + 1.0) - dof
    df = lambda x: (x - 1.0) * (3.0 * x + 1.0)
    lo = 1.0
    hi = dof ** (1.0 / 3.0) + 2.0
    while f(hi) < 0:
        hi *= 2.0
    x = dof ** (1.0 / 3.0) + 1.0
    for _ in range(100):
        fx = f(x)
        if abs(fx) <= 1e-12 * max(dof, 1.0):
            break
        if fx > 0:
            hi = x
        else:
            lo = x
        step = fx / df(x)
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        x = x_new
    return x


def match_cn_to_dof(dof_ep: float, T: float) -> MatchResult:
    """Pick the integer resolution whose DoF is nearest the target.

    Ties break toward the smaller n. The time step is coupled to the
    spatial resolution, dt = T/n, giving n+1 stored time levels.
    """
    if dof_ep < 1:
        raise ValueError("effective DoF must be at least 1")
    if T <= 0:
        raise ValueError("final time must be positive")
    r = cubic_root(dof_ep)
    candidates = sorted({max(math.floor(r), 2), max(math.ceil(r), 2)})
    best = min(candidates, key=lambda n: (abs(dof_cn(n, n + 1) - dof_ep), n))
    d = dof_cn(best, best + 1)
    return MatchResult(dof_ep=float(dof_ep), n=best, dt=T / best, Nt=best,
                       dof_cn=d, mismatch=abs(d - dof_ep))
