"""Closed-form secular functions of a single centred delta interaction.

A cell of length ``d`` with a delta interaction of strength ``alpha`` at its
midpoint has, under Dirichlet ends, the spectrum

    {(2 pi k / d)^2 : k >= 1}  union  {lam : FD(d, lam) = alpha}

and under Neumann ends

    {(pi (2k-1) / d)^2 : k >= 1}  union  {lam : FN(d, lam) = alpha}.

Both functions are strictly increasing between consecutive poles, which makes
the lowest eigenvalue the unique root on the first branch. ``solve_lambda_d``
and ``solve_lambda_n`` return that root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "PoleSet",
    "BranchWindow",
    "eval_fd",
    "eval_fn",
    "dfd_dlambda",
    "dfn_dlambda",
    "solve_lambda_d",
    "solve_lambda_n",
    "pole_guard",
]

# below this |d sqrt|lam|| / 2 the cot/coth branches are replaced by series
_SERIES_CUTOFF = 1e-4
# hyperbolic arguments past this are saturated (tanh == 1 in double precision)
_HYPER_CAP = 350.0
_GUARD_FRACTION = 1e-9


@dataclass(frozen=True)
class PoleSet:
    """Poles of FD (``kind='D'``) or FN (``kind='N'``) for a cell of length d."""

    kind: str
    d: float

    def __post_init__(self):
        if self.kind not in ("D", "N"):
            raise DomainError(f"unknown pole kind {self.kind!r}")
        _check_length(self.d)

    def pole(self, k: int) -> float:
        if k < 1:
            raise DomainError("pole index starts at 1")
        if self.kind == "D":
            return (2.0 * math.pi * k / self.d) ** 2
        return (math.pi * (2 * k - 1) / self.d) ** 2

    def __iter__(self) -> Iterator[float]:
        k = 1
        while True:
            yield self.pole(k)
            k += 1

    def below(self, bound: float) -> list[float]:
        out = []
        for p in self:
            if p >= bound:
                return out
            out.append(p)

    @property
    def spacing(self) -> float:
        # distance between the first two poles; used to scale the guard band
        return self.pole(2) - self.pole(1)

    def nearest(self, lam: float) -> float:
        if self.kind == "D":
            k = max(1, round(self.d * math.sqrt(max(lam, 0.0)) / (2.0 * math.pi)))
        else:
            k = max(1, round((self.d * math.sqrt(max(lam, 0.0)) / math.pi + 1.0) / 2.0))
        return min((self.pole(j) for j in (max(1, k - 1), k, k + 1)), key=lambda p: abs(p - lam))

    def branch(self, index: int) -> "BranchWindow":
        """Connected component number ``index`` (0 is the unbounded one)."""
        lower = -math.inf if index == 0 else self.pole(index)
        return BranchWindow(lower, self.pole(index + 1))


@dataclass(frozen=True)
class BranchWindow:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError("empty branch window")

    def __contains__(self, lam: float) -> bool:
        return self.lower < lam < self.upper


def _check_length(d: float) -> None:
    if not (d > 0.0 and math.isfinite(d)):
        raise DomainError(f"interval length must be positive and finite, got {d!r}")


def pole_guard(kind: str, d: float) -> float:
    return _GUARD_FRACTION * PoleSet(kind, d).spacing


def _guard(kind: str, d: float, lam: float, guard: float | None) -> None:
    if lam <= 0.0:
        return
    poles = PoleSet(kind, d)
    g = _GUARD_FRACTION * poles.spacing if guard is None else guard
    p = poles.nearest(lam)
    if abs(lam - p) < g:
        raise PoleError(f"lambda={lam!r} lies within {g:.3g} of the pole {p!r}")


def eval_fd(d: float, lam: float, guard: float | None = None) -> float:
    """Dirichlet secular function ``FD_d(lam)``.

    Equals ``-2 sqrt(lam) cot(d sqrt(lam)/2)`` for positive ``lam``,
    ``-4/d`` at zero and ``-2 sqrt(-lam) coth(d sqrt(-lam)/2)`` below zero.
    """
    _check_length(d)
    _guard("D", d, lam, guard)
    x2 = 0.25 * d * d * lam  # signed square of the half-phase
    if abs(x2) < _SERIES_CUTOFF**2:
        return -(4.0 / d) * (1.0 - x2 / 3.0 - x2 * x2 / 45.0)
    if lam > 0.0:
        k = math.sqrt(lam)
        return -2.0 * k / math.tan(0.5 * d * k)
    k = math.sqrt(-lam)
    x = 0.5 * d * k
    if x > _HYPER_CAP:
        return -2.0 * k
    return -2.0 * k / math.tanh(x)


def eval_fn(d: float, lam: float, guard: float | None = None) -> float:
    """Neumann secular function ``FN_d(lam)``; vanishes at ``lam = 0``."""
    _check_length(d)
    _guard("N", d, lam, guard)
    x2 = 0.25 * d * d * lam
    if abs(x2) < _SERIES_CUTOFF**2:
        # (4/d) * x tan x  with  x^2 = d^2 lam / 4
        return (4.0 / d) * (x2 + x2 * x2 / 3.0)
    if lam > 0.0:
        k = math.sqrt(lam)
        return 2.0 * k * math.tan(0.5 * d * k)
    k = math.sqrt(-lam)
    x = 0.5 * d * k
    if x > _HYPER_CAP:
        return -2.0 * k
    return -2.0 * k * math.tanh(x)


def dfd_dlambda(d: float, lam: float) -> float:
    _check_length(d)
    x2 = 0.25 * d * d * lam
    if abs(x2) < _SERIES_CUTOFF**2:
        return d / 3.0 + d**3 * lam / 90.0
    if lam > 0.0:
        k = math.sqrt(lam)
        x = 0.5 * d * k
        s = math.sin(x)
        return -math.cos(x) / (s * k) + 0.5 * d / (s * s)
    k = math.sqrt(-lam)
    x = 0.5 * d * k
    if x > _HYPER_CAP:
        return 1.0 / k
    sh = math.sinh(x)
    return 1.0 / (math.tanh(x) * k) - 0.5 * d / (sh * sh)


def dfn_dlambda(d: float, lam: float) -> float:
    _check_length(d)
    x2 = 0.25 * d * d * lam
    if abs(x2) < _SERIES_CUTOFF**2:
        return d + d**3 * lam / 6.0
    if lam > 0.0:
        k = math.sqrt(lam)
        x = 0.5 * d * k
        c = math.cos(x)
        return math.tan(x) / k + 0.5 * d / (c * c)
    k = math.sqrt(-lam)
    x = 0.5 * d * k
    if x > _HYPER_CAP:
        return 1.0 / k
    ch = math.cosh(x)
    return math.tanh(x) / k + 0.5 * d / (ch * ch)


def _solve_first_branch(f, df, alpha, lower, pole, guard, tol, max_expand=200):
    # f increases on (lower, pole) and blows up to +inf at the pole
    n = 0
    while f(lower) > alpha:
        lower = 2.0 * lower - 1.0
        n += 1
        if n > max_expand:
            raise ConvergenceError("could not bracket the first-branch root from below")
    upper = pole - guard
    n = 0
    while f(upper) < alpha:
        guard *= 0.5
        upper = pole - guard
        n += 1
        if n > max_expand or upper >= pole:
            raise ConvergenceError("could not bracket the first-branch root from above")
    lo, hi = lower, upper
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-3 * tol * max(1.0, abs(mid)):
            break
    lam = 0.5 * (lo + hi)
    slope = df(lam)
    if slope > 0.0 and math.isfinite(slope):
        step = lam - (f(lam) - alpha) / slope
        if lo <= step <= hi:
            lam = step
    return lam


def solve_lambda_d(alpha: float, d: float, tol: float = 1e-12) -> float:
    """Lowest eigenvalue of the Dirichlet cell: the root of FD_d = alpha below (2 pi/d)^2."""
    _check_length(d)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    pole = (2.0 * math.pi / d) ** 2
    guard = pole_guard("D", d)
    lower = min(0.0, -0.25 * alpha * alpha - 1.0)
    f = lambda lam: eval_fd(d, lam, guard=0.0)
    return _solve_first_branch(f, lambda lam: dfd_dlambda(d, lam), alpha, lower, pole, guard, tol)


def solve_lambda_n(alpha: float, d: float, tol: float = 1e-12) -> float:
    """Lowest eigenvalue of the Neumann cell: the root of FN_d = alpha below (pi/d)^2."""
    _check_length(d)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    pole = (math.pi / d) ** 2
    guard = pole_guard("N", d)
    lower = min(0.0, -0.25 * alpha * alpha - 1.0)
    f = lambda lam: eval_fn(d, lam, guard=0.0)
    return _solve_first_branch(f, lambda lam: dfn_dlambda(d, lam), alpha, lower, pole, guard, tol)
