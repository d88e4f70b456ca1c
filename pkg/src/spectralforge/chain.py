"""Finite chains of cells glued by point interactions.

A chain is an ordered list of :class:`Cell` objects (each carrying one delta
or delta-prime interaction at its midpoint), a list of couplings placed at
the breakpoints between consecutive cells, and boundary conditions at both
outer ends. Couplings are themselves point interactions or *walls*: a
``DirichletWall`` imposes ``u = 0`` on both sides of the breakpoint, a
``NeumannWall`` imposes ``u' = 0``; either splits the chain into spectrally
independent pieces.

Eigenvalues are counted with a Prüfer phase ``theta`` defined by
``u = r sin(theta)``, ``u' = r cos(theta)``. The phase is carried as a pair
``(j, phi)`` with ``theta = j*pi + phi`` and ``0 <= phi < pi`` so that strip
crossings are integer arithmetic and never depend on rounding of ``theta/pi``.
The count of eigenvalues strictly below ``lam`` is the number of integers
``k >= k_min`` with ``theta_b + k*pi < theta(b, lam)``, where ``theta_b`` is the
phase prescribed by the right boundary condition and ``k_min`` is the strip
the phase occupies as ``lam -> -inf``. ``k_min`` is zero except that every
delta-prime of negative strength pulls the limiting phase down one strip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, NotSupportedError, ShapeError

__all__ = [
    "Jump",
    "Delta",
    "DeltaPrime",
    "DirichletWall",
    "NeumannWall",
    "BoundaryCondition",
    "DIRICHLET",
    "NEUMANN",
    "Robin",
    "Cell",
    "ChainOperator",
    "Eigenvalue",
    "SpectrumReport",
    "Transfer",
    "assemble",
    "single_cell",
    "transfer_matrix",
    "secular_value",
    "prufer_count",
    "eigenvalues_in",
    "lowest_eigenvalues",
    "spectral_floor",
    "decoupled_spectrum",
    "merge_eps",
]

_JUMP_KINDS = ("Delta", "DeltaPrime", "DirichletWall", "NeumannWall")
_BC_KINDS = ("Dirichlet", "Neumann", "Robin")
_HALF_PI = 0.5 * math.pi
# kL below which a free segment is propagated by its matrix instead of its phase
_PHASE_SWITCH = 1.0
_RENORM = 1e100


@dataclass(frozen=True)
class Jump:
    """A point interaction or wall. ``strength`` is ignored for walls."""

    kind: str
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in _JUMP_KINDS:
            raise DomainError(f"unknown jump kind {self.kind!r}")
        if self.is_wall:
            object.__setattr__(self, "strength", 0.0)
        elif not math.isfinite(self.strength):
            raise DomainError("interaction strength must be finite")

    @property
    def is_wall(self) -> bool:
        return self.kind in ("DirichletWall", "NeumannWall")

    def to_dict(self) -> dict:
        if self.is_wall:
            return {"kind": self.kind}
        return {"kind": self.kind, "strength": float(self.strength)}

    @classmethod
    def from_dict(cls, data: dict) -> "Jump":
        return cls(data["kind"], float(data.get("strength", 0.0) or 0.0))


def Delta(strength: float) -> Jump:
    return Jump("Delta", float(strength))


def DeltaPrime(strength: float) -> Jump:
    return Jump("DeltaPrime", float(strength))


DirichletWall = Jump("DirichletWall")
NeumannWall = Jump("NeumannWall")


@dataclass(frozen=True)
class BoundaryCondition:
    """End condition. ``Robin(b)`` means ``u' = b/2 u`` on the left, ``u' = -b/2 u`` on the right."""

    kind: str
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in _BC_KINDS:
            raise DomainError(f"unknown boundary condition {self.kind!r}")
        if self.kind != "Robin":
            object.__setattr__(self, "strength", 0.0)
        elif not math.isfinite(self.strength):
            raise DomainError("Robin strength must be finite")

    def to_dict(self) -> dict:
        if self.kind == "Robin":
            return {"kind": "Robin", "strength": float(self.strength)}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, data) -> "BoundaryCondition":
        if isinstance(data, str):
            return cls(data)
        return cls(data["kind"], float(data.get("strength", 0.0) or 0.0))

    # phase of (u, u') selected at the left end, in [0, pi)
    def left_phase(self) -> float:
        if self.kind == "Dirichlet":
            return 0.0
        if self.kind == "Neumann":
            return _HALF_PI
        return math.atan2(1.0, 0.5 * self.strength)

    # phase the solution must reach at the right end, in (0, pi]
    def right_phase(self) -> float:
        if self.kind == "Dirichlet":
            return math.pi
        if self.kind == "Neumann":
            return _HALF_PI
        return math.atan2(1.0, -0.5 * self.strength)

    def left_vector(self) -> tuple[float, float]:
        if self.kind == "Dirichlet":
            return 0.0, 1.0
        if self.kind == "Neumann":
            return 1.0, 0.0
        return 1.0, 0.5 * self.strength

    def right_residual(self, u: float, du: float) -> float:
        if self.kind == "Dirichlet":
            return u
        if self.kind == "Neumann":
            return du
        return du + 0.5 * self.strength * u


DIRICHLET = BoundaryCondition("Dirichlet")
NEUMANN = BoundaryCondition("Neumann")


def Robin(strength: float) -> BoundaryCondition:
    return BoundaryCondition("Robin", float(strength))


@dataclass(frozen=True)
class Cell:
    d: float
    jump: Jump
    label: int = 0

    def __post_init__(self):
        if not (self.d > 0.0 and math.isfinite(self.d)):
            raise DomainError(f"cell length must be positive, got {self.d!r}")
        if self.jump.is_wall:
            raise DomainError("walls may only appear between cells")

    def to_dict(self) -> dict:
        return {"d": float(self.d), "jump": self.jump.to_dict(), "label": int(self.label)}

    @classmethod
    def from_dict(cls, data: dict) -> "Cell":
        return cls(float(data["d"]), Jump.from_dict(data["jump"]), int(data.get("label", 0)))


@dataclass(frozen=True)
class ChainOperator:
    cells: tuple[Cell, ...]
    couplings: tuple[Jump, ...]
    left_bc: BoundaryCondition = DIRICHLET
    right_bc: BoundaryCondition = DIRICHLET
    origin: float = 0.0
    _program: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if not self.cells:
            raise ShapeError("a chain needs at least one cell")
        if len(self.couplings) != len(self.cells) - 1:
            raise ShapeError(
                f"{len(self.cells)} cells need {len(self.cells) - 1} couplings, got {len(self.couplings)}"
            )
        prog = []
        for i, cell in enumerate(self.cells):
            half = 0.5 * cell.d
            prog.append((0, half))
            prog.append((1 if cell.jump.kind == "Delta" else 2, cell.jump.strength))
            prog.append((0, half))
            if i < len(self.couplings):
                c = self.couplings[i]
                if c.is_wall:
                    prog.append((3, c.kind))
                else:
                    prog.append((1 if c.kind == "Delta" else 2, c.strength))
        object.__setattr__(self, "_program", tuple(prog))

    @property
    def length(self) -> float:
        return math.fsum(c.d for c in self.cells)

    @property
    def breakpoints(self) -> np.ndarray:
        """Cell boundaries ``x_0 < x_1 < ... < x_n`` measured from ``origin``."""
        return self.origin + np.concatenate(([0.0], np.cumsum([c.d for c in self.cells])))

    @property
    def midpoints(self) -> np.ndarray:
        x = self.breakpoints
        return 0.5 * (x[:-1] + x[1:])

    @property
    def has_walls(self) -> bool:
        return any(c.is_wall for c in self.couplings)

    @property
    def has_delta_prime(self) -> bool:
        return any(c.jump.kind == "DeltaPrime" for c in self.cells) or any(
            c.kind == "DeltaPrime" for c in self.couplings
        )

    def segments(self) -> list["ChainOperator"]:
        """Split at walls into wall-free sub-chains with the induced end conditions."""
        if not self.has_walls:
            return [self]
        out = []
        start = 0
        left = self.left_bc
        origin = self.origin
        for i, c in enumerate(self.couplings):
            if not c.is_wall:
                continue
            right = DIRICHLET if c.kind == "DirichletWall" else NEUMANN
            cells = self.cells[start : i + 1]
            out.append(ChainOperator(cells, self.couplings[start:i], left, right, origin))
            origin += math.fsum(x.d for x in cells)
            left = right
            start = i + 1
        out.append(ChainOperator(self.cells[start:], self.couplings[start:], left, self.right_bc, origin))
        return out

    def with_alphas(self, alphas: dict[int, float]) -> "ChainOperator":
        """Copy with the interior strengths of the cells at the given positions replaced."""
        cells = list(self.cells)
        for i, a in alphas.items():
            c = cells[i]
            cells[i] = Cell(c.d, Jump(c.jump.kind, float(a)), c.label)
        return ChainOperator(tuple(cells), self.couplings, self.left_bc, self.right_bc, self.origin)

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "couplings": [c.to_dict() for c in self.couplings],
            "leftBC": self.left_bc.to_dict(),
            "rightBC": self.right_bc.to_dict(),
            "origin": float(self.origin),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChainOperator":
        return assemble(
            [Cell.from_dict(c) for c in data["cells"]],
            [Jump.from_dict(c) for c in data.get("couplings", [])],
            BoundaryCondition.from_dict(data.get("leftBC", "Dirichlet")),
            BoundaryCondition.from_dict(data.get("rightBC", "Dirichlet")),
            float(data.get("origin", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChainOperator":
        return cls.from_dict(json.loads(text))


def assemble(cells, couplings, left_bc=DIRICHLET, right_bc=DIRICHLET, origin=0.0) -> ChainOperator:
    return ChainOperator(tuple(cells), tuple(couplings), left_bc, right_bc, float(origin))


def single_cell(d: float, alpha: float, bc: BoundaryCondition = DIRICHLET, kind: str = "Delta") -> ChainOperator:
    """One cell of length ``d`` with strength ``alpha`` at the centre and ``bc`` at both ends."""
    return assemble([Cell(d, Jump(kind, alpha))], [], bc, bc)


# ---------------------------------------------------------------------------
# transfer matrices and the secular function


class Transfer(NamedTuple):
    """Transfer matrix of one wall-free segment: ``exp(log_scale) * matrix``."""

    matrix: np.ndarray
    log_scale: float


def _free_factor(length: float, lam: float) -> tuple[float, float, float, float, float]:
    # returns (a, b, c, d, log_scale) of [[a, b], [c, d]] propagating (u, u')
    if lam > 0.0:
        k = math.sqrt(lam)
        s, co = math.sin(k * length), math.cos(k * length)
        return co, s / k, -k * s, co, 0.0
    if lam == 0.0:
        return 1.0, length, 0.0, 1.0, 0.0
    kap = math.sqrt(-lam)
    x = kap * length
    if x < 1e-8:
        return 1.0, length, kap * x, 1.0, 0.0
    if x <= 700.0:
        ch, sh = math.cosh(x), math.sinh(x)
        return ch, sh / kap, kap * sh, ch, 0.0
    e = math.exp(-2.0 * x)
    return 0.5 * (1 + e), 0.5 * (1 - e) / kap, 0.5 * kap * (1 - e), 0.5 * (1 + e), x


def _jump_factor(code: int, g: float) -> tuple[float, float, float, float]:
    if code == 1:
        return 1.0, 0.0, g, 1.0
    return 1.0, g, 0.0, 1.0


def transfer_matrix(op: ChainOperator, lam: float) -> list[Transfer]:
    """Transfer matrices of the maximal wall-free segments of ``op``.

    Every factor has unit determinant, so each returned product does too
    (up to the stored exponential scale).
    """
    out = []
    for seg in op.segments():
        m = np.eye(2)
        log_scale = 0.0
        for code, val in seg._program:
            if code == 0:
                a, b, c, d, ls = _free_factor(val, lam)
                log_scale += ls
            else:
                a, b, c, d = _jump_factor(code, val)
            m = np.array([[a, b], [c, d]]) @ m
            big = np.abs(m).max()
            if big > _RENORM:
                m /= big
                log_scale += math.log(big)
        out.append(Transfer(m, log_scale))
    return out


def _shoot(op: ChainOperator, lam: float) -> tuple[float, float]:
    # propagates the left boundary vector, rescaling by positive factors only
    u, du = op.left_bc.left_vector()
    for code, val in op._program:
        if code == 0:
            a, b, c, d, _ = _free_factor(val, lam)
            u, du = a * u + b * du, c * u + d * du
            big = max(abs(u), abs(du))
            if big > _RENORM:
                u /= big
                du /= big
        elif code == 1:
            du = du + val * u
        else:
            u = u + val * du
    return u, du


def secular_value(op: ChainOperator, lam: float) -> float:
    """Boundary mismatch of the solution shot from the left end.

    Vanishes exactly at eigenvalues and changes sign across each of them.
    The chain must be wall-free; split with :meth:`ChainOperator.segments`.
    """
    if op.has_walls:
        raise ShapeError("secular_value needs a wall-free chain; split it with segments()")
    u, du = _shoot(op, float(lam))
    return op.right_bc.right_residual(u, du)


# ---------------------------------------------------------------------------
# Prüfer counting


def _free_phase(j: int, phi: float, length: float, lam: float) -> tuple[int, float]:
    if lam > 0.0:
        k = math.sqrt(lam)
        if k * length >= _PHASE_SWITCH:
            # scaled phase psi with u ~ sin psi, u' ~ k cos psi rotates uniformly
            psi = math.atan2(k * math.sin(phi), math.cos(phi)) + k * length
            turns = math.floor(psi / math.pi)
            rest = psi - turns * math.pi
            if rest >= math.pi:
                turns += 1
                rest -= math.pi
            elif rest < 0.0:
                turns -= 1
                rest += math.pi
            new_phi = math.atan2(math.sin(rest), k * math.cos(rest))
            if new_phi >= math.pi:
                return j + turns + 1, 0.0
            return j + turns, new_phi
    # at most one zero of u inside the segment: propagate and inspect signs
    a, b, c, d, _ = _free_factor(length, lam)
    s, co = math.sin(phi), math.cos(phi)
    u = a * s + b * co
    du = c * s + d * co
    if u > 0.0:
        return j, math.atan2(u, du)
    if u < 0.0:
        return j + 1, math.atan2(-u, -du)
    return (j, 0.0) if du > 0.0 else (j + 1, 0.0)


def _delta_phase(j: int, phi: float, g: float) -> tuple[int, float]:
    s = math.sin(phi)
    if s == 0.0:
        return j, 0.0
    return j, math.atan2(s, math.cos(phi) + g * s)


def _delta_prime_phase(j: int, phi: float, g: float) -> tuple[int, float]:
    co = math.cos(phi)
    if co == 0.0 or g == 0.0:
        return j, phi
    raw = math.atan2(math.sin(phi) + g * co, co)
    if co > 0.0:
        return (j, raw) if raw >= 0.0 else (j - 1, raw + math.pi)
    if raw >= math.pi:
        return j + 1, 0.0
    return (j, raw) if raw > 0.0 else (j + 1, raw + math.pi)


def _segment_count(op: ChainOperator, lam: float) -> int:
    j = 0
    phi = op.left_bc.left_phase()
    k_min = 0
    for code, val in op._program:
        if code == 0:
            j, phi = _free_phase(j, phi, val, lam)
        elif code == 1:
            j, phi = _delta_phase(j, phi, val)
        else:
            j, phi = _delta_prime_phase(j, phi, val)
            if val < 0.0:
                k_min -= 1
    target = op.right_bc.right_phase()
    diff = phi - target
    if diff > 0.0:
        n = j - k_min + 1
    elif diff > -math.pi:
        n = j - k_min
    else:
        n = j - k_min - 1
    return max(n, 0)


def _check_supported(op: ChainOperator) -> None:
    if op.has_delta_prime and "Robin" in (op.left_bc.kind, op.right_bc.kind):
        raise NotSupportedError("delta-prime interactions combined with Robin ends are not supported")


def prufer_count(op: ChainOperator, lam: float) -> int:
    """Number of eigenvalues of ``op`` strictly below ``lam`` (with multiplicity)."""
    lam = float(lam)
    total = 0
    for seg in op.segments():
        _check_supported(seg)
        total += _segment_count(seg, lam)
    return total


# ---------------------------------------------------------------------------
# eigenvalue location


def merge_eps(lam: float) -> float:
    return 1e-10 * max(1.0, abs(lam))


@dataclass(frozen=True)
class Eigenvalue:
    value: float
    bracket: tuple[float, float]
    multiplicity: int = 1
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bracket": list(self.bracket),
            "multiplicity": self.multiplicity,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Eigenvalue":
        return cls(
            float(data["value"]),
            tuple(float(x) for x in data["bracket"]),
            int(data.get("multiplicity", 1)),
            float(data.get("residual", 0.0)),
        )


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues located in ``[window[0], window[1])`` plus the counts that certify them."""

    eigenvalues: tuple[Eigenvalue, ...]
    window: tuple[float, float]
    count_lower: int
    count_upper: int

    @property
    def values(self) -> list[float]:
        out = []
        for e in self.eigenvalues:
            out.extend([e.value] * e.multiplicity)
        return out

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues)

    @property
    def certified(self) -> bool:
        return self.total_multiplicity == self.count_upper - self.count_lower

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
            "window": list(self.window),
            "countCertificate": {
                "pruferCountAtLower": self.count_lower,
                "pruferCountAtUpper": self.count_upper,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectrumReport":
        cert = data["countCertificate"]
        return cls(
            tuple(Eigenvalue.from_dict(e) for e in data["eigenvalues"]),
            tuple(float(x) for x in data["window"]),
            int(cert["pruferCountAtLower"]),
            int(cert["pruferCountAtUpper"]),
        )


def spectral_floor(op: ChainOperator, start: float = -1.0, max_doublings: int = 200) -> float:
    """A value with no eigenvalue below it, found by pushing down until the count is zero."""
    lam = min(float(start), -1.0)
    for _ in range(max_doublings):
        if prufer_count(op, lam) == 0:
            return lam
        lam *= 4.0
    raise ConvergenceError("no spectral floor found")


def _isolate(seg, lo, hi, nlo, nhi, tol, out, max_iter):
    # split [lo, hi) until each piece holds a single eigenvalue
    stack = [(lo, hi, nlo, nhi)]
    it = 0
    while stack:
        a, b, na, nb = stack.pop()
        if nb == na:
            continue
        if nb - na == 1:
            out.append((a, b, na))
            continue
        mid = 0.5 * (a + b)
        if b - a <= tol * max(1.0, abs(mid)) or mid <= a or mid >= b:
            # unresolvable cluster: report it as one multiple eigenvalue
            out.append((a, b, na, nb - na))
            continue
        it += 1
        if it > max_iter + 64 * (nhi - nlo):
            raise ConvergenceError("eigenvalue isolation exceeded its iteration cap")
        nm = _segment_count(seg, mid)
        stack.append((mid, b, nm, nb))
        stack.append((a, mid, na, nm))


def _refine(seg, a, b, na, tol, max_iter) -> Eigenvalue:
    fa = secular_value(seg, a)
    fb = secular_value(seg, b)
    f = lambda x: secular_value(seg, x)
    if fa == 0.0:
        lam = a
    elif fb == 0.0 or fa * fb > 0.0:
        # sign information lost (e.g. eigenvalue at the bracket edge): bisect on counts
        lo, hi = a, b
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if hi - lo <= tol * max(1.0, abs(mid)) or mid <= lo or mid >= hi:
                break
            if _segment_count(seg, mid) > na:
                hi = mid
            else:
                lo = mid
        lam = 0.5 * (lo + hi)
    else:
        # accuracy is measured against max(1, |lam|), so no point resolving below 1e-15
        xtol = 1e-15 * max(1.0, min(abs(a), abs(b)))
        lam = brentq(f, a, b, xtol=xtol, rtol=1e-15, maxiter=max_iter)
    w = tol * max(1.0, abs(lam))
    lo, hi = max(a, lam - w), min(b, lam + w)
    # widen the bracket until the counts on either side certify it
    for _ in range(60):
        if _segment_count(seg, lo) <= na:
            break
        lo = max(a, lam - 2.0 * (lam - lo) - w)
    for _ in range(60):
        if _segment_count(seg, hi) >= na + 1 or hi >= b:
            break
        hi = min(b, lam + 2.0 * (hi - lam) + w)
    return Eigenvalue(float(lam), (float(lo), float(hi)), 1, abs(f(lam)))


def _segment_eigenvalues(seg, lo, hi, tol, max_iter) -> tuple[list[Eigenvalue], int, int]:
    _check_supported(seg)
    nlo = _segment_count(seg, lo)
    nhi = _segment_count(seg, hi)
    pieces: list = []
    _isolate(seg, lo, hi, nlo, nhi, tol, pieces, max_iter)
    eigs = []
    for p in pieces:
        if len(p) == 3:
            eigs.append(_refine(seg, p[0], p[1], p[2], tol, max_iter))
        else:
            a, b, _, mult = p
            eigs.append(Eigenvalue(0.5 * (a + b), (a, b), mult, float("nan")))
    return eigs, nlo, nhi


def eigenvalues_in(
    op: ChainOperator,
    window: tuple[float, float] = (-math.inf, math.inf),
    tol: float = 1e-9,
    max_iter: int = 400,
) -> SpectrumReport:
    """All eigenvalues of ``op`` in ``[lower, upper)``.

    ``tol`` is relative: each eigenvalue is certified inside a bracket of
    half-width at most ``tol * max(1, |lam|)`` (the value itself is usually
    polished to near machine precision). An infinite lower bound is replaced
    by :func:`spectral_floor`; the upper bound must be finite.
    """
    lower, upper = float(window[0]), float(window[1])
    if not lower < upper:
        raise DomainError("window must satisfy lower < upper")
    if not math.isfinite(upper):
        raise DomainError("the upper window bound must be finite")
    segs = op.segments()
    spectra = []
    n_lower = n_upper = 0
    for seg in segs:
        _check_supported(seg)
        lo = lower if math.isfinite(lower) else min(spectral_floor(seg), upper - 1.0)
        eigs, a, b = _segment_eigenvalues(seg, lo, upper, tol, max_iter)
        n_lower += a
        n_upper += b
        spectra.append(eigs)
    merged = _merge(spectra, (lower, upper))
    return SpectrumReport(tuple(merged), (lower, upper), n_lower, n_upper)


def lowest_eigenvalues(op: ChainOperator, count: int, tol: float = 1e-9) -> list[float]:
    """The ``count`` lowest eigenvalues with multiplicity."""
    if count < 1:
        return []
    floor = spectral_floor(op)
    lo, hi = floor, 1.0
    for _ in range(200):
        if prufer_count(op, hi) >= count:
            break
        lo, hi = hi, 2.0 * hi + 1.0
    else:
        raise ConvergenceError("could not bracket the requested eigenvalues")
    # shrink the window so it holds few eigenvalues beyond the requested ones
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-6 * max(1.0, abs(hi)):
            break
        if prufer_count(op, mid) >= count:
            hi = mid
        else:
            lo = mid
    upper = hi + 1e-6 * max(1.0, abs(hi))
    return eigenvalues_in(op, (floor, upper), tol).values[:count]


def _merge(spectra: Sequence[Sequence[Eigenvalue]], window) -> list[Eigenvalue]:
    items = sorted((e for s in spectra for e in s), key=lambda e: e.value)
    out: list[Eigenvalue] = []
    lo, hi = window
    for e in items:
        if not (lo <= e.value < hi):
            continue
        if out and abs(e.value - out[-1].value) <= merge_eps(e.value):
            prev = out[-1]
            out[-1] = Eigenvalue(
                prev.value,
                (min(prev.bracket[0], e.bracket[0]), max(prev.bracket[1], e.bracket[1])),
                prev.multiplicity + e.multiplicity,
                max(prev.residual, e.residual),
            )
        else:
            out.append(e)
    return out


@dataclass(frozen=True)
class MergedSpectrum:
    eigenvalues: tuple[tuple[float, int], ...]
    window: tuple[float, float]
    clusters: tuple[float, ...] = ()

    @property
    def values(self) -> list[float]:
        return [v for v, m in self.eigenvalues for _ in range(m)]


def decoupled_spectrum(
    cell_spectra: Iterable[Sequence[float]],
    window: tuple[float, float],
    cluster_radius: float | None = None,
    cluster_size: int = 10,
) -> MergedSpectrum:
    """Multiset union of independent spectra restricted to ``[lower, upper)``.

    Values closer than :func:`merge_eps` are one eigenvalue whose multiplicity
    counts how many inputs hit it. With ``cluster_radius`` set, points of the
    window around which at least ``cluster_size`` distinct input lists place an
    eigenvalue are reported as accumulation candidates.
    """
    lo, hi = window
    tagged = []
    for idx, spec in enumerate(cell_spectra):
        for v in spec:
            if lo <= v < hi:
                tagged.append((float(v), idx))
    tagged.sort()
    merged: list[list] = []
    for v, _ in tagged:
        if merged and abs(v - merged[-1][0]) <= merge_eps(v):
            merged[-1][1] += 1
        else:
            merged.append([v, 1])
    clusters: list[float] = []
    if cluster_radius is not None and tagged:
        vals = np.array([v for v, _ in tagged])
        owners = np.array([i for _, i in tagged])
        for v in vals:
            near = np.abs(vals - v) <= cluster_radius
            if len(set(owners[near].tolist())) >= cluster_size:
                if not clusters or abs(v - clusters[-1]) > cluster_radius:
                    clusters.append(float(v))
    return MergedSpectrum(tuple((v, m) for v, m in merged), (lo, hi), tuple(clusters))
