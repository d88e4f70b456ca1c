"""Brute-force finite-difference eigenvalues for chains of delta interactions.

Each wall-free piece of a chain is put on a uniform grid whose nodes hit
every cell boundary and every cell centre. ``-u''`` becomes the three-point
stencil, a delta of strength ``g`` at a node adds ``g/h`` to that diagonal
entry, and ends are handled as follows:

* Dirichlet: the boundary node is dropped.
* Neumann / Robin: a ghost node is eliminated with the centred difference of
  ``u'``; the resulting row is symmetrised by rescaling the boundary unknown,
  which gives diagonal ``2/h^2 + b/h`` and off-diagonal ``-sqrt(2)/h^2``.

The scheme is second order when interactions sit on nodes, so three grids
with ratio 2 support a Richardson step with an empirically fitted order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .chain import ChainOperator
from .errors import DomainError, GridError, NotSupportedError

__all__ = [
    "GridProblem",
    "OracleResult",
    "discretize",
    "sturm_count",
    "grid_eigenvalues",
    "default_steps",
    "oracle_eigenvalues",
]

_MAX_NODES = 1 << 22


@dataclass(frozen=True)
class GridProblem:
    """Symmetric tridiagonal matrices, one block per wall-free piece."""

    h: float
    blocks: tuple[tuple[np.ndarray, np.ndarray], ...]
    node_map: dict

    @property
    def diag(self) -> np.ndarray:
        return np.concatenate([d for d, _ in self.blocks])

    @property
    def offdiag(self) -> np.ndarray:
        # block boundaries contribute explicit zeros
        parts = []
        for i, (_, e) in enumerate(self.blocks):
            parts.append(e)
            if i < len(self.blocks) - 1:
                parts.append(np.zeros(1))
        return np.concatenate(parts) if parts else np.zeros(0)

    @property
    def size(self) -> int:
        return sum(len(d) for d, _ in self.blocks)

    def norm(self) -> float:
        return max(float(np.abs(d).max() + 2.0 * (np.abs(e).max() if len(e) else 0.0)) for d, e in self.blocks)


def _half_steps(op: ChainOperator, h: float) -> list[int]:
    steps = []
    for c in op.cells:
        n = round(0.5 * c.d / h)
        if n < 1:
            raise GridError(f"step {h!r} too coarse for a cell of length {c.d!r}")
        if abs(n * h - 0.5 * c.d) > 0.5 * h:
            raise GridError("breakpoint misses the grid by more than h/2")
        steps.append(n)
    return steps


def _segment_block(seg: ChainOperator, h: float, steps: list[int], first_node: int, node_map: dict):
    # node positions relative to the segment start, in units of h
    total = 2 * sum(steps)
    bumps = np.zeros(total + 1)
    pos = 0
    for cell_idx, (cell, n) in enumerate(zip(seg.cells, steps)):
        if cell.jump.kind != "Delta":
            raise NotSupportedError("the finite-difference oracle handles delta interactions only")
        bumps[pos + n] += cell.jump.strength / h
        node_map[("centre", first_node + cell_idx)] = pos + n
        pos += 2 * n
        if cell_idx < len(seg.couplings):
            coup = seg.couplings[cell_idx]
            if coup.kind != "Delta":
                raise NotSupportedError("the finite-difference oracle handles delta interactions only")
            bumps[pos] += coup.strength / h
            node_map[("break", first_node + cell_idx + 1)] = pos
    inv = 1.0 / (h * h)
    diag = np.full(total + 1, 2.0 * inv) + bumps
    off = np.full(total, -inv)
    lo, hi = 0, total + 1
    if seg.left_bc.kind == "Dirichlet":
        lo = 1
    else:
        diag[0] += seg.left_bc.strength / h
        off[0] = -math.sqrt(2.0) * inv
    if seg.right_bc.kind == "Dirichlet":
        hi = total
    else:
        diag[total] += seg.right_bc.strength / h
        off[total - 1] = -math.sqrt(2.0) * inv
    return diag[lo:hi].copy(), off[lo : hi - 1].copy()


def discretize(op: ChainOperator, h: float) -> GridProblem:
    """Finite-difference matrix of ``op`` on a grid of step ``h``."""
    if not h > 0.0:
        raise DomainError("grid step must be positive")
    steps = _half_steps(op, h)
    if 2 * sum(steps) > _MAX_NODES:
        raise GridError("grid too fine")
    blocks = []
    node_map: dict = {}
    first = 0
    for seg in op.segments():
        n = len(seg.cells)
        d, e = _segment_block(seg, h, steps[first : first + n], first, node_map)
        if len(d) == 0:
            raise GridError("a piece has no interior nodes")
        blocks.append((d, e))
        first += n
    return GridProblem(h, tuple(blocks), node_map)


def _block_count(d: np.ndarray, e: np.ndarray, lam: float) -> int:
    count = 0
    q = 1.0
    tiny = 1e-300
    e2 = (e * e).tolist()
    for i, a in enumerate(d.tolist()):
        q = (a - lam) - (e2[i - 1] / q if i else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def sturm_count(gp: GridProblem, lam: float) -> int:
    """Number of matrix eigenvalues strictly below ``lam``."""
    return sum(_block_count(d, e, float(lam)) for d, e in gp.blocks)


def grid_eigenvalues(gp: GridProblem, count: int) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the grid problem."""
    vals = []
    for d, e in gp.blocks:
        k = min(count, len(d))
        if len(d) == 1:
            vals.append(d.copy())
            continue
        vals.append(eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1)))
    out = np.sort(np.concatenate(vals))
    if len(out) < count:
        raise GridError("grid has fewer eigenvalues than requested")
    return out[:count]


def _commensurate_step(op: ChainOperator) -> float | None:
    halves = [Fraction(0.5 * c.d).limit_denominator(1 << 20) for c in op.cells]
    if any(abs(float(f) - 0.5 * c.d) > 1e-13 * c.d for f, c in zip(halves, op.cells)):
        return None
    num = reduce(math.gcd, (f.numerator for f in halves))
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in halves))
    return num / den


def default_steps(op: ChainOperator, levels: int = 3, min_nodes: int = 1 << 12) -> list[float]:
    """Grid steps ``h, h/2, h/4, ...`` with ``h`` about ``L / min_nodes``.

    When all half-cell lengths share a common rational step the grid is
    aligned to it exactly; otherwise breakpoints are snapped to the nearest
    node.
    """
    length = op.length
    base = _commensurate_step(op)
    if base is None:
        h = length / min_nodes
    else:
        h = base
        while length / h < min_nodes:
            h *= 0.5
    if length / h * 2 ** (levels - 1) > _MAX_NODES:
        raise GridError("chain needs a grid finer than the node budget allows")
    return [h / 2**i for i in range(levels)]


@dataclass(frozen=True)
class OracleResult:
    values: np.ndarray
    errors: np.ndarray
    orders: np.ndarray
    raw: np.ndarray
    steps: tuple[float, ...]

    def within(self, other, factor: float = 3.0) -> np.ndarray:
        other = np.asarray(other, dtype=float)
        return np.abs(other - self.values) <= factor * self.errors


def oracle_eigenvalues(op: ChainOperator, count: int, hs=None) -> OracleResult:
    """Richardson-extrapolated lowest ``count`` eigenvalues with error estimates.

    With two steps the leading order is assumed to be 2. With three or more
    the order is fitted from the last three levels, and the error estimate is
    the gap between the fitted-order and order-2 extrapolations plus a
    rounding floor proportional to the matrix norm.
    """
    hs = default_steps(op) if hs is None else [float(h) for h in hs]
    if len(hs) < 2:
        raise DomainError("Richardson extrapolation needs at least two steps")
    for a, b in zip(hs, hs[1:]):
        if not math.isclose(a, 2.0 * b, rel_tol=1e-12):
            raise DomainError("steps must decrease by a factor of 2")
    raw = []
    floor = 0.0
    for h in hs:
        gp = discretize(op, h)
        raw.append(grid_eigenvalues(gp, count))
        floor = 10.0 * np.finfo(float).eps * gp.norm()
    raw = np.array(raw)
    fine, mid = raw[-1], raw[-2]
    r2 = fine + (fine - mid) / 3.0
    if len(hs) == 2:
        return OracleResult(r2, np.abs(r2 - fine) + floor, np.full(count, 2.0), raw, tuple(hs))
    coarse = raw[-3]
    d1 = mid - coarse
    d2 = fine - mid
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / d2
        p = np.where((ratio > 1.0) & np.isfinite(ratio), np.log2(np.abs(ratio)), 2.0)
    p = np.clip(p, 0.5, 6.0)
    rp = fine + d2 / (2.0**p - 1.0)
    err = np.abs(rp - r2) + floor
    return OracleResult(rp, err, p, raw, tuple(hs))
