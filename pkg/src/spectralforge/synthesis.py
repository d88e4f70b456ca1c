"""Build a delta-interaction chain whose spectrum hits prescribed targets.

Cells are indexed by integers ``k``. Cells ``k <= 0`` carry points of a
generator sequence whose accumulation set is the requested essential
spectrum; cells ``1..m`` carry the discrete targets. For a finite target
list the cells ``k > m`` reuse the generator sequence (cell ``m + j`` takes
the same value as cell ``1 - j``).

Every cell is a Dirichlet cell with a centred delta of strength ``alpha_k``
whose lowest eigenvalue is placed at (or near) ``s_k``. A truncation of
order ``n`` couples the cells ``-n+1..n`` through deltas of strength
``beta_k`` at the breakpoints ``x_{-n+1}..x_{n-1}`` and leaves ``tail``
further decoupled cells on each side. The pipeline is

1. :func:`build_state`: lengths, neighbourhoods, alpha boxes, initial betas;
2. :func:`escalate_beta`: raise the betas until the window spectrum is
   certified to sit in the target neighbourhoods for every alpha in the box;
3. :func:`tune_alphas`: Gauss-Seidel on the target strengths until the
   window eigenvalues equal the targets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import count
from typing import Iterator, Sequence

from scipy.optimize import brentq

from .chain import (
    DIRICHLET,
    Cell,
    ChainOperator,
    Delta,
    DirichletWall,
    SpectrumReport,
    assemble,
    eigenvalues_in,
)
from .closed_forms import eval_fd
from .errors import BracketError, ConvergenceError, DomainError, EscalationError, SpecError

__all__ = [
    "SpectralTarget",
    "SynthesisState",
    "TuneResult",
    "ProbeResult",
    "generate_ess_sequence",
    "choose_lengths",
    "choose_neighborhoods",
    "beta_schedule",
    "build_state",
    "state_for",
    "assemble_partly_coupled",
    "decoupled_truncation",
    "escalate_beta",
    "window_check",
    "tune_alphas",
    "convergence_probe",
    "synthesize",
]

# lengths are rounded down to this grid so finite-difference checks stay commensurate
_LENGTH_QUANTUM = 2.0**-10
# keeps (pi/d)^2 strictly above the largest value the cell must accommodate
_LENGTH_SAFETY = 0.95
_SHRINK_CAP = 60


# ---------------------------------------------------------------------------
# targets


def _merge_intervals(intervals) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted((float(a), float(b)) for a, b in intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


@dataclass(frozen=True)
class SpectralTarget:
    """Essential spectrum (closed intervals plus isolated points), discrete targets and a window."""

    intervals: tuple[tuple[float, float], ...]
    points: tuple[float, ...]
    disc: tuple[float, ...]
    window: tuple[float, float]

    def __post_init__(self):
        try:
            ivs = tuple((float(a), float(b)) for a, b in self.intervals)
            pts = tuple(float(p) for p in self.points)
            disc = tuple(float(s) for s in self.disc)
            t1, t2 = (float(x) for x in self.window)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"malformed target: {exc}") from None
        for name, vals in (("intervals", [x for iv in ivs for x in iv]), ("points", pts), ("disc", disc)):
            if not all(math.isfinite(v) for v in vals):
                raise SpecError(f"{name} must be finite")
        if not (math.isfinite(t1) and math.isfinite(t2) and t1 < t2):
            raise SpecError("window must be finite with T1 < T2")
        for a, b in ivs:
            if not a < b:
                raise SpecError(f"interval [{a}, {b}] is empty or degenerate")
        if not ivs and not pts:
            raise SpecError("essential spectrum must be non-empty")
        merged = tuple(_merge_intervals(ivs))
        object.__setattr__(self, "intervals", merged)
        object.__setattr__(self, "points", tuple(sorted(set(pts))))
        object.__setattr__(self, "disc", disc)
        object.__setattr__(self, "window", (t1, t2))
        for p in self.points:
            if t1 <= p <= t2:
                raise SpecError(f"isolated essential point {p} lies in the window")
        for a, b in merged:
            lo, hi = max(a, t1), min(b, t2)
            if lo == hi:
                raise SpecError(f"interval [{a}, {b}] meets the window in a single point")
        if len(set(disc)) != len(disc):
            raise SpecError("discrete targets must be distinct")
        for s in disc:
            if not t1 < s < t2:
                raise SpecError(f"discrete target {s} is outside the open window")
            if any(lo <= s <= hi for lo, hi in self.interior_closure()):
                raise SpecError(f"discrete target {s} touches the essential spectrum in the window")

    @property
    def m(self) -> int:
        return len(self.disc)

    def interior_closure(self) -> list[tuple[float, float]]:
        """Closure of the open interior of the essential spectrum inside the window."""
        t1, t2 = self.window
        out = []
        for a, b in self.intervals:
            lo, hi = max(a, t1), min(b, t2)
            if lo < hi:
                out.append((lo, hi))
        return out

    def in_interior(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.interior_closure())

    def distance_to_ess(self, x: float) -> float:
        dist = [abs(x - p) for p in self.points]
        dist += [0.0 if a <= x <= b else min(abs(x - a), abs(x - b)) for a, b in self.intervals]
        return min(dist)

    def to_dict(self) -> dict:
        return {
            "ess": {"intervals": [list(iv) for iv in self.intervals], "points": list(self.points)},
            "disc": list(self.disc),
            "window": list(self.window),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralTarget":
        try:
            ess = data["ess"]
            return cls(
                tuple(tuple(iv) for iv in ess.get("intervals", [])),
                tuple(ess.get("points", [])),
                tuple(data.get("disc", [])),
                tuple(data["window"]),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise SpecError(f"malformed target document: {exc!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SpectralTarget":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# generator sequence


def _bit_reversed(bits: int) -> Iterator[int]:
    for j in range(1 << bits):
        yield int(format(j, f"0{bits}b")[::-1], 2) if bits else 0


def _piece_stream(a: float, b: float, open_a: bool, open_b: bool) -> Iterator[float]:
    # dyadic meshes, coarse to fine; new points in bit-reversed order, then the
    # two ends again (pulled inward by a shrinking amount when they are excluded)
    w = b - a

    def ends(level):
        nudge = w / 2 ** (level + 2)
        yield a + nudge if open_a else a
        yield b - nudge if open_b else b

    yield from ends(0)
    for level in count(1):
        for j in _bit_reversed(level - 1):
            yield a + w * (2 * j + 1) / 2**level
        yield from ends(level)


def _point_stream(p: float) -> Iterator[float]:
    while True:
        yield p


def _components(target: SpectralTarget, use_window: bool):
    comps = [(p, _point_stream(p)) for p in target.points]
    t1, t2 = target.window
    for a, b in target.intervals:
        cuts = [a, b]
        if use_window:
            cuts += [t for t in (t1, t2) if a < t < b]
        cuts.sort()
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                continue
            excl = (lambda x: t1 <= x <= t2) if use_window else (lambda x: False)
            comps.append((lo, _piece_stream(lo, hi, excl(lo), excl(hi))))
    comps.sort(key=lambda c: c[0])
    return [c[1] for c in comps]


def generate_ess_sequence(ess, N: int, window: tuple[float, float] | None = None) -> list[float]:
    """First ``N`` members of a sequence whose accumulation set is the essential spectrum.

    ``ess`` is a :class:`SpectralTarget` (whose window is then honoured) or a
    dict ``{"intervals": [...], "points": [...]}``. Components are visited
    round-robin in order of position. Members that would fall in the closed
    window but outside the open interior of the essential spectrum there are
    moved inward.
    """
    if N < 1:
        raise DomainError("N must be at least 1")
    if isinstance(ess, SpectralTarget):
        target, use_window = ess, True
    else:
        intervals = tuple(tuple(iv) for iv in ess.get("intervals", []))
        points = tuple(ess.get("points", []))
        if not intervals and not points:
            raise SpecError("essential spectrum must be non-empty")
        use_window = window is not None
        if window is None:
            lo = min([p for p in points] + [a for a, _ in intervals]) - 2.0
            window = (lo - 1.0, lo)
        target = SpectralTarget(intervals, points, (), tuple(window))
    streams = _components(target, use_window)
    out = []
    while len(out) < N:
        for st in streams:
            out.append(next(st))
            if len(out) == N:
                break
    return out


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class SynthesisState:
    """Sequences indexed by cell number ``k`` for ``k_min <= k <= k_max``.

    ``beta[k]`` is the coupling at the breakpoint between cells ``k`` and ``k+1``.
    """

    target: SpectralTarget
    k_min: int
    k_max: int
    s: dict[int, float]
    role: dict[int, str]
    d: dict[int, float] = field(default_factory=dict)
    delta: dict[int, float] = field(default_factory=dict)
    alpha_minus: dict[int, float] = field(default_factory=dict)
    alpha_plus: dict[int, float] = field(default_factory=dict)
    alpha: dict[int, float] = field(default_factory=dict)
    beta: dict[int, float] = field(default_factory=dict)
    epsilon: float = 1.0
    escalation_rounds: int = 0

    @property
    def indices(self) -> range:
        return range(self.k_min, self.k_max + 1)

    @property
    def targets(self) -> list[int]:
        return [k for k in self.indices if self.role[k] == "target"]

    def c(self, k: int) -> float:
        return 1.0 / k

    def D(self, k: int) -> float:
        return min(self.d[k], self.d[k + 1])

    def rho(self, k: int) -> float:
        terms = [1.0 / (self.beta[j] * self.D(j) ** 3) for j in (k, k - 1) if j in self.beta]
        return max(terms) / self.D(k) ** 2

    @property
    def s_inf(self) -> float:
        vals = [
            self.s[k] - 0.5 * self.delta[k] if self.role[k] == "target" else self.s[k] for k in self.indices
        ]
        return min(vals)

    @property
    def mu(self) -> float:
        return self.s_inf - 2.0

    @property
    def ell_minus(self) -> float:
        return -math.fsum(self.d[k] for k in self.indices if k <= 0)

    @property
    def ell_plus(self) -> float:
        return math.fsum(self.d[k] for k in self.indices if k >= 1)

    def ball(self, k: int) -> tuple[float, float]:
        return self.s[k] - self.delta[k], self.s[k] + self.delta[k]

    def violations(self) -> list[str]:
        """Every construction inequality that fails, as readable strings."""
        t1, t2 = self.target.window
        out = []
        for k in self.indices:
            if k in self.d:
                bound = (math.pi / self.d[k]) ** 2
                if not t2 < bound:
                    out.append(f"T2 >= (pi/d_{k})^2")
                if not self.s[k] < bound:
                    out.append(f"s_{k} >= (pi/d_{k})^2")
        if self.delta:
            balls = []
            for k in self.targets:
                lo, hi = self.ball(k)
                if not (t1 < lo and hi < t2):
                    out.append(f"ball {k} leaves the window")
                if any(lo <= b and a <= hi for a, b in self.target.interior_closure()):
                    out.append(f"ball {k} meets the essential spectrum")
                balls.append((lo, hi, k))
            balls.sort()
            for (a1, b1, k1), (a2, b2, k2) in zip(balls, balls[1:]):
                if not b1 < a2:
                    out.append(f"balls {k1} and {k2} overlap")
        for k in self.targets:
            if k in self.alpha_minus:
                am, ap = self.alpha_minus[k], self.alpha_plus[k]
                if not (am < 0.0 and ap < 0.0):
                    out.append(f"alpha bounds of cell {k} not negative")
                if ap - am > self.c(k) * self.d[k] * (1 + 1e-12):
                    out.append(f"alpha box of cell {k} too wide")
                if k in self.alpha and not am <= self.alpha[k] <= ap:
                    out.append(f"alpha_{k} outside its box")
        return out

    def check(self) -> "SynthesisState":
        bad = self.violations()
        if bad:
            raise SpecError("; ".join(bad))
        return self


def _cell_values(target: SpectralTarget, k_min: int, k_max: int) -> tuple[dict, dict]:
    m = target.m
    n_gen = max(-k_min + 1, k_max - m, 1)
    gen = generate_ess_sequence(target, n_gen)
    s, role = {}, {}
    for k in range(k_min, k_max + 1):
        if 1 <= k <= m:
            s[k], role[k] = target.disc[k - 1], "target"
        elif k <= 0:
            s[k], role[k] = gen[-k], "generator"
        else:
            s[k], role[k] = gen[k - m - 1], "generator"
    return s, role


def choose_lengths(state: SynthesisState, decay: float = 0.7, cap: float = 1.0) -> dict[int, float]:
    """``d_k = min(pi / sqrt(max(T2, s_k, 1)), cap) * decay^|k|`` times a safety factor, rounded down."""
    if not 0.0 < decay < 1.0:
        raise DomainError("decay ratio must lie in (0, 1)")
    t2 = state.target.window[1]
    out = {}
    for k in state.indices:
        base = min(math.pi / math.sqrt(max(t2, state.s[k], 1.0)), cap)
        d = base * decay ** abs(k) * _LENGTH_SAFETY
        q = math.floor(d / _LENGTH_QUANTUM) * _LENGTH_QUANTUM
        out[k] = q if q >= 4 * _LENGTH_QUANTUM else d
    return out


def _gap(state: SynthesisState, k: int) -> float:
    t1, t2 = state.target.window
    s = state.s[k]
    cands = [s - t1, t2 - s]
    cands += [abs(s - state.s[j]) for j in state.targets if j != k]
    for lo, hi in state.target.interior_closure():
        cands.append(min(abs(s - lo), abs(s - hi)))
    return min(cands)


def _generator_radius(state: SynthesisState, k: int) -> float:
    t1, t2 = state.target.window
    s = state.s[k]
    if t1 <= s <= t2:
        for lo, hi in state.target.interior_closure():
            if lo < s < hi:
                return 0.5 * min(s - lo, hi - s)
        raise SpecError(f"generator value {s} lies in the window but not in the open interior")
    return 0.5 * (t1 - s if s < t1 else s - t2)


def choose_neighborhoods(state: SynthesisState) -> tuple[dict, dict, dict]:
    """Radii ``delta_k`` and the strength boxes ``[alpha_k^-, alpha_k^+]``.

    For targets ``delta_k`` starts at half the gap to everything it must avoid
    and is halved until the box width is at most ``d_k / k``.
    """
    delta, am, ap = {}, {}, {}
    for k in state.indices:
        if state.role[k] != "target":
            delta[k] = _generator_radius(state, k)
            continue
        gap = _gap(state, k)
        if not gap > 0.0:
            raise SpecError(f"target {state.s[k]} has no free neighbourhood")
        dk = state.d[k]
        r = 0.5 * gap
        for _ in range(_SHRINK_CAP + 1):
            lo = eval_fd(dk, state.s[k] - 0.5 * r, guard=0.0)
            hi = eval_fd(dk, state.s[k] + 0.5 * r, guard=0.0)
            if hi - lo <= dk / k and r < 0.5 * gap:
                break
            r *= 0.5
        else:
            raise ConvergenceError(f"neighbourhood of target {k} did not shrink enough")
        delta[k], am[k], ap[k] = r, lo, hi
    return delta, am, ap


def beta_schedule(d: dict[int, float], epsilon: float = 1.0) -> dict[int, float]:
    """``beta_k = 1 / min(D_k^(5+eps), D_(k+1)^2 D_k^(3+eps))`` with ``D_k = min(d_k, d_(k+1))``."""
    if not epsilon > 0.0:
        raise DomainError("epsilon must be positive")
    ks = sorted(d)
    D = {k: min(d[k], d[k + 1]) for k in ks if k + 1 in d}
    out = {}
    for k in D:
        nxt = D.get(k + 1, D[k])
        out[k] = 1.0 / min(D[k] ** (5 + epsilon), nxt**2 * D[k] ** (3 + epsilon))
    return out


def build_state(
    target: SpectralTarget,
    k_min: int,
    k_max: int,
    decay: float = 0.7,
    cap: float = 1.0,
    epsilon: float = 1.0,
) -> SynthesisState:
    """Fix lengths, neighbourhoods, boxes and initial couplings for cells ``k_min..k_max``."""
    if k_min > 0 or k_max < max(target.m, 1):
        raise DomainError("the index range must contain 0 and every target cell")
    s, role = _cell_values(target, k_min, k_max)
    st = SynthesisState(target, k_min, k_max, s, role, epsilon=epsilon)
    st = replace(st, d=choose_lengths(st, decay, cap))
    delta, am, ap = choose_neighborhoods(st)
    alpha = {}
    for k in st.indices:
        # targets start at the strength that places the decoupled eigenvalue exactly
        alpha[k] = eval_fd(st.d[k], s[k], guard=0.0)
    st = replace(st, delta=delta, alpha_minus=am, alpha_plus=ap, alpha=alpha)
    st = replace(st, beta=beta_schedule(st.d, epsilon))
    return st.check()


def state_for(target: SpectralTarget, n: int, tail: int | None = None, **kw) -> SynthesisState:
    tail = n if tail is None else tail
    return build_state(target, -n + 1 - tail, max(n + tail, target.m), **kw)


# ---------------------------------------------------------------------------
# operators


def _block(n: int) -> range:
    return range(-n + 1, n + 1)


def assemble_partly_coupled(
    state: SynthesisState,
    n: int,
    tail: int | None = None,
    alpha: dict[int, float] | None = None,
    beta: dict[int, float] | None = None,
    coupled: bool = True,
) -> ChainOperator:
    """Cells ``-n+1-tail .. n+tail``; deltas ``beta_k`` inside the block, walls outside."""
    if n < 1:
        raise DomainError("truncation order must be at least 1")
    tail = n if tail is None else tail
    lo, hi = -n + 1 - tail, max(n + tail, 0)
    if lo < state.k_min or hi > state.k_max:
        raise DomainError(f"state covers cells {state.k_min}..{state.k_max}, need {lo}..{hi}")
    a = dict(state.alpha)
    if alpha:
        a.update(alpha)
    b = state.beta if beta is None else beta
    cells = [Cell(state.d[k], Delta(a[k]), k) for k in range(lo, hi + 1)]
    couplings = []
    for k in range(lo, hi):
        if coupled and -n + 1 <= k <= n - 1:
            couplings.append(Delta(b[k]))
        else:
            couplings.append(DirichletWall)
    origin = -math.fsum(state.d[k] for k in range(lo, 1))
    return assemble(cells, couplings, DIRICHLET, DIRICHLET, origin)


def decoupled_truncation(state: SynthesisState, n_generator: int) -> ChainOperator:
    """Generator cells ``-n_generator+1..0`` and every target cell, all separated by walls."""
    lo, hi = -n_generator + 1, state.target.m
    if lo < state.k_min or hi > state.k_max:
        raise DomainError("state does not cover the requested cells")
    cells = [Cell(state.d[k], Delta(state.alpha[k]), k) for k in range(lo, max(hi, 0) + 1)]
    return assemble(cells, [DirichletWall] * (len(cells) - 1), DIRICHLET, DIRICHLET, state.ell_minus)


def _cells_in(op: ChainOperator) -> list[int]:
    return [c.label for c in op.cells]


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class WindowCheck:
    ok: bool
    report: SpectrumReport
    located: dict[int, float]
    problems: tuple[str, ...] = ()


def window_check(
    state: SynthesisState,
    op: ChainOperator,
    tol: float = 1e-12,
    simple_gap: float = 1e-7,
) -> WindowCheck:
    """Does the window spectrum of ``op`` have the structure the construction promises?

    Each target cell present in ``op`` must own exactly one simple eigenvalue
    inside its ball; every other window eigenvalue must sit in the ball of a
    generator cell, and the total count must equal the number of cells whose
    value lies in the window.
    """
    t1, t2 = state.target.window
    rep = eigenvalues_in(op, (t1, t2), tol)
    vals = rep.values
    problems = []
    present = _cells_in(op)
    located = {}
    expected = 0
    gen_balls = []
    for k in present:
        if state.role[k] == "target":
            expected += 1
            lo, hi = state.ball(k)
            inside = [v for v in vals if lo < v < hi]
            if len(inside) != 1:
                problems.append(f"ball {k} holds {len(inside)} eigenvalues")
                continue
            v = inside[0]
            others = [abs(w - v) for w in vals if w is not v and w != v]
            if vals.count(v) > 1 or (others and min(others) <= simple_gap):
                problems.append(f"eigenvalue near target {k} is not simple")
            located[k] = v
        elif t1 < state.s[k] < t2:
            expected += 1
            gen_balls.append(state.ball(k))
    if len(vals) != expected:
        problems.append(f"window holds {len(vals)} eigenvalues, expected {expected}")
    tballs = [state.ball(k) for k in present if state.role[k] == "target"]
    for v in vals:
        if not any(lo < v < hi for lo, hi in tballs + gen_balls):
            problems.append(f"stray eigenvalue {v!r}")
    if not rep.certified:
        problems.append("count certificate mismatch")
    return WindowCheck(not problems, rep, located, tuple(problems))


def _corner(state, n, k, low: bool) -> dict[int, float]:
    block_targets = [j for j in _block(n) if state.role.get(j) == "target"]
    if low:
        a = {j: state.alpha_plus[j] for j in block_targets}
        a[k] = state.alpha_minus[k]
    else:
        a = {j: state.alpha_minus[j] for j in block_targets}
        a[k] = state.alpha_plus[k]
    return a


def _passes(state, n, tail, beta, tol) -> tuple[bool, list[str]]:
    block_targets = [j for j in _block(n) if state.role.get(j) == "target"]
    problems: list[str] = []
    # the two extreme boxes bound every admissible alpha by monotonicity
    for label, side in (("lower", "alpha_minus"), ("upper", "alpha_plus")):
        a = {j: getattr(state, side)[j] for j in block_targets}
        chk = window_check(state, assemble_partly_coupled(state, n, tail, a, beta), tol)
        if not chk.ok:
            problems += [f"{label} box: {p}" for p in chk.problems]
            return False, problems
    for k in block_targets:
        for low in (True, False):
            op = assemble_partly_coupled(state, n, tail, _corner(state, n, k, low), beta)
            lo, hi = state.ball(k)
            rep = eigenvalues_in(op, (lo, hi), tol)
            if rep.total_multiplicity != 1:
                return False, problems + [f"corner {k}: ball holds {rep.total_multiplicity}"]
            v = rep.values[0]
            quarter = 0.25 * state.delta[k]
            if low and not v < state.s[k] - quarter:
                return False, problems + [f"corner {k} low: {v} not below s-delta/4"]
            if not low and not v > state.s[k] + quarter:
                return False, problems + [f"corner {k} high: {v} not above s+delta/4"]
    return True, problems


def escalate_beta(
    state: SynthesisState,
    n: int,
    factor: float = 4.0,
    tail: int | None = None,
    max_rounds: int = 60,
    tol: float = 1e-12,
) -> SynthesisState:
    """Multiply the block couplings by ``factor`` until the window structure and corners certify."""
    if not factor > 1.0:
        raise DomainError("escalation factor must exceed 1")
    beta = dict(state.beta)
    block = [k for k in range(-n + 1, n)]
    last: list[str] = []
    for rnd in range(max_rounds + 1):
        ok, last = _passes(state, n, tail, beta, tol)
        if ok:
            return replace(state, beta=beta, escalation_rounds=rnd)
        for k in block:
            beta[k] *= factor
    raise EscalationError(f"no certified coupling after {max_rounds} rounds: {'; '.join(last[:3])}")


# ---------------------------------------------------------------------------
# tuning


@dataclass(frozen=True)
class TuneResult:
    n: int
    tail: int
    alpha: dict[int, float]
    beta: dict[int, float]
    achieved: tuple[tuple[int, float, float, float], ...]
    iterations: int
    certificate: SpectrumReport
    operator: ChainOperator
    tol: float
    escalation_rounds: int = 0

    @property
    def max_residual(self) -> float:
        return max((r for *_, r in self.achieved), default=0.0)

    @property
    def window_values(self) -> list[float]:
        return self.certificate.values

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tail": self.tail,
            "tol": self.tol,
            "iterations": self.iterations,
            "escalationRounds": self.escalation_rounds,
            "alphaSeq": {str(k): v for k, v in sorted(self.alpha.items())},
            "betaUsed": {str(k): v for k, v in sorted(self.beta.items())},
            "achieved": [
                {"k": k, "target": s, "eigenvalue": v, "residual": r} for k, s, v, r in self.achieved
            ],
            "certificate": self.certificate.to_dict(),
            "operator": self.operator.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "TuneResult":
        return cls(
            int(data["n"]),
            int(data["tail"]),
            {int(k): float(v) for k, v in data["alphaSeq"].items()},
            {int(k): float(v) for k, v in data["betaUsed"].items()},
            tuple((int(a["k"]), a["target"], a["eigenvalue"], a["residual"]) for a in data["achieved"]),
            int(data["iterations"]),
            SpectrumReport.from_dict(data["certificate"]),
            ChainOperator.from_dict(data["operator"]),
            float(data["tol"]),
            int(data.get("escalationRounds", 0)),
        )


def _ball_eigenvalue(state, n, tail, alpha, k, tol) -> float:
    op = assemble_partly_coupled(state, n, tail, alpha)
    rep = eigenvalues_in(op, state.ball(k), tol)
    if rep.total_multiplicity != 1:
        raise BracketError(f"ball of target {k} holds {rep.total_multiplicity} eigenvalues")
    return rep.values[0]


def tune_alphas(
    state: SynthesisState,
    n: int,
    tol: float = 1e-8,
    tail: int | None = None,
    max_sweeps: int = 200,
    eig_tol: float = 1e-13,
) -> TuneResult:
    """Coordinate sweeps solving ``eigenvalue_k(alpha) = s_k`` one target at a time.

    Each scalar equation is monotone in its own strength and, after a
    successful :func:`escalate_beta`, changes sign across the box.
    """
    tail = n if tail is None else tail
    block_targets = [k for k in _block(n) if state.role.get(k) == "target"]
    alpha = {k: state.alpha[k] for k in block_targets}
    sweeps = 0

    def residuals():
        return {k: _ball_eigenvalue(state, n, tail, alpha, k, eig_tol) - state.s[k] for k in block_targets}

    res = residuals() if block_targets else {}
    while res and max(abs(r) for r in res.values()) > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"tuning did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for k in block_targets:

            def g(a, k=k):
                trial = dict(alpha)
                trial[k] = a
                return _ball_eigenvalue(state, n, tail, trial, k, eig_tol) - state.s[k]

            a_lo, a_hi = state.alpha_minus[k], state.alpha_plus[k]
            g_lo, g_hi = g(a_lo), g(a_hi)
            if g_lo > 0.0 or g_hi < 0.0:
                raise BracketError(f"strength of target {k} lost its bracket ({g_lo:.3g}, {g_hi:.3g})")
            if g_lo == 0.0:
                alpha[k] = a_lo
            elif g_hi == 0.0:
                alpha[k] = a_hi
            else:
                alpha[k] = brentq(g, a_lo, a_hi, xtol=1e-15 * max(1.0, abs(a_lo)), rtol=1e-15)
        res = residuals()
    final = replace(state, alpha={**state.alpha, **alpha})
    op = assemble_partly_coupled(final, n, tail)
    chk = window_check(final, op, eig_tol)
    if not chk.ok:
        raise ConvergenceError("tuned operator fails its window check: " + "; ".join(chk.problems))
    achieved = []
    for k in final.targets:
        if k in chk.located:
            v = chk.located[k]
            achieved.append((k, final.s[k], v, abs(v - final.s[k])))
    beta = {k: final.beta[k] for k in range(-n + 1, n)}
    return TuneResult(
        n, tail, dict(final.alpha), beta, tuple(achieved), sweeps, chk.report, op, tol, state.escalation_rounds
    )


def synthesize(
    target: SpectralTarget,
    n: int,
    tail: int | None = None,
    tol: float = 1e-8,
    factor: float = 4.0,
    decay: float = 0.7,
    cap: float = 1.0,
    epsilon: float = 1.0,
) -> TuneResult:
    """Full pipeline at truncation order ``n``."""
    tail = n if tail is None else tail
    st = state_for(target, n, tail, decay=decay, cap=cap, epsilon=epsilon)
    st = escalate_beta(st, n, factor, tail)
    return tune_alphas(st, n, tol, tail)


# ---------------------------------------------------------------------------
# convergence across truncation orders


@dataclass(frozen=True)
class ProbeResult:
    n_list: tuple[int, ...]
    results: tuple[TuneResult, ...]
    beta: dict[int, float]

    def alpha_table(self) -> dict[int, dict[int, float]]:
        return {r.n: {k: r.alpha[k] for k, *_ in r.achieved} for r in self.results}

    def drift(self, k: int) -> list[float]:
        """``|alpha_k^(n_i) - alpha_k^(n_(i+1))|`` for consecutive truncation orders."""
        out = []
        for a, b in zip(self.results, self.results[1:]):
            out.append(abs(a.alpha[k] - b.alpha[k]))
        return out

    def eigen_drift(self) -> list[float]:
        out = []
        for a, b in zip(self.results, self.results[1:]):
            va, vb = a.window_values, b.window_values
            out.append(max((abs(x - y) for x, y in zip(va, vb)), default=0.0))
        return out

    def rows(self) -> list[dict]:
        rows = []
        prev = None
        for r in self.results:
            for k, _, _, _ in r.achieved:
                drift = "" if prev is None else abs(r.alpha[k] - prev.alpha[k])
                rows.append(
                    {
                        "n": r.n,
                        "k": k,
                        "alpha_k": r.alpha[k],
                        "drift": drift,
                        "window_eigenvalues": " ".join(repr(v) for v in r.window_values),
                    }
                )
            prev = r
        return rows


def convergence_probe(
    target: SpectralTarget,
    n_list: Sequence[int],
    tol: float = 1e-8,
    tail: int | None = None,
    factor: float = 4.0,
    decay: float = 0.7,
    cap: float = 1.0,
    epsilon: float = 1.0,
) -> ProbeResult:
    """Tune at each truncation order with one coupling sequence shared by all orders.

    Each order is escalated on its own first; the shared sequence is the
    elementwise maximum, re-certified (and raised further if needed) at
    every order before tuning.
    """
    n_list = tuple(int(n) for n in n_list)
    if list(n_list) != sorted(set(n_list)) or n_list[0] < 1:
        raise DomainError("nList must be strictly increasing positive integers")
    tails = {n: (n if tail is None else tail) for n in n_list}
    k_min = min(-n + 1 - tails[n] for n in n_list)
    k_max = max(max(n + tails[n], target.m) for n in n_list)
    base = build_state(target, k_min, k_max, decay=decay, cap=cap, epsilon=epsilon)
    beta = dict(base.beta)
    for n in n_list:
        esc = escalate_beta(base, n, factor, tails[n])
        for k in range(-n + 1, n):
            beta[k] = max(beta[k], esc.beta[k])
    shared = replace(base, beta=beta)
    for _ in range(60):
        if all(_passes(shared, n, tails[n], shared.beta, 1e-12)[0] for n in n_list):
            break
        shared = replace(shared, beta={k: v * factor for k, v in shared.beta.items()})
    else:
        raise EscalationError("shared couplings fail to certify every truncation order")
    results = []
    for n in n_list:
        results.append(tune_alphas(shared, n, tol, tails[n]))
    return ProbeResult(n_list, tuple(results), dict(shared.beta))
