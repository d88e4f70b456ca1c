import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from spectralforge.chain import (
    DIRICHLET,
    NEUMANN,
    Cell,
    ChainOperator,
    Delta,
    DeltaPrime,
    DirichletWall,
    Jump,
    NeumannWall,
    Robin,
    assemble,
    decoupled_spectrum,
    eigenvalues_in,
    lowest_eigenvalues,
    prufer_count,
    secular_value,
    single_cell,
    spectral_floor,
    transfer_matrix,
)
from spectralforge.cli import random_chain
from spectralforge.closed_forms import solve_lambda_d, solve_lambda_n
from spectralforge.errors import DomainError, NotSupportedError, ShapeError

# 25-digit mpmath roots of the transcendental equations for a delta-prime at
# the centre of a unit Dirichlet cell (odd modes: tan t = -g t, lam = 4 t^2)
DPRIME_M3 = (7.013963761146274311914462, 86.14377824379271543117458)
DPRIME_P3 = (12.36456498953248495030695, 91.46942673194018216356113)
# free unit cell with u' = b u on the left, u' = -b u on the right, b = beta/2
ROBIN_P2 = (1.70705297555092248340734, 13.49235714650484225136773, 43.35722110493781398121915)
ROBIN_M2 = (-2.382097877890840760635407, 5.434131505846556550881666, 35.40455448598678465883425)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


# ---- construction -------------------------------------------------------------


def test_assemble_validates_shape():
    with pytest.raises(ShapeError):
        assemble([Cell(1.0, Delta(0.0))], [Delta(1.0)])
    with pytest.raises(ShapeError):
        assemble([], [])
    with pytest.raises(DomainError):
        Cell(0.0, Delta(1.0))
    with pytest.raises(DomainError):
        Cell(1.0, DirichletWall)
    with pytest.raises(DomainError):
        Jump("Spring", 1.0)


def test_breakpoints_and_segments():
    op = assemble(
        [Cell(1.0, Delta(0.0)), Cell(0.5, Delta(1.0)), Cell(2.0, Delta(2.0))],
        [DirichletWall, NeumannWall],
        Robin(1.0),
        NEUMANN,
        origin=-1.0,
    )
    assert np.allclose(op.breakpoints, [-1.0, 0.0, 0.5, 2.5])
    segs = op.segments()
    assert [len(s.cells) for s in segs] == [1, 1, 1]
    assert segs[0].left_bc == Robin(1.0) and segs[0].right_bc == DIRICHLET
    assert segs[1].left_bc == DIRICHLET and segs[1].right_bc == NEUMANN
    assert segs[2].left_bc == NEUMANN and segs[2].right_bc == NEUMANN
    assert segs[2].origin == pytest.approx(0.5)


def test_json_round_trip():
    op = random_chain(random.Random(3))
    text = op.to_json()
    again = ChainOperator.from_json(text)
    assert again == op
    assert again.to_json() == text


# ---- transfer matrices ---------------------------------------------------------


def test_transfer_free_zero_energy():
    op = single_cell(2.0, 0.0)
    (t,) = transfer_matrix(op, 0.0)
    assert np.allclose(t.matrix * math.exp(t.log_scale), [[1.0, 2.0], [0.0, 1.0]])


def test_transfer_delta_factor():
    # a vanishing-length cell leaves only the jump
    op = single_cell(1e-300, 3.0)
    (t,) = transfer_matrix(op, 5.0)
    assert np.allclose(t.matrix, [[1.0, 0.0], [3.0, 1.0]])
    op = single_cell(1e-300, 3.0, kind="DeltaPrime")
    (t,) = transfer_matrix(op, 5.0)
    assert np.allclose(t.matrix, [[1.0, 3.0], [0.0, 1.0]])


def test_transfer_against_ode_integration():
    op = single_cell(1.0, 0.0)
    (t,) = transfer_matrix(op, math.pi**2)
    cols = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        sol = solve_ivp(lambda x, y: [y[1], -math.pi**2 * y[0]], (0, 1), y0, rtol=1e-12, atol=1e-12)
        cols.append(sol.y[:, -1])
    assert np.allclose(t.matrix, np.array(cols).T, atol=1e-9)
    assert np.allclose(t.matrix, -np.eye(2), atol=1e-12)


@settings(max_examples=200)
@given(st.floats(-1e4, 1e4), st.integers(0, 10_000))
def test_unit_determinant(lam, seed):
    op = random_chain(random.Random(seed))
    for t in transfer_matrix(op, lam):
        # compare in the stored scale: det(m) should equal exp(-2 * log_scale)
        m = t.matrix
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        target = math.exp(-2 * t.log_scale)
        assert abs(det - target) <= 1e-9 * max(target, np.abs(m).max() ** 2)


def test_overflow_is_scaled():
    op = single_cell(10.0, 0.0)
    (t,) = transfer_matrix(op, -1e6)
    assert np.isfinite(t.matrix).all() and t.log_scale > 700


# ---- secular function ------------------------------------------------------------


def test_secular_zeros_free_cell():
    op = single_cell(1.0, 0.0)
    for k in range(1, 5):
        assert abs(secular_value(op, (k * math.pi) ** 2)) < 1e-12
    assert secular_value(op, 5.0) * secular_value(op, 15.0) < 0


def test_secular_zero_set_dirichlet_cell():
    d, alpha = 1.3, -2.0
    op = single_cell(d, alpha)
    assert abs(secular_value(op, solve_lambda_d(alpha, d))) < 1e-10
    assert abs(secular_value(op, (2 * math.pi / d) ** 2)) < 1e-10


def test_secular_needs_wall_free_chain():
    op = assemble([Cell(1.0, Delta(0.0)), Cell(1.0, Delta(0.0))], [DirichletWall])
    with pytest.raises(ShapeError):
        secular_value(op, 1.0)


# ---- counting ---------------------------------------------------------------------


def test_prufer_examples():
    op = single_cell(1.0, 0.0)
    assert prufer_count(op, 5.0) == 0
    assert prufer_count(op, 50.0) == 2
    assert prufer_count(single_cell(1.0, -4.0), 1e-3) == 1


def test_delta_prime_with_robin_not_supported():
    op = single_cell(1.0, 1.0, Robin(1.0), kind="DeltaPrime")
    with pytest.raises(NotSupportedError):
        prufer_count(op, 1.0)
    with pytest.raises(NotSupportedError):
        eigenvalues_in(op, (0.0, 10.0))


def _sign_changes(seg, lo, hi, n=4000):
    grid = np.linspace(lo, hi, n)
    vals = [secular_value(seg, x) for x in grid]
    return sum(1 for a, b in zip(vals, vals[1:]) if a * b < 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_count_matches_sign_changes(seed):
    rng = random.Random(seed)
    op = random_chain(rng)
    for seg in op.segments():
        lo, hi = sorted(rng.uniform(-50.0, 150.0) for _ in range(2))
        # sign changes between grid points miss only near-double roots; compare where resolved
        ev = eigenvalues_in(seg, (lo, hi)).values
        gaps = np.diff([lo] + ev + [hi])
        if len(gaps) and gaps.min() < 5 * (hi - lo) / 4000:
            continue
        assert prufer_count(seg, hi) - prufer_count(seg, lo) == _sign_changes(seg, lo, hi)


@settings(max_examples=100)
@given(st.integers(0, 100_000), st.floats(-100.0, 100.0), st.floats(0.0, 100.0))
def test_count_monotone_in_lambda(seed, lam, step):
    op = random_chain(random.Random(seed))
    assert prufer_count(op, lam) <= prufer_count(op, lam + step)


# ---- eigenvalues -------------------------------------------------------------------


@settings(max_examples=200)
@given(st.floats(-1e3, 1e3), st.floats(1e-3, 10.0))
def test_single_cell_closed_forms(alpha, d):
    ev = lowest_eigenvalues(single_cell(d, alpha), 2, tol=1e-12)
    assert rel(ev[0], solve_lambda_d(alpha, d)) < 1e-9
    assert rel(ev[1], (2 * math.pi / d) ** 2) < 1e-9
    ev = lowest_eigenvalues(single_cell(d, alpha, NEUMANN), 2, tol=1e-12)
    assert rel(ev[0], solve_lambda_n(alpha, d)) < 1e-9
    assert rel(ev[1], (math.pi / d) ** 2) < 1e-9


def test_eigenvalues_in_window_single_cell():
    alpha, d = -1.5, 0.8
    top = (2 * math.pi / d) ** 2
    rep = eigenvalues_in(single_cell(d, alpha), (-1e3, top + 1.0))
    assert rep.certified
    assert rep.values == pytest.approx([solve_lambda_d(alpha, d), top], rel=1e-12)


def test_delta_prime_against_transcendental_roots():
    ev = lowest_eigenvalues(single_cell(1.0, -3.0, kind="DeltaPrime"), 4, tol=1e-13)
    odd = [v for v in ev if min(abs(v - (k * math.pi) ** 2) for k in (1, 3, 5)) > 1e-6]
    assert odd[:2] == pytest.approx(DPRIME_M3, rel=1e-12)
    ev = lowest_eigenvalues(single_cell(1.0, 3.0, kind="DeltaPrime"), 4, tol=1e-13)
    odd = [v for v in ev if min(abs(v - (k * math.pi) ** 2) for k in (1, 3, 5)) > 1e-6]
    assert odd[:2] == pytest.approx(DPRIME_P3, rel=1e-12)


def test_negative_delta_prime_in_a_chain():
    # strip offset of negative delta-primes must keep the count exact
    op = assemble(
        [Cell(1.0, DeltaPrime(-0.05)), Cell(1.0, DeltaPrime(-2.0))], [DeltaPrime(-0.1)], DIRICHLET, NEUMANN
    )
    floor = spectral_floor(op)
    rep = eigenvalues_in(op, (floor, 200.0))
    assert rep.count_lower == 0 and rep.certified
    # a deep delta-prime binds at -4/g^2 up to exponentially small end effects
    assert rep.values[0] == pytest.approx(-4.0 / 0.05**2, rel=1e-12)
    for v in rep.values:
        eps = 1e-9 * max(1.0, abs(v))
        assert prufer_count(op, v + eps) > prufer_count(op, v - eps)


def test_robin_free_cell():
    for beta, ref in ((2.0, ROBIN_P2), (-2.0, ROBIN_M2)):
        ev = lowest_eigenvalues(single_cell(1.0, 0.0, Robin(beta)), 3, tol=1e-13)
        assert ev == pytest.approx(ref, rel=1e-12)


def test_robin_large_beta_near_dirichlet():
    for alpha in (-5.0, 0.0, 5.0):
        robin = lowest_eigenvalues(single_cell(1.0, alpha, Robin(1e6)), 1)[0]
        assert abs(robin - solve_lambda_d(alpha, 1.0)) <= 1e-2


def test_two_cells_with_wall_are_union():
    a = Cell(1.0, Delta(-3.0))
    b = Cell(0.7, Delta(4.0))
    op = assemble([a, b], [DirichletWall])
    win = (-50.0, 300.0)
    rep = eigenvalues_in(op, win)
    parts = [eigenvalues_in(assemble([c], []), win).values for c in (a, b)]
    assert rep.values == sorted(parts[0] + parts[1])
    assert rep.certified


def test_wall_split_bit_identical():
    op = random_chain(random.Random(11))
    cells = list(op.cells)
    k = len(cells) // 2 or 1
    cells = cells if len(cells) > 1 else cells * 2
    couplings = list(op.couplings) if len(op.cells) > 1 else [Delta(1.0)]
    couplings[k - 1] = DirichletWall
    walled = assemble(cells, couplings, op.left_bc, op.right_bc)
    win = (-100.0, 400.0)
    merged = decoupled_spectrum([eigenvalues_in(s, win).values for s in walled.segments()], win)
    assert eigenvalues_in(walled, win).values == merged.values


def test_multiplicity_from_identical_parts():
    c = Cell(1.0, Delta(2.0))
    op = assemble([c, c, c], [DirichletWall, DirichletWall])
    rep = eigenvalues_in(op, (-10.0, 50.0))
    assert [e.multiplicity for e in rep.eigenvalues] == [3, 3]
    assert rep.certified


def test_empty_window():
    rep = eigenvalues_in(single_cell(1.0, 0.0), (1.0, 2.0))
    assert rep.values == [] and rep.count_lower == rep.count_upper == 0


def test_bad_window():
    with pytest.raises(DomainError):
        eigenvalues_in(single_cell(1.0, 0.0), (2.0, 1.0))


def test_report_round_trip():
    rep = eigenvalues_in(random_chain(random.Random(5)), (-20.0, 80.0))
    from spectralforge.chain import SpectrumReport

    assert SpectrumReport.from_dict(rep.to_dict()) == rep


# ---- merging --------------------------------------------------------------------------


def test_decoupled_spectrum_examples():
    assert decoupled_spectrum([[1, 4], [2, 4]], (0, 5)).values == [1, 2, 4, 4]
    assert decoupled_spectrum([[1, 4], [2, 4]], (0, 5)).eigenvalues[-1] == (4.0, 2)
    assert decoupled_spectrum([[0.5, 3.0]], (0, 5)).values == [0.5, 3.0]


def test_cluster_detection():
    spectra = [[1.0 + 1.0 / k, (2 * math.pi * k) ** 2] for k in range(1, 201)]
    merged = decoupled_spectrum(spectra, (0.0, 10.0), cluster_radius=0.05, cluster_size=20)
    assert merged.clusters and abs(merged.clusters[0] - 1.0) < 0.06
