"""Command-line entry point.

Exit codes: 0 success, 2 unreadable or invalid input, 3 solver failure,
4 invalid spectral target, 5 escalation or tuning failure, 6 oracle
mismatch. Diagnostics are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .chain import (
    DIRICHLET,
    NEUMANN,
    Cell,
    ChainOperator,
    Delta,
    DirichletWall,
    Robin,
    SpectrumReport,
    assemble,
    eigenvalues_in,
    lowest_eigenvalues,
    prufer_count,
    secular_value,
    spectral_floor,
)
from .errors import (
    ConvergenceError,
    EscalationError,
    SpecError,
    SpectralForgeError,
)
from .fd_oracle import oracle_eigenvalues
from .synthesis import SpectralTarget, convergence_probe, synthesize

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_SPEC = 4
EXIT_SYNTH = 5
EXIT_MISMATCH = 6


class CliFailure(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


# ---------------------------------------------------------------------------
# io helpers


def _read_json(path: str | None) -> dict:
    if path is None:
        raise CliFailure(EXIT_PARSE, "this command needs --input")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliFailure(EXIT_PARSE, f"cannot read {path}: {exc}") from None


def _write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in columns})
    return buf.getvalue()


def _load_operator(path: str) -> ChainOperator:
    data = _read_json(path)
    try:
        return ChainOperator.from_dict(data)
    except SpectralForgeError as exc:
        raise CliFailure(EXIT_PARSE, f"invalid operator: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CliFailure(EXIT_PARSE, f"malformed operator document: {exc!r}") from None


def _load_target(path: str) -> SpectralTarget:
    return SpectralTarget.from_dict(_read_json(path))


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise CliFailure(EXIT_PARSE, f"window must be 'lower,upper', got {text!r}") from None
    if not lo < hi:
        raise CliFailure(EXIT_PARSE, "window lower bound must be below the upper bound")
    return lo, hi


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliFailure(EXIT_PARSE, f"expected a comma separated integer list, got {text!r}") from None


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SPECTRALFORGE_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise CliFailure(EXIT_PARSE, f"SPECTRALFORGE_THREADS must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# commands


def _report_rows(rep: SpectrumReport) -> list[dict]:
    return [
        {
            "value": e.value,
            "bracket_lower": e.bracket[0],
            "bracket_upper": e.bracket[1],
            "multiplicity": e.multiplicity,
            "residual": e.residual,
        }
        for e in rep.eigenvalues
    ]


def cmd_solve(args) -> int:
    op = _load_operator(args.input)
    window = _window(args.window)
    if window is None:
        vals = lowest_eigenvalues(op, args.count, args.tol)
        floor = spectral_floor(op)
        upper = vals[-1] + max(1.0, abs(vals[-1])) * 1e-6 if vals else floor + 1.0
        window = (floor, upper)
    rep = eigenvalues_in(op, window, args.tol)
    if args.format == "csv":
        text = _csv(_report_rows(rep), ["value", "bracket_lower", "bracket_upper", "multiplicity", "residual"])
    else:
        text = _dump(rep.to_dict())
    _write_atomic(args.output, text)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    target = _load_target(args.input)
    try:
        res = synthesize(target, args.n, args.tail, args.tol, args.factor, args.decay)
    except (EscalationError, ConvergenceError) as exc:
        raise CliFailure(EXIT_SYNTH, str(exc), {"stage": type(exc).__name__}) from None
    _write_atomic(args.output, _dump(res.to_dict()))
    if args.operator_output:
        _write_atomic(args.operator_output, _dump(res.operator.to_dict()))
    return EXIT_OK


def cmd_verify(args) -> int:
    op = _load_operator(args.input)
    data = _read_json(args.report)
    try:
        if "certificate" in data:
            data = data["certificate"]
        rep = SpectrumReport.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliFailure(EXIT_PARSE, f"malformed report: {exc!r}") from None
    n_upper = rep.count_upper
    rows = []
    ok = True
    if n_upper > 0:
        oracle = oracle_eigenvalues(op, n_upper)
        index = rep.count_lower
        for e in rep.eigenvalues:
            for _ in range(e.multiplicity):
                ref, err = float(oracle.values[index]), float(oracle.errors[index])
                passed = abs(e.value - ref) <= 3.0 * err
                ok &= passed
                rows.append(
                    {
                        "index": index,
                        "value": e.value,
                        "oracle": ref,
                        "oracleError": err,
                        "order": float(oracle.orders[index]),
                        "pass": passed,
                    }
                )
                index += 1
    verdict = {"pass": ok, "eigenvalues": rows}
    if args.format == "csv":
        text = _csv(rows, ["index", "value", "oracle", "oracleError", "order", "pass"])
    else:
        text = _dump(verdict)
    _write_atomic(args.output, text)
    if not ok:
        raise CliFailure(EXIT_MISMATCH, "eigenvalues disagree with the finite-difference oracle", verdict)
    return EXIT_OK


def random_chain(rng: random.Random, n_max: int = 8) -> ChainOperator:
    """A random chain of delta cells with dyadic lengths (grid-friendly for the oracle)."""
    n = rng.randint(1, n_max)
    cells = [Cell(rng.choice([0.25, 0.375, 0.5, 0.75, 1.0, 1.25]), Delta(rng.uniform(-20.0, 20.0)), k) for k in range(n)]
    couplings = []
    for _ in range(n - 1):
        r = rng.random()
        if r < 0.15:
            couplings.append(DirichletWall)
        elif r < 0.6:
            couplings.append(Delta(rng.uniform(-20.0, 20.0)))
        else:
            couplings.append(Delta(10.0 ** rng.uniform(0.0, 3.0)))
    ends = [DIRICHLET, NEUMANN, Robin(rng.uniform(-5.0, 5.0))]
    return assemble(cells, couplings, rng.choice(ends), rng.choice(ends))


def cmd_sweep(args) -> int:
    if args.mode == "lambda":
        op = _load_operator(args.input)
        window = _window(args.window) or (spectral_floor(op), 100.0)
        grid = np.linspace(window[0], window[1], args.points)
        segs = op.segments()
        rows = []
        for lam in grid.tolist():
            row = {"lambda": lam, "prufer_count": prufer_count(op, lam)}
            for i, seg in enumerate(segs):
                row[f"secular_{i}"] = secular_value(seg, lam)
            rows.append(row)
        cols = ["lambda", "prufer_count"] + [f"secular_{i}" for i in range(len(segs))]
        _write_atomic(args.output, _csv(rows, cols))
        return EXIT_OK
    rng = random.Random(args.seed)
    chains = [random_chain(rng) for _ in range(args.points)]

    def one(op):
        ref = oracle_eigenvalues(op, args.count)
        got = np.array(lowest_eigenvalues(op, args.count, args.tol))
        return got, ref

    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        results = list(pool.map(one, chains))
    rows = []
    worst = 0.0
    for i, (got, ref) in enumerate(results):
        for j in range(args.count):
            ratio = float(abs(got[j] - ref.values[j]) / ref.errors[j])
            worst = max(worst, ratio)
            rows.append(
                {
                    "chain": i,
                    "index": j,
                    "value": float(got[j]),
                    "oracle": float(ref.values[j]),
                    "oracleError": float(ref.errors[j]),
                    "ratio": ratio,
                }
            )
    _write_atomic(args.output, _csv(rows, ["chain", "index", "value", "oracle", "oracleError", "ratio"]))
    if worst > 3.0:
        raise CliFailure(EXIT_MISMATCH, f"worst oracle ratio {worst:.3g} exceeds 3", {"worst": worst})
    return EXIT_OK


def cmd_probe(args) -> int:
    target = _load_target(args.input)
    n_list = _int_list(args.n_list)
    try:
        probe = convergence_probe(target, n_list, args.tol, args.tail, args.factor, args.decay)
    except (EscalationError, ConvergenceError) as exc:
        raise CliFailure(EXIT_SYNTH, str(exc), {"stage": type(exc).__name__}) from None
    _write_atomic(args.output, _csv(probe.rows(), ["n", "k", "alpha_k", "drift", "window_eigenvalues"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", default=None, help="input JSON file")
    common.add_argument("--output", "-o", default=None, help="output file (stdout if omitted)")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="spectralforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="eigenvalues of a chain operator")
    s.add_argument("--window", default=None, help="'lower,upper'; default: the lowest --count eigenvalues")
    s.add_argument("--count", type=int, default=6)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("synthesize", parents=[common], help="build and tune a chain for a spectral target")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--tail", type=int, default=None)
    s.add_argument("--factor", type=float, default=4.0)
    s.add_argument("--decay", type=float, default=0.7)
    s.add_argument("--operator-output", default=None)
    s.set_defaults(func=cmd_synthesize, tol=1e-8)

    s = sub.add_parser("verify", parents=[common], help="compare a report with the finite-difference oracle")
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="plot data over lambda, or a random oracle battery")
    s.add_argument("--mode", choices=("lambda", "oracle"), default="lambda")
    s.add_argument("--window", default=None)
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--count", type=int, default=6)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("probe", parents=[common], help="tune at several truncation orders and report drift")
    s.add_argument("--n", dest="n_list", default="2,4,8", help="comma separated truncation orders")
    s.add_argument("--tail", type=int, default=None)
    s.add_argument("--factor", type=float, default=4.0)
    s.add_argument("--decay", type=float, default=0.7)
    s.set_defaults(func=cmd_probe, tol=1e-8)
    return p


def _diagnose(code: int, exc: BaseException, payload: dict | None = None) -> int:
    msg = {"exit": code, "error": type(exc).__name__, "message": str(exc)}
    if payload:
        msg["detail"] = payload
    sys.stderr.write(json.dumps(msg, default=str) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not (args.tol > 0.0 and math.isfinite(args.tol)):
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except CliFailure as exc:
        return _diagnose(exc.code, exc, exc.payload)
    except SpecError as exc:
        return _diagnose(EXIT_SPEC, exc)
    except (EscalationError,) as exc:
        return _diagnose(EXIT_SYNTH, exc)
    except SpectralForgeError as exc:
        return _diagnose(EXIT_SOLVER, exc)


if __name__ == "__main__":
    sys.exit(main())
