"""``smpr`` command line.  Every subcommand is a thin adapter over the library.

Exit codes: 0 success, 1 validation failure, 2 usage error.  Results go to
stdout (or ``--out``), diagnostics to stderr.  JSON carries ``schema_version``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import harness, irprop, processes, structural, verify
from ._io import csv_rows, dumps, with_schema
from ._numeric import number_to_json, parse_number
from .errors import InvalidSpec, SMPRError
from .semigroup import KernelExpansion, kernel_density


class UsageError(Exception):
    pass


def _numbers(text: str) -> list:
    """Comma list; integers and ``p/q`` stay exact, decimals become floats."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(parse_number(tok) if "/" in tok else (int(tok) if _is_int(tok) else float(tok)))
        except ValueError as e:
            raise UsageError(f"not a number: {tok!r}") from e
    return out


def _is_int(tok: str) -> bool:
    try:
        int(tok)
    except ValueError:
        return False
    return True


def _scalar(text: str):
    vals = _numbers(text)
    if len(vals) != 1:
        raise UsageError(f"expected one number, got {text!r}")
    return vals[0]


def _grid(text: str) -> np.ndarray:
    """``a:b:step`` inclusive of ``b`` (up to round-off)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be a:b:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError as e:
        raise UsageError(f"bad grid {text!r}") from e
    if step <= 0 or b < a:
        raise UsageError("grid needs step > 0 and b >= a")
    n = int(math.floor((b - a) / step + 1e-9))
    return a + step * np.arange(n + 1)


def _default_seed() -> int:
    return int(os.environ.get("SMPR_SEED", "0"))


def _load_spec(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidSpec([f"cannot read spec {path!r}: {e}"]) from e
    return processes.spec_from_dict(doc)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_out(payload: dict, out: str | None = None) -> None:
    _emit(dumps(with_schema(payload)) + "\n", out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_spec(args) -> None:
    alpha = _scalar(args.alpha)
    if args.builtin == "ou":
        spec = processes.ou_spec(alpha, args.max_degree)
    elif args.builtin == "q_ou":
        spec = processes.q_ou_spec(alpha, _scalar(args.q), args.max_degree)
    else:
        spec = processes.two_point_spec(alpha)
    _json_out(spec.to_dict(), args.out)


def cmd_structural(args) -> None:
    spec = _load_spec(args.spec)
    A = structural.build_structural(spec, args.n, args.t)
    _emit(csv_rows([f"x{j}" for j in range(args.n + 1)], A.entries.tolist()), args.out)


def cmd_kernel(args) -> None:
    spec = _load_spec(args.spec)
    k = KernelExpansion(spec, args.t, args.trunc)
    g = _grid(args.grid)
    X, Y = np.meshgrid(g, g, indexing="ij")
    val, err = kernel_density(k, X, Y)
    rows = zip(X.ravel(), Y.ravel(), np.ravel(val), np.ravel(err))
    _emit(csv_rows(["x", "y", "value", "error"], rows), args.out)


def cmd_harness(args) -> None:
    alphas = _numbers(args.alphas)
    v = math.inf if args.v is None else args.v
    _json_out({"harness": harness.is_harness(alphas, v), "alphas": alphas})


def cmd_classify(args) -> None:
    c = harness.classify_quadratic(_scalar(args.q), _scalar(args.alpha))
    _json_out({"tag": c.tag, "alpha": c.alpha, "q": c.q, "recipe": c.recipe})


def cmd_irprop(args) -> None:
    if args.irprop_cmd == "moments":
        cs = irprop.CumulantSpec(tuple(_numbers(args.d)))
        m = irprop.stationary_moments(cs, args.order)
        mg = irprop.moments_of_mgf(irprop.mgf_series(cs, args.order), args.order)
        _json_out({
            "d": [number_to_json(v) for v in cs.d],
            "deltas": [number_to_json(v) for v in cs.deltas(args.order)],
            "moments": [number_to_json(v) for v in m.values],
            "moments_from_mgf": [number_to_json(v) for v in mg.values],
            "violations": cs.violations(),
        })
    else:
        rho = _scalar(args.rho)
        lm = irprop.laguerre_mixture_decompose(rho, args.order)
        _json_out({
            "rho": number_to_json(lm.rho),
            "point_mass_at": number_to_json(lm.point_mass_at),
            "point_weight": number_to_json(lm.point_weight),
            "exponential_shift": number_to_json(lm.exponential_shift),
            "exponential_weight": number_to_json(lm.exponential_weight),
            "order": lm.order,
            "residual": lm.residual,
        })


def cmd_simulate(args) -> None:
    spec = _load_spec(args.spec)
    times = _grid(args.times)
    seed = _default_seed() if args.seed is None else args.seed
    traj = processes.simulate(spec, times, args.paths, seed, args.threads)
    rows = ((i, t, traj.values[i, k]) for i in range(traj.paths) for k, t in enumerate(traj.times))
    _emit(csv_rows(["path_id", "t", "x"], rows), args.out)


def cmd_verify(args) -> None:
    spec = _load_spec(args.spec)
    seed = _default_seed() if args.seed is None else args.seed
    kw = dict(paths=args.paths, seed=seed, exact=args.exact, threads=args.threads)
    if args.test == "harness":
        if args.u is None:
            raise UsageError("--u is required for the harness test")
        rep = verify.harness_regression_test(spec, args.s, args.t, args.u, **kw)
    elif args.test == "conditional":
        rep = verify.conditional_moment_test(spec, args.n, args.s, args.t, **kw)
    else:
        rep = verify.reversed_martingale_test(spec, args.n, args.s, args.t, **kw)
    _emit(dumps(rep.to_dict()) + "\n", args.out)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smpr", description="Stationary Markov processes with polynomial regression.")
    sub = p.add_subparsers(dest="cmd", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("spec", help="write a built-in spec as JSON")
    s.add_argument("--builtin", required=True, choices=["ou", "q_ou", "two_point"])
    s.add_argument("--alpha", default="1")
    s.add_argument("--q", default="0.5")
    s.add_argument("--max-degree", type=int, default=processes.DEFAULT_DEGREE)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spec)

    s = sub.add_parser("structural", help="A_n(t) as CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_structural)

    s = sub.add_parser("kernel", help="truncated transition-density ratio on a grid")
    s.add_argument("--spec", required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--trunc", type=int, default=60)
    s.add_argument("--out")
    s.set_defaults(func=cmd_kernel)

    s = sub.add_parser("harness", help="harness verdict for correlation indices")
    s.add_argument("--alphas", required=True)
    s.add_argument("--v", type=int, default=None, help="support cardinality (default infinite)")
    s.set_defaults(func=cmd_harness)

    s = sub.add_parser("classify", help="quadratic-harness class for (q, alpha)")
    s.add_argument("--q", required=True)
    s.add_argument("--alpha", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("irprop", help="cumulant-spec computations")
    isub = s.add_subparsers(dest="irprop_cmd", metavar="SUBCOMMAND")
    isub.required = True
    m = isub.add_parser("moments")
    m.add_argument("--d", required=True)
    m.add_argument("--order", type=int, default=irprop.DEFAULT_ORDER)
    lg = isub.add_parser("laguerre")
    lg.add_argument("--rho", required=True)
    lg.add_argument("--order", type=int, default=irprop.DEFAULT_ORDER)
    s.set_defaults(func=cmd_irprop)

    s = sub.add_parser("simulate", help="simulate stationary paths to CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--times", required=True)
    s.add_argument("--paths", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="Monte Carlo regression test")
    s.add_argument("--spec", required=True)
    s.add_argument("--test", required=True, choices=["conditional", "reversed", "harness"])
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--s", type=float, default=0.0)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--u", type=float, default=None)
    s.add_argument("--paths", type=int, default=verify.DEFAULT_PATHS)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--exact", action="store_true", help="exact enumeration (finite-state specs)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)
    return p


_VALUE_FLAGS = {"--grid", "--times", "--alphas", "--d", "--alpha", "--q", "--rho"}


def _glue_values(argv: Sequence[str]) -> list[str]:
    """``--grid -2:2:0.1`` -> ``--grid=-2:2:0.1`` so argparse does not read a flag."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_values(argv))
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"smpr: error: {e}", file=sys.stderr)
        return 2
    except InvalidSpec as e:
        print("smpr: invalid input:", file=sys.stderr)
        for v in e.violations:
            print(f"  - {v}", file=sys.stderr)
        return 1
    except (SMPRError, ValueError, NotImplementedError) as e:
        print(f"smpr: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
