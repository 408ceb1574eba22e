"""Command-line interface.

Verbs: ``construct``, ``sample``, ``stats``, ``fit``, ``verify``.  Errors are
written to standard error as one JSON object and mapped to exit codes:

==  =====================================================
0   success
1   unexpected internal error
2   invalid input (schema, malformed file, bad argument)
3   resource cap exceeded (``MINMARKOV_STATE_CAP``)
4   optimizer or eigen-solver did not converge
5   a state never occurs in the fitted series
6   ``verify`` found a residual above its tolerance
==  =====================================================
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, diagnostics, io, sampling
from .exceptions import InputError, MinMarkovError, VerificationError
from .expfam import at as family_at
from .inference import ParametricModel, fit as fit_model
from .mininfo import MinInfoSpec, construct, family_for
from .projection import DEFAULT_TOL
from .statespace import StateSpace

# tolerances used by ``verify``
VERIFY_TOL = {
    "row_sums": 1e-12,
    "decomposition": 1e-9,
    "stationarity": 1e-10,
    "marginal": 1e-8,
    "linear_solve": 1e-8,
    "ipf": 1e-8,
    "pythagorean": 1e-8,
}
LINEAR_SOLVE_MAX_STATES = 2000
PYTHAGOREAN_TRIALS = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


# -- verbs --------------------------------------------------------------------

def cmd_construct(args) -> int:
    doc = io.read_json(args.spec)
    base, order, H, r, opts = io.load_problem(doc)
    tol = args.tol if args.tol is not None else opts.get("tol", DEFAULT_TOL)
    max_iter = args.max_iter if args.max_iter is not None else opts.get("max_iter", 500)
    res = construct(MinInfoSpec(base, H, r, order=order, tol=tol, max_iter=max_iter))
    extra = {"seed": opts["seed"]} if "seed" in opts else None
    io.write_json(io.result_to_dict(res, extra), args.out)
    return 0


def cmd_sample(args) -> int:
    res, doc = io.read_result(args.result)
    if args.n is None:
        raise InputError("--n is required")
    if args.n < 0:
        raise InputError("--n must be nonnegative")
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    ts = sampling.sample_path(res, args.n, seed=seed)
    if args.out is None or args.out == "-":
        labels = ts.base.labels
        sys.stdout.write("t,x\n" + "".join(f"{t},{labels[x]}\n" for t, x in enumerate(ts.values.tolist(), 1)))
    else:
        io.write_series(ts, args.out)
    return 0


def _infer_space(labels) -> StateSpace:
    """Integer labels map to ``0..max``; anything else to the sorted distinct labels."""
    try:
        ints = [int(v) for v in labels]
    except ValueError:
        return StateSpace(tuple(sorted(set(labels))))
    if not ints or min(ints) < 0:
        raise InputError("cannot infer a state space from this series; pass --result")
    return StateSpace.integers(max(max(ints), 1))


def cmd_stats(args) -> int:
    if args.max_lag is None or args.max_lag < 0:
        raise InputError("--max-lag must be a nonnegative integer")
    if args.series is not None:
        labels = io.read_series_column(args.series)
        base = io.read_result(args.result)[0].base if args.result else _infer_space(labels)
        ts = sampling.TimeSeries(base, np.asarray([base.index(v) for v in labels], dtype=np.int64))
        acf = sampling.sample_acf(ts, args.max_lag)
        out = {
            "mode": "sample",
            "n": len(ts),
            "states": list(base.labels),
            "acf": acf,
            "pacf": diagnostics.exact_pacf(acf),
            "marginal": sampling.empirical_marginal(ts),
        }
    elif args.result is not None:
        res, _ = io.read_result(args.result)
        acf = diagnostics.result_acf(res, args.max_lag)
        out = {
            "mode": "exact",
            "states": list(res.base.labels),
            "acf": acf,
            "pacf": diagnostics.exact_pacf(acf),
            "marginal": res.stationary_1,
        }
    else:
        raise InputError("stats needs --series or --result")
    out["max_lag"] = args.max_lag
    io.write_json(out, args.out)
    return 0


def cmd_fit(args) -> int:
    if args.series is None:
        raise InputError("--series is required")
    doc = io.read_json(args.spec)
    base, order, h0, basis, opts = io.load_model(doc)
    tol = args.tol if args.tol is not None else opts.get("tol", DEFAULT_TOL)
    max_iter = args.max_iter if args.max_iter is not None else opts.get("max_iter", 500)
    ts = io.read_series(args.series, base)
    model = ParametricModel(base, basis, h0=h0, order=order)
    fr = fit_model(model, ts, tol=tol, max_iter=max_iter, smoothing=opts.get("smoothing", 0.0))
    report = {
        "theta_hat": fr.theta_hat,
        "delta_hat": fr.delta_hat,
        "sample_moments": fr.sample_moments,
        "marginal": fr.marginal,
        "n_windows": fr.n_windows,
    }
    io.write_json(io.result_to_dict(fr.result, {"fit": report}), args.out)
    if args.out not in (None, "-"):
        sys.stdout.write(json.dumps({"theta_hat": fr.theta_hat.tolist()}) + "\n")
    return 0


def verification_checks(res) -> list[dict]:
    """Run the oracle suite on a result; one dict per check."""
    checks = []

    def add(name, value, tol=None):
        tol = VERIFY_TOL[name] if tol is None else tol
        value = float(value)
        checks.append({"check": name, "value": value, "tolerance": tol, "passed": bool(value <= tol)})

    K = res.lifted_kernel()
    if np.any(~(K > 0)) or not np.all(np.isfinite(K)):
        checks.append({"check": "positivity", "value": float(np.min(K)), "tolerance": 0.0, "passed": False})
        return checks
    add("row_sums", np.max(np.abs(K.sum(axis=1) - 1.0)))
    add("decomposition", np.max(np.abs(np.log(res.kernel) - res.log_decomposition())))
    T = res.transition_matrix()
    p = res.stationary_d.reshape(-1)
    add("stationarity", diagnostics.stationarity_residual(T, p))
    add("marginal", np.max(np.abs(res.stationary_1 - res.r)))
    if T.shape[0] <= LINEAR_SOLVE_MAX_STATES:
        add("linear_solve", np.max(np.abs(diagnostics.stationary_by_linear_solve(T) - p)))
    if res.order == 1:
        pair_ipf = diagnostics.ipf_scale(np.exp(res.H - res.H.max()), res.r, res.r)
        add("ipf", np.max(np.abs(res.pair() - pair_ipf)))
        fam = family_for(res.base, res.H, 1)
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(PYTHAGOREAN_TRIALS):
            w = diagnostics.sample_M_member(res.r, seed=rng)
            v = family_at(fam, rng.uniform(-2, 2, fam.K)).w.reshape(res.m, res.m)
            worst = max(worst, abs(diagnostics.pythagorean_residual(w, res.kernel, v)))
        add("pythagorean", worst)
    return checks


def cmd_verify(args) -> int:
    res, _ = io.read_result(args.result)
    checks = verification_checks(res)
    ok = all(c["passed"] for c in checks)
    io.write_json({"passed": ok, "checks": checks}, args.out)
    if not ok:
        failed = [c["check"] for c in checks if not c["passed"]]
        raise VerificationError(f"checks failed: {failed}")
    return 0


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minmarkov", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a kernel from a problem spec")
    c.add_argument("--spec", required=True)
    c.add_argument("--out")
    c.add_argument("--tol", type=float)
    c.add_argument("--max-iter", type=int)
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("sample", help="simulate a stationary path from a result file")
    s.add_argument("--result", "--spec", dest="result", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    t = sub.add_parser("stats", help="ACF, PACF and marginal (exact or from a series)")
    t.add_argument("--result")
    t.add_argument("--series")
    t.add_argument("--max-lag", type=int, default=20)
    t.add_argument("--out")
    t.set_defaults(func=cmd_stats)

    f = sub.add_parser("fit", help="estimate a model from a series")
    f.add_argument("--spec", required=True)
    f.add_argument("--series")
    f.add_argument("--out")
    f.add_argument("--tol", type=float)
    f.add_argument("--max-iter", type=int)
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", help="run the oracle checks on a result file")
    v.add_argument("--result", "--spec", dest="result", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def _error_payload(exc: BaseException, code: int) -> dict:
    out = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    for attr in ("field", "missing", "residual", "iterations", "components"):
        val = getattr(exc, attr, None)
        if val is not None and val != []:
            out[attr] = val
    return out


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except MinMarkovError as exc:
        err, code = exc, exc.exit_code
    except Exception as exc:  # noqa: BLE001  report anything else as JSON too
        err, code = exc, 1
    sys.stderr.write(json.dumps(_error_payload(err, code), default=str) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
