"""Batch runner: one experiment per invocation, reports written as files.

    relsz <command> [key=value ...] [--seed S] [--budget-ms T] [--out PATH]
                    [--format json|csv] [--jobs J] [--config FILE]

Parameters come from ``key=value`` arguments, optionally preceded by an INI
file whose ``[run]`` section holds the global options and whose
``[params]`` section holds command parameters. Unknown keys are rejected.
Every report embeds the resolved configuration.

Exit codes: 0 pass, 1 usage, 2 budget, 3 inequality or oracle failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import math
import os
import signal
import sys
import tempfile
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_FAIL = 0, 1, 2, 3

COMMANDS = ("extremal", "norms", "lfc", "counting", "sieve", "pipeline", "oracle", "suite")


class UsageError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class CheckFailed(AssertionError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def _ints(s: str) -> list[int]:
    return [int(t) for t in str(s).replace(";", ",").split(",") if t.strip()]


# command -> {key: (parser, default)}
SCHEMAS: dict[str, dict] = {
    "extremal": {"N": (int, 20), "k": (int, 3), "cap": (int, None), "N_min": (int, 1)},
    "norms": {"N": (int, 5), "r": (int, 2), "restarts": (int, 64), "mode": (str, "auto"),
              "source": (str, "random")},
    "lfc": {"N": (int, 5), "k": (int, 3), "nu": (str, "random"), "spread": (float, None),
            "samples": (int, 256)},
    "counting": {"N": (int, 5), "k": (int, 3), "mode": (str, "relative"), "threshold": (float, 0.05),
                 "max_rounds": (int, 32)},
    "sieve": {"N": (int, 2000), "c0": (float, 0.25), "gamma": (float, 0.1), "floor": (float, 0.5),
              "bitset": (str, None)},
    "pipeline": {"N": (int, 2000), "k": (int, 3), "c0": (float, 0.25), "gamma": (float, 0.1),
                 "floor": (float, 0.5), "points": (int, 20000), "samples": (int, 256),
                 "table_N": (int, 40), "B": (_ints, None)},
    "oracle": {"target": (str, "lfc"), "N": (int, 5), "k": (int, 3), "pattern": (int, None),
               "tol": (float, 1e-9)},
    "suite": {"scope": (str, "propD_dense"), "seeds": (int, 20), "sizes": (_ints, None), "k": (int, 3)},
}

RUN_KEYS = {"seed", "format", "out", "budget_ms", "jobs"}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _parse_params(command: str, raw: dict) -> dict:
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise UsageError(f"unknown parameter(s) for {command}: {', '.join(unknown)}")
    out = {}
    for key, (conv, default) in schema.items():
        if key in raw and raw[key] is not None:
            try:
                out[key] = conv(raw[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {key}: {raw[key]!r}") from exc
        else:
            out[key] = default
    return out


def _read_config(path: str) -> tuple[dict, dict]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys such as N are case sensitive
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    extra = sorted(set(cp.sections()) - {"run", "params"})
    if extra:
        raise UsageError(f"unknown config section(s): {', '.join(extra)}")
    run = dict(cp["run"]) if cp.has_section("run") else {}
    unknown = sorted(set(run) - RUN_KEYS)
    if unknown:
        raise UsageError(f"unknown run key(s): {', '.join(unknown)}")
    params = dict(cp["params"]) if cp.has_section("params") else {}
    return run, params


def resolve_config(argv) -> dict:
    parser = _parser()
    ns = parser.parse_intermixed_args(argv)
    run, params = ({}, {}) if ns.config is None else _read_config(ns.config)
    for item in ns.params:
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    for key in RUN_KEYS:
        val = getattr(ns, key)
        if val is not None:
            run[key] = val
    try:
        seed = int(run.get("seed", 0))
        budget = run.get("budget_ms")
        budget = None if budget in (None, "") else int(budget)
        jobs = int(run.get("jobs", 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    fmt = run.get("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"unknown format {fmt!r}")
    return {
        "command": ns.command,
        "seed": seed,
        "format": fmt,
        "out": run.get("out"),
        "budget_ms": budget,
        "jobs": jobs,
        "params": _parse_params(ns.command, params),
    }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relsz", description="Relative Szemeredi numerical laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("params", nargs="*", help="command parameters as key=value")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker cap (recorded; computations run in one process)")
    p.add_argument("--budget-ms", dest="budget_ms", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--config")
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_extremal(cfg, p):
    from .zcore import extremal_csv, rk_table

    budget = None if cfg["budget_ms"] is None else cfg["budget_ms"] / 1000
    recs = rk_table(p["N"], p["k"], cap=p["cap"], budget_s=budget)
    recs = [r for r in recs if r.N >= p["N_min"]]
    rows = [{"N": r.N, "k": r.k, "r": r.r_value, "alpha": r.alpha, "witness": list(r.witness)} for r in recs]
    return {"records": rows}, extremal_csv(recs)


def _seeded_signed(N: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).random(N)
    return v - v.mean()


def _cmd_norms(cfg, p):
    from .norms import cut_norm_arithmetic, gowers_norm_arithmetic

    if p["source"] != "random":
        raise UsageError("norms source must be 'random'")
    f = _seeded_signed(p["N"], cfg["seed"])
    cut = cut_norm_arithmetic(f, p["r"], restarts=p["restarts"], seed=cfg["seed"], mode=p["mode"])
    gn = gowers_norm_arithmetic(f, p["r"])
    checks = {"cut <= gowers": cut.value <= gn.value * (1 + 1e-9) + 1e-12}
    rep = {"f": f.tolist(), "cut": cut.to_json(), "gowers": {"value": gn.value, "power": gn.power, "r": gn.r},
           "checks": checks}
    if not all(checks.values()):
        raise CheckFailed("cut norm exceeds the Gowers norm", rep)
    return rep, None


def _nu_from(p, seed):
    from .suites import seeded_nu
    from .zcore import DensityFunction

    if p["nu"] == "ones":
        return DensityFunction.constant(p["N"])
    if p["nu"] == "random":
        return seeded_nu(p["N"], seed, p["spread"])
    raise UsageError("nu must be 'ones' or 'random'")


def _cmd_lfc(cfg, p):
    from .pseudo import lfc_delta

    nu = _nu_from(p, cfg["seed"])
    rep = lfc_delta(nu, p["k"], samples=p["samples"], seed=cfg["seed"])
    out = rep.to_json()
    out["certified"] = rep.certified
    out["nu"] = nu.values.tolist()
    return out, None


def _cmd_counting(cfg, p):
    from .counting import dense_model_greedy, dense_model_verify, relative_counting_gap
    from .suites import seeded_nu, seeded_triple

    if p["mode"] == "relative":
        nu, g, gt = seeded_triple(p["N"], cfg["seed"], p["k"])
        diag = relative_counting_gap(g, gt, nu)
        rep = diag.to_json()
        if not diag.all_checks_pass:
            raise CheckFailed(f"counting checks failed: {diag.failed()}", rep)
        return rep, None
    if p["mode"] == "dense_model":
        nu = seeded_nu(p["N"], cfg["seed"], 0.3)
        mask = np.random.default_rng([cfg["seed"], 5]).random(p["N"]) < 0.5
        f = nu.values * mask
        res = dense_model_greedy(f, p["k"], threshold=p["threshold"], max_rounds=p["max_rounds"], seed=cfg["seed"])
        chk = dense_model_verify(f, res.model, p["k"], p["threshold"] if res.converged else res.distance)
        rep = {"f": f.tolist(), "model": res.model.values.tolist(), "rounds": res.rounds,
               "converged": res.converged, "distance": chk.distance, "exact": chk.exact,
               "mean_gap": chk.mean_gap, "checks": {"verify": chk.satisfied,
                                                    "mean_within_distance": chk.mean_within_distance}}
        if not all(rep["checks"].values()):
            raise CheckFailed("dense model verification failed", rep)
        return rep, None
    raise UsageError("counting mode must be 'relative' or 'dense_model'")


def _cmd_sieve(cfg, p):
    from .sieve import (choose_residue, domination_ratio, gpy_majorant, lambda_weight, w_trick_params,
                        write_prime_bitset)

    params = w_trick_params(p["N"], c0=p["c0"], gamma=p["gamma"])
    b, count = choose_residue(params)
    params = params.with_residue(b)
    maj = gpy_majorant(params, floor=p["floor"])
    lam = lambda_weight(params)
    rep = {"params": params.to_json(), "residue_count": count, "majorant": maj.to_json(),
           "lambda_mean": float(lam.values.mean()), "lambda_over_nu": domination_ratio(lam, maj.nu)}
    if p["bitset"]:
        write_prime_bitset(p["bitset"], params.b + params.W * params.N_prime)
        rep["bitset"] = {"path": p["bitset"], "limit": params.b + params.W * params.N_prime}
    return rep, None


def _cmd_pipeline(cfg, p):
    from .pipeline import run_pipeline

    conf = {"c0": p["c0"], "gamma": p["gamma"], "floor": p["floor"], "points": p["points"],
            "patterns": p["samples"], "seed": cfg["seed"], "table_N": p["table_N"]}
    rep = run_pipeline(p["N"], p["k"], conf, B=p["B"])
    out = rep.to_json()
    out.pop("timings")  # wall-clock data would break byte-identical replays
    return out, None


def _cmd_oracle(cfg, p):
    from . import oracles
    from .hypergraph import WeightedHypergraph, clique_density
    from .norms import cut_norm_hypergraph, gowers_power
    from .pseudo import LfcPattern, lfc_value_arithmetic
    from .suites import seeded_nu
    from .zcore import ap_count, rk_table

    N, k, seed, target = p["N"], p["k"], cfg["seed"], p["target"]
    rng = np.random.default_rng(seed)
    if target == "lfc":
        nu = seeded_nu(N, seed)
        F = k * 2 ** (k - 1)
        pat = (1 << F) - 1 if p["pattern"] is None else p["pattern"]
        bits = [(pat >> f) & 1 for f in range(F)]
        a = lfc_value_arithmetic(nu, k, LfcPattern.from_int(k, pat))
        b = oracles.lfc_value_loops(nu.values, k, np.array(bits).reshape(k, -1))
        names = ("contracted", "nested_loop")
    elif target == "ap":
        v = rng.random(N)
        a = clique_density(WeightedHypergraph.from_arithmetic(v, k))
        b = oracles.ap_count_enumerate(v, k)
        names = ("clique_density", "enumerated")
        extra = ap_count(v, k)
    elif target == "rk":
        a = rk_table(N, k)[-1].r_value
        b = oracles.rk_enumerate(N, k)[-1]
        names = ("branch_and_bound", "enumerated")
    elif target == "cut":
        h = rng.random((N, N)) - 0.5
        a = cut_norm_hypergraph(h).value
        b = oracles.cut_norm_enumerate(h)
        names = ("exact_search", "enumerated")
    elif target == "gowers":
        h = rng.random((N,) * k) - 0.5
        a = gowers_power(h)
        b = oracles.gowers_power_enumerate(h)
        names = ("contracted", "enumerated")
    else:
        raise UsageError("oracle target must be one of lfc, ap, rk, cut, gowers")
    a, b = float(a), float(b)
    rel = abs(a - b) / max(abs(a), abs(b), 1e-300) if a != b else 0.0
    rep = {"target": target, names[0]: a, names[1]: b, "relative_difference": rel, "tol": p["tol"],
           "agree": rel <= p["tol"]}
    if target == "ap":
        rep["ap_count"] = float(extra)
    if not rep["agree"]:
        raise CheckFailed("dual-path values disagree", rep)
    return rep, None


def _cmd_suite(cfg, p):
    from .suites import SuiteFailure, emit_inequality_suite

    seeds = [cfg["seed"] + t for t in range(p["seeds"])]
    try:
        summ = emit_inequality_suite(p["scope"], seeds, p["sizes"], p["k"])
    except SuiteFailure as exc:
        raise CheckFailed(str(exc), {"failed_row": exc.row, "instance": exc.instance}) from exc
    rep = summ.to_json()
    buf = io.StringIO()
    cols = ["scope", "seed", "N", "tag", "lhs", "rhs", "slack", "pass"]
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rep["rows"])
    return rep, buf.getvalue()


HANDLERS = {
    "extremal": _cmd_extremal, "norms": _cmd_norms, "lfc": _cmd_lfc, "counting": _cmd_counting,
    "sieve": _cmd_sieve, "pipeline": _cmd_pipeline, "oracle": _cmd_oracle, "suite": _cmd_suite,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _flat_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])

    def walk(prefix, x):
        if isinstance(x, dict):
            for k in sorted(x):
                walk(f"{prefix}.{k}" if prefix else str(k), x[k])
        elif not isinstance(x, list):
            w.writerow([prefix, x])

    walk("", _jsonable(report))
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: dict, text: str, stdout) -> None:
    if cfg["out"]:
        atomic_write(cfg["out"], text)
    else:
        stdout.write(text)


def _error(kind: str, message: str, code: int, stderr, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update(extra)
    stderr.write(canonical_json(payload))
    return code


def _alarm(signum, frame):
    raise BudgetExceeded("time budget exhausted")


def run(cfg: dict, stdout=None, stderr=None) -> int:
    """Execute a resolved configuration; returns the exit status."""
    from .contract import ContractionBudgetExceeded
    from .pseudo import PreconditionError
    from .zcore import SearchBudgetExceeded, TableExhausted

    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    budget = cfg["budget_ms"]
    use_timer = budget is not None and budget > 0 and hasattr(signal, "setitimer")
    old = None
    if use_timer:
        old = signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, budget / 1000.0)
    try:
        report, csv_text = HANDLERS[cfg["command"]](cfg, cfg["params"])
    except (BudgetExceeded, SearchBudgetExceeded, ContractionBudgetExceeded) as exc:
        return _error("budget", str(exc), EXIT_BUDGET, stderr, config=cfg)
    except CheckFailed as exc:
        doc = {"config": cfg, "report": exc.report, "status": "fail",
               "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        _emit(cfg, canonical_json(doc), stdout)
        return _error("check_failed", str(exc), EXIT_FAIL, stderr)
    except (UsageError, PreconditionError, TableExhausted, ValueError) as exc:
        return _error("usage", str(exc), EXIT_USAGE, stderr, config=cfg)
    finally:
        if use_timer:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, old)
    if cfg["format"] == "csv":
        text = csv_text if csv_text is not None else _flat_csv(report)
    else:
        doc = {"config": cfg, "report": report, "status": "pass",
               "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        text = canonical_json(doc)
    _emit(cfg, text, stdout)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE, sys.stderr)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
