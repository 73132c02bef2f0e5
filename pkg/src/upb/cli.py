"""Command-line interface: bound / table / sweep / eval / search / selftest.

Exit codes: 0 success, 1 usage or validation failure, 2 numerical failure.
Structured output (``--format csv|json``) is byte-identical for identical
flags and seed when ``--no-timestamp`` is passed; timing fields are dropped
along with the timestamp since wall time is never reproducible.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .bounds import (
    BOUND_IDS,
    BOUND_METRIC,
    SolverConfig,
    evaluate_bound,
    euclidean_riemannian_envelope,
    solve_r0,
    solver_key,
)
from .constellation import (
    chordal_packing_radius,
    diversity_summary,
    load_constellation,
    random_search,
    riemannian_distance,
    save_constellation,
)
from .errors import ConfigError, NumericalError, ParseError, RangeError, ValidationError
from .matrices import haar_sample
from .weyl import (
    METRICS,
    IntegrationConfig,
    ball_mass,
    max_radius,
    normalizer_estimate,
    resolve_strategy,
    total_mass,
)

__all__ = ["main", "console_main"]

_DEFAULT_CACHE_DIR = ".upb-cache"
_ENV_CACHE_DIR = "UPB_CACHE_DIR"

# Published reference values for the n = 2 upper-bound table.  Rows are
# constellation sizes; columns give the first and second Euclidean bounds
# as printed in the source table (4 significant digits).
_TABLE_M = (24, 48, 64, 80, 100, 120, 128, 1000)
_TABLE_REF = {
    "b1": (0.7598, 0.6603, 0.6131, 0.5932, 0.5578, 0.5425, 0.5347, 0.3270),
    "b2": (0.7794, 0.6734, 0.6235, 0.6026, 0.5654, 0.5496, 0.5415, 0.3285),
}


class _UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through exit code 1
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# run records and output formatting


@dataclass
class RunRecord:
    """One CLI invocation: parameters in, tabular results out."""

    command: str
    parameters: dict
    columns: tuple
    rows: list  # dicts keyed by column name
    wall_time_s: float
    timestamp: str
    notes: tuple = ()

    def to_dict(self, include_time: bool) -> dict:
        out = {
            "command": self.command,
            "parameters": self.parameters,
            "results": [{c: row[c] for c in self.columns} for row in self.rows],
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if include_time:
            out["wall_time_s"] = round(self.wall_time_s, 3)
            out["timestamp"] = self.timestamp
        return out


def _json_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NumericalError(f"non-finite value in output: {value!r}")
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def _json_render(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(k)}: {_json_render(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{_json_render(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _json_scalar(obj)


def _cell(value, digits: int) -> str:
    """Render one cell: floats at the given precision, the rest verbatim."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{digits}g")
    if value is None:
        return "-"
    return str(value)


def _render_table(record: RunRecord, include_time: bool) -> str:
    cols = list(record.columns)
    grid = [[c for c in cols]]
    for row in record.rows:
        grid.append([_cell(row[c], 6) for c in cols])
    widths = [max(len(r[i]) for r in grid) for i in range(len(cols))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in grid]
    for note in record.notes:
        lines.append(note)
    if include_time:
        lines.append(f"wall_time_s {record.wall_time_s:.3f}  timestamp {record.timestamp}")
    return "\n".join(lines) + "\n"


def _render_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(record.columns)
    for row in record.rows:
        writer.writerow([_cell(row[c], 17) for c in record.columns])
    return buf.getvalue()


def _emit(record: RunRecord, args) -> None:
    include_time = not args.no_timestamp
    if args.format == "json":
        text = _json_render(record.to_dict(include_time)) + "\n"
    elif args.format == "csv":
        text = _render_csv(record)
    else:
        text = _render_table(record, include_time)
    out_path = getattr(args, "out", None)
    if out_path is not None and record.command != "search":
        try:
            Path(out_path).write_text(text)
        except OSError as exc:
            raise _UsageError(f"cannot write --out file: {exc}") from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# solver cache: one structured-text file per solver key, entries never expire


def _cache_dir(args) -> Path:
    if args.cache_dir is not None:
        return Path(args.cache_dir)
    env = os.environ.get(_ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path(_DEFAULT_CACHE_DIR)


def _cache_path(root: Path, key: str) -> Path:
    digest = hashlib.sha256(key.encode()).hexdigest()[:32]
    return root / f"{digest}.json"


def _cache_lookup(root: Path, key: str):
    path = _cache_path(root, key)
    try:
        entry = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    if not isinstance(entry, dict) or entry.get("key") != key:
        return None
    r0 = entry.get("r0")
    if not isinstance(r0, float) or not math.isfinite(r0):
        return None
    return r0


def _cache_store(root: Path, key: str, r0: float) -> None:
    entry = {
        "key": key,
        "r0": float(r0),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    try:
        root.mkdir(parents=True, exist_ok=True)
        path = _cache_path(root, key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(_json_render(entry) + "\n")
        os.replace(tmp, path)
    except OSError:
        pass  # cache is an optimization; solving proceeded fine without it


def _solve_cached(n: int, m: int, metric: str, cfg: SolverConfig, root: Path) -> float:
    key = solver_key(n, m, metric, cfg)
    r0 = _cache_lookup(root, key)
    if r0 is not None:
        return r0
    r0, _ = solve_r0(n, m, metric, cfg)
    _cache_store(root, key, r0)
    return r0


def _derivative(fn, x: float) -> float:
    h = 1e-6 * max(1.0, abs(x))
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _row_std_error(bound_id: str, n: int, r0: float, cfg: SolverConfig) -> float:
    """Propagated bound error, computed identically on cache hits and misses."""
    metric = BOUND_METRIC[bound_id]
    dcurve = abs(_derivative(lambda r: evaluate_bound(bound_id, n, r), r0))
    se_r = 0.5 * cfg.root_tol
    if resolve_strategy(n, cfg.integration) == "monte-carlo":
        est = ball_mass(n, r0, metric, cfg.integration)
        step = max(1e-4, 50.0 * cfg.root_tol) * max(1.0, r0)
        hi = min(r0 + step, max_radius(n, metric))
        lo = max(r0 - step, 0.0)
        est_hi = ball_mass(n, hi, metric, cfg.integration)
        est_lo = ball_mass(n, lo, metric, cfg.integration)
        slope = (est_hi.value - est_lo.value) / (hi - lo)
        if slope > 0.0 and est.std_error > 0.0:
            se_r += est.std_error / slope
    return dcurve * se_r


def _bound_rows(n: int, m: int, methods, cfg: SolverConfig, root: Path) -> list:
    r0s = {}
    for metric in sorted({BOUND_METRIC[b] for b in methods}):
        r0s[metric] = _solve_cached(n, m, metric, cfg, root)
    strategy = resolve_strategy(n, cfg.integration)
    samples = cfg.integration.samples if strategy == "monte-carlo" else 0
    rows = []
    for bound_id in methods:
        metric = BOUND_METRIC[bound_id]
        r0 = r0s[metric]
        rows.append(
            {
                "n": n,
                "m": m,
                "method": bound_id,
                "metric": metric,
                "r0": r0,
                "value": evaluate_bound(bound_id, n, r0),
                "std_error": _row_std_error(bound_id, n, r0, cfg),
                "strategy": strategy,
                "samples": samples,
                "seed": cfg.integration.seed,
            }
        )
    return rows


_SWEEP_COLUMNS = ("n", "m", "method", "metric", "r0", "value", "std_error", "strategy", "samples", "seed")


# ---------------------------------------------------------------------------
# argument plumbing


def _parse_methods(spec: str):
    names = [tok.strip() for tok in spec.split(",") if tok.strip()]
    if not names:
        raise _UsageError("--method needs at least one of b1, b2, b3, all")
    if "all" in names:
        return list(BOUND_IDS)
    for name in names:
        if name not in BOUND_IDS:
            raise _UsageError(f"unknown method {name!r}; choose from b1, b2, b3, all")
    seen = []
    for name in names:
        if name not in seen:
            seen.append(name)
    return seen


def _check_nm(n: int, m: int) -> None:
    if n < 1:
        raise _UsageError("n must be ≥ 1")
    if m < 2:
        raise _UsageError("m must be ≥ 2")


def _check_metric_flag(args, methods) -> None:
    if args.metric is None:
        return
    for bound_id in methods:
        want = BOUND_METRIC[bound_id]
        if args.metric != want:
            raise _UsageError(f"method {bound_id} is defined for the {want} metric, not {args.metric}")


def _solver_config(args) -> SolverConfig:
    try:
        integration = IntegrationConfig(
            strategy=args.strategy,
            samples=args.samples,
            nodes_per_axis=args.nodes,
            seed=args.seed,
        )
        return SolverConfig(integration=integration, root_tol=args.root_tol)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from exc


def _record(args, command: str, parameters: dict, columns, rows, notes=(), t0: float = 0.0) -> RunRecord:
    return RunRecord(
        command=command,
        parameters=parameters,
        columns=tuple(columns),
        rows=rows,
        notes=tuple(notes),
        wall_time_s=time.perf_counter() - t0,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_bound(args) -> int:
    t0 = time.perf_counter()
    _check_nm(args.n, args.m)
    methods = _parse_methods(args.method)
    _check_metric_flag(args, methods)
    cfg = _solver_config(args)
    rows = _bound_rows(args.n, args.m, methods, cfg, _cache_dir(args))
    params = {
        "n": args.n,
        "m": args.m,
        "method": ",".join(methods),
        "strategy": resolve_strategy(args.n, cfg.integration),
        "samples": cfg.integration.samples,
        "nodes": cfg.integration.nodes_per_axis,
        "seed": cfg.integration.seed,
        "root_tol": cfg.root_tol,
    }
    _emit(_record(args, "bound", params, _SWEEP_COLUMNS, rows, t0=t0), args)
    return 0


def cmd_table(args) -> int:
    t0 = time.perf_counter()
    cfg = _solver_config(args)
    root = _cache_dir(args)
    rows = []
    worst = 0.0
    for i, m in enumerate(_TABLE_M):
        r0 = _solve_cached(2, m, "euclidean", cfg, root)
        for bound_id in ("b1", "b2"):
            computed = evaluate_bound(bound_id, 2, r0)
            reference = _TABLE_REF[bound_id][i]
            dev = abs(computed - reference)
            worst = max(worst, dev)
            rows.append(
                {
                    "m": m,
                    "method": bound_id,
                    "computed": computed,
                    "reference": reference,
                    "abs_dev": dev,
                }
            )
    params = {
        "n": 2,
        "strategy": resolve_strategy(2, cfg.integration),
        "nodes": cfg.integration.nodes_per_axis,
        "root_tol": cfg.root_tol,
    }
    notes = (f"max abs deviation {worst:.6g} over {len(rows)} entries",)
    _emit(_record(args, "table", params, ("m", "method", "computed", "reference", "abs_dev"), rows, notes, t0), args)
    return 0


def _sweep_sizes(args) -> list:
    if args.m_start < 2:
        raise _UsageError("m must be ≥ 2")
    if args.m_end < args.m_start:
        raise _UsageError("--m-end must be ≥ --m-start")
    if args.m_factor is not None:
        if args.m_factor <= 1.0:
            raise _UsageError("--m-factor must be > 1")
        sizes = []
        value = float(args.m_start)
        while True:
            m = int(round(value))
            if m > args.m_end:
                break
            if not sizes or m > sizes[-1]:
                sizes.append(m)
            value *= args.m_factor
        return sizes
    if args.m_step < 1:
        raise _UsageError("--m-step must be ≥ 1")
    return list(range(args.m_start, args.m_end + 1, args.m_step))


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    if args.n < 1:
        raise _UsageError("n must be ≥ 1")
    methods = _parse_methods(args.method)
    _check_metric_flag(args, methods)
    cfg = _solver_config(args)
    root = _cache_dir(args)
    rows = []
    for m in _sweep_sizes(args):
        rows.extend(_bound_rows(args.n, m, methods, cfg, root))
    params = {
        "n": args.n,
        "m_start": args.m_start,
        "m_end": args.m_end,
        "m_step": args.m_step,
        "m_factor": args.m_factor,
        "method": ",".join(methods),
        "strategy": resolve_strategy(args.n, cfg.integration),
        "samples": cfg.integration.samples,
        "nodes": cfg.integration.nodes_per_axis,
        "seed": cfg.integration.seed,
        "root_tol": cfg.root_tol,
    }
    _emit(_record(args, "sweep", params, _SWEEP_COLUMNS, rows, t0=t0), args)
    return 0


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    constellation = load_constellation(args.file)
    summary = diversity_summary(constellation)
    rows = [
        {
            "name": "diversity_sum",
            "value": summary.diversity_sum,
            "detail": f"pair {summary.sum_pair[0]},{summary.sum_pair[1]}",
        },
        {
            "name": "diversity_product",
            "value": summary.diversity_product,
            "detail": f"pair {summary.product_pair[0]},{summary.product_pair[1]}",
        },
        {
            "name": "chordal_packing_radius",
            "value": chordal_packing_radius(constellation),
            "detail": "",
        },
    ]
    notes = []
    if summary.diversity_product <= 0.0:
        notes.append("constellation is not fully diverse (diversity product is 0)")
    if args.bounds:
        cfg = _solver_config(args)
        root = _cache_dir(args)
        for row in _bound_rows(summary.n, summary.m, list(BOUND_IDS), cfg, root):
            rows.append(
                {
                    "name": f"bound_{row['method']}",
                    "value": row["value"],
                    "detail": f"gap {row['value'] - summary.diversity_sum:.6g}",
                }
            )
    params = {"file": str(args.file), "n": summary.n, "m": summary.m}
    if constellation.label:
        params["label"] = constellation.label
    _emit(_record(args, "eval", params, ("name", "value", "detail"), rows, tuple(notes), t0), args)
    return 0


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    _check_nm(args.n, args.m)
    if args.trials < 1:
        raise _UsageError("--trials must be ≥ 1")
    if args.objective not in ("sum", "product"):
        raise _UsageError("--objective must be sum or product")
    best, score = random_search(args.n, args.m, args.trials, args.seed, objective=args.objective)
    out_path = args.out if args.out is not None else f"constellation-n{args.n}-m{args.m}-{args.objective}.json"
    try:
        save_constellation(best, out_path)
    except OSError as exc:
        raise _UsageError(f"cannot write constellation file: {exc}") from exc
    rows = [{"name": f"best_{args.objective}", "value": score, "detail": f"saved {out_path}"}]
    cfg = _solver_config(args)
    root = _cache_dir(args)
    for row in _bound_rows(args.n, args.m, list(BOUND_IDS), cfg, root):
        rows.append(
            {
                "name": f"bound_{row['method']}",
                "value": row["value"],
                "detail": f"gap {row['value'] - score:.6g}",
            }
        )
    params = {
        "n": args.n,
        "m": args.m,
        "trials": args.trials,
        "objective": args.objective,
        "seed": args.seed,
    }
    _emit(_record(args, "search", params, ("name", "value", "detail"), rows, t0=t0), args)
    return 0


# ---------------------------------------------------------------------------
# selftest


def _selftest_normalizer() -> str:
    cfg = IntegrationConfig(strategy="monte-carlo", samples=200_000, seed=20_240_718)
    for n in (1, 2, 3):
        est = normalizer_estimate(n, cfg)
        ref = total_mass(n)
        rel = abs(est.value - ref) / ref
        if rel > 0.01:
            return f"normalizer n={n}: relative error {rel:.3g} exceeds 0.01"
    return ""


def _selftest_product_le_sum() -> str:
    rng = np.random.default_rng(7)
    from .constellation import Constellation, diversity_product, diversity_sum

    for trial in range(100):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(2, 9))
        members = [haar_sample(n, rng) for _ in range(m)]
        try:
            constellation = Constellation(members)
        except ValidationError:
            continue  # astronomically unlikely duplicate draw
        s = diversity_sum(constellation)
        p = diversity_product(constellation)
        if p > s + 1e-12:
            return f"trial {trial}: diversity product {p:.12g} exceeds sum {s:.12g}"
    return ""


def _selftest_envelope() -> str:
    rng = np.random.default_rng(11)
    for trial in range(200):
        n = int(rng.integers(1, 6))
        a = haar_sample(n, rng)
        b = haar_sample(n, rng)
        d = float(np.linalg.norm(a.array - b.array))
        dist = riemannian_distance(a, b)
        lower, upper = euclidean_riemannian_envelope(n, d)
        if not (lower - 1e-9 <= dist <= upper + 1e-9):
            return f"trial {trial}: distance {dist:.9g} outside [{lower:.9g}, {upper:.9g}]"
    return ""


def _selftest_closed_forms() -> str:
    cfg = SolverConfig()
    for m in (2, 3, 4, 8, 16, 64):
        expected = math.sin(math.pi / m)
        for bound_id in BOUND_IDS:
            r0, _ = solve_r0(1, m, BOUND_METRIC[bound_id], cfg)
            value = evaluate_bound(bound_id, 1, r0)
            if abs(value - expected) > 1e-6:
                return f"{bound_id}(1, {m}) = {value:.9g}, expected sin(pi/{m}) = {expected:.9g}"
    return ""


def cmd_selftest(args) -> int:
    checks = (
        ("normalizer", _selftest_normalizer),
        ("product-le-sum", _selftest_product_le_sum),
        ("metric-envelope", _selftest_envelope),
        ("n1-closed-forms", _selftest_closed_forms),
    )
    failures = []
    for name, fn in checks:
        detail = fn()
        if detail:
            failures.append(name)
            print(f"FAIL {name}: {detail}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"selftest failed: {', '.join(failures)}")
        return 2
    print("selftest passed")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _build_parser() -> _Parser:
    numeric = _Parser(add_help=False)
    numeric.add_argument("--strategy", default="auto",
                         choices=["auto", "mc", "monte-carlo", "tensor", "tensor-quadrature"])
    numeric.add_argument("--samples", type=int, default=1_000_000)
    numeric.add_argument("--nodes", type=int, default=200)
    numeric.add_argument("--seed", type=int, default=0)
    numeric.add_argument("--root-tol", type=float, default=1e-6)
    numeric.add_argument("--metric", choices=sorted(METRICS), default=None)

    output = _Parser(add_help=False)
    output.add_argument("--format", default="table", choices=["table", "csv", "json"])
    output.add_argument("--out", default=None)
    output.add_argument("--no-timestamp", action="store_true")
    output.add_argument("--cache-dir", default=None)

    parser = _Parser(prog="upb", description="Upper bounds on unitary constellation diversity.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", parents=[numeric, output], help="bounds for one (n, m)")
    p_bound.add_argument("--n", type=int, required=True)
    p_bound.add_argument("--m", type=int, required=True)
    p_bound.add_argument("--method", default="all")
    p_bound.set_defaults(func=cmd_bound)

    p_table = sub.add_parser("table", parents=[numeric, output],
                             help="n = 2 reference table with deviations")
    p_table.set_defaults(func=cmd_table)

    p_sweep = sub.add_parser("sweep", parents=[numeric, output], help="bounds over a range of m")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--m-start", type=int, required=True)
    p_sweep.add_argument("--m-end", type=int, required=True)
    p_sweep.add_argument("--m-step", type=int, default=1)
    p_sweep.add_argument("--m-factor", type=float, default=None)
    p_sweep.add_argument("--method", default="all")
    p_sweep.set_defaults(func=cmd_sweep)

    p_eval = sub.add_parser("eval", parents=[numeric, output],
                            help="diversity figures for a constellation file")
    p_eval.add_argument("file")
    p_eval.add_argument("--bounds", action="store_true")
    p_eval.set_defaults(func=cmd_eval)

    p_search = sub.add_parser("search", parents=[numeric, output],
                              help="random search for a good constellation")
    p_search.add_argument("--n", type=int, required=True)
    p_search.add_argument("--m", type=int, required=True)
    p_search.add_argument("--trials", type=int, default=10_000)
    p_search.add_argument("--objective", default="sum")
    p_search.set_defaults(func=cmd_search)

    p_self = sub.add_parser("selftest", parents=[numeric, output],
                            help="fast internal consistency checks")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, RangeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
