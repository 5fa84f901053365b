"""Command line interface: ``sca run|sweep|render|oracle-check|analyze``."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import oracle
from ..evolution import evolve, make_plan
from ..hamiltonian import FieldConfig
from ..lattice import Grid, WaveField
from .dump import DumpFormatError, read_dump
from .ppm import write_ppm
from .runner import REPORTS, AnalysisError, analyze, fmt, run_scenario
from .scenario import ScenarioError, evaluate, load_scenario, override, parse_text


def flatten(obj, prefix: str = "") -> dict[str, float | str]:
    """Scalar leaves of a nested report, keyed by dotted path."""
    out: dict = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.update(flatten(obj[k], f"{prefix}{k}."))
    elif isinstance(obj, (bool, int, float, np.floating, np.integer)):
        out[prefix[:-1]] = obj
    elif isinstance(obj, str):
        out[prefix[:-1]] = obj
    return out


def _print_flat(obj, prefix: str = "") -> None:
    for k, v in flatten(obj, prefix).items():
        print(f"{k} = {fmt(v) if isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) else v}")


# --- parameter ranges -------------------------------------------------------------

def parse_range(text: str) -> tuple[str, list[float]]:
    """``key=a..b:n`` (n points, inclusive), ``key=a,b,c`` or ``key=a``."""
    if "=" not in text:
        raise ValueError(f"parameter {text!r} must look like key=a..b:n")
    key, spec = text.split("=", 1)
    key = key.strip()
    if ".." in spec:
        lo, rest = spec.split("..", 1)
        if ":" in rest:
            hi, n = rest.rsplit(":", 1)
            n = int(evaluate(n))
        else:
            hi, n = rest, 2
        if n < 1:
            raise ValueError("a range needs at least one point")
        a, b = evaluate(lo), evaluate(hi)
        values = [a] if n == 1 else list(np.linspace(a, b, n))
    else:
        values = [evaluate(s) for s in spec.split(",") if s.strip()]
    if not values:
        raise ValueError(f"parameter {key!r} has an empty range")
    return key, [float(v) for v in values]


def resolve_key(text: str, key: str) -> str:
    """Bare keys are looked up in every section; they must be unambiguous."""
    if "." in key:
        return key
    sc = parse_text(text)
    hits = []
    for section, sec in (("wave", sc.wave),) + tuple(("analysis." + n, s) for n, s in sc.analysis.items()):
        if key in sec:
            hits.append(f"{section}.{key}")
    for section in ("physics", "run", "schedule"):
        for line in _section_lines(text, section):
            if line.split("=", 1)[0].strip() == key:
                hits.append(f"{section}.{key}")
    if len(hits) != 1:
        raise ScenarioError(f"parameter {key!r} is {'ambiguous' if hits else 'not found'}; "
                            "write it as section.key")
    return hits[0]


def _section_lines(text: str, section: str) -> list[str]:
    out, cur = [], None
    for raw in text.splitlines():
        s = raw.split("#", 1)[0].strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1]
        elif cur == section and "=" in s:
            out.append(s)
    return out


def _sweep_point(args):
    text, name, out, cycles = args
    sc = parse_text(text, name=name)
    return run_scenario(sc, out, cycles=cycles)


def workers() -> int:
    env = os.environ.get("SCA_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SystemExit(f"SCA_THREADS must be an integer, got {env!r}")
        return max(1, n)
    return os.cpu_count() or 1


def sweep(path, params: list[str], out, cycles: int | None = None, n_workers: int | None = None) -> Path:
    sc = load_scenario(path)
    base = sc.source
    ranges = []
    for p in params:
        key, values = parse_range(p)
        ranges.append((resolve_key(base, key), values))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs, points = [], []
    for i, combo in enumerate(itertools.product(*[v for _, v in ranges])):
        text = base
        for (key, _), value in zip(ranges, combo):
            text = override(text, key, fmt(value))
        jobs.append((text, sc.name, str(out / f"point_{i:04d}"), cycles))
        points.append(combo)
    n_workers = n_workers or workers()
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(n_workers, len(jobs))) as pool:
            reports = list(pool.map(_sweep_point, jobs))
    else:
        reports = [_sweep_point(j) for j in jobs]
    rows = []
    for combo, rep in zip(points, reports):
        flat = flatten(rep["reports"])
        flat["trace.max_abs_drift"] = rep["trace"]["max_abs_drift"]
        rows.append((combo, flat))
    columns = sorted({k for _, flat in rows for k in flat})
    table = out / "sweep.csv"
    with table.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([k for k, _ in ranges] + columns)
        for combo, flat in rows:
            w.writerow([fmt(v) for v in combo] +
                       [fmt(flat[c]) if isinstance(flat.get(c), (int, float)) else flat.get(c, "")
                        for c in columns])
    return table


# --- oracle self-check ----------------------------------------------------------------

def oracle_checks(max_n: int = 64, seed: int = 0) -> list[tuple[str, float, float | str, bool]]:
    """(name, value, limit, ok) rows comparing the sweep with dense operators."""
    rng = np.random.default_rng(seed)
    theta = math.pi / 24
    rows = []
    n = 8
    while n <= max_n:
        g = Grid((n,))
        fields = FieldConfig.free(g)
        fields.v[:] = rng.uniform(0.0, 0.3, n)
        fields.g[..., 0] = rng.uniform(-0.2, 0.2, n)
        plan = make_plan(g, theta, fields)
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi /= np.linalg.norm(psi)
        f = WaveField(g, psi.copy())
        evolve(f, plan, 2)
        ref = oracle.cycle_operator(plan, 1) @ (oracle.cycle_operator(plan, 0) @ psi)
        err = float(np.max(np.abs(f.psi - ref)))
        rows.append((f"sweep_vs_dense_n{n}", err, 1e-12, err < 1e-12))
        n *= 2
    if max_n >= 16:
        errs = []
        for th in (theta, theta / 2):
            plan = make_plan(Grid((16,)), th)
            pair = oracle.cycle_operator(plan, 1) @ oracle.cycle_operator(plan, 0)
            exact = oracle.exact_step(oracle.dense_hamiltonian(Grid((16,))), 2 * th)
            errs.append(oracle.operator_norm_error(pair, exact))
        ratio = errs[0] / errs[1]
        rows.append(("trotter_ratio_n16", ratio, "[6.5, 9.5]", 6.5 <= ratio <= 9.5))
    if max_n >= 8:
        g = Grid((8, 8))
        plan = make_plan(g, theta)
        psi = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        f = WaveField(g, psi.reshape(8, 8).copy())
        evolve(f, plan, 1)
        u1 = oracle.free_1d_step(8, theta)
        ref = oracle.kron_operator(u1, u1) @ psi
        err = float(np.max(np.abs(f.psi.ravel() - ref)))
        rows.append(("kronecker_8x8", err, 1e-12, err < 1e-12))
    return rows


# --- commands ---------------------------------------------------------------------

def cmd_run(a) -> int:
    sc = load_scenario(a.scenario)
    text = sc.source
    for s in a.set or []:
        key, _, value = s.partition("=")
        text = override(text, resolve_key(text, key.strip()), value.strip())
    if text != sc.source:
        sc = parse_text(text, name=sc.name)
    out = Path(a.out) if a.out else Path("runs") / sc.name
    report = run_scenario(sc, out, cycles=a.cycles, snapshot_every=a.snapshot_every)
    print(f"wrote {out}")
    _print_flat({"trace": report["trace"], **report["reports"]})
    return 0


def cmd_sweep(a) -> int:
    out = Path(a.out) if a.out else Path("runs") / (Path(a.scenario).stem + "_sweep")
    table = sweep(a.scenario, a.param, out, cycles=a.cycles)
    print(table.read_text(encoding="utf-8"), end="")
    return 0


def cmd_render(a) -> int:
    f = read_dump(a.dump)
    if f.grid.ndim != 2:
        raise SystemExit(f"render needs a 2D dump, got {f.grid.ndim}D")
    fields = None
    if a.scenario:
        sc = load_scenario(a.scenario)
        if sc.grid != f.grid:
            raise SystemExit("scenario grid does not match the dump")
        fields, _ = sc.resolve_fields()
    out = Path(a.out) if a.out else Path(a.dump).with_suffix(f".{a.mode}.ppm")
    write_ppm(out, f.psi, a.mode, fields)
    print(f"wrote {out}")
    return 0


def cmd_oracle(a) -> int:
    ok = True
    for name, value, limit, passed in oracle_checks(a.max_n):
        ok &= passed
        bound = limit if isinstance(limit, str) else f"< {limit:g}"
        print(f"{'PASS' if passed else 'FAIL'} {name} = {fmt(value)} (expected {bound})")
    return 0 if ok else 1


def cmd_analyze(a) -> int:
    reports = analyze(a.run_dir, a.report)
    _print_flat(reports)
    path = Path(a.run_dir) / "analysis.json"
    path.write_text(json.dumps(reports, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sca", description="Schrödinger cellular automaton simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or shipped scenario name")
    r.add_argument("scenario")
    r.add_argument("--cycles", type=int)
    r.add_argument("--snapshot-every", type=int)
    r.add_argument("--out")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scenario value, e.g. wave.k=pi/8")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a scenario over parameter ranges")
    s.add_argument("scenario")
    s.add_argument("--param", action="append", required=True, metavar="KEY=A..B:N")
    s.add_argument("--cycles", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("render", help="write a PPM heatmap of a 2D grid dump")
    d.add_argument("dump")
    d.add_argument("--mode", choices=("prob", "real"), default="prob")
    d.add_argument("--scenario", help="draw this scenario's reflectors and potentials")
    d.add_argument("--out")
    d.set_defaults(func=cmd_render)

    o = sub.add_parser("oracle-check", help="compare the sweep with dense reference operators")
    o.add_argument("--max-n", type=int, default=64)
    o.set_defaults(func=cmd_oracle)

    n = sub.add_parser("analyze", help="recompute reports from a run directory")
    n.add_argument("run_dir")
    n.add_argument("--report", action="append", required=True, choices=sorted(REPORTS))
    n.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, AnalysisError, DumpFormatError, FileNotFoundError,
            oracle.OracleSizeError, ValueError) as exc:
        print(f"sca: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
