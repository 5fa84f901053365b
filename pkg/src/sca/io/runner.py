"""Run scenarios and write their artifacts.

A run directory holds::

    scenario.sca        copy of the input (with overrides applied)
    trace.csv           t, total probability, I(t)
    dumps/psi_<t>.scag  grid dumps (initial, every snapshot_every, final)
    report.json         analysis results
    prob.ppm, real.ppm  final heatmaps (2D runs)
    meta.json           wall-clock metadata; the only non-reproducible file
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..analysis import diffraction as diff
from ..analysis import measure
from ..analysis.spectrum import imag_mass_spectrum
from ..analysis.theory import group_velocity_theory, phase_velocity_theory
from ..evolution import EvolutionPlan, advance
from ..lattice import WaveField
from .dump import read_dump, write_dump
from .ppm import write_ppm
from .scenario import Scenario, ScenarioError, evaluate, evaluate_vector, parse_text


class AnalysisError(RuntimeError):
    pass


def fmt(x) -> str:
    """17 significant digits, the CLI's numeric format."""
    return format(float(x), ".17g")


@dataclass
class RunData:
    scenario: Scenario
    times: list[int] = field(default_factory=list)
    total: list[float] = field(default_factory=list)
    imag: list[float] = field(default_factory=list)
    dumps: dict[int, WaveField] = field(default_factory=dict)
    phase_states: list[np.ndarray] = field(default_factory=list)
    group_states: list[tuple[int, np.ndarray]] = field(default_factory=list)
    columns: np.ndarray | None = None
    final: WaveField | None = None


def _opt(sec: dict, key: str, default=None, cast=float):
    if key not in sec:
        return default
    return cast(evaluate(sec[key]))


def simulate(sc: Scenario, out: Path | None = None) -> RunData:
    fields, theta_map = sc.resolve_fields()
    plan = EvolutionPlan(sc.grid, sc.params, fields, theta_map)
    psi = sc.initial_state()
    data = RunData(sc)
    an = sc.analysis
    vel = an.get("velocity")
    vel_n = _opt(vel, "cycles", min(sc.cycles, 100), int) if vel is not None else -1
    grp = an.get("group")
    if grp is not None:
        g_t0 = _opt(grp, "t0", 0, int)
        g_t1 = _opt(grp, "t1", sc.cycles, int)
        g_every = _opt(grp, "every", 100, int)
    dif = an.get("diffraction")
    if dif is not None:
        d_col = _opt(dif, "column", None, int)
        d_t0 = _opt(dif, "t0", 0, int)
        d_t1 = _opt(dif, "t1", sc.cycles, int)
        d_every = _opt(dif, "every", 10, int)
        data.columns = np.zeros(sc.grid.shape[1])
    dump_dir = None
    if out is not None:
        dump_dir = out / "dumps"
        dump_dir.mkdir(parents=True, exist_ok=True)

    def record(t: int) -> None:
        p = psi.psi
        if t % sc.trace_every == 0 or t == sc.cycles:
            data.times.append(t)
            data.total.append(float(np.sum(p.real ** 2 + p.imag ** 2)))
            data.imag.append(float(np.sum(np.abs(p.imag))))
        if t <= vel_n:
            data.phase_states.append(p.copy())
        if grp is not None and g_t0 <= t <= g_t1 and (t - g_t0) % g_every == 0:
            data.group_states.append((t, p.copy()))
        if dif is not None and d_t0 <= t <= d_t1 and (t - d_t0) % d_every == 0:
            data.columns += np.abs(p[d_col, :]) ** 2
        # the phase-velocity states are dumped too so `analyze` can redo the report
        if (t == 0 or t == sc.cycles or t <= vel_n
                or (sc.snapshot_every and t % sc.snapshot_every == 0)):
            if dump_dir is not None:
                write_dump(dump_dir / f"psi_{t:09d}.scag", psi)
            data.dumps[t] = psi.copy()

    if sc.schedule is not None:
        plan.set_potential_scale(sc.schedule(0))
    record(0)
    for t in range(1, sc.cycles + 1):
        advance(psi, plan, sc.schedule)
        record(t)
    data.final = psi
    return data


# --- reports -----------------------------------------------------------------

def report_velocity(data: RunData) -> dict:
    sc = data.scenario
    states = data.phase_states
    if len(states) < 3:
        raise AnalysisError("velocity report needs at least three consecutive states")
    k = measure.wavenumber_1d(states[0])
    v_p = measure.measure_phase_velocity(states)
    return {"k": k, "theta": sc.theta, "v_p": v_p, "v_p_theory": phase_velocity_theory(sc.theta, k),
            "cycles": len(states) - 1}


def report_group(data: RunData) -> dict:
    sc = data.scenario
    if len(data.group_states) < 2:
        raise AnalysisError("group report needs at least two snapshots")
    times = [t for t, _ in data.group_states]
    v_g = measure.measure_group_velocity([p for _, p in data.group_states], times)
    k = float(evaluate_vector(sc.wave["k"])[0]) if "k" in sc.wave else 0.0
    return {"k": k, "theta": sc.theta, "v_g": v_g, "v_g_theory": group_velocity_theory(sc.theta, k),
            "t0": times[0], "t1": times[-1]}


def _imag_series(data: RunData, sec: dict) -> tuple[np.ndarray, int, int]:
    if data.scenario.trace_every != 1:
        raise AnalysisError("period and spectrum reports need trace_every = 1")
    series = np.asarray(data.imag)
    t0 = _opt(sec, "t0", 0, int)
    t1 = _opt(sec, "t1", len(series) - 1, int) + 1
    if not 0 <= t0 < t1 <= len(series):
        raise AnalysisError(f"window [{t0}, {t1}) is outside the recorded trace")
    return series, t0, t1


def report_period(data: RunData) -> dict:
    sec = data.scenario.analysis["period"]
    series, t0, t1 = _imag_series(data, sec)
    out: dict = {"t0": t0, "t1": t1 - 1}
    spec = imag_mass_spectrum(series, t0, t1)
    omega = spec.fundamental(_opt(sec, "min_freq", 0.0))
    out["omega_spectrum"] = omega
    out["period_spectrum"] = 2 * math.pi / omega
    try:
        pairs = measure.period_from_minima(series[t0:t1], smooth=_opt(sec, "smooth", 5, int),
                                           min_separation=_opt(sec, "min_separation", 1, int),
                                           prominence=_opt(sec, "prominence", 0.0))
        out["minima"] = [[T + t0, w] for T, w in pairs]
        out["period_minima"] = 2 * math.pi / float(np.median([w for _, w in pairs]))
    except measure.MeasurementError as exc:
        out["minima_error"] = str(exc)
    return out


def report_spectrum(data: RunData) -> dict:
    sec = data.scenario.analysis["spectrum"]
    series, t0, t1 = _imag_series(data, sec)
    spec = imag_mass_spectrum(series, t0, t1, _opt(sec, "max_freq", None))
    out = spec.to_dict()
    out.update({"t0": t0, "t1": t1 - 1, "fundamental": spec.fundamental(_opt(sec, "min_freq", 0.0))})
    return out


def report_diffraction(data: RunData) -> dict:
    sec = data.scenario.analysis["diffraction"]
    if data.columns is None:
        raise AnalysisError("no accumulated detector column")
    d, b, lam = (_opt(sec, "d"), _opt(sec, "b", 0.0), _opt(sec, "lambda"))
    rep = diff.diffraction_slice(data.columns, _opt(sec, "column", cast=int), _opt(sec, "y_mid"),
                                 _opt(sec, "screen"), d, b, lam)
    out = rep.to_dict()
    out["minima"] = rep.minima().tolist()
    out["cos2_zeros"] = diff.cos2_zeros(rep, d, lam).tolist()
    out["centroid"] = rep.centroid()
    try:
        out["fringe_centroid"] = rep.fringe_centroid()
    except diff.DiffractionError as exc:
        out["fringe_centroid_error"] = str(exc)
    env = diff.envelope_check(rep, d, lam)
    out["peaks"] = {str(m): v for m, v in env["peaks"].items()}
    out["envelope_bounded"] = env["bounded"]
    out["side_ratio"] = env["side_ratio"]
    return out


def report_ports(data: RunData) -> dict:
    """Final probability per exit port.

    Either ``exit = x, y`` (the last beamsplitter of a Mach-Zehnder layout; the
    ports are the +x and +y sides beyond it, ``margin`` cells past its center)
    or one ``name = lo..., hi...`` box per port.
    """
    sec = dict(data.scenario.analysis["ports"])
    p = np.abs(data.final.psi) ** 2
    probs = {}
    if "exit" in sec:
        if data.scenario.grid.ndim != 2:
            raise AnalysisError("exit ports need a 2D grid")
        cx, cy = evaluate_vector(sec.pop("exit"))
        margin = evaluate(sec.pop("margin", "20"))
        X, Y = data.scenario.grid.coords()
        beyond = (X + Y) > (cx + cy + margin)
        probs["x"] = float(p[beyond & (X - Y > cx - cy)].sum())
        probs["y"] = float(p[beyond & (X - Y < cx - cy)].sum())
    for name, spec in sorted(sec.items()):
        box = [int(v) for v in evaluate_vector(spec)]
        nd = data.scenario.grid.ndim
        if len(box) != 2 * nd:
            raise AnalysisError(f"port {name!r} needs {2 * nd} numbers (lo..., hi...)")
        probs[name] = float(p[tuple(slice(l, h) for l, h in zip(box[:nd], box[nd:]))].sum())
    total = sum(probs.values())
    return {"probability": probs,
            "fraction": {k: (v / total if total > 0 else 0.0) for k, v in probs.items()}}


REPORTS = {"velocity": report_velocity, "group": report_group, "period": report_period,
           "spectrum": report_spectrum, "diffraction": report_diffraction, "ports": report_ports}


def build_reports(data: RunData, only: list[str] | None = None) -> dict:
    names = only if only is not None else sorted(data.scenario.analysis)
    out = {}
    for name in names:
        if name not in REPORTS:
            raise ScenarioError(f"unknown analysis report {name!r}")
        if name not in data.scenario.analysis:
            raise AnalysisError(f"scenario has no [analysis.{name}] section")
        out[name] = REPORTS[name](data)
    return out


def trace_summary(data: RunData) -> dict:
    total = np.asarray(data.total)
    return {"max_abs_drift": float(np.max(np.abs(total - 1.0))) if total.size else 0.0,
            "final_total": float(total[-1]) if total.size else 1.0}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")


def _write_trace(path: Path, data: RunData) -> None:
    lines = ["t,total_probability,imag_mass"]
    lines += [f"{t},{fmt(p)},{fmt(i)}" for t, p, i in zip(data.times, data.total, data.imag)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_scenario(sc: Scenario, out, cycles: int | None = None,
                 snapshot_every: int | None = None) -> dict:
    """Run ``sc`` and write all artifacts into ``out``; returns the report dict."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if cycles is not None:
        sc.cycles = cycles
    if snapshot_every is not None:
        sc.snapshot_every = snapshot_every
    start = time.time()
    (out / "scenario.sca").write_text(sc.source, encoding="utf-8")
    data = simulate(sc, out)
    _write_trace(out / "trace.csv", data)
    if data.columns is not None:
        np.savetxt(out / "diffraction_column.csv", data.columns, fmt="%.17g")
    report = {"scenario": sc.name, "cycles": sc.cycles, "theta": sc.theta,
              "fields_digest": sc.fields_digest(), "trace": trace_summary(data),
              "reports": build_reports(data)}
    _write_json(out / "report.json", report)
    if sc.grid.ndim == 2:
        fields, _ = sc.resolve_fields()
        write_ppm(out / "prob.ppm", data.final.psi, "prob", fields)
        write_ppm(out / "real.ppm", data.final.psi, "real", fields)
    _write_json(out / "meta.json", {"started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(start)),
                                    "elapsed_s": time.time() - start, "version": __version__})
    return report


def load_run(run_dir) -> RunData:
    """Rebuild RunData from a run directory (trace, dumps and detector column)."""
    run_dir = Path(run_dir)
    sc = parse_text((run_dir / "scenario.sca").read_text(encoding="utf-8"),
                    name=run_dir.name, path=str(run_dir / "scenario.sca"))
    data = RunData(sc)
    rows = np.loadtxt(run_dir / "trace.csv", delimiter=",", skiprows=1, ndmin=2)
    data.times = rows[:, 0].astype(int).tolist()
    data.total = rows[:, 1].tolist()
    data.imag = rows[:, 2].tolist()
    for p in sorted((run_dir / "dumps").glob("psi_*.scag")):
        data.dumps[int(p.stem.split("_")[1])] = read_dump(p)
    if not data.dumps:
        raise AnalysisError(f"{run_dir} holds no dumps")
    ts = sorted(data.dumps)
    data.final = data.dumps[ts[-1]]
    # consecutive dumps from t=0 serve the phase-velocity report
    run = [data.dumps[ts[0]].psi]
    for a, b in zip(ts, ts[1:]):
        if b != a + 1:
            break
        run.append(data.dumps[b].psi)
    data.phase_states = run
    grp = sc.analysis.get("group")
    if grp is not None:
        t0 = _opt(grp, "t0", 0, int)
        t1 = _opt(grp, "t1", sc.cycles, int)
        data.group_states = [(t, data.dumps[t].psi) for t in ts if t0 <= t <= t1]
    col = run_dir / "diffraction_column.csv"
    if col.exists():
        data.columns = np.loadtxt(col)
    return data


def analyze(run_dir, reports: list[str]) -> dict:
    return build_reports(load_run(run_dir), reports)
