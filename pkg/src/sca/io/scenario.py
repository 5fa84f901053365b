"""Scenario files: a small line-oriented section format.

Example::

    # comments start with '#'
    [grid]
    sizes = 400 400

    [physics]
    theta = pi/24

    [fields]
    reflect rect lo=120,0 hi=121,400
    reflect rect lo=120,170 hi=121,190 value=0
    v line45 center=240,240 half=90 value=0.248
    g solenoid center=130.5,199.5 K=0.125

    [wave]
    kind = packet
    k = pi/5, 0
    x0 = 60, 199.5
    sigma = 15, 80

    [run]
    cycles = 1200

Numbers accept arithmetic with ``pi``, ``sqrt`` and ``inf``. Vectors are
comma separated. Field painters apply in file order; later ones win.
"""
from __future__ import annotations

import ast
import hashlib
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..evolution import Schedule
from ..hamiltonian import FieldConfig, PhysicalParams
from ..lattice import Grid, LatticeError
from ..waveforms import box_state, gaussian_packet, harmonic_state, plane_wave


class ScenarioError(ValueError):
    """Base class for user-facing scenario problems."""


class ScenarioParseError(ScenarioError):
    def __init__(self, message: str, line: int, column: int = 1, path: str = "<scenario>"):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.line, self.column = line, column


class RegionError(ScenarioError):
    """A painter region falls outside the grid."""


class GridSizeError(ScenarioError):
    """Axis sizes are odd, too small or of the wrong count."""


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow, ast.Mod: operator.mod}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf, "π": math.pi}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp}


def evaluate(expr: str) -> float:
    """Evaluate a numeric expression such as ``pi/24`` or ``2.18e-7``."""
    src = expr.strip().replace("π", "pi")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"bad number {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {expr!r}")

    try:
        return float(ev(tree))
    except (ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot evaluate {expr!r}: {exc}") from exc


def evaluate_vector(text: str) -> list[float]:
    return [evaluate(p) for p in text.split(",") if p.strip()]


@dataclass
class Painter:
    target: str  # v, g, reflect, theta
    shape: str
    args: dict[str, str]
    line: int


@dataclass
class Scenario:
    name: str
    grid: Grid
    theta: float
    painters: list[Painter]
    wave: dict[str, str]
    cycles: int
    snapshot_every: int = 0  # 0: only the initial and final dumps
    trace_every: int = 1
    schedule: Schedule | None = None
    analysis: dict[str, dict[str, str]] = field(default_factory=dict)
    source: str = ""
    _fields: FieldConfig | None = field(default=None, repr=False)
    _theta_override: np.ndarray | None = field(default=None, repr=False)

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.theta)

    def resolve_fields(self) -> tuple[FieldConfig, np.ndarray | None]:
        if self._fields is None:
            self._fields, self._theta_override = paint(self.grid, self.theta, self.painters)
        return self._fields.copy(), (None if self._theta_override is None
                                     else self._theta_override.copy())

    def fields_digest(self) -> str:
        f, th = self.resolve_fields()
        h = hashlib.sha256(f.digest().encode())
        if th is not None:
            h.update(np.ascontiguousarray(th).tobytes())
        return h.hexdigest()

    def initial_state(self):
        return build_wave(self.grid, self.wave)


_SECTION = re.compile(r"^\[([A-Za-z_][\w.]*)\]\s*$")
_KV = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")
_KNOWN = {"grid", "physics", "fields", "wave", "run", "schedule"}


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_text(text: str, name: str = "scenario", path: str = "<scenario>") -> Scenario:
    sections: dict[str, dict[str, tuple[str, int, int]]] = {}
    painters: list[Painter] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        m = _SECTION.match(stripped)
        if m:
            current = m.group(1)
            if current not in _KNOWN and not current.startswith("analysis"):
                raise ScenarioParseError(f"unknown section [{current}]", lineno, col, path)
            if current in sections and current != "fields":
                raise ScenarioParseError(f"duplicate section [{current}]", lineno, col, path)
            sections.setdefault(current, {})
            continue
        if current is None:
            raise ScenarioParseError("content before the first [section]", lineno, col, path)
        if current == "fields":
            painters.append(_parse_painter(stripped, lineno, col, path))
            continue
        m = _KV.match(stripped)
        if not m:
            raise ScenarioParseError("expected 'key = value'", lineno, col, path)
        key, value = m.group(1), m.group(2).strip()
        if key in sections[current]:
            raise ScenarioParseError(f"duplicate key {key!r}", lineno, col, path)
        sections[current][key] = (value, lineno, col + line.lstrip().index("=") + 1)
    return _build(sections, painters, name, path, text)


def _parse_painter(text: str, lineno: int, col: int, path: str) -> Painter:
    parts = text.split()
    if len(parts) < 2:
        raise ScenarioParseError("painter needs '<target> <shape> key=value ...'", lineno, col, path)
    target, shape = parts[0], parts[1]
    if target not in {"v", "g", "reflect", "theta"}:
        raise ScenarioParseError(f"unknown painter target {target!r}", lineno, col, path)
    if shape not in _SHAPES:
        raise ScenarioParseError(f"unknown painter shape {shape!r}", lineno,
                                 col + text.index(shape), path)
    args = {}
    for p in parts[2:]:
        if "=" not in p:
            raise ScenarioParseError(f"expected key=value, got {p!r}", lineno, col + text.index(p), path)
        k, v = p.split("=", 1)
        args[k] = v
    return Painter(target, shape, args, lineno)


def _num(sec, key, default=None, cast=float):
    if key not in sec:
        if default is None:
            raise KeyError(key)
        return default
    return cast(evaluate(sec[key][0]))


def _build(sections, painters, name, path, text) -> Scenario:
    def need(sec_name: str) -> dict:
        if sec_name not in sections:
            raise ScenarioParseError(f"missing section [{sec_name}]", 1, 1, path)
        return sections[sec_name]

    def value_error(sec, key, exc):
        _, ln, c = sec[key]
        return ScenarioParseError(str(exc), ln, c, path)

    g = need("grid")
    if "sizes" not in g:
        raise ScenarioParseError("[grid] needs 'sizes'", 1, 1, path)
    try:
        sizes = [evaluate(s) for s in g["sizes"][0].replace(",", " ").split()]
    except ValueError as exc:
        raise value_error(g, "sizes", exc)
    if any(s != int(s) for s in sizes):
        raise GridSizeError(f"grid sizes must be integers, got {sizes}")
    try:
        grid = Grid(tuple(int(s) for s in sizes))
    except LatticeError as exc:
        raise GridSizeError(str(exc)) from exc

    ph = need("physics")
    try:
        theta = _num(ph, "theta")
        PhysicalParams(theta)
    except KeyError:
        raise ScenarioParseError("[physics] needs 'theta'", 1, 1, path)
    except ValueError as exc:
        raise value_error(ph, "theta", exc)

    wave = {k: v[0] for k, v in need("wave").items()}
    run = sections.get("run", {})
    try:
        cycles = _num(run, "cycles", 0, int)
        snapshot_every = _num(run, "snapshot_every", 0, int)
        trace_every = _num(run, "trace_every", 1, int)
    except ValueError as exc:
        raise ScenarioParseError(str(exc), 1, 1, path)
    if cycles < 0 or snapshot_every < 0 or trace_every < 1:
        raise ScenarioError("[run] cycles and snapshot_every must be >= 0, trace_every >= 1")

    schedule = None
    if "schedule" in sections:
        s = sections["schedule"]
        try:
            schedule = Schedule(t_s=_num(s, "t_s", 0, int), alpha=_num(s, "alpha", 0.0),
                                s_max=_num(s, "s_max", 1.0), cadence=_num(s, "cadence", 10, int))
        except ValueError as exc:
            raise ScenarioError(f"[schedule]: {exc}") from exc

    analysis = {}
    for sec_name, sec in sections.items():
        if sec_name.startswith("analysis."):
            analysis[sec_name.split(".", 1)[1]] = {k: v[0] for k, v in sec.items()}
        elif sec_name == "analysis":
            raise ScenarioParseError("use [analysis.<report>] sections", 1, 1, path)

    sc = Scenario(name=name, grid=grid, theta=theta, painters=painters, wave=wave,
                  cycles=cycles, snapshot_every=snapshot_every, trace_every=trace_every,
                  schedule=schedule, analysis=analysis, source=text)
    sc.resolve_fields()  # surfaces region errors at load time
    build_wave(grid, wave)
    return sc


def load_scenario(path) -> Scenario:
    p = Path(path)
    if not p.exists():
        candidate = shipped_path(str(path))
        if candidate is None:
            raise FileNotFoundError(f"no scenario {path!r}")
        p = candidate
    return parse_text(p.read_text(encoding="utf-8"), name=p.stem, path=str(p))


def shipped_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "scenarios"


def shipped_path(name: str) -> Path | None:
    p = shipped_dir() / (name if name.endswith(".sca") else name + ".sca")
    return p if p.exists() else None


def shipped_names() -> list[str]:
    return sorted(p.stem for p in shipped_dir().glob("*.sca"))


# --- painters ---------------------------------------------------------------

def _ints(text: str) -> list[int]:
    vals = evaluate_vector(text)
    if any(v != int(v) for v in vals):
        raise ScenarioError(f"expected integer coordinates, got {text!r}")
    return [int(v) for v in vals]


def _check_point(grid: Grid, pt, what: str, line: int) -> None:
    if len(pt) != grid.ndim:
        raise RegionError(f"line {line}: {what} needs {grid.ndim} coordinates")
    for c, n in zip(pt, grid.shape):
        if not 0 <= c < n:
            raise RegionError(f"line {line}: {what} {tuple(pt)} lies outside the grid {grid.shape}")


def _region(grid: Grid, p: Painter) -> np.ndarray:
    """Boolean mask selected by a painter shape."""
    a = p.args
    mask = np.zeros(grid.shape, dtype=bool)
    if p.shape == "fill":
        mask[...] = True
    elif p.shape == "rect":
        lo, hi = _ints(a["lo"]), _ints(a["hi"])
        if len(lo) != grid.ndim or len(hi) != grid.ndim:
            raise RegionError(f"line {p.line}: rect needs {grid.ndim} coordinates")
        for l, h, n in zip(lo, hi, grid.shape):
            if not (0 <= l < h <= n):
                raise RegionError(f"line {p.line}: rect {lo}..{hi} lies outside the grid {grid.shape}")
        mask[tuple(slice(l, h) for l, h in zip(lo, hi))] = True
    elif p.shape in ("cell", "cells"):
        for chunk in a["at"].split(";"):
            pt = _ints(chunk)
            _check_point(grid, pt, "cell", p.line)
            mask[tuple(pt)] = True
    elif p.shape == "line45":
        if grid.ndim != 2:
            raise RegionError(f"line {p.line}: line45 needs a 2D grid")
        c = _ints(a["center"])
        _check_point(grid, c, "line center", p.line)
        half = int(evaluate(a["half"]))
        slope = int(evaluate(a.get("slope", "1")))
        if slope not in (1, -1):
            raise ScenarioError(f"line {p.line}: slope must be +1 or -1")
        i = np.arange(-half, half + 1)
        xs, ys = c[0] + i, c[1] + slope * i
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= grid.shape[0] or ys.max() >= grid.shape[1]:
            raise RegionError(f"line {p.line}: 45-degree line leaves the grid {grid.shape}")
        mask[xs, ys] = True
    elif p.shape == "lattice":
        lo, hi = _ints(a["lo"]), _ints(a["hi"])
        step = _ints(a["spacing"])
        if len(step) == 1:
            step = step * grid.ndim
        for l, h, n in zip(lo, hi, grid.shape):
            if not (0 <= l < h <= n):
                raise RegionError(f"line {p.line}: lattice {lo}..{hi} lies outside the grid {grid.shape}")
        mask[tuple(slice(l, h, s) for l, h, s in zip(lo, hi, step))] = True
    else:
        raise ScenarioError(f"line {p.line}: shape {p.shape!r} does not select a region")
    return mask


def _solenoid(grid: Grid, p: Painter) -> np.ndarray:
    if grid.ndim < 2:
        raise ScenarioError(f"line {p.line}: a solenoid needs at least two axes")
    c = evaluate_vector(p.args["center"])
    K = evaluate(p.args["K"])
    r_ex = evaluate(p.args.get("exclude", "1.5"))
    if len(c) != 2 or not all(0 <= v < n for v, n in zip(c, grid.shape)):
        raise RegionError(f"line {p.line}: solenoid center {c} lies outside the grid")
    coords = grid.coords()
    dx = coords[0] - c[0]
    dy = coords[1] - c[1]
    r2 = dx ** 2 + dy ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = np.where(r2 < r_ex ** 2, 0.0, -K * dy / r2)
        gy = np.where(r2 < r_ex ** 2, 0.0, K * dx / r2)
    g = np.zeros(grid.shape + (grid.ndim,))
    g[..., 0] = np.broadcast_to(gx, grid.shape)
    g[..., 1] = np.broadcast_to(gy, grid.shape)
    return g


def _harmonic(grid: Grid, theta: float, p: Painter) -> np.ndarray:
    from ..analysis.tuning import harmonic_potential
    return harmonic_potential(grid, theta, evaluate(p.args["kappa"]), evaluate(p.args["center"]))


_SHAPES = {"fill", "rect", "cell", "cells", "line45", "lattice", "solenoid", "harmonic"}


def paint(grid: Grid, theta: float, painters: list[Painter]) -> tuple[FieldConfig, np.ndarray | None]:
    fields = FieldConfig.free(grid)
    theta_map = None
    for p in painters:
        try:
            if p.shape == "solenoid":
                if p.target != "g":
                    raise ScenarioError(f"line {p.line}: solenoid paints g only")
                fields.g[...] = _solenoid(grid, p) if p.args.get("mode", "set") == "set" \
                    else fields.g + _solenoid(grid, p)
                continue
            if p.shape == "harmonic":
                if p.target != "v":
                    raise ScenarioError(f"line {p.line}: harmonic paints v only")
                fields.v[...] = _harmonic(grid, theta, p)
                continue
            mask = _region(grid, p)
            if p.target == "reflect":
                fields.reflect[mask] = bool(evaluate(p.args.get("value", "1")))
            elif p.target == "v":
                fields.v[mask] = evaluate(p.args["value"])
            elif p.target == "theta":
                if theta_map is None:
                    theta_map = np.full(grid.shape, theta)
                val = evaluate(p.args["value"])
                PhysicalParams(val)
                theta_map[mask] = val
            elif p.target == "g":
                vec = evaluate_vector(p.args["value"])
                if len(vec) != grid.ndim:
                    raise ScenarioError(f"line {p.line}: g needs {grid.ndim} components")
                fields.g[mask] = vec
        except KeyError as exc:
            raise ScenarioError(f"line {p.line}: painter {p.shape!r} is missing {exc.args[0]!r}") from None
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"line {p.line}: {exc}") from exc
    return fields, theta_map


# --- waves --------------------------------------------------------------------

def build_wave(grid: Grid, wave: dict[str, str]):
    kind = wave.get("kind")
    try:
        vec = {k: evaluate_vector(v) for k, v in wave.items() if k != "kind"}
    except ValueError as exc:
        raise ScenarioError(f"[wave]: {exc}") from exc

    def get(key, default=None):
        if key not in vec:
            if default is None:
                raise ScenarioError(f"[wave] kind={kind} needs {key!r}")
            return default
        v = vec[key]
        return v[0] if len(v) == 1 else v

    if kind == "plane":
        return plane_wave(grid, get("k"), get("x0", 0.0))
    if kind == "packet":
        return gaussian_packet(grid, get("k"), get("x0"), get("sigma"))
    if kind == "box":
        return box_state(grid, get("x_c"), get("L"), get("n"))
    if kind == "harmonic":
        return harmonic_state(grid, get("x_c"), get("rho"), get("n"))
    raise ScenarioError(f"[wave] unknown kind {kind!r}")


def override(text: str, key: str, value: str) -> str:
    """Replace (or add) ``key`` in a section, e.g. ``wave.k`` -> ``k = value`` under [wave]."""
    if "." not in key:
        raise ScenarioError(f"parameter {key!r} must be written as section.key")
    section, name = key.rsplit(".", 1)
    out, cur, done = [], None, False
    lines = text.splitlines()
    for i, raw in enumerate(lines):
        m = _SECTION.match(_strip_comment(raw).strip())
        if m:
            if cur == section and not done:
                out.append(f"{name} = {value}")
                done = True
            cur = m.group(1)
        elif cur == section and not done:
            kv = _KV.match(_strip_comment(raw).strip())
            if kv and kv.group(1) == name:
                out.append(f"{name} = {value}")
                done = True
                continue
        out.append(raw)
    if not done:
        if cur != section:
            out.append(f"[{section}]")
        out.append(f"{name} = {value}")
    return "\n".join(out) + "\n"
