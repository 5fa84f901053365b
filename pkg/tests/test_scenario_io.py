import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sca import Grid, WaveField
from sca.io.dump import DumpFormatError, decode, encode, read_dump, write_dump
from sca.io.ppm import BACKDROP, GRAY, decode_ppm, encode_ppm, to_image
from sca.io.scenario import (GridSizeError, RegionError, ScenarioError, ScenarioParseError,
                             evaluate, evaluate_vector, load_scenario, override, parse_text,
                             shipped_names)

BASE = """
[grid]
sizes = 16 16

[physics]
theta = pi/24

[fields]
reflect rect lo=4,0 hi=5,16
reflect rect lo=4,6 hi=5,10 value=0
v rect lo=8,8 hi=10,10 value=0.3

[wave]
kind = packet
k = pi/5, 0
x0 = 2, 7.5
sigma = 2, 3

[run]
cycles = 5
"""


def test_parse_and_paint_order():
    sc = parse_text(BASE)
    f, theta_map = sc.resolve_fields()
    assert sc.grid.shape == (16, 16) and theta_map is None
    assert f.reflect[4, 0] and not f.reflect[4, 7] and f.reflect[4, 12]
    assert f.v[9, 9] == 0.3 and f.v[10, 10] == 0.0
    assert abs(sc.theta - math.pi / 24) < 1e-16


def test_digest_is_deterministic():
    assert parse_text(BASE).fields_digest() == parse_text(BASE).fields_digest()
    assert parse_text(BASE).fields_digest() != parse_text(BASE.replace("0.3", "0.31")).fields_digest()


@pytest.mark.parametrize("bad, line", [
    ("[grid]\nsizes = 8\n[bogus]\n", 3),
    ("[grid]\nsizes = 8\n[physics]\ntheta = pi/24\nnot a key value\n", 5),
    ("[grid]\nsizes = 8\n[physics]\ntheta = pi/24\n[fields]\nq rect lo=0 hi=2\n", 6),
    ("[grid]\nsizes = 8\n[physics]\ntheta = pi/24\n[fields]\nv blob lo=0\n", 6),
    ("x = 1\n", 1),
    ("[grid]\nsizes = 8\nsizes = 10\n", 3),
])
def test_parse_errors_carry_location(bad, line):
    with pytest.raises(ScenarioParseError) as exc:
        parse_text(bad + "[wave]\nkind = plane\nk = 0\n")
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


def test_bad_theta_value_points_at_line():
    with pytest.raises(ScenarioParseError) as exc:
        parse_text(BASE.replace("theta = pi/24", "theta = 3"))
    assert exc.value.line == 6


def test_region_errors():
    with pytest.raises(RegionError):
        parse_text(BASE.replace("lo=8,8 hi=10,10", "lo=8,8 hi=10,17"))
    with pytest.raises(RegionError):
        parse_text(BASE.replace("reflect rect lo=4,0 hi=5,16", "reflect cell at=16,3"))


def test_odd_grid_is_rejected():
    with pytest.raises(GridSizeError):
        parse_text(BASE.replace("sizes = 16 16", "sizes = 16 15"))


def test_errors_are_distinct_types():
    assert not issubclass(RegionError, GridSizeError) and not issubclass(GridSizeError, RegionError)
    assert issubclass(ScenarioParseError, ScenarioError)


def test_evaluate():
    assert evaluate("pi/24") == math.pi / 24
    assert evaluate("π/2") == math.pi / 2
    assert evaluate("2**3 - sqrt(4)") == 6.0
    assert evaluate_vector("pi/5, 0") == [math.pi / 5, 0.0]
    for bad in ("__import__('os')", "a + 1", "pi.real", "[1]", ""):
        with pytest.raises(ValueError):
            evaluate(bad)


def test_override_replaces_and_adds():
    text = override(BASE, "run.cycles", "9")
    assert parse_text(text).cycles == 9
    text = override(BASE, "run.snapshot_every", "2")
    assert parse_text(text).snapshot_every == 2
    text = override(BASE, "analysis.group.every", "3")
    assert parse_text(text).analysis["group"]["every"] == "3"
    with pytest.raises(ScenarioError):
        override(BASE, "cycles", "3")


def test_theta_painter_and_solenoid():
    text = BASE.replace("v rect lo=8,8 hi=10,10 value=0.3",
                        "theta rect lo=0,0 hi=16,2 value=pi/38\ng solenoid center=7.5,7.5 K=0.5")
    f, th = parse_text(text).resolve_fields()
    assert th[3, 1] == math.pi / 38 and th[3, 2] == math.pi / 24
    x, y = 10.0 - 7.5, 3.0 - 7.5
    r2 = x * x + y * y
    assert abs(f.g[10, 3, 0] + 0.5 * y / r2) < 1e-15
    assert abs(f.g[10, 3, 1] - 0.5 * x / r2) < 1e-15
    assert np.all(f.g[7:9, 7:9] == 0.0)  # inside the exclusion radius


def test_solenoid_field_is_antisymmetric_in_k():
    a = parse_text(BASE + "").resolve_fields()[0]
    assert not a.g.any()
    pos = parse_text(BASE.replace("[wave]", "g solenoid center=7.5,7.5 K=0.2\n[wave]", 1)
                     .replace("[fields]\n", "[fields]\n", 1)).resolve_fields()[0]
    neg = parse_text(BASE.replace("[wave]", "g solenoid center=7.5,7.5 K=-0.2\n[wave]", 1)).resolve_fields()[0]
    assert np.array_equal(pos.g, -neg.g)


def test_shipped_well():
    sc = load_scenario("well_L17_n3")
    f, _ = sc.resolve_fields()
    assert sc.grid.shape == (18,)
    assert f.reflect[17] and f.reflect[0] and f.reflect.sum() == 2
    psi = sc.initial_state().psi
    x = np.arange(18)
    ref = np.where((x > 0) & (x < 17), np.sin(3 * math.pi * x / 17), 0.0)
    assert np.allclose(psi, ref / np.linalg.norm(ref))


def test_shipped_mach_zehnder():
    f, _ = load_scenario("mach_zehnder").resolve_fields()
    assert set(np.unique(f.v)) == {0.0, 0.248}
    assert f.v[120, 120] == 0.248 and f.v[121, 121] == 0.248 and f.v[121, 120] == 0.0
    assert f.reflect[240, 120] and f.reflect[241, 121] and not f.reflect[241, 120]
    assert f.reflect.sum() == 2 * 181 and f.v[240, 240] == 0.248


def test_shipped_davisson_germer():
    f, _ = load_scenario("davisson_germer_30").resolve_fields()
    xs, ys = np.nonzero(f.reflect)
    assert set(np.diff(np.unique(xs))) == {5} and set(np.diff(np.unique(ys))) == {5}


def test_every_shipped_scenario_loads():
    names = shipped_names()
    assert len(names) >= 22
    for n in names:
        sc = load_scenario(n)
        assert sc.cycles > 0
        sc.initial_state()


def test_missing_scenario():
    with pytest.raises(FileNotFoundError):
        load_scenario("no_such_scenario")


# --- dumps ---------------------------------------------------------------------------

@given(st.sampled_from([(4,), (6, 4), (4, 4, 6)]), st.integers(0, 2 ** 32 - 1))
def test_dump_round_trip_is_bit_exact(shape, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    psi.flat[0] = complex(-0.0, np.nextafter(0, 1))
    f = WaveField(Grid(shape), psi)
    g = decode(encode(f))
    assert g.grid == f.grid
    assert g.psi.tobytes() == f.psi.tobytes()


def test_dump_layout(tmp_path):
    f = WaveField(Grid((4, 6)), np.arange(24).reshape(4, 6) * (1 + 2j))
    write_dump(tmp_path / "a.scag", f)
    raw = (tmp_path / "a.scag").read_bytes()
    assert raw[:4] == b"SCAG"
    assert int.from_bytes(raw[4:8], "little") == 1 and raw[8] == 2
    assert int.from_bytes(raw[9:17], "little") == 4 and int.from_bytes(raw[17:25], "little") == 6
    body = np.frombuffer(raw[25:], dtype="<f8")
    assert body[2] == 1.0 and body[3] == 2.0  # cell (0, 1), re then im
    assert np.array_equal(read_dump(tmp_path / "a.scag").psi, f.psi)


@pytest.mark.parametrize("mangle", [lambda b: b"XXXX" + b[4:], lambda b: b[:-8],
                                    lambda b: b[:4] + (2).to_bytes(4, "little") + b[8:],
                                    lambda b: b[:6]])
def test_dump_corruption(mangle):
    raw = encode(WaveField(Grid((4,)), np.ones(4)))
    with pytest.raises(DumpFormatError):
        decode(mangle(raw))


# --- images --------------------------------------------------------------------------

def test_zero_field_renders_uniform_backdrop():
    img = to_image(np.zeros((8, 6)), "prob")
    assert img.shape == (6, 8, 3)
    assert np.all(img == np.rint(BACKDROP).astype(np.uint8))


def test_real_mode_diverges():
    psi = np.zeros((4, 4))
    psi[0, 0], psi[3, 3] = 1.0, -1.0
    img = to_image(psi, "real")
    # x runs left to right and y bottom to top
    assert tuple(img[3, 0]) == (200, 40, 40) and tuple(img[0, 3]) == (40, 70, 200)
    assert tuple(img[1, 1]) == (255, 255, 255)
    with pytest.raises(ValueError):
        to_image(psi, "phase")


def test_mach_zehnder_overlay():
    sc = load_scenario("mach_zehnder")
    f, _ = sc.resolve_fields()
    img = to_image(np.zeros(sc.grid.shape), "prob", f)
    h = img.shape[0]
    assert tuple(img[h - 1 - 120, 240]) == (0, 0, 0)  # mirror cell
    gray = np.rint(0.5 * BACKDROP + 0.5 * GRAY).astype(np.uint8)
    assert tuple(img[h - 1 - 120, 120]) == tuple(gray)  # beamsplitter cell


def test_ppm_round_trip(tmp_path):
    img = to_image(np.random.default_rng(0).standard_normal((10, 6)), "real")
    data = encode_ppm(img)
    assert data.startswith(b"P6\n10 6\n255\n")
    assert np.array_equal(decode_ppm(data), img)
