import math

import numpy as np
import pytest

import slantlab as sl
from slantlab.dsl import load_scenario
from slantlab.errors import ScenarioError

SLANT_PI6 = "slant-candidate-R5(0.5235987755982988)"


def scenario_text(**overrides):
    base = {
        "ambient": "model = lorentz-sasakian-R5",
        "immersion": f"name = {SLANT_PI6}",
        "checks": "run = slant",
        "samples": "count = 5\nseed = 3",
    }
    base.update(overrides)
    parts = []
    for section, body in base.items():
        if body is None:
            continue
        parts.append(f"[{section}]\n{body}\n")
    return "\n".join(parts)


def test_catalog_scenario_resolution():
    scn = load_scenario(scenario_text())
    assert scn.immersion.m == 3
    assert scn.ambient.dim == 5
    assert scn.checks == ("slant",)
    assert scn.sample_count == 5
    assert scn.seed == 3


def test_seed_defaults_to_42():
    scn = load_scenario(scenario_text(samples="count = 5"))
    assert scn.seed == 42


def test_dimension_mismatch_rejected():
    bad = scenario_text(
        immersion="map = u1, u2, 0, u3\ndomain = -1:1, -1:1, -1:1"
    )
    with pytest.raises(ScenarioError, match="components"):
        load_scenario(bad)


def test_inline_immersion_round_trip():
    text = scenario_text(
        immersion=(
            "map = u1, 0, u2*cos(pi/6), u2*sin(pi/6), u3\n"
            "domain = -1:1, -1:1, -1:1\n"
            "name = inline-slant"
        )
    )
    scn = load_scenario(text)
    assert scn.immersion.name == "inline-slant"
    p = scn.immersion.evaluate(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(
        p,
        [1.0, 0.0, 2.0 * math.cos(math.pi / 6), 2.0 * math.sin(math.pi / 6), 3.0],
        atol=1e-15,
    )


def test_inline_immersion_undeclared_parameter():
    text = scenario_text(immersion="map = u1, 0, u2, 0, u4\ndomain = -1:1, -1:1, -1:1")
    with pytest.raises(ScenarioError):
        load_scenario(text)


def test_unknown_key_is_hard_error():
    with pytest.raises(ScenarioError, match="unknown key"):
        load_scenario(scenario_text(samples="count = 5\nbogus = 1"))


def test_unknown_section_is_hard_error():
    with pytest.raises(ScenarioError, match="unknown section"):
        load_scenario(scenario_text() + "\n[extras]\nx = 1\n")


def test_duplicate_key_rejected():
    with pytest.raises(ScenarioError, match="duplicate"):
        load_scenario(scenario_text(samples="count = 5\ncount = 6"))


def test_unknown_check_rejected():
    with pytest.raises(ScenarioError, match="unknown checks"):
        load_scenario(scenario_text(checks="run = slant, bogus"))


def test_empty_checks_rejected():
    with pytest.raises(ScenarioError):
        load_scenario(scenario_text(checks="run = "))
    with pytest.raises(ScenarioError, match="required"):
        load_scenario(scenario_text(checks=None))


def test_checks_requiring_immersion():
    with pytest.raises(ScenarioError, match="require"):
        load_scenario(scenario_text(immersion=None, checks="run = slant"))
    # ambient-only checks are fine without an immersion
    scn = load_scenario(scenario_text(immersion=None, checks="run = structure"))
    assert scn.immersion is None


def test_checks_all_expands():
    scn = load_scenario(scenario_text(checks="run = all"))
    assert len(scn.checks) == 7


def test_grid_parsing_and_validation():
    scn = load_scenario(scenario_text(samples="grid = 0 0 0; 0.5 0.1 -0.2"))
    assert scn.grid == ((0.0, 0.0, 0.0), (0.5, 0.1, -0.2))
    with pytest.raises(ScenarioError, match="coordinates"):
        load_scenario(scenario_text(samples="grid = 0 0"))


def test_fd_overrides():
    scn = load_scenario(scenario_text(fd="step = 1e-5\nrichardson = off"))
    assert scn.fd.step == 1e-5
    assert not scn.fd.richardson
    with pytest.raises(ScenarioError):
        load_scenario(scenario_text(fd="richardson = maybe"))
    with pytest.raises(ScenarioError):
        load_scenario(scenario_text(fd="step = -1"))


def test_tolerance_overrides():
    scn = load_scenario(scenario_text(tolerances="slant = 1e-3"))
    assert scn.tolerances["slant"] == 1e-3
    with pytest.raises(ScenarioError, match="unknown key"):
        load_scenario(scenario_text(tolerances="bogus = 1e-3"))


def test_loader_deterministic():
    text = scenario_text()
    a = load_scenario(text)
    b = load_scenario(text)
    assert a.seed == b.seed
    assert a.checks == b.checks
    assert a.sample_count == b.sample_count
    pts_a = a.immersion.sample_parameters(a.sample_count, a.seed)
    pts_b = b.immersion.sample_parameters(b.sample_count, b.seed)
    for x, y in zip(pts_a, pts_b):
        np.testing.assert_array_equal(x, y)


def test_inline_ambient_structure():
    # the flat product model written out as expressions
    text = scenario_text(
        ambient=(
            "n = 1\n"
            "g = 0.25, 0, 0; 0, 0.25, 0; 0, 0, -1\n"
            "phi = 0, 1, 0; -1, 0, 0; 0, 0, 0\n"
            "xi = 0, 0, 1\n"
            "eta = 0, 0, 1"
        ),
        immersion=None,
        checks="run = structure",
    )
    scn = load_scenario(text)
    assert scn.ambient.n == 1
    records = sl.verify_structure(
        scn.ambient, sl.default_sample_points(3, 20, 1)
    )
    assert all(r.passed for r in records)


def test_inline_ambient_bad_shape():
    text = scenario_text(
        ambient=("n = 1\ng = 1, 0; 0, 1\nphi = 0, 0; 0, 0\nxi = 0, 0, 1\neta = 0, 0, 1"),
        immersion=None,
        checks="run = structure",
    )
    with pytest.raises(ScenarioError, match="matrix"):
        load_scenario(text)


def test_default_ambient_when_section_missing():
    scn = load_scenario(scenario_text(ambient=None))
    assert scn.ambient.name == "lorentz-sasakian-R5"
