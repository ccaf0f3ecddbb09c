import json
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcut.errors import ParseError, ValidationError
from gridcut.grid import (
    ANGLE,
    FLOW,
    BUNDLED_CASES,
    GridTopology,
    Line,
    Measurement,
    MeasurementSet,
    Scenario,
    Source,
    build_measurement_matrix,
    bundled_case_path,
    expand_pmu,
    load_case,
    load_scenario,
    parse_matpower,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

from .conftest import make_ms
from .strategies import scenarios


def test_native_json_topology(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps({"buses": 3, "lines": [[1, 2, 1.0], [2, 3, 1.0]]}))
    topo = load_case(path)
    assert topo.n_buses == 3
    assert len(topo.lines) == 2


def _count_block_rows(text, name):
    # independent of the parser: count data rows between "mpc.<name> = [" and "];"
    body = text.split(f"mpc.{name} = [", 1)[1].split("];", 1)[0]
    return sum(1 for ln in body.splitlines() if ln.strip() and not ln.strip().startswith("%"))


@pytest.mark.parametrize("name", BUNDLED_CASES)
def test_bundled_case_counts_match_file(name):
    text = bundled_case_path(name).read_text()
    topo = load_case(name)
    assert topo.n_buses == _count_block_rows(text, "bus")
    assert len(topo.lines) == _count_block_rows(text, "branch")


def test_case14_known_size():
    topo = load_case("case14")
    assert (topo.n_buses, len(topo.lines)) == (14, 20)
    # first branch of the IEEE 14-bus case: 1-2 with x = 0.05917
    assert topo.lines[0].endpoints == (1, 2)
    assert topo.lines[0].susceptance == pytest.approx(1 / 0.05917)


def test_dangling_line_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"buses": 3, "lines": [[1, 5, 1.0]]}))
    with pytest.raises(ValidationError):
        load_case(path)


@pytest.mark.parametrize("b", [0.0, -1.0, float("nan")])
def test_non_positive_susceptance_rejected(b):
    with pytest.raises(ValidationError):
        GridTopology(2, (Line(1, 2, b),))


def test_self_loop_rejected():
    with pytest.raises(ValidationError):
        GridTopology(2, (Line(2, 2, 1.0),))


MATPOWER_GAPS = """function mpc = gaps
mpc.baseMVA = 100;
mpc.bus = [
  10 3 0 0;
  20 1 0 0;   % comment
  30 1 0 0
];
mpc.branch = [
  10 20 0.01 0.5 0;
  20 30 0.01 -0.25 0;
  10 30 0.01 0.1 0;
];
"""


def test_matpower_renumbers_gapped_ids():
    topo = parse_matpower(MATPOWER_GAPS)
    assert topo.n_buses == 3
    assert topo.source_ids == (10, 20, 30)
    assert [ln.endpoints for ln in topo.lines] == [(1, 2), (2, 3), (1, 3)]
    assert [ln.susceptance for ln in topo.lines] == pytest.approx([2.0, 4.0, 10.0])


def test_matpower_parse_error_has_line_number():
    text = MATPOWER_GAPS.replace("20 30 0.01 -0.25 0;", "20 30 0.01 oops 0;")
    with pytest.raises(ParseError) as info:
        parse_matpower(text)
    assert info.value.lineno == 10


def test_matpower_missing_branch_block():
    with pytest.raises(ParseError):
        parse_matpower("mpc.bus = [1 3 0 0];")


def test_matpower_dangling_branch():
    text = MATPOWER_GAPS.replace("10 30 0.01 0.1 0;", "10 40 0.01 0.1 0;")
    with pytest.raises(ValidationError):
        parse_matpower(text)


def test_flow_row():
    topo = GridTopology(3, (Line(1, 2, 5.0),))
    H = build_measurement_matrix(topo, make_ms(topo, flows=[(1, 2)])).H
    np.testing.assert_array_equal(H, [[5.0, -5.0, 0.0]])


def test_flow_row_orientation_is_canonical():
    topo = GridTopology(3, (Line(3, 1, 2.0),))
    H = build_measurement_matrix(topo, make_ms(topo, flows=[(1, 3)])).H
    np.testing.assert_array_equal(H, [[2.0, 0.0, -2.0]])


def test_angle_row():
    topo = GridTopology(3, ())
    H = build_measurement_matrix(topo, make_ms(topo, angles=[2])).H
    np.testing.assert_array_equal(H, [[0.0, 1.0, 0.0]])


def test_chain_matrix(chain, chain_ms):
    mm = build_measurement_matrix(chain, chain_ms)
    np.testing.assert_array_equal(mm.H, [[1, -1, 0], [0, 1, -1], [1, 0, 0]])
    assert mm.row_map == {0: 0, 1: 1, 2: 2}
    assert mm.shape == (3, 3)


@settings(max_examples=60, deadline=None)
@given(scenarios(max_buses=6, protections=False), st.randoms(use_true_random=False))
def test_matrix_pattern_independent_of_susceptance(sc, rnd):
    topo, ms = sc
    H1 = build_measurement_matrix(topo, ms).H
    scaled = topo.with_susceptances([rnd.uniform(0.01, 100) for _ in topo.lines])
    H2 = build_measurement_matrix(scaled, ms).H
    np.testing.assert_array_equal(H1 != 0, H2 != 0)
    np.testing.assert_array_equal(np.sign(H1), np.sign(H2))
    assert all((row != 0).sum() in (1, 2) for row in H1)


def test_secure_pmu_expansion(chain, chain_ms):
    out = expand_pmu(chain_ms, 2, True, chain)
    new = out.measurements[len(chain_ms):]
    assert [(m.kind, m.target) for m in new] == [(ANGLE, 2), (FLOW, 0), (FLOW, 1)]
    assert all(m.protected and m.source == Source("pmu", 2, True) for m in new)
    assert out.protected_states == {2}
    assert out.measurements[: len(chain_ms)] == chain_ms.measurements


def test_insecure_pmu_at_leaf(chain, chain_ms):
    out = expand_pmu(chain_ms, 3, False, chain)
    new = out.measurements[len(chain_ms):]
    assert len(new) == 2
    assert not any(m.protected for m in new)
    assert out.protected_states == frozenset()


@pytest.mark.parametrize("bus", [1, 2, 3])
def test_pmu_adds_one_plus_degree(chain, chain_ms, bus):
    out = expand_pmu(chain_ms, bus, True, chain)
    assert len(out) - len(chain_ms) == 1 + chain.degree(bus)
    assert len(out.protected_ids) - len(chain_ms.protected_ids) == 1 + chain.degree(bus)


def test_pmu_at_missing_bus(chain, chain_ms):
    with pytest.raises(ValidationError):
        expand_pmu(chain_ms, 4, True, chain)


def test_secure_pmu_measurement_must_be_protected():
    with pytest.raises(ValidationError):
        Measurement(0, ANGLE, 1, protected=False, source=Source("pmu", 1, True))


def test_measurement_ids_must_be_contiguous():
    with pytest.raises(ValidationError):
        MeasurementSet((Measurement(1, ANGLE, 1),))


def test_measurement_target_validated(chain):
    ms = MeasurementSet((Measurement(0, FLOW, 7),))
    with pytest.raises(ValidationError):
        build_measurement_matrix(chain, ms)


def test_scenario_json_roundtrip_with_parallel_lines(tmp_path):
    topo = GridTopology(2, (Line(1, 2, 1.0), Line(2, 1, 3.0)))
    ms = MeasurementSet().append(FLOW, 0).append(FLOW, 1).append(ANGLE, 2, protected=True)
    ms = expand_pmu(MeasurementSet(ms.measurements, {2}), 1, False, topo)
    sc = Scenario(topo, ms, seed=7)
    path = tmp_path / "sc.json"
    save_scenario(sc, path)
    doc = json.loads(path.read_text())
    assert doc["measurements"][0]["target"] == [1, 2]
    assert doc["measurements"][1]["target"] == 1
    assert load_scenario(path) == sc


@settings(max_examples=60, deadline=None)
@given(scenarios(max_buses=6))
def test_scenario_roundtrip_property(sc):
    topo, ms = sc
    back = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(Scenario(topo, ms)))))
    assert back.measurements == ms
    assert back.topology == topo


def test_scenario_json_schema_keys(chain, chain_ms):
    doc = scenario_to_dict(Scenario(chain, chain_ms))
    assert set(doc) == {"buses", "lines", "measurements", "protected_states"}
    assert doc["measurements"][2] == {"kind": "angle", "target": 1, "protected": False, "source": {"type": "scada"}}


def test_malformed_scenario_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"buses": 3,\n "lines": [}')
    with pytest.raises(ParseError) as info:
        load_scenario(path)
    assert info.value.lineno == 2


def test_unknown_bundled_case():
    with pytest.raises(ValueError):
        bundled_case_path("case9999")
    assert re.search(r"case14\.m$", str(bundled_case_path("case14")))
