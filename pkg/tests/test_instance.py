import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgarcs.instance import (
    InstanceFormatError,
    Manifest,
    format_instance,
    generate_random,
    generate_solomon_like,
    parse_instance,
    read_instance,
    singleton_infeasibility,
    tighten_windows,
    write_instances,
)

SAMPLE = """C101

VEHICLE
NUMBER     CAPACITY
  25         200

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME

    0      40         50          0          0       1236          0
    1      45         68         10        912        967         90
    2      45         70         30        825        870         90
"""


def test_parse_sample():
    inst = parse_instance(SAMPLE)
    assert inst.name == "C101"
    assert inst.vehicle_capacity == 200
    assert inst.vehicle_number == 25
    assert (inst.depot.x, inst.depot.y, inst.depot.window_hi) == (40, 50, 1236)
    assert inst.n_customers == 2
    c = inst.customers[1]
    assert (c.id, c.demand, c.window_lo, c.window_hi, c.service_time) == (2, 30, 825, 870, 90)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n", "vehicle data"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n1 10\n", "CUSTOMER"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n1 10\nCUSTOMER\nCUST NO.\n", "depot"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n1 ten\n", "non-numeric"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n1 10\nCUSTOMER\nCUST\n0 0 0 0 0 10\n", "7 fields"),
        ("X\nVEHICLE\nNUMBER CAPACITY\n1 10\nCUSTOMER\nCUST\n0 0 0 0 0 10 0\n1 1 1 1 9 3 0\n", "empty window"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(InstanceFormatError, match=fragment):
        parse_instance(text)


def test_parse_error_reports_line():
    bad = SAMPLE.replace("912", "9x2")
    with pytest.raises(InstanceFormatError) as exc:
        parse_instance(bad)
    assert exc.value.line == 11


@given(st.integers(0, 10_000), st.integers(1, 15))
@settings(max_examples=40, deadline=None)
def test_format_round_trip(seed, n):
    inst = generate_random(n, seed)
    assert parse_instance(format_instance(inst)) == inst


def test_solomon_like_round_trip_and_feasible(tmp_path):
    for fam in ("R2", "C2", "RC2"):
        inst = generate_solomon_like(25, fam, seed=3)
        assert singleton_infeasibility(inst) == []
        p = tmp_path / "x.txt"
        p.write_text(format_instance(inst))
        assert read_instance(p) == inst


def test_generators_are_seeded():
    assert generate_random(8, 5) == generate_random(8, 5)
    assert generate_random(8, 5) != generate_random(8, 6)
    assert generate_solomon_like(10, "C2", 1) == generate_solomon_like(10, "C2", 1)


@given(st.integers(0, 1000), st.floats(0.05, 1.0))
@settings(max_examples=50, deadline=None)
def test_tighten_keeps_center_and_scales_width(seed, f):
    inst = generate_random(6, seed)
    out = tighten_windows(inst, f)
    for a, b in zip(inst.customers, out.customers):
        assert b.window_lo + b.window_hi == pytest.approx(a.window_lo + a.window_hi)
        assert b.window_hi - b.window_lo == pytest.approx(f * (a.window_hi - a.window_lo))
    assert out.depot == inst.depot


def test_tighten_identity_and_bounds():
    inst = generate_random(4, 0)
    assert tighten_windows(inst, 1.0) is inst
    for f in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            tighten_windows(inst, f)


def test_singleton_infeasibility_names_customer():
    inst = generate_random(3, 0)
    c = inst.customers[1]
    bad = replace(inst, customers=(inst.customers[0], replace(c, demand=inst.vehicle_capacity + 1), inst.customers[2]))
    assert [cid for cid, _ in singleton_infeasibility(bad)] == [c.id]


def test_write_instances_manifest(tmp_path):
    insts = [generate_random(3, s) for s in range(2)]
    m = Manifest(generator="random:3", seed=0, tighten=None)
    paths = write_instances(insts, tmp_path, m)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert doc["files"] == [p.name for p in paths]
    assert [read_instance(p) for p in paths] == insts


def test_tighten_definition_case():
    inst = generate_random(1, 0)
    inst = replace(inst, customers=(replace(inst.customers[0], window_lo=0.0, window_hi=100.0),))
    c = tighten_windows(inst, 0.5).customers[0]
    assert (c.window_lo, c.window_hi) == (25.0, 75.0)


@given(st.integers(0, 1000), st.floats(0.1, 1.0), st.floats(0.1, 1.0))
@settings(max_examples=40, deadline=None)
def test_tighten_composes(seed, f1, f2):
    inst = generate_random(5, seed)
    a = tighten_windows(tighten_windows(inst, f2), f1)
    b = tighten_windows(inst, f1 * f2)
    for x, y in zip(a.customers, b.customers):
        assert abs(x.window_lo - y.window_lo) <= 1e-12 * max(1.0, abs(y.window_lo))
        assert abs(x.window_hi - y.window_hi) <= 1e-12 * max(1.0, abs(y.window_hi))


def test_large_file_demand_column_sum(tmp_path):
    text = format_instance(generate_solomon_like(200, "RC2", 9))
    rows = [ln.split() for ln in text.splitlines()[9:] if ln.strip()]
    column_sum = sum(float(r[3]) for r in rows[1:])
    inst = parse_instance(text)
    assert inst.n_customers == 200 == len(rows) - 1
    assert sum(c.demand for c in inst.customers) == column_sum


def test_random_instances_are_singleton_feasible():
    from cgarcs.colgen import run_baseline
    from cgarcs.network import build_network

    for seed in range(100):
        assert singleton_infeasibility(generate_random(6, seed)) == []
    sol, stats = run_baseline(build_network(generate_random(1, 0)))
    assert stats.iterations == 1
