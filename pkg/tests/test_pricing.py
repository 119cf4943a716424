import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgarcs import _labeling_py, pricing
from cgarcs.instance import generate_solomon_like
from cgarcs.network import CUSTOMER, LOAD, SINK, SOURCE, TIME, ArcData, Network, NodeData, build_network
from cgarcs.pricing import Label, PricingLimits, dominates, extend, price_arcs, solve_pricing, source_label
from oracles import best_reduced_cost, pricing_case


def path_network(costs=(-5.0, 2.0), window=(0.0, 100.0), q=10.0):
    nodes = [
        NodeData(0, SOURCE, (0.0, 0.0), (100.0, q)),
        NodeData(1, CUSTOMER, (window[0], 0.0), (window[1], q), demand=1.0),
        NodeData(2, SINK, (0.0, 0.0), (100.0, q)),
    ]
    arcs = [
        ArcData(0, 0, 1, costs[0], (1.0, 1.0), 0),
        ArcData(1, 1, 2, costs[1], (1.0, 0.0), None),
    ]
    return Network(nodes, arcs)


def test_single_path_column():
    net = path_network()
    res = solve_pricing(net, np.array([-5.0, 2.0]))
    assert len(res.columns) == 1
    col = res.columns[0]
    assert col.route == (0, 1, 2)
    assert col.rcost_at_birth == -3.0


def test_nonnegative_costs_give_no_columns():
    net = build_network(generate_solomon_like(15, "R2", 0))
    assert solve_pricing(net, np.abs(net.arc_cost)).columns == []


def test_price_arcs_formula():
    net = path_network(costs=(10.0, 3.0))
    assert list(price_arcs(net, np.array([4.0]))) == [6.0, 3.0]
    assert list(price_arcs(net, np.zeros(1))) == [10.0, 3.0]
    with pytest.raises(ValueError):
        price_arcs(net, np.zeros(2))


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_price_arcs_matches_per_arc_recomputation(seed):
    inst, duals = pricing_case(seed)
    net = build_network(inst)
    priced = price_arcs(net, duals)
    for a in net.arcs:
        expect = a.cost - (duals[a.head - 1] if a.covered_constraint is not None else 0.0)
        assert priced[a.id] == expect


def test_extend_clamps_to_window_start():
    net = path_network(window=(20.0, 40.0))
    lab = Label(0, 0.0, (10.0, 0.0))
    arc = ArcData(0, 0, 1, 0.0, (5.0, 1.0), 0)
    out = extend(net, lab, arc, 0.0)
    assert out.res == (20.0, 1.0)
    assert out.pred_node == 0 and out.pred_label is lab


def test_extend_load_violation():
    net = path_network(q=10.0)
    assert extend(net, Label(0, 0.0, (0.0, 8.0)), ArcData(0, 0, 1, 0.0, (1.0, 3.0), 0), 0.0) is None


def test_extend_rejects_wrong_tail():
    net = path_network()
    with pytest.raises(ValueError):
        extend(net, Label(1, 0.0, (0.0, 0.0)), net.arcs[0], 0.0)


def test_extension_chain_sums_modified_costs():
    net = build_network(generate_solomon_like(6, "C2", 2))
    priced = price_arcs(net, np.full(net.n_rows, 7.5))
    route = None
    for a in net.arcs:
        if a.tail == 0:
            for b in (net.arcs[k] for k in net.out_adj[a.head]):
                if b.head != net.sink and net.arc_id(b.head, net.sink) is not None:
                    route = (a.id, b.id, net.arc_id(b.head, net.sink))
                    break
        if route:
            break
    lab = source_label(net)
    for k in route:
        lab = extend(net, lab, net.arcs[k], priced[k])
        assert lab is not None
    assert lab.rcost == priced[route[0]] + priced[route[1]] + priced[route[2]]


def test_dominates_cases():
    a = Label(3, 1.0, (5.0, 2.0))
    assert dominates(a, a)
    assert not dominates(Label(3, 5.0, (1.0, 1.0)), Label(3, 3.0, (1.0, 1.0)))
    assert not dominates(Label(2, 0.0, (0.0, 0.0)), Label(3, 9.0, (9.0, 9.0)))


labels = st.builds(
    Label,
    st.just(4),
    st.integers(-5, 5).map(float),
    st.tuples(st.integers(0, 5).map(float), st.integers(0, 5).map(float)),
)


@given(labels, labels, labels)
def test_dominates_is_componentwise_preorder(a, b, c):
    assert dominates(a, b) == (a.rcost <= b.rcost and a.res[TIME] <= b.res[TIME] and a.res[LOAD] <= b.res[LOAD])
    assert dominates(a, a)
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


def check_columns(net, priced, cols):
    for col in cols:
        assert col.route[0] == net.source and col.route[-1] == net.sink
        for k in range(2, len(col.route)):
            assert col.route[k] != col.route[k - 2]
        lab = source_label(net)
        prev_time = lab.res[TIME]
        for u, v in zip(col.route[:-1], col.route[1:]):
            k = net.arc_id(u, v)
            assert k is not None
            lab = extend(net, lab, net.arcs[k], priced[k])
            assert lab is not None
            assert lab.res[TIME] >= prev_time
            prev_time = lab.res[TIME]
        assert abs(lab.rcost - col.rcost_at_birth) <= 1e-9
        assert col.rcost_at_birth < -pricing.NEG_EPS


@pytest.mark.parametrize("seed", range(60))
def test_best_rcost_matches_enumeration(seed):
    inst, duals = pricing_case(seed)
    net = build_network(inst)
    priced = price_arcs(net, duals)
    res = solve_pricing(net, priced)
    best = best_reduced_cost(inst, duals)
    if best < -pricing.NEG_EPS:
        assert res.columns[0].rcost_at_birth == best
    else:
        assert res.columns == []
    check_columns(net, priced, res.columns)
    costs = [c.rcost_at_birth for c in res.columns]
    assert costs == sorted(costs)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_dominance_is_sound(seed):
    inst, duals = pricing_case(seed, max_customers=6)
    net = build_network(inst)
    priced = price_arcs(net, duals)
    with_dom = solve_pricing(net, priced)
    without = solve_pricing(net, priced, PricingLimits(max_columns=10**6, dominance=False))
    best = lambda r: r.columns[0].rcost_at_birth if r.columns else None
    assert best(with_dom) == best(without)
    assert without.labels_created >= with_dom.labels_created
    assert without.labels_dominated == 0


def test_max_columns_keeps_most_negative():
    net = build_network(generate_solomon_like(25, "RC2", 1))
    priced = price_arcs(net, np.full(net.n_rows, 60.0))
    full = solve_pricing(net, priced, PricingLimits(max_columns=10**6))
    few = solve_pricing(net, priced, PricingLimits(max_columns=5))
    assert full.n_negative > 5 and few.n_negative == full.n_negative
    assert [c.route for c in few.columns] == [c.route for c in full.columns[:5]]
    with pytest.raises(ValueError):
        solve_pricing(net, priced, PricingLimits(max_columns=0))


def kernel_args(net, priced):
    return (
        net.out_ptr, net.out_arcs, net.arc_head, priced, net.arc_time, net.arc_load,
        np.ascontiguousarray(net.win_lo[:, TIME]), np.ascontiguousarray(net.win_hi[:, TIME]),
        np.ascontiguousarray(net.win_lo[:, LOAD]), np.ascontiguousarray(net.win_hi[:, LOAD]),
        net.source, net.sink, 1e-6,
    )


@pytest.mark.skipif(pricing.BACKEND != "cython", reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(15))
def test_backends_agree(seed):
    from cgarcs import _labeling

    fam = ("R2", "C2", "RC2")[seed % 3]
    net = build_network(generate_solomon_like(20, fam, seed))
    duals = np.random.default_rng(seed).uniform(0.0, 60.0, net.n_rows)
    args = kernel_args(net, price_arcs(net, duals))
    assert _labeling.label_setting(*args, True) == _labeling_py.label_setting(*args, True)
    # without dominance on a small network
    net = build_network(generate_solomon_like(7, fam, seed))
    args = kernel_args(net, price_arcs(net, duals[: net.n_rows]))
    assert _labeling.label_setting(*args, False) == _labeling_py.label_setting(*args, False)


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("CGARCS_PURE_PYTHON", "1")
    mod = importlib.reload(pricing)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("CGARCS_PURE_PYTHON")
        importlib.reload(pricing)
