"""End-to-end smoke checks for the python bindings.

Exercises the full pipeline on the shipped 3-bus fixture: load a network,
solve a step, build profiles, sample a pool, label it, and run an
active-learning episode.
"""

from pathlib import Path

import pytest

import hostcap

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="module")
def net():
    return hostcap.load_network(str(FIXTURES / "threebus.json"))


@pytest.fixture(scope="module")
def profiles():
    ev = hostcap.load_profiles(str(FIXTURES / "threebus_ev.csv"), "EV")
    pv = hostcap.synth_profiles("PV", n_types=1, T=1)
    return ev, pv


@pytest.fixture(scope="module")
def pool(net):
    return hostcap.generate_pool(
        str(FIXTURES / "experiments" / "threebus_box_small.json"), net
    )


def test_network_surface(net):
    assert net.bus_count == 3
    assert net.line_count == 2
    assert net.root_bus == net.bus_ids[0]
    assert net.base_kva > 0
    assert "Network" in repr(net)


def test_solve_flat_and_loaded(net):
    zero = [0.0] * net.bus_count
    sol = hostcap.solve(net, zero, zero)
    assert sol["converged"]
    assert sol["residual"] == 0.0
    assert all(v == sol["v"][0] for v in sol["v"])
    assert all(f == 0.0 for f in sol["p_flow"])

    load = [0.0, 0.0, -50.0]  # 50 kW draw at the leaf
    sol = hostcap.solve(net, load, zero)
    assert sol["converged"]
    assert sol["v"][2] < sol["v"][0]
    assert sol["l"][0] > 0.0

    lin = hostcap.solve(net, load, zero, linear=True)
    assert lin["converged"]
    assert all(l == 0.0 for l in lin["l"])


def test_profiles(profiles):
    ev, pv = profiles
    assert ev.kind == "EV"
    assert ev.type_count == 1 and ev.T == 1
    assert ev.shapes[0][0] == -1.0

    day_ev = hostcap.synth_profiles("EV", n_types=4, T=24, ev_window_hours=2.0)
    assert day_ev.type_count == 4
    assert all(v <= 0.0 for row in day_ev.shapes for v in row)

    day_pv = hostcap.synth_profiles("PV", n_types=2, T=24)
    assert all(v >= 0.0 for row in day_pv.shapes for v in row)
    assert max(day_pv.shapes[0]) == pytest.approx(1.0)

    with pytest.raises(ValueError):
        hostcap.synth_profiles("WIND", n_types=1, T=24)


def test_pool_generation(net, pool):
    assert len(pool) == 300
    assert len({s.id for s in pool}) == 300
    feats = hostcap.scenario_features(pool[5], net)
    assert len(feats) == 2 * net.bus_count

    reseeded = hostcap.generate_pool(
        str(FIXTURES / "experiments" / "threebus_box_small.json"), net, seed=123
    )
    assert [s.total_ev_count for s in reseeded] != [s.total_ev_count for s in pool]


def test_evaluation_and_capacity(net, pool, profiles):
    ev, pv = profiles
    verdicts = hostcap.evaluate_pool(net, pool, ev, pv, workers=2)
    assert len(verdicts) == len(pool)
    labels = [v["label"] for v in verdicts]
    assert set(labels) == {0, 1}
    assert all(0.0 <= v["pass_fraction"] <= 1.0 for v in verdicts)
    infeasible = next(v for v in verdicts if v["label"] == 0)
    assert infeasible["worst_violations"]

    hc = hostcap.hosting_capacity(pool, labels)
    assert hc["max_combined"] > 0.0
    assert hc["argmax_combined_id"] in {s.id for s in pool}
    assert hc["frontier_ids"]

    with pytest.raises(ValueError):
        hostcap.evaluate_pool(net, pool, ev, pv, eps_bar=1.5)


def test_episode(net, pool, profiles):
    ev, pv = profiles
    ep = hostcap.run_episode(
        net, pool, ev, pv, strategy="entropy", B=8, K=5, seed=7, workers=2
    )
    assert ep["labels_requested"] == 40
    assert len(ep["rounds"]) == 5
    assert len(ep["labeled"]) == 40
    assert len({e["scenario_id"] for e in ep["labeled"]}) == 40
    assert ep["hosting_capacity"] is not None
    assert ep["rounds"][-1]["hc_combined"] <= ep["hosting_capacity"]["max_combined"] + 1e-9

    probe = hostcap.scenario_features(pool[0], net)
    p = ep["model"].predict_proba(probe)
    assert 0.0 < p < 1.0

    again = hostcap.run_episode(
        net, pool, ev, pv, strategy="entropy", B=8, K=5, seed=7, workers=1
    )
    assert [r["queried_ids"] for r in again["rounds"]] == [
        r["queried_ids"] for r in ep["rounds"]
    ]


def test_classifier_training():
    X = [[float(i), 0.0] for i in range(20)]
    y = [1 if i < 10 else 0 for i in range(20)]
    clf = hostcap.train_classifier(X, y, epochs=300, seed=1)
    assert clf.D == 2
    probs = clf.predict_many(X)
    assert probs[0] > 0.5 > probs[-1]
