import json
import pathlib

import pytest

import shelfwise

DATA = pathlib.Path(__file__).resolve().parent.parent / "data" / "demo.csv"


@pytest.fixture(scope="module")
def log():
    parsed, skipped = shelfwise.parse_log(str(DATA))
    assert skipped == 0
    return parsed


def test_products(log):
    products = shelfwise.list_products(log)
    assert [p[0] for p in products] == ["apple", "pear", "quince"]
    assert sum(p[1] for p in products) == len(log)


def test_discover_enhance_solve(log):
    sub = shelfwise.extract_sublog(log, "apple")
    assert shelfwise.quantity_classes(sub) == {1, 2, 3}
    chain, report = shelfwise.discover_ctmc(sub, capacity=100)
    assert len(json.loads(report)["classes"]) == 3
    assert not shelfwise.is_irreducible(chain)

    enhanced = shelfwise.enhance_with_supply(chain, 10, 0.3)
    assert shelfwise.validate(enhanced) == []
    assert shelfwise.is_irreducible(enhanced)
    assert enhanced.rate(0, 10) == pytest.approx(0.3)

    pi, residual = shelfwise.steady_state(enhanced)
    assert len(pi) == 101
    assert sum(pi) == pytest.approx(1.0, abs=1e-10)
    assert residual <= 1e-8
    expected = sum(i * p for i, p in enumerate(pi))
    assert shelfwise.expected_quantity(pi) == pytest.approx(expected, rel=1e-12)
    assert shelfwise.undersupply_probability(pi, 3) == pytest.approx(sum(pi[:3]), rel=1e-12)


def test_chain_json_round_trip(log):
    chain, _ = shelfwise.discover_ctmc(shelfwise.extract_sublog(log, "pear"))
    assert shelfwise.Ctmc.from_json(chain.to_json()) == chain


def test_sweep_matches_analyze(log):
    sweep = json.loads(shelfwise.what_if_sweep(shelfwise.extract_sublog(log, "apple"), [0.2, 0.3]))
    single = json.loads(shelfwise.analyze(log, json.dumps({"product": "apple", "rate": 0.3})))
    assert sweep[1] == single
    assert sweep[0]["undersupplyProbability"] > sweep[1]["undersupplyProbability"]


def test_simulation_is_seeded(log):
    chain, _ = shelfwise.discover_ctmc(shelfwise.extract_sublog(log, "apple"))
    enhanced = shelfwise.enhance_with_supply(chain, 10, 0.3)
    a = shelfwise.sample_trajectory(enhanced, 100.0, 5)
    assert a == shelfwise.sample_trajectory(enhanced, 100.0, 5)
    occ = shelfwise.empirical_occupancy(enhanced, 1000.0, 5)
    assert sum(occ) == pytest.approx(1.0)


def test_errors_are_raised(log):
    with pytest.raises(shelfwise.ShelfwiseError, match="UnknownObject"):
        shelfwise.extract_sublog(log, "durian")
    with pytest.raises(shelfwise.ShelfwiseError, match="NotIrreducible"):
        shelfwise.analyze(log, json.dumps({"product": "quince", "rate": 0.3, "batch": 4}))
