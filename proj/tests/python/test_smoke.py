import pytest

import misbelief


def test_scenario_listing_and_dump():
    names = misbelief.scenario_names()
    assert "overconfidence1" in names
    s = misbelief.scenario("overconfidence1")
    assert s["name"] == "overconfidence1"
    assert [m["id"] for m in s["models"]] == ["theta", "theta_c"]
    assert misbelief.scenario_summary("example1")


def test_overconfidence1_verdict_and_equilibria():
    v = misbelief.verdict("overconfidence1")
    assert v["kind"] == "GloballyRobust"
    assert v["certainty"] == "certified"
    eq = misbelief.equilibria("overconfidence1")
    assert len(eq["pure"]) == 1
    assert eq["sce_exists"]


def test_constrained_verdicts():
    half = misbelief.verdict("overconfidence2", mode="constrained", family="half_plane")
    assert half["kind"] == "ConstrainedLocallyRobust"
    plane = misbelief.verdict("overconfidence2", mode="constrained", family="plane", assume_convergence=True)
    assert plane["kind"] == "NotConstrainedLocallyRobust"


def test_simulation_is_seeded():
    a, runs_a, warn = misbelief.simulate("overfitting", models=["theta", "theta_1", "theta_2", "theta_3", "theta_4"],
                                         paths=50, horizon=20, seed=3)
    b, runs_b, _ = misbelief.simulate("overfitting", models=["theta", "theta_1", "theta_2", "theta_3", "theta_4"],
                                      paths=50, horizon=20, seed=3, threads=4)
    assert a == b
    assert runs_a == runs_b
    assert warn is not None
    assert all(r["n_switches"] >= 1 for r in runs_a)
    assert all(r["final_model"] != "theta" for r in runs_a)


def test_one_path_one_period():
    summary, runs, _ = misbelief.simulate("example1", paths=1, horizon=1)
    assert len(runs) == 1
    assert runs[0]["n_switches"] == 0


def test_assertions_and_gate():
    results = misbelief.run_scenario("overconfidence2")
    assert results and all(r["passed"] for r in results)
    assert misbelief.multi_model_gate(2.5, 4) == (False, False)
    assert misbelief.multi_model_gate(2.0, 3, 0.5)[1] is False
    lo, hi = misbelief.investment_thresholds()
    assert lo < hi


def test_errors_become_value_errors():
    with pytest.raises(ValueError):
        misbelief.scenario("no_such_scenario")
    with pytest.raises(misbelief.ConfigError):
        misbelief.scenario("example1", {"colour": 1})
    with pytest.raises(ValueError):
        misbelief.simulate("example1", paths=0)
