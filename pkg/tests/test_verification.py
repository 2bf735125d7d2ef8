import math

import pytest

from tdqo import verification as V


def _check(name, passed, crit=None, info=False):
    return V.Check(name, "x", crit, 0.1, 1.0, passed, informational=info)


def test_report_ignores_informational_checks():
    rep = V.Report("x", [_check("a", True, 1), _check("b", False, 1, info=True)], 0.0)
    assert rep.ok
    assert rep.criteria() == {1: True}


def test_report_combines_checks_per_criterion():
    rep = V.Report("all", [_check("a", True, 4), _check("b", False, 4), _check("c", True, None)], 0.0)
    assert not rep.ok
    doc = rep.to_json()
    assert doc["criteria"] == {"4": False, "12": False}
    assert [c["name"] for c in doc["checks"]] == ["a", "b", "c"]


def test_check_json_drops_non_finite_numbers():
    c = V._info("x", "s", None, math.nan)
    assert c.to_json()["measured"] is None and c.to_json()["threshold"] is None
    assert V._le("y", "s", 1, math.nan, 1.0).passed is False
    assert V._le("y", "s", 1, 1.0, 1.0).passed is True


def test_registry_covers_every_suite():
    suites = {s for s, _ in V._REGISTRY}
    assert suites == set(V.SUITES)


def test_unknown_suite():
    with pytest.raises(ValueError):
        V.run("nonsense")


def test_transforms_suite_passes():
    rep = V.run("transforms")
    assert rep.ok, [c for c in rep.checks if not c.passed]
    assert set(rep.criteria()) == {5, 6, 7, 11}


def test_signal_corpus_is_zero_mean():
    g, corpus = V.signal_corpus()
    assert len(corpus) == 10
    for _, x, _ in corpus:
        assert abs(x.sum() * g.dt) < 1e-6 * abs(x).sum() * g.dt
