import json

import pytest

from asmcmc import verify


def test_fast_suite_passes():
    reports, errors = verify.run_suite("fast")
    assert not errors
    failing = [r.name for r in reports if r.gated and not r.passed]
    assert not failing
    for r in reports:
        json.loads(r.to_json())


def test_suite_selection():
    fast = verify.select("fast")
    full = verify.select("full")
    assert set(fast) < set(full)
    assert verify.select("proposition:drift") == ["drift"]
    with pytest.raises(KeyError):
        verify.select("proposition:nothing")
    with pytest.raises(KeyError):
        verify.select("medium")


def test_exp_power_oracle():
    # [DERIVED] Gamma(3/4)/Gamma(1/4)
    assert verify.exp_power_x2_oracle() == pytest.approx(0.3379891200336424, rel=1e-9)


def test_errors_are_collected(monkeypatch):
    def boom(ctx):
        raise RuntimeError("bad")

    monkeypatch.setitem(verify.CHECKS, "boom", (("fast",), boom))
    reports, errors = verify.run_suite("proposition:boom")
    assert reports == [] and errors == ["boom: RuntimeError: bad"]
