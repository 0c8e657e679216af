import json

import numpy as np
import pytest

from kgwave import harness as hv


def _report(id_, residual, tol, passed):
    return hv.CheckReport(id_, {"seed": 1}, residual, tol, passed, {}, None, "")


def test_empty_json_report_exact():
    assert hv.emit_report([], "json") == b'{"schema":"kgwave-report/1","checks":[]}'


def test_csv_header_then_rows():
    reps = [_report("a.pass", 1e-13, 1e-12, True), _report("b.fail", 1.0, 1e-12, False)]
    lines = hv.emit_report(reps, "csv").decode().splitlines()
    assert lines[0] == ",".join(hv.FIELDS)
    assert len(lines) == 3
    assert lines[1].startswith("a.pass,") and ",true," in lines[1]
    assert lines[2].startswith("b.fail,") and ",false," in lines[2]


def test_text_report_tail():
    reps = [_report("a", 0.0, 1.0, True), _report("b", 2.0, 1.0, False),
            _report("c", float("inf"), 1.0, False)]
    text = hv.emit_report(reps, "text").decode()
    assert text.rstrip().endswith("1 passed, 2 failed")


def test_json_field_order_and_nonfinite():
    doc = json.loads(hv.emit_report([_report("x", float("inf"), 1.0, False)], "json"))
    assert list(doc["checks"][0]) == list(hv.FIELDS)
    assert doc["checks"][0]["residual"] is None


def test_unknown_format_and_suite():
    with pytest.raises(hv.ConfigError):
        hv.emit_report([], "xml")
    with pytest.raises(hv.ConfigError):
        hv.suite_specs("nonsense")


def test_spec_validation_and_unknown_ids():
    with pytest.raises(hv.ConfigError):
        hv.CheckSpec("bad", "pde", 0.0, lambda r, p: None)
    ghost = hv.CheckSpec("ghost.check", "pde", 1.0, lambda r, p: hv.Outcome(0.0))
    with pytest.raises(hv.ConfigError):
        hv.run_suite([ghost], 42)


def test_registry_covers_every_anchor():
    ids = set(hv.REGISTRY)
    prefixes = ["eq01", "eq05", "eq07", "eq09", "eq13", "eq14", "eq15", "eq17", "eq18",
                "eq19", "eq21", "eq22", "eq23", "eq25", "sec5.norm"]
    for p in prefixes:
        assert any(i.startswith(p) for i in ids), p
    assert {"eq06.closed_form", "eq10.synthesis", "eq23.brackets", "eq23.hamiltonian",
            "app.A1", "app.A2", "app.A3", "app.A4", "app.A5", "app.A6A7"} <= ids


def test_rng_streams_are_per_check():
    a = hv.rng_for(42, "eq07.transport").random(5)
    b = hv.rng_for(42, "eq07.transport").random(5)
    c = hv.rng_for(42, "eq01.kg_residual").random(5)
    d = hv.rng_for(43, "eq07.transport").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_single_transport_check_passes():
    (rep,) = hv.run_suite([hv.REGISTRY["eq07.transport"]], 42)
    assert rep.passed and rep.residual < 1e-12
    assert rep.runtime_ms is None


def test_zero_tolerance_fails_everything_with_residuals():
    specs = hv.suite_specs("frames")
    reps = hv.run_suite(specs, 42, tolerance=0.0)
    assert not any(r.passed for r in reps)
    assert all(np.isfinite(r.residual) for r in reps)


def test_canonical_suite_deterministic_and_threaded():
    specs = hv.suite_specs("canonical")
    a = hv.emit_report(hv.run_suite(specs, 42), "json")
    b = hv.emit_report(hv.run_suite(specs, 42, workers=3), "json")
    assert a == b
    doc = json.loads(a)
    assert all(c["pass"] for c in doc["checks"])
    assert [c["id"] for c in doc["checks"]] == sorted(c["id"] for c in doc["checks"])


def test_timings_are_recorded_on_request():
    (rep,) = hv.run_suite([hv.REGISTRY["sec5.coefficient"]], 42, timings=True)
    assert isinstance(rep.runtime_ms, float)


def test_check_errors_become_failures():
    def boom(rng, p):
        raise ArithmeticError("diverged")
    spec = hv.CheckSpec("tmp.boom", "pde", 1.0, boom)
    rep = hv.run_check(spec, 1)
    assert not rep.passed and rep.residual == float("inf") and "diverged" in rep.notes


def test_roundoff_floor_and_orders():
    assert hv.roundoff_floor(1.0, 1e-3) == pytest.approx(4 * 64 / 12 * np.finfo(float).eps / 1e-6)
    rows = hv.convergence_orders(samples=40, rng=np.random.default_rng(0))
    used = [r[4] for r in rows if r[4] is not None]
    assert used and all(abs(o - 4) < 0.3 for o in used)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("KGWAVE_THREADS", "4")
    assert hv.worker_count() == 4
    monkeypatch.setenv("KGWAVE_THREADS", "many")
    with pytest.raises(hv.ConfigError):
        hv.worker_count()
