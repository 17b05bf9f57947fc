import json

import numpy as np
import pytest

from henochrome import verify
from henochrome.verify import (
    DEFAULT_TOLERANCES,
    SUITE_NAMES,
    UnknownSuiteError,
    VerifyConfig,
    run_suite,
    write_report,
)

# small, fast configuration: w0 = 20 at order 4 needs L >= 268 and ds <= 3.33
SMALL = dict(w0=20.0, grid_n=168, grid_L=270.0, pairs=3, max_order=4,
             completeness_n=32, completeness_L=100.0, completeness_nkz=96,
             completeness_k_points=32, completeness_points=40, accuracy_kw0=(10.0, 20.0))


@pytest.fixture(scope="module")
def small():
    return VerifyConfig(**SMALL)


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_suite_passes_on_small_config(name, small):
    rep = run_suite(name, small)
    assert rep.error is None, rep.error
    failed = [(c.claim, c.value, c.tolerance) for c in rep.checks if not c.passed]
    assert not failed
    assert rep.passed


def test_unknown_suite():
    with pytest.raises(UnknownSuiteError):
        run_suite("nope")


def test_report_is_reproducible(small):
    a = run_suite("unitarity", small).to_json()
    b = run_suite("unitarity", small).to_json()
    assert a == b


def test_report_states_every_tolerance(small):
    rep = run_suite("rotation", small)
    d = json.loads(rep.to_json())
    assert d["environment"]["config"]["tolerances"] == DEFAULT_TOLERANCES
    for c in d["checks"]:
        assert c["anchor"] and c["relation"] in ("<=", ">=", ">")
        assert isinstance(c["tolerance"], float)
    assert "total" in rep.timings


def test_tolerance_override_can_fail_a_check(small):
    cfg = VerifyConfig(**{**SMALL, "tolerances": {"isometry": 0.0}})
    rep = run_suite("rotation", cfg)
    iso = [c for c in rep.checks if c.tolerance == 0.0 and c.relation == "<="]
    assert len(iso) == 1
    # roundoff-level residuals are nonzero, so an exact-zero tolerance cannot be met
    assert not rep.passed


def test_negative_controls_need_failure(small):
    rep = run_suite("negative-controls", small)
    assert all(c.control for c in rep.checks)
    # with an absurdly loose threshold the wrong physics no longer registers as broken
    loose = VerifyConfig(**{**SMALL, "tolerances": {"control_omega": 10.0, "gauge": 10.0}})
    assert not run_suite("negative-controls", loose).passed


def test_infrastructure_error_gives_partial_report():
    # grid too coarse for the waist: the suite aborts but still returns a report
    rep = run_suite("unitarity", VerifyConfig(grid_n=16, grid_L=300.0))
    assert rep.error is not None and "ResolutionError" in rep.error
    assert not rep.passed
    assert json.loads(rep.to_json())["error"] == rep.error


def test_config_rejects_unknown_tolerance():
    with pytest.raises(ValueError, match="unknown tolerance"):
        VerifyConfig.from_dict({"tolerances": {"bogus": 1.0}})
    cfg = VerifyConfig.from_dict({"seed": 4, "accuracy_kw0": [5, 10], "unrelated": 1})
    assert cfg.seed == 4 and cfg.accuracy_kw0 == (5, 10)


def test_write_report_bundle(tmp_path, small):
    reps = [run_suite("consistency", small), run_suite("dispersion", small)]
    path = write_report(reps, tmp_path / "r" / "report.json")
    doc = json.loads(path.read_text())
    assert doc["passed"] is True
    assert [s["suite"] for s in doc["suites"]] == ["consistency", "dispersion"]


def test_run_all_threads_match_serial(small):
    names = ("consistency", "rotation")
    a = [r.to_json() for r in verify.run_all(small, names, threads=1)]
    b = [r.to_json() for r in verify.run_all(small, names, threads=2)]
    assert a == b


def test_fourth_order_stencils():
    h = 0.01
    x = np.arange(-2, 3) * h + 0.3
    assert verify.fd_first(np.sin(x), h) == pytest.approx(np.cos(0.3), abs=1e-9)
    assert verify.fd_second(np.sin(x), h) == pytest.approx(-np.sin(0.3), abs=1e-7)
