import cmath
import json
import math
import pathlib

import pytest

from hyperct.cli import make_task
from hyperct.errors import (DimensionTooLarge, IntegralityViolation, ModularPointInvalid, NotInS,
                            NotInSPrime)
from hyperct.hypergamma import QuasiPeriods
from hyperct.numerics import QuadratureSpec
from hyperct.verifier import (VerificationReport, default_spec, sweep, verify_bc,
                              verify_hyperbolic_ct, verify_q_constant_term, verify_q_sum,
                              verify_shintani, verify_split, worker_count)

from points import CASES, P1, SMALL, bc_point, point

GOLDEN = json.loads((pathlib.Path(__file__).parent / "fixtures" / "golden.json").read_text())
REPORT_FIELDS = {"identity", "params", "lhs", "rhs", "abs_err", "rel_err", "tol", "passed",
                 "diagnostics", "wall_ms"}


def _strip_timing(d):
    d = dict(d)
    d.pop("wall_ms")
    return d


def test_hyperbolic_examples():
    c = cmath.exp(-1j * math.pi / 4)
    rep = verify_hyperbolic_ct(point("A", 1, "i", (c, c, -1 - 1j, None)), tol=1e-6)
    assert rep.passed and rep.rel_err < 1e-6
    for s in (1.0, 0.5, 0.2):
        rep = verify_hyperbolic_ct(point("A", 1, "i", (c, c, s * (-0.1 - 0.1j), None)))
        assert rep.passed, rep.summary()
    rep = verify_hyperbolic_ct(point("B", 2, "ii"))
    assert rep.passed and rep.tol == 1e-4
    for key in ("truncation_radii", "c_est", "evaluations", "probe_grid"):
        assert key in rep.diagnostics


def test_hyperbolic_rejects_points_outside_S():
    with pytest.raises(NotInS):
        verify_hyperbolic_ct(point("A", 1, "i", (P1[0], P1[1], 0.5 + 0j, None)))


@pytest.mark.parametrize("fam,n", SMALL)
@pytest.mark.parametrize("case", CASES)
def test_residual_tracks_tolerance(fam, n, case):
    pp = point(fam, n, case)
    errs = [verify_hyperbolic_ct(pp, QuadratureSpec(rel_tol=t)).rel_err for t in (1e-3, 1e-5, 1e-6)]
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= 2 * coarse + 1e-13
    assert errs[-1] < 1e-6


@pytest.mark.parametrize("fam,n,case", [("A", 1, "i"), ("B", 2, "ii"), ("G", 2, "i")])
def test_truncation_safety(fam, n, case):
    pp = point(fam, n, case)
    one = verify_hyperbolic_ct(pp, QuadratureSpec(rel_tol=1e-6, truncation_safety=1))
    two = verify_hyperbolic_ct(pp, QuadratureSpec(rel_tol=1e-6, truncation_safety=2))
    budget = one.diagnostics["error_estimate"] + two.diagnostics["error_estimate"]
    assert abs(one.lhs - two.lhs) <= budget
    assert two.diagnostics["truncation_radii"][0] > one.diagnostics["truncation_radii"][0]


def test_reports_are_deterministic():
    runs = [lambda: verify_hyperbolic_ct(point("C", 2, "i")),
            lambda: verify_q_constant_term(point("A", 2)),
            lambda: verify_q_sum(point("B", 2)),
            lambda: verify_split(point("G", 2), count=20, seed=3),
            lambda: verify_shintani(QuasiPeriods(1, cmath.exp(-0.5j)), count=10, seed=4),
            lambda: verify_bc(bc_point(1))]
    for run in runs:
        assert _strip_timing(run().to_dict()) == _strip_timing(run().to_dict())


def test_q_constant_term():
    rep = verify_q_constant_term(point("A", 1), grid=64)
    assert rep.passed and rep.diagnostics["grid_converged"]
    assert verify_q_constant_term(point("B", 2), grid=64, tol=1e-6).passed
    with pytest.raises(NotInSPrime):
        verify_q_constant_term(point("A", 1, "i", (1.0, cmath.exp(-0.5j), -0.2 - 0.6j, None)))
    with pytest.raises(DimensionTooLarge):
        verify_q_constant_term(point("D", 4))


def test_q_constant_term_flags_coarse_grid():
    rep = verify_q_constant_term(point("G", 2), grid=4)
    assert not rep.diagnostics["grid_converged"]
    assert not rep.passed and "not converged" in rep.error


def test_q_sum():
    pp = point("A", 1)
    rep = verify_q_sum(pp, base_v=0.37 * pp.rs.fundamental_coweights[0])
    assert rep.passed
    assert rep.diagnostics["v_independence_rel_err"] < 1e-7
    assert verify_q_sum(point("C", 2, "ii"), tol=1e-6).passed
    with pytest.raises(IntegralityViolation):
        verify_q_sum(pp, base_v=pp.rs.fundamental_coweights[0])


def test_split():
    assert verify_split(point("A", 1), count=100).passed
    rep = verify_split(point("B", 2, "i"), count=50)
    assert rep.passed and rep.diagnostics["max_residual"] <= 1e-8


def test_shintani():
    rep = verify_shintani(QuasiPeriods(1, cmath.exp(-1j * math.pi / 6)), count=100)
    assert rep.passed
    with pytest.raises(ModularPointInvalid):
        verify_shintani(QuasiPeriods(1, 1), count=1)


def test_bc():
    assert verify_bc(bc_point(1), tol=1e-6).passed
    assert verify_bc(bc_point(2), tol=1e-4).passed
    with pytest.raises(DimensionTooLarge, match="rank > 2 unsupported"):
        verify_bc(bc_point(3))


def test_passed_semantics():
    rep = VerificationReport("x", {}, 1 + 1e-7, 1.0, 1e-6)
    assert rep.passed and rep.rel_err == pytest.approx(1e-7)
    assert not VerificationReport("x", {}, 1.1, 1.0, 1e-6).passed
    # tiny right-hand sides switch to the absolute error
    assert VerificationReport("x", {}, 2e-8, 1e-8, 1e-6).passed
    assert not VerificationReport("x", {}, 1.0, 1.0, 1.0, error="boom").passed
    assert not VerificationReport("x", {}, complex("nan"), 1.0, 1.0).passed
    assert set(VerificationReport("x", {}, 1, 1, 1).to_dict()) == REPORT_FIELDS


def _task(identity, **kw):
    return make_task({"identity": identity, **kw})


def test_sweep_order_and_errors(monkeypatch):
    monkeypatch.setenv("HYPERCT_THREADS", "3")
    assert worker_count() == 3
    assert sweep([]) == []
    tasks = [_task("hyperbolic", family="A", rank=1, k=k) for k in (-0.1 - 0.5j, -0.2 - 0.4j)]
    tasks.insert(1, _task("hyperbolic", family="A", rank=1, k=1 + 0j))
    tasks.append(_task("split", family="A", rank=1, count=5))
    reports = sweep(tasks)
    assert [r.identity for r in reports] == ["hyperbolic"] * 3 + ["split"]
    assert reports[1].error.startswith("NotInS")
    assert [r.passed for r in reports] == [True, False, True, True]
    assert reports[2].params["k_short"] == {"re": -0.2, "im": -0.4}
    monkeypatch.setenv("HYPERCT_THREADS", "1")
    serial = sweep(tasks)
    assert [r.lhs for r in serial[::2]] == [r.lhs for r in reports[::2]]


def test_default_spec():
    assert default_spec(1).rel_tol == pytest.approx(1e-8)
    assert default_spec(2).rel_tol == pytest.approx(1e-6)


@pytest.mark.parametrize("entry", GOLDEN, ids=lambda e: json.dumps(e["point"], sort_keys=True))
def test_golden(entry):
    _, _, thunk = make_task(entry["point"])
    rep = thunk()
    rhs = complex(*entry["rhs"])
    lhs = complex(*entry["lhs"])
    floor = 1e-14 * abs(rhs)
    assert abs(rep.rhs - rhs) <= floor
    assert rep.abs_err <= 10 * max(entry["abs_err"], floor)
    assert abs(rep.lhs - lhs) <= 11 * max(entry["abs_err"], floor)
