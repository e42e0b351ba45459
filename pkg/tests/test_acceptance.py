"""Acceptance criteria 1-9, one test and one printed verdict line each."""

import cmath
import itertools
import math
import time

import numpy as np

from hyperct.errors import NearSingularity
from hyperct.hypergamma import QuasiPeriods, gamma, log_shintani_product
from hyperct.identities import (bc_rhs, bc_specialize, constant_K, macdonald_N,
                                macdonald_Ntilde, rhs_CMalternative)
from hyperct.numerics import QuadratureSpec, integrate_box_nd
from hyperct.rootsys import build, norm2
from hyperct.verifier import (verify_bc, verify_hyperbolic_ct, verify_q_constant_term,
                              verify_q_sum, verify_shintani, verify_split)

from points import (A1_POINTS, CASES, P1, P2, P3, RANK2, SMALL, bc_point, point,
                    random_h_plus_periods, random_quasi_periods)


def _admissible_z(rng, qp):
    return complex(rng.uniform(-2, 2), rng.uniform(-0.9, 0.9) * qp.omega.real)


def test_criterion_1_gamma_suite(report_line):
    rng = np.random.default_rng(20240101)
    worst = dict.fromkeys(["reflection", "functional equation (w+)", "functional equation (w-)",
                           "duplication", "quasi-period symmetry", "G(0)", "G(i w+/2)",
                           "G(i w-/2)", "G(i(w- - w+)/2)"], 0.0)
    t0 = time.perf_counter()
    done = 0
    while done < 120:
        qp = random_quasi_periods(rng)
        a, b, w = qp.wplus, qp.wminus, qp.omega
        z = _admissible_z(rng, qp)

        def G(x, qp=qp):
            return gamma(qp, x).value

        try:
            checks = {
                "reflection": (G(z) * G(-z), 1),
                "functional equation (w+)": (G(z + 0.5j * a) / G(z - 0.5j * a),
                                             2 * cmath.cosh(math.pi * z / b)),
                "functional equation (w-)": (G(z + 0.5j * b) / G(z - 0.5j * b),
                                             2 * cmath.cosh(math.pi * z / a)),
                "duplication": (G(2 * z + 1j * w),
                                G(z) * G(z + 0.5j * a) * G(z + 0.5j * b) * G(z + 1j * w)),
                "quasi-period symmetry": (gamma(QuasiPeriods(b, a), z).value, G(z)),
                "G(0)": (G(0j), 1),
                "G(i w+/2)": (G(0.5j * a), math.sqrt(2)),
                "G(i w-/2)": (G(0.5j * b), math.sqrt(2)),
                "G(i(w- - w+)/2)": (G(0.5j * (b - a)), cmath.sqrt(b / a)),
            }
        except NearSingularity:
            continue
        for name, (lhs, rhs) in checks.items():
            worst[name] = max(worst[name], abs(lhs - rhs) / abs(rhs))
        done += 1
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-9 and elapsed < 30
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report_line("criterion 1 (gamma suite, 120 random inputs)", ok,
                f"{detail}; {elapsed:.1f} s")
    assert ok


def test_criterion_2_shintani(report_line):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        qp = random_h_plus_periods(rng)
        z = _admissible_z(rng, qp)
        g = gamma(qp, z).value
        s = cmath.exp(complex(log_shintani_product(qp, z)))
        worst = max(worst, abs(s - g) / abs(g))
    fixed = verify_shintani(QuasiPeriods(1, cmath.exp(-1j * math.pi / 6)), count=100)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and fixed.passed and elapsed < 30
    report_line("criterion 2 (Shintani vs integral, 100 random + 100 fixed-qp points)", ok,
                f"max rel dev {worst:.1e} / {fixed.diagnostics['max_relative_deviation']:.1e}; "
                f"{elapsed:.1f} s")
    assert ok


def _ct_runs():
    runs = [("A", 1, "i", p, 1e-6, 10) for p in A1_POINTS]
    for (fam, n), case, p in itertools.product(RANK2, CASES, (P1, P2)):
        runs.append((fam, n, case, p, 1e-4, 120))
    return runs


def test_criterion_3_hyperbolic_constant_term(report_line):
    worst = {}
    ok = True
    for fam, n, case, p, tol, budget in _ct_runs():
        pp = point(fam, n, case, p)
        assert pp.in_S()
        t0 = time.perf_counter()
        rep = verify_hyperbolic_ct(pp, tol=tol)
        elapsed = time.perf_counter() - t0
        good = rep.rel_err <= tol and rep.passed and elapsed < budget
        ok &= good
        key = f"{fam}{n}"
        worst[key] = max(worst.get(key, 0.0), rep.rel_err)
    c = cmath.exp(-1j * math.pi / 4)
    colinear = verify_hyperbolic_ct(point("A", 1, "i", (c, c, -1 - 1j, None)), tol=1e-6)
    ok &= colinear.passed
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report_line("criterion 3 (CT integral vs closed form, 5 A1 points, 16 rank-2 runs)", ok,
                f"max rel err {detail}; colinear |q|=1 point {colinear.rel_err:.1e}")
    assert ok


def test_criterion_4_q_sum(report_line):
    ok = True
    worst = shift = 0.0
    for (fam, n), case in itertools.product([("A", 1), ("A", 2), ("B", 2), ("C", 2)], CASES):
        t0 = time.perf_counter()
        rep = verify_q_sum(point(fam, n, case, P1), tol=1e-7)
        ok &= rep.passed and rep.rel_err <= 1e-7 and time.perf_counter() - t0 < 60
        worst = max(worst, rep.rel_err)
        shift = max(shift, rep.diagnostics["v_independence_rel_err"])
    report_line("criterion 4 (lattice sum vs N-tilde, A1 A2 B2 C2 x 2 cases)", ok,
                f"max rel err {worst:.1e}; max base-point difference {shift:.1e}")
    assert ok


def test_criterion_5_q_constant_term(report_line):
    ok = True
    worst = gap = 0.0
    for (fam, n), case in itertools.product(SMALL, CASES):
        rep = verify_q_constant_term(point(fam, n, case, P1), grid=64, tol=1e-7)
        ok &= rep.passed and rep.diagnostics["grid_converged"]
        worst = max(worst, rep.rel_err)
        gap = max(gap, rep.diagnostics["grid_difference"])
    # #W sits inside N: as k -> 0 inside S', N tends to 1 = integral of Delta == 1
    small = point("A", 1, "i", (P1[0], P1[1], 1e-6 * P1[2], None))
    ok &= abs(macdonald_N(small) - 1) < 1e-4
    report_line("criterion 5 (trapezoid vs N, rank <= 2, M=64 vs 128)", ok,
                f"max rel err {worst:.1e}; max |T(M)-T(2M)| {gap:.1e}; "
                f"N(k->0) = {macdonald_N(small).real:.7f}")
    assert ok


def test_criterion_6_split(report_line):
    t0 = time.perf_counter()
    ok = True
    worst = worst_rel = 0.0
    for (fam, n), case in itertools.product(SMALL, CASES):
        rep = verify_split(point(fam, n, case, P1), count=100, tol=1e-8)
        ok &= rep.passed
        worst = max(worst, rep.diagnostics["max_residual"])
        worst_rel = max(worst_rel, rep.diagnostics["max_relative_residual"])
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report_line("criterion 6 (splitting identity, 100 points x 10 family/case)", ok,
                f"max residual {worst:.1e}; max relative residual {worst_rel:.1e}; {elapsed:.1f} s")
    assert ok


def test_criterion_7_closed_form_chain(report_line):
    worst = 0.0
    count = 0
    systems = SMALL + [("A", 3), ("B", 3), ("C", 3), ("D", 4)]
    for (fam, n), case, p in itertools.product(systems, CASES, (P1, P3)):
        pp = point(fam, n, case, p)
        chain = (1j * pp.qp.wminus) ** n * constant_K(pp) * macdonald_N(pp) * macdonald_Ntilde(pp)
        ref = pp.rs.weyl_order * rhs_CMalternative(pp)
        worst = max(worst, abs(chain - ref) / abs(ref))
        count += 1
    ok = worst <= 1e-8
    report_line(f"criterion 7 (closed-form chain, {count} S' points)", ok,
                f"max rel err {worst:.1e}")
    assert ok


def test_criterion_8_bc_integral(report_line):
    lines = []
    ok = True
    for rank, tol in ((1, 1e-6), (2, 1e-4)):
        rep = verify_bc(bc_point(rank), tol=tol)
        ok &= rep.passed and rep.rel_err <= tol
        lines.append(f"n={rank} {rep.rel_err:.1e}")
    for fam, n, case in (("A", 1, "i"), ("B", 2, "i"), ("B", 2, "ii"), ("C", 2, "i"), ("C", 2, "ii")):
        pp = point(fam, n, case, P1)
        sp = bc_specialize(pp)
        tol = 1e-6 if n == 1 else 1e-4
        rep = verify_bc(sp.params, tol=tol, source=sp)
        spec_err = rep.diagnostics["specialization_rel_err"]
        # N_BC through the map must also match the chamber closed form
        closed = abs(sp.prefactor * rep.rhs - pp.rs.weyl_order * rhs_CMalternative(pp)) / abs(rep.rhs)
        ok &= rep.passed and spec_err <= tol and closed <= 1e-10
        lines.append(f"{fam}{n}({case}) x{sp.prefactor} {max(rep.rel_err, spec_err):.1e}")
    # the explicit rank-one closed form
    a, b, k = P1[0], P1[1], P1[2]
    qp = QuasiPeriods(a, b)
    w = qp.omega
    a1 = (4 * cmath.sqrt(a * b) * gamma(qp, 1j * (k + w)).value * gamma(qp, 1j * (k - w)).value
          / gamma(qp, 1j * (2 * k + w)).value)
    a1_err = abs(bc_rhs(bc_specialize(point("A", 1, "i", P1)).params) - a1) / abs(a1)
    ok &= a1_err <= 1e-10
    report_line("criterion 8 (BC integral and specializations)", ok,
                "; ".join(lines) + f"; rank-one closed form {a1_err:.1e}")
    assert ok


def _brute_force_index(rs):
    """Count coweight-lattice points in a fundamental cell of the coroot lattice."""
    n = rs.rank
    coroots = np.array([2 * a / norm2(a) for a in rs.simple_roots])
    # coordinates of the simple coroots in the coweight basis
    m = np.rint(coroots @ rs.simple_roots.T).astype(int)
    corners = np.array(list(itertools.product((0, 1), repeat=n))) @ m
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    inv = np.linalg.inv(m.astype(float))
    count = 0
    for pt in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        c = np.asarray(pt) @ inv
        if np.all(c > -1e-9) and np.all(c < 1 - 1e-9):
            count += 1
    return count


def test_criterion_9_root_systems(report_line):
    ok = True
    parts = []
    for fam, n in (("A", 1), ("A", 2), ("A", 3), ("B", 2), ("C", 2), ("G", 2)):
        rs = build(fam, n)
        index = _brute_force_index(rs)
        short = min(norm2(a) for a in rs.roots)
        dual = np.max(np.abs(rs.fundamental_coweights @ rs.simple_roots.T - np.eye(n)))
        good = index == rs.index_f == round(abs(np.linalg.det(rs.cartan)))
        good &= abs(short - 2) < 1e-12 and dual < 1e-12
        ok &= good
        parts.append(f"{rs.name} f={rs.index_f}/{index}")
    # measure conversions: the jacobian turns lambda-coordinate integrals into
    # ambient ones, checked on a Gaussian whose ambient integral is pi
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)
    jac = {}
    for fam in ("B", "C"):
        rs = build(fam, 2)

        def f(lam, rs=rs):
            v = rs.to_ambient(lam)
            return np.exp(-np.sum(v * v, axis=1))

        res = integrate_box_nd(f, np.full(2, -12.0), np.full(2, 12.0), spec)
        jac[fam] = (rs.coweight_jacobian, abs(rs.coweight_jacobian * res.value - math.pi))
    ok &= abs(jac["B"][0] - 0.5) < 1e-12 and abs(jac["C"][0] - 0.5) < 1e-12
    ok &= jac["B"][1] < 1e-9 and jac["C"][1] < 1e-9
    report_line("criterion 9 (root-system structure and measures)", ok,
                ", ".join(parts) + f"; B2 dv=(sqrt2)^2 d'v jac {jac['B'][0]:.6f}, "
                f"C2 d'v=dv/2 jac {jac['C'][0]:.6f}")
    assert ok
