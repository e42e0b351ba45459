"""Quick invariant suite behind ``hyperct selftest`` (a few seconds)."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .hypergamma import HyperbolicGamma, QuasiPeriods, gamma, log_shintani_product
from .identities import (ParameterPoint, constant_K, macdonald_N, macdonald_Ntilde,
                         rhs_CMalternative, rhs_thm)
from .rootsys import build
from .verifier import verify_hyperbolic_ct, verify_split


def _gamma_checks(rng):
    a, b = cmath.exp(-0.3j), 0.8 * cmath.exp(-1.1j)
    ev = HyperbolicGamma(a, b)
    w = 0.5 * (a + b)
    z = rng.uniform(-2, 2, 20) + 1j * rng.uniform(-0.3, 0.3, 20)
    g = ev.log
    out = {
        "reflection": np.max(np.abs(np.exp(g(z) + g(-z)) - 1)),
        "functional equation": np.max(np.abs(np.exp(g(z + 0.5j * a) - g(z - 0.5j * a))
                                             / (2 * np.cosh(np.pi * z / b)) - 1)),
        "product formula": np.max(np.abs(np.exp(g(z + 1j * w) + g(-z + 1j * w))
                                         / (4 * np.sinh(np.pi * z / a) * np.sinh(np.pi * z / b)) - 1)),
        "special values": max(abs(ev(0j) - 1), abs(ev(0.5j * a) - math.sqrt(2)),
                              abs(ev(0.5j * (b - a)) - cmath.sqrt(b / a))),
    }
    qp = QuasiPeriods(1.0, cmath.exp(-1j * math.pi / 6))
    zs = [0j, 0.3 + 0.1j, -0.7 - 0.2j]
    out["Shintani product"] = max(abs(cmath.exp(log_shintani_product(qp, x)) / gamma(qp, x).value - 1)
                                  for x in zs)
    return {k: (float(v), 1e-9) for k, v in out.items()}


def _root_checks():
    worst = 0.0
    for fam, n in (("A", 1), ("A", 2), ("B", 2), ("C", 2), ("G", 2)):
        rs = build(fam, n)
        worst = max(worst, np.max(np.abs(rs.fundamental_coweights @ rs.simple_roots.T - np.eye(n))))
        worst = max(worst, abs(rs.index_f - abs(np.linalg.det(rs.cartan))))
        worst = max(worst, abs(len(rs.weyl_elements()) - rs.weyl_order))
    return {"root system duality/index/order": (float(worst), 1e-12)}


def _closed_form_checks():
    a, b = cmath.exp(-1j * math.pi / 8), cmath.exp(-3j * math.pi / 8)
    worst_chain = worst_thm = 0.0
    for fam, n in (("A", 1), ("B", 2), ("G", 2)):
        for case in ("i", "ii"):
            pp = ParameterPoint.make(a, b, fam, n, case, -0.1 - 0.5j, -0.15 - 0.6j)
            ref = pp.rs.weyl_order * rhs_CMalternative(pp)
            chain = (1j * b) ** n * constant_K(pp) * macdonald_N(pp) * macdonald_Ntilde(pp)
            worst_chain = max(worst_chain, abs(chain / ref - 1))
            worst_thm = max(worst_thm, abs(rhs_thm(pp) / ref - 1))
    return {"closed-form chain": (worst_chain, 1e-8), "regularized product form": (worst_thm, 1e-9)}


def run_selftest(emit=print) -> bool:
    rng = np.random.default_rng(2024)
    results = {}
    results.update(_gamma_checks(rng))
    results.update(_root_checks())
    results.update(_closed_form_checks())
    c = cmath.exp(-1j * math.pi / 4)
    rep = verify_hyperbolic_ct(ParameterPoint.make(c, c, "A", 1, "i", -1 - 1j))
    results["A1 constant term (|q| = 1)"] = (rep.rel_err, rep.tol)
    rep = verify_split(ParameterPoint.make(cmath.exp(-1j * math.pi / 8), cmath.exp(-3j * math.pi / 8),
                                           "A", 2, "i", -0.1 - 0.5j), count=10)
    results["splitting identity"] = (rep.diagnostics["max_residual"], rep.tol)
    ok = True
    for name, (err, tol) in results.items():
        passed = err <= tol
        ok &= passed
        emit(f"[{'PASS' if passed else 'FAIL'}] {name}: {err:.3e} (tol {tol:.0e})")
    return ok
