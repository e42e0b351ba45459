"""Parameter points shared by the test modules."""

import cmath
import math

import numpy as np

from hyperct.hypergamma import QuasiPeriods
from hyperct.identities import BCParameters, ParameterPoint

COLINEAR = cmath.exp(-1j * math.pi / 4)

# (w+, w-, k_short, k_long); all of these lie in S, the first two also in S'
P1 = (cmath.exp(-1j * math.pi / 8), cmath.exp(-3j * math.pi / 8), -0.1 - 0.5j, -0.15 - 0.6j)
P2 = (1.0 + 0j, 0.9 * cmath.exp(-1j * math.pi / 3), -0.3 - 0.6j, -0.25 - 0.7j)

# an S' point with non-symmetric quasi-periods
P3 = (cmath.exp(-0.2j), 1.2 * cmath.exp(-1.0j), -0.05 - 0.5j, -0.05 - 0.6j)

A1_POINTS = [
    (COLINEAR, COLINEAR, -1 - 1j, None),
    P1,
    P2,
    (0.8 * cmath.exp(-0.2j), 1.1 * cmath.exp(-0.9j), -0.2 - 0.4j, None),
    (1.0 + 0j, cmath.exp(-0.5j), -0.2 - 0.6j, None),
]

RANK2 = [("A", 2), ("B", 2), ("C", 2), ("G", 2)]
SMALL = [("A", 1), ("A", 2), ("B", 2), ("C", 2), ("G", 2)]
CASES = ["i", "ii"]

BC_GAMMA = (-0.2 - 0.3j, -0.3 - 0.2j, -0.25 - 0.4j, -0.1 - 0.2j)
BC_KAPPA = -0.2 - 0.4j


def point(fam, n, case="i", p=P1):
    return ParameterPoint.make(p[0], p[1], fam, n, case, p[2], p[3])


def bc_point(rank, kappa=BC_KAPPA, gamma=BC_GAMMA, p=P1):
    return BCParameters(QuasiPeriods(p[0], p[1]), gamma, kappa, rank)


def random_quasi_periods(rng, max_arg=1.2):
    a = rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(-max_arg, max_arg))
    b = rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(-max_arg, max_arg))
    return QuasiPeriods(a, b)


def random_h_plus_periods(rng):
    """Quasi-periods with w+/w- in the open upper half plane."""
    while True:
        qp = random_quasi_periods(rng, 1.0)
        if (qp.wplus / qp.wminus).imag > 0.15:
            return qp


def random_real(rng, rs, scale=1.0):
    return rs.to_ambient(rng.uniform(-scale, scale, rs.rank))


def rel(a, b):
    return abs(a - b) / abs(b)


def max_rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))
