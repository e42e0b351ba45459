"""Ruijsenaars' hyperbolic gamma function G(w+, w-; z) and q-shifted factorials.

Two independent evaluation routes are provided:

* :func:`gamma_strip` / :func:`gamma` -- the defining integral, done with
  adaptive Gauss-Kronrod quadrature, extended off the strip by the
  functional equation in the ``w-`` direction.  Scalar, slow, reference.
* :class:`HyperbolicGamma` -- a vectorised evaluator bound to one pair of
  quasi-periods.  It uses the same functional-equation reduction, then the
  trapezoid rule on the even extension of the integrand (exponentially
  accurate for this analytic integrand) or, far out along the real axis,
  the leading asymptotics, which are exact to double precision there.

All products of G values are formed in log space.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ModularPointInvalid, ModulusTooClose, NearSingularity, OutOfStrip
from .numerics import DEFAULT_SPEC, QuadratureSpec, finite_complex, integrate_halfline

SINGULAR_GUARD = 1e-8
STRIP_MARGIN = 1e-9
MAX_SHIFTS = 200
# asymptotic form is used once the first neglected exponential is below e^-45
ASYM_EXPONENT = 45.0


@dataclass(frozen=True)
class QuasiPeriods:
    wplus: complex
    wminus: complex

    def __post_init__(self):
        a = finite_complex(self.wplus)
        b = finite_complex(self.wminus)
        if not (a.real > 0 and b.real > 0):
            raise ValueError("quasi-periods must lie in the open right half-plane")
        object.__setattr__(self, "wplus", a)
        object.__setattr__(self, "wminus", b)

    @property
    def omega(self) -> complex:
        return 0.5 * (self.wplus + self.wminus)

    @property
    def ratio_in_upper_half_plane(self) -> bool:
        return (self.wplus / self.wminus).imag > 0

    @property
    def q(self) -> complex:
        if not self.ratio_in_upper_half_plane:
            raise ModularPointInvalid("|q| >= 1: w+/w- is not in the upper half-plane")
        return cmath.exp(2j * math.pi * self.wplus / self.wminus)

    @property
    def qtilde(self) -> complex:
        if not self.ratio_in_upper_half_plane:
            raise ModularPointInvalid("|q~| >= 1: w+/w- is not in the upper half-plane")
        return cmath.exp(-2j * math.pi * self.wminus / self.wplus)

    def swapped(self) -> "QuasiPeriods":
        return QuasiPeriods(self.wminus, self.wplus)

    def scaled_minus(self, u: float) -> "QuasiPeriods":
        """Quasi-periods (w+, u*w-) used for the root-dependent gamma G_alpha."""
        return QuasiPeriods(self.wplus, u * self.wminus)

    def in_strip(self, z, margin: float = STRIP_MARGIN) -> bool:
        return abs(complex(z).imag) < self.omega.real - margin

    def locus_distance(self, z):
        """Distance from z to the zero/pole locus +-(i*omega + Lambda)."""
        return locus_distance(self.wplus, self.wminus, z)

    def in_Lambda(self, z, tol: float = 1e-10) -> bool:
        """Whether z is (within tol) in the cone Z>=0 i w+ + Z>=0 i w-."""
        z = complex(z)
        a, b = self.wplus, self.wminus
        mmax = int(max(z.imag, 0) / a.real) + 2
        nmax = int(max(z.imag, 0) / b.real) + 2
        m = np.arange(mmax + 1)[:, None]
        n = np.arange(nmax + 1)[None, :]
        return bool(np.min(np.abs(z - 1j * (m * a + n * b))) <= tol)


def locus_distance(a: complex, b: complex, z):
    """Vectorised distance to +-(i(a+b)/2 + Z>=0 i a + Z>=0 i b)."""
    z = np.asarray(z, dtype=complex)
    w = 0.5 * (a + b)
    out = np.full(z.shape, np.inf)
    height = np.abs(z.imag)
    # the locus has |Im| >= Re(w); points far inside the strip are safe
    near = height > w.real - 1.0
    if not near.any():
        return out
    zn = z[near]
    top = float(np.max(np.abs(zn.imag))) + 1.0
    mmax = int(max(top - w.real, 0) / a.real) + 1
    nmax = int(max(top - w.real, 0) / b.real) + 1
    m = np.arange(mmax + 1)[:, None]
    n = np.arange(nmax + 1)[None, :]
    pts = (1j * w + 1j * (m * a + n * b)).ravel()
    d = np.full(zn.shape, np.inf)
    for chunk in np.array_split(pts, max(1, len(pts) // 256)):
        d = np.minimum(d, np.min(np.abs(zn[..., None] - chunk), axis=-1))
        d = np.minimum(d, np.min(np.abs(zn[..., None] + chunk), axis=-1))
    out[near] = d
    return out


@dataclass(frozen=True)
class GammaValue:
    log_value: complex
    value: complex
    shifts_applied: int
    nearest_singularity_distance: float


def _log2cosh(x):
    """log(2 cosh x) without overflow; any branch (only exp() is used)."""
    x = np.asarray(x, dtype=complex)
    s = np.where(x.real >= 0, x, -x)
    return s + np.log1p(np.exp(-2 * s))


def _cosh_zero_distance(x, a):
    """Distance (in z units, scale |a|/pi) from x = pi*w/a to a zero of cosh."""
    t = np.asarray(x, dtype=complex) / (1j * math.pi)
    nearest = np.floor(t.real) + 0.5
    return np.abs(t - nearest) * abs(a)


# ---------------------------------------------------------------------------
# Reference route: defining integral by adaptive Gauss-Kronrod.

def _taylor_coefficients(z, a, b):
    """Coefficients of h(y) = (sin(2yz)/(2 sinh(ay) sinh(by)) - z/(ab y))/y
    in powers y^0, y^2, y^4, y^6."""
    a2, b2, z2 = a * a, b * b, z * z
    ab = a * b
    c0 = -z * (a2 + b2 + 4 * z2) / (6 * ab)
    c2 = z * (7 * a2 * a2 + 10 * a2 * b2 + 40 * a2 * z2 + 7 * b2 * b2 + 40 * b2 * z2
              + 48 * z2 * z2) / (360 * ab)
    c4 = -z * (31 * a2 ** 3 + 49 * a2 * a2 * b2 + 196 * a2 * a2 * z2 + 49 * a2 * b2 * b2
               + 280 * a2 * b2 * z2 + 336 * a2 * z2 * z2 + 31 * b2 ** 3 + 196 * b2 * b2 * z2
               + 336 * b2 * z2 * z2 + 192 * z2 ** 3) / (15120 * ab)
    c6 = z * (381 * a2 ** 4 + 620 * a2 ** 3 * b2 + 2480 * a2 ** 3 * z2 + 686 * a2 ** 2 * b2 ** 2
              + 3920 * a2 ** 2 * b2 * z2 + 4704 * a2 ** 2 * z2 ** 2 + 620 * a2 * b2 ** 3
              + 3920 * a2 * b2 ** 2 * z2 + 6720 * a2 * b2 * z2 ** 2 + 3840 * a2 * z2 ** 3
              + 381 * b2 ** 4 + 2480 * b2 ** 3 * z2 + 4704 * b2 ** 2 * z2 ** 2
              + 3840 * b2 * z2 ** 3 + 1280 * z2 ** 4) / (1814400 * ab)
    return c0, c2, c4, c6


def strip_integrand(qp: QuasiPeriods, z: complex):
    """The exponentially decaying integrand whose integral over (0, inf),
    minus z*sqrt(pi)/(w+ w-), is -i log G(z).

    The algebraic 1/y^2 tail of the defining integrand is traded for
    z*exp(-y^2)/(w+ w- y^2), whose integral is known in closed form.
    Returns ``(f, series_integral, decay_rate)``.
    """
    a, b = qp.wplus, qp.wminus
    ab = a * b
    z = complex(z)

    def f(y):
        y = np.asarray(y, dtype=float)
        g2 = 2 * np.exp(-(a + b) * y) / (np.expm1(-2 * a * y) * np.expm1(-2 * b * y))
        return np.sin(2 * y * z) * g2 / y - z * np.exp(-y * y) / (ab * y * y)

    c0, c2, c4, c6 = _taylor_coefficients(z, a, b)
    r = z / ab
    # add the series of z exp(-y^2)/(ab) * (1 - exp(-y^2))/y^2 ... i.e. r*(1 - y^2/2 + y^4/6 - y^6/24)
    coeffs = (c0 + r, c2 - r / 2, c4 + r / 6, c6 - r / 24)

    def series_integral(y0):
        return sum(c * y0 ** (2 * k + 1) / (2 * k + 1) for k, c in enumerate(coeffs))

    decay = (a + b).real - 2 * abs(z.imag)
    return f, series_integral, decay


def gamma_strip(qp: QuasiPeriods, z, spec: QuadratureSpec = DEFAULT_SPEC) -> GammaValue:
    """G(w+, w-; z) from its defining integral; z must lie inside the strip."""
    z = finite_complex(z)
    if not qp.in_strip(z):
        raise OutOfStrip(f"|Im z| = {abs(z.imag):.6g} is not < Re(omega) = {qp.omega.real:.6g}")
    f, series, decay = strip_integrand(qp, z)
    split = min(1e-2, 0.1 / max(1.0, abs(z), abs(qp.wplus), abs(qp.wminus)))
    res = integrate_halfline(f, spec, decay, series_integral=series, split=split)
    integral = res.value - z * math.sqrt(math.pi) / (qp.wplus * qp.wminus)
    log_value = 1j * integral
    return GammaValue(log_value, cmath.exp(log_value), 0,
                      float(qp.locus_distance(z)))


def _comfortable(qp: QuasiPeriods, z: complex) -> bool:
    # the strip integral slows down near the strip edge; shift from there
    bound = max(0.75 * qp.omega.real, 0.5 * qp.wminus.real)
    return abs(z.imag) <= bound


def gamma(qp: QuasiPeriods, z, spec: QuadratureSpec = DEFAULT_SPEC) -> GammaValue:
    """G(w+, w-; z) on its whole domain of definition.

    Points away from the strip are moved there with
    G(w) = 2cosh(pi(w - i w-/2)/w+) G(w - i w-) (or its inverse).
    """
    z = finite_complex(z)
    a, b = qp.wplus, qp.wminus
    dist = float(qp.locus_distance(z))
    if dist < SINGULAR_GUARD:
        raise NearSingularity(f"z={z} is within {dist:.3g} of the zero/pole locus")
    if _comfortable(qp, z):
        return gamma_strip(qp, z, spec)
    m = int(round(z.imag / b.real))
    if abs(m) > MAX_SHIFTS:
        raise NearSingularity(f"z={z} needs {abs(m)} functional-equation steps (> {MAX_SHIFTS})")
    step = 1 if m > 0 else -1
    log_acc = 0j
    w = z
    for _ in range(abs(m)):
        arg = math.pi * (w - step * 0.5j * b) / a
        if float(_cosh_zero_distance(arg, a)) < SINGULAR_GUARD:
            raise NearSingularity(f"functional-equation factor vanishes near z={z}")
        log_acc += step * complex(_log2cosh(arg))
        w = w - step * 1j * b
    base = gamma_strip(qp, w, spec)
    log_value = base.log_value + log_acc
    return GammaValue(log_value, cmath.exp(log_value), abs(m), dist)


def omega_alpha(qp: QuasiPeriods, u: float) -> complex:
    return 0.5 * (qp.wplus + u * qp.wminus)


def gamma_alpha(qp: QuasiPeriods, u: float, z, spec: QuadratureSpec = DEFAULT_SPEC) -> GammaValue:
    """G_alpha(z) = G(w+, u w-; z) for a root with u_alpha = u."""
    return gamma(qp.scaled_minus(u), z, spec)


# ---------------------------------------------------------------------------
# q-shifted factorials and Shintani's product.

def qpoch(z, q, eps: float = 1e-17):
    """(z; q)_inf = prod_{j>=0} (1 - q^j z), vectorised over z."""
    q = complex(q)
    if abs(q) > 1 - 1e-6:
        raise ModulusTooClose(f"|q| = {abs(q):.9g} too close to (or above) 1")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.ones_like(z)
    term = z.copy()
    tail = 1.0 / (1.0 - abs(q))
    while True:
        out *= 1 - term
        term = term * q
        if np.max(np.abs(term), initial=0.0) * tail < eps:
            break
    return complex(out[0]) if scalar else out


def qpoch_ratio(num, den, q, eps: float = 1e-17):
    """(num; q)_inf / (den; q)_inf, formed factor by factor (no overflow)."""
    q = complex(q)
    if abs(q) > 1 - 1e-6:
        raise ModulusTooClose(f"|q| = {abs(q):.9g} too close to (or above) 1")
    num, den = np.broadcast_arrays(np.asarray(num, dtype=complex), np.asarray(den, dtype=complex))
    scalar = num.ndim == 0
    tn = np.atleast_1d(num).astype(complex)
    td = np.atleast_1d(den).astype(complex)
    out = np.ones_like(tn)
    tail = 1.0 / (1.0 - abs(q))
    while True:
        # identical factors cancel exactly, including 0/0 ones
        same = tn == td
        out *= np.where(same, 1.0, (1 - tn) / np.where(same, 2.0, 1 - td))
        tn = tn * q
        td = td * q
        big = max(np.max(np.abs(tn), initial=0.0), np.max(np.abs(td), initial=0.0))
        if big * tail < eps:
            break
    return complex(out[0]) if scalar else out


def log_qpoch(z, q, eps: float = 1e-17):
    """sum_j log(1 - q^j z), i.e. a logarithm of (z; q)_inf without overflow."""
    q = complex(q)
    if abs(q) > 1 - 1e-6:
        raise ModulusTooClose(f"|q| = {abs(q):.9g} too close to (or above) 1")
    scalar = np.ndim(z) == 0
    term = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    out = np.zeros_like(term)
    tail = 1.0 / (1.0 - abs(q))
    while True:
        out += np.log1p(-term)
        term = term * q
        if np.max(np.abs(term), initial=0.0) * tail < eps:
            break
    return complex(out[0]) if scalar else out


def log_shintani_product(qp: QuasiPeriods, z, eps: float = 1e-17):
    """A logarithm of G(z) from Shintani's product; needs w+/w- in H+."""
    if not qp.ratio_in_upper_half_plane:
        raise ModularPointInvalid("Shintani's product needs w+/w- in the open upper half-plane")
    a, b, w = qp.wplus, qp.wminus, qp.omega
    z = np.asarray(z, dtype=complex)
    num = log_qpoch(np.exp(-2 * np.pi * (z - 1j * w) / b), qp.q, eps)
    den = log_qpoch(np.exp(-2 * np.pi * (z + 1j * w) / a), qp.qtilde, eps)
    out = num - den - 1j * np.pi / 24 * (a / b + b / a) - 1j * np.pi * z * z / (2 * a * b)
    return complex(out) if np.ndim(out) == 0 else out


def shintani_product(qp: QuasiPeriods, z, eps: float = 1e-17):
    """G(z) as a ratio of q- and q~-shifted factorials; needs w+/w- in H+."""
    out = np.exp(log_shintani_product(qp, z, eps))
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Vectorised evaluator.

class _TrapezoidRule:
    """Trapezoid rule for int_0^inf h(y) dy with h even and analytic.

    Nodes y_j = j*delta are factored as (block start) + (offset) so that
    exp(2i y z) costs one exponential per block and per offset rather than
    per node; the sum then reduces to a small matrix product.
    """

    def __init__(self, a: complex, b: complex, xmax: float, hmax: float):
        self.a, self.b = a, b
        dpole = math.pi * min(a.real / abs(a) ** 2, b.real / abs(b) ** 2)
        s = 0.8 * dpole
        self.delta = 2 * math.pi * s / (2 * s * xmax + s * abs((a + b).imag) + 42.0)
        decay = (a + b).real - 2 * hmax
        if decay <= 0:
            raise ValueError("trapezoid rule needs |Im z| < Re(omega)")
        upper = (42.0 + math.log1p(1.0 / decay) + math.log1p(xmax)) / decay
        n_nodes = int(math.ceil(upper / self.delta))
        self.block = max(8, int(math.sqrt(n_nodes)))
        n_blocks = -(-(n_nodes + 1) // self.block)
        j = np.arange(n_blocks * self.block)
        y = j * self.delta
        w = np.zeros(len(j), dtype=complex)
        yy = y[1:n_nodes + 1]
        g2 = 2 * np.exp(-(a + b) * yy) / (np.expm1(-2 * a * yy) * np.expm1(-2 * b * yy))
        w[1:n_nodes + 1] = self.delta * g2 / yy
        # weight matrix: W[k, blk] = w[blk*block + k]
        self.weights = w.reshape(n_blocks, self.block).T.copy()
        self.offsets = np.arange(self.block) * self.delta
        self.starts = np.arange(n_blocks) * self.block * self.delta
        # delta * sum_{j>=1} 1/(j delta)^2
        self.inv_square_sum = (math.pi ** 2 / 6) / self.delta
        self.n_nodes = n_nodes

    def integral(self, z: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        ab = a * b
        out = np.empty(z.shape, dtype=complex)
        for sl in _chunks(len(z), 4096):
            zc = z[sl]
            bp = np.exp(2j * np.outer(zc, self.offsets))
            ap = np.exp(2j * np.outer(zc, self.starts))
            plus = np.sum(ap * (bp @ self.weights), axis=1)
            minus = np.sum((1 / ap) * ((1 / bp) @ self.weights), axis=1)
            s = (plus - minus) / 2j
            h0 = -zc * (a * a + b * b + 4 * zc * zc) / (6 * ab)
            out[sl] = s - zc / ab * self.inv_square_sum + 0.5 * self.delta * h0
        return out


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


class HyperbolicGamma:
    """Vectorised log G(w+, w-; z) for fixed quasi-periods."""

    def __init__(self, wplus, wminus, guard: float = SINGULAR_GUARD):
        self.qp = QuasiPeriods(wplus, wminus)
        # G is symmetric in the quasi-periods; shifting along the one with the
        # smaller real part leaves the widest margin inside the strip
        a, b = self.qp.wplus, self.qp.wminus
        self.a, self.b = (a, b) if a.real >= b.real else (b, a)
        self.guard = guard
        self._rules = {}

    def _rule(self, xmax: float) -> _TrapezoidRule:
        key = int(math.ceil(xmax))
        if key not in self._rules:
            self._rules[key] = _TrapezoidRule(self.a, self.b, float(key), 0.5 * self.b.real + 1e-9)
        return self._rules[key]

    def asymptotic_exponent(self, z):
        """2*pi times the decay exponent of the first term dropped by the
        large-|Re z| asymptotic form."""
        z = np.asarray(z, dtype=complex)
        zz = np.where(z.real >= 0, z, -z)
        w = self.qp.omega
        e = np.full(z.shape, np.inf)
        for c in (self.a, self.b):
            for sgn in (1, -1):
                e = np.minimum(e, ((zz + sgn * 1j * w) / c).real)
        return 2 * math.pi * e

    def log_asymptotic(self, z):
        z = np.asarray(z, dtype=complex)
        a, b = self.a, self.b
        sgn = np.where(z.real >= 0, 1.0, -1.0)
        zz = sgn * z
        lead = -1j * np.pi * zz * zz / (2 * a * b) - 1j * np.pi * (a * a + b * b) / (24 * a * b)
        return sgn * lead

    def log(self, z, check: bool = True):
        """log G(z) (some branch) for an array of z; raises NearSingularity."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        if check:
            d = locus_distance(self.a, self.b, z)
            bad = d < self.guard
            if bad.any():
                raise NearSingularity(f"z={z[bad][0]} is within {d[bad][0]:.3g} of the zero/pole locus")
        a, b = self.a, self.b
        m = np.rint(z.imag / b.real).astype(int)
        if np.max(np.abs(m), initial=0) > MAX_SHIFTS:
            raise NearSingularity(f"argument needs more than {MAX_SHIFTS} functional-equation steps")
        acc = np.zeros(z.shape, dtype=complex)
        w = z.copy()
        for step in (1, -1):
            idx = np.nonzero(m * step > 0)[0]
            count = np.abs(m[idx])
            for j in range(int(count.max(initial=0))):
                live = idx[count > j]
                arg = np.pi * (w[live] - step * 0.5j * b) / a
                if check and np.any(_cosh_zero_distance(arg, a) < self.guard):
                    raise NearSingularity("functional-equation factor vanishes")
                acc[live] += step * _log2cosh(arg)
                w[live] -= step * 1j * b
        out = np.empty(z.shape, dtype=complex)
        asym = self.asymptotic_exponent(w) >= ASYM_EXPONENT
        if asym.any():
            out[asym] = self.log_asymptotic(w[asym])
        rest = ~asym
        if rest.any():
            wr = w[rest]
            rule = self._rule(float(np.max(np.abs(wr.real))))
            out[rest] = 1j * rule.integral(wr)
        return (out + acc).reshape(shape)

    def __call__(self, z):
        v = np.exp(self.log(z))
        return complex(v) if v.ndim == 0 else v


@lru_cache(maxsize=64)
def evaluator(wplus: complex, wminus: complex) -> HyperbolicGamma:
    """Shared evaluator per quasi-period pair (rules are cached inside)."""
    return HyperbolicGamma(complex(wplus), complex(wminus))
