"""Parameter domains, integrands, densities and closed-form evaluations of the
hyperbolic and q-constant term identities, including the BC-type integral."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (IntegralityViolation, NearSingularity, NotInS, NotInSBC,
                     NotInSPrime, UnsupportedCombination)
from .hypergamma import QuasiPeriods, evaluator, qpoch_ratio
from .rootsys import IdentityCase, Multiplicity, RootSystemData, build, coroot, rho_k, u_and_prime

INTEGRALITY_TOL = 1e-12


@dataclass(frozen=True)
class RootInfo:
    alpha: np.ndarray
    alpha_prime: np.ndarray
    coroot: np.ndarray
    u: float
    k: complex
    omega_alpha: complex
    simple: bool
    long: bool


@dataclass(frozen=True, eq=False)
class ParameterPoint:
    qp: QuasiPeriods
    rs: RootSystemData
    case: IdentityCase
    k: Multiplicity

    @classmethod
    def make(cls, wplus, wminus, family, rank, case, k_short, k_long=None) -> "ParameterPoint":
        return cls(QuasiPeriods(wplus, wminus), build(family, rank), IdentityCase.parse(case),
                   Multiplicity(k_short, k_long))

    @cached_property
    def positive(self) -> list[RootInfo]:
        out = []
        for a in self.rs.positive_roots:
            u, ap = u_and_prime(self.case, a)
            out.append(RootInfo(a, ap, coroot(a), u, self.k.of(self.rs, a),
                                0.5 * (self.qp.wplus + u * self.qp.wminus),
                                self.rs.is_simple(a), self.rs.is_long(a)))
        return out

    @cached_property
    def rho(self) -> np.ndarray:
        return rho_k(self.rs, self.k)

    def _k_orbits(self):
        if self.rs.simply_laced:
            return [("k", self.k.value_short)]
        return [("k_short", self.k.value_short), ("k_long", self.k.value_long)]

    def S_violations(self) -> list[str]:
        a, b = self.qp.wplus, self.qp.wminus
        bad = []
        if not a.real > 0:
            bad.append("Re(ω₊) > 0 fails")
        if not b.real > 0:
            bad.append("Re(ω₋) > 0 fails")
        if not (a * b).imag < 0:
            bad.append("Im(ω₊ω₋) < 0 fails")
        for name, k in self._k_orbits():
            if not k.real < 0:
                bad.append(f"{name} ∉ ℂ₋ (Re {name} = {k.real:.6g})")
            if not (k / (a * b)).real > 0:
                bad.append(f"{name} ∉ ω₊ω₋ℂ₊ (Re({name}/ω₊ω₋) = {(k / (a * b)).real:.6g})")
        return bad

    def in_S(self) -> bool:
        return not self.S_violations()

    def require_S(self):
        bad = self.S_violations()
        if bad:
            raise NotInS(bad)

    def S_prime_violations(self) -> list[str]:
        a, b = self.qp.wplus, self.qp.wminus
        bad = []
        for name, w in (("ω₊", a), ("ω₋", b)):
            if not (w.real > 0 and w.imag < 0):
                bad.append(f"{name} ∉ ℂ₊∩ℍ₋")
        if not (a / b).imag > 0:
            bad.append("ω₊/ω₋ ∉ ℍ₊")
        for name, k in self._k_orbits():
            if not k.real < 0:
                bad.append(f"{name} ∉ ℂ₋ (Re {name} = {k.real:.6g})")
            if not (k / a).real > 0:
                bad.append(f"{name} ∉ ω₊ℂ₊")
            if not ((k + a) / b).imag > 0:
                bad.append(f"{name} ∉ ω₋ℍ₊ − ω₊")
        return bad

    def in_S_prime(self) -> bool:
        return not self.S_prime_violations()

    def require_S_prime(self):
        bad = self.S_prime_violations()
        if bad:
            raise NotInSPrime(bad)

    # bases attached to a root with decoration u and multiplicity k
    def q_alpha(self, r: RootInfo) -> complex:
        return cmath.exp(2j * math.pi * self.qp.wplus / (r.u * self.qp.wminus))

    def qtilde_alpha(self, r: RootInfo) -> complex:
        return cmath.exp(-2j * math.pi * r.u * self.qp.wminus / self.qp.wplus)

    def t_alpha(self, r: RootInfo) -> complex:
        return cmath.exp(-2j * math.pi * r.k / (r.u * self.qp.wminus))

    def ttilde_alpha(self, r: RootInfo) -> complex:
        return cmath.exp(-2j * math.pi * r.k / self.qp.wplus)

    def to_dict(self) -> dict:
        return {"family": self.rs.family, "rank": self.rs.rank, "case": self.case.value,
                "omega_plus": _cdict(self.qp.wplus), "omega_minus": _cdict(self.qp.wminus),
                "k_short": _cdict(self.k.value_short), "k_long": _cdict(self.k.value_long)}


def _cdict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


class LogGammaProduct:
    """Accumulates sign * log G(w+, w-; arg) terms; exactly cancelling pairs are
    dropped before evaluation so removable 0/0 factors never get evaluated."""

    def __init__(self):
        self.terms: dict[tuple, int] = {}

    def add(self, wplus, wminus, arg, sign=1):
        key = (complex(wplus), complex(wminus), complex(arg))
        self.terms[key] = self.terms.get(key, 0) + sign

    def log(self) -> complex:
        total = 0j
        groups: dict[tuple, list] = {}
        for (a, b, z), s in self.terms.items():
            if s:
                groups.setdefault((a, b), []).append((z, s))
        for (a, b), items in groups.items():
            zs = np.array([z for z, _ in items])
            ss = np.array([s for _, s in items])
            total += complex(np.sum(ss * evaluator(a, b).log(zs)))
        return total


def _as_batch(v, dim):
    v = np.asarray(v)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    if v.shape[-1] != dim:
        raise ValueError(f"expected vectors of dimension {dim}, got {v.shape[-1]}")
    return v, single


def _log2sinh(x):
    """log(2 sinh x) for complex arrays, overflow-free (branch irrelevant)."""
    x = np.asarray(x, dtype=complex)
    flip = x.real < 0
    s = np.where(flip, -x, x)
    with np.errstate(divide="ignore"):
        out = s + np.log(-np.expm1(-2 * s))
    return np.where(flip, out + 1j * math.pi, out)


def _log2cosh(x):
    x = np.asarray(x, dtype=complex)
    s = np.where(x.real >= 0, x, -x)
    return s + np.log1p(np.exp(-2 * s))


def _finish(logs, single):
    with np.errstate(over="ignore"):
        out = np.exp(logs)
    return complex(out[0]) if single else out


def log_integrand_I(pp: ParameterPoint, v) -> np.ndarray:
    v, _ = _as_batch(v, pp.rs.dim)
    a, b = pp.qp.wplus, pp.qp.wminus
    total = np.zeros(v.shape[0], dtype=complex)
    for r in pp.positive:
        ev = evaluator(a, r.u * b)
        x = v @ r.alpha_prime
        xs = np.concatenate([x, -x])
        num = ev.log(xs + 1j * r.omega_alpha)
        den = ev.log(xs + 1j * (r.k + r.omega_alpha))
        d = num - den
        total += d[: len(x)] + d[len(x):]
    return total


def integrand_I(pp: ParameterPoint, v):
    """prod over all roots of G_a(<a',v> + i w_a) / G_a(<a',v> + i(k_a + w_a))."""
    v, single = _as_batch(v, pp.rs.dim)
    return _finish(log_integrand_I(pp, v), single)


def log_integrand_I_alt(pp: ParameterPoint, v) -> np.ndarray:
    v, _ = _as_batch(v, pp.rs.dim)
    a, b = pp.qp.wplus, pp.qp.wminus
    total = np.zeros(v.shape[0], dtype=complex)
    for r in pp.positive:
        ev = evaluator(a, r.u * b)
        x = v @ r.alpha_prime
        y = v @ r.alpha
        shift = -1j * (r.k + r.omega_alpha)
        g = ev.log(np.concatenate([x + shift, -x + shift]))
        total += (_log2sinh(math.pi * x / a) + _log2sinh(math.pi * y / b)
                  + g[: len(x)] + g[len(x):])
    return total


def integrand_I_alt(pp: ParameterPoint, v):
    """Same integrand written over positive roots with explicit sinh factors;
    it has no gamma zeros on the walls, so it is the one used for quadrature."""
    v, single = _as_batch(v, pp.rs.dim)
    return _finish(log_integrand_I_alt(pp, v), single)


def density_Delta(pp: ParameterPoint, v, eps: float = 1e-17, check: bool = True):
    """prod over all roots of (e(<a,v>); q_a) / (t_a e(<a,v>); q_a)."""
    if check:
        pp.require_S_prime()
    v, single = _as_batch(v, pp.rs.dim)
    out = np.ones(v.shape[0], dtype=complex)
    for r in pp.positive:
        q, t = pp.q_alpha(r), pp.t_alpha(r)
        for sgn in (1, -1):
            e = np.exp(2j * math.pi * sgn * (v @ r.alpha))
            out *= qpoch_ratio(e, t * e, q, eps)
    return complex(out[0]) if single else out


def _qtilde_power(pp: ParameterPoint, r: RootInfo, z):
    return np.exp(-2j * math.pi * r.u * pp.qp.wminus * np.asarray(z) / pp.qp.wplus)


def density_DeltaTilde(pp: ParameterPoint, v, eps: float = 1e-17, check: bool = True):
    """prod over all roots of (t~_a q~_a^{1+<a,v>}; q~_a) / (q~_a^{1+<a,v>}; q~_a)."""
    if check:
        pp.require_S_prime()
    v, single = _as_batch(v, pp.rs.dim)
    out = np.ones(v.shape[0], dtype=complex)
    for r in pp.positive:
        qt, tt = pp.qtilde_alpha(r), pp.ttilde_alpha(r)
        x = v @ r.alpha
        if np.any(np.abs(x - np.rint(x)) < INTEGRALITY_TOL):
            raise IntegralityViolation("<alpha, v> is an integer for some root")
        for sgn in (1, -1):
            p = _qtilde_power(pp, r, 1 + sgn * x)
            out *= qpoch_ratio(tt * p, p, qt, eps)
    return complex(out[0]) if single else out


def log_constant_K(pp: ParameterPoint) -> complex:
    ab = pp.qp.wplus * pp.qp.wminus
    return sum(-1j * math.pi * r.k * (r.k + 2 * r.omega_alpha) / (r.u * ab) for r in pp.positive)


def constant_K(pp: ParameterPoint) -> complex:
    return cmath.exp(log_constant_K(pp))


def _rhs_product(pp: ParameterPoint, regularized: bool) -> LogGammaProduct:
    a, b = pp.qp.wplus, pp.qp.wminus
    prod = LogGammaProduct()
    for r in pp.positive:
        rr = complex(np.sum(pp.rho * r.coroot))
        w, k, u = r.omega_alpha, r.k, r.u
        prod.add(a, u * b, 1j * (rr + w))
        prod.add(a, u * b, 1j * (rr - w))
        prod.add(a, u * b, 1j * (rr + k + w), -1)
        if regularized:
            if not r.simple:
                prod.add(a, u * b, 1j * (rr - k - w), -1)
        else:
            prod.add(a, u * b, 1j * (rr - k + u * b * r.simple - w), -1)
    return prod


def log_rhs_CMalternative(pp: ParameterPoint) -> complex:
    n = pp.rs.rank
    return (math.log(pp.rs.index_f) + n * cmath.log(pp.qp.wminus)
            + _rhs_product(pp, regularized=False).log())


def rhs_CMalternative(pp: ParameterPoint) -> complex:
    """Closed form of the integral of I over the positive chamber
    (lambda coordinates, unit-volume fundamental domain)."""
    pp.require_S()
    return cmath.exp(log_rhs_CMalternative(pp))


def rhs_thm(pp: ParameterPoint) -> complex:
    """Closed form of the integral of I over all of V, written with the
    regularized product (simple-root denominator factors omitted)."""
    pp.require_S()
    a, b = pp.qp.wplus, pp.qp.wminus
    log_pref = math.log(pp.rs.index_f * pp.rs.weyl_order)
    for r in pp.positive:
        if r.simple:
            log_pref += 0.5 * cmath.log(a * b / r.u)
    return cmath.exp(log_pref + _rhs_product(pp, regularized=True).log())


def _rho_pairing_exp(pp: ParameterPoint, r: RootInfo, period: complex) -> complex:
    rr = complex(np.sum(pp.rho * r.coroot))
    return cmath.exp(-2j * math.pi * rr / period)


def macdonald_N(pp: ParameterPoint, eps: float = 1e-17, check: bool = True) -> complex:
    if check:
        pp.require_S_prime()
    out = complex(pp.rs.weyl_order)
    for r in pp.positive:
        q, t = pp.q_alpha(r), pp.t_alpha(r)
        x = _rho_pairing_exp(pp, r, r.u * pp.qp.wminus)
        out *= qpoch_ratio(x, t * x, q, eps) * qpoch_ratio(q * x, q * x / t, q, eps)
    return out


def macdonald_Ntilde(pp: ParameterPoint, eps: float = 1e-17, check: bool = True) -> complex:
    if check:
        pp.require_S_prime()
    out = complex(pp.rs.index_f)
    for r in pp.positive:
        qt, tt = pp.qtilde_alpha(r), pp.ttilde_alpha(r)
        y = _rho_pairing_exp(pp, r, pp.qp.wplus)
        num2 = (qt if r.simple else 1.0) * y / tt
        if abs(1 - y) < 1e-14 or abs(1 - qt * y) < 1e-14:
            raise NearSingularity("a denominator q-shifted factorial vanishes")
        out *= qpoch_ratio(qt * tt * y, qt * y, qt, eps) * qpoch_ratio(num2, y, qt, eps)
    return out


# ---------------------------------------------------------------------------
# BC-type integral.

@dataclass(frozen=True)
class BCParameters:
    qp: QuasiPeriods
    gamma: tuple
    kappa: complex | None
    rank: int

    def __post_init__(self):
        g = tuple(complex(x) for x in self.gamma)
        if len(g) != 4:
            raise ValueError("exactly four gamma parameters are required")
        object.__setattr__(self, "gamma", g)
        if self.kappa is not None:
            object.__setattr__(self, "kappa", complex(self.kappa))
        elif self.rank > 1:
            raise ValueError("kappa is required for rank > 1")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")

    @property
    def gamma_sum(self) -> complex:
        return sum(self.gamma)

    def violations(self) -> list[str]:
        a, b = self.qp.wplus, self.qp.wminus
        bad = []
        if not (a * b).imag < 0:
            bad.append("Im(ω₊ω₋) < 0 fails")
        for i, g in enumerate(self.gamma, 1):
            if not g.real < 0:
                bad.append(f"γ{i} ∉ ℂ₋ (Re γ{i} = {g.real:.6g})")
        if not ((a + b + self.gamma_sum) / (a * b)).real > 0:
            bad.append("Re((ω₊+ω₋+|γ|)/(ω₊ω₋)) > 0 fails")
        if self.rank > 1:
            kap = self.kappa
            if not kap.real < 0:
                bad.append(f"κ ∉ ℂ₋ (Re κ = {kap.real:.6g})")
            if not (kap / (a * b)).real > 0:
                bad.append("κ ∉ ω₊ω₋ℂ₊")
        return bad

    def in_S_BC(self) -> bool:
        return not self.violations()

    def require_S_BC(self):
        bad = self.violations()
        if bad:
            raise NotInSBC(bad)

    def to_dict(self) -> dict:
        return {"rank": self.rank, "omega_plus": _cdict(self.qp.wplus),
                "omega_minus": _cdict(self.qp.wminus),
                "gamma": [_cdict(g) for g in self.gamma],
                "kappa": None if self.kappa is None else _cdict(self.kappa)}


def bc_short_vectors(n: int) -> np.ndarray:
    e = np.eye(n)
    return np.vstack([e, -e])


def bc_long_vectors(n: int) -> np.ndarray:
    e = np.eye(n)
    out = [s * (e[r] + t * e[q]) for r in range(n) for q in range(r + 1, n)
           for s in (1, -1) for t in (1, -1)]
    return np.array(out).reshape(-1, n)


def log_bc_integrand(bp: BCParameters, v) -> np.ndarray:
    v, _ = _as_batch(v, bp.rank)
    a, b = bp.qp.wplus, bp.qp.wminus
    w = bp.qp.omega
    ev = evaluator(a, b)
    total = np.zeros(v.shape[0], dtype=complex)
    for al in bc_short_vectors(bp.rank):
        x = v @ al
        total += ev.log(x + 1j * w) + ev.log(x + 0.5j * a) + ev.log(x + 0.5j * b)
        for g in bp.gamma:
            total -= ev.log(x + 1j * (w + g))
    for be in bc_long_vectors(bp.rank):
        x = v @ be
        total += ev.log(x + 1j * w) - ev.log(x + 1j * (w + bp.kappa))
    return total


def bc_integrand(bp: BCParameters, v):
    """The BC-type integrand, evaluated factor by factor as displayed."""
    v, single = _as_batch(v, bp.rank)
    return _finish(log_bc_integrand(bp, v), single)


def log_bc_integrand_paired(bp: BCParameters, v) -> np.ndarray:
    """Same integrand with each +-alpha pair collapsed by the reflection,
    product and functional equations: no gamma zeros on the walls."""
    v, _ = _as_batch(v, bp.rank)
    a, b = bp.qp.wplus, bp.qp.wminus
    w = bp.qp.omega
    ev = evaluator(a, b)
    n = v.shape[0]
    total = np.zeros(n, dtype=complex)
    for j in range(bp.rank):
        x = v[:, j]
        total += _log2sinh(2 * math.pi * x / a) + _log2sinh(2 * math.pi * x / b)
        args = [s * x - 1j * (w + g) for g in bp.gamma for s in (1, -1)]
        total += ev.log(np.concatenate(args)).reshape(len(args), n).sum(axis=0)
    e = np.eye(bp.rank)
    positive_long = [e[r] + t * e[q] for r in range(bp.rank) for q in range(r + 1, bp.rank)
                     for t in (1, -1)]
    for be in positive_long:
        x = v @ be
        total += _log2sinh(math.pi * x / a) + _log2sinh(math.pi * x / b)
        sh = -1j * (w + bp.kappa)
        total += ev.log(np.concatenate([x + sh, -x + sh])).reshape(2, n).sum(axis=0)
    return total


def bc_integrand_paired(bp: BCParameters, v):
    v, single = _as_batch(v, bp.rank)
    return _finish(log_bc_integrand_paired(bp, v), single)


def log_bc_rhs(bp: BCParameters) -> complex:
    n = bp.rank
    a, b = bp.qp.wplus, bp.qp.wminus
    w = bp.qp.omega
    kap = bp.kappa if bp.kappa is not None else 0j
    gs = bp.gamma_sum
    prod = LogGammaProduct()
    for j in range(n):
        prod.add(a, b, 1j * (w + kap))
        prod.add(a, b, 1j * (w + (2 * n - j - 2) * kap + gs))
        prod.add(a, b, 1j * (w + (j + 1) * kap), -1)
        for r in range(4):
            for s in range(r + 1, 4):
                prod.add(a, b, 1j * (w + j * kap + bp.gamma[r] + bp.gamma[s]), -1)
    lead = n * math.log(2) + math.lgamma(n + 1) + n * cmath.log(cmath.sqrt(a * b))
    return lead + prod.log()


def bc_rhs(bp: BCParameters) -> complex:
    """Closed-form value of the BC-type integral over R^n."""
    bp.require_S_BC()
    return cmath.exp(log_bc_rhs(bp))


@dataclass(frozen=True)
class BCSpecialization:
    params: BCParameters
    prefactor: int
    period_map: str
    source: ParameterPoint = field(repr=False)


def bc_specialize(pp: ParameterPoint) -> BCSpecialization:
    """Express the constant term integral of a type A1, B or C point as a
    multiple of the BC-type integral: int_V I dv = prefactor * J_BC."""
    pp.require_S()
    fam, n, case = pp.rs.family, pp.rs.rank, pp.case
    a, b = pp.qp.wplus, pp.qp.wminus
    w = pp.qp.omega
    ks, kl = pp.k.value_short, pp.k.value_long
    if fam == "A" and n == 1:
        if case is not IdentityCase.I:
            raise UnsupportedCombination("A1 is only mapped to the BC integral in case (i)")
        bp = BCParameters(pp.qp, (ks, -a / 2, -b / 2, -w), None, 1)
        spec = BCSpecialization(bp, 1, "(w+, w-) -> (w+, w-)", pp)
    elif fam == "B" and case is IdentityCase.I:
        bp = BCParameters(pp.qp, (ks, -a / 2, -b / 2, -w), kl, n)
        spec = BCSpecialization(bp, 1, "(w+, w-) -> (w+, w-)", pp)
    elif fam == "B":
        qp2 = QuasiPeriods(2 * a, b)
        bp = BCParameters(qp2, (ks, ks - a, -b / 2, -a - b / 2), 2 * kl, n)
        spec = BCSpecialization(bp, 1, "(w+, w-) -> (2 w+, w-)", pp)
    elif fam == "C" and case is IdentityCase.I:
        bp = BCParameters(pp.qp, (kl / 2, kl / 2 - a / 2, kl / 2 - b / 2, kl / 2 - w), ks, n)
        spec = BCSpecialization(bp, 2, "(w+, w-) -> (w+, w-)", pp)
    elif fam == "C":
        bp = BCParameters(pp.qp, (kl, kl - b / 2, -a / 2, -w), ks, n)
        spec = BCSpecialization(bp, 2, "(w+, w-) -> (w+, w-)", pp)
    else:
        raise UnsupportedCombination(f"no BC specialization for {pp.rs.name}")
    return spec
