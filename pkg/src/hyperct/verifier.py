"""End-to-end numerical checks of each identity, returning structured reports."""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionTooLarge, HyperCTError, IntegralityViolation, NearSingularity,
                     NonConvergence)
from .hypergamma import QuasiPeriods, gamma, log_shintani_product
from .identities import (BCParameters, BCSpecialization, ParameterPoint, bc_rhs,
                         constant_K, density_Delta, density_DeltaTilde, integrand_I,
                         log_bc_integrand_paired, log_integrand_I_alt, macdonald_N,
                         macdonald_Ntilde, rhs_CMalternative)
from .numerics import (QuadratureSpec, integrate_box_nd, lattice_sum, monte_carlo_box,
                       trapezoid_periodic_nd)

DEFAULT_TOL = {1: 1e-6, 2: 1e-4, 3: 1e-3}
SMALL_RHS = 1e-6
NEAR_INTEGER = 1e-3


@dataclass
class VerificationReport:
    identity: str
    params: dict
    lhs: complex
    rhs: complex
    tol: float
    diagnostics: dict = field(default_factory=dict)
    wall_ms: float = 0.0
    error: str | None = None

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        return self.abs_err / abs(self.rhs) if self.rhs != 0 else math.inf

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if not (np.isfinite(self.lhs) and np.isfinite(self.rhs)):
            return False
        err = self.abs_err if abs(self.rhs) < SMALL_RHS else self.rel_err
        return bool(err <= self.tol)

    def to_dict(self) -> dict:
        diag = dict(self.diagnostics)
        if self.error is not None:
            diag["error"] = self.error
        return {"identity": self.identity, "params": self.params,
                "lhs": {"re": self.lhs.real, "im": self.lhs.imag},
                "rhs": {"re": self.rhs.real, "im": self.rhs.imag},
                "abs_err": self.abs_err, "rel_err": self.rel_err, "tol": self.tol,
                "passed": self.passed, "diagnostics": diag, "wall_ms": self.wall_ms}

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.error is not None:
            return f"[{status}] {self.identity}: {self.error}"
        return (f"[{status}] {self.identity}: lhs={_fmt(self.lhs)} rhs={_fmt(self.rhs)} "
                f"rel_err={self.rel_err:.3e} tol={self.tol:.1e} ({self.wall_ms:.0f} ms)")


def _fmt(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = 1000 * (time.perf_counter() - self.start)


def default_tol(rank: int) -> float:
    return DEFAULT_TOL.get(rank, 1e-3)


def default_spec(rank: int) -> QuadratureSpec:
    """Cubature settings matched to the default tolerance of each rank."""
    return QuadratureSpec(rel_tol=default_tol(rank) * 1e-2)


# ---------------------------------------------------------------------------
# hyperbolic constant term

def _probe_grid(upper):
    axes = [np.linspace(0, r, 5) for r in upper]
    return np.array(list(itertools.product(*axes)))


def chamber_integral(pp: ParameterPoint, spec: QuadratureSpec, seed: int = 0):
    """Integral of I over the positive chamber in lambda coordinates.

    Returns (value, IntegralResult, diagnostics).
    """
    rs = pp.rs
    n = rs.rank
    ab = pp.qp.wplus * pp.qp.wminus
    c = np.array([(-np.sum(pp.rho * w) / ab).real for w in rs.fundamental_coweights])
    if np.any(c >= 0):
        raise NonConvergence("integrand does not decay along every coweight direction")
    probe = _probe_grid(2 / np.abs(c))
    probe = probe[np.all(probe > 0, axis=1)]
    logs = log_integrand_I_alt(pp, rs.to_ambient(probe))
    # normalise by the largest sampled value so abs_tol is a relative floor
    log_scale = float(np.max(logs.real))
    bound = np.exp(logs.real - log_scale - 4 * math.pi * (probe @ c))
    c_est = float(np.max(bound))
    radii = spec.truncation_safety * np.log(spec.abs_tol / (10 * c_est)) / (4 * math.pi * c)
    radii = np.maximum(radii, 1e-3)

    def f(lam):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(log_integrand_I_alt(pp, rs.to_ambient(lam)) - log_scale)

    diag = {"truncation_radii": radii.tolist(), "c_est": c_est, "decay_rates": c.tolist(),
            "probe_grid": f"5^{n} points on [0, 2/|c_j|]", "log_scale": log_scale}
    if n <= 3:
        res = integrate_box_nd(f, np.zeros(n), radii, spec)
        if not res.converged:
            raise NonConvergence("cubature did not reach its tolerance", partial=res.value)
        diag.update(res.diagnostics)
        diag["mode"] = "cubature"
    else:
        res = monte_carlo_box(f, np.zeros(n), radii, spec, seed)
        diag.update(res.diagnostics)
        diag["mode"] = "monte-carlo"
    diag["evaluations"] = res.evaluations
    diag["error_estimate"] = res.error_estimate * math.exp(log_scale)
    return res.value * math.exp(log_scale), res, diag


def verify_hyperbolic_ct(pp: ParameterPoint, spec: QuadratureSpec | None = None,
                         tol: float | None = None, seed: int = 0) -> VerificationReport:
    """Integral of I over the positive chamber against the closed form."""
    pp.require_S()
    n = pp.rs.rank
    spec = spec or default_spec(n)
    with _Timer() as t:
        rhs = rhs_CMalternative(pp)
        lhs, res, diag = chamber_integral(pp, spec, seed)
    if n > 3:
        tol = 3 * diag["error_estimate"] / abs(rhs)
    rep = VerificationReport("hyperbolic", pp.to_dict(), lhs, rhs,
                             tol if tol is not None else default_tol(n), diag, t.ms)
    return rep


# ---------------------------------------------------------------------------
# q-constant term, q-sum, splitting

def verify_q_constant_term(pp: ParameterPoint, grid: int = 64,
                           tol: float = 1e-7) -> VerificationReport:
    """Periodic trapezoid rule for the integral of Delta over a fundamental
    domain (lambda coordinates) against N."""
    pp.require_S_prime()
    n = pp.rs.rank
    if n > 3:
        raise DimensionTooLarge("q-constant term check supports rank <= 3")
    with _Timer() as t:
        rhs = macdonald_N(pp)

        def f(lam):
            return density_Delta(pp, pp.rs.to_ambient(lam))

        coarse = trapezoid_periodic_nd(f, grid, n)
        fine = trapezoid_periodic_nd(f, 2 * grid, n)
    diff = abs(fine - coarse)
    diag = {"grid": grid, "grid_fine": 2 * grid, "coarse": [coarse.real, coarse.imag],
            "grid_difference": diff, "grid_converged": bool(diff <= tol * max(abs(fine), 1e-300))}
    rep = VerificationReport("qct", pp.to_dict(), fine, rhs, tol, diag, t.ms)
    if not diag["grid_converged"]:
        rep.error = f"trapezoid rule not converged: |T(M)-T(2M)| = {diff:.3g}"
    return rep


def default_base_point(pp: ParameterPoint, seed: int = 0) -> np.ndarray:
    """Generic base point with every <alpha, v> at least 1e-3 from Z."""
    rs = pp.rs
    lam = np.array([0.37, 0.21, 0.13, 0.29][: rs.rank] + [0.17] * max(0, rs.rank - 4))
    rng = np.random.default_rng(seed)
    for _ in range(100):
        v = rs.to_ambient(lam)
        x = rs.roots @ v
        if np.all(np.abs(x - np.rint(x)) >= NEAR_INTEGER):
            return v
        lam = rng.random(rs.rank)
    raise IntegralityViolation("could not find a generic base point")


def _q_sum(pp, base, tail_tol):
    res = lattice_sum(lambda pts: density_DeltaTilde(pp, base + pts),
                      pp.rs.fundamental_coweights, tail_tol=tail_tol)
    return res.value, res.diagnostics["radius"], res.evaluations


def verify_q_sum(pp: ParameterPoint, base_v=None, tail_tol: float = 1e-14,
                 tol: float = 1e-7) -> VerificationReport:
    """Sum of Delta-tilde over the coweight lattice against N-tilde, at two base points."""
    pp.require_S_prime()
    rs = pp.rs
    base = default_base_point(pp) if base_v is None else np.asarray(base_v, dtype=float)
    x = rs.roots @ base
    if np.any(np.abs(x - np.rint(x)) < NEAR_INTEGER):
        raise IntegralityViolation("base point has <alpha, v> within 1e-3 of an integer")
    with _Timer() as t:
        rhs = macdonald_Ntilde(pp)
        scale = max(abs(rhs), 1e-300)
        lhs, radius, evals = _q_sum(pp, base, tail_tol * scale)
        base2 = base + 0.3 * rs.fundamental_coweights[0]
        lhs2, radius2, evals2 = _q_sum(pp, base2, tail_tol * scale)
    shift_err = abs(lhs2 - lhs) / scale
    diag = {"lattice_radius": radius, "lattice_radius_shifted": radius2,
            "evaluations": evals + evals2, "base_v": base.tolist(),
            "shifted_lhs": [lhs2.real, lhs2.imag], "v_independence_rel_err": shift_err}
    rep = VerificationReport("qsum", pp.to_dict(), lhs, rhs, tol, diag, t.ms)
    if shift_err > tol:
        rep.error = f"sum depends on the base point (rel. difference {shift_err:.3g})"
    return rep


def verify_split(pp: ParameterPoint, count: int = 100, seed: int = 0,
                 tol: float = 1e-8) -> VerificationReport:
    """Pointwise I(i w- v) = K Delta(v) Delta~(v) at seeded random real v."""
    pp.require_S_prime()
    rs = pp.rs
    rng = np.random.default_rng(seed)
    b = pp.qp.wminus
    K = constant_K(pp)
    worst = (-1.0, 0j, 0j)
    worst_rel = 0.0
    resampled = 0
    with _Timer() as t:
        for _ in range(count):
            for attempt in range(10):
                v = rs.to_ambient(rng.random(rs.rank) * 2 - 1)
                try:
                    lhs = integrand_I(pp, 1j * b * v)
                    rhs = K * density_Delta(pp, v) * density_DeltaTilde(pp, v)
                    break
                except (NearSingularity, IntegralityViolation):
                    resampled += 1
            else:
                raise NearSingularity("10 consecutive samples hit the singular locus")
            res = abs(lhs - rhs) / (1 + abs(lhs))
            if abs(rhs) > 0:
                worst_rel = max(worst_rel, abs(lhs - rhs) / abs(rhs))
            if res > worst[0]:
                worst = (res, lhs, rhs)
    diag = {"count": count, "seed": seed, "max_residual": worst[0],
            "max_relative_residual": worst_rel, "resampled": resampled}
    rep = VerificationReport("split", pp.to_dict(), worst[1], worst[2], tol, diag, t.ms)
    if worst[0] > tol:
        rep.error = f"max residual {worst[0]:.3g} exceeds {tol:g}"
    return rep


# ---------------------------------------------------------------------------
# Shintani product

def verify_shintani(qp: QuasiPeriods, count: int = 100, seed: int = 0,
                    tol: float = 1e-10) -> VerificationReport:
    """Product formula against the integral representation at random strip points."""
    rng = np.random.default_rng(seed)
    height = qp.omega.real
    worst = (-1.0, 0j, 0j)
    with _Timer() as t:
        # the product formula checks its own precondition first
        log_shintani_product(qp, 0j)
        for _ in range(count):
            z = complex(rng.uniform(-3, 3), rng.uniform(-0.95, 0.95) * height)
            g = gamma(qp, z)
            s = complex(np.exp(log_shintani_product(qp, z)))
            dev = abs(s - g.value) / abs(g.value)
            if dev > worst[0]:
                worst = (dev, s, g.value)
    params = {"omega_plus": {"re": qp.wplus.real, "im": qp.wplus.imag},
              "omega_minus": {"re": qp.wminus.real, "im": qp.wminus.imag}}
    diag = {"count": count, "seed": seed, "max_relative_deviation": worst[0]}
    rep = VerificationReport("shintani", params, worst[1], worst[2], tol, diag, t.ms)
    if worst[0] > tol:
        rep.error = f"max deviation {worst[0]:.3g} exceeds {tol:g}"
    return rep


# ---------------------------------------------------------------------------
# BC-type integral

def _bc_log_f(bp: BCParameters, n: int):
    """Integrand on the sorted cone v1 >= ... >= vn >= 0 in coordinates
    (v1, t2, ..., tn) with v_j = v1 * t2 * ... * tj (Jacobian included)."""

    def logf(p):
        v1 = p[:, :1]
        if n == 1:
            v = v1
            jac = np.zeros(len(p))
        else:
            ratios = np.cumprod(p[:, 1:], axis=1)
            v = np.hstack([v1, v1 * ratios])
            with np.errstate(divide="ignore"):
                jac = np.sum(np.log(v[:, :-1]), axis=1)
        return log_bc_integrand_paired(bp, v) + jac

    return logf


def _bc_radius(logf, n, abs_tol, safety):
    """Truncation radius for v1: first scan point past which the sampled
    integrand on the face v1 = r stays below abs_tol/10 of its peak."""
    t = np.linspace(0.05, 0.95, 7)
    inner = np.array(list(itertools.product(t, repeat=n - 1))) if n > 1 else np.zeros((1, 0))
    radii = 0.25 * np.arange(1, 161)
    pts = np.hstack([np.repeat(radii, len(inner))[:, None], np.tile(inner, (len(radii), 1))])
    face = logf(pts).real.reshape(len(radii), len(inner)).max(axis=1)
    peak = float(face.max())
    above = np.nonzero(face >= peak + math.log(abs_tol / 10))[0]
    last = int(above[-1])
    if last >= len(radii) - 1:
        raise NonConvergence("BC integrand has not decayed by v1 = 40")
    span = radii[last + 1] - radii[max(last - 3, 0)]
    rate = float(face[max(last - 3, 0)] - face[last + 1]) / span
    return safety * float(radii[last + 1]), peak, rate


def bc_integral(bp: BCParameters, spec: QuadratureSpec):
    n = bp.rank
    logf = _bc_log_f(bp, n)
    radius, log_scale, rate = _bc_radius(logf, n, spec.abs_tol, spec.truncation_safety)

    def f(p):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(logf(p) - log_scale)

    res = integrate_box_nd(f, np.zeros(n), np.array([radius] + [1.0] * (n - 1)), spec)
    if not res.converged:
        raise NonConvergence("cubature did not reach its tolerance", partial=res.value)
    symmetry = 2 ** n * math.factorial(n)
    value = symmetry * res.value * math.exp(log_scale)
    diag = {"truncation_radius": radius, "sampled_decay_rate": rate,
            "symmetry_factor": symmetry, "evaluations": res.evaluations, **res.diagnostics}
    return value, diag


def verify_bc(bp: BCParameters, spec: QuadratureSpec | None = None, tol: float | None = None,
              source: BCSpecialization | None = None) -> VerificationReport:
    """Integral of the BC-type integrand over R^n against its closed form.

    With ``source`` (from :func:`bc_specialize`) the constant term integral of
    the original root system is also computed and compared with
    prefactor * J_BC.
    """
    bp.require_S_BC()
    n = bp.rank
    if n > 2:
        raise DimensionTooLarge("rank > 2 unsupported for deterministic bc")
    spec = spec or default_spec(n)
    tol = tol if tol is not None else default_tol(n)
    with _Timer() as t:
        rhs = bc_rhs(bp)
        lhs, diag = bc_integral(bp, spec)
        if source is not None:
            pp = source.source
            ct, _, _ = chamber_integral(pp, spec)
            full = pp.rs.weyl_order * ct
            mapped = source.prefactor * lhs
            diag["source"] = pp.to_dict()
            diag["prefactor"] = source.prefactor
            diag["period_map"] = source.period_map
            diag["ct_full_integral"] = [full.real, full.imag]
            diag["specialization_rel_err"] = abs(mapped - full) / abs(full)
    rep = VerificationReport("bc", bp.to_dict(), lhs, rhs, tol, diag, t.ms)
    if source is not None and diag["specialization_rel_err"] > tol:
        rep.error = (f"prefactor * J_BC differs from the constant term integral "
                     f"(rel. {diag['specialization_rel_err']:.3g})")
    return rep


# ---------------------------------------------------------------------------
# sweeps

def worker_count() -> int:
    raw = os.environ.get("HYPERCT_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def _error_report(identity: str, params: dict, exc: Exception) -> VerificationReport:
    return VerificationReport(identity, params, complex("nan"), complex("nan"), math.nan,
                              {}, 0.0, f"{type(exc).__name__}: {exc}")


def sweep(tasks) -> list[VerificationReport]:
    """Run ``(identity, params, thunk)`` tasks; reports keep the input order
    and per-task failures are captured rather than raised."""
    tasks = list(tasks)

    def run(task):
        identity, params, thunk = task
        try:
            return thunk()
        except (HyperCTError, ValueError) as exc:
            return _error_report(identity, params, exc)

    workers = min(worker_count(), max(1, len(tasks)))
    if workers == 1:
        return [run(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, tasks))
