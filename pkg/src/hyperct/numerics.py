"""Numerical kernels: half-line quadrature, box cubature, periodic trapezoid
rule, Monte-Carlo fallback and truncated lattice sums.

Every integrand passed to these kernels is vectorised: it receives a numpy
array of sample points and returns an array of (complex) values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLarge, InvalidDecay, NonConvergence

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 100_000
    truncation_safety: float = 1.0
    mc_samples: int = 100_000

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not 0 < self.abs_tol < 1:
            raise ValueError("abs_tol must lie in (0, 1)")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")
        if self.truncation_safety < 1:
            raise ValueError("truncation_safety must be >= 1")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


@dataclass
class IntegralResult:
    value: complex
    error_estimate: float
    evaluations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.value = complex(self.value)
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise NonConvergence("integral evaluated to a non-finite value")


def finite_complex(z) -> complex:
    """Coerce to a Python complex, rejecting NaN/Inf components."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex value {z!r}")
    return z


# Gauss-Kronrod 7/15 (QUADPACK qk15 constants)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_K15_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K15_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G7_WEIGHTS = np.zeros(15)
_G7_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G7_WEIGHTS[[13, 11, 9]] = _WG[:3]
_G7_WEIGHTS[7] = _WG[3]


def _gk15_panels(f, a, b):
    """Apply the 7/15 Gauss-Kronrod pair on each panel [a_i, b_i]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = mid[:, None] + half[:, None] * _K15_NODES[None, :]
    vals = np.asarray(f(y.ravel()), dtype=complex).reshape(y.shape)
    kron = half * (vals @ _K15_WEIGHTS)
    gauss = half * (vals @ _G7_WEIGHTS)
    return kron, np.abs(kron - gauss), np.abs(vals).max(axis=1) * np.abs(half)


def adaptive_gk(f, a: float, b: float, tol: float, max_panels: int,
                initial_panels: int = 8):
    """Globally adaptive 7/15 Gauss-Kronrod quadrature on a finite interval.

    Returns ``(value, error, evaluations, converged, panels)``.
    """
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    vals, errs, scale = _gk15_panels(f, lo, hi)
    evaluations = 15 * len(lo)
    while True:
        total = vals.sum()
        err = errs.sum()
        if err <= tol:
            return total, float(err), evaluations, True, len(lo)
        # panels already at roundoff level are not worth splitting
        floor = 50 * EPS * scale
        split = (errs > tol / len(lo)) & (errs > floor)
        if not split.any():
            return total, float(err), evaluations, err <= 10 * tol, len(lo)
        if len(lo) + split.sum() > max_panels:
            raise NonConvergence(
                f"adaptive quadrature exceeded {max_panels} subdivisions",
                partial=(total, float(err)))
        m = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], m])
        new_hi = np.concatenate([m, hi[split]])
        nv, ne, ns = _gk15_panels(f, new_lo, new_hi)
        evaluations += 15 * len(new_lo)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        scale = np.concatenate([scale[keep], ns])


def integrate_halfline(f, spec: QuadratureSpec = DEFAULT_SPEC, decay_rate: float = 1.0,
                       *, series_integral=None, split: float = 1e-2) -> IntegralResult:
    """Integrate ``f`` over (0, inf).

    ``f`` must be bounded by ``C exp(-decay_rate * y)`` for large ``y``.  When
    ``series_integral`` is given it must return the integral of ``f`` over
    (0, split]; this is how callers bypass a removable singularity at zero
    that cannot be evaluated in floating point.
    """
    if not decay_rate > 0 or not math.isfinite(decay_rate):
        raise InvalidDecay(f"decay_rate must be positive, got {decay_rate}")
    start = split if series_integral is not None else 0.0

    # tail constant: C_est = max |f(y)| exp(decay_rate*y) over probe points
    probe = start + np.geomspace(0.25, 40.0, 48) / decay_rate
    c_est = float(np.max(np.abs(np.asarray(f(probe), dtype=complex)) * np.exp(decay_rate * probe)))
    c_est = max(c_est, EPS)
    target = spec.abs_tol / 10
    upper = math.log(max(c_est / (decay_rate * target), 1.0)) / decay_rate
    upper = max(upper * spec.truncation_safety, start + 1.0)

    head = complex(series_integral(split)) if series_integral is not None else 0j
    tol_guess = spec.tolerance(head)
    value, err, n_eval, ok, panels = adaptive_gk(
        f, start, upper, tol_guess, spec.max_subdivisions,
        initial_panels=max(8, int(math.ceil((upper - start) * decay_rate))))
    total = head + value
    tol = spec.tolerance(total)
    if err > tol:
        # refine once more against the final relative target
        value, err, n_eval2, ok, panels = adaptive_gk(
            f, start, upper, tol, spec.max_subdivisions,
            initial_panels=max(8, panels))
        n_eval += n_eval2
        total = head + value
    err += target
    return IntegralResult(total, err, n_eval, bool(ok and err <= max(tol, 10 * spec.abs_tol)),
                          {"truncation": upper, "panels": panels, "c_est": c_est})


def _gauss_legendre_box(order: int, n: int):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = np.array(list(itertools.product(x, repeat=n)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=n))), axis=1)
    return nodes, weights


_BOX_ORDER = {1: 10, 2: 7, 3: 5}


def integrate_box_nd(f, lower, upper, spec: QuadratureSpec = DEFAULT_SPEC,
                     *, initial_splits: int = 1) -> IntegralResult:
    """Adaptive tensor Gauss-Legendre cubature over an axis-aligned box.

    Each cell is integrated with orders p and 2p; their difference is the
    cell error. The worst cells are split dyadically until the summed error
    meets the tolerance. Cells are kept in creation order so the result is
    reproducible bit for bit.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    n = lower.size
    if n > 3:
        raise DimensionTooLarge(f"deterministic cubature supports n <= 3, got {n}; use monte_carlo_box")
    if upper.shape != lower.shape or np.any(upper <= lower):
        raise ValueError("box bounds must satisfy lower < upper componentwise")
    p = _BOX_ORDER[n]
    lo_nodes, lo_w = _gauss_legendre_box(p, n)
    hi_nodes, hi_w = _gauss_legendre_box(2 * p, n)
    n_lo, n_hi = len(lo_w), len(hi_w)

    def evaluate(c_lo, c_hi):
        mid = 0.5 * (c_lo + c_hi)
        half = 0.5 * (c_hi - c_lo)
        vol = np.prod(half, axis=1)
        pts_lo = mid[:, None, :] + half[:, None, :] * lo_nodes[None]
        pts_hi = mid[:, None, :] + half[:, None, :] * hi_nodes[None]
        pts = np.concatenate([pts_lo.reshape(-1, n), pts_hi.reshape(-1, n)])
        vals = np.asarray(f(pts), dtype=complex)
        k = len(c_lo)
        v_lo = vals[: k * n_lo].reshape(k, n_lo) @ lo_w * vol
        v_hi = vals[k * n_lo:].reshape(k, n_hi) @ hi_w * vol
        return v_hi, np.abs(v_hi - v_lo)

    # initial grid of cells
    g = max(1, initial_splits)
    axes = [np.linspace(lower[i], upper[i], g + 1) for i in range(n)]
    idx = np.array(list(itertools.product(range(g), repeat=n)))
    c_lo = np.stack([axes[i][idx[:, i]] for i in range(n)], axis=1)
    c_hi = np.stack([axes[i][idx[:, i] + 1] for i in range(n)], axis=1)
    vals, errs = evaluate(c_lo, c_hi)
    evaluations = len(c_lo) * (n_lo + n_hi)
    corners = np.array(list(itertools.product((0, 1), repeat=n)))
    while True:
        total = vals.sum()
        err = float(errs.sum())
        tol = spec.tolerance(total)
        if err <= tol:
            break
        worst = errs.max()
        floor = 50 * EPS * np.abs(vals)
        split = errs >= 0.25 * worst
        split &= errs > floor
        if not split.any():
            break
        if len(errs) + split.sum() * (2 ** n - 1) > spec.max_subdivisions:
            raise NonConvergence(
                f"cubature exceeded {spec.max_subdivisions} cells (error {err:.3g} > {tol:.3g})",
                partial=(complex(total), err))
        s_lo, s_hi = c_lo[split], c_hi[split]
        mid = 0.5 * (s_lo + s_hi)
        # 2^n dyadic children per split cell, ordered by parent then corner
        ch_lo = np.where(corners[None, :, :] == 0, s_lo[:, None, :], mid[:, None, :]).reshape(-1, n)
        ch_hi = np.where(corners[None, :, :] == 0, mid[:, None, :], s_hi[:, None, :]).reshape(-1, n)
        nv, ne = evaluate(ch_lo, ch_hi)
        evaluations += len(ch_lo) * (n_lo + n_hi)
        keep = ~split
        c_lo = np.concatenate([c_lo[keep], ch_lo])
        c_hi = np.concatenate([c_hi[keep], ch_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
    return IntegralResult(total, err, evaluations, err <= spec.tolerance(total),
                          {"cells": len(errs), "order": p})


def monte_carlo_box(f, lower, upper, spec: QuadratureSpec = DEFAULT_SPEC,
                    seed: int = 0) -> IntegralResult:
    """Plain Monte-Carlo estimate with its standard error (any dimension)."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if upper.shape != lower.shape or np.any(~np.isfinite(lower)) or np.any(~np.isfinite(upper)) \
            or np.any(upper <= lower):
        raise ValueError("monte_carlo_box needs a finite, non-degenerate box")
    rng = np.random.default_rng(seed)
    n = spec.mc_samples
    pts = lower + (upper - lower) * rng.random((n, lower.size))
    vals = np.asarray(f(pts), dtype=complex)
    vol = float(np.prod(upper - lower))
    mean = vals.mean()
    if n > 1:
        stderr = vol * math.sqrt((np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / n)
    else:
        stderr = math.inf
    return IntegralResult(vol * mean, stderr, n, True, {"seed": seed, "standard_error": stderr})


def trapezoid_periodic_nd(f, grid_per_axis: int, n: int = 1) -> complex:
    """Mean of a 1-periodic function of n variables on the uniform M^n grid."""
    m = int(grid_per_axis)
    if m < 2:
        raise ValueError("grid_per_axis must be >= 2")
    ax = np.arange(m) / m
    pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    vals = np.asarray(f(pts), dtype=complex)
    return complex(vals.sum() / vals.size)


def _shell(radius: int, n: int) -> np.ndarray:
    """Integer vectors with max-norm exactly ``radius``."""
    if radius == 0:
        return np.zeros((1, n), dtype=int)
    rng = np.arange(-radius, radius + 1)
    cube = np.array(list(itertools.product(rng, repeat=n)))
    return cube[np.abs(cube).max(axis=1) == radius]


def lattice_sum(f, generators, radius: int = 0, tail_tol: float = 1e-12,
                max_radius: int = 2000, min_radius: int = 2) -> IntegralResult:
    """Sum ``f`` over the lattice spanned by ``generators``, shell by shell.

    Shells are max-norm shells in the coefficient space. Summation stops at
    the first radius >= max(radius, min_radius) whose shell contributes less
    than ``tail_tol``. ``f`` receives ambient coordinates of lattice points.
    """
    gens = np.atleast_2d(np.asarray(generators, dtype=float))
    n = gens.shape[0]
    if np.linalg.matrix_rank(gens) < n:
        raise ValueError("lattice generators must be linearly independent")
    total = 0j
    evaluations = 0
    r = 0
    last = math.inf
    while True:
        coeffs = _shell(r, n)
        contrib = complex(np.sum(np.asarray(f(coeffs @ gens), dtype=complex)))
        evaluations += len(coeffs)
        total += contrib
        last = abs(contrib)
        if r >= max(radius, min_radius) and last < tail_tol:
            break
        r += 1
        if r > max_radius:
            raise NonConvergence(f"lattice sum not converged at radius {max_radius} "
                                 f"(last shell {last:.3g})", partial=total)
    return IntegralResult(total, last, evaluations, True, {"radius": r})
