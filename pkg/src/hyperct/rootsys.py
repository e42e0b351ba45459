"""Irreducible reduced root systems with short roots of squared length 2."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, NotARoot, UnsupportedFamily, ZeroVector

TOL = 1e-12
SQ2 = math.sqrt(2.0)


class IdentityCase(Enum):
    """Decoration u_alpha: case I uses u = 1, case II uses u = 2/|alpha|^2."""

    I = "i"
    II = "ii"

    @classmethod
    def parse(cls, text) -> "IdentityCase":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown case {text!r} (expected 'i' or 'ii')")


@dataclass(frozen=True)
class Multiplicity:
    """Multiplicity function: one complex value per root length."""

    value_short: complex
    value_long: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "value_short", complex(self.value_short))
        long = self.value_short if self.value_long is None else complex(self.value_long)
        object.__setattr__(self, "value_long", long)

    def of(self, rs: "RootSystemData", alpha) -> complex:
        return self.value_long if rs.is_long(alpha) else self.value_short

    def values(self):
        return (self.value_short, self.value_long)


def pairing(x, y) -> complex:
    """Complex bilinear form sum x_i y_i (no conjugation)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"dimensions {x.shape[-1]} and {y.shape[-1]} differ")
    return complex(np.sum(x * y, axis=-1)) if x.ndim == y.ndim == 1 else np.sum(x * y, axis=-1)


def norm2(alpha) -> float:
    alpha = np.asarray(alpha, dtype=float)
    return float(alpha @ alpha)


def coroot(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    n2 = norm2(alpha)
    if n2 <= TOL:
        raise ZeroVector("the zero vector has no coroot")
    return 2 * alpha / n2


def reflect(v, alpha) -> np.ndarray:
    v = np.asarray(v)
    return v - (v @ coroot(alpha)) * np.asarray(alpha, dtype=float)


def _unit(d, i):
    e = np.zeros(d)
    e[i] = 1.0
    return e


def _family_data(family: str, n: int):
    """(ambient dim, all roots, simple roots, Weyl group order)."""
    if family == "A":
        if n < 1:
            raise UnsupportedFamily("A_n needs n >= 1")
        if n == 1:
            roots = [np.array([SQ2]), np.array([-SQ2])]
            return 1, roots, [np.array([SQ2])], 2
        d = n + 1
        e = [_unit(d, i) for i in range(d)]
        roots = [e[i] - e[j] for i in range(d) for j in range(d) if i != j]
        simple = [e[i] - e[i + 1] for i in range(n)]
        return d, roots, simple, math.factorial(n + 1)
    if family == "B":
        if n < 2:
            raise UnsupportedFamily("B_n needs n >= 2")
        e = [_unit(n, i) for i in range(n)]
        roots = [s * SQ2 * e[j] for j in range(n) for s in (1, -1)]
        roots += [SQ2 * (s * e[r] + t * e[q]) for r in range(n) for q in range(r + 1, n)
                  for s in (1, -1) for t in (1, -1)]
        simple = [SQ2 * (e[i] - e[i + 1]) for i in range(n - 1)] + [SQ2 * e[n - 1]]
        return n, roots, simple, 2 ** n * math.factorial(n)
    if family == "C":
        if n < 2:
            raise UnsupportedFamily("C_n needs n >= 2")
        e = [_unit(n, i) for i in range(n)]
        roots = [s * 2 * e[j] for j in range(n) for s in (1, -1)]
        roots += [s * e[r] + t * e[q] for r in range(n) for q in range(r + 1, n)
                  for s in (1, -1) for t in (1, -1)]
        simple = [e[i] - e[i + 1] for i in range(n - 1)] + [2 * e[n - 1]]
        return n, roots, simple, 2 ** n * math.factorial(n)
    if family == "D":
        if n < 4:
            raise UnsupportedFamily("D_n needs n >= 4")
        e = [_unit(n, i) for i in range(n)]
        roots = [s * e[r] + t * e[q] for r in range(n) for q in range(r + 1, n)
                 for s in (1, -1) for t in (1, -1)]
        simple = [e[i] - e[i + 1] for i in range(n - 1)] + [e[n - 2] + e[n - 1]]
        return n, roots, simple, 2 ** (n - 1) * math.factorial(n)
    if family == "G":
        if n != 2:
            raise UnsupportedFamily("G only exists in rank 2")
        e = [_unit(3, i) for i in range(3)]
        short = [e[i] - e[j] for i in range(3) for j in range(3) if i != j]
        long = [s * (2 * e[i] - e[j] - e[l]) for i, j, l in ((0, 1, 2), (1, 0, 2), (2, 0, 1))
                for s in (1, -1)]
        simple = [e[0] - e[1], -2 * e[0] + e[1] + e[2]]
        return 3, short + long, simple, 12
    raise UnsupportedFamily(f"unsupported family {family!r} (expected A, B, C, D or G)")


@dataclass(frozen=True, eq=False)
class RootSystemData:
    family: str
    rank: int
    roots: np.ndarray
    positive_roots: np.ndarray
    simple_roots: np.ndarray
    fundamental_weights: np.ndarray
    fundamental_coweights: np.ndarray
    cartan: np.ndarray
    weyl_order: int
    index_f: int
    coweight_jacobian: float

    @property
    def dim(self) -> int:
        return self.roots.shape[1]

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def simply_laced(self) -> bool:
        return all(abs(norm2(a) - 2) < 1e-9 for a in self.roots)

    def is_long(self, alpha) -> bool:
        return norm2(alpha) > 2 + 1e-9

    def index_of(self, alpha) -> int:
        """Position of alpha in ``roots``; NotARoot if absent."""
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.dim,):
            raise NotARoot(f"{alpha} has the wrong dimension for {self.name}")
        d = np.max(np.abs(self.roots - alpha), axis=1)
        i = int(np.argmin(d))
        if d[i] > 1e-9:
            raise NotARoot(f"{alpha} is not a root of {self.name}")
        return i

    def is_root(self, alpha) -> bool:
        try:
            self.index_of(alpha)
        except NotARoot:
            return False
        return True

    def is_simple(self, alpha) -> bool:
        """delta_alpha: whether alpha is one of the simple roots."""
        alpha = np.asarray(alpha, dtype=float)
        return bool(np.any(np.max(np.abs(self.simple_roots - alpha), axis=1) < 1e-9))

    def coroots(self, which="positive") -> np.ndarray:
        src = self.positive_roots if which == "positive" else self.roots
        return np.array([coroot(a) for a in src])

    def to_ambient(self, lam) -> np.ndarray:
        """v = sum_j lam_j w_j^vee (lam may carry leading batch axes)."""
        return np.asarray(lam) @ self.fundamental_coweights

    def lambda_coords(self, v) -> np.ndarray:
        """lam_j = <v, alpha_j>, inverse of :meth:`to_ambient` on the span."""
        return np.asarray(v) @ self.simple_roots.T

    def weyl_orbit(self, v, limit: int = 100_000) -> np.ndarray:
        """Orbit of v under the group generated by the simple reflections."""
        v = np.asarray(v, dtype=float)
        orbit = [v]
        seen = {tuple(np.round(v, 9))}
        frontier = [v]
        while frontier:
            nxt = []
            for x in frontier:
                for a in self.simple_roots:
                    y = reflect(x, a)
                    key = tuple(np.round(y, 9))
                    if key not in seen:
                        seen.add(key)
                        orbit.append(y)
                        nxt.append(y)
                        if len(orbit) > limit:
                            raise RuntimeError("orbit exceeds limit")
            frontier = nxt
        return np.array(orbit)

    def weyl_elements(self) -> list[np.ndarray]:
        """All Weyl group elements as ambient matrices (small rank only)."""
        mats = [np.eye(self.dim)]
        seen = {tuple(np.round(mats[0], 9).ravel())}
        frontier = list(mats)
        refl = [np.eye(self.dim) - np.outer(coroot(a), a) for a in self.simple_roots]
        while frontier:
            nxt = []
            for m in frontier:
                for r in refl:
                    g = r @ m
                    key = tuple(np.round(g, 9).ravel())
                    if key not in seen:
                        seen.add(key)
                        mats.append(g)
                        nxt.append(g)
            frontier = nxt
        return mats


def build(family: str, rank: int) -> RootSystemData:
    family = str(family).upper()
    rank = int(rank)
    d, roots, simple, order = _family_data(family, rank)
    roots = np.array(roots, dtype=float)
    simple = np.array(simple, dtype=float)
    # positive roots: nonnegative coefficients in the simple-root basis
    coeffs = np.linalg.lstsq(simple.T, roots.T, rcond=None)[0].T
    positive = roots[np.all(coeffs > -1e-9, axis=1)]
    order_key = np.lexsort((np.round(positive, 9).T)[::-1])
    positive = positive[order_key]
    negative = -positive
    roots = np.vstack([positive, negative])
    simple_coroots = np.array([coroot(a) for a in simple])
    # coweights: rows X with X @ simple.T = I inside span(simple)
    coweights = np.linalg.solve(simple @ simple.T, simple)
    weights = np.linalg.solve(simple @ simple_coroots.T, simple)
    cartan = np.rint(simple @ simple_coroots.T).astype(int)
    index_f = int(round(abs(np.linalg.det(cartan))))
    jac = math.sqrt(abs(np.linalg.det(coweights @ coweights.T)))
    return RootSystemData(family, rank, roots, positive, simple, weights, coweights,
                          cartan, order, index_f, jac)


def rho_k(rs: RootSystemData, k: Multiplicity) -> np.ndarray:
    """1/2 sum over positive roots of k_alpha * alpha."""
    return 0.5 * sum(k.of(rs, a) * a for a in rs.positive_roots)


def rho_k_fundamental(rs: RootSystemData, k: Multiplicity) -> np.ndarray:
    """sum_j k_{alpha_j} w_j (equal to :func:`rho_k`)."""
    return sum(k.of(rs, a) * w for a, w in zip(rs.simple_roots, rs.fundamental_weights))


def coweight_lattice_points(rs: RootSystemData, radius: int) -> np.ndarray:
    """All sum m_j w_j^vee with |m_j| <= radius, in lexicographic order of m."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rng = range(-radius, radius + 1)
    m = np.array(list(itertools.product(rng, repeat=rs.rank)), dtype=float)
    return m @ rs.fundamental_coweights


def u_and_prime(case, alpha, rs: RootSystemData | None = None):
    """(u_alpha, alpha') for the given case; alpha' = u_alpha * alpha."""
    case = IdentityCase.parse(case)
    alpha = np.asarray(alpha, dtype=float)
    if rs is not None:
        rs.index_of(alpha)
    n2 = norm2(alpha)
    if min(abs(n2 - c) for c in (2.0, 4.0, 6.0)) > 1e-9:
        raise NotARoot(f"squared length {n2:.6g} is not that of a root")
    if case is IdentityCase.I:
        return 1.0, alpha
    u = 2.0 / n2
    return u, u * alpha
