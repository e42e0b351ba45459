"""Command-line interface: ``hyperct gamma | verify | sweep | selftest``."""

from __future__ import annotations

import argparse
import cmath
import json
import math
import re
import sys
from dataclasses import dataclass, fields

from .errors import (DimensionTooLarge, HyperCTError, NearSingularity, NonConvergence,
                     ParameterDomainError, UnsupportedCombination, UnsupportedFamily)
from .hypergamma import QuasiPeriods, gamma
from .identities import BCParameters, ParameterPoint, bc_specialize
from .numerics import QuadratureSpec
from .verifier import (default_spec, sweep, verify_bc, verify_hyperbolic_ct,
                       verify_q_constant_term, verify_q_sum, verify_shintani, verify_split)

IDENTITIES = ("hyperbolic", "qct", "qsum", "split", "shintani", "bc")
DEFAULT_WPLUS = cmath.exp(-1j * math.pi / 8)
DEFAULT_WMINUS = cmath.exp(-3j * math.pi / 8)
DEFAULT_K = complex(-0.1, -0.5)
DEFAULT_GAMMA = (complex(-0.2, -0.3), complex(-0.3, -0.2), complex(-0.25, -0.4), complex(-0.1, -0.2))
DEFAULT_KAPPA = complex(-0.2, -0.4)
SHINTANI_WMINUS = cmath.exp(-1j * math.pi / 6)

# "RE,IM" with plain decimal (optionally exponent) literals
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_COMPLEX_RE = re.compile(rf"^({_NUM}),({_NUM})$")


class UsageError(Exception):
    pass


def parse_complex(text) -> complex:
    if isinstance(text, complex):
        return text
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, dict) and set(text) == {"re", "im"}:
        return complex(float(text["re"]), float(text["im"]))
    m = _COMPLEX_RE.match(str(text).strip())
    if not m:
        raise UsageError(f"invalid complex literal {text!r} (expected RE,IM)")
    return complex(float(m.group(1)), float(m.group(2)))


def render_complex(z: complex) -> str:
    return f"{z.real!r},{z.imag!r}"


@dataclass
class RunConfig:
    command: str
    identity: str | None = None
    family: str | None = None
    rank: int | None = None
    case: str = "i"
    omega_plus: complex | None = None
    omega_minus: complex | None = None
    k: complex | None = None
    k_long: complex | None = None
    gamma: tuple | None = None
    kappa: complex | None = None
    z: complex | None = None
    u: float = 1.0
    tol: float | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    seed: int = 0
    count: int | None = None
    grid: int | None = None
    config: str | None = None
    out: str | None = None


_COMPLEX_FIELDS = ("omega_plus", "omega_minus", "k", "k_long", "kappa", "z")


def _complex_arg(text):
    try:
        return parse_complex(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc))


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-1,-0.5" through as a value rather than an unknown option
        self._negative_number_matcher = re.compile(rf"^-(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?:,{_NUM})?$")

    def error(self, message):
        raise UsageError(message)


def _add_point_options(p):
    p.add_argument("--family", choices=list("ABCDG"), type=str.upper)
    p.add_argument("--rank", type=int)
    p.add_argument("--case", default="i", type=str.lower, choices=["i", "ii"])
    p.add_argument("--omega-plus", dest="omega_plus", type=_complex_arg)
    p.add_argument("--omega-minus", dest="omega_minus", type=_complex_arg)
    p.add_argument("--k", type=_complex_arg, help="multiplicity (short roots)")
    p.add_argument("--k-long", dest="k_long", type=_complex_arg, help="multiplicity on long roots")
    p.add_argument("--gamma", nargs=4, type=_complex_arg, metavar="RE,IM")
    p.add_argument("--kappa", type=_complex_arg)
    p.add_argument("--tol", type=float)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperct", description="Hyperbolic gamma function and constant term identities")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    g = sub.add_parser("gamma", help="evaluate G(w+, w-; z)")
    g.add_argument("--omega-plus", dest="omega_plus", type=_complex_arg, required=True)
    g.add_argument("--omega-minus", dest="omega_minus", type=_complex_arg, required=True)
    g.add_argument("--z", type=_complex_arg, required=True)
    g.add_argument("--u", type=float, default=1.0, help="evaluate G(w+, u w-; z)")
    v = sub.add_parser("verify", help="verify one identity at one parameter point")
    v.add_argument("identity", choices=IDENTITIES)
    _add_point_options(v)
    s = sub.add_parser("sweep", help="run verifications listed in a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    sub.add_parser("selftest", help="run the built-in invariant suite")
    return parser


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    values = {f.name: getattr(ns, f.name) for f in fields(RunConfig) if hasattr(ns, f.name)}
    if values.get("gamma") is not None:
        values["gamma"] = tuple(values["gamma"])
    cfg = RunConfig(**values)
    if cfg.command == "verify" and cfg.identity == "bc" and cfg.rank is not None and cfg.rank > 2:
        raise UsageError("rank > 2 unsupported for deterministic bc")
    return cfg


def render(cfg: RunConfig) -> list[str]:
    """Inverse of :func:`parse_args`."""
    argv = [cfg.command]
    if cfg.command == "gamma":
        argv += ["--omega-plus", render_complex(cfg.omega_plus),
                 "--omega-minus", render_complex(cfg.omega_minus), "--z", render_complex(cfg.z)]
        if cfg.u != 1.0:
            argv += ["--u", repr(cfg.u)]
        return argv
    if cfg.command == "sweep":
        argv += ["--config", cfg.config]
        if cfg.out:
            argv += ["--out", cfg.out]
        return argv
    if cfg.command == "selftest":
        return argv
    argv.append(cfg.identity)
    if cfg.family is not None:
        argv += ["--family", cfg.family]
    if cfg.rank is not None:
        argv += ["--rank", str(cfg.rank)]
    argv += ["--case", cfg.case]
    for name in ("omega_plus", "omega_minus", "k", "k_long", "kappa"):
        val = getattr(cfg, name)
        if val is not None:
            argv += ["--" + name.replace("_", "-"), render_complex(val)]
    if cfg.gamma is not None:
        argv += ["--gamma"] + [render_complex(g) for g in cfg.gamma]
    for name in ("tol", "rel_tol", "abs_tol"):
        val = getattr(cfg, name)
        if val is not None:
            argv += ["--" + name.replace("_", "-"), repr(val)]
    argv += ["--seed", str(cfg.seed)]
    for name in ("count", "grid"):
        val = getattr(cfg, name)
        if val is not None:
            argv += ["--" + name, str(val)]
    if cfg.out:
        argv += ["--out", cfg.out]
    return argv


# ---------------------------------------------------------------------------
# task construction shared by `verify` and `sweep`

POINT_KEYS = {"identity", "family", "rank", "case", "omega_plus", "omega_minus", "k", "k_long",
              "gamma", "kappa", "tol", "rel_tol", "abs_tol", "seed", "count", "grid"}


def _spec(point, rank):
    if point.get("rel_tol") is None and point.get("abs_tol") is None:
        return None
    base = default_spec(rank)
    return QuadratureSpec(rel_tol=point.get("rel_tol") or base.rel_tol,
                          abs_tol=point.get("abs_tol") or base.abs_tol)


def _parameter_point(point) -> ParameterPoint:
    family = point.get("family") or "A"
    rank = int(point.get("rank") or 1)
    k = point.get("k")
    return ParameterPoint.make(point.get("omega_plus", DEFAULT_WPLUS),
                               point.get("omega_minus", DEFAULT_WMINUS),
                               family, rank, point.get("case") or "i",
                               DEFAULT_K if k is None else k, point.get("k_long"))


def make_task(point: dict):
    """(identity, params, thunk) for one verification described by ``point``."""
    unknown = set(point) - POINT_KEYS
    if unknown:
        raise UsageError(f"unknown keys: {', '.join(sorted(unknown))}")
    point = dict(point)
    for name in _COMPLEX_FIELDS:
        if point.get(name) is not None:
            point[name] = parse_complex(point[name])
    if point.get("gamma") is not None:
        if len(point["gamma"]) != 4:
            raise UsageError("gamma needs exactly four complex values")
        point["gamma"] = tuple(parse_complex(g) for g in point["gamma"])
    identity = point.get("identity")
    if identity not in IDENTITIES:
        raise UsageError(f"unknown identity {identity!r}")
    params = {k: _jsonable(v) for k, v in point.items()}
    seed = int(point.get("seed") or 0)
    tol = point.get("tol")

    if identity == "shintani":
        def thunk():
            qp = QuasiPeriods(point.get("omega_plus", 1.0), point.get("omega_minus", SHINTANI_WMINUS))
            return verify_shintani(qp, point.get("count") or 100, seed, tol or 1e-10)
    elif identity == "bc":
        rank = int(point.get("rank") or 1)
        if rank > 2:
            raise DimensionTooLarge("rank > 2 unsupported for deterministic bc")

        def thunk():
            if point.get("family") is not None and point.get("gamma") is None:
                spec = bc_specialize(_parameter_point(point))
                return verify_bc(spec.params, _spec(point, spec.params.rank), tol, source=spec)
            qp = QuasiPeriods(point.get("omega_plus", DEFAULT_WPLUS),
                              point.get("omega_minus", DEFAULT_WMINUS))
            kappa = point.get("kappa", DEFAULT_KAPPA) if rank > 1 else point.get("kappa")
            bp = BCParameters(qp, point.get("gamma") or DEFAULT_GAMMA, kappa, rank)
            return verify_bc(bp, _spec(point, rank), tol)
    else:
        def thunk():
            pp = _parameter_point(point)
            if identity == "hyperbolic":
                return verify_hyperbolic_ct(pp, _spec(point, pp.rs.rank), tol, seed)
            if identity == "qct":
                return verify_q_constant_term(pp, point.get("grid") or 64, tol or 1e-7)
            if identity == "qsum":
                return verify_q_sum(pp, tol=tol or 1e-7)
            return verify_split(pp, point.get("count") or 100, seed, tol or 1e-8)
    return identity, params, thunk


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# JSON output with 17 significant digits

def _dump(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, complex):
        return _dump({"re": obj.real, "im": obj.imag})
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_dump(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(x) for x in obj) + "]"
    if hasattr(obj, "item"):
        return _dump(obj.item())
    return json.dumps(str(obj))


def reports_to_json(reports) -> str:
    return "[" + ",\n ".join(_dump(r.to_dict()) for r in reports) + "]"


def emit_report(reports, path) -> None:
    """Write reports as a JSON array; raises OSError on IO failure."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(reports_to_json(reports) + "\n")


# ---------------------------------------------------------------------------

def _format_gamma(z: complex) -> str:
    sign = "-" if z.imag < 0 else "+"
    return f"G = {z.real:.12f} {sign} {abs(z.imag):.12f}i"


def load_sweep_config(path) -> list:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("sweep config must be a JSON object")
    unknown = set(data) - {"points", "defaults"}
    if unknown:
        raise UsageError(f"unknown keys in sweep config: {', '.join(sorted(unknown))}")
    defaults = data.get("defaults", {})
    points = data.get("points", [])
    if not isinstance(defaults, dict) or not isinstance(points, list):
        raise UsageError("'defaults' must be an object and 'points' an array")
    bad = set(defaults) - POINT_KEYS
    if bad:
        raise UsageError(f"unknown keys in defaults: {', '.join(sorted(bad))}")
    merged = []
    for p in points:
        if not isinstance(p, dict):
            raise UsageError("every sweep point must be an object")
        bad = set(p) - POINT_KEYS
        if bad:
            raise UsageError(f"unknown keys in sweep point: {', '.join(sorted(bad))}")
        merged.append({**defaults, **p})
    return merged


def _sweep_tasks(points):
    tasks = []
    for p in points:
        try:
            tasks.append(make_task(p))
        except (UsageError, HyperCTError, ValueError) as exc:
            def fail(exc=exc):
                raise ValueError(str(exc))
            tasks.append((p.get("identity", "?"), {k: _jsonable(v) for k, v in p.items()}, fail))
    return tasks


def _finish(reports, out) -> int:
    for rep in reports:
        print(rep.summary())
    if out:
        try:
            emit_report(reports, out)
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            return 3
    return 0 if all(r.passed for r in reports) else 1


def run(cfg: RunConfig) -> int:
    if cfg.command == "gamma":
        qp = QuasiPeriods(cfg.omega_plus, cfg.omega_minus)
        if cfg.u != 1.0:
            qp = qp.scaled_minus(cfg.u)
        g = gamma(qp, cfg.z)
        print(_format_gamma(g.value))
        return 0
    if cfg.command == "selftest":
        from .selftest import run_selftest
        return 0 if run_selftest(print) else 1
    if cfg.command == "sweep":
        points = load_sweep_config(cfg.config)
        return _finish(sweep(_sweep_tasks(points)), cfg.out)
    point = {"identity": cfg.identity}
    for name in POINT_KEYS - {"identity"}:
        val = getattr(cfg, name)
        if val is not None:
            point[name] = val
    _, _, thunk = make_task(point)
    return _finish([thunk()], cfg.out)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
        return run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParameterDomainError, UnsupportedFamily, UnsupportedCombination, DimensionTooLarge,
            NearSingularity) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonConvergence as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (HyperCTError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
