"""Command-line driver: ``robiniso <subcommand> --config job.json --out DIR``.

Every subcommand reads an optional JSON object (keys below, all optional),
writes a JSON report and, where noted, a CSV table into ``--out``, and exits
0 when every asserted inequality passes, 1 otherwise and 2 on a malformed
config. ``--jobs`` runs independent cases in that many processes.

Config keys
-----------
ball-eig
    ``n`` (2), ``alpha`` (1.0), ``radii`` (list) or ``r_min``/``r_max``/``count``
    (0.1, 10, 20), ``tol`` (1e-8, oracle agreement). CSV ``ball_eig.csv``:
    ``r,lambda,y``.
fem-eig
    ``domain`` (unit disk), ``alpha`` (1.0), ``h`` (0.05).
harmonic
    ``domain``, ``h``, ``t_grid`` (list) or ``t_min``/``t_max``/``t_count``
    (1e-3, 0.5, 20), ``capacity_t`` (five values in [0.03, 0.2]),
    ``capacity_tol`` (0.05). CSV ``levelset.csv``:
    ``t,m_Omega,m_Ball,bound,margin``.
theorem1
    ``cases``: list of ``{"domain": ..., "alpha": ...}``, or ``domains`` and
    ``alphas`` (crossed); ``h`` (0.05); ``tol_factor`` (0.1).
shape-deriv
    ``domain`` (2:1 ellipse), ``alpha`` (1.0), ``h`` (0.05), ``perturbation``
    (``{"c0", "cos", "sin"}``, default ``cos 2θ``), ``steps``
    ([0.01, 0.005]), ``tol`` (0.01).
steklov
    ``domain`` (2:1 ellipse), ``h`` (0.05), ``G`` (``{"kind":
    "quadratic_sink", "c": 1}`` or ``{"kind": "concave_smooth", "kappa",
    "kappa0"}``), ``mu`` (1.0), ``rho`` (``{"c", "g", "q"}``), ``case``
    ("ii"), ``convention`` ("energy"), ``perturbation`` (``cos 2θ``),
    ``variation_rho`` (``{"c": 1, "g": [0.3, 0], "q": 0.2}``), ``tol`` (0.02).
verify-all
    ``criteria`` (all, 1-13), ``h`` (0.05).

Domains are ``DomainSpec`` JSON objects, e.g. ``{"kind": "star", "R": 1,
"cos": [0, 0, 0.3], "sin": []}``, ``{"kind": "polygon", "vertices": [...]}``
or ``{"kind": "ellipse", "a": 2, "b": 1}``.
"""

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .reports import ExperimentReport, to_jsonable

log = logging.getLogger("robiniso")

SUBCOMMANDS = ("ball-eig", "fem-eig", "harmonic", "theorem1", "shape-deriv", "steklov", "verify-all")


class ConfigError(ValueError):
    pass


def _domain(cfg, default):
    from .domains import DomainError, DomainSpec

    d = cfg.get("domain", default)
    try:
        return DomainSpec.from_dict(d)
    except (AttributeError, DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain {d!r}: {exc}") from exc


def _num(cfg, key, default, *, positive=False):
    v = cfg.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{key} must be positive, got {v!r}")
    return float(v)


def _floats(cfg, key, default):
    v = cfg.get(key, default)
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{key} must be a non-empty list of numbers")
    try:
        return [float(x) for x in v]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _perturbation(cfg):
    from .shape import PerturbationField

    d = cfg.get("perturbation", {"cos": [0.0, 1.0]})
    if not isinstance(d, dict) or set(d) - {"c0", "cos", "sin"}:
        raise ConfigError(f"bad perturbation {d!r}")
    return PerturbationField(float(d.get("c0", 0.0)), tuple(d.get("cos", ())), tuple(d.get("sin", ())))


def _weight(d):
    from .steklov import BoundaryWeight

    if not isinstance(d, dict) or set(d) - {"c", "g", "q"}:
        raise ConfigError(f"bad boundary weight {d!r}")
    return BoundaryWeight(float(d.get("c", 1.0)), tuple(float(x) for x in d.get("g", (0.0, 0.0))), float(d.get("q", 0.0)))


def _nonlinearity(d):
    from .steklov import concave_smooth, quadratic_sink

    if not isinstance(d, dict):
        raise ConfigError(f"bad G {d!r}")
    kind = d.get("kind")
    try:
        if kind == "quadratic_sink":
            return quadratic_sink(float(d.get("c", 1.0)))
        if kind == "concave_smooth":
            return concave_smooth(float(d["kappa"]), float(d.get("kappa0", 0.0)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad G {d!r}: {exc}") from exc
    raise ConfigError(f"G kind must be quadratic_sink or concave_smooth, got {kind!r}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def _write_report(out, name, rep):
    data = rep if isinstance(rep, dict) else rep.to_dict()
    (out / f"{name}.json").write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True))


# subcommands: each takes (cfg, out, jobs) and returns the list of reports


def cmd_ball_eig(cfg, out, jobs):
    from .ball import BallProblem, ball_eigenvalue, ball_monotonicity_check, shooting_eigenvalue

    n = int(_num(cfg, "n", 2))
    alpha = _num(cfg, "alpha", 1.0, positive=True)
    if "radii" in cfg:
        radii = _floats(cfg, "radii", None)
    else:
        radii = list(np.geomspace(_num(cfg, "r_min", 0.1, positive=True), _num(cfg, "r_max", 10.0, positive=True),
                                  int(_num(cfg, "count", 20))))
    if n < 2 or any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("need n >= 2 and positive, strictly increasing radii")
    tol = _num(cfg, "tol", 1e-8, positive=True)
    rep = ExperimentReport("ball-eig", inputs=dict(n=n, alpha=alpha, radii=radii))
    mono = ball_monotonicity_check(n, alpha, radii)
    rows = []
    for r, lam, y in zip(radii, mono.lam, mono.y):
        p = BallProblem(n, alpha, r)
        shoot = shooting_eigenvalue(p)
        rows.append((r, lam, y))
        rep.check(f"oracle r={r:.6g}", abs(lam - shoot) / abs(lam), tol)
        res = ball_eigenvalue(p)
        rep.check(f"sign r={r:.6g}", lam + alpha**2 + alpha * (n - 1) / r, 0.0)
        rep.quantities.setdefault("table", []).append(dict(r=r, lam=lam, y=y, lam_shooting=shoot, k=res.k))
    rep.check("lambda increasing", 0.0 if mono.lam_increasing else 1.0, 0.0)
    rep.check("y increasing", 0.0 if mono.y_increasing else 1.0, 0.0)
    _write_csv(out / "ball_eig.csv", ["r", "lambda", "y"], rows)
    return [("ball_eig", rep.finish())]


def cmd_fem_eig(cfg, out, jobs):
    from .fem import robin_principal_eigen
    from .mesh import triangulate

    spec = _domain(cfg, {"kind": "star", "R": 1.0, "cos": [], "sin": []})
    alpha = _num(cfg, "alpha", 1.0, positive=True)
    h = _num(cfg, "h", 0.05, positive=True)
    rep = ExperimentReport("fem-eig", inputs=dict(spec=spec.to_dict(), alpha=alpha, h=h))
    mesh = triangulate(spec, h)
    eig = robin_principal_eigen(mesh, alpha)
    rep.quantities.update(lam=eig.lam, rayleigh_residual=eig.rayleigh_residual, iterations=eig.iterations,
                          n_nodes=mesh.n_nodes, area=mesh.area, perimeter=mesh.perimeter)
    rep.check("λ < -α|∂Ω|/|Ω|", eig.lam, -alpha * mesh.perimeter / mesh.area)
    return [("fem_eig", rep.finish())]


def cmd_harmonic(cfg, out, jobs):
    from .mesh import triangulate
    from .transplant import (
        green_function,
        harmonic_center,
        level_set_measures,
        mesh_allowance,
        verify_capacity_equality,
        verify_lemma_cap2,
    )

    spec = _domain(cfg, {"kind": "ellipse", "a": 2.0, "b": 1.0})
    h = _num(cfg, "h", 0.05, positive=True)
    if "t_grid" in cfg:
        t_grid = _floats(cfg, "t_grid", None)
    else:
        t_grid = list(np.geomspace(_num(cfg, "t_min", 1e-3, positive=True), _num(cfg, "t_max", 0.5, positive=True),
                                   int(_num(cfg, "t_count", 20))))
    if any(t <= 0 for t in t_grid) or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError("t_grid must be positive and increasing")
    cap_t = _floats(cfg, "capacity_t", list(np.geomspace(0.03, 0.2, 5)))
    cap_tol = _num(cfg, "capacity_tol", 0.05, positive=True)
    rep = ExperimentReport("harmonic", inputs=dict(spec=spec.to_dict(), h=h, t_grid=t_grid, capacity_t=cap_t))
    mesh = triangulate(spec, h)
    y, r = harmonic_center(mesh)
    g = green_function(mesh, y)
    table = level_set_measures(g, t_grid)
    lemma = verify_lemma_cap2(table, mesh_allowance(mesh))
    rep.quantities.update(harmonic_center=y, r_Omega=r, area=mesh.area, gamma_ratio=table.gamma_ratio,
                          lemma_worst_margin=lemma["worst_margin"], allowance=lemma["allowance"])
    rep.check("|B_rΩ| <= |Ω|", math.pi * r * r, mesh.area, mesh.h**2 * mesh.perimeter / (4 * r))
    for row in lemma["rows"]:
        rep.check(f"m_Omega <= bound t={row['t']:.4g}", row["m_Omega"], row["bound"], row["allowance"])
    for t in cap_t:
        cd, cb, gap = verify_capacity_equality(g, t)
        rep.quantities.setdefault("capacities", []).append(dict(t=t, cap_domain=cd, cap_ball=cb, gap=gap))
        rep.check(f"capacity gap t={t:.4g}", gap, cap_tol)
    table.to_csv(out / "levelset.csv")
    return [("harmonic", rep.finish())]


def _theorem1_job(args):
    from .domains import DomainSpec
    from .transplant import theorem1_check

    spec, alpha, h, tol_factor = args
    return theorem1_check(DomainSpec.from_dict(spec), alpha, h, tol_factor=tol_factor)


def cmd_theorem1(cfg, out, jobs):
    h = _num(cfg, "h", 0.05, positive=True)
    tol_factor = _num(cfg, "tol_factor", 0.1, positive=True)
    if "cases" in cfg:
        if not isinstance(cfg["cases"], list):
            raise ConfigError("cases must be a list")
        cases = [(_domain(c, None), _num(c, "alpha", 1.0, positive=True)) for c in cfg["cases"]]
    else:
        domains = cfg.get("domains", [{"kind": "star", "R": 1.0, "cos": [], "sin": []}])
        if not isinstance(domains, list):
            raise ConfigError("domains must be a list")
        alphas = _floats(cfg, "alphas", [1.0])
        cases = [(_domain({"domain": d}, None), a) for d in domains for a in alphas]
    args = [(s.to_dict(), a, h, tol_factor) for s, a in cases]
    reports = _map(_theorem1_job, args, jobs)
    return [(f"theorem1_{i:02d}", r) for i, r in enumerate(reports)]


def cmd_shape_deriv(cfg, out, jobs):
    from .shape import eigen_derivative_check

    spec = _domain(cfg, {"kind": "ellipse", "a": 2.0, "b": 1.0})
    rep = eigen_derivative_check(
        spec,
        _num(cfg, "alpha", 1.0, positive=True),
        _perturbation(cfg),
        _num(cfg, "h", 0.05, positive=True),
        steps=tuple(_floats(cfg, "steps", [1e-2, 5e-3])),
        rel_tol=_num(cfg, "tol", 1e-2, positive=True),
    )
    return [("shape_deriv", rep)]


def cmd_steklov(cfg, out, jobs):
    from .mesh import triangulate
    from .shape import steklov_variation_check
    from .steklov import ComparisonProblem, EnergyProblem, verify_energy_bound
    from .transplant import green_function, harmonic_center

    spec = _domain(cfg, {"kind": "ellipse", "a": 2.0, "b": 1.0})
    h = _num(cfg, "h", 0.05, positive=True)
    G = _nonlinearity(cfg.get("G", {"kind": "quadratic_sink", "c": 1.0}))
    mu = _num(cfg, "mu", 1.0)
    rho = _weight(cfg.get("rho", {"c": 1.0}))
    case = cfg.get("case", "ii")
    convention = cfg.get("convention", "energy")
    if case not in ("i", "ii") or convention not in ("energy", "literal"):
        raise ConfigError("case must be 'i' or 'ii' and convention 'energy' or 'literal'")
    mesh = triangulate(spec, h)
    y, r = harmonic_center(mesh)
    p = EnergyProblem(mesh, G, mu, rho)
    gamma_n = mesh.area / (math.pi * r * r) if case == "ii" else 1.0
    cp = ComparisonProblem(r, p.boundary_mass(), gamma_n, convention)
    bound = verify_energy_bound(p, cp, green_function(mesh, y), case)
    var = steklov_variation_check(spec, G, mu, _weight(cfg.get("variation_rho", {"c": 1.0, "g": [0.3, 0.0], "q": 0.2})),
                                  _perturbation(cfg), h, rel_tol=_num(cfg, "tol", 2e-2, positive=True))
    return [("steklov_bound", bound), ("steklov_variation", var)]


def cmd_verify_all(cfg, out, jobs):
    from .acceptance import CRITERIA, run_criteria

    nums = cfg.get("criteria", sorted(CRITERIA))
    if not isinstance(nums, list) or any(k not in CRITERIA for k in nums):
        raise ConfigError(f"criteria must be a list drawn from 1..{len(CRITERIA)}")
    h = _num(cfg, "h", 0.05, positive=True)
    if jobs > 1:
        results = [r for chunk in _map(_criterion_job, [([k], h) for k in nums], jobs) for r in chunk]
    else:
        results = run_criteria(nums, h)
    for r in results:
        print(r.line())
    summary = dict(experiment="verify-all", passed=all(r.passed for r in results),
                   criteria=[r.to_dict() for r in results])
    return [("verify_all", summary)]


def _criterion_job(args):
    from .acceptance import run_criteria

    return run_criteria(*args)


def _map(fn, args, jobs):
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args))


COMMANDS = {
    "ball-eig": cmd_ball_eig,
    "fem-eig": cmd_fem_eig,
    "harmonic": cmd_harmonic,
    "theorem1": cmd_theorem1,
    "shape-deriv": cmd_shape_deriv,
    "steklov": cmd_steklov,
    "verify-all": cmd_verify_all,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="robiniso", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON job file")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        reports = COMMANDS[args.command](cfg, args.out, args.jobs)
    except ConfigError as exc:
        parser.error(str(exc))
    ok = True
    for name, rep in reports:
        _write_report(args.out, name, rep)
        passed = rep["passed"] if isinstance(rep, dict) else rep.passed
        ok &= passed
        if not passed and not isinstance(rep, dict):
            for a in rep.assertions:
                if not a.passed and not a.recorded_only:
                    log.warning("%s: %s failed (lhs %.6g, rhs %.6g, tol %.3g)", name, a.name, a.lhs, a.rhs, a.tolerance)
    print(f"{args.command}: {'pass' if ok else 'FAIL'} ({len(reports)} report(s) in {args.out})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
