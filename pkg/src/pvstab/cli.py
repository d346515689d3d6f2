"""Command-line driver: ``pvstab {check,scan,certify,solve,sweep} --config FILE --out FILE``.

Exit codes: 0 stable, 2 unstable, 3 marginal, 1 usage or config error,
4 numerical hazard. Tables are CSV with one ``#`` header row.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np

from pvstab import bvp, front, lopatinski, symmetrizer
from pvstab.background import DEFAULT_BOUNDARY_TOL, BackgroundState, verdict
from pvstab.config import ConfigError, RawConfig, check_top, load, seed_from, state_from
from pvstab.symbols import FrequencyPoint

EXIT_STABLE = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_MARGINAL = 3
EXIT_HAZARD = 4


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def write_table(path: str | None, columns, rows) -> None:
    with _open_out(path) as fh:
        fh.write("#" + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _threads() -> int:
    raw = os.environ.get("THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"THREADS must be a positive integer, got '{raw}'") from None
    if n < 1:
        raise UsageError(f"THREADS must be a positive integer, got '{raw}'")
    return n


def _pmap(fn, items):
    """Ordered parallel map; results are assembled serially in input order."""
    items = list(items)
    n = min(_threads(), max(1, len(items)))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _verdict_code(v) -> int:
    if v.marginal:
        return EXIT_MARGINAL
    return EXIT_STABLE if v.stable else EXIT_UNSTABLE


def _directions(n: int) -> list[tuple[float, float, float]]:
    return [(2 * math.pi * k / n, math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in range(n)]


# ---------------------------------------------------------------- commands


def cmd_check(cfg: RawConfig, out: str | None) -> int:
    state = state_from(cfg)
    sec = cfg.section("check")
    tol = sec.number("boundary_tol", DEFAULT_BOUNDARY_TOL, minimum=0.0)
    ndir = sec.integer("directions_n", 64, minimum=8)
    sec.check_unknown({"boundary_tol", "directions_n"})
    v = verdict(state, tol)
    g = front.growth_rate(state, ndir)
    report = sys.stderr if out in (None, "-") else sys.stdout
    print(f"margin {v.margin:.17g}", file=report)
    print(f"q_eigs {v.q_eigs[0]:.17g} {v.q_eigs[1]:.17g}", file=report)
    print(f"growth_rate {g:.17g}", file=report)
    write_table(out, ["margin", "q_eig_min", "q_eig_max", "growth_rate", "stable", "marginal"],
                [[v.margin, v.q_eigs[0], v.q_eigs[1], g, v.stable, v.marginal]])
    return _verdict_code(v)


def cmd_scan(cfg: RawConfig, out: str | None) -> int:
    state = state_from(cfg)
    sec = cfg.section("scan")
    ndir = sec.integer("directions", 8, minimum=1)
    grid_n = sec.integer("grid_n", 512, minimum=16)
    root_tol = sec.number("root_tol", lopatinski.ROOT_TOL, positive=True)
    simp_tol = sec.number("simplicity_tol", lopatinski.SIMPLICITY_TOL, positive=True)
    quad_n = sec.integer("quad_n", 64, minimum=64)
    gamma0 = sec.number("gamma0", 1e-4, positive=True)
    R = sec.number("R", None, positive=True)
    tol = sec.number("boundary_tol", DEFAULT_BOUNDARY_TOL, minimum=0.0)
    sec.check_unknown({"directions", "grid_n", "root_tol", "simplicity_tol", "quad_n", "gamma0", "R", "boundary_tol"})
    params = lopatinski.ContourParams(gamma0=gamma0, R=R)
    v = verdict(state, tol)

    def work(d):
        phi, c, s = d
        scan = lopatinski.scan_boundary_roots(state, (c, s), grid_n, root_tol, simp_tol)
        try:
            count, hazard = lopatinski.count_unstable_zeros(state, (c, s), params, quad_n), False
        except lopatinski.ContourHazard as exc:
            print(f"direction phi={phi:.6g}: {exc}", file=sys.stderr)
            count, hazard = -1, True
        return d, scan, count, hazard

    results = _pmap(work, _directions(ndir))
    cols = ["direction", "phi", "root_index", "gamma", "delta", "eta2", "eta3", "residual",
            "derivative_mag", "simple", "on_branch_cone", "unconverged", "unstable_count", "hazard"]
    rows = []
    nan = float("nan")
    for k, (d, scan, count, hazard) in enumerate(results):
        base = [k, d[0]]
        tail = [len(scan.unconverged), count, hazard]
        if not scan.roots:
            rows.append(base + [-1, nan, nan, nan, nan, nan, nan, False, False] + tail)
        for j, r in enumerate(scan.roots):
            p = r.location
            rows.append(base + [j, p.gamma, p.delta, p.eta2, p.eta3, r.residual, r.derivative_mag,
                                r.simple, r.on_branch_cone] + tail)
    write_table(out, cols, rows)
    if any(c > 0 for _, _, c, _ in results):
        return EXIT_UNSTABLE
    if any(h for _, _, _, h in results):
        return EXIT_HAZARD
    return EXIT_MARGINAL if v.marginal else EXIT_STABLE


def cmd_certify(cfg: RawConfig, out: str | None) -> int:
    state = state_from(cfg)
    seed = seed_from(cfg)
    sec = cfg.section("certify")
    n_patches = sec.integer("n_patches", 128, minimum=8)
    sample_n = sec.integer("sample_n", 64, minimum=32)
    slack = sec.number("slack", 0.05, minimum=0.0)
    n_dir = sec.integer("n_directions", 120, minimum=8)
    interior_tol = sec.number("interior_tol", symmetrizer.INTERIOR_TOL, positive=True)
    root_tol = sec.number("root_tol", lopatinski.ROOT_TOL, positive=True)
    tol = sec.number("boundary_tol", DEFAULT_BOUNDARY_TOL, minimum=0.0)
    sec.check_unknown({"n_patches", "sample_n", "slack", "n_directions", "interior_tol", "root_tol", "boundary_tol"})
    v = verdict(state, tol)
    cover = symmetrizer.build_cover(state, n_patches, seed=seed, n_directions=n_dir,
                                    interior_tol=interior_tol, root_tol=root_tol)
    if cover.coverage_fraction < 1.0:
        print(f"cover misses {len(cover.uncovered)} of the coverage samples", file=sys.stderr)
    seeds = np.random.SeedSequence(seed).spawn(len(cover.patches))

    def work(i):
        return symmetrizer.certify_patch(cover.patches[i], state, sample_n, np.random.default_rng(seeds[i]), slack, i)

    certs = _pmap(work, range(len(cover.patches)))
    cols = ["patch", "case_tag", "gamma", "delta", "eta2", "eta3", "radius", "K", "found_C", "min_ratio",
            "dissipation_pass", "boundary_pass", "slope", "slope_checked", "on_branch_cone", "pass"]
    rows = [[c.index, c.case_tag, c.center.gamma, c.center.delta, c.center.eta2, c.center.eta3, c.radius,
             c.K, c.found_C, c.min_ratio, c.dissipation_pass, c.boundary_pass, c.slope, c.slope_checked,
             c.on_branch_cone, c.passed] for c in certs]
    write_table(out, cols, rows)
    all_pass = all(c.passed for c in certs) and cover.coverage_fraction == 1.0
    if v.marginal:
        return EXIT_MARGINAL
    if not v.stable:
        return EXIT_UNSTABLE
    return EXIT_STABLE if all_pass else EXIT_HAZARD


def cmd_solve(cfg: RawConfig, out: str | None) -> int:
    state = state_from(cfg)
    sec = cfg.section("solve")
    freq_vals = [sec.number(k, required=True) for k in ("gamma", "delta", "eta2", "eta3")]
    g1 = complex(sec.number("g1_re", 1.0), sec.number("g1_im", 0.0))
    g2 = complex(sec.number("g2_re", 0.0), sec.number("g2_im", 0.0))
    floor = sec.number("solve_floor", bvp.SOLVE_FLOOR, positive=True)
    x_max = sec.number("x_max", 5.0, positive=True)
    x_n = sec.integer("x_n", 11, minimum=1)
    tol = sec.number("boundary_tol", DEFAULT_BOUNDARY_TOL, minimum=0.0)
    sec.check_unknown({"gamma", "delta", "eta2", "eta3", "g1_re", "g1_im", "g2_re", "g2_im", "solve_floor",
                       "x_max", "x_n", "boundary_tol"})
    try:
        freq = FrequencyPoint(*freq_vals)
    except ValueError as exc:
        raise ConfigError(f"[solve]: {exc}", path=cfg.path) from None
    data = bvp.BoundaryData.from_transformed(state, freq, g1, g2)
    try:
        sol = bvp.solve(state, freq, data, floor)
    except bvp.NearRootError as exc:
        print(f"solve refused: {exc}", file=sys.stderr)
        return EXIT_HAZARD
    x = np.linspace(0.0, x_max, x_n)
    Y = sol.Y(x)
    gn = np.linalg.norm(data.G)
    ratio = freq.gamma ** 2 * np.linalg.norm(sol.Y0) ** 2 / (freq.Lambda ** 2 * gn ** 2) if gn > 0 else float("nan")
    delta = lopatinski.lopatinski_det(state, freq)
    cols = ["x1"] + [f"{p}{i}_{c}" for i in range(1, 5) for p, c in [("Y", "re"), ("Y", "im")]] + [
        "c_plus_re", "c_plus_im", "c_minus_re", "c_minus_im", "Delta_re", "Delta_im", "trace_ratio",
        "ode_residual", "boundary_residual"]
    ode_res = sol.ode_residual(x)
    bres = sol.boundary_residual(data)
    rows = []
    for k, xv in enumerate(x):
        row = [xv]
        for i in range(4):
            row += [Y[k, i].real, Y[k, i].imag]
        row += [sol.c_plus.real, sol.c_plus.imag, sol.c_minus.real, sol.c_minus.imag, delta.real, delta.imag,
                ratio, ode_res, bres]
        rows.append(row)
    write_table(out, cols, rows)
    return _verdict_code(verdict(state, tol))


def _grid(sec, prefix: str, default_n: int | None = None):
    lo = sec.number(f"{prefix}_min", required=True)
    hi = sec.number(f"{prefix}_max", required=True)
    n = sec.integer(f"{prefix}_n", default_n, required=default_n is None)
    if n < 1:
        e = sec.entries.get(f"{prefix}_n")
        raise ConfigError(f"empty grid: '{prefix}_n' must be >= 1", e.line if e else None, sec.path)
    if hi < lo:
        e = sec.entries.get(f"{prefix}_max")
        raise ConfigError(f"'{prefix}_max' must be >= '{prefix}_min'", e.line if e else None, sec.path)
    return np.linspace(lo, hi, n)


def cmd_sweep(cfg: RawConfig, out: str | None) -> int:
    state = state_from(cfg)
    seed = seed_from(cfg)
    sec = cfg.section("sweep")
    kind = sec.word("kind", "stability_map", choices=("stability_map", "trace_ratio"))
    if kind == "stability_map":
        xparam = sec.word("x_param", "E1", choices=("v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps"))
        yparam = sec.word("y_param", None, choices=("v2", "v3", "H2", "H3", "Hv2", "Hv3", "E1", "eps"))
        xs = _grid(sec, "x")
        if yparam is None:
            yparam = "eps" if xparam != "eps" else "E1"
            ys = np.array([getattr(state, yparam)])
        else:
            ys = _grid(sec, "y")
        if xparam == yparam:
            raise ConfigError("x_param and y_param must differ", path=cfg.path)
        tol = sec.number("boundary_tol", DEFAULT_BOUNDARY_TOL, minimum=0.0)
        ndir = sec.integer("directions_n", 64, minimum=8)
        sec.check_unknown({"kind", "x_param", "y_param", "x_min", "x_max", "x_n", "y_min", "y_max", "y_n",
                           "boundary_tol", "directions_n"})
        pts = [(x, y) for y in ys for x in xs]

        def work(xy):
            try:
                s = state.replace(**{xparam: float(xy[0]), yparam: float(xy[1])})
            except ValueError as exc:
                raise ConfigError(f"[sweep] grid point {xy}: {exc}", path=cfg.path) from None
            v = verdict(s, tol)
            return [xy[0], xy[1], v.margin, v.q_eigs[0], v.q_eigs[1], v.stable, v.marginal,
                    front.growth_rate(s, ndir)]

        rows = _pmap(work, pts)
        write_table(out, [xparam, yparam, "margin", "q_eig_min", "q_eig_max", "stable", "marginal",
                          "growth_rate"], rows)
        return EXIT_STABLE

    gam = _grid(sec, "gamma", 32)
    if gam[0] <= 0:
        raise ConfigError("'gamma_min' must be > 0", sec.entries["gamma_min"].line, cfg.path)
    gam = np.geomspace(gam[0], gam[-1], len(gam))
    delta = sec.number("delta", 0.0)
    e2 = sec.number("eta2", 1.0)
    e3 = sec.number("eta3", 0.0)
    n_data = sec.integer("n_data", 32, minimum=1)
    floor = sec.number("solve_floor", bvp.SOLVE_FLOOR, positive=True)
    sec.check_unknown({"kind", "gamma_min", "gamma_max", "gamma_n", "delta", "eta2", "eta3", "n_data", "solve_floor"})
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n_data, 2)) + 1j * rng.standard_normal((n_data, 2))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    rows = []
    hazard = False
    for g in gam:
        f = FrequencyPoint(float(g), delta, e2, e3)
        try:
            r = max(bvp.trace_ratio(state, f, bvp.BoundaryData(gv), floor) for gv in G)
        except bvp.NearRootError:
            r, hazard = float("nan"), True
        rows.append([g, f.Lambda, abs(lopatinski.lopatinski_det(state, f)), r])
    write_table(out, ["gamma", "Lambda", "abs_Delta", "trace_ratio_max"], rows)
    return EXIT_HAZARD if hazard else EXIT_STABLE


COMMANDS = {"check": cmd_check, "scan": cmd_scan, "certify": cmd_certify, "solve": cmd_solve, "sweep": cmd_sweep}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pvstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="run configuration file")
        sp.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load(args.config)
        check_top(cfg)
        return COMMANDS[args.command](cfg, args.out)
    except UsageError as exc:
        print(f"pvstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"pvstab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (lopatinski.ContourHazard, ArithmeticError) as exc:
        print(f"pvstab: numerical hazard: {exc}", file=sys.stderr)
        return EXIT_HAZARD


if __name__ == "__main__":
    sys.exit(main())
