"""Command-line entry point.

Exit codes: 0 when a certificate is produced (or the command has no verdict),
2 when certification is undecided, 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import attractor, families, geometry, symbolic
from .config import DEFAULTS, RunConfig
from .errors import ConfigurationError, PCLabError
from .pwc import FailedAt, IntervalPC, Singular

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2


def fmt(x) -> str:
    """17 significant digits, so every float round-trips."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return format(float(x), ".17g")


def to_json(obj) -> str:
    """Compact JSON with every float written at full precision."""
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if math.isfinite(x) else json.dumps(str(fmt(x)))
    return json.dumps(str(obj))


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (tuple, list)):
        return to_json(v)
    return "" if v is None else str(v)


def write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])


def _word(word) -> list:
    return [list(s) if isinstance(s, tuple) else s for s in word]


# --- subcommands ---------------------------------------------------------------


def cmd_sim(cfg: RunConfig, args, out) -> int:
    f = cfg.pc()
    x = cfg.x0(f)
    if x is None:
        x = attractor.default_base_point(f)
    x = float(x[0]) if isinstance(f, IntervalPC) else np.asarray(x, dtype=float)
    n = args.steps if args.steps is not None else cfg["steps"]
    for k in range(n):
        lab = f.label(x)
        dist = f.dist_to_singular(x)
        pt = [x] if isinstance(f, IntervalPC) else list(x)
        if isinstance(lab, Singular):
            out.write(to_json({"k": k, "x": pt, "label": None, "dist": dist,
                               "failed_at": FailedAt(k).k}) + "\n")
            return EXIT_OK
        label = list(lab.label) if isinstance(lab.label, tuple) else lab.label
        out.write(to_json({"k": k, "x": pt, "label": label, "dist": dist}) + "\n")
        x = f.step(x)
    return EXIT_OK


def _certify(cfg: RunConfig, args):
    f = cfg.pc()
    return f, attractor.certify(f, cfg.x0(f), _schedule(cfg, args), cap=cfg["cap"],
                                slack=cfg.tol["slack"], orbit_tol=cfg.tol["orbit"])


def _schedule(cfg: RunConfig, args):
    sched = list(cfg["schedule"])
    if args.depth_max is not None:
        sched = [n for n in sched if n <= args.depth_max] or [args.depth_max]
    return sched


def cmd_certify(cfg: RunConfig, args, out) -> int:
    f, cert = _certify(cfg, args)
    out.write(to_json(cert.to_record()) + "\n")
    return EXIT_OK if isinstance(cert, attractor.PeriodicityCertificate) else EXIT_UNDECIDED


def cmd_orbits(cfg: RunConfig, args, out) -> int:
    f, cert = _certify(cfg, args)
    if not isinstance(cert, attractor.PeriodicityCertificate):
        out.write(to_json(cert.to_record()) + "\n")
        return EXIT_UNDECIDED
    d = f.dim
    rows = [(i, k, o.period, *pt) for i, o in enumerate(cert.orbits) for k, pt in enumerate(o.points)]
    write_csv(out, ["orbit", "k", "period"] + [f"x{j}" for j in range(d)], rows)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args, out) -> int:
    spec = cfg.family()
    par = cfg["parameters"]
    count = args.count if args.count is not None else int(par["count"])
    records = []
    for rec in families.sweep(spec, count, par["sampler"], cfg["seed"], _schedule(cfg, args),
                              cfg["workers"], cfg["cap"], cfg.tol["slack"], cfg.tol["orbit"]):
        records.append(rec)
        out.write(to_json(rec.to_record()) + "\n")
    out.write(to_json({"summary": families.summarize(records)}) + "\n")
    return EXIT_OK


def cmd_growth(cfg: RunConfig, args, out) -> int:
    f = cfg.pc()
    n_max = args.depth_max or cfg["probe"]["n_max"]
    counts = [len(c) for c in symbolic.iter_levels(f, n_max, cap=cfg["cap"])]
    g = symbolic.growth_rate(counts)
    write_csv(out, ["n", "count", "rate", "tail_max"],
              [(n, c, r, t) for n, (c, r, t) in enumerate(zip(g.counts, g.rates, g.tail_max), 1)])
    return EXIT_OK


def cmd_entropy(cfg: RunConfig, args, out) -> int:
    f = cfg.pc()
    n_max = args.depth_max or cfg["probe"]["depth"]
    e = symbolic.mult_entropy_estimate(f, n_max)
    write_csv(out, ["n", "multiplicity", "rate", "surrogate"],
              [(n, m, r, int(e.surrogate)) for n, m, r in zip(e.depths, e.multiplicities, e.rates)])
    return EXIT_OK


def cmd_hoffman(cfg: RunConfig, args, out) -> int:
    A = json.loads(args.matrix) if args.matrix else cfg["hoffman"]["A"]
    if A is None:
        raise ConfigurationError("hoffman.A: provide a matrix in the config or via --matrix")
    write_csv(out, ["beta"], [(geometry.hoffman_beta(np.asarray(A, dtype=float)),)])
    return EXIT_OK


def _mu_star(cfg: RunConfig, spec) -> np.ndarray:
    mu = cfg["probe"]["mu_star"]
    if mu is not None:
        return np.atleast_1d(np.asarray(mu, dtype=float))
    if cfg.family_kind == "rotation":
        return np.array([float(cfg["b"])])
    key = "breakpoints" if cfg.family_kind == "interval" else "offsets"
    if cfg[key] is None:
        raise ConfigurationError(f"probe.mu_star: required when {key} is not set")
    return np.atleast_1d(np.asarray(cfg[key], dtype=float))


def cmd_probe_t(cfg: RunConfig, args, out) -> int:
    spec = cfg.family()
    p = cfg["probe"]
    rep = families.hypothesis_T_probe(spec, _mu_star(cfg, spec), p["delta"], p["eps"], p["samples"],
                                      p["depths"], x0=cfg.x0(None), seed=cfg["seed"])
    write_csv(out, ["depth", "eps", "estimate", "sigma", "bound", "ratio", "word"],
              [(r.depth, r.eps, r.estimate, r.sigma, r.bound, r.ratio, _word(r.word)) for r in rep.rows])
    return EXIT_OK


def cmd_probe_e(cfg: RunConfig, args, out) -> int:
    spec = cfg.family()
    p = cfg["probe"]
    n_max = args.depth_max or p["n_max"]
    rep = families.hypothesis_E_probe(spec, _mu_star(cfg, spec), p["delta"], n_max,
                                      max(10, args.count or 10), seed=cfg["seed"])
    rows = [(d, n, c, r) for d in rep.deltas
            for n, (c, r) in enumerate(zip(rep.counts[d], rep.rates[d]), start=1)]
    write_csv(out, ["delta", "n", "count", "rate"], rows)
    return EXIT_OK


def cmd_probe_stability(cfg: RunConfig, args, out) -> int:
    spec = cfg.family()
    p = cfg["probe"]
    n = args.depth_max or p["depth"]
    rows = families.stability_probe(spec, _mu_star(cfg, spec), n, p["deltas"],
                                    args.count or 50, seed=cfg["seed"])
    write_csv(out, ["delta", "identical_fraction", "max_ratio", "max_ratio_over_bound"],
              [(r.delta, r.identical_fraction, r.max_ratio, r.max_ratio_over_bound) for r in rows])
    return EXIT_OK


def cmd_staircase(cfg: RunConfig, args, out) -> int:
    if cfg.family_kind != "rotation":
        raise ConfigurationError("family: staircase needs the rotation family")
    spec = cfg.family()
    count = args.count if args.count is not None else int(cfg["parameters"]["count"])
    bs = [float(spec.sample(i, 0, "grid", count)[0]) for i in range(count)]
    write_csv(out, ["b", "rho"], families.staircase(spec.lam, bs))
    return EXIT_OK


COMMANDS = {
    "sim": cmd_sim,
    "certify": cmd_certify,
    "orbits": cmd_orbits,
    "sweep": cmd_sweep,
    "growth": cmd_growth,
    "entropy": cmd_entropy,
    "hoffman": cmd_hoffman,
    "probe-T": cmd_probe_t,
    "probe-E": cmd_probe_e,
    "probe-stability": cmd_probe_stability,
    "staircase": cmd_staircase,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pclab", description="Piecewise contraction laboratory")
    p.add_argument("--print-config", action="store_true", help="print the default config and exit")
    sub = p.add_subparsers(dest="command")
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?", help="JSON config file (defaults if omitted)")
        s.add_argument("-o", "--output", help="write to this file instead of standard output")
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--depth-max", type=int)
        s.add_argument("--count", type=int, help="number of samples or grid points")
        s.add_argument("--steps", type=int, help="orbit length for sim")
        s.add_argument("--x0", type=json.loads, help="base point as JSON")
        s.add_argument("--matrix", help="matrix as JSON for hoffman")
        s.add_argument("--no-boundary-singular", action="store_true",
                       help="measure singular distance to the partition only")
        for tol in ("eta", "slack", "orbit", "connection"):
            s.add_argument(f"--tol-{tol}", type=float)
    return p


def _overrides(cfg: RunConfig, args) -> RunConfig:
    raw = dict(cfg.raw)
    raw["tolerances"] = dict(raw["tolerances"])
    for key in ("seed", "workers"):
        if getattr(args, key) is not None:
            raw[key] = getattr(args, key)
    for tol in ("eta", "slack", "orbit", "connection"):
        v = getattr(args, f"tol_{tol}")
        if v is not None:
            raw["tolerances"][tol] = v
    if args.x0 is not None:
        raw["x0"] = args.x0
    if args.no_boundary_singular:
        raw["include_boundary"] = False
    return RunConfig.from_dict(raw)


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        sys.stdout.write(json.dumps(DEFAULTS, indent=2) + "\n")
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_ERROR
    try:
        cfg = _overrides(RunConfig.load(args.config), args)
        with _sink(args.output) as out:
            return COMMANDS[args.command](cfg, args, out)
    except (PCLabError, OSError, ValueError) as exc:
        sys.stderr.write(f"pclab: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
