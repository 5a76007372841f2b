"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line."""

import hashlib
import json
import time
from fractions import Fraction

import numpy as np

from instances import (
    UNIT_SQUARE,
    offsets_through_square,
    random_breakpoints,
    random_interval_branches,
    random_interval_pc,
    random_normals,
    random_planar_branches,
    random_planar_pc,
    random_rational_interval,
)
from report import criterion
from pclab.attractor import PeriodicityCertificate, certify, omega_cover
from pclab.cli import main
from pclab.families import (
    FamilySpec,
    contracted_rotation,
    hypothesis_T_probe,
    rotation_number,
    singular_connection_search,
    staircase,
    summarize,
    sweep,
)
from pclab.geometry import feasible, hoffman_beta, verify_hoffman_bound
from pclab.pwc import HyperplanePC, IntervalPC
from pclab.symbolic import (
    arrangement_bound,
    central_region_bound,
    cylinder_region,
    enumerate_itineraries,
    iter_levels,
    multiplicity,
)


def test_criterion_01_rotation_orbit():
    with criterion(1, "contracted rotation 0.5/0.8 certifies with orbit {4/15, 14/15}") as info:
        f = contracted_rotation(0.5, 0.8)
        t0 = time.perf_counter()
        cert = certify(f)
        runtime = time.perf_counter() - t0
        assert isinstance(cert, PeriodicityCertificate)
        assert cert.periods == [2]
        pts = np.sort(cert.orbits[0].points[:, 0])
        assert np.allclose(pts, [4 / 15, 14 / 15], atol=1e-9)
        tail = np.sort(f.orbit(0.0, 10_000)[-2:])
        assert np.allclose(tail, pts, atol=1e-9)
        assert runtime < 1.0
        info.update(depth=cert.depth, runtime=f"{runtime * 1e3:.2f}ms")


def test_criterion_02_sweep_fraction():
    with criterion(2, "rotation sweep of 10^4 b values certifies >= 99%") as info:
        spec = FamilySpec.rotation(0.5, 0.5, 1.0)
        records = list(sweep(spec, 10_000, seed=2024))
        s = summarize(records)
        assert s["samples"] == 10_000
        assert s["fraction"] >= 0.99
        assert max(r.depth for r in records if r.certified) <= 64
        undecided = [r for r in records if not r.certified]
        for r in undecided:
            rho = rotation_number(0.5, r.mu[0], horizon=100_000)
            assert rho.irrational_suspect, f"b={r.mu[0]!r} has a detected cycle of period {rho.period}"
        info.update(fraction=s["fraction"], undecided=len(undecided))


def test_criterion_03_staircase():
    with criterion(3, "rotation-number staircase is nondecreasing on 2000 points") as info:
        bs = 0.5 + (np.arange(2000) + 0.5) / 2000 * 0.5
        rho = np.array([r for _, r in staircase(0.5, bs)])
        violations = int(np.sum(np.diff(rho) < -1e-12))
        assert violations == 0
        info.update(violations=violations, rho_range=f"[{rho.min():.4f}, {rho.max():.4f}]")


def _certified_configs(rng, count):
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            f = random_interval_pc(rng, int(rng.integers(2, 4)))
        else:
            f = random_planar_pc(rng, int(rng.integers(1, 3)))
        cert = certify(f, schedule=[4, 8, 16, 24])
        if isinstance(cert, PeriodicityCertificate):
            out.append((f, cert))
    return out


def test_criterion_04_cover_soundness():
    with criterion(4, "orbit tails lie in the Omega-cover (100 configs x 10 starts)") as info:
        rng = np.random.default_rng(4)
        violations = 0
        for f, cert in _certified_configs(rng, 100):
            cover = omega_cover(f, cert.base_point, cert.depth)
            starts = []
            while len(starts) < 10:
                x = rng.uniform(0, 1, f.dim)
                if f.is_regular(x if f.dim > 1 else float(x[0])):
                    starts.append(x)
            xs = np.array(starts)
            if f.dim == 1:
                xs = xs[:, 0]
            tail = []
            for k in range(10_000):
                xs = f.step_many(xs)
                if k >= 9_000:
                    tail.append(np.array(xs).reshape(10, f.dim))
            tail = np.vstack(tail)
            violations += int(np.sum(~cover.covers(tail, tol=1e-9)))
        assert violations == 0
        info.update(configs=100, violations=violations)


def test_criterion_05_cylinder_oracle():
    with criterion(5, "cylinder regions agree with direct itineraries (20 planar instances)") as info:
        rng = np.random.default_rng(5)
        n = 5
        interior_disagreements, boundary = 0, 0
        for k in range(20):
            f = random_planar_pc(rng, 1 + k % 3)
            coll = enumerate_itineraries(f, n)
            regions = {c.word: cylinder_region(f, c.word) for c in coll}
            pts = rng.uniform(0, 1, (1000, 2))
            member = {w: np.all(P.slack(pts) > 0, axis=1) for w, P in regions.items()}
            for i, x in enumerate(pts):
                w = f.itinerary(x, n)
                if not isinstance(w, tuple):
                    boundary += 1  # an iterate lies within eta of the singular set
                    continue
                if w not in regions:
                    regions[w] = cylinder_region(f, w)
                    member[w] = np.all(regions[w].slack(pts) > 0, axis=1)
                holders = [a for a, m in member.items() if m[i]]
                interior_disagreements += holders != [w]
        assert interior_disagreements == 0
        info.update(points=20_000, boundary_points=boundary, interior_disagreements=interior_disagreements)


def _planar_family(rng, ell):
    V = random_normals(rng, ell)
    return V, random_planar_branches(rng, ell)


def test_criterion_06_parameter_set_convexity():
    with criterion(6, "parameter sets of cylinders are convex (10^3 triples)") as info:
        rng = np.random.default_rng(6)
        triples, violations = 0, 0
        while triples < 1000:
            ell = int(rng.integers(1, 3))
            V, branches = _planar_family(rng, ell)
            depth = int(rng.integers(1, 5))
            mu0 = offsets_through_square(rng, V)
            f0 = HyperplanePC(UNIT_SQUARE, V, mu0, branches)
            words = sorted(enumerate_itineraries(f0, depth).itineraries)
            for _ in range(10):
                mu1 = offsets_through_square(rng, V)
                f1 = f0.with_offsets(mu1)
                alpha = words[int(rng.integers(len(words)))]
                if not feasible(cylinder_region(f0, alpha), f0.eta).is_feasible:
                    continue
                if not feasible(cylinder_region(f1, alpha), f0.eta).is_feasible:
                    continue
                fm = f0.with_offsets(0.5 * (mu0 + mu1))
                triples += 1
                violations += not feasible(cylinder_region(fm, alpha), f0.eta).is_feasible
        assert violations == 0
        info.update(triples=triples, violations=violations)


def test_criterion_07_hoffman():
    with criterion(7, "Hoffman bound holds on 200 random systems") as info:
        rng = np.random.default_rng(7)
        for _ in range(200):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 6))
            A = rng.normal(size=(m, n))
            x0, x1 = rng.normal(size=n), rng.normal(size=n)
            b0 = A @ x0 + rng.uniform(0, 1, m) * rng.integers(0, 2, m)
            b = A @ x1 + rng.uniform(0, 1, m) * rng.integers(0, 2, m)
            assert verify_hoffman_bound(A, b0, b, x0)
        for d in (1, 2, 3):
            assert hoffman_beta(np.eye(d)) == 1.0
        info.update(systems=200, violations=0)


def test_criterion_08_multiplicity_bound():
    with criterion(8, "exact multiplicity within the arrangement bound (50 instances, n <= 8)") as info:
        rng = np.random.default_rng(8)
        checks, worst = 0, 0
        for k in range(50):
            f = random_planar_pc(rng, 1 + k % 2, homothety=k % 3 == 0)
            for coll in iter_levels(f, 8):
                arr = arrangement_bound(f, coll.depth)
                mult = multiplicity(coll)
                assert arr.bound == central_region_bound(arr.m, 2)
                assert mult <= arr.bound, f"depth {coll.depth}: {mult} > {arr.bound}"
                worst = max(worst, mult)
                checks += 1
        info.update(checks=checks, largest_multiplicity=worst)


def test_criterion_09_t_constants():
    with criterion(9, "Hypothesis-T measure estimates within proved constants + 3 sigma") as info:
        rng = np.random.default_rng(9)
        worst = 0.0
        rows = 0
        for N in (2, 3, 4):
            for _ in range(2):
                s, c = random_interval_branches(rng, N)
                spec = FamilySpec.interval(s, c)
                rep = hypothesis_T_probe(spec, random_breakpoints(rng, N), 0.2, [0.1, 0.05, 0.01],
                                         samples=2000, seed=int(rng.integers(1 << 30)))
                assert rep.c == 2 * (N - 1)
                assert rep.within(3.0)
                worst, rows = max(worst, rep.worst_ratio), rows + len(rep.rows)
        for _ in range(3):
            V = random_normals(rng, 2)
            spec = FamilySpec.hyperplane(UNIT_SQUARE, V, random_planar_branches(rng, 2),
                                         np.full(2, -1.5), np.full(2, 1.5))
            rep = hypothesis_T_probe(spec, offsets_through_square(rng, V), 0.5, [0.1, 0.05, 0.01],
                                     samples=2000, seed=int(rng.integers(1 << 30)))
            assert rep.c == 8
            assert rep.within(3.0)
            worst, rows = max(worst, rep.worst_ratio), rows + len(rep.rows)
        info.update(rows=rows, worst_ratio=f"{worst:.3f}")


def _discontinuities(slopes, offsets, bps, n_max):
    """Exact sizes of the sets of points whose first n-1 images hit a breakpoint."""
    grid = [Fraction(0)] + list(bps) + [Fraction(1)]
    seen, frontier, sizes = set(bps), list(bps), [len(bps)]
    for _ in range(n_max - 1):
        nxt = []
        for y in frontier:
            for i, (s, c) in enumerate(zip(slopes, offsets)):
                x = (y - c) / s
                if grid[i] < x < grid[i + 1] and x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
        sizes.append(len(seen))
    return sizes


def test_criterion_10_counting_identity():
    with criterion(10, "1-D itinerary count equals 1 + #discontinuities (20 families, n <= 20)") as info:
        rng = np.random.default_rng(10)
        largest = 0
        for k in range(20):
            s, c, bps = random_rational_interval(rng, 2 + k % 3)
            f = IntervalPC([float(v) for v in s], [float(v) for v in c], [float(v) for v in bps])
            sizes = _discontinuities(s, c, bps, 20)
            counts = [len(coll) for coll in iter_levels(f, 20)]
            assert counts == [1 + d for d in sizes]
            largest = max(largest, counts[-1])
        info.update(families=20, largest_count=largest)


def test_criterion_11_periodic_point_regularity():
    with criterion(11, "certified orbits avoid the singular set by more than margin/2") as info:
        rng = np.random.default_rng(11)
        s, c = random_interval_branches(rng, 3)
        spec = FamilySpec.interval(s, c)
        checked, with_connection = 0, 0
        for rec in sweep(spec, 1000, seed=11, schedule=[4, 8, 16, 24, 32]):
            if not rec.certified:
                continue
            f = spec.instance(rec.mu)
            if singular_connection_search(f, 12):
                with_connection += 1
                continue
            assert rec.orbit_separation > rec.margin / 2
            checked += 1
        assert checked > 900
        info.update(checked=checked, with_connection=with_connection)


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "repeated sweeps are byte-identical") as info:
        configs = {
            "rotation": {"family": "rotation", "lambda": 0.5, "parameters": {"count": 300}},
            "interval": {"family": "interval",
                         "branches": [{"slope": 0.5, "offset": 0.2}, {"slope": -0.4, "offset": 0.7},
                                      {"slope": 0.3, "offset": 0.1}],
                         "parameters": {"count": 200}},
        }
        digests = {}
        for name, cfg in configs.items():
            path = tmp_path / f"{name}.json"
            path.write_text(json.dumps(cfg))
            outs = []
            for run, workers in enumerate(("1", "1", "2")):
                out = tmp_path / f"{name}-{run}.jsonl"
                assert main(["sweep", str(path), "--seed", "12", "--workers", workers, "-o", str(out)]) == 0
                outs.append(out.read_bytes())
            assert outs[0] == outs[1] == outs[2]
            digests[name] = hashlib.sha256(outs[0]).hexdigest()[:12]
        info.update(**digests)
