"""Parametrized families, parameter-space detectors, empirical probes and sweeps.

Three kinds of family are supported: interval maps with fixed branches and
moving breakpoints, polytope maps with fixed branches and moving hyperplane
offsets, and the contracted rotation ``x -> lam x + b (mod 1)`` in ``b``.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Iterator, Sequence

import numpy as np

from .attractor import CERT_SLACK, ORBIT_TOL, PeriodicityCertificate, certify
from .errors import ConfigurationError, InvalidParameter, ResourceExceeded, Unsupported
from .geometry import Polytope, points_to_polygon_distance
from .pwc import DEFAULT_ETA, HyperplanePC, IntervalPC, PiecewiseContraction
from .symbolic import growth_rate, iter_levels

KINDS = ("interval", "hyperplane", "rotation")


def contracted_rotation(lam: float, b: float, eta: float = DEFAULT_ETA) -> IntervalPC:
    """``x -> lam x + b (mod 1)`` as a two-branch interval map.

    Both branch images touch an endpoint of [0, 1], so the endpoints are left
    out of the singular set and invariance is checked piece by piece.
    """
    lam, b = float(lam), float(b)
    if not 0.0 < lam < 1.0:
        raise InvalidParameter(f"contraction rate must lie in (0, 1), got {lam}")
    if not 1.0 - lam < b < 1.0:
        raise InvalidParameter(f"translation must lie in ({1.0 - lam}, 1), got {b}")
    return IntervalPC([lam, lam], [b, b - 1.0], [(1.0 - b) / lam], eta=eta,
                      check="pieces", include_boundary=False)


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """Fixed branch data plus a parameter domain (a box, optionally ordered)."""

    kind: str
    lo: np.ndarray
    hi: np.ndarray
    ordered: bool = False
    slopes: tuple = ()
    offsets: tuple = ()
    lam: float | None = None
    space: Polytope | None = None
    normals: np.ndarray | None = None
    branches: dict | None = None
    eta: float = DEFAULT_ETA
    include_boundary: bool = True

    @classmethod
    def interval(cls, slopes, offsets, lo=None, hi=None, eta: float = DEFAULT_ETA) -> "FamilySpec":
        k = len(slopes) - 1
        if k < 0:
            raise ConfigurationError("need at least one branch")
        lo = np.zeros(k) if lo is None else np.asarray(lo, dtype=float).reshape(k)
        hi = np.ones(k) if hi is None else np.asarray(hi, dtype=float).reshape(k)
        spec = cls("interval", lo, hi, True, tuple(map(float, slopes)), tuple(map(float, offsets)),
                   eta=eta)
        # invariance does not depend on the breakpoints; check it once
        IntervalPC(spec.slopes, spec.offsets, (np.arange(1, k + 1) / (k + 1)).tolist(), eta)
        return spec

    @classmethod
    def rotation(cls, lam: float, lo: float | None = None, hi: float | None = None,
                 eta: float = DEFAULT_ETA) -> "FamilySpec":
        if not 0.0 < lam < 1.0:
            raise InvalidParameter(f"contraction rate must lie in (0, 1), got {lam}")
        lo = 1.0 - lam if lo is None else max(float(lo), 1.0 - lam)
        hi = 1.0 if hi is None else min(float(hi), 1.0)
        return cls("rotation", np.array([lo]), np.array([hi]), lam=float(lam), eta=eta)

    @classmethod
    def hyperplane(cls, space: Polytope, normals, branches: dict, lo, hi,
                   eta: float = DEFAULT_ETA, include_boundary: bool = True) -> "FamilySpec":
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        spec = cls("hyperplane", lo, hi, False, space=space, normals=normals,
                   branches=dict(branches), eta=eta, include_boundary=include_boundary)
        HyperplanePC(space, normals, 0.5 * (lo + hi), spec.branches, eta, include_boundary)
        return spec

    @property
    def param_dim(self) -> int:
        return self.lo.size

    @property
    def n_labels(self) -> int:
        if self.kind == "interval":
            return len(self.slopes)
        if self.kind == "rotation":
            return 2
        return 2 ** self.normals.shape[0]

    @property
    def is_empty(self) -> bool:
        return bool(np.any(self.hi <= self.lo))

    def contains(self, mu) -> bool:
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if np.any(mu <= self.lo) or np.any(mu >= self.hi):
            return False
        if self.kind == "interval":
            grid = np.concatenate([[0.0], mu, [1.0]])
            return bool(np.all(np.diff(grid) > 0))
        return True

    def instance(self, mu) -> PiecewiseContraction:
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if self.kind == "rotation":
            return contracted_rotation(self.lam, float(mu[0]), self.eta)
        if self.kind == "interval":
            return IntervalPC(self.slopes, self.offsets, mu.tolist(), self.eta, check=None)
        return HyperplanePC(self.space, self.normals, mu, self.branches, self.eta,
                            self.include_boundary, check_invariance=False)

    def t_constants(self) -> tuple[float, float]:
        """``(c, a)`` of the parameter-measure bound proved for this kind of family."""
        if self.kind == "interval":
            return 2.0 * (len(self.slopes) - 1), 1.0
        if self.kind == "rotation":
            return 2.0, 1.0
        return float(2 ** self.space.dim * self.normals.shape[0]), 1.0

    # --- sampling ---------------------------------------------------------------

    def sample(self, index: int, seed: int, sampler: str = "uniform", count: int = 1):
        """Parameter number ``index``; uniform draws are keyed by ``(seed, index)``."""
        if sampler == "grid":
            return self._grid_point(index, count)
        if sampler != "uniform":
            raise ConfigurationError(f"unknown sampler {sampler!r}")
        rng = np.random.default_rng([seed, index])
        if self.kind == "interval" and np.all(self.lo <= 0) and np.all(self.hi >= 1):
            # sorted uniforms are uniform on the ordered simplex
            return np.sort(rng.uniform(0.0, 1.0, self.param_dim))
        for _ in range(10000):
            mu = self.lo + (self.hi - self.lo) * rng.random(self.param_dim)
            if self.contains(mu):
                return mu
        raise ConfigurationError("parameter domain has (almost) no admissible points")

    def _grid_point(self, index: int, count: int) -> np.ndarray:
        k = self.param_dim
        per = max(1, math.ceil(count ** (1.0 / k) - 1e-9)) if k > 1 else count
        digits = np.unravel_index(index, (per,) * k)
        return self.lo + (np.array(digits) + 0.5) / per * (self.hi - self.lo)

    def ball_box(self, mu_star, delta: float) -> tuple[np.ndarray, np.ndarray]:
        mu_star = np.asarray(mu_star, dtype=float).reshape(-1)
        return np.maximum(self.lo, mu_star - delta), np.minimum(self.hi, mu_star + delta)

    def sample_ball(self, mu_star, delta: float, count: int, rng) -> np.ndarray:
        """Points of ``U`` within ``delta`` of ``mu_star`` (rejection from the bounding box)."""
        mu_star = np.asarray(mu_star, dtype=float).reshape(-1)
        if delta <= 0:
            return np.repeat(mu_star[None, :], count, axis=0)
        lo, hi = self.ball_box(mu_star, delta)
        out = []
        while len(out) < count:
            pts = lo + (hi - lo) * rng.random((4 * count, self.param_dim))
            ok = np.linalg.norm(pts - mu_star, axis=1) < delta
            out.extend(p for p in pts[ok] if self.contains(p))
        return np.array(out[:count])


# --- rotation number ------------------------------------------------------------


@dataclass(frozen=True)
class RotationNumber:
    value: float
    fraction: Fraction | None
    period: int | None
    irrational_suspect: bool
    steps: int
    error_bound: float


def rotation_number(lam: float, b: float, horizon: int = 100_000, qmax: int = 10_000,
                    tol: float = 1e-12, check_every: int = 1000) -> RotationNumber:
    """Rotation number of ``x -> lam x + b (mod 1)`` from the orbit of 0.

    Every ``check_every`` steps the recent history is scanned for an exact
    cycle; a cycle of length ``q`` with ``p`` wraps gives ``p/q``. Without a
    cycle the wrap frequency is returned (error below ``1/steps``) and the
    parameter is flagged as a Cantor-attractor suspect.
    """
    contracted_rotation(lam, b)
    xs = np.empty(horizon + 1)
    wraps = np.zeros(horizon + 1, dtype=np.int64)
    x, w = 0.0, 0
    xs[0] = x
    for k in range(1, horizon + 1):
        x = lam * x + b
        if x >= 1.0:
            x -= 1.0
            w += 1
        xs[k] = x
        wraps[k] = w
        if k % check_every == 0 or k == horizon:
            q = _find_cycle(xs[: k + 1], qmax, tol)
            if q is not None:
                p = int(wraps[k] - wraps[k - q])
                frac = Fraction(p, q)
                return RotationNumber(float(frac), frac, frac.denominator, False, k, 0.0)
    return RotationNumber(w / horizon, None, None, True, horizon, 1.0 / horizon)


def _circle_dist(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def _find_cycle(xs: np.ndarray, qmax: int, tol: float) -> int | None:
    k = len(xs) - 1
    top = min(qmax, k // 3)
    if top < 1:
        return None
    # candidate periods from the last point, then the whole last period must repeat
    cand = np.nonzero(_circle_dist(xs[k - top:k][::-1], xs[k]) <= tol)[0] + 1
    for q in cand:
        seg, prev = xs[k - q + 1:k + 1], xs[k - 2 * q + 1:k - q + 1]
        if np.all(_circle_dist(seg, prev) <= tol):
            return int(q)
    return None


def staircase(lam: float, bs: Sequence[float], **kwargs) -> list[tuple[float, float]]:
    return [(float(b), rotation_number(lam, b, **kwargs).value) for b in bs]


# --- detectors --------------------------------------------------------------------


def singular_connection_search(f: IntervalPC, depth: int, tol: float = 1e-9, mu=None,
                               exhaustive: bool = False) -> list[tuple[tuple, int, int]]:
    """Words carrying an interior breakpoint onto an interior breakpoint.

    Returns ``(word, i, j)`` with ``|phi^word(mu_i) - mu_j| <= tol``. The default
    follows the forward orbits of both one-sided limits at each breakpoint and
    branches again whenever a point comes within ``tol`` of a breakpoint;
    ``exhaustive`` scans every word instead.
    """
    if not isinstance(f, IntervalPC):
        raise Unsupported("singular connections are defined for interval maps")
    if depth < 1:
        raise ConfigurationError("depth must be >= 1")
    if mu is not None:
        f = f.with_breakpoints(list(np.asarray(mu, dtype=float).reshape(-1)))
    bps = np.array(f.breakpoints)
    s, c = np.array(f.slopes), np.array(f.offsets)
    found = set()
    if len(bps) == 0:
        return []
    if exhaustive:
        for i, m in enumerate(bps, start=1):
            vals = np.array([m])
            words = [()]
            for n in range(1, depth + 1):
                vals = (s[None, :] * vals[:, None] + c[None, :]).reshape(-1)
                words = [w + (a,) for w in words for a in range(1, f.N + 1)]
                hit = np.abs(vals[:, None] - bps[None, :]) <= tol
                for k, j in zip(*np.nonzero(hit)):
                    found.add((words[k], i, int(j) + 1))
        return sorted(found, key=lambda t: (len(t[0]), t))
    for i, m in enumerate(bps, start=1):
        # one-sided limits at mu_i use the branches on either side of it
        stack = [((i,), float(m)), ((i + 1,), float(m))]
        while stack:
            word, x = stack.pop()
            a = word[-1]
            y = s[a - 1] * x + c[a - 1]
            near = np.nonzero(np.abs(bps - y) <= tol)[0]
            for j in near:
                found.add((word, i, int(j) + 1))
            if len(word) == depth:
                continue
            if near.size:
                for j in near:
                    stack.append((word + (int(j) + 1,), y))
                    stack.append((word + (int(j) + 2,), y))
            else:
                stack.append((word + (f.sigma(y),), y))
    return sorted(found, key=lambda t: (len(t[0]), t))


def homothety_exceptional_check(f: HyperplanePC, depth: int, tol: float = 1e-9,
                                mu=None) -> list[tuple[tuple, int]]:
    """Words whose composed homothety has its fixed point on hyperplane ``j``.

    A composition of homotheties ``x -> r x + t`` fixes ``t / (1 - r)``; the
    pair ``(word, j)`` is reported when ``<v_j, t> / (1 - r)`` is within
    ``tol`` of offset ``j``.
    """
    if not isinstance(f, HyperplanePC):
        raise Unsupported("exceptional offsets are defined for hyperplane partitions")
    if not all(phi.is_homothety for phi in f.branches.values()):
        raise Unsupported("every branch must be a homothety")
    mu = f.offsets if mu is None else np.asarray(mu, dtype=float).reshape(-1)
    labels = f.labels
    r_i = np.array([f.branches[a].Lambda[0, 0] for a in labels])
    t_i = np.array([f.branches[a].b for a in labels])
    r, t = np.ones(1), np.zeros((1, f.dim))
    found = []
    for n in range(1, depth + 1):
        # appending symbol a: r' = r_a r, t' = r_a t + t_a
        r = (r_i[None, :] * r[:, None]).reshape(-1)
        t = (r_i[None, :, None] * t[:, None, :] + t_i[None, :, :]).reshape(-1, f.dim)
        values = (t @ f.normals.T) / (1.0 - r)[:, None]
        hit = np.abs(values - mu[None, :]) <= tol
        for k, j in zip(*np.nonzero(hit)):
            digits = np.unravel_index(k, (len(labels),) * n)
            found.append((tuple(labels[d] for d in digits), int(j) + 1))
    return found


# --- probes -----------------------------------------------------------------------


@dataclass(frozen=True)
class TRow:
    depth: int
    eps: float
    estimate: float
    sigma: float
    bound: float
    word: tuple

    @property
    def ratio(self) -> float:
        return self.estimate / self.bound if self.bound > 0 else math.inf


@dataclass(frozen=True)
class TReport:
    c: float
    a: float
    rows: list
    samples: int

    @property
    def worst_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    def within(self, k: float = 3.0) -> bool:
        return all(r.estimate <= r.bound + k * r.sigma for r in self.rows)


def _partition_distance(f: PiecewiseContraction, y) -> float:
    if isinstance(f, IntervalPC):
        return f.partition_distance(float(np.asarray(y).reshape(-1)[0]))
    return f.partition_distance(y)


def _apply_word(f: PiecewiseContraction, word: tuple, x0) -> np.ndarray:
    y = np.atleast_1d(np.asarray(x0, dtype=float))
    for a in word:
        y = f.branches[a](y)
    return y


def _pool_words(spec: FamilySpec, mu_star, delta: float, n: int, rng, extra: int = 4) -> list:
    words = set()
    for mu in [np.asarray(mu_star, dtype=float)] + list(spec.sample_ball(mu_star, delta, extra, rng)):
        for coll in iter_levels(spec.instance(mu), n):
            pass
        words |= coll.itineraries
    return sorted(words, key=repr)


def hypothesis_T_probe(spec: FamilySpec, mu_star, delta0: float, eps_list: Sequence[float],
                       samples: int = 1000, depths: Sequence[int] = (1, 4, 8),
                       words_per_depth: int = 4, x0=None, seed: int = 0) -> TReport:
    """Monte-Carlo measure of parameters bringing a composed image within ``eps`` of the cuts.

    For words drawn from the itineraries realized near ``mu_star``, the set of
    parameters in ``U`` within ``delta0`` of ``mu_star`` whose composed image
    of ``x0`` lies within ``eps`` of a partition boundary is measured by
    uniform sampling of the bounding box. Only partition boundaries count,
    matching the quantity the proved bound controls.
    """
    if samples < 1000:
        raise ConfigurationError("the probe needs at least 1000 samples")
    rng = np.random.default_rng(seed)
    c, a = spec.t_constants()
    mu_star = np.asarray(mu_star, dtype=float).reshape(-1)
    lo, hi = spec.ball_box(mu_star, delta0)
    vol = float(np.prod(hi - lo))
    pts = lo + (hi - lo) * rng.random((samples, spec.param_dim))
    inside = np.array([np.linalg.norm(p - mu_star) < delta0 and spec.contains(p) for p in pts])
    insts = [spec.instance(p) if ok else None for p, ok in zip(pts, inside)]
    if x0 is None:
        x0 = np.zeros(1) if spec.kind != "hyperplane" else np.zeros(spec.space.dim)
    rows = []
    for n in depths:
        pool = _pool_words(spec, mu_star, delta0, n, rng)
        pick = rng.choice(len(pool), size=min(words_per_depth, len(pool)), replace=False)
        for k in sorted(pick):
            word = pool[k]
            dist = np.full(samples, np.inf)
            for s, f in enumerate(insts):
                if f is not None:
                    dist[s] = _partition_distance(f, _apply_word(f, word, x0))
            for eps in eps_list:
                p = float(np.mean(dist <= eps))
                rows.append(TRow(n, float(eps), vol * p, vol * math.sqrt(p * (1 - p) / samples),
                                 c * eps**a, word))
    return TReport(c, a, rows, samples)


@dataclass(frozen=True)
class EReport:
    deltas: tuple
    counts: dict
    rates: dict
    limsup: dict
    bound_ok: bool


def hypothesis_E_probe(spec: FamilySpec, mu_star, delta: float, n_max: int,
                       samples: int = 10, seed: int = 0) -> EReport:
    """Growth of the union of itinerary sets over parameters near ``mu_star``.

    Runs at ``delta``, ``delta/2`` and ``delta/4``; the final tail maximum of
    ``log(#union)/n`` serves as the finite-depth proxy for the limsup.
    """
    if samples < 10:
        raise ConfigurationError("the probe needs at least 10 samples")
    rng = np.random.default_rng(seed)
    mu_star = np.asarray(mu_star, dtype=float).reshape(-1)
    deltas = (delta, delta / 2, delta / 4)
    counts, rates, limsup = {}, {}, {}
    ok = True
    N = spec.n_labels
    for d in deltas:
        params = [mu_star] + list(spec.sample_ball(mu_star, d, samples - 1, rng))
        union = [set() for _ in range(n_max)]
        for mu in params:
            for coll in iter_levels(spec.instance(mu), n_max):
                union[coll.depth - 1] |= coll.itineraries
        cnt = [len(u) for u in union]
        ok &= all(k <= N**n for n, k in enumerate(cnt, start=1))
        g = growth_rate(cnt)
        counts[d], rates[d], limsup[d] = tuple(cnt), g.rates, g.tail_max[-1]
    return EReport(deltas, counts, rates, limsup, ok)


@dataclass(frozen=True)
class StabilityRow:
    delta: float
    identical_fraction: float
    max_ratio: float
    max_ratio_over_bound: float | None


def _region_hausdorff(c1, c2) -> float:
    if c1.interval is not None:
        return max(abs(c1.interval[0] - c2.interval[0]), abs(c1.interval[1] - c2.interval[1]))
    if c1.vertices is not None:
        a = points_to_polygon_distance(c1.vertices, c2.vertices).max()
        b = points_to_polygon_distance(c2.vertices, c1.vertices).max()
        return float(max(a, b))
    from .geometry import hausdorff_distance
    return hausdorff_distance(c1.region(), c2.region())


def _expansion_bound(f: IntervalPC, word: tuple) -> float:
    """Product of inverse slopes along all but the last symbol."""
    return float(np.prod([1.0 / abs(f.slopes[a - 1]) for a in word[:-1]]))


def stability_probe(spec: FamilySpec, mu_star, n: int, deltas: Sequence[float],
                    samples: int = 50, seed: int = 0) -> list[StabilityRow]:
    """Persistence of the depth-``n`` itinerary set and Lipschitz dependence of cylinders.

    For interval families the ratio is also divided by the expansion of the
    inverse branches along each word; values at most 1 confirm the bound.
    """
    rng = np.random.default_rng(seed)
    mu_star = np.asarray(mu_star, dtype=float).reshape(-1)
    f_star = spec.instance(mu_star)
    for ref in iter_levels(f_star, n):
        pass
    ref_map = ref.by_word()
    rows = []
    for d in deltas:
        same, worst, worst_rel = 0, 0.0, 0.0
        for mu in spec.sample_ball(mu_star, d, samples, rng):
            f = spec.instance(mu)
            for coll in iter_levels(f, n):
                pass
            cur = coll.by_word()
            same += set(cur) == set(ref_map)
            step = float(np.linalg.norm(mu - mu_star))
            if step == 0:
                continue
            for w in set(cur) & set(ref_map):
                ratio = _region_hausdorff(cur[w], ref_map[w]) / step
                worst = max(worst, ratio)
                if spec.kind == "interval":
                    worst_rel = max(worst_rel, ratio / _expansion_bound(f_star, w))
        rows.append(StabilityRow(float(d), same / samples, worst,
                                 worst_rel if spec.kind == "interval" else None))
    return rows


# --- sweeps -------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    index: int
    mu: tuple
    outcome: str
    depth: int
    margin: float
    periods: tuple = ()
    orbit_separation: float | None = None
    flag: str | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def certified(self) -> bool:
        return self.outcome == "certified"

    def to_record(self) -> dict:
        """Serializable fields; wall time is left out so reruns are byte-identical."""
        return {
            "index": self.index,
            "mu": list(self.mu),
            "outcome": self.outcome,
            "depth": self.depth,
            "margin": self.margin,
            "periods": list(self.periods),
            "orbit_separation": self.orbit_separation,
            "flag": self.flag,
        }


def classify(spec: FamilySpec, mu, index: int = 0, schedule=None, cap: int | None = 10**6,
             slack: float = CERT_SLACK, orbit_tol: float = ORBIT_TOL) -> SweepRecord:
    t0 = time.perf_counter()
    mu = np.asarray(mu, dtype=float).reshape(-1)
    key = tuple(float(m) for m in mu)
    try:
        f = spec.instance(mu)
        cert = certify(f, schedule=schedule, cap=cap, slack=slack, orbit_tol=orbit_tol)
    except ResourceExceeded:
        return SweepRecord(index, key, "undecided", -1, -math.inf, flag="resource",
                           wall_time=time.perf_counter() - t0)
    except ConfigurationError as exc:
        return SweepRecord(index, key, "invalid", -1, -math.inf, flag=str(exc),
                           wall_time=time.perf_counter() - t0)
    dt = time.perf_counter() - t0
    if isinstance(cert, PeriodicityCertificate):
        pts = np.vstack([o.points for o in cert.orbits])
        sep = float(f.dist_to_singular_many(pts[:, 0] if isinstance(f, IntervalPC) else pts).min())
        return SweepRecord(index, key, "certified", cert.depth, cert.margin,
                           tuple(sorted(cert.periods)), sep, wall_time=dt)
    return SweepRecord(index, key, "undecided", cert.max_depth, cert.best_margin, wall_time=dt)


def _run_one(index: int, spec: FamilySpec, seed: int, sampler: str, count: int,
             schedule, cap, slack, orbit_tol) -> SweepRecord:
    mu = spec.sample(index, seed, sampler, count)
    return classify(spec, mu, index, schedule, cap, slack, orbit_tol)


def sweep(spec: FamilySpec, count: int, sampler: str = "uniform", seed: int = 0,
          schedule=None, workers: int = 1, cap: int | None = 10**6,
          slack: float = CERT_SLACK, orbit_tol: float = ORBIT_TOL) -> Iterator[SweepRecord]:
    """Classify ``count`` sampled parameters, yielding records in index order."""
    if count < 0:
        raise ConfigurationError("count must be nonnegative")
    if count == 0 or spec.is_empty:
        return
    job = partial(_run_one, spec=spec, seed=seed, sampler=sampler, count=count,
                  schedule=schedule, cap=cap, slack=slack, orbit_tol=orbit_tol)
    if sampler == "grid" and spec.param_dim > 1:
        per = max(1, math.ceil(count ** (1.0 / spec.param_dim) - 1e-9))
        count = min(count, per**spec.param_dim)
    if workers <= 1:
        for i in range(count):
            yield job(i)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(job, range(count), chunksize=max(1, count // (8 * workers)))


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def summarize(records: Sequence[SweepRecord]) -> dict:
    n = len(records)
    k = sum(r.certified for r in records)
    hist = Counter(p for r in records if r.certified for p in r.periods)
    return {
        "samples": n,
        "certified": k,
        "fraction": k / n if n else None,
        "wilson95": list(wilson_interval(k, n)) if n else None,
        "period_histogram": {str(p): hist[p] for p in sorted(hist)},
    }
