"""Cylinder sets, itinerary enumeration and the combinatorics built on them.

Cylinders are grown breadth-first from the whole space. Every cylinder keeps
its composed branch map together with the forward image of its region, so a
child region is cut out by evaluating partition constraints on images and
interpolating back to the domain. No inverse of a deep composition is formed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigurationError, ResourceExceeded, Unsupported, UnknownLabel
from .geometry import (
    Polytope,
    chebyshev_center,
    clip_polygon,
    feasible,
    points_to_polygon_distance,
    polygon_area,
    polygon_perimeter,
)
from .ifs import AffineContraction
from .pwc import HyperplanePC, IntervalPC, PiecewiseContraction

CLOSURE_TOL = 1e-9
DEDUPE_TOL = 1e-10


@dataclass(eq=False)
class Cylinder:
    """One nonempty cylinder of a given depth.

    ``Lambda``/``offset`` describe the composed map along ``word`` (floats in
    1-D). Regions are kept as an interval in 1-D, a counter-clockwise polygon
    in the plane and a half-space system otherwise.
    """

    word: tuple
    Lambda: object
    offset: object
    interval: tuple | None = None
    image: object = None
    vertices: np.ndarray | None = None
    polytope: Polytope | None = None
    _witness: np.ndarray | None = field(default=None, repr=False)
    _inradius: float | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.word)

    def _center(self):
        if self._witness is not None:
            return
        if self.interval is not None:
            lo, hi = self.interval
            self._witness = np.array([0.5 * (lo + hi)])
            self._inradius = 0.5 * (hi - lo)
        else:
            P = self.polytope if self.polytope is not None else Polytope.from_polygon(self.vertices)
            self._witness, self._inradius = chebyshev_center(P)

    @property
    def witness(self) -> np.ndarray:
        """Chebyshev centre of the region."""
        self._center()
        return self._witness

    @property
    def inradius(self) -> float:
        self._center()
        return self._inradius

    def apply(self, x):
        """Composed map along the word evaluated at ``x``."""
        if self.interval is not None:
            return self.Lambda * np.asarray(x, dtype=float) + self.offset
        return np.asarray(x, dtype=float) @ self.Lambda.T + self.offset

    def as_map(self) -> AffineContraction:
        return AffineContraction(np.atleast_2d(self.Lambda), np.atleast_1d(self.offset))

    def region(self) -> Polytope:
        if self.interval is not None:
            return Polytope.interval(*self.interval, strict=True)
        if self.polytope is not None:
            return self.polytope
        return Polytope.from_polygon(self.vertices, strict=True)

    def contains(self, x, margin: float = 0.0) -> bool:
        """Open-region membership: every slack must exceed ``margin``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.interval is not None:
            lo, hi = self.interval
            return bool(lo + margin < x[0] < hi - margin)
        return bool(np.all(self.region().slack(x) > margin))

    def to_record(self) -> dict:
        rec = {"word": [list(s) if isinstance(s, tuple) else s for s in self.word]}
        if self.interval is not None:
            rec["interval"] = list(self.interval)
        else:
            P = self.region()
            rec["halfspaces"] = {"A": P.A.tolist(), "b": P.b.tolist()}
            if self.vertices is not None:
                rec["vertices"] = self.vertices.tolist()
        rec["witness"] = self.witness.tolist()
        return rec


class CylinderCollection:
    """All nonempty cylinders of one depth; their words form the itinerary set."""

    def __init__(self, f: PiecewiseContraction, depth: int, cylinders: list):
        self.f = f
        self.depth = depth
        self.cylinders = list(cylinders)

    def __len__(self) -> int:
        return len(self.cylinders)

    def __iter__(self):
        return iter(self.cylinders)

    @property
    def itineraries(self) -> set:
        return {c.word for c in self.cylinders}

    def by_word(self) -> dict:
        return {c.word: c for c in self.cylinders}

    def centers(self, x0) -> np.ndarray:
        """Images of the base point under every composed map, shape ``(K, d)``."""
        if isinstance(self.f, IntervalPC):
            x0 = float(np.asarray(x0, dtype=float).reshape(-1)[0])
            s = np.array([c.Lambda for c in self.cylinders])
            t = np.array([c.offset for c in self.cylinders])
            return (s * x0 + t)[:, None]
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        L = np.array([c.Lambda for c in self.cylinders])
        t = np.array([c.offset for c in self.cylinders])
        return np.einsum("kij,j->ki", L, x0) + t

    def find(self, x) -> Cylinder | None:
        for c in self.cylinders:
            if c.contains(x):
                return c
        return None

    def to_records(self) -> list[dict]:
        return [dict(depth=self.depth, **c.to_record()) for c in self.cylinders]


# --- enumeration -------------------------------------------------------------


def _root(f: PiecewiseContraction) -> Cylinder:
    if isinstance(f, IntervalPC):
        return Cylinder((), 1.0, 0.0, interval=(0.0, 1.0), image=(0.0, 1.0))
    d = f.dim
    if d == 2:
        V = f.space.vertices()
        return Cylinder((), np.eye(2), np.zeros(2), image=V.copy(), vertices=V.copy())
    X = f.space
    return Cylinder((), np.eye(d), np.zeros(d), polytope=Polytope(X.A, X.b, np.ones(X.m, bool)))


def _children_interval(f: IntervalPC, parent: Cylinder, eta: float) -> list[Cylinder]:
    lo, hi = parent.interval
    ya, yb = parent.image
    ymin, ymax = min(ya, yb), max(ya, yb)
    span = yb - ya
    grid = f.grid
    out = []
    if ymin == ymax:
        # image narrower than float spacing: the whole parent follows one branch
        # unless the image point sits exactly on a breakpoint
        if not (hi - lo) / 2.0 > eta:
            return out
        for j in range(f.N):
            if grid[j] < ya < grid[j + 1]:
                s, c = f.slopes[j], f.offsets[j]
                y = s * ya + c
                out.append(Cylinder(parent.word + (j + 1,), s * parent.Lambda, s * parent.offset + c,
                                    interval=(lo, hi), image=(y, y)))
        return out
    for j in range(f.N):
        u0, u1 = max(ymin, grid[j]), min(ymax, grid[j + 1])
        if not u1 > u0:
            continue
        # domain points mapping onto u0 and u1, pinned to the parent ends when unclipped
        xs = []
        for u in (u0, u1):
            if u == ya:
                xs.append(lo)
            elif u == yb:
                xs.append(hi)
            else:
                xs.append(lo + (u - ya) / span * (hi - lo))
        if xs[0] <= xs[1]:
            clo, chi, ylo, yhi = xs[0], xs[1], u0, u1
        else:
            clo, chi, ylo, yhi = xs[1], xs[0], u1, u0
        if not (chi - clo) / 2.0 > eta:
            continue
        s, c = f.slopes[j], f.offsets[j]
        out.append(Cylinder(parent.word + (j + 1,), s * parent.Lambda, s * parent.offset + c,
                            interval=(clo, chi), image=(s * ylo + c, s * yhi + c)))
    return out


def _split_polygon(VW: np.ndarray, f: HyperplanePC) -> list[tuple[tuple, np.ndarray]]:
    """Cut a stacked (domain | image) polygon by every hyperplane in image space."""
    pieces = [((), VW)]
    for v, mu in zip(f.normals, f.offsets):
        nxt = []
        for signs, P in pieces:
            h = P[:, 2:] @ v - mu
            for s, g in ((-1, -h), (1, h)):
                Q = clip_polygon(P, g)
                if len(Q):
                    nxt.append((signs + (s,), Q))
        pieces = nxt
    return pieces


def _children_polygon(f: HyperplanePC, parent: Cylinder, eta: float) -> list[Cylinder]:
    out = []
    VW = np.hstack([parent.vertices, parent.image])
    for lab, P in _split_polygon(VW, f):
        V = P[:, :2]
        area, perim = abs(polygon_area(V)), polygon_perimeter(V)
        if perim == 0.0 or 2.0 * area / perim <= eta:
            continue
        witness = radius = None
        if area / perim <= eta:
            # inradius lies in [A/P, 2A/P]; decide the ambiguous band exactly
            witness, radius = chebyshev_center(Polytope.from_polygon(V))
            if not radius > eta:
                continue
        phi = f.branches[lab]
        out.append(Cylinder(parent.word + (lab,), phi.Lambda @ parent.Lambda,
                            phi.Lambda @ parent.offset + phi.b, image=phi(P[:, 2:]),
                            vertices=V, _witness=witness, _inradius=radius))
    return out


def _step_rows(f: HyperplanePC, Lam: np.ndarray, off: np.ndarray, lab: tuple):
    """Rows ``s_j (<v_j, Lam x + off> - mu_j) > 0`` written as ``A x < b``."""
    s = np.asarray(lab, dtype=float)
    A = -(s[:, None] * (f.normals @ Lam))
    b = s * (f.normals @ off - f.offsets)
    return A, b


def _interval_rows(f: IntervalPC, s: float, c: float, i: int):
    lo, hi = f.grid[i - 1], f.grid[i]
    return np.array([[-s], [s]]), np.array([c - lo, hi - c])


def _assemble(A: np.ndarray, b: np.ndarray, base: Polytope) -> Polytope:
    """Strict polytope from raw rows; constant rows are resolved rather than normalised."""
    norms = np.linalg.norm(A, axis=1)
    zero = norms == 0.0
    if np.any(zero & (b <= 0.0)):
        d = base.dim
        e = np.eye(d)[:1]
        return Polytope(np.vstack([e, -e]), [-1.0, -1.0], strict=True)
    A, b = A[~zero], b[~zero]
    return Polytope(np.vstack([base.A, A]), np.concatenate([base.b, b]), strict=True)


def _children_lp(f: HyperplanePC, parent: Cylinder, eta: float) -> list[Cylinder]:
    out = []
    for lab in f.labels:
        A, b = _step_rows(f, parent.Lambda, parent.offset, lab)
        P = _assemble(A, b, parent.polytope)
        res = feasible(P, eta)
        if not res:
            continue
        phi = f.branches[lab]
        out.append(Cylinder(parent.word + (lab,), phi.Lambda @ parent.Lambda,
                            phi.Lambda @ parent.offset + phi.b, polytope=P,
                            _witness=res.witness, _inradius=res.inradius))
    return out


def _children(f, parent, eta):
    if isinstance(f, IntervalPC):
        return _children_interval(f, parent, eta)
    if f.dim == 2:
        return _children_polygon(f, parent, eta)
    return _children_lp(f, parent, eta)


def iter_levels(f: PiecewiseContraction, n_max: int, eta: float | None = None,
                cap: int | None = None) -> Iterator[CylinderCollection]:
    """Yield the cylinder collections of depths 1, 2, ..., ``n_max``.

    A child survives when its region has inradius above ``eta`` (default: the
    map's boundary tolerance). ``cap`` bounds the number of cylinders per level.
    """
    if n_max < 1:
        raise ConfigurationError("depth must be >= 1")
    eta = f.eta if eta is None else float(eta)
    level = [_root(f)]
    for n in range(1, n_max + 1):
        level = [c for p in level for c in _children(f, p, eta)]
        if cap is not None and len(level) > cap:
            raise ResourceExceeded(f"{len(level)} itineraries at depth {n} exceed the cap {cap}")
        yield CylinderCollection(f, n, level)


def enumerate_itineraries(f: PiecewiseContraction, n: int, eta: float | None = None,
                          cap: int | None = None) -> CylinderCollection:
    """All nonempty cylinders of depth ``n``."""
    coll = None
    for coll in iter_levels(f, n, eta, cap):
        pass
    return coll


def cylinder_region(f: PiecewiseContraction, word: Sequence) -> Polytope:
    """Closed-form cylinder of ``word`` as a strict polytope (possibly empty).

    The region is the relative interior of the space intersected with one
    block of rows per symbol, each pulling a partition constraint back
    through the composition of the preceding symbols.
    """
    word = tuple(tuple(s) if isinstance(s, list) else s for s in word)
    X = f.space
    base = Polytope(X.A, X.b, np.ones(X.m, bool))
    rows_A, rows_b = [], []
    if isinstance(f, IntervalPC):
        s, c = 1.0, 0.0
        for sym in word:
            if sym not in f.branches:
                raise UnknownLabel(f"label {sym!r} is not in the family")
            A, b = _interval_rows(f, s, c, sym)
            rows_A.append(A)
            rows_b.append(b)
            s, c = f.slopes[sym - 1] * s, f.slopes[sym - 1] * c + f.offsets[sym - 1]
    else:
        Lam, off = np.eye(f.dim), np.zeros(f.dim)
        for sym in word:
            if sym not in f.branches:
                raise UnknownLabel(f"label {sym!r} is not in the family")
            A, b = _step_rows(f, Lam, off, sym)
            rows_A.append(A)
            rows_b.append(b)
            phi = f.branches[sym]
            Lam, off = phi.Lambda @ Lam, phi.Lambda @ off + phi.b
    if not rows_A:
        return base
    return _assemble(np.vstack(rows_A), np.concatenate(rows_b), base)


# --- growth and multiplicity -------------------------------------------------


@dataclass(frozen=True)
class GrowthRates:
    counts: tuple
    rates: tuple
    tail_max: tuple


def growth_rate(counts: Sequence[int]) -> GrowthRates:
    """Pointwise ``log(count_n) / n`` for ``n = 1, 2, ...`` and the tail maxima."""
    counts = tuple(int(c) for c in counts)
    if not counts or min(counts) < 1:
        raise ConfigurationError("counts must be a nonempty sequence of positive integers")
    rates = tuple(math.log(c) / n for n, c in enumerate(counts, start=1))
    tail, best = [], -math.inf
    for r in reversed(rates):
        best = max(best, r)
        tail.append(best)
    return GrowthRates(counts, rates, tuple(reversed(tail)))


def _interval_bounds(coll: CylinderCollection) -> np.ndarray:
    return np.array(sorted(c.interval for c in coll.cylinders))


def multiplicity(coll: CylinderCollection, tol: float = CLOSURE_TOL) -> int:
    """Largest number of region closures sharing a point.

    The maximum is attained at a vertex of some region, so region vertices
    (interval endpoints in 1-D) are the only candidates needed.
    """
    if len(coll) == 0:
        return 0
    if isinstance(coll.f, IntervalPC):
        I = _interval_bounds(coll)
        cand = I.reshape(-1)
        inside = (I[None, :, 0] - tol <= cand[:, None]) & (cand[:, None] <= I[None, :, 1] + tol)
        return int(inside.sum(axis=1).max())
    if coll.f.dim != 2:
        raise Unsupported("exact multiplicity is available in dimensions 1 and 2 only")
    polys = [c.vertices for c in coll.cylinders]
    cand = np.vstack(polys)
    count = np.zeros(len(cand), dtype=int)
    for V in polys:
        count += points_to_polygon_distance(cand, V) <= tol
    return int(count.max())


def _kth_distance(points: np.ndarray, polys: list, k: int) -> np.ndarray:
    D = np.column_stack([points_to_polygon_distance(points, V) for V in polys])
    return np.partition(D, k - 1, axis=1)[:, k - 1]


def compatible_radius(coll: CylinderCollection, m: int, grid: int = 200) -> float:
    """Lower estimate of the supremum of radii whose open balls meet at most ``m`` regions.

    A ball of radius ``r`` at ``x`` meets a region exactly when the distance
    from ``x`` to it is below ``r``, so the supremum is the infimum over the
    space of the ``(m+1)``-th smallest region distance. In 1-D that infimum
    is half the shortest span covering ``m+1`` consecutive intervals. In the
    plane it is bounded below on a grid, minus the grid's covering radius.
    """
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    K = len(coll)
    if m >= K:
        return math.inf
    if isinstance(coll.f, IntervalPC):
        I = _interval_bounds(coll)
        return float(np.min(I[m:, 0] - I[:-m, 1]) / 2.0)
    if coll.f.dim != 2:
        raise Unsupported("compatible radius is available in dimensions 1 and 2 only")
    V = coll.f.space.vertices()
    lo, hi = V.min(axis=0), V.max(axis=0)
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    h = max(xs[1] - xs[0], ys[1] - ys[0])
    pts = np.array(np.meshgrid(xs, ys)).reshape(2, -1).T
    polys = [c.vertices for c in coll.cylinders]
    kth = _kth_distance(pts, polys, m + 1)
    return float(max(kth.min() - h * math.sqrt(2.0) / 2.0, 0.0))


@dataclass(frozen=True)
class EntropyEstimate:
    depths: tuple
    multiplicities: tuple
    rates: tuple
    surrogate: bool


def mult_entropy_estimate(f: PiecewiseContraction, n_max: int) -> EntropyEstimate:
    """``log(mult) / n`` along depths ``1..n_max``.

    Above the plane the multiplicity is replaced by the arrangement bound and
    the estimate is flagged as a surrogate.
    """
    mults = []
    surrogate = not isinstance(f, IntervalPC) and f.dim > 2
    if surrogate:
        for n in range(1, n_max + 1):
            mults.append(arrangement_bound(f, n).bound)
    else:
        for coll in iter_levels(f, n_max):
            mults.append(multiplicity(coll))
    rates = tuple(math.log(max(m, 1)) / n for n, m in enumerate(mults, start=1))
    return EntropyEstimate(tuple(range(1, n_max + 1)), tuple(mults), rates, surrogate)


# --- pullback arrangement ------------------------------------------------------


@dataclass(frozen=True)
class PullbackArrangement:
    depth: int
    normals: np.ndarray
    offsets: np.ndarray
    m: int
    bound: int

    @property
    def size(self) -> int:
        return len(self.offsets)


def central_region_bound(m: int, d: int) -> int:
    """Regions of a central arrangement of ``m`` hyperplanes in general position."""
    if m <= 0:
        return 1
    return 2 * sum(math.comb(m - 1, k) for k in range(d))


def _pullbacks(f: HyperplanePC, n: int, restrict: bool) -> tuple[np.ndarray, np.ndarray]:
    """Hyperplanes ``(composed map)^-1(H_j)`` over all words of length < ``n``.

    Words grow by prepending a symbol, which shrinks the image of the space;
    once ``H_j`` misses that image it misses every extension, so the branch is
    pruned when only hyperplanes meeting the space are wanted.
    """
    d = f.dim
    VX = f.space.vertices()
    normals, offsets = [], []
    frontier = [(np.eye(d), np.zeros(d), np.ones(f.ell, dtype=bool))]
    for _ in range(n):
        nxt = []
        for Lam, off, alive in frontier:
            if restrict:
                img = VX @ Lam.T + off
                h = img @ f.normals.T - f.offsets
                alive = alive & (h.min(axis=0) <= 0.0) & (h.max(axis=0) >= 0.0)
            if not alive.any():
                continue
            W = f.normals[alive] @ Lam
            c = f.offsets[alive] - f.normals[alive] @ off
            normals.append(W)
            offsets.append(c)
            for phi in f.branches.values():
                nxt.append((Lam @ phi.Lambda, Lam @ phi.b + off, alive))
        frontier = nxt
    if not normals:
        return np.zeros((0, d)), np.zeros(0)
    W, c = np.vstack(normals), np.concatenate(offsets)
    norms = np.linalg.norm(W, axis=1)
    keep = norms > 0
    W, c = W[keep] / norms[keep, None], c[keep] / norms[keep]
    # canonical orientation: first significant coordinate positive
    lead = W[np.arange(len(W)), np.argmax(np.abs(W) > 1e-12, axis=1)]
    sgn = np.where(lead < 0, -1.0, 1.0)
    W, c = W * sgn[:, None], c * sgn
    return _dedupe_planes(W, c)


def _dedupe_planes(W: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort(np.column_stack([W, c]).T[::-1])
    W, c = W[order], c[order]
    keepW, keepc = [], []
    for w, t in zip(W, c):
        dup = False
        for w2, t2 in zip(keepW[-64:], keepc[-64:]):
            if np.max(np.abs(w - w2)) <= DEDUPE_TOL and abs(t - t2) <= DEDUPE_TOL:
                dup = True
                break
        if not dup:
            keepW.append(w)
            keepc.append(t)
    return np.array(keepW).reshape(-1, W.shape[1]), np.array(keepc)


def _max_concurrency_2d(W: np.ndarray, c: np.ndarray, X: Polytope | None,
                        tol: float = 1e-9) -> int:
    L = len(c)
    if L == 0:
        return 0
    best = 1
    for i in range(L):
        w, t = W[i], c[i]
        base = w * t
        direction = np.array([-w[1], w[0]])
        # intersection parameter along line i with every other line
        den = W @ direction
        ok = np.abs(den) > 1e-14
        ok[i] = False
        if not ok.any():
            continue
        s = (c[ok] - W[ok] @ base) / den[ok]
        if X is not None:
            pts = base + s[:, None] * direction
            s = s[np.all(X.slack(pts) >= -tol, axis=1)]
        if s.size == 0:
            continue
        s = np.sort(s)
        # longest run of parameters within tol of each other
        run, j = 1, 0
        for k in range(1, len(s)):
            while s[k] - s[j] > tol:
                j += 1
            run = max(run, k - j + 1)
        best = max(best, run + 1)
    return best


def _max_concurrency_3d(W: np.ndarray, c: np.ndarray, X: Polytope | None,
                        tol: float = 1e-9) -> int:
    L = len(c)
    if L == 0:
        return 0
    best = 1
    for i, j in itertools.combinations(range(L), 2):
        M = W[[i, j]]
        if np.linalg.matrix_rank(M, tol=1e-12) < 2:
            continue
        if X is None or _line_meets(M, c[[i, j]], X):
            best = 2
            break
    for i, j, k in itertools.combinations(range(L), 3):
        M = W[[i, j, k]]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, c[[i, j, k]])
        if X is not None and np.any(X.slack(x) < -tol):
            continue
        best = max(best, int(np.sum(np.abs(W @ x - c) <= tol)))
    return best


def _line_meets(M: np.ndarray, t: np.ndarray, X: Polytope) -> bool:
    res = linprog(np.zeros(X.dim), A_ub=X.A, b_ub=X.b, A_eq=M, b_eq=t,
                  bounds=[(None, None)] * X.dim, method="highs")
    return res.status == 0


def arrangement_bound(f: HyperplanePC, n: int, mu=None, restrict: bool = True) -> PullbackArrangement:
    """Pullback hyperplanes up to depth ``n``, their peak concurrency and the region bound.

    With ``restrict`` the arrangement keeps only hyperplanes meeting the space
    and concurrency is measured at points of the space, which still bounds the
    multiplicity of every cylinder collection. Without it, all words and all
    of Euclidean space are used (intended for small audits).
    """
    if not isinstance(f, HyperplanePC):
        raise Unsupported("arrangement bounds apply to hyperplane partitions")
    if n < 1:
        raise ConfigurationError("depth must be >= 1")
    if mu is not None:
        f = f.with_offsets(mu)
    if f.dim > 3:
        raise Unsupported("concurrency counting is implemented for d <= 3")
    W, c = _pullbacks(f, n, restrict)
    X = f.space if restrict else None
    if f.dim == 1:
        m = 1 if len(c) else 0
    elif f.dim == 2:
        m = _max_concurrency_2d(W, c, X)
    else:
        m = _max_concurrency_3d(W, c, X)
    return PullbackArrangement(n, W, c, m, central_region_bound(m, f.dim))
