"""Convex polytopes in half-space form and the small linear-programming kernels
the rest of the package leans on.

Every polytope stores unit-norm rows, so ``b - A @ x`` is a vector of signed
Euclidean distances to the bounding hyperplanes. That single convention makes
interior margins, Chebyshev radii and cylinder slacks directly comparable.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import HalfspaceIntersection

from .errors import (
    ConfigurationError,
    DistanceToEmpty,
    PreconditionFailed,
    UnboundedRegion,
)

UNIT_TOL = 1e-12
SINGULAR_DET = 1e-10
SLACK_CAP = 1e6
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """The set ``{x : <normal, x> = offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.normal, dtype=float))
        if v.ndim != 1:
            raise ConfigurationError("hyperplane normal must be a vector")
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise ConfigurationError(f"hyperplane normal {v.tolist()} is not a unit vector")
        object.__setattr__(self, "normal", v)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def normalized(cls, normal, offset) -> "Hyperplane":
        v = np.asarray(normal, dtype=float)
        s = np.linalg.norm(v)
        if s == 0.0:
            raise ConfigurationError("hyperplane normal is zero")
        return cls(v / s, float(offset) / s)

    def signed_distance(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.normal - self.offset


@dataclass(frozen=True, eq=False)
class Polytope:
    """``{x : A x <= b}``, with ``<`` on rows flagged in ``strict``.

    Rows are rescaled to unit norm on construction, so callers may pass any
    non-degenerate inequality system.
    """

    A: np.ndarray
    b: np.ndarray
    strict: np.ndarray = None
    _vertex_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim == 1:
            A = A.reshape(-1, 1) if b.size != 1 else A.reshape(1, -1)
        if A.ndim != 2 or A.shape[0] != b.size:
            raise ConfigurationError(
                f"polytope rows mismatch: A has shape {A.shape}, b has length {b.size}"
            )
        if A.shape[1] == 0:
            raise ConfigurationError("polytope must live in dimension >= 1")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0.0):
            raise ConfigurationError("polytope has a zero row")
        A = A / norms[:, None]
        b = b / norms
        if self.strict is None:
            strict = np.zeros(b.size, dtype=bool)
        else:
            strict = np.broadcast_to(np.asarray(self.strict, dtype=bool), b.shape).copy()
        for name, value in (("A", A), ("b", b), ("strict", strict)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def box(cls, lo, hi, strict=False) -> "Polytope":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        d = lo.size
        eye = np.eye(d)
        return cls(np.vstack([-eye, eye]), np.concatenate([-lo, hi]), strict)

    @classmethod
    def interval(cls, lo, hi, strict=False) -> "Polytope":
        return cls.box([lo], [hi], strict)

    @classmethod
    def from_polygon(cls, vertices, strict=False) -> "Polytope":
        """Half-space form of a convex polygon given by counter-clockwise vertices."""
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise ConfigurationError("polygon needs at least three 2-D vertices")
        if polygon_area(V) < 0:
            V = V[::-1]
        E = np.roll(V, -1, axis=0) - V
        normals = np.column_stack([E[:, 1], -E[:, 0]])
        keep = np.linalg.norm(normals, axis=1) > 0
        normals, V = normals[keep], V[keep]
        offsets = np.einsum("ij,ij->i", normals, V)
        return cls(normals, offsets, strict)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def slack(self, x) -> np.ndarray:
        """Signed distances ``b - A x`` (positive inside); broadcasts over rows of ``x``."""
        x = np.asarray(x, dtype=float)
        return self.b - x @ self.A.T

    def contains(self, x, tol: float = 0.0) -> bool:
        """Closed-set membership with an absolute tolerance."""
        return bool(np.all(self.slack(x) >= -tol))

    def interior_margin(self, x) -> float:
        s = self.slack(x)
        return float(s.min()) if s.size else np.inf

    def intersect(self, other: "Polytope") -> "Polytope":
        return Polytope(
            np.vstack([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.strict, other.strict]),
        )

    def closure(self) -> "Polytope":
        return Polytope(self.A, self.b, np.zeros(self.m, dtype=bool))

    def vertices(self) -> np.ndarray:
        if not self._vertex_cache:
            self._vertex_cache.append(vertices(self))
        return self._vertex_cache[0]

    def diameter(self) -> float:
        V = self.vertices()
        if len(V) < 2:
            return 0.0
        diff = V[:, None, :] - V[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())

    def centroid(self) -> np.ndarray:
        return self.vertices().mean(axis=0)


class Status(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class FeasibilityResult:
    status: Status
    witness: np.ndarray | None = None
    inradius: float | None = None

    @property
    def is_feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    def __bool__(self) -> bool:
        return self.is_feasible


def _max_slack(P: Polytope, rows: np.ndarray):
    """Maximise the least slack over ``rows`` subject to all other rows holding."""
    d = P.dim
    c = np.zeros(d + 1)
    c[-1] = -1.0
    t_col = rows.astype(float).reshape(-1, 1)
    A_ub = np.hstack([P.A, t_col])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=P.b,
        bounds=[(None, None)] * d + [(None, SLACK_CAP)],
        method="highs",
        options=_HIGHS,
    )
    if res.status != 0 or res.x is None:
        return None
    return res.x[:d]


def feasible(P: Polytope, eta: float = 0.0) -> FeasibilityResult:
    """Chebyshev-style nonemptiness test with interior margin ``eta``.

    The least slack over the strict rows (all rows when none is strict) is
    maximised; a region counts as nonempty only when that slack exceeds
    ``eta``. The reported inradius is recomputed at the witness, so it never
    overstates what the witness achieves.
    """
    if not isinstance(P, Polytope):
        raise ConfigurationError("feasible() expects a Polytope")
    if eta < 0:
        raise ConfigurationError("interior margin must be nonnegative")
    if P.m == 0:
        return FeasibilityResult(Status.FEASIBLE, np.zeros(P.dim), np.inf)
    has_strict = bool(P.strict.any())
    rows = P.strict if has_strict else np.ones(P.m, dtype=bool)
    x = _max_slack(P, rows)
    if x is None:
        return FeasibilityResult(Status.INFEASIBLE)
    s = P.slack(x)
    r = float(s[rows].min())
    others_ok = bool(np.all(s[~rows] >= -1e-9)) if (~rows).any() else True
    if has_strict:
        ok = r > eta and others_ok
    else:
        ok = r >= eta - UNIT_TOL
    if not ok:
        return FeasibilityResult(Status.INFEASIBLE, x, r)
    return FeasibilityResult(Status.FEASIBLE, x, r)


def chebyshev_center(P: Polytope) -> tuple[np.ndarray, float]:
    """Centre and radius of the largest ball inside the closure of ``P``."""
    x = _max_slack(P, np.ones(P.m, dtype=bool))
    if x is None:
        raise DistanceToEmpty("polytope is empty")
    return x, float(P.slack(x).min())


def _is_nonempty_closed(P: Polytope) -> bool:
    res = linprog(
        np.zeros(P.dim),
        A_ub=P.A,
        b_ub=P.b,
        bounds=[(None, None)] * P.dim,
        method="highs",
        options=_HIGHS,
    )
    return res.status == 0


def _project_active_sets(x0: np.ndarray, P: Polytope) -> np.ndarray:
    best, best_d = None, np.inf
    A, b = P.A, P.b
    for k in range(1, min(P.dim, P.m) + 1):
        for S in itertools.combinations(range(P.m), k):
            AS = A[list(S)]
            G = AS @ AS.T
            if abs(np.linalg.det(G)) < 1e-14:
                continue
            lam = np.linalg.solve(G, AS @ x0 - b[list(S)])
            if np.any(lam < -1e-12):
                continue
            y = x0 - AS.T @ lam
            if np.all(P.slack(y) >= -1e-10):
                dist = np.linalg.norm(y - x0)
                if dist < best_d:
                    best, best_d = y, dist
    return best


def distance_to_polyhedron(x0, P: Polytope, norm: str = "l2") -> float:
    """Distance from ``x0`` to the closure of ``P`` in the l2 or l-infinity norm."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != P.dim:
        raise ConfigurationError("point and polytope dimensions differ")
    if norm not in ("l2", "linf"):
        raise ConfigurationError(f"unknown norm {norm!r}")
    if not _is_nonempty_closed(P):
        raise DistanceToEmpty("distance to an empty polyhedron is undefined")
    if np.all(P.slack(x0) >= -1e-12):
        return 0.0
    d = P.dim
    if norm == "linf":
        # min s  s.t.  A x <= b,  |x - x0|_i <= s
        eye = np.eye(d)
        c = np.zeros(d + 1)
        c[-1] = 1.0
        A_ub = np.vstack(
            [
                np.hstack([P.A, np.zeros((P.m, 1))]),
                np.hstack([eye, -np.ones((d, 1))]),
                np.hstack([-eye, -np.ones((d, 1))]),
            ]
        )
        b_ub = np.concatenate([P.b, x0, -x0])
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * (d + 1),
                      method="highs", options=_HIGHS)
        return float(max(res.x[-1], 0.0))
    n_sets = sum(comb(P.m, k) for k in range(1, min(d, P.m) + 1))
    if n_sets <= 20000:
        y = _project_active_sets(x0, P)
        if y is not None:
            return float(np.linalg.norm(y - x0))
    start, _ = chebyshev_center(P)
    cons = {"type": "ineq", "fun": lambda x: P.slack(x), "jac": lambda x: -P.A}
    res = minimize(lambda x: 0.5 * np.sum((x - x0) ** 2), start, jac=lambda x: x - x0,
                   constraints=[cons], method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
    return float(np.linalg.norm(res.x - x0))


def hoffman_beta(A, singular_tol: float = SINGULAR_DET) -> float:
    """Largest absolute entry over the inverses of all nonsingular square submatrices.

    Exhaustive, so only meant for matrices up to 6x6.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.size == 0:
        raise ConfigurationError("hoffman_beta of an empty matrix")
    m, n = A.shape
    if max(m, n) > 6:
        raise ConfigurationError("hoffman_beta enumerates submatrices; size is capped at 6x6")
    beta = 0.0
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            sub_r = A[list(rows)]
            for cols in itertools.combinations(range(n), k):
                B = sub_r[:, list(cols)]
                if abs(np.linalg.det(B)) <= singular_tol:
                    continue
                beta = max(beta, float(np.abs(np.linalg.inv(B)).max()))
    return beta


def _raw_polyhedron(A, b) -> Polytope:
    """Polytope for ``A x <= b`` tolerating zero rows (dropped when satisfied)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    zero = np.linalg.norm(A, axis=1) == 0
    if np.any(b[zero] < 0):
        raise PreconditionFailed("polyhedron has an unsatisfiable zero row")
    return Polytope(A[~zero], b[~zero])


def verify_hoffman_bound(A, b0, b, x0) -> bool:
    """Check the l-infinity perturbation bound ``dist(x0, G_b) <= n * beta(A) * |b - b0|``."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    b0 = np.asarray(b0, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = A.shape[1]
    if np.any(A @ x0 - b0 > 1e-9):
        raise PreconditionFailed("x0 is not in G_{b0}")
    G = _raw_polyhedron(A, b)
    if G.m and not _is_nonempty_closed(G):
        raise PreconditionFailed("G_b is empty")
    dist = distance_to_polyhedron(x0, G, "linf") if G.m else 0.0
    bound = n * hoffman_beta(A) * float(np.max(np.abs(b - b0)))
    return dist <= bound + 1e-9


# --- vertex enumeration -----------------------------------------------------


def polygon_area(V: np.ndarray) -> float:
    """Signed shoelace area (positive for counter-clockwise order)."""
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_perimeter(V: np.ndarray) -> float:
    return float(np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1).sum())


def clip_polygon(V: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Clip a convex polygon to ``{g >= 0}`` where ``g`` is affine.

    ``g`` holds the function values at the vertices; cut points are placed by
    linear interpolation of those values, so no inverse map is ever formed.
    """
    n = len(V)
    if n == 0:
        return V
    if np.all(g >= 0):
        return V
    if np.all(g <= 0):
        return V[:0]
    out = []
    for k in range(n):
        p, q = V[k], V[(k + 1) % n]
        gp, gq = g[k], g[(k + 1) % n]
        if gp >= 0:
            out.append(p)
        if (gp > 0 > gq) or (gp < 0 < gq):
            t = gp / (gp - gq)
            out.append(p + t * (q - p))
    if len(out) < 3:
        return V[:0]
    return _dedupe(np.asarray(out))


def _dedupe(V: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    keep = np.linalg.norm(V - np.roll(V, 1, axis=0), axis=1) > tol
    V = V[keep]
    return V if len(V) >= 3 else V[:0]


def _bounds(P: Polytope) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = np.empty(P.dim), np.empty(P.dim)
    for i in range(P.dim):
        for sign, store in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(P.dim)
            c[i] = sign
            res = linprog(c, A_ub=P.A, b_ub=P.b, bounds=[(None, None)] * P.dim,
                          method="highs", options=_HIGHS)
            if res.status == 3:
                raise UnboundedRegion("polytope is unbounded")
            if res.status != 0:
                raise DistanceToEmpty("polytope is empty")
            store[i] = res.x[i]
    return lo, hi


def vertices(P: Polytope) -> np.ndarray:
    """Vertices of a bounded polytope (d=1 endpoints, d=2 counter-clockwise)."""
    lo, hi = _bounds(P)
    if P.dim == 1:
        return np.array([[lo[0]], [hi[0]]])
    if P.dim == 2:
        pad = 1.0 + float(np.max(hi - lo))
        V = np.array([[lo[0] - pad, lo[1] - pad], [hi[0] + pad, lo[1] - pad],
                      [hi[0] + pad, hi[1] + pad], [lo[0] - pad, hi[1] + pad]])
        for a, c in zip(P.A, P.b):
            V = clip_polygon(V, c - V @ a)
            if len(V) == 0:
                break
        if len(V) == 0:
            # degenerate (lower-dimensional) polygon: fall back to bounding points
            return np.array([lo, hi])
        return V
    x, r = chebyshev_center(P)
    if r <= 1e-12:
        raise UnboundedRegion("vertex enumeration needs a full-dimensional polytope")
    hs = HalfspaceIntersection(np.hstack([P.A, -P.b[:, None]]), x)
    V = hs.intersections
    return np.unique(np.round(V, 12), axis=0)


# --- distances between convex bodies ---------------------------------------


def points_to_polygon_distance(points: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to a closed convex polygon (0 inside)."""
    points = np.atleast_2d(points)
    P0 = V
    P1 = np.roll(V, -1, axis=0)
    E = P1 - P0
    L2 = np.einsum("ij,ij->i", E, E)
    L2 = np.where(L2 == 0, 1.0, L2)
    rel = points[:, None, :] - P0[None, :, :]
    t = np.clip(np.einsum("kij,ij->ki", rel, E) / L2, 0.0, 1.0)
    proj = P0[None] + t[..., None] * E[None]
    seg = np.sqrt(((points[:, None, :] - proj) ** 2).sum(-1)).min(axis=1)
    if polygon_area(V) < 0:
        E = -E
        rel = points[:, None, :] - P1[None, :, :]
    cross = E[None, :, 0] * rel[..., 1] - E[None, :, 1] * rel[..., 0]
    inside = np.all(cross >= 0, axis=1)
    return np.where(inside, 0.0, seg)


def _point_set_distance(points: np.ndarray, Q: Polytope, VQ: np.ndarray) -> np.ndarray:
    if Q.dim == 1:
        lo, hi = VQ[:, 0].min(), VQ[:, 0].max()
        x = points[:, 0]
        return np.maximum(np.maximum(lo - x, x - hi), 0.0)
    if Q.dim == 2:
        return points_to_polygon_distance(points, VQ)
    return np.array([distance_to_polyhedron(p, Q) for p in points])


def hausdorff_distance(P: Polytope, Q: Polytope) -> float:
    """Hausdorff distance between the closures of two bounded polytopes.

    Distance to a convex set is a convex function, so each one-sided supremum
    is attained at a vertex; the result is exact in every dimension.
    """
    if P.dim != Q.dim:
        raise ConfigurationError("polytopes live in different dimensions")
    VP, VQ = P.vertices(), Q.vertices()
    a = _point_set_distance(VP, Q, VQ).max()
    b = _point_set_distance(VQ, P, VP).max()
    return float(max(a, b))
