"""Piecewise contractions: the interval family with breakpoints and the
polytope family cut by hyperplanes.

Both classes share one surface (``label``, ``step``, ``itinerary``,
``dist_to_singular``) so the symbolic and certification layers never branch
on the instantiation except where the geometry genuinely differs.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, OutsideDomain, SingularPoint
from .geometry import Polytope
from .ifs import AffineContraction, check_weight, invariance_check

DEFAULT_ETA = 1e-9
DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class Regular:
    label: object


@dataclass(frozen=True)
class Singular:
    distance: float


@dataclass(frozen=True)
class FailedAt:
    """Iterate ``k`` of the orbit landed within the boundary tolerance of S(f)."""

    k: int


class PiecewiseContraction:
    """Shared behaviour; subclasses supply ``sigma``, ``partition_distance``
    and ``boundary_distance``."""

    dim: int
    labels: tuple
    branches: dict
    space: Polytope
    eta: float
    weight: np.ndarray | None = None

    @property
    def lam(self) -> float:
        return max(phi.lip for phi in self.branches.values())

    @property
    def diameter(self) -> float:
        """Euclidean bound on ``diam(X)`` measured in the contraction norm."""
        if self.weight is None:
            return self.space.diameter()
        V = self.space.vertices()
        diff = V[:, None, :] - V[None, :, :]
        diam_w = float(np.sqrt(np.einsum("...i,ij,...j->...", diff, self.weight, diff)).max())
        return diam_w / float(np.sqrt(np.linalg.eigvalsh(self.weight).min()))

    def _check_inside(self, x: np.ndarray):
        if np.any(self.space.slack(x) < -DOMAIN_TOL):
            raise OutsideDomain(f"point {np.ravel(x).tolist()} lies outside the space")

    def dist_to_singular(self, x) -> float:
        x = self._point(x)
        return float(min(self.partition_distance(x), self.boundary_distance(x)))

    def label(self, x):
        x = self._point(x)
        self._check_inside(x)
        dist = self.dist_to_singular(x)
        if dist <= self.eta:
            return Singular(dist)
        return Regular(self.sigma(x))

    def is_regular(self, x) -> bool:
        return isinstance(self.label(x), Regular)

    def step(self, x, total: bool = False):
        """Apply the branch of the region containing ``x``.

        Points within ``eta`` of a partition boundary have an ambiguous branch
        and raise ``SingularPoint`` unless ``total`` selects the side convention.
        Domain-boundary points have a single adjacent branch and always step.
        """
        x = self._point(x)
        self._check_inside(x)
        if not total and self.partition_distance(x) <= self.eta:
            raise SingularPoint(f"point {np.ravel(x).tolist()} is on the partition boundary")
        return self._out(self.branches[self.sigma(x)](x))

    def orbit(self, x, n: int, total: bool = True) -> np.ndarray:
        pts = [self._point(x)]
        for _ in range(n):
            pts.append(self._point(self.step(pts[-1], total=total)))
        return np.array(pts)

    def itinerary(self, x, n: int):
        """Order-``n`` itinerary as a tuple, or ``FailedAt(k)`` for the first singular iterate."""
        if n < 1:
            raise ConfigurationError("itinerary order must be >= 1")
        x = self._point(x)
        word = []
        for k in range(n):
            lab = self.label(x)
            if isinstance(lab, Singular):
                return FailedAt(k)
            word.append(lab.label)
            if k + 1 < n:
                x = self._point(self.branches[lab.label](x))
        return tuple(word)

    def _point(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(x, dtype=float)).reshape(self.dim)

    def _out(self, y: np.ndarray):
        return y


class IntervalPC(PiecewiseContraction):
    """Piecewise contraction of [0, 1] with breakpoints ``0 < mu_1 < ... < 1``.

    ``sides[i]`` decides which branch owns breakpoint ``i`` under total
    evaluation (``"left"`` by default). ``check`` selects the load-time
    invariance test: ``"A2"`` requires every branch to map [0, 1] into (0, 1);
    ``"pieces"`` only asks each branch to map its own closed piece into
    [0, 1] (the contracted rotation); ``None`` skips it.
    ``include_boundary=False`` drops the endpoints 0 and 1 from the singular
    set, which is right for circle-like maps whose images touch them.
    """

    dim = 1

    def __init__(self, slopes: Sequence[float], offsets: Sequence[float],
                 breakpoints: Sequence[float] = (), eta: float = DEFAULT_ETA,
                 sides: Sequence[str] | None = None, check: str | None = "A2",
                 include_boundary: bool = True):
        slopes = [float(s) for s in slopes]
        offsets = [float(c) for c in offsets]
        bps = [float(m) for m in breakpoints]
        N = len(slopes)
        if N < 1 or len(offsets) != N:
            raise ConfigurationError("need matching slopes and offsets for at least one branch")
        if len(bps) != N - 1:
            raise ConfigurationError(f"{N} branches need {N - 1} breakpoints, got {len(bps)}")
        if any(s == 0.0 for s in slopes):
            raise ConfigurationError("branch slopes must be nonzero (bi-Lipschitz branches)")
        grid = [0.0] + bps + [1.0]
        if any(not a < b for a, b in zip(grid, grid[1:])):
            raise ConfigurationError(f"breakpoints must satisfy 0 < mu_1 < ... < 1, got {bps}")
        sides = list(sides) if sides is not None else ["left"] * (N - 1)
        if len(sides) != N - 1 or any(s not in ("left", "right") for s in sides):
            raise ConfigurationError("sides must list 'left' or 'right' per breakpoint")
        if eta < 0:
            raise ConfigurationError("eta must be nonnegative")
        self.slopes, self.offsets, self.breakpoints = tuple(slopes), tuple(offsets), tuple(bps)
        self.sides = tuple(sides)
        self.eta = float(eta)
        self.labels = tuple(range(1, N + 1))
        self.branches = {i + 1: AffineContraction.scalar(s, c)
                         for i, (s, c) in enumerate(zip(slopes, offsets))}
        self.space = Polytope.interval(0.0, 1.0)
        self.space._vertex_cache.append(np.array([[0.0], [1.0]]))
        self.grid = tuple(grid)
        self.check = check
        self.include_boundary = bool(include_boundary)
        self._validate(check)

    def _validate(self, check):
        if check is None:
            return
        for i, (s, c) in enumerate(zip(self.slopes, self.offsets)):
            if check == "A2":
                lo, hi = sorted((c, s + c))
                if not (0.0 < lo and hi < 1.0):
                    raise ConfigurationError(
                        f"branch {i + 1} maps [0,1] onto [{lo:.17g}, {hi:.17g}], not inside (0,1)")
            elif check == "pieces":
                a, b = self.grid[i], self.grid[i + 1]
                lo, hi = sorted((s * a + c, s * b + c))
                if lo < -DOMAIN_TOL or hi > 1.0 + DOMAIN_TOL:
                    raise ConfigurationError(f"branch {i + 1} maps its piece outside [0,1]")
            else:
                raise ConfigurationError(f"unknown invariance check {check!r}")

    @property
    def N(self) -> int:
        return len(self.slopes)

    @property
    def lam(self) -> float:
        return max(abs(s) for s in self.slopes)

    @property
    def diameter(self) -> float:
        return 1.0

    def with_breakpoints(self, breakpoints) -> "IntervalPC":
        return IntervalPC(self.slopes, self.offsets, breakpoints, self.eta, self.sides,
                          self.check, self.include_boundary)

    def _point(self, x) -> float:
        if isinstance(x, float):
            return x
        return float(np.asarray(x, dtype=float).reshape(-1)[0])

    def _out(self, y):
        return float(np.asarray(y).reshape(-1)[0])

    def _check_inside(self, x: float):
        if x < -DOMAIN_TOL or x > 1.0 + DOMAIN_TOL:
            raise OutsideDomain(f"point {x!r} lies outside [0, 1]")

    def sigma(self, x: float) -> int:
        k = bisect_left(self.breakpoints, x)
        if k < len(self.breakpoints) and x == self.breakpoints[k] and self.sides[k] == "right":
            return k + 2
        return k + 1

    def partition_distance(self, x: float) -> float:
        if not self.breakpoints:
            return np.inf
        k = bisect_left(self.breakpoints, x)
        best = np.inf
        if k < len(self.breakpoints):
            best = self.breakpoints[k] - x
        if k > 0:
            best = min(best, x - self.breakpoints[k - 1])
        return abs(best)

    def boundary_distance(self, x: float) -> float:
        if not self.include_boundary:
            return np.inf
        return min(abs(x), abs(1.0 - x))

    def dist_to_singular_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1)
        pts = list(self.breakpoints) + ([0.0, 1.0] if self.include_boundary else [])
        if not pts:
            return np.full(xs.shape, np.inf)
        return np.abs(xs[:, None] - np.array(pts)[None, :]).min(axis=1)

    def step(self, x, total: bool = False) -> float:
        x = self._point(x)
        self._check_inside(x)
        if not total and self.partition_distance(x) <= self.eta:
            raise SingularPoint(f"point {x!r} is on a breakpoint")
        i = self.sigma(x) - 1
        return self.slopes[i] * x + self.offsets[i]

    def orbit(self, x, n: int, total: bool = True) -> np.ndarray:
        x = self._point(x)
        out = [x]
        for _ in range(n):
            x = self.step(x, total=total)
            out.append(x)
        return np.array(out)

    def itinerary(self, x, n: int):
        if n < 1:
            raise ConfigurationError("itinerary order must be >= 1")
        x = self._point(x)
        self._check_inside(x)
        word = []
        for k in range(n):
            if self.dist_to_singular(x) <= self.eta:
                return FailedAt(k)
            i = self.sigma(x)
            word.append(i)
            x = self.slopes[i - 1] * x + self.offsets[i - 1]
        return tuple(word)

    def step_many(self, xs: np.ndarray) -> np.ndarray:
        """Total evaluation on an array of points."""
        xs = np.asarray(xs, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), xs, side="left")
        if self.breakpoints:
            bp = np.asarray(self.breakpoints)
            hit = (idx < len(bp)) & (bp[np.minimum(idx, len(bp) - 1)] == xs)
            right = np.array([s == "right" for s in self.sides])
            idx = np.where(hit & right[np.minimum(idx, len(bp) - 1)], idx + 1, idx)
        return np.asarray(self.slopes)[idx] * xs + np.asarray(self.offsets)[idx]


class HyperplanePC(PiecewiseContraction):
    """Piecewise-affine contraction of a convex polytope ``X`` cut by hyperplanes
    ``<v_j, x> = mu_j``, with one branch per sign pattern in ``{-1, 1}^l``."""

    def __init__(self, space: Polytope, normals, offsets, branches: dict,
                 eta: float = DEFAULT_ETA, include_boundary: bool = True,
                 weight=None, check_invariance: bool = True):
        mu = np.atleast_1d(np.asarray(offsets, dtype=float)).reshape(-1)
        V = np.asarray(normals, dtype=float).reshape(mu.size, -1) if mu.size else np.zeros((0, space.dim))
        if V.shape[0] != mu.size:
            raise ConfigurationError(f"{V.shape[0]} normals but {mu.size} offsets")
        if V.shape[1] != space.dim:
            raise ConfigurationError("normals and space dimensions differ")
        if np.any(np.abs(np.linalg.norm(V, axis=1) - 1.0) > 1e-12):
            raise ConfigurationError("hyperplane normals must be unit vectors")
        if eta < 0:
            raise ConfigurationError("eta must be nonnegative")
        self.space = space
        self.dim = space.dim
        self.normals = V
        self.offsets = mu
        self.eta = float(eta)
        self.include_boundary = bool(include_boundary)
        self.weight = check_weight(weight)
        self.labels = tuple(itertools.product((-1, 1), repeat=mu.size))
        norm_branches = {}
        for lab in self.labels:
            if lab not in branches:
                raise ConfigurationError(f"missing branch for label {lab}")
            phi = branches[lab]
            if self.weight is not None and phi.weight is None:
                phi = AffineContraction(phi.Lambda, phi.b, weight=self.weight)
            if phi.dim != self.dim:
                raise ConfigurationError(f"branch {lab} has dimension {phi.dim}")
            if abs(np.linalg.det(phi.Lambda)) == 0.0:
                raise ConfigurationError(f"branch {lab} is not injective")
            norm_branches[lab] = phi
        extra = set(branches) - set(self.labels)
        if extra:
            raise ConfigurationError(f"unknown branch labels {sorted(extra)}")
        self.branches = norm_branches
        if check_invariance:
            for lab, phi in self.branches.items():
                if not invariance_check(phi, space):
                    raise ConfigurationError(f"branch {lab} does not map X into its interior")

    @property
    def ell(self) -> int:
        return self.offsets.size

    def with_offsets(self, offsets) -> "HyperplanePC":
        return HyperplanePC(self.space, self.normals, offsets, self.branches, self.eta,
                            self.include_boundary, self.weight, check_invariance=False)

    def sigma(self, x) -> tuple:
        x = self._point(x)
        return tuple(-1 if t <= m else 1 for t, m in zip(self.normals @ x, self.offsets))

    def partition_distance(self, x) -> float:
        if self.ell == 0:
            return np.inf
        return float(np.min(np.abs(self.normals @ self._point(x) - self.offsets)))

    def boundary_distance(self, x) -> float:
        if not self.include_boundary:
            return np.inf
        return float(max(self.space.slack(self._point(x)).min(), 0.0))

    def dist_to_singular_many(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        dist = np.full(len(xs), np.inf)
        if self.ell:
            dist = np.abs(xs @ self.normals.T - self.offsets).min(axis=1)
        if self.include_boundary:
            dist = np.minimum(dist, np.maximum(self.space.slack(xs).min(axis=1), 0.0))
        return dist

    def step_many(self, xs: np.ndarray) -> np.ndarray:
        """Total evaluation with the on-hyperplane-means-negative convention, on a ``(k, d)`` array."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        signs = np.where(xs @ self.normals.T <= self.offsets, -1, 1)
        out = np.empty_like(xs)
        codes = (signs > 0) @ (1 << np.arange(self.ell)[::-1])
        for lab in self.labels:
            code = sum(1 << (self.ell - 1 - j) for j, s in enumerate(lab) if s > 0)
            sel = codes == code
            if sel.any():
                out[sel] = self.branches[lab](xs[sel])
        return out
