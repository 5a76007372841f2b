"""Ball covers of the limit set, the separation certificate and periodic orbits.

At depth ``n`` the images of a base point under every realizable composition
are the centres of balls of radius ``2 diam(X) lam**n`` that cover every
omega-limit set of a regular orbit. When all centres sit farther than that
radius from the singular set, the limit set misses it, the shift on cylinders
becomes a well-defined map, and each of its cycles carries an attracting
periodic orbit obtained as the fixed point of the composed branches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CertificateInconsistent, ConfigurationError, SeparationViolated
from .geometry import chebyshev_center
from .ifs import compose, fixed_point
from .pwc import FailedAt, IntervalPC, PiecewiseContraction
from .symbolic import Cylinder, CylinderCollection, iter_levels

CERT_SLACK = 1e-12
ORBIT_TOL = 1e-10
DEFAULT_CAP = 10**6
MIN_RADIUS = 1e-14


def default_schedule(max_depth: int = 64) -> list[int]:
    return [n for n in [4, 8, *range(16, max_depth + 1, 8)] if n <= max_depth]


def default_base_point(f: PiecewiseContraction) -> np.ndarray:
    if isinstance(f, IntervalPC):
        return np.array([0.0])
    return chebyshev_center(f.space)[0]


def cover_radius(f: PiecewiseContraction, n: int) -> float:
    return 2.0 * f.diameter * f.lam**n


@dataclass(frozen=True)
class OmegaCover:
    depth: int
    base_point: np.ndarray
    centers: np.ndarray
    radius: float

    def distance(self, points) -> np.ndarray:
        """Distance from each point to the nearest centre."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.centers.shape[1]:
            P = P.reshape(-1, self.centers.shape[1])
        d2 = ((P[:, None, :] - self.centers[None, :, :]) ** 2).sum(-1)
        return np.sqrt(d2.min(axis=1))

    def covers(self, points, tol: float = 1e-9) -> np.ndarray:
        return self.distance(points) <= self.radius + tol


def omega_cover(f: PiecewiseContraction, x0=None, n: int = 1,
                collection: CylinderCollection | None = None) -> OmegaCover:
    """Ball cover at depth ``n`` around the images of ``x0``."""
    if n < 1:
        raise ConfigurationError("depth must be >= 1")
    x0 = default_base_point(f) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    if np.any(f.space.slack(x0) < -1e-12):
        raise ConfigurationError("base point must lie in the space")
    if collection is None or collection.depth != n:
        for collection in iter_levels(f, n):
            pass
    return OmegaCover(n, x0, collection.centers(x0), cover_radius(f, n))


@dataclass(frozen=True)
class PeriodicOrbit:
    points: np.ndarray
    period: int
    words: tuple

    def to_record(self) -> dict:
        return {"period": self.period, "points": self.points.tolist()}


@dataclass(frozen=True)
class PeriodicityCertificate:
    depth: int
    base_point: np.ndarray
    separation: float
    radius: float
    count: int
    transition: dict
    cycles: list
    orbits: list
    tested: tuple = field(default=())

    @property
    def margin(self) -> float:
        return self.separation - self.radius

    @property
    def periods(self) -> list[int]:
        return [o.period for o in self.orbits]

    def to_record(self) -> dict:
        return {
            "outcome": "certified",
            "depth": self.depth,
            "separation": self.separation,
            "radius": self.radius,
            "margin": self.margin,
            "itineraries": self.count,
            "cycles": [len(c) for c in self.cycles],
            "orbits": [o.to_record() for o in self.orbits],
        }


@dataclass(frozen=True)
class Undecided:
    max_depth: int
    best_margin: float
    tested: tuple = field(default=())
    reason: str = "separation not established"

    def to_record(self) -> dict:
        return {
            "outcome": "undecided",
            "depth": self.max_depth,
            "margin": self.best_margin,
            "reason": self.reason,
        }


def _second_sample(cyl: Cylinder) -> np.ndarray:
    if cyl.interval is not None:
        lo, hi = cyl.interval
        return np.array([lo + 0.25 * (hi - lo)])
    w = cyl.witness
    if cyl.vertices is not None:
        return 0.5 * (w + cyl.vertices[0])
    # halfway to the boundary along the first coordinate keeps the sample interior
    e = np.zeros_like(w)
    e[0] = 0.5 * cyl.inradius
    return w + e


def _center_label(f: PiecewiseContraction, cyl: Cylinder, x0: np.ndarray):
    c = np.atleast_1d(cyl.apply(x0))
    return f.sigma(float(c[0]) if isinstance(f, IntervalPC) else c)


def transition_map(f: PiecewiseContraction, collection: CylinderCollection,
                   x0=None) -> dict:
    """Map each word to the word of the cylinder containing the image of its cylinder.

    The target is read off the itinerary of the image of the witness and must
    agree with a second interior sample, with the shifted word, and (when a
    base point is given) with the label of the cover centre.
    """
    n = collection.depth
    words = collection.itineraries
    out = {}
    for cyl in collection:
        targets = []
        for x in (cyl.witness, _second_sample(cyl)):
            y = f.step(x if f.dim > 1 else float(x[0]), total=True)
            w = f.itinerary(y, n)
            if isinstance(w, FailedAt):
                raise SeparationViolated(f"image of cylinder {cyl.word} meets the singular set")
            targets.append(w)
        a = targets[0]
        if targets[1] != a:
            raise SeparationViolated(f"cylinder {cyl.word} straddles {a} and {targets[1]}")
        if a[:-1] != cyl.word[1:]:
            raise SeparationViolated(f"target {a} of {cyl.word} is not a shift")
        if x0 is not None and _center_label(f, cyl, x0) != a[-1]:
            raise SeparationViolated(f"centre label of {cyl.word} disagrees with its image")
        if a not in words:
            raise SeparationViolated(f"target {a} of {cyl.word} is not an enumerated cylinder")
        out[cyl.word] = a
    return out


def find_cycles(transition: dict) -> list[list]:
    """Cycles of a finite functional graph, each rotated to start at its least word."""
    state, cycles = {}, []
    for start in sorted(transition, key=repr):
        path, w = [], start
        while w not in state:
            state[w] = start
            path.append(w)
            w = transition[w]
        if state[w] == start:
            cyc = path[path.index(w):]
            k = min(range(len(cyc)), key=lambda i: repr(cyc[i]))
            cycles.append(cyc[k:] + cyc[:k])
    return cycles


def minimal_period(f: PiecewiseContraction, x, p: int, tol: float = ORBIT_TOL) -> int:
    """Least ``q <= p`` with ``|f^q(x) - x| <= tol`` (``p`` if none is smaller)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = x
    for q in range(1, p + 1):
        y = np.atleast_1d(f.step(y if f.dim > 1 else float(y[0]), total=True))
        if np.linalg.norm(y - x) <= tol:
            return q
    return p


def extract_orbits(f: PiecewiseContraction, transition: dict,
                   collection: CylinderCollection, tol: float = ORBIT_TOL) -> tuple[list, list]:
    """Periodic orbits carried by the cycles of ``transition``.

    The composition of the leading symbols around a cycle maps the first
    cylinder into itself, so its fixed point starts a periodic orbit.
    """
    cylinders = collection.by_word()
    cycles = find_cycles(transition)
    orbits = []
    for cyc in cycles:
        symbols = [w[0] for w in cyc]
        g = compose(f.branches, symbols)
        x = fixed_point(g)
        pts = [x]
        for k, w in enumerate(cyc):
            if not cylinders[w].contains(pts[-1]):
                raise CertificateInconsistent(
                    f"orbit point {pts[-1].tolist()} left cylinder {w} of its cycle")
            if k + 1 < len(cyc):
                pts.append(f.branches[w[0]](pts[-1]))
        back = f.branches[cyc[-1][0]](pts[-1])
        if np.linalg.norm(back - x) > tol:
            raise CertificateInconsistent(f"cycle residual {np.linalg.norm(back - x):.3g}")
        q = minimal_period(f, x, len(cyc), tol)
        orbits.append(PeriodicOrbit(np.array(pts[:q]), q, tuple(cyc[:q])))
    return cycles, orbits


def separation(f: PiecewiseContraction, centers: np.ndarray) -> float:
    if isinstance(f, IntervalPC):
        return float(f.dist_to_singular_many(centers[:, 0]).min())
    return float(f.dist_to_singular_many(centers).min())


def certify(f: PiecewiseContraction, x0=None, schedule: Iterable[int] | None = None,
            cap: int | None = DEFAULT_CAP, slack: float = CERT_SLACK,
            orbit_tol: float = ORBIT_TOL):
    """Try each depth of ``schedule`` until the cover separates from the singular set.

    Returns a ``PeriodicityCertificate`` on success and ``Undecided`` when every
    depth fails or the radius drops below round-off. Exceeding ``cap`` cylinders
    raises ``ResourceExceeded``.
    """
    schedule = sorted(set(default_schedule() if schedule is None else schedule))
    if not schedule or schedule[0] < 1:
        raise ConfigurationError("schedule must be a nonempty list of positive depths")
    x0 = default_base_point(f) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    wanted = set(schedule)
    best, tested, last = -np.inf, [], 0
    for coll in iter_levels(f, schedule[-1], cap=cap):
        n = coll.depth
        if n not in wanted:
            continue
        radius = cover_radius(f, n)
        if radius < MIN_RADIUS:
            return Undecided(last, best, tuple(tested), "cover radius below round-off")
        last = n
        eps = separation(f, coll.centers(x0))
        tested.append((n, eps, radius))
        best = max(best, eps - radius)
        if not eps > radius + slack:
            continue
        try:
            trans = transition_map(f, coll, x0)
        except SeparationViolated:
            continue
        cycles, orbits = extract_orbits(f, trans, coll, orbit_tol)
        return PeriodicityCertificate(n, x0, eps, radius, len(coll), trans, cycles, orbits,
                                      tuple(tested))
    return Undecided(last, best, tuple(tested))


def verify_certificate(f: PiecewiseContraction, cert: PeriodicityCertificate) -> bool:
    """Recompute both sides of the separation inequality from scratch."""
    cover = omega_cover(f, cert.base_point, cert.depth)
    eps = separation(f, cover.centers)
    return bool(eps > cover.radius + CERT_SLACK and abs(eps - cert.separation) <= 1e-12)


def orbit_points(cert: PeriodicityCertificate) -> np.ndarray:
    if not cert.orbits:
        return np.zeros((0, len(cert.base_point)))
    return np.vstack([o.points for o in cert.orbits])


def distance_to_orbits(cert: PeriodicityCertificate, points: Sequence) -> np.ndarray:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    Q = orbit_points(cert)
    if P.shape[1] != Q.shape[1]:
        P = P.reshape(-1, Q.shape[1])
    return np.sqrt(((P[:, None, :] - Q[None, :, :]) ** 2).sum(-1)).min(axis=1)
