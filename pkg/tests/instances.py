"""Random instance generators shared by the test modules."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from pclab.geometry import Polytope
from pclab.ifs import AffineContraction
from pclab.pwc import HyperplanePC, IntervalPC

UNIT_SQUARE = Polytope.box([0.0, 0.0], [1.0, 1.0])


def random_interval_branches(rng, N: int, smax: float = 0.8):
    """Slopes and offsets whose branches map [0, 1] into (0.02, 0.98)."""
    slopes, offsets = [], []
    for _ in range(N):
        s = rng.uniform(0.1, smax) * rng.choice([-1.0, 1.0])
        lo_img = rng.uniform(0.02, 0.98 - abs(s))
        c = lo_img if s > 0 else lo_img - s
        slopes.append(float(s))
        offsets.append(float(c))
    return slopes, offsets


def random_breakpoints(rng, N: int):
    while True:
        mu = np.sort(rng.uniform(0.05, 0.95, N - 1))
        if N == 1 or np.min(np.diff(np.concatenate([[0.0], mu, [1.0]]))) > 0.02:
            return mu.tolist()


def random_interval_pc(rng, N: int) -> IntervalPC:
    s, c = random_interval_branches(rng, N)
    return IntervalPC(s, c, random_breakpoints(rng, N))


def random_planar_branches(rng, ell: int, norm: float = 0.4, homothety: bool = False) -> dict:
    out = {}
    for lab in itertools.product((-1, 1), repeat=ell):
        if homothety:
            L = rng.uniform(0.1, norm) * np.eye(2)
        else:
            L = rng.normal(size=(2, 2))
            L *= rng.uniform(0.1, norm) / np.linalg.norm(L, 2)
        center = rng.uniform(0.3, 0.7, 2)
        out[lab] = AffineContraction(L, center - L @ np.array([0.5, 0.5]))
    return out


def random_normals(rng, ell: int) -> np.ndarray:
    ang = rng.uniform(0, np.pi, ell)
    return np.column_stack([np.cos(ang), np.sin(ang)])


def offsets_through_square(rng, normals: np.ndarray) -> np.ndarray:
    pts = rng.uniform(0.2, 0.8, (len(normals), 2))
    return np.einsum("ij,ij->i", normals, pts)


def random_planar_pc(rng, ell: int, norm: float = 0.4, homothety: bool = False) -> HyperplanePC:
    V = random_normals(rng, ell)
    return HyperplanePC(UNIT_SQUARE, V, offsets_through_square(rng, V),
                        random_planar_branches(rng, ell, norm, homothety))


def random_rational_interval(rng, N: int, denom: int = 997):
    """Branch data and breakpoints as exact fractions (and their float images)."""
    while True:
        slopes, offsets, bps = [], [], []
        for _ in range(N):
            s = Fraction(int(rng.integers(100, 800)), 1000) * int(rng.choice([-1, 1]))
            width = abs(s)
            lo = Fraction(int(rng.integers(20, int((0.98 - float(width)) * 1000))), 1000)
            c = lo if s > 0 else lo - s
            slopes.append(s)
            offsets.append(c)
        bps = sorted({Fraction(int(k), denom) for k in rng.integers(50, denom - 50, N - 1)})
        if len(bps) == N - 1:
            return slopes, offsets, bps
