"""Affine contractions and their compositions along symbol words."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, NotAContraction, UnknownLabel
from .geometry import Polytope

Label = Hashable
Word = tuple


def operator_norm(M: np.ndarray, weight: np.ndarray | None = None) -> float:
    """Operator norm of ``M`` induced by ``|x|_W = sqrt(x^T W x)`` (Euclidean if no W)."""
    M = np.atleast_2d(M)
    if weight is None:
        if M.shape == (1, 1):
            return abs(float(M[0, 0]))
        return float(np.linalg.norm(M, 2))
    w, Q = np.linalg.eigh(weight)
    root = Q @ np.diag(np.sqrt(w)) @ Q.T
    inv_root = Q @ np.diag(1.0 / np.sqrt(w)) @ Q.T
    return float(np.linalg.norm(root @ M @ inv_root, 2))


def check_weight(weight) -> np.ndarray | None:
    if weight is None:
        return None
    W = np.asarray(weight, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or not np.allclose(W, W.T):
        raise ConfigurationError("norm weight must be a symmetric square matrix")
    if np.linalg.eigvalsh(W).min() <= 0:
        raise ConfigurationError("norm weight must be positive definite")
    return W


@dataclass(frozen=True, eq=False)
class AffineContraction:
    """``x -> Lambda @ x + b`` with Lipschitz constant ``lip < 1``.

    ``lip`` defaults to the induced operator norm of ``Lambda`` (Euclidean, or
    the norm given by ``weight``); an explicit ``lip`` must dominate it.
    """

    Lambda: np.ndarray
    b: np.ndarray
    lip: float | None = None
    weight: np.ndarray | None = None

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).reshape(-1)
        if L.shape != (b.size, b.size):
            raise ConfigurationError(f"Lambda shape {L.shape} does not match b of length {b.size}")
        norm = operator_norm(L, self.weight)
        lip = norm if self.lip is None else float(self.lip)
        if lip < norm - 1e-12:
            raise ConfigurationError(f"declared lip {lip} is below the operator norm {norm}")
        if not lip < 1.0:
            raise NotAContraction(f"Lipschitz constant {lip:.6g} is not below 1")
        L.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Lambda", L)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lip", lip)

    @classmethod
    def scalar(cls, slope: float, offset: float) -> "AffineContraction":
        return cls([[slope]], [offset])

    @classmethod
    def homothety(cls, ratio: float, b) -> "AffineContraction":
        b = np.atleast_1d(np.asarray(b, dtype=float))
        return cls(ratio * np.eye(b.size), b)

    @property
    def dim(self) -> int:
        return self.b.size

    @property
    def is_homothety(self) -> bool:
        L = self.Lambda
        return bool(np.allclose(L, L[0, 0] * np.eye(self.dim), atol=1e-14))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.Lambda.T + self.b

    def then(self, other: "AffineContraction") -> "AffineContraction":
        """``other`` applied after ``self``."""
        return AffineContraction(
            other.Lambda @ self.Lambda,
            other.Lambda @ self.b + other.b,
            lip=other.lip * self.lip,
            weight=self.weight,
        )


def compose(maps: Mapping[Label, AffineContraction], word: Sequence[Label]) -> AffineContraction:
    """Return the composition along ``word``: the last symbol is applied outermost."""
    if len(word) == 0:
        raise ConfigurationError("cannot compose along an empty word")
    try:
        phi = maps[word[0]]
        for sym in word[1:]:
            phi = phi.then(maps[sym])
    except KeyError as exc:
        raise UnknownLabel(f"label {exc.args[0]!r} is not in the family") from None
    return phi


def fixed_point(phi: AffineContraction) -> np.ndarray:
    """Unique fixed point of a contraction, by solving ``(I - Lambda) x = b``."""
    if not phi.lip < 1.0:
        raise NotAContraction("fixed point requires a contraction")
    d = phi.dim
    x = np.linalg.solve(np.eye(d) - phi.Lambda, phi.b)
    # one refinement step keeps the residual at round-off level for ill-conditioned I - Lambda
    x = x + np.linalg.solve(np.eye(d) - phi.Lambda, phi(x) - x)
    return x


def invariance_check(phi: AffineContraction, X: Polytope, tol: float = 0.0) -> bool:
    """True when the image of ``X`` sits in the interior of ``X``.

    Affine images of a convex body are the hull of the vertex images, so it is
    enough to test vertices against every bounding row.
    """
    if phi.dim != X.dim:
        raise ConfigurationError("map and polytope dimensions differ")
    V = X.vertices()
    return bool(np.all(X.slack(phi(V)) > tol))
