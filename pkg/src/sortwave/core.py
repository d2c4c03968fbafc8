"""Shared numerical kernels: grids, tridiagonal solves, quadrature, cubic roots.

Everything in this module is a pure function of its inputs (no globals, no
caches), so all kernels are safe to call concurrently from independent tasks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
import scipy.linalg

from .errors import SingularSystemError

__all__ = [
    "Grid1D",
    "TridiagonalSystem",
    "tridiag_solve",
    "banded_solve",
    "trapezoid",
    "trapezoid_weights",
    "depressed_cubic_root",
    "thread_count",
    "parallel_map",
]

_T = TypeVar("_T")
_U = TypeVar("_U")


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n`` nodes on [lo, hi], both endpoints included.

    Node ``j`` sits at ``lo + j*h`` with ``h = (hi - lo)/(n - 1)``; the same
    expression is used everywhere so coordinates are exactly reproducible.
    """

    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"Grid1D needs n >= 3, got n={self.n}")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise ValueError(f"Grid1D needs finite hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def h(self) -> float:
        """Node spacing (hi - lo)/(n - 1)."""
        return (self.hi - self.lo) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        """Coordinates lo + j*h for j = 0 .. n-1."""
        return self.lo + self.h * np.arange(self.n)

    def shifted(self, offset: float) -> "Grid1D":
        """Same grid translated by ``offset`` (used by the moving window)."""
        return Grid1D(self.lo + offset, self.hi + offset, self.n)


@dataclass
class TridiagonalSystem:
    """Tridiagonal linear system ``A x = rhs``.

    ``sub`` and ``sup`` are one entry shorter than ``diag``; ``sub[i]``
    multiplies ``x[i]`` in row ``i+1`` and ``sup[i]`` multiplies ``x[i+1]``
    in row ``i``.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        self.sub = np.asarray(self.sub, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.sup = np.asarray(self.sup, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = self.diag.size
        if n < 1:
            raise ValueError("empty system")
        if self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ValueError(
                f"band lengths inconsistent: diag has {n}, sub has {self.sub.size}, "
                f"sup has {self.sup.size} (want {n - 1})"
            )
        if self.rhs.shape[0] != n:
            raise ValueError(f"rhs length {self.rhs.shape[0]} != {n}")

    @property
    def n(self) -> int:
        return self.diag.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Product ``A x`` of the matrix part with a vector."""
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[:-1] += self.sup * x[1:]
        out[1:] += self.sub * x[:-1]
        return out


def banded_solve(
    sub: np.ndarray, diag: np.ndarray, sup: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve a tridiagonal system given raw bands; ``rhs`` may be a matrix.

    Thin wrapper over LAPACK's banded LU (``scipy.linalg.solve_banded``);
    exact singularity is reported as :class:`SingularSystemError`.
    """
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystemError(f"singular system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("singular system: non-finite solution")
    return x


def tridiag_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve ``A x = rhs`` for a :class:`TridiagonalSystem`.

    The caller guarantees reasonable conditioning (diagonal dominance or
    positive definiteness); a zero pivot raises :class:`SingularSystemError`.
    """
    if system.n == 1:
        if system.diag[0] == 0.0:
            raise SingularSystemError("singular system: zero pivot")
        return system.rhs / system.diag[0]
    return banded_solve(system.sub, system.diag, system.sup, system.rhs)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Trapezoid quadrature weights: h everywhere, h/2 at the two endpoints."""
    w = np.full(n, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


def trapezoid(values: np.ndarray, h: float) -> float:
    """Trapezoid rule on uniformly spaced samples; exact for affine integrands."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("trapezoid needs a nonempty vector")
    if v.size == 1:
        return 0.0
    return float(h * (v.sum() - 0.5 * (v[0] + v[-1])))


def depressed_cubic_root(p, q):
    """Unique real root of ``Z**3 + p*Z + q = 0`` for ``p >= 0``.

    For ``p > 0`` the cubic is strictly increasing, so the root is unique and
    given branch-free by the hyperbolic closed form
    ``Z = -2*sqrt(p/3)*sinh(asinh(1.5*q/p*sqrt(3/p))/3)``; for ``p = 0`` it
    degenerates to ``-cbrt(q)``.  Accepts scalars or arrays (broadcast).
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(p_arr < 0):
        raise ValueError("depressed_cubic_root requires p >= 0")
    p_b, q_b = np.broadcast_arrays(p_arr, q_arr)
    positive = p_b > 0
    p_safe = np.where(positive, p_b, 1.0)
    w = 1.5 * q_b / p_safe * np.sqrt(3.0 / p_safe)
    root_hyp = -2.0 * np.sqrt(p_safe / 3.0) * np.sinh(np.arcsinh(w) / 3.0)
    root = np.where(positive, root_hyp, -np.cbrt(q_b))
    if root.ndim == 0:
        return float(root)
    return root


def thread_count() -> int:
    """Parallel-map width from SORTWAVE_THREADS (0 or unset means auto)."""
    raw = os.environ.get("SORTWAVE_THREADS", "0").strip()
    try:
        k = int(raw)
    except ValueError as exc:
        raise ValueError(f"SORTWAVE_THREADS must be an integer, got {raw!r}") from exc
    if k < 0:
        raise ValueError(f"SORTWAVE_THREADS must be >= 0, got {k}")
    if k == 0:
        return os.cpu_count() or 1
    return k


def parallel_map(fn: Callable[[_T], _U], items: Iterable[_T]) -> list[_U]:
    """Map ``fn`` over ``items``, possibly with a thread pool.

    Results are gathered in input order, so the output is independent of
    scheduling; with width 1 this is a plain loop.
    """
    seq: Sequence[_T] = list(items)
    width = min(thread_count(), len(seq)) if seq else 1
    if width <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(fn, seq))
