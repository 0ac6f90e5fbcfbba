"""Fiberization of generator sets on a midpoint frequency grid.

The fiber of ``f`` at ``w`` is the sequence ``(fhat(w + k))_k`` over integer
shifts ``k``. For generators with compactly supported Fourier transform
only finitely many shifts are nonzero, so a finite window of shifts gives
the fiber exactly. Every question about a shift-invariant space is then a
question about the columns of small complex matrices, one per grid node.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dsl import GeneratorSpec, PiecewiseSpec, SampledFibers, evaluate_fourier

__all__ = [
    "GridWarning", "FrequencyGrid", "FiberWindow", "FiberMatrix", "DimensionFunction",
    "midpoint_grid", "fiber_window", "fiberize", "fiber_stack", "check_grid",
    "dimension_function", "numerical_rank", "fiber_basis", "fiber_projection",
]

PERTURBATION = 1e-9


class GridWarning(UserWarning):
    """A grid node coincided with a breakpoint and was shifted."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Midpoints ``(m + 1/2) / M`` of a uniform partition of ``[0, 1)^n``.

    Nodes are listed in lexicographic order of the multi-index ``m``.
    ``offset`` is nonzero only after a breakpoint collision was repaired.
    """

    n: int
    M: int
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.M < 1:
            raise ValueError(f"grid needs n >= 1 and M >= 1, got n={self.n}, M={self.M}")

    @property
    def size(self) -> int:
        return self.M ** self.n

    @property
    def nodes(self) -> np.ndarray:
        """Array of shape ``(M**n, n)``."""
        axis = np.array([(2 * m + 1) / (2 * self.M) for m in range(self.M)]) + self.offset
        if self.n == 1:
            return axis[:, None]
        return np.array(list(itertools.product(axis, repeat=self.n)))

    def __iter__(self):
        return iter(map(tuple, self.nodes))

    def __len__(self):
        return self.size


def midpoint_grid(n: int, M: int) -> FrequencyGrid:
    return FrequencyGrid(n, M)


@dataclass(frozen=True)
class FiberWindow:
    """Finite, lexicographically sorted set of integer shifts."""

    indices: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(set(map(tuple, self.indices)))))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def union(self, other: "FiberWindow") -> "FiberWindow":
        return FiberWindow(self.indices + other.indices)

    def row(self, k: tuple[int, ...]) -> int:
        return self.indices.index(tuple(k))


@dataclass(frozen=True)
class FiberMatrix:
    """Fibers of ``d`` generators at one node, as a ``|W| x d`` matrix.

    Multiplying by a coefficient vector ``c`` synthesizes
    ``sum_j c_j * fiber_j``.
    """

    omega: tuple[float, ...]
    window: FiberWindow
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.entries.shape

    def synthesize(self, c) -> np.ndarray:
        return self.entries @ np.asarray(c, dtype=complex)


@dataclass(frozen=True)
class DimensionFunction:
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    @property
    def max(self) -> int:
        return int(self.values.max()) if self.values.size else 0

    @property
    def is_constant(self) -> bool:
        return bool(self.values.size == 0 or (self.values == self.values[0]).all())


def fiber_window(generators: Sequence[GeneratorSpec]) -> FiberWindow:
    """Smallest window holding every nonzero fiber entry of ``generators``.

    For a piece supported on ``[a, b)`` the shifts ``k`` whose cell
    ``[k, k+1)`` meets the support are ``floor(a) <= k <= ceil(b) - 1``.
    """
    ks: list[tuple[int, ...]] = []
    dims = {g.n for g in generators}
    if len(dims) > 1:
        raise ValueError(f"generators mix dimensions {sorted(dims)}")
    for g in generators:
        if isinstance(g.body, PiecewiseSpec):
            for p in g.body.pieces:
                lo = math.floor(p.lo)
                hi = math.ceil(p.hi) - 1
                ks.extend((k,) for k in range(lo, hi + 1))
        else:
            ks.extend(g.body.window)
    return FiberWindow(tuple(ks))


def _check_sampled(g: GeneratorSpec, grid: FrequencyGrid) -> SampledFibers:
    body = g.body
    if body.n != grid.n or body.M != grid.M:
        raise ValueError(
            f"generator {g.name!r} is sampled on an n={body.n}, M={body.M} grid; "
            f"analysis grid is n={grid.n}, M={grid.M}")
    if grid.offset:
        raise ValueError(f"generator {g.name!r} is sampled; grid cannot be perturbed")
    return body


def _column(g: GeneratorSpec, omega: tuple[float, ...], window: FiberWindow,
            node_index: int | None) -> np.ndarray:
    col = np.zeros(len(window), dtype=complex)
    if isinstance(g.body, PiecewiseSpec):
        if len(omega) != 1:
            raise ValueError(f"generator {g.name!r} is one-dimensional")
        for r, (k,) in enumerate(window):
            col[r] = evaluate_fourier(g, omega[0] + k)
        return col
    if node_index is None:
        raise ValueError(f"generator {g.name!r} is sampled; a grid node index is required")
    for src, k in enumerate(g.body.window):
        try:
            col[window.row(k)] = g.body.values[node_index, src]
        except ValueError:
            raise ValueError(
                f"window does not contain shift {k} of generator {g.name!r}") from None
    return col


def fiberize(generators: Sequence[GeneratorSpec], omega, window: FiberWindow,
             node_index: int | None = None) -> FiberMatrix:
    """Fiber matrix of ``generators`` at frequency ``omega``.

    ``node_index`` (flat grid index) is needed only for sampled generators.
    """
    omega = tuple(np.atleast_1d(np.asarray(omega, dtype=float)).tolist())
    cols = [_column(g, omega, window, node_index) for g in generators]
    entries = np.stack(cols, axis=1) if cols else np.zeros((len(window), 0), dtype=complex)
    return FiberMatrix(omega, window, entries)


def fiber_stack(generators: Sequence[GeneratorSpec], grid: FrequencyGrid,
                window: FiberWindow | None = None) -> np.ndarray:
    """Fiber matrices at every grid node, shape ``(len(grid), |W|, d)``."""
    if window is None:
        window = fiber_window(generators)
    for g in generators:
        if isinstance(g.body, SampledFibers):
            _check_sampled(g, grid)
        elif grid.n != 1:
            raise ValueError(f"generator {g.name!r} is one-dimensional, grid has n={grid.n}")
    out = np.zeros((grid.size, len(window), len(generators)), dtype=complex)
    nodes = grid.nodes
    for j, g in enumerate(generators):
        if isinstance(g.body, SampledFibers):
            for src, k in enumerate(g.body.window):
                out[:, window.row(k), j] = g.body.values[:, src]
        else:
            for idx in range(grid.size):
                out[idx, :, j] = _column(g, (float(nodes[idx, 0]),), window, idx)
    return out


def check_grid(grid: FrequencyGrid, generators: Sequence[GeneratorSpec]) -> FrequencyGrid:
    """Return ``grid``, shifted by ``1e-9`` if a node hits a breakpoint.

    A node ``(2m+1)/(2M)`` hits breakpoint ``b`` when the fractional part of
    ``b`` equals it exactly; the test is done in exact rational arithmetic.
    """
    if grid.n != 1:
        return grid
    hits = []
    for g in generators:
        if not isinstance(g.body, PiecewiseSpec):
            continue
        for b in g.body.breakpoints:
            frac = b - math.floor(b)
            scaled = frac * 2 * grid.M
            if scaled.denominator == 1 and scaled.numerator % 2 == 1:
                hits.append((g.name, b))
    if not hits:
        return grid
    name, b = hits[0]
    warnings.warn(
        f"grid node coincides with breakpoint {b} of {name!r} "
        f"({len(hits)} collision(s)); nodes shifted by {PERTURBATION}",
        GridWarning, stacklevel=2)
    return FrequencyGrid(grid.n, grid.M, grid.offset + PERTURBATION)


def numerical_rank(s: np.ndarray, rank_tol: float, scale=None) -> np.ndarray:
    """Count singular values above ``rank_tol * scale``.

    ``s`` holds singular values along its last axis in descending order.
    ``scale`` defaults to the largest singular value (1 where all vanish).
    """
    s = np.asarray(s)
    if s.shape[-1] == 0:
        return np.zeros(s.shape[:-1], dtype=int)
    if scale is None:
        scale = s[..., 0]
    scale = np.where(np.asarray(scale) > 0, scale, 1.0)
    return (s > rank_tol * np.asarray(scale)[..., None]).sum(axis=-1)


def _singular_values(stack: np.ndarray) -> np.ndarray:
    if 0 in stack.shape[-2:]:
        return np.zeros(stack.shape[:-2] + (0,))
    return np.linalg.svd(stack, compute_uv=False)


def dimension_function(generators: Sequence[GeneratorSpec], grid: FrequencyGrid,
                       rank_tol: float = 1e-10, stack: np.ndarray | None = None
                       ) -> DimensionFunction:
    """Numerical rank of the fiber matrix at every node."""
    if stack is None:
        stack = fiber_stack(generators, grid)
    return DimensionFunction(grid, numerical_rank(_singular_values(stack), rank_tol))


def _entries(F) -> np.ndarray:
    return np.asarray(getattr(F, "entries", F), dtype=complex)


def fiber_basis(F, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) of the column space of ``F``."""
    A = _entries(F)
    if 0 in A.shape:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(numerical_rank(s, rank_tol))
    return U[:, :r]


def fiber_projection(F, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projection onto the column space of ``F``."""
    Q = fiber_basis(F, rank_tol)
    P = Q @ Q.conj().T
    return (P + P.conj().T) / 2
