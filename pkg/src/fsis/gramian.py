"""Gramians, cross-correlations and frame bounds of fiber systems.

A system of vectors is a frame sequence with bounds ``alpha, beta`` exactly
when the spectrum of its Gramian lies in ``{0} U [alpha, beta]``. Applied
node by node to fiber matrices this gives Bessel, frame and Riesz
verdicts for integer translates of a finite generator set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dsl import GeneratorSpec
from .fibers import (DimensionFunction, FiberMatrix, FrequencyGrid, _entries,
                     _singular_values, fiber_stack, numerical_rank)

__all__ = [
    "NegativeSpectrumError", "GramianFiber", "CrossGramianFiber", "FrameAnalysis",
    "gramian_fiber", "cross_gramian_fiber", "hermitian_spectrum", "sigma_squared",
    "frame_analysis", "pinv_sqrt", "parseval_fiber", "canonical_parseval",
    "HERMITIAN_TOL", "NEGATIVE_TOL",
]

HERMITIAN_TOL = 1e-10
NEGATIVE_TOL = 1e-12


class NegativeSpectrumError(ArithmeticError):
    """A Gramian that must be positive semidefinite has a negative eigenvalue."""


@dataclass(frozen=True)
class GramianFiber:
    omega: tuple[float, ...]
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CrossGramianFiber:
    omega: tuple[float, ...]
    matrix: np.ndarray = field(repr=False)


def gramian_fiber(F) -> GramianFiber:
    """``G = F* F``, entry ``(i, j)`` is ``<fiber_j, fiber_i>``."""
    A = _entries(F)
    G = A.conj().T @ A
    return GramianFiber(getattr(F, "omega", ()), (G + G.conj().T) / 2)


def cross_gramian_fiber(F_phi, F_psi) -> CrossGramianFiber:
    """``F_psi* F_phi``, entry ``(i, j)`` is ``<fiber phi_j, fiber psi_i>``."""
    if isinstance(F_phi, FiberMatrix) and isinstance(F_psi, FiberMatrix):
        if F_phi.window != F_psi.window:
            raise ValueError("fiber matrices live on different windows")
        if F_phi.omega != F_psi.omega:
            raise ValueError(f"fiber matrices taken at different nodes "
                             f"{F_phi.omega} and {F_psi.omega}")
    A, B = _entries(F_phi), _entries(F_psi)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"fiber lengths differ: {A.shape[0]} and {B.shape[0]}")
    return CrossGramianFiber(getattr(F_phi, "omega", ()), B.conj().T @ A)


def _clamp(vals: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(vals).max(axis=-1, keepdims=True)) if vals.size else 1.0
    bad = vals < -NEGATIVE_TOL * scale
    if np.any(bad):
        raise NegativeSpectrumError(
            f"eigenvalue {vals[bad].min()!r} below -{NEGATIVE_TOL} on a matrix that "
            f"should be positive semidefinite; spectrum: {np.array2string(vals)}")
    return np.where(vals < 0, 0.0, vals)


def hermitian_spectrum(G, psd: bool = True) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix (or stack).

    With ``psd`` (the default) tiny negative eigenvalues are set to 0 and
    larger ones raise :class:`NegativeSpectrumError`.
    """
    G = np.asarray(getattr(G, "matrix", G), dtype=complex)
    if G.shape[-1] == 0:
        return np.zeros(G.shape[:-1])
    asym = np.abs(G - np.swapaxes(G.conj(), -1, -2)).max()
    if asym > HERMITIAN_TOL * max(1.0, np.abs(G).max()):
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    vals = np.linalg.eigvalsh(G)
    return _clamp(vals) if psd else vals


def sigma_squared(W) -> np.ndarray:
    """Spectrum of ``W* W`` in ascending order, from singular values of ``W``.

    Works on stacks; the result has ``W.shape[-1]`` entries per matrix.
    """
    W = np.asarray(getattr(W, "matrix", W), dtype=complex)
    ncols = W.shape[-1]
    s = _singular_values(W)
    s2 = np.zeros(W.shape[:-2] + (ncols,))
    s2[..., :s.shape[-1]] = s ** 2
    return np.sort(s2, axis=-1)


@dataclass(frozen=True)
class FrameAnalysis:
    """Bessel/frame/Riesz verdicts for the translates of a generator set.

    ``frame_lower`` is ``None`` when no eigenvalue above the zero threshold
    exists anywhere on the grid.
    """

    bessel_bound: float
    frame_lower: float | None
    is_frame_sequence: bool
    is_riesz: bool
    dim_fn: DimensionFunction
    n_generators: int
    zero_threshold: float

    @property
    def length_estimate(self) -> int:
        return self.dim_fn.max

    @property
    def gap_ratio(self) -> float | None:
        if self.frame_lower is None or self.bessel_bound == 0:
            return None
        return self.frame_lower / self.bessel_bound


def frame_analysis(generators: Sequence[GeneratorSpec], grid: FrequencyGrid,
                   rank_tol: float = 1e-10, spec_tol: float = 1e-10,
                   stack: np.ndarray | None = None) -> FrameAnalysis:
    """Frame bounds of the integer translates of ``generators`` on ``grid``.

    The upper bound is the largest Gramian eigenvalue over all nodes. The
    lower bound is the smallest eigenvalue above ``spec_tol`` times that
    global maximum. The system is a frame sequence on the grid when, at
    every node, the number of eigenvalues above the threshold equals the
    numerical rank of the fibers.
    """
    if stack is None:
        stack = fiber_stack(generators, grid)
    d = stack.shape[-1]
    s = _singular_values(stack)
    dims = numerical_rank(s, rank_tol)
    dim_fn = DimensionFunction(grid, dims)
    if d == 0 or s.shape[-1] == 0:
        return FrameAnalysis(0.0, None, False, False, dim_fn, d, 0.0)
    eig = s ** 2
    beta = float(eig.max())
    if beta == 0.0:
        return FrameAnalysis(0.0, None, False, False, dim_fn, d, 0.0)
    threshold = spec_tol * beta
    nonzero = eig > threshold
    alpha = float(eig[nonzero].min())
    counts = nonzero.sum(axis=-1)
    is_frame = bool((counts == dims).all())
    is_riesz = is_frame and dim_fn.is_constant and bool((counts == d).all())
    return FrameAnalysis(beta, alpha, is_frame, is_riesz, dim_fn, d, threshold)


def pinv_sqrt(G, spec_tol: float = 1e-10) -> np.ndarray:
    """``(G^+)^{1/2}`` for a Hermitian PSD matrix (or stack).

    Eigenvalues at or below ``spec_tol`` times the largest one are treated
    as zero.
    """
    G = np.asarray(getattr(G, "matrix", G), dtype=complex)
    if G.shape[-1] == 0:
        return G.copy()
    hermitian_spectrum(G)
    lam, U = np.linalg.eigh(G)
    lam = np.where(lam < 0, 0.0, lam)
    cut = spec_tol * lam.max(axis=-1, keepdims=True)
    keep = (lam > cut) & (lam > 0)
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, lam, 1.0)), 0.0)
    R = (U * inv[..., None, :]) @ np.swapaxes(U.conj(), -1, -2)
    return (R + np.swapaxes(R.conj(), -1, -2)) / 2


def parseval_fiber(F, rank_tol: float = 1e-10) -> np.ndarray:
    """Canonical Parseval transform ``F (F* F)^{+1/2}`` of one fiber matrix.

    Computed as the partial isometry ``U_r V_r*`` of the SVD ``F = U S V*``
    truncated at the numerical rank, which is the same matrix without
    forming the squared Gramian.
    """
    A = _entries(F)
    if 0 in A.shape:
        return A.copy()
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = int(numerical_rank(s, rank_tol))
    return U[:, :r] @ Vh[:r, :]


def canonical_parseval(generators: Sequence[GeneratorSpec], grid: FrequencyGrid,
                       rank_tol: float = 1e-10, stack: np.ndarray | None = None
                       ) -> np.ndarray:
    """Parseval-transformed fiber matrices at every node.

    Returns an array shaped like the fiber stack. At each node the Gramian
    of the result is the orthogonal projection onto the row space of the
    original fibers, so its columns form a Parseval frame for the same
    fiber space.
    """
    if stack is None:
        stack = fiber_stack(generators, grid)
    if 0 in stack.shape[-2:]:
        return stack.copy()
    U, s, Vh = np.linalg.svd(stack, full_matrices=False)
    r = numerical_rank(s, rank_tol)
    mask = np.arange(s.shape[-1])[None, :] < r[:, None]
    return (U * mask[:, None, :]) @ Vh
