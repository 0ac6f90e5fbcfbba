"""Injectivity and stability of sampling operators on unions of subspaces.

Two settings share one report format:

* finite-dimensional: subspaces of ``C^N`` given by spanning columns, and a
  finite set of sampling vectors;
* shift-invariant: finitely generated shift-invariant spaces given by
  generator lists, and a sampling set whose integer translates are used.

For a union the questions are reduced to every pairwise sum (including
each subspace with itself). A sampling set is one-to-one on a subspace iff
the cross-correlation of a spanning set with the sampling set has rank
equal to the subspace dimension; it is stable with bounds ``alpha, beta``
iff, for a Parseval spanning set, the nonzero squared singular values of
that cross-correlation lie in ``[alpha, beta]``. In the shift-invariant case
both tests run fiber by fiber.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .dsl import GeneratorSpec
from .fibers import (FrequencyGrid, _singular_values, fiber_basis, fiber_stack,
                     fiber_window, numerical_rank)
from .gramian import canonical_parseval, frame_analysis, parseval_fiber
from .subspaces import SubspacePair, Verdict, friedrichs_angle, sum_closure_generators

__all__ = [
    "NotParsevalError", "InjectivityLabel", "InjectivityResult", "StabilityResult",
    "PairRecord", "SamplingReport", "UnionModel",
    "fd_injectivity", "fd_stability", "fd_union_report",
    "sis_injectivity", "sis_stability", "sis_union_report",
    "PARSEVAL_TOL",
]

PARSEVAL_TOL = 1e-10


class NotParsevalError(ValueError):
    pass


class InjectivityLabel(str, Enum):
    SUFFICIENT_ONLY = "SUFFICIENT-ONLY"
    NECESSARY_AND_SUFFICIENT = "NECESSARY-AND-SUFFICIENT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class InjectivityResult:
    """Rank test per node (a single node in the finite-dimensional case)."""

    injective: bool
    ranks: np.ndarray = field(repr=False)
    dims: np.ndarray = field(repr=False)

    @property
    def failing_nodes(self) -> list[int]:
        return np.flatnonzero(self.ranks != self.dims).tolist()


@dataclass(frozen=True)
class StabilityResult:
    """Stability bounds or the reason they do not exist.

    ``sigma2_min``/``sigma2_max`` hold, per node, the smallest nonzero and the
    largest squared singular value of the cross-correlation (NaN where it
    has no nonzero singular value).
    """

    stable: bool
    alpha: float | None
    beta: float | None
    reason: str | None
    sigma2_min: np.ndarray = field(repr=False)
    sigma2_max: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)
    dims: np.ndarray = field(repr=False)


def _stability_from_cross(G: np.ndarray, dims: np.ndarray, scale: np.ndarray,
                          tol: Tolerances) -> StabilityResult:
    # G: (nodes, #I, d) cross-correlations against Parseval fibers.
    s = _singular_values(G)
    ranks = numerical_rank(s, tol.rank_tol, scale)
    nodes = G.shape[0]
    smin = np.full(nodes, np.nan)
    smax = np.full(nodes, np.nan)
    for i in range(nodes):
        if ranks[i]:
            smax[i] = s[i, 0] ** 2
            smin[i] = s[i, ranks[i] - 1] ** 2
    fail = np.flatnonzero(ranks != dims)
    if fail.size:
        i = int(fail[0])
        reason = (f"rank condition fails at {fail.size} node(s); first at node {i}: "
                  f"rank {int(ranks[i])} != dim {int(dims[i])}")
        return StabilityResult(False, None, None, reason, smin, smax, ranks, dims)
    if not dims.any():
        return StabilityResult(True, None, None, "trivial subspace", smin, smax, ranks, dims)
    beta = float(np.nanmax(smax))
    alpha = float(np.nanmin(smin))
    if alpha <= tol.spec_tol * beta:
        reason = (f"no positive lower bound above tolerance: smallest nonzero "
                  f"sigma^2 {alpha!r} <= {tol.spec_tol} * {beta!r}")
        return StabilityResult(False, None, None, reason, smin, smax, ranks, dims)
    return StabilityResult(True, alpha, beta, None, smin, smax, ranks, dims)


# ---------------------------------------------------------------------------
# Finite-dimensional mode

def _cols(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    return A[:, None] if A.ndim == 1 else A


def _opnorm(A: np.ndarray) -> float:
    return float(np.linalg.svd(A, compute_uv=False)[0]) if A.size else 0.0


def _fd_ranks(Phi: np.ndarray, Psi: np.ndarray, rank_tol: float) -> tuple[int, int]:
    # rank of the cross-correlation against an orthonormal basis, and dim of the span
    Q = fiber_basis(Phi, rank_tol)
    if Q.shape[1] == 0 or Psi.shape[1] == 0:
        return 0, Q.shape[1]
    G = Psi.conj().T @ Q
    r = int(numerical_rank(np.linalg.svd(G, compute_uv=False), rank_tol, _opnorm(Psi)))
    return r, Q.shape[1]


def fd_injectivity(Phi, Psi, rank_tol: float = 1e-10) -> bool:
    """Is ``x -> (<x, psi_i>)_i`` one-to-one on the column space of ``Phi``?

    True iff ``rank(Psi* Phi) == rank(Phi)``. The rank of the
    cross-correlation is taken against an orthonormal basis of the span,
    which gives the same rank as any other spanning set.
    """
    rank, dim = _fd_ranks(_cols(Phi), _cols(Psi), rank_tol)
    return rank == dim


def _is_parseval(Phi: np.ndarray) -> bool:
    P = Phi @ Phi.conj().T
    return bool(np.linalg.norm(P @ P - P) <= PARSEVAL_TOL)


def fd_stability(Phi, Psi, tol: Tolerances = DEFAULT_TOLERANCES,
                 auto_canonicalize: bool = True) -> StabilityResult:
    """Stability bounds of sampling with ``Psi`` on the span of ``Phi``.

    ``Phi`` must be a Parseval frame for its span. Otherwise it is replaced
    by its canonical Parseval frame, or :class:`NotParsevalError` is raised
    when ``auto_canonicalize`` is off.
    """
    Phi, Psi = _cols(Phi), _cols(Psi)
    if not _is_parseval(Phi):
        if not auto_canonicalize:
            raise NotParsevalError("Phi is not a Parseval frame for its span")
        Phi = parseval_fiber(Phi, tol.rank_tol)
    dim = int(numerical_rank(np.linalg.svd(Phi, compute_uv=False), tol.rank_tol)) if Phi.size else 0
    G = (Psi.conj().T @ Phi)[None]
    return _stability_from_cross(G, np.array([dim]), np.array([_opnorm(Psi)]), tol)


# ---------------------------------------------------------------------------
# Reports

@dataclass
class PairRecord:
    """Result for one pairwise sum ``S_gamma + S_theta`` (closure in SIS mode)."""

    gamma: str
    theta: str
    generators: tuple[str, ...]
    injectivity: InjectivityResult
    stability: StabilityResult
    label: InjectivityLabel
    closedness: Verdict
    friedrichs: float | None = None

    @property
    def rank_condition(self) -> bool:
        return self.injectivity.injective

    @property
    def injective(self) -> bool | None:
        """True: certified; False: certified not one-to-one; None: undecided."""
        if self.injectivity.injective:
            return True
        return False if self.label is InjectivityLabel.NECESSARY_AND_SUFFICIENT else None

    @property
    def length(self) -> int:
        return int(self.injectivity.dims.max()) if self.injectivity.dims.size else 0

    @property
    def failing_nodes(self) -> list[int]:
        return self.injectivity.failing_nodes


@dataclass
class SamplingReport:
    mode: str
    pairs: list[PairRecord]
    n_samples: int
    bessel_bound: float
    grid: FrequencyGrid | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def injective(self) -> bool | None:
        vals = [p.injective for p in self.pairs]
        if any(v is False for v in vals):
            return False
        if any(v is None for v in vals):
            return None
        return True

    @property
    def stable(self) -> bool:
        return all(p.stability.stable for p in self.pairs)

    @property
    def alpha(self) -> float | None:
        vals = [p.stability.alpha for p in self.pairs if p.stability.alpha is not None]
        return min(vals) if self.stable and vals else None

    @property
    def beta(self) -> float | None:
        vals = [p.stability.beta for p in self.pairs if p.stability.beta is not None]
        return max(vals) if self.stable and vals else None

    @property
    def sample_lower_bound(self) -> int:
        return max((p.length for p in self.pairs), default=0)

    @property
    def meets_lower_bound(self) -> bool:
        return self.n_samples >= self.sample_lower_bound


@dataclass(frozen=True)
class UnionModel:
    """Named subspaces forming the union.

    Values are generator lists (shift-invariant mode) or ``N x d`` spanning
    matrices (finite-dimensional mode).
    """

    subspaces: Mapping[str, object]

    def __post_init__(self):
        if not self.subspaces:
            raise ValueError("a union needs at least one subspace")

    def pairs(self) -> list[tuple[str, str]]:
        """All unordered pairs, diagonal included."""
        return list(itertools.combinations_with_replacement(list(self.subspaces), 2))


def fd_union_report(model: UnionModel, Psi, tol: Tolerances = DEFAULT_TOLERANCES) -> SamplingReport:
    """Pairwise injectivity and stability for a union of subspaces of ``C^N``."""
    Psi = _cols(Psi)
    records = []
    for a, b in model.pairs():
        Phi = _cols(model.subspaces[a]) if a == b else np.hstack(
            [_cols(model.subspaces[a]), _cols(model.subspaces[b])])
        rank, dim = _fd_ranks(Phi, Psi, tol.rank_tol)
        stab = fd_stability(Phi, Psi, tol)
        records.append(PairRecord(
            a, b, (a,) if a == b else (a, b),
            InjectivityResult(rank == dim, np.array([rank]), np.array([dim])), stab,
            InjectivityLabel.NECESSARY_AND_SUFFICIENT, Verdict.CLOSED))
    beta = _opnorm(Psi) ** 2
    return SamplingReport("finite", records, Psi.shape[1], beta)


# ---------------------------------------------------------------------------
# Shift-invariant mode

def _sis_cross(S_gens, Psi_gens, grid, tol):
    window = fiber_window(S_gens).union(fiber_window(Psi_gens))
    S = fiber_stack(S_gens, grid, window)
    P = fiber_stack(Psi_gens, grid, window)
    dims = numerical_rank(_singular_values(S), tol.rank_tol)
    S_tilde = canonical_parseval(S_gens, grid, tol.rank_tol, stack=S)
    G = np.swapaxes(P.conj(), -1, -2) @ S_tilde
    psi_norm = _singular_values(P)
    scale = psi_norm[:, 0] if psi_norm.shape[-1] else np.ones(grid.size)
    return G, dims, scale


def sis_injectivity(S_gens: Sequence[GeneratorSpec], Psi_gens: Sequence[GeneratorSpec],
                    grid: FrequencyGrid, rank_tol: float = 1e-10) -> InjectivityResult:
    """Per-node test ``rank G_{Phi,Psi}(w) == dim_S(w)``.

    Equivalent to ``ker G_{Phi,Psi}(w) == ker B*_Phi(w)``, so a truncated
    prefix of a countable generator list can be used as well.
    """
    tol = DEFAULT_TOLERANCES.updated(rank_tol=rank_tol)
    G, dims, scale = _sis_cross(S_gens, Psi_gens, grid, tol)
    ranks = numerical_rank(_singular_values(G), rank_tol, scale)
    return InjectivityResult(bool((ranks == dims).all()), ranks, dims)


def sis_stability(S_gens: Sequence[GeneratorSpec], Psi_gens: Sequence[GeneratorSpec],
                  grid: FrequencyGrid, tol: Tolerances = DEFAULT_TOLERANCES) -> StabilityResult:
    """Stability bounds of the translates of ``Psi_gens`` on ``S(S_gens)``.

    The generators of ``S`` are first replaced, node by node, by their
    canonical Parseval frame.
    """
    G, dims, scale = _sis_cross(S_gens, Psi_gens, grid, tol)
    return _stability_from_cross(G, dims, scale, tol)


def sis_union_report(model: UnionModel, Psi_gens: Sequence[GeneratorSpec],
                     grid: FrequencyGrid, tol: Tolerances = DEFAULT_TOLERANCES,
                     check_closedness: bool = True) -> SamplingReport:
    """Pairwise analysis of a union of finitely generated shift-invariant spaces.

    Each pair is analysed on the closure of its sum, generated by the union
    of both generator sets. A passing rank test proves injectivity; a
    failing one proves non-injectivity only when the sum is certified
    closed by its Friedrichs angle, which upgrades the label to
    NECESSARY-AND-SUFFICIENT.
    """
    Psi_gens = list(Psi_gens)
    bessel = frame_analysis(Psi_gens, grid, tol.rank_tol, tol.spec_tol).bessel_bound
    if not np.isfinite(bessel):
        raise ValueError("sampling set is not Bessel on the grid")
    records = []
    for a, b in model.pairs():
        Sa = list(model.subspaces[a])
        if a == b:
            gens = Sa
            closed, c = Verdict.CLOSED, None
        else:
            Sb = list(model.subspaces[b])
            gens = sum_closure_generators(Sa, Sb)
            if check_closedness:
                ang = friedrichs_angle(SubspacePair(Sa, Sb), grid, tol)
                closed, c = ang.verdict, ang.c
            else:
                closed, c = Verdict.INDETERMINATE, None
        inj = sis_injectivity(gens, Psi_gens, grid, tol.rank_tol)
        stab = sis_stability(gens, Psi_gens, grid, tol)
        label = (InjectivityLabel.NECESSARY_AND_SUFFICIENT if closed is Verdict.CLOSED
                 else InjectivityLabel.SUFFICIENT_ONLY)
        records.append(PairRecord(a, b, tuple(g.name for g in gens), inj, stab, label, closed, c))
    notes = ["len(S) estimated as the grid maximum of the dimension function "
             "(length equals its essential supremum)"]
    return SamplingReport("sis", records, len(Psi_gens), bessel, grid, notes)
