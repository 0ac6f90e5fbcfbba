"""Angles between shift-invariant spaces and closedness of their sum.

Everything is computed fiber by fiber. At a node ``w`` the fiber spaces
``J_U(w)`` and ``J_V(w)`` are column spaces of small matrices; their
intersection comes from von Neumann's alternating projections, the
relative complement ``J_U(w) (-) J_V(w)`` from projector algebra, and the
Friedrichs cosine from the pseudo-inverse Gramian formula. The cosine of
the Friedrichs angle between ``U`` and ``V`` is the essential supremum of
the per-node cosines, approximated here by the maximum over grid nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances, parallel_map
from .dsl import GeneratorSpec
from .fibers import FrequencyGrid, _entries, fiber_basis, fiber_projection, fiber_stack, fiber_window
from .gramian import pinv_sqrt

__all__ = [
    "Verdict", "NOT_CLOSED_CAVEAT", "CERTIFICATE_NOTE", "TwoPathMismatch",
    "IntersectionResult", "OminusResult", "FriedrichsFiber", "SubspacePair", "AngleReport",
    "sum_closure_generators", "intersection_projector_fiber", "ominus_fiber",
    "dixmier_fiber", "friedrichs_from_frames", "friedrichs_fiber", "friedrichs_angle",
    "closedness_verdict",
]

PROJECTOR_TOL = 1e-10
TWO_PATH_TOL = 1e-9

NOT_CLOSED_CAVEAT = "grid max >= 1 - eps: ess-sup likely 1"
CERTIFICATE_NOTE = "numerical certificate on a finite grid, not a proof"


class Verdict(str, Enum):
    CLOSED = "Closed"
    NOT_CLOSED = "NotClosed"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


class TwoPathMismatch(ArithmeticError):
    """The pseudo-inverse formula and the Dixmier route disagree."""


def sum_closure_generators(phi: Sequence[GeneratorSpec],
                           phi_prime: Sequence[GeneratorSpec]) -> list[GeneratorSpec]:
    """Generators of the closure of ``S(phi) + S(phi_prime)``: the union of both sets."""
    names = [g.name for g in phi] + [g.name for g in phi_prime]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ValueError(f"duplicate generator names in sum: {dup}")
    return list(phi) + list(phi_prime)


def _check_projector(P: np.ndarray, label: str):
    P = np.asarray(P, dtype=complex)
    if np.linalg.norm(P - P.conj().T) > PROJECTOR_TOL or np.linalg.norm(P @ P - P) > PROJECTOR_TOL:
        raise ValueError(f"{label} is not an orthogonal projection within {PROJECTOR_TOL}")
    return P


def _range_projector(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Round a nearly-idempotent Hermitian matrix to a projection."""
    lam, V = np.linalg.eigh((Q + Q.conj().T) / 2)
    B = V[:, lam > 0.5]
    P = B @ B.conj().T
    return (P + P.conj().T) / 2, B


@dataclass(frozen=True)
class IntersectionResult:
    projector: np.ndarray | None = field(repr=False)
    iterations: int
    residual: float

    @property
    def converged(self) -> bool:
        return self.projector is not None

    @property
    def sweeps(self) -> int:
        """Equivalent number of plain alternating-projection sweeps."""
        return 2 ** self.iterations


def intersection_projector_fiber(P_U, P_V, conv_eps: float = 1e-10,
                                 max_iter: int = 22) -> IntersectionResult:
    """Projection onto ``range(P_U) & range(P_V)`` by alternating projections.

    The iterates are ``Q_t = (P_U P_V P_U)^(2^t)``, obtained by repeated
    squaring of the symmetrized product, so step ``t`` equals ``2^t`` plain
    alternating sweeps. Directions at principal angle ``theta`` decay like
    ``cos(theta)^(2^(t+1))``.

    The loop stops once the eigenvalues of the iterate below 1/2 have
    Frobenius norm under ``conv_eps`` and those above 1/2 lie within
    rounding drift of 1. Squaring amplifies the ``~n * eps`` error of a unit
    eigenvalue by ``2^t``, so the allowed drift is
    ``max(conv_eps, 2^t * 4 * n * eps)``. The converged iterate is rounded
    to the nearest projection. If ``max_iter`` steps do not converge, no
    projector is returned and ``residual`` holds the larger of the two
    defects.
    """
    P_U = _check_projector(P_U, "P_U")
    P_V = _check_projector(P_V, "P_V")
    Q = P_U @ P_V @ P_U
    Q = (Q + Q.conj().T) / 2
    unit = 4 * len(Q) * np.finfo(float).eps
    residual = np.inf
    for t in range(1, int(max_iter) + 1):
        Q = Q @ Q
        Q = (Q + Q.conj().T) / 2
        lam = np.linalg.eigvalsh(Q)
        low = float(np.linalg.norm(lam[lam < 0.5]))
        drift = float(np.abs(lam[lam >= 0.5] - 1.0).max(initial=0.0))
        allowed = max(conv_eps, 2.0 ** t * unit)
        residual = max(low, drift)
        if low < conv_eps and drift <= allowed:
            return IntersectionResult(_range_projector(Q)[0], t, residual)
    return IntersectionResult(None, int(max_iter), residual)


@dataclass(frozen=True)
class OminusResult:
    """Orthonormal basis of ``J_U (-) J_V`` at one node, or ``None`` if undecided."""

    basis: np.ndarray | None = field(repr=False)
    iterations: int = 0
    residual: float = 0.0

    @property
    def converged(self) -> bool:
        return self.basis is not None

    @property
    def rank(self) -> int | None:
        return None if self.basis is None else self.basis.shape[1]


def ominus_fiber(F_U, F_V, rank_tol: float = 1e-10, conv_eps: float = 1e-10,
                 max_iter: int = 22) -> OminusResult:
    """Orthonormal basis of the orthogonal complement of ``J_U & J_V`` inside ``J_U``."""
    A, B = _entries(F_U), _entries(F_V)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"fiber lengths differ: {A.shape[0]} and {B.shape[0]}")
    QU = fiber_basis(A, rank_tol)
    if QU.shape[1] == 0 or fiber_basis(B, rank_tol).shape[1] == 0:
        return OminusResult(QU)
    P_U = fiber_projection(A, rank_tol)
    P_V = fiber_projection(B, rank_tol)
    inter = intersection_projector_fiber(P_U, P_V, conv_eps, max_iter)
    if not inter.converged:
        return OminusResult(None, inter.iterations, inter.residual)
    M = P_U @ (np.eye(len(P_U)) - inter.projector)
    _, basis = _range_projector(M)
    return OminusResult(basis, inter.iterations, inter.residual)


def dixmier_fiber(A_basis, B_basis) -> float:
    """Cosine of the minimal angle between two spans given by orthonormal columns."""
    A, B = np.asarray(A_basis), np.asarray(B_basis)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(A.conj().T @ B, compute_uv=False)
    return float(np.clip(s[0], 0.0, 1.0))


def friedrichs_from_frames(X, X_prime, spec_tol: float = 1e-10) -> float:
    """``|| (G_X'^+)^(1/2) G_{X,X'} (G_X^+)^(1/2) ||`` for frames ``X``, ``X'`` given as columns.

    ``X`` and ``X'`` span the two relative complements; the value does not
    depend on which frames are chosen.
    """
    X, Xp = _entries(X), _entries(X_prime)
    if X.shape[1] == 0 or Xp.shape[1] == 0:
        return 0.0
    G_X = X.conj().T @ X
    G_Xp = Xp.conj().T @ Xp
    if not np.any(G_X) or not np.any(G_Xp):
        return 0.0
    cross = Xp.conj().T @ X
    W = pinv_sqrt(G_Xp, spec_tol) @ cross @ pinv_sqrt(G_X, spec_tol)
    return float(np.linalg.svd(W, compute_uv=False)[0])


@dataclass(frozen=True)
class FriedrichsFiber:
    cosine: float | None
    dixmier: float
    ominus_ranks: tuple[int | None, int | None]
    residual: float = 0.0

    @property
    def indeterminate(self) -> bool:
        return self.cosine is None


def friedrichs_fiber(F_U, F_V, tol: Tolerances = DEFAULT_TOLERANCES) -> FriedrichsFiber:
    """Friedrichs and Dixmier cosines between the column spaces of ``F_U`` and ``F_V``.

    Both relative complements are computed, then the cosine is evaluated
    twice: by the pseudo-inverse formula and as the Dixmier cosine of the
    complements. A disagreement above ``1e-9`` raises
    :class:`TwoPathMismatch`.
    """
    c0 = dixmier_fiber(fiber_basis(F_U, tol.rank_tol), fiber_basis(F_V, tol.rank_tol))
    X = ominus_fiber(F_U, F_V, tol.rank_tol, tol.conv_eps, tol.max_iter)
    Xp = ominus_fiber(F_V, F_U, tol.rank_tol, tol.conv_eps, tol.max_iter)
    if not (X.converged and Xp.converged):
        return FriedrichsFiber(None, c0, (X.rank, Xp.rank), max(X.residual, Xp.residual))
    formula = friedrichs_from_frames(X.basis, Xp.basis, tol.spec_tol)
    direct = dixmier_fiber(X.basis, Xp.basis)
    if abs(formula - direct) > TWO_PATH_TOL:
        raise TwoPathMismatch(
            f"pseudo-inverse formula gives {formula!r}, Dixmier route gives {direct!r}")
    c = min(float(np.clip(formula, 0.0, 1.0)), c0)
    return FriedrichsFiber(c, c0, (X.rank, Xp.rank))


@dataclass(frozen=True)
class SubspacePair:
    U: tuple[GeneratorSpec, ...]
    V: tuple[GeneratorSpec, ...]

    def __init__(self, U: Sequence[GeneratorSpec], V: Sequence[GeneratorSpec]):
        object.__setattr__(self, "U", tuple(U))
        object.__setattr__(self, "V", tuple(V))

    @property
    def window(self):
        return fiber_window(self.U).union(fiber_window(self.V))


def closedness_verdict(c: float, close_eps: float = 1e-4) -> Verdict:
    """``Closed`` when ``c < 1 - close_eps``, else ``NotClosed``.

    The verdict is a numerical certificate: a finite grid cannot witness an
    essential supremum. With ``c(w) = |cos 2 pi w|`` the grid maximum is
    ``cos(pi/M)``, so ``close_eps`` must exceed ``1 - cos(pi/M)``
    (about ``4.9e-5 * (512/M)**2``) for such a sum to be flagged.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"cosine must lie in [0, 1], got {c!r}")
    return Verdict.CLOSED if c < 1.0 - close_eps else Verdict.NOT_CLOSED


@dataclass(frozen=True)
class AngleReport:
    """Per-node and aggregated angle data for a pair of shift-invariant spaces.

    ``friedrichs`` holds NaN at nodes where the intersection iteration did
    not converge; those node indices are listed in ``indeterminate_nodes``.
    """

    grid: FrequencyGrid
    friedrichs: np.ndarray = field(repr=False)
    dixmier: np.ndarray = field(repr=False)
    verdict: Verdict
    close_eps: float
    indeterminate_nodes: tuple[int, ...] = ()

    @property
    def c(self) -> float:
        vals = self.friedrichs[~np.isnan(self.friedrichs)]
        return float(vals.max()) if vals.size else float("nan")

    @property
    def c0(self) -> float:
        return float(self.dixmier.max()) if self.dixmier.size else 0.0

    @property
    def caveat(self) -> str:
        if self.verdict is Verdict.NOT_CLOSED:
            return NOT_CLOSED_CAVEAT
        if self.verdict is Verdict.INDETERMINATE:
            return (f"alternating projections did not converge at "
                    f"{len(self.indeterminate_nodes)} node(s)")
        return CERTIFICATE_NOTE


def friedrichs_angle(pair: SubspacePair, grid: FrequencyGrid,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> AngleReport:
    """Friedrichs cosine at every grid node and the closedness verdict."""
    window = pair.window
    SU = fiber_stack(pair.U, grid, window)
    SV = fiber_stack(pair.V, grid, window)
    results = parallel_map(lambda i: friedrichs_fiber(SU[i], SV[i], tol), range(grid.size))
    c = np.array([np.nan if r.cosine is None else r.cosine for r in results])
    c0 = np.array([r.dixmier for r in results])
    bad = tuple(int(i) for i in np.flatnonzero(np.isnan(c)))
    if bad:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = closedness_verdict(float(c.max()) if c.size else 0.0, tol.close_eps)
    return AngleReport(grid, c, c0, verdict, tol.close_eps, bad)
