"""Independent reference computations used by the tests.

They rely on scipy and plain definitions, never on fsis internals.
"""

import numpy as np
import scipy.linalg as sla


def orth(A, rcond=1e-10):
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return sla.orth(A, rcond=rcond)


def null_space(A, atol):
    """Orthonormal kernel basis, singular values <= atol count as zero."""
    _, s, Vh = np.linalg.svd(A)
    rank = int((s > atol).sum())
    return Vh[rank:].conj().T


def kernel_injective(Phi, Psi, rcond=1e-10):
    """Sampling is one-to-one on span(Phi) iff ker(Psi* Phi) == ker(Phi)."""
    scale = np.linalg.norm(Phi, 2)
    K_cross = null_space(Psi.conj().T @ Phi, rcond * scale * max(np.linalg.norm(Psi, 2), 1e-300))
    K_phi = null_space(Phi, rcond * scale)
    if K_cross.shape[1] != K_phi.shape[1]:
        return False
    # same dimension and ker(Phi) is contained in ker(Psi* Phi): compare projectors
    return np.allclose(K_cross @ K_cross.conj().T, K_phi @ K_phi.conj().T, atol=1e-8)


def projected_frame_bounds(Phi, Psi, rcond=1e-10):
    """Optimal bounds of sum_i |<x, psi_i>|^2 over unit x in span(Phi).

    Equals the extreme eigenvalues of the frame operator of the projected
    sampling vectors, restricted to the span.
    """
    Q = orth(Phi, rcond)
    T = Q.conj().T @ Psi
    lam = np.linalg.eigvalsh(T @ T.conj().T)
    return float(lam.min()), float(lam.max())


def principal_cosines(A, B):
    QA, QB = orth(A), orth(B)
    if QA.shape[1] == 0 or QB.shape[1] == 0:
        return np.zeros(0)
    return np.clip(np.linalg.svd(QA.conj().T @ QB, compute_uv=False), 0.0, 1.0)


def intersection_basis(A, B, tol=1e-8):
    """Orthonormal basis of span(A) & span(B) from the null space of [Q_A, -Q_B]."""
    QA, QB = orth(A), orth(B)
    if QA.shape[1] == 0 or QB.shape[1] == 0:
        return np.zeros((QA.shape[0], 0), dtype=complex)
    K = sla.null_space(np.hstack([QA, -QB]), rcond=tol)
    return orth(QA @ K[:QA.shape[1]]) if K.size else np.zeros((QA.shape[0], 0), dtype=complex)


def friedrichs_oracle(A, B, tol=1e-8):
    """Largest principal cosine strictly below 1, i.e. the first one after the intersection."""
    k = intersection_basis(A, B, tol).shape[1]
    c = principal_cosines(A, B)
    return float(c[k]) if len(c) > k else 0.0


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
