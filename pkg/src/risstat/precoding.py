"""
Bilinear precoding ``p = A psi`` and worst-case-noise SNR/rate bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .model import SingularMatrixError, hermitian_part

__all__ = [
    "Precoder",
    "HermitianSolver",
    "optimal_transform",
    "snr_lower_bound_general",
    "snr_lower_bound_optimal",
    "scalar_snr",
    "rate_lower_bound",
]

COND_LIMIT = 1e14


class HermitianSolver:
    """
    Cholesky factorization of a Hermitian PD matrix with a condition guard.

    Used for every ``Q^{-1} X`` product and for ``tr(Q^{-1})``, so no
    explicit inverse is ever formed.
    """

    def __init__(self, Q):
        Q = hermitian_part(Q)
        w = np.linalg.eigvalsh(Q)
        if not (w[0] > 0 and w[-1] <= COND_LIMIT * w[0]):
            raise SingularMatrixError(
                f"matrix is singular or ill-conditioned "
                f"(eigenvalues {w[0]:.3e}..{w[-1]:.3e})")
        self._L = linalg.cholesky(Q, lower=True)
        self.shape = Q.shape

    def solve(self, B):
        """Return ``Q^{-1} B``."""
        return linalg.cho_solve((self._L, True), B)

    def inv_trace(self):
        """``tr(Q^{-1}) = ||L^{-1}||_F^2``."""
        Linv = linalg.solve_triangular(self._L, np.eye(self.shape[0]), lower=True)
        return float(np.sum(np.abs(Linv) ** 2))

    def inverse(self):
        return hermitian_part(self.solve(np.eye(self.shape[0], dtype=complex)))


@dataclass(frozen=True)
class Precoder:
    """Transformation matrix ``A`` and its scaling ``eta`` (``A = eta Q^{-1}``)."""

    A: np.ndarray
    eta: float

    def apply(self, psi):
        """Precoder ``p = A psi`` for one observation or a batch (rows)."""
        psi = np.asarray(psi)
        return psi @ self.A.T if psi.ndim == 2 else self.A @ psi


def optimal_transform(Q, P):
    """
    Power-tight bilinear transform ``A = eta Q^{-1}``.

    Parameters
    ----------
    Q : (M, M) array
        Observation covariance, Hermitian positive definite.
    P : float
        Transmit power; ``tr(A Q A^H) = P`` holds for the result.

    Raises
    ------
    SingularMatrixError
        If the condition number of ``Q`` exceeds 1e14.
    """
    if P < 0:
        raise ValueError(f"P must be nonnegative, got {P!r}")
    solver = HermitianSolver(Q)
    Qinv = solver.inverse()
    eta = float(np.sqrt(P / solver.inv_trace()))
    return Precoder(A=eta * Qinv, eta=eta)


def snr_lower_bound_general(A, C, Q, sigma2):
    """
    Worst-case-noise SNR lower bound for an arbitrary transform ``A``::

        |tr(A C)|^2 / (tr(A Q A^H C) + sigma2)
    """
    A, C, Q = (np.asarray(X, dtype=complex) for X in (A, C, Q))
    if not (A.shape == C.shape == Q.shape and A.ndim == 2 and A.shape[0] == A.shape[1]):
        raise ValueError(f"shape mismatch: A{A.shape}, C{C.shape}, Q{Q.shape}")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    num = abs(np.trace(A @ C)) ** 2
    den = np.trace(A @ Q @ A.conj().T @ C).real + sigma2
    return float(num / den)


def snr_lower_bound_optimal(C, Q, P, sigma2):
    """
    SNR lower bound achieved by :func:`optimal_transform`.

    With ``x = tr(Q^{-1} C)`` this is ``x^2 / (x + sigma2 tr(Q^{-1}) / P)``;
    ``P = 0`` gives 0.
    """
    if P == 0:
        return 0.0
    if P < 0:
        raise ValueError(f"P must be nonnegative, got {P!r}")
    solver = HermitianSolver(Q)
    x = float(np.trace(solver.solve(np.asarray(C, dtype=complex))).real)
    return x * x / (x + sigma2 * solver.inv_trace() / P)


def scalar_snr(x, dims):
    """
    SNR bound as a scalar function of ``x = tr(Q^{-1} C)`` for white
    observation noise ``C_n = zeta2 I``::

        f(x) = x^2 / (k1 x + k2),  k1 = 1 - sigma2/(P zeta2),  k2 = sigma2 M/(P zeta2)

    Accepts scalar or array ``x``.
    """
    if not dims.P > 0:
        raise ValueError("scalar_snr requires P > 0")
    r = dims.sigma2 / (dims.P * dims.zeta2)
    k1 = 1.0 - r
    k2 = r * dims.M
    x = np.asarray(x, dtype=float)
    out = x * x / (k1 * x + k2)
    return float(out) if out.ndim == 0 else out


def rate_lower_bound(gamma):
    """``log2(1 + gamma)`` in bits per channel use."""
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("gamma must be nonnegative")
    return np.log2(1.0 + gamma) if np.ndim(gamma) else float(np.log2(1.0 + gamma))
