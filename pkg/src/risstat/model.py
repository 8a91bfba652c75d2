"""
Domain types and covariance algebra for the RIS-aided MISO downlink.

The phase vector enters the effective-channel statistics only through the
coupling scalar ``s = phi^H (R_RIS * C_r^T) phi`` (``*`` is the entrywise
product), so that

    C = C_d + beta * s * R_Tx,    Q = C + C_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelError",
    "SingularMatrixError",
    "SystemDims",
    "StatisticalModel",
    "EffectiveStatistics",
    "ChannelRealization",
    "Observation",
    "as_phase_vector",
    "hermitian_part",
    "psd_sqrt",
    "coupling_matrix",
    "coupling_scalar",
    "effective_covariance",
]

UNIT_MODULUS_TOL = 1e-12
HERMITIAN_TOL = 1e-12
NEG_EIG_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-10


class ModelError(ValueError):
    """Invalid dimensions or matrices handed to the model layer."""


class SingularMatrixError(ValueError):
    """A covariance that must be invertible is singular or badly conditioned."""


@dataclass(frozen=True)
class SystemDims:
    """
    Array sizes, transmit power and noise levels.

    Parameters
    ----------
    M : int
        Number of BS antennas.
    N : int
        Number of RIS elements.
    P : float
        Downlink transmit power (linear scale).
    sigma2 : float
        Receiver noise variance.
    zeta2 : float
        Variance of the (white) channel-observation noise.
    """

    M: int
    N: int
    P: float = 1.0
    sigma2: float = 1.0
    zeta2: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ModelError(f"M must be a positive integer, got {self.M!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ModelError(f"N must be a positive integer, got {self.N!r}")
        if not self.P >= 0:
            raise ModelError(f"P must be nonnegative, got {self.P!r}")
        if not self.sigma2 > 0:
            raise ModelError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not self.zeta2 > 0:
            raise ModelError(f"zeta2 must be positive, got {self.zeta2!r}")


def hermitian_part(X):
    """Return ``(X + X^H) / 2``."""
    X = np.asarray(X, dtype=complex)
    return 0.5 * (X + X.conj().T)


def _check_psd(X, name):
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ModelError(f"{name} must be a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ModelError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(X))) if X.size else 1.0)
    if np.max(np.abs(X - X.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ModelError(f"{name} is not Hermitian")
    X = hermitian_part(X)
    w, V = np.linalg.eigh(X)
    if w.size and w[0] < -NEG_EIG_TOL * scale:
        raise ModelError(
            f"{name} is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    if w.size and w[0] < 0:
        # clamp tiny negative eigenvalues
        X = hermitian_part((V * np.clip(w, 0.0, None)) @ V.conj().T)
    return X


def psd_sqrt(X):
    """
    Hermitian square root of a PSD matrix via eigendecomposition.

    Negative eigenvalues (round-off) are clamped to zero, so rank-deficient
    covariances are handled where a Cholesky factorization would fail.
    """
    w, V = np.linalg.eigh(hermitian_part(X))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def as_phase_vector(phi, N=None):
    """
    Validate a unit-modulus phase vector and return it as a complex array.

    Raises
    ------
    ModelError
        If any ``|phi_n|`` deviates from one by more than 1e-12, or the
        length does not match ``N``.
    """
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if N is not None and phi.shape[0] != N:
        raise ModelError(f"phase vector has length {phi.shape[0]}, expected {N}")
    dev = np.max(np.abs(np.abs(phi) - 1.0), initial=0.0)
    if not dev <= UNIT_MODULUS_TOL:
        raise ModelError(f"phase vector violates unit modulus (max dev {dev:.3e})")
    return phi


@dataclass(frozen=True)
class StatisticalModel:
    """
    Second-order statistics of the direct, RIS-user and BS-RIS channels.

    The BS-RIS channel follows the Kronecker model
    ``T = sqrt(beta) R_RIS^{1/2} W R_Tx^{1/2}``. On construction every
    matrix is checked to be Hermitian PSD and symmetrized, and the
    correlation traces must agree.
    """

    C_d: np.ndarray
    C_r: np.ndarray
    R_RIS: np.ndarray
    R_Tx: np.ndarray
    beta: float
    C_n: np.ndarray

    def __post_init__(self):
        for name in ("C_d", "C_r", "R_RIS", "R_Tx", "C_n"):
            object.__setattr__(self, name, _check_psd(getattr(self, name), name))
        M, N = self.C_d.shape[0], self.C_r.shape[0]
        if self.R_Tx.shape != (M, M) or self.C_n.shape != (M, M):
            raise ModelError("C_d, R_Tx and C_n must all be M x M")
        if self.R_RIS.shape != (N, N):
            raise ModelError(
                f"R_RIS has shape {self.R_RIS.shape}, C_r has {self.C_r.shape}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ModelError(f"beta must be nonnegative, got {self.beta!r}")
        object.__setattr__(self, "beta", float(self.beta))
        t_tx = np.trace(self.R_Tx).real
        t_ris = np.trace(self.R_RIS).real
        if abs(t_tx - t_ris) > 1e-9 * max(abs(t_tx), abs(t_ris), 1e-300):
            raise ModelError(
                f"tr(R_Tx) = {t_tx!r} differs from tr(R_RIS) = {t_ris!r}")

    @property
    def M(self):
        return self.C_d.shape[0]

    @property
    def N(self):
        return self.C_r.shape[0]

    def with_beta(self, beta):
        """Copy of the model with a different BS-RIS scaling."""
        return StatisticalModel(self.C_d, self.C_r, self.R_RIS, self.R_Tx,
                                beta, self.C_n)


@dataclass(frozen=True)
class EffectiveStatistics:
    """Effective-channel covariance ``C``, observation covariance ``Q`` and ``s``."""

    C: np.ndarray
    Q: np.ndarray
    s: float


@dataclass
class ChannelRealization:
    """
    One draw (or a batch of draws, leading axis) of the channels.

    ``h`` is the effective channel ``h = h_d + T^H Phi r``.
    """

    h_d: np.ndarray
    r: np.ndarray
    T: np.ndarray
    h: np.ndarray
    phi: np.ndarray = field(repr=False, default=None)


@dataclass
class Observation:
    """Noisy LS channel observation ``psi = h + n``."""

    psi: np.ndarray
    n: np.ndarray


def coupling_matrix(model):
    """Return ``R_RIS * C_r^T`` (entrywise product), an N x N Hermitian PSD matrix."""
    if model.R_RIS.shape != model.C_r.shape:
        raise ModelError("R_RIS and C_r dimensions differ")
    return hermitian_part(model.R_RIS * model.C_r.T)


def coupling_scalar(model, phi):
    """
    Coupling scalar ``s = phi^H (R_RIS * C_r^T) phi``.

    The imaginary round-off residue is checked against 1e-10 (relative to
    the magnitude of ``s``) and dropped.
    """
    phi = as_phase_vector(phi, model.N)
    K = coupling_matrix(model)
    s = np.vdot(phi, K @ phi)
    if abs(s.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(s.real)):
        raise ModelError(f"coupling scalar has imaginary part {s.imag:.3e}")
    return max(float(s.real), 0.0)


def effective_covariance(model, phi):
    """
    Effective-channel statistics for a given phase vector.

    Returns
    -------
    EffectiveStatistics
        ``C = C_d + beta s R_Tx`` and ``Q = C + C_n``.

    Raises
    ------
    SingularMatrixError
        If ``Q`` is not positive definite.
    """
    s = coupling_scalar(model, phi)
    C = hermitian_part(model.C_d + (model.beta * s) * model.R_Tx)
    Q = hermitian_part(C + model.C_n)
    w = np.linalg.eigvalsh(Q)
    if w[0] <= 0 or w[-1] > 1e14 * w[0]:
        raise SingularMatrixError(
            f"observation covariance Q is singular (eigenvalues {w[0]:.3e}..{w[-1]:.3e})")
    return EffectiveStatistics(C=C, Q=Q, s=s)
