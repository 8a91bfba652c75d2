"""
Scenario geometry, covariance generation, channel sampling and Monte-Carlo
rate evaluation.

Covariances are built from a finite number of scatterers seen by
half-wavelength uniform linear arrays. This is a parameterized stand-in for
a full geometry-based stochastic channel model: the per-scatterer power
factors are log-normal with a configurable spread, which is an assumption,
not a calibrated urban-micro model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .model import (ChannelRealization, ModelError, Observation, StatisticalModel,
                    SystemDims, as_phase_vector, effective_covariance, psd_sqrt)
from .precoding import optimal_transform

__all__ = [
    "Scenario",
    "RateEstimate",
    "Scheme",
    "substream",
    "steering_vector",
    "scatterer_covariance",
    "generate_covariances",
    "complex_normal",
    "sample_channel",
    "sample_observation",
    "monte_carlo_rate",
]

MC_CHUNK = 4096
BS_BROADSIDE = np.array([1.0, 0.0])
RIS_BROADSIDE = np.array([0.0, -1.0])


@dataclass(frozen=True)
class Scenario:
    """
    Deployment geometry and channel-generation parameters.

    The BS sits at ``bs_pos``, the RIS at ``ris_pos`` and the user at
    ``(D, 0)`` with ``D`` drawn from ``user_distance_range``. The BS array
    has its broadside along +x, the RIS array along -y (facing the street).
    Scatterer angles are uniform in a window of ``angular_spread_deg``
    centred on the line-of-sight direction of each link. Link gains
    follow ``10^(reference_gain_db/10) (d / reference_distance)^-alpha``; the
    BS-RIS scaling ``beta`` is ``(d_BS-RIS / reference_distance)^-alpha``.
    """

    dims: SystemDims
    bs_pos: tuple = (0.0, 0.0)
    ris_pos: tuple = (50.0, 10.0)
    user_distance_range: tuple = (15.0, 60.0)
    n_scatterers_direct: int = 6
    n_scatterers_ris: int = 6
    pathloss_exponent: float = 2.0
    reference_distance: float = 10.0
    reference_gain_db: float = 20.0
    scatterer_spread_db: float = 4.0
    angular_spread_deg: float = 40.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.user_distance_range
        if not 0 <= lo <= hi:
            raise ModelError(f"user_distance_range must satisfy 0 <= min <= max, got {(lo, hi)}")
        if np.allclose(self.bs_pos, self.ris_pos):
            raise ModelError("BS and RIS positions coincide")
        for name in ("n_scatterers_direct", "n_scatterers_ris"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ModelError(f"{name} must be a positive integer, got {v!r}")
        if not self.reference_distance > 0:
            raise ModelError("reference_distance must be positive")
        if not self.scatterer_spread_db >= 0:
            raise ModelError("scatterer_spread_db must be nonnegative")
        if not 0 <= self.angular_spread_deg <= 180:
            raise ModelError("angular_spread_deg must lie in [0, 180]")

    def gain(self, distance):
        if not distance > 0:
            raise ModelError("degenerate geometry: zero link distance")
        return 10.0 ** (self.reference_gain_db / 10.0) * (
            distance / self.reference_distance) ** (-self.pathloss_exponent)


@dataclass(frozen=True)
class RateEstimate:
    """Monte-Carlo mean rate (bits per channel use) with its standard error."""

    mean_rate: float
    std_err: float
    n_samples: int
    samples: np.ndarray = field(default=None, repr=False, compare=False)


class Scheme(str, enum.Enum):
    BILINEAR_STAT = "bilinear"
    TTS_MATCHED_FILTER = "tts_mf"
    NO_RIS = "no_ris"


def substream(seed, *key):
    """
    Independent counter-based (Philox) generator for ``(seed, *key)``.

    The same key always yields the same stream, whatever the order in which
    streams are created or the number of workers consuming them.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def steering_vector(n_elements, theta):
    """Half-wavelength ULA response ``exp(j pi m sin(theta))``, ``m = 0..n-1``."""
    m = np.arange(n_elements)
    return np.exp(1j * np.pi * m * np.sin(theta))


def scatterer_covariance(n_elements, angles, powers):
    """``sum_p powers[p] a(angles[p]) a(angles[p])^H``."""
    A = np.stack([steering_vector(n_elements, t) for t in np.atleast_1d(angles)], axis=1)
    return (A * np.asarray(powers, dtype=float)) @ A.conj().T


def _broadside_angle(direction, broadside):
    axis = np.array([-broadside[1], broadside[0]])
    return np.arctan2(direction @ axis, direction @ broadside)


def _random_scatterers(rng, n_elements, n_scatterers, mean_power, spread_db,
                       center, width):
    angles = center + width * rng.uniform(-0.5, 0.5, size=n_scatterers)
    factors = 10.0 ** (spread_db * rng.standard_normal(n_scatterers) / 10.0)
    return scatterer_covariance(n_elements, angles, mean_power * factors / n_scatterers)


def generate_covariances(scenario, user_distance, rng):
    """
    Draw a :class:`StatisticalModel` for a user at ``(user_distance, 0)``.

    ``R_Tx`` is normalized to trace ``M`` and ``R_RIS`` is rescaled to the
    same trace. The observation noise covariance is ``zeta2 I``.
    """
    lo, hi = scenario.user_distance_range
    if not lo <= user_distance <= hi:
        raise ModelError(f"user distance {user_distance} outside [{lo}, {hi}]")
    M, N = scenario.dims.M, scenario.dims.N
    user = np.array([user_distance, 0.0])
    bs, ris = np.asarray(scenario.bs_pos, float), np.asarray(scenario.ris_pos, float)
    d_direct = np.linalg.norm(user - bs)
    d_bs_ris = np.linalg.norm(ris - bs)
    d_ris_user = np.linalg.norm(user - ris)
    spread = scenario.scatterer_spread_db
    width = np.deg2rad(scenario.angular_spread_deg)
    n_d, n_r = scenario.n_scatterers_direct, scenario.n_scatterers_ris

    C_d = _random_scatterers(rng, M, n_d, scenario.gain(d_direct), spread,
                             _broadside_angle(user - bs, BS_BROADSIDE), width)
    C_r = _random_scatterers(rng, N, n_r, scenario.gain(d_ris_user), spread,
                             _broadside_angle(user - ris, RIS_BROADSIDE), width)
    R_Tx = _random_scatterers(rng, M, n_r, 1.0, spread,
                              _broadside_angle(ris - bs, BS_BROADSIDE), width)
    R_RIS = _random_scatterers(rng, N, n_r, 1.0, spread,
                               _broadside_angle(bs - ris, RIS_BROADSIDE), width)
    R_Tx *= M / np.trace(R_Tx).real
    R_RIS *= M / np.trace(R_RIS).real
    beta = scenario.gain(d_bs_ris) / 10.0 ** (scenario.reference_gain_db / 10.0)
    C_n = scenario.dims.zeta2 * np.eye(M)
    return StatisticalModel(C_d=C_d, C_r=C_r, R_RIS=R_RIS, R_Tx=R_Tx, beta=beta, C_n=C_n)


def complex_normal(rng, shape):
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def sample_channel(model, phi, rng, size=None):
    """
    Draw ``h_d``, ``r``, ``T`` and the effective channel ``h = h_d + T^H Phi r``.

    With ``size`` given, every field gets a leading batch axis. The draw
    order (``h_d``, ``r``, ``W``) is fixed, so two models of equal shape
    sampled from identically seeded generators share the underlying
    Gaussian variates.
    """
    phi = as_phase_vector(phi, model.N)
    n = 1 if size is None else int(size)
    M, N = model.M, model.N
    h_d = complex_normal(rng, (n, M)) @ psd_sqrt(model.C_d).T
    r = complex_normal(rng, (n, N)) @ psd_sqrt(model.C_r).T
    W = complex_normal(rng, (n, N, M))
    T = np.sqrt(model.beta) * (psd_sqrt(model.R_RIS) @ W @ psd_sqrt(model.R_Tx))
    h = h_d + np.einsum("knm,kn->km", T.conj(), phi * r)
    if size is None:
        h_d, r, T, h = h_d[0], r[0], T[0], h[0]
    return ChannelRealization(h_d=h_d, r=r, T=T, h=h, phi=phi)


def sample_observation(realization, C_n, rng):
    """Observation ``psi = h + n`` with ``n ~ CN(0, C_n)``, batched like ``h``."""
    h = np.asarray(realization.h)
    M = h.shape[-1]
    z = complex_normal(rng, h.shape if h.ndim == 2 else (1, M))
    n = z @ psd_sqrt(C_n).T
    if h.ndim == 1:
        n = n[0]
    return Observation(psi=h + n, n=n)


def monte_carlo_rate(model, phi, scheme, dims, n_samples, rng, keep_samples=False):
    """
    Average instantaneous rate ``E[log2(1 + |h^H p|^2 / sigma2)]``.

    Schemes
    -------
    ``bilinear``
        ``p = A psi`` with ``A = eta Q(phi)^{-1}`` fixed from statistics.
    ``tts_mf``
        Phases fixed, matched filter ``p = sqrt(P) h / ||h||`` on the true
        channel of every sample.
    ``no_ris``
        Bilinear precoder for the model with ``beta = 0``.
    """
    scheme = Scheme(scheme)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if scheme is Scheme.NO_RIS:
        model = model.with_beta(0.0)
        phi = np.ones(model.N, dtype=complex)
    if scheme is not Scheme.TTS_MATCHED_FILTER:
        stats = effective_covariance(model, phi)
        A = optimal_transform(stats.Q, dims.P).A

    rates = np.empty(n_samples)
    done = 0
    while done < n_samples:
        k = min(MC_CHUNK, n_samples - done)
        real = sample_channel(model, phi, rng, size=k)
        obs = sample_observation(real, model.C_n, rng)
        if scheme is Scheme.TTS_MATCHED_FILTER:
            gain = dims.P * np.sum(np.abs(real.h) ** 2, axis=1)
        else:
            p = obs.psi @ A.T
            gain = np.abs(np.einsum("km,km->k", real.h.conj(), p)) ** 2
        rates[done:done + k] = np.log2(1.0 + gain / dims.sigma2)
        done += k

    mean = float(np.mean(rates))
    se = float(np.std(rates, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return RateEstimate(mean_rate=mean, std_err=se, n_samples=n_samples,
                        samples=rates if keep_samples else None)
