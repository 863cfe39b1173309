"""
Finite-scattering Rician channels seen through per-port antenna patterns.

For BS antenna j and user i, one specular path and ``n_paths`` scattered
paths are drawn once.  The channel at port k re-uses those draws and only
changes the array phase and the pattern gain, which is what makes ports
correlated.

Array layout: every path array has optional leading batch axes followed by
``(j, i)`` and, for scattered quantities, a path axis.  Received channels
are indexed ``[..., j, i, k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .patterns import PatternSet, omni_set

__all__ = [
    "ChannelError",
    "ScatteringEnvironment",
    "PathVariables",
    "ChannelRealization",
    "sample_paths",
    "theoretical_channel",
    "apply_pattern",
    "channel_matrix",
    "selected_channel",
    "realize",
]


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ScatteringEnvironment:
    """Rician factor ``k_factor``, mean power ``omega``, ``n_paths`` scatterers."""

    k_factor: float = 20.0
    omega: float = 1.0
    n_paths: int = 5

    def __post_init__(self):
        if not self.k_factor >= 0:
            raise ChannelError("k_factor must be >= 0")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ChannelError("omega must be positive and finite")
        if int(self.n_paths) != self.n_paths or self.n_paths < 0:
            raise ChannelError("n_paths must be a non-negative integer")
        if self.n_paths == 0 and self.k_factor == 0:
            raise ChannelError("k_factor=0 with n_paths=0 leaves a zero-power channel")

    @property
    def los_amplitude(self):
        if math.isinf(self.k_factor):
            return math.sqrt(self.omega)
        return math.sqrt(self.k_factor * self.omega / (self.k_factor + 1.0))

    @property
    def path_variance(self):
        """Variance of each scattered coefficient (0 when there are none)."""
        if self.n_paths == 0 or math.isinf(self.k_factor):
            return 0.0
        return self.omega / ((self.k_factor + 1.0) * self.n_paths)


@dataclass(frozen=True)
class PathVariables:
    """Random path parameters for every (BS antenna, user) pair.

    ``los_phase`` and ``los_aoa`` have shape ``(..., M, M)``;
    ``scat_coeff`` and ``scat_aoa`` have shape ``(..., M, M, Np)``.
    Angles are in degrees.
    """

    los_phase: np.ndarray
    los_aoa: np.ndarray
    scat_coeff: np.ndarray
    scat_aoa: np.ndarray

    @property
    def m_users(self):
        return self.los_phase.shape[-1]

    @property
    def batch_shape(self):
        return self.los_phase.shape[:-2]

    def users(self, m):
        """The sub-system formed by the first ``m`` BS antennas and users."""
        return PathVariables(
            self.los_phase[..., :m, :m],
            self.los_aoa[..., :m, :m],
            self.scat_coeff[..., :m, :m, :],
            self.scat_aoa[..., :m, :m, :],
        )

    def take(self, sl):
        """Slice along the leading batch axis."""
        return PathVariables(self.los_phase[sl], self.los_aoa[sl], self.scat_coeff[sl],
                             self.scat_aoa[sl])

    def amplitudes(self, env):
        """Complex path amplitudes, specular first: shape ``(..., M, M, Np + 1)``."""
        los = env.los_amplitude * np.exp(1j * self.los_phase)
        return np.concatenate([los[..., np.newaxis], self.scat_coeff], axis=-1)

    def angles(self):
        return np.concatenate([self.los_aoa[..., np.newaxis], self.scat_aoa], axis=-1)


def sample_paths(env, m_users, rng, size=None):
    """Draw path variables for ``m_users`` users.

    With ``size`` given, a leading batch axis of that length is added.  The
    draw order is fixed (specular phase, specular AoA, scattered real parts,
    scattered imaginary parts, scattered AoA) so a block of trials is fully
    determined by the generator state.
    """
    if m_users < 1:
        raise ChannelError("m_users must be >= 1")
    lead = () if size is None else (int(size),)
    shape = lead + (m_users, m_users)
    np_ = int(env.n_paths)
    los_phase = rng.uniform(0.0, 2.0 * np.pi, shape)
    los_aoa = rng.uniform(0.0, 360.0, shape)
    scale = math.sqrt(env.path_variance / 2.0)
    re = rng.standard_normal(shape + (np_,))
    im = rng.standard_normal(shape + (np_,))
    scat = scale * (re + 1j * im)
    scat_aoa = rng.uniform(0.0, 360.0, shape + (np_,))
    return PathVariables(los_phase, los_aoa, scat, scat_aoa)


def _phase_arg(position, aoa):
    return (-2.0 * np.pi) * (position * np.cos(np.deg2rad(aoa)))


def _combine(amps, weight, position, aoa, axis):
    """Sum of ``amps * weight * exp(j * phase)`` over the path axis.

    Done in real arithmetic with one ufunc per operation and a fixed
    left-to-right path sum: vectorized complex multiplies may fuse
    multiply-adds depending on memory layout, which would make the same
    channel round differently along different evaluation routes.
    """
    ar = amps.real
    ai = amps.imag
    if weight is not None:
        ar = ar * weight
        ai = ai * weight
    arg = _phase_arg(position, aoa)
    c = np.cos(arg)
    s = np.sin(arg)
    re = np.moveaxis(ar * c - ai * s, axis, 0)
    im = np.moveaxis(ar * s + ai * c, axis, 0)
    re_tot = re[0].copy()
    im_tot = im[0].copy()
    for a, b in zip(re[1:], im[1:]):
        re_tot += a
        im_tot += b
    out = np.empty(re_tot.shape, dtype=complex)
    out.real = re_tot
    out.imag = im_tot
    return out[()] if out.ndim == 0 else out


def theoretical_channel(paths, env, port, j, i):
    """Channel of an isotropic antenna at ``port`` from BS antenna ``j`` to user ``i``.

    Indices ``j`` and ``i`` are 0-based; batch axes, if any, are kept.
    """
    amps = paths.amplitudes(env)[..., j, i, :]
    aoa = paths.angles()[..., j, i, :]
    return _combine(amps, None, port.position_norm, aoa, -1)


def apply_pattern(paths, env, port, pattern_set, j, i):
    """Like :func:`theoretical_channel`, with every path scaled by the
    square root of the port pattern's power gain toward its arrival angle."""
    amps = paths.amplitudes(env)[..., j, i, :]
    aoa = paths.angles()[..., j, i, :]
    weight = 10.0 ** (pattern_set[port.pattern_index].gain_db(aoa) / 20.0)
    return _combine(amps, weight, port.position_norm, aoa, -1)


def channel_matrix(paths, env, port_set, pattern_set=None):
    """Received channel at every port, shape ``(..., M, M, N)``.

    ``pattern_set=None`` gives the isotropic (theoretical) channel.
    """
    amps = paths.amplitudes(env)[..., np.newaxis]
    aoa = paths.angles()[..., np.newaxis]
    w = None
    if pattern_set is not None:
        w = pattern_set.amplitude(aoa[..., 0])[..., port_set.pattern_indices]
    return _combine(amps, w, port_set.positions, aoa, -2)


def selected_channel(paths, env, port_set, pattern_set, ports):
    """Received channel toward each user at one chosen port per user.

    ``ports`` holds 0-based port indices of shape ``(..., M)`` (one per
    receiving user i).  Returns shape ``(..., M, M)`` indexed ``[..., j, i]``.
    """
    ports = np.asarray(ports, dtype=np.intp)
    amps = paths.amplitudes(env)
    aoa = paths.angles()
    k = ports[..., np.newaxis, :, np.newaxis]
    w = None
    if pattern_set is not None:
        w = pattern_set.amplitude_select(aoa, port_set.pattern_indices[k])
    return _combine(amps, w, port_set.positions[k], aoa, -1)


@dataclass(frozen=True)
class ChannelRealization:
    """One (or a batch of) multi-user channel draws.

    ``h[..., j, i, k]`` is the channel from BS antenna j to user i at port k.
    """

    env: ScatteringEnvironment
    paths: PathVariables
    h: np.ndarray

    @property
    def m_users(self):
        return self.h.shape[-2]

    @property
    def n_ports(self):
        return self.h.shape[-1]


def realize(env, m_users, port_set, pattern_set, rng, size=None):
    """Sample shared path variables and evaluate every port from them."""
    if pattern_set is None:
        pattern_set = omni_set(len(port_set))
    if not isinstance(pattern_set, PatternSet):
        raise TypeError("pattern_set must be a PatternSet")
    port_set.check_patterns(pattern_set)
    paths = sample_paths(env, m_users, rng, size)
    h = channel_matrix(paths, env, port_set, pattern_set)
    return ChannelRealization(env, paths, h)
