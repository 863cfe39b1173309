"""SINR, port selection, outage and multiplexing gain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinkBudget",
    "SelectionStrategy",
    "DYNAMIC",
    "STATIC",
    "fixed_port",
    "sinr",
    "sinr_table",
    "sinr_at",
    "select_ports",
    "outage_indicator",
    "multiplexing_gain",
]


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit powers, receiver noise and SINR threshold (all linear).

    Parameters
    ----------
    tx_power : float or sequence of float
        Per-BS-antenna transmit power p_j.  A scalar means equal power.
    noise_var : float
        Receiver noise variance.
    gamma : float
        Linear SINR threshold; 1.0 is 0 dB.
    """

    tx_power: object = 1.0
    noise_var: float = 1.0
    gamma: float = 1.0
    omega: float = 1.0
    nominal_snr_db: float | None = None

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.tx_power, dtype=float))
        if p.ndim != 1 or not np.all(p > 0) or not np.all(np.isfinite(p)):
            raise ValueError("tx_power must be positive and finite")
        if not self.noise_var >= 0:
            raise ValueError("noise_var must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def from_snr_db(cls, snr_db, gamma_db=0.0, noise_var=1.0, omega=1.0):
        """Equal-power budget whose transmit SNR ``p * omega / noise_var`` is ``snr_db``."""
        p = float(noise_var * db2lin(snr_db) / omega)
        return cls(p, noise_var, float(db2lin(gamma_db)), omega, float(snr_db))

    def powers(self, m_users):
        p = np.atleast_1d(np.asarray(self.tx_power, dtype=float))
        if p.size == 1:
            return np.full(m_users, p[0])
        if p.size < m_users:
            raise ValueError(f"{p.size} transmit powers for {m_users} users")
        return p[:m_users]

    @property
    def snr_db(self):
        if self.nominal_snr_db is not None:
            return self.nominal_snr_db
        p = np.atleast_1d(np.asarray(self.tx_power, dtype=float))
        if self.noise_var == 0:
            return math.inf
        return float(10.0 * np.log10(p[0] * self.omega / self.noise_var))

    @property
    def gamma_db(self):
        return float(10.0 * np.log10(self.gamma))


@dataclass(frozen=True)
class SelectionStrategy:
    """How each user picks its port.

    ``kind`` is ``"dynamic-max-sinr"``, ``"static-random-port"`` or
    ``"fixed-port"`` (with a 1-based ``port``).
    """

    kind: str
    port: int | None = None

    def __post_init__(self):
        if self.kind not in ("dynamic-max-sinr", "static-random-port", "fixed-port"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.kind == "fixed-port":
            if self.port is None or int(self.port) < 1:
                raise ValueError("fixed-port needs a 1-based port index")
        elif self.port is not None:
            raise ValueError(f"{self.kind} takes no port index")

    @classmethod
    def parse(cls, text):
        """Accepts ``dynamic``/``static`` shorthands and ``fixed-port:K``."""
        text = text.strip()
        aliases = {"dynamic": "dynamic-max-sinr", "static": "static-random-port"}
        if text.startswith("fixed-port"):
            _, _, k = text.partition(":")
            try:
                return cls("fixed-port", int(k))
            except ValueError:
                raise ValueError(f"bad fixed-port strategy {text!r}; use fixed-port:K") from None
        return cls(aliases.get(text, text))

    @property
    def name(self):
        return f"fixed-port:{self.port}" if self.kind == "fixed-port" else self.kind

    def check(self, n_ports):
        if self.kind == "fixed-port" and self.port > n_ports:
            raise ValueError(f"fixed port {self.port} outside 1..{n_ports}")

    def __str__(self):
        return self.name


DYNAMIC = SelectionStrategy("dynamic-max-sinr")
STATIC = SelectionStrategy("static-random-port")


def fixed_port(k):
    return SelectionStrategy("fixed-port", k)


def _signal_interference(h, powers):
    """Split received power into desired and interfering parts.

    ``h`` is ``(..., M, M, K)`` indexed ``[j, i, k]``; returns two arrays of
    shape ``(..., M, K)`` indexed ``[i, k]``.
    """
    m = h.shape[-2]
    pw = (h.real ** 2 + h.imag ** 2) * powers[:, np.newaxis, np.newaxis]
    signal = np.moveaxis(np.diagonal(pw, axis1=-3, axis2=-2), -1, -2)
    # explicit j loop: one fixed summation order for every caller
    interference = np.zeros(signal.shape)
    for j in range(m):
        term = pw[..., j, :, :].copy()
        term[..., j, :] = 0.0
        interference += term
    return signal, interference


def sinr_table(h, budget):
    """SINR of every user at every port, shape ``(..., M, N)``.

    User i's SINR at port k only involves channels evaluated at that port.
    """
    m = h.shape[-2]
    signal, interference = _signal_interference(h, budget.powers(m))
    return signal / (interference + budget.noise_var)


def sinr_at(h_sel, budget):
    """SINR per user from a ``(..., M, M)`` channel already taken at each user's port."""
    return sinr_table(h_sel[..., np.newaxis], budget)[..., 0]


def sinr(realization, budget, i, ports):
    """SINR of user ``i`` (0-based) given the 1-based port choice of every user.

    Only ``ports[i]`` matters: interference toward user i is received at
    user i's own port.
    """
    h = realization.h
    k = int(ports[i]) - 1
    p = budget.powers(h.shape[-2])
    signal = p[i] * abs(h[i, i, k]) ** 2
    interference = sum(p[j] * abs(h[j, i, k]) ** 2 for j in range(h.shape[-2]) if j != i)
    return float(signal / (interference + budget.noise_var))


def select_ports(realization, budget, strategy, rng=None):
    """Per-user 1-based port indices chosen by ``strategy``.

    Dynamic selection maximizes each user's own SINR, which is the joint
    optimum since user i's SINR depends on ``k_i`` alone.  Ties go to the
    smallest index.
    """
    h = realization.h
    m, n = h.shape[-2], h.shape[-1]
    strategy.check(n)
    if strategy.kind == "dynamic-max-sinr":
        return np.argmax(sinr_table(h, budget), axis=-1) + 1
    if strategy.kind == "fixed-port":
        return np.full(h.shape[:-3] + (m,), strategy.port)
    if rng is None:
        raise ValueError("static-random-port needs a random generator")
    return rng.integers(1, n + 1, size=h.shape[:-3] + (m,))


def outage_indicator(sinr_value, gamma):
    """True where SINR falls strictly below ``gamma``."""
    out = np.asarray(sinr_value) < gamma
    return bool(out) if out.ndim == 0 else out


def multiplexing_gain(m_users, outage_prob):
    if m_users < 1:
        raise ValueError("m_users must be >= 1")
    if not 0.0 <= outage_prob <= 1.0:
        raise ValueError(f"outage probability {outage_prob} outside [0, 1]")
    return m_users * (1.0 - outage_prob)
