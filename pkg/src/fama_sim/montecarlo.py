"""
Seeded, parallel trial loops for outage and multiplexing gain.

Reproducibility
---------------
Trials are grouped into fixed blocks of ``block_size``.  Block ``b`` of a
run draws from ``PCG64(SeedSequence(master_seed, spawn_key=stream_key + (b,)))``
and always draws a full block, even when the run ends mid-block.  Trial t's
randomness therefore depends only on ``(master_seed, stream_key, t)``: not on
``n_trials``, execution order or worker count.  Workers return integer
outage counts, which are summed.

Sweep points get ``stream_key = (point_seed,)`` where ``point_seed`` is the
first 8 bytes (big-endian) of ``blake2b(canonical_json(coords), digest_size=8)``.
``coords`` holds the antenna name, strategy name, user count and SNR; with
common random numbers only the fixed tag ``"crn"`` is hashed, so every point
re-uses the same path variables.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ScatteringEnvironment, channel_matrix, sample_paths, selected_channel
from .fama import LinkBudget, SelectionStrategy, multiplexing_gain, sinr_at, sinr_table
from .patterns import PatternSet, omni_set
from .ports import PortSet, linear_ports

__all__ = [
    "Antenna",
    "SimConfig",
    "SimEstimate",
    "estimate",
    "outage_count",
    "sweep",
    "point_seed",
    "proportion_ci",
    "default_workers",
]

Z95 = 1.959963984540054
DEFAULT_TRIALS = 1_000_000
DEFAULT_SNR_DB = tuple(range(-10, 31, 2))


@dataclass(frozen=True)
class Antenna:
    """A named port geometry together with its per-port patterns."""

    name: str
    ports: PortSet
    patterns: PatternSet

    def __post_init__(self):
        self.ports.check_patterns(self.patterns)

    @classmethod
    def omni(cls, n_ports=1, w=0.0, name="omni"):
        return cls(name, linear_ports(n_ports, w, "omni"), omni_set(n_ports))

    @property
    def n_ports(self):
        return len(self.ports)


@dataclass(frozen=True)
class SimConfig:
    env: ScatteringEnvironment
    m_users: int
    antenna: Antenna
    budget: LinkBudget
    strategy: SelectionStrategy
    n_trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    stream_key: tuple = ()
    block_size: int = 1024
    # users drawn per trial; >= m_users so nested user counts share draws
    m_draw: int | None = None
    # trials evaluated together inside a block; None sizes it to stay cache-friendly
    chunk: int | None = None

    def __post_init__(self):
        if self.m_users < 1:
            raise ValueError("m_users must be >= 1")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.m_draw is not None and self.m_draw < self.m_users:
            raise ValueError("m_draw must be >= m_users")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        self.strategy.check(self.antenna.n_ports)

    @property
    def draw_users(self):
        return self.m_draw or self.m_users

    @property
    def snr_db(self):
        return self.budget.snr_db


@dataclass(frozen=True)
class SimEstimate:
    outage_hat: float
    ci_low: float
    ci_high: float
    mux_gain: float
    n_trials: int
    outage_count: int
    seed: int
    config: SimConfig = field(repr=False, compare=False)

    @property
    def m_users(self):
        return self.config.m_users


def proportion_ci(count, n, z=Z95):
    """Normal-approximation interval for a Bernoulli proportion, clipped to [0, 1]."""
    p = count / n
    half = z * math.sqrt(p * (1.0 - p) / n)
    return p, max(0.0, p - half), min(1.0, p + half)


def _block_rng(config, block):
    ss = np.random.SeedSequence(config.master_seed, spawn_key=tuple(config.stream_key) + (block,))
    return np.random.Generator(np.random.PCG64(ss))


def _draw_block(config, block):
    rng = _block_rng(config, block)
    paths = sample_paths(config.env, config.draw_users, rng, size=config.block_size)
    port_u = rng.random((config.block_size, config.draw_users))
    return paths, port_u


def _block_outages(config, block, n_use):
    """Outage count over the first ``n_use`` trials of ``block``."""
    paths, port_u = _draw_block(config, block)
    m = config.m_users
    ant = config.antenna
    env = config.env
    budget = config.budget
    strategy = config.strategy
    chunk = config.chunk or _auto_chunk(config)
    count = 0
    for start in range(0, n_use, chunk):
        stop = min(start + chunk, n_use)
        sub = paths.take(slice(start, stop)).users(m)
        if strategy.kind == "dynamic-max-sinr":
            h = channel_matrix(sub, env, ant.ports, ant.patterns)
            s = sinr_table(h, budget).max(axis=-1)
        else:
            if strategy.kind == "fixed-port":
                ports = np.full((stop - start, m), strategy.port - 1)
            else:
                ports = _static_ports(port_u[start:stop, :m], ant.n_ports)
            h = selected_channel(sub, env, ant.ports, ant.patterns, ports)
            s = sinr_at(h, budget)
        count += int(np.count_nonzero(s < budget.gamma))
    return count


def _auto_chunk(config):
    per_trial = config.m_users ** 2 * (config.env.n_paths + 1)
    if config.strategy.kind == "dynamic-max-sinr":
        per_trial *= config.antenna.n_ports
    return max(1, min(config.block_size, (1 << 19) // per_trial))


def _static_ports(u, n_ports):
    return np.minimum((u * n_ports).astype(np.intp), n_ports - 1)


def default_workers():
    env = os.environ.get("FAMA_SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def outage_count(config, first_trial=0, n_trials=None, workers=1):
    """Number of (trial, user) outages over trials ``[first, first + n)``.

    ``first_trial`` must sit on a block boundary.
    """
    if n_trials is None:
        n_trials = config.n_trials
    b = config.block_size
    if first_trial % b:
        raise ValueError(f"first_trial must be a multiple of block_size={b}")
    jobs = []
    t = first_trial
    end = first_trial + n_trials
    while t < end:
        block = t // b
        n_use = min(b, end - t)
        jobs.append((block, n_use))
        t += n_use
    if workers <= 1 or len(jobs) == 1:
        return sum(_block_outages(config, blk, n) for blk, n in jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(lambda job: _block_outages(config, *job), jobs))


def estimate(config, workers=1):
    """Estimate outage probability and multiplexing gain for one configuration.

    Outage indicators of all users are pooled, so the estimate is over
    ``n_trials * m_users`` Bernoulli samples.
    """
    count = outage_count(config, 0, config.n_trials, workers)
    n = config.n_trials * config.m_users
    p, lo, hi = proportion_ci(count, n)
    return SimEstimate(
        outage_hat=p,
        ci_low=lo,
        ci_high=hi,
        mux_gain=multiplexing_gain(config.m_users, p),
        n_trials=config.n_trials,
        outage_count=count,
        seed=config.stream_key[0] if config.stream_key else config.master_seed,
        config=config,
    )


def point_seed(coords):
    """Stable 64-bit integer derived from a JSON-serializable mapping."""
    text = json.dumps(coords, sort_keys=True, separators=(",", ":"))
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def sweep_configs(template, snr_db, m_users, strategies, antennas=None,
                  common_random_numbers=False, gamma_db=None, noise_var=None):
    """Expand a template over the Cartesian product of the sweep axes.

    Rows are ordered antenna, strategy, user count, SNR (SNR fastest).
    """
    snr_db = list(snr_db)
    m_users = list(m_users)
    strategies = list(strategies)
    antennas = list(antennas) if antennas is not None else [template.antenna]
    if not (snr_db and m_users and strategies and antennas):
        raise ValueError("sweep axes must be non-empty")
    gamma_db = template.budget.gamma_db if gamma_db is None else gamma_db
    noise_var = template.budget.noise_var if noise_var is None else noise_var
    m_draw = max(m_users) if common_random_numbers else None
    out = []
    for ant in antennas:
        for strat in strategies:
            for m in m_users:
                for snr in snr_db:
                    if common_random_numbers:
                        coords = {"tag": "crn"}
                    else:
                        coords = {"antenna": ant.name, "strategy": strat.name,
                                  "m_users": int(m), "snr_db": float(snr)}
                    budget = LinkBudget.from_snr_db(snr, gamma_db, noise_var, template.env.omega)
                    out.append(replace(
                        template, m_users=int(m), antenna=ant, budget=budget, strategy=strat,
                        stream_key=(point_seed(coords),), m_draw=m_draw,
                    ))
    return out


def sweep(template, snr_db, m_users, strategies, antennas=None,
          common_random_numbers=False, workers=1, **kw):
    """One :class:`SimEstimate` per sweep point (see :func:`sweep_configs`)."""
    configs = sweep_configs(template, snr_db, m_users, strategies, antennas,
                            common_random_numbers, **kw)
    return [estimate(c, workers) for c in configs]
