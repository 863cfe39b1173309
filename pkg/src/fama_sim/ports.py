"""Port geometries along the fluid channel(s)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Port",
    "PortSet",
    "linear_ports",
    "dcfa_grid",
    "spatial_phase",
    "W_SCFA",
    "W_DCFA",
    "WAVELENGTH_26GHZ_MM",
]

WAVELENGTH_26GHZ_MM = 299.792458 / 26.0

# radiator travel span divided by the free-space wavelength at 26 GHz
W_SCFA = 9.5 / WAVELENGTH_26GHZ_MM
W_DCFA = 11.0 / WAVELENGTH_26GHZ_MM

KINDS = ("scfa", "dcfa", "omni", "custom")
MAPPINGS = ("index-linear", "first-channel")


@dataclass(frozen=True)
class Port:
    """One preset radiator location.

    ``index`` is the 1-based port number k, ``position_norm`` the offset
    from the first port in wavelengths and ``pattern_index`` the 0-based
    entry of the associated :class:`~fama_sim.patterns.PatternSet`.
    """

    index: int
    position_norm: float
    pattern_index: int


@dataclass(frozen=True)
class PortSet:
    ports: tuple
    w_normalized: float
    kind: str = "custom"
    # (n1, n2) for two-channel grids
    grid_shape: tuple | None = None

    def __post_init__(self):
        ports = tuple(self.ports)
        if not ports:
            raise ValueError("a port set needs at least one port")
        if self.w_normalized < 0:
            raise ValueError("w_normalized must be >= 0")
        if self.kind not in KINDS:
            raise ValueError(f"unknown port-set kind {self.kind!r}")
        for k, port in enumerate(ports, start=1):
            if port.index != k:
                raise ValueError(f"port {k} carries index {port.index}")
            if not 0 <= port.position_norm <= self.w_normalized * (1 + 1e-12):
                raise ValueError(f"port {k} position {port.position_norm} outside [0, W]")
        object.__setattr__(self, "ports", ports)

    def __len__(self):
        return len(self.ports)

    def __getitem__(self, idx):
        return self.ports[idx]

    def __iter__(self):
        return iter(self.ports)

    @property
    def positions(self):
        return np.array([p.position_norm for p in self.ports])

    @property
    def pattern_indices(self):
        return np.array([p.pattern_index for p in self.ports], dtype=np.intp)

    def check_patterns(self, pattern_set):
        """Raise ``ValueError`` unless every port resolves into ``pattern_set``."""
        if len(pattern_set) != len(self):
            raise ValueError(
                f"{len(self)} ports but {len(pattern_set)} patterns; the two must match"
            )
        idx = self.pattern_indices
        if idx.min() < 0 or idx.max() >= len(pattern_set):
            raise ValueError("port pattern index out of range")

    def subset(self, indices):
        """Ports with the given 1-based indices, renumbered from 1."""
        picked = [self.ports[k - 1] for k in indices]
        return PortSet(
            tuple(Port(n, p.position_norm, p.pattern_index) for n, p in enumerate(picked, 1)),
            self.w_normalized,
            "custom",
        )


def _evenly(n, w):
    if n == 1:
        return [0.0]
    return [(k - 1) * w / (n - 1) for k in range(1, n + 1)]


def linear_ports(n, w, kind="scfa"):
    """``n`` evenly spaced ports spanning ``w`` wavelengths."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pos = _evenly(n, w)
    return PortSet(tuple(Port(k, pos[k - 1], k - 1) for k in range(1, n + 1)), w, kind)


def dcfa_grid(n1, n2, w, mapping="index-linear"):
    """Ports for every combination of two radiator positions.

    Ports are ordered with the channel-1 position as the major index.  With
    ``mapping="index-linear"`` the flattened index k is placed as on a
    single linear track of ``n1 * n2`` ports; with ``"first-channel"`` only
    the channel-1 radiator sets the position.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("n1 and n2 must be >= 1")
    if mapping not in MAPPINGS:
        raise ValueError(f"unknown mapping {mapping!r}; expected one of {MAPPINGS}")
    n = n1 * n2
    if mapping == "index-linear":
        pos = _evenly(n, w)
    else:
        first = _evenly(n1, w)
        pos = [first[i1] for i1 in range(n1) for _ in range(n2)]
    return PortSet(tuple(Port(k, pos[k - 1], k - 1) for k in range(1, n + 1)), w, "dcfa",
                   (n1, n2))


def spatial_phase(position_norm, aoa_deg):
    """Array phase ``exp(-j 2 pi x cos(aoa))`` for a port ``x`` wavelengths in.

    ``position_norm`` may also be a :class:`Port`.  Broadcasts over arrays.
    """
    if isinstance(position_norm, Port):
        position_norm = position_norm.position_norm
    x = np.asarray(position_norm, dtype=float)
    return np.exp(-2j * np.pi * x * np.cos(np.deg2rad(aoa_deg)))
