"""
Per-port antenna gain patterns on a single great-circle cut.

A pattern is a table of ``(angle_deg, gain_dbi)`` samples.  Queries between
samples are linear in dB and wrap from the last sample back to the first,
so every angle in [0, 360) has a defined gain.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PatternError",
    "PatternFormatError",
    "RadiationPattern",
    "PatternSet",
    "RpdrEnvelope",
    "SyntheticProfile",
    "gain_at",
    "gain_db_at",
    "load_pattern_set",
    "read_pattern_file",
    "dump_pattern_set",
    "make_omni",
    "make_synthetic_set",
    "make_synthetic_dcfa_set",
    "rpdr",
    "omni_set",
]

CSV_HEADER = "port_id,angle_deg,gain_dbi"


class PatternError(ValueError):
    """Invalid pattern or synthetic profile."""


class PatternFormatError(PatternError):
    """Malformed pattern CSV content."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _normalize_angle(angle_deg):
    a = np.mod(np.asarray(angle_deg, dtype=float), 360.0)
    # np.mod(-1e-20, 360) rounds to 360.0
    return np.where(a >= 360.0, 0.0, a)


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """Sampled power gain of one antenna port.

    Parameters
    ----------
    port_label : str
        Identifier of the port (for files, the ``port_id`` as text).
    angles_deg : array_like
        Strictly increasing sample angles in [0, 360).
    gains_dbi : array_like
        Gain in dBi at each sample angle.
    frequency_ghz : float, optional
        Measurement frequency (metadata only).
    """

    port_label: str
    angles_deg: np.ndarray
    gains_dbi: np.ndarray
    frequency_ghz: float | None = None

    def __post_init__(self):
        angles = np.array(self.angles_deg, dtype=float).reshape(-1)
        gains = np.array(self.gains_dbi, dtype=float).reshape(-1)
        if angles.size == 0:
            raise PatternError(f"pattern {self.port_label!r} has no samples")
        if angles.shape != gains.shape:
            raise PatternError(f"pattern {self.port_label!r}: angle/gain length mismatch")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(gains))):
            raise PatternError(f"pattern {self.port_label!r}: non-finite sample")
        if np.any(angles < 0.0) or np.any(angles >= 360.0):
            raise PatternError(f"pattern {self.port_label!r}: angles must lie in [0, 360)")
        if np.any(np.diff(angles) <= 0.0):
            raise PatternError(f"pattern {self.port_label!r}: angles must be strictly increasing")
        angles.setflags(write=False)
        gains.setflags(write=False)
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "gains_dbi", gains)

    @property
    def samples(self):
        return list(zip(self.angles_deg.tolist(), self.gains_dbi.tolist()))

    def __len__(self):
        return self.angles_deg.size

    def __eq__(self, other):
        if not isinstance(other, RadiationPattern):
            return NotImplemented
        return (
            self.port_label == other.port_label
            and np.array_equal(self.angles_deg, other.angles_deg)
            and np.array_equal(self.gains_dbi, other.gains_dbi)
            and self.frequency_ghz == other.frequency_ghz
        )

    __hash__ = None

    def gain_db(self, angle_deg):
        """Interpolated gain in dBi; accepts scalars or arrays."""
        return _interp_db(self.angles_deg, self.gains_dbi[np.newaxis, :], angle_deg)[..., 0]

    def gain(self, angle_deg):
        """Interpolated linear power gain."""
        return 10.0 ** (self.gain_db(angle_deg) / 10.0)

    def shifted(self, offset_db):
        """Copy of the pattern with every sample raised by ``offset_db``."""
        return RadiationPattern(
            self.port_label, self.angles_deg, self.gains_dbi + offset_db, self.frequency_ghz
        )


def _interp_db(grid, table, angle_deg):
    """dB-linear wraparound interpolation.

    ``grid`` has shape (L,), ``table`` shape (P, L).  The result has shape
    ``np.shape(angle_deg) + (P,)``.
    """
    a = _normalize_angle(angle_deg)
    n = grid.size
    if n == 1:
        return np.broadcast_to(table[:, 0], a.shape + (table.shape[0],)).copy()
    lo = np.searchsorted(grid, a, side="right") - 1
    lo = np.where(lo < 0, n - 1, lo)
    hi = (lo + 1) % n
    span = np.mod(grid[hi] - grid[lo], 360.0)
    frac = np.mod(a - grid[lo], 360.0) / span
    g_lo = table[:, lo]
    g_hi = table[:, hi]
    out = g_lo + frac * (g_hi - g_lo)
    # exact at samples, not just to rounding
    out = np.where(frac == 0.0, g_lo, out)
    return np.moveaxis(out, 0, -1)


def gain_db_at(pattern, angle_deg):
    return pattern.gain_db(angle_deg)


def gain_at(pattern, angle_deg):
    """Linear power gain of ``pattern`` toward ``angle_deg``.

    Angles are wrapped into [0, 360) first.  Interpolation happens in the dB
    domain, so exact sample angles return ``10**(g/10)`` of the stored value.
    """
    return pattern.gain(angle_deg)


@dataclass(frozen=True, eq=False)
class PatternSet:
    """Ordered per-port patterns.

    ``source`` is one of ``"measured-file"``, ``"synthetic"`` or ``"omni"``.
    """

    patterns: tuple
    source: str = "synthetic"

    def __post_init__(self):
        patterns = tuple(self.patterns)
        if not patterns:
            raise PatternError("pattern set must hold at least one pattern")
        if self.source not in ("measured-file", "synthetic", "omni"):
            raise PatternError(f"unknown pattern source {self.source!r}")
        object.__setattr__(self, "patterns", patterns)
        grid = patterns[0].angles_deg
        shared = all(np.array_equal(p.angles_deg, grid) for p in patterns[1:])
        if self.source == "measured-file" and not shared:
            raise PatternError("measured patterns must share one angular grid")
        object.__setattr__(self, "_shared", shared)
        if shared:
            table = np.stack([p.gains_dbi for p in patterns])
            table.setflags(write=False)
            object.__setattr__(self, "_table", table)

    def __len__(self):
        return len(self.patterns)

    def __getitem__(self, idx):
        return self.patterns[idx]

    def __iter__(self):
        return iter(self.patterns)

    def __eq__(self, other):
        if not isinstance(other, PatternSet):
            return NotImplemented
        return self.source == other.source and self.patterns == other.patterns

    __hash__ = None

    @property
    def shared_grid(self):
        return self._shared

    @property
    def grid(self):
        """Common sample grid, or ``None`` when ports are sampled differently."""
        return self.patterns[0].angles_deg if self._shared else None

    @property
    def frequency_ghz(self):
        return self.patterns[0].frequency_ghz

    def gain_db(self, angle_deg):
        """Gain of every pattern toward ``angle_deg``, shape ``angle.shape + (P,)``."""
        if self._shared:
            return _interp_db(self.grid, self._table, angle_deg)
        return np.stack([p.gain_db(angle_deg) for p in self.patterns], axis=-1)

    def amplitude(self, angle_deg):
        """Field amplitude weight, the square root of the linear power gain."""
        return 10.0 ** (self.gain_db(angle_deg) / 20.0)

    def gain_db_select(self, angle_deg, pattern_idx):
        """Gain of pattern ``pattern_idx[...]`` toward ``angle_deg[...]``.

        Both arguments broadcast against each other; only the selected
        pattern is interpolated at each element.
        """
        angle_deg, pattern_idx = np.broadcast_arrays(
            np.asarray(angle_deg, dtype=float), np.asarray(pattern_idx, dtype=np.intp)
        )
        if not self._shared:
            g = self.gain_db(angle_deg)
            return np.take_along_axis(g, pattern_idx[..., np.newaxis], axis=-1)[..., 0]
        grid = self.grid
        a = _normalize_angle(angle_deg)
        n = grid.size
        if n == 1:
            return self._table[pattern_idx, 0]
        lo = np.searchsorted(grid, a, side="right") - 1
        lo = np.where(lo < 0, n - 1, lo)
        hi = (lo + 1) % n
        frac = np.mod(a - grid[lo], 360.0) / np.mod(grid[hi] - grid[lo], 360.0)
        g_lo = self._table[pattern_idx, lo]
        g_hi = self._table[pattern_idx, hi]
        out = g_lo + frac * (g_hi - g_lo)
        return np.where(frac == 0.0, g_lo, out)

    def amplitude_select(self, angle_deg, pattern_idx):
        return 10.0 ** (self.gain_db_select(angle_deg, pattern_idx) / 20.0)

    def shifted(self, offset_db):
        return PatternSet(tuple(p.shifted(offset_db) for p in self.patterns), self.source)


@dataclass(frozen=True)
class RpdrEnvelope:
    """Upper/lower gain envelopes across ports and their difference."""

    angles_deg: np.ndarray
    upper_dbi: np.ndarray
    lower_dbi: np.ndarray
    range_db: np.ndarray
    avg_range_db: float


def rpdr(pattern_set, grid=None):
    """Radiation pattern dynamic range of a set of port patterns.

    Parameters
    ----------
    pattern_set : PatternSet
    grid : array_like, optional
        Evaluation angles in degrees.  Defaults to the set's shared sample
        grid, or a 1-degree grid when the ports are sampled differently.

    Returns
    -------
    RpdrEnvelope
    """
    if grid is None:
        grid = pattern_set.grid if pattern_set.grid is not None else np.arange(360.0)
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise PatternError("rpdr grid must not be empty")
    g = pattern_set.gain_db(grid)
    upper = g.max(axis=-1)
    lower = g.min(axis=-1)
    rng = upper - lower
    return RpdrEnvelope(grid, upper, lower, rng, float(np.mean(rng)))


def make_omni(port_label="omni", frequency_ghz=None):
    """Ideal isotropic pattern: 0 dBi everywhere."""
    return RadiationPattern(port_label, [0.0], [0.0], frequency_ghz)


def omni_set(n_ports=1):
    return PatternSet(tuple(make_omni(str(p)) for p in range(n_ports)), "omni")


@dataclass(frozen=True)
class SyntheticProfile:
    """Shape parameters for synthetic stand-in patterns.

    Every port shares a broadside lobe, a Gaussian bump in dB of height
    ``peak_gain_dbi - floor_dbi`` above ``floor_dbi``.  Each port carves a
    raised-cosine notch of depth ``null_depth_db`` and half-width
    ``null_width_deg`` centred at ``null_start_deg + p * null_drift_deg``.
    The notch has compact support, so notches of different ports that are at
    least ``null_width_deg`` apart do not overlap.
    """

    peak_gain_dbi: float = 9.2
    floor_dbi: float = -12.0
    lobe_center_deg: float = 45.0
    lobe_width_deg: float = 40.0
    null_depth_db: float = 20.0
    null_width_deg: float = 25.0
    null_start_deg: float = 0.0
    null_drift_deg: float = 18.0
    grid_step_deg: float = 5.0
    frequency_ghz: float = 26.0

    def validate(self):
        if not self.lobe_width_deg > 0:
            raise PatternError("lobe_width_deg must be positive")
        if not self.null_width_deg > 0:
            raise PatternError("null_width_deg must be positive")
        if not 0 < self.grid_step_deg <= 360:
            raise PatternError("grid_step_deg must lie in (0, 360]")
        if self.null_depth_db < 0:
            raise PatternError("null_depth_db must be non-negative")
        for name in ("peak_gain_dbi", "floor_dbi", "lobe_center_deg", "null_start_deg",
                     "null_drift_deg", "frequency_ghz"):
            if not math.isfinite(getattr(self, name)):
                raise PatternError(f"{name} must be finite")
        return self

    def grid(self):
        n = int(round(360.0 / self.grid_step_deg))
        return np.arange(n) * (360.0 / n)


def _circ_dist(a, b):
    d = np.mod(np.asarray(a, dtype=float) - b, 360.0)
    return np.minimum(d, 360.0 - d)


def _lobe_db(profile, grid):
    d = _circ_dist(grid, profile.lobe_center_deg)
    bump = np.exp(-0.5 * (d / profile.lobe_width_deg) ** 2)
    return profile.floor_dbi + (profile.peak_gain_dbi - profile.floor_dbi) * bump


def _notch_db(profile, grid, center):
    d = _circ_dist(grid, center)
    w = profile.null_width_deg
    notch = profile.null_depth_db * np.cos(0.5 * np.pi * d / w) ** 2
    return np.where(d < w, notch, 0.0)


def make_synthetic_set(n_ports, profile=None):
    """Deterministic stand-in for a measured single-channel pattern set.

    Port ``p`` (0-based) has its notch centred at
    ``profile.null_start_deg + p * profile.null_drift_deg``.
    """
    profile = (profile or SyntheticProfile()).validate()
    if n_ports < 1:
        raise PatternError("n_ports must be >= 1")
    grid = profile.grid()
    base = _lobe_db(profile, grid)
    patterns = []
    for p in range(n_ports):
        center = profile.null_start_deg + p * profile.null_drift_deg
        gains = base - _notch_db(profile, grid, center)
        patterns.append(RadiationPattern(str(p), grid, gains, profile.frequency_ghz))
    return PatternSet(tuple(patterns), "synthetic")


def make_synthetic_dcfa_set(n1, n2, profile=None, second_offset_deg=180.0,
                            coupling_loss_db=1.5):
    """Stand-in for a two-channel antenna: one notch per radiator.

    Port ``(i1, i2)`` is flattened channel-1 major.  The second radiator's
    notch track starts ``second_offset_deg`` away from the first and the
    pattern is lowered by ``coupling_loss_db`` for the extra scatterer.
    """
    profile = (profile or SyntheticProfile()).validate()
    if n1 < 1 or n2 < 1:
        raise PatternError("n1 and n2 must be >= 1")
    grid = profile.grid()
    base = _lobe_db(profile, grid) - coupling_loss_db
    patterns = []
    for i1 in range(n1):
        c1 = profile.null_start_deg + i1 * profile.null_drift_deg
        notch1 = _notch_db(profile, grid, c1)
        for i2 in range(n2):
            c2 = profile.null_start_deg + second_offset_deg + i2 * profile.null_drift_deg
            gains = base - notch1 - _notch_db(profile, grid, c2)
            label = str(i1 * n2 + i2)
            patterns.append(RadiationPattern(label, grid, gains, profile.frequency_ghz))
    return PatternSet(tuple(patterns), "synthetic")


def _parse_float(text, what, lineno):
    try:
        value = float(text)
    except ValueError:
        raise PatternFormatError(f"{what} {text!r} is not a number", lineno) from None
    if not math.isfinite(value):
        raise PatternFormatError(f"{what} {text!r} is not finite", lineno)
    return value


def load_pattern_set(content):
    """Parse pattern CSV content into a :class:`PatternSet`.

    ``content`` may be bytes, text or a file object.  The header
    ``port_id,angle_deg,gain_dbi`` is required; rows may come in any order.
    ``#`` lines are comments, and one of them may carry
    ``frequency_ghz=<value>``.  Ports keep their order of first appearance.
    """
    if hasattr(content, "read"):
        content = content.read()
    if isinstance(content, (bytes, bytearray)):
        try:
            content = bytes(content).decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise PatternFormatError(f"not valid UTF-8: {exc}") from None

    frequency = None
    header_seen = False
    rows = {}
    order = []
    for lineno, raw in enumerate(io.StringIO(content), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("frequency_ghz="):
                frequency = _parse_float(body.split("=", 1)[1].strip(), "frequency_ghz", lineno)
            continue
        fields = [f.strip() for f in line.split(",")]
        if not header_seen:
            if fields != CSV_HEADER.split(","):
                raise PatternFormatError(f"expected header {CSV_HEADER!r}, got {line!r}", lineno)
            header_seen = True
            continue
        if len(fields) != 3:
            raise PatternFormatError(f"expected 3 fields, got {len(fields)}", lineno)
        try:
            port = int(fields[0])
        except ValueError:
            raise PatternFormatError(f"port_id {fields[0]!r} is not an integer", lineno) from None
        if port < 0:
            raise PatternFormatError(f"port_id {port} is negative", lineno)
        angle = _parse_float(fields[1], "angle_deg", lineno)
        if not 0.0 <= angle < 360.0:
            raise PatternFormatError(f"angle_deg {angle} outside [0, 360)", lineno)
        gain = _parse_float(fields[2], "gain_dbi", lineno)
        if port not in rows:
            rows[port] = {}
            order.append(port)
        if angle in rows[port]:
            first = rows[port][angle][1]
            raise PatternFormatError(
                f"duplicate sample for port {port} at angle {angle:g} (first seen on line {first})",
                lineno,
            )
        rows[port][angle] = (gain, lineno)

    if not header_seen:
        raise PatternFormatError("empty pattern file (no header)")
    if not order:
        raise PatternFormatError("pattern file has a header but no data rows")

    patterns = []
    grid = None
    for port in order:
        angles = sorted(rows[port])
        if grid is None:
            grid = angles
        elif angles != grid:
            line = min(ln for _, ln in rows[port].values())
            raise PatternFormatError(
                f"port {port} is not sampled on the same angle grid as port {order[0]}", line
            )
        gains = [rows[port][a][0] for a in angles]
        patterns.append(RadiationPattern(str(port), angles, gains, frequency))
    return PatternSet(tuple(patterns), "measured-file")


def read_pattern_file(path):
    with open(path, "rb") as fh:
        return load_pattern_set(fh.read())


def dump_pattern_set(pattern_set, port_ids=None):
    """Serialize to the pattern CSV format (angles 3 d.p., gains 4 d.p.)."""
    if port_ids is None:
        port_ids = range(len(pattern_set))
    out = []
    freq = pattern_set.frequency_ghz
    if freq is not None:
        out.append(f"# frequency_ghz={freq:g}")
    out.append(CSV_HEADER)
    for pid, pat in zip(port_ids, pattern_set):
        for a, g in zip(pat.angles_deg, pat.gains_dbi):
            out.append(f"{pid},{a:.3f},{_fmt_db(g)}")
    return "\n".join(out) + "\n"


def _fmt_db(value):
    text = f"{value:.4f}"
    # keep "-0.0000" out of files
    return "0.0000" if text == "-0.0000" else text


def envelope_rows(env: RpdrEnvelope) -> Iterable[Sequence[str]]:
    for a, u, lo, r in zip(env.angles_deg, env.upper_dbi, env.lower_dbi, env.range_db):
        yield f"{a:.3f}", _fmt_db(u), _fmt_db(lo), _fmt_db(r)
