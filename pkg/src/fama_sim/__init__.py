"""Link-level Monte Carlo simulation of fluid antenna multiple access."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    ChannelRealization,
    PathVariables,
    ScatteringEnvironment,
    apply_pattern,
    realize,
    sample_paths,
    theoretical_channel,
)
from .fama import (  # noqa: E402
    DYNAMIC,
    STATIC,
    LinkBudget,
    SelectionStrategy,
    fixed_port,
    multiplexing_gain,
    outage_indicator,
    select_ports,
    sinr,
)
from .montecarlo import Antenna, SimConfig, SimEstimate, estimate, sweep  # noqa: E402
from .patterns import (  # noqa: E402
    PatternSet,
    RadiationPattern,
    SyntheticProfile,
    gain_at,
    load_pattern_set,
    make_omni,
    make_synthetic_dcfa_set,
    make_synthetic_set,
    rpdr,
)
from .ports import Port, PortSet, dcfa_grid, linear_ports, spatial_phase  # noqa: E402

__all__ = [
    "ChannelRealization",
    "PathVariables",
    "ScatteringEnvironment",
    "apply_pattern",
    "realize",
    "sample_paths",
    "theoretical_channel",
    "DYNAMIC",
    "STATIC",
    "LinkBudget",
    "SelectionStrategy",
    "fixed_port",
    "multiplexing_gain",
    "outage_indicator",
    "select_ports",
    "sinr",
    "Antenna",
    "SimConfig",
    "SimEstimate",
    "estimate",
    "sweep",
    "PatternSet",
    "RadiationPattern",
    "SyntheticProfile",
    "gain_at",
    "load_pattern_set",
    "make_omni",
    "make_synthetic_dcfa_set",
    "make_synthetic_set",
    "rpdr",
    "Port",
    "PortSet",
    "dcfa_grid",
    "linear_ports",
    "spatial_phase",
]
