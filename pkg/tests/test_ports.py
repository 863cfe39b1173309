import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fama_sim.ports import (
    W_DCFA,
    W_SCFA,
    WAVELENGTH_26GHZ_MM,
    Port,
    PortSet,
    dcfa_grid,
    linear_ports,
    spatial_phase,
)


def test_linear_positions_hand_values():
    ps = linear_ports(3, 1.0)
    assert_array_equal(ps.positions, [0.0, 0.5, 1.0])
    assert [p.index for p in ps] == [1, 2, 3]
    assert_array_equal(ps.pattern_indices, [0, 1, 2])


def test_single_port_sits_at_origin():
    ps = linear_ports(1, 2.0)
    assert_array_equal(ps.positions, [0.0])


def test_default_spans():
    assert WAVELENGTH_26GHZ_MM == pytest.approx(11.5305, abs=1e-4)
    assert W_SCFA == pytest.approx(0.8239, abs=1e-4)
    assert W_DCFA == pytest.approx(0.9540, abs=1e-4)


def test_twenty_ports_span_w():
    ps = linear_ports(20, W_SCFA)
    assert ps.positions[0] == 0.0
    assert ps.positions[-1] == pytest.approx(W_SCFA)
    assert_allclose(np.diff(ps.positions), W_SCFA / 19)


def test_spatial_phase_unit_modulus_and_hand_value():
    assert spatial_phase(0.0, 37.0) == 1.0
    # cos(0) = 1, x = 0.25 -> exp(-j pi/2) = -j
    assert_allclose(spatial_phase(0.25, 0.0), -1j, atol=1e-15)
    assert_allclose(spatial_phase(0.5, 90.0), 1.0, atol=1e-15)
    assert spatial_phase(Port(1, 0.25, 0), 0.0) == spatial_phase(0.25, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 5), st.floats(-720, 720))
def test_spatial_phase_modulus(x, aoa):
    assert abs(spatial_phase(x, aoa)) == pytest.approx(1.0, abs=1e-12)


def test_dcfa_index_linear_matches_linear_track():
    g = dcfa_grid(3, 4, 1.1)
    assert len(g) == 12 and g.grid_shape == (3, 4)
    assert_array_equal(g.positions, linear_ports(12, 1.1).positions)


def test_dcfa_first_channel_mapping():
    g = dcfa_grid(2, 2, 1.0, mapping="first-channel")
    assert_array_equal(g.positions, [0.0, 0.0, 1.0, 1.0])
    assert [p.index for p in g] == [1, 2, 3, 4]


def test_dcfa_rejects_unknown_mapping():
    with pytest.raises(ValueError):
        dcfa_grid(2, 2, 1.0, mapping="zigzag")


@pytest.mark.parametrize("ports,w", [
    ((), 1.0),
    ((Port(2, 0.0, 0),), 1.0),
    ((Port(1, 1.5, 0),), 1.0),
    ((Port(1, 0.0, 0),), -1.0),
])
def test_invalid_port_sets(ports, w):
    with pytest.raises(ValueError):
        PortSet(ports, w)


def test_subset_renumbers():
    ps = linear_ports(5, 1.0).subset([2, 5])
    assert [p.index for p in ps] == [1, 2]
    assert_array_equal(ps.positions, [0.25, 1.0])
    assert_array_equal(ps.pattern_indices, [1, 4])


def test_check_patterns_counts():
    from fama_sim.patterns import omni_set
    linear_ports(3, 1.0).check_patterns(omni_set(3))
    with pytest.raises(ValueError):
        linear_ports(3, 1.0).check_patterns(omni_set(2))
