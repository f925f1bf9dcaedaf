import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memsim.device import MemristorParams, MemristorState
from memsim.neuron import SpikeWaveform, waveform_voltage
from memsim.stdp import (
    StdpProbe,
    check_dt,
    overlap_window,
    pair_voltage,
    stdp_curve,
    weight_update,
    zero_crossings,
)

from oracles import quad_weight_update

MP = MemristorParams()
W = SpikeWaveform.biphasic()
G0 = 0.5 * (MP.g_min + MP.g_max)


def test_pair_voltage_examples():
    assert pair_voltage(W, W, 0.0, 0.5e-6) == 0.0
    # pre alone at t, post has not fired yet
    assert pair_voltage(W, W, 20e-6, 0.5e-6) == pytest.approx(-1.2)
    # post plateau over the relaxing pre tail: 1.2 + 0.6 * (1 - 1.4 / 10)
    assert pair_voltage(W, W, 2e-6, 2.5e-6) == pytest.approx(1.716, rel=1e-12)


def test_lone_spikes_do_not_program():
    for dT in (-40e-6, 40e-6):
        _, dg = weight_update(MemristorState(G0), MP, W, W, dT, 10e-9)
        assert dg == 0.0


def test_small_positive_offset_potentiates():
    for dt in (10e-9, 0.1e-9):
        _, dg = weight_update(MemristorState(G0), MP, W, W, 2e-6, dt)
        assert dg > 0.0


def test_step_refinement_converges():
    _, a = weight_update(MemristorState(G0), MP, W, W, 2e-6, 10e-9)
    _, b = weight_update(MemristorState(G0), MP, W, W, 2e-6, 1e-9)
    assert a == pytest.approx(b, rel=0.01)


@pytest.mark.parametrize("dT", [-4e-6, -1e-6, 0.3e-6, 2e-6, 5.2e-6])
def test_matches_adaptive_quadrature(dT):
    _, dg = weight_update(MemristorState(G0), MP, W, W, dT, 1e-9)
    assert dg == pytest.approx(quad_weight_update(MP, W, W, dT), rel=0.01, abs=1e-12)


def test_zero_outside_combined_support():
    c = stdp_curve(StdpProbe(), MP)
    reach = W.duration
    outside = np.abs(c[:, 0]) >= reach
    assert outside.any()
    assert np.all(c[outside, 1] == 0.0)


def test_biphasic_single_crossing():
    c = stdp_curve(StdpProbe(), MP)
    xi = c[:, 1]
    assert zero_crossings(xi) == 1
    assert xi[c[:, 0] > 0].max() > 0.0 and xi[c[:, 0] < 0].min() < 0.0
    assert np.all(xi[c[:, 0] > 0] >= 0.0) and np.all(xi[c[:, 0] < 0] <= 0.0)


def test_swap_symmetry():
    # exchanging pre and post and mirroring the device flips the curve
    pre = SpikeWaveform.biphasic(v_pulse=1.0, v_tail=-0.7, t_tail=6e-6)
    post = SpikeWaveform.biphasic()
    grid = tuple(np.round(np.arange(-8, 8.5, 0.5), 6) * 1e-6)
    p = MemristorParams(v_set=1.4, v_reset=-1.6, k_set=8.0, k_reset=12.0)
    a = stdp_curve(StdpProbe(pre, post, 10e-9, grid), p)
    b = stdp_curve(StdpProbe(post, pre, 10e-9, grid), p.flipped())
    np.testing.assert_allclose(b[::-1, 1], -a[:, 1], rtol=1e-9, atol=1e-15)


def test_zero_crossings_helper():
    assert zero_crossings([0, -1, -2, 0, 0, 3, 1]) == 1
    assert zero_crossings([1, -1, 1]) == 2
    assert zero_crossings([0, 0]) == 0


def test_dt_guard():
    check_dt(10e-9, W, W)
    with pytest.raises(ValueError):
        check_dt(20e-9, W, W)
    with pytest.raises(ValueError):
        StdpProbe(dt_int=0.0)


@given(amp=st.floats(0.0, 0.74), dT=st.floats(-20e-6, 20e-6))
@settings(max_examples=25, deadline=None)
def test_subthreshold_pairs_never_program(amp, dT):
    # peak difference of two such spikes stays below both thresholds
    w = SpikeWaveform.biphasic(v_pulse=amp, v_tail=-amp)
    _, dg = weight_update(MemristorState(G0), MP, w, w, dT, 10e-9)
    assert dg == 0.0


def test_deterministic():
    a = stdp_curve(StdpProbe(), MP)
    b = stdp_curve(StdpProbe(), MP)
    assert np.array_equal(a, b)


def test_updates_on_separate_devices_are_independent():
    # order of applying pairs to disjoint devices does not matter
    s1, s2 = MemristorState(G0), MemristorState(3e-4)
    a1, _ = weight_update(s1, MP, W, W, 2e-6, 10e-9)
    a2, _ = weight_update(s2, MP, W, W, -3e-6, 10e-9)
    b2, _ = weight_update(s2, MP, W, W, -3e-6, 10e-9)
    b1, _ = weight_update(s1, MP, W, W, 2e-6, 10e-9)
    assert (a1, a2) == (b1, b2)


def test_waveforms_alone_are_subthreshold():
    t = np.linspace(-1e-6, 15e-6, 2000)
    assert np.all(np.abs(waveform_voltage(W, t)) < MP.v_set)
