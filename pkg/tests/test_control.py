from dataclasses import replace

import numpy as np
import pytest

from etclab import (
    Average,
    Fixed,
    InfoScenario,
    Leader,
    consensus_point,
    impulse_broadcast,
    impulse_local,
    initial_state,
    refresh_estimates,
)
from etclab.graph import CompleteGraph, consensus_cost

B = InfoScenario.BROADCAST
BL = InfoScenario.BROADCAST_LOCAL


def make_state(x, xhat=None, c_prev=0.0):
    state = replace(
        initial_state(len(x)),
        x=np.asarray(x, dtype=float),
        last_consensus_point=float(c_prev),
    )
    if xhat is not None:
        state = replace(state, xhat=np.asarray(xhat, dtype=float))
    return state


def test_true_mean_under_broadcast_local():
    state = make_state([1.0, 0.0, -1.0])
    assert consensus_point(state, np.array([1]), Average(), BL) == 0.0


def test_broadcast_average_recursion_matches_estimate_mean():
    # single initiator: c = ((n-1) c_prev + x_i) / n, which must equal the
    # mean of the estimates (true state for the initiator, c_prev for the
    # rest) computed by brute force
    state = make_state([0.9, 0.4, -0.2], c_prev=0.0)
    c = consensus_point(state, np.array([0]), Average(), B)
    assert c == pytest.approx(0.3)
    estimates = np.array([0.9, 0.0, 0.0])  # initiator true state, others c_prev
    assert c == pytest.approx(estimates.mean())


def test_broadcast_average_recursion_nonzero_previous():
    state = make_state([0.5, 1.1, -0.3, 0.2], c_prev=0.4)
    c = consensus_point(state, np.array([2]), Average(), B)
    brute = np.array([0.4, 0.4, -0.3, 0.4]).mean()
    assert c == pytest.approx(brute)


def test_broadcast_average_all_initiators_is_true_mean():
    state = make_state([0.5, 1.1, -0.3], c_prev=7.0)
    c = consensus_point(state, np.array([0, 1, 2]), Average(), B)
    assert c == pytest.approx(np.mean([0.5, 1.1, -0.3]))


def test_leader_uses_minimum_index_initiator():
    state = make_state([0.0, 0.7, 0.0, 0.0, 0.0, -2.0])
    assert consensus_point(state, np.array([1, 5]), Leader(), B) == 0.7
    assert consensus_point(state, np.array([1, 5]), Leader(), BL) == 0.7


def test_fixed_rule_ignores_states():
    state = make_state([3.0, -1.0])
    assert consensus_point(state, np.array([0]), Fixed(0.0), B) == 0.0
    assert consensus_point(state, np.array([1]), Fixed(2.5), BL) == 2.5


def test_empty_initiators_rejected():
    state = make_state([1.0, 2.0])
    with pytest.raises(ValueError):
        consensus_point(state, np.array([], dtype=int), Average(), B)


def test_broadcast_impulse_zero_when_estimates_match():
    state = make_state([0.3, 0.3], xhat=[0.3, 0.3])
    assert np.array_equal(impulse_broadcast(state, 0.3), [0.0, 0.0])


def test_broadcast_impulse_worked_example():
    # previous consensus point 0, initiator 0 holds 0.9: c = 0.3, the
    # initiator jumps by -0.6, the others by +0.3, and the initiator's
    # error is wiped while the others' errors are untouched
    state = make_state([0.9, 0.55, -0.1], xhat=[0.0, 0.0, 0.0], c_prev=0.0)
    initiators = np.array([0])
    state = refresh_estimates(state, initiators)
    c = consensus_point(state, initiators, Average(), B)
    jumps = impulse_broadcast(state, c)
    assert c == pytest.approx(0.3)
    assert jumps == pytest.approx([-0.6, 0.3, 0.3])
    e_pre = np.array([0.9, 0.55, -0.1]) - np.array([0.0, 0.0, 0.0])
    x_post = state.x + jumps
    e_post = x_post - c  # estimates are all c afterwards
    assert e_post[0] == pytest.approx(0.0, abs=1e-15)
    assert e_post[1:] == pytest.approx(e_pre[1:])


def test_refresh_estimates_only_touches_initiators():
    state = make_state([1.0, 2.0, 3.0], xhat=[0.5, 0.5, 0.5])
    refreshed = refresh_estimates(state, np.array([1]))
    assert np.array_equal(refreshed.xhat, [0.5, 2.0, 0.5])


def test_local_impulse_resets_to_consensus_point():
    state = make_state([1.0, 0.0, -1.0])
    jumps = impulse_local(state, 0.0)
    assert np.array_equal(jumps, [-1.0, 0.0, 1.0])
    assert np.array_equal(state.x + jumps, [0.0, 0.0, 0.0])


def test_local_impulse_leader_reset():
    state = make_state([2.0, 0.4, -3.0])
    c = consensus_point(state, np.array([0]), Leader(), BL)
    jumps = impulse_local(state, c)
    post = state.x + jumps
    assert c == 2.0
    assert post == pytest.approx([2.0, 2.0, 2.0])


def test_local_impulse_kills_consensus_cost():
    g = CompleteGraph(4)
    state = make_state([0.3, -1.2, 0.8, 0.05])
    c = consensus_point(state, np.array([2]), Average(), BL)
    post = np.full(4, c)  # exact reset per the impulse contract
    assert consensus_cost(g, post) == 0.0
