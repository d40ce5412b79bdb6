import numpy as np
import pytest

import netgen
from threephase import devices as dev
from threephase.errors import DisconnectedGraph, DuplicateBus, ValidationError
from threephase.network import Bus, LineSpec, Network, assemble, line_flow
from threephase.phasor import ALPHA_PLUS


def _src(i="s"):
    return Bus(i, dev.VoltageSourceY(ALPHA_PLUS))


def _load(i):
    return Bus(i, dev.ImpedanceY(np.eye(3)))


def test_line_flow_example():
    line = LineSpec("a", "b", np.eye(3), 0.1 * np.eye(3), 0.2 * np.eye(3))
    i_ab, i_ba = line_flow(line, ALPHA_PLUS, np.zeros(3))
    assert np.allclose(i_ab, 1.1 * ALPHA_PLUS)
    assert np.allclose(i_ba, -ALPHA_PLUS)


def test_self_loop_rejected():
    with pytest.raises(ValidationError):
        LineSpec("a", "a", np.eye(3))


def test_duplicate_bus():
    with pytest.raises(DuplicateBus):
        Network([_src("a"), _load("a")])


def test_disconnected():
    with pytest.raises(DisconnectedGraph):
        Network([_src("a"), _load("b"), _load("c")], [LineSpec("a", "b", np.eye(3))])


def test_unknown_endpoint():
    with pytest.raises(ValidationError):
        Network([_src("a")], [LineSpec("a", "z", np.eye(3))])


def test_parallel_lines_merge_with_orientation():
    l1 = LineSpec("a", "b", np.eye(3), 0.1 * np.eye(3), 0.2 * np.eye(3))
    l2 = LineSpec("b", "a", 2 * np.eye(3), 0.3 * np.eye(3), 0.4 * np.eye(3))
    net = Network([_src("a"), _load("b")], [l1, l2])
    (m,) = net.lines
    assert (m.from_bus, m.to_bus) == ("a", "b")
    assert np.allclose(m.y_series, 3 * np.eye(3))
    assert np.allclose(m.y_shunt_from, 0.5 * np.eye(3))
    assert np.allclose(m.y_shunt_to, 0.5 * np.eye(3))


def _laplacian_oracle(net):
    """Y from the incidence form ``sum_l C_l^T y_l C_l`` plus end shunts."""
    n = len(net)
    y = np.zeros((3 * n, 3 * n), dtype=complex)
    for line in net.lines:
        c = np.zeros((3, 3 * n))
        a, b = net.index[line.from_bus], net.index[line.to_bus]
        c[:, 3 * a : 3 * a + 3] = np.eye(3)
        c[:, 3 * b : 3 * b + 3] = -np.eye(3)
        y += c.T @ line.y_series @ c
        y[3 * a : 3 * a + 3, 3 * a : 3 * a + 3] += line.y_shunt_from
        y[3 * b : 3 * b + 3, 3 * b : 3 * b + 3] += line.y_shunt_to
    for k, bus in enumerate(net.buses):
        if bus.shunt is not None:
            y[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] += bus.shunt
    return y


@pytest.mark.parametrize("seed", range(20))
def test_assemble_matches_incidence_oracle(seed):
    net = netgen.random_unbalanced_network(np.random.default_rng(seed))
    assert np.allclose(assemble(net).to_dense(), _laplacian_oracle(net), atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_assembled_currents_match_line_flows(seed):
    rng = np.random.default_rng(100 + seed)
    net = netgen.random_unbalanced_network(rng)
    V = netgen.crandn(rng, len(net), 3)
    I = (assemble(net).to_dense() @ V.reshape(-1)).reshape(-1, 3)
    expected = np.zeros_like(V)
    for line in net.lines:
        a, b = net.index[line.from_bus], net.index[line.to_bus]
        i_ab, i_ba = line_flow(line, V[a], V[b])
        expected[a] += i_ab
        expected[b] += i_ba
    for k, bus in enumerate(net.buses):
        if bus.shunt is not None:
            expected[k] += bus.shunt @ V[k]
    assert np.allclose(I, expected, atol=1e-12)


def test_balanced_admittance_is_kronecker():
    net = netgen.random_balanced_network(np.random.default_rng(5), n=12, meshed=True)
    y = assemble(net).to_dense()
    y1 = y[::3, ::3]
    assert np.allclose(y, np.kron(y1, np.eye(3)), atol=1e-13)
