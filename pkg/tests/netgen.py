"""Random network generators and an independent stacked-system oracle."""

from __future__ import annotations

import numpy as np

from threephase import devices as dev
from threephase.network import Bus, LineSpec, Network
from threephase.phasor import ALPHA_PLUS

GAMMA = np.array([[1, -1, 0], [0, 1, -1], [-1, 0, 1]], dtype=complex)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def coupled_impedance(rng) -> np.ndarray:
    """Symmetric 3x3 impedance with a dominant resistive diagonal."""
    off = 0.2 * crandn(rng, 3, 3)
    off = (off + off.T) / 2
    np.fill_diagonal(off, 0)
    diag = rng.uniform(1.0, 3.0, 3) + 1j * rng.uniform(0.5, 2.0, 3)
    return off + np.diag(diag)


def coupled_admittance(rng) -> np.ndarray:
    return np.linalg.inv(coupled_impedance(rng))


def _edges(rng, n: int, meshed: bool) -> list[tuple[int, int]]:
    edges = [(int(rng.integers(0, k)), k) for k in range(1, n)]
    if meshed and n > 2:
        have = {frozenset(e) for e in edges}
        for _ in range(int(rng.integers(1, n))):
            a, b = (int(x) for x in rng.choice(n, 2, replace=False))
            if frozenset((a, b)) not in have:
                have.add(frozenset((a, b)))
                edges.append((a, b))
    return edges


def random_unbalanced_device(rng, kind: str, delta: bool, gamma_scale: float = 0.3):
    g = complex(gamma_scale * crandn(rng))
    if kind == "voltage_source":
        if delta:
            e = crandn(rng, 3)
            e -= e.mean()
            return dev.VoltageSourceDelta(e, gamma=g, beta=complex(crandn(rng)))
        return dev.VoltageSourceY(crandn(rng, 3), gamma=g)
    if kind == "current_source":
        if delta:
            return dev.CurrentSourceDelta(0.3 * crandn(rng, 3))
        return dev.CurrentSourceY(0.3 * crandn(rng, 3), gamma=g)
    if delta:
        return dev.ImpedanceDelta(coupled_impedance(rng), beta=complex(crandn(rng)))
    return dev.ImpedanceY(coupled_impedance(rng), gamma=g)


def random_unbalanced_network(rng, n: int | None = None, meshed: bool | None = None) -> Network:
    """Connected network with mixed devices and coupled line blocks."""
    n = int(rng.integers(2, 21)) if n is None else n
    meshed = bool(rng.integers(0, 2)) if meshed is None else meshed
    n_sources = int(rng.integers(1, max(2, n // 4) + 1))
    buses = []
    for k in range(n):
        if k < n_sources:
            kind = "voltage_source"
        else:
            kind = ("current_source", "impedance")[int(rng.integers(0, 2))]
        d = random_unbalanced_device(rng, kind, bool(rng.integers(0, 2)))
        shunt = 0.05 * crandn(rng, 3, 3) if rng.random() < 0.2 else None
        if shunt is not None:
            shunt = (shunt + shunt.T) / 2
        buses.append(Bus(f"b{k}", d, shunt))
    lines = []
    for a, b in _edges(rng, n, meshed):
        ys = coupled_admittance(rng)
        sh = rng.random() < 0.3
        lines.append(
            LineSpec(
                f"b{a}",
                f"b{b}",
                ys,
                0.02j * np.eye(3) if sh else np.zeros((3, 3)),
                0.03j * np.eye(3) if sh else np.zeros((3, 3)),
            )
        )
    order = rng.permutation(n)
    return Network([buses[k] for k in order], lines)


def random_balanced_network(
    rng,
    n: int | None = None,
    meshed: bool | None = None,
    gamma_v: bool = False,
    wye_impedances: bool = True,
) -> Network:
    """Balanced network; ``gamma_v`` draws nonzero neutral / zero-sequence source voltages."""
    n = int(rng.integers(2, 51)) if n is None else n
    meshed = bool(rng.integers(0, 2)) if meshed is None else meshed
    n_sources = int(rng.integers(1, max(2, n // 5) + 1))
    buses = []
    for k in range(n):
        delta = bool(rng.integers(0, 2))
        g = complex(0.5 * crandn(rng)) if gamma_v else 0j
        if k < n_sources:
            lam = complex(rng.uniform(0.8, 1.2) * np.exp(1j * rng.uniform(-0.5, 0.5)))
            if delta:
                d = dev.VoltageSourceDelta(lam * np.sqrt(3) * ALPHA_PLUS, gamma=g, beta=complex(crandn(rng)))
            else:
                d = dev.VoltageSourceY(lam * ALPHA_PLUS, gamma=g)
        elif rng.random() < 0.4:
            mu = complex(0.2 * crandn(rng))
            d = dev.CurrentSourceDelta(mu * ALPHA_PLUS) if delta else dev.CurrentSourceY(mu * ALPHA_PLUS)
        else:
            zeta = complex(rng.uniform(1, 4) + 1j * rng.uniform(0.2, 2))
            if delta or not wye_impedances:
                d = dev.ImpedanceDelta(zeta * np.eye(3), beta=complex(crandn(rng)))
            else:
                d = dev.ImpedanceY(zeta * np.eye(3))
        shunt = complex(0.01j * rng.uniform(0, 2)) * np.eye(3) if rng.random() < 0.2 else None
        buses.append(Bus(f"n{k}", d, shunt))
    lines = []
    for a, b in _edges(rng, n, meshed):
        eta = 1 / complex(rng.uniform(0.05, 0.5) + 1j * rng.uniform(0.05, 0.5))
        eta_m = complex(0.01j * rng.uniform(0, 1)) if rng.random() < 0.3 else 0j
        lines.append(LineSpec(f"n{a}", f"n{b}", eta * np.eye(3), eta_m * np.eye(3), eta_m * np.eye(3)))
    return Network(buses, lines)


def stacked_oracle(network: Network) -> tuple[np.ndarray, np.ndarray]:
    """Solve for ``(V, I)`` as one dense ``6N`` system written from first principles.

    Rows ``0..3N`` stamp each line and shunt into ``I - Y V = 0``; rows
    ``3N..6N`` encode each device directly from its internal model.
    """
    n = len(network.buses)
    pos = {b.id: k for k, b in enumerate(network.buses)}
    m = np.zeros((6 * n, 6 * n), dtype=complex)
    rhs = np.zeros(6 * n, dtype=complex)

    def vcol(k):
        return slice(3 * k, 3 * k + 3)

    def icol(k):
        return slice(3 * n + 3 * k, 3 * n + 3 * k + 3)

    for k in range(n):
        m[vcol(k), icol(k)] += np.eye(3)
        if network.buses[k].shunt is not None:
            m[vcol(k), vcol(k)] -= network.buses[k].shunt
    for line in network.lines:
        a, b = pos[line.from_bus], pos[line.to_bus]
        # I_a -= ys (V_a - V_b) + ym_a V_a, and symmetrically at b
        m[vcol(a), vcol(a)] -= line.y_series + line.y_shunt_from
        m[vcol(a), vcol(b)] += line.y_series
        m[vcol(b), vcol(b)] -= line.y_series + line.y_shunt_to
        m[vcol(b), vcol(a)] += line.y_series

    ones = np.ones(3)
    for k, bus in enumerate(network.buses):
        rows = slice(3 * n + 3 * k, 3 * n + 3 * k + 3)
        d = bus.device
        if isinstance(d, dev.VoltageSourceY):
            m[rows, vcol(k)] = np.eye(3)
            rhs[rows] = d.e + d.gamma
        elif isinstance(d, dev.VoltageSourceDelta):
            # two independent KVL rows plus the zero-sequence row
            m[rows, vcol(k)] = np.vstack([GAMMA[:2], ones / 3])
            rhs[rows] = [d.e[0], d.e[1], d.gamma]
        elif isinstance(d, dev.CurrentSourceY):
            m[rows, icol(k)] = np.eye(3)
            rhs[rows] = -d.j
        elif isinstance(d, dev.CurrentSourceDelta):
            m[rows, icol(k)] = np.eye(3)
            rhs[rows] = -(GAMMA.T @ d.j)
        elif isinstance(d, dev.ImpedanceY):
            # V - gamma = z (-I)
            m[rows, vcol(k)] = np.eye(3)
            m[rows, icol(k)] = d.z
            rhs[rows] = d.gamma
        elif isinstance(d, dev.ImpedanceDelta):
            m[rows, icol(k)] = np.eye(3)
            m[rows, vcol(k)] = GAMMA.T @ np.linalg.solve(d.z, GAMMA)
    x = np.linalg.solve(m, rhs)
    return x[: 3 * n].reshape(n, 3), x[3 * n :].reshape(n, 3)


def rel_diff(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale
