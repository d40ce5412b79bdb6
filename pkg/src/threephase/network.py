"""Three-phase lines, network topology and nodal admittance assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .devices import DEVICE_TYPES, DeviceSpec
from .errors import DisconnectedGraph, DuplicateBus, ValidationError
from .phasor import as_c3x3

ZERO3 = np.zeros((3, 3), dtype=complex)


@dataclass(frozen=True, eq=False)
class LineSpec:
    """Pi-model three-wire line between buses ``from_bus`` and ``to_bus``.

    ``y_shunt_from`` sits at the ``from_bus`` end, ``y_shunt_to`` at the
    other; they need not be equal.
    """

    from_bus: str
    to_bus: str
    y_series: np.ndarray
    y_shunt_from: np.ndarray = field(default_factory=lambda: ZERO3.copy())
    y_shunt_to: np.ndarray = field(default_factory=lambda: ZERO3.copy())

    def __post_init__(self):
        object.__setattr__(self, "from_bus", str(self.from_bus))
        object.__setattr__(self, "to_bus", str(self.to_bus))
        if self.from_bus == self.to_bus:
            raise ValidationError(f"line {self.from_bus}-{self.to_bus} is a self loop", invariant="from != to")
        for name in ("y_series", "y_shunt_from", "y_shunt_to"):
            object.__setattr__(self, name, as_c3x3(getattr(self, name), name))

    def reversed(self) -> "LineSpec":
        return LineSpec(self.to_bus, self.from_bus, self.y_series, self.y_shunt_to, self.y_shunt_from)


@dataclass(frozen=True, eq=False)
class Bus:
    id: str
    device: DeviceSpec
    shunt: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        if not isinstance(self.device, DEVICE_TYPES):
            raise ValidationError(f"bus {self.id} has no valid device", invariant="device")
        if self.shunt is not None:
            object.__setattr__(self, "shunt", as_c3x3(self.shunt, "shunt"))


def line_flow(line: LineSpec, v_from, v_to) -> tuple[np.ndarray, np.ndarray]:
    """Sending-end currents ``(I_jk, I_kj)`` of a line."""
    v_from = np.asarray(v_from, dtype=complex)
    v_to = np.asarray(v_to, dtype=complex)
    dv = v_from - v_to
    return line.y_series @ dv + line.y_shunt_from @ v_from, -(line.y_series @ dv) + line.y_shunt_to @ v_to


def line_power_matrix(v, i) -> np.ndarray:
    """``S = v i^H``; its diagonal is the sending-end power per phase."""
    return np.outer(np.asarray(v, dtype=complex), np.conj(np.asarray(i, dtype=complex)))


def _merge(a: LineSpec, b: LineSpec) -> LineSpec:
    if b.from_bus != a.from_bus:
        b = b.reversed()
    return LineSpec(
        a.from_bus,
        a.to_bus,
        a.y_series + b.y_series,
        a.y_shunt_from + b.y_shunt_from,
        a.y_shunt_to + b.y_shunt_to,
    )


class Network:
    """Buses (one device each) joined by three-phase lines.

    Parallel lines between the same pair of buses are merged by summing
    their admittance blocks.  The graph must be connected.
    """

    def __init__(self, buses, lines=()):
        self.buses: tuple[Bus, ...] = tuple(buses)
        if not self.buses:
            raise ValidationError("network has no buses", invariant="non-empty")
        self.index: dict[str, int] = {}
        for k, bus in enumerate(self.buses):
            if bus.id in self.index:
                raise DuplicateBus(f"bus id {bus.id!r} is used twice", invariant="unique bus ids")
            self.index[bus.id] = k

        merged: dict[frozenset, LineSpec] = {}
        for line in lines:
            for end in (line.from_bus, line.to_bus):
                if end not in self.index:
                    raise ValidationError(
                        f"line {line.from_bus}-{line.to_bus} references unknown bus {end!r}",
                        invariant="line endpoints exist",
                    )
            key = frozenset((line.from_bus, line.to_bus))
            merged[key] = _merge(merged[key], line) if key in merged else line
        self.lines: tuple[LineSpec, ...] = tuple(merged.values())
        self._check_connected()

    def _check_connected(self):
        n = len(self.buses)
        adj: list[list[int]] = [[] for _ in range(n)]
        for line in self.lines:
            a, b = self.index[line.from_bus], self.index[line.to_bus]
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != n:
            missing = sorted(self.buses[k].id for k in range(n) if k not in seen)
            raise DisconnectedGraph(
                f"buses {missing} are not connected to bus {self.buses[0].id!r}", invariant="connected graph"
            )

    def __len__(self) -> int:
        return len(self.buses)

    @property
    def devices(self) -> list[DeviceSpec]:
        return [b.device for b in self.buses]

    def with_devices(self, devices) -> "Network":
        """Copy of this network with the bus devices replaced."""
        buses = [Bus(b.id, d, b.shunt) for b, d in zip(self.buses, devices)]
        return Network(buses, self.lines)


@dataclass(frozen=True, eq=False)
class BlockAdmittance:
    """Sparse map of 3x3 blocks ``(j, k) -> Y_jk`` over bus positions."""

    n_buses: int
    blocks: dict

    def block(self, j: int, k: int) -> np.ndarray:
        return self.blocks.get((j, k), ZERO3)

    def to_dense(self) -> np.ndarray:
        y = np.zeros((3 * self.n_buses, 3 * self.n_buses), dtype=complex)
        for (j, k), blk in self.blocks.items():
            y[3 * j : 3 * j + 3, 3 * k : 3 * k + 3] = blk
        return y


def assemble(network: Network) -> BlockAdmittance:
    """Nodal admittance ``Y`` with ``I = Y V``.

    Off-diagonal blocks are ``-y_series``; each diagonal block sums the
    series blocks of incident lines, the shunt block at this end of each of
    them, and any nodal shunt at the bus.
    """
    blocks: dict = {}
    n = len(network)
    for j, bus in enumerate(network.buses):
        blocks[(j, j)] = ZERO3.copy() if bus.shunt is None else bus.shunt.copy()
    for line in network.lines:
        a, b = network.index[line.from_bus], network.index[line.to_bus]
        blocks[(a, a)] = blocks[(a, a)] + line.y_series + line.y_shunt_from
        blocks[(b, b)] = blocks[(b, b)] + line.y_series + line.y_shunt_to
        blocks[(a, b)] = blocks.get((a, b), ZERO3) - line.y_series
        blocks[(b, a)] = blocks.get((b, a), ZERO3) - line.y_series
    return BlockAdmittance(n, blocks)
