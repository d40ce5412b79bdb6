"""Linear three-phase network analysis.

Every device reduces to one of three terminal laws (fixed voltage, fixed
current, or affine admittance).  Voltage-source buses are eliminated, the
admittance of impedance buses is moved onto the diagonal, and the remaining
dense system is solved by LU with partial pivoting (LAPACK ``gesv``).  Internal quantities are
then recovered bus by bus from the terminal solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import devices as dev
from .errors import NoVoltageSource, ShapeMismatch, SingularSystem
from .network import Network, assemble, line_flow, line_power_matrix

logger = logging.getLogger(__name__)

SYSTEM_RCOND = 1e-10
RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class BusPartition:
    n_v: tuple[int, ...]
    n_c: tuple[int, ...]
    n_i: tuple[int, ...]


def partition(relations) -> BusPartition:
    n_v, n_c, n_i = [], [], []
    for k, rel in enumerate(relations):
        if isinstance(rel, dev.FixedVoltage):
            n_v.append(k)
        elif isinstance(rel, dev.FixedCurrent):
            n_c.append(k)
        else:
            n_i.append(k)
    return BusPartition(tuple(n_v), tuple(n_c), tuple(n_i))


@dataclass(frozen=True, eq=False)
class LineFlow:
    from_bus: str
    to_bus: str
    i_from: np.ndarray
    i_to: np.ndarray
    s_from: np.ndarray
    s_to: np.ndarray

    @property
    def loss(self) -> complex:
        """Complex power absorbed by the line (series plus shunt)."""
        return complex(np.trace(self.s_from) + np.trace(self.s_to))


@dataclass(eq=False)
class DiagnosticReport:
    network_residual: float
    current_scale: float
    kcl: dict
    delta_source_kcl: dict
    power_injected: complex
    power_absorbed: complex

    @property
    def power_mismatch(self) -> float:
        return abs(self.power_injected - self.power_absorbed)

    def ok(self, rtol: float = RESIDUAL_RTOL) -> bool:
        scale = max(1.0, self.current_scale)
        return self.network_residual <= rtol * scale and all(r <= rtol * scale for r in self.kcl.values())

    def as_dict(self) -> dict:
        return {
            "network_residual": self.network_residual,
            "current_scale": self.current_scale,
            "kcl": dict(self.kcl),
            "delta_source_kcl": dict(self.delta_source_kcl),
            "power_injected": self.power_injected,
            "power_absorbed": self.power_absorbed,
        }


@dataclass(eq=False)
class Solution:
    bus_ids: list[str]
    terminal: list[dev.TerminalState]
    internal: list[dev.InternalState]
    lines: list[LineFlow]
    diagnostics: DiagnosticReport | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def V(self) -> np.ndarray:
        return np.array([t.v for t in self.terminal])

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        return np.array([t.i for t in self.terminal])

    @property
    def S(self) -> np.ndarray:
        return np.array([t.s for t in self.terminal])

    def bus(self, bus_id: str) -> tuple[dev.TerminalState, dev.InternalState]:
        k = self.bus_ids.index(str(bus_id))
        return self.terminal[k], self.internal[k]


def _lu_solve(a: np.ndarray, b: np.ndarray, what: str, exc=SingularSystem) -> np.ndarray:
    """Dense LU solve guarded by the reciprocal 1-norm condition number."""
    if a.size == 0:
        return b.copy()
    try:
        with np.errstate(all="ignore"):
            inv = np.linalg.inv(a)
        rcond = 1.0 / (np.linalg.norm(a, 1) * np.linalg.norm(inv, 1))
    except np.linalg.LinAlgError:
        rcond = 0.0
    if not np.isfinite(rcond) or rcond < SYSTEM_RCOND:
        rcond = 0.0 if not np.isfinite(rcond) else rcond
        raise exc(f"{what} is singular or ill-conditioned (rcond={rcond:.2e})", rcond=float(rcond))
    return np.linalg.solve(a, b)


def build_terminal(network: Network, V: np.ndarray, I: np.ndarray) -> tuple[list, list, list]:
    """Terminal states, internal states and line flows from solved ``(V, I)``."""
    terminal = [dev.TerminalState.from_vi(V[k], I[k]) for k in range(len(network))]
    internal = []
    for k, bus in enumerate(network.buses):
        check = not isinstance(bus.device, dev.VoltageSourceDelta)
        internal.append(dev.internal_state(bus.device, V[k], I[k], check_kcl=check))
    flows = []
    for line in network.lines:
        a, b = network.index[line.from_bus], network.index[line.to_bus]
        i_ab, i_ba = line_flow(line, V[a], V[b])
        flows.append(
            LineFlow(line.from_bus, line.to_bus, i_ab, i_ba, line_power_matrix(V[a], i_ab), line_power_matrix(V[b], i_ba))
        )
    return terminal, internal, flows


def solve(network: Network) -> Solution:
    """Solve for every terminal and internal quantity of ``network``."""
    relations = [dev.external_model(d) for d in network.devices]
    part = partition(relations)
    if not part.n_v:
        raise NoVoltageSource("network has no voltage source to fix the voltage reference", invariant="voltage source")

    n = len(network)
    Y = assemble(network).to_dense()
    V = np.zeros((n, 3), dtype=complex)
    for k in part.n_v:
        V[k] = relations[k].v

    unknown = part.n_c + part.n_i
    idx = np.array([3 * k + p for k in unknown for p in range(3)], dtype=int)
    vidx = np.array([3 * k + p for k in part.n_v for p in range(3)], dtype=int)
    if unknown:
        a = Y[np.ix_(idx, idx)].copy()
        rhs = -Y[np.ix_(idx, vidx)] @ V.reshape(-1)[vidx]
        for pos, k in enumerate(unknown):
            sl = slice(3 * pos, 3 * pos + 3)
            rel = relations[k]
            if isinstance(rel, dev.FixedCurrent):
                rhs[sl] += rel.i
            else:
                a[sl, sl] += rel.y_eff
                rhs[sl] += rel.i_offset
        x = _lu_solve(a, rhs, "reduced nodal matrix")
        V.reshape(-1)[idx] = x

    I = (Y @ V.reshape(-1)).reshape(n, 3)
    for k in part.n_c:
        I[k] = relations[k].i

    terminal, internal, flows = build_terminal(network, V, I)
    sol = Solution([b.id for b in network.buses], terminal, internal, flows, metadata={"mode": "full"})
    sol.diagnostics = residuals(network, sol)
    for bus_id, r in sol.diagnostics.delta_source_kcl.items():
        if r > dev.KCL_RTOL:
            logger.warning("delta voltage source %s draws zero-sequence current (|sum(I)| = %.3g)", bus_id, r)
    return sol


def residuals(network: Network, solution: Solution) -> DiagnosticReport:
    """Check a solution against the network equations and power balance."""
    n = len(network)
    if len(solution.terminal) != n or list(solution.bus_ids) != [b.id for b in network.buses]:
        raise ShapeMismatch(f"solution has {len(solution.terminal)} buses, network has {n}")
    V, I = solution.V, solution.I
    Y = assemble(network).to_dense()
    scale = float(np.max(np.abs(I))) if I.size else 0.0
    net_res = float(np.max(np.abs(I.reshape(-1) - Y @ V.reshape(-1))))

    injected_by_lines = np.zeros((n, 3), dtype=complex)
    absorbed = 0j
    for line in network.lines:
        a, b = network.index[line.from_bus], network.index[line.to_bus]
        i_ab, i_ba = line_flow(line, V[a], V[b])
        injected_by_lines[a] += i_ab
        injected_by_lines[b] += i_ba
        absorbed += np.sum(V[a] * i_ab.conj()) + np.sum(V[b] * i_ba.conj())
    kcl = {}
    for k, bus in enumerate(network.buses):
        into_net = injected_by_lines[k]
        if bus.shunt is not None:
            i_sh = bus.shunt @ V[k]
            into_net = into_net + i_sh
            absorbed += np.sum(V[k] * i_sh.conj())
        kcl[bus.id] = float(np.max(np.abs(I[k] - into_net)))

    delta_kcl = {
        bus.id: dev.kcl_residual(I[k])
        for k, bus in enumerate(network.buses)
        if isinstance(bus.device, dev.VoltageSourceDelta)
    }
    injected = complex(np.sum(V * I.conj()))
    return DiagnosticReport(net_res, scale, kcl, delta_kcl, injected, complex(absorbed))
