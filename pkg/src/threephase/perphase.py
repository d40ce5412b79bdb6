"""Per-phase analysis of balanced three-phase networks.

A network is balanced when every source lies in ``span(alpha_plus)``, every
impedance is a scalar multiple of the identity, and every line block is
``eta * I``.  Then ``Y = Y1phi kron I`` and, with all neutral and
zero-sequence source voltages at zero, the three-phase solution is the
scalar (per-phase) solution lifted by ``kron alpha_plus``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import devices as dev
from .errors import MissingZeroSequence, SingularReducedSystem, ValidationError
from .network import Network
from .phasor import ALPHA, ALPHA_MINUS, ALPHA_PLUS, ONES, sequence_components
from .solver import LineFlow, Solution, _lu_solve

BALANCE_TOL = 1e-9
SQRT3 = np.sqrt(3.0)

# device class -> hat-alpha, relating internal balanced parameters to terminal ones
HAT_ALPHA = {
    ("voltage_source", "Y"): 1.0 + 0j,
    ("current_source", "Y"): 1.0 + 0j,
    ("impedance", "Y"): 1.0 + 0j,
    ("voltage_source", "delta"): (1 - ALPHA**2) / 3,
    ("current_source", "delta"): 1 - ALPHA**2,
    ("impedance", "delta"): 3.0 + 0j,
}


@dataclass(frozen=True)
class BalancedBus:
    """Scalar description of a balanced device.

    ``value`` is lambda (voltage sources), mu (current sources) or epsilon
    (impedances).  ``gamma`` is ``None`` where the device does not specify it
    (delta current sources and impedances).
    """

    id: str
    kind: str
    config: str
    value: complex
    gamma: complex | None
    beta: complex | None
    eta_shunt: complex = 0j

    @property
    def hat_alpha(self) -> complex:
        return HAT_ALPHA[(self.kind, self.config)]


@dataclass(frozen=True)
class BalancedLine:
    from_bus: str
    to_bus: str
    eta_s: complex
    eta_m_from: complex = 0j
    eta_m_to: complex = 0j


@dataclass(frozen=True)
class BalancedSpec:
    buses: tuple[BalancedBus, ...]
    lines: tuple[BalancedLine, ...]

    @property
    def index(self) -> dict[str, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    @property
    def hat_alpha(self) -> np.ndarray:
        return np.array([b.hat_alpha for b in self.buses])

    def all_gammas_zero(self, atol: float = 0.0) -> bool:
        """All specified neutral / zero-sequence source voltages are zero."""
        return all(b.gamma is None or abs(b.gamma) <= atol for b in self.buses)


@dataclass(frozen=True)
class Offender:
    element: str
    component: str
    magnitude: float


@dataclass
class BalanceReport:
    tol: float
    offenders: list[Offender] = field(default_factory=list)
    spec: BalancedSpec | None = None

    @property
    def balanced(self) -> bool:
        return not self.offenders

    def worst(self) -> float:
        return max((o.magnitude for o in self.offenders), default=0.0)

    def lines(self) -> list[str]:
        if self.balanced:
            return [f"balanced (tol={self.tol:g})"]
        return [f"{o.element}: {o.component} {o.magnitude:.3e}" for o in self.offenders]


def scalar_deviation(m: np.ndarray) -> tuple[complex, float]:
    """Best scalar ``eta`` with ``m ~ eta*I`` and the relative misfit.

    The misfit is ``||m - eta I||_F`` over the RMS diagonal scale
    ``||m||_F / sqrt(3)``; it is 0 for a zero block.
    """
    eta = complex(np.trace(m) / 3)
    norm = np.linalg.norm(m)
    if norm == 0:
        return 0j, 0.0
    return eta, float(np.linalg.norm(m - eta * np.eye(3)) * SQRT3 / norm)


def _sequence_content(x: np.ndarray) -> tuple[complex, float, float]:
    sc = sequence_components(x)
    mag = sc.magnitude()
    if mag == 0:
        return 0j, 0.0, 0.0
    return sc.positive, abs(sc.negative) / mag, abs(sc.zero) / mag


def check_balanced(network: Network, tol: float = BALANCE_TOL) -> BalanceReport:
    """Test whether ``network`` is balanced and extract its scalar model."""
    report = BalanceReport(tol)
    buses = []

    def flag(element, component, magnitude):
        if magnitude > tol:
            report.offenders.append(Offender(element, component, magnitude))

    for bus in network.buses:
        d = bus.device
        name = f"bus {bus.id}"
        gamma = getattr(d, "gamma", None)
        if isinstance(d, (dev.CurrentSourceDelta, dev.ImpedanceDelta)):
            gamma = None
        beta = getattr(d, "beta", None)
        if d.kind == "impedance":
            z0, misfit = scalar_deviation(d.z)
            flag(name, "impedance off-scalar", misfit)
            value = 1 / z0 if z0 != 0 else 0j
        else:
            x = d.e if d.kind == "voltage_source" else d.j
            value, neg, zero = _sequence_content(x)
            flag(name, "negative-sequence", neg)
            flag(name, "zero-sequence", zero)
        eta_sh = 0j
        if bus.shunt is not None:
            eta_sh, misfit = scalar_deviation(bus.shunt)
            flag(name, "shunt off-scalar", misfit)
        buses.append(BalancedBus(bus.id, d.kind, d.config, complex(value), gamma, beta, eta_sh))

    lines = []
    for line in network.lines:
        name = f"line {line.from_bus}-{line.to_bus}"
        etas = []
        for component in ("y_series", "y_shunt_from", "y_shunt_to"):
            eta, misfit = scalar_deviation(getattr(line, component))
            flag(name, f"{component} off-scalar", misfit)
            etas.append(eta)
        lines.append(BalancedLine(line.from_bus, line.to_bus, *etas))

    if report.balanced:
        report.spec = BalancedSpec(tuple(buses), tuple(lines))
    return report


@dataclass(frozen=True, eq=False)
class PerPhaseModel:
    y_1phi: np.ndarray
    n_v: tuple[int, ...]
    n_c: tuple[int, ...]
    n_i: tuple[int, ...]
    a11: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    a22_prime: np.ndarray
    y_minus_c_v: np.ndarray
    y_minus_c_mv: np.ndarray
    y_i_diag: np.ndarray

    @property
    def not_v(self) -> tuple[int, ...]:
        return self.n_c + self.n_i

    @property
    def not_c(self) -> tuple[int, ...]:
        return self.n_v + self.n_i


def per_phase_admittance(spec: BalancedSpec) -> np.ndarray:
    idx = spec.index
    y = np.diag(np.array([b.eta_shunt for b in spec.buses], dtype=complex))
    for line in spec.lines:
        a, b = idx[line.from_bus], idx[line.to_bus]
        y[a, a] += line.eta_s + line.eta_m_from
        y[b, b] += line.eta_s + line.eta_m_to
        y[a, b] -= line.eta_s
        y[b, a] -= line.eta_s
    return y


def build_per_phase(spec: BalancedSpec) -> PerPhaseModel:
    y = per_phase_admittance(spec)
    n_v = tuple(k for k, b in enumerate(spec.buses) if b.kind == "voltage_source")
    n_c = tuple(k for k, b in enumerate(spec.buses) if b.kind == "current_source")
    n_i = tuple(k for k, b in enumerate(spec.buses) if b.kind == "impedance")
    not_v = np.array(n_c + n_i, dtype=int)
    not_c = np.array(n_v + n_i, dtype=int)
    iv = np.array(n_v, dtype=int)
    y_i = np.array([spec.buses[k].hat_alpha * spec.buses[k].value for k in n_i], dtype=complex)
    a22 = y[np.ix_(not_v, not_v)]
    pad = np.concatenate([np.zeros(len(n_c), dtype=complex), y_i])
    return PerPhaseModel(
        y_1phi=y,
        n_v=n_v,
        n_c=n_c,
        n_i=n_i,
        a11=y[np.ix_(iv, iv)],
        a21=y[np.ix_(not_v, iv)],
        a22=a22,
        a22_prime=a22 + np.diag(pad),
        y_minus_c_v=y[np.ix_(not_c, iv)],
        y_minus_c_mv=y[np.ix_(not_c, not_v)],
        y_i_diag=y_i,
    )


@dataclass(eq=False)
class PerPhaseSolution:
    v: np.ndarray
    i: np.ndarray
    residual: float
    lifted: Solution | None = None
    zero_seq: tuple[np.ndarray, np.ndarray] | None = None


def solve_per_phase(model: PerPhaseModel, spec: BalancedSpec) -> PerPhaseSolution:
    """Solve the scalar network ``A22' v_{-v} = i_{-v} - A21 v_v``."""
    buses = spec.buses
    n = len(buses)
    v_v = np.array([buses[k].hat_alpha * buses[k].value for k in model.n_v], dtype=complex)
    i_c = np.array([-buses[k].hat_alpha * buses[k].value for k in model.n_c], dtype=complex)
    i_mv = np.concatenate([i_c, np.zeros(len(model.n_i), dtype=complex)])
    b = i_mv - model.a21 @ v_v
    v_mv = _lu_solve(model.a22_prime, b, "per-phase reduced matrix A22'", exc=SingularReducedSystem)
    i_mc = model.y_minus_c_v @ v_v + model.y_minus_c_mv @ v_mv

    v = np.zeros(n, dtype=complex)
    i = np.zeros(n, dtype=complex)
    v[np.array(model.n_v, dtype=int)] = v_v
    v[np.array(model.not_v, dtype=int)] = v_mv
    i[np.array(model.n_c, dtype=int)] = i_c
    i[np.array(model.not_c, dtype=int)] = i_mc
    residual = float(np.max(np.abs(i - model.y_1phi @ v))) if n else 0.0
    return PerPhaseSolution(v, i, residual)


def _balanced_line_flows(spec: BalancedSpec, V: np.ndarray) -> list[LineFlow]:
    idx = spec.index
    flows = []
    for line in spec.lines:
        a, b = idx[line.from_bus], idx[line.to_bus]
        dv = V[a] - V[b]
        i_ab = line.eta_s * dv + line.eta_m_from * V[a]
        i_ba = -line.eta_s * dv + line.eta_m_to * V[b]
        flows.append(LineFlow(line.from_bus, line.to_bus, i_ab, i_ba, np.outer(V[a], i_ab.conj()), np.outer(V[b], i_ba.conj())))
    return flows


def lift(pp: PerPhaseSolution, spec: BalancedSpec, gammas_zero: bool = True) -> Solution:
    """Three-phase solution from the per-phase one.

    With ``gammas_zero`` all neutral and zero-sequence voltages are zero and
    ``V = v kron alpha_plus``.  Otherwise the zero-sequence parts
    ``pp.zero_seq = (gamma_tilde, beta_tilde)`` are added on every bus.
    """
    n = len(spec.buses)
    if gammas_zero:
        if not spec.all_gammas_zero():
            raise ValueError("a specified neutral or zero-sequence source voltage is nonzero; pass the zero-sequence parts")
        g_t = np.zeros(n, dtype=complex)
        b_t = np.zeros(n, dtype=complex)
    else:
        if pp.zero_seq is None:
            raise MissingZeroSequence("lifting without zero neutral and zero-sequence source voltages needs (gamma_tilde, beta_tilde)")
        g_t, b_t = (np.asarray(x, dtype=complex) for x in pp.zero_seq)

    V = np.outer(pp.v, ALPHA_PLUS) + np.outer(g_t, ONES)
    I = np.outer(pp.i, ALPHA_PLUS) + np.outer(b_t, ONES)
    terminal = [dev.TerminalState.from_vi(V[k], I[k]) for k in range(n)]
    internal = []
    for k, bus in enumerate(spec.buses):
        v, i = pp.v[k], pp.i[k]
        if bus.config == "Y":
            delta = bus.gamma - g_t[k]
            v_int = v * ALPHA_PLUS - delta * ONES
            i_int = -i * ALPHA_PLUS - b_t[k] * ONES
            bt = np.conj(b_t[k])
            s_int = -(v * np.conj(i) - delta * bt) * ONES - v * bt * ALPHA_PLUS + delta * np.conj(i) * ALPHA_MINUS
            internal.append(dev.InternalState(v_int, i_int, s_int, complex(bus.gamma), None))
        else:
            beta = 0j if bus.beta is None else bus.beta
            v_int = (1 - ALPHA) * v * ALPHA_PLUS
            i_int = -(1 - ALPHA) * i / 3 * ALPHA_PLUS + beta * ONES
            s_int = -v * np.conj(i) * ONES + (1 - ALPHA) * v * np.conj(beta) * ALPHA_PLUS
            internal.append(dev.InternalState(v_int, i_int, s_int, complex(g_t[k]), complex(beta)))
    sol = Solution(
        [b.id for b in spec.buses], terminal, internal, _balanced_line_flows(spec, V), metadata={"mode": "per-phase"}
    )
    pp.lifted = sol
    return sol


def decompose_extended(full: Solution, pp: PerPhaseSolution) -> tuple[np.ndarray, np.ndarray, float]:
    """Split a full solution into ``v kron alpha_plus + gamma_tilde kron 1``.

    Returns ``(gamma_tilde, beta_tilde, residual)`` where the residual is the
    largest negative-sequence or positive-sequence mismatch over all buses;
    it vanishes when the extended per-phase decomposition holds.
    """
    n = len(full.terminal)
    g_t = np.zeros(n, dtype=complex)
    b_t = np.zeros(n, dtype=complex)
    residual = 0.0
    for k, t in enumerate(full.terminal):
        sv = sequence_components(t.v)
        si = sequence_components(t.i)
        g_t[k] = sv.zero
        b_t[k] = si.zero
        mismatch = abs(sv.negative) + abs(si.negative) + abs(sv.positive - pp.v[k]) + abs(si.positive - pp.i[k])
        residual = max(residual, mismatch)
    return g_t, b_t, residual


def zero_sequence_relation(model: PerPhaseModel, spec: BalancedSpec) -> np.ndarray:
    """``-A22^{-1} A21 gamma_v``: zero-sequence voltages of the non-source buses.

    Exact when every non-source bus draws no zero-sequence current, i.e. the
    network has no wye impedances (those pass ``eps*(gamma_tilde - gamma)``
    to their neutral).
    """
    gamma_v = np.array([spec.buses[k].gamma for k in model.n_v], dtype=complex)
    return -_lu_solve(model.a22, model.a21 @ gamma_v, "per-phase matrix A22", exc=SingularReducedSystem)


def solve_balanced(network: Network, tol: float = BALANCE_TOL) -> tuple[Solution, BalanceReport]:
    """Per-phase fast path: check, reduce, solve and lift ``network``.

    Raises :class:`ValidationError` when the network is unbalanced or a neutral /
    zero-sequence source voltage is nonzero.
    """
    report = check_balanced(network, tol)
    if not report.balanced:
        raise ValidationError("network is not balanced: " + "; ".join(report.lines()), invariant="balanced")
    spec = report.spec
    if not spec.all_gammas_zero():
        raise ValidationError(
            "per-phase lift needs all neutral and zero-sequence source voltages at zero", invariant="zero gammas"
        )
    model = build_per_phase(spec)
    pp = solve_per_phase(model, spec)
    sol = lift(pp, spec, gammas_zero=True)
    sol.metadata.update({"balance_tol": tol, "per_phase_residual": pp.residual})
    return sol, report


def zero_sequence_voltages(model: PerPhaseModel, spec: BalancedSpec) -> np.ndarray:
    """Zero-sequence voltages of the non-source buses, wye impedances included.

    A wye impedance ``eps * I`` with neutral ``gamma`` draws zero-sequence
    current ``-eps * (gamma_tilde - gamma)``, so
    ``(A22 + D) gamma_tilde = -A21 gamma_v + D gamma_imp``.
    """
    gamma_v = np.array([spec.buses[k].gamma for k in model.n_v], dtype=complex)
    d = np.zeros(len(model.not_v), dtype=complex)
    g_imp = np.zeros(len(model.not_v), dtype=complex)
    for pos, k in enumerate(model.not_v):
        bus = spec.buses[k]
        if bus.kind == "impedance" and bus.config == "Y":
            d[pos] = bus.value
            g_imp[pos] = bus.gamma
    rhs = -(model.a21 @ gamma_v) + d * g_imp
    return _lu_solve(model.a22 + np.diag(d), rhs, "zero-sequence matrix", exc=SingularReducedSystem)
