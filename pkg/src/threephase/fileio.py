"""JSON network and solution files.

Complex scalars are ``[re, im]`` pairs, 3-vectors are three pairs and 3x3
matrices are nine pairs in row-major order.  Solutions are written with
17 significant digits so that they round-trip exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import devices as dev
from .errors import ParseError, SingularImpedance, ValidationError
from .network import Bus, LineSpec, Network
from .solver import Solution

FORMAT_VERSION = 1

_DEVICE_CLASSES = {
    ("voltage_source", "Y"): dev.VoltageSourceY,
    ("voltage_source", "delta"): dev.VoltageSourceDelta,
    ("current_source", "Y"): dev.CurrentSourceY,
    ("current_source", "delta"): dev.CurrentSourceDelta,
    ("impedance", "Y"): dev.ImpedanceY,
    ("impedance", "delta"): dev.ImpedanceDelta,
}
# parameter name -> decoder; e/j/z are required, gamma/beta default to 0
_DEVICE_PARAMS = {
    dev.VoltageSourceY: {"e": "c3", "gamma": "c"},
    dev.VoltageSourceDelta: {"e": "c3", "gamma": "c", "beta": "c"},
    dev.CurrentSourceY: {"j": "c3", "gamma": "c"},
    dev.CurrentSourceDelta: {"j": "c3"},
    dev.ImpedanceY: {"z": "c3x3", "gamma": "c"},
    dev.ImpedanceDelta: {"z": "c3x3", "beta": "c"},
}
_REQUIRED = {"e", "j", "z"}


# --- decoding ---------------------------------------------------------------


def _complex(x, where: str) -> complex:
    if (
        not isinstance(x, (list, tuple))
        or len(x) != 2
        or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in x)
    ):
        raise ParseError("expected a complex number as [re, im]", where)
    if not all(math.isfinite(p) for p in x):
        raise ParseError("complex number is not finite", where)
    return complex(x[0], x[1])


def _pairs(x, n: int, where: str) -> np.ndarray:
    if not isinstance(x, list) or len(x) != n:
        raise ParseError(f"expected a list of {n} [re, im] pairs", where)
    return np.array([_complex(p, f"{where}[{k}]") for k, p in enumerate(x)], dtype=complex)


def _decode(kind: str, x, where: str):
    if kind == "c":
        return _complex(x, where)
    if kind == "c3":
        return _pairs(x, 3, where)
    return _pairs(x, 9, where).reshape(3, 3)


def _device_from_dict(d, where: str) -> dev.DeviceSpec:
    if not isinstance(d, dict):
        raise ParseError("device must be an object", where)
    key = (d.get("kind"), d.get("config"))
    cls = _DEVICE_CLASSES.get(key)
    if cls is None:
        raise ParseError(f"unknown device kind/config {key}", where)
    params = _DEVICE_PARAMS[cls]
    extra = set(d) - set(params) - {"kind", "config"}
    if extra:
        raise ParseError(f"unexpected device fields {sorted(extra)}", where)
    kwargs = {}
    for name, kind in params.items():
        if name in d:
            kwargs[name] = _decode(kind, d[name], f"{where}.{name}")
        elif name in _REQUIRED:
            raise ParseError(f"missing field {name!r}", where)
    return cls(**kwargs)


def network_from_dict(data) -> Network:
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION}", "version")
    raw_buses = data.get("buses")
    if not isinstance(raw_buses, list):
        raise ParseError("'buses' must be a list", "buses")
    buses = []
    for k, b in enumerate(raw_buses):
        where = f"buses[{k}]"
        if not isinstance(b, dict) or "id" not in b or "device" not in b:
            raise ParseError("bus needs 'id' and 'device'", where)
        where = f"buses[{k}] (id {b['id']!r})"
        try:
            device = _device_from_dict(b["device"], f"{where}.device")
            shunt = _decode("c3x3", b["shunt"], f"{where}.shunt") if b.get("shunt") is not None else None
            buses.append(Bus(str(b["id"]), device, shunt))
        except ValidationError as exc:
            raise ValidationError(str(exc), exc.invariant, where) from exc
        except SingularImpedance as exc:
            raise ValidationError(str(exc), "invertible impedance", where) from exc

    lines = []
    for k, ln in enumerate(data.get("lines", [])):
        where = f"lines[{k}]"
        if not isinstance(ln, dict) or "from" not in ln or "to" not in ln or "y_series" not in ln:
            raise ParseError("line needs 'from', 'to' and 'y_series'", where)
        kwargs = {
            name: _decode("c3x3", ln[name], f"{where}.{name}")
            for name in ("y_series", "y_shunt_from", "y_shunt_to")
            if ln.get(name) is not None
        }
        try:
            lines.append(LineSpec(str(ln["from"]), str(ln["to"]), **kwargs))
        except ValidationError as exc:
            raise ValidationError(str(exc), exc.invariant, where) from exc
    return Network(buses, lines)


def load(path) -> Network:
    """Read and validate a network file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    return network_from_dict(data)


# --- encoding ---------------------------------------------------------------


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _vec(x) -> list[list[float]]:
    return [_pair(z) for z in np.asarray(x).reshape(-1)]


def device_to_dict(d: dev.DeviceSpec) -> dict:
    out = {"kind": d.kind, "config": d.config}
    for name, kind in _DEVICE_PARAMS[type(d)].items():
        value = getattr(d, name)
        out[name] = _pair(value) if kind == "c" else _vec(value)
    return out


def network_to_dict(network: Network) -> dict:
    buses = []
    for b in network.buses:
        entry = {"id": b.id, "device": device_to_dict(b.device)}
        if b.shunt is not None:
            entry["shunt"] = _vec(b.shunt)
        buses.append(entry)
    lines = [
        {
            "from": ln.from_bus,
            "to": ln.to_bus,
            "y_series": _vec(ln.y_series),
            "y_shunt_from": _vec(ln.y_shunt_from),
            "y_shunt_to": _vec(ln.y_shunt_to),
        }
        for ln in network.lines
    ]
    return {"version": FORMAT_VERSION, "buses": buses, "lines": lines}


def solution_to_dict(sol: Solution) -> dict:
    buses = []
    for bus_id, t, st in zip(sol.bus_ids, sol.terminal, sol.internal):
        buses.append(
            {
                "id": bus_id,
                "v": _vec(t.v),
                "i": _vec(t.i),
                "s": _vec(t.s),
                "v_internal": _vec(st.v_int),
                "i_internal": _vec(st.i_int),
                "s_internal": _vec(st.s_int),
                "gamma": _pair(st.gamma),
                "beta": None if st.beta is None else _pair(st.beta),
            }
        )
    lines = [
        {
            "from": f.from_bus,
            "to": f.to_bus,
            "i_from": _vec(f.i_from),
            "i_to": _vec(f.i_to),
            "s_from": _vec(f.s_from),
            "s_to": _vec(f.s_to),
        }
        for f in sol.lines
    ]
    out = {"version": FORMAT_VERSION, "buses": buses, "lines": lines}
    if sol.diagnostics is not None:
        d = sol.diagnostics
        out["diagnostics"] = {
            "network_residual": d.network_residual,
            "current_scale": d.current_scale,
            "kcl": d.kcl,
            "delta_source_kcl": d.delta_source_kcl,
            "power_injected": _pair(d.power_injected),
            "power_absorbed": _pair(d.power_absorbed),
        }
    out["metadata"] = dict(sol.metadata)
    return out


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite number {x}")
    return format(x, ".17g")


def _is_leaf_list(x) -> bool:
    return isinstance(x, list) and all(
        isinstance(p, (int, float)) or (isinstance(p, list) and all(isinstance(q, (int, float)) for q in p)) for p in x
    )


def dumps(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits.

    Numeric lists (pairs, vectors of pairs) stay on one line so the files
    diff well.
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        obj = list(obj)
        if not obj:
            return "[]"
        if _is_leaf_list(obj):
            return "[" + ", ".join(dumps(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(x, indent + 1) for x in obj) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def save_network(network: Network, path) -> None:
    Path(path).write_text(dumps(network_to_dict(network)) + "\n")


def save_solution(sol: Solution, path) -> None:
    Path(path).write_text(dumps(solution_to_dict(sol)) + "\n")


def load_solution_dict(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("buses"), list):
        raise ParseError("not a solution file", str(path))
    return data


def terminal_arrays(data: dict, where: str = "") -> tuple[list[str], dict[str, np.ndarray]]:
    """Bus ids and ``(n, 3)`` arrays of ``v``, ``i``, ``s`` from a solution dict."""
    ids = [str(b.get("id")) for b in data["buses"]]
    out = {}
    for q in ("v", "i", "s"):
        out[q] = np.array(
            [_pairs(b.get(q), 3, f"{where}buses[{k}].{q}") for k, b in enumerate(data["buses"])], dtype=complex
        ).reshape(-1, 3)
    return ids, out


def solution_from_dict(data: dict) -> Solution:
    """Inverse of :func:`solution_to_dict`."""
    from .solver import DiagnosticReport, LineFlow

    terminal, internal = [], []
    for k, b in enumerate(data["buses"]):
        where = f"buses[{k}]"
        v, i, s = (_pairs(b.get(q), 3, f"{where}.{q}") for q in ("v", "i", "s"))
        terminal.append(dev.TerminalState(v, i, s))
        beta = None if b.get("beta") is None else _complex(b["beta"], f"{where}.beta")
        internal.append(
            dev.InternalState(
                *(_pairs(b.get(q), 3, f"{where}.{q}") for q in ("v_internal", "i_internal", "s_internal")),
                gamma=_complex(b.get("gamma"), f"{where}.gamma"),
                beta=beta,
            )
        )
    lines = []
    for k, f in enumerate(data.get("lines", [])):
        where = f"lines[{k}]"
        lines.append(
            LineFlow(
                str(f["from"]),
                str(f["to"]),
                _pairs(f.get("i_from"), 3, f"{where}.i_from"),
                _pairs(f.get("i_to"), 3, f"{where}.i_to"),
                _pairs(f.get("s_from"), 9, f"{where}.s_from").reshape(3, 3),
                _pairs(f.get("s_to"), 9, f"{where}.s_to").reshape(3, 3),
            )
        )
    diag = None
    if data.get("diagnostics") is not None:
        d = data["diagnostics"]
        diag = DiagnosticReport(
            d["network_residual"],
            d["current_scale"],
            dict(d["kcl"]),
            dict(d["delta_source_kcl"]),
            _complex(d["power_injected"], "diagnostics.power_injected"),
            _complex(d["power_absorbed"], "diagnostics.power_absorbed"),
        )
    ids = [str(b.get("id")) for b in data["buses"]]
    return Solution(ids, terminal, internal, lines, diag, dict(data.get("metadata", {})))
