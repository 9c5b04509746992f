"""Plant-electronics arithmetic: wires, amplifiers, resistor networks, memristors.

Netlist text format, one element per line (``#`` starts a comment)::

    R NODE_A NODE_B OHMS      resistor; OHMS may carry a k, M or G suffix
    V NODE VOLTS              node held at a fixed potential
    GND NODE                  reference node at 0 V (exactly one)
"""

from dataclasses import dataclass, replace
from enum import Enum
import csv
import io
import math

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ConfigurationError, SingularNetworkError

# approximate resistances of a control root and of root branches loaded with
# graphene or calcium phosphate
R_CONTROL = 3e6
R_GRAPHENE = 2e6
R_CAPH = 4e6

WIRE_DROP_BAND = (1.5, 2.0)


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ConfigurationError(f"{name} must be a positive finite resistance, got {value!r}")


# summing amplifier

@dataclass(frozen=True)
class AmplifierConfig:
    R0: float
    R1: float
    R2: float
    v1: float = 0.0
    v2: float = 0.0

    def __post_init__(self):
        for k in ("R0", "R1", "R2"):
            _positive(k, getattr(self, k))

    @property
    def gains(self):
        """``(a, b)`` in ``z = a·x + b·y`` with ``v1 = -x``, ``v2 = -y``."""
        return self.R0 / self.R1, self.R0 / self.R2


def sum_amplifier(cfg):
    """Output of an ideal inverting summing amplifier."""
    a, b = cfg.gains
    return -(a * cfg.v1 + b * cfg.v2)


def wire_transfer(v_in, drop=2.0):
    """Potential left at the far end of a root wire that loses ``drop`` volts."""
    lo, hi = WIRE_DROP_BAND
    if not lo <= drop <= hi:
        raise ConfigurationError(f"drop must lie in [{lo}, {hi}] V, got {drop}")
    return max(0.0, v_in - drop)


# nanomaterial effects

class Level(str, Enum):
    STRONG_DOWN = "strong-down"
    DOWN = "down"
    UNCHANGED = "unchanged"
    UP = "up"
    STRONG_UP = "strong-up"


@dataclass(frozen=True)
class MaterialEffect:
    potential: Level
    resistance: Level
    capacitance: Level


_L = Level
MATERIAL_EFFECTS = {
    "graphene": MaterialEffect(_L.DOWN, _L.STRONG_DOWN, _L.UP),
    "CNT": MaterialEffect(_L.UNCHANGED, _L.UP, _L.UNCHANGED),
    "CaPh": MaterialEffect(_L.STRONG_UP, _L.UP, _L.DOWN),
    "AO": MaterialEffect(_L.UNCHANGED, _L.UNCHANGED, _L.UP),
}
_MATERIAL_ALIASES = {
    "graphene": "graphene", "graphene oxide": "graphene",
    "cnt": "CNT", "cnts": "CNT", "carbon nanotubes": "CNT",
    "caph": "CaPh", "calcium phosphate": "CaPh",
    "ao": "AO", "aluminium oxide": "AO", "aluminum oxide": "AO",
}


def material_effect(material):
    key = _MATERIAL_ALIASES.get(str(material).strip().lower())
    if key is None:
        raise ConfigurationError(
            f"unknown material {material!r}; choose from {sorted(MATERIAL_EFFECTS)}")
    return MATERIAL_EFFECTS[key]


# resistor networks

@dataclass
class Netlist:
    resistors: list                 # (node_a, node_b, ohms)
    sources: dict                   # node -> volts
    ground: str

    @property
    def nodes(self):
        seen = {self.ground: None}
        for a, b, _r in self.resistors:
            seen.setdefault(a, None)
            seen.setdefault(b, None)
        for n in self.sources:
            seen.setdefault(n, None)
        return list(seen)

    def validate(self):
        if not self.sources:
            raise ConfigurationError("a netlist needs at least one voltage source")
        if self.ground in self.sources and self.sources[self.ground] != 0:
            raise ConfigurationError("the ground node cannot be driven to a nonzero voltage")
        for a, b, r in self.resistors:
            _positive(f"resistor {a}-{b}", r)
            if a == b:
                raise ConfigurationError(f"resistor {a}-{b} is shorted onto one node")


@dataclass
class NetworkSolution:
    voltages: dict                  # node -> volts
    currents: list                  # per resistor, amps from node_a to node_b
    injected: dict                  # fixed node -> amps pushed into the network
    residual: float                 # max |KCL imbalance| over free nodes, relative

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["node", "volts"])
        for n, v in self.voltages.items():
            w.writerow([n, repr(float(v))])
        return out.getvalue()


def solve_resistor_network(net):
    """Node voltages by nodal analysis with fixed-potential source and ground nodes."""
    net.validate()
    nodes = net.nodes
    index = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    G = np.zeros((n, n))
    for a, b, r in net.resistors:
        i, j = index[a], index[b]
        g = 1.0 / r
        G[i, i] += g
        G[j, j] += g
        G[i, j] -= g
        G[j, i] -= g

    fixed = dict(net.sources)
    fixed[net.ground] = 0.0
    k_idx = np.array([index[m] for m in fixed])
    f_idx = np.array([i for i in range(n) if nodes[i] not in fixed], dtype=int)

    _, comp = connected_components(G != 0, directed=False)
    anchored = set(comp[k_idx])
    floating = [nodes[i] for i in f_idx if comp[i] not in anchored]
    if floating:
        raise SingularNetworkError(
            f"nodes {floating} have no resistive path to a source or ground", floating)

    V = np.zeros(n)
    V[k_idx] = [fixed[m] for m in fixed]
    residual = 0.0
    if len(f_idx):
        A = G[np.ix_(f_idx, f_idx)]
        rhs = -G[np.ix_(f_idx, k_idx)] @ V[k_idx]
        V[f_idx] = np.linalg.solve(A, rhs)
        imbalance = A @ V[f_idx] - rhs
        scale = max(float(np.max(np.abs(np.diag(A)) * np.max(np.abs(V)))), 1e-300)
        residual = float(np.max(np.abs(imbalance))) / scale
    currents = [float(V[index[a]] - V[index[b]]) / r for a, b, r in net.resistors]
    out = G @ V
    injected = {m: float(out[index[m]]) for m in fixed}
    return NetworkSolution({m: float(V[index[m]]) for m in nodes}, currents, injected, residual)


def equivalent_resistance(resistors, a, b):
    """Resistance seen between nodes ``a`` and ``b`` of a resistor list."""
    sol = solve_resistor_network(Netlist(list(resistors), {a: 1.0}, b))
    return 1.0 / sol.injected[a]


_SUFFIX = {"k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9}


def _value(word, where):
    mult = 1.0
    if word and word[-1] in _SUFFIX:
        word, mult = word[:-1], _SUFFIX[word[-1]]
    try:
        return float(word) * mult
    except ValueError:
        raise ConfigurationError(f"{where}: bad number {word!r}") from None


def parse_netlist(text):
    resistors = []
    sources = {}
    ground = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind = words[0].upper()
        where = f"line {lineno}"
        if kind == "R" and len(words) == 4:
            resistors.append((words[1], words[2], _value(words[3], where)))
        elif kind == "V" and len(words) == 3:
            if words[1] in sources:
                raise ConfigurationError(f"{where}: node {words[1]} already has a source")
            sources[words[1]] = _value(words[2], where)
        elif kind == "GND" and len(words) == 2:
            if ground is not None:
                raise ConfigurationError(f"{where}: ground given twice")
            ground = words[1]
        else:
            raise ConfigurationError(f"{where}: cannot parse {line!r}")
    if ground is None:
        raise ConfigurationError("netlist has no GND line")
    return Netlist(resistors, sources, ground)


def load_netlist(path):
    with open(path, encoding="utf-8") as f:
        return parse_netlist(f.read())


# memristors

@dataclass(frozen=True)
class MemristorState:
    w: float = 0.0          # 0 = fully off, 1 = fully on
    r_on: float = 1e6
    r_off: float = 1e8
    v_t: float = 1.0
    rate: float = 100.0     # change of w per volt above threshold per second

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ConfigurationError(f"w must lie in [0, 1], got {self.w}")
        _positive("r_on", self.r_on)
        if not self.r_on < self.r_off:
            raise ConfigurationError("r_on must be below r_off")
        if not self.v_t > 0:
            raise ConfigurationError("threshold voltage must be positive")
        if not self.rate > 0:
            raise ConfigurationError("drift rate must be positive")

    @property
    def resistance(self):
        return self.r_off + self.w * (self.r_on - self.r_off)


def memristor_step(state, v, dt):
    """Apply ``v`` volts for ``dt`` seconds; below threshold nothing changes."""
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    if abs(v) <= state.v_t:
        return state
    over = v - state.v_t if v > 0 else v + state.v_t
    w = min(1.0, max(0.0, state.w + state.rate * over * dt))
    return replace(state, w=w)


def memristor_current(state, v):
    return v / state.resistance


def sweep_loop(state, amplitude=2.0, frequency=1.0, samples=2000):
    """Drive one sine period and return ``(t, v, i, w)`` arrays."""
    t = np.arange(samples + 1) / (samples * frequency)
    v = amplitude * np.sin(2 * np.pi * frequency * t)
    dt = t[1] - t[0]
    i = np.empty_like(v)
    w = np.empty_like(v)
    for k, vk in enumerate(v):
        i[k] = memristor_current(state, vk)
        w[k] = state.w
        state = memristor_step(state, vk, dt)
    return t, v, i, w


# stateful IMPLY logic

@dataclass(frozen=True)
class ImplyCircuit:
    """Two memristors P and Q sharing a node tied to ground through ``r_load``.

    A conditioning voltage below threshold drives P and a set voltage above
    threshold drives Q.  A conducting P lifts the shared node so Q sees less
    than threshold and keeps its state; an off P leaves Q to be switched on.
    """

    v_cond: float = 0.9
    v_set: float = 1.6
    r_load: float = 1e7
    pulse: float = 0.1
    substeps: int = 200
    readout: float = 0.5    # w at or above this reads as true

    def node_voltage(self, P, Q):
        gp, gq, gl = 1 / P.resistance, 1 / Q.resistance, 1 / self.r_load
        return (self.v_cond * gp + self.v_set * gq) / (gp + gq + gl)


DEFAULT_IMPLY = ImplyCircuit()


def encode(bit, template=MemristorState()):
    return replace(template, w=1.0 if bit else 0.0)


def read(state, circuit=DEFAULT_IMPLY):
    return int(state.w >= circuit.readout)


def imply_step(P, Q, circuit=DEFAULT_IMPLY):
    """One IMPLY pulse; returns the new ``(P, Q)`` with ``Q <- P -> Q``."""
    dt = circuit.pulse / circuit.substeps
    for _ in range(circuit.substeps):
        vn = circuit.node_voltage(P, Q)
        P = memristor_step(P, circuit.v_cond - vn, dt)
        Q = memristor_step(Q, circuit.v_set - vn, dt)
    return P, Q


def false_step(S):
    """Unconditional reset: a long negative pulse well past threshold."""
    v = -2.0 * S.v_t
    return memristor_step(S, v, 2.0 / (S.rate * S.v_t))


def imply_gate(p, q, circuit=DEFAULT_IMPLY):
    _P, Q = imply_step(encode(p), encode(q), circuit)
    return read(Q, circuit)


def nand_gate(p, q, circuit=DEFAULT_IMPLY):
    """NAND from a reset and two IMPLY pulses: ``s = 0; s = q -> s; s = p -> s``."""
    s = false_step(encode(1))
    _q, s = imply_step(encode(q), s, circuit)
    _p, s = imply_step(encode(p), s, circuit)
    return read(s, circuit)
