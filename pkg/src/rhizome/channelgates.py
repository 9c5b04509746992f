"""Collision-based root logic in channel networks.

A layout is a directed graph of channels between junctions.  Every true
input injects a root at time 0 at the start of its input channel; roots grow
at unit speed and occupy each channel from the moment their tip enters it.
At a junction a root takes the first unoccupied outgoing channel on the
preference list for the channel it arrived by, and stops if none is free.

A junction flagged ``crossing`` is one where the first root's body lies
across the whole junction: once a root has passed, every outgoing channel
there counts as occupied, so later arrivals stop.

Layout text format, one statement per line (``#`` starts a comment)::

    junction NAME [crossing]
    channel NAME FROM TO LENGTH
    prefer JUNCTION INCOMING OUT1 [OUT2 ...]

``FROM`` is a junction or ``in:LABEL``; ``TO`` is a junction or ``out:LABEL``.
"""

from dataclasses import dataclass, field
import csv
import heapq
import io
import itertools
import math

from .errors import ConfigurationError, LayoutDegeneracyError

TIE_TOL = 1e-9
EXITED = "exited"
STOPPED = "stopped"


@dataclass(frozen=True)
class Channel:
    name: str
    src: str      # junction name or "in:<label>"
    dst: str      # junction name or "out:<label>"
    length: float

    @property
    def input_label(self):
        return self.src[3:] if self.src.startswith("in:") else None

    @property
    def output_label(self):
        return self.dst[4:] if self.dst.startswith("out:") else None


@dataclass
class ChannelLayout:
    junctions: dict                 # name -> crossing flag
    channels: dict                  # name -> Channel
    preferences: dict               # (junction, incoming) -> tuple of outgoing
    name: str = ""

    def __post_init__(self):
        self.validate()

    @property
    def inputs(self):
        """Input labels in declaration order."""
        seen = []
        for c in self.channels.values():
            if c.input_label is not None and c.input_label not in seen:
                seen.append(c.input_label)
        return seen

    @property
    def outputs(self):
        return sorted({c.output_label for c in self.channels.values()
                       if c.output_label is not None})

    def outgoing(self, junction):
        return [c.name for c in self.channels.values() if c.src == junction]

    def incoming(self, junction):
        return [c.name for c in self.channels.values() if c.dst == junction]

    def validate(self):
        for c in self.channels.values():
            if not (c.length > 0 and math.isfinite(c.length)):
                raise ConfigurationError(f"channel {c.name}: length must be positive")
            for end, prefix in ((c.src, "in:"), (c.dst, "out:")):
                if not end.startswith(prefix) and end not in self.junctions:
                    raise ConfigurationError(f"channel {c.name}: unknown endpoint {end!r}")
            if c.src.startswith("out:") or c.dst.startswith("in:"):
                raise ConfigurationError(f"channel {c.name} runs the wrong way")
            if c.input_label is not None and c.dst not in self.junctions:
                raise ConfigurationError(f"input channel {c.name} must lead to a junction")
        if not self.inputs:
            raise ConfigurationError("layout has no input channels")
        if not self.outputs:
            raise ConfigurationError("layout has no output channels")
        for j in self.junctions:
            out = self.outgoing(j)
            if not out:
                raise ConfigurationError(f"junction {j} has no outgoing channel")
            for inc in self.incoming(j):
                pref = self.preferences.get((j, inc))
                if pref is None:
                    raise ConfigurationError(f"junction {j}: no preference list for {inc}")
                if len(set(pref)) != len(pref) or set(pref) != set(out):
                    raise ConfigurationError(
                        f"junction {j}, incoming {inc}: preference list {list(pref)} "
                        f"must order exactly the outgoing channels {out}")
        for j, inc in self.preferences:
            if j not in self.junctions or inc not in self.incoming(j):
                raise ConfigurationError(f"preference for {inc} at {j} matches no channel")


@dataclass
class RootRecord:
    root: int
    label: str
    state: str = ""
    exit_label: str = None
    path: list = field(default_factory=list)     # channel names in order
    arrivals: list = field(default_factory=list)  # (junction or out:label, time)


@dataclass
class GateResult:
    outputs: dict        # output label -> bool
    roots: list          # RootRecord per injected root
    occupancy: list      # (time, channel, root) in the order channels were taken

    def bits(self, labels=None):
        labels = labels or sorted(self.outputs)
        return tuple(int(self.outputs[k]) for k in labels)


def evaluate_layout(layout, inputs):
    """Run the roots injected by ``inputs`` (label -> bool) to completion."""
    labels = layout.inputs
    unknown = set(inputs) - set(labels)
    if unknown:
        raise ConfigurationError(f"unknown input labels {sorted(unknown)}")
    missing = [k for k in labels if k not in inputs]
    if missing:
        raise ConfigurationError(f"missing input labels {missing}")

    occupied = {}
    trace = []
    roots = []
    events = []
    seq = itertools.count()

    def enter(rec, ch, t):
        occupied[ch] = rec.root
        trace.append((t, ch, rec.root))
        rec.path.append(ch)
        heapq.heappush(events, (t + layout.channels[ch].length, next(seq), rec.root, ch))

    for c in layout.channels.values():
        if c.input_label is not None and inputs[c.input_label]:
            rec = RootRecord(len(roots), c.input_label)
            roots.append(rec)
            enter(rec, c.name, 0.0)

    last_arrival = {}
    while events:
        t, _s, rid, ch = heapq.heappop(events)
        rec = roots[rid]
        c = layout.channels[ch]
        rec.arrivals.append((c.dst, t))
        if c.output_label is not None:
            rec.state = EXITED
            rec.exit_label = c.output_label
            continue
        j = c.dst
        prev = last_arrival.get(j)
        if prev is not None and abs(prev[0] - t) <= TIE_TOL:
            raise LayoutDegeneracyError(
                f"roots {prev[1]} and {rid} reach junction {j} at the same time {t:g}")
        last_arrival[j] = (t, rid)
        nxt = next((o for o in layout.preferences[(j, ch)] if o not in occupied), None)
        if nxt is None:
            rec.state = STOPPED
            continue
        if layout.junctions[j]:
            for o in layout.outgoing(j):
                occupied.setdefault(o, rid)
        enter(rec, nxt, t)

    outputs = {k: False for k in layout.outputs}
    for rec in roots:
        if rec.state == EXITED:
            outputs[rec.exit_label] = True
    return GateResult(outputs, roots, trace)


def truth_table(layout):
    """Rows ``((x, y), {label: bit})`` for inputs 00, 01, 10, 11."""
    labels = layout.inputs
    if len(labels) != 2:
        raise ConfigurationError(f"truth tables need exactly 2 inputs, layout has {labels}")
    rows = []
    for a, b in itertools.product((0, 1), repeat=2):
        res = evaluate_layout(layout, {labels[0]: bool(a), labels[1]: bool(b)})
        rows.append(((a, b), {k: int(v) for k, v in res.outputs.items()}))
    return rows


def truth_table_csv(layout):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    outs = layout.outputs
    w.writerow(layout.inputs + outs)
    for ins, bits in truth_table(layout):
        w.writerow(list(ins) + [bits[k] for k in outs])
    return out.getvalue()


# text format

def parse_layout(text, name=""):
    junctions = {}
    channels = {}
    prefs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind, args = words[0], words[1:]
        where = f"line {lineno}"
        if kind == "junction":
            if len(args) not in (1, 2) or (len(args) == 2 and args[1] != "crossing"):
                raise ConfigurationError(f"{where}: expected 'junction NAME [crossing]'")
            if args[0] in junctions:
                raise ConfigurationError(f"{where}: duplicate junction {args[0]}")
            junctions[args[0]] = len(args) == 2
        elif kind == "channel":
            if len(args) != 4:
                raise ConfigurationError(f"{where}: expected 'channel NAME FROM TO LENGTH'")
            if args[0] in channels:
                raise ConfigurationError(f"{where}: duplicate channel {args[0]}")
            try:
                length = float(args[3])
            except ValueError:
                raise ConfigurationError(f"{where}: bad length {args[3]!r}") from None
            channels[args[0]] = Channel(args[0], args[1], args[2], length)
        elif kind == "prefer":
            if len(args) < 3:
                raise ConfigurationError(f"{where}: expected 'prefer JUNCTION INCOMING OUT...'")
            key = (args[0], args[1])
            if key in prefs:
                raise ConfigurationError(f"{where}: duplicate preference for {args[1]} at {args[0]}")
            prefs[key] = tuple(args[2:])
        else:
            raise ConfigurationError(f"{where}: unknown statement {kind!r}")
    return ChannelLayout(junctions, channels, prefs, name)


def layout_text(layout):
    lines = []
    for j, crossing in layout.junctions.items():
        lines.append(f"junction {j}" + (" crossing" if crossing else ""))
    for c in layout.channels.values():
        lines.append(f"channel {c.name} {c.src} {c.dst} {c.length:g}")
    for (j, inc), pref in layout.preferences.items():
        lines.append(f"prefer {j} {inc} " + " ".join(pref))
    return "\n".join(lines) + "\n"


def load_layout(path):
    with open(path, encoding="utf-8") as f:
        return parse_layout(f.read(), name=str(path))


# built-in layouts

HUMIDITY_TEXT = """\
# x reaches the crossing first and grows on into q; its body then bars y from p
junction j crossing
channel x in:x j 2
channel y in:y j 3
channel q j out:q 2
channel p j out:p 2
prefer j x q p
prefer j y p q
"""

GRAVITY_TEXT = """\
# gravity pulls every root down the straight channel q; a second root arriving
# after q is taken is deflected into the side channel p
junction j
channel x in:x j 2
channel y in:y j 3
channel q j out:q 2
channel p j out:p 2
prefer j x q p
prefer j y q p
"""


def humidity_gate():
    return parse_layout(HUMIDITY_TEXT, "HUMIDITY_GATE")


def gravity_gate():
    return parse_layout(GRAVITY_TEXT, "GRAVITY_GATE")


def _single_gate_parts(gate):
    if len(gate.junctions) != 1 or sorted(gate.inputs) != ["x", "y"] or gate.outputs != ["p", "q"]:
        raise ConfigurationError("cascading needs one-junction gates with inputs x, y and outputs p, q")
    (j,) = gate.junctions
    return j


def cascade_half_adder(north=None, south=None, links=(1.0, 2.0)):
    """Wire two x̄y/x gates into a half-adder with outputs p = x⊕y, q = x∨y, r = x∧y.

    The north gate (junction j1) receives x on its fast input, the south gate
    (junction j4) receives y there.  Their slow-input outputs merge at j2
    into p; their fast-input outputs merge at j3 into q, where a second
    arrival is pushed into r.  ``links`` are the extra lengths from the
    north and south gates to j3; unequal values keep the two arrivals at j3
    apart in time.
    """
    north = north or humidity_gate()
    south = south or humidity_gate()
    junctions = {"j2": False, "j3": False}
    channels = {}
    prefs = {}
    for gate, tag, jname, swap, link in ((north, "n", "j1", False, links[0]),
                                         (south, "s", "j4", True, links[1])):
        j = _single_gate_parts(gate)
        junctions[jname] = gate.junctions[j]
        rename = {}
        for c in gate.channels.values():
            new = f"{c.name}_{tag}"
            if c.input_label is not None:
                label = {"x": "y", "y": "x"}[c.input_label] if swap else c.input_label
                new = f"{label}_{tag}"
                channels[new] = Channel(new, f"in:{label}", jname, c.length)
            elif c.output_label == "p":
                channels[new] = Channel(new, jname, "j2", c.length + link)
            else:
                channels[new] = Channel(new, jname, "j3", c.length + link)
            rename[c.name] = new
        for (_j, inc), pref in gate.preferences.items():
            prefs[(jname, rename[inc])] = tuple(rename[o] for o in pref)
    channels["p"] = Channel("p", "j2", "out:p", 2.0)
    channels["q"] = Channel("q", "j3", "out:q", 2.0)
    channels["r"] = Channel("r", "j3", "out:r", 2.0)
    for inc in ("p_n", "p_s"):
        prefs[("j2", inc)] = ("p",)
    for inc in ("q_n", "q_s"):
        prefs[("j3", inc)] = ("q", "r")
    order = ["j1", "j2", "j3", "j4"]
    return ChannelLayout({k: junctions[k] for k in order}, channels, prefs, "HALF_ADDER")


BUILTIN = {
    "HUMIDITY_GATE": humidity_gate,
    "GRAVITY_GATE": gravity_gate,
    "HALF_ADDER": cascade_half_adder,
}

# the function each built-in layout is meant to compute, per output label
DECLARED = {
    "HUMIDITY_GATE": {"p": lambda x, y: (not x) and y, "q": lambda x, y: x},
    "GRAVITY_GATE": {"p": lambda x, y: x and y, "q": lambda x, y: x or y},
    "HALF_ADDER": {"p": lambda x, y: x != y, "q": lambda x, y: x or y, "r": lambda x, y: x and y},
}


def builtin_layout(name):
    """Built-in layout by name; ``humidity``, ``gravity`` and ``half_adder`` also work."""
    key = name.upper().replace("-", "_")
    if key in ("HUMIDITY", "GRAVITY"):
        key += "_GATE"
    if key == "HALFADDER":
        key = "HALF_ADDER"
    if key not in BUILTIN:
        raise ConfigurationError(f"unknown layout {name!r}; choose from {sorted(BUILTIN)}")
    return BUILTIN[key]()
