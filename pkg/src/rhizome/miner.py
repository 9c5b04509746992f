"""Mining two-input Boolean gates from a material driven by square waves.

One pin reads the material; seven pins drive it.  A configuration picks an
ordered pair of drive pins for the inputs x and y, a 5-bit context for the
other five pins, and an ordered pair of distinct frequencies (A for false,
B for true).  Every drive pin, context pins included, carries the square
wave of its bit.  The read pin is sampled at twice the higher frequency of
the pair for the whole window; a sample counts as high only when strictly
above the threshold, and the output bit is 1 only when strictly more than
half the samples are high.

Each configuration is run for the four input rows (FF, FT, TF, TT) and the
resulting truth table is classified into one of 16 gates.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import csv
import io
import itertools

import numpy as np

from .errors import ConfigurationError
from .grower import make_rng

N_DRIVE = 7
PINS = tuple(range(1, N_DRIVE + 1))    # drive pins; pin 0 is the read pin

# id -> (canonical name, verbose aliases); bits are (FF, FT, TF, TT)
GATES = {
    1: ("Constant False", ()),
    2: ("x NOR y", ()),
    3: ("NOT x AND y", ()),
    4: ("NOT x", ()),
    5: ("x AND NOT y", ()),
    6: ("NOT y", ()),
    7: ("x XOR y", ()),
    8: ("x NAND y", ()),
    9: ("x AND y", ()),
    10: ("x XNOR y", ()),
    11: ("y", ()),
    12: ("NOT x OR y", ("NOT x AND NOT y OR y",)),
    13: ("x", ()),
    14: ("x OR NOT y", ()),
    15: ("x OR y", ()),
    16: ("Constant True", ()),
}
XOR = 7
ROWS = ((0, 0), (0, 1), (1, 0), (1, 1))


def table_of(gate_id):
    """Defining truth table (FF, FT, TF, TT) of a gate id."""
    if gate_id not in GATES:
        raise ConfigurationError(f"gate ids run from 1 to 16, got {gate_id}")
    k = gate_id - 1
    return tuple((k >> i) & 1 for i in range(4))


def classify_truth_table(tt):
    """``(id, canonical name)`` for outputs on rows FF, FT, TF, TT."""
    bits = tuple(int(b) for b in tt)
    if len(bits) != 4 or any(b not in (0, 1) for b in bits):
        raise ConfigurationError(f"a truth table has exactly 4 bits, got {tt!r}")
    gid = 1 + bits[0] + 2 * bits[1] + 4 * bits[2] + 8 * bits[3]
    return gid, GATES[gid][0]


def complement_id(gate_id):
    return 17 - gate_id


@dataclass(frozen=True)
class MiningProtocol:
    frequencies: tuple = (250, 500, 1000, 2500)   # Hz
    amplitude: float = 3.3                         # V
    window: float = 0.032                          # s
    threshold: float = 0.75                        # V
    context_bits: int = 5
    rng_seed: int = 0          # seeds the synthetic material when none is given

    def __post_init__(self):
        if len(set(self.frequencies)) < 2 or any(f <= 0 for f in self.frequencies):
            raise ConfigurationError("need at least two distinct positive frequencies")
        if self.context_bits != N_DRIVE - 2:
            raise ConfigurationError(f"context_bits must be {N_DRIVE - 2} with {N_DRIVE} drive pins")
        if not (self.amplitude > 0 and self.window > 0):
            raise ConfigurationError("amplitude and window must be positive")

    @property
    def frequency_pairs(self):
        """Ordered (false, true) frequency pairs."""
        return list(itertools.permutations(self.frequencies, 2))

    @property
    def n_configurations(self):
        return len(PINS) * (len(PINS) - 1) * 2 ** self.context_bits * len(self.frequency_pairs)

    def config(self):
        return {"frequencies": list(self.frequencies), "amplitude": self.amplitude,
                "window": self.window, "threshold": self.threshold,
                "context_bits": self.context_bits, "rng_seed": self.rng_seed}


@dataclass(frozen=True)
class MaterialModel:
    """Static nonlinear mixer standing in for the living material.

    Drive levels ``u`` (pin volts after the series resistor divides against
    the material's input resistance, in units of ``v_max``) combine as
    ``s = bias + w·u + Σ_{i<j} W_ij u_i u_j`` and the read pin shows
    ``v_max · tanh(gain · max(s, 0))``.
    """

    linear: tuple = (0.0,) * N_DRIVE
    pairwise: tuple = ((0.0,) * N_DRIVE,) * N_DRIVE   # upper triangle used
    bias: float = 0.0
    gain: float = 1.0
    v_max: float = 3.3
    series_resistance: float = 4.7e3
    input_resistance: float = 1e5

    @classmethod
    def random(cls, seed, **kw):
        rng = make_rng(seed)
        linear = rng.normal(0.0, 1.0, N_DRIVE)
        pairwise = np.triu(rng.normal(0.0, 1.0, (N_DRIVE, N_DRIVE)), 1)
        bias = rng.normal(0.0, 0.5)
        gain = rng.uniform(0.5, 3.0)
        return cls(tuple(linear.tolist()), tuple(map(tuple, pairwise.tolist())),
                   float(bias), float(gain), **kw)

    @classmethod
    def constant_low(cls):
        return cls()

    @classmethod
    def identity(cls, pin=1):
        lin = [0.0] * N_DRIVE
        lin[pin - 1] = 1.0
        return cls(linear=tuple(lin), gain=10.0)

    @classmethod
    def planted_product(cls, pin_a=1, pin_b=2):
        """``u_a + u_b - u_a·u_b``: high whenever either pin is high."""
        lin = [0.0] * N_DRIVE
        lin[pin_a - 1] = lin[pin_b - 1] = 1.0
        W = [[0.0] * N_DRIVE for _ in range(N_DRIVE)]
        i, j = sorted((pin_a - 1, pin_b - 1))
        W[i][j] = -1.0
        return cls(linear=tuple(lin), pairwise=tuple(map(tuple, W)), gain=10.0)

    @property
    def divider(self):
        return self.input_resistance / (self.input_resistance + self.series_resistance)

    def response(self, volts):
        """Read-pin volts for drive-pin volts shaped ``(..., 7, samples)``."""
        u = np.asarray(volts, dtype=np.float64) * (self.divider / self.v_max)
        w = np.asarray(self.linear)
        W = np.triu(np.asarray(self.pairwise), 1)
        s = self.bias + np.einsum("i,...is->...s", w, u)
        s = s + np.einsum("ij,...is,...js->...s", W, u, u)
        return self.v_max * np.tanh(self.gain * np.maximum(s, 0.0))


def _stimulus(stim):
    if stim is None:
        return None
    if isinstance(stim, tuple):
        f, phase = stim
    else:
        f, phase = stim, 0
    return Fraction(f), Fraction(phase)


@lru_cache(maxsize=None)
def square_wave(freq, phase, rate, n):
    """Drive levels (0 or 1) of a 50% square wave sampled ``n`` times at ``rate``."""
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        cycles = freq * k / rate + phase
        out[k] = 1.0 if cycles - (cycles.numerator // cycles.denominator) < Fraction(1, 2) else 0.0
    out.setflags(write=False)
    return out


def _n_samples(protocol, rate):
    return int(round(protocol.window * rate))


def sample_response(material, stimuli, protocol=MiningProtocol(), sample_rate=None):
    """Output bit for one stimulus.

    ``stimuli`` maps each drive pin 1..7 to a frequency, ``(frequency,
    phase_in_cycles)`` or ``None`` for constant low.  The sampling rate
    defaults to twice the highest frequency applied.
    """
    if not isinstance(stimuli, dict):
        stimuli = dict(zip(PINS, stimuli))
    unknown = set(stimuli) - set(PINS)
    if unknown:
        raise ConfigurationError(f"unknown pins {sorted(unknown)}; drive pins are 1..{N_DRIVE}")
    missing = set(PINS) - set(stimuli)
    if missing:
        raise ConfigurationError(f"no stimulus for pins {sorted(missing)}")
    stims = [_stimulus(stimuli[p]) for p in PINS]
    if sample_rate is None:
        freqs = [s[0] for s in stims if s is not None]
        sample_rate = 2 * max(freqs) if freqs else 2 * max(protocol.frequencies)
    rate = Fraction(sample_rate)
    n = _n_samples(protocol, rate)
    levels = np.zeros((N_DRIVE, n))
    for i, s in enumerate(stims):
        if s is not None:
            levels[i] = square_wave(s[0], s[1], rate, n)
    return _majority(material.response(protocol.amplitude * levels), protocol.threshold)


def _majority(volts, threshold):
    high = np.count_nonzero(volts > threshold, axis=-1)
    return (2 * high > volts.shape[-1]).astype(np.int8)


@dataclass
class GateCensus:
    counts: dict = field(default_factory=lambda: {k: 0 for k in GATES})
    total: int = 0

    def add(self, gate_id, n=1):
        self.counts[gate_id] += n
        self.total += n

    def merge(self, other):
        out = GateCensus(dict(self.counts), self.total)
        for k, v in other.counts.items():
            out.add(k, v)
        return out

    def complemented(self):
        return GateCensus({k: self.counts[complement_id(k)] for k in GATES}, self.total)


@dataclass
class MiningResult:
    census: GateCensus
    breakdown: dict     # (freq_false, freq_true) -> GateCensus
    protocol: MiningProtocol


def _pair_outputs(material, protocol, fa, fb):
    """Output bit for every one of the 128 A/B assignments of the drive pins."""
    rate = 2 * max(Fraction(fa), Fraction(fb))
    n = _n_samples(protocol, rate)
    wave = np.stack([square_wave(Fraction(fa), Fraction(0), rate, n),
                     square_wave(Fraction(fb), Fraction(0), rate, n)])
    codes = np.arange(2 ** N_DRIVE)
    bits = (codes[:, None] >> np.arange(N_DRIVE)[None, :]) & 1   # bit i -> pin i+1
    levels = wave[bits]                                           # (128, 7, n)
    return _majority(material.response(protocol.amplitude * levels), protocol.threshold)


def iter_configurations(protocol=MiningProtocol()):
    """Yield ``(x_pin, y_pin, context, (freq_false, freq_true))`` in enumeration order."""
    for fa, fb in protocol.frequency_pairs:
        for xp, yp in itertools.permutations(PINS, 2):
            for ctx in range(2 ** protocol.context_bits):
                yield xp, yp, ctx, (fa, fb)


def mine_gates(material=None, protocol=MiningProtocol(), invert_output=False):
    """Run every configuration and count the gates found.

    Without a material, one is drawn with ``MaterialModel.random(protocol.rng_seed)``.
    ``invert_output`` complements every output bit.
    """
    if material is None:
        material = MaterialModel.random(protocol.rng_seed)
    census = GateCensus()
    breakdown = {}
    for fa, fb in protocol.frequency_pairs:
        out = _pair_outputs(material, protocol, fa, fb)
        if invert_output:
            out = 1 - out
        part = GateCensus()
        for xp, yp in itertools.permutations(PINS, 2):
            rest = [p for p in PINS if p not in (xp, yp)]
            for ctx in range(2 ** protocol.context_bits):
                base = sum(1 << (p - 1) for i, p in enumerate(rest) if (ctx >> i) & 1)
                tt = [out[base | (x << (xp - 1)) | (y << (yp - 1))] for x, y in ROWS]
                part.add(classify_truth_table(tt)[0])
        breakdown[(fa, fb)] = part
        census = census.merge(part)
    return MiningResult(census, breakdown, protocol)


def census_report(census, breakdown=None, gate_id=XOR):
    """``(gate table CSV, per-frequency-pair CSV)``.

    The gate table lists nonzero rows only.  The per-pair table gives the
    count of ``gate_id`` for every frequency pair, largest first.
    """
    t1 = io.StringIO()
    w = csv.writer(t1, lineterminator="\n")
    w.writerow(["cfg", "FF", "FT", "TF", "TT", "count", "gate"])
    for gid, (name, _aliases) in GATES.items():
        n = census.counts.get(gid, 0)
        if n:
            w.writerow([gid] + ["T" if b else "F" for b in table_of(gid)] + [n, name])
    t3 = io.StringIO()
    w = csv.writer(t3, lineterminator="\n")
    w.writerow(["frequency_false", "frequency_true", "count"])
    if breakdown and census.total:
        rows = sorted(((c.counts.get(gate_id, 0), pair) for pair, c in breakdown.items()),
                      key=lambda r: (-r[0], r[1]))
        for n, (fa, fb) in rows:
            w.writerow([fa, fb, n])
    return t1.getvalue(), t3.getvalue()
