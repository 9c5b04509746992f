from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhizome.errors import ConfigurationError
from rhizome.miner import (GATES, PINS, XOR, GateCensus, MaterialModel, MiningProtocol,
                           census_report, classify_truth_table, complement_id,
                           iter_configurations, mine_gates, sample_response, square_wave,
                           table_of)

LOW = {p: None for p in PINS}


def test_classification_examples():
    assert classify_truth_table((0, 1, 1, 0)) == (7, "x XOR y")
    assert classify_truth_table((0, 0, 0, 0)) == (1, "Constant False")
    assert classify_truth_table((0, 0, 1, 1)) == (13, "x")
    assert classify_truth_table((1, 1, 0, 1))[0] == 12
    assert "NOT x AND NOT y OR y" in GATES[12][1]


def test_classification_bijection():
    seen = {}
    for bits in itertools.product((0, 1), repeat=4):
        gid, _name = classify_truth_table(bits)
        seen[gid] = bits
        assert table_of(gid) == bits
    assert sorted(seen) == list(range(1, 17))


def test_names_agree_with_tables():
    fns = {
        "Constant False": lambda x, y: 0, "Constant True": lambda x, y: 1,
        "x NOR y": lambda x, y: not (x or y), "x NAND y": lambda x, y: not (x and y),
        "x XOR y": lambda x, y: x != y, "x XNOR y": lambda x, y: x == y,
        "x AND y": lambda x, y: x and y, "x OR y": lambda x, y: x or y,
        "NOT x AND y": lambda x, y: (not x) and y, "x AND NOT y": lambda x, y: x and not y,
        "NOT x": lambda x, y: not x, "NOT y": lambda x, y: not y, "x": lambda x, y: x,
        "y": lambda x, y: y, "NOT x OR y": lambda x, y: (not x) or y,
        "x OR NOT y": lambda x, y: x or not y,
    }
    for gid, (name, _aliases) in GATES.items():
        expect = tuple(int(bool(fns[name](x, y))) for x, y in ((0, 0), (0, 1), (1, 0), (1, 1)))
        assert table_of(gid) == expect


def test_complement_pairs():
    assert complement_id(1) == 16 and complement_id(7) == 10
    for gid in GATES:
        assert table_of(complement_id(gid)) == tuple(1 - b for b in table_of(gid))


def test_bad_tables():
    with pytest.raises(ConfigurationError):
        classify_truth_table((0, 1, 1))
    with pytest.raises(ConfigurationError):
        classify_truth_table((0, 1, 2, 0))


# sampling

def test_constant_low_reads_zero():
    assert sample_response(MaterialModel.constant_low(), LOW) == 0


@pytest.mark.parametrize("f", [250, 500, 1000, 2500])
def test_identity_pin_half_duty_reads_zero(f):
    stim = {**LOW, 1: f}
    # 2f sampling sees high, low, high, ... exactly half the time
    assert square_wave(Fraction(f), Fraction(0), Fraction(2 * f), 8).tolist() == [1, 0] * 4
    assert sample_response(MaterialModel.identity(1), stim) == 0


def test_phase_and_sampling_rate_shape_the_samples():
    wave = square_wave(Fraction(500), Fraction(1, 4), Fraction(4000), 8)
    assert wave.tolist() == [1, 1, 0, 0, 0, 0, 1, 1]
    # at 5 kHz a 1000 Hz wave is high on 3 of every 5 samples
    stim = {**LOW, 1: 1000}
    assert sample_response(MaterialModel.identity(1), stim, sample_rate=5000) == 1


def test_sample_response_pin_errors():
    with pytest.raises(ConfigurationError):
        sample_response(MaterialModel(), {**LOW, 9: 250})
    with pytest.raises(ConfigurationError):
        sample_response(MaterialModel(), {1: 250})


def test_same_material_same_bit():
    stim = {p: (250, 500, 1000, 2500)[p % 4] for p in PINS}
    a = sample_response(MaterialModel.random(3), stim)
    b = sample_response(MaterialModel.random(3), stim)
    assert a == b


# mining

def test_enumeration_size():
    proto = MiningProtocol()
    assert proto.n_configurations == 42 * 32 * 12 == 16128
    assert sum(1 for _ in iter_configurations(proto)) == 16128


def test_constant_low_census():
    res = mine_gates(MaterialModel.constant_low())
    assert res.census.total == 16128
    assert res.census.counts[1] == 16128
    assert sum(res.census.counts.values()) == 16128


def test_planted_product_hand_checked_configuration():
    """x on pin 1, y on pin 2, context all false, false = 250 Hz, true = 500 Hz.

    Sampled at 1 kHz, 250 Hz reads HHLL and 500 Hz reads HL.  The material is
    high whenever pin 1 or pin 2 is high: FF and TT are in-phase copies of one
    wave (half high, reads 0); FT and TF combine HHLL with HL to HHHL (reads 1).
    """
    m = MaterialModel.planted_product(1, 2)
    rows = []
    for x, y in ((0, 0), (0, 1), (1, 0), (1, 1)):
        stim = {p: 250 for p in PINS}
        stim[1] = 500 if x else 250
        stim[2] = 500 if y else 250
        rows.append(int(sample_response(m, stim, sample_rate=1000)))
    assert classify_truth_table(rows)[0] == XOR
    res = mine_gates(m)
    assert res.census.counts[XOR] > 0
    assert res.breakdown[(250, 500)].counts[XOR] > 0
    assert sum(c.counts[XOR] for c in res.breakdown.values()) == res.census.counts[XOR]


@pytest.mark.parametrize("seed", [0, 7, 42])
def test_census_conservation_and_determinism(seed):
    a = mine_gates(MaterialModel.random(seed))
    b = mine_gates(MaterialModel.random(seed))
    assert a.census == b.census
    assert a.census.total == 16128
    assert sum(a.census.counts.values()) == 16128
    assert sum(c.total for c in a.breakdown.values()) == 16128


def test_default_material_comes_from_protocol_seed():
    proto = MiningProtocol(rng_seed=5)
    assert mine_gates(None, proto).census == mine_gates(MaterialModel.random(5)).census


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_complement_symmetry(seed):
    m = MaterialModel.random(seed)
    plain = mine_gates(m).census
    inverted = mine_gates(m, invert_output=True).census
    for gid in GATES:
        assert inverted.counts[complement_id(gid)] == plain.counts[gid]
    assert inverted == plain.complemented()


def test_merge_is_order_independent():
    res = mine_gates(MaterialModel.random(1))
    parts = list(res.breakdown.values())
    fwd = GateCensus()
    for p in parts:
        fwd = fwd.merge(p)
    rev = GateCensus()
    for p in reversed(parts):
        rev = rev.merge(p)
    assert fwd == rev == res.census


def test_protocol_validation():
    with pytest.raises(ConfigurationError):
        MiningProtocol(frequencies=(250,))
    with pytest.raises(ConfigurationError):
        MiningProtocol(context_bits=4)


# reports

def test_report_empty():
    t1, t3 = census_report(GateCensus(), {})
    assert t1 == "cfg,FF,FT,TF,TT,count,gate\n"
    assert t3 == "frequency_false,frequency_true,count\n"


def test_report_constant_low():
    res = mine_gates(MaterialModel.constant_low())
    t1, t3 = census_report(res.census, res.breakdown)
    assert t1.splitlines()[1:] == ["1,F,F,F,F,16128,Constant False"]
    assert len(t3.splitlines()) == 13


def test_report_breakdown_sums_to_xor_count():
    res = mine_gates(MaterialModel.planted_product())
    _t1, t3 = census_report(res.census, res.breakdown)
    counts = [int(line.split(",")[2]) for line in t3.splitlines()[1:]]
    assert sum(counts) == res.census.counts[XOR]
    assert counts == sorted(counts, reverse=True)
    assert np.all(np.array(counts) >= 0)
