import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import constant_trace, random_trace
from gvcsim.traces import (
    UNCLASSIFIED,
    BandwidthBand,
    EmptyTraceError,
    MalformedRowError,
    NegativeBandwidthError,
    NonMonotoneTimeError,
    ThroughputTrace,
    TraceExhaustedError,
    classify_band,
    mean_bandwidth,
    parse_trace,
    serialize_trace,
    synth_trace,
    transmission_time,
)


class TestParse:
    def test_constant_trace(self):
        tr = parse_trace("time_s,bandwidth_mbps\n0,2.0\n10,2.0")
        assert len(tr) == 2
        assert tr.duration == 10.0
        assert mean_bandwidth(tr) == 2.0

    def test_negative_bandwidth_names_line(self):
        with pytest.raises(NegativeBandwidthError, match="line 3"):
            parse_trace("time_s,bandwidth_mbps\n0,2.0\n5,-1\n")

    def test_out_of_order(self):
        with pytest.raises(NonMonotoneTimeError, match="line 4"):
            parse_trace("time_s,bandwidth_mbps\n0,1\n5,1\n3,1\n")

    def test_duplicate_time_is_non_monotone(self):
        with pytest.raises(NonMonotoneTimeError):
            parse_trace("time_s,bandwidth_mbps\n0,1\n0,2\n")

    @pytest.mark.parametrize("text", ["", "\n\n", "time_s,bandwidth_mbps\n"])
    def test_empty(self, text):
        with pytest.raises(EmptyTraceError):
            parse_trace(text)

    @pytest.mark.parametrize(
        "text, pattern",
        [
            ("t,bw\n0,1\n", "header"),
            ("time_s,bandwidth_mbps\n0,abc\n", "non-numeric"),
            ("time_s,bandwidth_mbps\n0,1,2\n", "2 fields"),
            ("time_s,bandwidth_mbps\n1,1\n", "t=0"),
        ],
    )
    def test_malformed(self, text, pattern):
        with pytest.raises(MalformedRowError, match=pattern):
            parse_trace(text)

    def test_error_kinds_are_distinct(self):
        kinds = {EmptyTraceError, NegativeBandwidthError, NonMonotoneTimeError}
        assert len(kinds) == 3
        assert not issubclass(NegativeBandwidthError, NonMonotoneTimeError)


class TestRoundTrip:
    def test_synth_round_trip(self):
        tr = synth_trace(BandwidthBand.Medium, 37.5, seed=4, step=1.3)
        assert parse_trace(serialize_trace(tr)) == tr

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_round_trip(self, seed):
        tr = random_trace(np.random.default_rng(seed))
        back = parse_trace(serialize_trace(tr))
        assert back == tr
        assert back.duration == tr.duration

    def test_json_round_trip(self):
        tr = synth_trace("Low", 12.0, seed=1)
        assert ThroughputTrace.from_dict(tr.to_dict()) == tr


class TestSynth:
    @pytest.mark.parametrize("band", list(BandwidthBand))
    def test_samples_inside_band(self, band):
        tr = synth_trace(band, 300, seed=7)
        assert np.all(tr.bandwidths >= band.min_mbps)
        assert np.all(tr.bandwidths <= band.max_mbps)

    def test_low_band_range(self):
        tr = synth_trace(BandwidthBand.Low, 100, seed=3)
        assert tr.bandwidths.min() >= 0.5 and tr.bandwidths.max() <= 1.5

    def test_deterministic(self):
        assert synth_trace("High", 50, seed=9, step=0.5) == synth_trace("High", 50, seed=9, step=0.5)

    def test_seeds_differ(self):
        a = synth_trace("Medium", 2.0, seed=1, step=1.0)
        b = synth_trace("Medium", 2.0, seed=2, step=1.0)
        assert not np.array_equal(a.bandwidths, b.bandwidths)

    def test_duration_and_step(self):
        tr = synth_trace("Medium", 10.5, seed=0, step=2.0)
        assert tr.duration == 10.5
        np.testing.assert_allclose(tr.times[:-1], [0, 2, 4, 6, 8, 10])

    @pytest.mark.parametrize("kw", [{"duration": 0}, {"duration": -1}, {"step": 0}])
    def test_rejects_nonpositive(self, kw):
        args = {"band": "Low", "duration": 10, "seed": 0, "step": 1.0} | kw
        with pytest.raises(ValueError):
            synth_trace(**args)

    @settings(max_examples=40, deadline=None)
    @given(
        st.sampled_from(list(BandwidthBand)),
        st.floats(0.5, 400),
        st.integers(0, 10_000),
        st.floats(0.1, 5.0),
    )
    def test_classifies_into_own_band(self, band, duration, seed, step):
        assert classify_band(synth_trace(band, duration, seed=seed, step=step)) is band


class TestClassify:
    @pytest.mark.parametrize(
        "mbps, expected",
        [(0.9, BandwidthBand.Low), (2.0, BandwidthBand.Medium), (4.0, BandwidthBand.High), (10.0, UNCLASSIFIED), (0.2, UNCLASSIFIED)],
    )
    def test_constant(self, mbps, expected):
        assert classify_band(constant_trace(mbps, 30)) == expected

    def test_boundary_is_half_open(self):
        assert classify_band(constant_trace(1.5, 10)) is BandwidthBand.Medium
        assert classify_band(constant_trace(3.0, 10)) is BandwidthBand.High
        assert classify_band(constant_trace(5.0, 10)) == UNCLASSIFIED

    def test_time_weighted(self):
        # 1 s at 1 Mbps + 3 s at 3 Mbps -> mean 2.5
        tr = ThroughputTrace([0, 1], [1.0, 3.0], duration=4)
        assert mean_bandwidth(tr) == pytest.approx(2.5)
        assert classify_band(tr) is BandwidthBand.Medium

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 10), st.floats(0.1, 100))
    def test_constant_mean(self, mbps, duration):
        assert mean_bandwidth(constant_trace(mbps, duration)) == pytest.approx(mbps)


class TestTransmission:
    def test_constant_rate(self):
        assert transmission_time(constant_trace(2.0, 10), 0.0, 1.0) == pytest.approx(0.5)

    def test_zero_bits(self):
        assert transmission_time(constant_trace(2.0, 10), 3.0, 0.0) == 0.0

    def test_piecewise(self):
        tr = ThroughputTrace([0, 1], [1.0, 3.0], duration=10)
        assert transmission_time(tr, 0.0, 2.5) == pytest.approx(1.5)

    def test_starts_mid_segment(self):
        tr = ThroughputTrace([0, 1], [1.0, 3.0], duration=10)
        # 0.5 Mbit at 1 Mbps then 1.5 Mbit at 3 Mbps
        assert transmission_time(tr, 0.5, 2.0) == pytest.approx(1.0)

    def test_crosses_zero_bandwidth_gap(self):
        tr = ThroughputTrace([0, 1, 3], [1.0, 0.0, 2.0], duration=10)
        assert transmission_time(tr, 0.0, 2.0) == pytest.approx(3.5)

    def test_exhausted_reports_remaining(self):
        with pytest.raises(TraceExhaustedError) as info:
            transmission_time(constant_trace(1.0, 5), 2.0, 4.0)
        assert info.value.bits_remaining == pytest.approx(1.0)

    def test_bad_start(self):
        with pytest.raises(ValueError):
            transmission_time(constant_trace(1.0, 5), 6.0, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_delivers_exact_bits(self, seed):
        rng = np.random.default_rng(seed)
        tr = random_trace(rng)
        start = rng.uniform(0, tr.duration)
        capacity = tr.delivered(start, tr.duration)
        bits = rng.uniform(0, capacity)
        tau = transmission_time(tr, start, bits)
        assert tr.delivered(start, start + tau) == pytest.approx(bits, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1.01, 10))
    def test_scaling_never_slows(self, seed, factor):
        rng = np.random.default_rng(seed)
        tr = random_trace(rng, allow_zero=False)
        start = rng.uniform(0, tr.duration / 2)
        bits = rng.uniform(0, tr.delivered(start, tr.duration))
        assert transmission_time(tr.scaled(factor), start, bits) <= transmission_time(tr, start, bits) + 1e-12


def test_trace_is_immutable():
    tr = constant_trace(1.0, 3)
    with pytest.raises(ValueError):
        tr.bandwidths[0] = 5.0


@pytest.mark.parametrize(
    "times, bws",
    [([1.0], [1.0]), ([0, 0], [1, 1]), ([0], [-1.0]), ([0, 1], [1.0]), ([], [])],
)
def test_trace_invariants(times, bws):
    with pytest.raises(ValueError):
        ThroughputTrace(times, bws)
