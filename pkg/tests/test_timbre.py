import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sine
from talim.errors import FewerThanTwoPeaks, SilentClip, TalimError, ZeroSpectrum
from talim.harmonics import HarmonicSeries, Peak
from talim.signal_io import AudioClip
from talim.spectrum import Envelope, Ltas, compute_ltas
from talim.synth import SynthSpec, synth_stroke
from talim.timbre import (
    FEATURE_NAMES,
    DISPLAY_LABELS,
    FeatureParams,
    TimbreVector,
    attack_time,
    bark,
    brightness,
    centroid,
    compute_all,
    erb_rate,
    inharmonicity,
    irregularity,
    odd_even,
    peak_diffs,
    rms_power_db,
    tristimulus,
)

SR = 44100
amp_lists = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=20).filter(lambda a: sum(a) > 1e-6)


def line_ltas(freqs, amps, df=1.0, top=22050.0):
    grid = np.arange(0.0, top + df, df)
    mag = np.zeros_like(grid)
    for f, a in zip(freqs, amps):
        mag[int(round(f / df))] += a
    return Ltas(grid, mag, 1, int(2 * top))


class TestTristimulus:
    def test_lone_fundamental(self):
        assert tristimulus([1, 0, 0, 0, 0]) == (1.0, 0.0, 0.0)

    def test_ramp(self):
        t = tristimulus([1, 2, 3, 4, 5, 6])
        np.testing.assert_allclose(t, (1 / 21, 9 / 21, 11 / 21), atol=1e-12)
        np.testing.assert_allclose(t, (0.047619, 0.428571, 0.523810), atol=1e-6)

    def test_reference_means_nearly_sum_to_one(self):
        assert 0.017563 + 0.079800 + 0.902487 == pytest.approx(0.999850, abs=1e-9)

    def test_short_series_pads_with_zeros(self):
        assert tristimulus([2.0, 2.0]) == (0.5, 0.5, 0.0)

    def test_zero(self):
        with pytest.raises(ZeroSpectrum):
            tristimulus([0, 0, 0])

    def test_accepts_series(self):
        assert tristimulus(HarmonicSeries.from_amps([1, 1, 1, 1, 1]))[2] == pytest.approx(0.2)


class TestOddEven:
    def test_flat_five(self):
        odd, even = odd_even([1, 1, 1, 1, 1])
        assert odd == pytest.approx(0.4)
        assert even == pytest.approx(0.4)

    def test_even_only(self):
        assert odd_even([0, 1, 0, 1]) == (0.0, 1.0)

    def test_reference_means_nearly_sum_to_one(self):
        assert 0.479525 + 0.502688 + 0.017563 == pytest.approx(0.999776, abs=1e-9)

    def test_zero(self):
        with pytest.raises(ZeroSpectrum):
            odd_even([0, 0])


class TestIrregularity:
    def test_flat(self):
        assert irregularity([1, 1, 1]) == 0.0

    def test_descending(self):
        assert irregularity([3, 2, 1]) == pytest.approx(2 / 14)

    def test_can_exceed_one(self):
        assert irregularity([1, 0, 1, 0]) == pytest.approx(1.5)

    def test_zero(self):
        with pytest.raises(ZeroSpectrum):
            irregularity([0, 0, 0])


class TestInharmonicity:
    def test_exact(self):
        assert inharmonicity(HarmonicSeries.from_amps([1, 0.5, 0.3], f0=200)) == pytest.approx(0)

    @pytest.mark.parametrize("factor,expected", [(1.01, 1.0), (0.99, -1.0)])
    def test_uniform_shift(self, factor, expected):
        k = np.arange(1, 6)
        s = HarmonicSeries(200.0, k, k * 200.0 * factor, np.ones(5))
        assert inharmonicity(s) == pytest.approx(expected, abs=1e-9)

    def test_weighting(self):
        # only partial 2 is off (+2%), carrying a quarter of the weight
        s = HarmonicSeries(100.0, [1, 2], [100.0, 204.0], [3.0, 1.0])
        assert inharmonicity(s) == pytest.approx(0.5)


class TestAuditoryCentroids:
    def test_bark_at_1k(self):
        assert float(bark(1000.0)) == pytest.approx(8.51, abs=0.01)

    def test_erb_at_1k(self):
        assert float(erb_rate(1000.0)) == pytest.approx(21.4 * math.log10(5.37), rel=1e-12)
        assert float(erb_rate(1000.0)) == pytest.approx(15.62, abs=0.01)

    def test_single_line(self):
        ltas = line_ltas([1000.0], [1.0])
        assert brightness(ltas) == pytest.approx(float(bark(1000.0)))
        assert centroid(ltas) == pytest.approx(float(erb_rate(1000.0)))

    def test_two_equal_lines(self):
        ltas = line_ltas([300.0, 4000.0], [0.5, 0.5])
        assert brightness(ltas) == pytest.approx(float(bark(300.0) + bark(4000.0)) / 2)
        assert centroid(ltas) == pytest.approx(float(erb_rate(300.0) + erb_rate(4000.0)) / 2)

    def test_scale_invariant(self):
        a = line_ltas([300.0, 900.0, 4000.0], [0.2, 0.5, 0.1])
        b = Ltas(a.bin_freqs, a.magnitudes * 10, 1, a.sample_rate)
        assert brightness(b) == pytest.approx(brightness(a), rel=1e-12)
        assert centroid(b) == pytest.approx(centroid(a), rel=1e-12)

    def test_zero(self):
        ltas = line_ltas([], [])
        with pytest.raises(ZeroSpectrum):
            brightness(ltas)
        with pytest.raises(ZeroSpectrum):
            centroid(ltas)

    def test_bark_range(self):
        assert 0 < float(bark(22050.0)) < 25


class TestAttackTime:
    def test_linear_rise(self):
        hop = 0.001
        t = np.arange(0, 0.3, hop)
        rms = np.where(t <= 0.1, t / 0.1, np.exp(-(t - 0.1) / 0.05))
        assert attack_time(Envelope(t, rms)) == pytest.approx(0.09, abs=hop)

    def test_instant_onset(self):
        t = np.arange(10) * 0.001
        assert attack_time(Envelope(t, np.linspace(1.0, 0.1, 10))) == 0.0

    def test_silent(self):
        with pytest.raises(SilentClip):
            attack_time(Envelope(np.arange(5.0), np.zeros(5)))

    @pytest.mark.parametrize("f0", [259.0, 137.0, 420.0])
    def test_synth_rise(self, f0):
        spec = SynthSpec(f0, (1.0,), attack=0.012, duration=0.5)
        clip = synth_stroke(spec)
        # analytic envelope ramp(t) * exp(-t / tau): peak at the ramp end, onset at 10 %
        t = np.arange(0, 0.1, 1e-6)
        env = np.minimum(t / 0.012, 1.0) * np.exp(-t / spec.decay[0])
        oracle = t[np.argmax(env)] - t[np.argmax(env >= 0.1 * env.max())]
        assert compute_all(clip).attack_time == pytest.approx(oracle, abs=0.003)


class TestRmsPower:
    def test_full_scale_square(self):
        x = np.where(np.arange(1000) % 20 < 10, 1.0, -1.0)
        assert rms_power_db(AudioClip(x, SR)) == pytest.approx(0.0, abs=1e-12)

    def test_half_sine(self):
        clip = AudioClip(sine(441.0, amp=0.5), SR)
        assert rms_power_db(clip) == pytest.approx(20 * math.log10(0.5 / math.sqrt(2)), abs=1e-6)
        assert rms_power_db(clip) == pytest.approx(-9.03, abs=0.01)

    def test_silence_floor(self):
        assert rms_power_db(AudioClip(np.zeros(100), SR)) == -120.0


class TestPeakDiffs:
    def test_constructed(self):
        fd, ad = peak_diffs([Peak(400.0, -10.0), Peak(703.0, -18.03)])
        assert fd == pytest.approx(303.0)
        assert ad == pytest.approx(8.03)

    def test_order_irrelevant(self):
        assert peak_diffs([Peak(703.0, -18.03), Peak(90.0, -40), Peak(400.0, -10.0)]) == \
            pytest.approx((303.0, 8.03))

    def test_equal(self):
        assert peak_diffs([Peak(100.0, -3.0), Peak(250.0, -3.0)])[1] == 0.0

    def test_too_few(self):
        with pytest.raises(FewerThanTwoPeaks):
            peak_diffs([Peak(100.0, -3.0)])

    def test_two_sine_clip(self):
        x = sine(400.0, amp=0.6) + sine(703.0, amp=0.6 * 10 ** (-8.03 / 20))
        v = compute_all(AudioClip(x, SR))
        assert v.peak_freq_diff == pytest.approx(303.0, abs=SR / 4096)
        assert v.peak_amp_diff == pytest.approx(8.03, abs=0.5)


class TestComputeAll:
    def test_reference_like_stroke(self):
        amps = (1.0, 0.8, 0.6, 0.4, 0.2)
        clip = synth_stroke(SynthSpec(259.0, amps, attack=0.012))
        v = compute_all(clip)
        assert v.violations() == []
        assert v.complete
        np.testing.assert_allclose((v.tristimulus1, v.tristimulus2, v.tristimulus3),
                                   tristimulus(amps), atol=0.03)
        np.testing.assert_allclose((v.odd_param, v.even_param), odd_even(amps), atol=0.03)
        assert v.irregularity == pytest.approx(irregularity(amps), abs=0.03)
        assert v.inharmonicity == pytest.approx(0.0, abs=0.01)
        assert v.pitch == pytest.approx(259.0, rel=0.01)
        assert v.rms_power == pytest.approx(
            10 * math.log10(np.mean(clip.samples ** 2)), abs=1e-9)
        assert v.peak_freq_diff == pytest.approx(259.0, abs=SR / 4096)
        assert v.peak_amp_diff == pytest.approx(20 * math.log10(1 / 0.8), abs=0.5)
        assert float(bark(259.0)) < v.brightness < float(bark(5 * 259.0))
        assert float(erb_rate(259.0)) < v.centroid < float(erb_rate(5 * 259.0))

    def test_silence(self):
        with pytest.raises(SilentClip):
            compute_all(AudioClip(np.zeros(SR), SR))

    def test_pure_sine(self, caplog):
        v = compute_all(AudioClip(sine(259.0), SR))
        assert v.tristimulus1 == pytest.approx(1.0, abs=0.01)
        assert v.odd_param == pytest.approx(0.0, abs=0.01)
        assert v.even_param == pytest.approx(0.0, abs=0.01)
        assert v.irregularity > 0.9
        assert v.inharmonicity == pytest.approx(0.0, abs=0.01)
        # one LTAS peak only: the two-peak differences are undefined
        assert math.isnan(v.peak_freq_diff) and math.isnan(v.peak_amp_diff)
        assert not v.complete
        assert v.violations() == []
        assert "two-peak" in caplog.text

    def test_deterministic(self):
        clip = synth_stroke(SynthSpec(300.0, (0.5, 1.0, 0.3)))
        a, b = compute_all(clip), compute_all(clip)
        assert a.as_array().tobytes() == b.as_array().tobytes()

    def test_error_tagged_with_feature(self, rng):
        clip = AudioClip(rng.uniform(-0.5, 0.5, SR), SR)
        with pytest.raises(TalimError) as info:
            compute_all(clip)
        assert info.value.feature == "pitch"
        assert str(info.value).startswith("[pitch]")

    @pytest.mark.parametrize("c", [0.1, 0.3, 0.5, 1.0])
    def test_scaling(self, c):
        clip = synth_stroke(SynthSpec(210.0, (0.4, 1.0, 0.7, 0.2, 0.5, 0.1)))
        a, b = compute_all(clip), compute_all(clip.scaled(c))
        for name in ("tristimulus1", "tristimulus2", "tristimulus3", "odd_param", "even_param",
                     "irregularity", "brightness", "centroid", "inharmonicity"):
            assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-6), name
        assert b.rms_power - a.rms_power == pytest.approx(20 * math.log10(c), abs=0.01)


class TestTimbreVector:
    def test_field_order(self):
        assert FEATURE_NAMES == (
            "brightness", "tristimulus1", "tristimulus2", "tristimulus3", "odd_param",
            "even_param", "irregularity", "inharmonicity", "centroid", "pitch", "attack_time",
            "rms_power", "peak_freq_diff", "peak_amp_diff")
        assert set(DISPLAY_LABELS) == set(FEATURE_NAMES)

    def test_json_has_fourteen_plain_floats(self):
        v = compute_all(synth_stroke(SynthSpec(259.0, (1.0, 0.6, 0.3))))
        d = json.loads(json.dumps(v.as_dict()))
        assert list(d) == list(FEATURE_NAMES)
        assert all(type(getattr(v, k)) is float for k in FEATURE_NAMES)

    def test_violations_detected(self):
        v = TimbreVector(1, 0.5, 0.5, 0.5, 0.2, 0.2, 0, 0, 1, 100, -1, -10, 10, 1)
        bad = v.violations()
        assert "t1+t2+t3 != 1" in bad
        assert "attack_time < 0" in bad

    def test_envelope_window_rounds_to_periods(self):
        p = FeatureParams()
        assert p.envelope_window(200.0) == pytest.approx(10.0)
        assert p.envelope_window(259.0) == pytest.approx(3 * 1000 / 259.0)
        assert p.envelope_window(50.0) == pytest.approx(20.0)
        assert FeatureParams(pitch_synchronous=False).envelope_window(259.0) == 10.0


@settings(max_examples=200, deadline=None)
@given(amp_lists)
def test_ratio_identities(amps):
    t1, t2, t3 = tristimulus(amps)
    odd, even = odd_even(amps)
    assert t1 + t2 + t3 == pytest.approx(1.0, abs=1e-9)
    assert t1 + odd + even == pytest.approx(1.0, abs=1e-9)
    for v in (t1, t2, t3, odd, even):
        assert -1e-12 <= v <= 1 + 1e-12
    assert irregularity(amps) >= 0


@settings(max_examples=100, deadline=None)
@given(amp_lists, st.floats(1e-3, 1e3))
def test_ratio_features_scale_free(amps, c):
    a = np.asarray(amps)
    np.testing.assert_allclose(tristimulus(a * c), tristimulus(a), atol=1e-12)
    np.testing.assert_allclose(odd_even(a * c), odd_even(a), atol=1e-12)
    if np.any(a > 0):
        assert irregularity(a * c) == pytest.approx(irregularity(a), abs=1e-9)
