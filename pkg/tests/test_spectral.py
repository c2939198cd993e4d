"""Welch PSD, band powers, asymmetry features, outlier exclusion."""

import math

import numpy as np
import pytest

from corteml.errors import ComputeError
from corteml.signal import ELECTRODES, EegRecording, SegmentedRecording
from corteml.spectral import (
    BANDS,
    FEATURE_NAMES,
    SubjectRecord,
    asymmetry,
    band_power,
    exclude_outliers,
    extract_features,
    welch_psd,
)
from corteml.synth import SynthSpec, gen_subject, subject_features

FS = 256.0


def sine(freq, seconds=8.0, fs=FS, amplitude=1.0, phase=0.0):
    t = np.arange(int(seconds * fs)) / fs
    return amplitude * np.sin(2 * np.pi * freq * t + phase)


class TestWelch:
    def test_zero_signal(self):
        freqs, psd = welch_psd(np.zeros(2048), FS)
        assert np.all(psd == 0.0)

    def test_unit_sine_total_power(self):
        freqs, psd = welch_psd(sine(10.0), FS)
        total = np.trapezoid(psd, freqs)
        assert abs(total - 0.5) <= 0.05 * 0.5

    def test_white_noise_variance(self):
        totals = []
        for seed in range(50):
            x = np.random.default_rng(seed).normal(size=2048)
            freqs, psd = welch_psd(x, FS)
            totals.append(np.trapezoid(psd, freqs))
        assert abs(np.mean(totals) - 1.0) <= 0.10

    def test_parameter_errors(self):
        with pytest.raises(ComputeError, match="exceeds"):
            welch_psd(np.zeros(100), FS, seg_len=512)
        with pytest.raises(ComputeError, match="< 8"):
            welch_psd(np.zeros(100), FS, seg_len=4)
        with pytest.raises(ComputeError, match="overlap"):
            welch_psd(np.zeros(1024), FS, overlap=1.0)


class TestBandPower:
    def test_alpha_captures_sine(self):
        freqs, psd = welch_psd(sine(10.0), FS)
        alpha = band_power(freqs, psd, BANDS["alpha"])
        total = band_power(freqs, psd, (0.5, 50.0))
        assert alpha >= 0.95 * total

    def test_zero_signal_every_band(self):
        freqs, psd = welch_psd(np.zeros(2048), FS)
        for band in BANDS.values():
            assert band_power(freqs, psd, band) == 0.0

    def test_bands_partition_total(self):
        x = np.random.default_rng(11).normal(size=2048) + sine(10.0)
        freqs, psd = welch_psd(x, FS)
        total = band_power(freqs, psd, (0.5, 50.0))
        parts = sum(band_power(freqs, psd, band) for band in BANDS.values())
        assert abs(parts - total) <= 0.01 * total

    def test_band_outside_grid(self):
        freqs, psd = welch_psd(np.zeros(2048), FS)
        with pytest.raises(ComputeError, match="outside"):
            band_power(freqs, psd, (100.0, 200.0))

    def test_time_reversal_invariance(self):
        # length chosen so the welch segment grid tiles exactly
        x = np.random.default_rng(5).normal(size=2048)
        freqs, psd = welch_psd(x, FS)
        freqs_r, psd_r = welch_psd(x[::-1], FS)
        for band in BANDS.values():
            a = band_power(freqs, psd, band)
            b = band_power(freqs_r, psd_r, band)
            assert abs(a - b) <= 1e-9 * max(a, 1e-30)


class TestAsymmetry:
    def test_equal_powers(self):
        assert asymmetry(3.7, 3.7) == 0.0

    def test_ln2(self):
        assert abs(asymmetry(1.0, 2.0) - 0.693147) <= 1e-6

    def test_ln_identity(self):
        p = 2.31
        assert abs(asymmetry(p, p / math.e) - (-1.0)) <= 1e-12

    def test_degenerate_power(self):
        with pytest.raises(ComputeError, match="degenerate power"):
            asymmetry(0.0, 1.0)
        with pytest.raises(ComputeError, match="degenerate power"):
            asymmetry(1.0, -2.0)

    def test_antisymmetry_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a, b = rng.uniform(0.01, 100.0, 2)
            assert asymmetry(a, b) == -asymmetry(b, a)

    def test_scale_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            a, b = rng.uniform(0.01, 100.0, 2)
            k = rng.uniform(1e-6, 1e6)
            assert abs(asymmetry(k * a, k * b) - asymmetry(a, b)) <= 1e-12


def mirrored_recording(seconds=8.0, seed=0):
    """Left and right channels bit-identical within each pair."""
    rng = np.random.default_rng(seed)
    base = {name: rng.normal(size=int(seconds * FS)) for name in ("f", "c", "p", "m1", "m2", "m3")}
    chans = {
        "F3": base["f"].copy(), "F4": base["f"].copy(),
        "C3": base["c"].copy(), "C4": base["c"].copy(),
        "P3": base["p"].copy(), "P4": base["p"].copy(),
        "Fz": base["m1"], "Cz": base["m2"], "POz": base["m3"],
    }
    return EegRecording(sampling_rate_hz=FS, channels=chans)


class TestExtractFeatures:
    def test_mirror_symmetry_gives_zero(self):
        seg = SegmentedRecording(
            segments={s: mirrored_recording(seed=i) for i, s in enumerate(("pre", "video", "post"))}
        )
        feats = extract_features(seg)
        for s in ("pre", "video", "post"):
            assert np.all(feats[s] == 0.0)

    def test_planted_alpha_ratio_recovered(self):
        spec = SynthSpec(
            n_subjects=8, fs=128.0, segment_seconds=(10.0, 10.0, 10.0),
            coupling=2.0, noise_sd=0.1, seed=5,
        )
        lo, hi = spec.score_range
        for idx in range(4):
            subject = gen_subject(spec, idx)
            target = spec.coupling * (subject.score - (lo + hi) / 2) / (hi - lo)
            feats = subject_features(subject)
            fa_alpha = feats.features["pre"][FEATURE_NAMES.index("fa_alpha")]
            assert abs(fa_alpha - target) <= 0.05

    def test_deterministic_bit_exact(self):
        seg = SegmentedRecording(
            segments={
                s: EegRecording(
                    sampling_rate_hz=FS,
                    channels={
                        e: np.random.default_rng(hash((s, e)) % 2**32).normal(size=1024)
                        for e in ELECTRODES
                    },
                )
                for s in ("pre", "video", "post")
            }
        )
        a = extract_features(seg)
        b = extract_features(seg)
        for s in ("pre", "video", "post"):
            assert np.array_equal(a[s], b[s])

    def test_common_gain_leaves_features_unchanged(self):
        rng = np.random.default_rng(8)
        chans = {e: rng.normal(size=1024) + sine(10.0, seconds=4.0) for e in ELECTRODES}
        rec = EegRecording(sampling_rate_hz=FS, channels=chans)
        seg = SegmentedRecording(segments={s: rec for s in ("pre", "video", "post")})
        base = extract_features(seg)["pre"]
        for gain in (3.0, 0.2):
            scaled = EegRecording(
                sampling_rate_hz=FS, channels={e: gain * x for e, x in chans.items()}
            )
            seg_g = SegmentedRecording(segments={s: scaled for s in ("pre", "video", "post")})
            got = extract_features(seg_g)["pre"]
            assert np.abs(got - base).max() <= 1e-9


def make_subject(sid, value, segment_label="pre"):
    feats = {s: np.zeros(15) for s in ("pre", "video", "post")}
    feats[segment_label] = feats[segment_label].copy()
    feats[segment_label][0] = value
    return SubjectRecord(subject_id=sid, empathy_score=60, features=feats)


class TestExcludeOutliers:
    def test_identical_subjects_keep_all(self):
        subjects = [make_subject(f"s{i}", 0.0) for i in range(6)]
        kept, removed = exclude_outliers(subjects)
        assert len(kept) == 6 and not removed

    def test_planted_outlier_removed(self):
        # base values on a tight grid, one value far outside; the z-score
        # oracle below recomputes the rule from scratch
        base = np.linspace(-1.0, 1.0, 19)
        values = np.append(base, 8.0)
        mean, std = values.mean(), values.std()
        z = (values - mean) / std
        assert (np.abs(z) > 3.0).sum() == 1 and abs(z[-1]) > 3.0
        subjects = [make_subject(f"s{i:02d}", v) for i, v in enumerate(values)]
        kept, removed = exclude_outliers(subjects, threshold=3.0)
        assert [r.subject_id for r in removed] == ["s19"]
        assert len(kept) == 19

    def test_infinite_threshold_keeps_all(self):
        rng = np.random.default_rng(0)
        subjects = [make_subject(f"s{i}", rng.normal()) for i in range(12)]
        kept, removed = exclude_outliers(subjects, threshold=math.inf)
        assert not removed

    def test_insufficient_cohort(self):
        subjects = [make_subject("a", 0.0), make_subject("b", 1.0)]
        with pytest.raises(ComputeError, match="insufficient cohort"):
            exclude_outliers(subjects)

    def test_single_pass_not_iterated(self):
        # after the extreme subject is dropped, the next one would exceed
        # the threshold; a single pass must keep it
        values = [0.0] * 17 + [1.0, 10.0]
        subjects = [make_subject(f"s{i:02d}", v) for i, v in enumerate(values)]
        kept, removed = exclude_outliers(subjects, threshold=3.0)
        assert [r.subject_id for r in removed] == ["s18"]
        kept2, removed2 = exclude_outliers(kept, threshold=3.0)
        assert [r.subject_id for r in removed2] == ["s17"]

    def test_pooled_mode(self):
        subjects = [make_subject(f"s{i:02d}", v, "video") for i, v in enumerate([0.0] * 19 + [9.0])]
        kept, removed = exclude_outliers(subjects, threshold=3.0, per_segment=False)
        assert [r.subject_id for r in removed] == ["s19"]
