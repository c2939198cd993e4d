"""Synthetic EEG cohorts with a planted asymmetry-to-score coupling.

Each channel is one band-limited oscillator per band (fixed center
frequencies, random phases) plus white noise. The right-frontal alpha
amplitude is scaled so the expected frontal-alpha log-power asymmetry
equals coupling * (score - midpoint) / (hi - lo); every other feature
has zero expected asymmetry. Everything is a pure function of
(seed, subject index).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ComputeError, DataError
from .signal import ELECTRODES, SEGMENTS, EegRecording, SegmentedRecording, bandpass_filter, write_recording
from .spectral import BANDS, SubjectRecord, extract_features, table_from_records, FeatureTable

BAND_CENTERS_HZ = {"delta": 2.0, "theta": 6.0, "alpha": 10.0, "beta": 20.0, "gamma": 40.0}
OSCILLATOR_AMPLITUDE_UV = 1.0


@dataclass(frozen=True)
class SynthSpec:
    n_subjects: int = 12
    fs: float = 128.0
    segment_seconds: tuple[float, float, float] = (20.0, 20.0, 20.0)
    coupling: float = 1.0
    noise_sd: float = 0.2
    score_range: tuple[int, int] = (49, 86)
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 8:
            raise ComputeError(f"n_subjects must be >= 8, got {self.n_subjects}")
        if not self.fs > 100.0:
            raise ComputeError(f"fs must exceed 100 Hz, got {self.fs}")
        if not math.isfinite(self.coupling):
            raise ComputeError("coupling must be finite")
        if self.noise_sd < 0:
            raise ComputeError("noise_sd must be non-negative")
        if len(self.segment_seconds) != 3 or any(s < 2.0 for s in self.segment_seconds):
            raise ComputeError("each segment must last at least 2 seconds")
        lo, hi = self.score_range
        if not (0 <= lo < hi <= 96):
            raise ComputeError(f"score range must satisfy 0 <= lo < hi <= 96, got {self.score_range}")


@dataclass
class SynthSubject:
    subject_id: str
    score: int
    recordings: dict[str, EegRecording]


def subject_id(index: int) -> str:
    return f"sub{index + 1:03d}"


def gen_subject(spec: SynthSpec, index: int) -> SynthSubject:
    """One subject's three raw segment recordings plus the empathy score."""
    rng = np.random.default_rng([spec.seed, index])
    lo, hi = spec.score_range
    score = int(rng.integers(lo, hi + 1))
    target = spec.coupling * (score - (lo + hi) / 2.0) / (hi - lo)

    # phases fixed per (channel, band), shared by the three segments
    phases = {
        ch: {band: rng.uniform(0.0, 2.0 * math.pi) for band in BANDS}
        for ch in ELECTRODES
    }
    amplitudes = {ch: dict.fromkeys(BANDS, OSCILLATOR_AMPLITUDE_UV) for ch in ELECTRODES}
    # power ratio e^target between F4 and F3 alpha oscillators
    amplitudes["F4"]["alpha"] = OSCILLATOR_AMPLITUDE_UV * math.exp(target / 2.0)

    recordings = {}
    for label, seconds in zip(SEGMENTS, spec.segment_seconds):
        n = int(round(seconds * spec.fs))
        t = np.arange(n) / spec.fs
        channels = {}
        for ch in ELECTRODES:
            x = np.zeros(n)
            for band, f_c in BAND_CENTERS_HZ.items():
                x += amplitudes[ch][band] * np.sin(2.0 * math.pi * f_c * t + phases[ch][band])
            if spec.noise_sd > 0:
                x += rng.normal(0.0, spec.noise_sd, n)
            channels[ch] = x
        recordings[label] = EegRecording(sampling_rate_hz=spec.fs, channels=channels)
    return SynthSubject(subject_id=subject_id(index), score=score, recordings=recordings)


def gen_dataset(spec: SynthSpec, outdir: str | Path) -> Path:
    """Write one CSV per (subject, segment) plus manifest.csv; returns the
    manifest path."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {outdir}: {exc}")
    manifest = outdir / "manifest.csv"
    rows = []
    for index in range(spec.n_subjects):
        subject = gen_subject(spec, index)
        for label in SEGMENTS:
            write_recording(outdir / f"{subject.subject_id}_{label}.csv", subject.recordings[label])
        rows.append((subject.subject_id, subject.score))
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("subject", "score", "coupling", "seed"))
        for sid, score in rows:
            writer.writerow([sid, score, repr(spec.coupling), spec.seed])
    return manifest


def subject_features(subject: SynthSubject) -> SubjectRecord:
    """Band-pass and extract the 15 features per segment for one subject."""
    segmented = SegmentedRecording(
        segments={label: bandpass_filter(rec) for label, rec in subject.recordings.items()}
    )
    return SubjectRecord(
        subject_id=subject.subject_id,
        empathy_score=subject.score,
        features=extract_features(segmented),
    )


def synth_feature_table(spec: SynthSpec) -> FeatureTable:
    """In-memory synth -> filter -> extract, no outlier exclusion."""
    records = [subject_features(gen_subject(spec, i)) for i in range(spec.n_subjects)]
    return table_from_records(records)
