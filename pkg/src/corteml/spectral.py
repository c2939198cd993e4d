"""Band powers, hemispheric log-power asymmetry, outlier exclusion.

The 15-dimensional feature vector is ln(P_right) - ln(P_left) for the
three electrode pairs (frontal, central, parietal) in the five classic
bands. Positive values mean stronger right-hemisphere power.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import welch
from scipy.signal.windows import hann

from .errors import ComputeError, DataError
from .signal import ASYMMETRY_PAIRS, ELECTRODES, SEGMENTS, EegRecording, SegmentedRecording

# canonical band edges; gamma capped at the 50 Hz filter ceiling
BANDS = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 50.0),
}
REGIONS = ("frontal", "central", "parietal")

# region-major canonical feature order: fa_delta ... pa_gamma
FEATURE_NAMES = tuple(f"{r[0]}a_{b}" for r in REGIONS for b in BANDS)
FEATURE_DISPLAY = {
    f"{r[0]}a_{b}": f"{r} {b}" for r in REGIONS for b in BANDS
}

EMPATHY_SCORE_RANGE = (0, 96)

WELCH_SEG_SECONDS = 2.0
WELCH_OVERLAP = 0.5


def welch_psd(
    samples: np.ndarray,
    fs: float,
    seg_len: int | None = None,
    overlap: float = WELCH_OVERLAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Welch PSD (Hann window, density scaling) -> (freqs, psd in uV^2/Hz)."""
    samples = np.asarray(samples, dtype=np.float64)
    if seg_len is None:
        seg_len = int(round(WELCH_SEG_SECONDS * fs))
    if not 0.0 <= overlap < 1.0:
        raise ComputeError(f"overlap must be in [0, 1), got {overlap}")
    if seg_len < 8:
        raise ComputeError(f"welch segment length {seg_len} < 8 samples")
    if seg_len > len(samples):
        raise ComputeError(
            f"welch segment length {seg_len} exceeds signal length {len(samples)}"
        )
    # symmetric window so time-reversed signals give identical band powers
    freqs, psd = welch(
        samples,
        fs=fs,
        window=hann(seg_len, sym=True),
        nperseg=seg_len,
        noverlap=int(seg_len * overlap),
        detrend="constant",
        scaling="density",
    )
    return freqs, psd


def band_power(freqs: np.ndarray, psd: np.ndarray, band: tuple[float, float]) -> float:
    """Integrate a PSD over one band (trapezoid over the in-band bins)."""
    low, high = band
    if low < 0 or high > freqs[-1] + 1e-9:
        raise ComputeError(
            f"band [{low}, {high}] outside the PSD grid [0, {freqs[-1]}]"
        )
    mask = (freqs >= low - 1e-12) & (freqs <= high + 1e-12)
    if mask.sum() < 2:
        raise ComputeError(f"band [{low}, {high}] narrower than the PSD grid")
    return float(np.trapezoid(psd[mask], freqs[mask]))


def band_power_table(rec: EegRecording) -> dict[tuple[str, str], float]:
    """Mean band power per (electrode, band) for one recording."""
    table = {}
    for electrode in ELECTRODES:
        freqs, psd = welch_psd(rec.channels[electrode], rec.sampling_rate_hz)
        for band_name, edges in BANDS.items():
            table[(electrode, band_name)] = band_power(freqs, psd, edges)
    return table


def asymmetry(p_left: float, p_right: float) -> float:
    """ln(P_right) - ln(P_left); positive means right-dominant power."""
    if p_left <= 0.0 or p_right <= 0.0:
        raise ComputeError(
            f"degenerate power: asymmetry needs positive powers, got ({p_left}, {p_right})"
        )
    return math.log(p_right) - math.log(p_left)


def extract_features(seg: SegmentedRecording) -> dict[str, np.ndarray]:
    """15 asymmetry features per segment, in canonical order."""
    out = {}
    for label in SEGMENTS:
        powers = band_power_table(seg[label])
        values = np.empty(len(FEATURE_NAMES))
        k = 0
        for region in REGIONS:
            right, left = ASYMMETRY_PAIRS[region]
            for band_name in BANDS:
                try:
                    values[k] = asymmetry(
                        powers[(left, band_name)], powers[(right, band_name)]
                    )
                except ComputeError as exc:
                    raise ComputeError(f"{label}/{region}-{band_name}: {exc}") from exc
                k += 1
        out[label] = values
    return out


@dataclass
class SubjectRecord:
    """One subject: empathy score plus per-segment feature vectors."""

    subject_id: str
    empathy_score: int
    features: dict[str, np.ndarray]

    def __post_init__(self):
        lo, hi = EMPATHY_SCORE_RANGE
        if not lo <= self.empathy_score <= hi:
            raise DataError(
                f"subject {self.subject_id}: empathy score {self.empathy_score} "
                f"outside [{lo}, {hi}]"
            )
        for label, vec in self.features.items():
            if label not in SEGMENTS:
                raise DataError(f"subject {self.subject_id}: unknown segment {label!r}")
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (len(FEATURE_NAMES),):
                raise DataError(
                    f"subject {self.subject_id}: segment {label} has {vec.shape} features, "
                    f"expected ({len(FEATURE_NAMES)},)"
                )
            if not np.all(np.isfinite(vec)):
                raise DataError(f"subject {self.subject_id}: non-finite feature value")
            self.features[label] = vec


def _zscores(values: np.ndarray) -> np.ndarray:
    mean = values.mean()
    std = values.std()
    if std <= 1e-12 * max(1.0, abs(mean)):  # numerically constant feature
        return np.zeros_like(values)
    return (values - mean) / std


def exclude_outliers(
    subjects: list[SubjectRecord],
    threshold: float = 3.0,
    per_segment: bool = True,
) -> tuple[list[SubjectRecord], list[SubjectRecord]]:
    """Drop whole subjects with any |z| > threshold asymmetry value.

    z-scores are computed across subjects once (single pass, not
    iterated), separately per (segment, feature) when per_segment is
    true, else pooled over the three segments per feature. Constant
    features get z = 0 for everyone.
    """
    if len(subjects) < 3:
        raise ComputeError(f"insufficient cohort: need >= 3 subjects, got {len(subjects)}")
    n = len(subjects)
    flagged = np.zeros(n, dtype=bool)
    if per_segment:
        for label in SEGMENTS:
            mat = np.stack([s.features[label] for s in subjects])  # n x 15
            for j in range(mat.shape[1]):
                z = _zscores(mat[:, j])
                flagged |= np.abs(z) > threshold
    else:
        for j in range(len(FEATURE_NAMES)):
            pooled = np.concatenate(
                [[s.features[label][j] for s in subjects] for label in SEGMENTS]
            )
            z = _zscores(pooled).reshape(len(SEGMENTS), n)
            flagged |= (np.abs(z) > threshold).any(axis=0)
    kept = [s for s, bad in zip(subjects, flagged) if not bad]
    removed = [s for s, bad in zip(subjects, flagged) if bad]
    return kept, removed


# ---------------------------------------------------------------------------
# feature table CSV: the interchange format between extract and the
# downstream commands. One row per (subject, segment).

TABLE_HEADER = ("subject", "segment", "empathy") + FEATURE_NAMES


@dataclass
class FeatureTable:
    subjects: list[str]
    scores: dict[str, int]
    features: dict[tuple[str, str], np.ndarray]

    def segment_matrix(self, segment: str) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) for one segment, rows in subject order."""
        if segment not in SEGMENTS:
            raise DataError(f"unknown segment {segment!r}")
        X = np.stack([self.features[(s, segment)] for s in self.subjects])
        y = np.asarray([self.scores[s] for s in self.subjects], dtype=np.float64)
        return X, y

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)


def table_from_records(records: list[SubjectRecord]) -> FeatureTable:
    subjects = [r.subject_id for r in records]
    scores = {r.subject_id: r.empathy_score for r in records}
    features = {
        (r.subject_id, label): r.features[label] for r in records for label in SEGMENTS
    }
    return FeatureTable(subjects=subjects, scores=scores, features=features)


def write_feature_table(path: str | Path, table: FeatureTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_HEADER)
        for subject in table.subjects:
            for label in SEGMENTS:
                vec = table.features[(subject, label)]
                writer.writerow(
                    [subject, label, table.scores[subject]] + [repr(float(v)) for v in vec]
                )


def read_feature_table(path: str | Path) -> FeatureTable:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"feature table not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty feature table")
        if tuple(header) != TABLE_HEADER:
            raise DataError(
                f"{path}: bad feature-table header (expected {','.join(TABLE_HEADER)})"
            )
        subjects: list[str] = []
        scores: dict[str, int] = {}
        features: dict[tuple[str, str], np.ndarray] = {}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TABLE_HEADER):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells")
            subject, label = row[0], row[1]
            if label not in SEGMENTS:
                raise DataError(f"{path}: row {row_no} has unknown segment {label!r}")
            try:
                score = int(row[2])
                vec = np.asarray([float(v) for v in row[3:]], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}: non-numeric cell in row {row_no}: {exc}")
            if subject not in scores:
                subjects.append(subject)
                scores[subject] = score
            elif scores[subject] != score:
                raise DataError(f"{path}: subject {subject} has conflicting scores")
            if (subject, label) in features:
                raise DataError(f"{path}: duplicate row for ({subject}, {label})")
            features[(subject, label)] = vec
    for subject in subjects:
        for label in SEGMENTS:
            if (subject, label) not in features:
                raise DataError(f"{path}: subject {subject} missing segment {label}")
        lo, hi = EMPATHY_SCORE_RANGE
        if not lo <= scores[subject] <= hi:
            raise DataError(
                f"{path}: subject {subject} empathy score {scores[subject]} outside [{lo}, {hi}]"
            )
    if not subjects:
        raise DataError(f"{path}: feature table has no rows")
    return FeatureTable(subjects=subjects, scores=scores, features=features)
