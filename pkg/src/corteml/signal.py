"""Raw EEG recordings: CSV loading, band-pass filtering, segmentation.

A recording holds the nine scalp channels F3, Fz, F4, C3, Cz, C4, P3,
POz, P4 sampled at a common rate. The left/right pairs (F3,F4), (C3,C4),
(P3,P4) feed the asymmetry features downstream; the midline channels
Fz, Cz, POz never do.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import ComputeError, DataError

ELECTRODES = ("F3", "Fz", "F4", "C3", "Cz", "C4", "P3", "POz", "P4")
MIDLINE = ("Fz", "Cz", "POz")
# region -> (right electrode, left electrode)
ASYMMETRY_PAIRS = {
    "frontal": ("F4", "F3"),
    "central": ("C4", "C3"),
    "parietal": ("P4", "P3"),
}

SEGMENTS = ("pre", "video", "post")
SEGMENT_DISPLAY = {"pre": "Pre-video", "video": "Video", "post": "Post-video"}

FILTER_ORDER = 4
# forward-backward pass of an order-4 bandpass has 2*order poles per direction
_WARMUP = 3 * 2 * FILTER_ORDER


@dataclass
class EegRecording:
    """Multichannel EEG time series in microvolts."""

    sampling_rate_hz: float
    channels: dict[str, np.ndarray]

    def __post_init__(self):
        if not self.sampling_rate_hz > 100.0:
            raise DataError(
                f"sampling rate must exceed 100 Hz (Nyquist for the 50 Hz band edge), "
                f"got {self.sampling_rate_hz}"
            )
        missing = [e for e in ELECTRODES if e not in self.channels]
        if missing:
            raise DataError(f"missing electrode channel(s): {', '.join(missing)}")
        extra = [c for c in self.channels if c not in ELECTRODES]
        if extra:
            raise DataError(f"unknown electrode channel(s): {', '.join(extra)}")
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) != 1:
            raise DataError(f"channels have unequal lengths: {sorted(lengths)}")
        n = lengths.pop()
        if n < 2:
            raise DataError(f"recording needs at least 2 samples, got {n}")
        # normalize to canonical channel order, contiguous float64
        ordered = {}
        for e in ELECTRODES:
            arr = np.ascontiguousarray(self.channels[e], dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise DataError(f"channel {e} contains NaN or Inf samples")
            ordered[e] = arr
        self.channels = ordered

    @property
    def n_samples(self) -> int:
        return len(self.channels[ELECTRODES[0]])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz


@dataclass
class SegmentedRecording:
    """The three analysis segments of one session, same sampling rate."""

    segments: dict[str, EegRecording] = field(default_factory=dict)

    def __post_init__(self):
        missing = [s for s in SEGMENTS if s not in self.segments]
        if missing:
            raise DataError(f"missing segment(s): {', '.join(missing)}")
        rates = {rec.sampling_rate_hz for rec in self.segments.values()}
        if len(rates) != 1:
            raise DataError(f"segments disagree on sampling rate: {sorted(rates)}")

    @property
    def sampling_rate_hz(self) -> float:
        return self.segments["pre"].sampling_rate_hz

    def __getitem__(self, label: str) -> EegRecording:
        return self.segments[label]


def _parse_fs_line(line: str) -> float | None:
    stripped = line.strip()
    if not stripped.startswith("#"):
        return None
    body = stripped.lstrip("#").strip()
    if not body.startswith("fs"):
        return None
    _, _, value = body.partition("=")
    try:
        return float(value.strip())
    except ValueError:
        raise DataError(f"unparseable sampling-rate line: {line.strip()!r}")


def load_recording(
    path: str | Path,
    fs: float | None = None,
    columns: dict[str, str] | None = None,
) -> EegRecording:
    """Read one recording from CSV.

    Expected layout: optional first line ``# fs=<hz>``, then a header row
    naming a time/index column plus the nine electrodes, then one row per
    sample (values in microvolts). ``fs`` overrides the sidecar line;
    ``columns`` remaps electrode label -> CSV column name.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"recording file not found: {path}")
    colmap = {e: e for e in ELECTRODES}
    if columns:
        colmap.update(columns)

    with open(path, newline="") as fh:
        first = fh.readline()
        file_fs = _parse_fs_line(first)
        if file_fs is None:
            fh.seek(0)
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        col_idx = {}
        for electrode, name in colmap.items():
            if name not in header:
                raise DataError(f"{path}: missing electrode column {name!r}")
            col_idx[electrode] = header.index(name)
        data: list[list[float]] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_no} has {len(row)} cells, header has {len(header)}"
                )
            try:
                data.append([float(row[col_idx[e]]) for e in ELECTRODES])
            except ValueError as exc:
                raise DataError(f"{path}: non-numeric cell in row {row_no}: {exc}")

    effective_fs = fs if fs is not None else file_fs
    if effective_fs is None:
        raise DataError(f"{path}: no sampling rate (no '# fs=' line and no --fs)")
    if effective_fs <= 100.0:
        raise DataError(f"{path}: sampling rate {effective_fs} Hz rejected (must exceed 100 Hz)")
    if len(data) < 2:
        raise DataError(f"{path}: needs at least 2 sample rows, got {len(data)}")
    arr = np.asarray(data, dtype=np.float64)
    channels = {e: arr[:, i] for i, e in enumerate(ELECTRODES)}
    return EegRecording(sampling_rate_hz=effective_fs, channels=channels)


def write_recording(path: str | Path, rec: EegRecording) -> None:
    """Write a recording in the CSV schema read by load_recording.

    Sample values are written with repr so that a write/read round trip
    is bit-exact.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(f"# fs={rec.sampling_rate_hz!r}\n")
        writer = csv.writer(fh)
        writer.writerow(("t",) + ELECTRODES)
        cols = [rec.channels[e] for e in ELECTRODES]
        for i in range(rec.n_samples):
            writer.writerow([i] + [repr(float(c[i])) for c in cols])


def bandpass_filter(
    rec: EegRecording, low_hz: float = 0.5, high_hz: float = 50.0
) -> EegRecording:
    """Zero-phase Butterworth band-pass, identical on every channel.

    Order-4 design applied forward-backward with reflect padding of
    3x the pole count, so output length equals input length and
    oscillation peaks do not shift.
    """
    fs = rec.sampling_rate_hz
    if not (0.0 < low_hz < high_hz < fs / 2.0):
        raise ComputeError(
            f"band edges must satisfy 0 < low < high < fs/2, got ({low_hz}, {high_hz}) at fs={fs}"
        )
    if rec.n_samples <= _WARMUP:
        raise ComputeError(
            f"recording too short to filter: {rec.n_samples} samples <= warm-up {_WARMUP}"
        )
    # second-order sections keep the near-unit-circle 0.5 Hz poles stable
    sos = butter(FILTER_ORDER, [low_hz, high_hz], btype="band", fs=fs, output="sos")
    filtered = {
        e: sosfiltfilt(sos, x, padtype="even", padlen=_WARMUP)
        for e, x in rec.channels.items()
    }
    return EegRecording(sampling_rate_hz=fs, channels=filtered)


def segment(rec: EegRecording, boundaries: tuple[int, int]) -> SegmentedRecording:
    """Split one recording into pre/video/post at two sample indices.

    pre = [0, b1), video = [b1, b2), post = [b2, end); the three parts
    concatenate back to the input. Every segment must span at least two
    seconds.
    """
    b1, b2 = boundaries
    n = rec.n_samples
    if b1 <= 0:
        raise ComputeError("empty pre segment: first boundary must be > 0")
    if b2 <= b1:
        raise ComputeError("empty video segment: boundaries must satisfy b1 < b2")
    if b2 >= n:
        raise ComputeError(f"empty post segment: second boundary {b2} >= length {n}")
    min_len = int(np.ceil(2.0 * rec.sampling_rate_hz))
    spans = {"pre": (0, b1), "video": (b1, b2), "post": (b2, n)}
    out = {}
    for label, (lo, hi) in spans.items():
        if hi - lo < min_len:
            raise ComputeError(
                f"segment {label} too short: {hi - lo} samples < 2 s ({min_len} samples)"
            )
        out[label] = EegRecording(
            sampling_rate_hz=rec.sampling_rate_hz,
            channels={e: x[lo:hi].copy() for e, x in rec.channels.items()},
        )
    return SegmentedRecording(segments=out)
