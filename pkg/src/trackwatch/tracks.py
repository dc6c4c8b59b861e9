"""Track data types, JSONL ingestion/emission and the uninformative-track filter.

A track is a time-ordered sequence of image-plane points with frame indices.
The filter keeps tracks that are both long enough and spatially spread out,
discarding short-lived features and stationary features jittered by camera
motion.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np

from .errors import DegenerateInputError, ParseError, ValidationError


class TrackPoint(NamedTuple):
    frame: int
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Track:
    """Immutable feature track: frame indices plus (x, y) pixel positions."""

    track_id: str
    frames: np.ndarray  # (N,) int64, strictly increasing
    xy: np.ndarray      # (N, 2) float64, finite

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.int64)
        xy = np.asarray(self.xy, dtype=np.float64)
        if frames.ndim != 1 or xy.shape != (frames.shape[0], 2):
            raise ValidationError(
                f"track '{self.track_id}': frames and xy shapes inconsistent")
        if frames.size == 0:
            raise ValidationError(f"track '{self.track_id}': no points")
        if frames.size > 1 and not np.all(np.diff(frames) > 0):
            raise ValidationError(
                f"track '{self.track_id}': frame indices not strictly increasing")
        if np.any(frames < 0):
            raise ValidationError(f"track '{self.track_id}': negative frame index")
        if not np.all(np.isfinite(xy)):
            raise ValidationError(f"track '{self.track_id}': non-finite coordinates")
        frames.setflags(write=False)
        xy.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "xy", xy)

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def points(self) -> list[TrackPoint]:
        return [TrackPoint(int(f), float(x), float(y))
                for f, (x, y) in zip(self.frames, self.xy)]

    @classmethod
    def from_points(cls, track_id: str, points: Iterable[tuple[int, float, float]]) -> "Track":
        pts = list(points)
        if not pts:
            raise ValidationError(f"track '{track_id}': no points")
        arr = np.asarray(pts, dtype=np.float64).reshape(len(pts), 3)
        return cls(track_id, arr[:, 0].astype(np.int64), arr[:, 1:])


@dataclass(frozen=True)
class FilterConfig:
    """Acceptance thresholds for the uninformative-track filter.

    min_length is a frame count (30 frames is 1.2 s at the assumed 25 fps;
    the filter itself only ever sees frame counts). min_variance is the
    squared-pixel spread below which a track is considered stationary.
    """

    min_length: int = 30
    min_variance: float = 4.0

    def __post_init__(self):
        if self.min_length < 2:
            raise ValidationError("min_length must be >= 2")
        if not self.min_variance > 0:
            raise ValidationError("min_variance must be > 0")


def _open_source(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"unsupported track source: {type(source)!r}")


def load_tracks(source) -> list[Track]:
    """Read tracks from a JSONL stream, path or bytes.

    One object per line: {"id": str, "points": [[frame, x, y], ...]}.
    Raises ParseError naming the line number on malformed lines and
    ValidationError naming the track id on ordering violations.
    """
    tracks = []
    with _open_source(source) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"line {lineno}: invalid JSON ({e.msg})") from e
            if not isinstance(obj, dict) or "id" not in obj or "points" not in obj:
                raise ParseError(f"line {lineno}: expected object with 'id' and 'points'")
            track_id = obj["id"]
            pts = obj["points"]
            if not isinstance(track_id, str) or not isinstance(pts, list):
                raise ParseError(f"line {lineno}: 'id' must be a string, 'points' a list")
            try:
                parsed = [(int(p[0]), float(p[1]), float(p[2])) for p in pts]
            except (TypeError, ValueError, IndexError) as e:
                raise ParseError(f"line {lineno}: malformed point entry") from e
            tracks.append(Track.from_points(track_id, parsed))
    return tracks


def save_tracks(tracks: Iterable[Track], dest) -> None:
    """Write tracks as JSONL, mirroring the load_tracks format."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        for t in tracks:
            pts = [[int(f), float(x), float(y)] for f, (x, y) in zip(t.frames, t.xy)]
            fh.write(json.dumps({"id": t.track_id, "points": pts}) + "\n")
    finally:
        if own:
            fh.close()


def track_variance(track: Track) -> float:
    """Spatial spread of a track: (1/(N-1)) * sum((x-xbar)^2 + (y-ybar)^2)."""
    n = len(track)
    if n < 2:
        raise DegenerateInputError(
            f"track '{track.track_id}': variance needs at least 2 points")
    centered = track.xy - track.xy.mean(axis=0)
    return float(np.sum(centered * centered) / (n - 1))


def filter_tracks(tracks: Iterable[Track], cfg: FilterConfig | None = None) -> list[Track]:
    """Keep tracks with length >= min_length and variance >= min_variance."""
    cfg = cfg or FilterConfig()
    return [t for t in tracks
            if len(t) >= cfg.min_length and track_variance(t) >= cfg.min_variance]
