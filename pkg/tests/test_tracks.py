import io
import json
import math

import numpy as np
import pytest

from trackwatch.errors import DegenerateInputError, ParseError, ValidationError
from trackwatch.tracks import (FilterConfig, Track, filter_tracks, load_tracks,
                               save_tracks, track_variance)

from conftest import straight_track


def brute_force_variance(track):
    # independent two-pass mean/deviation oracle
    xs = [p.x for p in track.points]
    ys = [p.y for p in track.points]
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    total = sum((x - xbar) ** 2 + (y - ybar) ** 2 for x, y in zip(xs, ys))
    return total / (n - 1)


class TestTrackType:
    def test_minimal_jsonl_line(self):
        line = b'{"id":"t0","points":[[0,1.0,2.0],[1,1.5,2.0]]}'
        tracks = load_tracks(io.BytesIO(line))
        assert len(tracks) == 1
        t = tracks[0]
        assert t.track_id == "t0"
        assert len(t) == 2
        assert t.points[1] == (1, 1.5, 2.0)

    def test_repeated_frame_rejected(self):
        line = b'{"id":"bad","points":[[3,0.0,0.0],[3,1.0,1.0]]}'
        with pytest.raises(ValidationError, match="bad"):
            load_tracks(io.BytesIO(line))

    def test_decreasing_frame_rejected(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            Track("x", np.array([2, 1]), np.zeros((2, 2)))

    def test_empty_points_rejected(self):
        with pytest.raises(ValidationError):
            Track.from_points("x", [])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError, match="non-finite"):
            Track("x", np.array([0, 1]), np.array([[0.0, 0.0], [np.nan, 0.0]]))

    def test_malformed_line_names_line_number(self):
        data = b'{"id":"a","points":[[0,0,0]]}\nnot json\n'
        with pytest.raises(ParseError, match="line 2"):
            load_tracks(io.BytesIO(data))

    def test_points_are_immutable(self):
        t = straight_track(n=5)
        with pytest.raises(ValueError):
            t.xy[0, 0] = 99.0

    def test_roundtrip_through_jsonl(self, tmp_path):
        tracks = [straight_track("a", n=10), straight_track("b", n=12, y0=5.0)]
        path = tmp_path / "tracks.jsonl"
        save_tracks(tracks, path)
        back = load_tracks(path)
        assert [t.track_id for t in back] == ["a", "b"]
        for orig, re in zip(tracks, back):
            assert np.array_equal(orig.frames, re.frames)
            assert np.array_equal(orig.xy, re.xy)

    def test_large_file_scale(self, tmp_path):
        # 113,700 lines in file order; synthetic stand-in for a long recording
        n = 113_700
        path = tmp_path / "big.jsonl"
        with open(path, "w") as fh:
            for i in range(n):
                fh.write(json.dumps(
                    {"id": f"{i:06d}",
                     "points": [[0, float(i % 640), 1.0], [1, float(i % 640) + 1.0, 1.0]]}
                ) + "\n")
        tracks = load_tracks(path)
        assert len(tracks) == n
        assert tracks[0].track_id == "000000"
        assert tracks[-1].track_id == f"{n - 1:06d}"


class TestTrackVariance:
    def test_identical_points(self):
        t = Track("c", np.arange(100), np.full((100, 2), 3.25))
        assert track_variance(t) == 0.0

    def test_unit_step_line(self):
        # sum (x_i - xbar)^2 over 0..99 is N(N^2-1)/12 = 83325; divide by 99
        t = straight_track(n=100)
        expected = 100 * (100 ** 2 - 1) / 12 / 99
        assert math.isclose(track_variance(t), expected, rel_tol=1e-12)
        assert math.isclose(expected, 841.6666666666666, rel_tol=1e-12)

    def test_two_points(self):
        t = Track.from_points("p", [(0, 0.0, 0.0), (1, 3.0, 4.0)])
        assert math.isclose(track_variance(t), 12.5, rel_tol=1e-12)

    def test_single_point_degenerate(self):
        t = Track.from_points("p", [(0, 1.0, 1.0)])
        with pytest.raises(DegenerateInputError):
            track_variance(t)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 200))
            t = Track("r", np.arange(n), rng.normal(0, 50, (n, 2)))
            assert math.isclose(track_variance(t), brute_force_variance(t),
                                rel_tol=1e-12)

    def test_translation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 100))
            xy = rng.normal(0, 10, (n, 2))
            offset = rng.uniform(-1e4, 1e4, 2)
            a = track_variance(Track("a", np.arange(n), xy))
            b = track_variance(Track("b", np.arange(n), xy + offset))
            assert math.isclose(a, b, rel_tol=1e-9)


class TestFilterTracks:
    def test_29_point_high_variance_rejected(self):
        t = straight_track(n=29, step=10.0)
        assert track_variance(t) > 4.0
        assert filter_tracks([t], FilterConfig()) == []

    def test_stationary_rejected(self):
        t = Track("s", np.arange(100), np.full((100, 2), 7.0))
        assert filter_tracks([t], FilterConfig()) == []

    def test_moving_kept(self):
        t = straight_track(n=100)
        assert filter_tracks([t], FilterConfig(min_variance=4.0)) == [t]

    def test_order_preserved_and_idempotent(self):
        rng = np.random.default_rng(5)
        tracks = []
        for i in range(50):
            n = int(rng.integers(5, 80))
            sigma = rng.choice([0.1, 5.0])
            xy = rng.normal(0, sigma, (n, 2)) + np.arange(n)[:, None] * rng.choice([0.0, 1.0])
            tracks.append(Track(f"{i:03d}", np.arange(n), xy))
        once = filter_tracks(tracks, FilterConfig())
        twice = filter_tracks(once, FilterConfig())
        assert once == twice
        ids = [t.track_id for t in once]
        assert ids == sorted(ids, key=lambda s: tracks.index(next(
            t for t in tracks if t.track_id == s)))

    def test_bad_config_rejected(self):
        with pytest.raises(ValidationError):
            FilterConfig(min_length=1)
        with pytest.raises(ValidationError):
            FilterConfig(min_variance=0.0)
