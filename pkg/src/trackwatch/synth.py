"""Synthetic scenes, textures and track corpora for demos and tests.

The corridor world is a desk-scale stand-in for real surveillance footage:
a straight walkway crossed twice by an arched path, with route-switching at
both crossings frequent in training so those sharp corners are contextually
normal. It admits four probe families: held-out normal walks, unjustified
mid-corridor sharp turns, corner turns where training turned, and a
long-way-round detour whose every local move is trained but whose
end-to-end path lengths are anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from .tracks import Track

# ---------------------------------------------------------------------------
# textures and shifted frames for tracker tests


def smooth_texture(height: int, width: int, rng: np.random.Generator,
                   blur: float = 2.5) -> np.ndarray:
    """Band-limited random texture in [0.1, 0.9], well suited to tracking."""
    noise = rng.random((height, width))
    tex = gaussian_filter(noise, blur, mode="nearest")
    lo, hi = tex.min(), tex.max()
    return 0.1 + 0.8 * (tex - lo) / (hi - lo)


def shift_frame(frame: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Translate image content by (dx, dy) with bilinear resampling."""
    h, w = frame.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    return map_coordinates(frame, [yy - dy, xx - dx], order=1, mode="nearest")


def paint_block(frame: np.ndarray, x: int, y: int, half: int,
                value: float = 0.5) -> np.ndarray:
    out = frame.copy()
    out[max(0, y - half):y + half + 1, max(0, x - half):x + half + 1] = value
    return out


# ---------------------------------------------------------------------------
# simple track corpora for the filter


def jitter_tracks(n: int, rng: np.random.Generator, sigma: float = 0.6,
                  length: tuple[int, int] = (40, 120),
                  extent: tuple[float, float] = (800.0, 600.0),
                  id_prefix: str = "jit") -> list[Track]:
    """Temporally long, spatially tiny tracks: stationary features shaken
    by sub-pixel camera wobble."""
    out = []
    for k in range(n):
        m = int(rng.integers(length[0], length[1] + 1))
        base = rng.uniform((20, 20), (extent[0] - 20, extent[1] - 20))
        xy = base + rng.normal(0.0, sigma, size=(m, 2))
        out.append(Track(f"{id_prefix}{k:05d}", np.arange(m), xy))
    return out


def moving_tracks(n: int, rng: np.random.Generator,
                  length: tuple[int, int] = (40, 120),
                  speed: tuple[float, float] = (0.8, 2.5),
                  extent: tuple[float, float] = (800.0, 600.0),
                  id_prefix: str = "mov") -> list[Track]:
    """Straight constant-velocity walks with mild positional noise."""
    out = []
    for k in range(n):
        m = int(rng.integers(length[0], length[1] + 1))
        base = rng.uniform((150, 150), (extent[0] - 150, extent[1] - 150))
        ang = rng.uniform(0, 2 * math.pi)
        v = rng.uniform(*speed)
        step = np.array([math.cos(ang), math.sin(ang)]) * v
        xy = base + np.arange(m)[:, None] * step + rng.normal(0, 0.2, (m, 2))
        out.append(Track(f"{id_prefix}{k:05d}", np.arange(m), xy))
    return out


# ---------------------------------------------------------------------------
# corridor world

_APEX = np.array([400.0, 140.0])
_CURVE = 90.0                      # parabola: y = 140 + (x - 400)^2 / 90
_WALK_Y = 300.0
_WALK_X = (60.0, 740.0)
_ARCH_X = (210.0, 590.0)
_CROSS_X = (280.0, 520.0)          # where the arch meets the walkway


def _arch_y(x):
    return _APEX[1] + (x - _APEX[0]) ** 2 / _CURVE


def _dense_polyline(points: np.ndarray, step: float = 0.5) -> np.ndarray:
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        seg = np.linalg.norm(b - a)
        if seg == 0:
            continue
        n = max(1, int(math.ceil(seg / step)))
        for k in range(1, n + 1):
            out.append(a + (b - a) * (k / n))
    return np.asarray(out)


def _walkway_route() -> np.ndarray:
    return _dense_polyline(np.array([[_WALK_X[0], _WALK_Y], [_WALK_X[1], _WALK_Y]]))


def _arch_route() -> np.ndarray:
    xs = np.linspace(_ARCH_X[0], _ARCH_X[1], 1200)
    return np.column_stack([xs, _arch_y(xs)])


def _arch_slice(x_from: float, x_to: float) -> np.ndarray:
    xs = np.linspace(x_from, x_to, max(2, int(abs(x_to - x_from) * 3)))
    return np.column_stack([xs, _arch_y(xs)])


def _corner_route(first_crossing: bool) -> np.ndarray:
    """Walkway approach, switch onto the arch at a crossing, follow the arch
    over the apex down to its far tail."""
    if first_crossing:
        walk = np.array([[_WALK_X[0], _WALK_Y], [_CROSS_X[0], _WALK_Y]])
        arch = _arch_slice(_CROSS_X[0], _ARCH_X[1])
    else:
        walk = np.array([[_WALK_X[1], _WALK_Y], [_CROSS_X[1], _WALK_Y]])
        arch = _arch_slice(_CROSS_X[1], _ARCH_X[0])
    return np.vstack([_dense_polyline(walk), arch[1:]])


def _detour_route() -> np.ndarray:
    """West walkway, over the arch between the crossings, east walkway:
    every move is locally trained, but the end-to-end path length between
    walkway locations is far off the direct distance."""
    west = _dense_polyline(np.array([[_WALK_X[0], _WALK_Y], [_CROSS_X[0], _WALK_Y]]))
    over = _arch_slice(_CROSS_X[0], _CROSS_X[1])
    east = _dense_polyline(np.array([[_CROSS_X[1], _WALK_Y], [_WALK_X[1], _WALK_Y]]))
    return np.vstack([west, over[1:], east[1:]])


def _sharp_turn_route(x_turn: float, leg: float, upward: bool) -> np.ndarray:
    """Straight along the walkway, then an unexplained right-angle turn."""
    sign = -1.0 if upward else 1.0
    pts = np.array([
        [x_turn - 220.0, _WALK_Y],
        [x_turn, _WALK_Y],
        [x_turn, _WALK_Y + sign * leg],
    ])
    return _dense_polyline(pts)


def walk_route(route: np.ndarray, rng: np.random.Generator,
               reverse: bool = False,
               speed: tuple[float, float] = (1.6, 2.4),
               lateral: float = 6.0,
               wobble: float = 1.5,
               noise: float = 0.15,
               trim: float = 25.0,
               deep_trim: float | None = None,
               deep_p: float = 0.5) -> np.ndarray:
    """One agent's walk along a route: arc-length resampling at a per-track
    speed, a constant lateral offset plus a slow sinusoidal wander applied
    along the local normal, and small isotropic noise.

    Each end is trimmed by U(0, trim), or with probability deep_p by
    U(trim, deep_trim) when deep_trim is set. The mixture keeps route-end
    primitive pairs densely observed while still covering a full segment
    phase at every scale.
    """
    pts = route[::-1] if reverse else route
    step = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate(([True], step > 0))
    pts = pts[keep]
    step = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(step)))
    total = cum[-1]

    def draw_trim():
        if deep_trim is not None and rng.random() < deep_p:
            return rng.uniform(trim, deep_trim)
        return rng.uniform(0.0, trim)

    s0 = draw_trim()
    s1 = total - draw_trim()
    v = rng.uniform(*speed)
    arcs = np.arange(s0, s1, v)

    x = np.interp(arcs, cum, pts[:, 0])
    y = np.interp(arcs, cum, pts[:, 1])
    tx = np.gradient(x)
    ty = np.gradient(y)
    norm = np.hypot(tx, ty)
    norm[norm == 0] = 1.0
    nx, ny = -ty / norm, tx / norm

    off = (rng.uniform(-lateral, lateral)
           + rng.uniform(0.0, wobble)
           * np.sin(2 * math.pi * arcs / rng.uniform(120.0, 200.0)
                    + rng.uniform(0.0, 2 * math.pi)))
    out = np.column_stack([x + nx * off, y + ny * off])
    return out + rng.normal(0.0, noise, out.shape)


def _tracks_from_routes(routes, n: int, rng: np.random.Generator,
                        id_prefix: str, **walk_kw) -> list[Track]:
    out = []
    for k in range(n):
        route = routes[k % len(routes)]
        pts = walk_route(route, rng, reverse=bool((k // len(routes)) % 2), **walk_kw)
        out.append(Track(f"{id_prefix}{k:05d}", np.arange(pts.shape[0]), pts))
    return out


# entry/exit arc variety for normal traffic: half the walks trim deeply so
# canonized sequences cover a full segment phase at every scale instead of
# collapsing onto one route signature
_NORMAL_TRIM = dict(trim=25.0, deep_trim=80.0, deep_p=0.35,
                    lateral=4.0, wobble=1.0)


def corridor_training_corpus(n: int = 2000, seed: int = 7) -> list[Track]:
    """Normal traffic: full traversals of both paths plus route switches at
    both crossings, each route walked in both directions."""
    rng = np.random.default_rng(seed)
    routes = [_walkway_route(), _arch_route(),
              _corner_route(True), _corner_route(False)]
    return _tracks_from_routes(routes, n, rng, "train", **_NORMAL_TRIM)


def corridor_heldout_normal(n: int = 200, seed: int = 1009) -> list[Track]:
    rng = np.random.default_rng(seed)
    routes = [_walkway_route(), _arch_route(),
              _corner_route(True), _corner_route(False)]
    return _tracks_from_routes(routes, n, rng, "held", **_NORMAL_TRIM)


def corridor_corner_probes(n: int = 100, seed: int = 2203) -> list[Track]:
    """Sharp turns exactly where training turned: contextually normal."""
    rng = np.random.default_rng(seed)
    routes = [_corner_route(True), _corner_route(False)]
    return _tracks_from_routes(routes, n, rng, "corner", **_NORMAL_TRIM)


def corridor_sharp_turn_probes(n: int = 100, seed: int = 3301) -> list[Track]:
    """Right-angle turns in the middle of the walkway, away from both
    crossings: nothing in the scene justifies them."""
    rng = np.random.default_rng(seed)
    routes = [_sharp_turn_route(x, leg, up)
              for x in (160.0, 360.0, 440.0, 640.0)
              for leg in (130.0,)
              for up in (True, False)]
    return _tracks_from_routes(routes, n, rng, "sharp")


def corridor_detour_probes(n: int = 60, seed: int = 4409) -> list[Track]:
    """The long way round: west walkway, over the arch, east walkway."""
    rng = np.random.default_rng(seed)
    return _tracks_from_routes([_detour_route()], n, rng, "detour",
                               lateral=4.0)


def corridor_scene_image(height: int = 600, width: int = 800) -> np.ndarray:
    """Plan view of the corridor world: bright worn paths on dark ground."""
    img = np.full((height, width), 0.25)
    for route in (_walkway_route(), _arch_route()):
        for px, py in route[::2]:
            xi, yi = int(round(px)), int(round(py))
            img[max(0, yi - 4):yi + 5, max(0, xi - 4):xi + 5] = 0.75
    return gaussian_filter(img, 2.0, mode="nearest")
