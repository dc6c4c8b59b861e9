"""Feature track extraction from grayscale frame sequences.

Small appearance windows are registered between consecutive frames by
minimizing a time-symmetrized sum of squared differences: both frames are
sampled at half-offsets (the previous frame at -d/2, the next at +d/2), a
form that is antisymmetric under frame exchange. Minimization is
Gauss-Newton per pyramid level, coarse to fine, so the displacement is
first estimated on heavily smoothed windows and then refined. New features
are selected where the windowed gradient matrix has the largest smaller
eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .errors import DegenerateInputError, FeatureLost, ValidationError
from .tracks import Track

_PYRAMID_SIGMA = 1.0     # pre-blur before each factor-2 decimation
_RANK_EPS = 1e-10        # per-pixel floor on the normal matrix eigenvalue


@dataclass(frozen=True)
class TrackerConfig:
    window_radius: int = 7          # window is the (2r+1)^2 square
    max_features: int = 400
    min_eigenvalue: float = 0.01    # threshold on the smaller eigenvalue
    pyramid_levels: int = 3
    max_iterations: int = 20        # per-level Gauss-Newton cap
    convergence_eps: float = 0.01   # pixels
    max_residual: float = 0.02      # mean squared intensity error

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValidationError("window_radius must be >= 1")
        if self.pyramid_levels < 1:
            raise ValidationError("pyramid_levels must be >= 1")
        if self.max_features < 1 or self.max_iterations < 1:
            raise ValidationError("max_features and max_iterations must be >= 1")
        if min(self.min_eigenvalue, self.convergence_eps, self.max_residual) <= 0:
            raise ValidationError("thresholds must be > 0")


@dataclass
class FeatureState:
    """Book-keeping for one live feature inside run_tracker."""

    position: np.ndarray            # (2,) sub-pixel (x, y)
    birth_order: int = 0
    age: int = 0
    last_residual: float = 0.0
    observations: list = field(default_factory=list)  # (frame, x, y)


def _validate_frame(frame: np.ndarray) -> np.ndarray:
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("frame must be a 2-d intensity grid")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("frame intensities must be finite and in [0, 1]")
    return arr


def min_eigenvalue_map(frame: np.ndarray, window_radius: int) -> np.ndarray:
    """Smaller eigenvalue of the windowed gradient matrix at every pixel.

    The gradient matrix is sum over the window of grad(F) grad(F)^T with
    central-difference gradients. Entries outside the valid margin are set
    to -inf.
    """
    gy, gx = np.gradient(frame)
    win = 2 * window_radius + 1
    area = float(win * win)
    sxx = uniform_filter(gx * gx, size=win, mode="constant") * area
    syy = uniform_filter(gy * gy, size=win, mode="constant") * area
    sxy = uniform_filter(gx * gy, size=win, mode="constant") * area
    half_trace = 0.5 * (sxx + syy)
    root = np.sqrt((0.5 * (sxx - syy)) ** 2 + sxy ** 2)
    lam = half_trace - root
    out = np.full_like(lam, -np.inf)
    r = window_radius
    out[r:frame.shape[0] - r, r:frame.shape[1] - r] = \
        lam[r:frame.shape[0] - r, r:frame.shape[1] - r]
    return out


def select_features(frame: np.ndarray, cfg: TrackerConfig | None = None,
                    exclude: np.ndarray | None = None,
                    max_count: int | None = None) -> list[tuple[float, float]]:
    """Strongest trackable window centres, best first.

    Candidates are ranked by the smaller eigenvalue of their windowed
    gradient matrix, thresholded at min_eigenvalue, and thinned greedily so
    no two selected features (or any feature and an entry of `exclude`) are
    closer than window_radius pixels.
    """
    cfg = cfg or TrackerConfig()
    frame = _validate_frame(frame)
    h, w = frame.shape
    win = 2 * cfg.window_radius + 1
    if h <= win or w <= win:
        raise DegenerateInputError(
            f"frame {w}x{h} is not larger than the {win}x{win} window")
    lam = min_eigenvalue_map(frame, cfg.window_radius)
    ys, xs = np.nonzero(lam >= cfg.min_eigenvalue)
    if ys.size == 0:
        return []
    scores = lam[ys, xs]
    order = np.argsort(-scores, kind="stable")  # ties keep row-major order
    ys, xs = ys[order], xs[order]

    limit = cfg.max_features if max_count is None else max_count
    min_sep2 = float(cfg.window_radius) ** 2
    taken_x: list[float] = []
    taken_y: list[float] = []
    if exclude is not None and len(exclude):
        ex = np.asarray(exclude, dtype=np.float64).reshape(-1, 2)
        taken_x.extend(ex[:, 0].tolist())
        taken_y.extend(ex[:, 1].tolist())
    n_excluded = len(taken_x)
    for y, x in zip(ys, xs):
        if len(taken_x) - n_excluded >= limit:
            break
        dx = np.asarray(taken_x) - x
        dy = np.asarray(taken_y) - y
        if len(taken_x) and np.min(dx * dx + dy * dy) < min_sep2:
            continue
        taken_x.append(float(x))
        taken_y.append(float(y))
    return list(zip(taken_x[n_excluded:], taken_y[n_excluded:]))


def _sample_with_grad(img: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Bilinear samples plus the exact gradient of the interpolant.

    Using the interpolant's own derivative (not an interpolated gradient
    image) makes the Gauss-Newton gradient agree with finite differences of
    the actual objective.
    """
    h, w = img.shape
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, w - 2)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, h - 2)
    fx = xs - x0
    fy = ys - y0
    i00 = img[y0, x0]
    i01 = img[y0, x0 + 1]
    i10 = img[y0 + 1, x0]
    i11 = img[y0 + 1, x0 + 1]
    top = i00 + fx * (i01 - i00)
    bot = i10 + fx * (i11 - i10)
    val = top + fy * (bot - top)
    gx = (i01 - i00) * (1.0 - fy) + (i11 - i10) * fy
    gy = bot - top
    return val, gx, gy


def _in_bounds(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> bool:
    h, w = img.shape
    return (xs.min() >= 0.0 and ys.min() >= 0.0
            and xs.max() <= w - 1.0 and ys.max() <= h - 1.0)


def build_pyramid(frame: np.ndarray, levels: int) -> list[np.ndarray]:
    """Gaussian pyramid, level 0 full resolution, factor-2 decimation."""
    pyr = [np.asarray(frame, dtype=np.float64)]
    for _ in range(1, levels):
        prev = pyr[-1]
        if min(prev.shape) < 4:
            break
        pyr.append(gaussian_filter(prev, _PYRAMID_SIGMA, mode="nearest")[::2, ::2])
    return pyr


def _window_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.arange(-radius, radius + 1, dtype=np.float64)
    ox, oy = np.meshgrid(rng, rng)
    return ox.ravel(), oy.ravel()


def track_step(prev: np.ndarray, next_frame: np.ndarray, pos,
               cfg: TrackerConfig | None = None,
               pyramids: tuple[list[np.ndarray], list[np.ndarray]] | None = None,
               ) -> tuple[np.ndarray, float]:
    """Displacement of the window at `pos` between two frames.

    Minimizes sum over the window of
    [next(p + w + d/2) - prev(p + w - d/2)]^2 by Gauss-Newton, coarse to
    fine over a Gaussian pyramid. Returns (d, residual) where residual is
    the mean squared intensity error at the solution. Raises FeatureLost on
    divergence, an out-of-bounds window, or a rank-deficient gradient
    matrix.

    Passing prebuilt `pyramids` (prev, next) skips their recomputation when
    stepping many features between the same frame pair.
    """
    cfg = cfg or TrackerConfig()
    if pyramids is None:
        pyr_prev = build_pyramid(prev, cfg.pyramid_levels)
        pyr_next = build_pyramid(next_frame, cfg.pyramid_levels)
    else:
        pyr_prev, pyr_next = pyramids
    levels = min(len(pyr_prev), len(pyr_next))
    ox, oy = _window_offsets(cfg.window_radius)
    n_px = ox.shape[0]

    pos = np.asarray(pos, dtype=np.float64)
    d = np.zeros(2)
    residual = math.inf
    for level in range(levels - 1, -1, -1):
        f1, f2 = pyr_prev[level], pyr_next[level]
        scale = 2.0 ** level
        px, py = pos[0] / scale, pos[1] / scale
        step_norm = math.inf
        for _ in range(cfg.max_iterations):
            x1 = px + ox - d[0] / 2.0
            y1 = py + oy - d[1] / 2.0
            x2 = px + ox + d[0] / 2.0
            y2 = py + oy + d[1] / 2.0
            if not (_in_bounds(f1, x1, y1) and _in_bounds(f2, x2, y2)):
                raise FeatureLost("window left the frame")
            v1, g1x, g1y = _sample_with_grad(f1, x1, y1)
            v2, g2x, g2y = _sample_with_grad(f2, x2, y2)
            r = v2 - v1
            jx = 0.5 * (g1x + g2x)
            jy = 0.5 * (g1y + g2y)
            hxx = float(jx @ jx)
            hyy = float(jy @ jy)
            hxy = float(jx @ jy)
            half_trace = 0.5 * (hxx + hyy)
            root = math.sqrt((0.5 * (hxx - hyy)) ** 2 + hxy ** 2)
            if half_trace - root <= _RANK_EPS * n_px:
                raise FeatureLost("rank-deficient gradient matrix")
            bx, by = -float(jx @ r), -float(jy @ r)
            det = hxx * hyy - hxy * hxy
            sx = (hyy * bx - hxy * by) / det
            sy = (hxx * by - hxy * bx) / det
            d[0] += sx
            d[1] += sy
            residual = float(r @ r) / n_px
            step_norm = math.hypot(sx, sy)
            if step_norm <= cfg.convergence_eps:
                break
        if step_norm > cfg.convergence_eps:
            raise FeatureLost("did not converge within the iteration cap")
        if level > 0:
            d *= 2.0
    # residual one more time at the final displacement on the finest level
    f1, f2 = pyr_prev[0], pyr_next[0]
    x1 = pos[0] + ox - d[0] / 2.0
    y1 = pos[1] + oy - d[1] / 2.0
    x2 = pos[0] + ox + d[0] / 2.0
    y2 = pos[1] + oy + d[1] / 2.0
    if not (_in_bounds(f1, x1, y1) and _in_bounds(f2, x2, y2)):
        raise FeatureLost("window left the frame")
    v1, _, _ = _sample_with_grad(f1, x1, y1)
    v2, _, _ = _sample_with_grad(f2, x2, y2)
    r = v2 - v1
    return d, float(r @ r) / n_px


def symmetric_ssd(prev: np.ndarray, next_frame: np.ndarray, pos, d,
                  window_radius: int) -> float:
    """The tracked objective itself: mean squared symmetric difference.

    Exposed so tests can check the Gauss-Newton gradient against finite
    differences of the exact quantity being minimized.
    """
    ox, oy = _window_offsets(window_radius)
    pos = np.asarray(pos, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    v1, _, _ = _sample_with_grad(np.asarray(prev, dtype=np.float64),
                                 pos[0] + ox - d[0] / 2.0, pos[1] + oy - d[1] / 2.0)
    v2, _, _ = _sample_with_grad(np.asarray(next_frame, dtype=np.float64),
                                 pos[0] + ox + d[0] / 2.0, pos[1] + oy + d[1] / 2.0)
    r = v2 - v1
    return float(r @ r) / ox.shape[0]


def run_tracker(frames, cfg: TrackerConfig | None = None) -> list[Track]:
    """Track a feature population through a frame sequence.

    Every frame, each live feature is advanced with track_step and dropped
    on a lost-feature signal, a residual above max_residual, or when it
    drifts inside the border margin; the population is then topped up to
    max_features with fresh selections away from live features. One Track
    is emitted per feature lifetime.
    """
    cfg = cfg or TrackerConfig()
    frames = [_validate_frame(f) for f in frames]
    if len(frames) < 2:
        raise ValidationError("run_tracker needs at least 2 frames")
    shape = frames[0].shape
    for i, f in enumerate(frames[1:], start=1):
        if f.shape != shape:
            raise ValidationError(
                f"frame {i} has shape {f.shape[::-1]}, expected {shape[::-1]}")
    margin = float(cfg.window_radius)
    xmax = shape[1] - 1 - margin
    ymax = shape[0] - 1 - margin

    finished: list[FeatureState] = []
    live: list[FeatureState] = []
    next_id = 0

    def replenish(frame_idx: int, frame: np.ndarray):
        nonlocal next_id
        room = cfg.max_features - len(live)
        if room <= 0:
            return
        exclude = (np.array([f.position for f in live])
                   if live else np.empty((0, 2)))
        for x, y in select_features(frame, cfg, exclude=exclude, max_count=room):
            st = FeatureState(position=np.array([x, y]), birth_order=next_id)
            next_id += 1
            st.observations.append((frame_idx, x, y))
            live.append(st)

    pyr_curr = build_pyramid(frames[0], cfg.pyramid_levels)
    replenish(0, frames[0])
    for i in range(1, len(frames)):
        pyr_prev, pyr_curr = pyr_curr, build_pyramid(frames[i], cfg.pyramid_levels)
        survivors: list[FeatureState] = []
        for feat in live:
            try:
                d, res = track_step(frames[i - 1], frames[i], feat.position,
                                    cfg, pyramids=(pyr_prev, pyr_curr))
            except FeatureLost:
                finished.append(feat)
                continue
            if res > cfg.max_residual:
                finished.append(feat)
                continue
            new_pos = feat.position + d
            if not (margin <= new_pos[0] <= xmax and margin <= new_pos[1] <= ymax):
                finished.append(feat)
                continue
            feat.position = new_pos
            feat.age += 1
            feat.last_residual = res
            feat.observations.append((i, float(new_pos[0]), float(new_pos[1])))
            survivors.append(feat)
        live = survivors
        replenish(i, frames[i])
    finished.extend(live)
    finished.sort(key=lambda f: f.birth_order)
    return [Track.from_points(f"{feat.birth_order:06d}", feat.observations)
            for feat in finished]
