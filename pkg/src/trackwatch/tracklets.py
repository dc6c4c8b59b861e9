"""Tracklet extraction, clustering into a motion-primitive vocabulary, and
canonization of tracks as primitive index sequences.

A tracklet is a local linear approximation of a track segment of fixed arc
length: the segment's coordinate centroid plus the undirected orientation of
its endpoint chord. Orientations live in [0, pi) throughout; all angular
arithmetic here is modulo a half turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssignmentImpossible, ValidationError
from .tracks import Track

HALF_PI = math.pi / 2


def mod_pi(theta: float) -> float:
    """Reduce an angle into [0, pi). Guards the float edge where the
    remainder rounds up to pi itself."""
    r = math.fmod(theta, math.pi)
    if r < 0.0:
        r += math.pi
    if r >= math.pi:
        r = 0.0
    return r


def angular_distance(a: float, b: float) -> float:
    """Undirected angular distance in [0, pi/2] between two orientations.

    The raw difference taken mod pi measures one way around the half-turn
    circle; the true separation is the smaller of that and its complement.
    """
    m = mod_pi(a - b)
    return min(m, math.pi - m)


def _angular_distance_arr(a: np.ndarray, b: float) -> np.ndarray:
    m = np.mod(a - b, math.pi)
    return np.minimum(m, math.pi - m)


@dataclass(frozen=True)
class Tracklet:
    x_hat: float
    y_hat: float
    theta: float  # [0, pi)
    source_track: str
    segment_index: int


@dataclass(frozen=True)
class Primitive:
    """Cluster centre over tracklets: one entry of the motion vocabulary."""

    x: float
    y: float
    theta: float  # [0, pi)
    member_count: int


@dataclass(frozen=True)
class ScaleConfig:
    """Parameters of one characteristic scale.

    delta_d is the tracklet arc length; delta_q and delta_theta are the
    spatial and directional cluster radii. delta_theta must stay below pi/4
    so the mean direction of a cluster is unambiguous.
    """

    delta_d: float
    delta_q: float = 25.0
    delta_theta: float = math.pi / 16

    def __post_init__(self):
        if not self.delta_d > 0:
            raise ValidationError("delta_d must be > 0")
        if not self.delta_q > 0:
            raise ValidationError("delta_q must be > 0")
        if not 0 < self.delta_theta < math.pi / 4:
            raise ValidationError("delta_theta must be in (0, pi/4)")


@dataclass(frozen=True)
class PrimitiveVocabulary:
    scale: ScaleConfig
    primitives: tuple[Primitive, ...]

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))

    def __len__(self) -> int:
        return len(self.primitives)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(V, 2) centre coordinates and (V,) orientations."""
        xy = np.array([[p.x, p.y] for p in self.primitives], dtype=np.float64)
        th = np.array([p.theta for p in self.primitives], dtype=np.float64)
        return xy, th


def _nearest_sample(cum: np.ndarray, arc: float) -> int:
    """Index of the cumulative-arc-length entry closest to arc (ties: lower)."""
    j = int(np.searchsorted(cum, arc))
    if j == 0:
        return 0
    if j >= cum.shape[0]:
        return cum.shape[0] - 1
    return j - 1 if arc - cum[j - 1] <= cum[j] - arc else j


def extract_tracklets(track: Track, scale: ScaleConfig) -> list[Tracklet]:
    """Cut a track into 50%-overlapping segments of arc length delta_d.

    Segment i spans [i*delta_d/2, i*delta_d/2 + delta_d] in cumulative
    polyline arc length, so consecutive tracklet centres sit delta_d/2 apart
    along the path. Boundaries snap to the nearest sample; the sub-half-scale
    trailing remainder is dropped, as is any segment whose endpoint chord is
    exactly zero (its orientation would be undefined). A track shorter than
    delta_d yields an empty list.
    """
    pts = track.xy
    if pts.shape[0] < 2:
        return []
    step = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(step)))
    total = float(cum[-1])
    dd = scale.delta_d
    half = dd / 2.0

    out: list[Tracklet] = []
    i = 0
    while i * half + dd <= total + 1e-9:
        s = _nearest_sample(cum, i * half)
        e = _nearest_sample(cum, i * half + dd)
        i += 1
        chord = pts[e] - pts[s]
        if s == e or (chord[0] == 0.0 and chord[1] == 0.0):
            continue
        seg = pts[s:e + 1]
        cx, cy = seg.mean(axis=0)
        theta = mod_pi(math.atan2(chord[1], chord[0]))
        out.append(Tracklet(float(cx), float(cy), theta, track.track_id, i - 1))
    return out


def circular_mean_update(theta_c: float, members) -> float:
    """Update a cluster centre direction from member directions.

    Directions are equivalent modulo a half turn, so they cannot be averaged
    with ordinary (or even mod-pi) arithmetic. Doubling the angles maps the
    half-turn circle onto the full circle, where the resultant-vector mean is
    well defined; halving maps it back. The problem is only well posed when
    the members are tightly grouped, so every member must lie within pi/4 of
    the current centre (wrapped distance). For two members this is exactly
    the bisector through the short side.
    """
    th = np.asarray(members, dtype=np.float64)
    if th.size == 0:
        raise ValidationError("circular_mean_update needs at least one member")
    dist = _angular_distance_arr(th, theta_c)
    if np.any(dist >= math.pi / 4):
        raise ValidationError(
            "member direction further than pi/4 from the centre; "
            "mean direction not well posed")
    s = float(np.sin(2.0 * th).sum())
    c = float(np.cos(2.0 * th).sum())
    return mod_pi(0.5 * math.atan2(s, c))


_MAX_REFINE_ITERATIONS = 100


def cluster_tracklets(tracklets: list[Tracklet], scale: ScaleConfig) -> PrimitiveVocabulary:
    """Greedy seeded clustering of tracklets into a primitive vocabulary.

    Repeatedly seeds a cluster with the first unclustered tracklet (in
    (source_track, segment_index) order), then refines it to a membership
    fixed point: a tracklet is admitted when it is within delta_q spatially
    and delta_theta directionally of both the seed and the current centre.
    The centre is the coordinate mean of the members plus the circular mean
    update of their directions. Every tracklet ends up in exactly one
    cluster; every cluster becomes one Primitive.
    """
    if not tracklets:
        raise ValidationError("cannot cluster an empty tracklet list")
    # work in (source_track, segment_index) order throughout so results are
    # bitwise reproducible under input permutation
    ordered = sorted(tracklets, key=lambda t: (t.source_track, t.segment_index))
    xy = np.array([[t.x_hat, t.y_hat] for t in ordered], dtype=np.float64)
    th = np.array([t.theta for t in ordered], dtype=np.float64)

    unclustered = np.ones(len(ordered), dtype=bool)
    primitives: list[Primitive] = []
    for seed_idx in range(len(ordered)):
        if not unclustered[seed_idx]:
            continue
        seed_xy, seed_th = xy[seed_idx], th[seed_idx]
        d_seed = np.linalg.norm(xy - seed_xy, axis=1)
        a_seed = _angular_distance_arr(th, float(seed_th))
        seed_ok = (d_seed <= scale.delta_q) & (a_seed <= scale.delta_theta)

        centre_xy, centre_th = seed_xy.copy(), float(seed_th)
        members = None
        for _ in range(_MAX_REFINE_ITERATIONS):
            d_c = np.linalg.norm(xy - centre_xy, axis=1)
            a_c = _angular_distance_arr(th, centre_th)
            ok = unclustered & seed_ok & (d_c <= scale.delta_q) & (a_c <= scale.delta_theta)
            ok[seed_idx] = True  # the seed is never evicted by centre drift
            new_members = np.flatnonzero(ok)
            if members is not None and np.array_equal(new_members, members):
                break
            members = new_members
            centre_xy = xy[members].mean(axis=0)
            centre_th = circular_mean_update(centre_th, th[members])
        unclustered[members] = False
        primitives.append(Primitive(float(centre_xy[0]), float(centre_xy[1]),
                                    centre_th, int(members.size)))
    return PrimitiveVocabulary(scale, tuple(primitives))


def _assignment_costs(x: float, y: float, theta: float,
                      vocab: PrimitiveVocabulary) -> np.ndarray:
    """Distance from a tracklet to every primitive.

    Spatial squared distance plus a tangent-scaled angular term: the factor
    delta_q/tan(delta_theta) makes an angular deviation of delta_theta cost
    as much as a spatial deviation of delta_q, and the tangent sends the cost
    to infinity as the deviation approaches a quarter turn.
    """
    pxy, pth = vocab.as_arrays()
    spatial = (pxy[:, 0] - x) ** 2 + (pxy[:, 1] - y) ** 2
    adist = _angular_distance_arr(pth, theta)
    gain = vocab.scale.delta_q / math.tan(vocab.scale.delta_theta)
    angular = np.where(adist >= HALF_PI - 1e-12, np.inf,
                       (gain * np.tan(adist)) ** 2)
    return spatial + angular


def assign_tracklet(t: Tracklet, vocab: PrimitiveVocabulary) -> int:
    """Index of the closest primitive; ties go to the lowest index.

    An exactly orthogonal primitive has infinite distance and is never
    chosen while any non-orthogonal one exists; if all are orthogonal the
    assignment is impossible.
    """
    if len(vocab) == 0:
        raise ValidationError("vocabulary is empty")
    costs = _assignment_costs(t.x_hat, t.y_hat, t.theta, vocab)
    j = int(np.argmin(costs))
    if not np.isfinite(costs[j]):
        raise AssignmentImpossible(
            "every primitive is orthogonal to the query tracklet")
    return j


def canonize_track(track: Track, vocab: PrimitiveVocabulary) -> np.ndarray:
    """Express a track as a primitive index sequence at the vocabulary scale.

    Consecutive duplicates are retained. An empty array signals that the
    track is too short for even one tracklet at this scale.
    """
    tracklets = extract_tracklets(track, vocab.scale)
    if not tracklets:
        return np.empty(0, dtype=np.intp)
    pxy, pth = vocab.as_arrays()
    if pxy.shape[0] == 0:
        raise ValidationError("vocabulary is empty")
    txy = np.array([[t.x_hat, t.y_hat] for t in tracklets], dtype=np.float64)
    tth = np.array([t.theta for t in tracklets], dtype=np.float64)
    spatial = ((pxy[None, :, 0] - txy[:, 0, None]) ** 2
               + (pxy[None, :, 1] - txy[:, 1, None]) ** 2)
    m = np.mod(pth[None, :] - tth[:, None], math.pi)
    adist = np.minimum(m, math.pi - m)
    gain = vocab.scale.delta_q / math.tan(vocab.scale.delta_theta)
    angular = np.where(adist >= HALF_PI - 1e-12, np.inf, (gain * np.tan(adist)) ** 2)
    costs = spatial + angular
    seq = np.argmin(costs, axis=1)
    chosen = costs[np.arange(costs.shape[0]), seq]
    if not np.all(np.isfinite(chosen)):
        raise AssignmentImpossible(
            "every primitive is orthogonal to a tracklet of the track")
    return seq.astype(np.intp)
