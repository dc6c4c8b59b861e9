"""Pursuit-constrained motion model over smallest-scale primitive pairs.

Goal-directed movers tend to take near-minimal paths, so the arc length
traversed between two locations in a scene is tightly distributed. The model
decomposes a canonized track into all ordered primitive pairs with their
along-path distance, fits a Gaussian path-length distribution per observed
pair, and scores a track by its single worst pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnscorableTrack, ValidationError
from .tracklets import PrimitiveVocabulary, canonize_track
from .tracks import Track

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PairStats:
    """Statistics for one ordered primitive pair observed in training."""

    from_idx: int
    to_idx: int
    pair_log_prob: float     # log[P(head) * P(tail | head)] over triplets
    mean_length: float       # pixels along the path
    sigma: float             # pixels, floored
    observation_count: int


@dataclass(frozen=True)
class WorstPair:
    """The arg-min pair of a track's pursuit score, with both the sequence
    positions and the primitive indices so a client can render the overlay."""

    pos_a: int
    pos_b: int
    prim_a: int
    prim_b: int


@dataclass(frozen=True)
class PursuitModel:
    vocab: PrimitiveVocabulary          # smallest scale only
    stats: dict                         # (from_idx, to_idx) -> PairStats
    unseen_pair_log_prob: float
    threshold_r2: float
    sigma_floor: float
    smoothing_alpha: float

    @property
    def delta_d(self) -> float:
        return self.vocab.scale.delta_d


def _triplet_positions(m: int) -> tuple[np.ndarray, np.ndarray]:
    """All position pairs a < b in lexicographic (a, then b) order."""
    return np.triu_indices(m, k=1)


def pair_decompose(sequence, delta_d1: float) -> list[tuple[int, int, float]]:
    """Decompose a primitive sequence into (head, tail, path length) triplets.

    Every ordered position pair a < b contributes one triplet; the path
    length between positions is (b - a) * delta_d1 / 2 because consecutive
    tracklet centres are half a scale apart by construction. A sequence of
    length M yields exactly M(M-1)/2 triplets; fewer than two elements yield
    none.
    """
    s = np.asarray(sequence, dtype=np.intp)
    if s.size < 2:
        return []
    a, b = _triplet_positions(s.size)
    lengths = (b - a) * (delta_d1 / 2.0)
    return [(int(s[i]), int(s[j]), float(l)) for i, j, l in zip(a, b, lengths)]


def _gaussian_log_pdf(x, mean, sigma):
    z = (x - mean) / sigma
    return -0.5 * z * z - np.log(sigma) - _LOG_SQRT_2PI


def fit_pursuit(sequences, vocab: PrimitiveVocabulary, alpha: float = 0.5,
                sigma_floor: float | None = None,
                unseen_margin: float = 10.0,
                unseen_pair_log_prob: float | None = None,
                threshold_r2: float = -np.inf) -> PursuitModel:
    """Fit pair probabilities and per-pair Gaussian path lengths.

    The head marginal is the frequency of a primitive among triplet heads;
    the tail conditional is alpha-smoothed over triplet tails per head. Each
    observed pair's mean and (n-1)-normalized standard deviation come from
    its path-length samples, floored at sigma_floor (default delta_d/4).
    Unless given explicitly, the unseen-pair floor is the minimum triplet
    log-probability over the training set minus unseen_margin nats, so an
    unseen pair always scores at least as anomalous as the worst training
    triplet.
    """
    v = len(vocab)
    if v == 0:
        raise ValidationError("vocabulary is empty")
    if sigma_floor is None:
        sigma_floor = vocab.scale.delta_d / 4.0
    if not sigma_floor > 0:
        raise ValidationError("sigma_floor must be > 0")

    heads_all, tails_all, lengths_all = [], [], []
    for seq in sequences:
        s = np.asarray(seq, dtype=np.intp)
        if s.size < 2:
            continue
        if np.any(s < 0) or np.any(s >= v):
            raise ValidationError("sequence index out of vocabulary range")
        a, b = _triplet_positions(s.size)
        heads_all.append(s[a])
        tails_all.append(s[b])
        lengths_all.append((b - a) * (vocab.scale.delta_d / 2.0))
    if not heads_all:
        raise ValidationError("fit_pursuit needs a sequence of length >= 2")
    heads = np.concatenate(heads_all)
    tails = np.concatenate(tails_all)
    lengths = np.concatenate(lengths_all).astype(np.float64)

    head_count = np.bincount(heads, minlength=v).astype(np.float64)
    pair_count = np.zeros((v, v), dtype=np.float64)
    np.add.at(pair_count, (heads, tails), 1.0)
    log_head = np.full(v, -np.inf)
    seen_head = head_count > 0
    log_head[seen_head] = np.log(head_count[seen_head] / heads.shape[0])

    stats: dict[tuple[int, int], PairStats] = {}
    worst_training = np.inf
    flat = heads * v + tails
    order = np.argsort(flat, kind="stable")
    flat_sorted = flat[order]
    len_sorted = lengths[order]
    uniq, starts = np.unique(flat_sorted, return_index=True)
    bounds = np.append(starts, flat_sorted.shape[0])
    for key, lo, hi in zip(uniq, bounds[:-1], bounds[1:]):
        i, j = int(key // v), int(key % v)
        ls = np.sort(len_sorted[lo:hi])  # canonical reduction order
        n = ls.shape[0]
        mean = float(ls.mean())
        sd = float(ls.std(ddof=1)) if n > 1 else 0.0
        sigma = max(sd, float(sigma_floor))
        cond = (pair_count[i, j] + alpha) / (head_count[i] + alpha * v)
        ps = PairStats(i, j, float(log_head[i] + math.log(cond)), mean, sigma, n)
        stats[(i, j)] = ps
        worst_training = min(worst_training, float(np.min(
            ps.pair_log_prob + _gaussian_log_pdf(ls, mean, sigma))))

    if unseen_pair_log_prob is None:
        unseen_pair_log_prob = worst_training - unseen_margin

    return PursuitModel(vocab, stats, float(unseen_pair_log_prob),
                        float(threshold_r2), float(sigma_floor), float(alpha))


def triplet_log_prob(model: PursuitModel, i_idx: int, j_idx: int, length: float) -> float:
    """Joint log-probability of one (head, tail, path length) triplet.

    Observed pairs factor as pair probability times a Gaussian density over
    the path length; unseen pairs return the constant floor.
    """
    v = len(model.vocab)
    if not (0 <= i_idx < v and 0 <= j_idx < v):
        raise ValidationError("primitive index out of vocabulary range")
    ps = model.stats.get((i_idx, j_idx))
    if ps is None:
        return model.unseen_pair_log_prob
    return float(ps.pair_log_prob
                 + _gaussian_log_pdf(length, ps.mean_length, ps.sigma))


def conformance_rho2(model: PursuitModel, track: Track) -> tuple[float, WorstPair]:
    """Minimum triplet log-probability over the track, with its arg-min pair.

    Ties break to the smallest first position, then smallest second. Raises
    UnscorableTrack when the track yields fewer than two tracklets at the
    model scale.
    """
    seq = canonize_track(track, model.vocab)
    if seq.size < 2:
        raise UnscorableTrack(
            f"track '{track.track_id}' yields fewer than two tracklets "
            "at the pursuit scale")
    return sequence_conformance(model, seq)


def sequence_conformance(model: PursuitModel, sequence) -> tuple[float, WorstPair]:
    """conformance_rho2 on an already-canonized primitive sequence."""
    seq = np.asarray(sequence, dtype=np.intp)
    if seq.size < 2:
        raise UnscorableTrack("sequence has fewer than two elements")
    a, b = _triplet_positions(seq.size)
    heads, tails = seq[a], seq[b]
    lengths = (b - a) * (model.delta_d / 2.0)

    logp = np.full(heads.shape[0], model.unseen_pair_log_prob, dtype=np.float64)
    pair_keys = heads * len(model.vocab) + tails
    for key in np.unique(pair_keys):
        ps = model.stats.get((int(key) // len(model.vocab),
                              int(key) % len(model.vocab)))
        if ps is None:
            continue
        mask = pair_keys == key
        logp[mask] = ps.pair_log_prob + _gaussian_log_pdf(
            lengths[mask], ps.mean_length, ps.sigma)

    k = int(np.argmin(logp))
    worst = WorstPair(int(a[k]), int(b[k]), int(heads[k]), int(tails[k]))
    return float(logp[k]), worst
