"""Multi-scale ensemble of first-order Markov chains over primitive sequences.

Each chain is fit independently at its own characteristic scale. A track is
scored per scale by its length-normalized log-likelihood; scores from
different scales are made comparable by pushing each through its own training
CDF and pulling back through the smallest scale's inverse CDF. The ensemble
conformance is the minimum of the normalized per-scale scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AssignmentImpossible, UnscorableTrack, ValidationError
from .tracklets import PrimitiveVocabulary, canonize_track
from .tracks import Track


@dataclass(frozen=True)
class ChainModel:
    """First-order chain at one scale: log priors and log transitions.

    Priors count sequence-initial primitives only, mirroring the likelihood
    factorization. Additive pseudo-counts keep unseen events finite; with a
    zero pseudo-count, rows of never-observed heads fall back to uniform so
    every row still normalizes.
    """

    vocab: PrimitiveVocabulary | None
    log_prior: np.ndarray       # (V,)
    log_transition: np.ndarray  # (V, V), row i is P(. | i)
    smoothing_alpha: float

    def __post_init__(self):
        lp = np.asarray(self.log_prior, dtype=np.float64)
        lt = np.asarray(self.log_transition, dtype=np.float64)
        v = lp.shape[0]
        if lt.shape != (v, v):
            raise ValidationError("log_transition must be square and match log_prior")
        lp.setflags(write=False)
        lt.setflags(write=False)
        object.__setattr__(self, "log_prior", lp)
        object.__setattr__(self, "log_transition", lt)

    @property
    def vocab_size(self) -> int:
        return int(self.log_prior.shape[0])


def fit_chain(sequences: Sequence[Sequence[int]], vocab_size: int,
              alpha: float = 0.5,
              vocab: PrimitiveVocabulary | None = None) -> ChainModel:
    """Count-based fit of priors and transitions with additive smoothing.

    prior(i)   = (#sequences starting with i + alpha) / (#non-empty + alpha*V)
    trans(j|i) = (#bigrams i->j + alpha) / (#bigrams with head i + alpha*V)

    Empty sequences contribute nothing.
    """
    if vocab_size <= 0:
        raise ValidationError("vocab_size must be positive")
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    v = vocab_size
    first = np.zeros(v, dtype=np.float64)
    bigram = np.zeros((v, v), dtype=np.float64)
    any_nonempty = False
    for seq in sequences:
        s = np.asarray(seq, dtype=np.intp)
        if s.size == 0:
            continue
        if np.any(s < 0) or np.any(s >= v):
            raise ValidationError("sequence index out of vocabulary range")
        any_nonempty = True
        first[s[0]] += 1.0
        if s.size > 1:
            np.add.at(bigram, (s[:-1], s[1:]), 1.0)
    if not any_nonempty:
        raise ValidationError("fit_chain needs at least one non-empty sequence")

    with np.errstate(divide="ignore"):
        prior = (first + alpha) / (first.sum() + alpha * v)
        log_prior = np.log(prior)
        heads = bigram.sum(axis=1)
        denom = heads + alpha * v
        trans = np.empty_like(bigram)
        seen = denom > 0
        trans[seen] = (bigram[seen] + alpha) / denom[seen, None]
        trans[~seen] = 1.0 / v  # unobserved head, alpha=0: keep rows normalized
        log_trans = np.log(trans)
    return ChainModel(vocab, log_prior, log_trans, float(alpha))


def average_loglik(chain: ChainModel, sequence) -> float:
    """Length-normalized sequence log-likelihood:
    (log prior(s1) + sum log trans(si | si-1)) / M."""
    s = np.asarray(sequence, dtype=np.intp)
    if s.size == 0:
        raise UnscorableTrack("cannot score an empty sequence")
    if np.any(s < 0) or np.any(s >= chain.vocab_size):
        raise ValidationError("sequence index out of vocabulary range")
    total = chain.log_prior[s[0]]
    if s.size > 1:
        total = total + chain.log_transition[s[:-1], s[1:]].sum()
    return float(total / s.size)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical CDF with rank/(n+1) plotting positions and linear
    interpolation between order statistics.

    Tied samples collapse to their average plotting position (the
    mid-distribution convention), which keeps the transform a function and
    centres each atom's probability mass; canonized corpora tie heavily
    because a symbol sequence is a route signature.
    """

    sorted_samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sorted_samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("EmpiricalCdf needs a non-empty 1-d sample")
        if np.any(np.diff(arr) < 0):
            raise ValidationError("EmpiricalCdf samples must be ascending")
        arr.setflags(write=False)
        object.__setattr__(self, "sorted_samples", arr)
        vals, first, counts = np.unique(arr, return_index=True,
                                        return_counts=True)
        mid_rank = first + (counts + 1) / 2.0  # 1-based average rank of ties
        pos = mid_rank / (arr.shape[0] + 1)
        for name, v in (("_bp_values", vals), ("_bp_positions", pos)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_scores(cls, scores) -> "EmpiricalCdf":
        return cls(np.sort(np.asarray(scores, dtype=np.float64)))

    @property
    def n(self) -> int:
        return int(self.sorted_samples.shape[0])


def cdf_value(cdf: EmpiricalCdf, r: float) -> float:
    """Fraction of training scores <= r, clamped to [1/(n+1), n/(n+1)]."""
    n = cdf.n
    return float(np.interp(r, cdf._bp_values, cdf._bp_positions,
                           left=1.0 / (n + 1), right=n / (n + 1.0)))


def cdf_inverse(cdf: EmpiricalCdf, u: float) -> float:
    """Inverse of cdf_value under the same interpolation rule; u in (0, 1)."""
    if not 0.0 < u < 1.0:
        raise ValidationError("u must be strictly inside (0, 1)")
    v = cdf._bp_values
    return float(np.interp(u, cdf._bp_positions, v, left=v[0], right=v[-1]))


@dataclass(frozen=True)
class ScaleScore:
    """Per-scale diagnostic: raw and CDF-normalized average log-likelihood."""

    delta_d: float
    r: float
    r_hat: float


@dataclass(frozen=True)
class EnsembleModel:
    chains: tuple[ChainModel, ...]
    cdfs: tuple[EmpiricalCdf, ...]
    threshold_r1: float

    def __post_init__(self):
        chains = tuple(self.chains)
        cdfs = tuple(self.cdfs)
        if not chains or len(chains) != len(cdfs):
            raise ValidationError("chains and cdfs must align and be non-empty")
        dds = [c.vocab.scale.delta_d for c in chains]
        if any(b <= a for a, b in zip(dds, dds[1:])):
            raise ValidationError("chain scales must be strictly increasing")
        object.__setattr__(self, "chains", chains)
        object.__setattr__(self, "cdfs", cdfs)

    @property
    def scales(self) -> list[float]:
        return [c.vocab.scale.delta_d for c in self.chains]


def conformance_rho1(model: EnsembleModel, track: Track) -> tuple[float, list[ScaleScore]]:
    """Minimum over scales of the CDF-normalized average log-likelihood.

    Scales where the track is too short for a single tracklet are skipped;
    the track must be canonizable at the smallest scale. Returns the minimum
    and the per-scale diagnostics for the scales that were scored.
    """
    per_scale: list[ScaleScore] = []
    ref_cdf = model.cdfs[0]
    for k, (chain, cdf) in enumerate(zip(model.chains, model.cdfs)):
        try:
            seq = canonize_track(track, chain.vocab)
        except AssignmentImpossible:
            seq = np.empty(0, dtype=np.intp)
        if seq.size == 0:
            if k == 0:
                raise UnscorableTrack(
                    f"track '{track.track_id}' too short at the smallest scale")
            continue
        r = average_loglik(chain, seq)
        r_hat = cdf_inverse(ref_cdf, cdf_value(cdf, r))
        per_scale.append(ScaleScore(chain.vocab.scale.delta_d, r, r_hat))
    rho1 = min(s.r_hat for s in per_scale)
    return rho1, per_scale
