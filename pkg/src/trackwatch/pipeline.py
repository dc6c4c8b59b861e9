"""Training orchestration, threshold selection and model persistence.

Training filters the corpus, builds one vocabulary + Markov chain + score
CDF per characteristic scale, fits the pursuit model on the smallest-scale
sequences, and sets both novelty thresholds at a lower quantile of the
training conformance scores. The model file is versioned canonical JSON
(sorted keys, 17-significant-digit floats) so identical training runs
produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ModelFormatError, UnscorableTrack, ValidationError
from .markov import (ChainModel, EmpiricalCdf, EnsembleModel, ScaleScore,
                     average_loglik, conformance_rho1, fit_chain)
from .pursuit import PursuitModel, PairStats, WorstPair, conformance_rho2, fit_pursuit
from .tracklets import (Primitive, PrimitiveVocabulary, ScaleConfig,
                        canonize_track, cluster_tracklets, extract_tracklets)
from .tracks import FilterConfig, Track, filter_tracks

FORMAT_VERSION = 1

DEFAULT_SCALES = (50.0, 75.0, 110.0, 150.0)


@dataclass(frozen=True)
class ThresholdConfig:
    """Novelty thresholds sit at this lower quantile of training scores."""

    quantile: float = 0.0005

    def __post_init__(self):
        if not 0.0 < self.quantile < 1.0:
            raise ValidationError("quantile must be strictly inside (0, 1)")


@dataclass(frozen=True)
class SceneModel:
    ensemble: EnsembleModel
    pursuit: PursuitModel
    training_meta: dict

    def __post_init__(self):
        if self.ensemble.chains[0].vocab is not self.pursuit.vocab:
            raise ValidationError(
                "pursuit vocabulary must be the ensemble's smallest-scale vocabulary")


def default_scale_configs(delta_ds=DEFAULT_SCALES, delta_q: float = 25.0,
                          delta_theta: float = math.pi / 16) -> list[ScaleConfig]:
    return [ScaleConfig(float(dd), delta_q, delta_theta) for dd in delta_ds]


def select_threshold(scores, quantile: float) -> float:
    """The (floor(n*q)+1)-th smallest score, so that exactly floor(n*q)
    scores fall strictly below it (when scores are distinct)."""
    arr = np.sort(np.asarray(scores, dtype=np.float64))
    if arr.size == 0:
        raise ValidationError("no scores to select a threshold from")
    k = int(math.floor(arr.size * quantile + 1e-9))
    return float(arr[min(k, arr.size - 1)])


def train(tracks: list[Track], scales: list[ScaleConfig] | None = None,
          filter_cfg: FilterConfig | None = None,
          threshold_cfg: ThresholdConfig | None = None,
          *, alpha: float = 0.5, sigma_floor: float | None = None,
          unseen_margin: float = 10.0) -> SceneModel:
    """Fit the full scene model from raw tracks.

    Per scale (strictly increasing delta_d): extract tracklets from every
    filtered track, cluster them into a vocabulary, canonize the tracks,
    and fit the chain and its score CDF. The pursuit model is fit on the
    smallest-scale sequences. Both thresholds are then set at the
    configured lower quantile of the training conformance scores; tracks
    too short to score are excluded there and counted in training_meta.
    """
    scales = list(scales) if scales is not None else default_scale_configs()
    if not scales:
        raise ValidationError("need at least one scale")
    dds = [s.delta_d for s in scales]
    if any(b <= a for a, b in zip(dds, dds[1:])):
        raise ValidationError("scales must be strictly increasing in delta_d")
    filter_cfg = filter_cfg or FilterConfig()
    threshold_cfg = threshold_cfg or ThresholdConfig()

    kept = filter_tracks(tracks, filter_cfg)
    if not kept:
        raise ValidationError("no tracks survive filtering")

    chains: list[ChainModel] = []
    cdfs: list[EmpiricalCdf] = []
    scale1_sequences: list[np.ndarray] = []
    for k, scale in enumerate(scales):
        tracklets = []
        for t in kept:
            tracklets.extend(extract_tracklets(t, scale))
        if not tracklets:
            raise ValidationError(
                f"no tracklets at scale delta_d={scale.delta_d}; "
                "training corpus too short for this scale")
        vocab = cluster_tracklets(tracklets, scale)
        sequences = [canonize_track(t, vocab) for t in kept]
        sequences = [s for s in sequences if s.size > 0]
        chain = fit_chain(sequences, len(vocab), alpha, vocab=vocab)
        scores = [average_loglik(chain, s) for s in sequences]
        chains.append(chain)
        cdfs.append(EmpiricalCdf.from_scores(scores))
        if k == 0:
            scale1_sequences = sequences

    ensemble = EnsembleModel(tuple(chains), tuple(cdfs), threshold_r1=-math.inf)
    pursuit = fit_pursuit(scale1_sequences, chains[0].vocab, alpha=alpha,
                          sigma_floor=sigma_floor, unseen_margin=unseen_margin)

    rho1s, rho2s = [], []
    n_skipped_r1 = n_skipped_r2 = 0
    for t in kept:
        try:
            rho1s.append(conformance_rho1(ensemble, t)[0])
        except UnscorableTrack:
            n_skipped_r1 += 1
        try:
            rho2s.append(conformance_rho2(pursuit, t)[0])
        except UnscorableTrack:
            n_skipped_r2 += 1
    if not rho1s or not rho2s:
        raise ValidationError("no training track is scoreable")

    ensemble = dataclasses.replace(
        ensemble, threshold_r1=select_threshold(rho1s, threshold_cfg.quantile))
    pursuit = dataclasses.replace(
        pursuit, threshold_r2=select_threshold(rho2s, threshold_cfg.quantile))

    meta = {
        "assumed_fps": 25.0,
        "n_tracks_input": len(tracks),
        "n_tracks_filtered": len(kept),
        "n_rho1_scored": len(rho1s),
        "n_rho2_scored": len(rho2s),
        "n_rho1_unscorable": n_skipped_r1,
        "n_rho2_unscorable": n_skipped_r2,
        "filter": {"min_length": filter_cfg.min_length,
                   "min_variance": filter_cfg.min_variance},
        "threshold_quantile": threshold_cfg.quantile,
        "smoothing_alpha": alpha,
        "vocab_sizes": [c.vocab_size for c in chains],
    }
    return SceneModel(ensemble, pursuit, meta)


# ---------------------------------------------------------------------------
# scoring


@dataclass(frozen=True)
class TrackScore:
    """One scored track; status is 'ok' or an unscorable reason."""

    track_id: str
    status: str
    rho1: float | None = None
    rho2: float | None = None
    novel1: bool | None = None
    novel2: bool | None = None
    per_scale: tuple[ScaleScore, ...] = ()
    worst_pair: WorstPair | None = None
    canonized: tuple[int, ...] = ()


def score_one(model: SceneModel, track: Track) -> TrackScore:
    try:
        seq1 = canonize_track(track, model.pursuit.vocab)
        rho1, per_scale = conformance_rho1(model.ensemble, track)
    except UnscorableTrack as e:
        return TrackScore(track.track_id, f"unscorable: {e}")
    rho2 = worst = novel2 = None
    if seq1.size >= 2:
        rho2, worst = conformance_rho2(model.pursuit, track)
        novel2 = bool(rho2 < model.pursuit.threshold_r2)
    return TrackScore(
        track_id=track.track_id,
        status="ok",
        rho1=rho1,
        rho2=rho2,
        novel1=bool(rho1 < model.ensemble.threshold_r1),
        novel2=novel2,
        per_scale=tuple(per_scale),
        worst_pair=worst,
        canonized=tuple(int(i) for i in seq1),
    )


def score_tracks(model: SceneModel, tracks: list[Track]) -> list[TrackScore]:
    """Score every track; unscorable tracks get a status record, not an error."""
    return [score_one(model, t) for t in tracks]


SCORES_CSV_HEADER = "track_id,rho1,rho2,novel1,novel2,worst_i,worst_j"


def write_scores_csv(records: list[TrackScore], dest) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write(SCORES_CSV_HEADER + "\n")
        for r in records:
            if r.status != "ok":
                fh.write(f"{r.track_id},,,,,,\n")
                continue
            rho2 = _float_repr(r.rho2) if r.rho2 is not None else ""
            novel2 = _bool_repr(r.novel2) if r.novel2 is not None else ""
            wi = str(r.worst_pair.pos_a) if r.worst_pair else ""
            wj = str(r.worst_pair.pos_b) if r.worst_pair else ""
            fh.write(f"{r.track_id},{_float_repr(r.rho1)},{rho2},"
                     f"{_bool_repr(r.novel1)},{novel2},{wi},{wj}\n")
    finally:
        if own:
            fh.close()


def _bool_repr(b: bool) -> str:
    return "true" if b else "false"


# ---------------------------------------------------------------------------
# canonical serialization


def _float_repr(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(float(x), ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _canon(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(json.dumps(k) + ":" + _canon(v) for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_repr(float(obj))
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _scale_to_dict(s: ScaleConfig) -> dict:
    return {"delta_d": s.delta_d, "delta_q": s.delta_q, "delta_theta": s.delta_theta}


def _vocab_to_dict(v: PrimitiveVocabulary) -> dict:
    return {
        "scale": _scale_to_dict(v.scale),
        "primitives": [{"X": p.x, "Y": p.y, "Theta": p.theta,
                        "member_count": p.member_count} for p in v.primitives],
    }


def model_to_dict(model: SceneModel) -> dict:
    ens = model.ensemble
    return {
        "format_version": FORMAT_VERSION,
        "ensemble": {
            "threshold_r1": ens.threshold_r1,
            "scales": [
                {
                    "vocabulary": _vocab_to_dict(chain.vocab),
                    "alpha": chain.smoothing_alpha,
                    "log_prior": chain.log_prior.tolist(),
                    "log_transition": chain.log_transition.tolist(),
                    "cdf_samples": cdf.sorted_samples.tolist(),
                }
                for chain, cdf in zip(ens.chains, ens.cdfs)
            ],
        },
        "pursuit": {
            "threshold_r2": model.pursuit.threshold_r2,
            "sigma_floor": model.pursuit.sigma_floor,
            "unseen_pair_log_prob": model.pursuit.unseen_pair_log_prob,
            "alpha": model.pursuit.smoothing_alpha,
            "pairs": [
                {"from": ps.from_idx, "to": ps.to_idx,
                 "pair_log_prob": ps.pair_log_prob,
                 "mean_length": ps.mean_length, "sigma": ps.sigma,
                 "count": ps.observation_count}
                for ps in sorted(model.pursuit.stats.values(),
                                 key=lambda p: (p.from_idx, p.to_idx))
            ],
        },
        "training_meta": model.training_meta,
    }


def model_to_bytes(model: SceneModel) -> bytes:
    return (_canon(model_to_dict(model)) + "\n").encode("utf-8")


def _vocab_from_dict(d: dict) -> PrimitiveVocabulary:
    scale = ScaleConfig(**d["scale"])
    prims = tuple(Primitive(p["X"], p["Y"], p["Theta"], int(p["member_count"]))
                  for p in d["primitives"])
    return PrimitiveVocabulary(scale, prims)


def model_from_bytes(data: bytes) -> SceneModel:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        offset = getattr(e, "pos", 0)
        raise ModelFormatError(f"corrupt model file at offset {offset}") from e
    if not isinstance(obj, dict) or "format_version" not in obj:
        raise ModelFormatError("not a scene model file")
    if obj["format_version"] != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {obj['format_version']} "
            f"(expected {FORMAT_VERSION})")
    try:
        chains, cdfs = [], []
        for sd in obj["ensemble"]["scales"]:
            vocab = _vocab_from_dict(sd["vocabulary"])
            chains.append(ChainModel(
                vocab,
                np.asarray(sd["log_prior"], dtype=np.float64),
                np.asarray(sd["log_transition"], dtype=np.float64),
                float(sd["alpha"])))
            cdfs.append(EmpiricalCdf(np.asarray(sd["cdf_samples"], dtype=np.float64)))
        ensemble = EnsembleModel(tuple(chains), tuple(cdfs),
                                 float(obj["ensemble"]["threshold_r1"]))
        pd = obj["pursuit"]
        stats = {}
        for p in pd["pairs"]:
            key = (int(p["from"]), int(p["to"]))
            stats[key] = PairStats(key[0], key[1], float(p["pair_log_prob"]),
                                   float(p["mean_length"]), float(p["sigma"]),
                                   int(p["count"]))
        pursuit = PursuitModel(chains[0].vocab, stats,
                               float(pd["unseen_pair_log_prob"]),
                               float(pd["threshold_r2"]),
                               float(pd["sigma_floor"]), float(pd["alpha"]))
        return SceneModel(ensemble, pursuit, dict(obj["training_meta"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"malformed model file: {e}") from e


def save_model(model: SceneModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> SceneModel:
    return model_from_bytes(Path(path).read_bytes())
