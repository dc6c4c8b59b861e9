"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -s` to see one pass/fail line per
criterion.
"""

import math
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.stats import ks_2samp

from trackwatch import synth
from trackwatch.markov import (ChainModel, average_loglik, cdf_inverse,
                               cdf_value)
from trackwatch.pipeline import (ThresholdConfig, default_scale_configs,
                                 model_to_bytes, score_tracks, train)
from trackwatch.pursuit import (PairStats, PursuitModel, sequence_conformance,
                                triplet_log_prob)
from trackwatch.tracker import TrackerConfig, track_step
from trackwatch.tracklets import (ScaleConfig, Tracklet, angular_distance,
                                  circular_mean_update, cluster_tracklets,
                                  mod_pi)
from trackwatch.tracks import FilterConfig, Track, filter_tracks


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {name}: FAIL", file=sys.stderr)
        raise
    print(f"ACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------


def _shifted_pair(rng, shift, size=120, factor=4):
    """A texture and its bilinear-shifted twin, synthesized at 4x
    supersampling and area-downsampled so the resampling kernel's imprint
    does not contaminate the ground truth."""
    hi = synth.smooth_texture(size * factor, size * factor, rng,
                              blur=2.0 * factor)
    hi_shift = synth.shift_frame(hi, shift[0] * factor, shift[1] * factor)
    prev = hi.reshape(size, factor, size, factor).mean(axis=(1, 3))
    nxt = hi_shift.reshape(size, factor, size, factor).mean(axis=(1, 3))
    return prev, nxt


def test_tracker_accuracy():
    with criterion("tracker-accuracy"):
        cfg = TrackerConfig(pyramid_levels=3)
        rng = np.random.default_rng(1001)
        tracking_time = 0.0
        worst = 0.0
        n_windows = 0
        for _ in range(20):
            ang = rng.uniform(0, 2 * math.pi)
            mag = 3.0 if n_windows % 25 == 0 else rng.uniform(0.0, 3.0)
            shift = np.array([math.cos(ang), math.sin(ang)]) * mag
            prev, nxt = _shifted_pair(rng, shift)
            for _ in range(5):
                pos = rng.uniform(45, 75, 2)
                t0 = time.perf_counter()
                d, _ = track_step(prev, nxt, pos, cfg)
                tracking_time += time.perf_counter() - t0
                worst = max(worst, float(np.linalg.norm(d - shift)))
                n_windows += 1
        assert n_windows == 100
        assert worst < 0.05, f"worst displacement error {worst:.4f} px"
        assert tracking_time < 10.0, \
            f"{n_windows} windows took {tracking_time:.1f} s"

        # exchange symmetry at the convergence tolerance on exact translations
        for _ in range(10):
            tex = synth.smooth_texture(120, 120, rng, blur=2.0)
            tx, ty = (int(v) for v in rng.integers(-3, 4, 2))
            nxt = np.roll(tex, (ty, tx), axis=(0, 1))
            d_fwd, _ = track_step(tex, nxt, np.array([60.0, 60.0]), cfg)
            d_bwd, _ = track_step(nxt, tex, np.array([60.0, 60.0]) + d_fwd, cfg)
            assert np.linalg.norm(d_fwd + d_bwd) <= cfg.convergence_eps


def test_filter_correctness():
    with criterion("filter-correctness"):
        rng = np.random.default_rng(1002)
        jitter = synth.jitter_tracks(1000, rng, sigma=0.6)
        moving = synth.moving_tracks(1000, rng)
        mixed = []
        for a, b in zip(jitter, moving):
            mixed.extend([a, b])
        kept = filter_tracks(mixed, FilterConfig())
        kept_ids = [t.track_id for t in kept]
        assert kept_ids == [t.track_id for t in mixed
                            if t.track_id.startswith("mov")]
        assert len(kept) == 1000


def test_clustering_oracle():
    with criterion("clustering-oracle"):
        rng = np.random.default_rng(1003)
        scale = ScaleConfig(50.0, delta_q=25.0, delta_theta=math.pi / 16)
        # planted centres: separated spatially by > 2*delta_q or, when
        # co-located, angularly by > 2*delta_theta
        planted = []
        spots = [(100.0 * i, 700.0 * j) for i in range(4) for j in range(2)]
        for k, (px, py) in enumerate(spots):
            planted.append((px, py, mod_pi(0.2 + 0.1 * k)))
            planted.append((px, py, mod_pi(0.2 + 0.1 * k + math.pi / 2)))
        tracklets = []
        for k, (px, py, pth) in enumerate(planted):
            for i in range(150):
                tracklets.append(Tracklet(
                    px + rng.uniform(-5, 5), py + rng.uniform(-5, 5),
                    mod_pi(pth + rng.uniform(-scale.delta_theta / 3,
                                             scale.delta_theta / 3)),
                    f"c{k:02d}", i))
        vocab = cluster_tracklets(tracklets, scale)
        assert len(vocab) == len(planted), \
            f"recovered {len(vocab)} clusters, planted {len(planted)}"
        unmatched = list(vocab.primitives)
        for px, py, pth in planted:
            hit = next((p for p in unmatched
                        if math.hypot(p.x - px, p.y - py) <= 1.0
                        and angular_distance(p.theta, pth) <= 0.01), None)
            assert hit is not None, f"no centre within 1 px / 0.01 rad of {px, py, pth}"
            unmatched.remove(hit)

        # axial mean against the complex-resultant oracle
        for _ in range(10_000):
            c = rng.uniform(0, math.pi)
            n = int(rng.integers(1, 12))
            devs = rng.uniform(-math.pi / 4 + 1e-9, math.pi / 4 - 1e-9, n)
            members = np.array([mod_pi(c + d) for d in devs])
            got = circular_mean_update(c, members)
            oracle = mod_pi(float(np.angle(np.exp(2j * members).sum())) / 2.0)
            assert angular_distance(got, oracle) < 1e-9


def test_likelihood_oracle():
    with criterion("likelihood-oracle"):
        rng = np.random.default_rng(1004)
        for _ in range(1000):
            v = int(rng.integers(2, 9))
            prior = rng.dirichlet(np.ones(v) * 2.0)
            trans = np.vstack([rng.dirichlet(np.ones(v) * 2.0) for _ in range(v)])
            chain = ChainModel(None, np.log(prior), np.log(trans), 0.0)
            seq = rng.integers(0, v, size=int(rng.integers(1, 15)))
            p = prior[seq[0]]
            for a, b in zip(seq[:-1], seq[1:]):
                p *= trans[a, b]
            oracle = math.log(p) / seq.size
            assert math.isclose(average_loglik(chain, seq), oracle,
                                rel_tol=1e-9, abs_tol=1e-9)

        from test_pursuit import brute_force_rho2, random_pursuit_model
        for _ in range(1000):
            model = random_pursuit_model(rng, v=int(rng.integers(2, 8)))
            seq = rng.integers(0, len(model.vocab), size=int(rng.integers(2, 20)))
            got, worst = sequence_conformance(model, seq)
            want, want_pair = brute_force_rho2(model, seq)
            assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)
            assert (worst.pos_a, worst.pos_b) == want_pair


def test_cdf_matching(corridor_model):
    with criterion("cdf-matching"):
        ens = corridor_model.ensemble
        ref = ens.cdfs[0].sorted_samples
        assert ref.size >= 1000
        for k, cdf in enumerate(ens.cdfs):
            sample = cdf.sorted_samples
            assert sample.size >= 1000
            transformed = [cdf_inverse(ens.cdfs[0], cdf_value(cdf, r))
                           for r in sample]
            stat = ks_2samp(transformed, ref).statistic
            assert stat < 0.05, f"scale {k + 1}: KS distance {stat:.4f}"


def _hub_walk_corpus(n, seed, n_short=200):
    """Hub-to-hub walks bent at a continuous random midpoint, plus stubs.

    Hubs keep every primitive heavily shared (a once-seen head produces the
    same worst-triplet value in every track that owns one, so sparse worlds
    grow tied tails), while the continuous midpoints give the pair
    path-length distributions distinct violation margins. The stubs are
    scoreable only at the smallest scale, desynchronizing the per-scale CDF
    sample sizes: with equal sizes the quantile transform maps equal ranks
    onto exactly equal values, again forcing tied tail scores.
    """
    rng = np.random.default_rng(seed)
    hubs = np.array([[0, 0], [240, 0], [0, 240], [240, 240],
                     [120, -60], [120, 300], [-60, 120], [300, 120]], float)
    tracks = []
    for i in range(n):
        a, b = rng.choice(len(hubs), 2, replace=False)
        origin, dest = hubs[a], hubs[b]
        while True:
            mid = rng.uniform(-20, 260, 2)
            if (np.linalg.norm(mid - origin) >= 60
                    and np.linalg.norm(mid - dest) >= 60):
                break
        pts = []
        for p, q in ((origin, mid), (mid, dest)):
            m = int(np.linalg.norm(q - p) / 2.0)
            ts = np.linspace(0, 1, m, endpoint=False)
            pts.append(p + ts[:, None] * (q - p))
        pts = np.vstack(pts + [dest[None, :]])
        pts = pts + rng.normal(0, 0.15, pts.shape)
        tracks.append(Track(f"w{i:05d}", np.arange(pts.shape[0]), pts))
    # stubs share one busy lane so their single-symbol scores sit in the
    # body of the distribution, not in the tail under examination
    for i in range(n_short):
        m = int(rng.integers(31, 36))  # long enough to pass the filter,
        h = rng.normal(0.0, 0.05)      # too short for the second scale
        steps = np.column_stack([2.0 * np.cos(np.full(m - 1, h)),
                                 2.0 * np.sin(np.full(m - 1, h))])
        pts = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
        pts += np.array([110.0, 110.0]) + rng.uniform(-8, 8, 2)
        pts += rng.normal(0, 0.15, pts.shape)
        tracks.append(Track(f"s{i:05d}", np.arange(m), pts))
    return tracks


def test_threshold_protocol():
    with criterion("threshold-protocol"):
        tracks = _hub_walk_corpus(10_000, seed=1005)
        model = train(tracks, scales=default_scale_configs((50.0, 75.0)))
        recs = score_tracks(model, tracks)
        full = [r for r in recs if r.status == "ok" and r.rho2 is not None]
        assert len(full) == 10_000, "need 10,000 fully scoreable tracks"
        assert model.training_meta["n_rho2_scored"] == 10_000
        below1 = sum(r.rho1 < model.ensemble.threshold_r1
                     for r in recs if r.status == "ok")
        below2 = sum(r.rho2 < model.pursuit.threshold_r2 for r in full)
        assert below1 == 5, f"{below1} tracks strictly below the rho1 threshold"
        assert below2 == 5, f"{below2} tracks strictly below the rho2 threshold"


def test_corridor_world_end_to_end(corridor_corpus):
    with criterion("corridor-world-end-to-end"):
        start = time.perf_counter()
        # At 2,000 tracks the 0.05% quantile index falls inside the
        # normalization-floor atom (one per-scale arg-min track per scale),
        # which would leave the ensemble threshold vacuously at the floor;
        # 0.2% clears the atom, matching the regime a 113,700-track corpus
        # gives the 0.05% quantile. The protocol itself is pinned at 0.05%
        # in test_threshold_protocol.
        model = train(corridor_corpus, threshold_cfg=ThresholdConfig(0.002))

        held = synth.corridor_heldout_normal(200, seed=1009)
        recs = [r for r in score_tracks(model, held) if r.status == "ok"]
        assert len(recs) >= 0.99 * len(held)
        normal = np.mean([not r.novel1 and not (r.novel2 or False) for r in recs])
        assert normal >= 0.99, f"held-out normal rate {normal:.3f}"

        sharp = synth.corridor_sharp_turn_probes(100, seed=3301)
        recs = [r for r in score_tracks(model, sharp) if r.status == "ok"]
        rate = np.mean([r.novel2 for r in recs])
        assert rate >= 0.95, f"sharp-turn rho2 flag rate {rate:.3f}"
        # the ensemble threshold is active: locally-impossible motion floors
        # the normalized likelihood at every scale and is flagged too
        sharp_r1 = np.mean([r.novel1 for r in recs])
        assert sharp_r1 >= 0.5, f"sharp-turn rho1 flag rate {sharp_r1:.3f}"

        corners = synth.corridor_corner_probes(100, seed=2203)
        recs = [r for r in score_tracks(model, corners) if r.status == "ok"]
        flagged = np.mean([r.novel1 or (r.novel2 or False) for r in recs])
        assert flagged <= 0.05, f"contextual corner flag rate {flagged:.3f}"

        # the discrepancy family: every local move trained, end-to-end path
        # lengths far off the direct distance
        detours = synth.corridor_detour_probes(60, seed=4409)
        recs = [r for r in score_tracks(model, detours) if r.status == "ok"]
        rho2_rate = np.mean([r.novel2 for r in recs])
        rho1_rate = np.mean([r.novel1 for r in recs])
        assert rho2_rate >= 0.9, f"detour rho2 flag rate {rho2_rate:.3f}"
        assert rho1_rate <= 0.1, f"detour rho1 flag rate {rho1_rate:.3f}"

        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"corridor run took {elapsed:.1f} s"


def test_determinism():
    with criterion("determinism"):
        blobs = []
        for _ in range(2):
            corpus = synth.corridor_training_corpus(2000, seed=7)
            blobs.append(model_to_bytes(train(corpus)))
        assert blobs[0] == blobs[1]


def test_probe_loop_service_side(corridor_model, tmp_path):
    """[SECONDARY] service half of the probe loop; the browser half is
    exercised by the frontend test suite against recorded fixtures."""
    with criterion("probe-loop [SECONDARY]"):
        from fastapi.testclient import TestClient

        from trackwatch.pgm import write_pgm
        from trackwatch.service import create_app

        scene = tmp_path / "scene.pgm"
        write_pgm(scene, synth.corridor_scene_image())
        client = TestClient(create_app(corridor_model, scene_path=scene))

        # a straight in-corridor probe: both verdicts negative
        straight = [[100.0, 300.0], [400.0, 300.0], [700.0, 300.0]]
        body = client.post("/score", json={"points": straight}).json()
        assert body["novel1"] is False and body["novel2"] is False

        # a zig-zag probe: novel, with the worst pair spanning the zig-zag
        zigzag = [[100.0, 300.0], [250.0, 300.0], [250.0, 180.0],
                  [340.0, 180.0], [340.0, 300.0], [650.0, 300.0]]
        body = client.post("/score", json={"points": zigzag}).json()
        assert body["novel2"] is True
        wp = body["worst_pair"]
        assert wp is not None
        xs = (wp["prim_a"]["X"], wp["prim_b"]["X"])
        assert min(xs) < 340.0 + 120.0 and max(xs) > 250.0 - 120.0
