import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from trackwatch.errors import UnscorableTrack, ValidationError
from trackwatch.markov import (ChainModel, EmpiricalCdf, EnsembleModel,
                               average_loglik, cdf_inverse, cdf_value,
                               conformance_rho1, fit_chain)
from trackwatch.pipeline import score_tracks, train
from trackwatch import synth


def brute_force_average_loglik(chain, seq):
    # linear-space product of probabilities, then one log at the end
    prior = np.exp(chain.log_prior)
    trans = np.exp(chain.log_transition)
    p = prior[seq[0]]
    for a, b in zip(seq[:-1], seq[1:]):
        p *= trans[a, b]
    return math.log(p) / len(seq)


def random_chain(rng, v):
    prior = rng.dirichlet(np.ones(v) * 2.0)
    trans = np.vstack([rng.dirichlet(np.ones(v) * 2.0) for _ in range(v)])
    return ChainModel(None, np.log(prior), np.log(trans), 0.0)


class TestFitChain:
    def test_deterministic_corpus_unsmoothed(self):
        chain = fit_chain([[0, 1], [0, 1]], vocab_size=2, alpha=0.0)
        assert math.isclose(math.exp(chain.log_prior[0]), 1.0)
        assert math.isclose(math.exp(chain.log_transition[0, 1]), 1.0)

    def test_smoothed_corpus(self):
        chain = fit_chain([[0, 1], [0, 1]], vocab_size=2, alpha=1.0)
        assert math.isclose(math.exp(chain.log_prior[0]), 0.75)
        assert math.isclose(math.exp(chain.log_transition[0, 1]), 0.75)

    def test_empty_sequence_contributes_nothing(self):
        a = fit_chain([[0, 1], [], [0, 1]], vocab_size=2, alpha=1.0)
        b = fit_chain([[0, 1], [0, 1]], vocab_size=2, alpha=1.0)
        assert np.array_equal(a.log_prior, b.log_prior)
        assert np.array_equal(a.log_transition, b.log_transition)

    def test_zero_vocab_rejected(self):
        with pytest.raises(ValidationError):
            fit_chain([[0]], vocab_size=0)

    def test_normalization_invariants(self):
        rng = np.random.default_rng(21)
        for alpha in (0.0, 0.25, 0.5, 2.0):
            v = int(rng.integers(2, 12))
            seqs = [rng.integers(0, v, size=rng.integers(1, 20)).tolist()
                    for _ in range(30)]
            chain = fit_chain(seqs, v, alpha)
            assert math.isclose(np.exp(chain.log_prior).sum(), 1.0, abs_tol=1e-9)
            rows = np.exp(chain.log_transition).sum(axis=1)
            assert np.allclose(rows, 1.0, atol=1e-9)


class TestAverageLoglik:
    def test_single_element(self):
        chain = fit_chain([[1], [0]], vocab_size=2, alpha=1.0)
        assert math.isclose(average_loglik(chain, [1]),
                            float(chain.log_prior[1]))

    def test_deterministic_chain_scores_zero(self):
        chain = ChainModel(None, np.log([1.0, 1.0]), np.log(np.ones((2, 2))), 0.0)
        # all-ones "probabilities" make every log term zero
        assert average_loglik(chain, [0, 1, 0, 1]) == 0.0

    def test_two_step_arithmetic(self):
        lp = np.log([0.5, 0.5])
        lt = np.log(np.array([[0.75, 0.25], [0.5, 0.5]]))
        chain = ChainModel(None, lp, lt, 0.0)
        got = average_loglik(chain, [0, 1])
        assert math.isclose(got, (math.log(0.5) + math.log(0.25)) / 2.0,
                            rel_tol=1e-12)
        assert math.isclose(got, -1.0397207708399179, rel_tol=1e-12)

    def test_empty_sequence_signals(self):
        chain = fit_chain([[0]], vocab_size=1)
        with pytest.raises(UnscorableTrack):
            average_loglik(chain, [])

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            v = int(rng.integers(2, 8))
            chain = random_chain(rng, v)
            seq = rng.integers(0, v, size=rng.integers(1, 15)).tolist()
            assert math.isclose(average_loglik(chain, seq),
                                brute_force_average_loglik(chain, seq),
                                rel_tol=1e-9, abs_tol=1e-9)


class TestEmpiricalCdf:
    def test_clamps(self):
        cdf = EmpiricalCdf.from_scores([1.0, 2.0, 3.0, 4.0])
        assert cdf_value(cdf, -100.0) == pytest.approx(1 / 5)
        assert cdf_value(cdf, 100.0) == pytest.approx(4 / 5)

    def test_median_of_odd_sample(self):
        cdf = EmpiricalCdf.from_scores([5.0, 1.0, 3.0])
        assert cdf_value(cdf, 3.0) == pytest.approx(0.5)

    def test_inverse_median(self):
        cdf = EmpiricalCdf.from_scores([1.0, 2.0, 3.0])
        assert cdf_inverse(cdf, 0.5) == pytest.approx(2.0)

    def test_inverse_boundary_clamps(self):
        cdf = EmpiricalCdf.from_scores([1.0, 2.0, 3.0])
        assert cdf_inverse(cdf, 1e-9) == 1.0
        assert cdf_inverse(cdf, 1 - 1e-9) == 3.0

    def test_inverse_domain(self):
        cdf = EmpiricalCdf.from_scores([1.0])
        for u in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValidationError):
                cdf_inverse(cdf, u)

    def test_monotone_and_roundtrip(self):
        rng = np.random.default_rng(23)
        samples = rng.normal(0, 3, 200)
        cdf = EmpiricalCdf.from_scores(samples)
        n = 200
        rs = np.sort(rng.uniform(samples.min() - 1, samples.max() + 1, 500))
        vals = [cdf_value(cdf, r) for r in rs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        us = np.sort(rng.uniform(1e-6, 1 - 1e-6, 500))
        invs = [cdf_inverse(cdf, u) for u in us]
        assert all(b >= a for a, b in zip(invs, invs[1:]))
        for r in rng.uniform(samples.min(), samples.max(), 200):
            u = cdf_value(cdf, r)
            assert abs(cdf_value(cdf, cdf_inverse(cdf, u)) - u) <= 1 / (n + 1) + 1e-12


def two_scale_synthetic_ensemble(rng, n_tracks=1200):
    """Two chains of different entropy plus CDFs fit on sampled corpora."""
    v1, v2 = 12, 4
    c1 = random_chain(rng, v1)
    c2 = random_chain(rng, v2)

    def sample(chain, length):
        prior = np.exp(chain.log_prior)
        trans = np.exp(chain.log_transition)
        s = [rng.choice(chain.vocab_size, p=prior)]
        for _ in range(length - 1):
            s.append(rng.choice(chain.vocab_size, p=trans[s[-1]]))
        return s

    seqs1 = [sample(c1, int(rng.integers(5, 30))) for _ in range(n_tracks)]
    seqs2 = [sample(c2, int(rng.integers(3, 15))) for _ in range(n_tracks)]
    r1 = [average_loglik(c1, s) for s in seqs1]
    r2 = [average_loglik(c2, s) for s in seqs2]
    return c1, c2, r1, r2


class TestCdfMatching:
    def test_transformed_scores_match_reference_distribution(self):
        rng = np.random.default_rng(24)
        c1, c2, r1, r2 = two_scale_synthetic_ensemble(rng)
        cdf1 = EmpiricalCdf.from_scores(r1)
        cdf2 = EmpiricalCdf.from_scores(r2)
        transformed = [cdf_inverse(cdf1, cdf_value(cdf2, r)) for r in r2]
        stat = ks_2samp(transformed, r1).statistic
        assert stat < 0.05


class TestConformanceRho1:
    def test_single_scale_is_identity(self, small_corridor_model):
        model = small_corridor_model.ensemble
        single = EnsembleModel((model.chains[0],), (model.cdfs[0],),
                               model.threshold_r1)
        held = synth.corridor_heldout_normal(20, seed=500)
        for track in held:
            rho1, per = conformance_rho1(single, track)
            assert len(per) == 1
            # C1^-1(C1(R)) is exact for in-sample R
            lo, hi = model.cdfs[0].sorted_samples[[0, -1]]
            if lo <= per[0].r <= hi:
                assert math.isclose(rho1, per[0].r, rel_tol=1e-9, abs_tol=1e-9)

    def test_min_property_and_scale_order_invariance(self, small_corridor_model):
        ens = small_corridor_model.ensemble
        held = synth.corridor_heldout_normal(20, seed=501)
        for track in held:
            rho1, per = conformance_rho1(ens, track)
            assert all(rho1 <= s.r_hat + 1e-12 for s in per)
            assert math.isclose(rho1, min(s.r_hat for s in per), rel_tol=1e-12)

    def test_too_short_track_signals(self, small_corridor_model):
        from conftest import straight_track
        t = straight_track(n=10)
        with pytest.raises(UnscorableTrack):
            conformance_rho1(small_corridor_model.ensemble, t)

    def test_training_replay_above_threshold(self, corridor_model, corridor_corpus):
        recs = score_tracks(corridor_model, corridor_corpus)
        ok = [r for r in recs if r.status == "ok"]
        frac = np.mean([r.rho1 >= corridor_model.ensemble.threshold_r1
                        for r in ok])
        assert frac >= 0.999

    def test_unseen_transition_scores_below_first_percentile(
            self, corridor_model, corridor_corpus):
        # sharp-turn probes take transitions the training corpus never
        # exhibits, so they bottom out at the normalization floor; with a
        # corpus of this size the training 1st percentile sits above it
        ens = corridor_model.ensemble
        train_scores = []
        for t in corridor_corpus[:1000]:
            try:
                train_scores.append(conformance_rho1(ens, t)[0])
            except UnscorableTrack:
                pass
        p1 = np.percentile(train_scores, 1.0)
        probes = synth.corridor_sharp_turn_probes(16, seed=77)
        zig_scores = [conformance_rho1(ens, t)[0] for t in probes]
        assert np.median(zig_scores) < p1
