import numpy as np
import pytest

from trackwatch import synth
from trackwatch.pipeline import train


@pytest.fixture(scope="session")
def corridor_corpus():
    return synth.corridor_training_corpus(2000, seed=7)


@pytest.fixture(scope="session")
def corridor_model(corridor_corpus):
    return train(corridor_corpus)


@pytest.fixture(scope="session")
def small_corridor_model():
    """Cheaper corridor model for module-level tests."""
    return train(synth.corridor_training_corpus(300, seed=11))


def straight_track(track_id="t", n=101, step=1.0, x0=0.0, y0=0.0,
                   direction=(1.0, 0.0)):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    pts = np.array([x0, y0]) + np.arange(n)[:, None] * step * d
    from trackwatch.tracks import Track
    return Track(track_id, np.arange(n), pts)
