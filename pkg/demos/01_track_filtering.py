"""Separating informative tracks from camera-wobble clutter.

A fixed outdoor camera produces two kinds of useless tracks: short-lived
features and stationary features that jitter by a pixel or two when wind
shakes the mast. Both survive for many frames, so length alone cannot
reject them; the spatial-variance test does.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from trackwatch import FilterConfig, filter_tracks, track_variance
from trackwatch.synth import jitter_tracks, moving_tracks

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(42)
jitter = jitter_tracks(100, rng, sigma=0.6)
moving = moving_tracks(100, rng)
mixed = jitter + moving

print(f"corpus: {len(mixed)} tracks "
      f"({len(jitter)} stationary-jitter, {len(moving)} moving)")
print(f"example jitter variance: {track_variance(jitter[0]):.2f} px^2")
print(f"example moving variance: {track_variance(moving[0]):.2f} px^2")

cfg = FilterConfig(min_length=30, min_variance=4.0)
kept = filter_tracks(mixed, cfg)
print(f"filter keeps {len(kept)} of {len(mixed)} "
      f"(min_length={cfg.min_length}, min_variance={cfg.min_variance})")

fig, axes = plt.subplots(1, 2, figsize=(11, 4.5), sharex=True, sharey=True)
for ax, tracks, title in [(axes[0], mixed, "all tracks"),
                          (axes[1], kept, "after filtering")]:
    for t in tracks:
        ax.plot(t.xy[:, 0], t.xy[:, 1], lw=0.6)
    ax.set_title(f"{title} ({len(tracks)})")
    ax.set_aspect("equal")
    ax.invert_yaxis()
fig.tight_layout()
fig.savefig(OUT / "01_filtering.png", dpi=110)
print(f"figure written to {OUT / '01_filtering.png'}")
