"""Building a motion-primitive vocabulary for a scene.

Tracks from the corridor world are cut into fixed-arc-length tracklets,
which are clustered by location and undirected orientation. Each cluster
centre is one primitive of the scene's motion vocabulary; together they
trace the walkable structure of the scene. Glyphs are double-headed
because orientation is only defined up to a half turn.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from trackwatch import ScaleConfig, cluster_tracklets, extract_tracklets
from trackwatch.synth import corridor_scene_image, corridor_training_corpus

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

tracks = corridor_training_corpus(400, seed=7)
scale = ScaleConfig(delta_d=50.0, delta_q=25.0, delta_theta=math.pi / 16)

tracklets = []
for t in tracks:
    tracklets.extend(extract_tracklets(t, scale))
print(f"{len(tracklets)} tracklets from {len(tracks)} tracks "
      f"at characteristic scale {scale.delta_d:.0f} px")

vocab = cluster_tracklets(tracklets, scale)
print(f"vocabulary: {len(vocab)} primitives")
sizes = sorted(p.member_count for p in vocab.primitives)
print(f"cluster sizes: min {sizes[0]}, median {sizes[len(sizes) // 2]}, "
      f"max {sizes[-1]}")

fig, ax = plt.subplots(figsize=(9, 6.5))
ax.imshow(corridor_scene_image(), cmap="gray", vmin=0, vmax=1)
for p in vocab.primitives:
    dx = 18 * math.cos(p.theta)
    dy = 18 * math.sin(p.theta)
    ax.plot([p.x - dx, p.x + dx], [p.y - dy, p.y + dy], color="tab:orange", lw=2)
    ax.plot(p.x, p.y, "o", color="tab:red", ms=3)
ax.set_title(f"{len(vocab)} tracklet primitives at scale {scale.delta_d:.0f} px")
fig.tight_layout()
fig.savefig(OUT / "03_vocabulary.png", dpi=110)
print(f"figure written to {OUT / '03_vocabulary.png'}")
