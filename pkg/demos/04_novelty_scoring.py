"""Scoring behavioural novelty with the two motion models.

The ensemble score rho1 asks "is each step plausible at every scale?";
the pursuit score rho2 asks "is the path length between every pair of
visited locations plausible?". Four probe families show the difference:
held-out normal walks pass both, unjustified mid-corridor turns fail both,
turns where training turned pass both, and the long-way-round detour is
locally impeccable yet fails rho2 alone, pinned to its worst pair.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from trackwatch import ThresholdConfig, score_tracks, train
from trackwatch.synth import (corridor_corner_probes, corridor_detour_probes,
                              corridor_heldout_normal, corridor_scene_image,
                              corridor_sharp_turn_probes,
                              corridor_training_corpus)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

print("training on 800 corridor-world tracks ...")
corpus = corridor_training_corpus(800, seed=7)
model = train(corpus, threshold_cfg=ThresholdConfig(0.006))
print(f"vocabulary sizes per scale: {model.training_meta['vocab_sizes']}")
print(f"thresholds: rho1 {model.ensemble.threshold_r1:.3f}, "
      f"rho2 {model.pursuit.threshold_r2:.3f}\n")

families = [
    ("held-out normal", corridor_heldout_normal(40, seed=1)),
    ("sharp turn mid-corridor", corridor_sharp_turn_probes(40, seed=2)),
    ("corner where training turned", corridor_corner_probes(40, seed=3)),
    ("long detour", corridor_detour_probes(40, seed=4)),
]
print(f"{'family':32s} {'rho1 flags':>10s} {'rho2 flags':>10s}")
for name, probes in families:
    recs = [r for r in score_tracks(model, probes) if r.status == "ok"]
    n1 = sum(r.novel1 for r in recs)
    n2 = sum(bool(r.novel2) for r in recs)
    print(f"{name:32s} {n1:>7d}/{len(recs)} {n2:>7d}/{len(recs)}")

# render one detour with its canonization and worst pair
detour = corridor_detour_probes(1, seed=4)[0]
rec = score_tracks(model, [detour])[0]
vocab = model.pursuit.vocab
fig, ax = plt.subplots(figsize=(9, 6.5))
ax.imshow(corridor_scene_image(), cmap="gray", vmin=0, vmax=1)
ax.plot(detour.xy[:, 0], detour.xy[:, 1], color="tab:green", lw=2,
        label="probe track")
for j in rec.canonized:
    p = vocab.primitives[j]
    dx, dy = 15 * math.cos(p.theta), 15 * math.sin(p.theta)
    ax.plot([p.x - dx, p.x + dx], [p.y - dy, p.y + dy], color="gold", lw=2)
for j in (rec.worst_pair.prim_a, rec.worst_pair.prim_b):
    p = vocab.primitives[j]
    dx, dy = 18 * math.cos(p.theta), 18 * math.sin(p.theta)
    ax.plot([p.x - dx, p.x + dx], [p.y - dy, p.y + dy], color="red", lw=3)
ax.set_title(f"detour: rho2 = {rec.rho2:.1f} (threshold "
             f"{model.pursuit.threshold_r2:.1f}), worst pair in red")
ax.legend(loc="lower right")
fig.tight_layout()
fig.savefig(OUT / "04_worst_pair.png", dpi=110)
print(f"\nfigure written to {OUT / '04_worst_pair.png'}")
