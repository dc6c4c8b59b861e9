"""Interactive probing over HTTP.

Trains a small corridor model, serves it on localhost, and plays the
probe loop a browser client would: fetch the scene image and primitive
overlay, then submit clicked polylines and read the verdicts. An
in-corridor line passes; a zig-zag comes back novel with the offending
primitive pair attached.
"""

import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from trackwatch import ThresholdConfig, train, write_pgm
from trackwatch.service import create_app
from trackwatch.synth import corridor_scene_image, corridor_training_corpus

print("training on 600 corridor-world tracks ...")
model = train(corridor_training_corpus(600, seed=7),
              threshold_cfg=ThresholdConfig(0.002))

scene = Path(tempfile.mkdtemp()) / "scene.pgm"
write_pgm(scene, corridor_scene_image())
app = create_app(model, scene_path=scene)

server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=8631,
                                       log_level="warning"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = "http://127.0.0.1:8631"
with httpx.Client(base_url=base) as client:
    print("health:", client.get("/healthz").text)
    meta = client.get("/model/meta").json()
    print(f"model: scales {meta['scales']}, vocab sizes {meta['vocab_sizes']}")
    prims = client.get("/model/primitives", params={"scale": 1}).json()
    print(f"scale-1 overlay: {len(prims['primitives'])} primitives")
    png = client.get("/scene").content
    print(f"scene image: {len(png)} bytes of PNG")

    straight = {"points": [[100, 300], [400, 300], [700, 300]]}
    body = client.post("/score", json=straight).json()
    print(f"\nstraight walk : rho1 {body['rho1']:+.3f} rho2 {body['rho2']:+.2f}"
          f"  novel1={body['novel1']} novel2={body['novel2']}")

    zigzag = {"points": [[100, 300], [250, 300], [250, 180], [340, 180],
                         [340, 300], [650, 300]]}
    body = client.post("/score", json=zigzag).json()
    wp = body["worst_pair"]
    print(f"zig-zag probe : rho1 {body['rho1']:+.3f} rho2 {body['rho2']:+.2f}"
          f"  novel1={body['novel1']} novel2={body['novel2']}")
    print(f"  worst pair at positions ({wp['pos_a']}, {wp['pos_b']}), "
          f"primitives near ({wp['prim_a']['X']:.0f}, {wp['prim_a']['Y']:.0f}) "
          f"and ({wp['prim_b']['X']:.0f}, {wp['prim_b']['Y']:.0f})")

server.should_exit = True
thread.join(timeout=5)
print("\nserver stopped")
