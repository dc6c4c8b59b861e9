"""Record probe-loop fixtures from a real corridor-world scoring service.

Trains the corridor-world model used by the package's acceptance suite,
serves it in-process, replays the straight and zig-zag probes, and freezes
the raw JSON responses under test/fixtures/ for the frontend tests.

Run from the frontend directory:  python3 scripts/record_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from trackwatch.pipeline import ThresholdConfig, train
from trackwatch.service import create_app
from trackwatch.synth import corridor_training_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"

STRAIGHT = [[100.0, 300.0], [400.0, 300.0], [700.0, 300.0]]
ZIGZAG = [[100.0, 300.0], [250.0, 300.0], [250.0, 180.0],
          [340.0, 180.0], [340.0, 300.0], [650.0, 300.0]]


def main() -> None:
    print("training corridor-world model (2000 tracks) ...")
    model = train(corridor_training_corpus(2000, seed=7),
                  threshold_cfg=ThresholdConfig(0.002))
    client = TestClient(create_app(model))

    FIXTURES.mkdir(parents=True, exist_ok=True)
    recordings = {
        "meta.json": client.get("/model/meta"),
        "primitives.json": client.get("/model/primitives", params={"scale": 1}),
        "straight.json": client.post("/score", json={"points": STRAIGHT}),
        "zigzag.json": client.post("/score", json={"points": ZIGZAG}),
    }
    for name, response in recordings.items():
        assert response.status_code == 200, (name, response.status_code)
        (FIXTURES / name).write_bytes(response.content)
        print(f"wrote {FIXTURES / name}")
    (FIXTURES / "probes.json").write_text(
        json.dumps({"straight": STRAIGHT, "zigzag": ZIGZAG}, indent=1))
    print(f"wrote {FIXTURES / 'probes.json'}")


if __name__ == "__main__":
    main()
