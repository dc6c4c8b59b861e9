"""Command line interface: extract, train, score and serve.

Exit codes: 0 success, 2 validation error (bad inputs or parameters),
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ValidationError
from .pgm import read_frame_dir
from .pipeline import (ThresholdConfig, default_scale_configs, load_model,
                       save_model, score_tracks, train, write_scores_csv)
from .tracker import TrackerConfig, run_tracker
from .tracks import load_tracks, save_tracks


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackwatch",
        description="Scene-specific trajectory novelty detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature tracks from PGM frames")
    p.add_argument("--frames", required=True, help="directory of P5 .pgm frames")
    p.add_argument("--out", required=True, help="output tracks JSONL")
    p.add_argument("--config", help="tracker config JSON file")

    p = sub.add_parser("train", help="train a scene model from tracks")
    p.add_argument("--tracks", required=True, help="training tracks JSONL")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--scales", default="50,75,110,150",
                   help="comma-separated characteristic scales (pixels)")
    p.add_argument("--dq", type=float, default=25.0, help="spatial cluster radius")
    p.add_argument("--dtheta", type=float, default=0.19635,
                   help="directional cluster radius (radians)")
    p.add_argument("--quantile", type=float, default=0.0005,
                   help="novelty threshold quantile")

    p = sub.add_parser("score", help="score tracks against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--tracks", required=True)
    p.add_argument("--out", required=True, help="output scores CSV")

    p = sub.add_parser("serve", help="serve a model over HTTP")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080", help="host:port")
    p.add_argument("--scene", help="scene image (PGM) for the probe UI")
    return parser


def _cmd_extract(args) -> int:
    cfg = TrackerConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise ValidationError("tracker config must be a JSON object")
        known = set(TrackerConfig.__dataclass_fields__)
        unknown = set(overrides) - known
        if unknown:
            raise ValidationError(f"unknown tracker config keys: {sorted(unknown)}")
        cfg = TrackerConfig(**overrides)
    frames = read_frame_dir(args.frames)
    tracks = run_tracker(frames, cfg)
    save_tracks(tracks, args.out)
    print(f"extracted {len(tracks)} tracks from {len(frames)} frames")
    return 0


def _cmd_train(args) -> int:
    try:
        delta_ds = [float(s) for s in args.scales.split(",") if s.strip()]
    except ValueError as e:
        raise ValidationError(f"bad --scales value: {args.scales!r}") from e
    scales = default_scale_configs(delta_ds, args.dq, args.dtheta)
    tracks = load_tracks(args.tracks)
    model = train(tracks, scales, threshold_cfg=ThresholdConfig(args.quantile))
    save_model(model, args.out)
    meta = model.training_meta
    print(f"trained on {meta['n_tracks_filtered']}/{meta['n_tracks_input']} tracks; "
          f"vocab sizes {meta['vocab_sizes']}; model written to {args.out}")
    return 0


def _cmd_score(args) -> int:
    model = load_model(args.model)
    tracks = load_tracks(args.tracks)
    records = score_tracks(model, tracks)
    write_scores_csv(records, args.out)
    n_novel = sum(1 for r in records
                  if r.status == "ok" and (r.novel1 or r.novel2))
    print(f"scored {len(records)} tracks ({n_novel} novel) to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_s = args.bind.rpartition(":")
    if not host or not port_s.isdigit():
        raise ValidationError(f"--bind must be host:port, got {args.bind!r}")
    app = create_app(load_model(args.model), scene_path=args.scene)
    uvicorn.run(app, host=host, port=int(port_s), log_level="warning")
    return 0


_COMMANDS = {
    "extract": _cmd_extract,
    "train": _cmd_train,
    "score": _cmd_score,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
