"""HTTP facade over a loaded scene model for interactive probing.

Clients submit clicked polylines; the server densifies them to unit-pixel
arc steps so they behave like tracker-derived tracks, scores them with both
models and returns full diagnostics including the worst primitive pair.
The service is stateless beyond the immutable model.
"""

from __future__ import annotations

import io
import math

import numpy as np
from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import UnscorableTrack
from .pipeline import SceneModel, score_one
from .pgm import read_pgm
from .tracks import Track


class ScoreRequest(BaseModel):
    points: list[tuple[float, float]]


def densify_polyline(points: np.ndarray) -> np.ndarray:
    """Resample a polyline at arc steps of at most one pixel, keeping the
    original vertices; zero-length segments are dropped."""
    pts = np.asarray(points, dtype=np.float64)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = float(np.linalg.norm(b - a))
        if seg == 0.0:
            continue
        n = max(1, int(math.ceil(seg)))
        for k in range(1, n + 1):
            out.append(a + (b - a) * (k / n))
    return np.asarray(out)


def probe_track(points) -> Track:
    dense = densify_polyline(np.asarray(points, dtype=np.float64))
    return Track("probe", np.arange(dense.shape[0]), dense)


def create_app(model: SceneModel, scene_path=None) -> FastAPI:
    app = FastAPI(title="trackwatch scoring service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])

    scene_png: bytes | None = None
    if scene_path is not None:
        from PIL import Image

        img = read_pgm(scene_path)
        buf = io.BytesIO()
        Image.fromarray(np.clip(np.rint(img * 255), 0, 255).astype(np.uint8),
                        mode="L").save(buf, format="PNG")
        scene_png = buf.getvalue()

    @app.get("/healthz")
    def healthz():
        return Response(content="ok", media_type="text/plain")

    @app.post("/score")
    def score(req: ScoreRequest):
        pts = np.asarray(req.points, dtype=np.float64)
        if pts.shape[0] < 2:
            return JSONResponse(status_code=400,
                                content={"detail": "need at least 2 points"})
        if not np.all(np.isfinite(pts)):
            return JSONResponse(status_code=400,
                                content={"detail": "points must be finite"})
        try:
            rec = score_one(model, probe_track(pts))
        except UnscorableTrack as e:
            return JSONResponse(status_code=422, content={"detail": str(e)})
        if rec.status != "ok":
            return JSONResponse(status_code=422, content={"detail": rec.status})
        vocab = model.pursuit.vocab
        worst = None
        if rec.worst_pair is not None:
            pa = vocab.primitives[rec.worst_pair.prim_a]
            pb = vocab.primitives[rec.worst_pair.prim_b]
            worst = {
                "pos_a": rec.worst_pair.pos_a,
                "pos_b": rec.worst_pair.pos_b,
                "prim_a": {"X": pa.x, "Y": pa.y, "Theta": pa.theta},
                "prim_b": {"X": pb.x, "Y": pb.y, "Theta": pb.theta},
            }
        return {
            "rho1": rec.rho1,
            "per_scale": [{"scale": s.delta_d, "R": s.r, "R_hat": s.r_hat}
                          for s in rec.per_scale],
            "rho2": rec.rho2,
            "worst_pair": worst,
            "novel1": rec.novel1,
            "novel2": rec.novel2,
            "canonized": list(rec.canonized),
        }

    @app.get("/model/meta")
    def meta():
        return {
            "training": model.training_meta,
            "scales": model.ensemble.scales,
            "vocab_sizes": [c.vocab_size for c in model.ensemble.chains],
            "threshold_r1": model.ensemble.threshold_r1,
            "threshold_r2": model.pursuit.threshold_r2,
        }

    @app.get("/model/primitives")
    def primitives(scale: int = 1):
        if not 1 <= scale <= len(model.ensemble.chains):
            return JSONResponse(status_code=404,
                                content={"detail": f"no scale {scale}"})
        vocab = model.ensemble.chains[scale - 1].vocab
        return {
            "scale": vocab.scale.delta_d,
            "primitives": [{"X": p.x, "Y": p.y, "Theta": p.theta,
                            "member_count": p.member_count}
                           for p in vocab.primitives],
        }

    @app.get("/scene")
    def scene():
        if scene_png is None:
            return JSONResponse(status_code=404,
                                content={"detail": "no scene image configured"})
        return Response(content=scene_png, media_type="image/png")

    return app
