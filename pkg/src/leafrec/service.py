"""HTTP annotation service: mark main-vein terminals, store them as sidecar
files and classify annotated images with the loaded model bundle."""
from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel

from . import pipeline
from .features import ExtractionError
from .geometry import PixelPoint, TerminalPair
from .pipeline import ModelBundle
from .pnn import ranking_to_dicts

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg"}

FALLBACK_PAGE = """<!doctype html>
<html><head><title>leafrec annotator</title></head>
<body>
<h1>leafrec annotation service</h1>
<p>The browser UI bundle is not built. Build the frontend (see README) or use
the JSON API directly: <code>GET /api/images</code>,
<code>PUT /api/images/{id}/terminals</code>,
<code>POST /api/images/{id}/classify?k=3</code>.</p>
</body></html>
"""


class PointBody(BaseModel):
    x: int
    y: int


class TerminalsBody(BaseModel):
    a: PointBody
    b: PointBody


def _find_ui_dir(explicit: str | Path | None) -> Path | None:
    candidates = []
    if explicit:
        candidates.append(Path(explicit))
    env = os.environ.get("LEAFREC_UI_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path("frontend") / "dist")
    for candidate in candidates:
        if candidate.is_dir() and (candidate / "index.html").exists():
            return candidate
    return None


def create_app(
    bundle: ModelBundle | str | Path,
    data_dir: str | Path,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    if not isinstance(bundle, ModelBundle):
        bundle = pipeline.load_bundle(bundle)
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise ValueError(f"data directory not readable: {data_dir}")

    app = FastAPI(title="leafrec annotator")
    write_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()

    def lock_for(image_id: str) -> threading.Lock:
        with locks_guard:
            return write_locks[image_id]

    def sidecar_path(image_id: str) -> Path:
        return data_dir / f"{image_id}.terminals.json"

    def image_path_or_404(image_id: str) -> Path:
        path = data_dir / image_id
        if (
            Path(image_id).name != image_id  # no path traversal
            or path.suffix.lower() not in IMAGE_SUFFIXES
            or not path.is_file()
        ):
            raise HTTPException(status_code=404, detail=f"unknown image: {image_id}")
        return path

    @app.exception_handler(HTTPException)
    async def http_error(request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"code": 422, "message": str(exc)})

    @app.get("/api/images")
    def list_images():
        items = []
        for path in sorted(data_dir.iterdir()):
            if not path.is_file() or path.name.endswith(".terminals.json"):
                continue
            if path.suffix.lower() not in IMAGE_SUFFIXES:
                log.info("skipping non-image file %s", path.name)
                continue
            items.append(
                {"image_id": path.name, "has_terminals": sidecar_path(path.name).exists()}
            )
        return items

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        path = image_path_or_404(image_id)
        return FileResponse(path, media_type=MEDIA_TYPES[path.suffix.lower()])

    @app.get("/api/images/{image_id}/terminals")
    def get_terminals(image_id: str):
        image_path_or_404(image_id)
        sidecar = sidecar_path(image_id)
        if not sidecar.exists():
            raise HTTPException(status_code=404, detail=f"no terminals stored for {image_id}")
        return json.loads(sidecar.read_text(encoding="utf-8"))

    @app.put("/api/images/{image_id}/terminals")
    def put_terminals(image_id: str, body: TerminalsBody):
        path = image_path_or_404(image_id)
        with Image.open(path) as img:
            width, height = img.size
        for label, point in (("a", body.a), ("b", body.b)):
            if not (0 <= point.x < width and 0 <= point.y < height):
                raise HTTPException(
                    status_code=422,
                    detail=f"terminal {label}=({point.x},{point.y}) outside {width}x{height} image",
                )
        try:
            pair = TerminalPair(PixelPoint(body.a.x, body.a.y), PixelPoint(body.b.x, body.b.y))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        record = dict(pair.to_dict())
        record["image_id"] = image_id
        record["annotated_at"] = datetime.now(timezone.utc).isoformat()
        payload = json.dumps(record, indent=2)
        with lock_for(image_id):
            fd, tmp_name = tempfile.mkstemp(dir=data_dir, prefix=f".{image_id}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(payload)
                os.replace(tmp_name, sidecar_path(image_id))
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
        return record

    @app.post("/api/images/{image_id}/classify")
    def classify_image(image_id: str, k: int = 3):
        path = image_path_or_404(image_id)
        sidecar = sidecar_path(image_id)
        if not sidecar.exists():
            raise HTTPException(status_code=409, detail=f"annotate first: {image_id} has no terminals")
        if k < 1:
            raise HTTPException(status_code=422, detail=f"k must be >= 1, got {k}")
        terminals = pipeline.load_terminals(sidecar)
        try:
            ranking = pipeline.classify_image(bundle, path, terminals, k=k)
        except ExtractionError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"image_id": image_id, "ranking": ranking_to_dicts(ranking)}

    resolved_ui = _find_ui_dir(ui_dir)
    if resolved_ui is not None:
        app.mount("/", StaticFiles(directory=resolved_ui, html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return FALLBACK_PAGE

    return app
