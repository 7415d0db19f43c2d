"""Operator command line: batch indexing, search, explain, mask-metric
evaluation, and the server launcher.

Results go to stdout as TSV, diagnostics to stderr.  Exit codes: 0 ok,
1 user error, 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import preprocess
from .embedding import EmbedderConfig, embed_frame
from .errors import CorruptIndexError, MaskFormatError, MvrsError
from .index import VectorIndex, make_filter
from .model import FrameRecord, load_catalog
from .refseg.artifact import MaskArtifact, load_artifact, write_artifact
from .refseg.inference import StubMaskPredictor, explain_video
from .refseg.metrics import default_boundary_radius, iou, j_and_f
from .refseg.rle import rle_decode
from .retrieval import QueryRequest, RetrievalEngine
from .service import load_config

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvrs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="index a catalog of frame directories")
    p_ingest.add_argument("--catalog", required=True, help="line-delimited JSON catalog")
    p_ingest.add_argument("--frames", required=True, help="directory with <video_id>/<index>.pgm")
    p_ingest.add_argument("--index", required=True, help="output index path")
    p_ingest.add_argument("--drop-log", help="write dropped-frame log (JSONL) here")
    p_ingest.add_argument("--dim", type=int, default=512)
    p_ingest.add_argument("--blur-threshold", type=float, default=100.0)
    p_ingest.add_argument("--similarity-threshold", type=float, default=0.95)

    p_search = sub.add_parser("search", help="rank videos for a text query")
    p_search.add_argument("--index", required=True)
    p_search.add_argument("-q", "--query", required=True)
    p_search.add_argument("-k", type=int, default=10)
    p_search.add_argument("--location")
    p_search.add_argument("--from", dest="time_from")
    p_search.add_argument("--to", dest="time_to")
    p_search.add_argument("--depth-min", type=float)
    p_search.add_argument("--depth-max", type=float)
    p_search.add_argument("--species")
    p_search.add_argument("--behavior")
    p_search.add_argument("--ann", action="store_true", help="use approximate search")

    p_explain = sub.add_parser("explain", help="write the mask artifact for one video")
    p_explain.add_argument("--index", required=True)
    p_explain.add_argument("--video", required=True)
    p_explain.add_argument("-q", "--query", required=True)
    p_explain.add_argument("-o", "--output", required=True)
    p_explain.add_argument("--frames", help="frame root (default: <index dir>/frames)")
    p_explain.add_argument("--chunk-size", type=int, default=32)
    p_explain.add_argument("--dim", type=int, default=512)

    p_eval = sub.add_parser("eval-seg", help="compare two mask artifacts")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--radius", type=int, help="boundary tolerance (default: from dims)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", help="key/value configuration file")

    return parser


def _frames_for_video(frames_root: Path, video_id: str):
    video_dir = frames_root / video_id
    if not video_dir.is_dir():
        raise FileNotFoundError(f"no frame directory for video {video_id!r} under {frames_root}")
    paths = sorted(video_dir.glob("*.pgm"), key=lambda p: int(p.stem))
    if not paths:
        raise FileNotFoundError(f"no .pgm frames for video {video_id!r} under {frames_root}")
    return [(int(p.stem), preprocess.read_pgm(p)) for p in paths]


def cmd_ingest(args) -> int:
    catalog_path = Path(args.catalog)
    if not catalog_path.is_file():
        raise FileNotFoundError(f"catalog file not found: {catalog_path}")
    frames_root = Path(args.frames)
    if not frames_root.is_dir():
        raise FileNotFoundError(f"frames directory not found: {frames_root}")

    assets = load_catalog(catalog_path)
    if not assets:
        raise ValueError(f"catalog {catalog_path} is empty")
    embedder = EmbedderConfig(dim=args.dim)
    cfg = preprocess.PreprocessConfig(
        blur_threshold=args.blur_threshold,
        similarity_threshold=args.similarity_threshold,
    )
    index = VectorIndex(embedder.dim)
    drops = []
    for asset in assets:
        frames = _frames_for_video(frames_root, asset.video_id)
        records = [
            (
                FrameRecord(
                    video_id=asset.video_id,
                    frame_index=idx,
                    timestamp_s=idx / asset.fps,
                ),
                img,
            )
            for idx, img in frames
        ]
        kept, dropped = preprocess.filter_blurry(records, cfg)
        drops.extend(dropped)
        kept = [
            (rec, preprocess.normalize_orientation(img, asset.metadata))
            for rec, img in kept
        ]
        embedded = [
            dataclasses.replace(rec, embedding=embed_frame(embedder, img))
            for rec, img in kept
        ]
        groups = preprocess.group_similar(embedded, cfg)
        for group in groups:
            index.insert(group, asset.metadata, fps=asset.fps)
        print(f"{asset.video_id}\t{len(groups)}")
    index.save(args.index)
    if args.drop_log:
        preprocess.write_drop_log(drops, args.drop_log)
    return EXIT_OK


def cmd_search(args) -> int:
    index_path = Path(args.index)
    if not index_path.is_file():
        raise FileNotFoundError(f"index file not found: {index_path}")
    index = VectorIndex.load(index_path)
    engine = RetrievalEngine(index, EmbedderConfig(dim=index.dim), use_ann=args.ann)
    flt = _cli_filter(args)
    results = engine.run_query(QueryRequest(text=args.query, k_videos=args.k, filter=flt))
    for r in results:
        print(f"{r.rank}\t{r.score:.6f}\t{r.video_id}\t{r.best_timestamp_s:.3f}")
    return EXIT_OK


def _cli_filter(args):
    return make_filter(
        location=args.location,
        time_from=args.time_from,
        time_to=args.time_to,
        depth_min=args.depth_min,
        depth_max=args.depth_max,
        species=args.species,
        behavior=args.behavior,
    )


def cmd_explain(args) -> int:
    index_path = Path(args.index)
    if not index_path.is_file():
        raise FileNotFoundError(f"index file not found: {index_path}")
    index = VectorIndex.load(index_path)
    known = {entry.segment.video_id for entry in index.entries()}
    if args.video not in known:
        raise ValueError(f"unknown video {args.video!r} (not in index)")
    frames_root = Path(args.frames) if args.frames else index_path.parent / "frames"
    frames = [img for _, img in _frames_for_video(frames_root, args.video)]
    embedder = EmbedderConfig(dim=args.dim)
    result = explain_video(StubMaskPredictor(embedder), frames, args.query, args.chunk_size)
    h, w = frames[0].shape
    artifact = MaskArtifact(
        video_id=args.video,
        text=args.query,
        height=h,
        width=w,
        masks=tuple(result.masks),
        confidences=tuple(result.confidences),
    )
    try:
        write_artifact(artifact, args.output)
    except OSError as exc:
        raise OSError(f"cannot write artifact to {args.output}: {exc}") from exc
    return EXIT_OK


def cmd_eval_seg(args) -> int:
    pred = load_artifact(args.pred)
    gt = load_artifact(args.gt)
    if (pred.height, pred.width) != (gt.height, gt.width) or len(pred.masks) != len(gt.masks):
        raise ValueError(
            f"artifact shapes differ: {len(pred.masks)}x{pred.height}x{pred.width} vs "
            f"{len(gt.masks)}x{gt.height}x{gt.width}"
        )
    if not pred.masks:
        raise ValueError("artifacts contain no frames")
    pred_frames = [rle_decode(m) for m in pred.masks]
    gt_frames = [rle_decode(m) for m in gt.masks]
    volume_iou = iou(np.stack(pred_frames), np.stack(gt_frames))
    radius = args.radius if args.radius is not None else default_boundary_radius(pred.height, pred.width)
    j, f, jf = j_and_f(pred_frames, gt_frames, radius)
    print(f"IoU\t{volume_iou:.4f}")
    print(f"J\t{j:.4f}")
    print(f"F\t{f:.4f}")
    print(f"J&F\t{jf:.4f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    try:
        uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    except OSError as exc:
        raise OSError(f"cannot bind {config.listen_host}:{config.listen_port}: {exc}") from exc
    except SystemExit as exc:
        # uvicorn exits on startup failures (e.g. port already bound)
        if exc.code:
            raise OSError(
                f"server failed to start on {config.listen_host}:{config.listen_port}"
            ) from exc
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "search": cmd_search,
    "explain": cmd_explain,
    "eval-seg": cmd_eval_seg,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        FileNotFoundError,
        NotADirectoryError,
        PermissionError,
        IsADirectoryError,
        OSError,
        ValueError,
        CorruptIndexError,
        MaskFormatError,
        MvrsError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # pragma: no cover - internal faults
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
