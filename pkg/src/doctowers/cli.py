"""Command-line interface: ingest, stats, scene, serve.

Exit codes: 0 success (warnings included), 1 usage error, 2 input parse
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import errno
import glob as globmod
import io
import json
import logging
import os
import sys
import zipfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import alto, idml, metrics, scene, server, store
from .errors import DocTowersError

logger = logging.getLogger("doctowers")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_IO = 3


def _expand_inputs(patterns: Sequence[str]) -> list[Path]:
    """Expand globs and sort lexicographically for a stable page order."""
    paths: list[Path] = []
    for pattern in patterns:
        matches = sorted(globmod.glob(pattern))
        if matches:
            paths.extend(Path(m) for m in matches)
        else:
            paths.append(Path(pattern))
    seen = set()
    unique = []
    for p in paths:
        if p not in seen:
            seen.add(p)
            unique.append(p)
    return sorted(unique)


def _detect_format(path: Path, data: bytes) -> str:
    if path.suffix.lower() == ".idml":
        return "idml"
    if data[:4] == b"PK\x03\x04":
        try:
            names = zipfile.ZipFile(io.BytesIO(data)).namelist()
            if "designmap.xml" in names:
                return "idml"
        except zipfile.BadZipFile:
            pass
        return "idml"  # best effort; the parser reports the real problem
    head = data[:4096].lstrip()
    if head.startswith(b"<?xml") or head.startswith(b"<"):
        return "alto"
    raise DocTowersError(f"{path}: cannot detect input format")


def _derive_out(path: Path) -> Path:
    stem = path.name
    for suffix in (".xml", ".idml", ".alto"):
        if stem.lower().endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    return path.with_name(stem + store.FILE_EXTENSION)


def cmd_ingest(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return EXIT_USAGE
    if args.merge and not args.out:
        print("error: --merge needs --out", file=sys.stderr)
        return EXIT_USAGE
    if args.out and not args.merge and len(inputs) > 1:
        print("error: --out with several inputs needs --merge", file=sys.stderr)
        return EXIT_USAGE

    opts_alto = alto.AltoIngestOptions(dpi=args.dpi)
    parse_failed = io_failed = False

    def parse_one(path: Path):
        try:
            data = path.read_bytes()
        except OSError as exc:
            return path, None, f"{path}: {exc}", EXIT_IO
        try:
            fmt = args.format if args.format != "auto" else _detect_format(path, data)
            if fmt == "idml":
                doc = idml.parse_idml(data, source_name=path.name)
                return path, ("idml", doc), None, EXIT_OK
            page, unit = alto.parse_alto_page(data, opts_alto)
            return path, ("alto", (path.name, page, unit)), None, EXIT_OK
        except DocTowersError as exc:
            return path, None, f"{path}: {exc}", EXIT_PARSE

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(parse_one, inputs))

    parsed = []
    for path, result, err, code in results:
        if err is not None:
            print(f"error: {err}", file=sys.stderr)
            parse_failed = parse_failed or code == EXIT_PARSE
            io_failed = io_failed or code == EXIT_IO
            if not args.keep_going:
                return code
            continue
        parsed.append((path, result))

    alto_pages = [payload for _, (kind, payload) in parsed if kind == "alto"]
    docs: list[tuple[Path, object]] = []
    try:
        if args.merge:
            merged: list = []
            for path, (kind, payload) in parsed:
                if kind == "alto":
                    continue
                merged.append(payload)
            if alto_pages:
                name = args.out or "document"
                merged.insert(0, alto.assemble_document(
                    alto_pages, Path(name).name, dpi=args.dpi))
            if not merged:
                print("error: nothing ingested", file=sys.stderr)
                return EXIT_PARSE
            doc = store.merge_documents(merged)
            docs.append((Path(args.out), doc))
        else:
            for path, (kind, payload) in parsed:
                if kind == "alto":
                    doc = alto.assemble_document([payload], path.name, dpi=args.dpi)
                else:
                    doc = payload
                docs.append((Path(args.out) if args.out else _derive_out(path), doc))
    except DocTowersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    for out_path, doc in docs:
        try:
            out_path.write_bytes(store.write_geometry(doc))
        except OSError as exc:
            print(f"error: {out_path}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"{out_path}: {len(doc.pages)} page(s), {doc.entity_count} entities")
    if parse_failed:
        return EXIT_PARSE
    return EXIT_IO if io_failed else EXIT_OK


def _load_geometry(path: Path):
    try:
        return store.read_geometry(path.read_bytes())
    except OSError as exc:
        raise DocTowersError(f"{path}: {exc}") from exc
    except DocTowersError as exc:
        raise DocTowersError(f"{path}: {exc}") from exc


def _stats_table(name: str, report: metrics.StatsReport, doc) -> str:
    lines = [f"document: {name}"]
    classes = sorted(report.class_totals)
    names = {0: "page", 1: "text", 2: "raster", 3: "vector"}
    for code in classes:
        label = names.get(code) or doc.class_registry.get(code) or f"class{code}"
        lines.append(f"  {label}: {report.class_totals[code]}")
    lines.append("  page  number  cardinality  fill%   out-of-frame")
    for i, m in enumerate(report.per_page):
        lines.append(
            f"  {i:>4}  {doc.pages[i].number:>6}  {m.cardinality_total:>11}"
            f"  {m.fill_total_pct:6.1f}  {m.out_of_frame_count:>12}")
    ext = report.max_cardinality_page
    lines.append(f"  max cardinality: page {ext.number} ({ext.value:g})")
    ext = report.max_fill_page
    lines.append(f"  max fill: page {ext.number} ({ext.value:.1f}%)")
    ext = report.min_fill_page
    lines.append(f"  min fill: page {ext.number} ({ext.value:.1f}%)")
    lines.append(f"  out-of-frame: {report.out_of_frame_total}")
    return "\n".join(lines)


def cmd_stats(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return EXIT_USAGE
    reports = []
    for path in inputs:
        try:
            doc = _load_geometry(path)
        except DocTowersError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        reports.append((path, doc, metrics.document_stats(doc)))

    if args.json:
        out = {
            str(path): report.to_dict() for path, _, report in reports
        }
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        for path, doc, report in reports:
            print(_stats_table(str(path), report, doc))
    return EXIT_OK


def cmd_scene(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return EXIT_USAGE

    ribbon = None
    if args.ribbon != "none":
        scope = "global" if args.city else "perTower"
        ribbon = metrics.RibbonSpec(metric=args.ribbon, scope=scope)

    def config_for(name: str) -> scene.SceneConfig:
        base = None
        if args.pdf_base:
            base = args.pdf_base.replace("{name}", name)
        return scene.SceneConfig(
            floor_height=args.floor_height,
            ribbon=ribbon,
            pdf_base_url=base,
        )

    def build_one(path: Path):
        doc = _load_geometry(path)
        stem = path.name
        if stem.endswith(store.FILE_EXTENSION):
            stem = stem[: -len(store.FILE_EXTENSION)]
        return path, stem, scene.build_tower(doc, config_for(stem))

    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            towers = list(pool.map(build_one, inputs))
    except DocTowersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if args.city:
            city = scene.layout_city([t for _, _, t in towers], config_for(""))
            out_path = Path(args.out) if args.out else Path("city" + scene.FILE_EXTENSION)
            out_path.write_bytes(scene.emit_scene(city))
            print(f"{out_path}: {len(city.towers)} tower(s), "
                  f"{sum(len(p.tower.slabs) for p in city.towers)} slabs, "
                  f"{city.grid_columns} columns")
        else:
            if args.out and len(towers) > 1:
                print("error: --out with several inputs needs --city", file=sys.stderr)
                return EXIT_USAGE
            for path, stem, tower in towers:
                out_path = Path(args.out) if args.out \
                    else path.with_name(stem + scene.FILE_EXTENSION)
                out_path.write_bytes(scene.emit_scene(tower))
                print(f"{out_path}: {len(tower.floors)} floor(s), {len(tower.slabs)} slabs")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_serve(args) -> int:
    path = Path(args.scene)
    try:
        scene_bytes = path.read_bytes()
    except OSError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    pdf_dir = Path(args.pdf_dir) if args.pdf_dir else None
    try:
        httpd = server.make_server(scene_bytes, pdf_dir, args.port)
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"error: port {args.port} unavailable: {exc}", file=sys.stderr)
            return EXIT_IO
        raise
    server.serve_forever(httpd)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doctowers",
        description="Extract document structure and explore it as 3D towers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse ALTO/IDML files into geometry files")
    p.add_argument("inputs", nargs="+", help="files or globs")
    p.add_argument("--format", choices=("auto", "alto", "idml"), default="auto")
    p.add_argument("--dpi", type=float, default=None,
                   help="pixel-to-point conversion for ALTO pixel files")
    p.add_argument("--merge", action="store_true",
                   help="combine all inputs into one document")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--keep-going", action="store_true",
                   help="continue past per-file parse errors")
    p.add_argument("--jobs", type=int, default=os.cpu_count(),
                   help="parallel parse workers")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-page cardinality/fill report")
    p.add_argument("inputs", nargs="+", help="geometry files")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable output")
    fmt.add_argument("--table", action="store_true", help="human-readable output (default)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("scene", help="build tower/city scene files")
    p.add_argument("inputs", nargs="+", help="geometry files")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--city", action="store_true",
                   help="combine all inputs into one city scene")
    p.add_argument("--ribbon", choices=("none", "cardinality", "fill"),
                   default="none", help="floor facade color metric")
    p.add_argument("--floor-height", type=float, default=40.0)
    p.add_argument("--pdf-base", default=None,
                   help="hyperlink template, {name} expands to the document name")
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.set_defaults(func=cmd_scene)

    p = sub.add_parser("serve", help="serve a scene to the browser viewer")
    p.add_argument("scene", help="scene file (.dts.json)")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get(server.PORT_ENV_VAR, server.DEFAULT_PORT)))
    p.add_argument("--pdf-dir", default=None, help="directory served at /pdf/")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
