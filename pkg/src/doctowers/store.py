"""Read and write the intermediary geometry file, plus merge/split.

The geometry file is the hand-over format between ingestion and
visualization, and the surface third-party producers target. It is UTF-8
JSON (extension `.dtg.json`) with this shape:

    {
      "format": "DocumentTowersGeometry",
      "version": "1.0",
      "metadata": {
        "sourceName": "...", "sourceFormat": "alto|idml|external",
        "unit": "pt|px", "dpi": 300,
        "pageNumbers": ["viii", "1", ...],
        "classRegistry": {"100": "margin_note"}
      },
      "records": [
    [0,0,0,441,0,441,666,0,666],
    [1,10,10,100,10,100,50,10,50]
      ],
      "labels": [null, "title"]
    }

`records` is a flat list of 9-number arrays, one per line: a class code
followed by the four corner pairs of the entity footprint. A code-0 record
opens a new page; the non-zero records after it belong to that page.
`labels` runs parallel to `records` (null where an entity has no label).

The writer is strict and deterministic (identical input -> identical
bytes, shortest round-trip numbers); the reader is tolerant: unknown
metadata keys are ignored and a missing labels array means "no labels".
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

from .errors import (
    BadHeader,
    FirstRecordNotPage,
    MixedUnits,
    OverlappingRanges,
    ParallelArrayMismatch,
    RangeOutOfBounds,
    RecordArityError,
)
from .model import (
    DocumentGeometry,
    EntityRecord,
    PageRecord,
    Quad,
    class_for_code,
)
from .numfmt import fmt_array

FORMAT_NAME = "DocumentTowersGeometry"
FORMAT_VERSION = "1.0"
FILE_EXTENSION = ".dtg.json"


def write_geometry(doc: DocumentGeometry) -> bytes:
    """Serialize a document to geometry-file bytes."""
    records: list[str] = []
    labels: list[Optional[str]] = []
    page_numbers: list[str] = []
    for page in doc.pages:
        page_numbers.append(page.number)
        records.append(fmt_array((0,) + page.bounds.coords()))
        labels.append(None)
        for e in page.entities:
            records.append(fmt_array((e.category.code,) + e.quad.coords()))
            labels.append(e.label)

    metadata: dict = {
        "sourceName": doc.source_name,
        "sourceFormat": doc.source_format,
        "unit": doc.unit,
    }
    if doc.dpi is not None:
        metadata["dpi"] = doc.dpi
    metadata["pageNumbers"] = page_numbers
    if doc.class_registry:
        metadata["classRegistry"] = {
            str(code): doc.class_registry[code] for code in sorted(doc.class_registry)
        }

    parts = [
        '{\n"format": "%s",\n"version": "%s",\n"metadata": ' % (FORMAT_NAME, FORMAT_VERSION),
        json.dumps(metadata, ensure_ascii=False, separators=(",", ":")),
        ',\n"records": [\n',
        ",\n".join(records),
        '\n],\n"labels": ',
        json.dumps(labels, ensure_ascii=False, separators=(",", ":")),
        "\n}\n",
    ]
    return "".join(parts).encode("utf-8")


def read_geometry(data: bytes) -> DocumentGeometry:
    """Parse geometry-file bytes back into a DocumentGeometry.

    Inverse of write_geometry for files this package wrote; tolerant of
    third-party extras (unknown metadata keys, absent labels array).
    """
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise BadHeader(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise BadHeader("top level is not an object")
    if obj.get("format") != FORMAT_NAME:
        raise BadHeader(f"format is {obj.get('format')!r}, expected {FORMAT_NAME!r}")
    version = obj.get("version", "")
    if not str(version).startswith("1."):
        raise BadHeader(f"unsupported version {version!r}")

    records = obj.get("records")
    if not isinstance(records, list) or not records:
        raise BadHeader("missing or empty records array")
    labels = obj.get("labels")
    if labels is None:
        labels = [None] * len(records)
    if not isinstance(labels, list) or len(labels) != len(records):
        raise ParallelArrayMismatch(
            f"labels length {len(labels) if isinstance(labels, list) else '?'}"
            f" != records length {len(records)}")

    meta = obj.get("metadata") or {}
    registry: dict[int, str] = {}
    for key, name in (meta.get("classRegistry") or {}).items():
        try:
            registry[int(key)] = str(name)
        except ValueError:
            continue
    page_numbers = meta.get("pageNumbers") or []

    pages: list[PageRecord] = []
    bounds: Optional[Quad] = None
    number = ""
    entities: list[EntityRecord] = []

    def close_page():
        if bounds is None:
            return
        pages.append(PageRecord(
            index=len(pages),
            number=number or str(len(pages) + 1),
            bounds=bounds,
            entities=tuple(entities),
        ))

    for i, rec in enumerate(records):
        if not isinstance(rec, list) or len(rec) != 9:
            raise RecordArityError(i, len(rec) if isinstance(rec, list) else 0)
        code = rec[0]
        if i == 0 and code != 0:
            raise FirstRecordNotPage(f"first record has class code {code}")
        quad = Quad(*[float(v) for v in rec[1:]])
        if code == 0:
            close_page()
            bounds = quad
            entities = []
            k = len(pages)
            number = str(page_numbers[k]) if k < len(page_numbers) else ""
        else:
            category = class_for_code(int(code), registry)
            label = labels[i]
            entities.append(EntityRecord(
                category=category,
                quad=quad,
                label=str(label) if label is not None else None,
                page_index=len(pages),
            ))
    close_page()

    fmt = meta.get("sourceFormat", "external")
    if fmt not in ("alto", "idml", "external"):
        fmt = "external"
    dpi = meta.get("dpi")
    return DocumentGeometry(
        source_name=str(meta.get("sourceName", "")),
        source_format=fmt,
        pages=tuple(pages),
        unit="px" if meta.get("unit") == "px" else "pt",
        dpi=float(dpi) if dpi is not None else None,
        class_registry=registry,
    )


def merge_documents(docs: Sequence[DocumentGeometry]) -> DocumentGeometry:
    """Concatenate documents into one; page indices are renumbered and
    display numbers preserved."""
    if not docs:
        raise ValueError("nothing to merge")
    if len(docs) == 1:
        return docs[0]
    units = {d.unit for d in docs}
    if len(units) > 1:
        raise MixedUnits(f"cannot merge documents with units {sorted(units)}")

    registry: dict[int, str] = {}
    for d in docs:
        for code, name in d.class_registry.items():
            if registry.get(code, name) != name:
                raise ValueError(
                    f"class code {code} registered as both "
                    f"{registry[code]!r} and {name!r}")
            registry[code] = name

    pages: list[PageRecord] = []
    for d in docs:
        for page in d.pages:
            idx = len(pages)
            pages.append(PageRecord(
                index=idx,
                number=page.number,
                bounds=page.bounds,
                entities=tuple(
                    EntityRecord(e.category, e.quad, e.label, idx)
                    for e in page.entities),
            ))

    formats = {d.source_format for d in docs}
    dpis = {d.dpi for d in docs}
    return DocumentGeometry(
        source_name="+".join(d.source_name for d in docs),
        source_format=formats.pop() if len(formats) == 1 else "external",
        pages=tuple(pages),
        unit=units.pop(),
        dpi=dpis.pop() if len(dpis) == 1 else None,
        class_registry=registry,
    )


def split_document(doc: DocumentGeometry,
                   ranges: Sequence[tuple[int, int]]) -> list[DocumentGeometry]:
    """Cut a document into page ranges [start, end); indices rebased to 0."""
    n = len(doc.pages)
    prev_end = None
    for start, end in ranges:
        if not (0 <= start < end <= n):
            raise RangeOutOfBounds(f"range [{start},{end}) outside 0..{n}")
        if prev_end is not None and start < prev_end:
            raise OverlappingRanges(f"range [{start},{end}) overlaps previous")
        prev_end = end

    out = []
    for start, end in ranges:
        pages = []
        for new_idx, page in enumerate(doc.pages[start:end]):
            pages.append(PageRecord(
                index=new_idx,
                number=page.number,
                bounds=page.bounds,
                entities=tuple(
                    EntityRecord(e.category, e.quad, e.label, new_idx)
                    for e in page.entities),
            ))
        out.append(DocumentGeometry(
            source_name=f"{doc.source_name}[{start}:{end}]",
            source_format=doc.source_format,
            pages=tuple(pages),
            unit=doc.unit,
            dpi=doc.dpi,
            class_registry=dict(doc.class_registry),
        ))
    return out
