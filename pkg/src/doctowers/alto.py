"""ALTO XML ingestion: one layout page per file.

Reads the block-level layout elements (TextBlock, Illustration,
GraphicalElement) of ALTO 2.x-4.x files, matching on local element names
so any namespace binding works. ComposedBlock containers are recursed
into by default and never emitted themselves: they duplicate their
children's extent and would double-count fill.

Coordinates are normalized to points. The ALTO MeasurementUnit element
decides the source unit: "pixel" (the default when absent), "mm10"
(tenths of a millimetre) or "inch1200" (1/1200 inch). Pixel measurements
need a dpi to convert; without one the values are kept as-is and the
document is flagged as pixel-measured.

Labels come from the producers' ad hoc tagging: a block's TAGREFS
resolved against the Tags section wins, then the block's TYPE attribute,
else no label.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    MalformedXml,
    MissingPageElement,
    MixedUnits,
    NonNumericCoordinate,
    UnknownMeasurementUnit,
)
from .model import (
    DocumentGeometry,
    EntityRecord,
    PageRecord,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    VECTOR_GRAPHIC,
)

# ALTO block element -> entity class
_BLOCK_CLASSES = {
    "TextBlock": TEXT_FRAME,
    "Illustration": RASTER_IMAGE,
    "GraphicalElement": VECTOR_GRAPHIC,
}

_UNIT_FACTORS = {
    "mm10": 7.2 / 25.4,
    "inch1200": 72.0 / 1200.0,
}

VALID_UNITS = ("pixel", "mm10", "inch1200")


@dataclass(frozen=True, slots=True)
class AltoIngestOptions:
    dpi: Optional[float] = None
    recurse_composed_blocks: bool = True
    emit_labels: bool = True

    def __post_init__(self):
        if self.dpi is not None and self.dpi <= 0:
            raise ValueError("dpi must be positive")


def to_points(value: float, unit: str, dpi: Optional[float] = None) -> tuple[float, bool]:
    """Convert one coordinate to points.

    Returns (value, converted). Pixel values without a dpi pass through
    unchanged with converted=False; the caller flags the document as
    pixel-measured.
    """
    if unit == "pixel":
        if dpi is None:
            return value, False
        return value * 72.0 / dpi, True
    try:
        return value * _UNIT_FACTORS[unit], True
    except KeyError:
        raise UnknownMeasurementUnit(f"unit {unit!r}") from None


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rpartition("}")[2]


def _find_local(root: ET.Element, name: str) -> Optional[ET.Element]:
    for el in root.iter():
        if _local(el.tag) == name:
            return el
    return None


def _attr_number(el: ET.Element, name: str, path: str) -> float:
    raw = el.get(name)
    if raw is None:
        raise NonNumericCoordinate(f"missing attribute {name}", path)
    try:
        return float(raw)
    except ValueError:
        raise NonNumericCoordinate(f"attribute {name}={raw!r}", path) from None


def _tag_labels(root: ET.Element) -> dict[str, str]:
    """Map tag IDs from the Tags section to their LABEL attribute."""
    labels: dict[str, str] = {}
    tags = _find_local(root, "Tags")
    if tags is None:
        return labels
    for el in tags.iter():
        tag_id = el.get("ID")
        label = el.get("LABEL")
        if tag_id and label:
            labels[tag_id] = label
    return labels


def _block_label(el: ET.Element, tag_labels: dict[str, str],
                 emit_labels: bool) -> Optional[str]:
    if not emit_labels:
        return None
    refs = el.get("TAGREFS")
    if refs:
        for ref in refs.split():
            if ref in tag_labels:
                return tag_labels[ref]
    type_attr = el.get("TYPE")
    if type_attr and type_attr.strip():
        return type_attr.strip()
    return None


def parse_alto_page(data: bytes,
                    opts: AltoIngestOptions = AltoIngestOptions(),
                    ) -> tuple[PageRecord, str]:
    """Parse one ALTO file into a PageRecord.

    Returns (page, unit) where unit is "pt", or "px" when the file
    measured in pixels and no dpi was given. The page keeps index 0 and
    its PHYSICAL_IMG_NR as display number (empty when absent);
    assemble_document assigns final positions.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    unit_el = _find_local(root, "MeasurementUnit")
    unit = (unit_el.text or "").strip() if unit_el is not None else "pixel"
    if unit not in VALID_UNITS:
        raise UnknownMeasurementUnit(f"unit {unit!r}", "Description/MeasurementUnit")

    page_el = _find_local(root, "Page")
    if page_el is None:
        raise MissingPageElement("no Page element", _local(root.tag))

    converted = True

    def conv(v: float) -> float:
        nonlocal converted
        out, ok = to_points(v, unit, opts.dpi)
        converted = converted and ok
        return out

    width = conv(_attr_number(page_el, "WIDTH", "Page"))
    height = conv(_attr_number(page_el, "HEIGHT", "Page"))
    tag_labels = _tag_labels(root)

    entities: list[EntityRecord] = []

    def walk(el: ET.Element, path: str):
        for child in el:
            name = _local(child.tag)
            child_path = f"{path}/{name}"
            cls = _BLOCK_CLASSES.get(name)
            if cls is not None:
                x = conv(_attr_number(child, "HPOS", child_path))
                y = conv(_attr_number(child, "VPOS", child_path))
                w = conv(_attr_number(child, "WIDTH", child_path))
                h = conv(_attr_number(child, "HEIGHT", child_path))
                entities.append(EntityRecord(
                    category=cls,
                    quad=Quad.from_rect(x, y, w, h),
                    label=_block_label(child, tag_labels, opts.emit_labels),
                    page_index=0,
                ))
            elif name == "ComposedBlock":
                if opts.recurse_composed_blocks:
                    walk(child, child_path)
            else:
                walk(child, child_path)

    walk(page_el, "Page")

    page = PageRecord(
        index=0,
        number=(page_el.get("PHYSICAL_IMG_NR") or "").strip(),
        bounds=Quad.from_rect(0.0, 0.0, width, height),
        entities=tuple(entities),
    )
    return page, "pt" if converted else "px"


def assemble_document(pages: Sequence[tuple[str, PageRecord, str]],
                      source_name: str,
                      dpi: Optional[float] = None) -> DocumentGeometry:
    """Assemble parsed (filename, page, unit) triples into one document.

    Page index follows list position; the display number keeps the parsed
    PHYSICAL_IMG_NR, else the 1-based position. Mixing converted and
    unconverted pixel pages raises MixedUnits.
    """
    if not pages:
        raise ValueError("no pages to assemble")
    units = {unit for _, _, unit in pages}
    if len(units) > 1:
        raise MixedUnits(
            "documents mixing pt and px pages need a dpi: "
            + ", ".join(sorted(f"{name} ({unit})" for name, _, unit in pages)))

    out = []
    for i, (_, page, _) in enumerate(pages):
        out.append(PageRecord(
            index=i,
            number=page.number or str(i + 1),
            bounds=page.bounds,
            entities=tuple(
                EntityRecord(e.category, e.quad, e.label, i)
                for e in page.entities),
        ))
    return DocumentGeometry(
        source_name=source_name,
        source_format="alto",
        pages=tuple(out),
        unit=units.pop(),
        dpi=dpi,
    )
