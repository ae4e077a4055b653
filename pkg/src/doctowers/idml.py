"""IDML package ingestion.

An IDML file is a ZIP of XML parts: designmap.xml lists the spread parts
(and layers), each Spreads/*.xml holds Page elements plus page items
(TextFrame, Rectangle, Oval, Polygon, GraphicLine, Group). Geometry is
hierarchical: PathGeometry anchors live in item space and every element
carries an ItemTransform "a b c d tx ty" mapping into its parent's space,
so an item's spread-space footprint is its anchor bbox pushed through the
composed transform chain. Page GeometricBounds are "y1 x1 y2 x2" in
points.

Items are assigned to the page they overlap most (pasteboard items fall
to the nearest page) and reported in page-local coordinates, which may be
negative or exceed the page size: out-of-frame items are kept visible on
purpose.

Classification: TextFrame -> text frame; Rectangle/Oval/Polygon with a
placed raster image -> raster image, with placed PDF/EPS or nothing
placed -> vector graphic; GraphicLine -> vector graphic. Unknown page
items are skipped with a logged warning, never a crash.
"""

from __future__ import annotations

import io
import logging
import math
import xml.etree.ElementTree as ET
import zipfile
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    MalformedSpread,
    MissingDesignMap,
    NoPagesInSpread,
    NotAZipArchive,
)
from .model import (
    Aabb,
    DocumentGeometry,
    EntityClass,
    EntityRecord,
    PageRecord,
    Point2,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    VECTOR_GRAPHIC,
    quad_bbox,
)

logger = logging.getLogger(__name__)

_FRAME_ITEMS = ("Rectangle", "Oval", "Polygon")
_RASTER_CONTENT = {"Image", "PICT", "WMF"}
_VECTOR_CONTENT = {"PDF", "EPS"}
# elements that look like page items but carry no usable geometry for us
_SKIPPED_ITEMS = {"Button", "MultiStateObject", "EPSText", "TextBox", "Sound", "Movie"}


@dataclass(frozen=True, slots=True)
class Affine2:
    """2D affine map (x, y) -> (a*x + c*y + tx, b*x + d*y + ty)."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d, self.tx, self.ty):
            if not math.isfinite(v):
                raise ValueError(f"non-finite transform coefficient {v!r}")

    def determinant(self) -> float:
        return self.a * self.d - self.b * self.c


IDENTITY = Affine2()


def compose_affine(parent: Affine2, child: Affine2) -> Affine2:
    """Composition applying child first, then parent."""
    return Affine2(
        a=parent.a * child.a + parent.c * child.b,
        b=parent.b * child.a + parent.d * child.b,
        c=parent.a * child.c + parent.c * child.d,
        d=parent.b * child.c + parent.d * child.d,
        tx=parent.a * child.tx + parent.c * child.ty + parent.tx,
        ty=parent.b * child.tx + parent.d * child.ty + parent.ty,
    )


def apply_affine(t: Affine2, p: Point2 | tuple[float, float]) -> Point2:
    x, y = p
    return Point2(t.a * x + t.c * y + t.tx, t.b * x + t.d * y + t.ty)


def invert_affine(t: Affine2) -> Affine2:
    det = t.determinant()
    if det == 0:
        raise ValueError("singular transform has no inverse")
    return Affine2(
        a=t.d / det,
        b=-t.b / det,
        c=-t.c / det,
        d=t.a / det,
        tx=(t.c * t.ty - t.d * t.tx) / det,
        ty=(t.b * t.tx - t.a * t.ty) / det,
    )


@dataclass(frozen=True, slots=True)
class IdmlIngestOptions:
    include_master_spreads: bool = False
    include_hidden_layers: bool = False


@dataclass(frozen=True, slots=True)
class SpreadPage:
    """A page as seen from spread space, for item assignment."""

    page_index: int
    bounds_in_spread: Aabb
    transform: Affine2  # page space -> spread space
    origin: Point2  # top-left of GeometricBounds, in page space


def assign_to_page(item_quad: Quad, pages: Sequence[SpreadPage]) -> tuple[int, Quad]:
    """Assign a spread-space quad to a page and localize its coordinates.

    The page with the largest bbox-overlap area wins (lowest index on
    ties); items overlapping nothing go to the page whose center is
    nearest. The returned quad is in page-local coordinates (origin at the
    page's top-left bounds corner) and keeps out-of-page values.
    """
    if not pages:
        raise NoPagesInSpread("spread has no pages")
    box = quad_bbox(item_quad)
    best = None
    best_overlap = 0.0
    for sp in pages:
        b = sp.bounds_in_spread
        w = min(box.xmax, b.xmax) - max(box.xmin, b.xmin)
        h = min(box.ymax, b.ymax) - max(box.ymin, b.ymin)
        overlap = w * h if (w > 0 and h > 0) else 0.0
        if overlap > best_overlap:
            best = sp
            best_overlap = overlap
    if best is None:
        cx = (box.xmin + box.xmax) / 2
        cy = (box.ymin + box.ymax) / 2
        def dist(sp: SpreadPage) -> float:
            b = sp.bounds_in_spread
            return math.hypot(cx - (b.xmin + b.xmax) / 2, cy - (b.ymin + b.ymax) / 2)
        best = min(pages, key=lambda sp: (dist(sp), sp.page_index))

    inv = invert_affine(best.transform)
    ox, oy = best.origin
    local = [apply_affine(inv, p) for p in item_quad.corners]
    return best.page_index, Quad.from_points([(x - ox, y - oy) for x, y in local])


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rpartition("}")[2]


def _parse_transform(el: ET.Element) -> Affine2:
    raw = el.get("ItemTransform")
    if not raw:
        return IDENTITY
    parts = raw.split()
    if len(parts) != 6:
        raise ValueError(f"ItemTransform {raw!r} does not have 6 numbers")
    a, b, c, d, tx, ty = (float(p) for p in parts)
    return Affine2(a, b, c, d, tx, ty)


def _parse_bounds(raw: str) -> tuple[float, float, float, float]:
    """GeometricBounds order is y1 x1 y2 x2."""
    y1, x1, y2, x2 = (float(p) for p in raw.split())
    return x1, y1, x2, y2


def _anchor_bbox(el: ET.Element) -> Optional[Aabb]:
    """Bbox of the PathGeometry anchor points, in item space."""
    xs: list[float] = []
    ys: list[float] = []
    for sub in el.iter():
        if _local(sub.tag) == "PathPointType":
            anchor = sub.get("Anchor")
            if anchor:
                parts = anchor.split()
                if len(parts) >= 2:
                    xs.append(float(parts[0]))
                    ys.append(float(parts[1]))
    if not xs:
        return None
    return Aabb(min(xs), min(ys), max(xs), max(ys))


def _own_path_bbox(el: ET.Element) -> Optional[Aabb]:
    """Anchor bbox of el's own PathGeometry, ignoring nested page items."""
    for child in el:
        if _local(child.tag) == "Properties":
            box = _anchor_bbox(child)
            if box is not None:
                return box
    # some producers put PathGeometry directly under the item
    for child in el:
        if _local(child.tag) == "PathGeometry":
            box = _anchor_bbox(child)
            if box is not None:
                return box
    raw = el.get("GeometricBounds")
    if raw:
        x1, y1, x2, y2 = _parse_bounds(raw)
        return Aabb(min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2))
    return None


def _classify_frame(el: ET.Element):
    for sub in el:
        name = _local(sub.tag)
        if name in _RASTER_CONTENT:
            return RASTER_IMAGE
        if name in _VECTOR_CONTENT:
            return VECTOR_GRAPHIC
    return VECTOR_GRAPHIC


@dataclass(slots=True)
class _SpreadItem:
    quad: Quad  # spread space
    category: EntityClass
    label: Optional[str]


class _Walker:
    def __init__(self, layers: dict[str, tuple[str, bool]], opts: IdmlIngestOptions):
        self.layers = layers  # layer id -> (name, visible)
        self.opts = opts
        self.items: list[_SpreadItem] = []
        self.skipped = 0

    def _layer(self, el: ET.Element) -> tuple[Optional[str], bool]:
        layer_id = el.get("ItemLayer")
        if layer_id and layer_id in self.layers:
            name, visible = self.layers[layer_id]
            return name, visible
        return None, True

    def walk(self, el: ET.Element, transform: Affine2, part: str):
        for child in el:
            name = _local(child.tag)
            if name in ("Group", "Page"):
                # both are transform-bearing containers for nested items
                _, visible = self._layer(child)
                if not visible and not self.opts.include_hidden_layers:
                    continue
                self.walk(child, compose_affine(transform, _parse_transform(child)), part)
            elif name == "TextFrame" or name in _FRAME_ITEMS or name == "GraphicLine":
                label, visible = self._layer(child)
                if not visible and not self.opts.include_hidden_layers:
                    continue
                box = _own_path_bbox(child)
                if box is None:
                    self.skipped += 1
                    logger.warning("%s: %s without geometry skipped", part, name)
                    continue
                t = compose_affine(transform, _parse_transform(child))
                corners = [
                    apply_affine(t, (box.xmin, box.ymin)),
                    apply_affine(t, (box.xmax, box.ymin)),
                    apply_affine(t, (box.xmax, box.ymax)),
                    apply_affine(t, (box.xmin, box.ymax)),
                ]
                if name == "TextFrame":
                    category = TEXT_FRAME
                elif name == "GraphicLine":
                    category = VECTOR_GRAPHIC
                else:
                    category = _classify_frame(child)
                self.items.append(_SpreadItem(
                    quad=Quad.from_points(corners),
                    category=category,
                    label=label,
                ))
            elif name in _SKIPPED_ITEMS:
                self.skipped += 1
                logger.warning("%s: unsupported page item %s skipped", part, name)


def _spread_pages(spread_el: ET.Element, first_index: int, part: str) -> list[SpreadPage]:
    pages = []
    for el in spread_el.iter():
        if _local(el.tag) != "Page":
            continue
        raw = el.get("GeometricBounds")
        if raw is None:
            raise MalformedSpread(part, "Page without GeometricBounds")
        try:
            x1, y1, x2, y2 = _parse_bounds(raw)
            t = _parse_transform(el)
        except ValueError as exc:
            raise MalformedSpread(part, str(exc)) from exc
        corners = [apply_affine(t, p) for p in
                   ((x1, y1), (x2, y1), (x2, y2), (x1, y2))]
        xs = [p.x for p in corners]
        ys = [p.y for p in corners]
        pages.append(SpreadPage(
            page_index=first_index + len(pages),
            bounds_in_spread=Aabb(min(xs), min(ys), max(xs), max(ys)),
            transform=t,
            origin=Point2(min(x1, x2), min(y1, y2)),
        ))
    return pages


def _page_record_seeds(spread_el: ET.Element) -> list[tuple[str, Quad, str]]:
    """(display number, bounds quad, applied master) per page, in order."""
    seeds = []
    for el in spread_el.iter():
        if _local(el.tag) != "Page":
            continue
        x1, y1, x2, y2 = _parse_bounds(el.get("GeometricBounds"))
        w = abs(x2 - x1)
        h = abs(y2 - y1)
        seeds.append(((el.get("Name") or "").strip(),
                      Quad.from_rect(0.0, 0.0, w, h),
                      el.get("AppliedMaster") or "n"))
    return seeds


def _parse_spread_part(data: bytes, part: str) -> ET.Element:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedSpread(part, f"malformed XML: {exc}") from exc
    # the idPkg:Spread wrapper shares the local name with the real Spread
    # element inside it, so prefer a matching child over the root
    for child in root:
        if _local(child.tag) in ("Spread", "MasterSpread"):
            return child
    if _local(root.tag) in ("Spread", "MasterSpread"):
        return root
    raise MalformedSpread(part, "no Spread element")


def parse_idml(package: bytes,
               opts: IdmlIngestOptions = IdmlIngestOptions(),
               source_name: str = "") -> DocumentGeometry:
    """Parse IDML package bytes into a DocumentGeometry (unit: pt).

    Spreads are processed in designmap order. Master-spread items and
    hidden-layer items are skipped unless enabled in the options; when
    masters are enabled their items repeat onto every page applying them.
    """
    try:
        zf = zipfile.ZipFile(io.BytesIO(package))
    except zipfile.BadZipFile as exc:
        raise NotAZipArchive(str(exc)) from exc

    names = set(zf.namelist())
    if "designmap.xml" not in names:
        raise MissingDesignMap("package has no designmap.xml")
    try:
        designmap = ET.fromstring(zf.read("designmap.xml"))
    except ET.ParseError as exc:
        raise MissingDesignMap(f"designmap.xml is malformed: {exc}") from exc

    layers: dict[str, tuple[str, bool]] = {}
    spread_parts: list[str] = []
    master_parts: list[str] = []
    for el in designmap.iter():
        name = _local(el.tag)
        if name == "Layer":
            layer_id = el.get("Self")
            if layer_id:
                layers[layer_id] = (
                    el.get("Name") or layer_id,
                    (el.get("Visible") or "true").lower() != "false",
                )
        elif name == "Spread":
            src = el.get("src")
            if src:
                spread_parts.append(src)
        elif name == "MasterSpread":
            src = el.get("src")
            if src:
                master_parts.append(src)

    if not spread_parts:
        raise MissingDesignMap("designmap.xml lists no spreads")

    # master spread id -> (page count, [(master page ordinal, category, quad, label)])
    master_items: dict[str, tuple[int, list[tuple[int, EntityClass, Quad, Optional[str]]]]] = {}
    if opts.include_master_spreads:
        for part in master_parts:
            if part not in names:
                logger.warning("designmap lists missing master part %s", part)
                continue
            root = _parse_spread_part(zf.read(part), part)
            master_id = root.get("Self") or part
            pages = _spread_pages(root, 0, part)
            if not pages:
                continue
            walker = _Walker(layers, opts)
            walker.walk(root, IDENTITY, part)
            placed = []
            for item in walker.items:
                idx, local = assign_to_page(item.quad, pages)
                placed.append((idx, item.category, local, item.label))
            master_items[master_id] = (len(pages), placed)

    page_seeds: list[tuple[str, Quad, str]] = []
    page_entities: list[list[EntityRecord]] = []
    skipped = 0
    for part in spread_parts:
        if part not in names:
            raise MalformedSpread(part, "listed in designmap but missing from package")
        root = _parse_spread_part(zf.read(part), part)
        first_index = len(page_seeds)
        pages = _spread_pages(root, first_index, part)
        if not pages:
            raise NoPagesInSpread(f"{part} has no Page elements")
        seeds = _page_record_seeds(root)
        page_seeds.extend(seeds)
        page_entities.extend([] for _ in seeds)

        walker = _Walker(layers, opts)
        walker.walk(root, IDENTITY, part)
        skipped += walker.skipped
        for item in walker.items:
            idx, local = assign_to_page(item.quad, pages)
            page_entities[idx].append(EntityRecord(
                category=item.category,
                quad=local,
                label=item.label,
                page_index=idx,
            ))
        if opts.include_master_spreads:
            for offset, (_, _, master_ref) in enumerate(seeds):
                if master_ref not in master_items:
                    continue
                master_page_count, placed = master_items[master_ref]
                # facing-page masters map by position within the spread
                want = offset % master_page_count
                idx = first_index + offset
                for midx, category, quad, label in placed:
                    if midx != want:
                        continue
                    page_entities[idx].append(EntityRecord(
                        category=category,
                        quad=quad,
                        label=label,
                        page_index=idx,
                    ))

    if skipped:
        logger.warning("%d page item(s) skipped in %s", skipped, source_name or "package")

    pages_out = []
    for i, (number, bounds, _) in enumerate(page_seeds):
        pages_out.append(PageRecord(
            index=i,
            number=number or str(i + 1),
            bounds=bounds,
            entities=tuple(page_entities[i]),
        ))
    return DocumentGeometry(
        source_name=source_name,
        source_format="idml",
        pages=tuple(pages_out),
        unit="pt",
    )
