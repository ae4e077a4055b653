"""Canonical geometric and taxonomic types shared by every module.

All values are immutable after construction and safe to share between
threads. Coordinates are PostScript points (1/72 inch) unless a document
explicitly carries pixel units; page-local coordinates have their origin
at the page's top-left corner with y growing downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

from .errors import UnknownClassCode


class Point2(NamedTuple):
    x: float
    y: float


class Aabb(NamedTuple):
    """Axis-aligned box, xmin <= xmax and ymin <= ymax."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True, slots=True)
class Quad:
    """Quadrilateral footprint stored as four corner pairs (c1..c4).

    The primitive is a quad rather than a box so rotated frames survive
    ingestion without loss; axis-aligned rectangles are the common case.
    """

    x1: float
    y1: float
    x2: float
    y2: float
    x3: float
    y3: float
    x4: float
    y4: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2,
                  self.x3, self.y3, self.x4, self.y4):
            if not math.isfinite(v):
                raise ValueError(f"non-finite quad coordinate {v!r}")

    @classmethod
    def from_rect(cls, x: float, y: float, w: float, h: float) -> "Quad":
        return cls(x, y, x + w, y, x + w, y + h, x, y + h)

    @classmethod
    def from_points(cls, pts: Sequence[tuple[float, float]]) -> "Quad":
        if len(pts) != 4:
            raise ValueError(f"quad needs 4 corners, got {len(pts)}")
        (a, b), (c, d), (e, f), (g, h) = pts
        return cls(a, b, c, d, e, f, g, h)

    @property
    def corners(self) -> tuple[Point2, Point2, Point2, Point2]:
        return (Point2(self.x1, self.y1), Point2(self.x2, self.y2),
                Point2(self.x3, self.y3), Point2(self.x4, self.y4))

    def coords(self) -> tuple[float, ...]:
        return (self.x1, self.y1, self.x2, self.y2,
                self.x3, self.y3, self.x4, self.y4)


def quad_area(q: Quad) -> float:
    """Absolute shoelace area of the quad in pt^2 (0 for degenerate quads)."""
    s = (q.x1 * (q.y2 - q.y4) + q.x2 * (q.y3 - q.y1)
         + q.x3 * (q.y4 - q.y2) + q.x4 * (q.y1 - q.y3))
    return abs(s) / 2.0


def quad_bbox(q: Quad) -> Aabb:
    """Smallest axis-aligned box containing all four corners."""
    xs = (q.x1, q.x2, q.x3, q.x4)
    ys = (q.y1, q.y2, q.y3, q.y4)
    return Aabb(min(xs), min(ys), max(xs), max(ys))


# --- entity classes ---------------------------------------------------------

@dataclass(frozen=True, slots=True)
class EntityClass:
    code: int
    name: str


PAGE = EntityClass(0, "page")
TEXT_FRAME = EntityClass(1, "text_frame")
RASTER_IMAGE = EntityClass(2, "raster_image")
VECTOR_GRAPHIC = EntityClass(3, "vector_graphic")

BASE_CLASSES: Mapping[int, EntityClass] = {
    0: PAGE, 1: TEXT_FRAME, 2: RASTER_IMAGE, 3: VECTOR_GRAPHIC,
}

# Codes 4-99 are reserved for future standard classes; user-defined classes
# start at 100 and must be registered (geometry files carry the registry in
# their metadata).
USER_CODE_MIN = 100


def class_for_code(code: int,
                   registry: Optional[Mapping[int, str]] = None) -> EntityClass:
    """Resolve a class code to its EntityClass.

    `registry` maps user codes (>= 100) to names. Raises UnknownClassCode
    for the reserved band 4-99 and for unregistered user codes.
    """
    cls = BASE_CLASSES.get(code)
    if cls is not None:
        return cls
    if code >= USER_CODE_MIN and registry and code in registry:
        return EntityClass(code, registry[code])
    raise UnknownClassCode(code)


def code_for_class(cls: EntityClass) -> int:
    return cls.code


# --- records ----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class EntityRecord:
    """One spatial entity on a page.

    `quad` is in page-local coordinates and is deliberately NOT clipped to
    the page: items parked outside the visible page area are kept as-is so
    they stay discoverable downstream.
    """

    category: EntityClass
    quad: Quad
    label: Optional[str] = None
    page_index: int = 0

    def __post_init__(self):
        if self.category.code == 0:
            raise ValueError("entity records cannot use the page class")
        if self.label is not None and not self.label.strip():
            raise ValueError("entity label must be non-empty when present")
        if self.page_index < 0:
            raise ValueError("page_index must be >= 0")


@dataclass(frozen=True, slots=True)
class PageRecord:
    """A page and the entities assigned to it.

    `number` is the display label ("viii", "96", ...); `index` is the
    0-based position in the document. `bounds` is conventionally an
    axis-aligned rectangle with its first corner at the origin.
    """

    index: int
    number: str
    bounds: Quad
    entities: tuple[EntityRecord, ...] = ()

    def __post_init__(self):
        if quad_area(self.bounds) <= 0:
            raise ValueError(f"page {self.index} bounds have zero area")
        for e in self.entities:
            if e.page_index != self.index:
                raise ValueError(
                    f"entity page_index {e.page_index} != page index {self.index}")


@dataclass(frozen=True, slots=True)
class DocumentGeometry:
    """Ordered pages plus source metadata; the unit the geometry file stores.

    `unit` is "px" only when the source measured in pixels and no dpi was
    available to convert; everything else is points. `class_registry` maps
    user class codes (>= 100) to names.
    """

    source_name: str
    source_format: str  # "alto" | "idml" | "external"
    pages: tuple[PageRecord, ...]
    unit: str = "pt"
    dpi: Optional[float] = None
    class_registry: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.pages:
            raise ValueError("a document needs at least one page")
        if self.source_format not in ("alto", "idml", "external"):
            raise ValueError(f"unknown source format {self.source_format!r}")
        if self.unit not in ("pt", "px"):
            raise ValueError(f"unknown unit {self.unit!r}")
        if self.dpi is not None and self.dpi <= 0:
            raise ValueError("dpi must be positive")
        for i, page in enumerate(self.pages):
            if page.index != i:
                raise ValueError(f"page at position {i} carries index {page.index}")

    @property
    def entity_count(self) -> int:
        return sum(len(p.entities) for p in self.pages)
