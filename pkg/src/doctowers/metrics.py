"""Per-page structure metrics: cardinality, fill, extremes, ribbons.

Fill is the percentage of the page area covered by the union of entity
bounding boxes clipped to the page. Union, not sum: overlapping entities
count once, which keeps fill <= 100 and matches the quality-control
reading of "area covered". The raw sum of clipped areas is exposed
alongside for comparison (it may exceed 100).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import (
    Aabb,
    DocumentGeometry,
    EntityClass,
    PageRecord,
    quad_bbox,
)


def union_area_aabb(boxes: Sequence[Aabb]) -> float:
    """Exact union area via coordinate-compressed sweep over x-strips.

    O(n^2 log n); page entity counts stay far below where that matters.
    """
    if not boxes:
        return 0.0
    xs = sorted({b.xmin for b in boxes} | {b.xmax for b in boxes})
    total = 0.0
    for i in range(len(xs) - 1):
        x0 = xs[i]
        x1 = xs[i + 1]
        spans = sorted(
            (b.ymin, b.ymax) for b in boxes if b.xmin <= x0 and b.xmax >= x1)
        if not spans:
            continue
        covered = 0.0
        cur_lo, cur_hi = spans[0]
        for lo, hi in spans[1:]:
            if lo > cur_hi:
                covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            elif hi > cur_hi:
                cur_hi = hi
        covered += cur_hi - cur_lo
        total += (x1 - x0) * covered
    return total


def _clip(box: Aabb, frame: Aabb) -> Optional[Aabb]:
    xmin = max(box.xmin, frame.xmin)
    ymin = max(box.ymin, frame.ymin)
    xmax = min(box.xmax, frame.xmax)
    ymax = min(box.ymax, frame.ymax)
    if xmax <= xmin or ymax <= ymin:
        return None
    return Aabb(xmin, ymin, xmax, ymax)


@dataclass(frozen=True, slots=True)
class PageMetrics:
    cardinality_total: int
    cardinality_by_class: dict[int, int]
    fill_total_pct: float
    fill_by_class_pct: dict[int, float]
    out_of_frame_count: int
    # sum of clipped entity areas / page area; unlike fill it counts
    # overlaps multiple times and may exceed 100
    fill_sum_pct: float = 0.0


@dataclass(frozen=True, slots=True)
class ExtremePage:
    page_index: int
    number: str
    value: float


@dataclass(frozen=True, slots=True)
class StatsReport:
    per_page: tuple[PageMetrics, ...]
    class_totals: dict[int, int]
    max_cardinality_page: ExtremePage
    max_fill_page: ExtremePage
    min_fill_page: ExtremePage
    out_of_frame_total: int

    def to_dict(self) -> dict:
        def ext(e: ExtremePage) -> dict:
            return {"pageIndex": e.page_index, "number": e.number, "value": e.value}
        return {
            "perPage": [
                {
                    "cardinalityTotal": m.cardinality_total,
                    "cardinalityByClass": {str(k): v for k, v in sorted(m.cardinality_by_class.items())},
                    "fillTotalPct": m.fill_total_pct,
                    "fillByClassPct": {str(k): v for k, v in sorted(m.fill_by_class_pct.items())},
                    "fillSumPct": m.fill_sum_pct,
                    "outOfFrameCount": m.out_of_frame_count,
                }
                for m in self.per_page
            ],
            "classTotals": {str(k): v for k, v in sorted(self.class_totals.items())},
            "extremes": {
                "maxCardinalityPage": ext(self.max_cardinality_page),
                "maxFillPage": ext(self.max_fill_page),
                "minFillPage": ext(self.min_fill_page),
            },
            "outOfFrameTotal": self.out_of_frame_total,
        }


def _selected(page: PageRecord,
              class_filter: Optional[Iterable[EntityClass | int]]):
    if class_filter is None:
        return page.entities
    codes = {c.code if isinstance(c, EntityClass) else int(c) for c in class_filter}
    return [e for e in page.entities if e.category.code in codes]


def page_cardinality(page: PageRecord,
                     class_filter: Optional[Iterable[EntityClass | int]] = None,
                     ) -> tuple[int, dict[int, int], int]:
    """Entity counts for one page: (total, by class code, out-of-frame).

    Out-of-frame entities (no positive-area overlap with the page bounds)
    are counted in the totals and reported separately.
    """
    frame = quad_bbox(page.bounds)
    by_class: dict[int, int] = {}
    out_of_frame = 0
    selected = _selected(page, class_filter)
    for e in selected:
        code = e.category.code
        by_class[code] = by_class.get(code, 0) + 1
        if _clip(quad_bbox(e.quad), frame) is None:
            out_of_frame += 1
    return len(selected), by_class, out_of_frame


def page_fill(page: PageRecord,
              class_filter: Optional[Iterable[EntityClass | int]] = None) -> float:
    """Percent of the page area covered by the selected entities.

    Entity footprints contribute their bounding box clipped to the page;
    entities wholly outside the page contribute nothing.
    """
    frame = quad_bbox(page.bounds)
    page_area = frame.area()
    clipped = []
    for e in _selected(page, class_filter):
        box = _clip(quad_bbox(e.quad), frame)
        if box is not None:
            clipped.append(box)
    return 100.0 * union_area_aabb(clipped) / page_area


def page_metrics(page: PageRecord) -> PageMetrics:
    frame = quad_bbox(page.bounds)
    page_area = frame.area()
    by_class: dict[int, int] = {}
    clipped_all: list[Aabb] = []
    clipped_by_class: dict[int, list[Aabb]] = {}
    out_of_frame = 0
    sum_areas = 0.0
    for e in page.entities:
        code = e.category.code
        by_class[code] = by_class.get(code, 0) + 1
        box = _clip(quad_bbox(e.quad), frame)
        if box is None:
            out_of_frame += 1
        else:
            clipped_all.append(box)
            clipped_by_class.setdefault(code, []).append(box)
            sum_areas += box.area()
    return PageMetrics(
        cardinality_total=len(page.entities),
        cardinality_by_class=by_class,
        fill_total_pct=100.0 * union_area_aabb(clipped_all) / page_area,
        fill_by_class_pct={
            code: 100.0 * union_area_aabb(boxes) / page_area
            for code, boxes in sorted(clipped_by_class.items())
        },
        out_of_frame_count=out_of_frame,
        fill_sum_pct=100.0 * sum_areas / page_area,
    )


def document_stats(doc: DocumentGeometry) -> StatsReport:
    """Aggregate the per-page metrics; extreme-page ties break to the
    lowest page index."""
    per_page = tuple(page_metrics(p) for p in doc.pages)
    class_totals: dict[int, int] = {}
    for m in per_page:
        for code, count in m.cardinality_by_class.items():
            class_totals[code] = class_totals.get(code, 0) + count

    def extreme(values: Sequence[float], best) -> ExtremePage:
        idx = 0
        for i, v in enumerate(values):
            if best(v, values[idx]):
                idx = i
        return ExtremePage(idx, doc.pages[idx].number, values[idx])

    cards = [float(m.cardinality_total) for m in per_page]
    fills = [m.fill_total_pct for m in per_page]
    return StatsReport(
        per_page=per_page,
        class_totals=class_totals,
        max_cardinality_page=extreme(cards, lambda a, b: a > b),
        max_fill_page=extreme(fills, lambda a, b: a > b),
        min_fill_page=extreme(fills, lambda a, b: a < b),
        out_of_frame_total=sum(m.out_of_frame_count for m in per_page),
    )


# --- ribbons ------------------------------------------------------------

# Two-stop dark-violet to bright-yellow ramp, quantized to 64 steps.
DEFAULT_PALETTE_STOPS = ("#440154", "#fde725")
PALETTE_STEPS = 64


@dataclass(frozen=True, slots=True)
class RibbonSpec:
    metric: str = "fill"  # "cardinality" | "fill"
    scope: str = "perTower"  # "perTower" | "global"
    palette_stops: tuple[str, ...] = DEFAULT_PALETTE_STOPS

    def __post_init__(self):
        if self.metric not in ("cardinality", "fill"):
            raise ValueError(f"unknown ribbon metric {self.metric!r}")
        if self.scope not in ("perTower", "global"):
            raise ValueError(f"unknown ribbon scope {self.scope!r}")
        if len(self.palette_stops) < 2:
            raise ValueError("palette needs at least 2 stops")


def _parse_hex(color: str) -> tuple[int, int, int]:
    s = color.lstrip("#")
    return int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16)


def palette_color(stops: Sequence[str], t: float) -> str:
    """Color at position t in [0,1], linearly interpolated across the
    stops in sRGB and quantized to PALETTE_STEPS levels."""
    t = min(1.0, max(0.0, t))
    step = min(PALETTE_STEPS - 1, int(t * PALETTE_STEPS))
    tq = step / (PALETTE_STEPS - 1)
    segments = len(stops) - 1
    pos = tq * segments
    seg = min(segments - 1, int(pos))
    frac = pos - seg
    r0, g0, b0 = _parse_hex(stops[seg])
    r1, g1, b1 = _parse_hex(stops[seg + 1])
    r = round(r0 + (r1 - r0) * frac)
    g = round(g0 + (g1 - g0) * frac)
    b = round(b0 + (b1 - b0) * frac)
    return f"#{r:02x}{g:02x}{b:02x}"


def ribbon_values(metric_per_page: Sequence[float],
                  spec: RibbonSpec,
                  global_range: Optional[tuple[float, float]] = None,
                  ) -> list[tuple[float, str]]:
    """Normalize a per-page metric to [0,1] and map it through the palette.

    With a degenerate range (max == min) every page normalizes to 0.5.
    `global_range` supplies the min/max when spec.scope is "global".
    """
    if not metric_per_page:
        raise ValueError("no metric values")
    if spec.scope == "global":
        if global_range is None:
            raise ValueError("global scope needs an explicit range")
        lo, hi = global_range
    else:
        lo = min(metric_per_page)
        hi = max(metric_per_page)
    out = []
    for v in metric_per_page:
        t = 0.5 if hi == lo else (v - lo) / (hi - lo)
        out.append((t, palette_color(spec.palette_stops, t)))
    return out
