"""Extrude documents into tower scenes and arrange towers into cities.

Page i becomes a floor at z = i * floorHeight; every entity becomes a
slab spanning that floor's full height at its footprint. Footprints are
flipped to a y-up convention when extruded (page tops face the viewer's
north) and are NOT clipped to the page, so items parked outside the
visible page protrude from the tower and stay discoverable.

The scene file (`.dts.json`) is the hand-over to the viewer: UTF-8 JSON,
deterministic bytes, shortest round-trip numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .metrics import (
    DEFAULT_PALETTE_STOPS,
    RibbonSpec,
    StatsReport,
    document_stats,
    ribbon_values,
)
from .model import DocumentGeometry, Quad, quad_bbox
from .numfmt import fmt_array, fmt_num

FORMAT_NAME = "DocumentTowersScene"
FORMAT_VERSION = "1.0"
FILE_EXTENSION = ".dts.json"

DEFAULT_CLASS_COLORS = {
    0: "#9e9e9e",  # page outlines
    1: "#2e7d32",  # text frames
    2: "#1565c0",  # raster images (blue)
    3: "#c62828",  # vector graphics
}
# user-defined classes (code >= 100) cycle through these
USER_CLASS_COLORS = ("#6a1b9a", "#00838f", "#ef6c00", "#5d4037")


@dataclass(frozen=True, slots=True)
class SceneConfig:
    floor_height: float = 40.0
    floor_plate_fraction: float = 0.04  # of floor height, render-only
    class_colors: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_CLASS_COLORS))
    ribbon: Optional[RibbonSpec] = None
    pdf_base_url: Optional[str] = None
    grid_aspect: float = 1.6
    compute_stats: bool = False

    def __post_init__(self):
        if self.floor_height <= 0:
            raise ValueError("floor height must be positive")
        if not 0 <= self.floor_plate_fraction <= 1:
            raise ValueError("floor plate fraction must be within [0,1]")

    def color_for(self, code: int) -> str:
        color = self.class_colors.get(code)
        if color is None:
            color = USER_CLASS_COLORS[(code - 100) % len(USER_CLASS_COLORS)] \
                if code >= 100 else "#616161"
        return color.lower()


@dataclass(frozen=True, slots=True)
class Slab:
    class_code: int
    footprint: Quad  # y-up scene coordinates
    z0: float
    z1: float
    page_index: int
    color: str
    label: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Floor:
    z: float
    outline: Quad  # y-up scene coordinates
    number: str
    ribbon: Optional[str] = None  # facade color band
    link: Optional[str] = None


@dataclass(frozen=True, slots=True)
class TowerScene:
    id: str
    floor_height: float
    plate_fraction: float
    floors: tuple[Floor, ...]
    slabs: tuple[Slab, ...]
    extents: tuple[float, float, float, float, float, float]  # x0 y0 z0 x1 y1 z1
    ribbon: Optional[RibbonSpec] = None
    ribbon_values: Optional[tuple[float, ...]] = None  # raw metric per floor
    metrics: Optional[StatsReport] = None  # not serialized


@dataclass(frozen=True, slots=True)
class PlacedTower:
    tower: TowerScene
    origin: tuple[float, float]


@dataclass(frozen=True, slots=True)
class CityScene:
    towers: tuple[PlacedTower, ...]
    grid_columns: int
    spacing: float
    floor_height: float
    plate_fraction: float
    order_key: str = "filename"
    ribbon: Optional[RibbonSpec] = None
    global_ribbon_range: Optional[tuple[float, float]] = None


def page_hyperlink(base_url: str, position: int) -> str:
    """PDF open-parameter link for the page at the given 1-based position."""
    if not base_url:
        raise ValueError("empty base URL")
    return f"{base_url}#page={position}"


def build_tower(doc: DocumentGeometry, cfg: SceneConfig = SceneConfig()) -> TowerScene:
    """Extrude one document into a tower.

    Ribbon colors are filled in for per-tower scope; global scope stores
    the raw values and leaves coloring to layout_city.
    """
    h = cfg.floor_height
    metrics_report: Optional[StatsReport] = None
    values: Optional[list[float]] = None
    if cfg.ribbon is not None:
        if cfg.ribbon.metric == "fill" or cfg.compute_stats:
            metrics_report = document_stats(doc)
        if cfg.ribbon.metric == "fill":
            values = [m.fill_total_pct for m in metrics_report.per_page]
        else:
            values = [float(len(p.entities)) for p in doc.pages]
    elif cfg.compute_stats:
        metrics_report = document_stats(doc)

    colors: Optional[list[str]] = None
    if values is not None and cfg.ribbon.scope == "perTower":
        colors = [color for _, color in ribbon_values(values, cfg.ribbon)]

    floors: list[Floor] = []
    slabs: list[Slab] = []
    xmin = ymin = math.inf
    xmax = ymax = -math.inf
    for page in doc.pages:
        z = page.index * h
        pb = quad_bbox(page.bounds)
        flip = pb.ymin + pb.ymax  # reflect page-local y within the page
        b = page.bounds
        outline = Quad(b.x1, flip - b.y1, b.x2, flip - b.y2,
                       b.x3, flip - b.y3, b.x4, flip - b.y4)
        link = None
        if cfg.pdf_base_url:
            link = page_hyperlink(cfg.pdf_base_url, page.index + 1)
        floors.append(Floor(
            z=z,
            outline=outline,
            number=page.number,
            ribbon=colors[page.index] if colors is not None else None,
            link=link,
        ))
        xmin = min(xmin, pb.xmin)
        xmax = max(xmax, pb.xmax)
        ymin = min(ymin, flip - pb.ymax)
        ymax = max(ymax, flip - pb.ymin)
        z1 = z + h
        for e in page.entities:
            q = e.quad
            fq = Quad(q.x1, flip - q.y1, q.x2, flip - q.y2,
                      q.x3, flip - q.y3, q.x4, flip - q.y4)
            slabs.append(Slab(
                class_code=e.category.code,
                footprint=fq,
                z0=z,
                z1=z1,
                page_index=page.index,
                color=cfg.color_for(e.category.code),
                label=e.label,
            ))
            eb = quad_bbox(fq)
            if eb.xmin < xmin:
                xmin = eb.xmin
            if eb.xmax > xmax:
                xmax = eb.xmax
            if eb.ymin < ymin:
                ymin = eb.ymin
            if eb.ymax > ymax:
                ymax = eb.ymax

    return TowerScene(
        id=doc.source_name,
        floor_height=h,
        plate_fraction=cfg.floor_plate_fraction,
        floors=tuple(floors),
        slabs=tuple(slabs),
        extents=(xmin, ymin, 0.0, xmax, ymax, len(doc.pages) * h),
        ribbon=cfg.ribbon,
        ribbon_values=tuple(values) if values is not None else None,
        metrics=metrics_report,
    )


def layout_city(towers: Sequence[TowerScene],
                cfg: SceneConfig = SceneConfig()) -> CityScene:
    """Arrange towers on a grid, row-major in ascending id order.

    The grid pitch is 1.25x the largest ground-footprint extent (both
    axes considered), which keeps neighboring footprints separated by at
    least a quarter of that extent.
    """
    if not towers:
        raise ValueError("no towers to lay out")
    ordered = sorted(towers, key=lambda t: t.id)
    n = len(ordered)
    columns = min(n, max(1, math.ceil(math.sqrt(n * cfg.grid_aspect))))

    largest = max(
        max(t.extents[3] - t.extents[0], t.extents[4] - t.extents[1])
        for t in ordered)
    spacing = 1.25 * largest if largest > 0 else 1.0

    global_range: Optional[tuple[float, float]] = None
    if cfg.ribbon is not None and cfg.ribbon.scope == "global":
        all_values = [v for t in ordered if t.ribbon_values for v in t.ribbon_values]
        if all_values:
            global_range = (min(all_values), max(all_values))

    placed: list[PlacedTower] = []
    for i, tower in enumerate(ordered):
        row, col = divmod(i, columns)
        origin = (col * spacing - tower.extents[0],
                  row * spacing - tower.extents[1])
        if global_range is not None and tower.ribbon_values:
            colored = ribbon_values(list(tower.ribbon_values), cfg.ribbon, global_range)
            floors = tuple(
                Floor(f.z, f.outline, f.number, colored[j][1], f.link)
                for j, f in enumerate(tower.floors))
            tower = TowerScene(
                id=tower.id,
                floor_height=tower.floor_height,
                plate_fraction=tower.plate_fraction,
                floors=floors,
                slabs=tower.slabs,
                extents=tower.extents,
                ribbon=tower.ribbon,
                ribbon_values=tower.ribbon_values,
                metrics=tower.metrics,
            )
        placed.append(PlacedTower(tower=tower, origin=origin))

    return CityScene(
        towers=tuple(placed),
        grid_columns=columns,
        spacing=spacing,
        floor_height=cfg.floor_height,
        plate_fraction=cfg.floor_plate_fraction,
        ribbon=cfg.ribbon,
        global_ribbon_range=global_range,
    )


# --- serialization ------------------------------------------------------

def _ribbon_json(spec: RibbonSpec) -> str:
    return json.dumps({
        "metric": spec.metric,
        "scope": spec.scope,
        "palette": list(spec.palette_stops),
    }, separators=(",", ":"))


def _tower_parts(tower: TowerScene, origin: Optional[tuple[float, float]]) -> str:
    out = ['{"id":', json.dumps(tower.id, ensure_ascii=False)]
    if origin is not None:
        out.append(f',"origin":[{fmt_num(origin[0])},{fmt_num(origin[1])}]')
    out.append(',"extents":' + fmt_array(tower.extents))
    if tower.ribbon_values is not None:
        out.append(',"ribbonValues":' + fmt_array(tower.ribbon_values))
    out.append(',"floors":[')
    floor_strs = []
    for f in tower.floors:
        s = (f'{{"z":{fmt_num(f.z)},"outline":{fmt_array(f.outline.coords())}'
             f',"number":{json.dumps(f.number, ensure_ascii=False)}')
        if f.ribbon is not None:
            s += f',"ribbon":"{f.ribbon}"'
        if f.link is not None:
            s += ',"link":' + json.dumps(f.link, ensure_ascii=False)
        floor_strs.append(s + "}")
    out.append(",".join(floor_strs))
    out.append('],"slabs":[')
    slab_strs = []
    for s in tower.slabs:
        rec = (f'{{"c":{s.class_code},"q":{fmt_array(s.footprint.coords())}'
               f',"z":[{fmt_num(s.z0)},{fmt_num(s.z1)}],"p":{s.page_index}'
               f',"col":"{s.color}"')
        if s.label is not None:
            rec += ',"label":' + json.dumps(s.label, ensure_ascii=False)
        slab_strs.append(rec + "}")
    out.append(",".join(slab_strs))
    out.append("]}")
    return "".join(out)


def emit_scene(scene: TowerScene | CityScene) -> bytes:
    """Deterministic scene-file bytes; parse_scene is its inverse."""
    is_city = isinstance(scene, CityScene)
    head = [
        '{"format":"%s","version":"%s","kind":"%s"' % (
            FORMAT_NAME, FORMAT_VERSION, "city" if is_city else "tower"),
        f',"floorHeight":{fmt_num(scene.floor_height)}',
        f',"plateFraction":{fmt_num(scene.plate_fraction)}',
    ]
    if scene.ribbon is not None:
        head.append(',"ribbon":' + _ribbon_json(scene.ribbon))
    if is_city:
        head.append(f',"orderKey":{json.dumps(scene.order_key)}')
        head.append(',"grid":{"columns":%d,"spacing":%s}' % (
            scene.grid_columns, fmt_num(scene.spacing)))
        if scene.global_ribbon_range is not None:
            head.append(',"globalRibbonRange":' + fmt_array(scene.global_ribbon_range))
        towers = ",\n".join(
            _tower_parts(p.tower, p.origin) for p in scene.towers)
    else:
        towers = _tower_parts(scene, None)
    head.append(',"towers":[\n')
    return ("".join(head) + towers + "\n]}\n").encode("utf-8")


def _parse_ribbon(obj) -> Optional[RibbonSpec]:
    if obj is None:
        return None
    stops = obj.get("palette")
    return RibbonSpec(
        metric=obj["metric"],
        scope=obj["scope"],
        palette_stops=tuple(stops) if stops else DEFAULT_PALETTE_STOPS,
    )


def _parse_tower(obj, floor_height: float, plate: float,
                 ribbon: Optional[RibbonSpec]) -> TowerScene:
    floors = tuple(
        Floor(
            z=float(f["z"]),
            outline=Quad(*[float(v) for v in f["outline"]]),
            number=str(f["number"]),
            ribbon=f.get("ribbon"),
            link=f.get("link"),
        )
        for f in obj["floors"])
    slabs = tuple(
        Slab(
            class_code=int(s["c"]),
            footprint=Quad(*[float(v) for v in s["q"]]),
            z0=float(s["z"][0]),
            z1=float(s["z"][1]),
            page_index=int(s["p"]),
            color=str(s["col"]),
            label=s.get("label"),
        )
        for s in obj["slabs"])
    rv = obj.get("ribbonValues")
    return TowerScene(
        id=str(obj["id"]),
        floor_height=floor_height,
        plate_fraction=plate,
        floors=floors,
        slabs=slabs,
        extents=tuple(float(v) for v in obj["extents"]),
        ribbon=ribbon,
        ribbon_values=tuple(float(v) for v in rv) if rv is not None else None,
    )


def parse_scene(data: bytes) -> TowerScene | CityScene:
    obj = json.loads(data)
    if obj.get("format") != FORMAT_NAME:
        raise ValueError(f"not a scene file (format {obj.get('format')!r})")
    floor_height = float(obj.get("floorHeight", 40.0))
    plate = float(obj.get("plateFraction", 0.04))
    ribbon = _parse_ribbon(obj.get("ribbon"))
    kind = obj.get("kind")
    if kind == "tower":
        return _parse_tower(obj["towers"][0], floor_height, plate, ribbon)
    if kind == "city":
        grid = obj.get("grid", {})
        rng = obj.get("globalRibbonRange")
        towers = tuple(
            PlacedTower(
                tower=_parse_tower(t, floor_height, plate, ribbon),
                origin=tuple(float(v) for v in t.get("origin", (0.0, 0.0))),
            )
            for t in obj["towers"])
        return CityScene(
            towers=towers,
            grid_columns=int(grid.get("columns", 1)),
            spacing=float(grid.get("spacing", 0.0)),
            floor_height=floor_height,
            plate_fraction=plate,
            order_key=str(obj.get("orderKey", "filename")),
            ribbon=ribbon,
            global_ribbon_range=tuple(rng) if rng is not None else None,
        )
    raise ValueError(f"unknown scene kind {kind!r}")
