"""Shared fixture builders and independent oracles for the test suite."""

from __future__ import annotations

import io
import random
import zipfile
from typing import Optional, Sequence

import numpy as np

from doctowers.model import (
    Aabb,
    DocumentGeometry,
    EntityClass,
    EntityRecord,
    PageRecord,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    VECTOR_GRAPHIC,
)

ALTO_NS = "http://www.loc.gov/standards/alto/ns-v3#"


# --- ALTO fixtures -----------------------------------------------------

def alto_block(kind: str, x: float, y: float, w: float, h: float,
               tagrefs: str = "", block_type: str = "",
               children: Sequence[str] = ()) -> str:
    attrs = f'HPOS="{x}" VPOS="{y}" WIDTH="{w}" HEIGHT="{h}"'
    if tagrefs:
        attrs += f' TAGREFS="{tagrefs}"'
    if block_type:
        attrs += f' TYPE="{block_type}"'
    if children:
        return f"<{kind} {attrs}>{''.join(children)}</{kind}>"
    return f"<{kind} {attrs}/>"


def alto_xml(width: float, height: float, unit: str = "pixel",
             blocks: Sequence[str] = (), tags: Sequence[tuple[str, str]] = (),
             physical_img_nr: Optional[str] = None,
             namespace: str = ALTO_NS,
             measurement_unit_element: bool = True) -> bytes:
    ns_attr = f' xmlns="{namespace}"' if namespace else ""
    unit_el = f"<MeasurementUnit>{unit}</MeasurementUnit>" if measurement_unit_element else ""
    tags_el = ""
    if tags:
        tag_items = "".join(
            f'<LayoutTag ID="{tid}" LABEL="{label}"/>' for tid, label in tags)
        tags_el = f"<Tags>{tag_items}</Tags>"
    nr_attr = f' PHYSICAL_IMG_NR="{physical_img_nr}"' if physical_img_nr else ""
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>'
        f'<alto{ns_attr}>'
        f'<Description>{unit_el}</Description>'
        f'{tags_el}'
        f'<Layout>'
        f'<Page WIDTH="{width}" HEIGHT="{height}"{nr_attr}>'
        f'<PrintSpace HPOS="0" VPOS="0" WIDTH="{width}" HEIGHT="{height}">'
        f"{''.join(blocks)}"
        f'</PrintSpace>'
        f'</Page>'
        f'</Layout>'
        f'</alto>'
    ).encode("utf-8")


# --- IDML fixtures -----------------------------------------------------

IDPKG_NS = "http://ns.adobe.com/AdobeInDesign/idml/1.0/packaging"


def _path_geometry(x0: float, y0: float, x1: float, y1: float) -> str:
    anchors = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    points = "".join(
        f'<PathPointType Anchor="{x} {y}" LeftDirection="{x} {y}" RightDirection="{x} {y}"/>'
        for x, y in anchors)
    return (
        "<Properties><PathGeometry>"
        '<GeometryPathType PathOpen="false">'
        f"<PathPointArray>{points}</PathPointArray>"
        "</GeometryPathType>"
        "</PathGeometry></Properties>")


def idml_item(kind: str, self_id: str, bounds: tuple[float, float, float, float],
              transform: str = "1 0 0 1 0 0", content: Optional[str] = None,
              layer: Optional[str] = None,
              children: Sequence[str] = ()) -> str:
    x0, y0, x1, y1 = bounds
    layer_attr = f' ItemLayer="{layer}"' if layer else ""
    inner = _path_geometry(x0, y0, x1, y1)
    if content:
        inner += f'<{content} Self="{self_id}i" ItemTransform="1 0 0 1 0 0"/>'
    inner += "".join(children)
    return (f'<{kind} Self="{self_id}" ItemTransform="{transform}"{layer_attr}>'
            f"{inner}</{kind}>")


def idml_group(self_id: str, transform: str, children: Sequence[str],
               layer: Optional[str] = None) -> str:
    layer_attr = f' ItemLayer="{layer}"' if layer else ""
    return (f'<Group Self="{self_id}" ItemTransform="{transform}"{layer_attr}>'
            f"{''.join(children)}</Group>")


def idml_page(self_id: str, width: float, height: float,
              transform: str = "1 0 0 1 0 0", name: str = "",
              master: str = "n") -> str:
    return (f'<Page Self="{self_id}" Name="{name}" AppliedMaster="{master}" '
            f'GeometricBounds="0 0 {height} {width}" ItemTransform="{transform}"/>')


def idml_spread(self_id: str, pages: Sequence[str], items: Sequence[str],
                master: bool = False) -> str:
    tag = "MasterSpread" if master else "Spread"
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<idPkg:{tag} xmlns:idPkg="{IDPKG_NS}">'
        f'<{tag} Self="{self_id}">'
        f"{''.join(pages)}{''.join(items)}"
        f"</{tag}>"
        f"</idPkg:{tag}>"
    )


def build_idml(spreads: Sequence[tuple[str, str]],
               masters: Sequence[tuple[str, str]] = (),
               layers: Sequence[tuple[str, str, bool]] = (),
               extra_parts: Sequence[tuple[str, bytes]] = ()) -> bytes:
    """Assemble IDML package bytes.

    spreads/masters are (self id, spread xml) pairs; layers are
    (self id, name, visible) triples.
    """
    layer_els = "".join(
        f'<Layer Self="{lid}" Name="{name}" Visible="{str(visible).lower()}"/>'
        for lid, name, visible in layers)
    spread_refs = "".join(
        f'<idPkg:Spread src="Spreads/Spread_{sid}.xml"/>' for sid, _ in spreads)
    master_refs = "".join(
        f'<idPkg:MasterSpread src="MasterSpreads/MasterSpread_{sid}.xml"/>'
        for sid, _ in masters)
    designmap = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<Document DOMVersion="16.0" Self="d" xmlns:idPkg="{IDPKG_NS}">'
        f"{layer_els}{master_refs}{spread_refs}"
        "</Document>")

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("mimetype", "application/vnd.adobe.indesign-idml-package")
        zf.writestr("designmap.xml", designmap)
        for sid, xml in masters:
            zf.writestr(f"MasterSpreads/MasterSpread_{sid}.xml", xml)
        for sid, xml in spreads:
            zf.writestr(f"Spreads/Spread_{sid}.xml", xml)
        for name, data in extra_parts:
            zf.writestr(name, data)
    return buf.getvalue()


def minimal_idml(width: float = 441, height: float = 666,
                 items: Sequence[str] = (), layers=(),
                 page_name: str = "1") -> bytes:
    spread = idml_spread("uS1", [idml_page("uP1", width, height, name=page_name)], items)
    return build_idml([("uS1", spread)], layers=layers)


# --- random documents --------------------------------------------------

_CLASSES = (TEXT_FRAME, RASTER_IMAGE, VECTOR_GRAPHIC)
_LABELS = ("title", "stamp", "footnote", "margin note", None, None)


def random_quad(rng: random.Random, page_w: float, page_h: float) -> Quad:
    kind = rng.random()
    if kind < 0.6:  # axis-aligned, mostly on-page
        x = rng.uniform(-0.2, 0.9) * page_w
        y = rng.uniform(-0.2, 0.9) * page_h
        w = rng.uniform(0.02, 0.5) * page_w
        h = rng.uniform(0.02, 0.5) * page_h
        return Quad.from_rect(x, y, w, h)
    if kind < 0.8:  # integer-valued
        x = rng.randrange(0, int(page_w))
        y = rng.randrange(0, int(page_h))
        return Quad.from_rect(x, y, rng.randrange(1, 200), rng.randrange(1, 200))
    # rotated
    import math
    cx = rng.uniform(0, page_w)
    cy = rng.uniform(0, page_h)
    w = rng.uniform(10, 200)
    h = rng.uniform(10, 200)
    ang = rng.uniform(0, math.tau)
    ca, sa = math.cos(ang), math.sin(ang)
    pts = []
    for dx, dy in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)):
        pts.append((cx + dx * ca - dy * sa, cy + dx * sa + dy * ca))
    return Quad.from_points(pts)


def random_document(rng: random.Random, name: str = "random",
                    max_pages: int = 6, max_entities: int = 8) -> DocumentGeometry:
    registry = {}
    user_class = None
    if rng.random() < 0.3:
        registry = {100: "margin_note"}
        user_class = EntityClass(100, "margin_note")
    pages = []
    n_pages = rng.randint(1, max_pages)
    for i in range(n_pages):
        w = rng.choice((441.0, 595.5, 612.0))
        h = rng.choice((666.0, 842.25, 792.0))
        entities = []
        for _ in range(rng.randint(0, max_entities)):
            classes = _CLASSES + ((user_class,) if user_class else ())
            entities.append(EntityRecord(
                category=rng.choice(classes),
                quad=random_quad(rng, w, h),
                label=rng.choice(_LABELS),
                page_index=i,
            ))
        number = rng.choice((str(i + 1), "viii", "96", f"A-{i}"))
        pages.append(PageRecord(
            index=i, number=number,
            bounds=Quad.from_rect(0.0, 0.0, w, h),
            entities=tuple(entities),
        ))
    return DocumentGeometry(
        source_name=name,
        source_format=rng.choice(("alto", "idml", "external")),
        pages=tuple(pages),
        unit="pt",
        dpi=rng.choice((None, 300.0)),
        class_registry=registry,
    )


# --- oracles -----------------------------------------------------------

def raster_union_area(boxes: Sequence[Aabb], resolution: int = 2000,
                      domain: Optional[Aabb] = None) -> float:
    """Rasterization oracle for union area: snap box edges to a fixed
    grid and count covered cells."""
    if not boxes:
        return 0.0
    if domain is None:
        domain = Aabb(
            min(b.xmin for b in boxes), min(b.ymin for b in boxes),
            max(b.xmax for b in boxes), max(b.ymax for b in boxes))
    w = domain.xmax - domain.xmin
    h = domain.ymax - domain.ymin
    if w <= 0 or h <= 0:
        return 0.0
    grid = np.zeros((resolution, resolution), dtype=bool)
    sx = resolution / w
    sy = resolution / h
    for b in boxes:
        ix0 = int(round((b.xmin - domain.xmin) * sx))
        ix1 = int(round((b.xmax - domain.xmin) * sx))
        iy0 = int(round((b.ymin - domain.ymin) * sy))
        iy1 = int(round((b.ymax - domain.ymin) * sy))
        ix0, ix1 = max(0, ix0), min(resolution, ix1)
        iy0, iy1 = max(0, iy0), min(resolution, iy1)
        if ix1 > ix0 and iy1 > iy0:
            grid[iy0:iy1, ix0:ix1] = True
    cell_area = (w / resolution) * (h / resolution)
    return float(grid.sum()) * cell_area


def rect_overlap_area(a: Aabb, b: Aabb) -> float:
    """Brute-force rectangle intersection area."""
    w = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    h = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    return w * h if (w > 0 and h > 0) else 0.0
