import math
import random

import pytest

from doctowers.metrics import DEFAULT_PALETTE_STOPS, RibbonSpec, palette_color
from doctowers.model import (
    DocumentGeometry,
    EntityRecord,
    PageRecord,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    quad_bbox,
)
from doctowers.scene import (
    CityScene,
    SceneConfig,
    build_tower,
    emit_scene,
    layout_city,
    page_hyperlink,
    parse_scene,
)

from helpers import random_document


def make_doc(name="doc", pages_spec=((441, 666, ()),)):
    pages = []
    for i, (w, h, rects) in enumerate(pages_spec):
        entities = tuple(
            EntityRecord(category=cat, quad=Quad.from_rect(x, y, rw, rh), page_index=i)
            for cat, x, y, rw, rh in rects)
        pages.append(PageRecord(index=i, number=str(i + 1),
                                bounds=Quad.from_rect(0, 0, w, h), entities=entities))
    return DocumentGeometry(source_name=name, source_format="external",
                            pages=tuple(pages))


class TestBuildTower:
    def test_floor_heights(self):
        doc = make_doc(pages_spec=(
            (441, 666, ()),
            (441, 666, ((TEXT_FRAME, 10, 10, 100, 50),)),
        ))
        tower = build_tower(doc, SceneConfig(floor_height=40))
        assert [f.z for f in tower.floors] == [0, 40]
        (slab,) = tower.slabs
        assert (slab.z0, slab.z1) == (40, 80)
        assert slab.page_index == 1

    def test_full_page_raster_is_blue(self):
        doc = make_doc(pages_spec=((441, 666, ((RASTER_IMAGE, 0, 0, 441, 666),)),))
        tower = build_tower(doc)
        (slab,) = tower.slabs
        assert slab.color == "#1565c0"
        assert quad_bbox(slab.footprint) == quad_bbox(tower.floors[0].outline)

    def test_y_flip(self):
        # entity at the top of the page lands at the top of the scene (high y)
        doc = make_doc(pages_spec=((100, 200, ((TEXT_FRAME, 0, 0, 100, 20),)),))
        tower = build_tower(doc)
        box = quad_bbox(tower.slabs[0].footprint)
        assert box.ymin == 180
        assert box.ymax == 200

    def test_pasteboard_slab_widens_extents(self):
        doc = make_doc(pages_spec=((441, 666, ((RASTER_IMAGE, -50, 0, 40, 40),)),))
        tower = build_tower(doc)
        box = quad_bbox(tower.slabs[0].footprint)
        assert box.xmin == -50
        assert box.xmax == -10
        assert tower.extents[0] == -50
        page_box = quad_bbox(tower.floors[0].outline)
        assert box.xmax <= page_box.xmin  # outside the page outline

    def test_slab_counts_and_heights(self):
        rng = random.Random(83)
        doc = random_document(rng)
        cfg = SceneConfig(floor_height=40)
        tower = build_tower(doc, cfg)
        assert len(tower.slabs) == doc.entity_count
        assert len(tower.floors) == len(doc.pages)
        for slab in tower.slabs:
            assert slab.z1 - slab.z0 == 40.0
            assert slab.z0 / 40.0 == slab.page_index

    def test_extents_contain_every_slab_corner(self):
        rng = random.Random(89)
        for _ in range(20):
            doc = random_document(rng)
            tower = build_tower(doc)
            x0, y0, z0, x1, y1, z1 = tower.extents
            for slab in tower.slabs:
                for p in slab.footprint.corners:
                    assert x0 - 1e-9 <= p.x <= x1 + 1e-9
                    assert y0 - 1e-9 <= p.y <= y1 + 1e-9
                assert z0 <= slab.z0 < slab.z1 <= z1

    def test_hyperlinks(self):
        doc = make_doc(pages_spec=((441, 666, ()), (441, 666, ())))
        tower = build_tower(doc, SceneConfig(pdf_base_url="docs/a.pdf"))
        assert [f.link for f in tower.floors] == [
            "docs/a.pdf#page=1", "docs/a.pdf#page=2"]

    def test_ribbon_max_floor_gets_last_step(self):
        doc = make_doc(pages_spec=(
            (100, 100, ((TEXT_FRAME, 0, 0, 10, 10),)),
            (100, 100, ((TEXT_FRAME, 0, 0, 10, 10), (TEXT_FRAME, 20, 0, 10, 10))),
            (100, 100, ()),
        ))
        cfg = SceneConfig(ribbon=RibbonSpec(metric="cardinality"))
        tower = build_tower(doc, cfg)
        assert tower.floors[1].ribbon == DEFAULT_PALETTE_STOPS[-1]
        assert tower.ribbon_values == (1.0, 2.0, 0.0)

    def test_fill_ribbon_populates_metrics(self):
        doc = make_doc(pages_spec=((100, 100, ((RASTER_IMAGE, 0, 0, 100, 100),)),))
        cfg = SceneConfig(ribbon=RibbonSpec(metric="fill"))
        tower = build_tower(doc, cfg)
        assert tower.metrics is not None
        assert tower.ribbon_values == (100.0,)


class TestPageHyperlink:
    def test_basic(self):
        assert page_hyperlink("doc.pdf", 1) == "doc.pdf#page=1"

    def test_nested_path(self):
        assert page_hyperlink("a/b.pdf", 96) == "a/b.pdf#page=96"

    def test_empty_base(self):
        with pytest.raises(ValueError):
            page_hyperlink("", 1)


class TestLayoutCity:
    def towers(self, names, w=441.0, h=666.0):
        return [build_tower(make_doc(name, ((w, h, ()),))) for name in names]

    def test_grid_89(self):
        towers = self.towers([f"doc{i:03}.pdf" for i in range(89)])
        city = layout_city(towers)
        assert city.grid_columns == 12
        rows = math.ceil(89 / city.grid_columns)
        assert rows == 8
        last = city.towers[-1]
        assert last.origin[1] >= 7 * city.spacing  # sits on the 8th row

    def test_single_tower(self):
        city = layout_city(self.towers(["a"]))
        assert city.grid_columns == 1
        assert city.towers[0].origin == (0.0, 0.0)

    def test_filename_order(self):
        city = layout_city(self.towers(["b.pdf", "a.pdf"]))
        assert [p.tower.id for p in city.towers] == ["a.pdf", "b.pdf"]
        assert city.order_key == "filename"

    def test_ground_rectangles_disjoint(self):
        rng = random.Random(97)
        towers = [build_tower(random_document(rng, name=f"d{i}")) for i in range(12)]
        city = layout_city(towers)
        rects = []
        for p in city.towers:
            x0, y0, _, x1, y1, _ = p.tower.extents
            rects.append((x0 + p.origin[0], y0 + p.origin[1],
                          x1 + p.origin[0], y1 + p.origin[1]))
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                a, b = rects[i], rects[j]
                overlap_w = min(a[2], b[2]) - max(a[0], b[0])
                overlap_h = min(a[3], b[3]) - max(a[1], b[1])
                assert overlap_w <= 0 or overlap_h <= 0

    def test_global_ribbon_range(self):
        docs = [
            make_doc("a", ((100, 100, ((TEXT_FRAME, 0, 0, 10, 10),)),)),
            make_doc("b", ((100, 100, tuple((TEXT_FRAME, i * 10, 0, 5, 5)
                                            for i in range(4))),)),
        ]
        cfg = SceneConfig(ribbon=RibbonSpec(metric="cardinality", scope="global"))
        towers = [build_tower(d, cfg) for d in docs]
        city = layout_city(towers, cfg)
        assert city.global_ribbon_range == (1.0, 4.0)
        # tower b's single floor carries the global max -> last palette step
        tower_b = city.towers[1].tower
        assert tower_b.floors[0].ribbon == palette_color(DEFAULT_PALETTE_STOPS, 1.0)
        tower_a = city.towers[0].tower
        assert tower_a.floors[0].ribbon == palette_color(DEFAULT_PALETTE_STOPS, 0.0)


class TestEmitParse:
    def test_tower_round_trip_bytes(self):
        rng = random.Random(101)
        doc = random_document(rng)
        tower = build_tower(doc, SceneConfig(pdf_base_url="x.pdf"))
        data = emit_scene(tower)
        again = emit_scene(parse_scene(data))
        assert again == data

    def test_city_round_trip_bytes(self):
        rng = random.Random(103)
        towers = [build_tower(random_document(rng, name=f"d{i}")) for i in range(5)]
        city = layout_city(towers)
        data = emit_scene(city)
        parsed = parse_scene(data)
        assert isinstance(parsed, CityScene)
        assert emit_scene(parsed) == data

    def test_header_fields(self):
        import json
        tower = build_tower(make_doc())
        obj = json.loads(emit_scene(tower))
        assert obj["format"] == "DocumentTowersScene"
        assert obj["version"] == "1.0"
        assert obj["kind"] == "tower"
        assert obj["floorHeight"] == 40
        assert len(obj["towers"]) == 1

    def test_labels_survive(self):
        doc = make_doc(pages_spec=((441, 666, ()),))
        page = doc.pages[0]
        entity = EntityRecord(category=TEXT_FRAME, quad=Quad.from_rect(0, 0, 10, 10),
                              label="title")
        doc = DocumentGeometry(
            source_name="x", source_format="external",
            pages=(PageRecord(index=0, number=page.number, bounds=page.bounds,
                              entities=(entity,)),))
        tower = parse_scene(emit_scene(build_tower(doc)))
        assert tower.slabs[0].label == "title"

    def test_ribbon_round_trip(self):
        doc = make_doc(pages_spec=((100, 100, ((TEXT_FRAME, 0, 0, 10, 10),)),))
        cfg = SceneConfig(ribbon=RibbonSpec(metric="cardinality"))
        data = emit_scene(build_tower(doc, cfg))
        parsed = parse_scene(data)
        assert parsed.ribbon == RibbonSpec(metric="cardinality")
        assert emit_scene(parsed) == data
