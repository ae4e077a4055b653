import math
import random

import pytest
from hypothesis import given, strategies as st

from doctowers.errors import UnknownClassCode
from doctowers.model import (
    Aabb,
    EntityRecord,
    PAGE,
    PageRecord,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    class_for_code,
    code_for_class,
    quad_area,
    quad_bbox,
)


class TestQuadArea:
    def test_unit_square(self):
        q = Quad(0, 0, 1, 0, 1, 1, 0, 1)
        assert quad_area(q) == 1.0

    def test_page_rectangle(self):
        q = Quad(0, 0, 441, 0, 441, 666, 0, 666)
        assert quad_area(q) == 293706.0

    def test_degenerate_point(self):
        q = Quad(5, 5, 5, 5, 5, 5, 5, 5)
        assert quad_area(q) == 0.0

    @given(w=st.floats(0.001, 1e6), h=st.floats(0.001, 1e6))
    def test_origin_rect_area_exact(self, w, h):
        assert quad_area(Quad.from_rect(0, 0, w, h)) == w * h

    @given(x=st.integers(-1000, 1000), y=st.integers(-1000, 1000),
           w=st.integers(1, 5000), h=st.integers(1, 5000))
    def test_integer_rect_area_exact(self, x, y, w, h):
        assert quad_area(Quad.from_rect(x, y, w, h)) == w * h

    def test_invariant_under_corner_rotation(self):
        rng = random.Random(7)
        for _ in range(500):
            pts = [(rng.uniform(-100, 100), rng.uniform(-100, 100)) for _ in range(4)]
            base = quad_area(Quad.from_points(pts))
            for k in range(1, 4):
                rotated = pts[k:] + pts[:k]
                assert quad_area(Quad.from_points(rotated)) == pytest.approx(base, rel=1e-9, abs=1e-9)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Quad(0, 0, 1, 0, 1, float("nan"), 0, 1)


class TestQuadBbox:
    def test_rotated_square(self):
        q = Quad(1, 0, 2, 1, 1, 2, 0, 1)
        assert quad_bbox(q) == Aabb(0, 0, 2, 2)

    def test_page_rectangle(self):
        q = Quad(0, 0, 441, 0, 441, 666, 0, 666)
        assert quad_bbox(q) == Aabb(0, 0, 441, 666)

    def test_single_point(self):
        q = Quad(3, 4, 3, 4, 3, 4, 3, 4)
        assert quad_bbox(q) == Aabb(3, 4, 3, 4)

    def test_contains_all_corners(self):
        rng = random.Random(11)
        for _ in range(10_000):
            q = Quad(*[rng.uniform(-1e4, 1e4) for _ in range(8)])
            box = quad_bbox(q)
            for p in q.corners:
                assert box.xmin <= p.x <= box.xmax
                assert box.ymin <= p.y <= box.ymax


class TestEntityClasses:
    def test_page_code(self):
        assert class_for_code(0) is PAGE

    def test_raster_code(self):
        assert class_for_code(2) is RASTER_IMAGE

    def test_reserved_band_rejected(self):
        for code in (4, 7, 99):
            with pytest.raises(UnknownClassCode):
                class_for_code(code)

    def test_unregistered_user_code_rejected(self):
        with pytest.raises(UnknownClassCode):
            class_for_code(100)

    def test_registered_user_code(self):
        cls = class_for_code(123, {123: "marginalia"})
        assert cls.code == 123
        assert cls.name == "marginalia"

    def test_round_trip(self):
        registry = {100: "a", 150: "b"}
        for code in (0, 1, 2, 3, 100, 150):
            assert code_for_class(class_for_code(code, registry)) == code


class TestRecords:
    def test_entity_cannot_be_page(self):
        with pytest.raises(ValueError):
            EntityRecord(category=PAGE, quad=Quad.from_rect(0, 0, 1, 1))

    def test_blank_label_rejected(self):
        with pytest.raises(ValueError):
            EntityRecord(category=TEXT_FRAME, quad=Quad.from_rect(0, 0, 1, 1), label="  ")

    def test_page_requires_positive_area(self):
        with pytest.raises(ValueError):
            PageRecord(index=0, number="1", bounds=Quad(0, 0, 0, 0, 0, 0, 0, 0))

    def test_entity_page_index_must_match(self):
        e = EntityRecord(category=TEXT_FRAME, quad=Quad.from_rect(0, 0, 1, 1), page_index=2)
        with pytest.raises(ValueError):
            PageRecord(index=0, number="1", bounds=Quad.from_rect(0, 0, 10, 10),
                       entities=(e,))
