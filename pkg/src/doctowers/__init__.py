"""Spatial document structure as 3D towers and cities.

Parse ALTO and IDML layouts into a canonical geometry file, compute
per-page structure metrics, and build scene files for the browser
viewer.
"""

from .alto import AltoIngestOptions, assemble_document, parse_alto_page, to_points
from .idml import (
    Affine2,
    IdmlIngestOptions,
    apply_affine,
    assign_to_page,
    compose_affine,
    invert_affine,
    parse_idml,
)
from .metrics import (
    PageMetrics,
    RibbonSpec,
    StatsReport,
    document_stats,
    page_cardinality,
    page_fill,
    ribbon_values,
    union_area_aabb,
)
from .model import (
    Aabb,
    DocumentGeometry,
    EntityClass,
    EntityRecord,
    PAGE,
    PageRecord,
    Point2,
    Quad,
    RASTER_IMAGE,
    TEXT_FRAME,
    VECTOR_GRAPHIC,
    class_for_code,
    code_for_class,
    quad_area,
    quad_bbox,
)
from .scene import (
    CityScene,
    SceneConfig,
    TowerScene,
    build_tower,
    emit_scene,
    layout_city,
    page_hyperlink,
    parse_scene,
)
from .store import merge_documents, read_geometry, split_document, write_geometry

__version__ = "0.1.0"

__all__ = [
    "Aabb", "Affine2", "AltoIngestOptions", "CityScene", "DocumentGeometry",
    "EntityClass", "EntityRecord", "IdmlIngestOptions", "PAGE", "PageMetrics",
    "PageRecord", "Point2", "Quad", "RASTER_IMAGE", "RibbonSpec", "SceneConfig",
    "StatsReport", "TEXT_FRAME", "TowerScene", "VECTOR_GRAPHIC",
    "apply_affine", "assemble_document", "assign_to_page", "build_tower",
    "class_for_code", "code_for_class", "compose_affine", "document_stats",
    "emit_scene", "invert_affine", "layout_city", "merge_documents",
    "page_cardinality", "page_fill", "page_hyperlink", "parse_alto_page",
    "parse_idml", "parse_scene", "quad_area", "quad_bbox", "read_geometry",
    "ribbon_values", "split_document", "to_points", "union_area_aabb",
    "write_geometry",
]
