"""Exception types raised across the package.

Parse errors carry enough context (file part, element path) to point the
user at the offending spot in the input.
"""


class DocTowersError(Exception):
    """Base class for all errors raised by this package."""


class UnknownClassCode(DocTowersError):
    """Entity class code outside the registered set (reserved band 4-99,
    or an unregistered user code >= 100)."""

    def __init__(self, code: int):
        super().__init__(f"unknown entity class code {code}")
        self.code = code


# --- ALTO ingestion ---------------------------------------------------------

class AltoParseError(DocTowersError):
    """Base for ALTO parse failures; carries the element path when known."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message} (at {path})" if path else message)
        self.path = path


class MalformedXml(AltoParseError):
    pass


class MissingPageElement(AltoParseError):
    pass


class UnknownMeasurementUnit(AltoParseError):
    pass


class NonNumericCoordinate(AltoParseError):
    pass


class MixedUnits(DocTowersError):
    """Point- and pixel-measured pages combined without a dpi to reconcile them."""


# --- IDML ingestion ---------------------------------------------------------

class IdmlParseError(DocTowersError):
    pass


class NotAZipArchive(IdmlParseError):
    pass


class MissingDesignMap(IdmlParseError):
    pass


class MalformedSpread(IdmlParseError):
    def __init__(self, part: str, message: str):
        super().__init__(f"{part}: {message}")
        self.part = part


class NoPagesInSpread(IdmlParseError):
    pass


# --- geometry file ----------------------------------------------------------

class GeometryFileError(DocTowersError):
    pass


class BadHeader(GeometryFileError):
    pass


class RecordArityError(GeometryFileError):
    def __init__(self, index: int, length: int):
        super().__init__(f"record {index} has {length} numbers, expected 9")
        self.index = index


class FirstRecordNotPage(GeometryFileError):
    pass


class ParallelArrayMismatch(GeometryFileError):
    pass


class RangeOutOfBounds(GeometryFileError):
    pass


class OverlappingRanges(GeometryFileError):
    pass
