"""Shortest round-trip decimal formatting for file output.

Integral values are written without a decimal point; everything else uses
repr(), which Python guarantees to round-trip bit-exactly. Both file
writers funnel through here so identical input always yields identical
bytes.
"""

from __future__ import annotations

# repr() of ints this large is still exact as a float64
_MAX_EXACT_INT = 2 ** 53


def fmt_num(v: float) -> str:
    if isinstance(v, int):
        return repr(v)
    i = int(v)
    if i == v and abs(i) <= _MAX_EXACT_INT:
        return repr(i)
    return repr(v)


def fmt_array(values) -> str:
    return "[" + ",".join(fmt_num(v) for v in values) + "]"


def as_jsonable(v: float):
    """Collapse integral floats to int so json.dumps prints them bare."""
    if isinstance(v, int):
        return v
    i = int(v)
    if i == v and abs(i) <= _MAX_EXACT_INT:
        return i
    return v
