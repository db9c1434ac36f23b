"""Canonical JSON used for content addressing and stored artifacts.

Keys are sorted and floats are rendered with 17 significant digits, so
the same in-memory object always hashes to the same bytes on every
platform. NaN and infinities are rejected: stored artifacts must be
loadable by any strict JSON parser.
"""

import hashlib
import json
import math


def _render(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float cannot be serialized canonically")
        if obj == int(obj) and abs(obj) < 1e16:
            out.append(f"{obj:.1f}")
        else:
            out.append(f"{obj:.17g}")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _render(obj[key], out)
        out.append("}")
    elif hasattr(obj, "item"):  # numpy scalar
        _render(obj.item(), out)
    else:
        raise TypeError(f"cannot canonically serialize {type(obj).__name__}")


def canonical_json(obj):
    out = []
    _render(obj, out)
    return "".join(out)


def content_hash(obj):
    """Hex SHA-256 of the canonical JSON form."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
