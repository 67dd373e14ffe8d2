"""Canonical JSON rendering shared by every machine-readable output.

One formatting rule everywhere: UTF-8, LF, two-space indent, keys emitted in
the order the caller built them (schema order, not alphabetical), and a
trailing newline so files are diff- and golden-digest-friendly.  Equal inputs
produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_bytes(document: Any) -> bytes:
    text = json.dumps(document, ensure_ascii=False, indent=2, separators=(",", ": "))
    return text.encode("utf-8") + b"\n"


def canonical_text(document: Any) -> str:
    return canonical_bytes(document).decode("utf-8")
