"""Canonical JSON emission shared by every serializer in the package.

All documents written by mlshap go through :func:`dumps` so that identical
inputs always produce identical bytes (sorted keys, fixed separators, floats
rendered at full round-trip precision).
"""

from __future__ import annotations

import json
from pathlib import Path


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str):
    return json.loads(text)


def write(path, doc) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
