"""Fixed-format CSV output.

Numbers are written with 17 significant digits so that identical inputs give
byte-identical files.
"""

from __future__ import annotations

import io
import os
from typing import Iterable, Sequence


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    text = csv_text(header, rows)
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return os.fspath(path)


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [[float(v) for v in ln.split(",")] for ln in lines[1:]]
